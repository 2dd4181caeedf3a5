//! Spherical-Earth geometry.
//!
//! Angles are degrees at the public boundary ([`GeodeticPoint`], elevation
//! results) and radians everywhere inside. Cartesian positions are km in an
//! Earth-centred inertial frame whose x-axis passes through the Greenwich
//! meridian at `t = 0`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }
}

impl Add for Vec3 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self::new(self.x * k, self.y * k, self.z * k)
    }
}

/// A labelled point on the spherical Earth.
///
/// Latitude is within `[-90, 90]`; longitude is normalised to `(-180, 180]`
/// on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGeodeticPoint")]
pub struct GeodeticPoint {
    latitude_deg: f64,
    longitude_deg: f64,
    label: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeodeticPoint {
    latitude_deg: f64,
    longitude_deg: f64,
    label: String,
}

impl TryFrom<RawGeodeticPoint> for GeodeticPoint {
    type Error = Error;
    fn try_from(raw: RawGeodeticPoint) -> Result<Self> {
        GeodeticPoint::new(raw.label, raw.latitude_deg, raw.longitude_deg)
    }
}

impl GeodeticPoint {
    pub fn new(label: impl Into<String>, latitude_deg: f64, longitude_deg: f64) -> Result<Self> {
        if !latitude_deg.is_finite() || !(-90.0..=90.0).contains(&latitude_deg) {
            return Err(Error::InvalidInput(format!(
                "latitude {latitude_deg} outside [-90, 90]"
            )));
        }
        if !longitude_deg.is_finite() {
            return Err(Error::InvalidInput(format!("longitude {longitude_deg} is not finite")));
        }
        Ok(Self {
            latitude_deg,
            longitude_deg: normalize_longitude_deg(longitude_deg),
            label: label.into(),
        })
    }

    pub fn latitude_deg(&self) -> f64 {
        self.latitude_deg
    }

    pub fn longitude_deg(&self) -> f64 {
        self.longitude_deg
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Display for GeodeticPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({:.4}, {:.4})", self.label, self.latitude_deg, self.longitude_deg)
    }
}

/// Maps any finite longitude into `(-180, 180]`.
pub fn normalize_longitude_deg(lon: f64) -> f64 {
    if lon > -180.0 && lon <= 180.0 {
        return lon;
    }
    let wrapped = (lon + 180.0).rem_euclid(360.0) - 180.0;
    if wrapped == -180.0 {
        180.0
    } else {
        wrapped
    }
}

/// Central angle between two points, radians, by the haversine formula.
pub fn central_angle(a: &GeodeticPoint, b: &GeodeticPoint) -> f64 {
    let lat1 = a.latitude_deg.to_radians();
    let lat2 = b.latitude_deg.to_radians();
    let dlat = lat2 - lat1;
    let dlon = (b.longitude_deg - a.longitude_deg).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * h.sqrt().min(1.0).asin()
}

/// Surface arc length between two points on a sphere of `radius_km`.
pub fn great_circle_distance(a: &GeodeticPoint, b: &GeodeticPoint, radius_km: f64) -> f64 {
    radius_km * central_angle(a, b)
}

/// Earth-fixed Cartesian position of a surface point, km.
pub fn geodetic_to_fixed(p: &GeodeticPoint, radius_km: f64) -> Vec3 {
    let lat = p.latitude_deg.to_radians();
    let lon = p.longitude_deg.to_radians();
    Vec3::new(
        radius_km * lat.cos() * lon.cos(),
        radius_km * lat.cos() * lon.sin(),
        radius_km * lat.sin(),
    )
}

/// Inertial position of a surface point `t` seconds after epoch.
///
/// The Earth turns eastward at the sidereal rate, so longitude advances by
/// `earth_rotation_rad_s * t`.
pub fn geodetic_to_inertial(p: &GeodeticPoint, t: f64, consts: &PhysicalConstants) -> Vec3 {
    let lat = p.latitude_deg.to_radians();
    let lon = p.longitude_deg.to_radians() + consts.earth_rotation_rad_s * t;
    let r = consts.earth_radius_km;
    Vec3::new(r * lat.cos() * lon.cos(), r * lat.cos() * lon.sin(), r * lat.sin())
}

/// Sub-point of an inertial position: `(latitude_deg, longitude_deg, altitude_km)`.
pub fn inertial_to_geodetic(v: Vec3, t: f64, consts: &PhysicalConstants) -> (f64, f64, f64) {
    let r = v.norm();
    let lat = (v.z / r).asin();
    let lon = v.y.atan2(v.x) - consts.earth_rotation_rad_s * t;
    (
        lat.to_degrees(),
        normalize_longitude_deg(lon.to_degrees()),
        r - consts.earth_radius_km,
    )
}

/// Elevation of `sat` above the local horizon at `gs`, degrees in `[-90, 90]`.
///
/// The horizon plane is the tangent plane of the sphere at `gs`.
pub fn elevation_angle(gs: Vec3, sat: Vec3) -> Result<f64> {
    let line = sat - gs;
    let range = line.norm();
    let up = gs.norm();
    if range == 0.0 || !range.is_finite() {
        return Err(Error::DegenerateGeometry("satellite coincides with ground station"));
    }
    if up == 0.0 {
        return Err(Error::DegenerateGeometry("ground station at Earth's centre"));
    }
    // atan2 of the vertical and horizontal components stays accurate near
    // the zenith, where asin(sin_el) loses precision.
    let vertical = gs.dot(line) / up;
    let horizontal = gs.cross(line).norm() / up;
    Ok(vertical.atan2(horizontal).to_degrees())
}

/// True when the segment `a`-`b` stays strictly outside the sphere of `radius_km`.
pub fn line_of_sight_clear(a: Vec3, b: Vec3, radius_km: f64) -> bool {
    let d = b - a;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return a.norm() > radius_km;
    }
    // Parameter of the point on the infinite line closest to the origin.
    let s = -a.dot(d) / len2;
    if s <= 0.0 || s >= 1.0 {
        return true;
    }
    (a + d * s).norm() > radius_km
}

/// Half-circumference of the sphere; the largest possible great-circle distance.
pub fn max_surface_distance(radius_km: f64) -> f64 {
    PI * radius_km
}
