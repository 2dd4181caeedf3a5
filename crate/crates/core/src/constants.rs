use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const C_VACUUM_M_S: f64 = 299_792_458.0;
/// Refractive index of long-haul single-mode fiber at 1,310 nm.
pub const FIBER_REFRACTIVE_INDEX: f64 = 1.4675;
/// Spherical Earth radius, km.
pub const EARTH_RADIUS_KM: f64 = 6378.0;
/// Sidereal rotation rate, rad/s.
pub const EARTH_ROTATION_RAD_S: f64 = 7.292_115_9e-5;
/// Earth gravitational parameter, km^3/s^2.
pub const MU_EARTH_KM3_S2: f64 = 398_600.441_8;

/// Physical constants shared by every stage of a run.
///
/// Loaded once from the run configuration and passed by reference; nothing
/// mutates it afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalConstants {
    pub c_vacuum_m_s: f64,
    pub fiber_refractive_index: f64,
    pub earth_radius_km: f64,
    pub earth_rotation_rad_s: f64,
    pub mu_earth_km3_s2: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            c_vacuum_m_s: C_VACUUM_M_S,
            fiber_refractive_index: FIBER_REFRACTIVE_INDEX,
            earth_radius_km: EARTH_RADIUS_KM,
            earth_rotation_rad_s: EARTH_ROTATION_RAD_S,
            mu_earth_km3_s2: MU_EARTH_KM3_S2,
        }
    }
}

impl PhysicalConstants {
    /// Speed of light in fiber, m/s.
    pub fn c_fiber_m_s(&self) -> f64 {
        self.c_vacuum_m_s / self.fiber_refractive_index
    }

    /// Speed of light in vacuum, km/s.
    pub fn c_vacuum_km_s(&self) -> f64 {
        self.c_vacuum_m_s / 1000.0
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("c_vacuum_m_s", self.c_vacuum_m_s),
            ("fiber_refractive_index", self.fiber_refractive_index),
            ("earth_radius_km", self.earth_radius_km),
            ("mu_earth_km3_s2", self.mu_earth_km3_s2),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {value}")));
            }
        }
        if !self.earth_rotation_rad_s.is_finite() {
            return Err(Error::InvalidConfig("earth_rotation_rad_s must be finite".into()));
        }
        Ok(())
    }
}
