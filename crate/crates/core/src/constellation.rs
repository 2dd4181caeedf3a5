//! Walker-delta shell generation and circular two-body propagation.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::geo::Vec3;

/// Largest plane or slot index the two-digit id scheme can express.
pub const MAX_ID_INDEX: u32 = 99;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstellationConfig {
    pub num_planes: u32,
    pub sats_per_plane: u32,
    pub altitude_km: f64,
    pub inclination_deg: f64,
    /// RAAN of plane 1 at epoch.
    pub raan0_deg: f64,
    /// Walker phasing factor: plane `p + 1` leads plane `p` by
    /// `phase_factor * 360 / (num_planes * sats_per_plane)` degrees.
    /// Default 10, the best match to the reference averages found by
    /// `owsn sweep-phase`.
    pub phase_factor: u32,
}

impl Default for ConstellationConfig {
    fn default() -> Self {
        Self {
            num_planes: 24,
            sats_per_plane: 66,
            altitude_km: 550.0,
            inclination_deg: 53.0,
            raan0_deg: 0.0,
            phase_factor: 10,
        }
    }
}

impl ConstellationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.num_planes == 0 || self.sats_per_plane == 0 {
            return bad("constellation needs at least one plane and one satellite per plane".into());
        }
        if self.num_planes > MAX_ID_INDEX || self.sats_per_plane > MAX_ID_INDEX {
            return bad(format!(
                "{} planes x {} satellites does not fit the two-digit satellite id scheme",
                self.num_planes, self.sats_per_plane
            ));
        }
        if !(self.altitude_km.is_finite() && self.altitude_km > 0.0) {
            return bad(format!("altitude_km must be positive, got {}", self.altitude_km));
        }
        if !(0.0..=180.0).contains(&self.inclination_deg) {
            return bad(format!("inclination_deg {} outside [0, 180]", self.inclination_deg));
        }
        if !self.raan0_deg.is_finite() {
            return bad("raan0_deg must be finite".into());
        }
        if self.phase_factor >= self.num_planes {
            return bad(format!(
                "phase_factor {} must be below num_planes {}",
                self.phase_factor, self.num_planes
            ));
        }
        Ok(())
    }

    pub fn total_satellites(&self) -> usize {
        (self.num_planes * self.sats_per_plane) as usize
    }

    pub fn raan_spacing_deg(&self) -> f64 {
        360.0 / self.num_planes as f64
    }

    pub fn in_plane_spacing_deg(&self) -> f64 {
        360.0 / self.sats_per_plane as f64
    }

    /// Anomaly offset between consecutive planes, degrees.
    pub fn phase_offset_deg(&self) -> f64 {
        self.phase_factor as f64 * 360.0 / (self.num_planes * self.sats_per_plane) as f64
    }
}

/// Satellite identifier `x1PPSS`: two-digit plane then two-digit slot, both 1-based.
///
/// Ordering is by plane then slot, which coincides with the string order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SatId {
    plane: u8,
    slot: u8,
}

impl SatId {
    pub fn new(plane: u32, slot: u32) -> Result<Self> {
        if !(1..=MAX_ID_INDEX).contains(&plane) || !(1..=MAX_ID_INDEX).contains(&slot) {
            return Err(Error::InvalidInput(format!(
                "plane {plane} / slot {slot} outside the id range 1..=99"
            )));
        }
        Ok(Self { plane: plane as u8, slot: slot as u8 })
    }

    pub fn plane(self) -> u32 {
        self.plane as u32
    }

    pub fn slot(self) -> u32 {
        self.slot as u32
    }

    /// Parses an id and checks it lies inside `cfg`.
    pub fn parse_for(s: &str, cfg: &ConstellationConfig) -> Result<Self> {
        let id: SatId = s.parse()?;
        if id.plane() > cfg.num_planes || id.slot() > cfg.sats_per_plane {
            return Err(Error::MalformedSatId {
                id: s.to_owned(),
                reason: "plane or slot beyond the configured constellation",
            });
        }
        Ok(id)
    }
}

pub fn format_id(plane: u32, slot: u32) -> Result<SatId> {
    SatId::new(plane, slot)
}

pub fn parse_id(s: &str) -> Result<(u32, u32)> {
    let id: SatId = s.parse()?;
    Ok((id.plane(), id.slot()))
}

impl fmt::Display for SatId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x1{:02}{:02}", self.plane, self.slot)
    }
}

impl FromStr for SatId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let malformed = |reason| Error::MalformedSatId { id: s.to_owned(), reason };
        let digits = s.strip_prefix("x1").ok_or_else(|| malformed("missing \"x1\" prefix"))?;
        if digits.len() != 4 || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed("expected four digits after the prefix"));
        }
        let plane: u32 = digits[..2].parse().map_err(|_| malformed("bad plane digits"))?;
        let slot: u32 = digits[2..].parse().map_err(|_| malformed("bad slot digits"))?;
        if plane == 0 || slot == 0 {
            return Err(malformed("plane and slot are 1-based"));
        }
        SatId::new(plane, slot)
    }
}

impl Serialize for SatId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SatId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatelliteElement {
    pub id: SatId,
    pub raan_rad: f64,
    /// Argument of latitude at epoch.
    pub anomaly0_rad: f64,
}

impl SatelliteElement {
    pub fn plane_index(&self) -> u32 {
        self.id.plane()
    }

    pub fn slot_index(&self) -> u32 {
        self.id.slot()
    }
}

/// Element grid for `cfg`, plane-major then slot order.
pub fn build_constellation(cfg: &ConstellationConfig) -> Result<Vec<SatelliteElement>> {
    cfg.validate()?;
    let raan_step = cfg.raan_spacing_deg();
    let slot_step = cfg.in_plane_spacing_deg();
    let phase = cfg.phase_offset_deg();
    let mut sats = Vec::with_capacity(cfg.total_satellites());
    for plane in 1..=cfg.num_planes {
        let raan = (cfg.raan0_deg + (plane - 1) as f64 * raan_step).rem_euclid(360.0);
        for slot in 1..=cfg.sats_per_plane {
            let anomaly =
                ((slot - 1) as f64 * slot_step + (plane - 1) as f64 * phase).rem_euclid(360.0);
            sats.push(SatelliteElement {
                id: SatId::new(plane, slot)?,
                raan_rad: raan.to_radians(),
                anomaly0_rad: anomaly.to_radians(),
            });
        }
    }
    Ok(sats)
}

/// A built shell together with its propagation parameters.
#[derive(Debug, Clone)]
pub struct Constellation {
    config: ConstellationConfig,
    satellites: Vec<SatelliteElement>,
    semi_major_axis_km: f64,
    mean_motion_rad_s: f64,
    cos_inc: f64,
    sin_inc: f64,
}

impl Constellation {
    pub fn new(config: ConstellationConfig, consts: &PhysicalConstants) -> Result<Self> {
        let satellites = build_constellation(&config)?;
        let a = consts.earth_radius_km + config.altitude_km;
        let inc = config.inclination_deg.to_radians();
        Ok(Self {
            semi_major_axis_km: a,
            mean_motion_rad_s: (consts.mu_earth_km3_s2 / (a * a * a)).sqrt(),
            cos_inc: inc.cos(),
            sin_inc: inc.sin(),
            config,
            satellites,
        })
    }

    pub fn config(&self) -> &ConstellationConfig {
        &self.config
    }

    pub fn satellites(&self) -> &[SatelliteElement] {
        &self.satellites
    }

    pub fn len(&self) -> usize {
        self.satellites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.satellites.is_empty()
    }

    pub fn semi_major_axis_km(&self) -> f64 {
        self.semi_major_axis_km
    }

    pub fn mean_motion_rad_s(&self) -> f64 {
        self.mean_motion_rad_s
    }

    pub fn period_s(&self) -> f64 {
        TAU / self.mean_motion_rad_s
    }

    pub fn orbital_speed_km_s(&self) -> f64 {
        self.mean_motion_rad_s * self.semi_major_axis_km
    }

    /// Index of `id` within [`Self::satellites`].
    pub fn index_of(&self, id: SatId) -> Option<usize> {
        if id.plane() > self.config.num_planes || id.slot() > self.config.sats_per_plane {
            return None;
        }
        Some(((id.plane() - 1) * self.config.sats_per_plane + id.slot() - 1) as usize)
    }

    /// Inertial position of `sat` at `t` seconds: `Rz(raan) * Rx(inc) * (a cos u, a sin u, 0)`.
    pub fn position_at(&self, sat: &SatelliteElement, t: f64) -> Vec3 {
        let u = sat.anomaly0_rad + self.mean_motion_rad_s * t;
        let a = self.semi_major_axis_km;
        let (x, y) = (a * u.cos(), a * u.sin());
        let (y_tilt, z) = (y * self.cos_inc, y * self.sin_inc);
        let (sin_o, cos_o) = sat.raan_rad.sin_cos();
        Vec3::new(x * cos_o - y_tilt * sin_o, x * sin_o + y_tilt * cos_o, z)
    }

    pub fn positions_at(&self, t: f64) -> Vec<Vec3> {
        self.satellites.iter().map(|s| self.position_at(s, t)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn starlink() -> Constellation {
        Constellation::new(ConstellationConfig::default(), &PhysicalConstants::default()).unwrap()
    }

    #[test]
    fn default_shell_size_and_ids() {
        let sats = build_constellation(&ConstellationConfig::default()).unwrap();
        assert_eq!(sats.len(), 1584);
        assert_eq!(sats[0].id.to_string(), "x10101");
        assert_eq!(sats[1583].id.to_string(), "x12466");
        let mut ids: Vec<_> = sats.iter().map(|s| s.id).collect();
        ids.dedup();
        assert_eq!(ids.len(), 1584);
        assert!(ids.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn small_uniform_grid() {
        let cfg = ConstellationConfig { num_planes: 2, sats_per_plane: 3, phase_factor: 0, ..Default::default() };
        let sats = build_constellation(&cfg).unwrap();
        let deg = |r: f64| (r.to_degrees() * 1e9).round() / 1e9;
        let raans: Vec<_> = sats.iter().map(|s| deg(s.raan_rad)).collect();
        assert_eq!(raans, [0.0, 0.0, 0.0, 180.0, 180.0, 180.0]);
        let anomalies: Vec<_> = sats.iter().map(|s| deg(s.anomaly0_rad)).collect();
        assert_eq!(anomalies, [0.0, 120.0, 240.0, 0.0, 120.0, 240.0]);
    }

    #[test]
    fn phase_factor_shifts_planes() {
        let cfg = ConstellationConfig { phase_factor: 5, ..Default::default() };
        let sats = build_constellation(&cfg).unwrap();
        let step = 5.0 * 360.0 / 1584.0;
        let plane2_slot1 = sats[66].anomaly0_rad.to_degrees();
        assert!((plane2_slot1 - step).abs() < 1e-9);
        assert!((sats[66].raan_rad.to_degrees() - 15.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_unrepresentable_configs() {
        for cfg in [
            ConstellationConfig { num_planes: 100, ..Default::default() },
            ConstellationConfig { sats_per_plane: 0, ..Default::default() },
            ConstellationConfig { altitude_km: -1.0, ..Default::default() },
            ConstellationConfig { inclination_deg: 181.0, ..Default::default() },
            ConstellationConfig { phase_factor: 24, ..Default::default() },
        ] {
            assert!(build_constellation(&cfg).is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn id_examples() {
        assert_eq!(format_id(1, 1).unwrap().to_string(), "x10101");
        assert_eq!(format_id(24, 54).unwrap().to_string(), "x12454");
        assert_eq!(format_id(15, 3).unwrap().to_string(), "x11503");
        assert_eq!(parse_id("x11503").unwrap(), (15, 3));
    }

    #[test]
    fn id_parse_rejects_malformed() {
        for bad in ["", "x1", "y10101", "x20101", "x1010", "x101011", "x10a01", "x10001", "x10100", "x1+101"] {
            assert!(parse_id(bad).is_err(), "{bad}");
        }
        let cfg = ConstellationConfig::default();
        assert!(SatId::parse_for("x12501", &cfg).is_err());
        assert!(SatId::parse_for("x10167", &cfg).is_err());
        assert!(SatId::parse_for("x12466", &cfg).is_ok());
    }

    #[test]
    fn epoch_and_quarter_period_positions() {
        let c = starlink();
        let sat = c.satellites()[0];
        assert!((c.position_at(&sat, 0.0) - Vec3::new(6928.0, 0.0, 0.0)).norm() < 1e-9);
        let period = c.period_s();
        assert!((period - 5738.6).abs() < 1.0, "{period}");
        let q = c.position_at(&sat, period / 4.0);
        assert!((q - Vec3::new(0.0, 4169.3, 5532.9)).norm() < 0.5, "{q:?}");
    }

    #[test]
    fn orbital_speed_by_finite_difference() {
        let c = starlink();
        let sat = c.satellites()[700];
        for t in [0.0, 1000.0, 3599.0] {
            let h = 1e-3;
            let v = (c.position_at(&sat, t + h) - c.position_at(&sat, t - h)).norm() / (2.0 * h);
            assert!((v - 7.585).abs() < 0.01, "{v}");
        }
        assert!((c.orbital_speed_km_s() - 7.585).abs() < 0.01);
    }

    #[test]
    fn index_of_matches_layout() {
        let c = starlink();
        for (i, s) in c.satellites().iter().enumerate() {
            assert_eq!(c.index_of(s.id), Some(i));
        }
    }

    proptest! {
        #[test]
        fn id_round_trip(plane in 1u32..=99, slot in 1u32..=99) {
            let id = format_id(plane, slot).unwrap();
            prop_assert_eq!(parse_id(&id.to_string()).unwrap(), (plane, slot));
        }

        #[test]
        fn circular_orbit_radius_and_period(idx in 0usize..1584, t in 0.0f64..7200.0) {
            let c = starlink();
            let sat = c.satellites()[idx];
            let p = c.position_at(&sat, t);
            prop_assert!((p.norm() - 6928.0).abs() < 1e-6);
            let q = c.position_at(&sat, t + c.period_s());
            prop_assert!(p.distance(q) < 1e-5);
        }

        #[test]
        fn in_plane_chord_is_time_invariant(plane in 0usize..24, slot in 0usize..66, t in 0.0f64..3600.0) {
            let c = starlink();
            let a = c.satellites()[plane * 66 + slot];
            let b = c.satellites()[plane * 66 + (slot + 1) % 66];
            let d = c.position_at(&a, t).distance(c.position_at(&b, t));
            let expected = 2.0 * 6928.0 * (std::f64::consts::PI / 66.0).sin();
            prop_assert!((d - expected).abs() < 1e-6);
            prop_assert!((d - 659.3).abs() < 0.1);
        }
    }
}
