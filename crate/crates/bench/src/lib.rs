//! Shared fixtures for the criterion benches.

use owsn_core::experiment::builtin_scenarios;
use owsn_core::{Constellation, ConstellationConfig, GeodeticPoint, PhysicalConstants};

pub fn starlink() -> (Constellation, PhysicalConstants) {
    let consts = PhysicalConstants::default();
    let shell = Constellation::new(ConstellationConfig::default(), &consts).expect("default shell");
    (shell, consts)
}

pub fn exchange_stations() -> Vec<GeodeticPoint> {
    builtin_scenarios().into_iter().flat_map(|s| [s.src, s.dst]).collect()
}
