//! Latency simulator for laser-linked LEO satellite networks compared with
//! terrestrial fiber.
//!
//! A run builds a Walker-delta shell ([`constellation`]), turns each 1 s time
//! slot into a snapshot graph of in-range laser links and ground links
//! ([`topology`]), routes every city pair over it with Dijkstra
//! ([`routing`]), and summarises the sweep against the fiber baseline
//! ([`experiment`]). [`config`] and [`output`] hold the file formats used by
//! the `owsn` command-line tool.

pub mod config;
pub mod constants;
pub mod constellation;
pub mod error;
pub mod experiment;
pub mod geo;
mod grid;
pub mod output;
pub mod routing;
pub mod topology;

pub use constants::PhysicalConstants;
pub use constellation::{Constellation, ConstellationConfig, SatId, SatelliteElement};
pub use error::{Error, Result};
pub use experiment::{Scenario, ScenarioRun, ScenarioSummary, SlotResult};
pub use geo::{GeodeticPoint, Vec3};
pub use routing::{PathOutcome, Route};
pub use topology::{LinkClass, NodeRef, SnapshotGraph, TopologyParams};
