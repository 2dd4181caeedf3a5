//! City-pair sweeps: one snapshot per slot, one route per scenario, and the
//! fiber baseline they are compared against.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::geo::{self, GeodeticPoint};
use crate::routing::{self, PathOutcome};
use crate::topology::{self, NodeRef, TopologyParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub src: GeodeticPoint,
    pub dst: GeodeticPoint,
}

impl Scenario {
    pub fn new(name: impl Into<String>, src: GeodeticPoint, dst: GeodeticPoint) -> Self {
        Self { name: name.into(), src, dst }
    }

    /// Lower-case ASCII stem for output file names, e.g. `new_york_dublin`.
    pub fn file_stem(&self) -> String {
        let mut stem = String::new();
        for c in self.name.chars() {
            if c.is_ascii_alphanumeric() {
                stem.push(c.to_ascii_lowercase());
            } else if !stem.ends_with('_') && !stem.is_empty() {
                stem.push('_');
            }
        }
        while stem.ends_with('_') {
            stem.pop();
        }
        if stem.is_empty() {
            stem.push_str("scenario");
        }
        stem
    }

    pub fn src_node(&self) -> NodeRef {
        NodeRef::ground(self.src.label())
    }

    pub fn dst_node(&self) -> NodeRef {
        NodeRef::ground(self.dst.label())
    }

    /// Great-circle distance between the endpoints, km.
    pub fn surface_distance_km(&self, consts: &PhysicalConstants) -> f64 {
        geo::great_circle_distance(&self.src, &self.dst, consts.earth_radius_km)
    }

    /// Straight-line distance between the endpoints at `t` (rotation
    /// invariant), km.
    pub fn chord_km(&self, consts: &PhysicalConstants) -> f64 {
        geo::geodetic_to_inertial(&self.src, 0.0, consts)
            .distance(geo::geodetic_to_inertial(&self.dst, 0.0, consts))
    }

    fn check_routable(&self) -> Result<()> {
        if self.src.label() == self.dst.label() {
            return Err(Error::InvalidConfig(format!(
                "scenario {:?} starts and ends at the same station",
                self.name
            )));
        }
        Ok(())
    }
}

fn exchange(label: &str, lat: f64, lon: f64) -> GeodeticPoint {
    GeodeticPoint::new(label, lat, lon).expect("built-in coordinates are valid")
}

/// The three inter-continental exchange pairs.
///
/// Coordinates are the street addresses of each exchange's main building.
pub fn builtin_scenarios() -> Vec<Scenario> {
    let new_york = exchange("New York Stock Exchange", 40.7069, -74.0113);
    let dublin = exchange("Dublin Stock Exchange", 53.3454, -6.2637);
    let sao_paulo = exchange("Sao Paulo Stock Exchange", -23.5454, -46.6340);
    let london = exchange("London Stock Exchange", 51.5155, -0.0990);
    let toronto = exchange("Toronto Stock Exchange", 43.6486, -79.3853);
    let sydney = exchange("Sydney Stock Exchange", -33.8636, 151.2100);
    vec![
        Scenario::new("New York–Dublin", new_york, dublin),
        Scenario::new("Sao Paulo–London", sao_paulo, london),
        Scenario::new("Toronto–Sydney", toronto, sydney),
    ]
}

/// Propagation latency over fiber laid along the surface path, ms.
pub fn oftn_latency_ms(distance_km: f64, consts: &PhysicalConstants) -> Result<f64> {
    if distance_km.is_nan() || distance_km < 0.0 {
        return Err(Error::InvalidInput(format!("distance {distance_km} km is negative")));
    }
    Ok(distance_km * 1000.0 / consts.c_fiber_m_s() * 1000.0)
}

/// `(improvement_ms, improvement_pct)` of the satellite route over fiber.
pub fn compare(owsn_avg_ms: f64, oftn_ms: f64) -> Result<(f64, f64)> {
    if oftn_ms.is_nan() || oftn_ms <= 0.0 {
        return Err(Error::InvalidInput(format!("baseline latency {oftn_ms} ms must be positive")));
    }
    let improvement_ms = oftn_ms - owsn_avg_ms;
    Ok((improvement_ms, 100.0 * improvement_ms / oftn_ms))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotResult {
    /// 1-based slot number.
    pub slot_index: usize,
    pub time_s: f64,
    pub outcome: PathOutcome,
}

impl SlotResult {
    pub fn latency_ms(&self) -> Option<f64> {
        self.outcome.route().map(|r| r.latency_ms())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub name: String,
    pub oftn_distance_km: f64,
    pub oftn_latency_ms: f64,
    /// Mean over reachable slots; `None` when no slot had a route.
    pub owsn_avg_latency_ms: Option<f64>,
    pub owsn_min_ms: Option<f64>,
    pub owsn_max_ms: Option<f64>,
    pub reachable_slots: usize,
    pub unreachable_slots: usize,
    pub improvement_ms: Option<f64>,
    pub improvement_pct: Option<f64>,
}

impl ScenarioSummary {
    pub fn is_empty(&self) -> bool {
        self.owsn_avg_latency_ms.is_none()
    }
}

pub fn summarize(
    scenario: &Scenario,
    slots: &[SlotResult],
    consts: &PhysicalConstants,
) -> Result<ScenarioSummary> {
    let distance = scenario.surface_distance_km(consts);
    let oftn = oftn_latency_ms(distance, consts)?;
    let mut sum = 0.0;
    let mut reachable = 0usize;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for ms in slots.iter().filter_map(SlotResult::latency_ms) {
        sum += ms;
        reachable += 1;
        min = min.min(ms);
        max = max.max(ms);
    }
    let avg = (reachable > 0).then(|| sum / reachable as f64);
    let improvement = match avg {
        Some(a) if oftn > 0.0 => Some(compare(a, oftn)?),
        _ => None,
    };
    Ok(ScenarioSummary {
        name: scenario.name.clone(),
        oftn_distance_km: distance,
        oftn_latency_ms: oftn,
        owsn_avg_latency_ms: avg,
        owsn_min_ms: avg.map(|_| min),
        owsn_max_ms: avg.map(|_| max),
        reachable_slots: reachable,
        unreachable_slots: slots.len() - reachable,
        improvement_ms: improvement.map(|i| i.0),
        improvement_pct: improvement.map(|i| i.1),
    })
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub scenario: Scenario,
    pub slots: Vec<SlotResult>,
    pub summary: ScenarioSummary,
}

/// Number of slots in a sweep; `slot_s` must divide `duration_s`.
pub fn slot_count(duration_s: u64, slot_s: u64) -> Result<usize> {
    if slot_s == 0 {
        return Err(Error::InvalidConfig("slot_s must be positive".into()));
    }
    if !duration_s.is_multiple_of(slot_s) {
        return Err(Error::InvalidConfig(format!(
            "slot_s {slot_s} does not divide duration_s {duration_s}"
        )));
    }
    Ok((duration_s / slot_s) as usize)
}

/// Start time of 1-based `slot`, seconds after epoch.
pub fn slot_time(slot: usize, slot_s: u64) -> f64 {
    ((slot - 1) as u64 * slot_s) as f64
}

/// Sweeps every scenario over the same snapshots.
///
/// Slots run on the current rayon pool and are merged in slot order, so the
/// result does not depend on the worker count.
pub fn run_scenarios(
    scenarios: &[Scenario],
    constellation: &Constellation,
    params: &TopologyParams,
    consts: &PhysicalConstants,
    duration_s: u64,
    slot_s: u64,
) -> Result<Vec<ScenarioRun>> {
    params.validate()?;
    consts.validate()?;
    for s in scenarios {
        s.check_routable()?;
    }
    let slots = slot_count(duration_s, slot_s)?;
    let stations: Vec<GeodeticPoint> =
        scenarios.iter().flat_map(|s| [s.src.clone(), s.dst.clone()]).collect();
    let endpoints: Vec<(NodeRef, NodeRef)> =
        scenarios.iter().map(|s| (s.src_node(), s.dst_node())).collect();

    let per_slot: Vec<Vec<SlotResult>> = (1..=slots)
        .into_par_iter()
        .map(|slot| {
            let t = slot_time(slot, slot_s);
            let graph = topology::build_snapshot(constellation, &stations, slot, t, params, consts)?;
            endpoints
                .iter()
                .map(|(src, dst)| {
                    Ok(SlotResult {
                        slot_index: slot,
                        time_s: t,
                        outcome: routing::shortest_path(&graph, src, dst)?,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut columns: Vec<Vec<SlotResult>> = vec![Vec::with_capacity(slots); scenarios.len()];
    for row in per_slot {
        for (k, r) in row.into_iter().enumerate() {
            columns[k].push(r);
        }
    }
    scenarios
        .iter()
        .zip(columns)
        .map(|(scenario, slots)| {
            let summary = summarize(scenario, &slots, consts)?;
            Ok(ScenarioRun { scenario: scenario.clone(), slots, summary })
        })
        .collect()
}

pub fn run_scenario(
    scenario: &Scenario,
    constellation: &Constellation,
    params: &TopologyParams,
    consts: &PhysicalConstants,
    duration_s: u64,
    slot_s: u64,
) -> Result<(Vec<SlotResult>, ScenarioSummary)> {
    let run = run_scenarios(
        std::slice::from_ref(scenario),
        constellation,
        params,
        consts,
        duration_s,
        slot_s,
    )?
    .pop()
    .expect("one scenario in, one run out");
    Ok((run.slots, run.summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::ConstellationConfig;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    #[test]
    fn fiber_latency_examples() {
        let c = consts();
        assert!((oftn_latency_ms(5121.30, &c).unwrap() - 25.07).abs() < 0.01);
        assert!((oftn_latency_ms(15584.58, &c).unwrap() - 76.29).abs() < 0.01);
        assert_eq!(oftn_latency_ms(0.0, &c).unwrap(), 0.0);
        assert!(oftn_latency_ms(-1.0, &c).is_err());
        assert!(oftn_latency_ms(f64::NAN, &c).is_err());
    }

    #[test]
    fn compare_examples() {
        let (ms, pct) = compare(20.07, 25.07).unwrap();
        assert!((ms - 5.00).abs() < 1e-9 && (pct - 19.94).abs() < 0.005);
        let (ms, pct) = compare(36.64, 46.57).unwrap();
        assert!((ms - 9.93).abs() < 1e-9 && (pct - 21.32).abs() < 0.005);
        assert_eq!(compare(12.5, 12.5).unwrap(), (0.0, 0.0));
        assert!(compare(1.0, 0.0).is_err());
        assert!(compare(1.0, -3.0).is_err());
    }

    #[test]
    fn builtin_distances() {
        let c = consts();
        let want = [5121.30, 9514.30, 15584.58];
        for (s, w) in builtin_scenarios().iter().zip(want) {
            let d = s.surface_distance_km(&c);
            assert!(((d - w) / w).abs() < 0.0025, "{}: {d}", s.name);
        }
    }

    #[test]
    fn file_stems() {
        let names: Vec<_> = builtin_scenarios().iter().map(Scenario::file_stem).collect();
        assert_eq!(names, ["new_york_dublin", "sao_paulo_london", "toronto_sydney"]);
    }

    #[test]
    fn chord_bound_new_york_dublin() {
        let s = &builtin_scenarios()[0];
        let bound_ms = s.chord_km(&consts()) / 299_792.458 * 1000.0;
        assert!((bound_ms - 16.62).abs() < 0.01, "{bound_ms}");
    }

    #[test]
    fn slot_count_rules() {
        assert_eq!(slot_count(3600, 1).unwrap(), 3600);
        assert_eq!(slot_count(0, 1).unwrap(), 0);
        assert!(slot_count(10, 3).is_err());
        assert!(slot_count(10, 0).is_err());
        assert_eq!(slot_time(1, 1), 0.0);
        assert_eq!(slot_time(3, 5), 10.0);
    }

    #[test]
    fn empty_sweep_is_flagged() {
        let c = consts();
        let shell = Constellation::new(ConstellationConfig::default(), &c).unwrap();
        let s = &builtin_scenarios()[0];
        let (slots, summary) = run_scenario(s, &shell, &TopologyParams::default(), &c, 0, 1).unwrap();
        assert!(slots.is_empty());
        assert!(summary.is_empty());
        assert_eq!(summary.unreachable_slots, 0);
        assert!(summary.improvement_pct.is_none());
    }

    #[test]
    fn same_station_scenario_is_rejected_for_routing() {
        let c = consts();
        let shell = Constellation::new(ConstellationConfig::default(), &c).unwrap();
        let p = builtin_scenarios()[0].src.clone();
        let s = Scenario::new("loop", p.clone(), p);
        assert!(run_scenario(&s, &shell, &TopologyParams::default(), &c, 1, 1).is_err());
    }

    #[test]
    fn short_sweep_summary_invariants() {
        let c = consts();
        let shell = Constellation::new(ConstellationConfig::default(), &c).unwrap();
        let s = &builtin_scenarios()[0];
        let (slots, summary) = run_scenario(s, &shell, &TopologyParams::default(), &c, 10, 1).unwrap();
        assert_eq!(slots.len(), 10);
        assert_eq!(slots.iter().map(|r| r.slot_index).collect::<Vec<_>>(), (1..=10).collect::<Vec<_>>());
        let avg = summary.owsn_avg_latency_ms.unwrap();
        assert!(summary.owsn_min_ms.unwrap() <= avg && avg <= summary.owsn_max_ms.unwrap());
        let (ms, pct) = compare(avg, summary.oftn_latency_ms).unwrap();
        assert_eq!(summary.improvement_ms, Some(ms));
        assert_eq!(summary.improvement_pct, Some(pct));
        for r in &slots {
            let route = r.outcome.route().unwrap();
            assert_eq!(route.nodes().first(), Some(&s.src_node()));
            assert_eq!(route.nodes().last(), Some(&s.dst_node()));
            assert!(route.nodes()[1..route.nodes().len() - 1].iter().all(|n| !n.is_ground()));
        }
    }
}
