//! Serialized artefacts: per-slot CSVs, the JSON summary, range and phasing
//! sweeps, the distance report and GeoJSON route exports.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{OutputFormat, RunConfig};
use crate::constants::PhysicalConstants;
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::experiment::{self, Scenario, ScenarioRun, ScenarioSummary, SlotResult};
use crate::geo::{self, GeodeticPoint};
use crate::routing::{self, PathOutcome};
use crate::topology::{self, NodeRef};

pub const SUMMARY_FILE: &str = "summary.json";
pub const TIMING_FILE: &str = "timing.json";
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fixed 4-decimal millisecond formatting used in every CSV.
pub fn format_ms(ms: f64) -> String {
    format!("{ms:.4}")
}

fn csv_error(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Write {
        path: path.to_owned(),
        source: match e.into_kind() {
            csv::ErrorKind::Io(io) => io,
            other => std::io::Error::other(format!("{other:?}")),
        },
    }
}

/// Runs every configured scenario on the current rayon pool.
pub fn simulate(cfg: &RunConfig) -> Result<Vec<ScenarioRun>> {
    cfg.validate()?;
    let shell = Constellation::new(cfg.constellation.clone(), &cfg.constants)?;
    experiment::run_scenarios(
        &cfg.scenarios,
        &shell,
        &cfg.topology,
        &cfg.constants,
        cfg.duration_s,
        cfg.slot_s,
    )
}

/// Slot table: `slot,latency_ms,path`. Unreachable slots leave both value
/// columns empty.
pub fn write_slots_csv<W: Write>(slots: &[SlotResult], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["slot", "latency_ms", "path"])?;
    for r in slots {
        let (latency, path) = match &r.outcome {
            PathOutcome::Found(route) => (format_ms(route.latency_ms()), route.path_label()),
            PathOutcome::Unreachable => (String::new(), String::new()),
        };
        w.write_record([r.slot_index.to_string(), latency, path])?;
    }
    w.flush()?;
    Ok(())
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryDocument {
    pub code_version: String,
    pub config: RunConfig,
    pub scenarios: Vec<ScenarioSummary>,
}

impl SummaryDocument {
    pub fn new(cfg: &RunConfig, runs: &[ScenarioRun]) -> Self {
        Self {
            code_version: CODE_VERSION.to_owned(),
            config: cfg.clone(),
            scenarios: runs.iter().map(|r| r.summary.clone()).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Wall-clock facts about a run. Kept apart from `summary.json` so the
/// summary stays byte-identical between runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Timing {
    pub wall_time_s: f64,
    pub workers: usize,
}

/// Removes every file it tracks unless [`FileSet::keep`] is called.
struct FileSet {
    paths: Vec<PathBuf>,
    keep: bool,
}

impl FileSet {
    fn write(&mut self, path: PathBuf, f: impl FnOnce(fs::File) -> Result<()>) -> Result<()> {
        self.paths.push(path.clone());
        let file = fs::File::create(&path).map_err(|source| Error::Write { path, source })?;
        f(file)
    }
}

impl Drop for FileSet {
    fn drop(&mut self) {
        if !self.keep {
            for p in &self.paths {
                let _ = fs::remove_file(p);
            }
        }
    }
}

/// Writes `<stem>_slots.csv` per scenario and `summary.json` into `dir`.
/// On failure every file written so far is removed.
pub fn write_run_outputs(cfg: &RunConfig, runs: &[ScenarioRun], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| Error::Write { path: dir.to_owned(), source })?;
    let mut files = FileSet { paths: Vec::new(), keep: false };
    if cfg.wants(OutputFormat::Csv) {
        for run in runs {
            let path = dir.join(format!("{}_slots.csv", run.scenario.file_stem()));
            let err = csv_error(&path);
            let p = path.clone();
            files.write(p, |f| write_slots_csv(&run.slots, std::io::BufWriter::new(f)).map_err(err))?;
        }
    }
    if cfg.wants(OutputFormat::Json) {
        let path = dir.join(SUMMARY_FILE);
        let body = SummaryDocument::new(cfg, runs).to_json()?;
        let p = path.clone();
        files.write(p, |mut f| f.write_all(body.as_bytes()).map_err(|source| Error::Write { path, source }))?;
    }
    files.keep = true;
    Ok(std::mem::take(&mut files.paths))
}

pub fn write_timing(dir: &Path, timing: &Timing) -> Result<PathBuf> {
    let path = dir.join(TIMING_FILE);
    let body = serde_json::to_string_pretty(timing)? + "\n";
    fs::write(&path, body).map_err(|source| Error::Write { path: path.clone(), source })?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceRow {
    pub scenario: String,
    pub distance_km: f64,
    pub oftn_latency_ms: f64,
}

impl fmt::Display for DistanceRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let km = if self.distance_km == 0.0 { "0".to_owned() } else { format!("{:.2}", self.distance_km) };
        let ms = if self.oftn_latency_ms == 0.0 { "0".to_owned() } else { format!("{:.2}", self.oftn_latency_ms) };
        write!(f, "{}, {km} km, {ms} ms", self.scenario)
    }
}

/// Fiber baseline for each scenario; no simulation.
pub fn distances(scenarios: &[Scenario], consts: &PhysicalConstants) -> Result<Vec<DistanceRow>> {
    scenarios
        .iter()
        .map(|s| {
            let d = s.surface_distance_km(consts);
            Ok(DistanceRow {
                scenario: s.name.clone(),
                distance_km: d,
                oftn_latency_ms: experiment::oftn_latency_ms(d, consts)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeSweepRow {
    pub scenario: String,
    pub lisl_range_km: f64,
    pub avg_latency_ms: Option<f64>,
    pub reachable_slots: usize,
    pub unreachable_slots: usize,
}

/// Average latency at each laser range. Ranges that disconnect a scenario
/// are reported with no average.
pub fn sweep_range(cfg: &RunConfig, ranges_km: &[f64]) -> Result<Vec<RangeSweepRow>> {
    if ranges_km.is_empty() {
        return Err(Error::InvalidInput("range list is empty".into()));
    }
    let mut rows = Vec::new();
    for &range in ranges_km {
        if !(range.is_finite() && range > 0.0) {
            return Err(Error::InvalidInput(format!("range {range} km must be positive")));
        }
        let mut run_cfg = cfg.clone();
        run_cfg.topology.lisl_range_km = range;
        for run in simulate(&run_cfg)? {
            rows.push(RangeSweepRow {
                scenario: run.scenario.name.clone(),
                lisl_range_km: range,
                avg_latency_ms: run.summary.owsn_avg_latency_ms,
                reachable_slots: run.summary.reachable_slots,
                unreachable_slots: run.summary.unreachable_slots,
            });
        }
    }
    Ok(rows)
}

pub fn write_range_sweep_csv<W: Write>(rows: &[RangeSweepRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scenario", "lisl_range_km", "avg_latency_ms", "reachable_slots", "unreachable_slots"])?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.lisl_range_km.to_string(),
            r.avg_latency_ms.map(format_ms).unwrap_or_default(),
            r.reachable_slots.to_string(),
            r.unreachable_slots.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Paper-style reference averages, ms, for the three built-in scenarios.
pub const REFERENCE_OWSN_MS: [f64; 3] = [20.07, 36.64, 58.34];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseSweepRow {
    pub phase_factor: u32,
    pub min_elevation_deg: f64,
    pub avg_latency_ms: Vec<Option<f64>>,
    /// Largest relative deviation from the reference averages; `None` if any
    /// scenario had no route or the scenario count differs from the reference.
    pub max_rel_deviation: Option<f64>,
}

/// Largest `|avg / reference - 1|` over scenarios.
pub fn max_rel_deviation(avg: &[Option<f64>], reference: &[f64]) -> Option<f64> {
    if avg.len() != reference.len() {
        return None;
    }
    avg.iter().zip(reference).try_fold(0.0f64, |acc, (a, r)| Some(acc.max((a.as_ref()? / r - 1.0).abs())))
}

/// Grid search over phasing factor and elevation mask.
pub fn sweep_phase(cfg: &RunConfig, factors: &[u32], elevations_deg: &[f64]) -> Result<Vec<PhaseSweepRow>> {
    if factors.is_empty() || elevations_deg.is_empty() {
        return Err(Error::InvalidInput("phase sweep needs factors and elevations".into()));
    }
    let mut rows = Vec::new();
    for &f in factors {
        for &el in elevations_deg {
            let mut run_cfg = cfg.clone();
            run_cfg.constellation.phase_factor = f;
            run_cfg.topology.min_elevation_deg = el;
            let avg: Vec<_> = simulate(&run_cfg)?.iter().map(|r| r.summary.owsn_avg_latency_ms).collect();
            rows.push(PhaseSweepRow {
                phase_factor: f,
                min_elevation_deg: el,
                max_rel_deviation: max_rel_deviation(&avg, &REFERENCE_OWSN_MS),
                avg_latency_ms: avg,
            });
        }
    }
    Ok(rows)
}

pub fn write_phase_sweep_csv<W: Write>(rows: &[PhaseSweepRow], scenarios: &[Scenario], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["phase_factor".to_owned(), "min_elevation_deg".to_owned()];
    header.extend(scenarios.iter().map(|s| format!("{}_avg_ms", s.file_stem())));
    header.push("max_rel_deviation".to_owned());
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.phase_factor.to_string(), r.min_elevation_deg.to_string()];
        rec.extend(r.avg_latency_ms.iter().map(|a| a.map(format_ms).unwrap_or_default()));
        rec.push(r.max_rel_deviation.map(|d| format!("{d:.6}")).unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Routes one scenario at one 1-based slot, on the same snapshot `run` uses.
pub fn route_at_slot(cfg: &RunConfig, scenario: &Scenario, slot: usize) -> Result<SlotResult> {
    cfg.validate()?;
    let slots = experiment::slot_count(cfg.duration_s, cfg.slot_s)?;
    if slot == 0 || slot > slots {
        return Err(Error::InvalidInput(format!("slot {slot} outside 1..={slots}")));
    }
    let shell = Constellation::new(cfg.constellation.clone(), &cfg.constants)?;
    let stations: Vec<GeodeticPoint> =
        cfg.scenarios.iter().flat_map(|s| [s.src.clone(), s.dst.clone()]).collect();
    let t = experiment::slot_time(slot, cfg.slot_s);
    let graph = topology::build_snapshot(&shell, &stations, slot, t, &cfg.topology, &cfg.constants)?;
    Ok(SlotResult {
        slot_index: slot,
        time_s: t,
        outcome: routing::shortest_path(&graph, &scenario.src_node(), &scenario.dst_node())?,
    })
}

/// FeatureCollection for a routed slot: one Point per route node and one
/// LineString through them in route order. Coordinates are
/// `[longitude, latitude, altitude_m]`.
pub fn route_geojson(
    scenario: &Scenario,
    result: &SlotResult,
    constellation: &Constellation,
    consts: &PhysicalConstants,
) -> Result<Value> {
    let route = result.outcome.route().ok_or_else(|| Error::Unreachable {
        scenario: scenario.name.clone(),
        slot: result.slot_index,
    })?;
    let mut features = Vec::new();
    let mut line = Vec::new();
    for (order, node) in route.nodes().iter().enumerate() {
        let (lat, lon, alt_km, kind) = match node {
            NodeRef::Ground(label) => {
                let p = [&scenario.src, &scenario.dst]
                    .into_iter()
                    .find(|p| p.label() == label)
                    .ok_or_else(|| Error::InvalidInput(format!("station {label} not in scenario")))?;
                (p.latitude_deg(), p.longitude_deg(), 0.0, "ground_station")
            }
            NodeRef::Satellite(id) => {
                let idx = constellation
                    .index_of(*id)
                    .ok_or_else(|| Error::InvalidInput(format!("{id} not in constellation")))?;
                let pos = constellation.position_at(&constellation.satellites()[idx], result.time_s);
                let (lat, lon, alt) = geo::inertial_to_geodetic(pos, result.time_s, consts);
                (lat, lon, alt, "satellite")
            }
        };
        let coords = json!([lon, lat, alt_km * 1000.0]);
        line.push(coords.clone());
        features.push(json!({
            "type": "Feature",
            "geometry": { "type": "Point", "coordinates": coords },
            "properties": {
                "name": node.to_string(),
                "kind": kind,
                "order": order,
                "altitude_km": alt_km,
            },
        }));
    }
    let latency_ms: f64 = format_ms(route.latency_ms()).parse().expect("formatted float parses");
    features.push(json!({
        "type": "Feature",
        "geometry": { "type": "LineString", "coordinates": line },
        "properties": {
            "scenario": scenario.name,
            "slot": result.slot_index,
            "time_s": result.time_s,
            "latency_ms": latency_ms,
            "latency_s": route.total_latency_s(),
            "satellites": route.satellite_count(),
            "path": route.path_label(),
        },
    }));
    Ok(json!({ "type": "FeatureCollection", "features": features }))
}

/// Route GeoJSON for `scenario_name` at `slot`.
pub fn export_geojson(cfg: &RunConfig, scenario_name: &str, slot: usize) -> Result<Value> {
    let scenario = cfg.scenario(scenario_name)?;
    let result = route_at_slot(cfg, scenario, slot)?;
    let shell = Constellation::new(cfg.constellation.clone(), &cfg.constants)?;
    route_geojson(scenario, &result, &shell, &cfg.constants)
}
