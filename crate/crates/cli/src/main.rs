use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use owsn_core::config::RunConfig;
use owsn_core::output::{self, Timing};

/// Latency of laser-linked LEO satellite routes against terrestrial fiber.
#[derive(Parser, Debug)]
#[command(name = "owsn", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `output_dir` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for the slot sweep; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    /// Override the constellation phasing factor.
    #[arg(long, global = true)]
    phase_factor: Option<u32>,

    /// Override the sweep duration, seconds.
    #[arg(long, global = true)]
    duration: Option<u64>,

    /// Override the ground elevation mask, degrees.
    #[arg(long, global = true)]
    min_elevation: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every scenario and write slot CSVs plus summary.json.
    Run,
    /// Print great-circle distances and fiber latencies.
    Distances,
    /// Average latency as a function of laser link range.
    SweepRange {
        /// Comma-separated ranges in km.
        #[arg(long, value_delimiter = ',', required = true)]
        ranges: Vec<f64>,
    },
    /// Grid search of phasing factor and elevation mask against the
    /// reference averages.
    SweepPhase {
        /// Comma-separated phasing factors; default is every valid factor.
        #[arg(long, value_delimiter = ',')]
        factors: Vec<u32>,
        /// Comma-separated elevation masks in degrees.
        #[arg(long, value_delimiter = ',', default_value = "0,5,10")]
        elevations: Vec<f64>,
        /// Sample every N-th second instead of every slot.
        #[arg(long, default_value_t = 1)]
        stride: u64,
    },
    /// Write the route of one scenario at one slot as GeoJSON.
    ExportGeojson {
        /// Scenario name or file stem, e.g. new_york_dublin.
        #[arg(long)]
        scenario: String,
        /// 1-based slot.
        #[arg(long)]
        slot: usize,
        /// Output file; defaults to `<out>/<scenario>_slot<N>.geojson`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn load_config(opts: &GlobalOpts) -> Result<RunConfig> {
    let mut cfg = match &opts.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &opts.out {
        cfg.output_dir = out.clone();
    }
    if let Some(k) = opts.phase_factor {
        cfg.constellation.phase_factor = k;
    }
    if let Some(d) = opts.duration {
        cfg.duration_s = d;
    }
    if let Some(el) = opts.min_elevation {
        cfg.topology.min_elevation_deg = el;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_file(path: &Path, body: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

fn cmd_run(cfg: &RunConfig, workers: usize) -> Result<()> {
    let start = Instant::now();
    let runs = output::simulate(cfg)?;
    let files = output::write_run_outputs(cfg, &runs, &cfg.output_dir)?;
    let timing = Timing { wall_time_s: start.elapsed().as_secs_f64(), workers };
    output::write_timing(&cfg.output_dir, &timing)?;
    let mut stdout = std::io::stdout().lock();
    for run in &runs {
        let s = &run.summary;
        match (s.owsn_avg_latency_ms, s.improvement_pct) {
            (Some(avg), Some(pct)) => writeln!(
                stdout,
                "{}: fiber {:.2} ms, satellite avg {:.2} ms, improvement {:.2} ms ({:.2} %), unreachable slots {}",
                s.name,
                s.oftn_latency_ms,
                avg,
                s.improvement_ms.unwrap_or_default(),
                pct,
                s.unreachable_slots
            )?,
            _ => writeln!(stdout, "{}: no satellite route in any slot", s.name)?,
        }
    }
    for f in files {
        writeln!(stdout, "wrote {}", f.display())?;
    }
    writeln!(stdout, "wall time {:.1} s", timing.wall_time_s)?;
    Ok(())
}

fn cmd_distances(cfg: &RunConfig) -> Result<()> {
    for row in output::distances(&cfg.scenarios, &cfg.constants)? {
        println!("{row}");
    }
    Ok(())
}

fn cmd_sweep_range(cfg: &RunConfig, ranges: &[f64]) -> Result<()> {
    let rows = output::sweep_range(cfg, ranges)?;
    let mut buf = Vec::new();
    output::write_range_sweep_csv(&rows, &mut buf)?;
    let path = cfg.output_dir.join("range_sweep.csv");
    write_file(&path, &buf)?;
    std::io::stdout().write_all(&buf)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn cmd_sweep_phase(cfg: &RunConfig, factors: &[u32], elevations: &[f64], stride: u64) -> Result<()> {
    if stride == 0 {
        bail!("--stride must be positive");
    }
    let mut cfg = cfg.clone();
    cfg.slot_s = stride;
    cfg.validate()?;
    let factors: Vec<u32> =
        if factors.is_empty() { (0..cfg.constellation.num_planes).collect() } else { factors.to_vec() };
    let rows = output::sweep_phase(&cfg, &factors, elevations)?;
    let mut buf = Vec::new();
    output::write_phase_sweep_csv(&rows, &cfg.scenarios, &mut buf)?;
    let path = cfg.output_dir.join("phase_sweep.csv");
    write_file(&path, &buf)?;
    std::io::stdout().write_all(&buf)?;
    let best = rows
        .iter()
        .filter_map(|r| r.max_rel_deviation.map(|d| (d, r)))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    if let Some((d, r)) = best {
        eprintln!(
            "best: phase_factor {} min_elevation {} deg, max deviation {:.2} %",
            r.phase_factor,
            r.min_elevation_deg,
            d * 100.0
        );
    }
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn cmd_export_geojson(cfg: &RunConfig, scenario: &str, slot: usize, output: Option<PathBuf>) -> Result<()> {
    let doc = output::export_geojson(cfg, scenario, slot)?;
    let stem = cfg.scenario(scenario)?.file_stem();
    let path = output.unwrap_or_else(|| cfg.output_dir.join(format!("{stem}_slot{slot}.geojson")));
    let body = format!("{doc:#}\n");
    write_file(&path, body.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli.global)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.workers)
        .build()
        .context("starting worker pool")?;
    let workers = pool.current_num_threads();
    pool.install(|| match cli.command {
        Command::Run => cmd_run(&cfg, workers),
        Command::Distances => cmd_distances(&cfg),
        Command::SweepRange { ranges } => cmd_sweep_range(&cfg, &ranges),
        Command::SweepPhase { factors, elevations, stride } => {
            cmd_sweep_phase(&cfg, &factors, &elevations, stride)
        }
        Command::ExportGeojson { scenario, slot, output } => {
            cmd_export_geojson(&cfg, &scenario, slot, output)
        }
    })
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
