//! `seqtunnel <solve|map-only|verify|sweep> --config <path> [--stage N] [--out DIR]`

use crate::config::{ConfigError, RunConfig};
use crate::output::{cavity_csv, coefficients_json, ground_csv, ground_samples, grid_csv, stage_dir, write_file};
use crate::pipeline::{build_map, run_stage, select_stages, PipelineError};
use crate::verify::{corner_sweep, kx_sweep, verify_all, x0_convergence, Status, SweepResult, VerifyError};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const THREADS_ENV: &str = "SEQTUNNEL_THREADS";

#[derive(Debug, Parser)]
#[command(name = "seqtunnel", version, about = "Staged shallow-tunnel stress and displacement fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration
    #[arg(long)]
    pub config: PathBuf,
    /// Run only this stage (1-based)
    #[arg(long)]
    pub stage: Option<usize>,
    /// Output directory (overrides output.dir)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    X0,
    Kx,
    Corner,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve each stage and write cavity/ground profiles and coefficients
    Solve(Common),
    /// Build the conformal maps only and write annulus grid images
    MapOnly(Common),
    /// Solve, run every check and write the verification report
    Verify(Common),
    /// Ground-width convergence and the parametric sweeps
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Run only the named sweeps (default: all)
        #[arg(long, value_enum)]
        only: Vec<SweepKind>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Solve(String),
    #[error("verification failed")]
    VerifyFail,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerifyFail => 1,
            CliError::Config(_) | CliError::Usage(_) | CliError::Output { .. } => 2,
            CliError::Solve(_) => 3,
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Config(c) => CliError::Config(c),
            PipelineError::NoSuchStage(_) => CliError::Usage(e.to_string()),
            other => CliError::Solve(other.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Pipeline(p) => p.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    write_file(dir, name, contents).map_err(|source| CliError::Output { path: dir.join(name), source })
}

/// Applies `SEQTUNNEL_THREADS` to the global pool. Only the first call in a
/// process takes effect.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    // a second initialisation (e.g. in tests) keeps the existing pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf), CliError> {
    let cfg = RunConfig::load(&common.config)?;
    let out = common.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    Ok((cfg, out))
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Solve(c) => solve(&c),
        Command::MapOnly(c) => map_only(&c),
        Command::Verify(c) => verify(&c),
        Command::Sweep { common, only } => sweep(&common, &only),
    }
}

/// Parses arguments, runs, reports errors on stderr and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            if !matches!(e, CliError::VerifyFail) {
                eprintln!("error: {e}");
            }
            e.exit_code()
        }
    }
}

fn solve(c: &Common) -> Result<(), CliError> {
    let (cfg, out) = load(c)?;
    let stages = select_stages(&cfg, c.stage)?;
    write(&out, "effective_config.toml", &cfg.to_toml())?;
    let results: Vec<Result<String, CliError>> = stages
        .par_iter()
        .map(|b| {
            let run = run_stage(&cfg, b)?;
            let ev = run.evaluator();
            let dir = stage_dir(&out, run.stage());
            let cavity = ev.cavity_profile(cfg.output.cavity_points).map_err(|e| CliError::from(run.field_error(e)))?;
            let s = crate::fields::summarize(&cavity);
            if cfg.output.cavity_profile {
                write(&dir, "cavity_profile.csv", &cavity_csv(&cavity))?;
            }
            if cfg.output.ground_profile {
                let g = ground_samples(&ev, run.x0, cfg.output.ground_extent, cfg.output.ground_points).map_err(|e| CliError::from(run.field_error(e)))?;
                write(&dir, "ground_profile.csv", &ground_csv(&g))?;
            }
            if cfg.output.coefficients {
                write(&dir, "coefficients.json", &coefficients_json(&run))?;
            }
            Ok(format!(
                "stage {}: alpha {:.6}  eps {:.2e} m  {} iterations  peak Mises {:.2} kPa  max displacement {:.4e} m  residual {:.3} kPa",
                run.stage(),
                run.map.alpha,
                run.map.epsilon,
                run.solution.iterations,
                s.mises_max,
                s.displacement_max,
                s.residual_max
            ))
        })
        .collect();
    finish(results)
}

/// Prints each stage line and returns the first error, after every stage has run.
fn finish(results: Vec<Result<String, CliError>>) -> Result<(), CliError> {
    let mut first = None;
    for r in results {
        match r {
            Ok(line) => println!("{line}"),
            Err(e) => {
                eprintln!("error: {e}");
                first.get_or_insert(e);
            }
        }
    }
    first.map_or(Ok(()), Err)
}

#[derive(Serialize)]
struct MapSummary {
    stage: usize,
    alpha: f64,
    epsilon_m: f64,
    t1: [f64; 2],
    t2: [f64; 2],
    csm_condition: f64,
    cdsm_condition: f64,
    exterior_deviation: f64,
    interior_deviation: f64,
}

fn map_only(c: &Common) -> Result<(), CliError> {
    let (cfg, out) = load(c)?;
    let stages = select_stages(&cfg, c.stage)?;
    write(&out, "effective_config.toml", &cfg.to_toml())?;
    let o = &cfg.output;
    let results: Vec<Result<String, CliError>> = stages
        .par_iter()
        .map(|b| {
            let (map, _) = build_map(&cfg, b, cfg.ground.x0)?;
            let dir = stage_dir(&out, b.stage_index);
            let grid = grid_csv(&map, o.grid_rho_lines, o.grid_theta_lines, o.grid_samples).map_err(|e| CliError::Solve(format!("stage {}: {e}", b.stage_index)))?;
            write(&dir, "grid.csv", &grid)?;
            let d = map.diagnostics;
            let summary = MapSummary {
                stage: b.stage_index,
                alpha: map.alpha,
                epsilon_m: map.epsilon,
                t1: [map.t1.re, map.t1.im],
                t2: [map.t2.re, map.t2.im],
                csm_condition: d.csm_condition,
                cdsm_condition: d.cdsm_condition,
                exterior_deviation: d.exterior_deviation,
                interior_deviation: d.interior_deviation,
            };
            write(&dir, "map.json", &(serde_json::to_string_pretty(&summary).expect("map summary serialises") + "\n"))?;
            Ok(format!("stage {}: alpha {:.6}  eps {:.2e} m", b.stage_index, map.alpha, map.epsilon))
        })
        .collect();
    finish(results)
}

fn verify(c: &Common) -> Result<(), CliError> {
    let (cfg, out) = load(c)?;
    let stages = select_stages(&cfg, c.stage)?;
    write(&out, "effective_config.toml", &cfg.to_toml())?;
    let report = verify_all(&cfg, &stages);
    let summary = report.summary();
    print!("{summary}");
    write(&out, "verification.json", &(serde_json::to_string_pretty(&report).expect("report serialises") + "\n"))?;
    write(&out, "verification.txt", &summary)?;
    if report.status == Status::Fail {
        return Err(CliError::VerifyFail);
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepOutput<'a> {
    #[serde(flatten)]
    result: &'a SweepResult,
    profiles: Vec<String>,
}

fn write_sweep(out: &Path, name: &str, r: &SweepResult) -> Result<(), CliError> {
    let dir = out.join(format!("sweep_{name}"));
    write(out, &format!("sweep_{name}.csv"), &r.to_csv())?;
    let mut profiles = Vec::new();
    for (i, p) in r.profiles.iter().enumerate() {
        let file = format!("stage{}_{i:02}.csv", p.stage);
        write(&dir, &file, &cavity_csv(&p.samples))?;
        profiles.push(format!("sweep_{name}/{file}"));
    }
    let json = serde_json::to_string_pretty(&SweepOutput { result: r, profiles }).expect("sweep serialises");
    write(out, &format!("sweep_{name}.json"), &(json + "\n"))?;
    Ok(())
}

fn sweep(c: &Common, only: &[SweepKind]) -> Result<(), CliError> {
    let (cfg, out) = load(c)?;
    let all = select_stages(&cfg, None)?;
    let wanted = |k| only.is_empty() || only.contains(&k);
    let pick = |j: usize| all.iter().find(|b| b.stage_index == j).cloned().ok_or(PipelineError::NoSuchStage(j));
    write(&out, "effective_config.toml", &cfg.to_toml())?;
    let sw = &cfg.sweep;
    if wanted(SweepKind::X0) {
        let b = pick(c.stage.unwrap_or(sw.x0_stage))?;
        let r = x0_convergence(&cfg, &b, &sw.x0)?;
        for row in &r.rows {
            println!(
                "x0 {:>10.1}  stage {}  max displacement {:.4e} m  delta {}",
                row.value,
                row.stage,
                row.max_displacement_m,
                row.delta_deformation.map(|d| format!("{:.3}%", 100.0 * d)).unwrap_or_else(|| "-".into())
            );
        }
        write_sweep(&out, "x0", &r)?;
    }
    if wanted(SweepKind::Kx) {
        let stages = match c.stage {
            Some(j) => vec![pick(j)?],
            None if sw.kx_stages.is_empty() => all.clone(),
            None => sw.kx_stages.iter().map(|&j| pick(j)).collect::<Result<_, _>>()?,
        };
        let r = kx_sweep(&cfg, &stages, &sw.kx)?;
        for row in &r.rows {
            println!("kx {:.2}  stage {}  peak Mises {:.2} kPa", row.value, row.stage, row.peak_mises_kpa);
        }
        write_sweep(&out, "kx", &r)?;
    }
    if wanted(SweepKind::Corner) {
        if cfg.geometry.stages.is_some() {
            if !only.is_empty() {
                return Err(VerifyError::CornerSweepGeometry.into());
            }
            println!("corner sweep skipped: explicit geometry has no corner radius parameter");
        } else {
            let r = corner_sweep(&cfg, c.stage.unwrap_or(sw.corner_stage), &sw.corner_radii)?;
            for row in &r.rows {
                println!("corner radius {:.2} m  stage {}  peak Mises {:.2} kPa", row.value, row.stage, row.peak_mises_kpa);
            }
            if let (Some(a), Some(b)) = (r.rows.first(), r.rows.last()) {
                println!("peak Mises change {:.2}%", 100.0 * (b.peak_mises_kpa - a.peak_mises_kpa) / a.peak_mises_kpa);
            }
            write_sweep(&out, "corner", &r)?;
        }
    }
    Ok(())
}
