//! Machine-checkable versions of the validation checks, plus the parametric sweeps.

use crate::config::RunConfig;
use crate::fields::{summarize, FieldSample};
use crate::geometry::{benchmark_stage, Material, Segment, StageBoundary};
use crate::pipeline::{build_map, solve_on_map, PipelineError, StageRun};
use crate::C64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("sweep over {0} needs at least one value")]
    EmptySweep(&'static str),
    #[error("sweep values for {0} must be strictly monotone")]
    NonMonotone(&'static str),
    #[error("corner sweep regenerates the built-in benchmark; explicit geometry has no corner radius parameter")]
    CornerSweepGeometry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Warn,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub status: Status,
}

impl Check {
    /// `value <= threshold` passes; otherwise `Warn` when `soft`, else `Fail`.
    fn at_most(name: &'static str, value: f64, threshold: f64, soft: bool) -> Self {
        let status = if value <= threshold {
            Status::Pass
        } else if soft {
            Status::Warn
        } else {
            Status::Fail
        };
        Check { name, value, threshold, status }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StageReport {
    pub stage: usize,
    pub concavity_flag: bool,
    pub crown_depth_m: f64,
    pub area_m2: f64,
    pub epsilon_m: f64,
    pub roundtrip_max: f64,
    pub residual_traction_max_kpa: f64,
    pub free_surface_traction_max_kpa: f64,
    pub constrained_displacement_max_m: f64,
    pub equilibrium_rel_err: f64,
    /// |κA₋₁ + B₋₁| / |A₋₁|
    pub invariant_kappa_rel: f64,
    /// |A₋₁ − B₋₁ + iR_y/2π| / |R_y/2π|
    pub invariant_resultant_rel: f64,
    pub resultant_rel_err: f64,
    pub resultant_tail_rel: f64,
    pub decay_stress_max_kpa: f64,
    /// Corner-adjacent cavity residual oscillation, Lanczos off over on.
    pub gibbs_ratio: f64,
    /// Free-surface traction next to the joints, Lanczos off over on.
    pub gibbs_ratio_joint: f64,
    pub null_field_max: f64,
    pub lsq_residual: f64,
    pub iterations_used: usize,
    pub condition_estimate: f64,
    pub sample_count: usize,
    pub fourier_tail: f64,
    pub peak_mises_kpa: f64,
    pub peak_mises_at: [f64; 2],
    pub max_displacement_m: f64,
    pub map_seconds: f64,
    pub solve_seconds: f64,
    pub verify_seconds: f64,
    pub checks: Vec<Check>,
}

impl StageReport {
    pub fn status(&self) -> Status {
        worst(self.checks.iter().map(|c| c.status))
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StageFailure {
    pub stage: usize,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub stages: Vec<StageReport>,
    pub failures: Vec<StageFailure>,
    pub status: Status,
}

impl VerificationReport {
    pub fn new(mut stages: Vec<StageReport>, mut failures: Vec<StageFailure>) -> Self {
        stages.sort_by_key(|s| s.stage);
        failures.sort_by_key(|f| f.stage);
        let status = if failures.is_empty() { worst(stages.iter().map(StageReport::status)) } else { Status::Fail };
        VerificationReport { stages, failures, status }
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for s in &self.stages {
            out += &format!(
                "stage {}{}: {:?}  eps {:.2e} m  residual {:.3} kPa  free {:.3} kPa  fixed {:.2e} m  equilibrium {:.1e}  Mises {:.2} kPa\n",
                s.stage,
                if s.concavity_flag { " (concave)" } else { "" },
                s.status(),
                s.epsilon_m,
                s.residual_traction_max_kpa,
                s.free_surface_traction_max_kpa,
                s.constrained_displacement_max_m,
                s.equilibrium_rel_err,
                s.peak_mises_kpa,
            );
            for c in s.checks.iter().filter(|c| c.status != Status::Pass) {
                out += &format!("  {:?} {}: {:.4e} (limit {:.4e})\n", c.status, c.name, c.value, c.threshold);
            }
        }
        for f in &self.failures {
            out += &format!("stage {}: FAIL {}\n", f.stage, f.error);
        }
        out += &format!("overall: {:?}\n", self.status);
        out
    }
}

/// Strictly-greater check; `trivial` passes it outright (nothing to filter).
fn at_least(name: &'static str, value: f64, threshold: f64, trivial: bool) -> Check {
    let status = if value > threshold || trivial { Status::Pass } else { Status::Fail };
    Check { name, value, threshold, status }
}

fn worst(it: impl Iterator<Item = Status>) -> Status {
    it.fold(Status::Pass, |a, b| match (a, b) {
        (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
        (Status::Warn, _) | (_, Status::Warn) => Status::Warn,
        _ => Status::Pass,
    })
}

/// Depth of the highest cavity point below the surface.
pub fn crown_depth(boundary: &StageBoundary) -> f64 {
    -boundary.segments.iter().map(Segment::max_y).fold(f64::NEG_INFINITY, f64::max)
}

/// Cavity samples within the smallest fillet radius of a segment junction.
fn corner_adjacent(boundary: &StageBoundary, z: C64) -> bool {
    let h = boundary
        .segments
        .iter()
        .filter_map(|s| match *s {
            Segment::Arc { radius, .. } => Some(radius),
            Segment::Line { .. } => None,
        })
        .fold(f64::INFINITY, f64::min);
    let h = if h.is_finite() { h } else { 0.5 };
    boundary.segments.iter().any(|s| (s.start() - z).norm() <= h)
}

/// Largest |r_i − (r_{i−1} + r_{i+1})/2| over corner-adjacent samples of a periodic profile.
fn oscillation(boundary: &StageBoundary, profile: &[FieldSample]) -> f64 {
    let n = profile.len();
    let r = |i: usize| C64::new(profile[i].sigma_rho, profile[i].tau_rhotheta);
    (0..n)
        .filter(|&i| corner_adjacent(boundary, profile[i].z))
        .map(|i| (r(i) - 0.5 * (r((i + n - 1) % n) + r((i + 1) % n))).norm())
        .fold(0.0, f64::max)
}

/// θ of ground point x, unwrapped to lie within π of `near`.
fn ground_theta(run: &StageRun, x: f64, near: f64) -> Result<f64, PipelineError> {
    let t = run.map.zeta_of(C64::new(x, 0.0)).map_err(|e| run.field_error(e.into()))?.arg();
    Ok(t + 2.0 * PI * ((near - t) / (2.0 * PI)).round())
}

/// Every check for one solved stage.
pub fn verify_stage(cfg: &RunConfig, run: &StageRun) -> Result<StageReport, PipelineError> {
    let t0 = Instant::now();
    let th = &cfg.thresholds;
    let mat = &run.material;
    let sol = &run.solution;
    let ev = run.evaluator();
    let err = |e| run.field_error(e);
    let concave = run.boundary.is_concave();
    let depth = crown_depth(&run.boundary);
    let traction_scale = mat.gamma * depth;
    let disp_scale = mat.gamma * depth * depth / mat.shear_modulus();
    let mut checks = Vec::new();

    checks.push(Check::at_most("mapping_accuracy", run.map.epsilon, th.epsilon_m, false));
    let (roundtrip, _) = run.map.roundtrip_probe(32).map_err(|e| err(e.into()))?;
    checks.push(Check::at_most("map_roundtrip", roundtrip, th.roundtrip, true));

    // equilibrium and the two invariants
    let ry = mat.gamma * run.area;
    let target = C64::new(0.0, -ry / (2.0 * PI));
    let rel = |v: f64, s: f64| if s == 0.0 { v } else { v / s };
    let equilibrium = rel((sol.i0 - target).norm(), target.norm());
    checks.push(Check::at_most("equilibrium_identity", equilibrium, th.equilibrium_rel, false));
    let (am1, bm1) = (sol.a_k(-1), sol.b_k(-1));
    let inv_kappa = rel((sol.kappa * am1 + bm1).norm(), am1.norm());
    let inv_res = rel((am1 - bm1 - target).norm(), target.norm());
    checks.push(Check::at_most("invariant_kappa_a_plus_b", inv_kappa, th.invariant_rel, false));
    checks.push(Check::at_most("invariant_a_minus_b", inv_res, th.invariant_rel, false));

    // cavity wall
    let cavity = ev.cavity_profile(cfg.output.cavity_points).map_err(err)?;
    let summary = summarize(&cavity);
    let residual_limit = th.residual_fraction * traction_scale;
    checks.push(Check::at_most("cavity_residual_traction", summary.residual_max, residual_limit, concave));

    // Gibbs: the unfiltered series oscillates more next to the corners
    let raw = run.evaluator_with(false).cavity_profile(cfg.output.cavity_points).map_err(err)?;
    let (osc_on, osc_off) = (oscillation(&run.boundary, &cavity), oscillation(&run.boundary, &raw));
    let gibbs_ratio = if osc_on == 0.0 { f64::INFINITY } else { osc_off / osc_on };
    checks.push(at_least("gibbs_ratio", gibbs_ratio, 1.0, mat.gamma == 0.0));

    // ground surface: uniform θ on ρ = 1, split by the physical abscissa
    let n = run.fourier.sample_count;
    let thetas: Vec<f64> = (0..n)
        .map(|i| 2.0 * PI * i as f64 / n as f64)
        .filter(|&t| t != 0.0 && !ev.near_joint(t))
        .collect();
    let band = th.joint_band * run.x0;
    let ground_maxima = |samples: &[FieldSample]| {
        let mut free_max: f64 = 0.0;
        let mut fixed_max: f64 = 0.0;
        for s in samples {
            let x = s.z.re.abs();
            if x <= run.x0 - band {
                free_max = free_max.max(s.sigma_rho.hypot(s.tau_rhotheta));
            } else if x >= run.x0 + band {
                fixed_max = fixed_max.max(s.u.hypot(s.v));
            }
        }
        (free_max, fixed_max)
    };
    let (free_max, fixed_max) = ground_maxima(&ev.total_at(1.0, &thetas).map_err(err)?);
    checks.push(Check::at_most("free_surface_traction", free_max, residual_limit, concave));
    checks.push(Check::at_most("constrained_displacement", fixed_max, th.residual_fraction * disp_scale, concave));
    let (free_raw, _) = ground_maxima(&run.evaluator_with(false).total_at(1.0, &thetas).map_err(err)?);
    let gibbs_ratio_joint = if free_max == 0.0 { f64::INFINITY } else { free_raw / free_max };
    checks.push(at_least("gibbs_ratio_joint", gibbs_ratio_joint, 1.0, mat.gamma == 0.0));

    // far field: stress on |x| ≥ 100·x0 (initial stress vanishes on the surface)
    let far: Vec<f64> = (0..=40).map(|i| 100.0 * run.x0 * 10f64.powf(i as f64 / 20.0)).flat_map(|x| [x, -x]).collect();
    let far_samples = ev.ground_profile(&far).map_err(err)?;
    let stress = |s: &FieldSample| s.sigma_x.abs().max(s.sigma_y.abs()).max(s.tau_xy.abs());
    let decay = far_samples.iter().map(stress).fold(0.0, f64::max);
    checks.push(Check::at_most("far_field_decay", decay, th.decay_fraction * traction_scale, false));

    // resultant over x ∈ [−100x0, −x0] ∪ [x0, 100x0]; the tail beyond 100x0
    // is bounded by |σ(X)|·X per side for a field decaying like 1/x²
    let rs = ev.ring_series(1.0).map_err(err)?;
    let mut resultant = C64::new(0.0, 0.0);
    for sign in [-1.0, 1.0] {
        let outer = ground_theta(run, sign * 100.0 * run.x0, 0.0)?;
        let inner = ground_theta(run, sign * run.x0, outer)?;
        resultant += rs.traction_integral(inner.min(outer), inner.max(outer));
    }
    let edge = far_samples.iter().take(2).map(stress).fold(0.0, f64::max);
    let tail = 2.0 * edge * 100.0 * run.x0;
    let resultant_err = rel((resultant - C64::new(0.0, -ry)).norm(), ry);
    let tail_rel = rel(tail, ry);
    checks.push(Check::at_most("surface_resultant", resultant_err, th.resultant_rel + tail_rel, false));

    // zero gravity on the same map must give identically zero fields
    let null_field_max = null_test(cfg, run)?;
    checks.push(Check { name: "zero_gravity_null", value: null_field_max, threshold: 0.0, status: if null_field_max == 0.0 { Status::Pass } else { Status::Fail } });

    Ok(StageReport {
        stage: run.stage(),
        concavity_flag: concave,
        crown_depth_m: depth,
        area_m2: run.area,
        epsilon_m: run.map.epsilon,
        roundtrip_max: roundtrip,
        residual_traction_max_kpa: summary.residual_max,
        free_surface_traction_max_kpa: free_max,
        constrained_displacement_max_m: fixed_max,
        equilibrium_rel_err: equilibrium,
        invariant_kappa_rel: inv_kappa,
        invariant_resultant_rel: inv_res,
        resultant_rel_err: resultant_err,
        resultant_tail_rel: tail_rel,
        decay_stress_max_kpa: decay,
        gibbs_ratio,
        gibbs_ratio_joint,
        null_field_max,
        lsq_residual: sol.lsq_residual,
        iterations_used: sol.iterations,
        condition_estimate: sol.condition,
        sample_count: n,
        fourier_tail: run.fourier.tail_d.max(run.fourier.tail_h),
        peak_mises_kpa: summary.mises_max,
        peak_mises_at: [summary.mises_max_at.re, summary.mises_max_at.im],
        max_displacement_m: summary.displacement_max,
        map_seconds: run.map_time.as_secs_f64(),
        solve_seconds: run.solve_time.as_secs_f64(),
        verify_seconds: t0.elapsed().as_secs_f64(),
        checks,
    })
}

/// Largest absolute stress or displacement component anywhere on the cavity
/// and ground rings with γ = 0.
fn null_test(cfg: &RunConfig, run: &StageRun) -> Result<f64, PipelineError> {
    let m = &run.material;
    let zero = Material { gamma: 0.0, ..*m };
    let null = solve_on_map(cfg, &run.boundary, run.map.clone(), &zero, run.x0, run.map_time)?;
    let ev = null.evaluator();
    let thetas: Vec<f64> = (0..256).map(|i| 2.0 * PI * (i as f64 + 0.5) / 256.0).collect();
    let mut worst: f64 = 0.0;
    for rho in [run.map.alpha, 0.5 * (1.0 + run.map.alpha), 1.0] {
        let ok: Vec<f64> = thetas.iter().copied().filter(|&t| rho < 1.0 || !ev.near_joint(t)).collect();
        let samples = ev.total_at(rho, &ok).map_err(|e| null.field_error(e))?;
        for s in samples {
            for v in [s.sigma_rho, s.sigma_theta, s.tau_rhotheta, s.sigma_x, s.sigma_y, s.tau_xy, s.u, s.v] {
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(worst)
}

/// Solves and verifies the selected stages concurrently. Solver errors become
/// failures in the report rather than aborting the run.
pub fn verify_all(cfg: &RunConfig, stages: &[StageBoundary]) -> VerificationReport {
    let results: Vec<Result<StageReport, StageFailure>> = stages
        .par_iter()
        .map(|b| {
            crate::pipeline::run_stage(cfg, b)
                .and_then(|run| verify_stage(cfg, &run))
                .map_err(|e| StageFailure { stage: b.stage_index, error: e.to_string() })
        })
        .collect();
    let (ok, bad): (Vec<_>, Vec<_>) = results.into_iter().partition(Result::is_ok);
    VerificationReport::new(ok.into_iter().map(Result::unwrap).collect(), bad.into_iter().map(|r| r.unwrap_err()).collect())
}

// ---------------------------------------------------------------- sweeps

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub stage: usize,
    pub peak_mises_kpa: f64,
    pub peak_mises_at: [f64; 2],
    pub max_displacement_m: f64,
    pub residual_max_kpa: f64,
    /// Max-norm change of the cavity displacement from the previous value,
    /// relative to this value's maximum.
    pub delta_raw: Option<f64>,
    /// Same, with the mean (rigid translation) removed from both profiles.
    pub delta_deformation: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepProfile {
    pub value: f64,
    pub stage: usize,
    pub samples: Vec<FieldSample>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub parameter: &'static str,
    pub values: Vec<f64>,
    pub rows: Vec<SweepRow>,
    #[serde(skip)]
    pub profiles: Vec<SweepProfile>,
}

impl SweepResult {
    pub fn rows_for(&self, stage: usize) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.stage == stage)
    }

    /// Successive translation-removed deltas (empty for a single value).
    pub fn deltas(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.delta_deformation).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{},stage,peak_mises_kpa,peak_x,peak_y,max_displacement_m,residual_max_kpa,delta_raw,delta_deformation\n", self.parameter);
        let opt = |v: Option<f64>| v.map(|v| format!("{v:.17e}")).unwrap_or_default();
        for r in &self.rows {
            out += &format!(
                "{:.17e},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{},{}\n",
                r.value,
                r.stage,
                r.peak_mises_kpa,
                r.peak_mises_at[0],
                r.peak_mises_at[1],
                r.max_displacement_m,
                r.residual_max_kpa,
                opt(r.delta_raw),
                opt(r.delta_deformation)
            );
        }
        out
    }
}

fn check_values(name: &'static str, values: &[f64]) -> Result<(), VerifyError> {
    if values.is_empty() {
        return Err(VerifyError::EmptySweep(name));
    }
    let up = values.windows(2).all(|w| w[1] > w[0]);
    let down = values.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(VerifyError::NonMonotone(name));
    }
    Ok(())
}

fn row(value: f64, run: &StageRun, cavity: &[FieldSample]) -> SweepRow {
    let s = summarize(cavity);
    SweepRow {
        value,
        stage: run.stage(),
        peak_mises_kpa: s.mises_max,
        peak_mises_at: [s.mises_max_at.re, s.mises_max_at.im],
        max_displacement_m: s.displacement_max,
        residual_max_kpa: s.residual_max,
        delta_raw: None,
        delta_deformation: None,
    }
}

fn cavity_of(cfg: &RunConfig, run: &StageRun) -> Result<Vec<FieldSample>, PipelineError> {
    run.evaluator().cavity_profile(cfg.output.cavity_points).map_err(|e| run.field_error(e))
}

fn displacement(p: &[FieldSample]) -> Vec<C64> {
    p.iter().map(|s| C64::new(s.u, s.v)).collect()
}

fn demeaned(d: &[C64]) -> Vec<C64> {
    let mean = d.iter().sum::<C64>() / d.len() as f64;
    d.iter().map(|v| v - mean).collect()
}

fn max_delta(prev: &[C64], next: &[C64]) -> f64 {
    let diff = prev.iter().zip(next).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let scale = next.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Cavity deformation of one stage for each ground-split half-width. The map is
/// built once; only the joint images move with x0, so every profile samples the
/// same physical wall points.
pub fn x0_convergence(cfg: &RunConfig, stage: &StageBoundary, x0s: &[f64]) -> Result<SweepResult, VerifyError> {
    check_values("x0", x0s)?;
    for &x0 in x0s {
        let mut c = cfg.clone();
        c.ground.x0 = x0;
        c.ground_split(std::slice::from_ref(stage)).map_err(PipelineError::from)?;
    }
    let mat = cfg.material().map_err(PipelineError::from)?;
    let (base, map_time) = build_map(cfg, stage, x0s[0])?;
    let runs: Vec<(StageRun, Vec<FieldSample>)> = x0s
        .par_iter()
        .map(|&x0| {
            let mut map = base.clone();
            map.set_ground_split(x0).map_err(|source| PipelineError::Map { stage: stage.stage_index, source })?;
            let run = solve_on_map(cfg, stage, map, &mat, x0, map_time)?;
            let cav = cavity_of(cfg, &run)?;
            Ok((run, cav))
        })
        .collect::<Result<_, PipelineError>>()?;
    let mut rows: Vec<SweepRow> = runs.iter().zip(x0s).map(|((run, cav), &x0)| row(x0, run, cav)).collect();
    for i in 1..runs.len() {
        let (a, b) = (displacement(&runs[i - 1].1), displacement(&runs[i].1));
        rows[i].delta_raw = Some(max_delta(&a, &b));
        rows[i].delta_deformation = Some(max_delta(&demeaned(&a), &demeaned(&b)));
    }
    let profiles = runs.into_iter().zip(x0s).map(|((run, samples), &value)| SweepProfile { value, stage: run.stage(), samples }).collect();
    Ok(SweepResult { parameter: "x0", values: x0s.to_vec(), rows, profiles })
}

/// Peak cavity Mises per lateral coefficient, for each given stage. Each stage's
/// map is built once and shared across the k_x values.
pub fn kx_sweep(cfg: &RunConfig, stages: &[StageBoundary], kxs: &[f64]) -> Result<SweepResult, VerifyError> {
    check_values("kx", kxs)?;
    let base = cfg.material().map_err(PipelineError::from)?;
    let mats: Vec<Material> = kxs
        .iter()
        .map(|&kx| Material::new(base.gamma, kx, base.e, base.nu).map_err(|e| PipelineError::Config(e.into())))
        .collect::<Result<_, _>>()?;
    let maps: Vec<_> = stages.par_iter().map(|b| build_map(cfg, b, cfg.ground.x0)).collect::<Result<_, _>>()?;
    let jobs: Vec<(usize, usize)> = (0..stages.len()).flat_map(|s| (0..kxs.len()).map(move |k| (s, k))).collect();
    let out: Vec<(SweepRow, SweepProfile)> = jobs
        .par_iter()
        .map(|&(s, k)| {
            let (map, t) = &maps[s];
            let run = solve_on_map(cfg, &stages[s], map.clone(), &mats[k], cfg.ground.x0, *t)?;
            let cav = cavity_of(cfg, &run)?;
            Ok((row(kxs[k], &run, &cav), SweepProfile { value: kxs[k], stage: run.stage(), samples: cav }))
        })
        .collect::<Result<_, PipelineError>>()?;
    let (rows, profiles) = out.into_iter().unzip();
    Ok(SweepResult { parameter: "kx", values: kxs.to_vec(), rows, profiles })
}

/// Regenerates one built-in benchmark stage per fillet radius.
pub fn corner_sweep(cfg: &RunConfig, stage: usize, radii: &[f64]) -> Result<SweepResult, VerifyError> {
    check_values("corner_radius", radii)?;
    if cfg.geometry.stages.is_some() {
        return Err(VerifyError::CornerSweepGeometry);
    }
    let density = cfg.density();
    let out: Vec<(SweepRow, SweepProfile)> = radii
        .par_iter()
        .map(|&r| {
            let b = benchmark_stage(stage, r, &density).map_err(|source| PipelineError::Geometry { stage, source })?;
            cfg.ground_split(std::slice::from_ref(&b))?;
            let run = crate::pipeline::run_stage(cfg, &b)?;
            let cav = cavity_of(cfg, &run)?;
            Ok((row(r, &run, &cav), SweepProfile { value: r, stage, samples: cav }))
        })
        .collect::<Result<_, PipelineError>>()?;
    let (rows, profiles) = out.into_iter().unzip();
    Ok(SweepResult { parameter: "corner_radius", values: radii.to_vec(), rows, profiles })
}
