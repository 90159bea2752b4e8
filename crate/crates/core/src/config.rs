//! Run configuration (TOML). Every block is optional and falls back to the
//! benchmark values; unknown keys are rejected.

use crate::conformal::MapSettings;
use crate::geometry::{benchmark_stage, fillet_corners, DensitySpec, GeometryError, GroundSplit, Material, Segment, StageBoundary};
use crate::rh_solver::SolverSettings;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const BUILTIN_BENCHMARK: &str = "benchmark-4stage";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialConfig {
    pub gamma: f64,
    pub kx: f64,
    pub e: f64,
    pub nu: f64,
}

impl Default for MaterialConfig {
    fn default() -> Self {
        MaterialConfig { gamma: 20.0, kx: 0.8, e: 20000.0, nu: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroundConfig {
    pub x0: f64,
}

impl Default for GroundConfig {
    fn default() -> Self {
        GroundConfig { x0: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DensityConfig {
    pub small_arc_per_quarter: usize,
    pub large_arc_per_quarter: usize,
    pub large_arc_radius: f64,
    pub line: usize,
}

impl Default for DensityConfig {
    fn default() -> Self {
        let d = DensitySpec::default();
        DensityConfig {
            small_arc_per_quarter: d.small_arc_per_quarter,
            large_arc_per_quarter: d.large_arc_per_quarter,
            large_arc_radius: d.large_arc_radius,
            line: d.line,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MappingConfig {
    pub beta: f64,
    /// Cavity reference point [x, y].
    pub zc: [f64; 2],
    /// Interior normalisation point in the w-plane; defaults to the image of `zc` (the origin).
    pub wc: Option<[f64; 2]>,
    pub w0_factor: f64,
    pub n_exterior: usize,
    pub csm_exterior: f64,
    pub csm_interior: f64,
    pub cdsm_exterior: f64,
    pub cdsm_interior: f64,
    pub density: DensityConfig,
}

impl Default for MappingConfig {
    fn default() -> Self {
        let s = MapSettings::default();
        MappingConfig {
            beta: s.beta,
            zc: [s.zc.re, s.zc.im],
            wc: None,
            w0_factor: s.w0_factor,
            n_exterior: s.n_exterior,
            csm_exterior: s.csm_ext,
            csm_interior: s.csm_int,
            cdsm_exterior: s.cdsm_ext,
            cdsm_interior: s.cdsm_int,
            density: DensityConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub m: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Starting sample count; 0 picks the default for `m`.
    pub sample_count: usize,
    pub sample_cap: usize,
    pub decay_tol: f64,
    pub lanczos: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let s = SolverSettings::default();
        SolverConfig { m: s.m, tol: s.tol, max_iter: s.max_iter, sample_count: 0, sample_cap: 65536, decay_tol: 1e-10, lanczos: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "lowercase")]
pub enum SegmentSpec {
    Line { start: [f64; 2], end: [f64; 2] },
    Arc { center: [f64; 2], radius: f64, start_angle: f64, end_angle: f64 },
}

impl SegmentSpec {
    fn to_segment(&self) -> Segment {
        let c = |p: &[f64; 2]| C64::new(p[0], p[1]);
        match self {
            SegmentSpec::Line { start, end } => Segment::line(c(start), c(end)),
            SegmentSpec::Arc { center, radius, start_angle, end_angle } => Segment::arc(c(center), *radius, *start_angle, *end_angle),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageSpec {
    pub segments: Vec<SegmentSpec>,
    /// Fillet radii for sharp line–line corners: empty (0.5 m), one value, or one per corner.
    #[serde(default)]
    pub fillet_radii: Vec<f64>,
    /// Explicit per-segment collocation counts (after filleting); density rules otherwise.
    #[serde(default)]
    pub counts: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    /// Named geometry, used when no explicit stages are given (default: the benchmark).
    pub builtin: Option<String>,
    /// Fillet radius of the built-in stage-3 line corners.
    pub corner_radius: f64,
    pub stages: Option<Vec<StageSpec>>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig { builtin: None, corner_radius: 0.5, stages: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub cavity_points: usize,
    /// Ground profile spans [−x_extent·x0, x_extent·x0].
    pub ground_extent: f64,
    pub ground_points: usize,
    pub cavity_profile: bool,
    pub ground_profile: bool,
    pub coefficients: bool,
    /// map-only grid: ρ-lines, θ-lines and samples per line.
    pub grid_rho_lines: usize,
    pub grid_theta_lines: usize,
    pub grid_samples: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            cavity_points: 2048,
            ground_extent: 3.0,
            ground_points: 1201,
            cavity_profile: true,
            ground_profile: true,
            coefficients: true,
            grid_rho_lines: 20,
            grid_theta_lines: 72,
            grid_samples: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub epsilon_m: f64,
    pub equilibrium_rel: f64,
    /// Fraction of γ·(crown depth) allowed for boundary residuals.
    pub residual_fraction: f64,
    /// Ground samples closer than joint_band·x0 to a joint are skipped.
    pub joint_band: f64,
    pub invariant_rel: f64,
    pub resultant_rel: f64,
    pub roundtrip: f64,
    pub decay_fraction: f64,
    pub convergence_rel: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            epsilon_m: 1e-3,
            equilibrium_rel: 1e-3,
            residual_fraction: 0.01,
            joint_band: 0.1,
            invariant_rel: 1e-3,
            resultant_rel: 0.05,
            roundtrip: 1e-6,
            decay_fraction: 1e-3,
            convergence_rel: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub x0: Vec<f64>,
    pub x0_stage: usize,
    pub kx: Vec<f64>,
    /// Stages for the k_x sweep; empty means all.
    pub kx_stages: Vec<usize>,
    pub corner_radii: Vec<f64>,
    pub corner_stage: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            x0: vec![10.0, 100.0, 1000.0, 10000.0],
            x0_stage: 2,
            kx: vec![0.6, 0.8, 1.0, 1.2, 1.4, 1.6],
            kx_stages: Vec::new(),
            corner_radii: vec![0.3, 0.4, 0.5, 0.6, 0.7, 0.8],
            corner_stage: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub material: MaterialConfig,
    pub ground: GroundConfig,
    pub mapping: MappingConfig,
    pub solver: SolverConfig,
    pub geometry: GeometryConfig,
    pub output: OutputConfig,
    pub thresholds: Thresholds,
    pub sweep: SweepConfig,
}

impl RunConfig {
    pub fn benchmark() -> Self {
        RunConfig::default()
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml(&text)
    }

    /// The effective configuration with every default filled in.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn material(&self) -> Result<Material, ConfigError> {
        let m = &self.material;
        Ok(Material::new(m.gamma, m.kx, m.e, m.nu)?)
    }

    pub fn density(&self) -> DensitySpec {
        let d = &self.mapping.density;
        DensitySpec {
            small_arc_per_quarter: d.small_arc_per_quarter,
            large_arc_per_quarter: d.large_arc_per_quarter,
            large_arc_radius: d.large_arc_radius,
            line: d.line,
        }
    }

    pub fn map_settings(&self) -> MapSettings {
        let m = &self.mapping;
        MapSettings {
            zc: C64::new(m.zc[0], m.zc[1]),
            beta: m.beta,
            wc: m.wc.map(|w| C64::new(w[0], w[1])),
            w0_factor: m.w0_factor,
            n_exterior: m.n_exterior,
            csm_ext: m.csm_exterior,
            csm_int: m.csm_interior,
            cdsm_ext: m.cdsm_exterior,
            cdsm_int: m.cdsm_interior,
        }
    }

    pub fn solver_settings(&self) -> SolverSettings {
        SolverSettings { m: self.solver.m, tol: self.solver.tol, max_iter: self.solver.max_iter }
    }

    /// Stage boundaries in order (stage indices start at 1).
    pub fn stages(&self) -> Result<Vec<StageBoundary>, ConfigError> {
        let density = self.density();
        let Some(stages) = &self.geometry.stages else {
            let name = self.geometry.builtin.as_deref().unwrap_or(BUILTIN_BENCHMARK);
            if name != BUILTIN_BENCHMARK {
                return invalid(format!("unknown built-in geometry {name:?} (known: {BUILTIN_BENCHMARK})"));
            }
            return (1..=4).map(|j| Ok(benchmark_stage(j, self.geometry.corner_radius, &density)?)).collect();
        };
        stages
            .iter()
            .enumerate()
            .map(|(i, spec)| {
                let raw: Vec<Segment> = spec.segments.iter().map(SegmentSpec::to_segment).collect();
                let segs = fillet_corners(&raw, &spec.fillet_radii)?;
                Ok(match &spec.counts {
                    Some(c) => StageBoundary::with_counts(i + 1, segs, c.clone())?,
                    None => StageBoundary::new(i + 1, segs, &density)?,
                })
            })
            .collect()
    }

    pub fn ground_split(&self, stages: &[StageBoundary]) -> Result<GroundSplit, ConfigError> {
        Ok(GroundSplit::new(self.ground.x0, stages)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.material()?;
        match &self.geometry.stages {
            Some(list) if list.is_empty() => return invalid("stage list is empty"),
            Some(_) if self.geometry.builtin.is_some() => return invalid("geometry.builtin and geometry.stages are mutually exclusive"),
            _ => {}
        }
        let m = &self.mapping;
        if !(m.beta > 0.0) || !(m.zc[1] < 0.0) || !(m.w0_factor > 0.0 && m.w0_factor < 1.0) {
            return invalid("mapping needs beta > 0, zc below ground and 0 < w0_factor < 1");
        }
        if m.n_exterior < 3 {
            return invalid("mapping.n_exterior must be at least 3");
        }
        if [m.csm_exterior, m.csm_interior, m.cdsm_exterior, m.cdsm_interior].iter().any(|k| !(*k > 0.0)) {
            return invalid("assignment factors must be positive");
        }
        let s = &self.solver;
        if s.m < 1 || !(s.tol > 0.0) || s.max_iter < 1 {
            return invalid("solver needs m >= 1, tol > 0, max_iter >= 1");
        }
        if s.sample_count != 0 && (!s.sample_count.is_power_of_two() || s.sample_count < 4 * s.m + 4) {
            return invalid(format!("solver.sample_count must be 0 or a power of two >= 4m+4, got {}", s.sample_count));
        }
        if !s.sample_cap.is_power_of_two() || s.sample_cap < 4 * s.m + 4 {
            return invalid("solver.sample_cap must be a power of two >= 4m+4");
        }
        if self.output.cavity_points < 8 || self.output.ground_points < 2 || !(self.output.ground_extent > 1.0) {
            return invalid("output needs cavity_points >= 8, ground_points >= 2, ground_extent > 1");
        }
        let t = &self.thresholds;
        if [t.epsilon_m, t.equilibrium_rel, t.residual_fraction, t.invariant_rel, t.resultant_rel, t.roundtrip, t.decay_fraction, t.convergence_rel]
            .iter()
            .any(|v| !(*v > 0.0))
            || !(t.joint_band > 0.0 && t.joint_band < 1.0)
        {
            return invalid("thresholds must be positive and joint_band in (0, 1)");
        }
        let stages = self.stages()?;
        if stages.is_empty() {
            return invalid("stage list is empty");
        }
        self.ground_split(&stages)?;
        Ok(())
    }
}
