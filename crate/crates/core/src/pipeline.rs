//! One stage from boundary to series coefficients.

use crate::config::{ConfigError, RunConfig};
use crate::conformal::{BidirectionalMap, MapError};
use crate::fields::{FieldError, FieldEvaluator};
use crate::geometry::{region_area, GeometryError, Material, StageBoundary};
use crate::rh_solver::{default_sample_count, BoundaryFourier, BranchData, SeriesSolution, SolveError};
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("stage {stage}: {source}")]
    Geometry { stage: usize, source: GeometryError },
    #[error("stage {stage}: {source}")]
    Map { stage: usize, source: MapError },
    #[error("stage {stage}: {source}")]
    Solve { stage: usize, source: SolveError },
    #[error("stage {stage}: {source}")]
    Field { stage: usize, source: FieldError },
    #[error("stage {0} does not exist")]
    NoSuchStage(usize),
}

#[derive(Debug, Clone)]
pub struct StageRun {
    pub boundary: StageBoundary,
    pub x0: f64,
    pub material: Material,
    pub map: BidirectionalMap,
    pub fourier: BoundaryFourier,
    pub solution: SeriesSolution,
    pub lanczos: bool,
    pub area: f64,
    pub map_time: Duration,
    pub solve_time: Duration,
}

impl StageRun {
    pub fn stage(&self) -> usize {
        self.boundary.stage_index
    }

    pub fn evaluator(&self) -> FieldEvaluator<'_> {
        FieldEvaluator::new(&self.map, &self.solution, &self.material, self.fourier.sample_count, self.lanczos)
    }

    pub fn evaluator_with(&self, lanczos: bool) -> FieldEvaluator<'_> {
        FieldEvaluator::new(&self.map, &self.solution, &self.material, self.fourier.sample_count, lanczos)
    }

    pub fn field_error(&self, source: FieldError) -> PipelineError {
        PipelineError::Field { stage: self.stage(), source }
    }
}

/// Samples the boundary data, doubling the sample count until the expansions
/// have decayed below `decay_tol` or `cap` is reached.
pub fn sample_boundary(map: &BidirectionalMap, mat: &Material, start: usize, cap: usize, decay_tol: f64) -> Result<BoundaryFourier, SolveError> {
    let mut n = start;
    loop {
        let bf = BoundaryFourier::compute(map, mat, n)?;
        if bf.tail_d.max(bf.tail_h) <= decay_tol || n >= cap {
            return Ok(bf);
        }
        n *= 2;
    }
}

/// Maps and solves one stage with an existing map (the map depends only on the
/// boundary, so sweeps over material or x0 can reuse it when x0 is unchanged).
pub fn solve_on_map(cfg: &RunConfig, boundary: &StageBoundary, map: BidirectionalMap, mat: &Material, x0: f64, map_time: Duration) -> Result<StageRun, PipelineError> {
    let stage = boundary.stage_index;
    let t = Instant::now();
    let settings = cfg.solver_settings();
    let start = if cfg.solver.sample_count == 0 { default_sample_count(settings.m) } else { cfg.solver.sample_count };
    let wrap = |source| PipelineError::Solve { stage, source };
    let fourier = sample_boundary(&map, mat, start, cfg.solver.sample_cap.max(start), cfg.solver.decay_tol).map_err(wrap)?;
    let branch = BranchData::new(mat.kappa(), map.t1, map.t2, 2 * settings.m + 4).map_err(wrap)?;
    let solution = crate::rh_solver::solve_coeffs(&branch, &fourier, map.alpha, mat.kappa(), &settings).map_err(wrap)?;
    Ok(StageRun {
        area: region_area(boundary),
        boundary: boundary.clone(),
        x0,
        material: *mat,
        map,
        fourier,
        solution,
        lanczos: cfg.solver.lanczos,
        map_time,
        solve_time: t.elapsed(),
    })
}

pub fn build_map(cfg: &RunConfig, boundary: &StageBoundary, x0: f64) -> Result<(BidirectionalMap, Duration), PipelineError> {
    let t = Instant::now();
    let map = BidirectionalMap::build(boundary, x0, &cfg.map_settings()).map_err(|source| PipelineError::Map { stage: boundary.stage_index, source })?;
    Ok((map, t.elapsed()))
}

/// Full pipeline for one stage with the configured material and ground split.
pub fn run_stage(cfg: &RunConfig, boundary: &StageBoundary) -> Result<StageRun, PipelineError> {
    let mat = cfg.material()?;
    let x0 = cfg.ground.x0;
    let (map, map_time) = build_map(cfg, boundary, x0)?;
    solve_on_map(cfg, boundary, map, &mat, x0, map_time)
}

/// Stages selected by `only` (1-based), or all.
pub fn select_stages(cfg: &RunConfig, only: Option<usize>) -> Result<Vec<StageBoundary>, PipelineError> {
    let all = cfg.stages()?;
    cfg.ground_split(&all)?;
    match only {
        None => Ok(all),
        Some(j) => all.into_iter().find(|b| b.stage_index == j).map(|b| vec![b]).ok_or(PipelineError::NoSuchStage(j)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{benchmark_stage, DensitySpec};

    #[test]
    fn doubling_stops_once_decayed() {
        let cfg = RunConfig::benchmark();
        let b = benchmark_stage(2, 0.5, &DensitySpec::default()).unwrap();
        let (map, _) = build_map(&cfg, &b, 10.0).unwrap();
        let mat = cfg.material().unwrap();
        let bf = sample_boundary(&map, &mat, 1024, 65536, 1e-10).unwrap();
        assert!(bf.tail_d.max(bf.tail_h) <= 1e-10);
        assert!(bf.sample_count < 65536);
        let capped = sample_boundary(&map, &mat, 1024, 1024, 1e-10).unwrap();
        assert_eq!(capped.sample_count, 1024);
    }

    #[test]
    fn unknown_stage_is_reported() {
        let cfg = RunConfig::benchmark();
        assert!(matches!(select_stages(&cfg, Some(9)), Err(PipelineError::NoSuchStage(9))));
        assert_eq!(select_stages(&cfg, Some(3)).unwrap()[0].stage_index, 3);
    }
}
