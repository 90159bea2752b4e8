//! Cavity contours, collocation, and the pre-excavation stress state.
//!
//! Contours are stored counterclockwise around the cavity. Anything that needs
//! the clockwise traversal (boundary tractions) flips the tangent at use.

use num_complex::Complex64 as C64;
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

pub const CLOSURE_TOL: f64 = 1e-9;
pub const TANGENCY_TOL: f64 = 1e-6;
pub const DEFAULT_FILLET_RADIUS: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("contour is open: segment {0} ends {1:.3e} m from the start of the next")]
    OpenContour(usize, f64),
    #[error("sharp corner at junction {0}: turning angle {1:.3e} rad")]
    SharpCorner(usize, f64),
    #[error("contour touches or crosses the ground surface (max y = {0})")]
    AboveGround(f64),
    #[error("contour self-intersects near segments {0} and {1}")]
    SelfIntersecting(usize, usize),
    #[error("fillet radius {radius} at corner {corner} needs {needed:.4} m but segment has {available:.4} m")]
    FilletTooLarge { corner: usize, radius: f64, needed: f64, available: f64 },
    #[error("fillet at corner {0} joins a non-line segment")]
    FilletUnsupported(usize),
    #[error("{count} fillet radii supplied for {corners} corners")]
    RadiusCount { count: usize, corners: usize },
    #[error("degenerate segment {0}")]
    Degenerate(usize),
    #[error("collocation density too low: {0}")]
    DensityTooLow(String),
    #[error("point above ground surface: y = {0}")]
    PointAboveGround(f64),
    #[error("invalid material: {0}")]
    Material(String),
    #[error("invalid ground split: {0}")]
    GroundSplit(String),
}

/// Arc or straight piece of a contour.
///
/// Arcs run from `start_angle` to `end_angle`; the sign of the difference is the
/// sweep direction, so a concave fillet in a counterclockwise contour has
/// `end_angle < start_angle`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Arc { center: C64, radius: f64, start_angle: f64, end_angle: f64 },
    Line { start: C64, end: C64 },
}

impl Segment {
    pub fn line(start: C64, end: C64) -> Self {
        Segment::Line { start, end }
    }

    pub fn arc(center: C64, radius: f64, start_angle: f64, end_angle: f64) -> Self {
        Segment::Arc { center, radius, start_angle, end_angle }
    }

    pub fn point_at(&self, t: f64) -> C64 {
        match *self {
            Segment::Line { start, end } => start + (end - start) * t,
            Segment::Arc { center, radius, start_angle, end_angle } => {
                center + C64::from_polar(radius, start_angle + (end_angle - start_angle) * t)
            }
        }
    }

    /// Unit tangent in the direction of traversal.
    pub fn tangent_at(&self, t: f64) -> C64 {
        match *self {
            Segment::Line { start, end } => (end - start) / (end - start).norm(),
            Segment::Arc { start_angle, end_angle, .. } => {
                let a = start_angle + (end_angle - start_angle) * t;
                C64::from_polar(1.0, a + FRAC_PI_2 * (end_angle - start_angle).signum())
            }
        }
    }

    pub fn start(&self) -> C64 {
        self.point_at(0.0)
    }

    pub fn end(&self) -> C64 {
        self.point_at(1.0)
    }

    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { start, end } => (end - start).norm(),
            Segment::Arc { radius, start_angle, end_angle, .. } => radius * (end_angle - start_angle).abs(),
        }
    }

    /// Signed sweep in radians (zero for lines).
    pub fn sweep(&self) -> f64 {
        match *self {
            Segment::Line { .. } => 0.0,
            Segment::Arc { start_angle, end_angle, .. } => end_angle - start_angle,
        }
    }

    pub fn reversed(&self) -> Self {
        match *self {
            Segment::Line { start, end } => Segment::Line { start: end, end: start },
            Segment::Arc { center, radius, start_angle, end_angle } => {
                Segment::Arc { center, radius, start_angle: end_angle, end_angle: start_angle }
            }
        }
    }

    /// Exact Green's-theorem term ½∮(x dy − y dx) over this piece.
    pub fn area_term(&self) -> f64 {
        match *self {
            Segment::Line { start, end } => 0.5 * (start.re * end.im - end.re * start.im),
            Segment::Arc { center, radius, start_angle: a0, end_angle: a1 } => {
                0.5 * (radius * center.re * (a1.sin() - a0.sin()) - radius * center.im * (a1.cos() - a0.cos())
                    + radius * radius * (a1 - a0))
            }
        }
    }

    /// Largest y reached on the piece.
    pub fn max_y(&self) -> f64 {
        match *self {
            Segment::Line { start, end } => start.im.max(end.im),
            Segment::Arc { center, radius, start_angle, end_angle } => {
                let mut m = self.start().im.max(self.end().im);
                let (lo, hi) = if start_angle < end_angle { (start_angle, end_angle) } else { (end_angle, start_angle) };
                // does the sweep pass through angle π/2 (mod 2π)?
                let k = ((lo - FRAC_PI_2) / (2.0 * PI)).ceil();
                if FRAC_PI_2 + 2.0 * PI * k <= hi {
                    m = m.max(center.im + radius);
                }
                m
            }
        }
    }

    /// `n` points at parameters i/n, i = 0..n (end point excluded).
    pub fn sample(&self, n: usize) -> Vec<C64> {
        (0..n).map(|i| self.point_at(i as f64 / n as f64)).collect()
    }
}

/// Collocation counts for the generated segments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensitySpec {
    pub small_arc_per_quarter: usize,
    pub large_arc_per_quarter: usize,
    pub large_arc_radius: f64,
    pub line: usize,
}

impl Default for DensitySpec {
    fn default() -> Self {
        DensitySpec { small_arc_per_quarter: 30, large_arc_per_quarter: 90, large_arc_radius: 1.0, line: 60 }
    }
}

impl DensitySpec {
    pub fn count_for(&self, seg: &Segment) -> usize {
        match seg {
            Segment::Line { .. } => self.line,
            Segment::Arc { radius, .. } => {
                let per = if *radius >= self.large_arc_radius {
                    self.large_arc_per_quarter
                } else {
                    self.small_arc_per_quarter
                };
                ((seg.sweep().abs() / FRAC_PI_2) * per as f64).round().max(3.0) as usize
            }
        }
    }
}

/// Closed, tangent-continuous cavity contour.
#[derive(Debug, Clone, PartialEq)]
pub struct StageBoundary {
    pub stage_index: usize,
    pub segments: Vec<Segment>,
    pub counts: Vec<usize>,
}

fn turning_angle(a: C64, b: C64) -> f64 {
    (b * a.conj()).arg()
}

fn signed_area(segments: &[Segment]) -> f64 {
    segments.iter().map(Segment::area_term).sum()
}

fn segments_cross(p1: C64, p2: C64, q1: C64, q2: C64) -> bool {
    let cross = |a: C64, b: C64| a.re * b.im - a.im * b.re;
    let d1 = cross(p2 - p1, q1 - p1);
    let d2 = cross(p2 - p1, q2 - p1);
    let d3 = cross(q2 - q1, p1 - q1);
    let d4 = cross(q2 - q1, p2 - q1);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

impl StageBoundary {
    /// Validates the contour and assigns counts from `density`. Clockwise input is
    /// reversed so storage is always counterclockwise.
    pub fn new(stage_index: usize, segments: Vec<Segment>, density: &DensitySpec) -> Result<Self, GeometryError> {
        let counts = segments.iter().map(|s| density.count_for(s)).collect();
        Self::with_counts(stage_index, segments, counts)
    }

    pub fn with_counts(stage_index: usize, mut segments: Vec<Segment>, mut counts: Vec<usize>) -> Result<Self, GeometryError> {
        assert_eq!(segments.len(), counts.len(), "one count per segment");
        for (i, s) in segments.iter().enumerate() {
            let ok = match *s {
                Segment::Line { start, end } => (end - start).norm() > CLOSURE_TOL,
                Segment::Arc { radius, .. } => radius > 0.0 && s.length() > CLOSURE_TOL,
            };
            if !ok {
                return Err(GeometryError::Degenerate(i));
            }
        }
        if signed_area(&segments) < 0.0 {
            segments = segments.iter().rev().map(Segment::reversed).collect();
            counts.reverse();
        }
        let b = StageBoundary { stage_index, segments, counts };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let n = self.segments.len();
        for i in 0..n {
            let a = &self.segments[i];
            let b = &self.segments[(i + 1) % n];
            let gap = (a.end() - b.start()).norm();
            if gap > CLOSURE_TOL {
                return Err(GeometryError::OpenContour(i, gap));
            }
            let turn = turning_angle(a.tangent_at(1.0), b.tangent_at(0.0));
            if turn.abs() > TANGENCY_TOL {
                return Err(GeometryError::SharpCorner(i, turn));
            }
        }
        let ymax = self.segments.iter().map(Segment::max_y).fold(f64::NEG_INFINITY, f64::max);
        if ymax >= 0.0 {
            return Err(GeometryError::AboveGround(ymax));
        }
        // simplicity on a fine polyline; adjacent pieces share endpoints, so skip neighbours
        let mut poly: Vec<(usize, C64)> = Vec::new();
        for (i, s) in self.segments.iter().enumerate() {
            let k = (s.length() / 0.05).ceil().clamp(4.0, 400.0) as usize;
            poly.extend(s.sample(k).into_iter().map(|p| (i, p)));
        }
        let m = poly.len();
        for i in 0..m {
            let (si, p1) = poly[i];
            let p2 = poly[(i + 1) % m].1;
            for j in (i + 2)..m {
                if i == 0 && j == m - 1 {
                    continue;
                }
                let (sj, q1) = poly[j];
                let q2 = poly[(j + 1) % m].1;
                if segments_cross(p1, p2, q1, q2) {
                    return Err(GeometryError::SelfIntersecting(si, sj));
                }
            }
        }
        Ok(())
    }

    pub fn perimeter(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }

    /// True if any piece turns clockwise (a concave stretch of the cavity wall).
    pub fn is_concave(&self) -> bool {
        self.segments.iter().any(|s| s.sweep() < -TANGENCY_TOL)
    }

    pub fn max_abs_x(&self) -> f64 {
        self.collocation_raw().iter().map(|p| p.re.abs()).fold(0.0, f64::max)
    }

    fn collocation_raw(&self) -> Vec<C64> {
        self.segments.iter().zip(&self.counts).flat_map(|(s, &n)| s.sample(n)).collect()
    }

    /// Points midway (in segment parameter) between consecutive collocation points.
    pub fn collocation_midpoints(&self) -> Vec<C64> {
        self.segments
            .iter()
            .zip(&self.counts)
            .flat_map(|(s, &n)| (0..n).map(move |i| s.point_at((i as f64 + 0.5) / n as f64)))
            .collect()
    }

    /// Point and counterclockwise unit tangent at arclength `s` (wrapped to the perimeter).
    pub fn point_at_arclength(&self, s: f64) -> (C64, C64) {
        let per = self.perimeter();
        let mut s = s.rem_euclid(per);
        for seg in &self.segments {
            let l = seg.length();
            if s <= l {
                let t = s / l;
                return (seg.point_at(t), seg.tangent_at(t));
            }
            s -= l;
        }
        let last = self.segments.last().expect("non-empty contour");
        (last.end(), last.tangent_at(1.0))
    }
}

/// Checks both spacing principles on a closed, cyclically ordered point list:
/// turning angle between consecutive chords ≤ 10°, and no chord longer than 1%
/// of the polygon perimeter.
pub fn check_spacing(points: &[C64]) -> Result<(), GeometryError> {
    let n = points.len();
    if n < 3 {
        return Err(GeometryError::DensityTooLow(format!("only {n} points")));
    }
    let chords: Vec<C64> = (0..n).map(|i| points[(i + 1) % n] - points[i]).collect();
    let total: f64 = chords.iter().map(|c| c.norm()).sum();
    let mut max_turn = 0.0f64;
    let mut max_share = 0.0f64;
    for i in 0..n {
        let c = chords[i];
        if c.norm() == 0.0 {
            return Err(GeometryError::DensityTooLow(format!("coincident points at {i}")));
        }
        max_turn = max_turn.max(turning_angle(chords[(i + n - 1) % n], c).abs());
        max_share = max_share.max(c.norm() / total);
    }
    if max_turn > 10f64.to_radians() {
        return Err(GeometryError::DensityTooLow(format!(
            "turning angle {:.2}° between chords exceeds 10°",
            max_turn.to_degrees()
        )));
    }
    if max_share > 1e-2 {
        return Err(GeometryError::DensityTooLow(format!("chord share {max_share:.4} of perimeter exceeds 1e-2")));
    }
    Ok(())
}

/// Collocation points along the contour, counterclockwise, validated for spacing.
pub fn collocation_points(boundary: &StageBoundary) -> Result<Vec<C64>, GeometryError> {
    let pts = boundary.collocation_raw();
    check_spacing(&pts)?;
    Ok(pts)
}

/// `n` uniform counterclockwise points on a circle, starting on the positive real axis.
pub fn circle_points(center: C64, radius: f64, n: usize) -> Vec<C64> {
    (0..n).map(|k| center + C64::from_polar(radius, 2.0 * PI * k as f64 / n as f64)).collect()
}

pub fn region_area(boundary: &StageBoundary) -> f64 {
    signed_area(&boundary.segments).abs()
}

/// Replaces every sharp line–line junction with a tangent arc.
///
/// `radii` may be empty (default radius everywhere), a single value (applied to
/// every corner) or one value per corner in contour order. The sum of tangent
/// lengths taken from a line may not exceed its length; a line consumed exactly
/// is dropped.
pub fn fillet_corners(raw: &[Segment], radii: &[f64]) -> Result<Vec<Segment>, GeometryError> {
    let n = raw.len();
    for i in 0..n {
        let gap = (raw[i].end() - raw[(i + 1) % n].start()).norm();
        if gap > CLOSURE_TOL {
            return Err(GeometryError::OpenContour(i, gap));
        }
    }
    // junction i sits between raw[i] and raw[i+1]
    let corners: Vec<usize> = (0..n)
        .filter(|&i| turning_angle(raw[i].tangent_at(1.0), raw[(i + 1) % n].tangent_at(0.0)).abs() > TANGENCY_TOL)
        .collect();
    let radius_of = |c: usize| -> Result<f64, GeometryError> {
        match radii.len() {
            0 => Ok(DEFAULT_FILLET_RADIUS),
            1 => Ok(radii[0]),
            m if m == corners.len() => Ok(radii[c]),
            m => Err(GeometryError::RadiusCount { count: m, corners: corners.len() }),
        }
    };
    let mut trim_start = vec![0.0; n];
    let mut trim_end = vec![0.0; n];
    let mut arcs: Vec<Option<Segment>> = vec![None; n];
    for (c, &i) in corners.iter().enumerate() {
        let j = (i + 1) % n;
        let (Segment::Line { .. }, Segment::Line { .. }) = (raw[i], raw[j]) else {
            return Err(GeometryError::FilletUnsupported(c));
        };
        let r = radius_of(c)?;
        let d1 = raw[i].tangent_at(1.0);
        let d2 = raw[j].tangent_at(0.0);
        let phi = turning_angle(d1, d2);
        let t = r * (phi.abs() / 2.0).tan();
        let p = raw[i].end();
        let a = p - d1 * t;
        let normal = d1 * C64::new(0.0, phi.signum());
        let center = a + normal * r;
        let a0 = (a - center).arg();
        arcs[i] = Some(Segment::arc(center, r, a0, a0 + phi));
        trim_end[i] += t;
        trim_start[j] += t;
    }
    for (c, &i) in corners.iter().enumerate() {
        for k in [i, (i + 1) % n] {
            let need = trim_start[k] + trim_end[k];
            let have = raw[k].length();
            if need > have + CLOSURE_TOL {
                return Err(GeometryError::FilletTooLarge { corner: c, radius: radius_of(c)?, needed: need, available: have });
            }
        }
    }
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        let seg = raw[i];
        let l = seg.length();
        if let Segment::Line { start, end } = seg {
            let d = (end - start) / l;
            let s = start + d * trim_start[i];
            let e = end - d * trim_end[i];
            if (e - s).norm() > CLOSURE_TOL && l - trim_start[i] - trim_end[i] > CLOSURE_TOL {
                out.push(Segment::line(s, e));
            }
        } else {
            out.push(seg);
        }
        if let Some(a) = arcs[i] {
            out.push(a);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub gamma: f64,
    pub kx: f64,
    pub e: f64,
    pub nu: f64,
}

impl Material {
    pub fn new(gamma: f64, kx: f64, e: f64, nu: f64) -> Result<Self, GeometryError> {
        if !(gamma >= 0.0) {
            return Err(GeometryError::Material(format!("gamma must be ≥ 0, got {gamma}")));
        }
        if !(kx > 0.0) {
            return Err(GeometryError::Material(format!("kx must be > 0, got {kx}")));
        }
        if !(e > 0.0) {
            return Err(GeometryError::Material(format!("E must be > 0, got {e}")));
        }
        if !(nu > 0.0 && nu < 0.5) {
            return Err(GeometryError::Material(format!("nu must lie in (0, 0.5), got {nu}")));
        }
        Ok(Material { gamma, kx, e, nu })
    }

    pub fn shear_modulus(&self) -> f64 {
        self.e / (2.0 * (1.0 + self.nu))
    }

    /// Plane-strain Kolosov constant.
    pub fn kappa(&self) -> f64 {
        3.0 - 4.0 * self.nu
    }
}

/// Free ground segment [−x0, x0]; the rest of the surface is fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundSplit {
    pub x0: f64,
}

impl GroundSplit {
    pub fn new(x0: f64, stages: &[StageBoundary]) -> Result<Self, GeometryError> {
        if !(x0 > 0.0) {
            return Err(GeometryError::GroundSplit(format!("x0 must be > 0, got {x0}")));
        }
        for s in stages {
            let w = s.max_abs_x();
            if w >= x0 {
                return Err(GeometryError::GroundSplit(format!(
                    "x0 = {x0} does not span stage {} (|x| up to {w})",
                    s.stage_index
                )));
            }
        }
        Ok(GroundSplit { x0 })
    }

    pub fn t1(&self) -> C64 {
        C64::new(-self.x0, 0.0)
    }

    pub fn t2(&self) -> C64 {
        C64::new(self.x0, 0.0)
    }
}

/// Gravitational initial stress (σx0, σy0, τxy0), compression negative.
pub fn initial_stress_at(z: C64, mat: &Material) -> Result<(f64, f64, f64), GeometryError> {
    if z.im > 0.0 {
        return Err(GeometryError::PointAboveGround(z.im));
    }
    Ok((mat.kx * mat.gamma * z.im, mat.gamma * z.im, 0.0))
}

/// Initial-field traction (X, Y) on the cavity wall at counterclockwise arclength `s`,
/// with direction cosines taken along the clockwise traversal.
pub fn initial_traction(boundary: &StageBoundary, s: f64, mat: &Material) -> (f64, f64) {
    let (z, t_ccw) = boundary.point_at_arclength(s);
    let t = -t_ccw;
    let (cx, cy) = (t.im, -t.re);
    let (sx, sy, txy) = (mat.kx * mat.gamma * z.im, mat.gamma * z.im, 0.0);
    (sx * cx + txy * cy, txy * cx + sy * cy)
}

/// Sharp-cornered outlines of the four benchmark stages, counterclockwise.
pub fn benchmark_raw(stage: usize) -> Vec<Segment> {
    let c = |x: f64, y: f64| C64::new(x, y);
    let big = |a0: f64, a1: f64| Segment::arc(c(0.0, -10.0), 5.0, a0, a1);
    match stage {
        1 => vec![
            big(FRAC_PI_2, PI),
            Segment::line(c(-5.0, -10.0), c(-5.0, -10.5)),
            Segment::line(c(-5.0, -10.5), c(0.5, -10.5)),
            Segment::line(c(0.5, -10.5), c(0.5, -5.0)),
            Segment::line(c(0.5, -5.0), c(0.0, -5.0)),
        ],
        2 => vec![
            big(0.0, PI),
            Segment::line(c(-5.0, -10.0), c(-5.0, -10.5)),
            Segment::line(c(-5.0, -10.5), c(5.0, -10.5)),
            Segment::line(c(5.0, -10.5), c(5.0, -10.0)),
        ],
        3 => vec![
            big(0.0, PI),
            Segment::line(c(-5.0, -10.0), c(-5.0, -15.0)),
            Segment::line(c(-5.0, -15.0), c(0.5, -15.0)),
            Segment::line(c(0.5, -15.0), c(0.5, -10.5)),
            Segment::line(c(0.5, -10.5), c(5.0, -10.5)),
            Segment::line(c(5.0, -10.5), c(5.0, -10.0)),
        ],
        4 => vec![
            big(0.0, PI),
            Segment::line(c(-5.0, -10.0), c(-5.0, -15.0)),
            Segment::line(c(-5.0, -15.0), c(5.0, -15.0)),
            Segment::line(c(5.0, -15.0), c(5.0, -10.0)),
        ],
        _ => panic!("benchmark has stages 1..=4, got {stage}"),
    }
}

/// Filleted benchmark stage. Stage 3 takes `corner_radius` on its first three
/// corners; every other corner uses the default 0.5 m.
pub fn benchmark_stage(stage: usize, corner_radius: f64, density: &DensitySpec) -> Result<StageBoundary, GeometryError> {
    let raw = benchmark_raw(stage);
    let radii: Vec<f64> = match stage {
        3 => vec![corner_radius, corner_radius, corner_radius, DEFAULT_FILLET_RADIUS],
        _ => vec![],
    };
    StageBoundary::new(stage, fillet_corners(&raw, &radii)?, density)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mat() -> Material {
        Material::new(20.0, 0.8, 20000.0, 0.3).unwrap()
    }

    #[test]
    fn fillet_reproduces_stage1_top_arc() {
        // rectangle whose top-right corner sits at (0.5, −5); the other corners get small fillets
        let raw = vec![
            Segment::line(C64::new(0.5, -10.0), C64::new(0.5, -5.0)),
            Segment::line(C64::new(0.5, -5.0), C64::new(-3.0, -5.0)),
            Segment::line(C64::new(-3.0, -5.0), C64::new(-3.0, -10.0)),
            Segment::line(C64::new(-3.0, -10.0), C64::new(0.5, -10.0)),
        ];
        let out = fillet_corners(&raw, &[0.5, 0.1, 0.1, 0.1]).unwrap();
        let arc = out
            .iter()
            .find_map(|s| match *s {
                Segment::Arc { center, radius, start_angle, end_angle } if (radius - 0.5).abs() < 1e-12 => {
                    Some((center, start_angle, end_angle))
                }
                _ => None,
            })
            .unwrap();
        assert_relative_eq!(arc.0.re, 0.0, epsilon = 1e-12);
        assert_relative_eq!(arc.0.im, -5.5, epsilon = 1e-12);
        assert_relative_eq!(arc.1, 0.0, epsilon = 1e-12);
        assert_relative_eq!(arc.2, FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn tangent_contour_is_unchanged() {
        let circle = vec![Segment::arc(C64::new(0.0, -10.0), 5.0, -PI, PI)];
        assert_eq!(fillet_corners(&circle, &[]).unwrap(), circle);
    }

    #[test]
    fn filleted_square_perimeter() {
        let c = |x: f64, y: f64| C64::new(x, y);
        let sq = vec![
            Segment::line(c(-0.5, -10.5), c(0.5, -10.5)),
            Segment::line(c(0.5, -10.5), c(0.5, -9.5)),
            Segment::line(c(0.5, -9.5), c(-0.5, -9.5)),
            Segment::line(c(-0.5, -9.5), c(-0.5, -10.5)),
        ];
        let b = StageBoundary::new(1, fillet_corners(&sq, &[0.1]).unwrap(), &DensitySpec::default()).unwrap();
        // arc-length quadrature on a fine polyline
        let mut quad = 0.0;
        for s in &b.segments {
            let k = 20_000;
            for i in 0..k {
                quad += (s.point_at((i + 1) as f64 / k as f64) - s.point_at(i as f64 / k as f64)).norm();
            }
        }
        let expected = 4.0 * 0.8 + 2.0 * PI * 0.1;
        assert_relative_eq!(b.perimeter(), expected, epsilon = 1e-12);
        assert_relative_eq!(quad, expected, max_relative = 1e-8);
    }

    #[test]
    fn fillet_too_large_is_rejected() {
        let raw = benchmark_raw(2);
        let err = fillet_corners(&raw, &[0.8]).unwrap_err();
        assert!(matches!(err, GeometryError::FilletTooLarge { .. }));
    }

    #[test]
    fn benchmark_stages_match_published_pieces() {
        let d = DensitySpec::default();
        let s2 = benchmark_stage(2, 0.5, &d).unwrap();
        let arcs: Vec<_> = s2
            .segments
            .iter()
            .filter_map(|s| match *s {
                Segment::Arc { center, radius, .. } => Some((center, radius)),
                _ => None,
            })
            .collect();
        assert!(arcs.iter().any(|(c, r)| (*c - C64::new(-4.5, -10.0)).norm() < 1e-12 && (*r - 0.5).abs() < 1e-12));
        assert!(arcs.iter().any(|(c, r)| (*c - C64::new(4.5, -10.0)).norm() < 1e-12 && (*r - 0.5).abs() < 1e-12));
        assert_eq!(collocation_points(&s2).unwrap().len(), 300);
        let s1 = benchmark_stage(1, 0.5, &d).unwrap();
        assert!(s1.segments.iter().any(|s| matches!(*s, Segment::Arc { center, .. } if (center - C64::new(0.0, -5.5)).norm() < 1e-12)));
        assert_eq!(collocation_points(&s1).unwrap().len(), 300);
        let s3 = benchmark_stage(3, 0.5, &d).unwrap();
        assert!(s3.is_concave());
        assert!(!s2.is_concave());
        assert_eq!(collocation_points(&s3).unwrap().len(), 540);
        assert_eq!(collocation_points(&benchmark_stage(4, 0.5, &d).unwrap()).unwrap().len(), 420);
    }

    #[test]
    fn stage3_sweep_radii_build() {
        let d = DensitySpec::default();
        for r in [0.3, 0.4, 0.5, 0.6, 0.7, 0.8] {
            let b = benchmark_stage(3, r, &d).unwrap();
            assert!(b.is_concave());
        }
    }

    #[test]
    fn spacing_principles() {
        let c = C64::new(0.0, -10.0);
        let e = check_spacing(&circle_points(c, 5.0, 8)).unwrap_err();
        assert!(matches!(e, GeometryError::DensityTooLow(ref m) if m.contains("turning")));
        assert!(check_spacing(&circle_points(c, 5.0, 120)).is_ok());
    }

    #[test]
    fn areas() {
        let circle = StageBoundary::new(1, vec![Segment::arc(C64::new(0.0, -10.0), 5.0, -PI, PI)], &DensitySpec::default()).unwrap();
        assert_relative_eq!(region_area(&circle), 25.0 * PI, epsilon = 1e-12);
        let rev = StageBoundary::new(1, vec![Segment::arc(C64::new(0.0, -10.0), 5.0, PI, -PI)], &DensitySpec::default()).unwrap();
        assert_relative_eq!(region_area(&rev), 25.0 * PI, epsilon = 1e-12);
        let s2 = benchmark_stage(2, 0.5, &DensitySpec::default()).unwrap();
        // half disc + 10×0.5 strip − two corner cut-outs of (1 − π/4)·0.25
        let expected = 12.5 * PI + 5.0 - 2.0 * 0.25 * (1.0 - PI / 4.0);
        assert_relative_eq!(region_area(&s2), expected, epsilon = 1e-12);
        assert_relative_eq!(region_area(&s2), 44.16, epsilon = 5e-3);
    }

    #[test]
    fn areas_grow_with_stage() {
        let d = DensitySpec::default();
        let a: Vec<f64> = (1..=4).map(|j| region_area(&benchmark_stage(j, 0.5, &d).unwrap())).collect();
        assert!(a.windows(2).all(|w| w[1] >= w[0]), "{a:?}");
    }

    #[test]
    fn initial_stress_examples() {
        let m = mat();
        assert_eq!(initial_stress_at(C64::new(0.0, 0.0), &m).unwrap(), (0.0, 0.0, 0.0));
        let (sx, sy, t) = initial_stress_at(C64::new(0.0, -10.0), &m).unwrap();
        assert_relative_eq!(sx, -160.0, epsilon = 1e-12);
        assert_relative_eq!(sy, -200.0, epsilon = 1e-12);
        assert_eq!(t, 0.0);
        assert!(initial_stress_at(C64::new(0.0, 1.0), &m).is_err());
        let iso = Material::new(20.0, 1.0, 20000.0, 0.3).unwrap();
        let (a, b, _) = initial_stress_at(C64::new(3.0, -7.0), &iso).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn traction_at_crown_and_wall() {
        let m = mat();
        let s2 = benchmark_stage(2, 0.5, &DensitySpec::default()).unwrap();
        // crown: quarter of the way around the upper semicircle (angle π/2)
        let crown_s = 5.0 * FRAC_PI_2;
        let (x, y) = initial_traction(&s2, crown_s, &m);
        assert_relative_eq!(x, 0.0, epsilon = 1e-9);
        // body's outward normal at the crown points down into the cavity
        assert_relative_eq!(y, 100.0, epsilon = 1e-9);
        // the vertical stretch at x = 5, y = −10 sits at the end of the contour
        let (x, y) = initial_traction(&s2, s2.perimeter() - 1e-12, &m);
        assert_relative_eq!((x * x + y * y).sqrt(), 160.0, epsilon = 1e-6);
        assert_relative_eq!(y, 0.0, epsilon = 1e-6);
        let zero = Material::new(0.0, 0.8, 20000.0, 0.3).unwrap();
        assert_eq!(initial_traction(&s2, 3.0, &zero), (0.0, 0.0));
    }

    #[test]
    fn traction_resultant_is_weight() {
        let m = mat();
        for j in 1..=4 {
            let b = benchmark_stage(j, 0.5, &DensitySpec::default()).unwrap();
            let per = b.perimeter();
            let n = 200_000;
            let h = per / n as f64;
            let (mut fx, mut fy) = (0.0, 0.0);
            for i in 0..n {
                let (x, y) = initial_traction(&b, (i as f64 + 0.5) * h, &m);
                fx += x * h;
                fy += y * h;
            }
            let w = m.gamma * region_area(&b);
            assert!(fx.abs() / w < 1e-6, "stage {j}: {fx}");
            assert_relative_eq!(fy, -w, max_relative = 1e-6);
        }
    }

    #[test]
    fn material_constants() {
        let m = mat();
        assert_relative_eq!(m.kappa(), 1.8, epsilon = 1e-15);
        assert_relative_eq!(m.shear_modulus(), 20000.0 / 2.6, epsilon = 1e-12);
        assert!(Material::new(20.0, 0.8, 20000.0, 0.5).is_err());
    }

    #[test]
    fn ground_split_must_span_cavity() {
        let b = benchmark_stage(2, 0.5, &DensitySpec::default()).unwrap();
        assert!(GroundSplit::new(10.0, std::slice::from_ref(&b)).is_ok());
        assert!(GroundSplit::new(4.0, &[b]).is_err());
    }
}
