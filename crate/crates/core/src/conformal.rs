//! Two-step bidirectional map between the physical region (lower half-plane
//! minus the cavity) and the annulus `α < |ζ| < 1`.
//!
//! Step one is a Möbius map sending the ground surface to `|w| = β` and the
//! cavity reference point to `w = 0`. Step two is a charge-simulation forward map
//! `w → ζ` (real log charges) paired with a dipole-simulation backward map
//! `ζ → w` (complex simple poles) fitted on the forward images of the same
//! collocation points.

use crate::geometry::{check_spacing, circle_points, collocation_points, GeometryError, StageBoundary};
use crate::linalg::{relative_residual, LinalgError, Lu};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("Möbius pole hit at {0}")]
    PoleHit(C64),
    #[error("invalid Möbius parameters: {0}")]
    InvalidMobius(String),
    #[error("coincident neighbouring collocation points at index {0}")]
    DegenerateSpacing(usize),
    #[error("{which} system is singular")]
    SingularSystem { which: &'static str },
    #[error("evaluation point {0} lies outside the mapped region")]
    OutsideDomain(C64),
    #[error("evaluation point {0} coincides with a charge point")]
    ChargePointHit(C64),
    #[error("joint images coincide")]
    CoincidentJoints,
    #[error("reference point {0} is not inside the cavity")]
    ReferenceOutside(C64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusMap {
    pub zc: C64,
    pub beta: f64,
}

impl MobiusMap {
    pub fn new(zc: C64, beta: f64) -> Result<Self, MapError> {
        if !(zc.im < 0.0) {
            return Err(MapError::InvalidMobius(format!("z_c must lie below ground, got {zc}")));
        }
        if !(beta > 0.0) {
            return Err(MapError::InvalidMobius(format!("beta must be positive, got {beta}")));
        }
        Ok(MobiusMap { zc, beta })
    }

    pub fn forward(&self, z: C64) -> Result<C64, MapError> {
        let d = z - self.zc.conj();
        if d.norm() == 0.0 {
            return Err(MapError::PoleHit(z));
        }
        Ok(self.beta * (z - self.zc) / d)
    }

    pub fn backward(&self, w: C64) -> Result<C64, MapError> {
        let d = w - self.beta;
        if d.norm() == 0.0 {
            return Err(MapError::PoleHit(w));
        }
        Ok((w * self.zc.conj() - self.beta * self.zc) / d)
    }

    /// dz/dw and d²z/dw² of the backward map.
    pub fn derivatives(&self, w: C64) -> (C64, C64) {
        let d = w - self.beta;
        let k = self.beta * (self.zc - self.zc.conj());
        (k / (d * d), -2.0 * k / (d * d * d))
    }
}

/// Charge points pushed off a closed, cyclically ordered collocation list along
/// the right-hand normal of the local chord, by `factor` × mean neighbour spacing.
pub fn place_charges(points: &[C64], factor: f64) -> Result<Vec<C64>, MapError> {
    let n = points.len();
    (0..n)
        .map(|k| {
            let prev = points[(k + n - 1) % n];
            let next = points[(k + 1) % n];
            let h = 0.5 * ((next - points[k]).norm() + (points[k] - prev).norm());
            if (next - points[k]).norm() == 0.0 || (points[k] - prev).norm() == 0.0 {
                return Err(MapError::DegenerateSpacing(k));
            }
            let theta = (next - prev).arg() - std::f64::consts::FRAC_PI_2;
            Ok(points[k] + factor * h * C64::from_polar(1.0, theta))
        })
        .collect()
}

/// Charge-simulation (forward) and dipole-simulation (backward) data.
#[derive(Debug, Clone)]
pub struct ChargeSet {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub u: Vec<C64>,
    pub v: Vec<C64>,
    pub log_re: f64,
    pub log_alpha: f64,
    pub dip_p: Vec<C64>,
    pub dip_q: Vec<C64>,
    pub eta: Vec<C64>,
    pub mu: Vec<C64>,
    pub wc: C64,
    pub wbeta: C64,
    pub w0: C64,
    // constant part of the exponent, so each evaluation only sums the w-dependent logs
    offset: C64,
}

#[derive(Debug, Clone)]
pub struct ForwardSolution {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub log_re: f64,
    pub log_alpha: f64,
    pub condition: f64,
    pub residual: f64,
}

/// Solves the real collocation system for the log charges and the two radii.
/// `ext` runs counterclockwise on the outer circle, `int` clockwise on the hole.
pub fn solve_forward_map(ext: &[C64], int: &[C64], u: &[C64], v: &[C64], wc: C64, wbeta: C64) -> Result<ForwardSolution, MapError> {
    let (n0, nj) = (ext.len(), int.len());
    let n = n0 + nj + 2;
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DVector::<f64>::zeros(n);
    for (i, &w) in ext.iter().chain(int.iter()).enumerate() {
        for (k, &uk) in u.iter().enumerate() {
            a[(i, k)] = ((w - uk) / (wbeta - uk)).norm().ln();
        }
        for (k, &vk) in v.iter().enumerate() {
            a[(i, n0 + k)] = ((w - vk) / (wbeta - vk)).norm().ln();
        }
        a[(i, if i < n0 { n0 + nj } else { n0 + nj + 1 })] = -1.0;
        b[i] = -((w - wc) / (wbeta - wc)).norm().ln();
    }
    for k in 0..n0 {
        a[(n0 + nj, k)] = 1.0;
    }
    b[n0 + nj] = -1.0;
    for k in 0..nj {
        a[(n0 + nj + 1, n0 + k)] = 1.0;
    }
    let lu = Lu::new(a.clone()).map_err(|_: LinalgError| MapError::SingularSystem { which: "charge simulation" })?;
    let x = lu.solve(&b).map_err(|_| MapError::SingularSystem { which: "charge simulation" })?;
    Ok(ForwardSolution {
        p: x.rows(0, n0).iter().copied().collect(),
        q: x.rows(n0, nj).iter().copied().collect(),
        log_re: x[n0 + nj],
        log_alpha: x[n0 + nj + 1],
        condition: lu.condition_estimate(),
        residual: relative_residual(&a, &x, &b),
    })
}

#[derive(Debug, Clone)]
pub struct BackwardSolution {
    pub p: Vec<C64>,
    pub q: Vec<C64>,
    pub condition: f64,
    pub residual: f64,
}

/// Fits the dipole sum so that ζ-collocations reproduce their w-collocations.
pub fn solve_backward_map(zeta_ext: &[C64], zeta_int: &[C64], w_ext: &[C64], w_int: &[C64], eta: &[C64], mu: &[C64]) -> Result<BackwardSolution, MapError> {
    let z: Vec<C64> = zeta_ext.iter().chain(zeta_int).copied().collect();
    let poles: Vec<C64> = eta.iter().chain(mu).copied().collect();
    let n = z.len();
    assert_eq!(n, poles.len());
    let a = DMatrix::<C64>::from_fn(n, n, |i, k| (z[i] - poles[k]).inv());
    let b = DVector::<C64>::from_iterator(n, w_ext.iter().chain(w_int).copied());
    let lu = Lu::new(a.clone()).map_err(|_| MapError::SingularSystem { which: "dipole simulation" })?;
    let x = lu.solve(&b).map_err(|_| MapError::SingularSystem { which: "dipole simulation" })?;
    Ok(BackwardSolution {
        p: x.rows(0, eta.len()).iter().copied().collect(),
        q: x.rows(eta.len(), mu.len()).iter().copied().collect(),
        condition: lu.condition_estimate(),
        residual: relative_residual(&a, &x, &b),
    })
}

impl ChargeSet {
    pub fn new(fwd: &ForwardSolution, u: Vec<C64>, v: Vec<C64>, wc: C64, wbeta: C64, w0: C64) -> Self {
        let mut offset = C64::new(0.0, 0.0);
        for (&pk, &uk) in fwd.p.iter().zip(&u) {
            offset -= pk * ((wbeta - uk) / (w0 - uk)).ln();
        }
        for (&qk, &vk) in fwd.q.iter().zip(&v) {
            offset -= qk * ((wbeta - vk) / (wbeta - wc)).ln();
        }
        ChargeSet {
            p: fwd.p.clone(),
            q: fwd.q.clone(),
            u,
            v,
            log_re: fwd.log_re,
            log_alpha: fwd.log_alpha,
            dip_p: vec![],
            dip_q: vec![],
            eta: vec![],
            mu: vec![],
            wc,
            wbeta,
            w0,
            offset,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.log_alpha.exp()
    }

    /// Forward map in the single-valued log-difference form.
    pub fn eval_forward(&self, w: C64) -> Result<C64, MapError> {
        if w == self.wc {
            return Ok(C64::new(0.0, 0.0));
        }
        let mut s = self.offset;
        for (&pk, &uk) in self.p.iter().zip(&self.u) {
            let d = w - uk;
            if d.norm() == 0.0 {
                return Err(MapError::ChargePointHit(w));
            }
            s += pk * (d / (self.w0 - uk)).ln();
        }
        for (&qk, &vk) in self.q.iter().zip(&self.v) {
            let d = w - vk;
            if d.norm() == 0.0 {
                return Err(MapError::ChargePointHit(w));
            }
            s += qk * (d / (w - self.wc)).ln();
        }
        Ok((w - self.wc) / (self.wbeta - self.wc) * s.exp())
    }

    /// Backward map value (`order` 0) or its first/second ζ-derivative.
    pub fn cdsm_backward(&self, zeta: C64, order: u8) -> Result<C64, MapError> {
        let mut s = C64::new(0.0, 0.0);
        for (&c, &pole) in self.dip_p.iter().zip(&self.eta).chain(self.dip_q.iter().zip(&self.mu)) {
            let d = zeta - pole;
            if d.norm() == 0.0 {
                return Err(MapError::ChargePointHit(zeta));
            }
            let r = d.inv();
            s += match order {
                0 => c * r,
                1 => -c * r * r,
                _ => 2.0 * c * r * r * r,
            };
        }
        Ok(s)
    }

    /// Value and first two derivatives in one pass.
    pub fn cdsm_all(&self, zeta: C64) -> Result<(C64, C64, C64), MapError> {
        let (mut w, mut w1, mut w2) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for (&c, &pole) in self.dip_p.iter().zip(&self.eta).chain(self.dip_q.iter().zip(&self.mu)) {
            let d = zeta - pole;
            if d.norm() == 0.0 {
                return Err(MapError::ChargePointHit(zeta));
            }
            let r = d.inv();
            let cr = c * r;
            w += cr;
            w1 -= cr * r;
            w2 += 2.0 * cr * r * r;
        }
        Ok((w, w1, w2))
    }
}

/// Settings for building one stage's map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapSettings {
    pub zc: C64,
    pub beta: f64,
    pub wc: Option<C64>,
    pub w0_factor: f64,
    pub n_exterior: usize,
    pub csm_ext: f64,
    pub csm_int: f64,
    pub cdsm_ext: f64,
    pub cdsm_int: f64,
}

impl Default for MapSettings {
    fn default() -> Self {
        MapSettings {
            zc: C64::new(-2.5, -7.5),
            beta: 5.0,
            wc: None,
            w0_factor: 0.9,
            n_exterior: 300,
            csm_ext: 2.2,
            csm_int: 1.5,
            cdsm_ext: 2.2,
            cdsm_int: 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapDiagnostics {
    pub csm_condition: f64,
    pub csm_residual: f64,
    pub cdsm_condition: f64,
    pub cdsm_residual: f64,
    /// max ||ζ| − 1| over outer collocations and ||ζ| − α| over cavity collocations.
    pub exterior_deviation: f64,
    pub interior_deviation: f64,
}

#[derive(Debug, Clone)]
pub struct BidirectionalMap {
    pub mobius: MobiusMap,
    pub charges: ChargeSet,
    pub alpha: f64,
    pub t1: C64,
    pub t2: C64,
    pub epsilon: f64,
    pub diagnostics: MapDiagnostics,
}

fn point_in_polygon(p: C64, poly: &[C64]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.im > p.im) != (b.im > p.im) {
            let x = a.re + (p.im - a.im) / (b.im - a.im) * (b.re - a.re);
            if p.re < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Fits the forward charges on the collocations `w_ext` (counterclockwise, outer)
/// and `w_int` (clockwise, hole), then the backward dipoles on their images.
pub fn fit_charges(w_ext: &[C64], w_int: &[C64], wc: C64, wbeta: C64, w0: C64, s: &MapSettings) -> Result<(ChargeSet, MapDiagnostics), MapError> {
    let u = place_charges(w_ext, s.csm_ext)?;
    let v = place_charges(w_int, s.csm_int)?;
    let fwd = solve_forward_map(w_ext, w_int, &u, &v, wc, wbeta)?;
    let mut charges = ChargeSet::new(&fwd, u, v, wc, wbeta, w0);
    let alpha = charges.alpha();

    let z_ext: Vec<C64> = w_ext.par_iter().map(|&w| charges.eval_forward(w)).collect::<Result<_, _>>()?;
    let z_int: Vec<C64> = w_int.par_iter().map(|&w| charges.eval_forward(w)).collect::<Result<_, _>>()?;
    let exterior_deviation = z_ext.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
    let interior_deviation = z_int.iter().map(|z| (z.norm() - alpha).abs()).fold(0.0, f64::max);
    let eta = place_charges(&z_ext, s.cdsm_ext)?;
    let mu = place_charges(&z_int, s.cdsm_int)?;
    let back = solve_backward_map(&z_ext, &z_int, w_ext, w_int, &eta, &mu)?;
    charges.dip_p = back.p;
    charges.dip_q = back.q;
    charges.eta = eta;
    charges.mu = mu;
    let diagnostics = MapDiagnostics {
        csm_condition: fwd.condition,
        csm_residual: fwd.residual,
        cdsm_condition: back.condition,
        cdsm_residual: back.residual,
        exterior_deviation,
        interior_deviation,
    };
    Ok((charges, diagnostics))
}

impl BidirectionalMap {
    pub fn build(boundary: &StageBoundary, x0: f64, s: &MapSettings) -> Result<Self, MapError> {
        let mobius = MobiusMap::new(s.zc, s.beta)?;
        let zf = collocation_points(boundary)?;
        if !point_in_polygon(s.zc, &zf) {
            return Err(MapError::ReferenceOutside(s.zc));
        }
        let w_int: Vec<C64> = zf.iter().rev().map(|&z| mobius.forward(z)).collect::<Result<_, _>>()?;
        let w_ext = circle_points(C64::new(0.0, 0.0), s.beta, s.n_exterior);
        check_spacing(&w_int)?;
        check_spacing(&w_ext)?;
        let wc = s.wc.unwrap_or(C64::new(0.0, 0.0));
        if !point_in_polygon(wc, &w_int) {
            return Err(MapError::ReferenceOutside(wc));
        }
        let wbeta = C64::new(s.beta, 0.0);
        let w0 = C64::new(s.w0_factor * s.beta, 0.0);
        let (charges, diagnostics) = fit_charges(&w_ext, &w_int, wc, wbeta, w0, s)?;
        let mut map = BidirectionalMap {
            mobius,
            alpha: charges.alpha(),
            charges,
            t1: C64::new(1.0, 0.0),
            t2: C64::new(1.0, 0.0),
            epsilon: 0.0,
            diagnostics,
        };
        map.set_ground_split(x0)?;
        map.epsilon = map.map_accuracy(&boundary.collocation_midpoints())?;
        Ok(map)
    }

    /// Images of the joints (∓x0, 0). Nothing else in the map depends on x0.
    pub fn set_ground_split(&mut self, x0: f64) -> Result<(), MapError> {
        let t1 = self.zeta_of(C64::new(-x0, 0.0))?;
        let t2 = self.zeta_of(C64::new(x0, 0.0))?;
        let (t1, t2) = (t1 / t1.norm(), t2 / t2.norm());
        if (t1 - t2).norm() < 1e-14 {
            return Err(MapError::CoincidentJoints);
        }
        self.t1 = t1;
        self.t2 = t2;
        Ok(())
    }

    /// Physical point and its first two ζ-derivatives.
    pub fn z_of(&self, zeta: C64) -> Result<(C64, C64, C64), MapError> {
        let (w, w1, w2) = self.charges.cdsm_all(zeta)?;
        let z = self.mobius.backward(w)?;
        let (d1, d2) = self.mobius.derivatives(w);
        Ok((z, d1 * w1, d2 * w1 * w1 + d1 * w2))
    }

    pub fn zeta_of(&self, z: C64) -> Result<C64, MapError> {
        self.charges.eval_forward(self.mobius.forward(z)?)
    }

    /// Round-trip error: forward-map each point, project radially onto |ζ| = α,
    /// map back, and take the largest physical displacement.
    pub fn map_accuracy(&self, points: &[C64]) -> Result<f64, MapError> {
        let errs: Vec<f64> = points
            .par_iter()
            .map(|&z| {
                let zeta = self.zeta_of(z)?;
                let proj = C64::from_polar(self.alpha, zeta.arg());
                Ok((self.z_of(proj)?.0 - z).norm())
            })
            .collect::<Result<_, MapError>>()?;
        Ok(errs.into_iter().fold(0.0, f64::max))
    }

    /// Largest |ζ(z(ζ)) − ζ| and smallest |z′| over an n×n grid of cell centres
    /// in α < ρ < 1 (cell centres keep the grid off ζ = 1 and the joints).
    pub fn roundtrip_probe(&self, n: usize) -> Result<(f64, f64), MapError> {
        let rows: Vec<(f64, f64)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let rho = self.alpha + (1.0 - self.alpha) * (i as f64 + 0.5) / n as f64;
                let mut worst: f64 = 0.0;
                let mut min_dz = f64::INFINITY;
                for j in 0..n {
                    let zeta = C64::from_polar(rho, 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n as f64);
                    let (z, dz, _) = self.z_of(zeta)?;
                    min_dz = min_dz.min(dz.norm());
                    worst = worst.max((self.zeta_of(z)? - zeta).norm());
                }
                Ok((worst, min_dz))
            })
            .collect::<Result<_, MapError>>()?;
        Ok(rows.iter().fold((0.0, f64::INFINITY), |a, b| (a.0.max(b.0), a.1.min(b.1))))
    }

    /// Samples `(z, z', z'')` on the circle of radius `rho` at θ_i = 2πi/n.
    pub fn ring(&self, rho: f64, n: usize) -> Result<Vec<(C64, C64, C64)>, MapError> {
        (0..n)
            .into_par_iter()
            .map(|i| self.z_of(C64::from_polar(rho, 2.0 * std::f64::consts::PI * i as f64 / n as f64)))
            .collect()
    }
}
