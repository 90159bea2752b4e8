//! Stress and displacement anywhere in the remaining ground.
//!
//! Series are evaluated ring by ring: for a radius ρ the Laurent coefficients of
//! the traction bracket, of φ′ and of the displacement are assembled once
//! ([`RingSeries`]) and then summed directly at any polar angle. Only the band
//! of coefficients enforced by the truncated equations is used, and the Lanczos
//! factors multiply each whole coefficient.
//!
//! "Mises" follows the usual tunnelling convention of the absolute hoop stress
//! on a traction-free wall, not the 3-D von Mises invariant.

use crate::conformal::{BidirectionalMap, MapError};
use crate::geometry::Material;
use crate::rh_solver::{coeff, fft_coefficients, SeriesSolution};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

/// Joint exclusion half-width on the unit circle (rad).
pub const JOINT_EXCLUSION: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("evaluation at θ = {theta} is within {JOINT_EXCLUSION} rad of a joint image")]
    JointSingularity { theta: f64 },
    #[error("radius {0} outside [α, 1]")]
    RadiusOutOfRange(f64),
    #[error("expansion of (z − z̄)/conj z′ has not decayed (tail {0:.3e})")]
    DecayFailure(f64),
    #[error("z′ vanishes at ζ = {0}")]
    ConformalitySingularity(C64),
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Incremental,
    Initial,
    Total,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub z: C64,
    pub rho: f64,
    pub theta: f64,
    /// z′(ζ) at the sample, needed for the curvilinear/rectangular rotation.
    pub dz: C64,
    pub sigma_rho: f64,
    pub sigma_theta: f64,
    pub tau_rhotheta: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub tau_xy: f64,
    pub u: f64,
    pub v: f64,
    pub kind: FieldKind,
}

/// (z′/conj z′)·σ², the unit factor rotating rectangular into curvilinear components.
fn rotation(dz: C64, theta: f64) -> C64 {
    dz / dz.conj() * C64::from_polar(1.0, 2.0 * theta)
}

impl FieldSample {
    /// Fills the rectangular components from the curvilinear ones.
    pub fn to_rectangular(mut self) -> Result<Self, FieldError> {
        if self.dz.norm() == 0.0 {
            return Err(FieldError::ConformalitySingularity(C64::from_polar(self.rho, self.theta)));
        }
        let s = self.sigma_rho + self.sigma_theta;
        let t = C64::new(self.sigma_theta - self.sigma_rho, 2.0 * self.tau_rhotheta) / rotation(self.dz, self.theta);
        self.sigma_y = 0.5 * (s + t.re);
        self.sigma_x = 0.5 * (s - t.re);
        self.tau_xy = 0.5 * t.im;
        Ok(self)
    }

    /// Fills the curvilinear components from the rectangular ones.
    pub fn to_curvilinear(mut self) -> Result<Self, FieldError> {
        if self.dz.norm() == 0.0 {
            return Err(FieldError::ConformalitySingularity(C64::from_polar(self.rho, self.theta)));
        }
        let s = self.sigma_x + self.sigma_y;
        let t = C64::new(self.sigma_y - self.sigma_x, 2.0 * self.tau_xy) * rotation(self.dz, self.theta);
        self.sigma_theta = 0.5 * (s + t.re);
        self.sigma_rho = 0.5 * (s - t.re);
        self.tau_rhotheta = 0.5 * t.im;
        Ok(self)
    }
}

/// Fourier coefficients of (z − z̄)/conj z′ on one circle.
#[derive(Debug, Clone)]
pub struct RadialExpansion {
    pub rho: f64,
    /// Index l mod sample count.
    pub g: Vec<C64>,
    pub tail: f64,
}

impl RadialExpansion {
    pub fn g_l(&self, l: i64) -> C64 {
        coeff(&self.g, l)
    }
}

fn check_rho(map: &BidirectionalMap, rho: f64) -> Result<(), FieldError> {
    if !(rho >= map.alpha * (1.0 - 1e-12) && rho <= 1.0 + 1e-12) {
        return Err(FieldError::RadiusOutOfRange(rho));
    }
    Ok(())
}

fn ring_d(map: &BidirectionalMap, rho: f64, n: usize) -> Result<Vec<C64>, FieldError> {
    Ok(map.ring(rho, n)?.iter().map(|&(z, zp, _)| (z - z.conj()) / zp.conj()).collect())
}

/// On ρ = 1 the sampled function vanishes identically away from ζ = 1, where z
/// runs off to infinity; the coefficients are returned as exact zeros there.
pub fn g_coeffs(map: &BidirectionalMap, rho: f64, sample_count: usize) -> Result<RadialExpansion, FieldError> {
    check_rho(map, rho)?;
    if (rho - 1.0).abs() <= 1e-12 {
        return Ok(RadialExpansion { rho, g: vec![C64::new(0.0, 0.0); sample_count], tail: 0.0 });
    }
    let g = fft_coefficients(&ring_d(map, rho, sample_count)?);
    let max = g.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let h = sample_count / 2;
    let tail = if max == 0.0 { 0.0 } else { g[h - 1].norm().max(g[h].norm()).max(g[h + 1].norm()) / max };
    Ok(RadialExpansion { rho, g, tail })
}

/// Coefficients of the three series on one ring, ready for direct summation.
#[derive(Debug, Clone)]
pub struct RingSeries {
    pub rho: f64,
    /// Traction bracket, k = −M..=M−1 (index k + M).
    pub traction: Vec<C64>,
    /// φ′(ζ) band A_k ρ^k, k = −M..=M−1 (index k + M).
    pub phi: Vec<C64>,
    /// 2G(u + iv), k = −M+1..=M (index k + M − 1).
    pub disp: Vec<C64>,
    m: i64,
}

impl RingSeries {
    fn sum(coeffs: &[C64], k0: i64, theta: f64) -> C64 {
        let step = C64::from_polar(1.0, theta);
        let mut p = C64::from_polar(1.0, k0 as f64 * theta);
        let mut s = C64::new(0.0, 0.0);
        for (i, &c) in coeffs.iter().enumerate() {
            // refresh the power every 64 terms to keep rounding from accumulating
            if i % 64 == 0 {
                p = C64::from_polar(1.0, (k0 + i as i64) as f64 * theta);
            }
            s += c * p;
            p *= step;
        }
        s
    }

    /// ∫ bracket·σ dθ over [a, b], integrated term by term. On ρ = 1 this is the
    /// resultant force (X + iY) carried by the arc, since the outward normal is
    /// σz′/|z′| and ds = |z′| dθ.
    pub fn traction_integral(&self, a: f64, b: f64) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for (i, &c) in self.traction.iter().enumerate() {
            let j = (i as i64 - self.m + 1) as f64;
            s += if j == 0.0 {
                c * (b - a)
            } else {
                c * (C64::from_polar(1.0, j * b) - C64::from_polar(1.0, j * a)) / C64::new(0.0, j)
            };
        }
        s * self.rho
    }

    /// (traction bracket, φ′ band, displacement sum) at angle θ.
    pub fn eval(&self, theta: f64) -> (C64, C64, C64) {
        (
            Self::sum(&self.traction, -self.m, theta),
            Self::sum(&self.phi, -self.m, theta),
            Self::sum(&self.disp, -self.m + 1, theta),
        )
    }
}

/// Field evaluation for one solved stage.
#[derive(Debug, Clone, Copy)]
pub struct FieldEvaluator<'a> {
    pub map: &'a BidirectionalMap,
    pub sol: &'a SeriesSolution,
    pub mat: &'a Material,
    pub sample_count: usize,
    pub lanczos: bool,
}

impl<'a> FieldEvaluator<'a> {
    pub fn new(map: &'a BidirectionalMap, sol: &'a SeriesSolution, mat: &'a Material, sample_count: usize, lanczos: bool) -> Self {
        FieldEvaluator { map, sol, mat, sample_count, lanczos }
    }

    fn filter(&self, k: i64) -> f64 {
        if self.lanczos {
            self.sol.lanczos_k(k)
        } else {
            1.0
        }
    }

    pub fn ring_series(&self, rho: f64) -> Result<RingSeries, FieldError> {
        check_rho(self.map, rho)?;
        let sol = self.sol;
        let m = sol.m as i64;
        let n = self.sample_count;
        let kappa = sol.kappa;
        let a = sol.a_scaled(rho);
        let b = sol.b_scaled(rho);
        let idx = |k: i64| (k + m + 1) as usize;
        let on_surface = (rho - 1.0).abs() <= 1e-12;
        let p: Vec<C64> = if on_surface {
            vec![C64::new(0.0, 0.0); n]
        } else {
            let d = ring_d(self.map, rho, n)?;
            let mut spec = vec![C64::new(0.0, 0.0); n];
            for j in -m - 1..=m + 1 {
                spec[j.rem_euclid(n as i64) as usize] += a[idx(j)];
            }
            let phi = crate::rh_solver::fft_synthesis(&spec);
            let prod: Vec<C64> = d.iter().zip(&phi).map(|(d, f)| d * f.conj()).collect();
            fft_coefficients(&prod)
        };
        let pk = |k: i64| coeff(&p, k);
        let mut traction = Vec::with_capacity(2 * m as usize);
        let mut phi = Vec::with_capacity(2 * m as usize);
        for k in -m..m {
            let l = self.filter(k);
            traction.push(l * (a[idx(k)] - b[idx(k)] / (rho * rho) + (k + 1) as f64 * pk(k + 1) / rho));
            phi.push(l * a[idx(k)]);
        }
        // constant fixing zero displacement at ζ = 1 (the point at infinity)
        let a1 = sol.a_scaled(1.0);
        let b1 = sol.b_scaled(1.0);
        let mut c0 = C64::new(0.0, 0.0);
        for k in (-m + 1)..=m {
            if k != 0 {
                c0 -= self.filter(k - 1) * (kappa * a1[idx(k - 1)] + b1[idx(k - 1)]) / k as f64;
            }
        }
        let mut disp = Vec::with_capacity(2 * m as usize);
        for k in (-m + 1)..=m {
            if k == 0 {
                disp.push(c0 + (kappa * a[idx(-1)] - b[idx(-1)]) * rho.ln() - pk(0));
            } else {
                let l = self.filter(k - 1);
                disp.push(l * ((kappa * a[idx(k - 1)] * rho + b[idx(k - 1)] / rho) / k as f64 - pk(k)));
            }
        }
        Ok(RingSeries { rho, traction, phi, disp, m })
    }

    /// Whether θ on the unit circle falls inside a joint exclusion zone.
    pub fn near_joint(&self, theta: f64) -> bool {
        [self.map.t1, self.map.t2].iter().any(|t| {
            let d = (theta - t.arg()).rem_euclid(2.0 * PI);
            d.min(2.0 * PI - d) < JOINT_EXCLUSION
        })
    }

    fn check_joint(&self, rho: f64, theta: f64) -> Result<(), FieldError> {
        if (rho - 1.0).abs() <= 1e-9 && self.near_joint(theta) {
            return Err(FieldError::JointSingularity { theta });
        }
        Ok(())
    }

    fn incremental_from(&self, rs: &RingSeries, theta: f64) -> Result<FieldSample, FieldError> {
        self.check_joint(rs.rho, theta)?;
        let zeta = C64::from_polar(rs.rho, theta);
        let (z, dz, _) = self.map.z_of(zeta)?;
        if dz.norm() == 0.0 {
            return Err(FieldError::ConformalitySingularity(zeta));
        }
        let (tr, ph, di) = rs.eval(theta);
        let srt = tr / dz;
        let trace = 4.0 * (ph / dz).re;
        let disp = di / (2.0 * self.mat.shear_modulus());
        FieldSample {
            z,
            rho: rs.rho,
            theta,
            dz,
            sigma_rho: srt.re,
            sigma_theta: trace - srt.re,
            tau_rhotheta: srt.im,
            sigma_x: 0.0,
            sigma_y: 0.0,
            tau_xy: 0.0,
            u: disp.re,
            v: disp.im,
            kind: FieldKind::Incremental,
        }
        .to_rectangular()
    }

    fn initial_from(&self, z: C64, dz: C64, rho: f64, theta: f64) -> FieldSample {
        // ρ = 1 is the ground surface. The mapped point carries the map error
        // times |z′|, which grows without bound towards ζ = 1, so use y = 0 there.
        let y = if (rho - 1.0).abs() <= 1e-12 { 0.0 } else { z.im.min(0.0) };
        let (sx, sy) = (self.mat.kx * self.mat.gamma * y, self.mat.gamma * y);
        FieldSample {
            z,
            rho,
            theta,
            dz,
            sigma_rho: 0.0,
            sigma_theta: 0.0,
            tau_rhotheta: 0.0,
            sigma_x: sx,
            sigma_y: sy,
            tau_xy: 0.0,
            u: 0.0,
            v: 0.0,
            kind: FieldKind::Initial,
        }
    }

    pub fn incremental_at(&self, rho: f64, thetas: &[f64]) -> Result<Vec<FieldSample>, FieldError> {
        let rs = self.ring_series(rho)?;
        thetas.par_iter().map(|&t| self.incremental_from(&rs, t)).collect()
    }

    /// Initial stress carried into curvilinear components through the rotation factor.
    pub fn initial_curvilinear_at(&self, rho: f64, theta: f64) -> Result<FieldSample, FieldError> {
        check_rho(self.map, rho)?;
        let zeta = C64::from_polar(rho, theta);
        let (z, dz, _) = self.map.z_of(zeta)?;
        if dz.norm() == 0.0 {
            return Err(FieldError::ConformalitySingularity(zeta));
        }
        let s = self.initial_from(z, dz, rho, theta);
        let s0 = s.sigma_x + s.sigma_y;
        let t0 = (s.sigma_y - s.sigma_x) * rotation(dz, theta);
        Ok(FieldSample { sigma_theta: 0.5 * (s0 + t0.re), sigma_rho: 0.5 * (s0 - t0.re), tau_rhotheta: 0.5 * t0.im, ..s })
    }

    fn total_from(&self, rs: &RingSeries, theta: f64) -> Result<FieldSample, FieldError> {
        let inc = self.incremental_from(rs, theta)?;
        let ini = self.initial_curvilinear_at(rs.rho, theta)?;
        FieldSample {
            sigma_rho: inc.sigma_rho + ini.sigma_rho,
            sigma_theta: inc.sigma_theta + ini.sigma_theta,
            tau_rhotheta: inc.tau_rhotheta + ini.tau_rhotheta,
            kind: FieldKind::Total,
            ..inc
        }
        .to_rectangular()
    }

    /// Initial plus incremental stress; displacement is the incremental one.
    pub fn total_at(&self, rho: f64, thetas: &[f64]) -> Result<Vec<FieldSample>, FieldError> {
        let rs = self.ring_series(rho)?;
        thetas.par_iter().map(|&t| self.total_from(&rs, t)).collect()
    }

    /// Total field along the cavity wall at θ_i = 2πi/n.
    pub fn cavity_profile(&self, n: usize) -> Result<Vec<FieldSample>, FieldError> {
        let thetas: Vec<f64> = (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect();
        self.total_at(self.map.alpha, &thetas)
    }

    /// Total stress and incremental displacement at ground-surface abscissae.
    pub fn ground_profile(&self, xs: &[f64]) -> Result<Vec<FieldSample>, FieldError> {
        let rs = self.ring_series(1.0)?;
        xs.par_iter()
            .map(|&x| {
                let theta = self.map.zeta_of(C64::new(x, 0.0))?.arg();
                // report the requested abscissa, not its round trip through the map
                Ok(FieldSample { z: C64::new(x, 0.0), ..self.total_from(&rs, theta)? })
            })
            .collect()
    }
}

/// Summary maxima of a cavity profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSummary {
    pub mises_max: f64,
    pub mises_max_at: C64,
    pub residual_max: f64,
    pub displacement_max: f64,
}

pub fn summarize(profile: &[FieldSample]) -> ProfileSummary {
    let mut s = ProfileSummary { mises_max: 0.0, mises_max_at: C64::new(0.0, 0.0), residual_max: 0.0, displacement_max: 0.0 };
    for p in profile {
        if p.sigma_theta.abs() > s.mises_max {
            s.mises_max = p.sigma_theta.abs();
            s.mises_max_at = p.z;
        }
        s.residual_max = s.residual_max.max(p.sigma_rho.hypot(p.tau_rhotheta));
        s.displacement_max = s.displacement_max.max(p.u.hypot(p.v));
    }
    s
}
