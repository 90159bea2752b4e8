//! Series solution of the mixed ground-surface problem.
//!
//! The branch function `X(ζ) = α₀(1 − ζ/t₁)^a (1 − ζ/t₂)^ā`, `a = −½ − iλ`,
//! carries the jump `−1/κ` across the fixed arc of the unit circle. The stress
//! potential is `X(ζ)·Σ f_n ζⁿ`; its Laurent coefficients inside (`A_k`) and
//! outside (`B_k`) the unit circle enter the cavity traction condition, which is
//! solved for `f_n` with the `D·conj(φ')` coupling term lagged one iterate.
//!
//! Unknowns are stored scaled, `g_n = f_n α^{−|n|}`, and rows are scaled by
//! `α^{−k}`; every matrix entry is then a branch coefficient times a power of α
//! no larger than one.

use crate::conformal::{BidirectionalMap, MapError};
use crate::geometry::Material;
use crate::linalg::Lu;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("branch coefficients overflow at k = {0}; use a shorter tail")]
    Overflow(usize),
    #[error("joint images do not bracket the fixed arc (arg t1 = {0}, arg t2 = {1})")]
    JointOrder(f64, f64),
    #[error("boundary expansion has not decayed: tail {tail:.3e} at sample_count {n}")]
    DecayFailure { tail: f64, n: usize },
    #[error("sample_count {0} must be a power of two ≥ 4M+4")]
    SampleCount(usize),
    #[error("no convergence after {iterations} sweeps (last change {last_change:.3e})")]
    NonConvergence { iterations: usize, last_change: f64, history: Vec<f64> },
    #[error("coefficient system is singular")]
    SingularSystem,
    #[error("invalid truncation M = {0}")]
    Truncation(usize),
    #[error(transparent)]
    Map(#[from] MapError),
}

pub fn lambda(kappa: f64) -> f64 {
    kappa.ln() / (2.0 * PI)
}

/// Taylor (inside) and Laurent (outside) coefficients of the branch function.
#[derive(Debug, Clone)]
pub struct BranchData {
    pub lambda: f64,
    pub t1: C64,
    pub t2: C64,
    /// Unwrapped joint angles with θ₁ ≤ 0 ≤ θ₂; the fixed arc is (θ₁, θ₂).
    pub theta1: f64,
    pub theta2: f64,
    pub c: Vec<C64>,
    pub alpha: Vec<C64>,
    pub beta: Vec<C64>,
}

impl BranchData {
    pub fn new(kappa: f64, t1: C64, t2: C64, tail: usize) -> Result<Self, SolveError> {
        let lam = lambda(kappa);
        let a = C64::new(-0.5, -lam);
        let mut theta1 = t1.arg();
        if theta1 > 0.0 {
            theta1 -= 2.0 * PI;
        }
        let mut theta2 = t2.arg();
        if theta2 < 0.0 {
            theta2 += 2.0 * PI;
        }
        if theta2 - theta1 >= 2.0 * PI {
            return Err(SolveError::JointOrder(t1.arg(), t2.arg()));
        }
        let mut c = vec![C64::new(1.0, 0.0); tail + 1];
        for k in 1..=tail {
            c[k] = c[k - 1] * (a - (k as f64 - 1.0)) / k as f64;
        }
        let alpha0 = -(a * C64::new(0.0, theta1) + a.conj() * C64::new(0.0, theta2)).exp();
        let powers = |base: C64, conj: bool| -> Vec<C64> {
            let mut p = C64::new(1.0, 0.0);
            (0..=tail)
                .map(|k| {
                    let v = if conj { c[k].conj() } else { c[k] } * p;
                    p *= base;
                    v
                })
                .collect()
        };
        let g1 = powers(-t1.inv(), false);
        let g2 = powers(-t2.inv(), true);
        let h1 = powers(-t1, false);
        let h2 = powers(-t2, true);
        let mut alpha = vec![C64::new(0.0, 0.0); tail + 1];
        let mut beta = vec![C64::new(0.0, 0.0); tail + 1];
        for k in 0..=tail {
            let mut s = C64::new(0.0, 0.0);
            let mut t = C64::new(0.0, 0.0);
            for l in 0..=k {
                s += g1[l] * g2[k - l];
                t += h1[l] * h2[k - l];
            }
            alpha[k] = alpha0 * s;
            if k < tail {
                beta[k + 1] = t;
            }
            if !(alpha[k].norm().is_finite() && t.norm().is_finite()) {
                return Err(SolveError::Overflow(k));
            }
        }
        Ok(BranchData { lambda: lam, t1, t2, theta1, theta2, c, alpha, beta })
    }

    fn exponent(&self) -> C64 {
        C64::new(-0.5, -self.lambda)
    }

    /// Closed form inside the unit disc.
    pub fn direct_inside(&self, zeta: C64) -> C64 {
        let a = self.exponent();
        self.alpha[0] * (1.0 - zeta / self.t1).powc(a) * (1.0 - zeta / self.t2).powc(a.conj())
    }

    /// Closed form outside the unit disc, normalised to ζ⁻¹ at infinity.
    pub fn direct_outside(&self, zeta: C64) -> C64 {
        let a = self.exponent();
        zeta.inv() * (1.0 - self.t1 / zeta).powc(a) * (1.0 - self.t2 / zeta).powc(a.conj())
    }

    pub fn series_inside(&self, zeta: C64) -> C64 {
        self.alpha.iter().rev().fold(C64::new(0.0, 0.0), |acc, &a| acc * zeta + a)
    }
}

/// Fourier data sampled on the cavity image |ζ| = α.
#[derive(Debug, Clone)]
pub struct BoundaryFourier {
    pub sample_count: usize,
    /// Coefficients of (z − z̄)/conj z′, index k mod N.
    pub d: Vec<C64>,
    /// Coefficients of the initial-traction integrand (γ factored out), index k mod N.
    pub h: Vec<C64>,
    pub gamma: f64,
    /// Largest |coefficient| near k = ±N/2 relative to the largest overall.
    pub tail_d: f64,
    pub tail_h: f64,
    /// Mean of |h(σ)|² over the samples, for the Parseval check.
    pub h_mean_square: f64,
}

pub fn fft_coefficients(samples: &[C64]) -> Vec<C64> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.iter().map(|c| c / n as f64).collect()
}

/// Σ c_k e^{ikθ_j} on the uniform grid θ_j = 2πj/n, for coefficients indexed k mod n.
pub fn fft_synthesis(coeffs: &[C64]) -> Vec<C64> {
    let mut buf = coeffs.to_vec();
    FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
    buf
}

pub fn coeff(arr: &[C64], k: i64) -> C64 {
    arr[k.rem_euclid(arr.len() as i64) as usize]
}

fn tail_ratio(c: &[C64]) -> f64 {
    let n = c.len();
    let max = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    let w = (n / 64).max(2);
    (n / 2 - w..n / 2 + w).map(|k| c[k].norm()).fold(0.0, f64::max) / max
}

impl BoundaryFourier {
    pub fn compute(map: &BidirectionalMap, mat: &Material, sample_count: usize) -> Result<Self, SolveError> {
        let n = sample_count;
        let ring = map.ring(map.alpha, n)?;
        let mut d = Vec::with_capacity(n);
        let mut h = Vec::with_capacity(n);
        for (i, &(z, zp, _)) in ring.iter().enumerate() {
            let sigma = C64::from_polar(1.0, 2.0 * PI * i as f64 / n as f64);
            d.push((z - z.conj()) / zp.conj());
            let dz = zp * C64::new(0.0, map.alpha) * sigma;
            h.push(z.im * C64::new(dz.re, mat.kx * dz.im) / (C64::new(0.0, 1.0) * sigma));
        }
        let h_mean_square = h.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
        let d = fft_coefficients(&d);
        let h = fft_coefficients(&h);
        Ok(BoundaryFourier { sample_count: n, tail_d: tail_ratio(&d), tail_h: tail_ratio(&h), d, h, gamma: mat.gamma, h_mean_square })
    }

    pub fn check_decay(&self, tol: f64) -> Result<(), SolveError> {
        let tail = self.tail_d.max(self.tail_h);
        if tail > tol {
            return Err(SolveError::DecayFailure { tail, n: self.sample_count });
        }
        Ok(())
    }

    pub fn d_k(&self, k: i64) -> C64 {
        coeff(&self.d, k)
    }

    pub fn h_k(&self, k: i64) -> C64 {
        coeff(&self.h, k)
    }

    /// Fourier coefficients of the prescribed cavity traction integral.
    pub fn i_k(&self, k: i64) -> C64 {
        if k == 0 {
            -self.gamma * self.h_k(-1)
        } else {
            -self.gamma * self.h_k(k - 1) / k as f64
        }
    }
}

/// Default sampling: smallest power of two ≥ max(1024, 8M).
pub fn default_sample_count(m: usize) -> usize {
    (8 * m).max(1024).next_power_of_two()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub m: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { m: 250, tol: 1e-12, max_iter: 200 }
    }
}

/// Lanczos σ-factors for k = −M−1..=M+1 (index k + M + 1); zero for |k| ≥ M.
pub fn lanczos_factors(m: usize) -> Vec<f64> {
    let mi = m as i64;
    (-mi - 1..=mi + 1)
        .map(|k| {
            if k == 0 {
                1.0
            } else if k.abs() >= mi {
                0.0
            } else {
                let x = k as f64 * PI / m as f64;
                x.sin() / x
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SeriesSolution {
    pub m: usize,
    pub alpha: f64,
    pub kappa: f64,
    /// Scaled unknowns g_n = f_n α^{−|n|}, n = −M..=M (index n + M).
    pub g: Vec<C64>,
    pub branch: BranchData,
    /// Raw A_k, B_k for k = −M−1..=M+1 (index k + M + 1).
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    pub lanczos: Vec<f64>,
    /// Displacement constant over the enforced band, unfiltered.
    pub c0: C64,
    pub i0: C64,
    pub iterations: usize,
    pub history: Vec<f64>,
    /// Residual of the one truncated equation left out of the square system,
    /// relative to the largest right-hand side.
    pub lsq_residual: f64,
    pub condition: f64,
}

impl SeriesSolution {
    fn mi(&self) -> i64 {
        self.m as i64
    }

    /// f_n, n = −M..=M. Entries for large |n| may underflow to zero.
    pub fn f(&self) -> Vec<C64> {
        let la = self.alpha.ln();
        let mi = self.mi();
        (-mi..=mi).map(|n| self.g[(n + mi) as usize] * (n.abs() as f64 * la).exp()).collect()
    }

    /// A_k ρ^k for k = −M−1..=M+1, evaluated without forming overflowing powers.
    pub fn a_scaled(&self, rho: f64) -> Vec<C64> {
        a_scaled(&self.g, &self.branch.alpha, self.m, self.alpha, rho)
    }

    /// B_k ρ^{−k} for k = −M−1..=M+1.
    pub fn b_scaled(&self, rho: f64) -> Vec<C64> {
        b_scaled(&self.g, &self.branch.beta, self.m, self.alpha, rho)
    }

    pub fn a_k(&self, k: i64) -> C64 {
        self.a[(k + self.mi() + 1) as usize]
    }

    pub fn b_k(&self, k: i64) -> C64 {
        self.b[(k + self.mi() + 1) as usize]
    }

    pub fn lanczos_k(&self, k: i64) -> f64 {
        let idx = k + self.mi() + 1;
        if idx < 0 || idx as usize >= self.lanczos.len() {
            0.0
        } else {
            self.lanczos[idx as usize]
        }
    }
}

fn a_scaled(g: &[C64], al: &[C64], m: usize, alpha: f64, rho: f64) -> Vec<C64> {
    let mi = m as i64;
    let (la, lr) = (alpha.ln(), rho.ln());
    (-mi - 1..=mi + 1)
        .map(|j| {
            let mut s = C64::new(0.0, 0.0);
            for n in -mi..=j.min(mi) {
                let e = n.abs() as f64 * la + j as f64 * lr;
                s += al[(j - n) as usize] * g[(n + mi) as usize] * e.exp();
            }
            s
        })
        .collect()
}

fn b_scaled(g: &[C64], be: &[C64], m: usize, alpha: f64, rho: f64) -> Vec<C64> {
    let mi = m as i64;
    let (la, lr) = (alpha.ln(), rho.ln());
    (-mi - 1..=mi + 1)
        .map(|j| {
            let mut s = C64::new(0.0, 0.0);
            for n in j.max(-mi)..=mi {
                let e = n.abs() as f64 * la - j as f64 * lr;
                s += be[(n - j) as usize] * g[(n + mi) as usize] * e.exp();
            }
            s
        })
        .collect()
}

/// Truncated convolutions A_j = Σ_{n ≤ j} α_{j−n} f_n and B_j = Σ_{n ≥ j} β_{n−j} f_n
/// for j = −M−1..=M+1, from unscaled f_n (n = −M..=M).
pub fn assemble_ab(f: &[C64], branch: &BranchData) -> (Vec<C64>, Vec<C64>) {
    let m = (f.len() - 1) / 2;
    let mi = m as i64;
    let a = (-mi - 1..=mi + 1)
        .map(|j| (-mi..=j.min(mi)).map(|n| branch.alpha[(j - n) as usize] * f[(n + mi) as usize]).sum())
        .collect();
    let b = (-mi - 1..=mi + 1)
        .map(|j| (j.max(-mi)..=mi).map(|n| branch.beta[(n - j) as usize] * f[(n + mi) as usize]).sum())
        .collect();
    (a, b)
}

/// Fourier coefficients of D(σ)·conj(φ′(ασ)) from sampled D and the A_k α^k set.
fn coupling_coefficients(d_samples: &[C64], a_alpha: &[C64], m: usize) -> Vec<C64> {
    let n = d_samples.len();
    let mi = m as i64;
    let mut spec = vec![C64::new(0.0, 0.0); n];
    for (i, j) in (-mi - 1..=mi + 1).enumerate() {
        spec[j.rem_euclid(n as i64) as usize] += a_alpha[i];
    }
    let phi = fft_synthesis(&spec);
    let prod: Vec<C64> = d_samples.iter().zip(&phi).map(|(d, p)| d * p.conj()).collect();
    fft_coefficients(&prod)
}

/// Solves for the series coefficients by lagged fixed-point iteration.
pub fn solve_coeffs(branch: &BranchData, bf: &BoundaryFourier, alpha: f64, kappa: f64, s: &SolverSettings) -> Result<SeriesSolution, SolveError> {
    let m = s.m;
    if m < 1 {
        return Err(SolveError::Truncation(m));
    }
    let n_s = bf.sample_count;
    if !n_s.is_power_of_two() || n_s < 4 * m + 4 {
        return Err(SolveError::SampleCount(n_s));
    }
    if branch.alpha.len() < 2 * m + 3 {
        return Err(SolveError::Truncation(m));
    }
    let mi = m as i64;
    let nu = 2 * m + 1;
    let la = alpha.ln();
    let pw = |e: f64| (e * la).exp();
    let col = |n: i64| (n + mi) as usize;
    let (al, be) = (&branch.alpha, &branch.beta);
    let mut mat = DMatrix::<C64>::zeros(nu, nu);
    let i0 = bf.i_k(0);
    let mut rhs0 = DVector::<C64>::zeros(nu);
    // row layout: 0 → A_{−1}; 1..M−1 → A rows k; M → B_{−1}; M+1..2M → B rows k
    for n in -mi..=-1 {
        mat[(0, col(n))] = al[(-1 - n) as usize] * pw(-n as f64);
    }
    rhs0[0] = i0 / (1.0 + kappa);
    for k in 1..mi {
        let r = k as usize;
        for n in -mi..=(-k - 1) {
            mat[(r, col(n))] += al[(-k - 1 - n) as usize] * pw((-n - k) as f64);
        }
        for n in (-k - 1)..=mi {
            mat[(r, col(n))] -= be[(n + k + 1) as usize] * pw((n.abs() + k) as f64);
        }
        rhs0[r] = -(k as f64) * bf.i_k(-k);
    }
    for n in -1..=mi {
        mat[(m, col(n))] = be[(n + 1) as usize] * pw(n.abs() as f64);
    }
    rhs0[m] = -kappa * i0 / (1.0 + kappa);
    for k in 1..=mi {
        let r = m + k as usize;
        for n in k..=mi {
            mat[(r, col(n))] += be[(n - k + 1) as usize] * pw((n.abs() - k) as f64);
        }
        for n in -mi..=(k - 1) {
            mat[(r, col(n))] -= al[(k - 1 - n) as usize] * pw((n.abs() + k) as f64);
        }
        rhs0[r] = -(k as f64) * bf.i_k(k);
    }
    let lu = Lu::new(mat).map_err(|_| SolveError::SingularSystem)?;
    let condition = lu.condition_estimate();

    // D sampled back from its coefficients keeps one source of truth for the ring data
    let d_samples = fft_synthesis(&bf.d);
    let coupling = |g: &[C64]| -> (DVector<C64>, Vec<C64>) {
        let a_alpha = a_scaled(g, al, m, alpha, alpha);
        let p = coupling_coefficients(&d_samples, &a_alpha, m);
        let mut c = DVector::<C64>::zeros(nu);
        for k in 1..mi {
            c[k as usize] = k as f64 * coeff(&p, -k);
        }
        for k in 1..=mi {
            c[m + k as usize] = k as f64 * coeff(&p, k);
        }
        (c, p)
    };

    let mut g: Vec<C64> = lu.solve(&rhs0).map_err(|_| SolveError::SingularSystem)?.iter().copied().collect();
    let weight: Vec<f64> = (-mi..=mi).map(|n| pw(2.0 * n.abs() as f64)).collect();
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = g.iter().all(|v| *v == C64::new(0.0, 0.0));
    while !converged && iterations < s.max_iter {
        iterations += 1;
        let (c, _) = coupling(&g);
        let next: Vec<C64> = lu.solve(&(&rhs0 + c)).map_err(|_| SolveError::SingularSystem)?.iter().copied().collect();
        // measured on f itself, not on the scaled unknowns
        let num: f64 = next.iter().zip(&g).zip(&weight).map(|((a, b), w)| (a - b).norm_sqr() * w).sum::<f64>().sqrt();
        let den: f64 = next.iter().zip(&weight).map(|(a, w)| a.norm_sqr() * w).sum::<f64>().sqrt();
        let change = if den == 0.0 { 0.0 } else { num / den };
        history.push(change);
        g = next;
        if !change.is_finite() || (history.len() > 5 && change > 1e3 * history[2].max(1e-300)) {
            return Err(SolveError::NonConvergence { iterations, last_change: change, history });
        }
        converged = change < s.tol;
    }
    if !converged {
        let last_change = history.last().copied().unwrap_or(f64::NAN);
        return Err(SolveError::NonConvergence { iterations, last_change, history });
    }

    // the A_{−M−1} row left out of the square system
    let (_, p) = coupling(&g);
    let a1 = a_scaled(&g, al, m, alpha, 1.0);
    let b1 = b_scaled(&g, be, m, alpha, 1.0);
    let a_al = a_scaled(&g, al, m, alpha, alpha);
    let b_al = b_scaled(&g, be, m, alpha, alpha);
    let idx = |k: i64| (k + mi + 1) as usize;
    // α^{−M} A_{−M−1} = α·(A_{−M−1} α^{−M−1}) and α^{M} B_{−M−1} = (B_{−M−1} α^{M+1})/α
    let lhs = alpha * a_al[idx(-mi - 1)] - b_al[idx(-mi - 1)] / alpha;
    let dropped = lhs + mi as f64 * bf.i_k(-mi) - mi as f64 * coeff(&p, -mi);
    let scale = rhs0.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let lsq_residual = if scale <= f64::MIN_POSITIVE { 0.0 } else { dropped.norm() / scale };

    let lanczos = lanczos_factors(m);
    let mut c0 = C64::new(0.0, 0.0);
    for k in (-mi + 1)..=mi {
        if k != 0 {
            c0 -= (kappa * a1[idx(k - 1)] + b1[idx(k - 1)]) / k as f64;
        }
    }
    Ok(SeriesSolution {
        m,
        alpha,
        kappa,
        g,
        branch: branch.clone(),
        a: a1,
        b: b1,
        lanczos,
        c0,
        i0,
        iterations,
        history,
        lsq_residual,
        condition,
    })
}
