//! Plot-ready files. Numbers are written with 17 significant digits in
//! scientific notation and LF line endings, so identical runs give identical bytes.

use crate::conformal::{BidirectionalMap, MapError};
use crate::fields::{FieldError, FieldEvaluator, FieldSample};
use crate::pipeline::StageRun;
use crate::C64;
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

fn num(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        // writing to a String cannot fail
        let _ = write!(out, "{v:.17e}");
    }
    out.push('\n');
}

pub const CAVITY_HEADER: &str = "theta,x,y,mises_kpa,sigma_rho_kpa,tau_rhotheta_kpa,u_m,v_m";
pub const GROUND_HEADER: &str = "x,sigma_x_kpa,sigma_y_kpa,tau_xy_kpa,u_m,v_m";

pub fn cavity_csv(samples: &[FieldSample]) -> String {
    let mut out = format!("{CAVITY_HEADER}\n");
    for s in samples {
        num(&mut out, &[s.theta, s.z.re, s.z.im, s.sigma_theta.abs(), s.sigma_rho, s.tau_rhotheta, s.u, s.v]);
    }
    out
}

pub fn ground_csv(samples: &[FieldSample]) -> String {
    let mut out = format!("{GROUND_HEADER}\n");
    for s in samples {
        num(&mut out, &[s.z.re, s.sigma_x, s.sigma_y, s.tau_xy, s.u, s.v]);
    }
    out
}

/// Evenly spaced surface points on [−extent·x0, extent·x0], minus any that
/// fall inside a joint exclusion zone.
pub fn ground_samples(ev: &FieldEvaluator, x0: f64, extent: f64, n: usize) -> Result<Vec<FieldSample>, FieldError> {
    let xs: Vec<f64> = (0..n)
        .map(|i| if n == 1 { 0.0 } else { extent * x0 * (2.0 * i as f64 / (n - 1) as f64 - 1.0) })
        .collect();
    let mut keep = Vec::with_capacity(n);
    for x in xs {
        if !ev.near_joint(ev.map.zeta_of(C64::new(x, 0.0))?.arg()) {
            keep.push(x);
        }
    }
    ev.ground_profile(&keep)
}

#[derive(Serialize)]
struct Coefficients {
    stage: usize,
    m: usize,
    alpha: f64,
    kappa: f64,
    sample_count: usize,
    lanczos: bool,
    /// f_n, n = −M..=M
    f: Vec<[f64; 2]>,
    /// A_k, B_k, k = −M−1..=M+1
    a: Vec<[f64; 2]>,
    b: Vec<[f64; 2]>,
    /// I_k, k = −M..=M
    i: Vec<[f64; 2]>,
    t1: [f64; 2],
    t2: [f64; 2],
    iterations: usize,
    lsq_residual: f64,
}

fn pair(v: &C64) -> [f64; 2] {
    [v.re, v.im]
}

pub fn coefficients_json(run: &StageRun) -> String {
    let sol = &run.solution;
    let m = sol.m as i64;
    let c = Coefficients {
        stage: run.stage(),
        m: sol.m,
        alpha: sol.alpha,
        kappa: sol.kappa,
        sample_count: run.fourier.sample_count,
        lanczos: run.lanczos,
        f: sol.f().iter().map(pair).collect(),
        a: sol.a.iter().map(pair).collect(),
        b: sol.b.iter().map(pair).collect(),
        i: (-m..=m).map(|k| pair(&run.fourier.i_k(k))).collect(),
        t1: pair(&run.map.t1),
        t2: pair(&run.map.t2),
        iterations: sol.iterations,
        lsq_residual: sol.lsq_residual,
    };
    serde_json::to_string_pretty(&c).expect("coefficients serialise") + "\n"
}

/// Images of ρ- and θ-lines of the annulus in the physical plane. ρ-lines stop
/// short of 1 and θ-lines skip θ = 0, both of which run off to infinity.
pub fn grid_csv(map: &BidirectionalMap, rho_lines: usize, theta_lines: usize, samples: usize) -> Result<String, MapError> {
    let mut out = String::from("family,line,rho,theta,x,y\n");
    let a = map.alpha;
    for i in 0..rho_lines {
        let rho = a + (1.0 - a) * i as f64 / rho_lines as f64;
        for j in 0..samples {
            let theta = 2.0 * PI * (j as f64 + 0.5) / samples as f64;
            let z = map.z_of(C64::from_polar(rho, theta))?.0;
            let _ = write!(out, "rho,{i},");
            num(&mut out, &[rho, theta, z.re, z.im]);
        }
    }
    for i in 0..theta_lines {
        let theta = 2.0 * PI * (i as f64 + 0.5) / theta_lines as f64;
        for j in 0..samples {
            let rho = a + (1.0 - a) * j as f64 / samples as f64;
            let z = map.z_of(C64::from_polar(rho, theta))?.0;
            let _ = write!(out, "theta,{i},");
            num(&mut out, &[rho, theta, z.re, z.im]);
        }
    }
    Ok(out)
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

pub fn stage_dir(out: &Path, stage: usize) -> PathBuf {
    out.join(format!("stage{stage}"))
}
