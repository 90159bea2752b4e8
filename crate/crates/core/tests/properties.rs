//! Property tests over randomised inputs for the cheap building blocks.

use proptest::prelude::*;
use seqtunnel::config::RunConfig;
use seqtunnel::conformal::MobiusMap;
use seqtunnel::fields::{FieldKind, FieldSample};
use seqtunnel::geometry::{fillet_corners, region_area, DensitySpec, Material, Segment, StageBoundary};
use seqtunnel::rh_solver::{fft_coefficients, fft_synthesis, lambda, lanczos_factors, BranchData};
use seqtunnel::C64;
use std::f64::consts::PI;

fn rectangle(cx: f64, cy: f64, w: f64, h: f64) -> Vec<Segment> {
    let p = [
        C64::new(cx - w / 2.0, cy - h / 2.0),
        C64::new(cx + w / 2.0, cy - h / 2.0),
        C64::new(cx + w / 2.0, cy + h / 2.0),
        C64::new(cx - w / 2.0, cy + h / 2.0),
    ];
    (0..4).map(|i| Segment::line(p[i], p[(i + 1) % 4])).collect()
}

fn curvilinear(sr: f64, st: f64, t: f64, dz: C64, theta: f64) -> FieldSample {
    FieldSample {
        z: C64::new(0.0, -3.0),
        rho: 0.6,
        theta,
        dz,
        sigma_rho: sr,
        sigma_theta: st,
        tau_rhotheta: t,
        sigma_x: 0.0,
        sigma_y: 0.0,
        tau_xy: 0.0,
        u: 0.0,
        v: 0.0,
        kind: FieldKind::Total,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn filleted_rectangle_area_and_perimeter(
        cx in -5.0f64..5.0, w in 1.0f64..8.0, h in 1.0f64..8.0, frac in 0.05f64..0.45, depth in 1.0f64..20.0,
    ) {
        let r = frac * w.min(h);
        let cy = -depth - h / 2.0;
        let segs = fillet_corners(&rectangle(cx, cy, w, h), &[r; 4]).unwrap();
        let b = StageBoundary::new(1, segs, &DensitySpec::default()).unwrap();
        let n = b.segments.len();
        for i in 0..n {
            prop_assert!((b.segments[i].end() - b.segments[(i + 1) % n].start()).norm() < 1e-12);
        }
        let area = w * h - (4.0 - PI) * r * r;
        prop_assert!((region_area(&b) - area).abs() < 1e-10 * area);
        let perimeter = 2.0 * (w + h) - 8.0 * r + 2.0 * PI * r;
        prop_assert!((b.perimeter() - perimeter).abs() < 1e-10 * perimeter);
        prop_assert!(!b.is_concave());
    }

    #[test]
    fn clockwise_input_is_stored_counterclockwise(w in 1.0f64..6.0, h in 1.0f64..6.0) {
        let ccw = rectangle(0.0, -10.0, w, h);
        let cw: Vec<Segment> = ccw.iter().rev().map(Segment::reversed).collect();
        let r = 0.2;
        let b = StageBoundary::new(1, fillet_corners(&cw, &[r; 4]).unwrap(), &DensitySpec::default()).unwrap();
        let area = w * h - (4.0 - PI) * r * r;
        prop_assert!((region_area(&b) - area).abs() < 1e-10 * area);
    }

    #[test]
    fn rotation_round_trip_and_trace(
        sr in -2e3f64..2e3, st in -2e3f64..2e3, t in -2e3f64..2e3,
        dzr in 0.1f64..20.0, dza in -PI..PI, theta in -PI..PI,
    ) {
        let s = curvilinear(sr, st, t, C64::from_polar(dzr, dza), theta).to_rectangular().unwrap();
        let scale = sr.abs().max(st.abs()).max(t.abs()).max(1.0);
        prop_assert!((s.sigma_x + s.sigma_y - (sr + st)).abs() <= 1e-10 * scale);
        let back = FieldSample { sigma_rho: 0.0, sigma_theta: 0.0, tau_rhotheta: 0.0, ..s }.to_curvilinear().unwrap();
        prop_assert!((back.sigma_rho - sr).abs() <= 1e-10 * scale);
        prop_assert!((back.sigma_theta - st).abs() <= 1e-10 * scale);
        prop_assert!((back.tau_rhotheta - t).abs() <= 1e-10 * scale);
    }

    #[test]
    fn fft_round_trip(values in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 64)) {
        let x: Vec<C64> = values.iter().map(|&(a, b)| C64::new(a, b)).collect();
        let y = fft_synthesis(&fft_coefficients(&x));
        for (a, b) in x.iter().zip(&y) {
            prop_assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn mobius_round_trip(x in -50.0f64..50.0, y in -50.0f64..-0.01, beta in 1.0f64..10.0, cy in -20.0f64..-1.0) {
        let m = MobiusMap::new(C64::new(0.3, cy), beta).unwrap();
        let z = C64::new(x, y);
        let w = m.forward(z).unwrap();
        prop_assert!(w.norm() < beta);
        prop_assert!((m.backward(w).unwrap() - z).norm() < 1e-9 * z.norm().max(1.0));
    }

    #[test]
    fn lanczos_factor_shape(m in 2usize..400) {
        let l = lanczos_factors(m);
        let mi = m as i64;
        let at = |k: i64| l[(k + mi + 1) as usize];
        prop_assert_eq!(at(0), 1.0);
        prop_assert_eq!(at(mi), 0.0);
        for k in 1..=mi {
            prop_assert_eq!(at(k), at(-k));
            prop_assert!((0.0..=1.0).contains(&at(k)));
            prop_assert!(at(k) <= at(k - 1));
        }
    }

    #[test]
    fn branch_series_matches_closed_form(a1 in -3.0f64..-0.2, a2 in 0.2f64..3.0, rho in 0.1f64..0.7, th in -PI..PI) {
        let b = BranchData::new(1.8, C64::from_polar(1.0, a1), C64::from_polar(1.0, a2), 400).unwrap();
        let z = C64::from_polar(rho, th);
        let d = b.direct_inside(z);
        prop_assert!((b.series_inside(z) - d).norm() <= 1e-8 * d.norm());
    }

    #[test]
    fn config_round_trips(gamma in 0.0f64..40.0, kx in 0.1f64..3.0, e in 1e3f64..1e6, nu in 0.01f64..0.49, x0 in 8.0f64..1e4, m in 10usize..400) {
        let mut cfg = RunConfig::benchmark();
        cfg.material.gamma = gamma;
        cfg.material.kx = kx;
        cfg.material.e = e;
        cfg.material.nu = nu;
        cfg.ground.x0 = x0;
        cfg.solver.m = m;
        let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn material_constants(e in 1.0f64..1e6, nu in 0.001f64..0.499) {
        let mat = Material::new(20.0, 0.8, e, nu).unwrap();
        prop_assert!((mat.kappa() - (3.0 - 4.0 * nu)).abs() < 1e-15);
        prop_assert!((mat.shear_modulus() - e / (2.0 * (1.0 + nu))).abs() <= 1e-12 * e);
        prop_assert!((lambda(mat.kappa()) - mat.kappa().ln() / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn material_rejects_out_of_range(nu in prop_oneof![-1.0f64..=0.0, 0.5f64..2.0]) {
        prop_assert!(Material::new(20.0, 0.8, 2e4, nu).is_err());
    }
}
