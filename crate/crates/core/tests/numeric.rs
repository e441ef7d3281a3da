mod common;

use num_complex::Complex64;
use num_rational::BigRational;

use common::{alpha1, alpha2, field};
use multiscale::coeff::{FieldExt, ModelParams};
use multiscale::diffpoly::Grading;
use multiscale::hierarchy::HierarchyContext;
use multiscale::numeric::*;
use multiscale::Error;

fn half() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

fn bumpy(len: usize, h: f64) -> LatticeState {
    let values = (0..len)
        .map(|n| {
            let x = n as f64 / len as f64 * std::f64::consts::TAU;
            Complex64::from_polar(1.0 + 0.3 * (2.0 * x).cos(), 0.4 * (3.0 * x).sin() + 0.2 * (7.0 * x).cos())
        })
        .collect();
    LatticeState { values, h, time: 0.0, twist: 0.0 }
}

#[test]
fn equilibrium_derivative() {
    let st = LatticeState::constant(8, 0.5);
    for v in rhs(&st, 1, 1) {
        assert!((v - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }
    let zero = LatticeState { values: vec![Complex64::new(0.0, 0.0); 5], ..st };
    assert!(rhs(&zero, 0, 1).iter().all(|v| v.norm() == 0.0));
}

#[test]
fn single_site_laplacian_factor() {
    let h = 0.5;
    let mut st = LatticeState::constant(3, h);
    st.values = vec![Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0)];
    let r0 = rhs(&st, 0, 1);
    let r1 = rhs(&st, 1, 1);
    // centre site: i f' = sigma |f|^2 f - lap (1 - s sigma h^2 |f|^2) / (2h^2)
    let lap = -2.0 * 0.5 / (2.0 * h * h);
    let nl = 0.25 * 0.5;
    assert!((r0[1] - Complex64::new(0.0, -(nl - lap))).norm() < 1e-15);
    let scaled = lap * (1.0 - h * h * 0.25);
    assert!((r1[1] - Complex64::new(0.0, -(nl - scaled))).norm() < 1e-15);
    // empty sites see only the neighbour, where |f| = 0
    assert!((r0[0] - r1[0]).norm() < 1e-15);
}

#[test]
fn equilibrium_orbit() {
    let (dt, t) = (1e-3, 1.0);
    for s in [0, 1] {
        let st = integrate(&LatticeState::constant(16, 0.5), dt, 1000, s, 1, Frame::Lab).unwrap();
        let exact = Complex64::from_polar(1.0, -t);
        let err = st.values.iter().map(|f| (f - exact).norm()).fold(0.0, f64::max);
        assert!(err < 10.0 * dt.powi(4) * t, "s={s}: {err}");
        assert!((st.time - t).abs() < 1e-12);
    }
}

#[test]
fn norm_drift_is_fourth_order() {
    for s in [0, 1] {
        let st = bumpy(48, 0.5);
        let n0 = conserved_norm(&st, s, 1);
        let drift = |dt: f64| {
            let steps = (1.0 / dt).round() as usize;
            let end = integrate(&st, dt, steps, s, 1, Frame::Lab).unwrap();
            (conserved_norm(&end, s, 1) - n0).abs()
        };
        let (a, b) = (drift(0.1), drift(0.05));
        assert!(a > 1e-12, "s={s}: drift {a} too small to measure");
        assert!(a / b >= 8.0, "s={s}: ratio {}", a / b);
    }
}

#[test]
fn step_halving_on_soliton_run() {
    let model = MultiscaleModel::new(ModelParams::new(1), half(), BigRational::from_integer(1.into())).unwrap();
    let p = MultiscaleProfile { epsilon: 0.3, center: 0.0, truncation: 1 };
    let sites = model.window_sites(0.3, 15.0);
    let st = model.build_profile(&p, sites);
    let run = |dt: f64, steps| integrate(&st, dt, steps, 1, 1, Frame::CoRotating).unwrap();
    let fine = run(0.0125, 160);
    let e1 = phase_aligned_distance(&run(0.1, 20).values, &fine.values);
    let e2 = phase_aligned_distance(&run(0.05, 40).values, &fine.values);
    let ratio = e1 / e2;
    assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
}

#[test]
fn instability_is_reported() {
    let st = LatticeState::constant(8, 0.1);
    assert!(matches!(integrate(&st, 0.1, 10, 0, 1, Frame::Lab), Err(Error::Stability(_))));
}

#[test]
fn soliton_is_solved_symbolically() {
    for s in [0, 1] {
        let f = field(s);
        let ctx = HierarchyContext::new(alpha1(&f), alpha2(&f), Grading::Kdv).unwrap();
        let flow = ctx.build_flow(2).unwrap().polynomial;
        let b = f.rational(2, 3);
        let sol = solve_soliton(&flow, &b).unwrap();
        assert!(soliton_residual(&flow, &sol).unwrap().is_zero());
        // u'' = 4B^2 u - 6 B^2 u^2 / A against -V u = alpha1 u'' + alpha2 u^2
        let b2 = &b * &b;
        assert_eq!(sol.speed, -(&(&f.int(4) * &alpha1(&f)) * &b2));
        assert_eq!(sol.amplitude, &(&(&f.int(6) * &alpha1(&f)) * &b2) * &alpha2(&f).inv().unwrap());
        let wrong = Soliton { speed: &sol.speed + &f.one(), ..sol.clone() };
        assert!(!soliton_residual(&flow, &wrong).unwrap().is_zero());
    }
}

#[test]
fn profile_baseline_and_amplitude() {
    let model = MultiscaleModel::new(ModelParams::new(1), half(), BigRational::from_integer(1.into())).unwrap();
    let flat = model.build_profile(&MultiscaleProfile { epsilon: 0.0, center: 0.0, truncation: 2 }, 10);
    assert!(flat.values.iter().all(|f| (f - Complex64::new(1.0, 0.0)).norm() < 1e-15));

    let eps = 0.05;
    let sites = model.window_sites(eps, 15.0);
    let center = eps * 0.5 * (sites / 2) as f64;
    let st = model.build_profile(&MultiscaleProfile { epsilon: eps, center, truncation: 1 }, sites);
    let nu_c = st.values[sites / 2].norm_sqr() - 1.0;
    // nu1 = -sigma d/dt1 phi1 = sigma c d phi1, with d phi1 = A at the centre
    let c = (1.0f64 - 0.25).sqrt();
    let expected = eps * eps * c * model.phi1_derivative(1, 0.0);
    assert!((nu_c - expected).abs() < 1e-12, "{nu_c} vs {expected}");
    let edge = (st.values[0].norm_sqr() - 1.0).abs();
    assert!(edge < 1e-12 * nu_c.abs());
}

#[test]
fn twisted_window_is_smooth() {
    let model = MultiscaleModel::new(ModelParams::new(0), half(), BigRational::from_integer(1.into())).unwrap();
    let eps = 0.2;
    let sites = model.window_sites(eps, 15.0);
    let center = eps * 0.5 * sites as f64 / 2.0 + 0.3;
    let st = model.build_profile(&MultiscaleProfile { epsilon: eps, center, truncation: 1 }, sites);
    let wrap = Complex64::from_polar(1.0, st.twist);
    let jump = (st.values[0] * wrap - st.values[sites - 1]).norm();
    let step = (st.values[1] - st.values[0]).norm();
    assert!(jump < 1e-9 && step < 1e-9, "{jump} {step}");
}

#[test]
fn error_scaling_needs_three_points() {
    let cfg = ScalingConfig::new(1, half(), vec![0.2, 0.1]);
    assert!(matches!(error_scaling(&cfg), Err(Error::InsufficientSamples { needed: 3, got: 2 })));
    let cfg = ScalingConfig::new(1, half(), vec![0.5, 0.2, 0.1]);
    assert!(error_scaling(&cfg).is_err());
}

#[test]
fn slope_fit() {
    let x = [0.2, 0.1, 0.05];
    let y: Vec<f64> = x.iter().map(|e: &f64| 3.0 * e.powi(3)).collect();
    assert!((fit_slope(&x, &y) - 3.0).abs() < 1e-12);
}

#[test]
fn short_horizon_scaling() {
    let mut cfg = ScalingConfig::new(1, half(), vec![0.3, 0.2, 0.1]);
    cfg.t2 = 0.05;
    let r = error_scaling(&cfg).unwrap();
    assert!(r.rows.windows(2).all(|w| w[1].sup_error < w[0].sup_error));
    assert!(r.slope >= 1.7, "{r:?}");
}
