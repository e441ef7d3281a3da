//! Direct integration of the lattice and comparison with the multiscale solution.

use std::sync::Arc;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::coeff::{CoeffElement, CoeffField, FieldExt, ModelParams};
use crate::diffpoly::{DiffPolynomial, FieldKind, FieldSymbol, Grading};
use crate::error::{Error, Result};
use crate::hierarchy::HierarchyContext;
use crate::linsolve::rref;
use crate::reduction::run_reduction;

/// Largest `|lambda dt|` on the imaginary axis for which the four-stage scheme is stable.
pub const RK4_IMAGINARY_BOUND: f64 = 2.8;

/// Sites `f_n` on a closed window with `f_{n+M} = e^{i twist} f_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeState {
    pub values: Vec<Complex64>,
    pub h: f64,
    pub time: f64,
    pub twist: f64,
}

impl LatticeState {
    pub fn constant(len: usize, h: f64) -> Self {
        LatticeState { values: vec![Complex64::new(1.0, 0.0); len], h, time: 0.0, twist: 0.0 }
    }
}

/// `Lab` integrates the lattice as written; `CoRotating` integrates `f_n e^{i sigma t}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Frame {
    Lab,
    CoRotating,
}

fn rhs_into(v: &[Complex64], h: f64, twist: f64, s: u8, sigma: f64, frame: Frame, out: &mut [Complex64]) {
    let m = v.len();
    let wrap = Complex64::from_polar(1.0, twist);
    let inv = 1.0 / (2.0 * h * h);
    let shed = if frame == Frame::CoRotating { sigma } else { 0.0 };
    for n in 0..m {
        let prev = if n == 0 { v[m - 1] / wrap } else { v[n - 1] };
        let next = if n + 1 == m { v[0] * wrap } else { v[n + 1] };
        let f = v[n];
        let a = f.norm_sqr();
        let lap = (next - 2.0 * f + prev) * (1.0 - s as f64 * sigma * h * h * a) * inv;
        out[n] = -Complex64::i() * ((sigma * a - shed) * f - lap);
    }
}

/// `d f_n / dt` from `i f' + (f_{n+1} - 2 f_n + f_{n-1})(1 - s sigma h^2 |f_n|^2)/(2h^2) = sigma |f_n|^2 f_n`.
pub fn rhs(state: &LatticeState, s: u8, sigma: i8) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); state.values.len()];
    rhs_into(&state.values, state.h, state.twist, s, sigma as f64, Frame::Lab, &mut out);
    out
}

/// Classical four-stage Runge-Kutta with fixed step.
pub fn integrate(state: &LatticeState, dt: f64, steps: usize, s: u8, sigma: i8, frame: Frame) -> Result<LatticeState> {
    let sig = sigma as f64;
    let peak = state.values.iter().map(|f| f.norm_sqr()).fold(0.0, f64::max);
    let stiff = dt * (2.0 / (state.h * state.h) + 3.0 * peak);
    if stiff.is_nan() || stiff >= RK4_IMAGINARY_BOUND {
        return Err(Error::Stability(format!("dt (2/h^2 + 3 max|f|^2) = {stiff:.3} exceeds {RK4_IMAGINARY_BOUND}")));
    }
    let m = state.values.len();
    let mut y = state.values.clone();
    let zero = Complex64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![zero; m], vec![zero; m], vec![zero; m], vec![zero; m], vec![zero; m]);
    let (h, tw) = (state.h, state.twist);
    for step in 0..steps {
        rhs_into(&y, h, tw, s, sig, frame, &mut k1);
        for n in 0..m {
            tmp[n] = y[n] + 0.5 * dt * k1[n];
        }
        rhs_into(&tmp, h, tw, s, sig, frame, &mut k2);
        for n in 0..m {
            tmp[n] = y[n] + 0.5 * dt * k2[n];
        }
        rhs_into(&tmp, h, tw, s, sig, frame, &mut k3);
        for n in 0..m {
            tmp[n] = y[n] + dt * k3[n];
        }
        rhs_into(&tmp, h, tw, s, sig, frame, &mut k4);
        for n in 0..m {
            y[n] += dt / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);
        }
        if step % 64 == 0 || step + 1 == steps {
            if let Some(n) = y.iter().position(|f| !f.re.is_finite() || !f.im.is_finite() || f.norm_sqr() > 1e12) {
                return Err(Error::Stability(format!("site {n} blew up at t = {}", state.time + (step + 1) as f64 * dt)));
            }
        }
    }
    Ok(LatticeState { values: y, h, time: state.time + steps as f64 * dt, twist: tw })
}

/// Conserved norm: `sum |f_n|^2` for `s = 0`, `-(1/(sigma h^2)) sum ln(1 - sigma h^2 |f_n|^2)` for `s = 1`.
pub fn conserved_norm(state: &LatticeState, s: u8, sigma: i8) -> f64 {
    let k = sigma as f64 * state.h * state.h;
    match s {
        0 => state.values.iter().map(|f| f.norm_sqr()).sum(),
        _ => -state.values.iter().map(|f| (1.0 - k * f.norm_sqr()).ln()).sum::<f64>() / k,
    }
}

/// Polynomial in `T = tanh(B xi)`; `d/dxi T = B (1 - T^2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TanhPoly {
    pub coeffs: Vec<CoeffElement>,
}

impl TanhPoly {
    fn trim(mut self) -> Self {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        self
    }

    /// `a (1 - T^2)`.
    pub fn sech2(a: &CoeffElement) -> Self {
        TanhPoly { coeffs: vec![a.clone(), a.field().zero(), -a] }.trim()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn d_xi(&self, width: &CoeffElement, field: &Arc<CoeffField>) -> Self {
        let mut out = vec![field.zero(); self.coeffs.len() + 1];
        for (k, a) in self.coeffs.iter().enumerate().skip(1) {
            let t = &(a * width) * &field.int(k as i64);
            out[k - 1] = &out[k - 1] + &t;
            out[k + 1] = &out[k + 1] - &t;
        }
        TanhPoly { coeffs: out }.trim()
    }

    pub fn mul(&self, other: &Self, field: &Arc<CoeffField>) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return TanhPoly { coeffs: vec![] };
        }
        let mut out = vec![field.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        TanhPoly { coeffs: out }.trim()
    }

    fn add_scaled(&mut self, other: &Self, k: &CoeffElement, field: &Arc<CoeffField>) {
        if self.coeffs.len() < other.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), field.zero());
        }
        for (i, b) in other.coeffs.iter().enumerate() {
            self.coeffs[i] = &self.coeffs[i] + &(b * k);
        }
    }

    fn to_f64(&self, h: f64) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64(h, 1)).collect()
    }
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * t + a)
}

/// `u = amplitude sech^2(width (x - speed t2))` solving `u_t2 = flow[u]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Soliton {
    pub width: CoeffElement,
    pub amplitude: CoeffElement,
    pub speed: CoeffElement,
}

/// `sum_monomials coeff * prod D^l(u)` for `u = amplitude * units[l]` split by factor count.
fn flow_on_ansatz(flow: &DiffPolynomial, units: &[TanhPoly], field: &Arc<CoeffField>) -> Result<Vec<TanhPoly>> {
    let mut by_count: Vec<TanhPoly> = Vec::new();
    for (m, c) in flow.terms() {
        let mut prod = TanhPoly { coeffs: vec![field.one()] };
        let mut count = 0;
        for (f, p) in m.factors() {
            if f.symbol != FieldSymbol::varphi(1) {
                return Err(Error::Unsupported(format!("soliton ansatz for a flow in {}", f.symbol)));
            }
            for _ in 0..*p {
                prod = prod.mul(&units[f.order as usize], field);
                count += 1;
            }
        }
        if by_count.len() <= count {
            by_count.resize(count + 1, TanhPoly { coeffs: vec![] });
        }
        by_count[count].add_scaled(&prod, c, field);
    }
    Ok(by_count)
}

fn units(width: &CoeffElement, top: usize, field: &Arc<CoeffField>) -> Vec<TanhPoly> {
    let mut out = vec![TanhPoly::sech2(&field.one())];
    for l in 1..=top {
        let next = out[l - 1].d_xi(width, field);
        out.push(next);
    }
    out
}

/// Residual `-speed u' - flow[u]` of the travelling-wave ansatz.
pub fn soliton_residual(flow: &DiffPolynomial, sol: &Soliton) -> Result<TanhPoly> {
    let field = sol.width.field().clone();
    let u = units(&sol.width, 8, &field);
    let parts = flow_on_ansatz(flow, &u, &field)?;
    let mut r = TanhPoly { coeffs: vec![] };
    r.add_scaled(&u[1], &-&(&sol.speed * &sol.amplitude), &field);
    let mut ak = field.one();
    for p in &parts {
        r.add_scaled(p, &-&ak, &field);
        ak = &ak * &sol.amplitude;
    }
    Ok(r.trim())
}

/// Solve for amplitude and speed of a sech^2 wave of the quadratic density flow `flow`.
pub fn solve_soliton(flow: &DiffPolynomial, width: &CoeffElement) -> Result<Soliton> {
    let field = width.field().clone();
    let u = units(width, 8, &field);
    let parts = flow_on_ansatz(flow, &u, &field)?;
    if parts.len() != 3 || parts[0].coeffs.iter().any(|c| !c.is_zero()) {
        return Err(Error::Unsupported("soliton ansatz needs a flow with linear and quadratic parts only".into()));
    }
    // -V u1 - L - A Q = 0 after dividing by A
    let len = [u[1].coeffs.len(), parts[1].coeffs.len(), parts[2].coeffs.len()].into_iter().max().unwrap_or(0);
    let at = |p: &TanhPoly, k: usize| p.coeffs.get(k).cloned().unwrap_or_else(|| field.zero());
    let rows: Vec<Vec<CoeffElement>> = (0..len).map(|k| vec![-at(&u[1], k), -at(&parts[2], k), -at(&parts[1], k)]).collect();
    let (sol, pivots) = rref(rows, &[0, 1, 2])?;
    if pivots != [0, 1] {
        return Err(Error::InconsistentSystem(format!("sech^2 ansatz: pivots {pivots:?}")));
    }
    let speed = -&sol[0][2];
    let amplitude = -&sol[1][2];
    if amplitude.is_zero() {
        return Err(Error::InconsistentSystem("sech^2 ansatz has only the trivial amplitude".into()));
    }
    Ok(Soliton { width: width.clone(), amplitude, speed })
}

/// Multiscale data at a numeric lattice step.
#[derive(Clone, Debug)]
pub struct MultiscaleModel {
    pub params: ModelParams,
    pub h: BigRational,
    /// Characteristic speed `v` (in `kappa` per unit `t1`).
    pub v: f64,
    pub soliton: Soliton,
    /// Density corrections `nu_j` with `phi2 = 0`.
    pub nu: Vec<DiffPolynomial>,
    phi_units: Vec<Vec<f64>>,
}

/// Initial-data parameters of [`MultiscaleModel::profile`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiscaleProfile {
    pub epsilon: f64,
    /// Soliton centre in `kappa`.
    pub center: f64,
    /// 1: `eps phi1`, `eps^2 nu1`; 2: adds `eps^4 nu2`.
    pub truncation: u8,
}

impl MultiscaleModel {
    pub fn new(params: ModelParams, h: BigRational, width: BigRational) -> Result<Self> {
        let report = run_reduction(params, 7)?;
        let field = report.field.clone();
        let d = report.dispersion.as_ref().ok_or_else(|| Error::Invariant("no dispersion relation".into()))?;
        let hf = h.to_f64().unwrap_or(f64::NAN);
        let c = d.speed.eval_numeric(&h, 1)?;
        let ctx = HierarchyContext::new(report.alphas[&1].clone(), report.alphas[&2].clone(), Grading::Kdv)?;
        let flow = ctx.build_flow(2)?.polynomial;
        let b = field.element(crate::ratfunc::RatFunc::from_rational(width), crate::ratfunc::RatFunc::zero());
        let soliton = solve_soliton(&flow, &b)?;
        let mut nu = Vec::new();
        for j in 1..=2u8 {
            let p = report.nu_solutions.get(&j).ok_or_else(|| Error::Invariant(format!("nu{j} missing")))?;
            let kept = p.filter(|m, _| !m.contains_symbol(|s| s.index >= 2 && !s.is_timed()));
            if let Some(f) = kept.factors().into_iter().find(|f| f.symbol != FieldSymbol::phi(1)) {
                return Err(Error::Invariant(format!("nu{j} depends on {} after setting phi2 = 0", f.symbol)));
            }
            nu.push(kept);
        }
        let u = units(&soliton.width, 10, &field);
        let mut phi_units = vec![vec![0.0, (&soliton.amplitude * &soliton.width.inv()?).to_f64(hf, 1)]];
        for p in &u {
            phi_units.push(p.to_f64(hf).iter().map(|x| x * soliton.amplitude.to_f64(hf, 1)).collect());
        }
        Ok(MultiscaleModel { params, h, v: c.value, soliton, nu, phi_units })
    }

    pub fn h_f64(&self) -> f64 {
        self.h.to_f64().unwrap_or(f64::NAN)
    }

    fn coeff(&self, c: &CoeffElement) -> f64 {
        c.to_f64(self.h_f64(), 1)
    }

    /// Soliton speed in `kappa` per unit `t2`.
    pub fn kdv_speed(&self) -> f64 {
        self.coeff(&self.soliton.speed)
    }

    /// `phi1 -> +-(amplitude/width)` far from the centre.
    pub fn phase_step(&self) -> f64 {
        2.0 * self.phi_units[0][1]
    }

    /// `d^l phi1` at `T = tanh(B xi)`.
    pub fn phi1_derivative(&self, order: u8, t: f64) -> f64 {
        horner(&self.phi_units[order as usize], t)
    }

    /// Window length in sites holding `|xi| <= halfwidth / B`.
    pub fn window_sites(&self, epsilon: f64, halfwidth: f64) -> usize {
        let b = self.coeff(&self.soliton.width);
        (2.0 * halfwidth / (b * epsilon * self.h_f64())).ceil() as usize
    }

    /// Multiscale state at lattice time `t`, in the co-rotating frame.
    pub fn profile(&self, p: &MultiscaleProfile, window: usize, t: f64) -> LatticeState {
        let (h, eps) = (self.h_f64(), p.epsilon);
        if eps == 0.0 {
            return LatticeState { time: t, ..LatticeState::constant(window, h) };
        }
        let b = self.coeff(&self.soliton.width);
        let len = eps * h * window as f64;
        let twist = eps * self.phase_step();
        let shift = p.center + self.v * eps * t + self.kdv_speed() * eps.powi(3) * t;
        let values = (0..window)
            .map(|n| {
                let xi = eps * h * n as f64 - shift;
                let m = (xi / len + 0.5).floor();
                let tt = (b * (xi - m * len)).tanh();
                let fv = |f: crate::diffpoly::Factor| {
                    debug_assert_eq!(f.symbol.kind, FieldKind::Potential);
                    self.phi1_derivative(f.order, tt)
                };
                let mut big_n = eps * eps * self.nu[0].eval_f64(&fv, &|c| self.coeff(c));
                if p.truncation >= 2 {
                    big_n += eps.powi(4) * self.nu[1].eval_f64(&fv, &|c| self.coeff(c));
                }
                let phase = eps * self.phi1_derivative(0, tt) + m * twist;
                Complex64::from_polar((1.0 + big_n).sqrt(), phase)
            })
            .collect();
        LatticeState { values, h, time: t, twist }
    }

    /// Initial data `sqrt(nu_n) exp(i phi_n)` at `t = 0`.
    pub fn build_profile(&self, p: &MultiscaleProfile, window: usize) -> LatticeState {
        self.profile(p, window, 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingRow {
    pub eps: f64,
    pub sup_error: f64,
    /// Relative drift of [`conserved_norm`].
    pub norm_drift: f64,
    pub sites: usize,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingResult {
    pub s: u8,
    pub h: f64,
    pub rows: Vec<ScalingRow>,
    pub slope: f64,
}

#[derive(Clone, Debug)]
pub struct ScalingConfig {
    pub s: u8,
    pub h: BigRational,
    pub eps: Vec<f64>,
    /// Slow-time horizon in `t2`.
    pub t2: f64,
    pub dt: f64,
    pub width: BigRational,
    pub halfwidth: f64,
    pub truncation: u8,
}

impl ScalingConfig {
    pub fn new(s: u8, h: BigRational, eps: Vec<f64>) -> Self {
        ScalingConfig { s, h, eps, t2: 0.5, dt: 0.05, width: BigRational::from_integer(1.into()), halfwidth: 15.0, truncation: 1 }
    }
}

/// `min_theta max_n |a_n - e^{i theta} b_n|`, with `theta` the least-squares phase.
///
/// The potentials are fixed only up to additive constants, so the comparison is
/// made modulo a constant phase.
pub fn phase_aligned_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let overlap: Complex64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
    let rot = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { Complex64::new(1.0, 0.0) };
    a.iter().zip(b).map(|(x, y)| (x - rot * y).norm()).fold(0.0, f64::max)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Integrate from the multiscale profile to `t = t2 / eps^3` and record the sup-norm
/// distance to the multiscale prediction for each `eps`.
pub fn error_scaling(cfg: &ScalingConfig) -> Result<ScalingResult> {
    if cfg.eps.len() < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: cfg.eps.len() });
    }
    if let Some(e) = cfg.eps.iter().find(|e| !(**e > 0.0 && **e <= 0.3)) {
        return Err(Error::Unsupported(format!("epsilon {e} outside (0, 0.3]")));
    }
    let model = MultiscaleModel::new(ModelParams::new(cfg.s), cfg.h.clone(), cfg.width.clone())?;
    let run = |eps: f64| -> Result<ScalingRow> {
        let sites = model.window_sites(eps, cfg.halfwidth);
        let p = MultiscaleProfile { epsilon: eps, center: eps * model.h_f64() * sites as f64 / 2.0, truncation: cfg.truncation };
        let start = model.build_profile(&p, sites);
        let t_end = cfg.t2 / eps.powi(3);
        let steps = (t_end / cfg.dt).ceil() as usize;
        let dt = t_end / steps as f64;
        let end = integrate(&start, dt, steps, cfg.s, 1, Frame::CoRotating)?;
        let want = model.profile(&p, sites, end.time);
        let sup_error = phase_aligned_distance(&end.values, &want.values);
        let n0 = conserved_norm(&start, cfg.s, 1);
        let norm_drift = ((conserved_norm(&end, cfg.s, 1) - n0) / n0).abs();
        Ok(ScalingRow { eps, sup_error, norm_drift, sites, steps })
    };
    let rows = std::thread::scope(|scope| {
        let handles: Vec<_> = cfg.eps.iter().map(|&e| scope.spawn(move || run(e))).collect();
        handles.into_iter().map(|h| h.join().expect("scaling worker panicked")).collect::<Result<Vec<_>>>()
    })?;
    let x: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.sup_error).collect();
    Ok(ScalingResult { s: cfg.s, h: model.h_f64(), slope: fit_slope(&x, &y), rows })
}
