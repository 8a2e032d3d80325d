//! Fixed-step integration: geodesics of chart connections, central-force
//! invariants, Schwarzian initial value problems and projective parameters.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::chart::ChartConnection;
use crate::error::{Error, Result};
use crate::tensor::{dot, eval2, eval3, DenseTensor};

pub const ODE_STEP: f64 = 1e-3;
/// Step of the fourth-order stencils used for Schwarzian derivatives.
pub const SCHWARZIAN_STEP: f64 = 2e-3;
/// Step of the stencils used along sampled curves.
pub const CURVE_STEP: f64 = 5e-3;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicState {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

/// States at every step; `stopped` holds the domain violation that ended the run early.
#[derive(Debug, Clone, PartialEq)]
pub struct Integration {
    pub states: Vec<GeodesicState>,
    pub stopped: Option<Error>,
}

fn steps_for(span: f64, step: f64) -> Result<(usize, f64)> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidParams("step must be positive".into()));
    }
    if !(span >= 0.0) || !span.is_finite() {
        return Err(Error::InvalidParams("integration span must be finite and nonnegative".into()));
    }
    let n = (span / step - 1e-9).ceil().max(0.0) as usize;
    Ok((n, if n == 0 { 0.0 } else { span / n as f64 }))
}

fn axpy(a: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(yi, xi)| yi + a * xi).collect()
}

/// Classical RK4 on `ẋ = v, v̇ = −Γ(x)(v, v)` over `[0, t_end]`.
///
/// Besides leaving the chart domain, a run stops once a single step would travel further than half the
/// distance to the family's singular locus; past that point fixed steps jump across the singularity.
pub fn integrate(chart: &ChartConnection, x0: &[f64], v0: &[f64], t_end: f64, step: f64) -> Result<Integration> {
    let n = chart.dim();
    if x0.len() != n || v0.len() != n {
        return Err(Error::ShapeMismatch(format!("initial data must have {n} components")));
    }
    if v0.iter().any(|c| !c.is_finite()) {
        return Err(Error::Validation("initial velocity is not finite".into()));
    }
    chart.check_domain(x0).map_err(|reason| Error::DomainViolation { reason, t: 0.0, x: x0.to_vec(), v: v0.to_vec() })?;
    let (count, h) = steps_for(t_end, step)?;
    let mut states = Vec::with_capacity(count + 1);
    states.push(GeodesicState { t: 0.0, x: x0.to_vec(), v: v0.to_vec() });
    for s in 1..=count {
        let last = states.last().expect("nonempty");
        let stop = |reason: String| Error::DomainViolation { reason, t: last.t, x: last.x.clone(), v: last.v.clone() };
        let acc = |x: &[f64], v: &[f64]| chart.acceleration(x, v);
        let stage = || -> Result<(Vec<f64>, Vec<f64>)> {
            let (x, v) = (&last.x, &last.v);
            let a1 = acc(x, v)?;
            let (x2, v2) = (axpy(h / 2.0, v, x), axpy(h / 2.0, &a1, v));
            let a2 = acc(&x2, &v2)?;
            let (x3, v3) = (axpy(h / 2.0, &v2, x), axpy(h / 2.0, &a2, v));
            let a3 = acc(&x3, &v3)?;
            let (x4, v4) = (axpy(h, &v3, x), axpy(h, &a3, v));
            let a4 = acc(&x4, &v4)?;
            let xn = (0..n).map(|i| x[i] + h / 6.0 * (v[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i])).collect();
            let vn = (0..n).map(|i| v[i] + h / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i])).collect();
            Ok((xn, vn))
        };
        let next = match stage() {
            Ok(p) => p,
            Err(Error::DomainViolation { reason, .. }) => {
                let err = stop(reason);
                return Ok(Integration { states, stopped: Some(err) });
            }
            Err(e) => return Err(e),
        };
        let resolved = |x: &[f64], v: &[f64]| match chart.singular_distance(x) {
            Some(d) => h * dot(v, v).sqrt() <= 0.5 * d,
            None => true,
        };
        if let Err(reason) = chart.check_domain(&next.0).and_then(|_| {
            if !next.1.iter().all(|c| c.is_finite()) {
                Err("velocity blew up".into())
            } else if !resolved(&last.x, &last.v) || !resolved(&next.0, &next.1) {
                Err("step no longer resolves the approach to the singular locus".into())
            } else {
                Ok(())
            }
        }) {
            let err = stop(reason);
            return Ok(Integration { states, stopped: Some(err) });
        }
        states.push(GeodesicState { t: s as f64 * h, x: next.0, v: next.1 });
    }
    Ok(Integration { states, stopped: None })
}

/// Like [`integrate`], but leaving the domain is an error carrying the last valid state.
pub fn geodesic_integrate(chart: &ChartConnection, x0: &[f64], v0: &[f64], t_end: f64, step: f64) -> Result<Vec<GeodesicState>> {
    let run = integrate(chart, x0, v0, t_end, step)?;
    match run.stopped {
        Some(e) => Err(e),
        None => Ok(run.states),
    }
}

/// `(c², E)` with `c² = |v|²|x|² − ⟨x,v⟩²` and `E = ½|v|² − c²|x|^{−m}/m`, `m` the ambient dimension.
pub fn central_invariants(state: &GeodesicState, ambient_dim: usize) -> Result<(f64, f64)> {
    if state.x.len() != ambient_dim || state.v.len() != ambient_dim {
        return Err(Error::ShapeMismatch(format!("state must have {ambient_dim} components")));
    }
    let r2 = dot(&state.x, &state.x);
    if r2 == 0.0 {
        return Err(Error::DomainViolation { reason: "x = 0".into(), t: state.t, x: state.x.clone(), v: state.v.clone() });
    }
    let v2 = dot(&state.v, &state.v);
    let xv = dot(&state.x, &state.v);
    let c_sq = v2 * r2 - xv * xv;
    let m = ambient_dim as f64;
    Ok((c_sq, 0.5 * v2 - c_sq * r2.powf(-m / 2.0) / m))
}

/// CSV trace with header `t,x1..xn,v1..vn,c_sq,energy,c_sq_drift,energy_drift`.
pub fn trace_csv(states: &[GeodesicState]) -> String {
    let n = states.first().map_or(0, |s| s.x.len());
    let mut out = String::from("t");
    for i in 1..=n {
        let _ = write!(out, ",x{i}");
    }
    for i in 1..=n {
        let _ = write!(out, ",v{i}");
    }
    out.push_str(",c_sq,energy,c_sq_drift,energy_drift\n");
    let inv = |s: &GeodesicState| central_invariants(s, n).unwrap_or((f64::NAN, f64::NAN));
    let (c0, e0) = states.first().map_or((0.0, 0.0), inv);
    for s in states {
        let (c, e) = inv(s);
        let row: Vec<f64> = std::iter::once(s.t).chain(s.x.iter().copied()).chain(s.v.iter().copied()).chain([c, e, c - c0, e - e0]).collect();
        let cells: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Largest drift of `c²` and `E` from their initial values.
pub fn max_drifts(states: &[GeodesicState]) -> Result<(f64, f64)> {
    let n = states.first().map_or(0, |s| s.x.len());
    let mut it = states.iter().map(|s| central_invariants(s, n));
    let Some(first) = it.next() else { return Ok((0.0, 0.0)) };
    let (c0, e0) = first?;
    let (mut dc, mut de) = (0.0f64, 0.0f64);
    for r in it {
        let (c, e) = r?;
        dc = dc.max((c - c0).abs());
        de = de.max((e - e0).abs());
    }
    Ok((dc, de))
}

/// `S(f) = 2r` with `f(0) = a`, `ḟ(0) = b ≠ 0`, `f̈(0) = c` on an interval containing 0.
#[derive(Clone)]
pub struct SchwarzianProblem {
    pub r: ScalarFn,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub interval: (f64, f64),
    pub step: f64,
}

impl std::fmt::Debug for SchwarzianProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SchwarzianProblem")
            .field("a", &self.a)
            .field("b", &self.b)
            .field("c", &self.c)
            .field("interval", &self.interval)
            .field("step", &self.step)
            .finish()
    }
}

impl SchwarzianProblem {
    pub fn new(r: ScalarFn, a: f64, b: f64, c: f64, interval: (f64, f64), step: f64) -> Result<Self> {
        if b == 0.0 || !b.is_finite() || !a.is_finite() || !c.is_finite() {
            return Err(Error::BadParams("need finite a, c and b ≠ 0".into()));
        }
        if !(interval.0 <= 0.0 && 0.0 <= interval.1) || !interval.0.is_finite() || !interval.1.is_finite() {
            return Err(Error::BadParams("interval must contain 0".into()));
        }
        if !(step > 0.0) {
            return Err(Error::BadParams("step must be positive".into()));
        }
        Ok(Self { r, a, b, c, interval, step })
    }

    pub fn constant(kappa: f64, a: f64, b: f64, c: f64, interval: (f64, f64), step: f64) -> Result<Self> {
        Self::new(Arc::new(move |_| kappa), a, b, c, interval, step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchwarzSample {
    pub t: f64,
    pub f: f64,
    pub fdot: f64,
    pub x1: f64,
    pub x2: f64,
    pub dx1: f64,
    pub dx2: f64,
    /// `ẋ₂/x₂`.
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchwarzianSolution {
    /// Uniform grid, increasing in `t`.
    pub samples: Vec<SchwarzSample>,
    pub dt: f64,
    /// Estimated zero of `x₂` where the run stopped below / above 0.
    pub truncated_below: Option<f64>,
    pub truncated_above: Option<f64>,
}

impl SchwarzianSolution {
    pub fn ts(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn fs(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.f).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,f,fdot,x1,x2,dx1,dx2,u\n");
        for s in &self.samples {
            let cells: Vec<String> = [s.t, s.f, s.fdot, s.x1, s.x2, s.dx1, s.dx2, s.u].iter().map(|x| format!("{x:.16e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn sample(t: f64, y: [f64; 4], w: f64) -> SchwarzSample {
    let [x1, dx1, x2, dx2] = y;
    SchwarzSample { t, f: x1 / x2, fdot: w / (x2 * x2), x1, x2, dx1, dx2, u: dx2 / x2 }
}

fn sweep(p: &SchwarzianProblem, end: f64, y0: [f64; 4], w: f64) -> (Vec<SchwarzSample>, Option<f64>) {
    let span = end.abs();
    let count = (span / p.step + 1e-9).floor() as usize;
    let h = p.step * end.signum();
    let rhs = |t: f64, y: [f64; 4]| {
        let r = (p.r)(t);
        [y[1], -r * y[0], y[3], -r * y[2]]
    };
    let add = |y: [f64; 4], k: [f64; 4], s: f64| [y[0] + s * k[0], y[1] + s * k[1], y[2] + s * k[2], y[3] + s * k[3]];
    let mut out = Vec::with_capacity(count);
    let mut y = y0;
    let floor = 1e-12 * y0[2].abs();
    for s in 0..count {
        let t = s as f64 * h;
        let k1 = rhs(t, y);
        let k2 = rhs(t + h / 2.0, add(y, k1, h / 2.0));
        let k3 = rhs(t + h / 2.0, add(y, k2, h / 2.0));
        let k4 = rhs(t + h, add(y, k3, h));
        let yn = [0, 1, 2, 3].map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        if yn[2].signum() != y0[2].signum() || yn[2].abs() <= floor || yn.iter().any(|c| !c.is_finite()) {
            let zero = t + h * y[2] / (y[2] - yn[2]);
            return (out, Some(if zero.is_finite() { zero } else { t + h }));
        }
        y = yn;
        out.push(sample(t + h, y, w));
    }
    (out, None)
}

/// Solves through `f = x₁/x₂` with `ẍ + r x = 0`, `x₁(0) = 2ab`, `ẋ₁(0) = 2b² − ac`, `x₂(0) = 2b`, `ẋ₂(0) = −c`.
/// Samples sit on the grid `k · step`; each direction stops before the first zero of `x₂`.
pub fn schwarzian_solve(p: &SchwarzianProblem) -> SchwarzianSolution {
    let (a, b, c) = (p.a, p.b, p.c);
    let y0 = [2.0 * a * b, 2.0 * b * b - a * c, 2.0 * b, -c];
    let w = 4.0 * b * b * b;
    let (mut below, tb) = sweep(p, p.interval.0, y0, w);
    let (above, ta) = sweep(p, p.interval.1, y0, w);
    below.reverse();
    below.push(sample(0.0, y0, w));
    below.extend(above);
    SchwarzianSolution { samples: below, dt: p.step, truncated_below: tb, truncated_above: ta }
}

/// Fourth-order central estimates of `(ḟ, f̈, f⃛)`.
pub fn derivatives(f: &dyn Fn(f64) -> f64, t: f64, h: f64) -> (f64, f64, f64) {
    let v = |k: f64| f(t + k * h);
    let (m3, m2, m1, z, p1, p2, p3) = (v(-3.0), v(-2.0), v(-1.0), v(0.0), v(1.0), v(2.0), v(3.0));
    let d1 = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
    let d2 = (-p2 + 16.0 * p1 - 30.0 * z + 16.0 * m1 - m2) / (12.0 * h * h);
    let d3 = (-p3 + 8.0 * p2 - 13.0 * p1 + 13.0 * m1 - 8.0 * m2 + m3) / (8.0 * h * h * h);
    (d1, d2, d3)
}

fn derivatives_checked(f: &dyn Fn(f64) -> f64, t: f64, h: f64) -> Result<(f64, f64, f64)> {
    if !(h > 0.0) {
        return Err(Error::InvalidParams("step must be positive".into()));
    }
    let d = derivatives(f, t, h);
    if d.0.abs() <= 1e-10 * f(t).abs().max(1.0) || !d.0.is_finite() {
        return Err(Error::CriticalPoint { t });
    }
    Ok(d)
}

/// `S(f)(t) = f⃛/ḟ − (3/2)(f̈/ḟ)²` by finite differences.
pub fn schwarzian_numeric(f: &dyn Fn(f64) -> f64, t: f64, h: f64) -> Result<f64> {
    let (d1, d2, d3) = derivatives_checked(f, t, h)?;
    Ok(d3 / d1 - 1.5 * (d2 / d1).powi(2))
}

/// `u̇ + u² + r` with `u = −½f̈/ḟ`.
pub fn riccati_residual(f: &dyn Fn(f64) -> f64, r: &dyn Fn(f64) -> f64, t: f64, h: f64) -> Result<f64> {
    let (d1, d2, d3) = derivatives_checked(f, t, h)?;
    let u = -0.5 * d2 / d1;
    let du = -0.5 * (d3 / d1 - (d2 / d1).powi(2));
    Ok(du + u * u + r(t))
}

/// Schwarzian at sample `i` of a uniform grid, stencil spacing `stride · dt`.
pub fn schwarzian_of_samples(fs: &[f64], dt: f64, i: usize, stride: usize) -> Result<f64> {
    let reach = 3 * stride;
    if i < reach || i + reach >= fs.len() {
        return Err(Error::InvalidParams("stencil leaves the sampled range".into()));
    }
    let h = dt * stride as f64;
    let f = |t: f64| fs[(i as f64 + t / dt).round() as usize];
    schwarzian_numeric(&f, 0.0, h).map_err(|_| Error::CriticalPoint { t: i as f64 * dt })
}

/// `f ≈ (αg + β)/(γg + δ)` fitted from samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LftFit {
    pub coeffs: [f64; 4],
    pub residual: f64,
}

impl LftFit {
    pub fn apply(&self, y: f64) -> f64 {
        let [a, b, c, d] = self.coeffs;
        (a * y + b) / (c * y + d)
    }
}

pub fn fit_lft(g: &[f64], f: &[f64]) -> Result<LftFit> {
    if g.len() != f.len() || g.len() < 4 {
        return Err(Error::InvalidParams("need at least 4 paired samples".into()));
    }
    let m = DMatrix::from_fn(g.len(), 4, |r, k| match k {
        0 => g[r],
        1 => 1.0,
        2 => -f[r] * g[r],
        _ => -f[r],
    });
    let svd = m.svd(false, true);
    let vt = svd.v_t.ok_or_else(|| Error::Validation("SVD failed".into()))?;
    let (imin, _) = svd.singular_values.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, s)| if *s < acc.1 { (i, *s) } else { acc });
    let row = vt.row(imin);
    let fit = LftFit { coeffs: [row[0], row[1], row[2], row[3]], residual: 0.0 };
    let residual = g.iter().zip(f).map(|(y, x)| (fit.apply(*y) - x).abs()).fold(0.0, f64::max);
    Ok(LftFit { residual, ..fit })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaSample {
    pub t: f64,
    pub q: f64,
    pub kappa: f64,
    /// `|∇_{d/dt}γ̇ − qγ̇| / |γ̇|²`.
    pub parallel_defect: f64,
}

fn curve_derivs(curve: &dyn Fn(f64) -> Vec<f64>, t: f64, h: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let p = curve(t);
    let n = p.len();
    let (mut d1, mut d2) = (vec![0.0; n], vec![0.0; n]);
    for k in 0..n {
        let (a, b, _) = derivatives(&|s| curve(s)[k], t, h);
        d1[k] = a;
        d2[k] = b;
    }
    (p, d1, d2)
}

/// `κ = q̇ − ½q² − 2P(γ̇, γ̇)` along a curve, where `∇_{d/dt}γ̇ = qγ̇`.
pub fn projective_kappa(
    chart: &ChartConnection,
    curve: &dyn Fn(f64) -> Vec<f64>,
    schouten: &dyn Fn(&[f64]) -> DenseTensor,
    ts: &[f64],
    h: f64,
    tol: f64,
) -> Result<Vec<KappaSample>> {
    let q_at = |t: f64| -> Result<(f64, f64, Vec<f64>, Vec<f64>)> {
        let (p, d1, d2) = curve_derivs(curve, t, h);
        let g = chart.christoffel(&p)?;
        let acc: Vec<f64> = eval3(&g, &d1, &d1).iter().zip(&d2).map(|(a, b)| a + b).collect();
        let s = dot(&d1, &d1);
        if !(s > 1e-20) {
            return Err(Error::CriticalPoint { t });
        }
        let q = dot(&acc, &d1) / s;
        let defect = acc.iter().zip(&d1).map(|(a, v)| (a - q * v).powi(2)).sum::<f64>().sqrt() / s;
        Ok((q, defect, p, d1))
    };
    let mut out = Vec::with_capacity(ts.len());
    for &t in ts {
        let (q, defect, p, d1) = q_at(t)?;
        if defect > tol {
            return Err(Error::NotAGeodesicPath { defect });
        }
        let mut qs = [0.0; 4];
        for (slot, k) in qs.iter_mut().zip([-2.0, -1.0, 1.0, 2.0]) {
            *slot = q_at(t + k * h)?.0;
        }
        let dq = (qs[0] - 8.0 * qs[1] + 8.0 * qs[2] - qs[3]) / (12.0 * h);
        let kappa = dq - 0.5 * q * q - 2.0 * eval2(&schouten(&p), &d1, &d1);
        out.push(KappaSample { t, q, kappa, parallel_defect: defect });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_line_is_exact() {
        let c = ChartConnection::flat(3).unwrap();
        let s = geodesic_integrate(&c, &[1.0, 2.0, 3.0], &[0.5, -1.0, 0.25], 2.0, 0.01).unwrap();
        let last = s.last().unwrap();
        assert!((last.t - 2.0).abs() < 1e-12);
        for (i, (x0, v0)) in [(1.0, 0.5), (2.0, -1.0), (3.0, 0.25)].iter().enumerate() {
            assert!((last.x[i] - (x0 + 2.0 * v0)).abs() < 1e-12);
        }
    }

    #[test]
    fn invariants_of_simple_states() {
        let circ = GeodesicState { t: 0.0, x: vec![1.0, 0.0, 0.0], v: vec![0.0, 1.0, 0.0] };
        let (c, e) = central_invariants(&circ, 3).unwrap();
        assert!((c - 1.0).abs() < 1e-15 && (e - 1.0 / 6.0).abs() < 1e-15);
        let rest = GeodesicState { t: 0.0, x: vec![1.0, 2.0, 0.0], v: vec![0.0; 3] };
        assert_eq!(central_invariants(&rest, 3).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn zero_b_rejected() {
        assert!(SchwarzianProblem::constant(0.0, 1.0, 0.0, 1.0, (0.0, 1.0), 1e-3).is_err());
    }

    #[test]
    fn exponential_schwarzian() {
        let s = schwarzian_numeric(&f64::exp, 0.3, SCHWARZIAN_STEP).unwrap();
        assert!((s + 0.5).abs() < 1e-6, "{s}");
    }

    #[test]
    fn critical_point() {
        assert!(matches!(schwarzian_numeric(&|t| t * t, 0.0, SCHWARZIAN_STEP), Err(Error::CriticalPoint { .. })));
    }
}
