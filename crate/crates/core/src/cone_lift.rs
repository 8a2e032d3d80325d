//! Cone connections on a trivialized line bundle over a frame algebra.
//!
//! The lifted frame has dimension `n + 1` and the vertical field `E` is the
//! last basis vector; `β` is its dual covector. Horizontal indices come first.

use nalgebra::{DMatrix, DVector};

use crate::connection::{cov_two_tensor, curvature_tensor, divergence, cov_tensor, ricci_of, schouten_of, InvariantConnection};
use crate::error::{Error, Result};
use crate::lie::FrameAlgebra;
use crate::metric::FrameMetric;
use crate::tensor::{sym_part, skew_part, unit, DenseTensor, Variance, L, U};

/// Default tolerance for the structural preconditions of this module.
pub const PRE_TOL: f64 = 1e-9;

/// A connection `Π` on an `n`-dimensional frame together with the curvature `ω` of a principal connection.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseData {
    frame: FrameAlgebra,
    pi: DenseTensor,
    omega: DenseTensor,
}

/// An `(n+1)`-dimensional radiant connection, invariant along the last basis vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedData {
    conn: InvariantConnection,
}

/// Base-level quantities read off a lifted connection.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseQuantities {
    pub cbar: DenseTensor,
    /// Horizontal block of the full coefficients.
    pub gamma: DenseTensor,
    pub omega: DenseTensor,
    pub q: DenseTensor,
    /// `R̂` restricted to horizontal indices, corrected by the `Q` and `ω` terms.
    pub r: DenseTensor,
    pub ric: DenseTensor,
    pub p: DenseTensor,
    /// `P_{(ij)}`.
    pub g: DenseTensor,
    pub eta: DenseTensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedIdentities {
    /// `D̂G + 2s(t+1)β⊗G + ∇g`.
    pub metricity: f64,
    /// `D̂_{[I}G_{J]K} + 2s(1+t)β_{[I}G_{J]K} + ½𝒦_{IJK}`.
    pub skew: f64,
    /// `G^{PQ}D̂_I G_{PQ} − (n+1)G^{PQ}D̂_P G_{QI} − (τ − (n+1)χ)`.
    pub alignment: f64,
    /// `D̂_I E^J − (1+t)(½dβ_I^J + sδ_I^J)`.
    pub fibre_geodesic: f64,
    /// `G^{JK}∇̂_I G_{JK} + 2(n+1)β_I − τ_I`.
    pub volume: f64,
}

impl ModifiedIdentities {
    pub fn max(&self) -> f64 {
        [self.metricity, self.skew, self.alignment, self.fibre_geodesic, self.volume].into_iter().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormRicci {
    pub ric: DenseTensor,
    /// `G^{IJ}` contracted against `ric`.
    pub trace_of_ric: f64,
    /// The stated scalar formula for the same trace.
    pub trace_formula: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaFit {
    pub alpha: f64,
    /// `‖ω∘ω − αg‖ / ‖g‖`.
    pub relative_defect: f64,
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

impl BaseData {
    pub fn new(frame: FrameAlgebra, pi: DenseTensor, omega: DenseTensor) -> Result<Self> {
        let n = frame.dim();
        if omega.dim() != n || omega.rank() != 2 {
            return Err(Error::ShapeMismatch("ω must be n×n".into()));
        }
        let skew = (&omega + &omega.swap(0, 1)).norm_inf();
        if skew > 1e-12 * omega.norm_inf().max(1.0) {
            return Err(Error::Validation(format!("ω not antisymmetric (defect {skew:e})")));
        }
        let conn = InvariantConnection::new(frame.clone(), pi)?;
        let omega = skew_part(&omega).with_variance(&[L, L]);
        let defect = frame.d_twoform(&omega).norm_inf();
        if defect > 1e-12 * omega.norm_inf().max(1.0) {
            return Err(Error::NotClosed { defect });
        }
        Ok(BaseData { frame, pi: conn.pi().clone(), omega })
    }

    pub fn frame(&self) -> &FrameAlgebra {
        &self.frame
    }

    pub fn pi(&self) -> &DenseTensor {
        &self.pi
    }

    pub fn omega(&self) -> &DenseTensor {
        &self.omega
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn connection(&self) -> InvariantConnection {
        InvariantConnection::new(self.frame.clone(), self.pi.clone()).expect("validated on construction")
    }

    /// Projective change `Π + γ⊗δ + δ⊗γ` with `ω` unchanged.
    pub fn projectively_shifted(&self, gamma: &[f64]) -> Result<Self> {
        let n = self.dim();
        let d = DenseTensor::from_fn(n, &[L, L, U], |x| gamma[x[0]] * delta(x[1], x[2]) + gamma[x[1]] * delta(x[0], x[2]));
        Self::new(self.frame.clone(), &self.pi + &d, self.omega.clone())
    }
}

/// `[Ê_i, Ê_j] = c̄_{ij}^k Ê_k − ω_{ij}E` and `[E, ·] = 0`.
pub fn lift_frame(base: &BaseData) -> Result<FrameAlgebra> {
    let n = base.dim();
    let cb = base.frame.c();
    let c = DenseTensor::from_fn(n + 1, &[L, L, U], |x| {
        let (i, j, k) = (x[0], x[1], x[2]);
        if i == n || j == n {
            0.0
        } else if k < n {
            cb[[i, j, k]]
        } else {
            -base.omega[[i, j]]
        }
    });
    FrameAlgebra::new(c)
}

/// `η = ω − (2/(n+1)) R_{[ij]}`.
pub fn eta_two_form(base: &BaseData) -> DenseTensor {
    let n = base.dim() as f64;
    let ric = base.connection().curvature().ric;
    &base.omega - &skew_part(&ric).scale(2.0 / (n + 1.0))
}

/// The normalized cone connection, with `Q = P_{(ij)} − ½ω`.
pub fn cone_connection(base: &BaseData) -> Result<LiftedData> {
    let p = schouten_of(&base.connection().curvature().ric);
    let q = &sym_part(&p) - &base.omega.scale(0.5);
    cone_connection_general(base, &q)
}

/// Cone connection with a prescribed `Q`; requires `2Q_{[ij]} = −ω_{ij}`.
pub fn cone_connection_general(base: &BaseData, q: &DenseTensor) -> Result<LiftedData> {
    let n = base.dim();
    if q.dim() != n || q.rank() != 2 {
        return Err(Error::ShapeMismatch("Q must be n×n".into()));
    }
    let defect = max_abs((0..n * n).map(|x| (x / n, x % n)).map(|(i, j)| q[[i, j]] - q[[j, i]] + base.omega[[i, j]]));
    if defect > 1e-12 * q.norm_inf().max(1.0) {
        return Err(Error::IncompatibleQ { defect });
    }
    let frame = lift_frame(base)?;
    let cb = base.frame.c();
    let a = DenseTensor::from_fn(n + 1, &[L, L, U], |x| {
        let (i, j, k) = (x[0], x[1], x[2]);
        match (i < n, j < n, k < n) {
            (true, true, true) => base.pi[[i, j, k]] + 0.5 * cb[[i, j, k]],
            (true, true, false) => q[[i, j]],
            (true, false, true) | (false, true, true) => delta(i.min(j), k),
            (false, false, false) => 1.0,
            _ => 0.0,
        }
    });
    let conn = InvariantConnection::from_full(frame, &a, 1e-12 * a.norm_inf().max(1.0))?;
    Ok(LiftedData { conn })
}

/// Basis `(e_j for j ≠ argmax|t_j|, then t)` as matrix columns.
pub fn vertical_basis(t: &[f64]) -> DMatrix<f64> {
    let n = t.len();
    let p = (0..n).fold(0, |b, i| if t[i].abs() > t[b].abs() { i } else { b });
    let mut m = DMatrix::zeros(n, n);
    let mut col = 0;
    for j in (0..n).filter(|&j| j != p) {
        m[(j, col)] = 1.0;
        col += 1;
    }
    for i in 0..n {
        m[(i, n - 1)] = t[i];
    }
    m
}

/// Rewrites a radiant, `t`-invariant connection in a basis ending with `t`.
/// Returns the lifted data and the basis matrix.
pub fn designate_vertical(conn: &InvariantConnection, t: &[f64]) -> Result<(LiftedData, DMatrix<f64>)> {
    if t.len() != conn.dim() {
        return Err(Error::ShapeMismatch("t has the wrong length".into()));
    }
    if t.iter().all(|x| *x == 0.0) {
        return Err(Error::InvalidParams("t must be nonzero".into()));
    }
    let m = vertical_basis(t);
    let moved = conn.change_basis(&m)?;
    Ok((LiftedData::new(moved)?, m))
}

/// Base frame, `Π`, `ω` and `Q` read off a lifted connection. The base frame is
/// not checked for Jacobi or closedness, since a designated basis need not
/// come from a literal lift.
pub fn extract_base(lifted: &LiftedData) -> (BaseData, DenseTensor) {
    let bq = lifted.base_quantities_raw();
    let pi = &bq.gamma - &bq.cbar.scale(0.5);
    let frame = FrameAlgebra::new_unchecked(bq.cbar.clone()).expect("antisymmetric block");
    (BaseData { frame, pi: crate::tensor::sym_part_3(&pi), omega: bq.omega }, bq.q)
}

struct RawBase {
    cbar: DenseTensor,
    gamma: DenseTensor,
    omega: DenseTensor,
    q: DenseTensor,
}

impl LiftedData {
    /// Checks `E = e_last` is radiant and that `E⌟R̂ = 0`.
    pub fn new(conn: InvariantConnection) -> Result<Self> {
        let big = conn.dim();
        if big < 2 {
            return Err(Error::DimensionTooSmall { dim: big });
        }
        let e = unit(big, big - 1);
        let scale = conn.full().norm_inf().max(1.0);
        let defect = conn.radiant_defect(&e);
        if defect > PRE_TOL * scale {
            return Err(Error::NotRadiant { defect });
        }
        let defect = conn.vertical_curvature_defect(&e);
        if defect > PRE_TOL * scale * scale {
            return Err(Error::NotInvariant { defect });
        }
        Ok(LiftedData { conn })
    }

    pub fn connection(&self) -> &InvariantConnection {
        &self.conn
    }

    pub fn frame(&self) -> &FrameAlgebra {
        self.conn.frame()
    }

    /// Base dimension `n`.
    pub fn base_dim(&self) -> usize {
        self.conn.dim() - 1
    }

    pub fn beta(&self) -> Vec<f64> {
        unit(self.conn.dim(), self.base_dim())
    }

    pub fn t_vec(&self) -> Vec<f64> {
        self.beta()
    }

    fn base_quantities_raw(&self) -> RawBase {
        let n = self.base_dim();
        let c = self.frame().c();
        let a = self.conn.full();
        RawBase {
            cbar: DenseTensor::from_fn(n, &[L, L, U], |x| c[[x[0], x[1], x[2]]]),
            gamma: DenseTensor::from_fn(n, &[L, L, U], |x| a[[x[0], x[1], x[2]]]),
            omega: DenseTensor::matrix(n, [L, L], |i, j| -c[[i, j, n]]),
            q: DenseTensor::matrix(n, [L, L], |i, j| a[[i, j, n]]),
        }
    }

    pub fn base_quantities(&self) -> BaseQuantities {
        let n = self.base_dim();
        let raw = self.base_quantities_raw();
        let rh = curvature_tensor(self.frame().c(), &self.conn.full());
        let r = DenseTensor::from_fn(n, &[L, L, L, U], |x| {
            let (i, j, k, l) = (x[0], x[1], x[2], x[3]);
            rh[[i, j, k, l]] - (delta(i, l) * raw.q[[j, k]] - delta(j, l) * raw.q[[i, k]]) - raw.omega[[i, j]] * delta(k, l)
        });
        let ric = ricci_of(&r);
        let p = schouten_of(&ric);
        let g = sym_part(&p);
        let eta = &raw.omega + &skew_part(&p).scale(2.0);
        BaseQuantities { cbar: raw.cbar, gamma: raw.gamma, omega: raw.omega, q: raw.q, r, ric, p, g, eta }
    }

    /// `max |E^P R̂_{PIJ}^K|` and `max |R̂_{IJP}^K E^P|`.
    pub fn vertical_annihilation(&self) -> (f64, f64) {
        let big = self.conn.dim();
        let e = big - 1;
        let r = self.conn.curvature().r;
        let mut a = 0.0f64;
        let mut b = 0.0f64;
        for x in crate::tensor::multi_indices(big, 3) {
            a = a.max(r[[e, x[0], x[1], x[2]]].abs());
            b = b.max(r[[x[0], x[1], e, x[2]]].abs());
        }
        (a, b)
    }

    /// `max |β(R̂_{ijk}) − C_{ijk} − ½(∇η)_{kij}|` over horizontal indices.
    pub fn vertical_curvature_component_defect(&self) -> f64 {
        let n = self.base_dim();
        let bq = self.base_quantities();
        let rh = self.conn.curvature().r;
        let np = cov_two_tensor(&bq.gamma, &bq.p);
        let ne = cov_two_tensor(&bq.gamma, &bq.eta);
        let mut worst = 0.0f64;
        for x in crate::tensor::multi_indices(n, 3) {
            let (i, j, k) = (x[0], x[1], x[2]);
            let c = np[[i, j, k]] - np[[j, i, k]];
            worst = worst.max((rh[[i, j, k, n]] - c - 0.5 * ne[[k, i, j]]).abs());
        }
        worst
    }

    /// `max |η|`; zero exactly in the Thomas case.
    pub fn eta_defect(&self) -> f64 {
        self.base_quantities().eta.norm_inf()
    }

    /// `G_{IJ} = ∇̂_{(I}β_{J)} + (2+t)β_Iβ_J`.
    pub fn lifted_metric(&self, t_param: f64) -> Result<FrameMetric> {
        if t_param == -1.0 {
            return Err(Error::DegenerateT);
        }
        let big = self.conn.dim();
        let e = big - 1;
        let a = self.conn.full();
        let g = DenseTensor::matrix(big, [L, L], |i, j| {
            -0.5 * (a[[i, j, e]] + a[[j, i, e]]) + if i == e && j == e { 2.0 + t_param } else { 0.0 }
        });
        FrameMetric::new(g)
    }

    /// `D̂ = ∇̂ + Ω` and the metric `G` it is built from.
    pub fn modified_connection(&self, t_param: f64, s: f64) -> Result<(InvariantConnection, FrameMetric)> {
        let gm = self.lifted_metric(t_param)?;
        let big = self.conn.dim();
        let e = big - 1;
        let beta = self.beta();
        let db = self.frame().d_oneform(&beta);
        let g = gm.h();
        let gi = gm.inv();
        let dbg = DenseTensor::matrix(big, [L, U], |j, k| (0..big).map(|q| db[[j, q]] * gi[[q, k]]).sum());
        let tp = t_param;
        let omega_t = DenseTensor::from_fn(big, &[L, L, U], |x| {
            let (i, j, k) = (x[0], x[1], x[2]);
            let sbd = beta[i] * delta(j, k) + beta[j] * delta(i, k);
            let ek = delta(k, e);
            (1.0 + tp) * 0.5 * (beta[i] * dbg[[j, k]] + beta[j] * dbg[[i, k]]) - tp * beta[i] * beta[j] * ek
                + (s - 1.0) * (sbd - g[[i, j]] * ek)
                + s * tp * sbd
        });
        Ok((self.conn.shifted(&omega_t)?, gm))
    }

    pub fn modified_identities(&self, t_param: f64, s: f64) -> Result<ModifiedIdentities> {
        let (d, gm) = self.modified_connection(t_param, s)?;
        let n = self.base_dim();
        let big = n + 1;
        let nf = n as f64;
        let e = n;
        let beta = self.beta();
        let bq = self.base_quantities();
        let gb = sym2_inverse_base(&bq.g)?;
        let ng = cov_two_tensor(&bq.gamma, &bq.g);
        let ngl = ng.embed(big);
        let tau: Vec<f64> = (0..n).map(|i| trace2(&gb, |p, q| ng[[i, p, q]])).collect();
        let chi: Vec<f64> = (0..n).map(|i| trace2(&gb, |p, q| ng[[p, q, i]])).collect();
        let g = gm.h();
        let gi = gm.inv();
        let da = d.full();
        let dg = cov_two_tensor(&da, g);
        let k = 2.0 * s * (t_param + 1.0);
        let metricity = max_abs(crate::tensor::multi_indices(big, 3).map(|x| {
            let (i, j, l) = (x[0], x[1], x[2]);
            dg[[i, j, l]] + k * beta[i] * g[[j, l]] + ngl[[i, j, l]]
        }));
        let skew = max_abs(crate::tensor::multi_indices(big, 3).map(|x| {
            let (i, j, l) = (x[0], x[1], x[2]);
            let lhs = 0.5 * (dg[[i, j, l]] - dg[[j, i, l]]);
            let kk = ngl[[i, j, l]] - ngl[[j, i, l]];
            lhs + 0.5 * k * (beta[i] * g[[j, l]] - beta[j] * g[[i, l]]) + 0.5 * kk
        }));
        let alignment = max_abs((0..big).map(|i| {
            let a1 = trace2(gi, |p, q| dg[[i, p, q]]);
            let a2 = trace2(gi, |p, q| dg[[p, q, i]]);
            let base = if i < n { tau[i] - (nf + 1.0) * chi[i] } else { 0.0 };
            a1 - (nf + 1.0) * a2 - base
        }));
        let db = self.frame().d_oneform(&beta);
        let fibre_geodesic = max_abs(crate::tensor::multi_indices(big, 2).map(|x| {
            let (i, j) = (x[0], x[1]);
            let dbu: f64 = (0..big).map(|q| db[[i, q]] * gi[[q, j]]).sum();
            da[[i, e, j]] - (1.0 + t_param) * (0.5 * dbu + s * delta(i, j))
        }));
        let hg = cov_two_tensor(&self.conn.full(), g);
        let volume = max_abs((0..big).map(|i| {
            let v = trace2(gi, |p, q| hg[[i, p, q]]);
            v + 2.0 * (nf + 1.0) * beta[i] - if i < n { tau[i] } else { 0.0 }
        }));
        Ok(ModifiedIdentities { metricity, skew, alignment, fibre_geodesic, volume })
    }

    /// `ω∘ω = αg` by least squares, with `g = P_{(ij)}`.
    pub fn omega_alpha(&self) -> Result<AlphaFit> {
        let bq = self.base_quantities();
        let gi = sym2_inverse_base(&bq.g)?;
        let oo = omega_square(&bq.omega, &gi);
        Ok(fit_alpha(&oo, &bq.g))
    }

    /// Ricci tensor of [`Self::modified_connection`] from base quantities alone.
    pub fn ricci_closed_form(&self, t_param: f64, s: f64) -> Result<ClosedFormRicci> {
        let gm = self.lifted_metric(t_param)?;
        let n = self.base_dim();
        let big = n + 1;
        let nf = n as f64;
        let tp = t_param;
        let bq = self.base_quantities();
        let gi = sym2_inverse_base(&bq.g)?;
        let ng = cov_two_tensor(&bq.gamma, &bq.g);
        let nom = cov_two_tensor(&bq.gamma, &bq.omega);
        let chi: Vec<f64> = (0..n).map(|i| trace2(&gi, |p, q| ng[[p, q, i]])).collect();
        let nu: Vec<f64> = (0..n).map(|i| trace2(&gi, |p, q| nom[[p, q, i]])).collect();
        let oo = omega_square(&bq.omega, &gi);
        let om2 = omega_norm2(&bq.omega, &gi);
        let co: Vec<f64> = (0..n)
            .map(|i| (0..n).flat_map(|p| (0..n).map(move |q| (p, q))).map(|(p, q)| chi[p] * bq.omega[[i, q]] * gi[[p, q]]).sum())
            .collect();
        let pa = skew_part(&bq.p);
        let s2 = s * s;
        let cg = (nf - 1.0 + nf * tp) * s2 - nf + 1.0 - tp;
        let cbb = (tp + 1.0) * (tp * (1.0 - s2) + (tp + 1.0) / 4.0 * om2);
        let e = n;
        let ric = DenseTensor::matrix(big, [L, L], |i, j| {
            let b = |x: usize| delta(x, e);
            let h = |x: &dyn Fn(usize, usize) -> f64| if i < n && j < n { x(i, j) } else { 0.0 };
            let v = |w: &[f64], x: usize| if x < n { w[x] } else { 0.0 };
            -(nf + 1.0) * h(&|a, c| pa[[a, c]]) - s * (nf + 1.0 + (nf + 3.0) * tp) / 2.0 * h(&|a, c| bq.omega[[a, c]])
                + (tp + 1.0) * 0.5 * (v(&nu, i) * b(j) + v(&nu, j) * b(i) + b(i) * v(&co, j) + b(j) * v(&co, i))
                + cg * h(&|a, c| bq.g[[a, c]])
                - (1.0 + tp) / 2.0 * h(&|a, c| oo[[a, c]])
                + cbb * b(i) * b(j)
        });
        let trace_of_ric = trace2(gm.inv(), |p, q| ric[[p, q]]);
        let trace_formula = -(1.0 + tp) / 4.0 * om2
            - ((s2 - nf - 1.0) * tp * tp + (nf * nf + 1.0) * (s2 - 1.0) * tp + nf * (nf - 1.0) * (s2 - 1.0)) / (tp + 1.0)
            + nf * s2 * tp * (tp - nf + 1.0) / (tp + 1.0);
        Ok(ClosedFormRicci { ric, trace_of_ric, trace_formula })
    }

    /// Ricci tensor of [`Self::modified_connection`] by direct contraction.
    pub fn ricci_direct(&self, t_param: f64, s: f64) -> Result<DenseTensor> {
        Ok(self.modified_connection(t_param, s)?.0.curvature().ric)
    }

    /// Horizontal lift of a trace-free base tensor with one upper index (last
    /// slot), corrected along `E` so that its `∇̂`-divergence vanishes.
    pub fn invariant_lift(&self, a_base: &DenseTensor) -> Result<DenseTensor> {
        let n = self.base_dim();
        let rank = a_base.rank();
        if rank == 0 || a_base.variance()[rank - 1] != U || a_base.variance()[..rank - 1].iter().any(|v| *v != L) {
            return Err(Error::ShapeMismatch("expected k lower slots followed by one upper slot".into()));
        }
        if a_base.dim() != n {
            return Err(Error::ShapeMismatch("tensor must live on the base".into()));
        }
        let k = rank - 1;
        if k == n + 1 {
            return Err(Error::ForbiddenDegree);
        }
        let eta = self.eta_defect();
        if eta > PRE_TOL {
            return Err(Error::NotThomas { defect: eta });
        }
        let scale = a_base.norm_inf().max(1.0);
        for slot in 0..k {
            let tr = crate::tensor::contract(a_base, rank - 1, slot)?;
            if tr.norm_inf() > 1e-10 * scale {
                return Err(Error::PreconditionFailed(format!("tensor not trace-free (defect {:e})", tr.norm_inf())));
            }
        }
        let bq = self.base_quantities();
        let div = divergence(&bq.gamma, a_base);
        let coef = -1.0 / (n as f64 + 1.0 - k as f64);
        let mut var: Vec<Variance> = vec![L; k];
        var.push(U);
        Ok(DenseTensor::from_fn(n + 1, &var, |x| {
            if x[..k].iter().any(|&i| i == n) {
                0.0
            } else if x[k] < n {
                a_base.get(x)
            } else {
                coef * div.get(&x[..k])
            }
        }))
    }

    /// `max |∇̂_P T_{..}^P|`.
    pub fn divergence_defect(&self, t: &DenseTensor) -> f64 {
        divergence(&self.conn.full(), t).norm_inf()
    }
}

/// Predicted cone connection of `(Π + γ⊗δ + δ⊗γ, ω)` written against the cone of `(Π, ω)`:
/// `Â + 2γ_{(I}δ_{J)}^K − 2γ_{(I}β_{J)}E^K + (∇_{(i}γ_{j)} − γ_iγ_j)E^K`, with `δ` the full identity.
pub fn shifted_cone_prediction(base: &BaseData, gamma: &[f64]) -> Result<DenseTensor> {
    let lifted = cone_connection(base)?;
    let n = base.dim();
    let big = n + 1;
    let a = lifted.conn.full();
    let ng = crate::connection::cov_covector(&base.connection().full(), gamma);
    let gl: Vec<f64> = (0..big).map(|i| if i < n { gamma[i] } else { 0.0 }).collect();
    let beta = lifted.beta();
    let corr = DenseTensor::from_fn(big, &[L, L, U], |x| {
        let (i, j, k) = (x[0], x[1], x[2]);
        let mut v = gl[i] * delta(j, k) + gl[j] * delta(i, k);
        if k == n {
            v -= gl[i] * beta[j] + gl[j] * beta[i];
            if i < n && j < n {
                v += 0.5 * (ng[[i, j]] + ng[[j, i]]) - gamma[i] * gamma[j];
            }
        }
        v
    });
    Ok(&a + &corr)
}

/// Real roots of `s² = 1/(1+t) + (n+2)α/(4(n−1))`, in decreasing order.
pub fn ew_s_values(alpha: f64, t_param: f64, n: usize) -> Vec<f64> {
    if n < 2 || t_param == -1.0 {
        return Vec::new();
    }
    let nf = n as f64;
    let rad = 1.0 / (1.0 + t_param) + (nf + 2.0) * alpha / (4.0 * (nf - 1.0));
    if rad < 0.0 || !rad.is_finite() {
        Vec::new()
    } else if rad == 0.0 {
        vec![0.0]
    } else {
        vec![rad.sqrt(), -rad.sqrt()]
    }
}

/// Defects of the modified connection at one admissible `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct EwDefects {
    pub s: f64,
    /// `max |D̂G + 2s(1+t)β⊗G|`.
    pub weyl: f64,
    /// `max |Ric(D̂) + (3/2)s·dβ + κ²/(8α₁)G|`.
    pub ricci: f64,
    pub conservation: f64,
}

/// Cone connection on `Im qaf[α₁, α₂]` designated along `t = κ⁻¹e₁`, with the
/// `ω∘ω = αg` fit and the Einstein-Weyl defects at each root of [`ew_s_values`].
#[derive(Debug, Clone)]
pub struct BergerEw {
    pub lifted: LiftedData,
    pub fit: AlphaFit,
    pub t_param: f64,
    pub branches: Vec<EwDefects>,
}

pub fn berger_ew(a1: f64, a2: f64, kappa: f64, t_param: f64) -> Result<BergerEw> {
    let conn = crate::connection::qacone_preset(a1, a2, kappa)?;
    let (lifted, _) = designate_vertical(&conn, &[1.0 / kappa, 0.0, 0.0])?;
    let fit = lifted.omega_alpha()?;
    let n = lifted.base_dim();
    let big = n + 1;
    let beta = lifted.beta();
    let db = lifted.frame().d_oneform(&beta);
    let mut branches = Vec::new();
    for s in ew_s_values(fit.alpha, t_param, n) {
        let (d, gm) = lifted.modified_connection(t_param, s)?;
        let g = gm.h();
        let dg = cov_two_tensor(&d.full(), g);
        let k = 2.0 * s * (1.0 + t_param);
        let weyl = max_abs(crate::tensor::multi_indices(big, 3).map(|x| dg[[x[0], x[1], x[2]]] + k * beta[x[0]] * g[[x[1], x[2]]]));
        let ric = d.curvature().ric;
        let c = kappa * kappa / (8.0 * a1);
        let ricci = max_abs(crate::tensor::multi_indices(big, 2).map(|x| ric[[x[0], x[1]]] + 1.5 * s * db[[x[0], x[1]]] + c * g[[x[0], x[1]]]));
        let conservation = crate::metric::einstein_ah_report(&d, &gm)?.conservation_defect;
        branches.push(EwDefects { s, weyl, ricci, conservation });
    }
    Ok(BergerEw { lifted, fit, t_param, branches })
}

/// `ω∘ω_{ij} = ω_{ip}ω_{qj}g^{pq}`.
pub fn omega_square(omega: &DenseTensor, gi: &DenseTensor) -> DenseTensor {
    let n = omega.dim();
    DenseTensor::matrix(n, [L, L], |i, j| trace2(gi, |p, q| omega[[i, p]] * omega[[q, j]]))
}

/// `|ω|²_g = ω_{ab}ω_{pq}g^{ap}g^{bq}`.
pub fn omega_norm2(omega: &DenseTensor, gi: &DenseTensor) -> f64 {
    let n = omega.dim();
    let mut s = 0.0;
    for x in crate::tensor::multi_indices(n, 4) {
        s += omega[[x[0], x[1]]] * omega[[x[2], x[3]]] * gi[[x[0], x[2]]] * gi[[x[1], x[3]]];
    }
    s
}

pub fn fit_alpha(oo: &DenseTensor, g: &DenseTensor) -> AlphaFit {
    let gg: f64 = g.data().iter().map(|x| x * x).sum();
    let og: f64 = oo.data().iter().zip(g.data()).map(|(a, b)| a * b).sum();
    let alpha = if gg > 0.0 { og / gg } else { 0.0 };
    let res: f64 = oo.data().iter().zip(g.data()).map(|(a, b)| (a - alpha * b).powi(2)).sum();
    let relative_defect = if gg > 0.0 { (res / gg).sqrt() } else { f64::INFINITY };
    AlphaFit { alpha, relative_defect }
}

/// Least-squares residual (Euclidean) of `σ(E) = 0, dσ = target` over constant covectors `σ`.
pub fn exact_primitive_residual(frame: &FrameAlgebra, target: &DenseTensor, e: &[f64]) -> f64 {
    let n = frame.dim();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let rows = 1 + pairs.len();
    let c = frame.c();
    let m = DMatrix::from_fn(rows, n, |r, p| if r == 0 { e[p] } else { -c[[pairs[r - 1].0, pairs[r - 1].1, p]] });
    let rhs = DVector::from_fn(rows, |r, _| if r == 0 { 0.0 } else { target[[pairs[r - 1].0, pairs[r - 1].1]] });
    let svd = m.clone().svd(true, true);
    match svd.solve(&rhs, 1e-12) {
        Ok(x) => (&m * x - rhs).norm(),
        Err(_) => rhs.norm(),
    }
}

fn trace2(gi: &DenseTensor, f: impl Fn(usize, usize) -> f64) -> f64 {
    let n = gi.dim();
    let mut s = 0.0;
    for p in 0..n {
        for q in 0..n {
            s += gi[[p, q]] * f(p, q);
        }
    }
    s
}

fn sym2_inverse_base(g: &DenseTensor) -> Result<DenseTensor> {
    crate::tensor::sym2_inverse(g)
}

/// General covariant derivative re-exported for lift checks.
pub fn covariant(a: &DenseTensor, t: &DenseTensor) -> DenseTensor {
    cov_tensor(a, t)
}
