//! Metrics against invariant connections: conjugate and opposite connections,
//! statistical / AH diagnostics and Einstein reports.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::connection::{cov_two_tensor, curvature_tensor, levi_civita, ricci_of, InvariantConnection};
use crate::error::{Error, Result};
use crate::lie::FrameAlgebra;
use crate::tensor::{sym2_inverse, DenseTensor, L, U};

/// Default precondition tolerance for the predicates in this module.
pub const PRE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct FrameMetric {
    h: DenseTensor,
    inv: DenseTensor,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricDoc {
    pub h: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConjugateMode {
    Conjugate,
    Opposite,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompatReport {
    /// `max |∇_{[i}h_{j]k}|`.
    pub statistical_defect: f64,
    /// `max |h^{pq}∇_i h_{pq}|`.
    pub special_defect: f64,
    /// `max |L_t h − 2h|`, when `t` is given.
    pub self_similar_defect: Option<f64>,
    /// `max |∇_i E♭_j − h_{ij}|`, when `t` is given.
    pub radiant_hessian_defect: Option<f64>,
    /// `max |dE♭|`, when `t` is given.
    pub flat_oneform_closed_defect: Option<f64>,
    /// `v = h(t,t)`.
    pub v: Option<f64>,
    /// `max |2E♭_i + t^a t^b ∇_i h_{ab}|`; `dv = 0` for constant components.
    pub dv_identity_defect: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AhData {
    /// `χ_i = g^{pq}∇_p g_{qi}`.
    pub chi: Vec<f64>,
    /// `τ_i = g^{pq}∇_i g_{pq}`.
    pub tau: Vec<f64>,
    /// `max |τ − nχ|`.
    pub alignment_defect: f64,
    /// `max |∇_{[i}g_{j]k} − χ_{[i}g_{j]k}|`.
    pub codazzi_defect: f64,
    /// `𝓛_{ijk} = ∇_i g_{jk} − χ_i g_{jk}`.
    pub cubic: DenseTensor,
    pub cubic_symmetry_defect: f64,
    pub cubic_trace_defect: f64,
}

impl AhData {
    pub fn ah_defect(&self) -> f64 {
        self.alignment_defect.max(self.codazzi_defect)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EinsteinAhReport {
    pub scalar: f64,
    pub naive_defect: f64,
    pub conjugate_naive_defect: f64,
    pub conservation_defect: f64,
    pub chi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThomasCriterion {
    pub statistical: f64,
    pub special: f64,
    pub self_similar: f64,
    pub conjugate_ricci_flat: f64,
    pub ricci_flat: f64,
}

impl ThomasCriterion {
    pub fn passes(&self, tol: f64) -> bool {
        [self.statistical, self.special, self.self_similar, self.conjugate_ricci_flat, self.ricci_flat]
            .iter()
            .all(|x| *x <= tol)
    }
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

impl FrameMetric {
    pub fn new(h: DenseTensor) -> Result<Self> {
        if h.rank() != 2 {
            return Err(Error::ShapeMismatch("metric must have rank 2".into()));
        }
        if !h.is_finite() {
            return Err(Error::Validation("metric has non-finite entries".into()));
        }
        let h = h.with_variance(&[L, L]);
        let inv = sym2_inverse(&h)?;
        Ok(FrameMetric { h, inv })
    }

    pub fn from_doc(doc: &MetricDoc) -> Result<Self> {
        let n = doc.h.len();
        if doc.h.iter().any(|r| r.len() != n) {
            return Err(Error::Validation(format!("h must be {n}×{n}")));
        }
        Self::new(DenseTensor::matrix(n, [L, L], |i, j| doc.h[i][j]))
    }

    pub fn h(&self) -> &DenseTensor {
        &self.h
    }

    pub fn inv(&self) -> &DenseTensor {
        &self.inv
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    /// `h^{pq} S_{pq}`.
    pub fn trace(&self, s: &DenseTensor) -> f64 {
        let n = self.dim();
        let mut t = 0.0;
        for p in 0..n {
            for q in 0..n {
                t += self.inv[[p, q]] * s[[p, q]];
            }
        }
        t
    }

    /// Raises the last index of a covariant rank-3 tensor.
    pub fn raise_last(&self, t: &DenseTensor) -> DenseTensor {
        let n = self.dim();
        DenseTensor::from_fn(n, &[L, L, U], |x| (0..n).map(|p| t[[x[0], x[1], p]] * self.inv[[p, x[2]]]).sum())
    }
}

fn check(conn: &InvariantConnection, h: &FrameMetric) -> Result<()> {
    if conn.dim() != h.dim() {
        return Err(Error::ShapeMismatch("connection and metric dimensions differ".into()));
    }
    Ok(())
}

/// `(∇h)_{ijk}`.
pub fn covderiv_sym2(conn: &InvariantConnection, h: &DenseTensor) -> Result<DenseTensor> {
    if h.dim() != conn.dim() || h.rank() != 2 {
        return Err(Error::ShapeMismatch("h must be n×n".into()));
    }
    Ok(cov_two_tensor(&conn.full(), h))
}

/// Full coefficients of the `h`-conjugate or `h`-opposite connection. The
/// conjugate of a non-statistical pair carries torsion, so full coefficients are returned.
pub fn conjugate_full(conn: &InvariantConnection, h: &FrameMetric, mode: ConjugateMode) -> Result<DenseTensor> {
    check(conn, h)?;
    let n = conn.dim();
    let a = conn.full();
    let nh = cov_two_tensor(&a, h.h());
    let diff = match mode {
        ConjugateMode::Conjugate => h.raise_last(&nh),
        ConjugateMode::Opposite => {
            let low = DenseTensor::from_fn(n, &[L, L, L], |x| {
                let (i, j, p) = (x[0], x[1], x[2]);
                nh[[i, j, p]] + nh[[j, i, p]] - nh[[p, i, j]]
            });
            h.raise_last(&low)
        }
    };
    Ok(&a + &diff)
}

/// Torsion `max |Ā_{ij} − Ā_{ji} − c_{ij}|` of full coefficients over a frame.
pub fn torsion_defect(frame: &FrameAlgebra, a: &DenseTensor) -> f64 {
    ((a - &a.swap(0, 1)) - frame.c().clone()).norm_inf()
}

/// Opposite connection (always torsion-free) or conjugate connection (rejected
/// unless its torsion is below [`PRE_TOL`]; see [`conjugate_full`] for the raw form).
pub fn conjugate_or_opposite(conn: &InvariantConnection, h: &FrameMetric, mode: ConjugateMode) -> Result<InvariantConnection> {
    let a = conjugate_full(conn, h, mode)?;
    InvariantConnection::from_full(conn.frame().clone(), &a, PRE_TOL.max(1e-10 * a.norm_inf()))
}

pub fn structure_report(conn: &InvariantConnection, h: &FrameMetric, t: Option<&[f64]>) -> Result<CompatReport> {
    check(conn, h)?;
    let n = conn.dim();
    let a = conn.full();
    let nh = cov_two_tensor(&a, h.h());
    let mut rep = CompatReport::default();
    let mut stat = 0.0f64;
    let mut special = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                stat = stat.max((0.5 * (nh[[i, j, k]] - nh[[j, i, k]])).abs());
            }
        }
        let s: f64 = (0..n).flat_map(|p| (0..n).map(move |q| (p, q))).map(|(p, q)| h.inv()[[p, q]] * nh[[i, p, q]]).sum();
        special = special.max(s.abs());
    }
    rep.statistical_defect = stat;
    rep.special_defect = special;
    if let Some(t) = t {
        let frame = conn.frame();
        let lh = frame.lie_derivative(t, h.h())?;
        rep.self_similar_defect = Some((0..n * n).map(|x| (x / n, x % n)).map(|(i, j)| (lh[[i, j]] - 2.0 * h.h()[[i, j]]).abs()).fold(0.0, f64::max));
        let eflat = crate::tensor::vec_mat(t, h.h());
        let ne = crate::connection::cov_covector(&a, &eflat);
        rep.radiant_hessian_defect = Some((ne - h.h().clone()).norm_inf());
        rep.flat_oneform_closed_defect = Some(frame.d_oneform(&eflat).norm_inf());
        rep.v = Some(crate::tensor::eval2(h.h(), t, t));
        let mut dv = 0.0f64;
        for i in 0..n {
            let mut s = 2.0 * eflat[i];
            for x in 0..n {
                for y in 0..n {
                    s += t[x] * t[y] * nh[[i, x, y]];
                }
            }
            dv = dv.max(s.abs());
        }
        rep.dv_identity_defect = Some(dv);
    }
    Ok(rep)
}

pub fn ah_data(conn: &InvariantConnection, g: &FrameMetric) -> Result<AhData> {
    check(conn, g)?;
    let n = conn.dim();
    let ng = cov_two_tensor(&conn.full(), g.h());
    let gi = g.inv();
    let chi: Vec<f64> = (0..n)
        .map(|i| (0..n).flat_map(|p| (0..n).map(move |q| (p, q))).map(|(p, q)| gi[[p, q]] * ng[[p, q, i]]).sum())
        .collect();
    let tau: Vec<f64> = (0..n)
        .map(|i| (0..n).flat_map(|p| (0..n).map(move |q| (p, q))).map(|(p, q)| gi[[p, q]] * ng[[i, p, q]]).sum())
        .collect();
    let alignment_defect = max_abs(tau.iter().zip(&chi).map(|(t, c)| t - n as f64 * c));
    let gh = g.h();
    let cubic = DenseTensor::from_fn(n, &[L, L, L], |x| ng[[x[0], x[1], x[2]]] - chi[x[0]] * gh[[x[1], x[2]]]);
    let mut codazzi = 0.0f64;
    let mut symm = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let lhs = 0.5 * (ng[[i, j, k]] - ng[[j, i, k]]);
                let rhs = 0.5 * (chi[i] * gh[[j, k]] - chi[j] * gh[[i, k]]);
                codazzi = codazzi.max((lhs - rhs).abs());
                symm = symm.max((cubic[[i, j, k]] - cubic[[j, i, k]]).abs()).max((cubic[[i, j, k]] - cubic[[i, k, j]]).abs());
            }
        }
    }
    let trace = max_abs((0..n).map(|k| {
        (0..n).flat_map(|p| (0..n).map(move |q| (p, q))).map(|(p, q)| gi[[p, q]] * cubic[[p, q, k]]).sum::<f64>()
    }));
    Ok(AhData { chi, tau, alignment_defect, codazzi_defect: codazzi, cubic, cubic_symmetry_defect: symm, cubic_trace_defect: trace })
}

/// `∇ + 𝓛_{ij}^k`.
pub fn ah_conjugate(conn: &InvariantConnection, g: &FrameMetric) -> Result<InvariantConnection> {
    let d = ah_data(conn, g)?;
    let defect = d.ah_defect();
    if defect > PRE_TOL {
        return Err(Error::NotAH { defect });
    }
    conn.shifted(&g.raise_last(&d.cubic))
}

/// `max |R̆_{ijkl} + R_{ijlk} + dχ_{ij} g_{kl}|` with both curvatures computed directly.
pub fn ah_curvature_relation_defect(conn: &InvariantConnection, g: &FrameMetric) -> Result<f64> {
    let conj = ah_conjugate(conn, g)?;
    let d = ah_data(conn, g)?;
    let dchi = conn.frame().d_oneform(&d.chi);
    let r = lower_last(&conn.curvature().r, g.h());
    let rc = lower_last(&conj.curvature().r, g.h());
    let n = conn.dim();
    let mut worst = 0.0f64;
    for x in crate::tensor::multi_indices(n, 4) {
        let (i, j, k, l) = (x[0], x[1], x[2], x[3]);
        worst = worst.max((rc[[i, j, k, l]] + r[[i, j, l, k]] + dchi[[i, j]] * g.h()[[k, l]]).abs());
    }
    Ok(worst)
}

/// `R_{ijkl} = R_{ijk}^p h_{pl}`.
pub fn lower_last(r: &DenseTensor, h: &DenseTensor) -> DenseTensor {
    let n = r.dim();
    DenseTensor::from_fn(n, &[L, L, L, L], |x| (0..n).map(|p| r[[x[0], x[1], x[2], p]] * h[[p, x[3]]]).sum())
}

pub fn einstein_ah_report(conn: &InvariantConnection, g: &FrameMetric) -> Result<EinsteinAhReport> {
    let d = ah_data(conn, g)?;
    let defect = d.ah_defect();
    if defect > PRE_TOL {
        return Err(Error::NotAH { defect });
    }
    let n = conn.dim();
    let nf = n as f64;
    let ric = conn.curvature().ric;
    let scalar = g.trace(&ric);
    let naive = |r: &DenseTensor| -> f64 {
        max_abs((0..n * n).map(|x| (x / n, x % n)).map(|(i, j)| 0.5 * (r[[i, j]] + r[[j, i]]) - scalar / nf * g.h()[[i, j]]))
    };
    let conj = ah_conjugate(conn, g)?;
    let cric = conj.curvature().ric;
    let dchi = conn.frame().d_oneform(&d.chi);
    let ndchi = cov_two_tensor(&conn.full(), &dchi);
    let gi = g.inv();
    let conservation = max_abs((0..n).map(|i| {
        let mut s = scalar * d.chi[i];
        for p in 0..n {
            for q in 0..n {
                s += 0.5 * nf * gi[[p, q]] * ndchi[[p, q, i]];
            }
        }
        s
    }));
    Ok(EinsteinAhReport {
        scalar,
        naive_defect: naive(&ric),
        conjugate_naive_defect: naive(&cric),
        conservation_defect: conservation,
        chi: d.chi,
    })
}

/// `max |R̄_{ijkl} + R_{ijlk}|` for a statistical pair, plus the scalar-curvature gap.
pub fn conjugate_curvature_defect(conn: &InvariantConnection, h: &FrameMetric) -> Result<(f64, f64)> {
    let rep = structure_report(conn, h, None)?;
    if rep.statistical_defect > PRE_TOL {
        return Err(Error::NotStatistical { defect: rep.statistical_defect });
    }
    let a = conn.full();
    let abar = conjugate_full(conn, h, ConjugateMode::Conjugate)?;
    let c = conn.frame().c();
    let r = curvature_tensor(c, &a);
    let rbar = curvature_tensor(c, &abar);
    let rl = lower_last(&r, h.h());
    let rbl = lower_last(&rbar, h.h());
    let n = conn.dim();
    let mut worst = 0.0f64;
    for x in crate::tensor::multi_indices(n, 4) {
        let (i, j, k, l) = (x[0], x[1], x[2], x[3]);
        worst = worst.max((rbl[[i, j, k, l]] + rl[[i, j, l, k]]).abs());
    }
    let gap = (h.trace(&ricci_of(&rbar)) - h.trace(&ricci_of(&r))).abs();
    Ok((worst, gap))
}

/// Special radiant statistical defects of `(∇̂, H)` plus `‖H^{AB}R̂_{IABJ}‖` and `‖R̂_{IJ}‖`.
pub fn conjugate_thomas_criterion(conn: &InvariantConnection, t_index: usize, hm: &FrameMetric) -> Result<ThomasCriterion> {
    let n = conn.dim();
    if t_index >= n {
        return Err(Error::ShapeMismatch("vertical index out of range".into()));
    }
    let t = crate::tensor::unit(n, t_index);
    let defect = conn.radiant_defect(&t);
    if defect > PRE_TOL {
        return Err(Error::NotRadiant { defect });
    }
    let rep = structure_report(conn, hm, Some(&t))?;
    let cd = conn.curvature();
    let rl = lower_last(&cd.r, hm.h());
    let hi = hm.inv();
    let mut crf = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for a in 0..n {
                for b in 0..n {
                    s += hi[[a, b]] * rl[[i, a, b, j]];
                }
            }
            crf = crf.max(s.abs());
        }
    }
    Ok(ThomasCriterion {
        statistical: rep.statistical_defect,
        special: rep.special_defect,
        self_similar: rep.self_similar_defect.unwrap_or(0.0),
        conjugate_ricci_flat: crf,
        ricci_flat: cd.ric.norm_inf(),
    })
}

fn uniform<R: Rng>(rng: &mut R, scale: f64) -> f64 {
    scale * (2.0 * rng.gen::<f64>() - 1.0)
}

fn random_sym_metric<R: Rng>(rng: &mut R, n: usize) -> FrameMetric {
    loop {
        let raw: Vec<f64> = (0..n * n).map(|_| uniform(rng, 1.0)).collect();
        let g = DenseTensor::matrix(n, [L, L], |i, j| {
            (if i == j { 1.0 } else { 0.0 }) + 0.05 * (raw[i * n + j] + raw[j * n + i])
        });
        let m = g.to_matrix();
        let sv = m.clone().singular_values();
        let cond = sv.max() / sv.min();
        if cond < 1e3 {
            if let Ok(fm) = FrameMetric::new(g) {
                return fm;
            }
        }
    }
}

fn random_sym3<R: Rng>(rng: &mut R, n: usize, scale: f64) -> DenseTensor {
    let raw: Vec<f64> = (0..n * n * n).map(|_| uniform(rng, scale)).collect();
    let raw = DenseTensor::from_data(n, &[L, L, L], raw).expect("n³ entries");
    DenseTensor::from_fn(n, &[L, L, L], |x| {
        let (i, j, k) = (x[0], x[1], x[2]);
        (raw[[i, j, k]] + raw[[j, k, i]] + raw[[k, i, j]] + raw[[j, i, k]] + raw[[i, k, j]] + raw[[k, j, i]]) / 6.0
    })
}

/// Flat abelian frame, `g = δ + 0.1·sym`, `A = g⁻¹L` with `L` totally symmetric in `[−0.3, 0.3]`.
pub fn random_statistical<R: Rng>(rng: &mut R, n: usize) -> (InvariantConnection, FrameMetric) {
    let frame = FrameAlgebra::preset(crate::lie::Preset::Abelian(n)).expect("n > 0");
    let g = random_sym_metric(rng, n);
    let l = random_sym3(rng, n, 0.3);
    let pi = g.raise_last(&l);
    (InvariantConnection::new(frame, pi).expect("symmetric"), g)
}

/// Levi-Civita of a random `g` on `frame`, plus a trace-free cubic term and a Weyl term.
pub fn random_ah<R: Rng>(rng: &mut R, frame: &FrameAlgebra) -> (InvariantConnection, FrameMetric) {
    let n = frame.dim();
    let g = random_sym_metric(rng, n);
    let lc = levi_civita(frame, g.h()).expect("nondegenerate");
    let l = random_sym3(rng, n, 0.3);
    let gi = g.inv();
    let tr: Vec<f64> = (0..n)
        .map(|k| (0..n * n).map(|x| gi[[x / n, x % n]] * l[[x / n, x % n, k]]).sum::<f64>() / (n as f64 + 2.0))
        .collect();
    let gh = g.h().clone();
    let l0 = DenseTensor::from_fn(n, &[L, L, L], |x| {
        let (i, j, k) = (x[0], x[1], x[2]);
        l[[i, j, k]] - gh[[i, j]] * tr[k] - gh[[j, k]] * tr[i] - gh[[k, i]] * tr[j]
    });
    let gamma: Vec<f64> = (0..n).map(|_| uniform(rng, 0.3)).collect();
    let gup = crate::tensor::mat_vec(gi, &gamma);
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let weyl = DenseTensor::from_fn(n, &[L, L, U], |x| {
        let (i, j, k) = (x[0], x[1], x[2]);
        gamma[i] * d(j, k) + gamma[j] * d(i, k) - gh[[i, j]] * gup[k]
    });
    let pi = lc.pi() + &g.raise_last(&l0) + weyl;
    (InvariantConnection::new(frame.clone(), pi).expect("symmetric"), g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn levi_civita_is_self_conjugate() {
        let f = FrameAlgebra::preset(crate::lie::Preset::QaIm(-1.0, -1.0)).unwrap();
        let g = FrameMetric::new(DenseTensor::matrix(3, [L, L], |i, j| if i == j { [1.0, 4.0, 4.0][i] } else { 0.0 })).unwrap();
        let lc = levi_civita(&f, g.h()).unwrap();
        let c = conjugate_or_opposite(&lc, &g, ConjugateMode::Conjugate).unwrap();
        assert!(crate::tensor::max_abs_diff(c.pi(), lc.pi()).unwrap() < 1e-14);
    }

    #[test]
    fn random_statistical_is_statistical() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let (c, g) = random_statistical(&mut rng, 3);
        let rep = structure_report(&c, &g, None).unwrap();
        assert!(rep.statistical_defect < 1e-14);
    }

    #[test]
    fn random_ah_has_trace_free_cubic() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let f = FrameAlgebra::preset(crate::lie::Preset::QaIm(-1.0, 1.0)).unwrap();
        let (c, g) = random_ah(&mut rng, &f);
        let d = ah_data(&c, &g).unwrap();
        assert!(d.ah_defect() < 1e-13);
        assert!(d.cubic_trace_defect < 1e-13);
        assert!(d.cubic_symmetry_defect < 1e-13);
    }

    #[test]
    fn flat_constant_metric_has_no_defects() {
        let f = FrameAlgebra::preset(crate::lie::Preset::Abelian(3)).unwrap();
        let c = InvariantConnection::flat(f);
        let g = FrameMetric::new(DenseTensor::delta(3).with_variance(&[L, L])).unwrap();
        let rep = structure_report(&c, &g, None).unwrap();
        assert_eq!((rep.statistical_defect, rep.special_defect), (0.0, 0.0));
    }
}
