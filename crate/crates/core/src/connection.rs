//! Left-invariant torsion-free connections `A = Π + ½c` on a frame algebra.
//!
//! `A[i][j][k]` is the `e_k` component of `∇_{e_i} e_j`. Curvature follows
//! `R(e_i, e_j)e_k = A(i, A(j, k)) − A(j, A(i, k)) − A([e_i, e_j], k)`
//! and the Ricci tensor is `R_{jk} = R_{pjk}^p`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::lie::FrameAlgebra;
use crate::tensor::{eval2, sym2_inverse, DenseTensor, L, U};

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantConnection {
    frame: FrameAlgebra,
    pi: DenseTensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureData {
    /// `R_{ijk}^l`.
    pub r: DenseTensor,
    pub ric: DenseTensor,
    pub rho: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConelikeSolution {
    pub q: DenseTensor,
    /// ℓ∞ residual of the curvature equation.
    pub residual: f64,
    /// `max |n Q(t,·) − ρ|`.
    pub rho_defect: f64,
    /// `|Q(t,t)|`.
    pub qtt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveTensors {
    pub p: DenseTensor,
    pub b: DenseTensor,
    pub c: DenseTensor,
}

/// Which symmetric form seeds [`build_cone`].
#[derive(Debug, Clone, PartialEq)]
pub enum ConeForm {
    Killing,
    Form(DenseTensor),
}

/// Curvature of full coefficients `a` over structure constants `c`.
pub fn curvature_tensor(c: &DenseTensor, a: &DenseTensor) -> DenseTensor {
    let n = a.dim();
    let mut r = DenseTensor::zeros(n, &[L, L, L, U]);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut s = 0.0;
                    for p in 0..n {
                        s += a[[j, k, p]] * a[[i, p, l]] - a[[i, k, p]] * a[[j, p, l]] - c[[i, j, p]] * a[[p, k, l]];
                    }
                    r[[i, j, k, l]] = s;
                }
            }
        }
    }
    r
}

/// `R_{jk} = R_{pjk}^p`.
pub fn ricci_of(r: &DenseTensor) -> DenseTensor {
    let n = r.dim();
    DenseTensor::matrix(n, [L, L], |j, k| (0..n).map(|p| r[[p, j, k, p]]).sum())
}

/// `(∇θ)_{ij} = −A_{ij}^p θ_p` for constant components.
pub fn cov_covector(a: &DenseTensor, theta: &[f64]) -> DenseTensor {
    let n = a.dim();
    DenseTensor::matrix(n, [L, L], |i, j| -(0..n).map(|p| a[[i, j, p]] * theta[p]).sum::<f64>())
}

/// `(∇h)_{ijk} = −A_{ij}^p h_{pk} − A_{ik}^p h_{jp}` for any covariant 2-tensor.
pub fn cov_two_tensor(a: &DenseTensor, h: &DenseTensor) -> DenseTensor {
    let n = a.dim();
    DenseTensor::from_fn(n, &[L, L, L], |x| {
        let (i, j, k) = (x[0], x[1], x[2]);
        let mut s = 0.0;
        for p in 0..n {
            s -= a[[i, j, p]] * h[[p, k]] + a[[i, k, p]] * h[[j, p]];
        }
        s
    })
}

/// `(∇_i X)^j = A_{ip}^j X^p` for constant components.
pub fn cov_vector(a: &DenseTensor, x: &[f64]) -> DenseTensor {
    let n = a.dim();
    DenseTensor::matrix(n, [L, U], |i, j| (0..n).map(|p| a[[i, p, j]] * x[p]).sum())
}

/// Covariant derivative of a constant-component tensor of any variance; the derivative slot comes first.
pub fn cov_tensor(a: &DenseTensor, t: &DenseTensor) -> DenseTensor {
    let n = a.dim();
    let mut var = vec![L];
    var.extend_from_slice(t.variance());
    DenseTensor::from_fn(n, &var, |x| {
        let i = x[0];
        let mut j = x[1..].to_vec();
        let mut s = 0.0;
        for (slot, v) in t.variance().iter().enumerate() {
            let orig = j[slot];
            for p in 0..n {
                j[slot] = p;
                s += match v {
                    crate::tensor::Variance::Lower => -a[[i, orig, p]] * t.get(&j),
                    crate::tensor::Variance::Upper => a[[i, p, orig]] * t.get(&j),
                };
            }
            j[slot] = orig;
        }
        s
    })
}

/// `∇_p T_{..}^p` for a tensor whose last slot is upper.
pub fn divergence(a: &DenseTensor, t: &DenseTensor) -> DenseTensor {
    let n = a.dim();
    let nt = cov_tensor(a, t);
    let r = t.rank();
    DenseTensor::from_fn(n, &t.variance()[..r - 1], |x| {
        let mut j = vec![0; r + 1];
        j[1..r].copy_from_slice(x);
        (0..n)
            .map(|p| {
                j[0] = p;
                j[r] = p;
                nt.get(&j)
            })
            .sum()
    })
}

/// `B_{ijk}^l = R_{ijk}^l + δ_i^l P_{jk} − δ_j^l P_{ik} − 2δ_k^l P_{[ij]}`.
pub fn projective_weyl(r: &DenseTensor, p: &DenseTensor) -> DenseTensor {
    let n = r.dim();
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    DenseTensor::from_fn(n, &[L, L, L, U], |x| {
        let (i, j, k, l) = (x[0], x[1], x[2], x[3]);
        r[[i, j, k, l]] + d(i, l) * p[[j, k]] - d(j, l) * p[[i, k]] - d(k, l) * (p[[i, j]] - p[[j, i]])
    })
}

/// `P = (1/(1−n)) R_{(ij)} − (1/(n+1)) R_{[ij]}`.
pub fn schouten_of(ric: &DenseTensor) -> DenseTensor {
    let n = ric.dim() as f64;
    DenseTensor::matrix(ric.dim(), [L, L], |i, j| {
        let s = 0.5 * (ric[[i, j]] + ric[[j, i]]);
        let a = 0.5 * (ric[[i, j]] - ric[[j, i]]);
        s / (1.0 - n) - a / (n + 1.0)
    })
}

fn check_dims(frame: &FrameAlgebra, t: &DenseTensor) -> Result<()> {
    if t.dim() != frame.dim() || t.rank() != 3 {
        return Err(Error::ShapeMismatch(format!(
            "coefficients must be {0}×{0}×{0} to match the frame",
            frame.dim()
        )));
    }
    Ok(())
}

impl InvariantConnection {
    /// `Π` must be symmetric in its lower pair; deviations up to `1e-12·max|Π|` are
    /// averaged away, larger ones are rejected.
    pub fn new(frame: FrameAlgebra, pi: DenseTensor) -> Result<Self> {
        check_dims(&frame, &pi)?;
        if !pi.is_finite() {
            return Err(Error::Validation("Π has non-finite entries".into()));
        }
        let n = frame.dim();
        let tol = 1e-12 * pi.norm_inf().max(1.0);
        let mut pi = pi.with_variance(&[L, L, U]);
        for i in 0..n {
            for j in 0..i {
                for k in 0..n {
                    let (a, b) = (pi[[i, j, k]], pi[[j, i, k]]);
                    if (a - b).abs() > tol {
                        return Err(Error::Validation(format!(
                            "Π not symmetric: Π[{i}][{j}][{k}] = {a}, Π[{j}][{i}][{k}] = {b}"
                        )));
                    }
                    let m = 0.5 * (a + b);
                    pi[[i, j, k]] = m;
                    pi[[j, i, k]] = m;
                }
            }
        }
        Ok(InvariantConnection { frame, pi })
    }

    /// From full coefficients `A`; the torsion `A_{ij} − A_{ji} − c_{ij}` must vanish to `tol`.
    pub fn from_full(frame: FrameAlgebra, a: &DenseTensor, tol: f64) -> Result<Self> {
        check_dims(&frame, a)?;
        let tors = (a - &a.swap(0, 1)) - frame.c().clone();
        if tors.norm_inf() > tol {
            return Err(Error::Validation(format!("connection has torsion {:e}", tors.norm_inf())));
        }
        let pi = a - &frame.c().scale(0.5);
        Self::new(frame, crate::tensor::sym_part_3(&pi))
    }

    pub fn flat(frame: FrameAlgebra) -> Self {
        let n = frame.dim();
        InvariantConnection { frame, pi: DenseTensor::zeros(n, &[L, L, U]) }
    }

    pub fn frame(&self) -> &FrameAlgebra {
        &self.frame
    }

    pub fn pi(&self) -> &DenseTensor {
        &self.pi
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    /// `A = Π + ½c`.
    pub fn full(&self) -> DenseTensor {
        &self.pi + &self.frame.c().scale(0.5)
    }

    /// `∇_x y` for constant-component vectors.
    pub fn apply(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        crate::tensor::eval3(&self.full(), x, y)
    }

    /// Adds a symmetric difference tensor.
    pub fn shifted(&self, delta: &DenseTensor) -> Result<Self> {
        Self::new(self.frame.clone(), &self.pi + delta)
    }

    pub fn curvature(&self) -> CurvatureData {
        let r = curvature_tensor(self.frame.c(), &self.full());
        let ric = ricci_of(&r);
        CurvatureData { r, ric, rho: None }
    }

    /// Ricci tensor and `ρ_i = t^p R_{pi}`.
    pub fn ricci_rho(&self, t: &[f64]) -> (DenseTensor, Vec<f64>) {
        let ric = self.curvature().ric;
        let rho = crate::tensor::vec_mat(t, &ric);
        (ric, rho)
    }

    pub fn curvature_with_rho(&self, t: &[f64]) -> CurvatureData {
        let mut cd = self.curvature();
        cd.rho = Some(crate::tensor::vec_mat(t, &cd.ric));
        cd
    }

    /// Ricci tensor from the contraction-free formula in `Π`, `c`, `ℓ` and the Killing form.
    pub fn ricci_closed_form(&self) -> DenseTensor {
        let n = self.dim();
        let (pi, c) = (&self.pi, self.frame.c());
        let ell = self.frame.trace_form();
        let b = self.frame.killing_form();
        let tr: Vec<f64> = (0..n).map(|p| (0..n).map(|q| pi[[p, q, q]]).sum()).collect();
        let x = DenseTensor::matrix(n, [L, L], |j, k| {
            let mut s = 0.0;
            for p in 0..n {
                for q in 0..n {
                    s += c[[p, j, q]] * pi[[k, q, p]];
                }
            }
            s
        });
        DenseTensor::matrix(n, [L, L], |j, k| {
            let mut sym = -0.25 * b[[j, k]] - 0.5 * (x[[j, k]] + x[[k, j]]);
            let mut skew = 0.0;
            for p in 0..n {
                sym += tr[p] * pi[[j, k, p]] - 0.5 * ell[p] * pi[[j, k, p]];
                skew += 0.5 * c[[j, k, p]] * tr[p];
                for q in 0..n {
                    sym -= pi[[j, p, q]] * pi[[k, q, p]];
                }
            }
            sym + skew
        })
    }

    /// `max_i |∇_{e_i} t − e_i|`.
    pub fn radiant_defect(&self, t: &[f64]) -> f64 {
        let n = self.dim();
        let a = self.full();
        let mut worst = 0.0f64;
        for i in 0..n {
            for k in 0..n {
                let v: f64 = (0..n).map(|j| a[[i, j, k]] * t[j]).sum();
                let want = if i == k { 1.0 } else { 0.0 };
                worst = worst.max((v - want).abs());
            }
        }
        worst
    }

    /// `max |R_{[ijk]}^l|`.
    pub fn bianchi_defect(&self) -> f64 {
        let r = self.curvature().r;
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let s = r[[i, j, k, l]] + r[[j, k, i, l]] + r[[k, i, j, l]];
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// `max(|t^p R_{ijp}^k|, |t^p R_{ip}|)`, zero for radiant structures.
    pub fn radiant_identity_defect(&self, t: &[f64]) -> f64 {
        let cd = self.curvature();
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let s: f64 = (0..n).map(|p| t[p] * cd.r[[i, j, p, k]]).sum();
                    worst = worst.max(s.abs());
                }
            }
            let s: f64 = (0..n).map(|p| t[p] * cd.ric[[i, p]]).sum();
            worst = worst.max(s.abs());
        }
        worst
    }

    /// `max |t^p R_{pij}^k|`: the failure of `t`-invariance.
    pub fn vertical_curvature_defect(&self, t: &[f64]) -> f64 {
        let r = self.curvature().r;
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let s: f64 = (0..n).map(|p| t[p] * r[[p, i, j, k]]).sum();
                    worst = worst.max(s.abs());
                }
            }
        }
        worst
    }

    /// Least-squares `Q` with `t^p R_{pij}^k = Q_{ij}t^k − Q(t,e_i)δ_j^k − Q(t,e_j)δ_i^k`.
    pub fn conelike_solve(&self, t: &[f64]) -> Result<ConelikeSolution> {
        let defect = self.radiant_defect(t);
        if defect > 1e-9 {
            return Err(Error::NotRadiant { defect });
        }
        let n = self.dim();
        let cd = self.curvature();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect();
        let m = pairs.len();
        let rows = n * n * n;
        let mut mat = DMatrix::<f64>::zeros(rows, m);
        let mut rhs = DVector::<f64>::zeros(rows);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let row = (i * n + j) * n + k;
                    rhs[row] = (0..n).map(|p| t[p] * cd.r[[p, i, j, k]]).sum();
                    for (col, &(a, b)) in pairs.iter().enumerate() {
                        // coefficient of Q_ab (= Q_ba) in the right-hand side
                        let q = |x: usize, y: usize| if (x, y) == (a, b) || (y, x) == (a, b) { 1.0 } else { 0.0 };
                        let mut v = q(i, j) * t[k];
                        if j == k {
                            v -= (0..n).map(|p| t[p] * q(p, i)).sum::<f64>();
                        }
                        if i == k {
                            v -= (0..n).map(|p| t[p] * q(p, j)).sum::<f64>();
                        }
                        mat[(row, col)] = v;
                    }
                }
            }
        }
        let svd = mat.clone().svd(true, true);
        let x = svd
            .solve(&rhs, 1e-12)
            .map_err(|e| Error::PreconditionFailed(format!("least squares failed: {e}")))?;
        let residual = (&mat * &x - &rhs).amax();
        let mut q = DenseTensor::zeros(n, &[L, L]);
        for (col, &(a, b)) in pairs.iter().enumerate() {
            q[[a, b]] = x[col];
            q[[b, a]] = x[col];
        }
        let rho = crate::tensor::vec_mat(t, &cd.ric);
        let qt = crate::tensor::vec_mat(t, &q);
        let rho_defect = qt.iter().zip(&rho).fold(0.0f64, |m, (a, r)| m.max((n as f64 * a - r).abs()));
        let qtt = eval2(&q, t, t).abs();
        Ok(ConelikeSolution { q, residual, rho_defect, qtt })
    }

    /// The unique `t`-invariant conelike connection with antisymmetric Ricci tensor
    /// having the same planes and density connection.
    pub fn normalize_antisym_ricci(&self, t: &[f64]) -> Result<Self> {
        let n = self.dim();
        if n < 3 {
            return Err(Error::DimensionTooSmall { dim: n });
        }
        let sol = self.conelike_solve(t)?;
        if sol.residual > 1e-9 {
            return Err(Error::NotConelike { residual: sol.residual });
        }
        let (ric, rho) = self.ricci_rho(t);
        let defect = rho.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if defect > 1e-9 {
            return Err(Error::RhoNonzero { defect });
        }
        let qn = DenseTensor::matrix(n, [L, L], |i, j| {
            (sol.q[[i, j]] - 0.5 * (ric[[i, j]] + ric[[j, i]])) / (n as f64 - 2.0)
        });
        self.shifted(&qn.outer(&DenseTensor::vector(t)))
    }

    /// `Π ↦ Π + Q_{ij}t^k − q_iδ_j^k − q_jδ_i^k` with `q = Q(t,·)`.
    pub fn apply_cone_shift(&self, t: &[f64], q: &DenseTensor) -> Result<Self> {
        let n = self.dim();
        let qtt = eval2(q, t, t);
        if qtt.abs() > 1e-12 * q.norm_inf().max(1.0) {
            return Err(Error::ConstraintViolated(format!("Q(t,t) = {qtt:e}")));
        }
        let qs = crate::tensor::sym_part(q);
        let qt = crate::tensor::vec_mat(t, &qs);
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let delta = DenseTensor::from_fn(n, &[L, L, U], |x| {
            let (i, j, k) = (x[0], x[1], x[2]);
            qs[[i, j]] * t[k] - qt[i] * d(j, k) - qt[j] * d(i, k)
        });
        self.shifted(&delta)
    }

    /// `L_t Q + (n−2)(Q + ∇q + q⊗q) + dq`: the predicted Ricci change of [`Self::apply_cone_shift`].
    pub fn cone_shift_ricci_change(&self, t: &[f64], q: &DenseTensor) -> Result<DenseTensor> {
        let n = self.dim();
        let qs = crate::tensor::sym_part(q);
        let qt = crate::tensor::vec_mat(t, &qs);
        let lq = self.frame.lie_derivative(t, &qs)?;
        let nq = cov_covector(&self.full(), &qt);
        let dq = self.frame.d_oneform(&qt);
        Ok(DenseTensor::matrix(n, [L, L], |i, j| {
            lq[[i, j]] + (n as f64 - 2.0) * (qs[[i, j]] + nq[[i, j]] + qt[i] * qt[j]) + dq[[i, j]]
        }))
    }

    /// Projective Schouten, Weyl and Cotton tensors.
    pub fn projective_tensors(&self) -> Result<ProjectiveTensors> {
        let n = self.dim();
        if n < 2 {
            return Err(Error::DimensionTooSmall { dim: n });
        }
        let cd = self.curvature();
        let p = schouten_of(&cd.ric);
        let b = projective_weyl(&cd.r, &p);
        let np = cov_two_tensor(&self.full(), &p);
        let c = DenseTensor::from_fn(n, &[L, L, L], |x| np[[x[0], x[1], x[2]]] - np[[x[1], x[0], x[2]]]);
        Ok(ProjectiveTensors { p, b, c })
    }

    /// Components in the basis given by the columns of `m`.
    pub fn change_basis(&self, m: &DMatrix<f64>) -> Result<Self> {
        let frame = self.frame.change_basis(m)?;
        let pi = self.pi.change_basis(m)?;
        Self::new(frame, pi)
    }
}

/// The radiant, conelike connection with `ρ = 0` attached to a `t`-invariant form `k`
/// with `k(t,t) ≠ 0`.
pub fn build_cone(frame: &FrameAlgebra, form: &ConeForm, t: &[f64]) -> Result<InvariantConnection> {
    let n = frame.dim();
    if n < 3 {
        return Err(Error::DimensionTooSmall { dim: n });
    }
    if t.len() != n {
        return Err(Error::ShapeMismatch("t has the wrong length".into()));
    }
    let bk = frame.killing_form();
    let k = match form {
        ConeForm::Killing => bk.clone(),
        ConeForm::Form(k) => {
            if k.dim() != n || k.rank() != 2 {
                return Err(Error::ShapeMismatch("k must be n×n".into()));
            }
            k.clone()
        }
    };
    let ktt = eval2(&k, t, t);
    if ktt.abs() <= 1e-12 * k.norm_inf().max(1.0) {
        return Err(Error::NullDirection { value: ktt });
    }
    let inv = frame.invariance_defect(&k, Some(t)).along_t.unwrap_or(0.0);
    if inv > 1e-10 {
        return Err(Error::PreconditionFailed(format!("k is not ad(t)-invariant (defect {inv:e})")));
    }
    let h = k.scale(1.0 / ktt);
    let ht = crate::tensor::vec_mat(t, &h);
    let bt = crate::tensor::vec_mat(t, &bk);
    let btt = eval2(&bk, t, t);
    let adt = frame.ad(t);
    let tr = |r: usize| -> Vec<f64> { (0..n).map(|k| adt[(k, r)]).collect() };
    let mut pi = DenseTensor::zeros(n, &[L, L, U]);
    let w = 1.0 / (4.0 * (n as f64 - 2.0));
    for r in 0..n {
        for s in 0..n {
            let (trr, tss) = (tr(r), tr(s));
            let sc = w
                * (bk[[r, s]] + btt * ht[r] * ht[s] - bt[r] * ht[s] - bt[s] * ht[r]
                    - 2.0 * eval2(&h, &trr, &tss));
            for x in 0..n {
                let mut v = -ht[r] * ht[s] * t[x] + 0.5 * ht[r] * tss[x] + 0.5 * ht[s] * trr[x] + sc * t[x];
                if x == s {
                    v += ht[r];
                }
                if x == r {
                    v += ht[s];
                }
                pi[[r, s, x]] = v;
            }
        }
    }
    InvariantConnection::new(frame.clone(), pi)
}

/// `ric(r, s) = ((2n + ℓ(t))/4)·h(t, [r, s])` with `h = k/k(t,t)`.
pub fn cone_ricci_prediction(frame: &FrameAlgebra, k: &DenseTensor, t: &[f64]) -> DenseTensor {
    let n = frame.dim();
    let ktt = eval2(k, t, t);
    let ell: f64 = crate::tensor::dot(&frame.trace_form(), t);
    let ht: Vec<f64> = crate::tensor::vec_mat(t, k).iter().map(|x| x / ktt).collect();
    let c = frame.c();
    DenseTensor::matrix(n, [L, L], |r, s| {
        let v: f64 = (0..n).map(|p| ht[p] * c[[r, s, p]]).sum();
        (2.0 * n as f64 + ell) / 4.0 * v
    })
}

/// The table of `∇_{E_i}E_j` on `Im qaf[α₁, α₂]` with `t = κ⁻¹e₁`.
pub fn qacone_preset(a1: f64, a2: f64, kappa: f64) -> Result<InvariantConnection> {
    if kappa == 0.0 || !kappa.is_finite() {
        return Err(Error::InvalidParams("κ must be finite and nonzero".into()));
    }
    if a1 == 0.0 {
        return Err(Error::NullDirection { value: 0.0 });
    }
    let frame = crate::lie::FrameAlgebra::preset(crate::lie::Preset::QaIm(a1, a2))?;
    let mut a = DenseTensor::zeros(3, &[L, L, U]);
    let ik = 1.0 / kappa;
    a[[0, 0, 0]] = kappa;
    a[[1, 0, 1]] = kappa;
    a[[2, 0, 2]] = kappa;
    a[[0, 1, 1]] = kappa;
    a[[0, 1, 2]] = 2.0;
    a[[1, 1, 0]] = 4.0 * a2 * ik;
    a[[2, 1, 0]] = a2;
    a[[0, 2, 2]] = kappa;
    a[[0, 2, 1]] = 2.0 * a1;
    a[[1, 2, 0]] = -a2;
    a[[2, 2, 0]] = -4.0 * a1 * a2 * ik;
    InvariantConnection::from_full(frame, &a, 1e-12)
}

/// Levi-Civita connection of a nondegenerate constant-component metric `g`.
pub fn levi_civita(frame: &FrameAlgebra, g: &DenseTensor) -> Result<InvariantConnection> {
    let n = frame.dim();
    let gi = sym2_inverse(g)?;
    let c = frame.c();
    // g(U(X,Y), Z) = ½(g([Z,X],Y) + g(X,[Z,Y])); U is the symmetric part Π
    let low = DenseTensor::from_fn(n, &[L, L, L], |x| {
        let (i, j, z) = (x[0], x[1], x[2]);
        let mut s = 0.0;
        for p in 0..n {
            s += c[[z, i, p]] * g[[p, j]] + g[[i, p]] * c[[z, j, p]];
        }
        0.5 * s
    });
    let pi = DenseTensor::from_fn(n, &[L, L, U], |x| (0..n).map(|z| low[[x[0], x[1], z]] * gi[[z, x[2]]]).sum());
    InvariantConnection::new(frame.clone(), pi)
}

/// Random symmetric `Π` with entries of size `scale`.
pub fn random_symmetric_pi<R: Rng>(rng: &mut R, n: usize, scale: f64) -> DenseTensor {
    let data = (0..n * n * n).map(|_| scale * (2.0 * rng.gen::<f64>() - 1.0)).collect();
    let raw = DenseTensor::from_data(n, &[L, L, U], data).expect("n³ entries");
    crate::tensor::sym_part_3(&raw)
}

/// Random symmetric `Q` with `Q(t, ·) = 0`, obtained by projecting along `t`.
pub fn random_annihilating_q<R: Rng>(rng: &mut R, t: &[f64], scale: f64) -> DenseTensor {
    let n = t.len();
    let data = (0..n * n).map(|_| scale * (2.0 * rng.gen::<f64>() - 1.0)).collect();
    let raw = DenseTensor::from_data(n, &[L, L], data).expect("n² entries");
    let s = crate::tensor::sym_part(&raw);
    // P = I − t⊗t/|t|², Q = PᵀSP annihilates t
    let tt = crate::tensor::dot(t, t);
    let proj = DMatrix::from_fn(n, n, |i, j| (if i == j { 1.0 } else { 0.0 }) - t[i] * t[j] / tt);
    let m = proj.transpose() * s.to_matrix() * &proj;
    DenseTensor::from_matrix(&m, [L, L])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::Preset;
    use crate::tensor::max_abs_diff;

    #[test]
    fn qacone_table_values() {
        let c = qacone_preset(-1.0, -1.0, 1.0).unwrap();
        assert_eq!(c.apply(&[0.0, 1.0, 0.0], &[0.0, 1.0, 0.0]), vec![-4.0, 0.0, 0.0]);
        assert_eq!(c.apply(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]), vec![0.0, 1.0, 2.0]);
        assert!(matches!(qacone_preset(0.0, 0.0, 1.0), Err(Error::NullDirection { .. })));
    }

    #[test]
    fn qacone_curvature_entry() {
        let c = qacone_preset(-1.0, -1.0, 1.0).unwrap();
        let r = c.curvature().r;
        // R(E₂,E₃)E₂ = 3α₂κ·E₂, consistent with ric(E₂,E₃) = R_{p23}^p = −3α₂κ
        assert!((r[[1, 2, 1, 1]] + 3.0).abs() < 1e-14);
        assert!((r[[1, 2, 2, 2]] + 3.0).abs() < 1e-14);
        assert!((c.curvature().ric[[1, 2]] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn sl2_triple() {
        let f = FrameAlgebra::from_brackets(3, &[(0, 1, 1, 2.0), (0, 2, 2, -2.0), (1, 2, 0, 1.0)]);
        let c = build_cone(&f, &ConeForm::Killing, &[1.0, 0.0, 0.0]).unwrap();
        assert!((c.curvature().ric[[1, 2]] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn heisenberg_cone_pi() {
        let f = FrameAlgebra::preset(Preset::Heis(3)).unwrap();
        let theta = DenseTensor::covector(&[0.0, 0.0, 1.0]);
        let k = theta.outer(&theta);
        let c = build_cone(&f, &ConeForm::Form(k), &[0.0, 0.0, 1.0]).unwrap();
        let d = DenseTensor::delta(3);
        let z = DenseTensor::vector(&[0.0, 0.0, 1.0]);
        let want = theta.outer(&d) + theta.outer(&d).swap(0, 1) - theta.outer(&theta).outer(&z);
        assert!(max_abs_diff(c.pi(), &want).unwrap() < 1e-15);
    }

    #[test]
    fn closed_form_ricci_matches_on_aff1c() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let f = FrameAlgebra::preset(Preset::Aff1c).unwrap();
        let c = InvariantConnection::new(f, random_symmetric_pi(&mut rng, 4, 1.0)).unwrap();
        assert!(max_abs_diff(&c.curvature().ric, &c.ricci_closed_form()).unwrap() < 1e-12);
    }

    #[test]
    fn levi_civita_is_metric() {
        let f = FrameAlgebra::preset(Preset::QaIm(-1.0, 1.0)).unwrap();
        let g = DenseTensor::matrix(3, [L, L], |i, j| if i == j { [1.0, 2.0, -3.0][i] } else { 0.1 });
        let lc = levi_civita(&f, &g).unwrap();
        assert!(cov_two_tensor(&lc.full(), &g).norm_inf() < 1e-14);
    }

    #[test]
    fn two_dimensional_normalization_refused() {
        let f = FrameAlgebra::preset(Preset::Abelian(2)).unwrap();
        let c = InvariantConnection::flat(f);
        assert_eq!(c.normalize_antisym_ricci(&[1.0, 0.0]), Err(Error::DimensionTooSmall { dim: 2 }));
    }
}
