//! Frame algebras: constant structure coefficients `c_{ij}^k` with
//! `[e_i, e_j] = c_{ij}^k e_k`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{DenseTensor, L, U};

#[derive(Debug, Clone, PartialEq)]
pub struct FrameAlgebra {
    c: DenseTensor,
    name: Option<String>,
}

/// On-disk form: `{"dim": n, "c": [[[..]]], "name": ".."}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameAlgebraDoc {
    pub dim: usize,
    pub c: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    /// Imaginary part of `qaf[α₁, α₂]`: `[e₁,e₂]=2e₃, [e₂,e₃]=−2α₂e₁, [e₃,e₁]=−2α₁e₂`.
    QaIm(f64, f64),
    /// Heisenberg algebra of dimension `2m+1`, center last, `[E_i, E_{m+i}] = Z`.
    Heis(usize),
    /// Affine transformations of the complex line, real basis `{1, i} ⊕ {1, i}`.
    Aff1c,
    Abelian(usize),
    /// Basis `{t, a, b}` with `[t,a]=2b, [t,b]=¼B_tt·a, [a,b]=ε·t`.
    Unibasis { eps: f64, btt: f64 },
}

/// Invariance defects of a symmetric form under `ad`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvarianceDefect {
    pub full: f64,
    pub along_t: Option<f64>,
}

impl FrameAlgebra {
    /// Validates antisymmetry exactly and Jacobi to 1e-10.
    pub fn new(c: DenseTensor) -> Result<Self> {
        let f = Self::new_unchecked(c)?;
        f.validate()?;
        Ok(f)
    }

    pub fn new_unchecked(c: DenseTensor) -> Result<Self> {
        if c.rank() != 3 {
            return Err(Error::ShapeMismatch("structure tensor must have rank 3".into()));
        }
        Ok(FrameAlgebra { c: c.with_variance(&[L, L, U]), name: None })
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.c[[i, j, k]] != -self.c[[j, i, k]] {
                        return Err(Error::Validation(format!(
                            "c[{i}][{j}][{k}] = {} but c[{j}][{i}][{k}] = {}",
                            self.c[[i, j, k]],
                            self.c[[j, i, k]]
                        )));
                    }
                }
            }
        }
        let jd = self.jacobi_defect();
        if jd > 1e-10 {
            return Err(Error::Validation(format!("Jacobi defect {jd:e}")));
        }
        Ok(())
    }

    /// Builds `c` from a list of brackets `[e_i, e_j] ∋ v·e_k`; antisymmetry is filled in.
    pub fn from_brackets(dim: usize, entries: &[(usize, usize, usize, f64)]) -> Self {
        let mut c = DenseTensor::zeros(dim, &[L, L, U]);
        for &(i, j, k, v) in entries {
            c[[i, j, k]] += v;
            c[[j, i, k]] -= v;
        }
        FrameAlgebra { c, name: None }
    }

    pub fn preset(p: Preset) -> Result<Self> {
        let (f, name) = match p {
            Preset::QaIm(a1, a2) => {
                if !a1.is_finite() || !a2.is_finite() {
                    return Err(Error::InvalidParams("non-finite α".into()));
                }
                let f = Self::from_brackets(3, &[(0, 1, 2, 2.0), (1, 2, 0, -2.0 * a2), (2, 0, 1, -2.0 * a1)]);
                (f, format!("qa-im({a1},{a2})"))
            }
            Preset::Heis(d) => {
                if d < 3 || d % 2 == 0 {
                    return Err(Error::InvalidParams(format!("heis dimension {d} must be odd and ≥ 3")));
                }
                let m = (d - 1) / 2;
                let br: Vec<_> = (0..m).map(|i| (i, m + i, d - 1, 1.0)).collect();
                (Self::from_brackets(d, &br), format!("heis({d})"))
            }
            Preset::Aff1c => {
                let f = Self::from_brackets(4, &[(0, 2, 2, 1.0), (0, 3, 3, 1.0), (1, 2, 3, 1.0), (1, 3, 2, -1.0)]);
                (f, "aff1c".to_string())
            }
            Preset::Abelian(n) => {
                if n == 0 {
                    return Err(Error::InvalidParams("abelian dimension must be positive".into()));
                }
                (Self::from_brackets(n, &[]), format!("abelian({n})"))
            }
            Preset::Unibasis { eps, btt } => {
                let f = Self::from_brackets(3, &[(0, 1, 2, 2.0), (0, 2, 1, 0.25 * btt), (1, 2, 0, eps)]);
                (f, format!("unibasis({eps},{btt})"))
            }
        };
        Ok(f.named(name))
    }

    /// Parses `qa-im(a,b)`, `heis(d)`, `aff1c`, `abelian(n)`, `unibasis(eps,btt)`.
    pub fn preset_by_name(spec: &str) -> Result<Self> {
        let s: String = spec.chars().filter(|c| !c.is_whitespace()).collect();
        let (head, args) = match s.find('(') {
            Some(p) if s.ends_with(')') => (&s[..p], &s[p + 1..s.len() - 1]),
            _ => (s.as_str(), ""),
        };
        let nums = || -> Result<Vec<f64>> {
            args.split(',')
                .filter(|a| !a.is_empty())
                .map(|a| a.parse::<f64>().map_err(|_| Error::InvalidParams(format!("bad number `{a}`"))))
                .collect()
        };
        let want = |v: &Vec<f64>, k: usize| -> Result<()> {
            if v.len() != k {
                return Err(Error::InvalidParams(format!("`{head}` takes {k} parameters")));
            }
            Ok(())
        };
        let as_usize = |x: f64| -> Result<usize> {
            if x >= 0.0 && x.fract() == 0.0 {
                Ok(x as usize)
            } else {
                Err(Error::InvalidParams(format!("`{x}` is not a dimension")))
            }
        };
        match head {
            "qa-im" | "qaim" => {
                let v = nums()?;
                want(&v, 2)?;
                Self::preset(Preset::QaIm(v[0], v[1]))
            }
            "heis" => {
                let v = nums()?;
                want(&v, 1)?;
                Self::preset(Preset::Heis(as_usize(v[0])?))
            }
            "aff1c" => Self::preset(Preset::Aff1c),
            "abelian" => {
                let v = nums()?;
                want(&v, 1)?;
                Self::preset(Preset::Abelian(as_usize(v[0])?))
            }
            "unibasis" => {
                let v = nums()?;
                want(&v, 2)?;
                Self::preset(Preset::Unibasis { eps: v[0], btt: v[1] })
            }
            _ => Err(Error::UnknownPreset(spec.to_string())),
        }
    }

    pub fn from_doc(doc: &FrameAlgebraDoc) -> Result<Self> {
        let n = doc.dim;
        if doc.c.len() != n || doc.c.iter().any(|r| r.len() != n || r.iter().any(|s| s.len() != n)) {
            return Err(Error::Validation(format!("c must be {n}×{n}×{n}")));
        }
        let c = DenseTensor::from_fn(n, &[L, L, U], |i| doc.c[i[0]][i[1]][i[2]]);
        if !c.is_finite() {
            return Err(Error::Validation("c has non-finite entries".into()));
        }
        let mut f = Self::new(c)?;
        f.name = doc.name.clone();
        Ok(f)
    }

    pub fn to_doc(&self) -> FrameAlgebraDoc {
        let n = self.dim();
        FrameAlgebraDoc {
            dim: n,
            c: (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| self.c[[i, j, k]]).collect()).collect()).collect(),
            name: self.name.clone(),
        }
    }

    /// Structure constants in the basis given by the columns of `m`.
    pub fn change_basis(&self, m: &DMatrix<f64>) -> Result<Self> {
        let c = self.c.change_basis(m)?;
        Ok(FrameAlgebra { c, name: self.name.clone() })
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.c.dim()
    }

    pub fn c(&self) -> &DenseTensor {
        &self.c
    }

    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        crate::tensor::eval3(&self.c, x, y)
    }

    /// `ad(x)` as a column-convention matrix: `ad(x)·v = [x, v]`.
    pub fn ad(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |k, j| (0..n).map(|i| x[i] * self.c[[i, j, k]]).sum())
    }

    pub fn jacobi_defect(&self) -> f64 {
        let n = self.dim();
        let c = &self.c;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut s = 0.0;
                        for p in 0..n {
                            s += c[[i, j, p]] * c[[p, k, l]] + c[[j, k, p]] * c[[p, i, l]] + c[[k, i, p]] * c[[p, j, l]];
                        }
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// `B_{ij} = c_{ip}^q c_{jq}^p`.
    pub fn killing_form(&self) -> DenseTensor {
        let n = self.dim();
        let c = &self.c;
        let mut b = DenseTensor::matrix(n, [L, L], |i, j| {
            let mut s = 0.0;
            for p in 0..n {
                for q in 0..n {
                    s += c[[i, p, q]] * c[[j, q, p]];
                }
            }
            s
        });
        for i in 0..n {
            for j in 0..i {
                let v = 0.5 * (b[[i, j]] + b[[j, i]]);
                b[[i, j]] = v;
                b[[j, i]] = v;
            }
        }
        b
    }

    /// `ℓ_i = c_{ip}^p = tr ad(e_i)`.
    pub fn trace_form(&self) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|p| self.c[[i, p, p]]).sum()).collect()
    }

    pub fn is_unimodular(&self, tol: f64) -> bool {
        self.trace_form().iter().all(|x| x.abs() <= tol)
    }

    /// `max |k([a,b],c) + k(b,[a,c])|` over basis triples, and the same with `a = t`.
    pub fn invariance_defect(&self, k: &DenseTensor, t: Option<&[f64]>) -> InvarianceDefect {
        let n = self.dim();
        let along = |a: &[f64]| -> f64 {
            let ad = self.ad(a);
            let mut worst = 0.0f64;
            for b in 0..n {
                for cc in 0..n {
                    let mut s = 0.0;
                    for p in 0..n {
                        s += ad[(p, b)] * k[[p, cc]] + k[[b, p]] * ad[(p, cc)];
                    }
                    worst = worst.max(s.abs());
                }
            }
            worst
        };
        let full = (0..n).map(|a| along(&crate::tensor::unit(n, a))).fold(0.0, f64::max);
        InvarianceDefect { full, along_t: t.map(along) }
    }

    /// `dθ_{ij} = −θ_p c_{ij}^p` for a covector with constant components.
    pub fn d_oneform(&self, theta: &[f64]) -> DenseTensor {
        let n = self.dim();
        DenseTensor::matrix(n, [L, L], |i, j| -(0..n).map(|p| theta[p] * self.c[[i, j, p]]).sum::<f64>())
    }

    /// `(dω)_{ijk}` for a constant two-form, i.e. `−ω_{pk}c_{ij}^p` summed cyclically.
    pub fn d_twoform(&self, omega: &DenseTensor) -> DenseTensor {
        let n = self.dim();
        let c = &self.c;
        DenseTensor::from_fn(n, &[L, L, L], |x| {
            let (i, j, k) = (x[0], x[1], x[2]);
            let mut s = 0.0;
            for p in 0..n {
                s -= c[[i, j, p]] * omega[[p, k]] + c[[j, k, p]] * omega[[p, i]] + c[[k, i, p]] * omega[[p, j]];
            }
            s
        })
    }

    /// Lie derivative along the left-invariant field `t` of a tensor with constant components.
    pub fn lie_derivative(&self, t: &[f64], s: &DenseTensor) -> Result<DenseTensor> {
        let n = self.dim();
        if s.dim() != n || t.len() != n {
            return Err(Error::ShapeMismatch("tensor and frame dimensions differ".into()));
        }
        let ad = self.ad(t);
        let variance = s.variance().to_vec();
        Ok(DenseTensor::from_fn(n, &variance, |idx| {
            let mut total = 0.0;
            let mut j = idx.to_vec();
            for (slot, v) in variance.iter().enumerate() {
                let orig = idx[slot];
                for p in 0..n {
                    j[slot] = p;
                    total += match v {
                        // −S(.., [t, e_i], ..)
                        crate::tensor::Variance::Lower => -ad[(p, orig)] * s.get(&j),
                        // +(ad t) acting on the upper slot
                        crate::tensor::Variance::Upper => ad[(orig, p)] * s.get(&j),
                    };
                }
                j[slot] = orig;
            }
            total
        }))
    }

    /// Adjoint exponential `Ad(exp(r u))` for three-dimensional unimodular algebras.
    pub fn exp_adjoint_3d(&self, u: &[f64], r: f64) -> Result<DMatrix<f64>> {
        if self.dim() != 3 {
            return Err(Error::PreconditionFailed("dimension must be 3".into()));
        }
        if !self.is_unimodular(1e-12) {
            return Err(Error::PreconditionFailed("algebra is not unimodular".into()));
        }
        let ad = self.ad(u);
        let b = self.killing_form();
        let buu = crate::tensor::eval2(&b, u, u);
        let id = DMatrix::<f64>::identity(3, 3);
        let ad2 = &ad * &ad;
        let unich = (&ad * (&ad2 - &id * (0.5 * buu))).abs().max();
        if unich > 1e-9 {
            return Err(Error::PreconditionFailed(format!("cubic identity violated by {unich:e}")));
        }
        let nu = -buu / 8.0;
        let (_, s2) = gen_trig(nu, 2.0 * r);
        let (_, s1) = gen_trig(nu, r);
        Ok(id + ad * (0.5 * s2) + ad2 * (0.5 * s1 * s1))
    }
}

/// `(C_κ(t), S_κ(t))`: `C'' = −κC`, `C(0)=1, C'(0)=0`, `S(0)=0, S'(0)=1`.
pub fn gen_trig(kappa: f64, t: f64) -> (f64, f64) {
    if kappa.abs() <= 1e-12 {
        let x = kappa * t * t;
        let c = 1.0 - x / 2.0 + x * x / 24.0 - x * x * x / 720.0 + x.powi(4) / 40320.0 - x.powi(5) / 3628800.0;
        let s = t * (1.0 - x / 6.0 + x * x / 120.0 - x.powi(3) / 5040.0 + x.powi(4) / 362880.0 - x.powi(5) / 39916800.0);
        (c, s)
    } else if kappa > 0.0 {
        let w = kappa.sqrt();
        ((w * t).cos(), (w * t).sin() / w)
    } else {
        let w = (-kappa).sqrt();
        ((w * t).cosh(), (w * t).sinh() / w)
    }
}

/// `(1 − C_κ(t))/κ`, computed as `2 S_κ(t/2)²` so the κ → 0 limit is smooth.
pub fn one_minus_c_over_kappa(kappa: f64, t: f64) -> f64 {
    let (_, s) = gen_trig(kappa, 0.5 * t);
    2.0 * s * s
}

/// Power series of the matrix exponential, used as an oracle in tests and examples.
pub fn expm_series(m: &DMatrix<f64>, terms: usize) -> DMatrix<f64> {
    let n = m.nrows();
    let mut out = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..terms {
        term = &term * m / (k as f64);
        out += &term;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::max_abs_diff;

    #[test]
    fn qa_im_structure_constants() {
        let f = FrameAlgebra::preset(Preset::QaIm(-1.0, -1.0)).unwrap();
        assert_eq!(f.c()[[0, 1, 2]], 2.0);
        assert_eq!(f.c()[[1, 2, 0]], 2.0);
        assert_eq!(f.c()[[2, 0, 1]], 2.0);
        assert_eq!(f.c()[[1, 0, 2]], -2.0);
    }

    #[test]
    fn aff1c_structure_constants() {
        let f = FrameAlgebra::preset(Preset::Aff1c).unwrap();
        let c = f.c();
        assert_eq!((c[[0, 2, 2]], c[[0, 3, 3]], c[[1, 2, 3]], c[[1, 3, 2]]), (1.0, 1.0, 1.0, -1.0));
        assert_eq!(f.trace_form(), vec![2.0, 0.0, 0.0, 0.0]);
        let b = f.killing_form();
        assert_eq!((b[[0, 0]], b[[1, 1]], b[[2, 2]]), (2.0, -2.0, 0.0));
    }

    #[test]
    fn corrupted_constants_break_jacobi() {
        let f = FrameAlgebra::from_brackets(3, &[(0, 1, 2, 2.0), (0, 2, 1, 5.0), (1, 2, 1, 1.0)]);
        assert!(f.jacobi_defect() > 0.0);
        let ok = FrameAlgebra::preset(Preset::QaIm(1.0, 1.0)).unwrap();
        assert!(ok.jacobi_defect() <= 1e-14);
        assert_eq!(FrameAlgebra::preset(Preset::Abelian(4)).unwrap().jacobi_defect(), 0.0);
    }

    #[test]
    fn heisenberg_center_form() {
        let f = FrameAlgebra::preset(Preset::Heis(3)).unwrap();
        assert_eq!(f.killing_form().norm_inf(), 0.0);
        let theta = [0.0, 0.0, 1.0];
        let k = DenseTensor::covector(&theta).outer(&DenseTensor::covector(&theta));
        let d = f.invariance_defect(&k, Some(&theta));
        assert!(d.full > 0.0);
        assert_eq!(d.along_t, Some(0.0));
    }

    #[test]
    fn d_of_first_coframe() {
        for (a1, a2) in [(-1.0, -1.0), (1.0, 0.0), (0.0, 0.0)] {
            let f = FrameAlgebra::preset(Preset::QaIm(a1, a2)).unwrap();
            let d = f.d_oneform(&[1.0, 0.0, 0.0]);
            let mut want = DenseTensor::zeros(3, &[L, L]);
            want[[1, 2]] = 2.0 * a2;
            want[[2, 1]] = -2.0 * a2;
            assert!(max_abs_diff(&d, &want).unwrap() == 0.0);
        }
    }

    #[test]
    fn aff1c_d_e4() {
        let f = FrameAlgebra::preset(Preset::Aff1c).unwrap();
        let d = f.d_oneform(&[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(d[[0, 3]], -1.0);
        assert_eq!(d[[1, 2]], -1.0);
        assert_eq!(d[[3, 0]], 1.0);
    }

    #[test]
    fn lie_derivative_of_coframe() {
        let f = FrameAlgebra::preset(Preset::QaIm(-1.0, -1.0)).unwrap();
        let e2 = DenseTensor::covector(&[0.0, 1.0, 0.0]);
        let l = f.lie_derivative(&[1.0, 0.0, 0.0], &e2).unwrap();
        // (L_{e1} ε²)(e_j) = −ε²([e1, e_j]); [e1,e3] = −2e2 for α₁ = −1
        assert_eq!(l.data(), &[0.0, 0.0, 2.0]);
        let g = DenseTensor::matrix(3, [L, L], |i, j| if i == j { [1.0, 4.0, 4.0][i] } else { 0.0 });
        assert_eq!(f.lie_derivative(&[1.0, 0.0, 0.0], &g).unwrap().norm_inf(), 0.0);
    }

    #[test]
    fn quarter_turn() {
        let f = FrameAlgebra::preset(Preset::QaIm(-1.0, -1.0)).unwrap();
        let m = f.exp_adjoint_3d(&[1.0, 0.0, 0.0], std::f64::consts::FRAC_PI_4).unwrap();
        let want = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0]);
        assert!((m - want).abs().max() < 1e-15);
    }

    #[test]
    fn preset_names_parse() {
        assert_eq!(FrameAlgebra::preset_by_name("qa-im(-1, 1)").unwrap().dim(), 3);
        assert_eq!(FrameAlgebra::preset_by_name("heis(5)").unwrap().dim(), 5);
        assert!(matches!(FrameAlgebra::preset_by_name("so(5)"), Err(Error::UnknownPreset(_))));
        assert!(FrameAlgebra::preset_by_name("heis(4)").is_err());
    }
}
