//! Connections on a coordinate patch, evaluated pointwise.
//!
//! Coefficients are `Γ[i][j][k] = Γ_{ij}^k` with `∇_{∂_i}∂_j = Γ_{ij}^k ∂_k`.
//! Curvature follows the frame convention, `R_{ijk}^l` with Ricci `R_{jk} = R_{pjk}^p`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{dot, DenseTensor, L, U};

pub const FD_STEP: f64 = 1e-5;
/// Singular families abort when `|x|` leaves `[MIN_RADIUS, MAX_RADIUS]`.
pub const MIN_RADIUS: f64 = 1e-4;
pub const MAX_RADIUS: f64 = 1e6;
/// Outer derivatives of quantities that are themselves finite differences use this multiple of the step.
const NESTED: f64 = 10.0;

pub type Evaluator = Arc<dyn Fn(&[f64]) -> DenseTensor + Send + Sync>;
pub type VectorField = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Flat,
    RadiantPower { alpha: f64, h: DMatrix<f64> },
    ProjflatQuadric { eps: f64 },
    Custom,
}

/// Serializable chart description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ChartSpec {
    Flat { dim: usize },
    RadiantPower { alpha: f64, h: Vec<Vec<f64>> },
    /// `radiant_power` with `α = 2 − dim` and the identity metric.
    Central { dim: usize },
    ProjflatQuadric { dim: usize, eps: f64 },
}

#[derive(Clone)]
pub struct ChartConnection {
    dim: usize,
    family: Family,
    gamma: Evaluator,
    radiant: Option<VectorField>,
}

impl fmt::Debug for ChartConnection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartConnection")
            .field("dim", &self.dim)
            .field("family", &self.family)
            .field("radiant_field", &self.radiant.is_some())
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCurvature {
    pub riemann: DenseTensor,
    pub ricci: DenseTensor,
}

/// `∇_i X^j ≈ f δ_i^j + σ_i X^j`, fitted by least squares.
#[derive(Debug, Clone, PartialEq)]
pub struct DilatationSplit {
    pub f: f64,
    pub sigma: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Radiantized {
    pub gamma: DenseTensor,
    pub field: Vec<f64>,
    /// Scale `f − σ(X)` that was divided out.
    pub scale: f64,
    pub sigma: Vec<f64>,
    pub defect: f64,
    pub torsion: f64,
}

pub fn make_chart(spec: &ChartSpec) -> Result<ChartConnection> {
    match spec {
        ChartSpec::Flat { dim } => ChartConnection::flat(*dim),
        ChartSpec::RadiantPower { alpha, h } => {
            let n = h.len();
            if n == 0 || h.iter().any(|r| r.len() != n) {
                return Err(Error::BadParams("h must be a nonempty square matrix".into()));
            }
            ChartConnection::radiant_power(*alpha, DMatrix::from_fn(n, n, |i, j| h[i][j]))
        }
        ChartSpec::Central { dim } => ChartConnection::central(*dim),
        ChartSpec::ProjflatQuadric { dim, eps } => ChartConnection::projflat_quadric(*dim, *eps),
    }
}

fn domain_error(reason: String, x: &[f64]) -> Error {
    Error::DomainViolation { reason, t: f64::NAN, x: x.to_vec(), v: vec![] }
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

fn shifted(x: &[f64], i: usize, d: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[i] += d;
    y
}

impl ChartConnection {
    pub fn flat(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::BadParams("dimension must be positive".into()));
        }
        Ok(Self { dim, family: Family::Flat, gamma: Arc::new(move |_| DenseTensor::zeros(dim, &[L, L, U])), radiant: None })
    }

    /// `Γ_{ij}^k = |x|^{α−4}(|x|² h_{ij} − x♭_i x♭_j) x^k` with `|x|² = h(x,x)`; the Euler field is radiant.
    pub fn radiant_power(alpha: f64, h: DMatrix<f64>) -> Result<Self> {
        let n = h.nrows();
        if n == 0 || h.ncols() != n {
            return Err(Error::BadParams("h must be a nonempty square matrix".into()));
        }
        if !alpha.is_finite() || h.iter().any(|x| !x.is_finite()) {
            return Err(Error::BadParams("non-finite parameters".into()));
        }
        let scale = h.amax().max(1.0);
        if (&h - h.transpose()).amax() > 1e-12 * scale {
            return Err(Error::BadParams("h must be symmetric".into()));
        }
        let det = h.determinant();
        if det.abs() <= crate::tensor::singular_threshold(&h) {
            return Err(Error::BadParams(format!("h is degenerate (det = {det:e})")));
        }
        let hm = h.clone();
        let gamma = move |x: &[f64]| {
            let xv = DVector::from_column_slice(x);
            let xf = &hm * &xv;
            let r2 = xv.dot(&xf);
            let w = r2.abs().powf((alpha - 4.0) / 2.0);
            DenseTensor::from_fn(n, &[L, L, U], |ix| w * (r2 * hm[(ix[0], ix[1])] - xf[ix[0]] * xf[ix[1]]) * x[ix[2]])
        };
        Ok(Self {
            dim: n,
            family: Family::RadiantPower { alpha, h },
            gamma: Arc::new(gamma),
            radiant: Some(Arc::new(|x: &[f64]| x.to_vec())),
        })
    }

    /// The Ricci-flat member `α = 1 − n` on `R^{n+1}`, `n + 1 = ambient_dim`, with the identity metric.
    pub fn central(ambient_dim: usize) -> Result<Self> {
        if ambient_dim < 2 {
            return Err(Error::BadParams("central family needs dimension at least 2".into()));
        }
        Self::radiant_power(2.0 - ambient_dim as f64, DMatrix::identity(ambient_dim, ambient_dim))
    }

    /// `Γ_{ij}^k = −ε(1 + ε|x|²)⁻¹(x_i δ_j^k + x_j δ_i^k)`.
    pub fn projflat_quadric(dim: usize, eps: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::BadParams("dimension must be positive".into()));
        }
        if eps != 1.0 && eps != -1.0 {
            return Err(Error::BadParams(format!("eps must be ±1, got {eps}")));
        }
        let gamma = move |x: &[f64]| {
            let c = -eps / (1.0 + eps * dot(x, x));
            DenseTensor::from_fn(dim, &[L, L, U], |ix| {
                let (i, j, k) = (ix[0], ix[1], ix[2]);
                c * (if j == k { x[i] } else { 0.0 } + if i == k { x[j] } else { 0.0 })
            })
        };
        Ok(Self { dim, family: Family::ProjflatQuadric { eps }, gamma: Arc::new(gamma), radiant: None })
    }

    pub fn custom(dim: usize, gamma: Evaluator, radiant: Option<VectorField>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::BadParams("dimension must be positive".into()));
        }
        Ok(Self { dim, family: Family::Custom, gamma, radiant })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn has_radiant_field(&self) -> bool {
        self.radiant.is_some()
    }

    pub fn radiant_field(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.radiant.as_ref().map(|e| e(x)).ok_or(Error::MissingField)
    }

    /// `Err(reason)` when `x` is outside the chart's domain.
    pub fn check_domain(&self, x: &[f64]) -> std::result::Result<(), String> {
        if x.len() != self.dim {
            return Err(format!("point has {} coordinates, chart has {}", x.len(), self.dim));
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err("non-finite coordinates".into());
        }
        match &self.family {
            Family::RadiantPower { h, .. } => {
                let xv = DVector::from_column_slice(x);
                let r = (xv.dot(&(h * &xv))).abs().sqrt();
                let e = norm(x);
                if r < MIN_RADIUS {
                    return Err(format!("|x| = {r:e} below {MIN_RADIUS:e}"));
                }
                if e > MAX_RADIUS {
                    return Err(format!("|x| = {e:e} above {MAX_RADIUS:e}"));
                }
            }
            Family::ProjflatQuadric { eps } => {
                let u = 1.0 + eps * dot(x, x);
                if u.abs() < MIN_RADIUS {
                    return Err(format!("1 + ε|x|² = {u:e} is too close to 0"));
                }
                if norm(x) > MAX_RADIUS {
                    return Err(format!("|x| above {MAX_RADIUS:e}"));
                }
            }
            Family::Flat | Family::Custom => {}
        }
        Ok(())
    }

    /// Rough distance from `x` to the singular locus of the family, if it has one.
    pub fn singular_distance(&self, x: &[f64]) -> Option<f64> {
        match &self.family {
            Family::RadiantPower { h, .. } => {
                let xv = DVector::from_column_slice(x);
                Some(xv.dot(&(h * &xv)).abs().sqrt())
            }
            Family::ProjflatQuadric { eps } => Some((1.0 + eps * dot(x, x)).abs() / (2.0 * norm(x)).max(1e-300)),
            Family::Flat | Family::Custom => None,
        }
    }

    pub fn christoffel(&self, x: &[f64]) -> Result<DenseTensor> {
        self.check_domain(x).map_err(|r| domain_error(r, x))?;
        let g = (self.gamma)(x);
        if g.dim() != self.dim || g.rank() != 3 {
            return Err(Error::ShapeMismatch(format!("evaluator must return {0}×{0}×{0} coefficients", self.dim)));
        }
        if !g.is_finite() {
            return Err(domain_error("non-finite coefficients".into(), x));
        }
        let asym = (&g - &g.swap(0, 1)).norm_inf();
        if asym > 1e-12 * g.norm_inf().max(1.0) {
            return Err(Error::Validation(format!("Γ not symmetric in its lower pair (defect {asym:e})")));
        }
        Ok(g)
    }

    /// `−Γ(x)(v, v)`.
    pub fn acceleration(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let g = self.christoffel(x)?;
        Ok(crate::tensor::eval3(&g, v, v).into_iter().map(|a| -a).collect())
    }

    /// Closed-form projective Schouten tensor where the family provides one.
    pub fn schouten_closed_form(&self, x: &[f64]) -> Option<DenseTensor> {
        match self.family {
            Family::Flat => Some(DenseTensor::zeros(self.dim, &[L, L])),
            Family::ProjflatQuadric { eps } => {
                let u = 1.0 + eps * dot(x, x);
                Some(DenseTensor::matrix(self.dim, [L, L], |i, j| {
                    -eps / u * (if i == j { 1.0 } else { 0.0 } - eps * x[i] * x[j] / u)
                }))
            }
            _ => None,
        }
    }

    /// `M[(i, j)] = ∇_i X^j`, derivatives by central differences.
    pub fn covariant_of_field(&self, field: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> Result<DMatrix<f64>> {
        let n = self.dim;
        let g = self.christoffel(x)?;
        let x0 = field(x);
        check_field(&x0, n)?;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            let (p, q) = (shifted(x, i, h), shifted(x, i, -h));
            self.check_domain(&p).and(self.check_domain(&q)).map_err(|r| domain_error(r, x))?;
            let (fp, fq) = (field(&p), field(&q));
            check_field(&fp, n)?;
            check_field(&fq, n)?;
            for j in 0..n {
                let mut s = (fp[j] - fq[j]) / (2.0 * h);
                for (k, xk) in x0.iter().enumerate() {
                    s += g[[i, k, j]] * xk;
                }
                m[(i, j)] = s;
            }
        }
        Ok(m)
    }

    pub fn curvature_at(&self, x: &[f64], h: f64) -> Result<PointCurvature> {
        curvature_of(self.dim, &|y: &[f64]| self.christoffel(y), x, h)
    }

    /// `max|∇_i E^j − δ_i^j|` for the attached radiant field.
    pub fn radiant_defect_at(&self, x: &[f64], h: f64) -> Result<f64> {
        let e = self.radiant.as_ref().ok_or(Error::MissingField)?;
        let m = self.covariant_of_field(&|y: &[f64]| e(y), x, h)?;
        Ok((m - DMatrix::identity(self.dim, self.dim)).amax())
    }

    /// `max|X^{[a} δ_{(i}^{b} ∇_{j)} X^{c]}|`.
    pub fn proj_dilatative_defect_at(&self, field: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> Result<f64> {
        let n = self.dim;
        let m = self.covariant_of_field(field, x, h)?;
        let xv = field(x);
        let term = |a: usize, b: usize, c: usize, i: usize, j: usize| {
            let g = |i: usize, j: usize| if i == b { xv[a] * m[(j, c)] } else { 0.0 };
            0.5 * (g(i, j) + g(j, i))
        };
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if a == b || b == c || a == c {
                        continue;
                    }
                    for i in 0..n {
                        for j in i..n {
                            let s = term(a, b, c, i, j) + term(b, c, a, i, j) + term(c, a, b, i, j)
                                - term(b, a, c, i, j)
                                - term(a, c, b, i, j)
                                - term(c, b, a, i, j);
                            worst = worst.max((s / 6.0).abs());
                        }
                    }
                }
            }
        }
        Ok(worst)
    }

    /// Least-squares fit of `∇X = f δ + σ ⊗ X` at `x`.
    pub fn dilatation_split(&self, field: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> Result<DilatationSplit> {
        let n = self.dim;
        let m = self.covariant_of_field(field, x, h)?;
        let xv = field(x);
        let mut a = DMatrix::zeros(n * n, n + 1);
        let mut b = DVector::zeros(n * n);
        for i in 0..n {
            for j in 0..n {
                let r = i * n + j;
                if i == j {
                    a[(r, 0)] = 1.0;
                }
                a[(r, 1 + i)] = xv[j];
                b[r] = m[(i, j)];
            }
        }
        let sol = a.clone().svd(true, true).solve(&b, 1e-13 * a.amax().max(1.0)).map_err(|e| Error::Validation(e.to_string()))?;
        let residual = (&a * &sol - &b).amax();
        Ok(DilatationSplit { f: sol[0], sigma: sol.iter().skip(1).copied().collect(), residual })
    }

    /// Normalizes a projectively dilatative field to a radiant pair at `x`: the connection is shifted by
    /// `−2σ_{(i}δ_{j)}^k` and then by `(1/(1−n)) f'⁻¹ R'_{ij} X^k`, and the field is divided by `f' = f − σ(X)`.
    pub fn radiantize_at(&self, field: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> Result<Radiantized> {
        let n = self.dim;
        let nf = n as f64;
        let outer = h * NESTED;
        let split = |y: &[f64]| self.dilatation_split(field, y, h);
        let scale_at = |y: &[f64]| -> Result<f64> {
            let s = split(y)?;
            Ok(s.f - dot(&s.sigma, &field(y)))
        };
        let s0 = split(x)?;
        let x0 = field(x);
        let fp = s0.f - dot(&s0.sigma, &x0);
        let size = self.covariant_of_field(field, x, h)?.amax().max(norm(&x0)).max(1e-300);
        if fp.abs() <= 1e-9 * size {
            return Err(Error::VanishingDivergence);
        }
        let shifted_gamma = |y: &[f64]| -> Result<DenseTensor> {
            let s = split(y)?;
            let g = self.christoffel(y)?;
            Ok(DenseTensor::from_fn(n, &[L, L, U], |ix| {
                let (i, j, k) = (ix[0], ix[1], ix[2]);
                g[[i, j, k]] - if j == k { s.sigma[i] } else { 0.0 } - if i == k { s.sigma[j] } else { 0.0 }
            }))
        };
        let ric = curvature_of(n, &shifted_gamma, x, outer)?.ricci;
        let g1 = shifted_gamma(x)?;
        let gamma = DenseTensor::from_fn(n, &[L, L, U], |ix| {
            g1[[ix[0], ix[1], ix[2]]] + ric[[ix[0], ix[1]]] * x0[ix[2]] / ((1.0 - nf) * fp)
        });
        let new_field: Vec<f64> = x0.iter().map(|v| v / fp).collect();
        let mut defect = 0.0f64;
        for i in 0..n {
            let (p, q) = (shifted(x, i, outer), shifted(x, i, -outer));
            let (sp, sq) = (scale_at(&p)?, scale_at(&q)?);
            let (fpv, fqv) = (field(&p), field(&q));
            for j in 0..n {
                let mut s = (fpv[j] / sp - fqv[j] / sq) / (2.0 * outer);
                for k in 0..n {
                    s += gamma[[i, k, j]] * new_field[k];
                }
                defect = defect.max((s - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        let torsion = (&gamma - &gamma.swap(0, 1)).norm_inf();
        Ok(Radiantized { gamma, field: new_field, scale: fp, sigma: s0.sigma, defect, torsion })
    }
}

fn check_field(v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::ShapeMismatch(format!("vector field must have {n} components")));
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(Error::Validation("vector field is not finite".into()));
    }
    Ok(())
}

/// Curvature of the coefficient field `gamma` at `x`: derivatives by central differences, quadratic terms exact.
pub fn curvature_of(dim: usize, gamma: &dyn Fn(&[f64]) -> Result<DenseTensor>, x: &[f64], h: f64) -> Result<PointCurvature> {
    if !(h > 0.0) {
        return Err(Error::InvalidParams("finite-difference step must be positive".into()));
    }
    let g0 = gamma(x)?;
    let mut dg = Vec::with_capacity(dim);
    for i in 0..dim {
        let p = gamma(&shifted(x, i, h))?;
        let q = gamma(&shifted(x, i, -h))?;
        dg.push((&p - &q).scale(0.5 / h));
    }
    let riemann = DenseTensor::from_fn(dim, &[L, L, L, U], |ix| {
        let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
        let mut s = dg[i][[j, k, l]] - dg[j][[i, k, l]];
        for p in 0..dim {
            s += g0[[j, k, p]] * g0[[i, p, l]] - g0[[i, k, p]] * g0[[j, p, l]];
        }
        s
    });
    let ricci = DenseTensor::matrix(dim, [L, L], |j, k| (0..dim).map(|p| riemann[[p, j, k, p]]).sum());
    Ok(PointCurvature { riemann, ricci })
}
