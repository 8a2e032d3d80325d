//! The four-dimensional algebras `qaf[α₁, α₂]` spanned by `{1, e₁, e₂, e₃}`
//! with `e₁² = α₁`, `e₂² = α₂`, `e₁e₂ = −e₂e₁ = e₃`.

use nalgebra::{DMatrix, Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::lie::{gen_trig, FrameAlgebra, Preset};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CliffordParams {
    pub a1: f64,
    pub a2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CliffordElement {
    pub params: CliffordParams,
    pub q: [f64; 4],
}

impl CliffordParams {
    pub fn new(a1: f64, a2: f64) -> Self {
        CliffordParams { a1, a2 }
    }

    pub fn element(self, q: [f64; 4]) -> CliffordElement {
        CliffordElement { params: self, q }
    }

    pub fn one(self) -> CliffordElement {
        self.element([1.0, 0.0, 0.0, 0.0])
    }

    /// `e₀ = 1`, `e₁`, `e₂`, `e₃`.
    pub fn basis(self, i: usize) -> CliffordElement {
        let mut q = [0.0; 4];
        q[i] = 1.0;
        self.element(q)
    }

    pub fn imaginary(self, w: [f64; 3]) -> CliffordElement {
        self.element([0.0, w[0], w[1], w[2]])
    }

    /// The imaginary part as a frame algebra under the commutator.
    pub fn im_frame_algebra(self) -> FrameAlgebra {
        FrameAlgebra::preset(Preset::QaIm(self.a1, self.a2)).expect("finite parameters")
    }

    /// `Γ(θ, θ)` with `Γ = −α₂E₁E₁ − α₁E₂E₂ + E₃E₃`.
    pub fn gamma_form(self, theta: [f64; 3]) -> f64 {
        -self.a2 * theta[0] * theta[0] - self.a1 * theta[1] * theta[1] + theta[2] * theta[2]
    }

    /// Coefficient of `ε¹∧ε²∧ε³` in `θ∧dθ`, computed from the brackets.
    pub fn contact_value(self, theta: [f64; 3]) -> f64 {
        let d = self.im_frame_algebra().d_oneform(&theta);
        theta[0] * d[[1, 2]] + theta[1] * d[[2, 0]] + theta[2] * d[[0, 1]]
    }
}

impl CliffordElement {
    /// Left multiplication `L(q)v = qv` in the basis `{1, e₁, e₂, e₃}`.
    pub fn left_matrix(&self) -> Matrix4<f64> {
        let (a1, a2) = (self.params.a1, self.params.a2);
        let [q0, q1, q2, q3] = self.q;
        Matrix4::new(
            q0, a1 * q1, a2 * q2, -a1 * a2 * q3, //
            q1, q0, a2 * q3, -a2 * q2, //
            q2, -a1 * q3, q0, a1 * q1, //
            q3, -q2, q1, q0,
        )
    }

    /// Right multiplication `R(q)v = vq`.
    pub fn right_matrix(&self) -> Matrix4<f64> {
        let (a1, a2) = (self.params.a1, self.params.a2);
        let [q0, q1, q2, q3] = self.q;
        Matrix4::new(
            q0, a1 * q1, a2 * q2, -a1 * a2 * q3, //
            q1, q0, -a2 * q3, a2 * q2, //
            q2, a1 * q3, q0, -a1 * q1, //
            q3, q2, -q1, q0,
        )
    }

    pub fn multiply(&self, other: &CliffordElement) -> Result<CliffordElement> {
        if self.params != other.params {
            return Err(Error::ParamMismatch);
        }
        let v = self.left_matrix() * Vector4::from(other.q);
        Ok(self.params.element([v[0], v[1], v[2], v[3]]))
    }

    pub fn conj(&self) -> CliffordElement {
        let [q0, q1, q2, q3] = self.q;
        self.params.element([q0, -q1, -q2, -q3])
    }

    pub fn trace(&self) -> f64 {
        2.0 * self.q[0]
    }

    /// `n(q) = q q̄`.
    pub fn norm(&self) -> f64 {
        let (a1, a2) = (self.params.a1, self.params.a2);
        let [q0, q1, q2, q3] = self.q;
        q0 * q0 - a1 * q1 * q1 - a2 * q2 * q2 + a1 * a2 * q3 * q3
    }

    pub fn conj_trace_norm(&self) -> (CliffordElement, f64, f64) {
        (self.conj(), self.trace(), self.norm())
    }

    pub fn scale(&self, s: f64) -> CliffordElement {
        self.params.element(self.q.map(|x| s * x))
    }

    pub fn add(&self, other: &CliffordElement) -> Result<CliffordElement> {
        if self.params != other.params {
            return Err(Error::ParamMismatch);
        }
        let mut q = self.q;
        for (a, b) in q.iter_mut().zip(other.q) {
            *a += b;
        }
        Ok(self.params.element(q))
    }

    pub fn im(&self) -> [f64; 3] {
        [self.q[1], self.q[2], self.q[3]]
    }

    fn require_imaginary(&self) -> Result<()> {
        let scale = self.q.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        if self.q[0].abs() > 1e-14 * scale {
            return Err(Error::NotImaginary);
        }
        Ok(())
    }

    /// `e^{tw} = C_{n(w)}(t) + S_{n(w)}(t)·w` for imaginary `w`.
    pub fn euler_exp(&self, t: f64) -> Result<CliffordElement> {
        self.require_imaginary()?;
        let (c, s) = gen_trig(self.norm(), t);
        let [_, w1, w2, w3] = self.q;
        Ok(self.params.element([c, s * w1, s * w2, s * w3]))
    }

    /// `x ↦ q x q⁻¹` restricted to the imaginary part.
    pub fn adjoint_on_im(&self) -> Result<DMatrix<f64>> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NullNorm);
        }
        let m = self.left_matrix() * self.conj().right_matrix() / n;
        Ok(DMatrix::from_fn(3, 3, |i, j| m[(i + 1, j + 1)]))
    }

    /// Closed form of `Ad(e^{tw})` on the imaginary part.
    pub fn rodrigues(&self, t: f64) -> Result<DMatrix<f64>> {
        self.require_imaginary()?;
        let ad = self.params.im_frame_algebra().ad(&self.im());
        let n = self.norm();
        let (_, s2) = gen_trig(n, 2.0 * t);
        let (_, s1) = gen_trig(n, t);
        Ok(DMatrix::identity(3, 3) + &ad * (0.5 * s2) + &ad * &ad * (0.5 * s1 * s1))
    }
}

/// `Σ_{k<terms} (tw)^k / k!` by repeated multiplication; an oracle for [`CliffordElement::euler_exp`].
pub fn exp_series(w: &CliffordElement, t: f64, terms: usize) -> CliffordElement {
    let mut out = w.params.one();
    let mut term = w.params.one();
    let tw = w.scale(t);
    for k in 1..terms {
        term = term.multiply(&tw).expect("same params").scale(1.0 / k as f64);
        out = out.add(&term).expect("same params");
    }
    out
}
