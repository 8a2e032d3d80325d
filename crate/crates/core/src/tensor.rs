//! Dense small tensors over the reals.
//!
//! Storage is row-major with `data[i][j][k]` holding `T_{ij}^k`; the
//! variance flags are bookkeeping used by [`contract`] and the pretty
//! printers, arithmetic ignores them.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variance {
    Lower,
    Upper,
}

pub use Variance::{Lower as L, Upper as U};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dim: usize,
    variance: Vec<Variance>,
    data: Vec<f64>,
}

/// Iterator over all multi-indices of a given rank in row-major order.
pub struct MultiIndex {
    dim: usize,
    cur: Vec<usize>,
    done: bool,
}

impl Iterator for MultiIndex {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        let mut k = self.cur.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.cur[k] += 1;
            if self.cur[k] < self.dim {
                break;
            }
            self.cur[k] = 0;
        }
        Some(out)
    }
}

pub fn multi_indices(dim: usize, rank: usize) -> MultiIndex {
    MultiIndex { dim, cur: vec![0; rank], done: dim == 0 && rank > 0 }
}

impl DenseTensor {
    pub fn zeros(dim: usize, variance: &[Variance]) -> Self {
        let len = dim.pow(variance.len() as u32);
        DenseTensor { dim, variance: variance.to_vec(), data: vec![0.0; len] }
    }

    pub fn from_fn(dim: usize, variance: &[Variance], f: impl Fn(&[usize]) -> f64) -> Self {
        let mut t = Self::zeros(dim, variance);
        for (slot, idx) in multi_indices(dim, variance.len()).enumerate() {
            t.data[slot] = f(&idx);
        }
        t
    }

    pub fn from_data(dim: usize, variance: &[Variance], data: Vec<f64>) -> Result<Self> {
        let len = dim.pow(variance.len() as u32);
        if data.len() != len {
            return Err(Error::ShapeMismatch(format!(
                "expected {} entries, got {}",
                len,
                data.len()
            )));
        }
        Ok(DenseTensor { dim, variance: variance.to_vec(), data })
    }

    pub fn covector(v: &[f64]) -> Self {
        DenseTensor { dim: v.len(), variance: vec![L], data: v.to_vec() }
    }

    pub fn vector(v: &[f64]) -> Self {
        DenseTensor { dim: v.len(), variance: vec![U], data: v.to_vec() }
    }

    /// The identity endomorphism `δ_i^j`.
    pub fn delta(dim: usize) -> Self {
        Self::from_fn(dim, &[L, U], |i| if i[0] == i[1] { 1.0 } else { 0.0 })
    }

    pub fn matrix(dim: usize, variance: [Variance; 2], f: impl Fn(usize, usize) -> f64) -> Self {
        Self::from_fn(dim, &variance, |i| f(i[0], i[1]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.dim; self.rank()]
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn with_variance(mut self, variance: &[Variance]) -> Self {
        assert_eq!(variance.len(), self.rank());
        self.variance = variance.to_vec();
        self
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.dim);
            acc * self.dim + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub fn add_at(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] += v;
    }

    pub fn indices(&self) -> MultiIndex {
        multi_indices(self.dim, self.rank())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        DenseTensor {
            dim: self.dim,
            variance: self.variance.clone(),
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|x| s * x)
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        same_shape(self, other)?;
        Ok(DenseTensor {
            dim: self.dim,
            variance: self.variance.clone(),
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    /// Reorders axes: output axis `k` is input axis `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.rank());
        let variance: Vec<Variance> = perm.iter().map(|&p| self.variance[p]).collect();
        Self::from_fn(self.dim, &variance, |idx| {
            let mut s = vec![0; idx.len()];
            for (k, &p) in perm.iter().enumerate() {
                s[p] = idx[k];
            }
            self.get(&s)
        })
    }

    /// Swaps two axes.
    pub fn swap(&self, a: usize, b: usize) -> Self {
        let mut perm: Vec<usize> = (0..self.rank()).collect();
        perm.swap(a, b);
        self.permute(&perm)
    }

    pub fn outer(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut variance = self.variance.clone();
        variance.extend_from_slice(&other.variance);
        let mut data = Vec::with_capacity(self.data.len() * other.data.len());
        for &a in &self.data {
            for &b in &other.data {
                data.push(a * b);
            }
        }
        DenseTensor { dim: self.dim, variance, data }
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        assert_eq!(self.rank(), 2);
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(&[i, j]))
    }

    pub fn from_matrix(m: &DMatrix<f64>, variance: [Variance; 2]) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        Self::matrix(m.nrows(), variance, |i, j| m[(i, j)])
    }

    /// Components in the basis `f_a = M_a^i e_i` (columns of `m` are the new vectors).
    pub fn change_basis(&self, m: &DMatrix<f64>) -> Result<Self> {
        let n = self.dim;
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::ShapeMismatch("basis matrix has the wrong size".into()));
        }
        let minv = m.clone().try_inverse().ok_or_else(|| Error::PreconditionFailed("basis matrix is singular".into()))?;
        let mut out = self.clone();
        for slot in 0..self.rank() {
            let cur = out.clone();
            let lower = self.variance[slot] == L;
            out = Self::from_fn(n, &self.variance, |idx| {
                let mut j = idx.to_vec();
                let a = idx[slot];
                let mut s = 0.0;
                for i in 0..n {
                    let w = if lower { m[(i, a)] } else { minv[(a, i)] };
                    if w != 0.0 {
                        j[slot] = i;
                        s += w * cur.get(&j);
                    }
                }
                s
            });
        }
        Ok(out)
    }

    /// Restriction of every index to the first `k` basis vectors.
    pub fn leading_block(&self, k: usize) -> Self {
        assert!(k <= self.dim);
        Self::from_fn(k, &self.variance, |idx| self.get(idx))
    }

    /// Zero-padded embedding into dimension `dim ≥ self.dim()`.
    pub fn embed(&self, dim: usize) -> Self {
        assert!(dim >= self.dim);
        let n = self.dim;
        Self::from_fn(dim, &self.variance, |idx| if idx.iter().all(|&i| i < n) { self.get(idx) } else { 0.0 })
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.data.clone()
    }

    /// Nested `Vec` rendering used by serializers.
    pub fn to_nested(&self) -> serde_json::Value {
        fn rec(t: &DenseTensor, prefix: &mut Vec<usize>) -> serde_json::Value {
            if prefix.len() == t.rank() {
                return serde_json::json!(t.get(prefix));
            }
            let mut arr = Vec::with_capacity(t.dim);
            for i in 0..t.dim {
                prefix.push(i);
                arr.push(rec(t, prefix));
                prefix.pop();
            }
            serde_json::Value::Array(arr)
        }
        rec(self, &mut Vec::new())
    }
}

impl<const R: usize> Index<[usize; R]> for DenseTensor {
    type Output = f64;
    fn index(&self, idx: [usize; R]) -> &f64 {
        &self.data[self.offset(&idx)]
    }
}

impl<const R: usize> IndexMut<[usize; R]> for DenseTensor {
    fn index_mut(&mut self, idx: [usize; R]) -> &mut f64 {
        let o = self.offset(&idx);
        &mut self.data[o]
    }
}

impl Add for &DenseTensor {
    type Output = DenseTensor;
    fn add(self, rhs: &DenseTensor) -> DenseTensor {
        self.try_add(rhs).expect("tensor shapes differ")
    }
}

impl Sub for &DenseTensor {
    type Output = DenseTensor;
    fn sub(self, rhs: &DenseTensor) -> DenseTensor {
        self.try_sub(rhs).expect("tensor shapes differ")
    }
}

impl Add for DenseTensor {
    type Output = DenseTensor;
    fn add(self, rhs: DenseTensor) -> DenseTensor {
        &self + &rhs
    }
}

impl Sub for DenseTensor {
    type Output = DenseTensor;
    fn sub(self, rhs: DenseTensor) -> DenseTensor {
        &self - &rhs
    }
}

impl Mul<&DenseTensor> for f64 {
    type Output = DenseTensor;
    fn mul(self, rhs: &DenseTensor) -> DenseTensor {
        rhs.scale(self)
    }
}

impl Mul<DenseTensor> for f64 {
    type Output = DenseTensor;
    fn mul(self, rhs: DenseTensor) -> DenseTensor {
        rhs.scale(self)
    }
}

impl Neg for &DenseTensor {
    type Output = DenseTensor;
    fn neg(self) -> DenseTensor {
        self.scale(-1.0)
    }
}

impl Neg for DenseTensor {
    type Output = DenseTensor;
    fn neg(self) -> DenseTensor {
        self.scale(-1.0)
    }
}

fn same_shape(a: &DenseTensor, b: &DenseTensor) -> Result<()> {
    if a.dim != b.dim || a.rank() != b.rank() {
        return Err(Error::ShapeMismatch(format!(
            "dim {} rank {} vs dim {} rank {}",
            a.dim,
            a.rank(),
            b.dim,
            b.rank()
        )));
    }
    Ok(())
}

/// ℓ∞ distance.
pub fn max_abs_diff(a: &DenseTensor, b: &DenseTensor) -> Result<f64> {
    same_shape(a, b)?;
    Ok(a.data.iter().zip(&b.data).fold(0.0, |m, (x, y)| m.max((x - y).abs())))
}

/// Trace over one upper and one lower slot.
pub fn contract(t: &DenseTensor, up_pos: usize, down_pos: usize) -> Result<DenseTensor> {
    let r = t.rank();
    if up_pos >= r || down_pos >= r || up_pos == down_pos {
        return Err(Error::ShapeMismatch(format!(
            "cannot contract slots {up_pos},{down_pos} of a rank {r} tensor"
        )));
    }
    if t.variance[up_pos] != U || t.variance[down_pos] != L {
        return Err(Error::ShapeMismatch("contraction needs one upper and one lower slot".into()));
    }
    let keep: Vec<usize> = (0..r).filter(|&k| k != up_pos && k != down_pos).collect();
    let variance: Vec<Variance> = keep.iter().map(|&k| t.variance[k]).collect();
    Ok(DenseTensor::from_fn(t.dim, &variance, |idx| {
        let mut f = vec![0; r];
        for (slot, &k) in keep.iter().enumerate() {
            f[k] = idx[slot];
        }
        let mut s = 0.0;
        for p in 0..t.dim {
            f[up_pos] = p;
            f[down_pos] = p;
            s += t.get(&f);
        }
        s
    }))
}

fn pair_check(t: &DenseTensor, a: usize, b: usize) -> Result<()> {
    if a >= t.rank() || b >= t.rank() || a == b {
        return Err(Error::ShapeMismatch(format!("bad index pair ({a},{b})")));
    }
    if t.variance[a] != t.variance[b] {
        return Err(Error::ShapeMismatch("index pair has mixed variance".into()));
    }
    Ok(())
}

/// `T_{(ab)}` with the ½ normalization.
pub fn symmetrize2(t: &DenseTensor, a: usize, b: usize) -> Result<DenseTensor> {
    pair_check(t, a, b)?;
    Ok((t + &t.swap(a, b)).scale(0.5))
}

/// `T_{[ab]}` with the ½ normalization.
pub fn alternate2(t: &DenseTensor, a: usize, b: usize) -> Result<DenseTensor> {
    pair_check(t, a, b)?;
    Ok((t - &t.swap(a, b)).scale(0.5))
}

/// Singular threshold `1e-12 · (max|entry|)^n`.
pub fn singular_threshold(m: &DMatrix<f64>) -> f64 {
    let big = m.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    1e-12 * big.powi(m.nrows() as i32)
}

/// Inverse of a symmetric bilinear form; the result carries upper indices.
pub fn sym2_inverse(h: &DenseTensor) -> Result<DenseTensor> {
    if h.rank() != 2 {
        return Err(Error::ShapeMismatch("sym2_inverse needs a rank 2 tensor".into()));
    }
    let n = h.dim();
    let scale = h.norm_inf().max(1.0);
    for i in 0..n {
        for j in 0..i {
            if (h[[i, j]] - h[[j, i]]).abs() > 1e-12 * scale {
                return Err(Error::PreconditionFailed(format!("h not symmetric at ({i},{j})")));
            }
        }
    }
    let m = h.to_matrix();
    let det = m.determinant();
    let threshold = singular_threshold(&m);
    if det.abs() <= threshold || !det.is_finite() {
        return Err(Error::SingularMetric { det, threshold });
    }
    let inv = m.clone().try_inverse().ok_or(Error::SingularMetric { det, threshold })?;
    let sym = (&inv + inv.transpose()) * 0.5;
    let flip = |v: Variance| if v == L { U } else { L };
    Ok(DenseTensor::from_matrix(&sym, [flip(h.variance[0]), flip(h.variance[1])]))
}

/// Symmetric part of a rank 2 tensor (axes 0 and 1).
pub fn sym_part(t: &DenseTensor) -> DenseTensor {
    (t + &t.swap(0, 1)).scale(0.5)
}

/// Symmetrization of a rank 3 tensor over its first two axes.
pub fn sym_part_3(t: &DenseTensor) -> DenseTensor {
    (t + &t.swap(0, 1)).scale(0.5)
}

/// Antisymmetric part of a rank 2 tensor (axes 0 and 1).
pub fn skew_part(t: &DenseTensor) -> DenseTensor {
    (t - &t.swap(0, 1)).scale(0.5)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

/// Bilinear evaluation `h(x, y)` of a rank 2 tensor.
pub fn eval2(h: &DenseTensor, x: &[f64], y: &[f64]) -> f64 {
    let n = h.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += h[[i, j]] * x[i] * y[j];
        }
    }
    s
}

/// Vector-valued evaluation `A(x, y)^k` of a rank 3 tensor.
pub fn eval3(a: &DenseTensor, x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = a.dim();
    let mut out = vec![0.0; n];
    for i in 0..n {
        if x[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            let w = x[i] * y[j];
            if w == 0.0 {
                continue;
            }
            for (k, o) in out.iter_mut().enumerate() {
                *o += a[[i, j, k]] * w;
            }
        }
    }
    out
}

/// Matrix product `h^{ij} w_j` style contraction of a rank 2 tensor with a vector on its second slot.
pub fn mat_vec(h: &DenseTensor, v: &[f64]) -> Vec<f64> {
    let n = h.dim();
    (0..n).map(|i| (0..n).map(|j| h[[i, j]] * v[j]).sum()).collect()
}

/// `v^i h_{ij}`.
pub fn vec_mat(v: &[f64], h: &DenseTensor) -> Vec<f64> {
    let n = h.dim();
    (0..n).map(|j| (0..n).map(|i| v[i] * h[[i, j]]).sum()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_trace_is_dimension() {
        let d = DenseTensor::delta(5);
        let tr = contract(&d, 1, 0).unwrap();
        assert_eq!(tr.rank(), 0);
        assert_eq!(tr.data()[0], 5.0);
    }

    #[test]
    fn inverse_of_diagonal() {
        let h = DenseTensor::matrix(3, [L, L], |i, j| if i == j { [1.0, 4.0, 4.0][i] } else { 0.0 });
        let g = sym2_inverse(&h).unwrap();
        let want = DenseTensor::matrix(3, [U, U], |i, j| if i == j { [1.0, 0.25, 0.25][i] } else { 0.0 });
        assert!(max_abs_diff(&g, &want).unwrap() <= 1e-15);
        assert_eq!(sym2_inverse(&DenseTensor::delta(3).with_variance(&[L, L])).unwrap().data(), DenseTensor::delta(3).data());
    }

    #[test]
    fn degenerate_metric_is_rejected() {
        let h = DenseTensor::matrix(3, [L, L], |i, j| if i == j && i != 1 { 1.0 } else { 0.0 });
        assert!(matches!(sym2_inverse(&h), Err(Error::SingularMetric { .. })));
    }

    #[test]
    fn alternate_of_basis_product() {
        let e1 = DenseTensor::covector(&[1.0, 0.0]);
        let e2 = DenseTensor::covector(&[0.0, 1.0]);
        let a = alternate2(&e1.outer(&e2), 0, 1).unwrap();
        assert_eq!(a.data(), &[0.0, 0.5, -0.5, 0.0]);
        let aa = alternate2(&a, 0, 1).unwrap();
        assert_eq!(aa, a);
        assert_eq!(symmetrize2(&a, 0, 1).unwrap().norm_inf(), 0.0);
    }

    #[test]
    fn distance_to_zero() {
        let z = DenseTensor::zeros(3, &[L, U]);
        assert_eq!(max_abs_diff(&z, &DenseTensor::delta(3)).unwrap(), 1.0);
        assert!(max_abs_diff(&z, &DenseTensor::zeros(2, &[L, U])).is_err());
    }

    #[test]
    fn permute_moves_axes() {
        let t = DenseTensor::from_fn(3, &[L, L, U], |i| (i[0] * 100 + i[1] * 10 + i[2]) as f64);
        let p = t.permute(&[2, 0, 1]);
        assert_eq!(p[[1, 2, 0]], t[[2, 0, 1]]);
        assert_eq!(p.variance(), &[U, L, L]);
    }
}
