//! Complex dense matrices and vectors.
//!
//! Matrices are stored column-major. Every routine in the crate works over
//! `Complex<f64>`; real data is promoted on construction.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Scalar = Complex64;

pub const ZERO: Scalar = Complex64::new(0.0, 0.0);
pub const ONE: Scalar = Complex64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> Scalar {
    Complex64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> Scalar {
    Complex64::new(x, 0.0)
}

/// Euclidean norm with scaling so that huge or tiny entries do not overflow.
pub fn norm2(x: &[Scalar]) -> f64 {
    let mut scale = 0.0f64;
    let mut ssq = 1.0f64;
    for z in x {
        for part in [z.re, z.im] {
            if part != 0.0 {
                let a = part.abs();
                if scale < a {
                    ssq = 1.0 + ssq * (scale / a) * (scale / a);
                    scale = a;
                } else {
                    ssq += (a / scale) * (a / scale);
                }
            }
        }
    }
    scale * ssq.sqrt()
}

/// `xᴴ y`
#[inline]
pub fn dotc(x: &[Scalar], y: &[Scalar]) -> Scalar {
    debug_assert_eq!(x.len(), y.len());
    let mut s = ZERO;
    for (a, b) in x.iter().zip(y) {
        s += a.conj() * b;
    }
    s
}

/// `y += alpha x`
#[inline]
pub fn axpy(alpha: Scalar, x: &[Scalar], y: &mut [Scalar]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<Scalar>,
}

impl Vector {
    pub fn zeros(n: usize) -> Self {
        Vector {
            data: vec![ZERO; n],
        }
    }

    pub fn from_vec(data: Vec<Scalar>) -> Self {
        Vector { data }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Vector {
            data: values.iter().map(|&x| re(x)).collect(),
        }
    }

    /// Unit vector `e_k` of length `n`.
    pub fn unit(n: usize, k: usize) -> Self {
        let mut v = Self::zeros(n);
        v.data[k] = ONE;
        v
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[Scalar] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Scalar] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Scalar> {
        self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Scalar> {
        self.data.iter()
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn norm1(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).sum()
    }

    pub fn dot(&self, other: &Vector) -> Scalar {
        dotc(&self.data, &other.data)
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        assert_eq!(self.len(), other.len(), "vector length mismatch");
        Vector::from_vec(self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Vector) -> Vector {
        assert_eq!(self.len(), other.len(), "vector length mismatch");
        Vector::from_vec(self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, alpha: Scalar) -> Vector {
        Vector::from_vec(self.data.iter().map(|z| alpha * z).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn check_finite(&self) -> Result<()> {
        match self
            .data
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            Some(i) => Err(Error::NonFinite { row: i, col: 0 }),
            None => Ok(()),
        }
    }

    /// View as an `n × 1` matrix.
    pub fn to_column(&self) -> Matrix {
        Matrix::from_col_major(self.len(), 1, self.data.clone())
    }
}

impl Index<usize> for Vector {
    type Output = Scalar;
    fn index(&self, i: usize) -> &Scalar {
        &self.data[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut Scalar {
        &mut self.data[i]
    }
}

impl From<Vec<Scalar>> for Vector {
    fn from(data: Vec<Scalar>) -> Self {
        Vector { data }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<Scalar>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        Matrix { rows, cols, data }
    }

    /// Build from real rows; all rows must have equal length.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let m = rows.len();
        let n = if m == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|r| r.len() == n), "ragged rows");
        Self::from_fn(m, n, |i, j| re(rows[i][j]))
    }

    pub fn from_rows(rows: &[Vec<Scalar>]) -> Self {
        let m = rows.len();
        let n = if m == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|r| r.len() == n), "ragged rows");
        Self::from_fn(m, n, |i, j| rows[i][j])
    }

    pub fn diag_real(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = re(x);
        }
        m
    }

    pub fn from_columns(rows: usize, columns: &[Vector]) -> Self {
        let mut data = Vec::with_capacity(rows * columns.len());
        for col in columns {
            assert_eq!(col.len(), rows, "column length mismatch");
            data.extend_from_slice(col.as_slice());
        }
        Matrix {
            rows,
            cols: columns.len(),
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[Scalar] {
        &self.data
    }

    pub fn col(&self, j: usize) -> &[Scalar] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [Scalar] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column(&self, j: usize) -> Vector {
        Vector::from_vec(self.col(j).to_vec())
    }

    /// Mutable access to two distinct columns at once.
    pub fn col_pair_mut(&mut self, a: usize, b: usize) -> (&mut [Scalar], &mut [Scalar]) {
        assert!(a != b);
        let m = self.rows;
        if a < b {
            let (lo, hi) = self.data.split_at_mut(b * m);
            (&mut lo[a * m..(a + 1) * m], &mut hi[..m])
        } else {
            let (lo, hi) = self.data.split_at_mut(a * m);
            let (x, y) = (&mut hi[..m], &mut lo[b * m..(b + 1) * m]);
            (x, y)
        }
    }

    /// Column `k` (shared) and every column after it (mutable, contiguous).
    pub(crate) fn as_cols_split(&mut self, k: usize) -> (&[Scalar], &mut [Scalar]) {
        let m = self.rows;
        let (lo, hi) = self.data.split_at_mut((k + 1) * m);
        (&lo[k * m..], hi)
    }

    /// Columns `range` as a new matrix.
    pub fn columns(&self, range: std::ops::Range<usize>) -> Matrix {
        let cols = range.len();
        Matrix {
            rows: self.rows,
            cols,
            data: self.data[range.start * self.rows..range.end * self.rows].to_vec(),
        }
    }

    pub fn adjoint(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for k in 0..self.cols {
                let b = other[(k, j)];
                if b != ZERO {
                    axpy(b, self.col(k), dst);
                }
            }
        }
        out
    }

    /// `selfᴴ · other` without forming the adjoint.
    pub fn adjoint_matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "adjoint_matmul dimension mismatch");
        Matrix::from_fn(self.cols, other.cols, |i, j| dotc(self.col(i), other.col(j)))
    }

    pub fn mul_vec(&self, x: &Vector) -> Vector {
        assert_eq!(self.cols, x.len(), "mul_vec dimension mismatch");
        let mut y = vec![ZERO; self.rows];
        for k in 0..self.cols {
            if x[k] != ZERO {
                axpy(x[k], self.col(k), &mut y);
            }
        }
        Vector::from_vec(y)
    }

    /// `selfᴴ · x`
    pub fn adjoint_mul_vec(&self, x: &Vector) -> Vector {
        assert_eq!(self.rows, x.len(), "adjoint_mul_vec dimension mismatch");
        Vector::from_vec(
            (0..self.cols)
                .map(|j| dotc(self.col(j), x.as_slice()))
                .collect(),
        )
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape(), "add dimension mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape(), "sub dimension mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, alpha: Scalar) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| alpha * z).collect(),
        }
    }

    /// Stack `self` on top of `other`.
    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols, "vstack column mismatch");
        let rows = self.rows + other.rows;
        Matrix::from_fn(rows, self.cols, |i, j| {
            if i < self.rows {
                self[(i, j)]
            } else {
                other[(i - self.rows, j)]
            }
        })
    }

    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "hstack row mismatch");
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix {
            rows: self.rows,
            cols: self.cols + other.cols,
            data,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest column 2-norm.
    pub fn max_column_norm(&self) -> f64 {
        (0..self.cols).fold(0.0, |m, j| m.max(norm2(self.col(j))))
    }

    pub fn check_finite(&self) -> Result<()> {
        for j in 0..self.cols {
            for i in 0..self.rows {
                let z = self[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Scalar;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Scalar {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

/// `σ₁(A)`; 0 for the zero matrix and for matrices with an empty dimension.
pub fn spectral_norm(a: &Matrix) -> Result<f64> {
    a.check_finite()?;
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(0.0);
    }
    let s = crate::svd::singular_values(a)?;
    Ok(s[0])
}

/// `sqrt(‖A‖₂² + ‖b‖₂²)`, the norm used for data pairs `(A, b)`.
pub fn pair_norm(a: &Matrix, b: &Vector) -> Result<f64> {
    if a.rows() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows, vector has length {}",
            a.rows(),
            b.len()
        )));
    }
    b.check_finite()?;
    let na = spectral_norm(a)?;
    Ok(na.hypot(b.norm()))
}

/// Householder reflector `P = I − τ v vᴴ` with `v[0] = 1` mapping `x` to `β e₁`.
///
/// `P` is Hermitian and unitary (`τ` is real). Returns `(τ, β)` and overwrites
/// `x[1..]` with `v[1..]`. `β` carries the phase of `x[0]` rather than being
/// real; the SVD removes those phases afterwards.
pub(crate) fn householder(x: &mut [Scalar]) -> (f64, Scalar) {
    let alpha = x[0];
    let tail = norm2(&x[1..]);
    if tail == 0.0 {
        return (0.0, alpha);
    }
    let xnorm = alpha.norm().hypot(tail);
    let phase = if alpha == ZERO {
        ONE
    } else {
        alpha / alpha.norm()
    };
    let beta = -phase * xnorm;
    let v0 = alpha - beta;
    let inv = ONE / v0;
    for z in x[1..].iter_mut() {
        *z *= inv;
    }
    // vᴴv = 1 + ‖tail‖²/|v0|²,  τ = 2 / vᴴv
    let vv = 1.0 + (tail / v0.norm()).powi(2);
    (2.0 / vv, beta)
}

/// Apply `P = I − τ v vᴴ` (with `v[0] = 1`, `v[1..] = tail`) to `y` in place.
#[inline]
pub(crate) fn apply_householder(tau: f64, tail: &[Scalar], y: &mut [Scalar]) {
    if tau == 0.0 {
        return;
    }
    let s = (y[0] + dotc(tail, &y[1..])) * tau;
    y[0] -= s;
    for (yi, vi) in y[1..].iter_mut().zip(tail) {
        *yi -= s * vi;
    }
}

/// Compact Householder QR: reflectors stored below the diagonal of `a`.
struct HouseholderQr {
    a: Matrix,
    taus: Vec<f64>,
}

fn householder_qr(mut a: Matrix) -> HouseholderQr {
    let (m, n) = a.shape();
    let k = m.min(n);
    let mut taus = Vec::with_capacity(k);
    for j in 0..k {
        let (tau, beta) = householder(&mut a.col_mut(j)[j..]);
        let tail: Vec<Scalar> = a.col(j)[j + 1..].to_vec();
        a[(j, j)] = beta;
        for jj in j + 1..n {
            apply_householder(tau, &tail, &mut a.col_mut(jj)[j..]);
        }
        taus.push(tau);
    }
    HouseholderQr { a, taus }
}

impl HouseholderQr {
    /// `y ← Qᴴ y`
    fn apply_qh(&self, y: &mut [Scalar]) {
        for (j, &tau) in self.taus.iter().enumerate() {
            apply_householder(tau, &self.a.col(j)[j + 1..], &mut y[j..]);
        }
    }

    /// `y ← Q y`
    fn apply_q(&self, y: &mut [Scalar]) {
        for (j, &tau) in self.taus.iter().enumerate().rev() {
            apply_householder(tau, &self.a.col(j)[j + 1..], &mut y[j..]);
        }
    }

    fn q_columns(&self, count: usize) -> Matrix {
        let m = self.a.rows();
        let mut q = Matrix::zeros(m, count);
        for j in 0..count {
            let col = q.col_mut(j);
            col[j] = ONE;
            self.apply_q(col);
        }
        q
    }

    fn r(&self) -> Matrix {
        let (m, n) = self.a.shape();
        let k = m.min(n);
        Matrix::from_fn(k, n, |i, j| if i <= j { self.a[(i, j)] } else { ZERO })
    }
}

/// Thin QR factorization `A = Q R`, `Q` of size `m × min(m,n)`.
///
/// A column whose diagonal entry of `R` falls below `n·ε·‖A‖_F` is reported as
/// `DegenerateColumn`.
pub fn qr(a: &Matrix) -> Result<(Matrix, Matrix)> {
    a.check_finite()?;
    let (m, n) = a.shape();
    let k = m.min(n);
    let scale = a.frobenius_norm();
    let f = householder_qr(a.clone());
    let tol = (n.max(1) as f64) * f64::EPSILON * scale;
    for j in 0..k {
        if f.a[(j, j)].norm() <= tol {
            return Err(Error::DegenerateColumn(j));
        }
    }
    Ok((f.q_columns(k), f.r()))
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns of `b` (full Householder QR, trailing columns).
pub fn orthogonal_complement(b: &Matrix) -> Matrix {
    let (n, k) = b.shape();
    let f = householder_qr(b.clone());
    let mut out = Matrix::zeros(n, n - k.min(n));
    for (c, j) in (k.min(n)..n).enumerate() {
        let col = out.col_mut(c);
        col[j] = ONE;
        f.apply_q(col);
    }
    out
}

/// Least-squares solution of `min ‖A x − b‖₂` for `A` of full column rank.
///
/// Fails with `SingularAugmentedSystem` when `R` has a diagonal entry below
/// `n·ε·‖A‖_F`; callers that build augmented systems rely on that check.
pub fn least_squares(a: &Matrix, b: &Vector) -> Result<Vector> {
    let (m, n) = a.shape();
    if m != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {m} rows, vector has length {}",
            b.len()
        )));
    }
    if m < n {
        return Err(Error::DimensionMismatch(format!(
            "least squares needs rows >= cols, got {m}x{n}"
        )));
    }
    a.check_finite()?;
    b.check_finite()?;
    let scale = a.frobenius_norm();
    let f = householder_qr(a.clone());
    let mut y = b.as_slice().to_vec();
    f.apply_qh(&mut y);
    let tol = (n.max(1) as f64) * f64::EPSILON * scale;
    let mut x = vec![ZERO; n];
    for i in (0..n).rev() {
        let d = f.a[(i, i)];
        if d.norm() <= tol {
            return Err(Error::SingularAugmentedSystem);
        }
        let mut s = y[i];
        for j in i + 1..n {
            s -= f.a[(i, j)] * x[j];
        }
        x[i] = s / d;
    }
    Ok(Vector::from_vec(x))
}

/// Square solve by LU with partial pivoting. Exactly singular pivots error.
pub fn lu_solve(a: &Matrix, b: &Vector) -> Result<Vector> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "lu_solve needs a square system, got {}x{} and rhs {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    a.check_finite()?;
    b.check_finite()?;
    let mut lu = a.clone();
    let mut x = b.as_slice().to_vec();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| lu[(i, k)].norm().total_cmp(&lu[(j, k)].norm()))
            .unwrap_or(k);
        if lu[(p, k)] == ZERO {
            return Err(Error::DegenerateColumn(k));
        }
        if p != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = t;
            }
            x.swap(k, p);
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let l = lu[(i, k)] / pivot;
            lu[(i, k)] = l;
            if l != ZERO {
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= l * u;
                }
                let xk = x[k];
                x[i] -= l * xk;
            }
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= lu[(i, j)] * x[j];
        }
        x[i] = s / lu[(i, i)];
    }
    Ok(Vector::from_vec(x))
}
