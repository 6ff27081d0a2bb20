//! Full singular value decomposition.
//!
//! Householder bidiagonalization brings `A` to upper bidiagonal form; a
//! diagonal unitary scaling then makes the bidiagonal real and nonnegative, and
//! implicit-shift QR sweeps (Wilkinson shift, zero-diagonal chasing) diagonalize
//! it while accumulating the rotations into `U` and `V`.

use crate::dense::{apply_householder, householder, Matrix, Scalar, ONE, ZERO};
use crate::error::{Error, Result};

/// QR sweeps allowed per singular value before giving up.
const SWEEPS_PER_VALUE: usize = 75;

/// `A = U · diag(sigma) · Vᴴ` with `U` `m×m`, `V` `n×n`, `sigma` of length
/// `min(m, n)` sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

impl Svd {
    pub fn rows(&self) -> usize {
        self.u.rows()
    }

    pub fn cols(&self) -> usize {
        self.v.rows()
    }

    /// `σ₁`, or 0 when there are no singular values.
    pub fn norm(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    /// `U · diag(σ) · Vᴴ`, used by tests and diagnostics.
    pub fn reconstruct(&self) -> Matrix {
        let (m, n) = (self.rows(), self.cols());
        let mut us = Matrix::zeros(m, self.sigma.len());
        for (j, &s) in self.sigma.iter().enumerate() {
            for (dst, src) in us.col_mut(j).iter_mut().zip(self.u.col(j)) {
                *dst = src * s;
            }
        }
        let vk = self.v.columns(0..self.sigma.len());
        let out = us.matmul(&vk.adjoint());
        debug_assert_eq!(out.shape(), (m, n));
        out
    }
}

/// Full SVD with canonical singular-vector phases.
///
/// Every column of `V` is rotated so that its largest-magnitude entry is real
/// and positive; the matching column of `U` gets the same rotation. Columns of
/// `U` beyond `min(m, n)` are canonicalized on their own.
pub fn svd(a: &Matrix) -> Result<Svd> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(Error::DimensionMismatch(format!(
            "SVD of an empty {m}x{n} matrix"
        )));
    }
    a.check_finite()?;
    let (mut u, sigma, mut v) = if m >= n {
        let (u, s, v) = decompose(a.clone(), true)?;
        (u.unwrap(), s, v.unwrap())
    } else {
        let (u, s, v) = decompose(a.adjoint(), true)?;
        (v.unwrap(), s, u.unwrap())
    };
    let p = sigma.len();
    for j in 0..n {
        let phase = leading_phase(v.col(j));
        if phase != ONE {
            let rot = phase.conj();
            v.col_mut(j).iter_mut().for_each(|z| *z *= rot);
            if j < p {
                u.col_mut(j).iter_mut().for_each(|z| *z *= rot);
            }
        }
    }
    for j in p..m {
        let rot = leading_phase(u.col(j)).conj();
        u.col_mut(j).iter_mut().for_each(|z| *z *= rot);
    }
    Ok(Svd { u, sigma, v })
}

/// Singular values only, descending.
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Ok(Vec::new());
    }
    a.check_finite()?;
    let work = if m >= n { a.clone() } else { a.adjoint() };
    Ok(decompose(work, false)?.1)
}

/// Unit phase of the first entry of largest magnitude (1 for a zero vector).
fn leading_phase(x: &[Scalar]) -> Scalar {
    let mut best = 0usize;
    let mut best_abs = -1.0f64;
    for (i, z) in x.iter().enumerate() {
        let a = z.norm();
        if a > best_abs {
            best_abs = a;
            best = i;
        }
    }
    if best_abs <= 0.0 {
        ONE
    } else {
        x[best] / best_abs
    }
}

fn phase_of(z: Scalar) -> Scalar {
    let a = z.norm();
    if a == 0.0 {
        ONE
    } else {
        z / a
    }
}

/// Decompose a tall (`m ≥ n`) matrix. Vectors are returned uncanonicalized.
fn decompose(mut w: Matrix, vectors: bool) -> Result<(Option<Matrix>, Vec<f64>, Option<Matrix>)> {
    let (m, n) = w.shape();
    debug_assert!(m >= n && n > 0);

    let mut d = vec![ZERO; n];
    let mut e = vec![ZERO; n.saturating_sub(1)];
    let mut left_tau = vec![0.0; n];
    let mut right: Vec<(f64, Vec<Scalar>)> = Vec::with_capacity(n.saturating_sub(2));
    let mut s = vec![ZERO; m];

    for k in 0..n {
        let (tau, beta) = householder(&mut w.col_mut(k)[k..]);
        left_tau[k] = tau;
        d[k] = beta;
        if tau != 0.0 {
            let (head, tail_cols) = w.as_cols_split(k);
            let v_tail = &head[k + 1..];
            for j in 0..n - k - 1 {
                apply_householder(tau, v_tail, &mut tail_cols[j * m + k..(j + 1) * m]);
            }
        }
        if k + 1 >= n {
            continue;
        }
        // Row k, columns k+1..n: reflect the conjugated row.
        let mut x: Vec<Scalar> = (k + 1..n).map(|j| w[(k, j)].conj()).collect();
        let (tau_r, beta_r) = householder(&mut x);
        e[k] = beta_r.conj();
        if tau_r != 0.0 && k + 1 < m {
            // rows k+1..m: row ← row · (I − τ w wᴴ), w = (1, x[1..])
            let rows = k + 1..m;
            let sv = &mut s[rows.clone()];
            sv.iter_mut().for_each(|z| *z = ZERO);
            for (t, j) in (k + 1..n).enumerate() {
                let wj = if t == 0 { ONE } else { x[t] };
                let col = &w.col(j)[rows.clone()];
                for (si, aij) in sv.iter_mut().zip(col) {
                    *si += aij * wj;
                }
            }
            for (t, j) in (k + 1..n).enumerate() {
                let wj = if t == 0 { ONE } else { x[t] };
                let f = wj.conj() * tau_r;
                let col = &mut w.col_mut(j)[rows.clone()];
                for (aij, si) in col.iter_mut().zip(sv.iter()) {
                    *aij -= si * f;
                }
            }
        }
        if k + 2 <= n {
            right.push((tau_r, x[1..].to_vec()));
        }
    }

    // Diagonal phases making the bidiagonal real and nonnegative:
    // B_complex = diag(l) · B_real · diag(r)ᴴ.
    let mut l = vec![ONE; n];
    let mut r = vec![ONE; n];
    let mut dr = vec![0.0; n];
    let mut er = vec![0.0; n.saturating_sub(1)];
    for k in 0..n {
        l[k] = phase_of(d[k] * r[k]);
        dr[k] = d[k].norm();
        if k + 1 < n {
            r[k + 1] = phase_of(l[k].conj() * e[k]).conj();
            er[k] = e[k].norm();
        }
    }

    let (mut u, mut v) = if vectors {
        let mut u = Matrix::identity(m);
        for k in (0..n).rev() {
            let tau = left_tau[k];
            if tau == 0.0 {
                continue;
            }
            let tail = w.col(k)[k + 1..].to_vec();
            for j in k..m {
                apply_householder(tau, &tail, &mut u.col_mut(j)[k..]);
            }
        }
        let mut v = Matrix::identity(n);
        for (k, (tau, tail)) in right.iter().enumerate().rev() {
            if *tau == 0.0 {
                continue;
            }
            for j in k + 1..n {
                apply_householder(*tau, tail, &mut v.col_mut(j)[k + 1..]);
            }
        }
        for k in 0..n {
            if l[k] != ONE {
                u.col_mut(k).iter_mut().for_each(|z| *z *= l[k]);
            }
            if r[k] != ONE {
                v.col_mut(k).iter_mut().for_each(|z| *z *= r[k]);
            }
        }
        (Some(u), Some(v))
    } else {
        (None, None)
    };

    bidiagonal_qr(&mut dr, &mut er, u.as_mut(), v.as_mut())?;

    // Nonnegative values, then a stable descending sort.
    for k in 0..n {
        if dr[k] < 0.0 {
            dr[k] = -dr[k];
            if let Some(v) = v.as_mut() {
                v.col_mut(k).iter_mut().for_each(|z| *z = -*z);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| dr[j].total_cmp(&dr[i]));
    let sigma: Vec<f64> = order.iter().map(|&i| dr[i]).collect();
    if order.iter().enumerate().any(|(i, &o)| i != o) {
        if let Some(u0) = u.as_mut() {
            let src = u0.clone();
            for (dst, &o) in order.iter().enumerate() {
                u0.col_mut(dst).copy_from_slice(src.col(o));
            }
        }
        if let Some(v0) = v.as_mut() {
            let src = v0.clone();
            for (dst, &o) in order.iter().enumerate() {
                v0.col_mut(dst).copy_from_slice(src.col(o));
            }
        }
    }
    Ok((u, sigma, v))
}

#[inline]
fn rotation(f: f64, g: f64) -> (f64, f64, f64) {
    if g == 0.0 {
        (1.0, 0.0, f)
    } else if f == 0.0 {
        (0.0, 1.0, g)
    } else {
        let r = f.hypot(g);
        (f / r, g / r, r)
    }
}

/// `(x_a, x_b) ← (c x_a + s x_b, −s x_a + c x_b)` on two columns.
#[inline]
fn rotate_columns(m: &mut Matrix, a: usize, b: usize, c: f64, s: f64) {
    let (xa, xb) = m.col_pair_mut(a, b);
    for (p, q) in xa.iter_mut().zip(xb.iter_mut()) {
        let (pa, qb) = (*p, *q);
        *p = pa * c + qb * s;
        *q = qb * c - pa * s;
    }
}

/// Diagonalize the real upper bidiagonal `(d, e)` in place.
fn bidiagonal_qr(
    d: &mut [f64],
    e: &mut [f64],
    mut u: Option<&mut Matrix>,
    mut v: Option<&mut Matrix>,
) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let anorm = (0..n).fold(0.0f64, |acc, i| {
        acc.max(d[i].abs() + if i + 1 < n { e[i].abs() } else { 0.0 })
    });
    if anorm == 0.0 {
        return Ok(());
    }
    let budget = SWEEPS_PER_VALUE * n;
    let mut sweeps = 0usize;
    let mut hi = n - 1;

    loop {
        // Deflate converged trailing values.
        while hi > 0 {
            let i = hi - 1;
            if e[i].abs() <= eps * (d[i].abs() + d[i + 1].abs()) || e[i].abs() <= f64::MIN_POSITIVE
            {
                e[i] = 0.0;
                hi -= 1;
            } else {
                break;
            }
        }
        if hi == 0 {
            return Ok(());
        }
        // Find the start of the unreduced block ending at hi.
        let mut lo = hi - 1;
        while lo > 0 {
            let i = lo - 1;
            if e[i].abs() <= eps * (d[i].abs() + d[i + 1].abs()) || e[i].abs() <= f64::MIN_POSITIVE
            {
                e[i] = 0.0;
                break;
            }
            lo -= 1;
        }

        sweeps += 1;
        if sweeps > budget {
            return Err(Error::NoConvergence { sweeps: budget });
        }

        // Negligible diagonal entries split the block with extra rotations.
        let zero_tol = eps * anorm;
        if let Some(i) = (lo..=hi).find(|&i| d[i].abs() <= zero_tol) {
            d[i] = 0.0;
            if i < hi {
                let mut f = e[i];
                e[i] = 0.0;
                for j in i + 1..=hi {
                    let (c, s, r) = rotation(d[j], f);
                    d[j] = r;
                    if j < hi {
                        f = -s * e[j];
                        e[j] *= c;
                    }
                    if let Some(u) = u.as_deref_mut() {
                        rotate_columns(u, j, i, c, s);
                    }
                }
            } else {
                let mut f = e[hi - 1];
                e[hi - 1] = 0.0;
                for j in (lo..hi).rev() {
                    let (c, s, r) = rotation(d[j], f);
                    d[j] = r;
                    if j > lo {
                        f = -s * e[j - 1];
                        e[j - 1] *= c;
                    }
                    if let Some(v) = v.as_deref_mut() {
                        rotate_columns(v, j, hi, c, s);
                    }
                }
            }
            continue;
        }

        // Wilkinson shift from the trailing 2×2 block of BᵀB.
        let dm = d[hi - 1];
        let dn = d[hi];
        let em = e[hi - 1];
        let em1 = if hi - 1 > lo { e[hi - 2] } else { 0.0 };
        let t11 = dm * dm + em1 * em1;
        let t12 = dm * em;
        let t22 = dn * dn + em * em;
        let half = 0.5 * (t11 - t22);
        let disc = half.hypot(t12);
        let mu = if half >= 0.0 {
            t22 - t12 * t12 / (half + disc)
        } else {
            t22 - t12 * t12 / (half - disc)
        };
        let mu = if mu.is_finite() { mu } else { t22 };

        let mut y = d[lo] * d[lo] - mu;
        let mut z = d[lo] * e[lo];
        for k in lo..hi {
            let (c, s, r) = rotation(y, z);
            if k > lo {
                e[k - 1] = r;
            }
            let (dk, ek, dk1) = (d[k], e[k], d[k + 1]);
            d[k] = c * dk + s * ek;
            e[k] = c * ek - s * dk;
            let bulge = s * dk1;
            d[k + 1] = c * dk1;
            if let Some(v) = v.as_deref_mut() {
                rotate_columns(v, k, k + 1, c, s);
            }

            let (c, s, r) = rotation(d[k], bulge);
            d[k] = r;
            let (ek, dk1) = (e[k], d[k + 1]);
            e[k] = c * ek + s * dk1;
            d[k + 1] = c * dk1 - s * ek;
            if k + 1 < hi {
                let ek1 = e[k + 1];
                y = e[k];
                z = s * ek1;
                e[k + 1] = c * ek1;
            }
            if let Some(u) = u.as_deref_mut() {
                rotate_columns(u, k, k + 1, c, s);
            }
        }
    }
}
