//! Numerical rank, θ-projection, numerical kernel and pseudoinverses.
//!
//! `rank_θ(A)` is the number of singular values strictly above `θ`. The
//! projection, kernel and rank are undefined when `θ` coincides with a
//! singular value, which in floating point means "lies within
//! `guard · θ` of one".

use crate::dense::{Matrix, Scalar, Vector, ZERO};
use crate::error::{Error, Result};
use crate::grassmann::Subspace;
use crate::svd::{svd, Svd};

/// Default guard band around `θ`, relative to `θ`.
pub const GUARD_MIN: f64 = 1e-9;

/// Singular values at or below `RANK_FLOOR · σ₁` count as zero for the exact
/// pseudoinverse and exact rank.
pub const RANK_FLOOR: f64 = 1e-14;

/// Outcome of a rank decision at tolerance `θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankDecision {
    pub theta: f64,
    pub rank: usize,
    /// `σ_r`, absent when `r = 0`.
    pub sigma_r: Option<f64>,
    /// `σ_{r+1}`, 0 when `r = min(m, n)`.
    pub sigma_r_plus_1: f64,
    /// `min_j |θ − σ_j| / θ`; infinite for an empty spectrum.
    pub guard: f64,
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if theta.is_finite() && theta > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "theta must be positive and finite, got {theta}"
        )))
    }
}

/// Rank decision on a precomputed spectrum (descending).
pub fn decide(sigma: &[f64], theta: f64, guard: f64) -> Result<RankDecision> {
    check_theta(theta)?;
    let mut rel = f64::INFINITY;
    for (j, &s) in sigma.iter().enumerate() {
        let gap = (theta - s).abs();
        if gap <= guard * theta {
            return Err(Error::ThetaOnSingularValue {
                theta,
                sigma: s,
                index: j + 1,
                guard,
            });
        }
        rel = rel.min(gap / theta);
    }
    let rank = sigma.iter().take_while(|&&s| s > theta).count();
    Ok(RankDecision {
        theta,
        rank,
        sigma_r: rank.checked_sub(1).map(|i| sigma[i]),
        sigma_r_plus_1: sigma.get(rank).copied().unwrap_or(0.0),
        guard: rel,
    })
}

/// Number of singular values above `RANK_FLOOR · σ₁`.
pub fn exact_rank_of(sigma: &[f64]) -> usize {
    let s1 = sigma.first().copied().unwrap_or(0.0);
    sigma.iter().take_while(|&&s| s > RANK_FLOOR * s1 && s > 0.0).count()
}

pub fn numerical_rank(a: &Matrix, theta: f64) -> Result<RankDecision> {
    numerical_rank_with_guard(a, theta, GUARD_MIN)
}

pub fn numerical_rank_with_guard(a: &Matrix, theta: f64, guard: f64) -> Result<RankDecision> {
    check_theta(theta)?;
    let sigma = crate::svd::singular_values(a)?;
    decide(&sigma, theta, guard)
}

/// Rank-`r` truncation `A_θ = U_r diag(σ) V_rᴴ`, kept in factored form
/// together with the full spectrum and the numerical kernel basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaProjection {
    rows: usize,
    cols: usize,
    decision: RankDecision,
    u_r: Matrix,
    sigma: Vec<f64>,
    v_r: Matrix,
    spectrum: Vec<f64>,
    kernel: Matrix,
}

impl ThetaProjection {
    pub fn from_svd(f: &Svd, theta: f64, guard: f64) -> Result<Self> {
        let decision = decide(&f.sigma, theta, guard)?;
        let r = decision.rank;
        let n = f.cols();
        Ok(ThetaProjection {
            rows: f.rows(),
            cols: n,
            u_r: f.u.columns(0..r),
            sigma: f.sigma[..r].to_vec(),
            v_r: f.v.columns(0..r),
            spectrum: f.sigma.clone(),
            kernel: f.v.columns(r..n),
            decision,
        })
    }

    pub fn source_dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn rank(&self) -> usize {
        self.decision.rank
    }

    pub fn theta(&self) -> f64 {
        self.decision.theta
    }

    pub fn decision(&self) -> &RankDecision {
        &self.decision
    }

    pub fn u_r(&self) -> &Matrix {
        &self.u_r
    }

    /// Retained singular values, descending.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn v_r(&self) -> &Matrix {
        &self.v_r
    }

    /// Full spectrum of the source matrix.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    /// `σ_{r+1}(A) = ‖A − A_θ‖₂`.
    pub fn sigma_r_plus_1(&self) -> f64 {
        self.decision.sigma_r_plus_1
    }

    /// `‖A_θ‖₂`.
    pub fn norm(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    /// `‖A_θ†‖₂ = 1/σ_r`, 0 when `r = 0`.
    pub fn pinv_norm(&self) -> f64 {
        self.sigma.last().map(|s| 1.0 / s).unwrap_or(0.0)
    }

    /// `‖A_θ‖₂ ‖A_θ†‖₂ = σ₁/σ_r`.
    pub fn sensitivity(&self) -> Result<f64> {
        match (self.sigma.first(), self.sigma.last()) {
            (Some(s1), Some(sr)) => Ok(s1 / sr),
            _ => Err(Error::ZeroRank),
        }
    }

    /// Orthonormal basis of `Kernel(A_θ)`: right singular vectors `r+1..n`.
    pub fn kernel(&self) -> Subspace {
        Subspace::from_orthonormal_unchecked(self.kernel.clone())
    }

    pub fn materialize(&self) -> Matrix {
        let mut us = self.u_r.clone();
        for (j, &s) in self.sigma.iter().enumerate() {
            us.col_mut(j).iter_mut().for_each(|z| *z *= s);
        }
        if self.sigma.is_empty() {
            return Matrix::zeros(self.rows, self.cols);
        }
        us.matmul(&self.v_r.adjoint())
    }

    /// `b_θ = U_r U_rᴴ b`, the projection of `b` onto `Range(A_θ)`.
    pub fn project_rhs(&self, b: &Vector) -> Vector {
        let c = self.u_r.adjoint_mul_vec(b);
        if c.is_empty() {
            return Vector::zeros(self.rows);
        }
        self.u_r.mul_vec(&c)
    }

    /// `A_θ† b = V_r diag(1/σ) U_rᴴ b`.
    pub fn apply_pinv(&self, b: &Vector) -> Vector {
        let mut c = self.u_r.adjoint_mul_vec(b);
        for (z, &s) in c.as_mut_slice().iter_mut().zip(&self.sigma) {
            *z /= s;
        }
        if c.is_empty() {
            return Vector::zeros(self.cols);
        }
        self.v_r.mul_vec(&c)
    }
}

pub fn theta_projection(a: &Matrix, theta: f64) -> Result<ThetaProjection> {
    theta_projection_with_guard(a, theta, GUARD_MIN)
}

pub fn theta_projection_with_guard(a: &Matrix, theta: f64, guard: f64) -> Result<ThetaProjection> {
    check_theta(theta)?;
    ThetaProjection::from_svd(&svd(a)?, theta, guard)
}

pub fn numerical_kernel(a: &Matrix, theta: f64) -> Result<Subspace> {
    Ok(theta_projection(a, theta)?.kernel())
}

pub fn numerical_kernel_with_guard(a: &Matrix, theta: f64, guard: f64) -> Result<Subspace> {
    Ok(theta_projection_with_guard(a, theta, guard)?.kernel())
}

/// `sol_θ(A, 0) = Kernel(A_θ)`; the same subspace as [`numerical_kernel`].
pub fn homogeneous_solution(a: &Matrix, theta: f64) -> Result<Subspace> {
    numerical_kernel(a, theta)
}

/// `Σ σ_j⁻¹ v_j u_jᴴ` over the factor columns `0..r`.
fn pinv_from_factors(u: &Matrix, sigma: &[f64], v: &Matrix, r: usize) -> Matrix {
    let (m, n) = (u.rows(), v.rows());
    let mut out = Matrix::zeros(n, m);
    for k in 0..r {
        let inv = 1.0 / sigma[k];
        let vk = v.col(k);
        let uk = u.col(k);
        for j in 0..m {
            let w: Scalar = uk[j].conj() * inv;
            if w == ZERO {
                continue;
            }
            for (dst, &vi) in out.col_mut(j).iter_mut().zip(vk) {
                *dst += vi * w;
            }
        }
    }
    out
}

/// Moore–Penrose inverse with exact rank `#{σ_j > RANK_FLOOR · σ₁}`.
pub fn pseudoinverse(a: &Matrix) -> Result<Matrix> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Ok(Matrix::zeros(n, m));
    }
    let f = svd(a)?;
    Ok(pinv_from_factors(&f.u, &f.sigma, &f.v, exact_rank_of(&f.sigma)))
}

/// `A_θ† = V_r diag(σ⁻¹) U_rᴴ`.
pub fn truncated_pseudoinverse(p: &ThetaProjection) -> Matrix {
    pinv_from_factors(&p.u_r, &p.sigma, &p.v_r, p.rank())
}
