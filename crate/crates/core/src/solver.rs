//! General numerical solution `sol_θ(A, b)` and the particular-solution
//! methods built around it.
//!
//! With `b_θ = U_r U_rᴴ b`, the backward error of projecting the data onto
//! the nearest consistent rank-`r` system is
//! `‖(A, b) − (A_θ, b_θ)‖ = sqrt(σ_{r+1}² + ‖b − b_θ‖²)`. Below `θ` the
//! solution set is `A_θ†b + Kernel(A_θ)`; above it the set is empty.

use crate::dense::{least_squares, Matrix, Vector};
use crate::error::{Error, Result};
use crate::grassmann::{canonicalize_affine, AffineSolution, SolutionSet, Subspace};
use crate::rank::{check_theta, exact_rank_of, ThetaProjection, GUARD_MIN, RANK_FLOOR};
use crate::svd::{singular_values, svd};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Kernel-constrained least squares on `[μNᴴ; A] x = [0; b]`.
    HighRank,
    /// `V_r diag(1/σ) U_rᴴ b`.
    TruncatedSvd,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::HighRank => "HighRank",
            Branch::TruncatedSvd => "TruncatedSvd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Condition {
    Finite(f64),
    Infinite,
}

impl Condition {
    pub fn value(self) -> f64 {
        match self {
            Condition::Finite(k) => k,
            Condition::Infinite => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub theta: f64,
    /// Kernel-constraint weight; `σ_r(A_θ)` when absent.
    pub mu: Option<f64>,
    /// HighRank branch when `n − r ≤ threshold`; `⌈n/10⌉` when absent.
    pub branch_threshold: Option<usize>,
    /// Also compute a Tikhonov solution with this `α`.
    pub tikhonov_alpha: Option<f64>,
    /// Relative guard band for θ collisions.
    pub guard: f64,
}

impl SolverConfig {
    pub fn new(theta: f64) -> Self {
        SolverConfig {
            theta,
            mu: None,
            branch_threshold: None,
            tikhonov_alpha: None,
            guard: GUARD_MIN,
        }
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = Some(mu);
        self
    }

    pub fn with_branch_threshold(mut self, t: usize) -> Self {
        self.branch_threshold = Some(t);
        self
    }

    pub fn with_tikhonov(mut self, alpha: f64) -> Self {
        self.tikhonov_alpha = Some(alpha);
        self
    }

    pub fn with_guard(mut self, guard: f64) -> Self {
        self.guard = guard;
        self
    }

    fn validate(&self) -> Result<()> {
        check_theta(self.theta)?;
        for (name, v) in [("mu", self.mu), ("alpha", self.tikhonov_alpha)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "{name} must be positive and finite, got {v}"
                    )));
                }
            }
        }
        if !(self.guard.is_finite() && self.guard >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "guard must be nonnegative, got {}",
                self.guard
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub theta: f64,
    pub rank: usize,
    pub rows: usize,
    pub cols: usize,
    /// `σ₁/σ_r`; absent when `r = 0`.
    pub sensitivity: Option<f64>,
    pub classic_condition: Condition,
    pub backward_error: f64,
    /// `max{‖A x̂ − b‖₂, max_j ‖A n_j‖₂}`; absent for the empty set.
    pub residual: Option<f64>,
    pub branch: Option<Branch>,
    pub mu: Option<f64>,
    /// Full spectrum of `A`.
    pub sigma: Vec<f64>,
    /// Diagnostic ξ from the forward-error estimate of the general solution.
    pub xi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralSolution {
    pub set: SolutionSet,
    pub report: SolveReport,
    pub tikhonov: Option<Vector>,
}

impl GeneralSolution {
    pub fn dimension(&self) -> isize {
        self.set.dimension()
    }

    pub fn affine(&self) -> Option<&AffineSolution> {
        self.set.as_affine()
    }
}

fn check_system(a: &Matrix, b: &Vector) -> Result<()> {
    if a.rows() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix with right-hand side of length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    a.check_finite()?;
    b.check_finite()
}

fn classic_from_spectrum(sigma: &[f64]) -> Condition {
    match (sigma.first(), sigma.last()) {
        (Some(&s1), Some(&sn)) if s1 > 0.0 && sn > RANK_FLOOR * s1 => Condition::Finite(s1 / sn),
        _ => Condition::Infinite,
    }
}

/// `pair_norm(A − A_θ, b − b_θ)` from a projection.
fn projected_backward_error(p: &ThetaProjection, b: &Vector) -> f64 {
    let bt = p.project_rhs(b);
    p.sigma_r_plus_1().hypot(b.sub(&bt).norm())
}

fn xi_diagnostic(p: &ThetaProjection, b: &Vector) -> Option<f64> {
    let kappa = p.sensitivity().ok()?;
    let a_norm = p.spectrum()[0];
    let pinv = p.pinv_norm();
    let gap = pinv * p.sigma_r_plus_1();
    if gap >= 1.0 {
        return None;
    }
    let xb = p.apply_pinv(b).norm();
    let zeta = xb + (1.0 + xb) / (1.0 - gap);
    let xi = kappa * (zeta * zeta + 1.0).sqrt() / (a_norm * (1.0 - gap));
    xi.is_finite().then_some(xi)
}

/// General numerical solution of `A x = b` within `θ`: the solution set of
/// `A_θ x = b_θ`, or the empty set when the backward error exceeds `θ`.
pub fn solve_general(a: &Matrix, b: &Vector, cfg: &SolverConfig) -> Result<GeneralSolution> {
    cfg.validate()?;
    check_system(a, b)?;
    let (m, n) = a.shape();
    let f = svd(a)?;
    let p = ThetaProjection::from_svd(&f, cfg.theta, cfg.guard)?;
    let r = p.rank();
    let be = projected_backward_error(&p, b);
    if (be - cfg.theta).abs() <= cfg.guard * cfg.theta {
        return Err(Error::BackwardErrorOnTheta {
            theta: cfg.theta,
            backward_error: be,
            guard: cfg.guard,
        });
    }
    let tikhonov = match cfg.tikhonov_alpha {
        Some(alpha) => Some(tikhonov_solve(a, b, alpha)?),
        None => None,
    };
    let mut report = SolveReport {
        theta: cfg.theta,
        rank: r,
        rows: m,
        cols: n,
        sensitivity: p.sensitivity().ok(),
        classic_condition: classic_from_spectrum(&f.sigma),
        backward_error: be,
        residual: None,
        branch: None,
        mu: None,
        sigma: f.sigma.clone(),
        xi: None,
    };
    if be > cfg.theta {
        return Ok(GeneralSolution {
            set: SolutionSet::Empty,
            report,
            tikhonov,
        });
    }

    let kernel = p.kernel();
    let threshold = cfg.branch_threshold.unwrap_or(n.div_ceil(10));
    let (branch, point) = if r > 0 && n - r <= threshold {
        let mu = cfg.mu.unwrap_or(p.sigma()[r - 1]);
        report.mu = Some(mu);
        (Branch::HighRank, kernel_constrained_solve(a, b, &kernel, mu)?)
    } else {
        (Branch::TruncatedSvd, p.apply_pinv(b))
    };
    let sol = canonicalize_affine(&point, &kernel)?;

    let mut residual = a.mul_vec(sol.anchor()).sub(b).norm();
    if kernel.dim() > 0 {
        let an = a.matmul(kernel.basis());
        for j in 0..an.cols() {
            residual = residual.max(crate::dense::norm2(an.col(j)));
        }
    }
    report.residual = Some(residual);
    report.branch = Some(branch);
    report.xi = xi_diagnostic(&p, b);
    Ok(GeneralSolution {
        set: SolutionSet::Affine(sol),
        report,
        tikhonov,
    })
}

/// `A_θ† b`.
pub fn truncated_svd_solution(a: &Matrix, b: &Vector, theta: f64) -> Result<Vector> {
    check_theta(theta)?;
    check_system(a, b)?;
    let p = ThetaProjection::from_svd(&svd(a)?, theta, GUARD_MIN)?;
    Ok(p.apply_pinv(b))
}

/// Minimizer of `‖Ax − b‖² + α²‖x‖²`, from the stacked system `[A; αI]`.
pub fn tikhonov_solve(a: &Matrix, b: &Vector, alpha: f64) -> Result<Vector> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be positive and finite, got {alpha}"
        )));
    }
    check_system(a, b)?;
    let n = a.cols();
    let stacked = a.vstack(&Matrix::identity(n).scale(crate::dense::re(alpha)));
    let mut rhs = b.as_slice().to_vec();
    rhs.resize(a.rows() + n, crate::dense::ZERO);
    least_squares(&stacked, &Vector::from_vec(rhs))
}

/// Least-squares solution of `[μNᴴ; A] x = [0; b]`, i.e.
/// `x = (AᴴA + μ²NNᴴ)⁻¹ Aᴴ b`.
pub fn kernel_constrained_solve(a: &Matrix, b: &Vector, kernel: &Subspace, mu: f64) -> Result<Vector> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "mu must be positive and finite, got {mu}"
        )));
    }
    check_system(a, b)?;
    if kernel.ambient_dim() != a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "kernel basis lives in C^{}, matrix has {} columns",
            kernel.ambient_dim(),
            a.cols()
        )));
    }
    let k = kernel.dim();
    let n = a.cols();
    if k + a.rows() < n {
        return Err(Error::SingularAugmentedSystem);
    }
    let top = kernel.basis().adjoint().scale(crate::dense::re(mu));
    let stacked = top.vstack(a);
    let mut rhs = vec![crate::dense::ZERO; k];
    rhs.extend_from_slice(b.as_slice());
    least_squares(&stacked, &Vector::from_vec(rhs))
}

/// `‖A_θ‖₂ ‖A_θ†‖₂ = σ₁/σ_r`.
pub fn sensitivity(p: &ThetaProjection) -> Result<f64> {
    p.sensitivity()
}

/// `κ(A) = σ₁/σ_min`, infinite when `σ_min ≤ RANK_FLOOR · σ₁`.
pub fn classic_condition(a: &Matrix) -> Result<Condition> {
    Ok(classic_from_spectrum(&singular_values(a)?))
}

/// `sqrt(σ_{r+1}² + ‖b − b_θ‖²)`.
pub fn backward_error(a: &Matrix, b: &Vector, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    check_system(a, b)?;
    let p = ThetaProjection::from_svd(&svd(a)?, theta, GUARD_MIN)?;
    Ok(projected_backward_error(&p, b))
}

/// Exact rank of `A` (singular values above `RANK_FLOOR · σ₁`).
pub fn exact_rank(a: &Matrix) -> Result<usize> {
    Ok(exact_rank_of(&singular_values(a)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::re;

    #[test]
    fn identity_system() {
        let b = Vector::from_real(&[1.0, -2.0, 3.0]);
        let g = solve_general(&Matrix::identity(3), &b, &SolverConfig::new(0.5)).unwrap();
        let s = g.affine().unwrap();
        assert!(s.anchor().sub(&b).norm() < 1e-15);
        assert_eq!(s.dim(), 0);
        assert_eq!(g.report.backward_error, 0.0);
        assert_eq!(g.report.sensitivity, Some(1.0));
        assert_eq!(g.report.classic_condition, Condition::Finite(1.0));
    }

    #[test]
    fn pure_residual_is_empty() {
        let a = Matrix::diag_real(&[1.0, 0.0]);
        let b = Vector::from_real(&[0.0, 1.0]);
        let g = solve_general(&a, &b, &SolverConfig::new(0.5)).unwrap();
        assert!(g.set.is_empty());
        assert_eq!(g.dimension(), -1);
        assert!((g.report.backward_error - 1.0).abs() < 1e-15);
        assert_eq!(g.report.residual, None);
        assert_eq!(backward_error(&a, &b, 0.5).unwrap(), 1.0);
        assert_eq!(classic_condition(&a).unwrap(), Condition::Infinite);
    }

    #[test]
    fn backward_error_on_theta() {
        let a = Matrix::diag_real(&[1.0, 0.0]);
        let b = Vector::from_real(&[0.0, 0.25]);
        assert!(matches!(
            solve_general(&a, &b, &SolverConfig::new(0.25)),
            Err(Error::BackwardErrorOnTheta { .. })
        ));
    }

    #[test]
    fn truncated_svd_examples() {
        let b = Vector::from_real(&[1.0, 2.0]);
        let x = truncated_svd_solution(&Matrix::identity(2), &b, 0.5).unwrap();
        assert!(x.sub(&b).norm() < 1e-15);
        let a = Matrix::diag_real(&[2.0, 1e-9]);
        let x = truncated_svd_solution(&a, &Vector::from_real(&[2.0, 0.0]), 1e-4).unwrap();
        assert!(x.sub(&Vector::from_real(&[1.0, 0.0])).norm() < 1e-15);
    }

    #[test]
    fn tikhonov_examples() {
        let b = Vector::from_real(&[1.0, 2.0, 3.0]);
        let x = tikhonov_solve(&Matrix::identity(3), &b, 1e-8).unwrap();
        assert!(x.sub(&b).norm() < 1e-7);
        let x = tikhonov_solve(
            &Matrix::diag_real(&[1.0]),
            &Vector::from_real(&[1.0]),
            1.0,
        )
        .unwrap();
        assert!((x[0] - re(0.5)).norm() < 1e-15);
        assert!(tikhonov_solve(&Matrix::identity(1), &Vector::from_real(&[1.0]), 0.0).is_err());
    }

    #[test]
    fn kernel_constrained_examples() {
        let a = Matrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 3.0]]);
        let b = Vector::from_real(&[1.0, 1.0]);
        let x = kernel_constrained_solve(&a, &b, &Subspace::trivial(2), 1.0).unwrap();
        assert!(a.mul_vec(&x).sub(&b).norm() < 1e-14);

        let a = Matrix::diag_real(&[1.0, 0.0]);
        let n = Subspace::span(&Matrix::from_real_rows(&[&[0.0], &[1.0]])).unwrap();
        let x = kernel_constrained_solve(&a, &Vector::from_real(&[3.0, 0.0]), &n, 1.0).unwrap();
        assert!(x.sub(&Vector::from_real(&[3.0, 0.0])).norm() < 1e-15);

        assert_eq!(
            kernel_constrained_solve(&a, &Vector::from_real(&[3.0, 0.0]), &Subspace::trivial(2), 1.0),
            Err(Error::SingularAugmentedSystem)
        );
    }

    #[test]
    fn branches_agree_on_small_system() {
        let a = Matrix::from_real_rows(&[
            &[1.0, 2.0, 3.0],
            &[2.0, 4.0, 6.0],
            &[1.0, 0.0, 1.0],
        ]);
        let b = a.mul_vec(&Vector::from_real(&[1.0, 1.0, 1.0]));
        let hi = solve_general(&a, &b, &SolverConfig::new(1e-8).with_branch_threshold(3)).unwrap();
        let lo = solve_general(&a, &b, &SolverConfig::new(1e-8).with_branch_threshold(0)).unwrap();
        assert_eq!(hi.report.branch, Some(Branch::HighRank));
        assert_eq!(lo.report.branch, Some(Branch::TruncatedSvd));
        let d = crate::grassmann::affine_distance(hi.affine().unwrap(), lo.affine().unwrap()).unwrap();
        assert!(d < 1e-12, "{d}");
        assert!(hi.report.residual.unwrap() < 1e-12);
    }

    #[test]
    fn zero_rank_keeps_whole_space() {
        let a = Matrix::diag_real(&[1e-6, 0.0]);
        let b = Vector::from_real(&[1e-7, 0.0]);
        let g = solve_general(&a, &b, &SolverConfig::new(1e-3)).unwrap();
        let s = g.affine().unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.anchor().norm(), 0.0);
        assert_eq!(g.report.sensitivity, None);
    }

    #[test]
    fn tikhonov_is_reported_when_requested() {
        let g = solve_general(
            &Matrix::identity(2),
            &Vector::from_real(&[1.0, 1.0]),
            &SolverConfig::new(0.5).with_tikhonov(1.0),
        )
        .unwrap();
        let x = g.tikhonov.unwrap();
        assert!((x[0] - re(0.5)).norm() < 1e-15);
    }
}
