//! Closed-form perturbation bounds for singular and ill-conditioned systems.
//!
//! Every evaluator reports the hypotheses it checked. A value is returned only
//! when all of them hold; otherwise the bound is `None` (not applicable).

use crate::dense::{spectral_norm, Matrix, Vector};
use crate::error::{Error, Result};
use crate::rank::{decide, exact_rank_of, GUARD_MIN};
use crate::svd::singular_values;

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub condition: String,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundValue {
    pub name: &'static str,
    pub value: Option<f64>,
    pub hypotheses_met: bool,
    pub hypothesis_report: Vec<Hypothesis>,
    /// The bound holds up to an uncomputable `O(‖Δ‖²)` term.
    pub first_order: bool,
}

impl BoundValue {
    /// The bound, or `f64::NAN` when not applicable.
    pub fn value_or_nan(&self) -> f64 {
        self.value.unwrap_or(f64::NAN)
    }
}

struct Checks(Vec<Hypothesis>);

impl Checks {
    fn new() -> Self {
        Checks(Vec::new())
    }

    fn check(&mut self, condition: impl Into<String>, satisfied: bool) -> &mut Self {
        self.0.push(Hypothesis {
            condition: condition.into(),
            satisfied,
        });
        self
    }

    fn finish(self, name: &'static str, first_order: bool, value: impl FnOnce() -> f64) -> BoundValue {
        let met = self.0.iter().all(|h| h.satisfied);
        let value = if met {
            let v = value();
            v.is_finite().then_some(v.max(0.0))
        } else {
            None
        };
        BoundValue {
            name,
            hypotheses_met: met && value.is_some(),
            value,
            hypothesis_report: self.0,
            first_order,
        }
    }
}

/// Exact data `(A, b)`, perturbation `(ΔA, Δb)` and the rank `r` in force.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundInput {
    pub a: Matrix,
    pub da: Matrix,
    pub b: Option<Vector>,
    pub db: Option<Vector>,
    pub r: usize,
    pub theta: Option<f64>,
}

impl BoundInput {
    pub fn new(a: Matrix, da: Matrix, r: usize) -> Self {
        BoundInput {
            a,
            da,
            b: None,
            db: None,
            r,
            theta: None,
        }
    }

    pub fn with_rhs(mut self, b: Vector, db: Vector) -> Self {
        self.b = Some(b);
        self.db = Some(db);
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = Some(theta);
        self
    }

    /// `Ã = A + ΔA`.
    pub fn a_tilde(&self) -> Matrix {
        self.a.add(&self.da)
    }

    /// `b̃ = b + Δb`.
    pub fn b_tilde(&self) -> Option<Vector> {
        match (&self.b, &self.db) {
            (Some(b), Some(db)) => Some(b.add(db)),
            (Some(b), None) => Some(b.clone()),
            _ => None,
        }
    }
}

/// Norms and singular values shared by all evaluators.
struct Quantities {
    sigma: Vec<f64>,
    a_norm: f64,
    /// `σ_r`, 0 when `r = 0` or `r` exceeds the spectrum.
    sr: f64,
    /// `σ_{r+1}`, 0 past the end of the spectrum.
    sr1: f64,
    da: f64,
    db: f64,
    m: usize,
    n: usize,
}

impl Quantities {
    fn of(input: &BoundInput) -> Result<Self> {
        let (m, n) = input.a.shape();
        if input.da.shape() != (m, n) {
            return Err(Error::DimensionMismatch(format!(
                "A is {m}x{n} but dA is {}x{}",
                input.da.rows(),
                input.da.cols()
            )));
        }
        for v in [&input.b, &input.db].into_iter().flatten() {
            if v.len() != m {
                return Err(Error::DimensionMismatch(format!(
                    "right-hand side of length {} for {m} rows",
                    v.len()
                )));
            }
        }
        let sigma = singular_values(&input.a)?;
        let r = input.r;
        let sr = if r >= 1 { sigma.get(r - 1).copied().unwrap_or(0.0) } else { 0.0 };
        Ok(Quantities {
            a_norm: sigma.first().copied().unwrap_or(0.0),
            sr,
            sr1: sigma.get(r).copied().unwrap_or(0.0),
            da: spectral_norm(&input.da)?,
            db: input.db.as_ref().map(|v| v.norm()).unwrap_or(0.0),
            sigma,
            m,
            n,
        })
    }

    /// `‖A‖₂ ‖A†‖₂` at rank `r`.
    fn kappa(&self) -> f64 {
        self.a_norm / self.sr
    }

    /// `‖A†‖₂` at rank `r`.
    fn pinv(&self) -> f64 {
        1.0 / self.sr
    }

    fn pair(&self) -> f64 {
        self.da.hypot(self.db)
    }
}

fn require_rhs(input: &BoundInput) -> Result<&Vector> {
    input
        .b
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("this bound needs a right-hand side b".into()))
}

/// `A_r† b` through the rank-`r` truncated SVD.
fn minnorm(a: &Matrix, b: &Vector, r: usize) -> Result<Vector> {
    let f = crate::svd::svd(a)?;
    let mut c = f.u.columns(0..r).adjoint_mul_vec(b);
    for (z, s) in c.as_mut_slice().iter_mut().zip(&f.sigma) {
        *z /= s;
    }
    if r == 0 {
        return Ok(Vector::zeros(a.cols()));
    }
    Ok(f.v.columns(0..r).mul_vec(&c))
}

fn rank_is(a: &Matrix, r: usize) -> Result<bool> {
    Ok(exact_rank_of(&singular_values(a)?) == r)
}

fn in_range(a: &Matrix, b: &Vector, r: usize) -> Result<bool> {
    let x = minnorm(a, b, r)?;
    let res = a.mul_vec(&x).sub(b).norm();
    let scale = spectral_norm(a)? * x.norm() + b.norm();
    Ok(res <= 1e-10 * scale.max(f64::MIN_POSITIVE))
}

fn rank_positive(c: &mut Checks, q: &Quantities, r: usize) {
    c.check(format!("1 <= r = {r} <= min(m, n)"), r >= 1 && r <= q.m.min(q.n) && q.sr > 0.0);
}

/// Wedin-type kernel bound at a fixed tolerance:
/// `dist(Kernel A_θ, Kernel Ã_θ) ≤ (σ₁/σ_r) · ‖ΔA‖/‖A‖ / (1 − (σ_{r+1} + ‖ΔA‖)/σ_r)`.
pub fn wedin_kernel_bound(input: &BoundInput) -> Result<BoundValue> {
    let q = Quantities::of(input)?;
    let mut c = Checks::new();
    rank_positive(&mut c, &q, input.r);
    c.check("sigma_r > sigma_{r+1}", q.sr > q.sr1);
    c.check("|dA| < (sigma_r - sigma_{r+1}) / 2", q.da < 0.5 * (q.sr - q.sr1));
    if let Some(theta) = input.theta {
        c.check(
            "sigma_{r+1} + |dA| < theta < sigma_r - |dA|",
            q.sr1 + q.da < theta && theta < q.sr - q.da,
        );
    }
    Ok(c.finish("wedin_kernel_bound", false, || {
        q.kappa() / (1.0 - (q.sr1 + q.da) / q.sr) * q.da / q.a_norm
    }))
}

/// Kernel bound when rank is preserved: `(σ₁/σ_r) · ‖ΔA‖/‖A‖`.
pub fn rank_preserving_kernel_bound(input: &BoundInput) -> Result<BoundValue> {
    let q = Quantities::of(input)?;
    let mut c = Checks::new();
    rank_positive(&mut c, &q, input.r);
    c.check("rank(A) = r", exact_rank_of(&q.sigma) == input.r);
    c.check("rank(A + dA) = r", rank_is(&input.a_tilde(), input.r)?);
    c.check("|dA| < sigma_r", q.da < q.sr);
    Ok(c.finish("rank_preserving_kernel_bound", false, || {
        q.kappa() * q.da / q.a_norm
    }))
}

/// Distance between the solution sets of two consistent systems of equal
/// rank: `κ · sqrt(2‖x*‖² + 1) / (‖A‖ − √2 κ ‖ΔA‖) · ‖(ΔA, Δb)‖`.
pub fn consistent_solution_bound(input: &BoundInput) -> Result<BoundValue> {
    let q = Quantities::of(input)?;
    let b = require_rhs(input)?;
    let bt = input.b_tilde().unwrap_or_else(|| b.clone());
    let at = input.a_tilde();
    let mut c = Checks::new();
    rank_positive(&mut c, &q, input.r);
    c.check("rank(A) = r", exact_rank_of(&q.sigma) == input.r);
    c.check("rank(A + dA) = r", rank_is(&at, input.r)?);
    c.check("b in Range(A)", in_range(&input.a, b, input.r)?);
    c.check("b + db in Range(A + dA)", in_range(&at, &bt, input.r)?);
    c.check("sqrt(2) |A^+| |dA| < 1", 2f64.sqrt() * q.pinv() * q.da < 1.0);
    let x = if input.r >= 1 {
        minnorm(&input.a, b, input.r)?.norm()
    } else {
        0.0
    };
    Ok(c.finish("consistent_solution_bound", false, || {
        q.kappa() * (2.0 * x * x + 1.0).sqrt() / (q.a_norm - 2f64.sqrt() * q.kappa() * q.da)
            * q.pair()
    }))
}

/// Relative error of the minimum-norm solution of a full-row-rank
/// underdetermined system, first order: `κ(√2‖ΔA‖/‖A‖ + ‖Δb‖/‖b‖)`.
pub fn underdetermined_minnorm_bound(input: &BoundInput) -> Result<BoundValue> {
    let q = Quantities::of(input)?;
    let b = require_rhs(input)?;
    if b.norm() == 0.0 {
        return Err(Error::ZeroRhs);
    }
    let mut c = Checks::new();
    c.check("m < n", q.m < q.n);
    c.check("rank(A) = m = r", input.r == q.m && exact_rank_of(&q.sigma) == q.m);
    c.check("sqrt(2) |A^+| |dA| < 1", q.sr > 0.0 && 2f64.sqrt() * q.pinv() * q.da < 1.0);
    let bn = b.norm();
    Ok(c.finish("underdetermined_minnorm_bound", true, || {
        q.kappa() * (2f64.sqrt() * q.da / q.a_norm + q.db / bn)
    }))
}

/// Accuracy of the numerical kernel of empirical data:
/// `κ/(1 − ‖A†‖‖ΔA‖) · ‖ΔA‖/‖A‖`.
pub fn homogeneous_forward_bound(input: &BoundInput) -> Result<BoundValue> {
    let q = Quantities::of(input)?;
    let mut c = Checks::new();
    rank_positive(&mut c, &q, input.r);
    c.check("rank(A) = r", exact_rank_of(&q.sigma) == input.r);
    c.check("|dA| < 1/(2 |A^+|)", q.da < 0.5 * q.sr);
    if let Some(theta) = input.theta {
        c.check(
            "|dA| < theta < 1/|A^+| - |dA|",
            q.da < theta && theta < q.sr - q.da,
        );
    }
    Ok(c.finish("homogeneous_forward_bound", false, || {
        q.kappa() / (1.0 - q.pinv() * q.da) * q.da / q.a_norm
    }))
}

/// Admissible open interval `(mu, eta)` for the tolerance `θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToleranceWindow {
    pub rank: usize,
    pub mu: f64,
    pub eta: f64,
    /// `ω = sqrt(4‖A†‖²‖b‖² + 2)` for the nonhomogeneous window.
    pub omega: Option<f64>,
}

impl ToleranceWindow {
    pub fn contains(&self, theta: f64) -> bool {
        self.mu < theta && theta < self.eta
    }
}

fn check_error_norm(x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "error bound must be nonnegative and finite, got {x}"
        )))
    }
}

/// θ-window `(‖ΔA‖, σ_r(A) − ‖ΔA‖)` for the homogeneous system, with `A` the
/// reference matrix and `r = #{σ_j(A) > ‖ΔA‖}`.
pub fn tolerance_window(a: &Matrix, da_norm: f64) -> Result<ToleranceWindow> {
    check_error_norm(da_norm)?;
    let sigma = singular_values(a)?;
    let r = sigma.iter().take_while(|&&s| s > da_norm).count();
    if r == 0 {
        return Ok(ToleranceWindow {
            rank: 0,
            mu: da_norm,
            eta: f64::INFINITY,
            omega: None,
        });
    }
    let sr = sigma[r - 1];
    if da_norm >= 0.5 * sr {
        return Err(Error::EmptyWindow {
            da_norm,
            limit: 0.5 * sr,
        });
    }
    Ok(ToleranceWindow {
        rank: r,
        mu: da_norm,
        eta: sr - da_norm,
        omega: None,
    })
}

/// Window guaranteed from the data matrix alone: with `σ_r(A) ≥ σ_r(Ã) − β`
/// the interval `(β, σ_r(Ã) − 2β)` lies inside the reference window.
pub fn tolerance_window_from_data(a_tilde: &Matrix, beta: f64) -> Result<ToleranceWindow> {
    check_error_norm(beta)?;
    let sigma = singular_values(a_tilde)?;
    let r = sigma.iter().take_while(|&&s| s > beta).count();
    if r == 0 {
        return Ok(ToleranceWindow {
            rank: 0,
            mu: beta,
            eta: f64::INFINITY,
            omega: None,
        });
    }
    let sr = sigma[r - 1];
    if 3.0 * beta >= sr {
        return Err(Error::EmptyWindow {
            da_norm: beta,
            limit: sr / 3.0,
        });
    }
    Ok(ToleranceWindow {
        rank: r,
        mu: beta,
        eta: sr - 2.0 * beta,
        omega: None,
    })
}

/// θ-window `(ω‖(ΔA,Δb)‖, 1/‖A†‖ − ‖(ΔA,Δb)‖)` for a consistent system.
pub fn tolerance_window_general(a: &Matrix, b: &Vector, pair: f64) -> Result<ToleranceWindow> {
    check_error_norm(pair)?;
    if a.rows() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} rows with right-hand side of length {}",
            a.rows(),
            b.len()
        )));
    }
    let sigma = singular_values(a)?;
    let r = exact_rank_of(&sigma);
    if r == 0 {
        return Err(Error::ZeroRank);
    }
    let sr = sigma[r - 1];
    let omega = (4.0 * b.norm().powi(2) / (sr * sr) + 2.0).sqrt();
    let limit = sr / (omega + 1.0);
    if pair >= limit {
        return Err(Error::EmptyWindow {
            da_norm: pair,
            limit,
        });
    }
    Ok(ToleranceWindow {
        rank: r,
        mu: omega * pair,
        eta: sr - pair,
        omega: Some(omega),
    })
}

/// Forward error of the general numerical solution from empirical data:
/// `κ · sqrt(4‖x*‖² + 1) / (‖A‖ − κ‖ΔA‖) · ‖(ΔA, Δb)‖`.
pub fn general_forward_bound(input: &BoundInput) -> Result<BoundValue> {
    let q = Quantities::of(input)?;
    let b = require_rhs(input)?;
    let mut c = Checks::new();
    rank_positive(&mut c, &q, input.r);
    c.check("rank(A) = r", exact_rank_of(&q.sigma) == input.r);
    c.check("b in Range(A)", in_range(&input.a, b, input.r)?);
    let omega = (4.0 * q.pinv().powi(2) * b.norm().powi(2) + 2.0).sqrt();
    let pair = q.pair();
    c.check(
        "|(dA, db)| < 1/((omega + 1) |A^+|)",
        q.sr > 0.0 && pair < q.sr / (omega + 1.0),
    );
    if let Some(theta) = input.theta {
        c.check(
            "omega |(dA, db)| < theta < 1/|A^+| - |(dA, db)|",
            omega * pair < theta && theta < q.sr - pair,
        );
    }
    let x = if input.r >= 1 {
        minnorm(&input.a, b, input.r)?.norm()
    } else {
        0.0
    };
    Ok(c.finish("general_forward_bound", false, || {
        q.kappa() * (4.0 * x * x + 1.0).sqrt() / (q.a_norm - q.kappa() * q.da) * pair
    }))
}

fn particular_checks(input: &BoundInput, q: &Quantities) -> Checks {
    let mut c = Checks::new();
    rank_positive(&mut c, q, input.r);
    c.check("rank(A) = r < n", exact_rank_of(&q.sigma) == input.r && input.r < q.n);
    c.check("|dA| <= 0.46 / |A^+|", q.da <= 0.46 * q.sr);
    c
}

/// Error of a numerical particular solution `x̃` of `Ã x = b̃`.
///
/// With `b ≠ 0` this is the relative bound
/// `κ/(1 − ‖A†‖‖ΔA‖) · (2√2‖ΔA‖/‖A‖ + ‖Δb‖/‖b‖)`; with `b = 0` the absolute
/// bound `κ/(1 − ‖A†‖‖ΔA‖) · (‖x̃‖‖ΔA‖/‖A‖ + ‖Δb‖/‖A‖)`.
pub fn particular_solution_bound(input: &BoundInput, xtilde_norm: f64) -> Result<BoundValue> {
    let q = Quantities::of(input)?;
    let b = require_rhs(input)?;
    let mut c = particular_checks(input, &q);
    let bn = b.norm();
    if bn > 0.0 {
        c.check("b in Range(A)", in_range(&input.a, b, input.r)?);
        Ok(c.finish("particular_solution_bound", false, || {
            q.kappa() / (1.0 - q.pinv() * q.da)
                * (2.0 * 2f64.sqrt() * q.da / q.a_norm + q.db / bn)
        }))
    } else {
        Ok(c.finish("particular_solution_bound", false, || {
            q.kappa() / (1.0 - q.pinv() * q.da) * (xtilde_norm * q.da + q.db) / q.a_norm
        }))
    }
}

/// Homogeneous case with `b̃ = 0` and unit `x̃`: distance from `x̃` to
/// `Kernel(A)` is at most `κ/(1 − ‖A†‖‖ΔA‖) · ‖ΔA‖/‖A‖`.
pub fn normalized_homogeneous_bound(input: &BoundInput) -> Result<BoundValue> {
    let q = Quantities::of(input)?;
    let c = particular_checks(input, &q);
    Ok(c.finish("normalized_homogeneous_bound", false, || {
        q.kappa() / (1.0 - q.pinv() * q.da) * q.da / q.a_norm
    }))
}

/// Inverse-iteration form for `Ã x̃ = b̃ ≠ 0`, `b = 0`:
/// `κ/(1 − ‖A†‖‖ΔA‖) · (‖ΔA‖ + ‖b̃‖/‖x̃‖)/‖A‖` on the normalized iterate.
pub fn inverse_iteration_bound(
    input: &BoundInput,
    xtilde_norm: f64,
    btilde_norm: f64,
) -> Result<BoundValue> {
    let q = Quantities::of(input)?;
    let mut c = particular_checks(input, &q);
    c.check("|x~| > 0", xtilde_norm > 0.0);
    Ok(c.finish("inverse_iteration_bound", false, || {
        q.kappa() / (1.0 - q.pinv() * q.da) * (q.da + btilde_norm / xtilde_norm) / q.a_norm
    }))
}

/// A backward-accurate particular solution: `a · x = b` holds exactly for
/// the nearby data `(a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NearbySolution {
    pub a: Matrix,
    pub b: Vector,
    pub x: Vector,
}

/// Bound on the component of `x₁ − x₂` orthogonal to `Kernel(A)`:
/// `κ(‖b−b₁‖ + ‖b−b₂‖ + ‖A−A₁‖‖x₁‖ + ‖A−A₂‖‖x₂‖)/‖A‖`.
pub fn difference_in_kernel_bound(
    a: &Matrix,
    b: &Vector,
    s1: &NearbySolution,
    s2: &NearbySolution,
) -> Result<BoundValue> {
    let (m, n) = a.shape();
    for s in [s1, s2] {
        if s.a.shape() != (m, n) || s.b.len() != m || s.x.len() != n || b.len() != m {
            return Err(Error::DimensionMismatch(
                "nearby systems must match the shape of (A, b)".into(),
            ));
        }
    }
    let sigma = singular_values(a)?;
    let r = exact_rank_of(&sigma);
    let mut c = Checks::new();
    c.check("1 <= rank(A) < n", r >= 1 && r < n);
    c.check("b in Range(A)", r >= 1 && in_range(a, b, r)?);
    let terms = b.sub(&s1.b).norm()
        + b.sub(&s2.b).norm()
        + spectral_norm(&a.sub(&s1.a))? * s1.x.norm()
        + spectral_norm(&a.sub(&s2.a))? * s2.x.norm();
    Ok(c.finish("difference_in_kernel_bound", false, || {
        let kappa = sigma[0] / sigma[r - 1];
        kappa * terms / sigma[0]
    }))
}

/// Relative accuracy of the best point of `sol_θ(Ã, b̃)` for an
/// ill-conditioned system `b = A x*`:
/// `(σ₁/σ_r) / (1 − (σ_{r+1} − ‖ΔA‖)/σ_r) · ((2+√2)‖ΔA‖/‖A‖ + ‖Δb‖/‖b‖)`.
pub fn illcond_containment_bound(input: &BoundInput) -> Result<BoundValue> {
    let q = Quantities::of(input)?;
    let b = require_rhs(input)?;
    let mut c = Checks::new();
    rank_positive(&mut c, &q, input.r);
    c.check("sigma_r > sigma_{r+1}", q.sr > q.sr1);
    c.check(
        "|dA| < min{sigma_r - sigma_{r+1}, (2 sqrt(3) - 3) sigma_r}",
        q.da < (q.sr - q.sr1).min((2.0 * 3f64.sqrt() - 3.0) * q.sr),
    );
    c.check("b != 0", b.norm() > 0.0);
    let bn = b.norm();
    Ok(c.finish("illcond_containment_bound", false, || {
        q.kappa() / (1.0 - (q.sr1 - q.da) / q.sr)
            * ((2.0 + 2f64.sqrt()) * q.da / q.a_norm + q.db / bn)
    }))
}

/// First-order bound on `‖A_θ†b − Ã_θ†b̃‖` with
/// `ζ = ‖A_θ†b‖ + (1 + ‖A_θ†b‖)/(1 − ‖A_θ†‖‖A − A_θ‖)`:
/// `(σ₁/σ_r)(ζ‖ΔA‖/‖A‖ + ‖Δb‖/‖A‖)`.
pub fn tsvd_perturbation_bound(input: &BoundInput) -> Result<BoundValue> {
    let q = Quantities::of(input)?;
    let b = require_rhs(input)?;
    let theta = input
        .theta
        .ok_or_else(|| Error::InvalidArgument("this bound needs theta".into()))?;
    let d = decide(&q.sigma, theta, GUARD_MIN)?;
    let mut c = Checks::new();
    rank_positive(&mut c, &q, input.r);
    c.check("rank_theta(A) = r", d.rank == input.r);
    let bt = if input.r >= 1 {
        let f = crate::svd::svd(&input.a)?;
        let ur = f.u.columns(0..input.r);
        ur.mul_vec(&ur.adjoint_mul_vec(b))
    } else {
        Vector::zeros(q.m)
    };
    c.check("|b - b_theta| < theta", b.sub(&bt).norm() < theta);
    c.check(
        "|dA| < min{(sigma_r - sigma_{r+1})/2, sigma_r - theta, theta - sigma_{r+1}}",
        q.da < (0.5 * (q.sr - q.sr1)).min(q.sr - theta).min(theta - q.sr1),
    );
    let xb = if input.r >= 1 {
        minnorm(&input.a, b, input.r)?.norm()
    } else {
        0.0
    };
    Ok(c.finish("tsvd_perturbation_bound", true, || {
        let zeta = xb + (1.0 + xb) / (1.0 - q.sr1 / q.sr);
        q.kappa() * (zeta * q.da / q.a_norm + q.db / q.a_norm)
    }))
}

/// Exact-rank variant for `rank(A) = r`, `b ∈ Range(A)`:
/// `(σ₁/σ_r)/(1 − ‖ΔA‖/σ_r) · (2‖A†b‖‖ΔA‖/‖A‖ + ‖Δb‖/‖A‖)`.
pub fn tsvd_exact_rank_bound(input: &BoundInput) -> Result<BoundValue> {
    let q = Quantities::of(input)?;
    let b = require_rhs(input)?;
    let mut c = Checks::new();
    rank_positive(&mut c, &q, input.r);
    c.check("rank(A) = r", exact_rank_of(&q.sigma) == input.r);
    c.check("b in Range(A)", in_range(&input.a, b, input.r)?);
    if let Some(theta) = input.theta {
        c.check(
            "|dA| < min{sigma_r/2, sigma_r - theta, theta}",
            q.da < (0.5 * q.sr).min(q.sr - theta).min(theta),
        );
    } else {
        c.check("|dA| < sigma_r / 2", q.da < 0.5 * q.sr);
    }
    let xb = if input.r >= 1 {
        minnorm(&input.a, b, input.r)?.norm()
    } else {
        0.0
    };
    Ok(c.finish("tsvd_exact_rank_bound", false, || {
        q.kappa() / (1.0 - q.da / q.sr) * (2.0 * xb * q.da / q.a_norm + q.db / q.a_norm)
    }))
}

/// `‖[μNᴴ; A]‖₂` and `‖[μNᴴ; A]†‖₂` in closed form, `N` spanning
/// `Kernel(A_θ)`.
pub fn stacked_operator_norms(a: &Matrix, theta: f64, mu: f64) -> Result<(f64, f64)> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "mu must be positive and finite, got {mu}"
        )));
    }
    let (m, n) = a.shape();
    let sigma = singular_values(a)?;
    let d = decide(&sigma, theta, GUARD_MIN)?;
    let r = d.rank;
    if r == n {
        return Ok((sigma[0], 1.0 / sigma[r - 1]));
    }
    let eta = if m >= n { sigma[n - 1] } else { 0.0 };
    let s1 = sigma.first().copied().unwrap_or(0.0);
    let norm = s1.max(mu.hypot(d.sigma_r_plus_1));
    let tail = 1.0 / mu.hypot(eta);
    let pinv = match d.sigma_r {
        Some(sr) => (1.0 / sr).max(tail),
        None => tail,
    };
    Ok((norm, pinv))
}

/// First-order bracket `(κ − 2‖ΔA‖, κ + 2‖ΔA‖)` for `κ(Ã_θ)`, where `κ` is
/// `σ₁/σ_r` of the reference matrix at rank `rank_θ(A)`.
pub fn condition_bracket(a: &Matrix, da_norm: f64, theta: f64) -> Result<(f64, f64)> {
    check_error_norm(da_norm)?;
    let sigma = singular_values(a)?;
    let d = decide(&sigma, theta, GUARD_MIN)?;
    let sr = d.sigma_r.ok_or(Error::ZeroRank)?;
    if !(da_norm < sr - theta) {
        return Err(Error::HypothesisViolated(format!(
            "|dA| = {da_norm:e} must be below 1/|A^+| - theta = {:e}",
            sr - theta
        )));
    }
    let kappa = sigma[0] / sr;
    Ok((kappa - 2.0 * da_norm, kappa + 2.0 * da_norm))
}
