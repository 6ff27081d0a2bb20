//! Seeded Monte-Carlo checks that each perturbation bound dominates the error
//! it describes.
//!
//! Each suite constructs random instances inside the bound's hypotheses,
//! measures the quantity the bound controls, and records violations and the
//! measured/bound ratios. Trial `k` of a suite with seed `s` always draws the
//! same instance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bounds::{self, BoundInput, BoundValue, NearbySolution};
use crate::dense::{c, lu_solve, qr, spectral_norm, Matrix, Scalar, Vector};
use crate::error::{Error, Result};
use crate::grassmann::{
    affine_distance, exact_solution_set, grassmann_distance, nearest_in_affine, solution_distance,
    Subspace,
};
use crate::rank::{pseudoinverse, theta_projection};
use crate::solver::{solve_general, SolverConfig};
use crate::svd::svd;

/// Relative slack allowed for first-order bounds.
pub const FIRST_ORDER_SLACK: f64 = 1e-3;
/// Scale of perturbations (relative to `σ₁`) in first-order suites.
pub const FIRST_ORDER_SCALE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Wedin,
    RankPreserving,
    ConsistentSolution,
    UnderdeterminedMinNorm,
    HomogeneousForward,
    GeneralForward,
    ParticularSolution,
    DifferenceInKernel,
    IllcondContainment,
    TsvdPerturbation,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Wedin,
        Suite::RankPreserving,
        Suite::ConsistentSolution,
        Suite::UnderdeterminedMinNorm,
        Suite::HomogeneousForward,
        Suite::GeneralForward,
        Suite::ParticularSolution,
        Suite::DifferenceInKernel,
        Suite::IllcondContainment,
        Suite::TsvdPerturbation,
    ];

    /// Name of the bound evaluator the suite exercises.
    pub fn name(self) -> &'static str {
        match self {
            Suite::Wedin => "wedin_kernel_bound",
            Suite::RankPreserving => "rank_preserving_kernel_bound",
            Suite::ConsistentSolution => "consistent_solution_bound",
            Suite::UnderdeterminedMinNorm => "underdetermined_minnorm_bound",
            Suite::HomogeneousForward => "homogeneous_forward_bound",
            Suite::GeneralForward => "general_forward_bound",
            Suite::ParticularSolution => "particular_solution_bound",
            Suite::DifferenceInKernel => "difference_in_kernel_bound",
            Suite::IllcondContainment => "illcond_containment_bound",
            Suite::TsvdPerturbation => "tsvd_perturbation_bound",
        }
    }

    pub fn from_name(name: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|s| s.name() == name)
    }

    fn index(self) -> u64 {
        Suite::ALL.iter().position(|&s| s == self).unwrap() as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub requested: usize,
    /// Instances whose hypotheses held and were compared.
    pub checked: usize,
    /// Instances drawn but discarded (hypotheses failed after rounding).
    pub discarded: usize,
    pub violations: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub first_order: bool,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.checked == self.requested
    }
}

/// One compared instance: the measured error and the bound.
struct Sample {
    measured: f64,
    bound: BoundValue,
}

type Rand = ChaCha8Rng;

fn trial_rng(seed: u64, suite: Suite, trial: u64) -> Rand {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(suite.index() << 40 | trial);
    rng
}

fn gauss(rng: &mut Rand) -> Scalar {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_matrix(rng: &mut Rand, m: usize, n: usize) -> Matrix {
    Matrix::from_fn(m, n, |_, _| gauss(rng))
}

pub fn random_vector(rng: &mut Rand, n: usize) -> Vector {
    Vector::from_vec((0..n).map(|_| gauss(rng)).collect())
}

/// Random vector of Euclidean norm `len`.
pub fn vector_of_norm(rng: &mut Rand, n: usize, len: f64) -> Vector {
    let v = random_vector(rng, n);
    let s = len / v.norm();
    v.scale(crate::dense::re(s))
}

/// Random matrix of spectral norm `len`.
pub fn matrix_of_norm(rng: &mut Rand, m: usize, n: usize, len: f64) -> Matrix {
    let g = random_matrix(rng, m, n);
    let s = len / spectral_norm(&g).expect("finite random matrix");
    g.scale(crate::dense::re(s))
}

/// Haar-like random unitary matrix from the QR of a Gaussian matrix.
pub fn random_unitary(rng: &mut Rand, n: usize) -> Matrix {
    loop {
        if let Ok((q, _)) = qr(&random_matrix(rng, n, n)) {
            return q;
        }
    }
}

/// `U diag(sigma) Vᴴ` with random unitary factors; returns `(A, U, V)`.
pub fn with_spectrum(rng: &mut Rand, m: usize, n: usize, sigma: &[f64]) -> (Matrix, Matrix, Matrix) {
    let u = random_unitary(rng, m);
    let v = random_unitary(rng, n);
    (compose(&u, sigma, &v), u, v)
}

fn compose(u: &Matrix, sigma: &[f64], v: &Matrix) -> Matrix {
    let (m, n) = (u.rows(), v.rows());
    let mut us = Matrix::zeros(m, n);
    for (j, &s) in sigma.iter().enumerate() {
        for (dst, src) in us.col_mut(j).iter_mut().zip(u.col(j)) {
            *dst = src * s;
        }
    }
    us.matmul(&v.adjoint())
}

/// Unitary `(I − S)⁻¹(I + S)` for a random skew-Hermitian `S` of norm `eps`.
pub fn cayley_rotation(rng: &mut Rand, n: usize, eps: f64) -> Matrix {
    let g = random_matrix(rng, n, n);
    let skew = g.sub(&g.adjoint());
    let s = skew.scale(crate::dense::re(eps / spectral_norm(&skew).unwrap().max(1e-300)));
    let id = Matrix::identity(n);
    let lhs = id.sub(&s);
    let rhs = id.add(&s);
    let cols: Vec<Vector> = (0..n)
        .map(|j| lu_solve(&lhs, &rhs.column(j)).expect("I - S is invertible for skew S"))
        .collect();
    Matrix::from_columns(n, &cols)
}

/// Descending spectrum: `r` values in `[lo, hi]` followed by `tail`.
fn spectrum(rng: &mut Rand, r: usize, lo: f64, hi: f64, tail: &[f64]) -> Vec<f64> {
    let mut s: Vec<f64> = (0..r).map(|_| rng.random_range(lo..hi)).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s.extend_from_slice(tail);
    s
}

/// Fraction in `(0, 1)` spread over several decades.
fn fraction(rng: &mut Rand) -> f64 {
    if rng.random_bool(0.5) {
        rng.random_range(0.05..0.98)
    } else {
        10f64.powf(-rng.random_range(1.0..6.0))
    }
}

fn dims(rng: &mut Rand) -> (usize, usize) {
    (rng.random_range(2..=7), rng.random_range(2..=7))
}

/// Exact-rank `r` matrix with `1 ≤ r < n`.
fn exact_rank_matrix(rng: &mut Rand, m: usize, n: usize) -> (Matrix, Matrix, Matrix, usize) {
    let p = m.min(n);
    let r = rng.random_range(1..=p.min(n - 1));
    let mut s = spectrum(rng, r, 1.0, 10.0, &[]);
    s.resize(p, 0.0);
    let (a, u, v) = with_spectrum(rng, m, n, &s);
    (a, u, v, r)
}

fn exact_kernel(a: &Matrix, r: usize) -> Result<Subspace> {
    let f = svd(a)?;
    Subspace::from_orthonormal(f.v.columns(r..a.cols()))
}

fn theta_between(lo: f64, hi: f64) -> f64 {
    0.5 * (lo + hi)
}

fn trial(suite: Suite, rng: &mut Rand) -> Result<Sample> {
    match suite {
        Suite::Wedin => {
            let (m, n) = dims(rng);
            let p = m.min(n);
            let r = rng.random_range(1..=p.min(n - 1));
            let top = spectrum(rng, r, 1.0, 10.0, &[]);
            let sr = top[r - 1];
            let tail: Vec<f64> = spectrum(rng, p - r, 0.0, 0.3 * sr, &[]);
            let s: Vec<f64> = top.into_iter().chain(tail).collect();
            let (a, _, _) = with_spectrum(rng, m, n, &s);
            let sr1 = s.get(r).copied().unwrap_or(0.0);
            let len = fraction(rng) * 0.5 * (sr - sr1);
            let da = matrix_of_norm(rng, m, n, len);
            let dan = spectral_norm(&da)?;
            let theta = theta_between(sr1 + dan, sr - dan);
            let input = BoundInput::new(a.clone(), da.clone(), r).with_theta(theta);
            let k1 = theta_projection(&a, theta)?.kernel();
            let k2 = theta_projection(&a.add(&da), theta)?.kernel();
            Ok(Sample {
                measured: grassmann_distance(&k1, &k2)?,
                bound: bounds::wedin_kernel_bound(&input)?,
            })
        }
        Suite::RankPreserving => {
            let (m, n) = dims(rng);
            let (a, u, v, r) = exact_rank_matrix(rng, m, n);
            let s = crate::svd::singular_values(&a)?;
            let eps = 0.2 * fraction(rng);
            let mut st: Vec<f64> = s[..r].iter().map(|x| x * (1.0 + eps * rng.random_range(-1.0..1.0))).collect();
            st.resize(s.len(), 0.0);
            let ut = u.matmul(&cayley_rotation(rng, m, eps));
            let vt = v.matmul(&cayley_rotation(rng, n, eps));
            let at = compose(&ut, &st, &vt);
            let da = at.sub(&a);
            let input = BoundInput::new(a.clone(), da, r);
            Ok(Sample {
                measured: grassmann_distance(&exact_kernel(&a, r)?, &exact_kernel(&at, r)?)?,
                bound: bounds::rank_preserving_kernel_bound(&input)?,
            })
        }
        Suite::ConsistentSolution => {
            let (m, n) = dims(rng);
            let (a, u, v, r) = exact_rank_matrix(rng, m, n);
            let s = crate::svd::singular_values(&a)?;
            let eps = 0.1 * fraction(rng);
            let mut st: Vec<f64> = s[..r].iter().map(|x| x * (1.0 + eps * rng.random_range(-1.0..1.0))).collect();
            st.resize(s.len(), 0.0);
            let at = compose(
                &u.matmul(&cayley_rotation(rng, m, eps)),
                &st,
                &v.matmul(&cayley_rotation(rng, n, eps)),
            );
            let x0 = random_vector(rng, n);
            let b = a.mul_vec(&x0);
            let x1 = x0.add(&vector_of_norm(rng, n, eps * x0.norm()));
            let bt = at.mul_vec(&x1);
            let input = BoundInput::new(a.clone(), at.sub(&a), r).with_rhs(b.clone(), bt.sub(&b));
            Ok(Sample {
                measured: solution_distance(&a, &b, &at, &bt)?,
                bound: bounds::consistent_solution_bound(&input)?,
            })
        }
        Suite::UnderdeterminedMinNorm => {
            let m = rng.random_range(1..=5);
            let n = rng.random_range(m + 1..=7);
            let s = spectrum(rng, m, 1.0, 10.0, &[]);
            let (a, _, _) = with_spectrum(rng, m, n, &s);
            let b = random_vector(rng, m);
            let scale = FIRST_ORDER_SCALE * fraction(rng);
            let da = matrix_of_norm(rng, m, n, scale * s[0]);
            let len = scale * b.norm() * rng.random_range(0.0..1.0);
            let db = vector_of_norm(rng, m, len);
            let x = pseudoinverse(&a)?.mul_vec(&b);
            let xt = pseudoinverse(&a.add(&da))?.mul_vec(&b.add(&db));
            let input = BoundInput::new(a, da, m).with_rhs(b, db);
            Ok(Sample {
                measured: xt.sub(&x).norm() / x.norm(),
                bound: bounds::underdetermined_minnorm_bound(&input)?,
            })
        }
        Suite::HomogeneousForward => {
            let (m, n) = dims(rng);
            let (a, _, _, r) = exact_rank_matrix(rng, m, n);
            let sr = crate::svd::singular_values(&a)?[r - 1];
            let len = fraction(rng) * 0.5 * sr;
            let da = matrix_of_norm(rng, m, n, len);
            let dan = spectral_norm(&da)?;
            let theta = theta_between(dan, sr - dan);
            let input = BoundInput::new(a.clone(), da.clone(), r).with_theta(theta);
            let kt = theta_projection(&a.add(&da), theta)?.kernel();
            Ok(Sample {
                measured: grassmann_distance(&exact_kernel(&a, r)?, &kt)?,
                bound: bounds::homogeneous_forward_bound(&input)?,
            })
        }
        Suite::GeneralForward => {
            let (m, n) = dims(rng);
            let (a, _, _, r) = exact_rank_matrix(rng, m, n);
            let sr = crate::svd::singular_values(&a)?[r - 1];
            let b = a.mul_vec(&random_vector(rng, n));
            let omega = (4.0 * b.norm().powi(2) / (sr * sr) + 2.0).sqrt();
            let pair = fraction(rng) * sr / (omega + 1.0);
            let phi = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
            let da = matrix_of_norm(rng, m, n, pair * phi.cos());
            let db = vector_of_norm(rng, m, pair * phi.sin());
            let pair = spectral_norm(&da)?.hypot(db.norm());
            let theta = theta_between(omega * pair, sr - pair);
            let input = BoundInput::new(a.clone(), da.clone(), r)
                .with_rhs(b.clone(), db.clone())
                .with_theta(theta);
            let g = solve_general(&a.add(&da), &b.add(&db), &SolverConfig::new(theta))?;
            let (exact, _) = exact_solution_set(&a, &b)?;
            let measured = match g.affine() {
                Some(s) => affine_distance(s, &exact)?,
                None => f64::INFINITY,
            };
            Ok(Sample {
                measured,
                bound: bounds::general_forward_bound(&input)?,
            })
        }
        Suite::ParticularSolution => {
            let n = rng.random_range(2..=7);
            let (a, _, _, r) = exact_rank_matrix(rng, n, n);
            let sr = crate::svd::singular_values(&a)?[r - 1];
            let x0 = random_vector(rng, n);
            let b = a.mul_vec(&x0);
            let len = fraction(rng) * 0.46 * sr;
            let da = matrix_of_norm(rng, n, n, len);
            let at = a.add(&da);
            let len = fraction(rng) * b.norm();
            let bt0 = b.add(&vector_of_norm(rng, n, len));
            let xt = lu_solve(&at, &bt0)?;
            let bt = at.mul_vec(&xt);
            let input = BoundInput::new(a.clone(), da, r).with_rhs(b.clone(), bt.sub(&b));
            let bound = bounds::particular_solution_bound(&input, xt.norm())?;
            let (exact, _) = exact_solution_set(&a, &b)?;
            let ft = svd(&at)?;
            let theta = theta_between(ft.sigma[r], ft.sigma[r - 1]);
            let kt = theta_projection(&at, theta)?.kernel();
            let witness = exact.anchor().add(&exact.kernel().project(&kt.project(&xt)));
            let (nearest, _) = nearest_in_affine(&exact, &xt)?;
            let rel = |x: &Vector| xt.sub(x).norm() / x.norm();
            Ok(Sample {
                measured: rel(&witness).min(rel(&nearest)),
                bound,
            })
        }
        Suite::DifferenceInKernel => {
            let n = rng.random_range(2..=7);
            let (a, _, _, r) = exact_rank_matrix(rng, n, n);
            let b = a.mul_vec(&random_vector(rng, n));
            let sr = crate::svd::singular_values(&a)?[r - 1];
            let mut nearby = Vec::new();
            for _ in 0..2 {
                let len = fraction(rng) * sr;
                let ak = a.add(&matrix_of_norm(rng, n, n, len));
                let len = fraction(rng) * b.norm();
                let bk0 = b.add(&vector_of_norm(rng, n, len));
                let x = lu_solve(&ak, &bk0)?;
                let bk = ak.mul_vec(&x);
                nearby.push(NearbySolution { a: ak, b: bk, x });
            }
            let kernel = exact_kernel(&a, r)?;
            let diff = nearby[0].x.sub(&nearby[1].x);
            Ok(Sample {
                measured: kernel.project_out(&diff).norm(),
                bound: bounds::difference_in_kernel_bound(&a, &b, &nearby[0], &nearby[1])?,
            })
        }
        Suite::IllcondContainment => {
            let (m, n) = dims(rng);
            let p = m.min(n);
            let r = rng.random_range(1..=p);
            let top = spectrum(rng, r, 1.0, 10.0, &[]);
            let sr = top[r - 1];
            let tail = spectrum(rng, p - r, 0.0, 1e-3 * sr, &[]);
            let s: Vec<f64> = top.into_iter().chain(tail).collect();
            let sr1 = s.get(r).copied().unwrap_or(0.0);
            let (a, _, _) = with_spectrum(rng, m, n, &s);
            let xs = random_vector(rng, n);
            let b = a.mul_vec(&xs);
            if b.norm() == 0.0 {
                return Err(Error::ZeroRhs);
            }
            let lim = (sr - sr1).min((2.0 * 3f64.sqrt() - 3.0) * sr);
            let len = fraction(rng) * lim;
            let da = matrix_of_norm(rng, m, n, len);
            let len = 1e-2 * fraction(rng) * b.norm();
            let db = vector_of_norm(rng, m, len);
            let at = a.add(&da);
            let ft = svd(&at)?;
            let theta = theta_between(ft.sigma.get(r).copied().unwrap_or(0.0), ft.sigma[r - 1]);
            let p = theta_projection(&at, theta)?;
            let set = crate::grassmann::canonicalize_affine(&p.apply_pinv(&b.add(&db)), &p.kernel())?;
            let (xt, _) = nearest_in_affine(&set, &xs)?;
            let input = BoundInput::new(a, da, r).with_rhs(b, db);
            Ok(Sample {
                measured: xt.sub(&xs).norm() / xs.norm(),
                bound: bounds::illcond_containment_bound(&input)?,
            })
        }
        Suite::TsvdPerturbation => {
            let (m, n) = dims(rng);
            let p = m.min(n);
            let exact_rank = rng.random_bool(0.5);
            let r = rng.random_range(1..=p);
            let top = spectrum(rng, r, 1.0, 10.0, &[]);
            let sr = top[r - 1];
            let tail = if exact_rank {
                vec![0.0; p - r]
            } else {
                spectrum(rng, p - r, 0.0, 0.4 * sr, &[])
            };
            let s: Vec<f64> = top.into_iter().chain(tail).collect();
            let sr1 = s.get(r).copied().unwrap_or(0.0);
            let (a, u, _) = with_spectrum(rng, m, n, &s);
            let theta = sr1 + rng.random_range(0.3..0.7) * (sr - sr1);
            let mut b = u.columns(0..r).mul_vec(&random_vector(rng, r));
            if !exact_rank && r < m {
                let off = u.columns(r..m).mul_vec(&random_vector(rng, m - r));
                let len = 0.9 * fraction(rng) * theta;
                b = b.add(&off.scale(crate::dense::re(len / off.norm())));
            }
            let scale = FIRST_ORDER_SCALE * fraction(rng) * s[0];
            let da = matrix_of_norm(rng, m, n, scale);
            let len = scale * rng.random_range(0.0..1.0);
            let db = vector_of_norm(rng, m, len);
            let x = theta_projection(&a, theta)?.apply_pinv(&b);
            let xt = theta_projection(&a.add(&da), theta)?.apply_pinv(&b.add(&db));
            let input = BoundInput::new(a, da, r).with_rhs(b, db).with_theta(theta);
            let bound = if exact_rank {
                bounds::tsvd_exact_rank_bound(&input)?
            } else {
                bounds::tsvd_perturbation_bound(&input)?
            };
            Ok(Sample {
                measured: xt.sub(&x).norm(),
                bound,
            })
        }
    }
}

fn is_first_order(suite: Suite) -> bool {
    matches!(suite, Suite::UnderdeterminedMinNorm | Suite::TsvdPerturbation)
}

/// Run `trials` checked instances of a suite. Instances whose hypotheses fail
/// after rounding are discarded and redrawn, up to `4 · trials` draws.
pub fn run_suite(suite: Suite, trials: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport {
        suite,
        requested: trials,
        checked: 0,
        discarded: 0,
        violations: 0,
        max_ratio: 0.0,
        mean_ratio: 0.0,
        first_order: is_first_order(suite),
    };
    let mut ratio_sum = 0.0;
    let mut draw = 0u64;
    while report.checked < trials && draw < 4 * trials as u64 + 16 {
        let mut rng = trial_rng(seed, suite, draw);
        draw += 1;
        let sample = match trial(suite, &mut rng) {
            Ok(s) => s,
            Err(Error::ThetaOnSingularValue { .. })
            | Err(Error::BackwardErrorOnTheta { .. })
            | Err(Error::ZeroRhs) => {
                report.discarded += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let Some(bound) = sample.bound.value else {
            report.discarded += 1;
            continue;
        };
        report.checked += 1;
        let slack = if sample.bound.first_order {
            FIRST_ORDER_SLACK
        } else {
            1e-9
        };
        if !(sample.measured <= bound * (1.0 + slack) + 1e-13) {
            report.violations += 1;
        }
        let ratio = if bound > 0.0 {
            sample.measured / bound
        } else if sample.measured == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        report.max_ratio = report.max_ratio.max(ratio);
        ratio_sum += ratio;
    }
    if report.checked > 0 {
        report.mean_ratio = ratio_sum / report.checked as f64;
    }
    Ok(report)
}
