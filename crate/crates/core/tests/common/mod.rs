#![allow(dead_code)]

use grasslin::dense::{Matrix, Vector};
use grasslin::montecarlo::{random_unitary, random_vector, with_spectrum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Rand = ChaCha8Rng;

pub fn rng(seed: u64) -> Rand {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `r` values log-uniform in `[lo, hi]`, sorted descending.
pub fn spectrum(rng: &mut Rand, r: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut s: Vec<f64> = (0..r)
        .map(|_| (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp())
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Random `m×n` matrix of exact rank `r` with `σ` in `[0.5, 4]`.
pub fn exact_rank_matrix(rng: &mut Rand, m: usize, n: usize, r: usize) -> Matrix {
    let s = spectrum(rng, r, 0.5, 4.0);
    with_spectrum(rng, m, n, &s).0
}

/// Random shape with `1 ≤ r < n`, `r ≤ m`.
pub fn deficient_shape(rng: &mut Rand, max: usize) -> (usize, usize, usize) {
    loop {
        let m = rng.random_range(1..=max);
        let n = rng.random_range(2..=max);
        let r = rng.random_range(1..n);
        if r <= m {
            return (m, n, r);
        }
    }
}

/// Consistent system `A x = A x₀` with `A` of exact rank `r < n`.
pub fn consistent_deficient_system(rng: &mut Rand, max: usize) -> (Matrix, Vector) {
    let (m, n, r) = deficient_shape(rng, max);
    let a = exact_rank_matrix(rng, m, n, r);
    let x0 = random_vector(rng, n);
    let b = a.mul_vec(&x0);
    (a, b)
}

/// Orthonormal `n×k` basis of a random subspace.
pub fn random_basis(rng: &mut Rand, n: usize, k: usize) -> Matrix {
    random_unitary(rng, n).columns(0..k)
}

pub fn frob_rel(x: &Matrix, y: &Matrix, scale: f64) -> f64 {
    x.sub(y).frobenius_norm() / scale.max(f64::MIN_POSITIVE)
}
