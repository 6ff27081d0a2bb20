mod common;

use grasslin::bounds::{
    condition_bracket, general_forward_bound, tolerance_window, tsvd_perturbation_bound, wedin_kernel_bound,
    BoundInput,
};
use grasslin::dense::{re, spectral_norm, Matrix, Vector};
use grasslin::grassmann::{grassmann_distance, set_distance};
use grasslin::montecarlo::{matrix_of_norm, with_spectrum};
use grasslin::rank::numerical_kernel;
use grasslin::solver::{solve_general, SolverConfig};
use grasslin::svd::singular_values;
use rand::Rng;

use common::{rng, spectrum};

fn sensitivity_at(a: &Matrix, theta: f64) -> f64 {
    let s = singular_values(a).unwrap();
    let r = s.iter().filter(|&&x| x > theta).count();
    s[0] / s[r - 1]
}

#[test]
fn condition_bracket_holds_where_first_order_change_is_small() {
    // With σ in [2, 3] the change of σ₁/σ_r is at most ‖ΔA‖(1 + κ)/σ_r ≤ 2‖ΔA‖.
    let mut r = rng(0x4342);
    for _ in 0..500 {
        let m = r.random_range(2..=6);
        let n = r.random_range(2..=6);
        let k = r.random_range(1..m.min(n));
        let mut s = spectrum(&mut r, k, 2.0, 3.0);
        s.resize(m.min(n), 0.0);
        let (a, _, _) = with_spectrum(&mut r, m, n, &s);
        let dn = 10f64.powf(r.random_range(-6.0..-3.0));
        let da = matrix_of_norm(&mut r, m, n, dn);
        let theta = 0.5;
        let (lo, hi) = condition_bracket(&a, dn, theta).unwrap();
        let k_tilde = sensitivity_at(&a.add(&da), theta);
        let slack = 10.0 * dn * dn;
        assert!(lo - slack <= k_tilde && k_tilde <= hi + slack, "{lo} {k_tilde} {hi}");
    }
}

#[test]
fn condition_bracket_can_fail_for_small_sigma_r() {
    let a = Matrix::diag_real(&[1.0, 0.1]);
    let da = Matrix::diag_real(&[0.0, -1e-4]);
    let (_, hi) = condition_bracket(&a, 1e-4, 0.01).unwrap();
    let k_tilde = sensitivity_at(&a.add(&da), 0.01);
    assert!(k_tilde > hi + 10.0 * 1e-8);
}

#[test]
fn tsvd_diagonal_example() {
    let a = Matrix::diag_real(&[2.0, 1e-9]);
    let b = Vector::from_real(&[2.0, 0.0]);
    let da = Matrix::from_real_rows(&[&[1e-6, 0.0], &[0.0, 0.0]]);
    let input = BoundInput::new(a.clone(), da.clone(), 1)
        .with_rhs(b.clone(), Vector::zeros(2))
        .with_theta(1e-4);
    let bound = tsvd_perturbation_bound(&input).unwrap().value.unwrap();
    let s1 = solve_general(&a, &b, &SolverConfig::new(1e-4)).unwrap();
    let s2 = solve_general(&a.add(&da), &b, &SolverConfig::new(1e-4)).unwrap();
    let measured = set_distance(&s1.set, &s2.set).unwrap();
    assert!(measured <= bound, "{measured} > {bound}");
}

#[test]
fn kernels_move_lipschitz_within_the_window() {
    let mut r = rng(0x4c49);
    for _ in 0..500 {
        let (m, n, k) = common::deficient_shape(&mut r, 6);
        let s = spectrum(&mut r, k, 0.5, 3.0);
        let (a, _, _) = with_spectrum(&mut r, m, n, &s);
        let dn = s[k - 1] * 10f64.powf(r.random_range(-6.0..-1.0));
        let da = matrix_of_norm(&mut r, m, n, dn);
        let w = tolerance_window(&a, spectral_norm(&da).unwrap()).unwrap();
        let theta = (w.mu * w.eta).sqrt();
        let k1 = numerical_kernel(&a, theta).unwrap();
        let k2 = numerical_kernel(&a.add(&da), theta).unwrap();
        let d = grassmann_distance(&k1, &k2).unwrap();
        let bound = wedin_kernel_bound(&BoundInput::new(a.clone(), da, k)).unwrap();
        assert!(d <= bound.value.unwrap() * (1.0 + 1e-9) + 1e-13);
    }
}

#[test]
fn evaluators_are_reproducible() {
    let mut r = rng(0x5250);
    let (a, _, _) = with_spectrum(&mut r, 5, 4, &[3.0, 2.0, 1.0, 0.0]);
    let da = matrix_of_norm(&mut r, 5, 4, 1e-5);
    let b = a.mul_vec(&Vector::from_real(&[1.0, -1.0, 2.0, 0.5]));
    let db = b.scale(re(1e-6));
    let input = BoundInput::new(a, da, 3).with_rhs(b, db).with_theta(1e-3);
    let v1 = general_forward_bound(&input).unwrap();
    let v2 = general_forward_bound(&input.clone()).unwrap();
    assert_eq!(v1, v2);
    assert!(v1.hypotheses_met);
    assert_eq!(v1.value.is_some(), v1.hypotheses_met);
}
