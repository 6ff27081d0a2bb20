//! Worked systems: Sylvester, Bézout, polynomial division, output
//! regulation, a Macaulay matrix, and a first-kind Volterra equation.

use crate::dense::{re, Matrix, Scalar, Vector};
use crate::error::{Error, Result};
use crate::grassmann::{canonicalize_affine, AffineSolution, Subspace};
use crate::operator::{
    materialize, polynomial_combination, sylvester_operator, Block, LinearOperator,
    SpaceDescriptor, StructuredElement,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Printed in the published example.
    Published,
    /// Computed independently (construction, identity or spectrum check).
    Derived,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expected {
    pub quantity: &'static str,
    pub value: f64,
    pub provenance: Provenance,
}

fn published(quantity: &'static str, value: f64) -> Expected {
    Expected {
        quantity,
        value,
        provenance: Provenance::Published,
    }
}

fn derived(quantity: &'static str, value: f64) -> Expected {
    Expected {
        quantity,
        value,
        provenance: Provenance::Derived,
    }
}

#[derive(Debug)]
pub enum CaseSystem {
    Matrix { a: Matrix, b: Vector },
    Operator {
        op: LinearOperator,
        rhs: StructuredElement,
    },
}

#[derive(Debug)]
pub struct CaseStudy {
    pub name: &'static str,
    pub system: CaseSystem,
    pub theta: f64,
    pub expected: Vec<Expected>,
    /// Set when the integrand underflowed to zero at some positive argument.
    pub quadrature_underflow: bool,
}

impl CaseStudy {
    fn matrix(name: &'static str, a: Matrix, b: Vector, theta: f64, expected: Vec<Expected>) -> Self {
        CaseStudy {
            name,
            system: CaseSystem::Matrix { a, b },
            theta,
            expected,
            quadrature_underflow: false,
        }
    }

    /// Matrix-vector form, materializing operators.
    pub fn matrix_system(&self) -> Result<(Matrix, Vector)> {
        match &self.system {
            CaseSystem::Matrix { a, b } => Ok((a.clone(), b.clone())),
            CaseSystem::Operator { op, rhs } => {
                let m = materialize(op)?;
                let b = m.pack_codomain(rhs)?;
                Ok((m.matrix, b))
            }
        }
    }

    pub fn expected(&self, quantity: &str) -> Option<f64> {
        self.expected
            .iter()
            .find(|e| e.quantity == quantity)
            .map(|e| e.value)
    }

    /// FNV-1a over the bit patterns of the matrix, rhs and θ.
    pub fn fingerprint(&self) -> Result<u64> {
        let (a, b) = self.matrix_system()?;
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |x: f64| {
            for byte in x.to_bits().to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        feed(a.rows() as f64);
        feed(a.cols() as f64);
        for z in a.as_slice().iter().chain(b.as_slice()) {
            feed(z.re);
            feed(z.im);
        }
        feed(self.theta);
        Ok(h)
    }
}

fn reals(v: &[f64]) -> Vec<Scalar> {
    v.iter().map(|&x| re(x)).collect()
}

fn single_matrix(m: Matrix) -> StructuredElement {
    StructuredElement::from_parts(vec![Block::Matrix(m)]).expect("nonempty matrix")
}

pub fn sylvester_matrices(t: f64) -> (Matrix, Matrix, Matrix) {
    let a = Matrix::from_real_rows(&[&[1.0, -1.0], &[1.0, -1.0]]);
    let b = Matrix::from_real_rows(&[&[-5.0 / 3.0 + t, 1.0], &[-1.0, -1.0 / 3.0 + 2.0 * t]]);
    let c = Matrix::from_real_rows(&[&[1.0, 0.0], &[2.0, -1.0]]);
    (a, b, c)
}

/// `A(t) X + X B(t) = C` on 2×2 matrices; singular but consistent at `t = 2/3`.
pub fn sylvester_case(t: f64) -> CaseStudy {
    let (a, b, c) = sylvester_matrices(t);
    let op = sylvester_operator(a, b).expect("square parameters");
    CaseStudy {
        name: "sylvester",
        system: CaseSystem::Operator {
            op,
            rhs: single_matrix(c),
        },
        theta: 1e-3,
        expected: vec![
            published("kernel_dim", 2.0),
            published("sensitivity", 1.573435327501125),
            published("residual", 2.499756923490804e-05),
            published("t_star", 2.0 / 3.0),
        ],
        quadrature_underflow: false,
    }
}

/// Truncated-SVD anchor printed for `t = 0.6666`, column-major.
pub const SYLVESTER_ANCHOR: [f64; 4] = [
    0.249983334213952,
    -0.750004165972904,
    -0.250004166457633,
    -0.249974998284764,
];

/// Exact solution set at `t = 2/3`: `¼[[1,−1],[−3,−1]] + span{I, [[−1,1],[−1,1]]}`,
/// in packed coordinates and canonical form.
pub fn sylvester_exact_solution() -> Result<AffineSolution> {
    let point = Vector::from_real(&[0.25, -0.75, -0.25, -0.25]);
    let dirs = Matrix::from_columns(
        4,
        &[
            Vector::from_real(&[1.0, 0.0, 0.0, 1.0]),
            Vector::from_real(&[-1.0, -1.0, 1.0, 1.0]),
        ],
    );
    canonicalize_affine(&point, &Subspace::span(&dirs)?)
}

pub const BEZOUT_F1: [f64; 5] = [2.5714, 3.8571, -3.0, -6.4286, -2.1429];
pub const BEZOUT_F2: [f64; 8] = [-1.7143, -1.7143, 0.4286, 0.4286, 0.0, -3.4286, -5.1429, -1.7143];
pub const BEZOUT_F3: [f64; 7] = [0.8571, 1.2857, 2.1429, 2.5714, 3.4286, 3.8571, 1.2857];
pub const BEZOUT_G: [f64; 3] = [4.6667, 7.0, 2.3333];
pub const BEZOUT_DEGREES: [usize; 3] = [3, 1, 2];

/// The printed 9×9 coefficient matrix, row by row.
pub const BEZOUT_MATRIX: [[f64; 9]; 9] = [
    [2.5714, 0.0, 0.0, 0.0, -1.7143, 0.0, 0.8571, 0.0, 0.0],
    [3.8571, 2.5714, 0.0, 0.0, -1.7143, -1.7143, 1.2857, 0.8571, 0.0],
    [-3.0, 3.8571, 2.5714, 0.0, 0.4286, -1.7143, 2.1429, 1.2857, 0.8571],
    [-6.4286, -3.0, 3.8571, 2.5714, 0.4286, 0.4286, 2.5714, 2.1429, 1.2857],
    [-2.1429, -6.4286, -3.0, 3.8571, 0.0, 0.4286, 3.4286, 2.5714, 2.1429],
    [0.0, -2.1429, -6.4286, -3.0, -3.4286, 0.0, 3.8571, 3.4286, 2.5714],
    [0.0, 0.0, -2.1429, -6.4286, -5.1429, -3.4286, 1.2857, 3.8571, 3.4286],
    [0.0, 0.0, 0.0, -2.1429, -1.7143, -5.1429, 0.0, 1.2857, 3.8571],
    [0.0, 0.0, 0.0, 0.0, 0.0, -1.7143, 0.0, 0.0, 1.2857],
];

/// Printed truncated-SVD solution `x̃₀` at `θ = 5e−4`.
pub const BEZOUT_ANCHOR: [f64; 9] = [
    0.907108855304999,
    0.333222892924586,
    0.710289197713311,
    0.599677838683852,
    -0.799463013829436,
    0.0669420537219249,
    1.12432524246405,
    -0.0664832652437786,
    0.0892574807423333,
];

pub fn bezout_matrix() -> Matrix {
    let rows: Vec<&[f64]> = BEZOUT_MATRIX.iter().map(|r| r.as_slice()).collect();
    Matrix::from_real_rows(&rows)
}

pub fn bezout_rhs() -> Vector {
    let mut b = vec![0.0; 9];
    b[..3].copy_from_slice(&BEZOUT_G);
    Vector::from_real(&b)
}

/// `(u₁, u₂, u₃) ↦ u₁f̃₁ + u₂f̃₂ + u₃f̃₃` on `P₃ × P₁ × P₂`.
pub fn bezout_operator() -> LinearOperator {
    polynomial_combination(
        vec![reals(&BEZOUT_F1), reals(&BEZOUT_F2), reals(&BEZOUT_F3)],
        &BEZOUT_DEGREES,
    )
    .expect("consistent degree data")
}

pub fn bezout_operator_rhs() -> StructuredElement {
    StructuredElement::from_parts(vec![Block::Poly(bezout_rhs().into_vec())]).expect("P_8")
}

pub fn bezout_case() -> CaseStudy {
    CaseStudy::matrix(
        "bezout",
        bezout_matrix(),
        bezout_rhs(),
        5e-4,
        vec![
            published("rank", 7.0),
            published("condition", 2.29e6),
            published("sensitivity", 17.19),
            published("operator_sensitivity", 20.302846223563613),
            published("operator_residual", 1.832045500993470e-05),
        ],
    )
}

/// Single-precision right-hand side of the division example.
pub const DIVISION_RHS: [f64; 9] = [
    0.3333333, 4.0, 7.6666665, 11.333333, 15.0, 18.666666, 22.333334, 26.0, 29.666666,
];
/// Printed solutions: `A\b`, Tikhonov at `α = 1e−3`, truncated SVD.
pub const DIVISION_X1: [f64; 9] = [
    0.3333333, 0.6666665, 1.0000014, 1.3333187, 1.6668129, 1.9985371, 2.3479633, 2.5203667,
    4.4629993,
];
pub const DIVISION_X2: [f64; 9] = [
    0.3333333, 0.6666670, 0.9999971, 1.3333607, 1.6663934, 2.0027277, 2.3060572, 2.9394238,
    0.2724303,
];
pub const DIVISION_X3: [f64; 9] = [
    0.3333335, 0.6666669, 0.9999967, 1.3333603, 1.6663938, 2.0027270, 2.3060613, 2.9393935,
    0.2727296,
];
/// Printed nearest-point coefficients `t₁, t₂, t₃`.
pub const DIVISION_T: [f64; 3] = [-1.4703701, 2.7413113, 2.7410104];
/// Printed kernel direction `ṽ`.
pub const DIVISION_KERNEL: [f64; 9] = [
    0.0, -0.0000001, 0.0000010, -0.0000099, 0.0000995, -0.0009950, 0.0099499, -0.0994987,
    0.9949875,
];
pub const DIVISION_ERROR_BOUND: f64 = 8.28e-7;
pub const DIVISION_TIKHONOV_ALPHA: f64 = 1e-3;

pub fn division_matrix() -> Matrix {
    Matrix::from_fn(9, 9, |i, j| {
        if i == j {
            re(1.0)
        } else if i == j + 1 {
            re(10.0)
        } else {
            re(0.0)
        }
    })
}

/// `x* = (1, 2, …, 9)/3`.
pub fn division_exact_solution() -> Vector {
    Vector::from_real(&(1..=9).map(|k| k as f64 / 3.0).collect::<Vec<_>>())
}

/// `(x + 10) q + ρ = p(x)` for quotient and remainder, with the rounded data.
pub fn division_case() -> CaseStudy {
    CaseStudy::matrix(
        "division",
        division_matrix(),
        Vector::from_real(&DIVISION_RHS),
        3.18e-6,
        vec![
            published("sigma_1", 10.9461079),
            published("sigma_9", 9.9e-9),
            published("condition", 1.1e9),
            published("sensitivity", 1.21),
            published("error_bound", DIVISION_ERROR_BOUND),
        ],
    )
}

pub fn regulator_matrices() -> [Matrix; 6] {
    [
        Matrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]),
        Matrix::from_real_rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[2.0, -1.0, 0.0]]),
        Matrix::from_real_rows(&[&[0.0], &[0.0], &[1.0]]),
        Matrix::from_real_rows(&[&[1.0, 0.0, -1.0]]),
        Matrix::from_real_rows(&[&[2.0, 1.0], &[-1.0, 1.0], &[0.0, 0.0]]),
        Matrix::from_real_rows(&[&[-1.0, 0.0]]),
    ]
}

/// Exact general solution `(X, U)` packed as X column-major then U.
pub const REGULATOR_ANCHOR: [f64; 8] = [
    2.0,
    0.0,
    1.0,
    -1.0 / 3.0,
    2.0 / 3.0,
    -1.0 / 3.0,
    -3.0,
    2.0,
];

/// `(X, U) ↦ (XA − BX − CU, DX) = (E, −F)`.
pub fn regulator_case() -> CaseStudy {
    let [_, _, _, d, _, _] = regulator_matrices();
    regulator_case_with_d(d)
}

/// Same system with a replacement for `D`.
pub fn regulator_case_with_d(d: Matrix) -> CaseStudy {
    let [a, b, c, _, e, f] = regulator_matrices();
    let domain = vec![SpaceDescriptor::Matrix(3, 2), SpaceDescriptor::Matrix(1, 2)];
    let op = LinearOperator::new(domain.clone(), domain, move |el| {
        let x = el.part(0).as_matrix().expect("X block");
        let u = el.part(1).as_matrix().expect("U block");
        let top = x.matmul(&a).sub(&b.matmul(x)).sub(&c.matmul(u));
        let bottom = d.matmul(x);
        StructuredElement::from_parts(vec![Block::Matrix(top), Block::Matrix(bottom)])
            .expect("conforming output")
    })
    .expect("valid shapes");
    let rhs = StructuredElement::from_parts(vec![
        Block::Matrix(e),
        Block::Matrix(f.scale(re(-1.0))),
    ])
    .expect("conforming rhs");
    CaseStudy {
        name: "regulator",
        system: CaseSystem::Operator { op, rhs },
        theta: 1e-10,
        expected: vec![
            published("rank_deficiency", 1.0),
            published("sensitivity", 11.987437447750866),
            published("residual", 1.332267629550188e-15),
        ],
        quadrature_underflow: false,
    }
}

/// Printed 6×6 Macaulay matrix of `{x³ + y − 0.7698, x + y³ − 0.7698}`
/// at `(.57735, .57735)`, order 2.
pub const MACAULAY_MATRIX: [[f64; 6]; 6] = [
    [0.0, 1.0, 0.999999, 0.0, 0.0, 1.7320499],
    [0.0, 0.999999, 1.0, 1.7320499, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0, 0.999999, 0.0],
    [0.0, 0.0, 0.0, 0.999999, 1.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 1.0, 0.999999],
    [0.0, 0.0, 0.0, 0.0, 0.999999, 1.0],
];

/// Printed kernel basis, column by column.
pub const MACAULAY_KERNEL: [[f64; 6]; 3] = [
    [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [-0.0, -0.7828174, 0.5924006, 0.1099370, -0.1099372, 0.1099374],
    [0.0, 0.2320854, 0.5618970, -0.4584060, 0.4584060, -0.4584059],
];

pub fn macaulay_matrix() -> Matrix {
    let rows: Vec<&[f64]> = MACAULAY_MATRIX.iter().map(|r| r.as_slice()).collect();
    Matrix::from_real_rows(&rows)
}

pub fn macaulay_printed_kernel() -> Result<Subspace> {
    let cols: Vec<Vector> = MACAULAY_KERNEL.iter().map(|c| Vector::from_real(c)).collect();
    Subspace::span(&Matrix::from_columns(6, &cols))
}

pub fn macaulay_fixture() -> CaseStudy {
    CaseStudy::matrix(
        "macaulay",
        macaulay_matrix(),
        Vector::zeros(6),
        2e-4,
        vec![published("kernel_dim", 3.0), derived("kernel_dim_at_1e-7", 1.0)],
    )
}

/// Composite Simpson panels per spline sub-interval.
pub const VOLTERRA_PANELS: usize = 32;

/// `k(τ) = τ^{−3/2} e^{−1/(4κ²τ)} / (2κ√π)`, zero at `τ ≤ 0`.
pub fn volterra_kernel(kappa: f64, tau: f64) -> f64 {
    if tau <= 0.0 {
        return 0.0;
    }
    (-1.0 / (4.0 * kappa * kappa * tau) - 1.5 * tau.ln()).exp()
        / (2.0 * kappa * std::f64::consts::PI.sqrt())
}

/// Linear-spline discretization of `∫₀ˢ k(s − t) x(t) dt = g(s)` with
/// `g(s) = ∫₀ˢ k(s − t) dt`, giving an `n × (n + 1)` system whose exact
/// solution is the constant 1 up to the annihilator `δ(t − 1)`.
pub fn volterra_case(kappa: f64, n: usize) -> Result<CaseStudy> {
    if n < 8 {
        return Err(Error::InvalidArgument(format!("Volterra grid needs n >= 8, got {n}")));
    }
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::InvalidArgument(format!("kappa must be positive, got {kappa}")));
    }
    let h = 1.0 / n as f64;
    let nodes = 2 * VOLTERRA_PANELS;
    let weight = |q: usize| -> f64 {
        let w = if q == 0 || q == nodes {
            1.0
        } else if q % 2 == 1 {
            4.0
        } else {
            2.0
        };
        w / (3.0 * nodes as f64)
    };

    // On [t_l, t_{l+1}] with t = (l + u) h the argument is (d − u) h, d = i − l,
    // so every entry depends only on d.
    let mut left = vec![0.0; n + 1];
    let mut right = vec![0.0; n + 1];
    let mut underflow = false;
    for d in 1..=n {
        let (mut wl, mut wr) = (0.0, 0.0);
        for q in 0..=nodes {
            let u = q as f64 / nodes as f64;
            let tau = (d as f64 - u) * h;
            let k = volterra_kernel(kappa, tau);
            if tau > 0.0 && k < f64::MIN_POSITIVE {
                underflow = true;
            }
            let w = weight(q) * h * k;
            wl += w * (1.0 - u);
            wr += w * u;
        }
        left[d] = wl;
        right[d] = wr;
    }

    let mut a = Matrix::zeros(n, n + 1);
    let mut b = vec![0.0; n];
    for i in 1..=n {
        for l in 0..i {
            let d = i - l;
            a.col_mut(l)[i - 1] += re(left[d]);
            a.col_mut(l + 1)[i - 1] += re(right[d]);
            b[i - 1] += left[d] + right[d];
        }
    }
    Ok(CaseStudy {
        name: "volterra",
        system: CaseSystem::Matrix {
            a,
            b: Vector::from_real(&b),
        },
        theta: 1e-6,
        expected: vec![
            published("kernel_dim_1024", 3.0),
            published("sensitivity_1024", 2.469428269074639e+04),
            published("residual_1024", 8.371530784514738e-10),
            published("constant_error_1024", 1.090344305094233e-07),
        ],
        quadrature_underflow: underflow,
    })
}

/// `h‖ẑ − 1‖₁` for the point `ẑ` of `sol` nearest the constant 1.
pub fn volterra_constant_error(sol: &AffineSolution) -> Result<f64> {
    let n1 = sol.ambient_dim();
    let ones = Vector::from_real(&vec![1.0; n1]);
    let (z, _) = crate::grassmann::nearest_in_affine(sol, &ones)?;
    Ok(z.sub(&ones).norm1() / (n1 - 1) as f64)
}

/// Names accepted by [`build`].
pub const CASE_NAMES: [&str; 6] = ["sylvester", "bezout", "division", "regulator", "macaulay", "volterra"];

/// Default instance of a named case.
pub fn build(name: &str) -> Result<CaseStudy> {
    match name {
        "sylvester" => Ok(sylvester_case(0.6666)),
        "bezout" => Ok(bezout_case()),
        "division" => Ok(division_case()),
        "regulator" => Ok(regulator_case()),
        "macaulay" => Ok(macaulay_fixture()),
        "volterra" => volterra_case(4.0, 128),
        other => Err(Error::InvalidArgument(format!(
            "unknown case '{other}' (expected one of {})",
            CASE_NAMES.join(", ")
        ))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivisionRow {
    pub label: &'static str,
    pub x: Vector,
    /// `‖x − x*‖ / ‖x*‖`.
    pub single_vector_error: f64,
    /// Coefficient `t` of the point `x + t ṽ` nearest to `x*`.
    pub t: f64,
    /// `‖x̂ − x*‖ / ‖x*‖` for that point.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivisionTable {
    pub sigma: Vec<f64>,
    pub sensitivity: f64,
    /// Kernel direction with its largest entry made real positive.
    pub kernel: Vector,
    /// Dense solve, Tikhonov and truncated SVD on the rounded data, then the
    /// three printed solutions.
    pub rows: Vec<DivisionRow>,
}

fn unit_phase(v: &Vector) -> Vector {
    let k = (0..v.len())
        .max_by(|&i, &j| v.as_slice()[i].norm().total_cmp(&v.as_slice()[j].norm()))
        .unwrap_or(0);
    let z = v.as_slice()[k];
    if z.norm() == 0.0 {
        return v.clone();
    }
    v.scale(z.conj() / z.norm())
}

/// Nearest points of `x_j + Kernel(A_θ)` to `x*` for the division example.
pub fn division_table() -> Result<DivisionTable> {
    use crate::dense::lu_solve;
    use crate::grassmann::nearest_in_affine;
    use crate::solver::{solve_general, tikhonov_solve, truncated_svd_solution, SolverConfig};

    let case = division_case();
    let (a, b) = case.matrix_system()?;
    let sol = solve_general(&a, &b, &SolverConfig::new(case.theta))?;
    let affine = sol.affine().ok_or(Error::InvalidArgument("division system has no solution".into()))?;
    let kernel = affine.kernel().clone();
    let v = unit_phase(&kernel.basis().column(0));
    let xs = division_exact_solution();
    let xs_norm = xs.norm();

    let candidates: Vec<(&'static str, Vector)> = vec![
        ("dense_solve", lu_solve(&a, &b)?),
        ("tikhonov", tikhonov_solve(&a, &b, DIVISION_TIKHONOV_ALPHA)?),
        ("truncated_svd", truncated_svd_solution(&a, &b, case.theta)?),
        ("printed_x1", Vector::from_real(&DIVISION_X1)),
        ("printed_x2", Vector::from_real(&DIVISION_X2)),
        ("printed_x3", Vector::from_real(&DIVISION_X3)),
    ];
    let mut rows = Vec::with_capacity(candidates.len());
    for (label, x) in candidates {
        let set = canonicalize_affine(&x, &kernel)?;
        let (point, _) = nearest_in_affine(&set, &xs)?;
        let t = v.dot(&point.sub(&x)).re;
        rows.push(DivisionRow {
            label,
            single_vector_error: x.sub(&xs).norm() / xs_norm,
            t,
            error: point.sub(&xs).norm() / xs_norm,
            x,
        });
    }
    Ok(DivisionTable {
        sensitivity: sol.report.sensitivity.unwrap_or(f64::NAN),
        sigma: sol.report.sigma.clone(),
        kernel: v,
        rows,
    })
}
