//! Linear maps between products of vector, matrix and univariate polynomial
//! spaces, and their matrix-vector representation.
//!
//! Coordinates are concatenated block by block: vectors as is, matrices
//! column-major, polynomials by ascending degree.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{c, Matrix, Scalar, Vector};
use crate::error::{Error, Result};
use crate::solver::{solve_general, GeneralSolution, SolveReport, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceDescriptor {
    Vector(usize),
    Matrix(usize, usize),
    /// Polynomials of degree at most `d`.
    Poly(usize),
}

impl SpaceDescriptor {
    pub fn dim(self) -> usize {
        match self {
            SpaceDescriptor::Vector(n) => n,
            SpaceDescriptor::Matrix(m, n) => m * n,
            SpaceDescriptor::Poly(d) => d + 1,
        }
    }

    fn validate(self) -> Result<()> {
        let ok = match self {
            SpaceDescriptor::Vector(n) => n > 0,
            SpaceDescriptor::Matrix(m, n) => m > 0 && n > 0,
            SpaceDescriptor::Poly(_) => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!("{self} has a zero dimension")))
        }
    }

    fn zero_block(self) -> Block {
        match self {
            SpaceDescriptor::Vector(n) => Block::Vector(Vector::zeros(n)),
            SpaceDescriptor::Matrix(m, n) => Block::Matrix(Matrix::zeros(m, n)),
            SpaceDescriptor::Poly(d) => Block::Poly(vec![Scalar::new(0.0, 0.0); d + 1]),
        }
    }
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceDescriptor::Vector(n) => write!(f, "C^{n}"),
            SpaceDescriptor::Matrix(m, n) => write!(f, "C^{m}x{n}"),
            SpaceDescriptor::Poly(d) => write!(f, "P_{d}"),
        }
    }
}

/// Total coordinate dimension of a product space.
pub fn shape_dim(shape: &[SpaceDescriptor]) -> usize {
    shape.iter().map(|s| s.dim()).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Block {
    Vector(Vector),
    Matrix(Matrix),
    /// Coefficients by ascending degree.
    Poly(Vec<Scalar>),
}

impl Block {
    pub fn descriptor(&self) -> SpaceDescriptor {
        match self {
            Block::Vector(v) => SpaceDescriptor::Vector(v.len()),
            Block::Matrix(a) => SpaceDescriptor::Matrix(a.rows(), a.cols()),
            Block::Poly(p) => SpaceDescriptor::Poly(p.len().saturating_sub(1)),
        }
    }

    fn coords(&self) -> &[Scalar] {
        match self {
            Block::Vector(v) => v.as_slice(),
            Block::Matrix(a) => a.as_slice(),
            Block::Poly(p) => p,
        }
    }

    pub fn as_matrix(&self) -> Option<&Matrix> {
        match self {
            Block::Matrix(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<&Vector> {
        match self {
            Block::Vector(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_poly(&self) -> Option<&[Scalar]> {
        match self {
            Block::Poly(p) => Some(p),
            _ => None,
        }
    }
}

/// An element of a product space, one block per factor.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredElement {
    shape: Vec<SpaceDescriptor>,
    parts: Vec<Block>,
}

impl StructuredElement {
    pub fn new(shape: Vec<SpaceDescriptor>, parts: Vec<Block>) -> Result<Self> {
        if shape.len() != parts.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} blocks for a product of {} spaces",
                parts.len(),
                shape.len()
            )));
        }
        for (k, (s, p)) in shape.iter().zip(&parts).enumerate() {
            s.validate()?;
            if p.descriptor() != *s || p.coords().is_empty() {
                return Err(Error::ShapeMismatch(format!(
                    "block {k} is {} but the space is {s}",
                    p.descriptor()
                )));
            }
        }
        Ok(StructuredElement { shape, parts })
    }

    /// Shape inferred from the blocks.
    pub fn from_parts(parts: Vec<Block>) -> Result<Self> {
        let shape = parts.iter().map(Block::descriptor).collect();
        Self::new(shape, parts)
    }

    pub fn zeros(shape: &[SpaceDescriptor]) -> Result<Self> {
        for s in shape {
            s.validate()?;
        }
        Ok(StructuredElement {
            shape: shape.to_vec(),
            parts: shape.iter().map(|s| s.zero_block()).collect(),
        })
    }

    pub fn shape(&self) -> &[SpaceDescriptor] {
        &self.shape
    }

    pub fn parts(&self) -> &[Block] {
        &self.parts
    }

    pub fn part(&self, k: usize) -> &Block {
        &self.parts[k]
    }
}

/// Concatenated coordinates of `e`.
pub fn pack(e: &StructuredElement) -> Vector {
    let mut out = Vec::with_capacity(shape_dim(&e.shape));
    for p in &e.parts {
        out.extend_from_slice(p.coords());
    }
    Vector::from_vec(out)
}

/// Like [`pack`] but also checks `e` against an expected shape.
pub fn pack_as(e: &StructuredElement, shape: &[SpaceDescriptor]) -> Result<Vector> {
    if e.shape != shape {
        return Err(Error::ShapeMismatch(format!(
            "element of shape {} where {} was expected",
            ShapeDisplay(&e.shape),
            ShapeDisplay(shape)
        )));
    }
    Ok(pack(e))
}

pub fn unpack(v: &Vector, shape: &[SpaceDescriptor]) -> Result<StructuredElement> {
    for s in shape {
        s.validate()?;
    }
    let expected = shape_dim(shape);
    if v.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            got: v.len(),
        });
    }
    let x = v.as_slice();
    let mut at = 0;
    let mut parts = Vec::with_capacity(shape.len());
    for s in shape {
        let chunk = x[at..at + s.dim()].to_vec();
        at += s.dim();
        parts.push(match *s {
            SpaceDescriptor::Vector(_) => Block::Vector(Vector::from_vec(chunk)),
            SpaceDescriptor::Matrix(m, n) => Block::Matrix(Matrix::from_col_major(m, n, chunk)),
            SpaceDescriptor::Poly(_) => Block::Poly(chunk),
        });
    }
    Ok(StructuredElement {
        shape: shape.to_vec(),
        parts,
    })
}

struct ShapeDisplay<'a>(&'a [SpaceDescriptor]);

impl fmt::Display for ShapeDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, s) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, " x ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

type ApplyFn = dyn Fn(&StructuredElement) -> StructuredElement + Send + Sync;

/// A linear map given by a closure. The closure must be pure.
pub struct LinearOperator {
    domain: Vec<SpaceDescriptor>,
    codomain: Vec<SpaceDescriptor>,
    apply: Box<ApplyFn>,
}

impl fmt::Debug for LinearOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "LinearOperator({} -> {})",
            ShapeDisplay(&self.domain),
            ShapeDisplay(&self.codomain)
        )
    }
}

impl LinearOperator {
    pub fn new(
        domain: Vec<SpaceDescriptor>,
        codomain: Vec<SpaceDescriptor>,
        apply: impl Fn(&StructuredElement) -> StructuredElement + Send + Sync + 'static,
    ) -> Result<Self> {
        for s in domain.iter().chain(&codomain) {
            s.validate()?;
        }
        if domain.is_empty() || codomain.is_empty() {
            return Err(Error::ShapeMismatch("empty product space".into()));
        }
        Ok(LinearOperator {
            domain,
            codomain,
            apply: Box::new(apply),
        })
    }

    pub fn domain(&self) -> &[SpaceDescriptor] {
        &self.domain
    }

    pub fn codomain(&self) -> &[SpaceDescriptor] {
        &self.codomain
    }

    /// Apply and check the output shape.
    pub fn apply(&self, x: &StructuredElement) -> Result<StructuredElement> {
        if x.shape != self.domain {
            return Err(Error::ShapeMismatch(format!(
                "argument of shape {} for an operator on {}",
                ShapeDisplay(&x.shape),
                ShapeDisplay(&self.domain)
            )));
        }
        let y = (self.apply)(x);
        if y.shape != self.codomain {
            return Err(Error::ShapeMismatch(format!(
                "operator returned {} instead of {}",
                ShapeDisplay(&y.shape),
                ShapeDisplay(&self.codomain)
            )));
        }
        Ok(y)
    }

    fn apply_coords(&self, x: &Vector) -> Result<Vector> {
        Ok(pack(&self.apply(&unpack(x, &self.domain)?)?))
    }
}

/// Matrix of an operator together with the shapes needed to translate back.
#[derive(Debug, Clone, PartialEq)]
pub struct Materialized {
    pub matrix: Matrix,
    pub domain: Vec<SpaceDescriptor>,
    pub codomain: Vec<SpaceDescriptor>,
}

impl Materialized {
    pub fn pack_domain(&self, e: &StructuredElement) -> Result<Vector> {
        pack_as(e, &self.domain)
    }

    pub fn pack_codomain(&self, e: &StructuredElement) -> Result<Vector> {
        pack_as(e, &self.codomain)
    }

    pub fn unpack_domain(&self, v: &Vector) -> Result<StructuredElement> {
        unpack(v, &self.domain)
    }

    pub fn unpack_codomain(&self, v: &Vector) -> Result<StructuredElement> {
        unpack(v, &self.codomain)
    }
}

pub const LINEARITY_PAIRS: usize = 20;
pub const LINEARITY_TOL: f64 = 1e-10;
const PROBE_SEED: u64 = 0x6c69_6e65_6172;

fn random_coords(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_vec(
        (0..n)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect(),
    )
}

/// Matrix whose `j`-th column is `pack(L(e_j))`, after randomized
/// additivity and homogeneity probes.
pub fn materialize(op: &LinearOperator) -> Result<Materialized> {
    let n = shape_dim(&op.domain);
    let m = shape_dim(&op.codomain);
    let mut matrix = Matrix::zeros(m, n);
    for j in 0..n {
        let col = op.apply_coords(&Vector::unit(n, j))?;
        col.check_finite()?;
        matrix.col_mut(j).copy_from_slice(col.as_slice());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..LINEARITY_PAIRS {
        let x = random_coords(&mut rng, n);
        let y = random_coords(&mut rng, n);
        let alpha = c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let lx = op.apply_coords(&x)?;
        let ly = op.apply_coords(&y)?;
        let lxy = op.apply_coords(&x.add(&y))?;
        let lax = op.apply_coords(&x.scale(alpha))?;
        let scale = (lx.norm() + ly.norm()).max(matrix.max_column_norm() * (x.norm() + y.norm()));
        let scale = scale.max(f64::MIN_POSITIVE);
        let defects = [
            lxy.sub(&lx).sub(&ly).norm(),
            lax.sub(&lx.scale(alpha)).norm(),
            matrix.mul_vec(&x).sub(&lx).norm(),
        ];
        for d in defects {
            if !d.is_finite() {
                return Err(Error::NonlinearOperator {
                    defect: d,
                    tolerance: LINEARITY_TOL,
                });
            }
            worst = worst.max(d / scale);
        }
    }
    if worst > LINEARITY_TOL {
        return Err(Error::NonlinearOperator {
            defect: worst,
            tolerance: LINEARITY_TOL,
        });
    }
    Ok(Materialized {
        matrix,
        domain: op.domain.clone(),
        codomain: op.codomain.clone(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSolution {
    /// Minimum-norm point; `None` when the solution set is empty.
    pub anchor: Option<StructuredElement>,
    pub kernel: Vec<StructuredElement>,
    pub report: SolveReport,
    pub system: Materialized,
    pub solution: GeneralSolution,
}

pub fn solve_operator(
    op: &LinearOperator,
    rhs: &StructuredElement,
    cfg: &SolverConfig,
) -> Result<OperatorSolution> {
    let system = materialize(op)?;
    let b = system.pack_codomain(rhs)?;
    let solution = solve_general(&system.matrix, &b, cfg)?;
    let (anchor, kernel) = match solution.affine() {
        Some(s) => {
            let anchor = system.unpack_domain(s.anchor())?;
            let basis = s.kernel().basis();
            let kernel = (0..basis.cols())
                .map(|j| system.unpack_domain(&basis.column(j)))
                .collect::<Result<Vec<_>>>()?;
            (Some(anchor), kernel)
        }
        None => (None, Vec::new()),
    };
    Ok(OperatorSolution {
        anchor,
        kernel,
        report: solution.report.clone(),
        system,
        solution,
    })
}

/// Product of two coefficient sequences (ascending degree).
pub fn poly_mul(p: &[Scalar], q: &[Scalar]) -> Vec<Scalar> {
    if p.is_empty() || q.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Scalar::new(0.0, 0.0); p.len() + q.len() - 1];
    for (i, &a) in p.iter().enumerate() {
        for (j, &b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// `X ↦ A X + X B` on `m × n` matrices.
pub fn sylvester_operator(a: Matrix, b: Matrix) -> Result<LinearOperator> {
    let m = a.rows();
    let n = b.rows();
    if a.cols() != m || b.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "Sylvester operator needs square A and B, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let shape = vec![SpaceDescriptor::Matrix(m, n)];
    LinearOperator::new(shape.clone(), shape, move |e| {
        let x = e.part(0).as_matrix().expect("matrix block");
        let y = a.matmul(x).add(&x.matmul(&b));
        StructuredElement::from_parts(vec![Block::Matrix(y)]).expect("conforming output")
    })
}

/// `(u₁, …, u_k) ↦ Σ u_j f_j` with `u_j` of degree at most `degrees[j]`.
pub fn polynomial_combination(
    factors: Vec<Vec<Scalar>>,
    degrees: &[usize],
) -> Result<LinearOperator> {
    if factors.len() != degrees.len() || factors.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{} factors with {} degree bounds",
            factors.len(),
            degrees.len()
        )));
    }
    if factors.iter().any(|f| f.is_empty()) {
        return Err(Error::InvalidArgument("empty polynomial factor".into()));
    }
    let out_deg = factors
        .iter()
        .zip(degrees)
        .map(|(f, d)| f.len() - 1 + d)
        .max()
        .unwrap_or(0);
    let domain = degrees.iter().map(|&d| SpaceDescriptor::Poly(d)).collect();
    let codomain = vec![SpaceDescriptor::Poly(out_deg)];
    LinearOperator::new(domain, codomain, move |e| {
        let mut sum = vec![Scalar::new(0.0, 0.0); out_deg + 1];
        for (f, block) in factors.iter().zip(e.parts()) {
            let u = block.as_poly().expect("polynomial block");
            for (k, v) in poly_mul(u, f).into_iter().enumerate() {
                sum[k] += v;
            }
        }
        StructuredElement::from_parts(vec![Block::Poly(sum)]).expect("conforming output")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::re;

    fn reals(v: &[f64]) -> Vec<Scalar> {
        v.iter().map(|&x| re(x)).collect()
    }

    #[test]
    fn pack_examples() {
        let v = StructuredElement::from_parts(vec![Block::Vector(Vector::from_real(&[1.0, 2.0, 3.0]))]).unwrap();
        assert_eq!(pack(&v), Vector::from_real(&[1.0, 2.0, 3.0]));

        let m = Matrix::from_real_rows(&[&[1.0, 3.0], &[2.0, 4.0]]);
        let e = StructuredElement::from_parts(vec![Block::Matrix(m)]).unwrap();
        assert_eq!(pack(&e), Vector::from_real(&[1.0, 2.0, 3.0, 4.0]));

        let g = StructuredElement::from_parts(vec![Block::Poly(reals(&[4.6667, 7.0, 2.3333]))]).unwrap();
        assert_eq!(pack(&g), Vector::from_real(&[4.6667, 7.0, 2.3333]));

        for e in [v, e, g] {
            assert_eq!(unpack(&pack(&e), e.shape()).unwrap(), e);
        }
    }

    #[test]
    fn unpack_rejects_wrong_length() {
        let err = unpack(&Vector::zeros(3), &[SpaceDescriptor::Matrix(2, 2)]).unwrap_err();
        assert_eq!(err, Error::LengthMismatch { expected: 4, got: 3 });
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let e = StructuredElement::zeros(&[SpaceDescriptor::Vector(2)]).unwrap();
        assert!(matches!(
            pack_as(&e, &[SpaceDescriptor::Poly(1)]),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(StructuredElement::new(
            vec![SpaceDescriptor::Matrix(2, 2)],
            vec![Block::Vector(Vector::zeros(4))]
        )
        .is_err());
        assert!(StructuredElement::zeros(&[SpaceDescriptor::Matrix(0, 2)]).is_err());
    }

    #[test]
    fn identity_materializes_to_identity() {
        let s = vec![SpaceDescriptor::Vector(3)];
        let op = LinearOperator::new(s.clone(), s, |e| e.clone()).unwrap();
        assert_eq!(materialize(&op).unwrap().matrix, Matrix::identity(3));
    }

    #[test]
    fn sylvester_matches_kronecker_form() {
        let a = Matrix::from_real_rows(&[&[1.0, -1.0], &[1.0, -1.0]]);
        let b = Matrix::from_real_rows(&[&[0.3, 1.0], &[-1.0, 2.5]]);
        let m = materialize(&sylvester_operator(a.clone(), b.clone()).unwrap()).unwrap().matrix;
        // I ⊗ A + Bᵀ ⊗ I, built entrywise.
        let kron = Matrix::from_fn(4, 4, |i, j| {
            let (ri, ci) = (i % 2, i / 2);
            let (rj, cj) = (j % 2, j / 2);
            let mut v = re(0.0);
            if ci == cj {
                v += a.col(rj)[ri];
            }
            if ri == rj {
                v += b.col(ci)[cj];
            }
            v
        });
        assert!(m.sub(&kron).max_abs() < 1e-15);
    }

    #[test]
    fn nonlinear_closure_is_rejected() {
        let s = vec![SpaceDescriptor::Vector(2)];
        let op = LinearOperator::new(s.clone(), s, |e| {
            let v = e.part(0).as_vector().unwrap();
            let w: Vec<Scalar> = v.iter().map(|x| x + re(1.0)).collect();
            StructuredElement::from_parts(vec![Block::Vector(Vector::from_vec(w))]).unwrap()
        })
        .unwrap();
        assert!(matches!(materialize(&op), Err(Error::NonlinearOperator { .. })));

        let s = vec![SpaceDescriptor::Vector(2)];
        let conj = LinearOperator::new(s.clone(), s, |e| {
            let v = e.part(0).as_vector().unwrap();
            let w: Vec<Scalar> = v.iter().map(|x| x.conj()).collect();
            StructuredElement::from_parts(vec![Block::Vector(Vector::from_vec(w))]).unwrap()
        })
        .unwrap();
        assert!(matches!(materialize(&conj), Err(Error::NonlinearOperator { .. })));
    }

    #[test]
    fn wrong_output_shape_is_reported() {
        let op = LinearOperator::new(
            vec![SpaceDescriptor::Vector(2)],
            vec![SpaceDescriptor::Vector(3)],
            |e| e.clone(),
        )
        .unwrap();
        assert!(matches!(materialize(&op), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn identity_solve() {
        let s = vec![SpaceDescriptor::Vector(3)];
        let op = LinearOperator::new(s.clone(), s, |e| e.clone()).unwrap();
        let b = StructuredElement::from_parts(vec![Block::Vector(Vector::from_real(&[1.0, -2.0, 0.5]))]).unwrap();
        let sol = solve_operator(&op, &b, &SolverConfig::new(0.5)).unwrap();
        let anchor = sol.anchor.unwrap();
        assert!(pack(&anchor).sub(&pack(&b)).norm() < 1e-14);
        assert!(sol.kernel.is_empty());
    }

    #[test]
    fn solve_operator_agrees_with_matrix_path() {
        let a = Matrix::from_real_rows(&[&[1.0, -1.0], &[1.0, -1.0]]);
        let b = Matrix::from_real_rows(&[&[-1.0, 1.0], &[-1.0, 1.0]]);
        let op = sylvester_operator(a, b).unwrap();
        let rhs = StructuredElement::from_parts(vec![Block::Matrix(Matrix::from_real_rows(&[&[1.0, 0.0], &[2.0, -1.0]]))]).unwrap();
        let cfg = SolverConfig::new(1e-3);
        let via_op = solve_operator(&op, &rhs, &cfg).unwrap();
        let direct = solve_general(&via_op.system.matrix, &pack(&rhs), &cfg).unwrap();
        assert_eq!(via_op.solution, direct);
    }

    #[test]
    fn poly_mul_small() {
        // (1 + x)(1 − x) = 1 − x²
        let p = poly_mul(&reals(&[1.0, 1.0]), &reals(&[1.0, -1.0]));
        assert_eq!(p, reals(&[1.0, 0.0, -1.0]));
    }
}
