//! Subspaces, affine subspaces and the distances between them.
//!
//! A k-dimensional subspace of Cⁿ is held as an `n×k` matrix with orthonormal
//! columns. An affine subspace `u + V` is held through its minimum-norm point
//! `û ∈ V⊥`, which makes the representation unique.

use crate::dense::{orthogonal_complement, qr, Matrix, Vector};
use crate::error::{Error, Result};
use crate::rank::exact_rank_of;
use crate::svd::{singular_values, svd};

const ORTHONORMAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: Matrix,
}

impl Subspace {
    /// Wrap a basis that is already orthonormal, checking it.
    pub fn from_orthonormal(basis: Matrix) -> Result<Self> {
        let k = basis.cols();
        if k > 0 {
            let g = basis.adjoint_matmul(&basis).sub(&Matrix::identity(k));
            let defect = g.frobenius_norm();
            if !(defect <= ORTHONORMAL_TOL) {
                return Err(Error::InvalidArgument(format!(
                    "basis is not orthonormal (defect {defect:e})"
                )));
            }
        }
        Ok(Subspace { basis })
    }

    pub(crate) fn from_orthonormal_unchecked(basis: Matrix) -> Self {
        Subspace { basis }
    }

    /// Span of the given columns, orthonormalized by QR. Linearly dependent
    /// columns are an error.
    pub fn span(columns: &Matrix) -> Result<Self> {
        if columns.cols() == 0 {
            return Ok(Subspace::trivial(columns.rows()));
        }
        let (q, _) = qr(columns)?;
        Ok(Subspace { basis: q })
    }

    /// The zero subspace `{0}` of Cⁿ.
    pub fn trivial(n: usize) -> Self {
        Subspace {
            basis: Matrix::zeros(n, 0),
        }
    }

    /// Cⁿ itself.
    pub fn full(n: usize) -> Self {
        Subspace {
            basis: Matrix::identity(n),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn into_basis(self) -> Matrix {
        self.basis
    }

    /// Orthogonal projection `B Bᴴ x`.
    pub fn project(&self, x: &Vector) -> Vector {
        if self.dim() == 0 {
            return Vector::zeros(x.len());
        }
        self.basis.mul_vec(&self.basis.adjoint_mul_vec(x))
    }

    /// `(I − B Bᴴ) x`.
    pub fn project_out(&self, x: &Vector) -> Vector {
        x.sub(&self.project(x))
    }

    /// Orthonormal basis of the orthogonal complement, from a full QR.
    pub fn complement(&self) -> Subspace {
        Subspace {
            basis: orthogonal_complement(&self.basis),
        }
    }

    fn check_ambient(&self, n: usize) -> Result<()> {
        if self.ambient_dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {n} against a subspace of C^{}",
                self.ambient_dim()
            )));
        }
        Ok(())
    }
}

fn check_comparable(p: &Subspace, q: &Subspace) -> Result<()> {
    if p.ambient_dim() != q.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "ambient dimensions {} and {}",
            p.ambient_dim(),
            q.ambient_dim()
        )));
    }
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch(format!(
            "subspace dimensions {} and {}",
            p.dim(),
            q.dim()
        )));
    }
    Ok(())
}

fn top_singular_value(a: &Matrix) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

/// `‖P Pᴴ − Q Qᴴ‖₂` for subspaces of equal dimension, via
/// `max(‖(I − QQᴴ)P‖₂, ‖(I − PPᴴ)Q‖₂)`.
pub fn grassmann_distance(p: &Subspace, q: &Subspace) -> Result<f64> {
    check_comparable(p, q)?;
    if p.dim() == 0 || p.dim() == p.ambient_dim() {
        return Ok(0.0);
    }
    let (pb, qb) = (&p.basis, &q.basis);
    let a = pb.sub(&qb.matmul(&qb.adjoint_matmul(pb)));
    let b = qb.sub(&pb.matmul(&pb.adjoint_matmul(qb)));
    let d = top_singular_value(&a)?.max(top_singular_value(&b)?);
    Ok(d.min(1.0))
}

/// `‖P Pᴴ − Q Qᴴ‖₂` formed explicitly.
pub fn projector_distance(p: &Subspace, q: &Subspace) -> Result<f64> {
    check_comparable(p, q)?;
    let proj = |s: &Subspace| {
        if s.dim() == 0 {
            Matrix::zeros(s.ambient_dim(), s.ambient_dim())
        } else {
            s.basis.matmul(&s.basis.adjoint())
        }
    };
    top_singular_value(&proj(p).sub(&proj(q)))
}

/// `‖Pᴴ Q̂‖₂` where `Q̂` spans the complement of `Q`.
pub fn complement_distance(p: &Subspace, q: &Subspace) -> Result<f64> {
    check_comparable(p, q)?;
    let qc = q.complement();
    if p.dim() == 0 || qc.dim() == 0 {
        return Ok(0.0);
    }
    top_singular_value(&p.basis.adjoint_matmul(&qc.basis))
}

/// `û + V` with `û ⟂ V`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSolution {
    anchor: Vector,
    kernel: Subspace,
}

impl AffineSolution {
    pub fn anchor(&self) -> &Vector {
        &self.anchor
    }

    pub fn kernel(&self) -> &Subspace {
        &self.kernel
    }

    pub fn ambient_dim(&self) -> usize {
        self.kernel.ambient_dim()
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    /// `û + B c`.
    pub fn point(&self, coeffs: &Vector) -> Result<Vector> {
        if coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for a {}-dimensional kernel",
                coeffs.len(),
                self.dim()
            )));
        }
        if self.dim() == 0 {
            return Ok(self.anchor.clone());
        }
        Ok(self.anchor.add(&self.kernel.basis.mul_vec(coeffs)))
    }
}

/// The minimum-norm representative of `point + V`.
pub fn canonicalize_affine(point: &Vector, v: &Subspace) -> Result<AffineSolution> {
    v.check_ambient(point.len())?;
    point.check_finite()?;
    Ok(AffineSolution {
        anchor: v.project_out(point),
        kernel: v.clone(),
    })
}

/// Empty set or an affine subspace; dimension −1 for the empty set.
#[derive(Debug, Clone, PartialEq)]
pub enum SolutionSet {
    Empty,
    Affine(AffineSolution),
}

impl SolutionSet {
    pub fn dimension(&self) -> isize {
        match self {
            SolutionSet::Empty => -1,
            SolutionSet::Affine(s) => s.dim() as isize,
        }
    }

    pub fn as_affine(&self) -> Option<&AffineSolution> {
        match self {
            SolutionSet::Empty => None,
            SolutionSet::Affine(s) => Some(s),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, SolutionSet::Empty)
    }
}

/// `max{‖û₁ − û₂‖₂, dist(V₁, V₂)}`.
pub fn affine_distance(s1: &AffineSolution, s2: &AffineSolution) -> Result<f64> {
    check_comparable(&s1.kernel, &s2.kernel)?;
    let anchors = s1.anchor.sub(&s2.anchor).norm();
    Ok(anchors.max(grassmann_distance(&s1.kernel, &s2.kernel)?))
}

/// [`affine_distance`] extended to possibly empty sets, with `dist(∅, ∅) = 0`.
pub fn set_distance(s1: &SolutionSet, s2: &SolutionSet) -> Result<f64> {
    match (s1, s2) {
        (SolutionSet::Empty, SolutionSet::Empty) => Ok(0.0),
        (SolutionSet::Affine(a), SolutionSet::Affine(b)) => affine_distance(a, b),
        _ => Err(Error::IncomparableDimensions),
    }
}

/// Exact solution set `A†b + Kernel(A)` of a consistent system, with the
/// rank taken above `RANK_FLOOR · σ₁`.
pub fn exact_solution_set(a: &Matrix, b: &Vector) -> Result<(AffineSolution, usize)> {
    if a.rows() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix with right-hand side of length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    b.check_finite()?;
    let f = svd(a)?;
    let r = exact_rank_of(&f.sigma);
    let n = a.cols();
    let ur = f.u.columns(0..r);
    let mut c = ur.adjoint_mul_vec(b);
    for (z, s) in c.as_mut_slice().iter_mut().zip(&f.sigma) {
        *z /= s;
    }
    let x = if r == 0 {
        Vector::zeros(n)
    } else {
        f.v.columns(0..r).mul_vec(&c)
    };
    let residual = a.mul_vec(&x).sub(b).norm();
    let scale = f.sigma.first().copied().unwrap_or(0.0) * x.norm() + b.norm();
    if residual > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::InconsistentSystem { residual });
    }
    let kernel = Subspace::from_orthonormal_unchecked(f.v.columns(r..n));
    Ok((AffineSolution { anchor: x, kernel }, r))
}

/// `max{‖A†b − B†d‖₂, dist(Kernel A, Kernel B)}` for two consistent systems
/// of equal rank.
pub fn solution_distance(a: &Matrix, b: &Vector, bm: &Matrix, d: &Vector) -> Result<f64> {
    let (s1, r1) = exact_solution_set(a, b)?;
    let (s2, r2) = exact_solution_set(bm, d)?;
    if r1 != r2 {
        return Err(Error::RankMismatch {
            left: r1,
            right: r2,
        });
    }
    affine_distance(&s1, &s2)
}

/// Point of `S` closest to `target`, with its kernel coordinates
/// `c = Bᴴ(target − û)`.
pub fn nearest_in_affine(s: &AffineSolution, target: &Vector) -> Result<(Vector, Vector)> {
    s.kernel.check_ambient(target.len())?;
    let coeffs = if s.dim() == 0 {
        Vector::zeros(0)
    } else {
        s.kernel.basis.adjoint_mul_vec(&target.sub(&s.anchor))
    };
    Ok((s.point(&coeffs)?, coeffs))
}
