//! Symmetrized rank-one compatibility of symmetric matrix pairs.

use crate::scalar::Scalar;
use crate::wells::WellFamily;
use nalgebra::{DMatrix, DVector, RealField};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompatError {
    #[error("matrices coincide; compatibility is undefined for A = B")]
    Identical,
    #[error("dimension mismatch: {0}x{0} vs {1}x{1}")]
    Dimension(usize, usize),
    #[error("pair is incompatible; no factorization exists")]
    Incompatible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CompatKind {
    Incompatible,
    Degenerate,
    NonDegenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatClass<T: RealField> {
    pub kind: CompatKind,
    /// Factor vectors with sym(a⊗b) = A − B, absent when incompatible.
    pub factors: Option<(DVector<T>, DVector<T>)>,
    /// Eigenvalues of A − B in ascending order.
    pub eigenvalues: Vec<T>,
}

/// a ⊙ b = (a⊗b + b⊗a)/2.
pub fn sym_outer<T: RealField + Copy>(a: &DVector<T>, b: &DVector<T>) -> DMatrix<T> {
    let half = T::one() / (T::one() + T::one());
    (a * b.transpose() + b * a.transpose()) * half
}

/// Relative eigenvalue threshold below which an eigenvalue counts as zero.
pub const ZERO_EIG_REL: f64 = 1e-10;

pub fn classify<T: RealField + Copy>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<CompatClass<T>, CompatError> {
    if a.nrows() != b.nrows() || !a.is_square() || !b.is_square() {
        return Err(CompatError::Dimension(a.nrows(), b.nrows()));
    }
    let diff = a - b;
    let sym = (&diff + diff.transpose()) * nalgebra::convert::<f64, T>(0.5);
    let norm = sym.norm();
    if norm <= nalgebra::convert(1e-12) {
        return Err(CompatError::Identical);
    }
    let eig = sym.symmetric_eigen();
    let tol = norm * nalgebra::convert(ZERO_EIG_REL);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let eigenvalues: Vec<T> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let nz: Vec<usize> = order.iter().copied().filter(|&i| eig.eigenvalues[i].abs() > tol).collect();

    let col = |i: usize| eig.eigenvectors.column(i).into_owned();
    let factors = match nz.as_slice() {
        [i] => {
            let lam = eig.eigenvalues[*i];
            let v = col(*i) * lam.abs().sqrt();
            let b = if lam > T::zero() { v.clone() } else { -v.clone() };
            Some((CompatKind::Degenerate, v, b))
        }
        [i, j] => {
            let (l1, l2) = (eig.eigenvalues[*i], eig.eigenvalues[*j]);
            if l1 < T::zero() && l2 > T::zero() {
                let s = (-(l1 * l2)).sqrt();
                let (ei, ej) = (col(*i), col(*j));
                let fa = &ei + &ej * (s / l1);
                let fb = &ei * l1 - &ej * s;
                Some((CompatKind::NonDegenerate, fa, fb))
            } else {
                None
            }
        }
        _ => None,
    };
    Ok(match factors {
        Some((kind, fa, fb)) => CompatClass { kind, factors: Some((fa, fb)), eigenvalues },
        None => CompatClass { kind: CompatKind::Incompatible, factors: None, eigenvalues },
    })
}

pub fn factorize<T: RealField + Copy>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<(DVector<T>, DVector<T>), CompatError> {
    classify(a, b)?.factors.ok_or(CompatError::Incompatible)
}

pub fn diag<T: RealField + Copy>(v: &[T]) -> DMatrix<T> {
    DMatrix::from_diagonal(&DVector::from_column_slice(v))
}

/// One lamination level of the staircase hull: {base + α·direction : α ∈ (0,1)}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaminateSegment {
    pub order: usize,
    pub base: Vec<f64>,
    pub direction: Vec<f64>,
    pub direction_count: u8,
}

impl LaminateSegment {
    pub fn point(&self, alpha: f64) -> Vec<f64> {
        self.base.iter().zip(&self.direction).map(|(b, d)| b + alpha * d).collect()
    }
}

/// Closed-form hull segments of a staircase family, checked against [`classify`].
pub fn hull_segments<S: Scalar>(w: &WellFamily<S>) -> Vec<LaminateSegment> {
    (1..=w.m())
        .map(|j| {
            let seg = LaminateSegment {
                order: j,
                base: w.midpoint_f64(j - 1),
                direction: w.increment_f64(j),
                direction_count: w.signature.at(j),
            };
            let end = diag(&seg.point(1.0));
            let kind = classify(&end, &diag(&seg.base)).expect("distinct endpoints").kind;
            let expect = if seg.direction_count == 1 { CompatKind::Degenerate } else { CompatKind::NonDegenerate };
            assert_eq!(kind, expect, "segment {j} generators have the wrong compatibility class");
            seg
        })
        .collect()
}

/// Both sides of the factorization used to rule out consecutive degenerate levels.
///
/// `sign` selects ±; for s < 0 the n-term carries the opposite sign so that
/// the right side factors with √|s|.
pub fn staircase_identity(n: &DVector<f64>, nu: &DVector<f64>, s: f64, sign: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let sigma = sign.signum();
    let tau = if s >= 0.0 { sigma } else { -sigma };
    let lhs = sym_outer(&(nu * sigma), nu) - sym_outer(&(n * tau), n) * s;
    let r = s.abs().sqrt();
    let rhs = sym_outer(&(nu + n * r), &(nu - n * r)) * sigma;
    (lhs, rhs)
}
