//! Staircase well families K_m and their index bookkeeping.
//!
//! Every matrix in a staircase family is diagonal, so wells, increments and
//! midpoints are stored as their diagonal vectors.

use crate::scalar::{Exact, Scalar};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WellsError {
    #[error("signature malformed: expected {expected} levels with values in {{1,2}}, got {got:?}")]
    Malformed { expected: usize, got: Vec<u8> },
    #[error("signature {0:?} has two consecutive degenerate levels")]
    ConsecutiveDegenerate(Vec<u8>),
    #[error("polynomial relation undefined at level {0}")]
    UndefinedLevel(usize),
    #[error("datum has dimension {got}, family has dimension {expected}")]
    DatumDimension { expected: usize, got: usize },
}

/// Number of compatibility directions per lamination level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct LaminationSignature {
    pub m: usize,
    pub f: Vec<u8>,
}

impl LaminationSignature {
    pub fn new(f: &[u8]) -> Result<Self, WellsError> {
        if validate_signature(f.len(), f)? {
            Ok(Self { m: f.len(), f: f.to_vec() })
        } else {
            Err(WellsError::ConsecutiveDegenerate(f.to_vec()))
        }
    }

    /// `f(i)` with 1-based level index.
    pub fn at(&self, i: usize) -> u8 {
        self.f[i - 1]
    }

    pub fn label(&self) -> String {
        self.f.iter().map(|v| v.to_string()).collect()
    }
}

/// True iff `f` is an admissible signature of length `m`.
pub fn validate_signature(m: usize, f: &[u8]) -> Result<bool, WellsError> {
    if m == 0 || f.len() != m || f.iter().any(|&v| v != 1 && v != 2) {
        return Err(WellsError::Malformed { expected: m, got: f.to_vec() });
    }
    Ok(!f.windows(2).any(|w| w[0] == 1 && w[1] == 1))
}

/// All admissible signatures of length `m`, in lexicographic order.
pub fn all_signatures(m: usize) -> Vec<LaminationSignature> {
    let mut out = Vec::new();
    for mask in 0..(1u32 << m) {
        let f: Vec<u8> = (0..m).map(|b| if mask >> (m - 1 - b) & 1 == 1 { 2 } else { 1 }).collect();
        if validate_signature(m, &f) == Ok(true) {
            out.push(LaminationSignature { m, f });
        }
    }
    out
}

/// Compatibility space attached to a lamination level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CompatSpace {
    /// Linear span of the basis vectors.
    Span(Vec<Vec<f64>>),
    /// Union of two lines; distances are taken to the nearer one.
    Lines([Vec<f64>; 2]),
}

impl CompatSpace {
    /// Euclidean distance of `x` to the space.
    pub fn distance(&self, x: &[f64]) -> f64 {
        match self {
            CompatSpace::Span(basis) => {
                let q = orthonormalize(basis);
                let mut r = x.to_vec();
                for b in &q {
                    let c: f64 = dot(&r, b);
                    for (ri, bi) in r.iter_mut().zip(b) {
                        *ri -= c * bi;
                    }
                }
                dot(&r, &r).sqrt()
            }
            CompatSpace::Lines(lines) => lines
                .iter()
                .map(|l| CompatSpace::Span(vec![l.clone()]).distance(x))
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.distance(x) <= tol * (1.0 + dot(x, x).sqrt())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn orthonormalize(v: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = Vec::new();
    for x in v {
        let mut r = x.clone();
        for b in &q {
            let c = dot(&r, b);
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri -= c * bi;
            }
        }
        let n = dot(&r, &r).sqrt();
        if n > 1e-14 {
            q.push(r.iter().map(|t| t / n).collect());
        }
    }
    q
}

/// The staircase family K_m together with all derived bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct WellFamily<T: Scalar> {
    pub signature: LaminationSignature,
    pub d: usize,
    /// A_0..A_m as diagonal vectors.
    pub wells: Vec<Vec<T>>,
    /// M_1..M_m (index 0 holds M_1).
    pub increments: Vec<Vec<T>>,
    /// M̃_1..M̃_m.
    pub mirrored: Vec<Vec<T>>,
    /// J_0..J_m.
    pub midpoints: Vec<Vec<T>>,
    /// k_0..k_m.
    pub k: Vec<usize>,
    /// l(1)..l(m), 1-based coordinates.
    pub l: Vec<usize>,
    pub s1: Vec<usize>,
    pub s2: Vec<usize>,
    /// V_1..V_m.
    pub spaces: Vec<CompatSpace>,
}

pub type WellFamilyF64 = WellFamily<f64>;
pub type WellFamilyExact = WellFamily<Exact>;

fn unit<T: Scalar>(d: usize, i: usize) -> Vec<T> {
    let mut v = vec![T::zero(); d];
    v[i - 1] = T::one();
    v
}

/// Build K_m for an admissible signature.
pub fn build_wells<T: Scalar>(sig: &LaminationSignature) -> Result<WellFamily<T>, WellsError> {
    if !validate_signature(sig.m, &sig.f)? {
        return Err(WellsError::ConsecutiveDegenerate(sig.f.clone()));
    }
    let m = sig.m;
    let mut l = Vec::with_capacity(m);
    let mut acc = 1usize;
    for &fi in &sig.f {
        l.push(acc);
        acc += fi as usize;
    }
    // m = 1 lives in d = 2 with its own wells.
    let d = if m == 1 { 2 } else { acc - 1 };
    let mut k = vec![0usize];
    for &fi in &sig.f {
        k.push(k.last().unwrap() + usize::from(fi == 1));
    }

    let mut increments = Vec::with_capacity(m);
    let mut mirrored = Vec::with_capacity(m);
    for i in 1..=m {
        let li = l[i - 1];
        let mut mi = unit::<T>(d, li);
        let mut mt = mi.clone();
        if sig.at(i) == 2 {
            mi[li] = -T::one();
            mt[li] = T::one();
        }
        increments.push(mi);
        mirrored.push(mt);
    }

    let mut midpoints = vec![vec![T::zero(); d]];
    let mut wells = vec![vec![T::zero(); d]];
    let mut sum = vec![T::zero(); d];
    for mi in &increments {
        let a: Vec<T> = midpoints.last().unwrap().iter().zip(mi).map(|(j, x)| j.clone() + x.clone()).collect();
        wells.push(a);
        for (s, x) in sum.iter_mut().zip(mi) {
            *s = s.clone() + x.clone();
        }
        midpoints.push(sum.iter().map(|s| s.clone() * T::half()).collect());
    }

    let s1: Vec<usize> = (1..=m).filter(|&i| sig.at(i) == 1).map(|i| l[i - 1]).collect();
    let s2: Vec<usize> = (1..=m).filter(|&i| sig.at(i) == 2).map(|i| l[i - 1]).collect();

    let to_f = |v: &Vec<T>| v.iter().map(Scalar::to_f64_lossy).collect::<Vec<f64>>();
    let degenerate: Vec<Vec<f64>> = (1..=m).filter(|&i| sig.at(i) == 1).map(|i| to_f(&increments[i - 1])).collect();
    let spaces = (1..=m)
        .map(|i| {
            if sig.at(i) == 1 {
                CompatSpace::Span(degenerate.clone())
            } else {
                CompatSpace::Lines([to_f(&increments[i - 1]), to_f(&mirrored[i - 1])])
            }
        })
        .collect();

    Ok(WellFamily { signature: sig.clone(), d, wells, increments, mirrored, midpoints, k, l, s1, s2, spaces })
}

/// Index bookkeeping returned by [`index_sets`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexSets {
    pub s1: Vec<usize>,
    pub s2: Vec<usize>,
    pub l: Vec<usize>,
    pub k: Vec<usize>,
}

pub fn index_sets<T: Scalar>(w: &WellFamily<T>) -> IndexSets {
    IndexSets { s1: w.s1.clone(), s2: w.s2.clone(), l: w.l.clone(), k: w.k.clone() }
}

impl<T: Scalar> WellFamily<T> {
    pub fn m(&self) -> usize {
        self.signature.m
    }

    /// Wells as f64 diagonal vectors.
    pub fn wells_f64(&self) -> Vec<Vec<f64>> {
        self.wells.iter().map(|w| w.iter().map(Scalar::to_f64_lossy).collect()).collect()
    }

    /// Wells as dense symmetric matrices.
    pub fn well_matrices(&self) -> Vec<DMatrix<f64>> {
        self.wells_f64().into_iter().map(|v| DMatrix::from_diagonal(&DVector::from_vec(v))).collect()
    }

    pub fn midpoint_f64(&self, i: usize) -> Vec<f64> {
        self.midpoints[i].iter().map(Scalar::to_f64_lossy).collect()
    }

    pub fn increment_f64(&self, i: usize) -> Vec<f64> {
        self.increments[i - 1].iter().map(Scalar::to_f64_lossy).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "m": self.m(),
            "f": self.signature.f,
            "d": self.d,
            "wells": self.wells_f64(),
            "S1": self.s1,
            "S2": self.s2,
            "k": self.k,
        })
    }
}

/// The two polynomial relations tying the coordinate l(i) to its neighbours.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyRelation {
    pub level: usize,
    /// Monomial coefficients of Q, lowest degree first.
    pub q: Vec<f64>,
    /// Monomial coefficients of g(t) = 4t(1−t).
    pub g: Vec<f64>,
    /// Q is applied to w_prev·χ_{l(i−1)} + w_next·χ_{l(i+1)}.
    pub weights: (f64, f64),
    /// (k, 2^{−(k−i)}) for k = i+1..m.
    pub tail: Vec<(usize, f64)>,
    /// 1-based coordinate indices (l(i), l(i−1), l(i+1) or None at i = m).
    pub coords: (usize, usize, Option<usize>),
    /// Datum diagonal F.
    pub datum: Vec<f64>,
}

pub fn poly_eval(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * t + ci)
}

fn lagrange_monomial(nodes: &[f64], values: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let v = DMatrix::from_fn(n, n, |r, c| nodes[r].powi(c as i32));
    let rhs = DVector::from_column_slice(values);
    let sol = v.lu().solve(&rhs).expect("distinct interpolation nodes");
    sol.iter().copied().collect()
}

/// Interpolating quartic through the staircase nodes.
pub fn canonical_q() -> Vec<f64> {
    let (s5, s3) = (5f64.sqrt(), 3f64.sqrt());
    lagrange_monomial(
        &[0.0, s5, s5 / 2.0, s5 / 2.0 + s3, s5 / 2.0 + s3 / 2.0],
        &[0.0, 0.0, 1.0, 0.5, 0.5],
    )
}

/// Relations for level `i` (2 ≤ i ≤ m) after shifting by the datum `f_diag`.
pub fn poly_relations<T: Scalar>(w: &WellFamily<T>, i: usize, f_diag: &[f64]) -> Result<PolyRelation, WellsError> {
    let m = w.m();
    if i < 2 || i > m {
        return Err(WellsError::UndefinedLevel(i));
    }
    if f_diag.len() != w.d {
        return Err(WellsError::DatumDimension { expected: w.d, got: f_diag.len() });
    }
    let g = vec![0.0, 4.0, -4.0];
    let (q, weights, next) = if i == m {
        (g.clone(), (1.0, 0.0), None)
    } else {
        (canonical_q(), (5f64.sqrt(), 3f64.sqrt()), Some(w.l[i]))
    };
    let tail = ((i + 1)..=m).map(|k| (k, 0.5f64.powi((k - i) as i32))).collect();
    Ok(PolyRelation {
        level: i,
        q,
        g,
        weights,
        tail,
        coords: (w.l[i - 1], w.l[i - 2], next),
        datum: f_diag.to_vec(),
    })
}

impl PolyRelation {
    fn fval(&self, c: usize) -> f64 {
        self.datum[c - 1]
    }

    /// Q̃(s) = Q(s + w·F_neighbours) − F_{l(i)}.
    pub fn q_shifted(&self, s: f64) -> f64 {
        let (li, lp, ln) = self.coords;
        let shift = self.weights.0 * self.fval(lp) + ln.map_or(0.0, |c| self.weights.1 * self.fval(c));
        poly_eval(&self.q, s + shift) - self.fval(li)
    }

    /// g̃(t) = g(t + F_{l(i−1)}) − F_{l(i)} − Σ c_k F_{l(k)}.
    pub fn g_shifted(&self, t: f64, l: &[usize]) -> f64 {
        let (li, lp, _) = self.coords;
        let tail: f64 = self.tail.iter().map(|&(k, c)| c * self.fval(l[k - 1])).sum();
        poly_eval(&self.g, t + self.fval(lp)) - self.fval(li) - tail
    }

    /// Residuals of both relations on the shifted diagonal χ̃ = χ − F.
    pub fn residuals(&self, chi: &[f64], l: &[usize]) -> (f64, f64) {
        let (li, lp, ln) = self.coords;
        let ct: Vec<f64> = chi.iter().zip(&self.datum).map(|(a, b)| a - b).collect();
        let at = |c: usize| ct[c - 1];
        let arg = self.weights.0 * at(lp) + ln.map_or(0.0, |c| self.weights.1 * at(c));
        let r1 = at(li) - self.q_shifted(arg);
        let tail: f64 = self.tail.iter().map(|&(k, c)| c * at(l[k - 1])).sum();
        let r2 = at(li) - (self.g_shifted(at(lp), l) - tail);
        (r1, r2)
    }

    /// Largest residual over all wells of `w`.
    pub fn max_residual<T: Scalar>(&self, w: &WellFamily<T>) -> f64 {
        w.wells_f64()
            .iter()
            .map(|a| {
                let (r1, r2) = self.residuals(a, &w.l);
                r1.abs().max(r2.abs())
            })
            .fold(0.0, f64::max)
    }
}
