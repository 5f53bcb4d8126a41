//! Tensor Gauss–Legendre quadrature on leaves and interfaces.

use crate::field::{IfacePoint, Interface, Leaf, LeafPoint, V3};
use gauss_quad::GaussLegendre;
use std::collections::BTreeMap;

/// Gauss–Legendre nodes and weights on [0,1], cached per order.
#[derive(Debug, Clone)]
pub struct Rules {
    rules: BTreeMap<usize, Vec<(f64, f64)>>,
}

impl Default for Rules {
    fn default() -> Self {
        Self::new()
    }
}

impl Rules {
    pub fn new() -> Self {
        let mut rules = BTreeMap::new();
        for n in 2..=12 {
            let gl = GaussLegendre::new(n).expect("order ≥ 2");
            let mut v: Vec<(f64, f64)> = gl.iter().map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect();
            v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            rules.insert(n, v);
        }
        Self { rules }
    }

    pub fn get(&self, n: usize) -> &[(f64, f64)] {
        &self.rules[&n.clamp(2, 12)]
    }
}

/// Tensor rule of order `n` over the unit cube of dimension `k`, mapped to the
/// sub-box [a, b].
fn tensor<const NQ: usize, F>(rules: &Rules, n: usize, k: usize, a: &V3, b: &V3, mut f: F) -> [f64; NQ]
where
    F: FnMut(&V3) -> [f64; NQ],
{
    let r = rules.get(n);
    let mut acc = [0.0; NQ];
    let idx_max = r.len().pow(k as u32);
    for idx in 0..idx_max {
        let mut xi = [0.5; 3];
        let mut w = 1.0;
        let mut rem = idx;
        for d in 0..k {
            let (x, wd) = r[rem % r.len()];
            rem /= r.len();
            xi[d] = a[d] + x * (b[d] - a[d]);
            w *= wd * (b[d] - a[d]);
        }
        let v = f(&xi);
        for q in 0..NQ {
            acc[q] += w * v[q];
        }
    }
    acc
}

/// Integrate `f(point, ξ) · dV` over a leaf with a fixed order.
pub fn integrate_leaf<const NQ: usize, F>(leaf: &Leaf, rules: &Rules, n: usize, f: F) -> [f64; NQ]
where
    F: Fn(&LeafPoint, &V3) -> [f64; NQ],
{
    tensor(rules, n, leaf.pdim, &[0.0; 3], &[1.0; 3], |xi| {
        let p = leaf.point(xi);
        let dv = leaf.dv(&p);
        f(&p, xi).map(|v| v * dv)
    })
}

/// Quadrature settings: base order, refined order and subdivision depth.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadSettings {
    pub order: usize,
    pub refined: usize,
    pub rtol: f64,
    /// Absolute tolerance on the multiplicity-weighted leaf value.
    pub atol: f64,
    pub max_depth: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self { order: 6, refined: 8, rtol: 1e-6, atol: 1e-15, max_depth: 3 }
    }
}

/// Adaptive integration: compare `order` with `refined`, bisect every
/// reference axis while the relative discrepancy exceeds `rtol`.
/// Returns the refined value and the accumulated error estimate.
pub fn integrate_leaf_adaptive<const NQ: usize, F>(leaf: &Leaf, rules: &Rules, s: &QuadSettings, f: &F) -> ([f64; NQ], [f64; NQ])
where
    F: Fn(&LeafPoint, &V3) -> [f64; NQ],
{
    fn rec<const NQ: usize, F: Fn(&LeafPoint, &V3) -> [f64; NQ]>(
        leaf: &Leaf,
        rules: &Rules,
        s: &QuadSettings,
        f: &F,
        a: V3,
        b: V3,
        depth: usize,
    ) -> ([f64; NQ], [f64; NQ]) {
        let g = |xi: &V3| {
            let p = leaf.point(xi);
            let dv = leaf.dv(&p);
            f(&p, xi).map(|v| v * dv)
        };
        let lo = tensor(rules, s.order, leaf.pdim, &a, &b, g);
        let hi = tensor(rules, s.refined, leaf.pdim, &a, &b, g);
        let err: [f64; NQ] = std::array::from_fn(|q| (hi[q] - lo[q]).abs());
        let ok = (0..NQ).all(|q| err[q] * leaf.mult <= s.rtol * hi[q].abs() * leaf.mult + s.atol);
        if ok || depth >= s.max_depth {
            return (hi, err);
        }
        let k = leaf.pdim;
        let mut val = [0.0; NQ];
        let mut e = [0.0; NQ];
        for c in 0..(1usize << k) {
            let mut ca = a;
            let mut cb = b;
            for d in 0..k {
                let mid = 0.5 * (a[d] + b[d]);
                if c >> d & 1 == 1 {
                    ca[d] = mid;
                } else {
                    cb[d] = mid;
                }
            }
            let (v, ee) = rec(leaf, rules, s, f, ca, cb, depth + 1);
            for q in 0..NQ {
                val[q] += v[q];
                e[q] += ee[q];
            }
        }
        (val, e)
    }
    rec(leaf, rules, s, f, [0.0; 3], [1.0; 3], 0)
}

/// Integrate `f(point) · dA` over an interface with the refined order.
pub fn integrate_interface<const NQ: usize, F>(iface: &Interface, rules: &Rules, n: usize, f: F) -> [f64; NQ]
where
    F: Fn(&IfacePoint) -> [f64; NQ],
{
    if iface.pdim == 0 {
        let p = (iface.eval)(&[0.0; 3]);
        return f(&p).map(|v| v * p.da);
    }
    tensor(rules, n, iface.pdim, &[0.0; 3], &[1.0; 3], |s| {
        let p = (iface.eval)(s);
        f(&p).map(|v| v * p.da)
    })
}

/// Pairwise summation for reproducible reductions.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n if n <= 8 => v.iter().sum(),
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}
