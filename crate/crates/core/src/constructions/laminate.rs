//! Periodic first-order laminate between J_{i−1} and A_i on the unit torus.

use super::ConstructionError;
use crate::field::{diag3, matvec, Domain, Embedding, Field, IfacePoint, Interface, Jet, Leaf, LeafPoint, Tag, M3, V3, ZERO3};
use crate::scalar::Scalar;
use crate::wells::WellFamily;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Amplitude and normal of the laminate, with M_i = sym(a⊗b).
fn directions(d: usize, k: usize, degenerate: bool) -> (V3, V3) {
    let mut a = [0.0; 3];
    let mut b = [0.0; 3];
    a[k] = 1.0;
    b[k] = 1.0;
    if !degenerate {
        a[k + 1] = 1.0;
        b[k + 1] = -1.0;
    }
    debug_assert!(k < d);
    (a, b)
}

/// Sawtooth with slope 1−λ on [0, λ/N) and −λ on [λ/N, 1/N), period 1/N.
fn sawtooth(s: f64, lambda: f64, n: f64) -> (f64, f64) {
    let frac = (s * n).rem_euclid(1.0) / n;
    let cut = lambda / n;
    if frac < cut {
        ((1.0 - lambda) * frac, 1.0 - lambda)
    } else {
        ((1.0 - lambda) * cut - lambda * (frac - cut), -lambda)
    }
}

pub fn simple_laminate<S: Scalar>(w: &WellFamily<S>, level: usize, lambda: f64, n: u64) -> Result<Field, ConstructionError> {
    let d = w.d;
    if d > 3 {
        return Err(ConstructionError::Domain(format!("laminate fields need d ≤ 3, family has d = {d}")));
    }
    if level == 0 || level > w.m() {
        return Err(ConstructionError::Domain(format!("level {level} outside 1..={}", w.m())));
    }
    if !(lambda > 0.0 && lambda < 1.0) || n == 0 {
        return Err(ConstructionError::Domain("need λ ∈ (0,1) and N ≥ 1".into()));
    }
    let degenerate = w.signature.at(level) == 1;
    let k = w.l[level - 1] - 1;
    let (a, b) = directions(d, k, degenerate);
    let base = diag3(&w.midpoint_f64(level - 1));
    let inc = diag3(&w.increment_f64(level));
    // The factors must reproduce M_i; anything else is an internal inconsistency.
    for i in 0..3 {
        for j in 0..3 {
            let s = 0.5 * (a[i] * b[j] + a[j] * b[i]);
            assert!((s - inc[i][j]).abs() < 1e-15, "laminate factors do not match M_{level}");
        }
    }
    let mut mean = ZERO3;
    for i in 0..3 {
        for j in 0..3 {
            mean[i][j] = base[i][j] + lambda * inc[i][j];
        }
    }
    let nf = n as f64;
    let grad = move |slope: f64| -> M3 {
        let mut g = mean;
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] += slope * a[i] * b[j];
            }
        }
        g
    };
    let jet = move |x: &V3| -> Jet {
        let s: f64 = (0..3).map(|i| b[i] * x[i]).sum();
        let (h, dh) = sawtooth(s, lambda, nf);
        let mx = matvec(&mean, x);
        Jet { u: [0, 1, 2].map(|i| mx[i] + a[i] * h), g: grad(dh) }
    };

    // Unimodular stripe coordinates y ↦ x = P y with y_k = b·x.
    let mut p = ZERO3;
    for i in 0..d {
        p[i][i] = 1.0;
    }
    if !degenerate {
        p[k][k + 1] = 1.0;
    }
    let to_x = move |y: &V3| matvec(&p, y);

    let mut leaves = Vec::new();
    for (s0, width) in [(0.0, lambda / nf), (lambda / nf, (1.0 - lambda) / nf)] {
        let eval = Arc::new(move |xi: &V3| {
            let mut y = *xi;
            y[k] = s0 + xi[k] * width;
            let x = to_x(&y);
            let mut jac = p;
            for row in jac.iter_mut() {
                row[k] *= width;
            }
            for (i, row) in jac.iter_mut().enumerate().skip(d) {
                row[i] = 0.0;
            }
            LeafPoint { x, jac, weight: 1.0, jet: jet(&x) }
        });
        leaves.push(Leaf::new(d, nf, Tag::Bulk, true, Embedding::Full, eval));
    }

    // Interface measure: (d−1)-volume spanned by the columns of P other than k.
    let cols: Vec<V3> = (0..d).filter(|&c| c != k).map(|c| [0, 1, 2].map(|r| p[r][c])).collect();
    let da = match cols.len() {
        1 => cols[0].iter().map(|v| v * v).sum::<f64>().sqrt(),
        _ => {
            let (u, v) = (cols[0], cols[1]);
            let c = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
            c.iter().map(|x| x * x).sum::<f64>().sqrt()
        }
    };
    let mut interfaces = Vec::new();
    for (s0, minus, plus) in [(0.0, -lambda, 1.0 - lambda), (lambda / nf, 1.0 - lambda, -lambda)] {
        let others: Vec<usize> = (0..d).filter(|&c| c != k).collect();
        let eval = Arc::new(move |sp: &V3| {
            let mut y = [0.0; 3];
            y[k] = s0;
            for (q, &c) in others.iter().enumerate() {
                y[c] = sp[q];
            }
            let x = to_x(&y);
            let u = jet(&x).u;
            IfacePoint { x, da, minus: Jet { u, g: grad(minus) }, plus: Jet { u, g: grad(plus) } }
        });
        interfaces.push(Interface { pdim: d - 1, mult: nf, eval });
    }

    let mut params = BTreeMap::new();
    params.insert("level".into(), level as f64);
    params.insert("lambda".into(), lambda);
    params.insert("N".into(), nf);
    let mut hi = [0.0; 3];
    hi[..d].fill(1.0);
    Ok(Field {
        name: "simple-laminate".into(),
        dim: d,
        domain: Domain::Box { lo: [0.0; 3], hi, dim: d },
        datum: (mean, [0.0; 3]),
        periodic: true,
        leaves,
        interfaces,
        global: Arc::new(jet),
        params,
        wells: w.wells_f64().iter().map(|v| diag3(v)).collect(),
    })
}
