//! Rotation of the planar one-direction branching about the x₁ axis.
//!
//! With r = |(x₂, x₃)| the field is u = ũ₁(x₁, r) e₁ + ũ₂(x₁, r)(0, cos φ, sin φ).
//! Leaves are meridian sections at φ = 0 weighted by 2πr; the azimuthal
//! derivative is supplied by [`Embedding::Revolved`].

use super::branch2d::{jac2, Branch2D, BranchMode, BranchPlan2D, Jet2};
use super::ConstructionError;
use crate::field::{diag3, Domain, Embedding, Field, IfacePoint, Interface, Jet, Leaf, LeafPoint, V3, ZERO3};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

/// 3D jet at φ = 0 from the meridian jet and the radius.
fn meridian_jet(j: &Jet2, r: f64) -> Jet {
    let mut g = ZERO3;
    g[0][0] = j.g[0][0];
    g[0][1] = j.g[0][1];
    g[1][0] = j.g[1][0];
    g[1][1] = j.g[1][1];
    g[2][2] = if r > 0.0 { j.u[1] / r } else { j.g[1][1] };
    Jet { u: [j.u[0], j.u[1], 0.0], g }
}

/// Rotate a φ = 0 jet to angle φ.
fn rotate(j: &Jet, c: f64, s: f64) -> Jet {
    let q = [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]];
    let qt = crate::field::transpose(&q);
    Jet { u: crate::field::matvec(&q, &j.u), g: crate::field::matmul(&crate::field::matmul(&q, &j.g), &qt) }
}

pub fn cylinder3d(n: u64, p: f64, theta: Option<f64>) -> Result<Field, ConstructionError> {
    if n <= 4 {
        return Err(ConstructionError::Hypothesis(format!("N > 4 required (N = {n})")));
    }
    let plan = BranchPlan2D::new(1.0, 1.0, n, theta, BranchMode::OneDirection, p)?;
    let b = Arc::new(Branch2D::new(plan.clone()));

    // The radius is the edge distance in the lower half, which keeps small r exact.
    let radius = |y: f64, eta: f64| if y < 0.5 { eta } else { y };

    let leaves = b
        .leaf_specs()
        .into_iter()
        .map(|ls| {
            let m = Arc::clone(&b);
            Leaf::new(
                2,
                ls.mult,
                ls.tag,
                false,
                Embedding::Revolved,
                Arc::new(move |xi: &V3| {
                    let q = m.eval_spec(&ls.spec, xi);
                    let r = radius(q.y, q.eta);
                    LeafPoint { x: [q.x, r, 0.0], jac: jac2(&q.jac), weight: 2.0 * PI * r, jet: meridian_jet(&q.jet, r) }
                }),
            )
        })
        .collect();

    let interfaces = b
        .iface_specs()
        .into_iter()
        .filter(|s| s.mult > 0.0)
        .map(|is| {
            let m = Arc::clone(&b);
            Interface {
                pdim: 1,
                mult: is.mult,
                eval: Arc::new(move |s: &V3| {
                    let q = m.eval_iface(&is.spec, s[0]);
                    let r = radius(q.y, q.eta);
                    IfacePoint {
                        x: [q.x, r, 0.0],
                        da: 2.0 * PI * r * q.tangent[0].hypot(q.tangent[1]),
                        minus: meridian_jet(&q.minus, r),
                        plus: meridian_jet(&q.plus, r),
                    }
                }),
            }
        })
        .collect();

    let g = Arc::clone(&b);
    let global = Arc::new(move |x: &V3| {
        let r = x[1].hypot(x[2]);
        let (c, s) = if r > 0.0 { (x[1] / r, x[2] / r) } else { (1.0, 0.0) };
        let j = g.jet_at(x[0], r.min(1.0));
        rotate(&meridian_jet(&j, r), c, s)
    });

    let mut params = BTreeMap::new();
    params.insert("N".into(), n as f64);
    params.insert("theta".into(), plan.theta);
    params.insert("j0".into(), plan.j0 as f64);
    Ok(Field {
        name: "cylinder3d".into(),
        dim: 3,
        domain: Domain::Cylinder { length: 1.0, radius: 1.0 },
        datum: (ZERO3, [0.0; 3]),
        periodic: false,
        leaves,
        interfaces,
        global,
        params,
        wells: vec![diag3(&[1.0, 0.0, 0.0]), diag3(&[-1.0, 0.0, 0.0])],
    })
}
