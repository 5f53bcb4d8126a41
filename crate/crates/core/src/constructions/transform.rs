//! Linear change of frame û(y) = S u(Sᵀy).

use super::ConstructionError;
use crate::field::{det_k, frame_jet, inv_k, matmul, matvec, sub, transpose, Domain, Field, IfacePoint, Interface, Leaf, M3, V3};
use std::sync::Arc;

fn norm(v: &V3) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Normal of an interface from the rank-one gradient jump; `None` without a jump.
fn jump_normal(j: &M3) -> Option<V3> {
    let row = j.iter().max_by(|a, b| norm(a).partial_cmp(&norm(b)).unwrap())?;
    let n = norm(row);
    (n > 1e-14).then(|| row.map(|x| x / n))
}

pub fn coordinate_transform(field: &Field, s: M3) -> Result<Field, ConstructionError> {
    let det = det_k(&s, 3);
    let scale = s.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
    if det.abs() <= 1e-12 * scale.powi(3) {
        return Err(ConstructionError::Domain("transform matrix is singular".into()));
    }
    let st = transpose(&s);
    let sit = transpose(&inv_k(&s, 3));

    let leaves = field
        .leaves
        .iter()
        .map(|l| {
            let frame = match &l.frame {
                None => s,
                Some(inner) => matmul(&s, inner),
            };
            Leaf { frame: Some(frame), ..l.clone() }
        })
        .collect();

    let interfaces = field
        .interfaces
        .iter()
        .map(|i| {
            let inner = Arc::clone(&i.eval);
            Interface {
                pdim: i.pdim,
                mult: i.mult,
                eval: Arc::new(move |sp: &V3| {
                    let p = inner(sp);
                    // Area of the image surface: |det S|⁻¹·|S n|·dA.
                    let da = match jump_normal(&sub(&p.plus.g, &p.minus.g)) {
                        Some(n) => p.da * norm(&matvec(&s, &n)) / det.abs(),
                        None => p.da,
                    };
                    IfacePoint { x: matvec(&sit, &p.x), da, minus: frame_jet(&s, &p.minus), plus: frame_jet(&s, &p.plus) }
                }),
            }
        })
        .collect();

    let g = Arc::clone(&field.global);
    let global = Arc::new(move |y: &V3| frame_jet(&s, &g(&matvec(&st, y))));
    let (f, b) = field.datum;
    let mut params = field.params.clone();
    params.insert("transform_det".into(), det);
    Ok(Field {
        name: format!("{}+transform", field.name),
        dim: field.dim,
        domain: Domain::Image { inner: Box::new(field.domain.clone()), s: sit },
        datum: (matmul(&matmul(&s, &f), &st), matvec(&s, &b)),
        periodic: field.periodic,
        leaves,
        interfaces,
        global,
        params,
        wells: field.wells.iter().map(|w| matmul(&matmul(&s, w), &st)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{Branch2D, BranchMode, BranchPlan2D};
    use crate::energy::{total_energy, SurfaceMode};
    use crate::field::diag3;
    use crate::quad::QuadSettings;

    #[test]
    fn identity_and_rotation() {
        let plan = BranchPlan2D::new(1.0, 1.0, 8, None, BranchMode::OneDirection, 2.0).unwrap();
        let f = Branch2D::new(plan).into_field();
        let s = QuadSettings::default();
        let b0 = total_energy(&f, &f.wells, 2.0, 1e-3, SurfaceMode::HessianTv, &s);
        let id = coordinate_transform(&f, diag3(&[1.0, 1.0, 1.0])).unwrap();
        let b1 = total_energy(&id, &id.wells, 2.0, 1e-3, SurfaceMode::HessianTv, &s);
        assert!((b0.total - b1.total).abs() <= 1e-12 * b0.total);
        let (c, sn) = (0.6f64, 0.8f64);
        let rot = [[c, -sn, 0.0], [sn, c, 0.0], [0.0, 0.0, 1.0]];
        let r = coordinate_transform(&f, rot).unwrap();
        let b2 = total_energy(&r, &r.wells, 2.0, 1e-3, SurfaceMode::HessianTv, &s);
        assert!((b0.elastic() - b2.elastic()).abs() <= 1e-8 * b0.elastic());
        assert!((b0.surface_jump - b2.surface_jump).abs() <= 1e-8 * b0.surface_jump);
        assert!((b0.surface_interior - b2.surface_interior).abs() <= 1e-6 * b0.surface_interior);
        assert!(r.trace_error(400) < 1e-12);
        assert!(coordinate_transform(&f, diag3(&[1.0, 0.0, 1.0])).is_err());
    }
}
