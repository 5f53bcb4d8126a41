use nalgebra::DMatrix;
use num_rational::Rational64 as Q;
use proptest::prelude::*;
use staircase::compat::{classify, diag, hull_segments, CompatKind};
use staircase::wells::{all_signatures, build_wells, index_sets, poly_relations, validate_signature, LaminationSignature, WellFamily};

fn exact(f: &[u8]) -> WellFamily<Q> {
    build_wells(&LaminationSignature::new(f).unwrap()).unwrap()
}

fn qv(v: &[(i64, i64)]) -> Vec<Q> {
    v.iter().map(|&(n, d)| Q::new(n, d)).collect()
}

fn families() -> impl Iterator<Item = LaminationSignature> {
    (1..=6).flat_map(all_signatures)
}

#[test]
fn signature_counts_follow_fibonacci() {
    let c: Vec<usize> = (1..=10).map(|m| all_signatures(m).len()).collect();
    assert_eq!((c[0], c[1], c[2]), (2, 3, 5));
    assert!(c.windows(3).all(|w| w[2] == w[0] + w[1]));
    // Brute force over all {1,2}^m maps agrees with the generator.
    for m in 1..=10 {
        let brute = (0..1u32 << m)
            .filter(|mask| {
                let f: Vec<u8> = (0..m).map(|b| 1 + (mask >> b & 1) as u8).collect();
                validate_signature(m, &f).unwrap()
            })
            .count();
        assert_eq!(brute, c[m - 1]);
    }
    assert!(validate_signature(2, &[1]).is_err());
    assert!(validate_signature(1, &[3]).is_err());
}

#[test]
fn named_families() {
    let w = exact(&[1, 2]);
    assert_eq!(w.wells[1], qv(&[(1, 1), (0, 1), (0, 1)]));
    assert_eq!(w.wells[2], qv(&[(1, 2), (1, 1), (-1, 1)]));
    let w = exact(&[2, 1]);
    assert_eq!(w.wells[1], qv(&[(1, 1), (-1, 1), (0, 1)]));
    assert_eq!(w.wells[2], qv(&[(1, 2), (-1, 2), (1, 1)]));
    let w = exact(&[1, 2, 1]);
    assert_eq!(w.d, 4);
    assert_eq!(w.wells[3], qv(&[(1, 2), (1, 2), (-1, 2), (1, 1)]));

    let s = index_sets(&exact(&[2, 1]));
    assert_eq!((s.s1, s.s2, s.l, s.k), (vec![3], vec![1], vec![1, 3], vec![0, 0, 1]));
    let s = index_sets(&exact(&[2, 2]));
    assert!(s.s1.is_empty());
    assert_eq!(s.s2, vec![1, 3]);
}

#[test]
fn structural_invariants_hold_exactly() {
    for sig in families() {
        let w = exact(&sig.f);
        let m = sig.m;
        let km = w.k[m];
        assert_eq!(w.d, if m == 1 { 2 } else { 2 * (m - km) + km }, "{sig:?}");
        assert!(w.wells[0].iter().all(|x| *x == Q::from(0)));
        for i in 1..=m {
            let diff: Vec<Q> = w.wells[i].iter().zip(&w.midpoints[i - 1]).map(|(a, j)| a - j).collect();
            assert_eq!(diff, w.increments[i - 1]);
            let half_sum: Vec<Q> = (0..w.d).map(|c| (0..i).map(|k| w.increments[k][c]).sum::<Q>() / 2).collect();
            assert_eq!(half_sum, w.midpoints[i]);
            assert_eq!(w.k[i] - w.k[i - 1], usize::from(sig.at(i) == 1));
            assert_eq!(w.l[i - 1], 1 + sig.f[..i - 1].iter().map(|&v| v as usize).sum::<usize>());
            let mi = w.increment_f64(i);
            assert!(w.spaces[i - 1].contains(&mi, 1e-14));
            if sig.at(i) == 2 {
                let mt: Vec<f64> = w.mirrored[i - 1].iter().map(|x| *x.numer() as f64 / *x.denom() as f64).collect();
                assert!(w.spaces[i - 1].contains(&mt, 1e-14));
            }
        }
        for x in &w.midpoints[m] {
            assert!(*x == Q::new(1, 2) || *x == Q::new(-1, 2) || *x == Q::from(0), "{sig:?} J_m entry {x}");
        }
        if m >= 2 {
            let mut cover: Vec<usize> = w.s1.iter().chain(&w.s2).copied().chain(w.s2.iter().map(|j| j + 1)).collect();
            cover.sort_unstable();
            assert_eq!(cover, (1..=w.d).collect::<Vec<_>>(), "{sig:?}");
        }
    }
}

#[test]
fn compatibility_pattern() {
    for sig in families() {
        let w: WellFamily<f64> = build_wells(&sig).unwrap();
        let mats = w.well_matrices();
        for a in 0..mats.len() {
            for b in a + 1..mats.len() {
                let kind = classify(&mats[a], &mats[b]).unwrap().kind;
                let expect = (a, b) == (0, 1);
                assert_eq!(kind != CompatKind::Incompatible, expect, "{sig:?} A_{a} vs A_{b}: {kind:?}");
            }
        }
        for i in 1..=sig.m {
            let j: DMatrix<f64> = diag(&w.midpoint_f64(i - 1));
            let kind = classify(&mats[i], &j).unwrap().kind;
            let expect = if sig.at(i) == 1 { CompatKind::Degenerate } else { CompatKind::NonDegenerate };
            assert_eq!(kind, expect, "{sig:?} A_{i} vs J_{}", i - 1);
        }
    }
}

#[test]
fn hull_segment_patterns() {
    for sig in families() {
        let w: WellFamily<f64> = build_wells(&sig).unwrap();
        for seg in hull_segments(&w) {
            let nz: Vec<f64> = seg.direction.iter().copied().filter(|x| *x != 0.0).collect();
            match sig.at(seg.order) {
                1 => assert_eq!(nz, vec![1.0]),
                _ => assert_eq!(nz, vec![1.0, -1.0]),
            }
            assert_eq!(seg.point(1.0), w.wells_f64()[seg.order]);
        }
    }
}

#[test]
fn polynomial_relations_on_every_well() {
    for sig in families().filter(|s| s.m >= 2) {
        let w: WellFamily<f64> = build_wells(&sig).unwrap();
        for i in 2..=sig.m {
            let rel = poly_relations(&w, i, &vec![0.0; w.d]).unwrap();
            assert!(rel.max_residual(&w) <= 1e-12, "{sig:?} level {i}: {}", rel.max_residual(&w));
        }
        assert!(poly_relations(&w, 1, &vec![0.0; w.d]).is_err());
    }
}

#[test]
fn json_fields() {
    let w: WellFamily<f64> = build_wells(&LaminationSignature::new(&[1, 2]).unwrap()).unwrap();
    let j = w.to_json();
    assert_eq!(j["d"], 3);
    assert_eq!(j["wells"][2], serde_json::json!([0.5, 1.0, -1.0]));
    assert_eq!(j["S1"], serde_json::json!([1]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // The relations are stated for χ̃ = χ − F, so they must hold for any datum.
    #[test]
    fn relations_hold_under_any_datum(idx in 0usize..20, seed in proptest::collection::vec(-2.0f64..2.0, 6)) {
        let sigs: Vec<_> = families().filter(|s| s.m >= 2).collect();
        let sig = &sigs[idx % sigs.len()];
        let w: WellFamily<f64> = build_wells(sig).unwrap();
        let f = &seed[..w.d.min(6)];
        prop_assume!(f.len() == w.d);
        for i in 2..=sig.m {
            let rel = poly_relations(&w, i, f).unwrap();
            // Relations written in χ̃ = χ − F with shifted Q̃, g̃ still vanish on the wells.
            for a in w.wells_f64() {
                let (r1, r2) = rel.residuals(&a, &w.l);
                prop_assert!(r1.abs() <= 1e-11 && r2.abs() <= 1e-11, "{:?} level {} residuals {} {}", sig, i, r1, r2);
            }
        }
    }

    #[test]
    fn exact_and_float_families_agree(idx in 0usize..40) {
        let sigs: Vec<_> = families().collect();
        let sig = &sigs[idx % sigs.len()];
        let e: WellFamily<Q> = build_wells(sig).unwrap();
        let f: WellFamily<f64> = build_wells(sig).unwrap();
        prop_assert_eq!(e.wells_f64(), f.wells_f64());
        prop_assert_eq!(index_sets(&e), index_sets(&f));
    }
}
