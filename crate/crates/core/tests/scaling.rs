use num_traits::One;
use proptest::prelude::*;
use staircase::energy::SurfaceMode;
use staircase::quad::QuadSettings;
use staircase::scaling::{
    brute_force_exponent_check, exponent_table, heuristic_optimize, heuristic_optimize_ordered, log_grid, ordering_equivalence,
    predicted_exponent, rat_to_f64, robust_fit, scan, Boundary, Constructor, ExponentQuery, LevelOrder, ParamRule, Rat,
};
use staircase::wells::{all_signatures, LaminationSignature};

fn ps() -> [Rat; 4] {
    [Rat::from_integer(1), Rat::new(3, 2), Rat::from_integer(2), Rat::from_integer(3)]
}

fn queries(max_m: usize, ps: &[Rat]) -> Vec<ExponentQuery> {
    let mut out = Vec::new();
    for m in 1..=max_m {
        for sig in all_signatures(m) {
            for ell in 1..=m {
                for &p in ps {
                    for bc in [Boundary::Dirichlet, Boundary::Periodic] {
                        out.push(ExponentQuery::new(sig.clone(), ell, p, bc));
                    }
                }
            }
        }
    }
    out
}

fn q(f: &[u8], ell: usize, p: Rat, bc: Boundary) -> ExponentQuery {
    ExponentQuery::new(LaminationSignature::new(f).unwrap(), ell, p, bc)
}

#[test]
fn optimizer_total_equals_prediction_exactly() {
    let all = queries(6, &ps());
    assert!(all.len() > 1000);
    for qr in &all {
        let s = heuristic_optimize(qr);
        assert_eq!(s.total, predicted_exponent(qr), "{qr:?}");
        assert_eq!(s.exponents.len(), qr.scale_count());
        // Scale separation 0 < e_1 < … < e_n.
        let mut prev = Rat::from_integer(0);
        for e in &s.exponents {
            assert!(*e > prev, "{qr:?}: {:?}", s.exponents);
            prev = *e;
        }
    }
}

#[test]
fn predicted_spot_values() {
    let two = Rat::from_integer(2);
    let d = Boundary::Dirichlet;
    assert_eq!(predicted_exponent(&q(&[1, 2], 2, two, d)), Rat::new(4, 7));
    assert_eq!(predicted_exponent(&q(&[1], 1, two, d)), Rat::new(4, 5));
    assert_eq!(predicted_exponent(&q(&[2], 1, two, d)), Rat::new(2, 3));
    assert_eq!(predicted_exponent(&q(&[1, 2, 1], 3, two, d)), Rat::new(1, 2));
    for m in 1..=6 {
        for sig in all_signatures(m) {
            assert_eq!(predicted_exponent(&ExponentQuery::new(sig, 1, two, Boundary::Periodic)), Rat::one());
        }
    }
    // ℓ = 1 for any p: 2p/(2p+1) degenerate, p/(p+1) otherwise.
    for p in ps() {
        assert_eq!(predicted_exponent(&q(&[1], 1, p, d)), p * 2 / (p * 2 + 1));
        assert_eq!(predicted_exponent(&q(&[2], 1, p, d)), p / (p + 1));
    }
}

#[test]
fn numeric_minimization_oracle() {
    let grid = log_grid(1e-10, 1e-2, 9);
    for qr in queries(3, &[Rat::from_integer(2), Rat::new(3, 2)]) {
        let rep = brute_force_exponent_check(&qr, &grid);
        assert!(rep.agrees(1e-3), "{qr:?}: slope {} vs {}", rep.fit.slope, rep.predicted);
    }
    let rep = brute_force_exponent_check(&q(&[2, 2], 2, Rat::from_integer(2), Boundary::Dirichlet), &grid);
    assert!((rep.fit.slope - 0.5).abs() < 1e-3);
}

#[test]
fn periodic_is_shifted_dirichlet() {
    for qr in queries(6, &ps()).into_iter().filter(|x| x.bc == Boundary::Periodic && x.ell >= 2) {
        let f = &qr.signature.f[..qr.ell - 1];
        let shifted = q(f, qr.ell - 1, qr.p, Boundary::Dirichlet);
        assert_eq!(predicted_exponent(&qr), predicted_exponent(&shifted), "{qr:?}");
    }
}

#[test]
fn monotone_in_order_and_power() {
    for m in 1..=6 {
        for sig in all_signatures(m) {
            for p in ps() {
                let e: Vec<Rat> =
                    (1..=m).map(|ell| predicted_exponent(&ExponentQuery::new(sig.clone(), ell, p, Boundary::Dirichlet))).collect();
                assert!(e.windows(2).all(|w| w[1] <= w[0]), "{sig:?}");
            }
            for ell in 1..=m {
                let e: Vec<Rat> = ps().iter().map(|&p| predicted_exponent(&ExponentQuery::new(sig.clone(), ell, p, Boundary::Dirichlet))).collect();
                assert!(e.windows(2).all(|w| w[1] > w[0]), "{sig:?} ℓ={ell}");
            }
        }
    }
}

#[test]
fn orderings_agree() {
    for qr in queries(5, &[Rat::from_integer(2), Rat::from_integer(3)]) {
        assert!(ordering_equivalence(&qr), "{qr:?}");
    }
    let qr = q(&[1, 2], 2, Rat::from_integer(2), Boundary::Dirichlet);
    let rev = heuristic_optimize_ordered(&qr, LevelOrder::Reversed);
    assert_eq!(rev.exponents, vec![Rat::new(2, 7), Rat::new(3, 7)]);
    assert_eq!(heuristic_optimize(&qr).exponents, vec![Rat::new(1, 7), Rat::new(3, 7)]);
    // r₁ ∼ r₂^{2/3}.
    assert_eq!(rev.exponents[0], rev.exponents[1] * Rat::new(2, 3));
}

#[test]
fn exponent_table_shape() {
    let rows = exponent_table(3, &[Rat::from_integer(2)]);
    assert_eq!(rows.len(), 5 * 3 * 2);
    let r = rows.iter().find(|r| r.f == "121" && r.ell == 3 && r.bc == Boundary::Dirichlet).unwrap();
    assert_eq!((r.numerator, r.denominator, r.k_ell), (1, 2, 2));
}

#[test]
fn robust_fit_drops_contaminated_ends() {
    let mut pts: Vec<(f64, f64)> = log_grid(1e-6, 1e-2, 9).into_iter().map(|e| (e, e.powf(0.8))).collect();
    pts[0].1 *= 40.0;
    pts[8].1 /= 40.0;
    let f = robust_fit(&pts);
    assert_eq!(f.used, (1..8).collect::<Vec<_>>());
    assert!((f.slope - 0.8).abs() < 1e-12);
}

#[test]
fn scan_is_deterministic_and_reports_fit() {
    let grid = log_grid(1e-5, 1e-2, 5);
    let s = QuadSettings::default();
    let rule = ParamRule::default_for(Constructor::Branch2dOneDir, 2.0);
    let a = scan(Constructor::Branch2dOneDir, &grid, 2.0, &rule, SurfaceMode::HessianTv, &s).unwrap();
    let b = scan(Constructor::Branch2dOneDir, &grid, 2.0, &rule, SurfaceMode::HessianTv, &s).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.points.len(), 5);
    assert!(a.to_csv().starts_with("# constructor=branch2dOneDir"));
    assert!(a.fit.r2 > 0.99 && (a.fit.slope - 0.8).abs() < 0.1, "{:?}", a.fit);
    // Hypothesis violations propagate.
    let bad = ParamRule::Fixed { n: 3 };
    assert!(scan(Constructor::Branch2dOneDir, &grid, 2.0, &bad, SurfaceMode::HessianTv, &s).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Rational optimum balances every term: ε r_n⁻¹ and each (r_i/r_{i−1})^{a_i} scale as ε^β.
    #[test]
    fn optimum_balances_terms(m in 1usize..=6, idx in 0usize..64, ell_seed in 0usize..6, pn in 2i64..8, pd in 1i64..3) {
        let sigs = all_signatures(m);
        let sig = sigs[idx % sigs.len()].clone();
        let ell = 1 + ell_seed % m;
        let p = Rat::new(pn, pd).max(Rat::one());
        let qr = ExponentQuery::new(sig.clone(), ell, p, Boundary::Dirichlet);
        let s = heuristic_optimize(&qr);
        prop_assert_eq!(Rat::one() - s.exponents[ell - 1], s.total);
        let mut prev = Rat::from_integer(0);
        for (i, e) in s.exponents.iter().enumerate() {
            let a = if sig.f[i] == 1 { p * 2 } else { p };
            prop_assert_eq!((*e - prev) * a, s.total);
            prev = *e;
        }
        prop_assert!(rat_to_f64(s.total) > 0.0 && s.total < Rat::one());
    }
}
