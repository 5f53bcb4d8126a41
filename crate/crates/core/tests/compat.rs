use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use staircase::compat::{classify, factorize, staircase_identity, sym_outer, CompatKind};

/// Cyclic Jacobi eigenvalues, independent of nalgebra's solver.
fn jacobi_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[(i, j)].powi(2)).sum();
        if off < 1e-30 * m.norm_squared().max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let mut r = DMatrix::<f64>::identity(n, n);
                r[(p, p)] = c;
                r[(q, q)] = c;
                r[(p, q)] = s;
                r[(q, p)] = -s;
                m = r.transpose() * &m * &r;
            }
        }
    }
    let mut e: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    e.sort_by(|a, b| a.partial_cmp(b).unwrap());
    e
}

/// Trichotomy from eigenvalues: one nonzero → degenerate, two of opposite sign → non-degenerate.
fn oracle_kind(eig: &[f64]) -> CompatKind {
    let scale = eig.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let nz: Vec<f64> = eig.iter().copied().filter(|x| x.abs() > 1e-8 * scale).collect();
    match nz.as_slice() {
        [_] => CompatKind::Degenerate,
        [a, b] if a * b < 0.0 => CompatKind::NonDegenerate,
        _ => CompatKind::Incompatible,
    }
}

fn random_orthogonal(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
    g.qr().q()
}

fn random_sym(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
    (&g + g.transpose()) * 0.5
}

/// A pair whose difference has a prescribed eigenvalue pattern.
fn random_pair(rng: &mut ChaCha8Rng, d: usize, case: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut lam = vec![0.0; d];
    let mag = |rng: &mut ChaCha8Rng| rng.gen_range(0.2..2.0);
    match case {
        0 => lam[0] = if rng.gen_bool(0.5) { mag(rng) } else { -mag(rng) },
        1 => {
            lam[0] = mag(rng);
            lam[1] = -mag(rng);
        }
        2 => {
            let s = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            lam[0] = s * mag(rng);
            lam[1] = s * mag(rng);
        }
        _ => {
            for l in lam.iter_mut() {
                *l = if rng.gen_bool(0.5) { mag(rng) } else { -mag(rng) };
            }
        }
    }
    let q = random_orthogonal(rng, d);
    let diff = &q * DMatrix::from_diagonal(&DVector::from_vec(lam)) * q.transpose();
    let b = random_sym(rng, d);
    (&b + diff, b)
}

#[test]
fn classification_agrees_with_eigenvalue_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut counts = [0usize; 3];
    for k in 0..10_000 {
        let d = 2 + k % 4;
        let (a, b) = random_pair(&mut rng, d, (k / 4) % 4);
        let diff = &a - &b;
        let expect = oracle_kind(&jacobi_eigenvalues(&diff));
        let got = classify(&a, &b).unwrap();
        assert_eq!(got.kind, expect, "case {k}, d = {d}");
        counts[got.kind as usize] += 1;
        match got.factors {
            Some((fa, fb)) => {
                let r = sym_outer(&fa, &fb);
                assert!((&r - &diff).norm() <= 1e-10 * diff.norm(), "case {k}: reconstruction {}", (&r - &diff).norm());
            }
            None => assert!(factorize(&a, &b).is_err()),
        }
        if d == 2 {
            // Symmetrized rank-one compatible in 2D iff det(A − B) ≤ 0.
            let det = diff.determinant();
            let tol = 1e-10 * diff.norm_squared();
            let by_det = if det.abs() <= tol {
                CompatKind::Degenerate
            } else if det < 0.0 {
                CompatKind::NonDegenerate
            } else {
                CompatKind::Incompatible
            };
            assert_eq!(got.kind, by_det, "case {k}: det {det}");
        }
    }
    assert!(counts.iter().all(|&c| c > 1000), "{counts:?}");
}

#[test]
fn identical_and_mismatched_inputs() {
    let a = DMatrix::<f64>::identity(3, 3);
    assert!(classify(&a, &a).is_err());
    assert!(classify(&a, &DMatrix::identity(2, 2)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    // sym(a⊗b) is always compatible, degenerate exactly when a ∥ b.
    #[test]
    fn sym_outer_is_compatible(a in proptest::collection::vec(-1.0f64..1.0, 4), b in proptest::collection::vec(-1.0f64..1.0, 4), base in proptest::collection::vec(-1.0f64..1.0, 16)) {
        let (a, b) = (DVector::from_vec(a), DVector::from_vec(b));
        let cross = (a.norm_squared() * b.norm_squared() - a.dot(&b).powi(2)).max(0.0).sqrt();
        prop_assume!(a.norm() > 0.1 && b.norm() > 0.1 && cross > 1e-3);
        let m = DMatrix::from_vec(4, 4, base);
        let bm = (&m + m.transpose()) * 0.5;
        let c = classify(&(&bm + sym_outer(&a, &b)), &bm).unwrap();
        prop_assert_eq!(c.kind, CompatKind::NonDegenerate);
        let c = classify(&(&bm + sym_outer(&a, &(&a * 0.7))), &bm).unwrap();
        prop_assert_eq!(c.kind, CompatKind::Degenerate);
    }

    // Compatibility depends only on A − B and is symmetric in the pair.
    #[test]
    fn classification_is_shift_and_swap_invariant(seed in any::<u64>(), d in 2usize..6, case in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = random_pair(&mut rng, d, case);
        let shift = random_sym(&mut rng, d);
        let k0 = classify(&a, &b).unwrap().kind;
        prop_assert_eq!(classify(&(&a + &shift), &(&b + &shift)).unwrap().kind, k0);
        prop_assert_eq!(classify(&b, &a).unwrap().kind, k0);
    }

    #[test]
    fn staircase_identity_holds(s in -2.0f64..2.0, sign in prop_oneof![Just(1.0), Just(-1.0)], n in proptest::collection::vec(-1.0f64..1.0, 3), nu in proptest::collection::vec(-1.0f64..1.0, 3)) {
        let (lhs, rhs) = staircase_identity(&DVector::from_vec(n), &DVector::from_vec(nu), s, sign);
        prop_assert!((&lhs - &rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }
}
