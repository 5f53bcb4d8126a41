use proptest::prelude::*;
use staircase::constructions::{
    branch2d_one_dir, branch2d_two_dir, coordinate_transform, cuboid3d, cylinder3d, nested_second_order, simple_laminate, BranchMode,
    BranchPlan2D, NestedPlan,
};
use staircase::energy::{leaf_energies, nearest_well, total_energy, SurfaceMode};
use staircase::field::{matmul, transpose, Field, LeafPoint, M3, V3};
use staircase::quad::{integrate_leaf_adaptive, QuadSettings, Rules};
use staircase::scaling::fit_loglog;
use staircase::wells::{build_wells, LaminationSignature, WellFamily};

fn plan(n: u64, mode: BranchMode) -> BranchPlan2D {
    BranchPlan2D::new(1.0, 1.0, n, None, mode, 2.0).unwrap()
}

fn quad() -> QuadSettings {
    QuadSettings::default()
}

/// Multiplicity-weighted integrals of `f` over all leaves.
fn integrate<const K: usize>(field: &Field, f: impl Fn(&LeafPoint) -> [f64; K]) -> [f64; K] {
    let rules = Rules::new();
    let s = quad();
    let g = |p: &LeafPoint, _: &V3| f(p);
    let mut acc = [0.0; K];
    for leaf in &field.leaves {
        let (v, _) = integrate_leaf_adaptive(leaf, &rules, &s, &g);
        for k in 0..K {
            acc[k] += leaf.mult * v[k];
        }
    }
    acc
}

/// Largest displacement jump over interface samples.
fn max_interface_jump(field: &Field, per_axis: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for iface in &field.interfaces {
        let n = if iface.pdim == 0 { 1 } else { per_axis.pow(iface.pdim as u32) };
        for k in 0..n {
            let mut s = [0.5; 3];
            let mut r = k;
            for a in 0..iface.pdim {
                s[a] = ((r % per_axis) as f64 + 0.5) / per_axis as f64;
                r /= per_axis;
            }
            let p = (iface.eval)(&s);
            let jump = (0..3).map(|i| (p.plus.u[i] - p.minus.u[i]).abs()).fold(0.0, f64::max);
            worst = worst.max(jump);
        }
    }
    worst
}

fn elastic(field: &Field) -> (f64, f64) {
    let b = total_energy(field, &field.wells, 2.0, 1.0, SurfaceMode::HessianTv, &quad());
    (b.elastic_bulk, b.elastic_cutoff)
}

fn within_factor(v: &[f64], factor: f64) -> bool {
    let hi = v.iter().cloned().fold(f64::MIN, f64::max);
    let lo = v.iter().cloned().fold(f64::MAX, f64::min);
    lo > 0.0 && hi / lo <= factor
}

#[test]
fn laminates() {
    let k11: WellFamily<f64> = build_wells(&LaminationSignature::new(&[1]).unwrap()).unwrap();
    let f = simple_laminate(&k11, 1, 0.5, 4).unwrap();
    let (bulk, cut) = elastic(&f);
    assert!(bulk.abs() < 1e-14 && cut == 0.0);
    let mult: f64 = f.interfaces.iter().map(|i| i.mult).sum();
    assert_eq!(mult, 8.0);
    let [vol, e11, e22, e12] = integrate(&f, |p| {
        let e = p.jet.strain();
        [1.0, e[0][0], e[1][1], e[0][1]]
    });
    assert!((vol - 1.0).abs() < 1e-13);
    assert!((e11 - 0.5).abs() < 1e-13 && e22.abs() < 1e-13 && e12.abs() < 1e-13);

    let k12: WellFamily<f64> = build_wells(&LaminationSignature::new(&[2]).unwrap()).unwrap();
    let f = simple_laminate(&k12, 1, 1.0 / 3.0, 5).unwrap();
    let [e11, e22, e12] = integrate(&f, |p| {
        let e = p.jet.strain();
        [e[0][0], e[1][1], e[0][1]]
    });
    assert!((e11 - 1.0 / 3.0).abs() < 1e-12 && (e22 + 1.0 / 3.0).abs() < 1e-12 && e12.abs() < 1e-12);
    assert!(elastic(&f).0.abs() < 1e-14);
    assert!(simple_laminate(&k12, 1, 1.5, 5).is_err());
}

#[test]
fn two_direction_bounds() {
    let f = branch2d_two_dir(plan(8, BranchMode::TwoDirections)).unwrap();
    assert!(f.trace_error(1000) <= 1e-12);
    let scaled: Vec<f64> = [8u64, 16, 32, 64]
        .iter()
        .map(|&n| {
            let f = branch2d_two_dir(plan(n, BranchMode::TwoDirections)).unwrap();
            let (b, c) = elastic(&f);
            (b + c) * (n * n) as f64
        })
        .collect();
    assert!(within_factor(&scaled, 2.0), "{scaled:?}");
    assert!(BranchPlan2D::new(1.0, 1.0, 4, None, BranchMode::TwoDirections, 2.0).unwrap_err().to_string().contains("4L/H"));
}

#[test]
fn one_direction_bounds() {
    let mut scaled = Vec::new();
    let mut mixed = Vec::new();
    let mut normal = Vec::new();
    for n in [8u64, 16, 32] {
        let f = branch2d_one_dir(plan(n, BranchMode::OneDirection)).unwrap();
        assert!(f.trace_error(1000) <= 1e-12);
        let (b, c) = elastic(&f);
        scaled.push((b + c) * (n as f64).powi(4));
        let [m, d, u1, u2] = integrate(&f, |p| {
            let g = p.jet.g;
            [g[0][1].powi(2) + g[1][0].powi(2), g[1][1].powi(2), p.jet.u[0].abs(), p.jet.u[1].abs()]
        });
        assert!(u1 > 0.0 && u2 > 0.0, "both components must be active");
        mixed.push((n as f64, m));
        normal.push((n as f64, d));
    }
    assert!(within_factor(&scaled, 2.0), "{scaled:?}");
    let (sm, sd) = (fit_loglog(&mixed).slope, fit_loglog(&normal).slope);
    assert!((sm + 2.0).abs() < 0.3 && (sd + 4.0).abs() < 0.3 && sm > sd + 1.0, "slopes {sm} {sd}");
}

#[test]
fn branch_geometry() {
    for mode in [BranchMode::TwoDirections, BranchMode::OneDirection] {
        let p = plan(12, mode);
        for j in 0..p.j0 {
            assert!((p.ell(j + 1) - p.ell(j) / 2.0).abs() < 1e-15);
            assert!((p.height(j + 1) - p.theta * p.height(j)).abs() < 1e-14);
            assert!(p.ell(j) < p.height(j));
        }
    }
}

#[test]
fn two_direction_symmetry() {
    let f = branch2d_two_dir(plan(8, BranchMode::TwoDirections)).unwrap();
    for k in 0..200 {
        let x = (k as f64 + 0.37) / 200.0;
        let t = 0.49 * ((k * 7919) % 200) as f64 / 200.0;
        let (a, b) = (f.jet(&[x, 0.5 + t, 0.0]).u, f.jet(&[x, 0.5 - t, 0.0]).u);
        assert!((a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
    }
}

#[test]
fn cuboid_bounds_and_split() {
    let f = cuboid3d(0.5, 0.5, 1.0, 16, 2.0, None).unwrap();
    assert!(f.trace_error(1000) <= 1e-12);
    assert!(max_interface_jump(&f, 3) <= 1e-12);
    let mut bulk = Vec::new();
    let mut cut = Vec::new();
    let mut d2 = Vec::new();
    for n in [16u64, 32, 64] {
        let f = cuboid3d(0.5, 0.5, 1.0, n, 2.0, None).unwrap();
        let (b, c) = elastic(&f);
        bulk.push((n as f64, b));
        cut.push((n as f64, c));
        let [v] = integrate(&f, |p| [(0..3).map(|i| p.jet.g[i][1].powi(2)).sum()]);
        // H₂ L^{p+1} / (H₁^{p−1} N^p) at p = 2.
        d2.push(v / (1.0 * 0.5f64.powi(3) / (0.5 * (n * n) as f64)));
    }
    let (sb, sc) = (fit_loglog(&bulk).slope, fit_loglog(&cut).slope);
    assert!((sb + 4.0).abs() <= 0.1, "bulk slope {sb}");
    assert!((sc + 3.0).abs() <= 0.1, "cut-off slope {sc}");
    assert!(within_factor(&d2, 2.0), "{d2:?}");
}

#[test]
fn cylinder_bounds() {
    let f = cylinder3d(16, 2.0, None).unwrap();
    assert!(f.trace_error(1000) <= 1e-12);
    let scaled: Vec<f64> = [8u64, 16, 32]
        .iter()
        .map(|&n| {
            let (b, c) = elastic(&cylinder3d(n, 2.0, None).unwrap());
            (b + c) * (n as f64).powi(4)
        })
        .collect();
    assert!(within_factor(&scaled, 2.0), "{scaled:?}");
    assert!(cylinder3d(4, 2.0, None).unwrap_err().to_string().contains("N > 4"));
}

#[test]
fn nested_trace_and_phases() {
    let f = nested_second_order(1e-4, 2.0).unwrap();
    assert!(f.trace_error(1000) <= 1e-12, "trace {}", f.trace_error(1000));
    let datum = f.datum.0;
    assert!((datum[0][0] - 0.5).abs() < 1e-15 && (datum[1][1] - 0.5).abs() < 1e-15 && (datum[2][2] + 0.5).abs() < 1e-15);
    let mut seen = [0usize; 3];
    let n = 40;
    let (lo, hi) = f.domain.bbox();
    for k in 0..n * n * n {
        let x: V3 = [0, 1, 2].map(|a| {
            let i = [k / (n * n), (k / n) % n, k % n][a];
            lo[a] + (hi[a] - lo[a]) * (i as f64 + 0.5) / n as f64
        });
        if f.domain.contains(&x) {
            let (w, dist) = nearest_well(&f.jet(&x).strain(), &f.wells);
            if dist < 0.1 {
                seen[w] += 1;
            }
        }
    }
    assert!(seen.iter().all(|&c| c > 0), "phase counts {seen:?}");
    assert_eq!(f.params["optimal"], 1.0);
    let plan = NestedPlan::for_eps(1e-3, 4.0).unwrap();
    let g = staircase::constructions::nested_from_plan(&plan).unwrap();
    assert_eq!(g.params["optimal"], 0.0);
}

#[test]
fn transform_equivalence() {
    let f = branch2d_one_dir(plan(8, BranchMode::OneDirection)).unwrap();
    let id = coordinate_transform(&f, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
    assert_eq!(elastic(&f), elastic(&id));
    let e0 = elastic(&f).0 + elastic(&f).1;
    // Ê = |det S|⁻¹ ∫ dist(S e Sᵀ, S K Sᵀ)^p, so the ratio lies in [σ_min^{2p}, σ_max^{2p}]/|det S|.
    for (a, b, c) in [(1.5, 0.3, -0.2), (0.6, -0.4, 0.9), (2.0, 1.0, 0.0)] {
        let s: M3 = [[a, b, 0.0], [c, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let m = nalgebra::Matrix2::new(a, b, c, 1.0);
        let sv = m.singular_values();
        let (smax, smin) = (sv.max(), sv.min());
        assert!(smax / smin <= 4.0);
        let g = coordinate_transform(&f, s).unwrap();
        let (b1, c1) = elastic(&g);
        let ratio = (b1 + c1) / e0;
        let det = m.determinant().abs();
        assert!(ratio >= smin.powi(4) / det * (1.0 - 1e-6) && ratio <= smax.powi(4) / det * (1.0 + 1e-6), "ratio {ratio}");
        assert!(g.trace_error(400) < 1e-12);
    }
    let rot = staircase::constructions::nested::rotation();
    let w = matmul(&matmul(&rot, &staircase::field::diag3(&[0.5, 1.0, -1.0])), &transpose(&rot));
    assert!((w[1][2] + 1.0).abs() < 1e-15 && w[1][1].abs() < 1e-15);
}

#[test]
fn leaf_sums_match_totals() {
    let f = cuboid3d(0.5, 0.5, 1.0, 16, 2.0, None).unwrap();
    let le = leaf_energies(&f, &f.wells, 2.0, &quad());
    let sum: f64 = f.leaves.iter().zip(&le).map(|(_, e)| e.elastic).sum();
    let (b, c) = elastic(&f);
    assert!((sum - (b + c)).abs() <= 1e-12 * (b + c));
}

#[test]
fn exports() {
    let f = branch2d_two_dir(plan(8, BranchMode::TwoDirections)).unwrap();
    let csv = f.grid_csv(16);
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with('#'));
    assert_eq!(lines.next().unwrap(), "x,y,u_x,u_y,e_xx,e_xy,e_yy,well");
    assert_eq!(lines.count(), 256);
    assert_eq!(f.summary_json()["leaves"], f.leaves.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn fields_are_continuous(n in 5u64..24, two in any::<bool>()) {
        let mode = if two { BranchMode::TwoDirections } else { BranchMode::OneDirection };
        let p = BranchPlan2D::new(1.0, 1.0, n, None, mode, 2.0).unwrap();
        let f = if two { branch2d_two_dir(p).unwrap() } else { branch2d_one_dir(p).unwrap() };
        prop_assert!(max_interface_jump(&f, 5) <= 1e-12);
        prop_assert!(f.trace_error(200) <= 1e-12);
    }

    #[test]
    fn cylinder_is_continuous(n in 5u64..20) {
        let f = cylinder3d(n, 2.0, None).unwrap();
        prop_assert!(max_interface_jump(&f, 4) <= 1e-12);
    }

    #[test]
    fn cuboid_is_continuous(n in 5u64..20) {
        let f = cuboid3d(0.5, 0.5, 1.0, n, 2.0, None).unwrap();
        prop_assert!(max_interface_jump(&f, 3) <= 1e-12);
        prop_assert!(f.trace_error(300) <= 1e-12);
    }
}
