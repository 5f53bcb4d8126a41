//! Two-scale construction for the three wells {0, e₁⊙e₁, A₂} with datum F.
//!
//! Everything is built in rotated coordinates z = S x on (0,1)³, where the
//! wells read K̂ = {0, diag(1,0,0), Â₂} with Â₂ = ½e₁⊗e₁ − (e₂⊗e₃ + e₃⊗e₂).
//! With ρ = max(|z₁−½|, |z₃−½|) + ½ the outer field is
//!
//!   u⁽¹⁾ = (z₁/2, −z₃/2, −w(z₂, ρ)/2 − z₂/2),
//!
//! where (0, w) is the two-direction branching on (0,1)² at scale N₁. Each
//! level set of ρ is a square loop, so outer leaves are planar leaves
//! extruded along the four sides of the loop. In the sub-blocks ω¹ (region 0)
//! and ω³ (region 2) the strain is ½e₁⊗e₁ and is split further by half a
//! cuboid field with wells ±e₁⊙e₁. Each annulus of an outer block is covered
//! by eight boxes (two sides, two tops, four corners); the ω³ copies are
//! sheared along z₂ by the motion of the region with ρ.

use super::branch2d::{theta_lower, Branch2D, BranchMode, BranchPlan2D, Half, Jet2, Loc, Spec2};
use super::branch2d::{IfaceSpec2, LeafSpec2};
use super::cuboid::{Cuboid, CuboidPlan};
use super::transform::coordinate_transform;
use super::ConstructionError;
use crate::field::{det_k, diag3, matmul, Domain, Embedding, Field, IfacePoint, Interface, Jet, Leaf, LeafPoint, M3, V3};
use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;
use std::sync::Arc;

/// Rotation with K̂ = S K Sᵀ: S z = (z₁, (z₂+z₃)/√2, (z₃−z₂)/√2).
pub fn rotation() -> M3 {
    let r = 0.5 * SQRT_2;
    [[1.0, 0.0, 0.0], [0.0, r, r], [0.0, -r, r]]
}

/// Wells in the rotated frame.
pub fn hat_wells() -> Vec<M3> {
    let mut a2 = diag3(&[0.5, 0.0, 0.0]);
    a2[1][2] = -1.0;
    a2[2][1] = -1.0;
    vec![diag3(&[0.0, 0.0, 0.0]), diag3(&[1.0, 0.0, 0.0]), a2]
}

/// Cuboids of one outer generation; sides and tops are empty for j = 0.
#[derive(Debug, Clone)]
pub struct GenCuboids {
    pub j: usize,
    pub side: Option<CuboidPlan>,
    pub top: Option<CuboidPlan>,
    pub corner: CuboidPlan,
}

#[derive(Debug, Clone)]
pub struct NestedPlan {
    pub p: f64,
    pub r1: f64,
    pub r2: f64,
    pub phi: f64,
    pub outer: BranchPlan2D,
    pub gens: Vec<GenCuboids>,
}

impl NestedPlan {
    /// Scales r₁ = 0.2·ε^{2/(2p+3)} and r₂ = 0.007·ε^{3/(2p+3)}.
    ///
    /// The prefactors keep the inner stripe count well above 4L/H₁ and the
    /// outer generation count large enough that the energy sits close to its
    /// asymptotic regime for ε ≤ 10⁻². θ and φ sit near the lower ends of
    /// their intervals so the per-generation sums converge quickly.
    pub fn for_eps(eps: f64, p: f64) -> Result<Self, ConstructionError> {
        Self::for_eps_scaled(eps, p, 0.2, 0.007)
    }

    /// r₁ = a·ε^{2/(2p+3)}, r₂ = b·ε^{3/(2p+3)} with the default θ and φ.
    pub fn for_eps_scaled(eps: f64, p: f64, a: f64, b: f64) -> Result<Self, ConstructionError> {
        if !(eps > 0.0) {
            return Err(ConstructionError::Domain("ε must be positive".into()));
        }
        let d = 2.0 * p + 3.0;
        let lo = theta_lower(BranchMode::TwoDirections, p, p + 1.0);
        let theta = lo + 0.2 * (0.5 - lo);
        let phi = theta + 0.1 * (0.5 - theta);
        Self::with_scales(a * eps.powf(2.0 / d), b * eps.powf(3.0 / d), p, Some(theta), Some(phi))
    }

    pub fn with_scales(r1: f64, r2: f64, p: f64, theta: Option<f64>, phi: Option<f64>) -> Result<Self, ConstructionError> {
        if !(r1 > 0.0 && r1 < 1.0 && r2 > 0.0 && r2 <= r1) {
            return Err(ConstructionError::Hypothesis(format!("0 < r₂ ≤ r₁ < 1 required (r₁ = {r1}, r₂ = {r2})")));
        }
        let n1 = ((1.0 / r1).ceil() as u64).max(5);
        let outer = BranchPlan2D::new(1.0, 1.0, n1, theta, BranchMode::TwoDirections, p)?;
        let theta = outer.theta;
        let phi = phi.unwrap_or(0.5 * (theta + 0.5));
        if !(phi > theta && phi < 0.5) {
            return Err(ConstructionError::Hypothesis(format!("φ ∈ (θ, 1/2) required (θ = {theta}, φ = {phi})")));
        }
        let mut gens = Vec::new();
        for j in 0..=outer.j0 {
            let (ell, h, yj) = (outer.ell(j), outer.height(j), outer.y(j));
            let h1 = ell / 4.0;
            let n_for = |l: f64, growth: f64| -> u64 {
                let rule = (growth.powi(j as i32) / r2).ceil();
                rule.max((4.0 * l / h1).floor() + 1.0) as u64
            };
            let width = 2.0 * yj - 1.0;
            let (side, top) = if width > 0.0 {
                (
                    Some(CuboidPlan::new(h, h1, width, n_for(h, 2.0 * theta), p, None)?),
                    Some(CuboidPlan::new(width, h1, h, n_for(width, 2.0 * phi / theta), p, None)?),
                )
            } else {
                (None, None)
            };
            let corner = CuboidPlan::new(h, h1, h, n_for(h, 2.0 * theta), p, None)?;
            gens.push(GenCuboids { j, side, top, corner });
        }
        Ok(Self { p, r1, r2, phi, outer, gens })
    }
}

fn e(k: usize) -> V3 {
    let mut v = [0.0; 3];
    v[k] = 1.0;
    v
}

fn dot(a: &V3, b: &V3) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Outer jet from the planar jet of w at z, with ∇ρ = g.
fn outer_jet(j2: &Jet2, z: &V3, g: &V3) -> Jet {
    let (w, wx, wy) = (j2.u[1], j2.g[1][0], j2.g[1][1]);
    Jet {
        u: [0.5 * z[0], -0.5 * z[2], -0.5 * w - 0.5 * z[1]],
        g: [[0.5, 0.0, 0.0], [0.0, 0.0, -0.5], [-0.5 * wy * g[0], -0.5 * wx - 0.5, -0.5 * wy * g[2]]],
    }
}

/// Placement of a cuboid copy: local x ↦ w = o + x, then z = w + shift(ρ) e₂.
#[derive(Debug, Clone, Copy)]
struct Place {
    j: usize,
    /// Outer region: 0 (ω¹, no shear) or 2 (ω³).
    r: usize,
    o: V3,
    /// ∇ρ on this copy.
    g: V3,
    /// Volume fraction weight λ = a + b·x₃ for homogenised corners.
    lam: (f64, f64),
    mult: f64,
}

struct Ctx {
    outer: Branch2D,
}

impl Ctx {
    fn ell_h_y(&self, j: usize) -> (f64, f64, f64) {
        let p = &self.outer.plan;
        (p.ell(j), p.height(j), p.y(j))
    }

    /// Shear coefficient c with z = w + ((ℓ/4)(1 + t)) e₂ and t = (ρ − y_j)/h_j.
    fn shear(&self, pl: &Place) -> f64 {
        let (ell, h, _) = self.ell_h_y(pl.j);
        if pl.r == 2 {
            ell / (4.0 * h)
        } else {
            0.0
        }
    }

    fn a_mat(&self, pl: &Place, inverse: bool) -> M3 {
        let c = if inverse { -self.shear(pl) } else { self.shear(pl) };
        let mut a = diag3(&[1.0, 1.0, 1.0]);
        for k in 0..3 {
            a[1][k] += c * pl.g[k];
        }
        a
    }

    /// (z, t) of a local point.
    fn map(&self, pl: &Place, x: &V3) -> (V3, f64) {
        let (ell, h, yj) = self.ell_h_y(pl.j);
        let w = [pl.o[0] + x[0], pl.o[1] + x[1], pl.o[2] + x[2]];
        let rho = 0.5 + dot(&pl.g, &[w[0] - 0.5, w[1] - 0.5, w[2] - 0.5]);
        let t = (rho - yj) / h;
        let mut z = w;
        if pl.r == 2 {
            z[1] += 0.25 * ell * (1.0 + t);
        }
        (z, t)
    }

    fn total(&self, pl: &Place, z: &V3, t: f64, beta: &Jet, ainv: &M3) -> Jet {
        let o = outer_jet(&self.outer.block_jet(pl.j, Half::Top, pl.r, z[1], t), z, &pl.g);
        let bg = matmul(&beta.g, ainv);
        Jet { u: std::array::from_fn(|i| o.u[i] + 0.5 * beta.u[i]), g: std::array::from_fn(|i| std::array::from_fn(|k| o.g[i][k] + 0.5 * bg[i][k])) }
    }

    fn place_point(&self, pl: &Place, p: &LeafPoint, weighted: bool) -> LeafPoint {
        let (z, t) = self.map(pl, &p.x);
        let a = self.a_mat(pl, false);
        let lam = if weighted { (pl.lam.0 + pl.lam.1 * p.x[2]).clamp(0.0, 1.0) } else { 1.0 };
        LeafPoint { x: z, jac: matmul(&a, &p.jac), weight: p.weight * lam, jet: self.total(pl, &z, t, &p.jet, &self.a_mat(pl, true)) }
    }

    fn place_iface(&self, pl: &Place, p: &IfacePoint) -> IfacePoint {
        let (z, t) = self.map(pl, &p.x);
        let ainv = self.a_mat(pl, true);
        // Area of the sheared surface: |A⁻ᵀn| dA (det A = 1), n from the rank-one jump.
        let jump: M3 = std::array::from_fn(|i| std::array::from_fn(|k| p.plus.g[i][k] - p.minus.g[i][k]));
        let row = jump.iter().copied().max_by(|a, b| dot(a, a).partial_cmp(&dot(b, b)).unwrap()).unwrap();
        let nn = dot(&row, &row).sqrt();
        let scale = if nn > 1e-14 {
            let n = row.map(|v| v / nn);
            let c = self.shear(pl);
            let m = [n[0] - c * pl.g[0] * n[1], n[1] - c * pl.g[1] * n[1], n[2] - c * pl.g[2] * n[1]];
            dot(&m, &m).sqrt()
        } else {
            1.0
        };
        let lam = (pl.lam.0 + pl.lam.1 * p.x[2]).clamp(0.0, 1.0);
        IfacePoint { x: z, da: p.da * scale * lam, minus: self.total(pl, &z, t, &p.minus, &ainv), plus: self.total(pl, &z, t, &p.plus, &ainv) }
    }
}

fn place_leaf(ctx: &Arc<Ctx>, leaf: &Leaf, pl: Place) -> Leaf {
    let (c, l) = (Arc::clone(ctx), leaf.clone());
    Leaf::new(leaf.pdim, leaf.mult * pl.mult, leaf.tag, leaf.affine, leaf.embedding, Arc::new(move |xi: &V3| c.place_point(&pl, &l.point(xi), true)))
}

fn place_iface(ctx: &Arc<Ctx>, i: &Interface, pl: Place) -> Interface {
    let (c, inner) = (Arc::clone(ctx), Arc::clone(&i.eval));
    Interface { pdim: i.pdim, mult: i.mult * pl.mult, eval: Arc::new(move |s: &V3| c.place_iface(&pl, &inner(s))) }
}

/// Gradient jump across the diagonal of an ω³ corner, spread over the corner
/// volume: ∫_diag f dA ≈ (√2/h)∫_corner f dV for stripes periodic in x₁.
fn diagonal_volume(ctx: &Arc<Ctx>, leaf: &Leaf, a: Place, b: Place, h: f64) -> Interface {
    let (c, l) = (Arc::clone(ctx), leaf.clone());
    Interface {
        pdim: leaf.pdim,
        mult: leaf.mult * a.mult,
        eval: Arc::new(move |xi: &V3| {
            let p = l.point(xi);
            let (pa, pb) = (c.place_point(&a, &p, false), c.place_point(&b, &p, false));
            IfacePoint { x: pa.x, da: det_k(&p.jac, 3).abs() * p.weight * SQRT_2 / h, minus: pa.jet, plus: pb.jet }
        }),
    }
}

/// Local cuboid pieces, built once per cuboid plan.
struct Parts {
    cuboid: Arc<Cuboid>,
    leaves: Vec<Leaf>,
    ifaces: Vec<Interface>,
}

impl Parts {
    fn new(plan: &CuboidPlan) -> Self {
        let cuboid = Arc::new(Cuboid::new(plan.clone()));
        let leaves = cuboid.leaves();
        let mut ifaces = cuboid.interfaces();
        ifaces.extend(cuboid.boundary_faces());
        Self { cuboid, leaves, ifaces }
    }
}

struct GenParts {
    side: Option<Parts>,
    top: Option<Parts>,
    corner: Parts,
}

/// Outer leaves or interfaces are extruded along the side of the ρ-loop with normal g.
fn loop_point(x: f64, rho: f64, g: &V3) -> V3 {
    let d = rho - 0.5;
    [0.5 + g[0] * d, x, 0.5 + g[2] * d]
}

const LOOP: [(usize, f64); 4] = [(0, 1.0), (0, -1.0), (2, 1.0), (2, -1.0)];

fn outer_leaf(ctx: &Arc<Ctx>, ls: LeafSpec2, axis: usize, sign: f64) -> Leaf {
    let c = Arc::clone(ctx);
    let g = e(axis).map(|v| v * sign);
    let other = 2 - axis;
    Leaf::new(
        2,
        ls.mult,
        ls.tag,
        ls.affine,
        Embedding::Extruded,
        Arc::new(move |xi: &V3| {
            let q = c.outer.eval_spec(&ls.spec, xi);
            let z = loop_point(q.x, q.y, &g);
            let mut jac = [[0.0; 3]; 3];
            for a in 0..2 {
                jac[axis][a] = g[axis] * q.jac[1][a];
                jac[1][a] = q.jac[0][a];
            }
            jac[other][2] = 2.0 * q.y - 1.0;
            LeafPoint { x: z, jac, weight: 1.0, jet: outer_jet(&q.jet, &z, &g) }
        }),
    )
}

fn outer_iface(ctx: &Arc<Ctx>, spec: IfaceSpec2, mult: f64, axis: usize, sign: f64) -> Interface {
    let c = Arc::clone(ctx);
    let g = e(axis).map(|v| v * sign);
    Interface {
        pdim: 1,
        mult,
        eval: Arc::new(move |s: &V3| {
            let q = c.outer.eval_iface(&spec, s[0]);
            let z = loop_point(q.x, q.y, &g);
            IfacePoint {
                x: z,
                da: q.tangent[0].hypot(q.tangent[1]) * (2.0 * q.y - 1.0),
                minus: outer_jet(&q.minus, &z, &g),
                plus: outer_jet(&q.plus, &z, &g),
            }
        }),
    }
}

/// Kink of ρ on the diagonal half-planes, for outer leaves without inner corrections.
fn outer_diagonal(ctx: &Arc<Ctx>, ls: LeafSpec2, s1: f64, s3: f64) -> Interface {
    let c = Arc::clone(ctx);
    Interface {
        pdim: 2,
        mult: ls.mult,
        eval: Arc::new(move |xi: &V3| {
            let q = c.outer.eval_spec(&ls.spec, xi);
            let d = q.y - 0.5;
            let z = [0.5 + s1 * d, q.x, 0.5 + s3 * d];
            let da = SQRT_2 * (q.jac[0][0] * q.jac[1][1] - q.jac[0][1] * q.jac[1][0]).abs();
            IfacePoint { x: z, da, minus: outer_jet(&q.jet, &z, &[s1, 0.0, 0.0]), plus: outer_jet(&q.jet, &z, &[0.0, 0.0, s3]) }
        }),
    }
}

/// Offsets (o₁ or o₃) of the lower edge of the annulus band on the side `s`.
fn band_origin(yj: f64, yj1: f64, s: f64) -> f64 {
    if s > 0.0 {
        yj
    } else {
        1.0 - yj1
    }
}

/// The field in rotated coordinates on (0,1)³.
pub fn nested_hat(plan: &NestedPlan) -> Field {
    let ctx = Arc::new(Ctx { outer: Branch2D::new(plan.outer.clone()) });
    let op = &plan.outer;
    let parts: Arc<Vec<GenParts>> = Arc::new(
        plan.gens
            .iter()
            .map(|g| GenParts { side: g.side.as_ref().map(Parts::new), top: g.top.as_ref().map(Parts::new), corner: Parts::new(&g.corner) })
            .collect(),
    );

    let mut leaves = Vec::new();
    let mut interfaces = Vec::new();

    // Outer field away from ω¹ and ω³.
    for ls in ctx.outer.leaf_specs() {
        let covered = match ls.spec {
            Spec2::Block { half: Half::Bottom, .. } | Spec2::Strip { half: Half::Bottom, .. } => continue,
            Spec2::Block { r, .. } => r == 0 || r == 2,
            Spec2::Strip { .. } => false,
        };
        if covered {
            continue;
        }
        for (axis, sign) in LOOP {
            leaves.push(outer_leaf(&ctx, ls, axis, sign));
        }
        for (s1, s3) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            interfaces.push(outer_diagonal(&ctx, ls, s1, s3));
        }
    }
    let outer_leaves = leaves.len();
    for is in ctx.outer.iface_specs().into_iter().filter(|s| s.mult > 0.0) {
        let top = match is.spec {
            IfaceSpec2::Curve { half, .. }
            | IfaceSpec2::BlockEdge { half, .. }
            | IfaceSpec2::GenLine { half, .. }
            | IfaceSpec2::StripLine { half, .. }
            | IfaceSpec2::StripKink { half, .. } => half == Half::Top,
            IfaceSpec2::Center { .. } => false,
        };
        if top {
            for (axis, sign) in LOOP {
                interfaces.push(outer_iface(&ctx, is.spec, is.mult, axis, sign));
            }
        }
    }

    // Inner corrections.
    for (gp, gc) in parts.iter().zip(&plan.gens) {
        let j = gc.j;
        let (h, yj, yj1) = (op.height(j), op.y(j), op.y(j + 1));
        let blocks = op.blocks(j);
        let mut extra = Vec::new();
        let mut add = |p: &Parts, pl: Place| {
            leaves.extend(p.leaves.iter().map(|l| place_leaf(&ctx, l, pl)));
            interfaces.extend(p.ifaces.iter().map(|i| place_iface(&ctx, i, pl)));
        };
        let full = (1.0, 0.0);
        // ω¹: outer gradient independent of ∇ρ, copies of a kind are translates.
        if let Some(p) = &gp.side {
            add(p, Place { j, r: 0, o: [yj, 0.0, 1.0 - yj], g: e(0), lam: full, mult: 2.0 * blocks });
        }
        if let Some(p) = &gp.top {
            add(p, Place { j, r: 0, o: [1.0 - yj, 0.0, yj], g: e(2), lam: full, mult: 2.0 * blocks });
        }
        add(&gp.corner, Place { j, r: 0, o: [yj, 0.0, yj], g: e(0), lam: full, mult: 4.0 * blocks });
        // ω³: each orientation separately.
        for s in [1.0, -1.0] {
            let ob = band_origin(yj, yj1, s);
            if let Some(p) = &gp.side {
                add(p, Place { j, r: 2, o: [ob, 0.0, 1.0 - yj], g: e(0).map(|v| v * s), lam: full, mult: blocks });
            }
            if let Some(p) = &gp.top {
                add(p, Place { j, r: 2, o: [1.0 - yj, 0.0, ob], g: e(2).map(|v| v * s), lam: full, mult: blocks });
            }
        }
        for s1 in [1.0, -1.0] {
            for s3 in [1.0, -1.0] {
                let o = [band_origin(yj, yj1, s1), 0.0, band_origin(yj, yj1, s3)];
                // Fraction of the corner where |z₁−½| > |z₃−½|, as a function of x₃.
                let lam = if s3 > 0.0 { (1.0, -1.0 / h) } else { (0.0, 1.0 / h) };
                let a = Place { j, r: 2, o, g: e(0).map(|v| v * s1), lam, mult: blocks };
                let b = Place { j, r: 2, o, g: e(2).map(|v| v * s3), lam: (1.0 - lam.0, -lam.1), mult: blocks };
                add(&gp.corner, a);
                add(&gp.corner, b);
                extra.extend(gp.corner.leaves.iter().map(|l| diagonal_volume(&ctx, l, a, b, h)));
            }
        }
        interfaces.extend(extra);
    }

    let g_ctx = Arc::clone(&ctx);
    let g_parts = Arc::clone(&parts);
    let global = Arc::new(move |z: &V3| hat_jet(&g_ctx, &g_parts, z));

    let mut params = BTreeMap::new();
    params.insert("r1".into(), plan.r1);
    params.insert("r2".into(), plan.r2);
    params.insert("N1".into(), op.n as f64);
    params.insert("theta".into(), op.theta);
    params.insert("phi".into(), plan.phi);
    params.insert("j0".into(), op.j0 as f64);
    params.insert("outer_leaves".into(), outer_leaves as f64);
    params.insert("optimal".into(), if (1.0..=3.0).contains(&plan.p) { 1.0 } else { 0.0 });
    let f_hat = [[0.5, 0.0, 0.0], [0.0, 0.0, -0.5], [0.0, -0.5, 0.0]];
    Field {
        name: "nested-second-order".into(),
        dim: 3,
        domain: Domain::Box { lo: [0.0; 3], hi: [1.0; 3], dim: 3 },
        datum: (f_hat, [0.0; 3]),
        periodic: false,
        leaves,
        interfaces,
        global,
        params,
        wells: hat_wells(),
    }
}

/// Pointwise evaluation with the exact (kinked) shear in ω³ corners.
fn hat_jet(ctx: &Ctx, parts: &[GenParts], z: &V3) -> Jet {
    let z = z.map(|v| v.clamp(0.0, 1.0));
    let (d1, d3) = ((z[0] - 0.5).abs(), (z[2] - 0.5).abs());
    let (s1, s3) = (if z[0] >= 0.5 { 1.0 } else { -1.0 }, if z[2] >= 0.5 { 1.0 } else { -1.0 });
    let rho = d1.max(d3) + 0.5;
    let g = if d1 >= d3 { [s1, 0.0, 0.0] } else { [0.0, 0.0, s3] };
    match ctx.outer.locate(z[1], rho) {
        Loc::Block { j, r, xl, t, .. } if r == 0 || r == 2 => {
            let p = &ctx.outer.plan;
            let (ell, h, yj, yj1) = (p.ell(j), p.height(j), p.y(j), p.y(j + 1));
            let a = yj - 0.5;
            let (in1, in3) = (d1 >= a, d3 >= a);
            let gp = &parts[j];
            let part = match (in1, in3) {
                (true, true) => &gp.corner,
                (true, false) => gp.side.as_ref().unwrap_or(&gp.corner),
                _ => gp.top.as_ref().unwrap_or(&gp.corner),
            };
            let x1 = if in1 { z[0] - band_origin(yj, yj1, s1) } else { z[0] - (1.0 - yj) };
            let x3 = if in3 { z[2] - band_origin(yj, yj1, s3) } else { z[2] - (1.0 - yj) };
            let (x2, c) = if r == 2 { (xl - 0.25 * ell * (1.0 + t), ell / (4.0 * h)) } else { (xl, 0.0) };
            let beta = part.cuboid.jet_at(&[x1, x2, x3]);
            let mut ainv = diag3(&[1.0, 1.0, 1.0]);
            for k in 0..3 {
                ainv[1][k] -= c * g[k];
            }
            let o = outer_jet(&ctx.outer.block_jet(j, Half::Top, r, xl, t), &z, &g);
            let bg = matmul(&beta.g, &ainv);
            Jet { u: std::array::from_fn(|i| o.u[i] + 0.5 * beta.u[i]), g: std::array::from_fn(|i| std::array::from_fn(|k| o.g[i][k] + 0.5 * bg[i][k])) }
        }
        _ => outer_jet(&ctx.outer.jet_at(z[1], rho), &z, &g),
    }
}

/// The construction in the original frame: u(x) = Sᵀ û(S x).
pub fn nested_second_order(eps: f64, p: f64) -> Result<Field, ConstructionError> {
    let plan = NestedPlan::for_eps(eps, p)?;
    nested_from_plan(&plan)
}

pub fn nested_from_plan(plan: &NestedPlan) -> Result<Field, ConstructionError> {
    let hat = nested_hat(plan);
    let mut f = coordinate_transform(&hat, crate::field::transpose(&rotation()))?;
    f.name = "nested-second-order".into();
    Ok(f)
}
