//! One-direction branching in a cuboid [0,L]×[0,H₁]×[0,H₂] with zero trace.
//!
//! The planar field ũ on (0,L)×(0,H₁) is carried along x₃ in the side region
//! D₃∪D₄ = {η(x₂) < x₃ < H₂ − η(x₂)} and along x₂ in the wedges below and
//! above, where it is evaluated at (x₁, x₃) resp. (x₁, x₃ − H₂ + H₁). Here η
//! is the distance to the nearer horizontal edge of ũ. A smooth cut-off θ of
//! width s = L/N brings the carried component to zero on the wedge faces:
//!
//! side:   u = (ũ₁, θ ũ₂, 0)(x₁, x₂),  θ = ψ(dist to {x₃ = η, x₃ = H₂ − η}/s)
//! wedges: u = (ũ₁, 0, θ ũ₂)(x₁, y),   θ = ψ(dist to {x₂ = η, x₂ = H₁ − η}/s)
//!
//! Every leaf is a ũ leaf times an interval in the carrying direction: one
//! extruded piece where θ = 1 and two 3D bands where θ varies. Near the wedge
//! apex the two bands of the wedge meet on the plane x₂ = H₁/2.

use super::branch2d::{Branch2D, BranchMode, BranchPlan2D, Half, Jet2, Spec2};
use super::branch2d::{IfaceSpec2, LeafSpec2};
use super::profile::{dpsi, psi};
use super::ConstructionError;
use crate::field::{diag3, Domain, Embedding, Field, IfacePoint, Interface, Jet, Leaf, LeafPoint, Tag, M3, V3, ZERO3};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct CuboidPlan {
    pub l: f64,
    pub h1: f64,
    pub h2: f64,
    pub n: u64,
    /// Cut-off width L/N.
    pub s: f64,
    pub inner: BranchPlan2D,
}

impl CuboidPlan {
    pub fn new(l: f64, h1: f64, h2: f64, n: u64, p: f64, theta: Option<f64>) -> Result<Self, ConstructionError> {
        if !(l > 0.0 && h1 > 0.0 && h2 > 0.0) {
            return Err(ConstructionError::Domain("cuboid sides must be positive".into()));
        }
        if n as f64 <= 4.0 * l / h1 {
            return Err(ConstructionError::Hypothesis(format!("N > 4L/H₁ required (N = {n}, 4L/H₁ = {})", 4.0 * l / h1)));
        }
        let s = l / n as f64;
        if h2 - h1 < 2.0 * s {
            return Err(ConstructionError::Hypothesis(format!("H₂ − H₁ ≥ 2L/N required (H₂ − H₁ = {}, 2L/N = {})", h2 - h1, 2.0 * s)));
        }
        let inner = BranchPlan2D::new(l, h1, n, theta, BranchMode::OneDirection, p)?;
        Ok(Self { l, h1, h2, n, s, inner })
    }
}

/// Which region carries the planar field, and along which axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Carrier {
    /// D₃∪D₄: ũ(x₁, x₂) carried along x₃.
    Side,
    /// D₁: ũ(x₁, x₃) from the lower half carried along x₂.
    Bottom,
    /// D₂: ũ(x₁, x₃ − H₂ + H₁) from the upper half carried along x₂.
    Top,
}

/// Position within the carrying interval [η, K − η].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Lo,
    Mid,
    Hi,
    /// Wedge apex, interval shorter than 2s: halves meeting at K/2.
    CenterLo,
    CenterHi,
}

/// Carrying coordinate q and the cut-off at a point.
#[derive(Debug, Clone, Copy)]
struct Cross {
    q: f64,
    dq_deta: f64,
    width: f64,
    theta: f64,
    /// ∂θ/∂y and ∂θ/∂q in the (x, y, q) frame.
    dth_y: f64,
    dth_q: f64,
}

fn cross(part: Part, k: f64, eta: f64, deta_dy: f64, xi2: f64, s: f64) -> Cross {
    let half = 0.5 * k - eta;
    // (q, ∂q/∂η, width, distance to the nearer face, orientation)
    let (q, dq_deta, width, zeta, sg) = match part {
        Part::Lo => (eta + xi2 * s, 1.0, s, xi2 * s, 1.0),
        Part::Hi => (k - eta - s + xi2 * s, -1.0, s, (1.0 - xi2) * s, -1.0),
        Part::Mid => (eta + s + xi2 * (k - 2.0 * eta - 2.0 * s), 1.0 - 2.0 * xi2, k - 2.0 * eta - 2.0 * s, f64::INFINITY, 0.0),
        Part::CenterLo => (eta + xi2 * half, 1.0 - xi2, half, xi2 * half, 1.0),
        Part::CenterHi => (0.5 * k + xi2 * half, -xi2, half, (1.0 - xi2) * half, -1.0),
    };
    let (theta, dth) = if zeta.is_finite() { (psi(zeta / s), dpsi(zeta / s) / s) } else { (1.0, 0.0) };
    Cross { q, dq_deta, width, theta, dth_y: -deta_dy * dth, dth_q: sg * dth }
}

/// 3D jet from the planar jet and the cut-off.
fn lift(carrier: Carrier, j: &Jet2, c: &Cross) -> Jet {
    let mut g = ZERO3;
    let th = c.theta;
    let u = match carrier {
        Carrier::Side => {
            g[0] = [j.g[0][0], j.g[0][1], 0.0];
            g[1] = [th * j.g[1][0], th * j.g[1][1] + j.u[1] * c.dth_y, j.u[1] * c.dth_q];
            [j.u[0], th * j.u[1], 0.0]
        }
        Carrier::Bottom | Carrier::Top => {
            g[0] = [j.g[0][0], 0.0, j.g[0][1]];
            g[2] = [th * j.g[1][0], j.u[1] * c.dth_q, th * j.g[1][1] + j.u[1] * c.dth_y];
            [j.u[0], 0.0, th * j.u[1]]
        }
    };
    Jet { u, g }
}

fn half_of(spec: &Spec2) -> Half {
    match *spec {
        Spec2::Block { half, .. } | Spec2::Strip { half, .. } => half,
    }
}

fn flipped(spec: &Spec2) -> Spec2 {
    match *spec {
        Spec2::Block { j, half, r, ta, tb } => Spec2::Block { j, half: half.flip(), r, ta, tb },
        Spec2::Strip { half, piece } => Spec2::Strip { half: half.flip(), piece },
    }
}

fn own(half: Half) -> Carrier {
    match half {
        Half::Bottom => Carrier::Bottom,
        Half::Top => Carrier::Top,
    }
}

/// dη/dy on a half.
fn deta(half: Half) -> f64 {
    -half.sign()
}

fn cross3(a: &V3, b: &V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(v: &V3) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// A leaf of the cuboid: a planar leaf carried over one part of the interval.
#[derive(Debug, Clone, Copy)]
pub struct Piece {
    pub spec: Spec2,
    pub carrier: Carrier,
    pub part: Part,
    pub mult: f64,
    pub tag: Tag,
    pub affine: bool,
}

pub struct Cuboid {
    pub plan: CuboidPlan,
    b: Branch2D,
}

impl Cuboid {
    pub fn new(plan: CuboidPlan) -> Self {
        let b = Branch2D::new(plan.inner.clone());
        Self { plan, b }
    }

    fn extent(&self, c: Carrier) -> f64 {
        match c {
            Carrier::Side => self.plan.h2,
            _ => self.plan.h1,
        }
    }

    /// (x, y, q) to physical coordinates.
    fn place(&self, c: Carrier, v: [f64; 3], offset: bool) -> V3 {
        let [x, y, q] = v;
        match c {
            Carrier::Side => [x, y, q],
            Carrier::Bottom => [x, q, y],
            Carrier::Top => [x, q, if offset { y + self.plan.h2 - self.plan.h1 } else { y }],
        }
    }

    /// Apex split of a first-generation block: t below which the wedge is narrower than 2s.
    fn t_apex(&self) -> f64 {
        self.plan.s / self.plan.inner.height(0)
    }

    pub fn pieces(&self) -> Vec<Piece> {
        let ts = self.t_apex();
        let mut out = Vec::new();
        let mut push = |spec: Spec2, carrier, parts: &[Part], ls: &LeafSpec2| {
            for &part in parts {
                let mid = part == Part::Mid;
                out.push(Piece {
                    spec,
                    carrier,
                    part,
                    mult: ls.mult,
                    tag: if mid { Tag::Bulk } else { Tag::Cutoff },
                    affine: mid && ls.affine,
                });
            }
        };
        const FULL: [Part; 3] = [Part::Lo, Part::Mid, Part::Hi];
        for ls in self.b.leaf_specs() {
            push(ls.spec, Carrier::Side, &FULL, &ls);
            let c = own(half_of(&ls.spec));
            match ls.spec {
                Spec2::Block { j: 0, half, r, .. } => {
                    push(Spec2::Block { j: 0, half, r, ta: 0.0, tb: ts }, c, &[Part::CenterLo, Part::CenterHi], &ls);
                    push(Spec2::Block { j: 0, half, r, ta: ts, tb: 1.0 }, c, &FULL, &ls);
                }
                spec => push(spec, c, &FULL, &ls),
            }
        }
        out
    }

    pub fn point(&self, pc: &Piece, xi: &V3) -> LeafPoint {
        let p2 = self.b.eval_spec(&pc.spec, xi);
        let de = deta(half_of(&pc.spec));
        let c = cross(pc.part, self.extent(pc.carrier), p2.eta, de, xi[2], self.plan.s);
        let col = |a: usize| {
            let dy = p2.jac[1][a];
            self.place(pc.carrier, [p2.jac[0][a], dy, c.dq_deta * de * dy], false)
        };
        let (c0, c1, c2) = (col(0), col(1), self.place(pc.carrier, [0.0, 0.0, c.width], false));
        let jac: M3 = std::array::from_fn(|i| [c0[i], c1[i], c2[i]]);
        LeafPoint { x: self.place(pc.carrier, [p2.x, p2.y, c.q], true), jac, weight: 1.0, jet: lift(pc.carrier, &p2.jet, &c) }
    }

    pub fn leaves(self: &Arc<Self>) -> Vec<Leaf> {
        self.pieces()
            .into_iter()
            .map(|pc| {
                let me = Arc::clone(self);
                let (pdim, emb) = if pc.part == Part::Mid { (2, Embedding::Extruded) } else { (3, Embedding::Full) };
                Leaf::new(pdim, pc.mult, pc.tag, pc.affine, emb, Arc::new(move |xi: &V3| me.point(&pc, xi)))
            })
            .collect()
    }

    /// Planar interfaces carried over each part, in the side region and the wedges.
    fn carried_interfaces(self: &Arc<Self>) -> Vec<Interface> {
        let ts = self.t_apex();
        let mut out = Vec::new();
        for is in self.b.iface_specs().into_iter().filter(|s| s.mult > 0.0) {
            let half = match is.spec {
                IfaceSpec2::Curve { half, .. }
                | IfaceSpec2::BlockEdge { half, .. }
                | IfaceSpec2::GenLine { half, .. }
                | IfaceSpec2::StripLine { half, .. }
                | IfaceSpec2::StripKink { half, .. } => Some(half),
                IfaceSpec2::Center { .. } => None,
            };
            let mut jobs: Vec<(Carrier, Part, f64, f64)> = [Part::Lo, Part::Mid, Part::Hi].iter().map(|&p| (Carrier::Side, p, 0.0, 1.0)).collect();
            if let Some(h) = half {
                let c = own(h);
                match is.spec {
                    IfaceSpec2::Curve { j: 0, .. } | IfaceSpec2::BlockEdge { j: 0, .. } => {
                        jobs.extend([Part::CenterLo, Part::CenterHi].map(|p| (c, p, 0.0, ts)));
                        jobs.extend([Part::Lo, Part::Mid, Part::Hi].map(|p| (c, p, ts, 1.0)));
                    }
                    _ => jobs.extend([Part::Lo, Part::Mid, Part::Hi].map(|p| (c, p, 0.0, 1.0))),
                }
            }
            for (carrier, part, sa, sb) in jobs {
                let me = Arc::clone(self);
                let spec = is.spec;
                let (hm, hp) = half.map_or((Half::Bottom, Half::Top), |h| (h, h));
                out.push(Interface {
                    pdim: if part == Part::Mid { 1 } else { 2 },
                    mult: is.mult,
                    eval: Arc::new(move |sp: &V3| {
                        let ip = me.b.eval_iface(&spec, sa + sp[0] * (sb - sa));
                        let k = me.extent(carrier);
                        let xi2 = if part == Part::Mid { 0.5 } else { sp[1] };
                        let cm = cross(part, k, ip.eta, deta(hm), xi2, me.plan.s);
                        let cp = cross(part, k, ip.eta, deta(hp), xi2, me.plan.s);
                        let ds = sb - sa;
                        let ty = ip.tangent[1] * ds;
                        let t0 = [ip.tangent[0] * ds, ty, cm.dq_deta * deta(hm) * ty];
                        let t1 = [0.0, 0.0, cm.width];
                        IfacePoint {
                            x: me.place(carrier, [ip.x, ip.y, cm.q], true),
                            da: norm(&cross3(&t0, &t1)),
                            minus: lift(carrier, &ip.minus, &cm),
                            plus: lift(carrier, &ip.plus, &cp),
                        }
                    }),
                });
            }
        }
        out
    }

    /// Planes x₂ = η and x₂ = H₁ − η separating the wedges from the side region.
    fn diagonal_interfaces(self: &Arc<Self>) -> Vec<Interface> {
        let mut out = Vec::new();
        for ls in self.b.leaf_specs() {
            let half = half_of(&ls.spec);
            for right in [false, true] {
                let me = Arc::clone(self);
                let spec = ls.spec;
                // The side region is evaluated at y' = q, the mirror point when q lies in the other half.
                let mirror = (half == Half::Bottom) == right;
                out.push(Interface {
                    pdim: 2,
                    mult: ls.mult,
                    eval: Arc::new(move |sp: &V3| {
                        let p2 = me.b.eval_spec(&spec, sp);
                        let (h1, h2) = (me.plan.h1, me.plan.h2);
                        let zero = Cross { q: 0.0, dq_deta: 0.0, width: 0.0, theta: 0.0, dth_y: 0.0, dth_q: 0.0 };
                        let wedge = lift(own(half), &p2.jet, &zero);
                        let side_jet = if mirror { me.b.eval_spec(&flipped(&spec), sp).jet } else { p2.jet };
                        let side = lift(Carrier::Side, &side_jet, &zero);
                        let (q, sq) = if right { (h1 - p2.eta, -1.0) } else { (p2.eta, 1.0) };
                        let (x3, s3) = if half == Half::Bottom { (p2.eta, 1.0) } else { (h2 - p2.eta, -1.0) };
                        let t = |a: usize| {
                            let de = deta(half) * p2.jac[1][a];
                            [p2.jac[0][a], sq * de, s3 * de]
                        };
                        IfacePoint { x: [p2.x, q, x3], da: norm(&cross3(&t(0), &t(1))), minus: side, plus: wedge }
                    }),
                });
            }
        }
        out
    }

    /// Plane x₂ = H₁/2 in the wedge apex, where the two cut-off bands meet.
    fn apex_interfaces(self: &Arc<Self>) -> Vec<Interface> {
        let ts = self.t_apex();
        let mut out = Vec::new();
        for half in [Half::Bottom, Half::Top] {
            for r in 0..self.plan.inner.regions() {
                let me = Arc::clone(self);
                let spec = Spec2::Block { j: 0, half, r, ta: 0.0, tb: ts };
                out.push(Interface {
                    pdim: 2,
                    mult: self.plan.inner.blocks(0),
                    eval: Arc::new(move |sp: &V3| {
                        let p2 = me.b.eval_spec(&spec, sp);
                        let (k, s) = (me.plan.h1, me.plan.s);
                        let cl = cross(Part::CenterLo, k, p2.eta, deta(half), 1.0, s);
                        let ch = cross(Part::CenterHi, k, p2.eta, deta(half), 0.0, s);
                        let c = own(half);
                        IfacePoint {
                            x: me.place(c, [p2.x, p2.y, 0.5 * k], true),
                            da: (p2.jac[0][0] * p2.jac[1][1] - p2.jac[0][1] * p2.jac[1][0]).abs(),
                            minus: lift(c, &p2.jet, &cl),
                            plus: lift(c, &p2.jet, &ch),
                        }
                    }),
                });
            }
        }
        out
    }

    pub fn interfaces(self: &Arc<Self>) -> Vec<Interface> {
        let mut v = self.carried_interfaces();
        v.extend(self.diagonal_interfaces());
        v.extend(self.apex_interfaces());
        v
    }

    /// Faces of the leaves lying on ∂ω, with the zero extension on the outside.
    pub fn boundary_faces(self: &Arc<Self>) -> Vec<Interface> {
        let last_region = self.plan.inner.regions() - 1;
        let last_piece = self.plan.inner.strip_breaks().len() - 2;
        let leaves = self.leaves();
        let mut out = Vec::new();
        for (pc, leaf) in self.pieces().iter().zip(&leaves) {
            let (first, last) = match pc.spec {
                Spec2::Block { r, .. } => (r == 0, r == last_region),
                Spec2::Strip { piece, .. } => {
                    // Edge layer η = 0 lies on x₂ ∈ {0, H₁} (side) or x₃ ∈ {0, H₂} (wedges).
                    out.push(leaf_face(leaf, 1, 1.0, pc.mult));
                    (piece == 0, piece == last_piece)
                }
            };
            if first {
                out.push(leaf_face(leaf, 0, 0.0, 1.0));
            }
            if last {
                out.push(leaf_face(leaf, 0, 1.0, 1.0));
            }
        }
        out
    }

    pub fn jet_at(&self, x: &V3) -> Jet {
        let (h1, h2, s) = (self.plan.h1, self.plan.h2, self.plan.s);
        let c = 0.5 * h1;
        let x2 = x[1].clamp(0.0, h1);
        let x3 = x[2].clamp(0.0, h2);
        let m = x2.min(h1 - x2);
        let theta = |zeta: f64, sg: f64, de: f64| {
            let (th, d) = (psi(zeta / s), dpsi(zeta / s) / s);
            Cross { q: 0.0, dq_deta: 0.0, width: 0.0, theta: th, dth_y: -de * d, dth_q: sg * d }
        };
        let wedge = |y: f64, eta: f64, half: Half| {
            let (zeta, sg) = if x2 < c { (x2 - eta, 1.0) } else { (h1 - eta - x2, -1.0) };
            lift(own(half), &self.b.jet_at(x[0], y), &theta(zeta.max(0.0), sg, deta(half)))
        };
        if x3 < m {
            wedge(x3, x3, Half::Bottom)
        } else if h2 - x3 < m {
            wedge(x3 - (h2 - h1), h2 - x3, Half::Top)
        } else {
            let (zeta, sg) = if x3 - m < h2 - m - x3 { (x3 - m, 1.0) } else { (h2 - m - x3, -1.0) };
            let half = if x2 < c { Half::Bottom } else { Half::Top };
            lift(Carrier::Side, &self.b.jet_at(x[0], x2), &theta(zeta.max(0.0), sg, deta(half)))
        }
    }

    pub fn into_field(self) -> Field {
        let me = Arc::new(self);
        let p = me.plan.clone();
        let g = Arc::clone(&me);
        let mut params = BTreeMap::new();
        params.insert("L".into(), p.l);
        params.insert("H1".into(), p.h1);
        params.insert("H2".into(), p.h2);
        params.insert("N".into(), p.n as f64);
        params.insert("theta".into(), p.inner.theta);
        params.insert("j0".into(), p.inner.j0 as f64);
        Field {
            name: "cuboid3d".into(),
            dim: 3,
            domain: Domain::Box { lo: [0.0; 3], hi: [p.l, p.h1, p.h2], dim: 3 },
            datum: (ZERO3, [0.0; 3]),
            periodic: false,
            leaves: me.leaves(),
            interfaces: me.interfaces(),
            global: Arc::new(move |x: &V3| g.jet_at(x)),
            params,
            wells: vec![diag3(&[1.0, 0.0, 0.0]), diag3(&[-1.0, 0.0, 0.0])],
        }
    }
}

/// Face ξ_axis = value of an unframed leaf as an interface against the zero field.
pub fn leaf_face(leaf: &Leaf, axis: usize, value: f64, mult: f64) -> Interface {
    assert!(leaf.frame.is_none(), "faces of framed leaves are not supported");
    let inner = leaf.clone();
    let free: Vec<usize> = (0..inner.pdim).filter(|&a| a != axis).collect();
    let extruded = inner.embedding == Embedding::Extruded;
    Interface {
        pdim: inner.pdim - 1,
        mult,
        eval: Arc::new(move |sp: &V3| {
            let mut xi = [0.5; 3];
            xi[axis] = value;
            for (k, &a) in free.iter().enumerate() {
                xi[a] = sp[k];
            }
            let p = inner.point(&xi);
            let mut t: Vec<V3> = free.iter().map(|&a| [p.jac[0][a], p.jac[1][a], p.jac[2][a]]).collect();
            if extruded {
                t.push([p.jac[0][2], p.jac[1][2], p.jac[2][2]]);
            }
            let da = match t.len() {
                1 => norm(&t[0]),
                _ => norm(&cross3(&t[0], &t[1])),
            } * p.weight;
            IfacePoint { x: p.x, da, minus: p.jet, plus: Jet { u: [0.0; 3], g: ZERO3 } }
        }),
    }
}

pub fn cuboid3d(l: f64, h1: f64, h2: f64, n: u64, p: f64, theta: Option<f64>) -> Result<Field, ConstructionError> {
    Ok(Cuboid::new(CuboidPlan::new(l, h1, h2, n, p, theta)?).into_field())
}
