//! Self-similar two-dimensional branching on [0,L]×[0,H] with zero trace.
//!
//! Generation j of the upper half occupies y ∈ [y_j, y_{j+1}] and consists of
//! 2^j N blocks of width ℓ_j; the lower half is the mirror image. Inside a
//! block, `t ∈ [0,1]` is the relative height measured from the centre line,
//! and every quantity is evaluated from block-local coordinates so that deep
//! generations keep full relative precision.

use super::profile::{d2psi, dpsi, psi};
use super::ConstructionError;
use crate::field::{
    diag3, Domain, Embedding, Field, IfacePoint, Interface, Jet, Leaf, LeafPoint, Tag, V3, ZERO3,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchMode {
    /// Wells ±e1⊙e1: one lamination normal, curved interfaces.
    OneDirection,
    /// Wells ±(e1⊙e2)·2: two normals, affine interfaces.
    TwoDirections,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Half {
    Top,
    Bottom,
}

impl Half {
    pub fn flip(self) -> Self {
        match self {
            Half::Top => Half::Bottom,
            Half::Bottom => Half::Top,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Half::Top => 1.0,
            Half::Bottom => -1.0,
        }
    }
}

/// Geometry of the branching construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchPlan2D {
    pub l: f64,
    pub h: f64,
    pub n: u64,
    pub theta: f64,
    pub q_star: f64,
    pub mode: BranchMode,
    pub j0: usize,
}

/// Lower end of the admissible refinement ratios.
pub fn theta_lower(mode: BranchMode, p: f64, q_star: f64) -> f64 {
    match mode {
        BranchMode::OneDirection => 2f64.powf(-2.0 * q_star / (2.0 * q_star - 1.0)),
        BranchMode::TwoDirections if p > 1.0 => 2f64.powf(-p / (p - 1.0)),
        BranchMode::TwoDirections => 0.0,
    }
}

pub fn default_theta(mode: BranchMode, p: f64) -> f64 {
    let lo = theta_lower(mode, p, p + 1.0);
    match mode {
        BranchMode::TwoDirections if 0.4 > lo => 0.4,
        _ => 0.5 * (lo + 0.5),
    }
}

impl BranchPlan2D {
    pub fn new(l: f64, h: f64, n: u64, theta: Option<f64>, mode: BranchMode, p: f64) -> Result<Self, ConstructionError> {
        if !(l > 0.0 && h > 0.0) {
            return Err(ConstructionError::Domain("block extents must be positive".into()));
        }
        if (n as f64) <= 4.0 * l / h {
            return Err(ConstructionError::Hypothesis(format!("N > 4L/H required (N = {n}, 4L/H = {})", 4.0 * l / h)));
        }
        let q_star = p + 1.0;
        let theta = theta.unwrap_or_else(|| default_theta(mode, p));
        let lo = theta_lower(mode, p, q_star);
        if !(theta > lo && theta < 0.5) {
            return Err(ConstructionError::Hypothesis(format!("θ ∈ ({lo:.6}, 1/2) required, got {theta}")));
        }
        let mut plan = Self { l, h, n, theta, q_star, mode, j0: 0 };
        let mut j = 0;
        while j < 4000 && plan.ell(j + 1) < plan.height(j + 1) {
            j += 1;
        }
        plan.j0 = j;
        Ok(plan)
    }

    pub fn ell(&self, j: usize) -> f64 {
        self.l / self.n as f64 * 0.5f64.powi(j as i32)
    }

    /// Distance of y_j to the top edge.
    pub fn eta(&self, j: usize) -> f64 {
        0.5 * self.h * self.theta.powi(j as i32)
    }

    pub fn y(&self, j: usize) -> f64 {
        self.h - self.eta(j)
    }

    pub fn height(&self, j: usize) -> f64 {
        self.eta(j) * (1.0 - self.theta)
    }

    pub fn blocks(&self, j: usize) -> f64 {
        self.n as f64 * 2f64.powi(j as i32)
    }

    /// Height of the residual layer next to each horizontal edge.
    pub fn strip(&self) -> f64 {
        self.eta(self.j0 + 1)
    }

    pub fn regions(&self) -> usize {
        match self.mode {
            BranchMode::OneDirection => 5,
            BranchMode::TwoDirections => 4,
        }
    }

    fn amplitude(&self) -> f64 {
        match self.mode {
            BranchMode::OneDirection => 1.0,
            BranchMode::TwoDirections => -2.0,
        }
    }

    /// Region boundaries x_r(t) and their t-derivatives in a block of width ℓ.
    pub fn bounds(&self, ell: f64, t: f64) -> Vec<(f64, f64)> {
        match self.mode {
            BranchMode::TwoDirections => {
                let q = ell / 4.0;
                vec![(0.0, 0.0), (q, 0.0), (q * (1.0 + t), q), (q * (2.0 + t), q), (ell, 0.0)]
            }
            BranchMode::OneDirection => {
                let (b, db) = (ell / 8.0 * psi(t), ell / 8.0 * dpsi(t));
                vec![
                    (0.0, 0.0),
                    (ell / 4.0 - b, -db),
                    (ell / 2.0 - b, -db),
                    (ell / 2.0 + b, db),
                    (0.75 * ell + b, db),
                    (ell, 0.0),
                ]
            }
        }
    }

    pub fn region_affine(&self, r: usize) -> bool {
        match self.mode {
            BranchMode::TwoDirections => true,
            BranchMode::OneDirection => r == 0 || r == 4,
        }
    }

    /// Region containing local abscissa `x` at height `t`.
    pub fn region_at(&self, ell: f64, x: f64, t: f64) -> usize {
        let b = self.bounds(ell, t);
        (0..self.regions()).find(|&r| x < b[r + 1].0).unwrap_or(self.regions() - 1)
    }

    /// (u, ∂ₓu, ∂ₜu) of region `r` in a block of width ℓ; `tau` = dt/dy.
    pub fn region_jet(&self, r: usize, ell: f64, tau: f64, x: f64, t: f64) -> ([f64; 2], [f64; 2], [f64; 2]) {
        let a = self.amplitude();
        match self.mode {
            BranchMode::TwoDirections => {
                let (w, dx, dt) = match r {
                    0 => (a * x, a, 0.0),
                    1 => (a * (ell / 2.0 - x), -a, 0.0),
                    2 => (a * (x - ell * t / 2.0), a, -a * ell / 2.0),
                    _ => (a * (ell - x), -a, 0.0),
                };
                ([0.0, w], [0.0, dx], [0.0, dt])
            }
            BranchMode::OneDirection => {
                let b = ell / 8.0 * psi(t);
                let b1 = ell / 8.0 * dpsi(t);
                let b2 = ell / 8.0 * d2psi(t);
                let a1 = ell / 4.0 - b;
                let c = ell / 2.0;
                let k = 2.0 * a * tau;
                match r {
                    0 => ([a * x, 0.0], [a, 0.0], [0.0, 0.0]),
                    1 => (
                        [a * (2.0 * a1 - x), k * b1 * (x - a1)],
                        [-a, k * b1],
                        [-2.0 * a * b1, k * (b2 * (x - a1) + b1 * b1)],
                    ),
                    2 => ([a * (x - c), k * b1 * ell / 4.0], [a, 0.0], [0.0, k * b2 * ell / 4.0]),
                    3 => (
                        [a * (2.0 * b + c - x), k * (b1 * ell / 4.0 - b1 * (x - c - b))],
                        [-a, -k * b1],
                        [2.0 * a * b1, k * (b2 * ell / 4.0 - b2 * (x - c - b) + b1 * b1)],
                    ),
                    _ => ([a * (x - ell), 0.0], [a, 0.0], [0.0, 0.0]),
                }
            }
        }
    }

    /// Breakpoints of the finest profile inside one period ℓ_{j0+1}.
    pub fn strip_breaks(&self) -> Vec<f64> {
        let ls = self.ell(self.j0 + 1);
        match self.mode {
            BranchMode::TwoDirections => vec![0.0, ls / 2.0, ls],
            BranchMode::OneDirection => vec![0.0, ls / 4.0, 0.75 * ls, ls],
        }
    }

    /// Finest profile w and w′ at local abscissa `x` of one period.
    pub fn fine_profile(&self, x: f64, piece: usize) -> (f64, f64) {
        let ls = self.ell(self.j0 + 1);
        let a = self.amplitude();
        match (self.mode, piece) {
            (BranchMode::TwoDirections, 0) => (a * x, a),
            (BranchMode::TwoDirections, _) => (a * (ls - x), -a),
            (BranchMode::OneDirection, 0) => (x, 1.0),
            (BranchMode::OneDirection, 1) => (ls / 2.0 - x, -1.0),
            (BranchMode::OneDirection, _) => (x - ls, 1.0),
        }
    }

    fn profile_component(&self) -> usize {
        match self.mode {
            BranchMode::OneDirection => 0,
            BranchMode::TwoDirections => 1,
        }
    }
}

/// Two-dimensional jet: displacement and gradient with respect to (x, y).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet2 {
    pub u: [f64; 2],
    pub g: [[f64; 2]; 2],
}

impl Jet2 {
    pub fn to_jet(self) -> Jet {
        let mut g = ZERO3;
        for i in 0..2 {
            for j in 0..2 {
                g[i][j] = self.g[i][j];
            }
        }
        Jet { u: [self.u[0], self.u[1], 0.0], g }
    }
}

/// Leaf of the 2D construction in representative (first-block) position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spec2 {
    Block { j: usize, half: Half, r: usize, ta: f64, tb: f64 },
    Strip { half: Half, piece: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafSpec2 {
    pub spec: Spec2,
    pub mult: f64,
    pub tag: Tag,
    pub affine: bool,
}

/// Evaluated 2D point in both physical and local form.
#[derive(Debug, Clone, Copy, Default)]
pub struct Pt2 {
    pub x: f64,
    pub y: f64,
    /// Distance to the horizontal edge of the point's half.
    pub eta: f64,
    /// d(x, y)/dξ; column k is the derivative in ξ_k.
    pub jac: [[f64; 2]; 2],
    pub jet: Jet2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IfaceSpec2 {
    /// Curve between regions r−1 and r inside a block.
    Curve { j: usize, half: Half, r: usize },
    /// Vertical edge shared by neighbouring blocks.
    BlockEdge { j: usize, half: Half },
    /// Line between generation j (t=1) and j+1 (t=0), one eighth of a period.
    GenLine { j: usize, half: Half, piece: usize },
    /// Centre line, one eighth of the generation-0 period.
    Center { piece: usize },
    /// Line between generation j0 and the residual layer.
    StripLine { half: Half, piece: usize },
    /// Vertical kink of the residual layer profile.
    StripKink { half: Half, k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IfaceSpecM {
    pub spec: IfaceSpec2,
    pub mult: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IPt2 {
    pub x: f64,
    pub y: f64,
    pub eta: f64,
    /// Tangent d(x, y)/ds.
    pub tangent: [f64; 2],
    pub minus: Jet2,
    pub plus: Jet2,
}

/// Result of [`Branch2D::locate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Loc {
    Strip { half: Half, piece: usize, xl: f64, eta: f64 },
    Block { j: usize, half: Half, r: usize, xl: f64, t: f64 },
}

/// The 2D branching field.
#[derive(Debug, Clone)]
pub struct Branch2D {
    pub plan: BranchPlan2D,
}

impl Branch2D {
    pub fn new(plan: BranchPlan2D) -> Self {
        Self { plan }
    }

    fn tau(&self, j: usize, half: Half) -> f64 {
        half.sign() / self.plan.height(j)
    }

    fn y_of(&self, half: Half, eta: f64) -> f64 {
        match half {
            Half::Top => self.plan.h - eta,
            Half::Bottom => eta,
        }
    }

    /// Jet of region r of generation j at local (x, t).
    pub fn block_jet(&self, j: usize, half: Half, r: usize, x: f64, t: f64) -> Jet2 {
        let ell = self.plan.ell(j);
        let tau = self.tau(j, half);
        let (u, dx, dt) = self.plan.region_jet(r, ell, tau, x, t);
        Jet2 { u, g: [[dx[0], tau * dt[0]], [dx[1], tau * dt[1]]] }
    }

    /// Jet of the residual layer at period-local x and edge distance `eta`.
    pub fn strip_jet(&self, half: Half, piece: usize, x: f64, eta: f64) -> Jet2 {
        let delta = self.plan.strip();
        let lam = eta / delta;
        let (w, dw) = self.plan.fine_profile(x, piece);
        let c = self.plan.profile_component();
        let mut jet = Jet2::default();
        jet.u[c] = lam * w;
        jet.g[c][0] = lam * dw;
        // ∂y = −∂η in the top half.
        jet.g[c][1] = -half.sign() * w / delta;
        jet
    }

    pub fn leaf_specs(&self) -> Vec<LeafSpec2> {
        let p = &self.plan;
        let mut out = Vec::new();
        for half in [Half::Bottom, Half::Top] {
            for j in 0..=p.j0 {
                for r in 0..p.regions() {
                    out.push(LeafSpec2 {
                        spec: Spec2::Block { j, half, r, ta: 0.0, tb: 1.0 },
                        mult: p.blocks(j),
                        tag: Tag::Bulk,
                        affine: p.region_affine(r),
                    });
                }
            }
            for piece in 0..p.strip_breaks().len() - 1 {
                out.push(LeafSpec2 {
                    spec: Spec2::Strip { half, piece },
                    mult: p.blocks(p.j0 + 1),
                    tag: Tag::Cutoff,
                    affine: false,
                });
            }
        }
        out
    }

    pub fn eval_spec(&self, spec: &Spec2, xi: &V3) -> Pt2 {
        let p = &self.plan;
        match *spec {
            Spec2::Block { j, half, r, ta, tb } => {
                let ell = p.ell(j);
                let t = ta + xi[1] * (tb - ta);
                let b = p.bounds(ell, t);
                let (lo, dlo) = b[r];
                let (hi, dhi) = b[r + 1];
                let x = lo + xi[0] * (hi - lo);
                let h = p.height(j);
                let eta = p.eta(j) - t * h;
                let jac = [[hi - lo, (dlo + xi[0] * (dhi - dlo)) * (tb - ta)], [0.0, half.sign() * h * (tb - ta)]];
                Pt2 { x, y: self.y_of(half, eta), eta, jac, jet: self.block_jet(j, half, r, x, t) }
            }
            Spec2::Strip { half, piece } => {
                let br = p.strip_breaks();
                let (lo, hi) = (br[piece], br[piece + 1]);
                let delta = p.strip();
                let x = lo + xi[0] * (hi - lo);
                let eta = delta * (1.0 - xi[1]);
                let jac = [[hi - lo, 0.0], [0.0, half.sign() * delta]];
                Pt2 { x, y: self.y_of(half, eta), eta, jac, jet: self.strip_jet(half, piece, x, eta) }
            }
        }
    }

    pub fn iface_specs(&self) -> Vec<IfaceSpecM> {
        let p = &self.plan;
        let mut out = Vec::new();
        for half in [Half::Bottom, Half::Top] {
            for j in 0..=p.j0 {
                for r in 1..p.regions() {
                    out.push(IfaceSpecM { spec: IfaceSpec2::Curve { j, half, r }, mult: p.blocks(j) });
                }
                out.push(IfaceSpecM { spec: IfaceSpec2::BlockEdge { j, half }, mult: p.blocks(j) - 1.0 });
                let mult = p.blocks(j + 1);
                for piece in 0..8 {
                    let spec = if j < p.j0 {
                        IfaceSpec2::GenLine { j, half, piece }
                    } else {
                        IfaceSpec2::StripLine { half, piece }
                    };
                    out.push(IfaceSpecM { spec, mult });
                }
            }
            for k in 1..p.strip_breaks().len() {
                // The period edge of the one-direction profile carries no kink.
                if p.mode == BranchMode::OneDirection && k == p.strip_breaks().len() - 1 {
                    continue;
                }
                let mult = if k == p.strip_breaks().len() - 1 { p.blocks(p.j0 + 1) - 1.0 } else { p.blocks(p.j0 + 1) };
                out.push(IfaceSpecM { spec: IfaceSpec2::StripKink { half, k }, mult });
            }
        }
        for piece in 0..8 {
            out.push(IfaceSpecM { spec: IfaceSpec2::Center { piece }, mult: p.blocks(0) });
        }
        out
    }

    /// Jets on both sides of an interface at parameter s ∈ [0,1].
    pub fn eval_iface(&self, spec: &IfaceSpec2, s: f64) -> IPt2 {
        let p = &self.plan;
        match *spec {
            IfaceSpec2::Curve { j, half, r } => {
                let ell = p.ell(j);
                let (x, dx) = p.bounds(ell, s)[r];
                let h = p.height(j);
                let eta = p.eta(j) - s * h;
                IPt2 {
                    x,
                    y: self.y_of(half, eta),
                    eta,
                    tangent: [dx, half.sign() * h],
                    minus: self.block_jet(j, half, r - 1, x, s),
                    plus: self.block_jet(j, half, r, x, s),
                }
            }
            IfaceSpec2::BlockEdge { j, half } => {
                let ell = p.ell(j);
                let h = p.height(j);
                let eta = p.eta(j) - s * h;
                IPt2 {
                    x: ell,
                    y: self.y_of(half, eta),
                    eta,
                    tangent: [0.0, half.sign() * h],
                    minus: self.block_jet(j, half, p.regions() - 1, ell, s),
                    plus: self.block_jet(j, half, 0, 0.0, s),
                }
            }
            IfaceSpec2::GenLine { j, half, piece } => {
                let period = p.ell(j + 1);
                let (x, xm) = piece_point(period, piece, s);
                let ra = p.region_at(p.ell(j), xm, 1.0);
                let rb = p.region_at(period, xm, 0.0);
                let eta = p.eta(j + 1);
                IPt2 {
                    x,
                    y: self.y_of(half, eta),
                    eta,
                    tangent: [period / 8.0, 0.0],
                    minus: self.block_jet(j, half, ra, x, 1.0),
                    plus: self.block_jet(j + 1, half, rb, x, 0.0),
                }
            }
            IfaceSpec2::Center { piece } => {
                let period = p.ell(0);
                let (x, xm) = piece_point(period, piece, s);
                let r = p.region_at(period, xm, 0.0);
                IPt2 {
                    x,
                    y: 0.5 * p.h,
                    eta: 0.5 * p.h,
                    tangent: [period / 8.0, 0.0],
                    minus: self.block_jet(0, Half::Bottom, r, x, 0.0),
                    plus: self.block_jet(0, Half::Top, r, x, 0.0),
                }
            }
            IfaceSpec2::StripLine { half, piece } => {
                let period = p.ell(p.j0 + 1);
                let (x, xm) = piece_point(period, piece, s);
                let ra = p.region_at(p.ell(p.j0), xm, 1.0);
                let br = p.strip_breaks();
                let k = (0..br.len() - 1).find(|&k| xm < br[k + 1]).unwrap_or(br.len() - 2);
                let eta = p.strip();
                IPt2 {
                    x,
                    y: self.y_of(half, eta),
                    eta,
                    tangent: [period / 8.0, 0.0],
                    minus: self.block_jet(p.j0, half, ra, x, 1.0),
                    plus: self.strip_jet(half, k, x, eta),
                }
            }
            IfaceSpec2::StripKink { half, k } => {
                let br = p.strip_breaks();
                let x = br[k];
                let delta = p.strip();
                let eta = delta * (1.0 - s);
                let plus = if k == br.len() - 1 { self.strip_jet(half, 0, 0.0, eta) } else { self.strip_jet(half, k, x, eta) };
                IPt2 {
                    x,
                    y: self.y_of(half, eta),
                    eta,
                    tangent: [0.0, half.sign() * delta],
                    minus: self.strip_jet(half, k - 1, x, eta),
                    plus,
                }
            }
        }
    }

    /// Leaf containing the physical point (x, y), with block-local coordinates.
    pub fn locate(&self, x: f64, y: f64) -> Loc {
        let p = &self.plan;
        let x = x.clamp(0.0, p.l);
        let y = y.clamp(0.0, p.h);
        let half = if y >= 0.5 * p.h { Half::Top } else { Half::Bottom };
        let eta = match half {
            Half::Top => p.h - y,
            Half::Bottom => y,
        };
        if eta <= p.strip() {
            let period = p.ell(p.j0 + 1);
            let k = (x / period).floor().min(p.blocks(p.j0 + 1) - 1.0).max(0.0);
            let xl = x - k * period;
            let br = p.strip_breaks();
            let piece = (0..br.len() - 1).find(|&i| xl < br[i + 1]).unwrap_or(br.len() - 2);
            return Loc::Strip { half, piece, xl, eta };
        }
        let mut j = ((eta / (0.5 * p.h)).ln() / p.theta.ln()).floor().max(0.0) as usize;
        j = j.min(p.j0);
        while j > 0 && eta > p.eta(j) {
            j -= 1;
        }
        while j < p.j0 && eta < p.eta(j + 1) {
            j += 1;
        }
        let t = ((p.eta(j) - eta) / p.height(j)).clamp(0.0, 1.0);
        let ell = p.ell(j);
        let k = (x / ell).floor().min(p.blocks(j) - 1.0).max(0.0);
        let xl = x - k * ell;
        Loc::Block { j, half, r: p.region_at(ell, xl, t), xl, t }
    }

    /// Pointwise evaluation in physical coordinates.
    pub fn jet_at(&self, x: f64, y: f64) -> Jet2 {
        match self.locate(x, y) {
            Loc::Strip { half, piece, xl, eta } => self.strip_jet(half, piece, xl, eta),
            Loc::Block { j, half, r, xl, t } => self.block_jet(j, half, r, xl, t),
        }
    }

    /// Assemble the planar field.
    pub fn into_field(self) -> Field {
        let me = Arc::new(self);
        let p = me.plan.clone();
        let leaves = me
            .leaf_specs()
            .into_iter()
            .map(|ls| {
                let m = Arc::clone(&me);
                Leaf::new(
                    2,
                    ls.mult,
                    ls.tag,
                    ls.affine,
                    Embedding::Full,
                    Arc::new(move |xi: &V3| {
                        let q = m.eval_spec(&ls.spec, xi);
                        LeafPoint { x: [q.x, q.y, 0.0], jac: jac2(&q.jac), weight: 1.0, jet: q.jet.to_jet() }
                    }),
                )
            })
            .collect();
        let interfaces = me
            .iface_specs()
            .into_iter()
            .filter(|s| s.mult > 0.0)
            .map(|is| {
                let m = Arc::clone(&me);
                Interface {
                    pdim: 1,
                    mult: is.mult,
                    eval: Arc::new(move |s: &V3| {
                        let q = m.eval_iface(&is.spec, s[0]);
                        IfacePoint {
                            x: [q.x, q.y, 0.0],
                            da: q.tangent[0].hypot(q.tangent[1]),
                            minus: q.minus.to_jet(),
                            plus: q.plus.to_jet(),
                        }
                    }),
                }
            })
            .collect();
        let g = Arc::clone(&me);
        let mut params = BTreeMap::new();
        params.insert("L".into(), p.l);
        params.insert("H".into(), p.h);
        params.insert("N".into(), p.n as f64);
        params.insert("theta".into(), p.theta);
        params.insert("j0".into(), p.j0 as f64);
        Field {
            name: match p.mode {
                BranchMode::OneDirection => "branch2d-one-direction".into(),
                BranchMode::TwoDirections => "branch2d-two-directions".into(),
            },
            dim: 2,
            domain: Domain::Box { lo: [0.0; 3], hi: [p.l, p.h, 0.0], dim: 2 },
            datum: (ZERO3, [0.0; 3]),
            periodic: false,
            leaves,
            interfaces,
            global: Arc::new(move |x: &V3| g.jet_at(x[0], x[1]).to_jet()),
            params,
            wells: match p.mode {
                BranchMode::OneDirection => vec![diag3(&[1.0, 0.0]), diag3(&[-1.0, 0.0])],
                BranchMode::TwoDirections => {
                    let mut a = ZERO3;
                    a[0][1] = 1.0;
                    a[1][0] = 1.0;
                    let mut b = ZERO3;
                    b[0][1] = -1.0;
                    b[1][0] = -1.0;
                    vec![a, b]
                }
            },
        }
    }
}

/// Point at parameter s on the k-th eighth of a period, and that piece's midpoint.
fn piece_point(period: f64, piece: usize, s: f64) -> (f64, f64) {
    let w = period / 8.0;
    (w * (piece as f64 + s), w * (piece as f64 + 0.5))
}

pub(crate) fn jac2(j: &[[f64; 2]; 2]) -> [[f64; 3]; 3] {
    let mut m = ZERO3;
    for a in 0..2 {
        for b in 0..2 {
            m[a][b] = j[a][b];
        }
    }
    m[2][2] = 1.0;
    m
}

/// Two-direction branching with the wells ±(e1⊗e2 + e2⊗e1).
pub fn branch2d_two_dir(plan: BranchPlan2D) -> Result<Field, ConstructionError> {
    if plan.mode != BranchMode::TwoDirections {
        return Err(ConstructionError::Domain("plan mode must be two-directions".into()));
    }
    Ok(Branch2D::new(plan).into_field())
}

/// One-direction branching with wells ±e1⊗e1.
pub fn branch2d_one_dir(plan: BranchPlan2D) -> Result<Field, ConstructionError> {
    if plan.mode != BranchMode::OneDirection {
        return Err(ConstructionError::Domain("plan mode must be one-direction".into()));
    }
    Ok(Branch2D::new(plan).into_field())
}
