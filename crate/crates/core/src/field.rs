//! Piecewise-smooth displacement fields stored as leaf blocks with closed-form
//! local evaluators, plus interfaces carrying both one-sided gradients.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub type V3 = [f64; 3];
pub type M3 = [[f64; 3]; 3];

pub const ZERO3: M3 = [[0.0; 3]; 3];

/// Displacement and gradient at a point; `g[i][j] = ∂_j u_i`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub u: V3,
    pub g: M3,
}

impl Jet {
    pub fn strain(&self) -> M3 {
        sym(&self.g)
    }
}

pub fn sym(g: &M3) -> M3 {
    let mut e = ZERO3;
    for i in 0..3 {
        for j in 0..3 {
            e[i][j] = 0.5 * (g[i][j] + g[j][i]);
        }
    }
    e
}

pub fn frob(a: &M3) -> f64 {
    a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn sub(a: &M3, b: &M3) -> M3 {
    let mut c = ZERO3;
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[i][j] - b[i][j];
        }
    }
    c
}

pub fn matmul(a: &M3, b: &M3) -> M3 {
    let mut c = ZERO3;
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn transpose(a: &M3) -> M3 {
    let mut c = ZERO3;
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[j][i];
        }
    }
    c
}

pub fn matvec(a: &M3, v: &V3) -> V3 {
    [0, 1, 2].map(|i| (0..3).map(|k| a[i][k] * v[k]).sum())
}

pub fn diag3(d: &[f64]) -> M3 {
    let mut m = ZERO3;
    for (i, v) in d.iter().enumerate().take(3) {
        m[i][i] = *v;
    }
    m
}

/// Determinant of the leading `k×k` block.
pub fn det_k(a: &M3, k: usize) -> f64 {
    match k {
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        _ => {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        }
    }
}

/// Inverse of the leading `k×k` block, zero elsewhere.
pub fn inv_k(a: &M3, k: usize) -> M3 {
    let mut r = ZERO3;
    match k {
        1 => r[0][0] = 1.0 / a[0][0],
        2 => {
            let d = det_k(a, 2);
            r[0][0] = a[1][1] / d;
            r[0][1] = -a[0][1] / d;
            r[1][0] = -a[1][0] / d;
            r[1][1] = a[0][0] / d;
        }
        _ => {
            let d = det_k(a, 3);
            for i in 0..3 {
                for j in 0..3 {
                    let (i1, i2) = ((j + 1) % 3, (j + 2) % 3);
                    let (j1, j2) = ((i + 1) % 3, (i + 2) % 3);
                    r[i][j] = (a[i1][j1] * a[i2][j2] - a[i1][j2] * a[i2][j1]) / d;
                }
            }
        }
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum Tag {
    Bulk,
    Cutoff,
}

/// Evaluation of a leaf at a reference point ξ ∈ [0,1]^k.
#[derive(Debug, Clone, Copy, Default)]
pub struct LeafPoint {
    /// Physical position (approximate for very fine blocks).
    pub x: V3,
    /// dx/dξ; column k is ∂x/∂ξ_k.
    pub jac: M3,
    /// Additional measure factor (2πr for revolved leaves, extrusion length).
    pub weight: f64,
    pub jet: Jet,
}

pub type LeafFn = Arc<dyn Fn(&V3) -> LeafPoint + Send + Sync>;

/// How the reference dimension relates to the physical one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Embedding {
    /// Parameter dimension equals physical dimension.
    Full,
    /// Meridian leaf of a rotationally symmetric field; ξ is 2D, space is 3D.
    Revolved,
    /// Field constant along one direction over the leaf; ξ is 2D and column 2
    /// of the Jacobian holds the extrusion vector.
    Extruded,
}

#[derive(Clone)]
pub struct Leaf {
    pub pdim: usize,
    pub mult: f64,
    pub tag: Tag,
    /// Affine leaves have zero Hessian and skip finite differencing.
    pub affine: bool,
    pub embedding: Embedding,
    pub eval: LeafFn,
    /// Optional change of frame û(y) = S u(Sᵀy) applied on top of `eval`.
    pub frame: Option<M3>,
}

impl fmt::Debug for Leaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Leaf")
            .field("pdim", &self.pdim)
            .field("mult", &self.mult)
            .field("tag", &self.tag)
            .field("affine", &self.affine)
            .field("embedding", &self.embedding)
            .finish()
    }
}

impl Leaf {
    pub fn new(pdim: usize, mult: f64, tag: Tag, affine: bool, embedding: Embedding, eval: LeafFn) -> Self {
        Self { pdim, mult, tag, affine, embedding, eval, frame: None }
    }

    /// Evaluate at ξ in the leaf's frame.
    pub fn point(&self, xi: &V3) -> LeafPoint {
        let p = (self.eval)(xi);
        match &self.frame {
            None => p,
            Some(s) => frame_point(s, &p),
        }
    }

    /// Volume element |det(dx/dξ)|·weight.
    pub fn dv(&self, p: &LeafPoint) -> f64 {
        det_k(&p.jac, self.jac_dim()).abs() * p.weight
    }

    /// Size of the leading Jacobian block that maps to physical space.
    fn jac_dim(&self) -> usize {
        match self.embedding {
            Embedding::Full => self.pdim,
            Embedding::Revolved => 2,
            Embedding::Extruded => 3,
        }
    }

    /// Physical gradient of ∇u, as `h[i][j][k] = ∂_k ∂_j u_i`, by central
    /// differences of the analytic gradient in reference coordinates.
    pub fn hessian(&self, xi: &V3, p: &LeafPoint) -> [[[f64; 3]; 3]; 3] {
        if self.affine {
            return [[[0.0; 3]; 3]; 3];
        }
        match &self.frame {
            None => self.raw_hessian(xi, p),
            Some(s) => {
                let h = self.raw_hessian(xi, &(self.eval)(xi));
                // ∂_y(S G Sᵀ) with ∂x/∂y = Sᵀ.
                let mut out = [[[0.0; 3]; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        for m in 0..3 {
                            let mut acc = 0.0;
                            for a in 0..3 {
                                for b in 0..3 {
                                    let sab = s[i][a] * s[j][b];
                                    if sab != 0.0 {
                                        acc += sab * (0..3).map(|c| h[a][b][c] * s[m][c]).sum::<f64>();
                                    }
                                }
                            }
                            out[i][j][m] = acc;
                        }
                    }
                }
                out
            }
        }
    }

    fn raw_hessian(&self, xi: &V3, p: &LeafPoint) -> [[[f64; 3]; 3]; 3] {
        let mut h = [[[0.0; 3]; 3]; 3];
        let k = self.pdim;
        let step = 1e-5;
        let mut dxi = [ZERO3; 3];
        for (a, d) in dxi.iter_mut().enumerate().take(k) {
            let mut xp = *xi;
            let mut xm = *xi;
            xp[a] += step;
            xm[a] -= step;
            let gp = (self.eval)(&xp).jet.g;
            let gm = (self.eval)(&xm).jet.g;
            for i in 0..3 {
                for j in 0..3 {
                    d[i][j] = (gp[i][j] - gm[i][j]) / (2.0 * step);
                }
            }
        }
        let kd = self.jac_dim();
        let jinv = inv_k(&p.jac, kd);
        // ∂_x G = Σ_a ∂_ξa G · (J⁻¹)_{a m}
        for i in 0..3 {
            for j in 0..3 {
                for m in 0..kd {
                    h[i][j][m] = (0..k).map(|a| dxi[a][i][j] * jinv[a][m]).sum();
                }
            }
        }
        if self.embedding == Embedding::Revolved {
            // Azimuthal derivative at φ = 0: (ΩG − GΩ)/r with Ω the (2,3) rotation generator.
            let g = &p.jet.g;
            let r = p.x[1];
            let omega = [[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]];
            let og = matmul(&omega, g);
            let go = matmul(g, &omega);
            for i in 0..3 {
                for j in 0..3 {
                    h[i][j][2] = (og[i][j] - go[i][j]) / r;
                }
            }
        }
        h
    }
}

/// Point seen through û(y) = S u(Sᵀy): y = S⁻ᵀx, ∇û = S ∇u Sᵀ.
/// The Jacobian keeps the original frame; the weight absorbs |det S|⁻¹.
pub fn frame_point(s: &M3, p: &LeafPoint) -> LeafPoint {
    let sit = transpose(&inv_k(s, 3));
    LeafPoint {
        x: matvec(&sit, &p.x),
        jac: p.jac,
        weight: p.weight / det_k(s, 3).abs(),
        jet: frame_jet(s, &p.jet),
    }
}

pub fn frame_jet(s: &M3, j: &Jet) -> Jet {
    Jet { u: matvec(s, &j.u), g: matmul(&matmul(s, &j.g), &transpose(s)) }
}

pub fn hessian_norm(h: &[[[f64; 3]; 3]; 3]) -> f64 {
    h.iter().flatten().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

/// Evaluation of an interface at a reference point s ∈ [0,1]^{k}.
#[derive(Debug, Clone, Copy, Default)]
pub struct IfacePoint {
    pub x: V3,
    /// Area element with respect to the reference measure.
    pub da: f64,
    pub minus: Jet,
    pub plus: Jet,
}

pub type IfaceFn = Arc<dyn Fn(&V3) -> IfacePoint + Send + Sync>;

#[derive(Clone)]
pub struct Interface {
    pub pdim: usize,
    pub mult: f64,
    pub eval: IfaceFn,
}

impl fmt::Debug for Interface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Interface").field("pdim", &self.pdim).field("mult", &self.mult).finish()
    }
}

/// Geometric domain of a field.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Box { lo: V3, hi: V3, dim: usize },
    /// (0, length) × B_radius(0) with axis e1.
    Cylinder { length: f64, radius: f64 },
    /// Image y = S x of another domain.
    Image { inner: Box<Domain>, s: M3 },
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Box { dim, .. } => *dim,
            Domain::Cylinder { .. } => 3,
            Domain::Image { inner, .. } => inner.dim(),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Domain::Box { lo, hi, dim } => (0..*dim).map(|i| hi[i] - lo[i]).product(),
            Domain::Cylinder { length, radius } => std::f64::consts::PI * radius * radius * length,
            Domain::Image { inner, s } => inner.volume() * det_k(s, inner.dim()).abs(),
        }
    }

    pub fn contains(&self, x: &V3) -> bool {
        match self {
            Domain::Box { lo, hi, dim } => (0..*dim).all(|i| x[i] > lo[i] && x[i] < hi[i]),
            Domain::Cylinder { length, radius } => x[0] > 0.0 && x[0] < *length && x[1].hypot(x[2]) < *radius,
            Domain::Image { inner, s } => inner.contains(&matvec(&inv_k(s, inner.dim()), x)),
        }
    }

    /// Deterministic boundary samples (about `n` points).
    pub fn boundary_samples(&self, n: usize) -> Vec<V3> {
        match self {
            Domain::Box { lo, hi, dim } if *dim == 2 => {
                let per = n.div_ceil(4).max(1);
                let mut out = Vec::new();
                for k in 0..per {
                    let s = (k as f64 + 0.5) / per as f64;
                    let x = lo[0] + s * (hi[0] - lo[0]);
                    let y = lo[1] + s * (hi[1] - lo[1]);
                    out.extend([[x, lo[1], 0.0], [x, hi[1], 0.0], [lo[0], y, 0.0], [hi[0], y, 0.0]]);
                }
                out
            }
            Domain::Box { lo, hi, .. } => {
                let per_face = n.div_ceil(6).max(1);
                let side = (per_face as f64).sqrt().ceil() as usize;
                let mut out = Vec::new();
                for axis in 0..3 {
                    let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
                    for face in [lo[axis], hi[axis]] {
                        for i in 0..side {
                            for j in 0..side {
                                let mut x = [0.0; 3];
                                x[axis] = face;
                                x[a] = lo[a] + (i as f64 + 0.5) / side as f64 * (hi[a] - lo[a]);
                                x[b] = lo[b] + (j as f64 + 0.5) / side as f64 * (hi[b] - lo[b]);
                                out.push(x);
                            }
                        }
                    }
                }
                out
            }
            Domain::Cylinder { length, radius } => {
                let lateral = n / 2;
                let caps = n - lateral;
                let mut out = Vec::new();
                let side = (lateral as f64).sqrt().ceil() as usize;
                for i in 0..side {
                    for j in 0..side {
                        let x1 = (i as f64 + 0.5) / side as f64 * length;
                        let phi = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / side as f64;
                        out.push([x1, radius * phi.cos(), radius * phi.sin()]);
                    }
                }
                let cs = ((caps / 2) as f64).sqrt().ceil() as usize;
                for end in [0.0, *length] {
                    for i in 0..cs {
                        for j in 0..cs {
                            let r = radius * (i as f64 + 0.5) / cs as f64;
                            let phi = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / cs as f64;
                            out.push([end, r * phi.cos(), r * phi.sin()]);
                        }
                    }
                }
                out
            }
            Domain::Image { inner, s } => inner.boundary_samples(n).iter().map(|x| matvec(s, x)).collect(),
        }
    }

    pub fn bbox(&self) -> (V3, V3) {
        match self {
            Domain::Box { lo, hi, .. } => (*lo, *hi),
            Domain::Cylinder { length, radius } => ([0.0, -radius, -radius], [*length, *radius, *radius]),
            Domain::Image { inner, s } => {
                let (lo, hi) = inner.bbox();
                let mut a = [f64::INFINITY; 3];
                let mut b = [f64::NEG_INFINITY; 3];
                for c in 0..8 {
                    let x = [0, 1, 2].map(|i| if c >> i & 1 == 1 { hi[i] } else { lo[i] });
                    let y = matvec(s, &x);
                    for i in 0..3 {
                        a[i] = a[i].min(y[i]);
                        b[i] = b[i].max(y[i]);
                    }
                }
                (a, b)
            }
        }
    }
}

pub type GlobalFn = Arc<dyn Fn(&V3) -> Jet + Send + Sync>;

/// A constructed displacement together with its block decomposition.
#[derive(Clone)]
pub struct Field {
    pub name: String,
    pub dim: usize,
    pub domain: Domain,
    /// Boundary datum u = F x + b.
    pub datum: (M3, V3),
    pub periodic: bool,
    pub leaves: Vec<Leaf>,
    pub interfaces: Vec<Interface>,
    /// Pointwise evaluator in physical coordinates.
    pub global: GlobalFn,
    /// Construction parameters for reporting.
    pub params: BTreeMap<String, f64>,
    /// Well set the construction is designed for.
    pub wells: Vec<M3>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("leaves", &self.leaves.len())
            .field("interfaces", &self.interfaces.len())
            .field("params", &self.params)
            .finish()
    }
}

impl Field {
    pub fn jet(&self, x: &V3) -> Jet {
        (self.global)(x)
    }

    pub fn datum_at(&self, x: &V3) -> V3 {
        let fx = matvec(&self.datum.0, x);
        [0, 1, 2].map(|i| fx[i] + self.datum.1[i])
    }

    /// Largest deviation of the trace from the datum over boundary samples.
    pub fn trace_error(&self, n: usize) -> f64 {
        self.domain
            .boundary_samples(n)
            .iter()
            .map(|x| {
                let u = self.jet(x).u;
                let d = self.datum_at(x);
                (0..3).map(|i| (u[i] - d[i]).abs()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Sum of multiplicity-weighted leaf volumes.
    pub fn leaf_volume(&self) -> f64 {
        let rules = crate::quad::Rules::new();
        self.leaves
            .iter()
            .map(|l| l.mult * crate::quad::integrate_leaf(l, &rules, 6, |_, _| [1.0])[0])
            .sum()
    }

    pub fn with_wells(mut self, wells: Vec<M3>) -> Self {
        self.wells = wells;
        self
    }

    /// Samples at the centres of an n^dim grid over the bounding box, skipping
    /// points outside the domain. Strain is sym∇u; `well` is the nearest well
    /// index (−1 when the field carries no wells).
    pub fn grid_csv(&self, n: usize) -> String {
        use std::fmt::Write as _;
        let d = self.dim;
        let axes = ["x", "y", "z"];
        let mut cols: Vec<String> = axes[..d].iter().map(|a| a.to_string()).collect();
        cols.extend(axes[..d].iter().map(|a| format!("u_{a}")));
        for i in 0..d {
            for j in i..d {
                cols.push(format!("e_{}{}", axes[i], axes[j]));
            }
        }
        cols.push("well".into());
        let mut out = format!("# {}: u in domain length units, e = sym grad u (dimensionless)\n{}\n", self.name, cols.join(","));
        let (lo, hi) = self.domain.bbox();
        let total = n.pow(d as u32);
        for k in 0..total {
            let mut x = [0.0; 3];
            let mut r = k;
            // Last axis varies fastest.
            for a in (0..d).rev() {
                x[a] = lo[a] + (hi[a] - lo[a]) * ((r % n) as f64 + 0.5) / n as f64;
                r /= n;
            }
            if !self.domain.contains(&x) {
                continue;
            }
            let jet = self.jet(&x);
            let e = jet.strain();
            let mut row: Vec<String> = x[..d].iter().map(|v| format!("{v:e}")).collect();
            row.extend(jet.u[..d].iter().map(|v| format!("{v:e}")));
            for i in 0..d {
                for j in i..d {
                    row.push(format!("{:e}", e[i][j]));
                }
            }
            let well = if self.wells.is_empty() { -1 } else { crate::energy::nearest_well(&e, &self.wells).0 as i64 };
            row.push(well.to_string());
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn summary_json(&self) -> serde_json::Value {
        let bulk = self.leaves.iter().filter(|l| l.tag == Tag::Bulk).count();
        serde_json::json!({
            "name": self.name,
            "dim": self.dim,
            "leaves": self.leaves.len(),
            "bulk_leaves": bulk,
            "cutoff_leaves": self.leaves.len() - bulk,
            "interfaces": self.interfaces.len(),
            "params": self.params,
        })
    }
}

/// Constant-gradient field u = F x + b on a box, with no interfaces.
pub fn affine_field(f: M3, b: V3, lo: V3, hi: V3, dim: usize) -> Field {
    let jet = move |x: &V3| {
        let fx = matvec(&f, x);
        Jet { u: [0, 1, 2].map(|i| fx[i] + b[i]), g: f }
    };
    let eval: LeafFn = Arc::new(move |xi: &V3| {
        let mut x = [0.0; 3];
        let mut jac = ZERO3;
        for i in 0..dim {
            x[i] = lo[i] + xi[i] * (hi[i] - lo[i]);
            jac[i][i] = hi[i] - lo[i];
        }
        LeafPoint { x, jac, weight: 1.0, jet: jet(&x) }
    });
    Field {
        name: "affine".into(),
        dim,
        domain: Domain::Box { lo, hi, dim },
        datum: (f, b),
        periodic: false,
        leaves: vec![Leaf::new(dim, 1.0, Tag::Bulk, true, Embedding::Full, eval)],
        interfaces: vec![],
        global: Arc::new(jet),
        params: BTreeMap::new(),
        wells: Vec::new(),
    }
}
