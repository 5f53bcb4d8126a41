//! Elastic distance-to-wells energy, surface energies and ε-weighted totals.

use crate::field::{frob, hessian_norm, sub, Field, Jet, Tag, M3};
use crate::quad::{integrate_interface, integrate_leaf, integrate_leaf_adaptive, pairwise_sum, QuadSettings, Rules};
use crate::scalar::Scalar;
use crate::wells::WellFamily;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceMode {
    /// Jumps of ∇u across interfaces plus ∫|∇²u| inside leaves.
    #[default]
    HessianTv,
    /// Perimeter of the nearest-well phases, counted once per indicator.
    PhasePerimeter,
}

/// Diagonal wells of a family as 3×3 matrices; `None` when d > 3.
pub fn family_wells<S: Scalar>(w: &WellFamily<S>) -> Option<Vec<M3>> {
    if w.d > 3 {
        return None;
    }
    Some(w.wells_f64().iter().map(|v| crate::field::diag3(v)).collect())
}

/// Index of the nearest well and the distance to it; ties go to the lowest index.
pub fn nearest_well(e: &M3, wells: &[M3]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (k, w) in wells.iter().enumerate() {
        let d = frob(&sub(e, w));
        if d < best.1 {
            best = (k, d);
        }
    }
    best
}

pub fn dist_to_wells(e: &M3, wells: &[M3]) -> f64 {
    nearest_well(e, wells).1
}

/// Per-leaf integrals: elastic density, Hessian norm, and their error estimates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct LeafEnergy {
    pub elastic: f64,
    pub hessian: f64,
    pub err: f64,
}

/// Multiplicity-weighted leaf integrals in leaf order. Only the elastic density
/// drives adaptive refinement; ∫|∇²u| uses the fixed base order.
pub fn leaf_energies(field: &Field, wells: &[M3], p: f64, s: &QuadSettings) -> Vec<LeafEnergy> {
    let rules = Rules::new();
    field
        .leaves
        .par_iter()
        .map(|leaf| {
            let f = |pt: &crate::field::LeafPoint, _: &crate::field::V3| [dist_to_wells(&pt.jet.strain(), wells).powf(p)];
            let (v, e) = integrate_leaf_adaptive(leaf, &rules, s, &f);
            let h = if leaf.affine {
                0.0
            } else {
                integrate_leaf(leaf, &rules, s.order, |pt, xi| [hessian_norm(&leaf.hessian(xi, pt))])[0]
            };
            LeafEnergy { elastic: leaf.mult * v[0], hessian: leaf.mult * h, err: leaf.mult * e[0] }
        })
        .collect()
}

/// (bulk, cutoff) elastic energy ∫ dist^p(sym∇u, K).
pub fn elastic_energy(field: &Field, wells: &[M3], p: f64, s: &QuadSettings) -> (f64, f64) {
    let le = leaf_energies(field, wells, p, s);
    split_tags(field, &le, |x| x.elastic)
}

fn split_tags(field: &Field, le: &[LeafEnergy], key: impl Fn(&LeafEnergy) -> f64) -> (f64, f64) {
    let pick = |t: Tag| -> Vec<f64> {
        field.leaves.iter().zip(le).filter(|(l, _)| l.tag == t).map(|(_, x)| key(x)).collect()
    };
    (pairwise_sum(&pick(Tag::Bulk)), pairwise_sum(&pick(Tag::Cutoff)))
}

fn jump(a: &Jet, b: &Jet) -> f64 {
    frob(&sub(&a.g, &b.g))
}

/// Interface integrals: ∫|[∇u]| and the measure on which the projected phase changes.
pub fn interface_energies(field: &Field, wells: &[M3], s: &QuadSettings) -> (f64, f64) {
    let rules = Rules::new();
    let n = s.refined;
    let v: Vec<[f64; 2]> = field
        .interfaces
        .par_iter()
        .map(|i| {
            let r = integrate_interface(i, &rules, n, |pt| {
                let j = jump(&pt.minus, &pt.plus);
                let a = nearest_well(&pt.minus.strain(), wells).0;
                let b = nearest_well(&pt.plus.strain(), wells).0;
                [j, if a != b { 1.0 } else { 0.0 }]
            });
            [i.mult * r[0], i.mult * r[1]]
        })
        .collect();
    let jumps: Vec<f64> = v.iter().map(|x| x[0]).collect();
    let phase: Vec<f64> = v.iter().map(|x| x[1]).collect();
    (pairwise_sum(&jumps), pairwise_sum(&phase))
}

/// Surface energy in the given mode. Uses the field's own well set for phases.
pub fn surface_energy(field: &Field, mode: SurfaceMode, s: &QuadSettings) -> f64 {
    let b = total_energy(field, &field.wells, 2.0, 1.0, mode, s);
    b.surface()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub p: f64,
    pub eps: f64,
    pub mode: SurfaceMode,
    pub elastic_bulk: f64,
    pub elastic_cutoff: f64,
    /// Interface part of the Hessian total variation.
    pub surface_jump: f64,
    /// Interior part ∫|∇²u|.
    pub surface_interior: f64,
    /// Σ_j Per(phase j): each phase-changing interface counts twice.
    pub surface_perimeter_of_phases: f64,
    /// Estimated absolute quadrature error of the elastic part.
    pub quad_error: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn elastic(&self) -> f64 {
        self.elastic_bulk + self.elastic_cutoff
    }

    pub fn surface(&self) -> f64 {
        match self.mode {
            SurfaceMode::HessianTv => self.surface_jump + self.surface_interior,
            SurfaceMode::PhasePerimeter => self.surface_perimeter_of_phases,
        }
    }

    pub const CSV_HEADER: &'static str = "construction,eps,p,params,elastic_bulk,elastic_cutoff,surface,total";

    /// CSV row with shortest round-trip float formatting.
    pub fn csv_row(&self, construction: &str, params: &str) -> String {
        format!(
            "{construction},{:e},{},{params},{:e},{:e},{:e},{:e}",
            self.eps,
            self.p,
            self.elastic_bulk,
            self.elastic_cutoff,
            self.surface(),
            self.total
        )
    }
}

pub fn total_energy(field: &Field, wells: &[M3], p: f64, eps: f64, mode: SurfaceMode, s: &QuadSettings) -> EnergyBreakdown {
    let le = leaf_energies(field, wells, p, s);
    let (elastic_bulk, elastic_cutoff) = split_tags(field, &le, |x| x.elastic);
    let (hb, hc) = split_tags(field, &le, |x| x.hessian);
    let errs: Vec<f64> = le.iter().map(|x| x.err).collect();
    let (surface_jump, phase_area) = interface_energies(field, wells, s);
    let mut b = EnergyBreakdown {
        p,
        eps,
        mode,
        elastic_bulk,
        elastic_cutoff,
        surface_jump,
        surface_interior: hb + hc,
        surface_perimeter_of_phases: 2.0 * phase_area,
        quad_error: pairwise_sum(&errs),
        total: 0.0,
    };
    b.total = b.elastic_bulk + b.elastic_cutoff + eps * b.surface();
    b
}

/// Nearest-well census at the quadrature nodes of every leaf.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseIndicator {
    pub wells: Vec<M3>,
    /// Per leaf, the nearest-well index at each node.
    pub indices: Vec<Vec<usize>>,
    /// Volume fraction of each well.
    pub fractions: Vec<f64>,
}

pub fn project_phase(field: &Field, wells: &[M3], order: usize) -> PhaseIndicator {
    let rules = Rules::new();
    let nodes = rules.get(order);
    let per: Vec<(Vec<usize>, Vec<f64>)> = field
        .leaves
        .par_iter()
        .map(|leaf| {
            let k = leaf.pdim;
            let count = nodes.len().pow(k as u32);
            let mut idx = Vec::with_capacity(count);
            let mut vol = vec![0.0; wells.len()];
            for c in 0..count {
                let mut xi = [0.5; 3];
                let mut w = 1.0;
                let mut rem = c;
                for x in xi.iter_mut().take(k) {
                    let (t, wt) = nodes[rem % nodes.len()];
                    rem /= nodes.len();
                    *x = t;
                    w *= wt;
                }
                let pt = leaf.point(&xi);
                let i = nearest_well(&pt.jet.strain(), wells).0;
                idx.push(i);
                vol[i] += w * leaf.dv(&pt) * leaf.mult;
            }
            (idx, vol)
        })
        .collect();
    let total: Vec<f64> = (0..wells.len())
        .map(|k| pairwise_sum(&per.iter().map(|(_, v)| v[k]).collect::<Vec<_>>()))
        .collect();
    let sum: f64 = total.iter().sum();
    PhaseIndicator {
        wells: wells.to_vec(),
        indices: per.into_iter().map(|(i, _)| i).collect(),
        fractions: total.iter().map(|v| v / sum).collect(),
    }
}

/// ∫ |sym∇u − χ|^p for an arbitrary wells-valued indicator `choose(leaf, node)`.
pub fn indicator_energy(field: &Field, wells: &[M3], p: f64, order: usize, choose: impl Fn(usize, usize) -> usize + Sync) -> f64 {
    let rules = Rules::new();
    let v: Vec<f64> = field
        .leaves
        .iter()
        .enumerate()
        .map(|(li, leaf)| {
            let counter = std::cell::Cell::new(0usize);
            leaf.mult
                * integrate_leaf(leaf, &rules, order, |pt, _| {
                    let c = counter.get();
                    counter.set(c + 1);
                    [frob(&sub(&pt.jet.strain(), &wells[choose(li, c)])).powf(p)]
                })[0]
        })
        .collect();
    pairwise_sum(&v)
}

/// ∫ |∂_j u_i|^q over all leaves, as a 3×3 table.
pub fn component_norms(field: &Field, q: f64, s: &QuadSettings) -> M3 {
    let rules = Rules::new();
    let per: Vec<[f64; 9]> = field
        .leaves
        .par_iter()
        .map(|leaf| {
            let f = |pt: &crate::field::LeafPoint, _: &crate::field::V3| -> [f64; 9] {
                std::array::from_fn(|k| pt.jet.g[k / 3][k % 3].abs().powf(q))
            };
            integrate_leaf_adaptive(leaf, &rules, s, &f).0.map(|v| v * leaf.mult)
        })
        .collect();
    let mut out = [[0.0; 3]; 3];
    for k in 0..9 {
        out[k / 3][k % 3] = pairwise_sum(&per.iter().map(|v| v[k]).collect::<Vec<_>>());
    }
    out
}
