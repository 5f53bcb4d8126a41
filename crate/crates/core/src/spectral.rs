//! Fourier-series diagnostics for phase indicators.
//!
//! Coefficients are series coefficients on a periodic box: ĉ(k) = n^{−d} Σ c(x) e^{−2πi k·x/L}.
//! Physical frequencies are ξ_i = k_i / L_i, and every form is reported as an integral over
//! the box, i.e. volume × Σ_ξ.

use crate::constructions::profile::psi;
use crate::energy::nearest_well;
use crate::field::{Field, M3, V3};
use crate::quad::pairwise_sum;
use crate::wells::{CompatSpace, WellFamily};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("grid side must be a power of two, got {0}")]
    GridSide(usize),
    #[error("grid has {got} samples, expected {expected}")]
    GridSize { got: usize, expected: usize },
    #[error("dimension must be 1, 2 or 3, got {0}")]
    Dim(usize),
    #[error("the zero frequency has no minimiser")]
    ZeroFrequency,
    #[error("level {0} outside the family")]
    Level(usize),
}

/// Upper-triangle order of the six symmetric components.
pub const SYM: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

/// Complex symmetric 3×3 matrix stored as the six upper entries.
pub type CSym = [C64; 6];

fn sym_get(c: &CSym, i: usize, j: usize) -> C64 {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    c[SYM.iter().position(|&p| p == (a, b)).unwrap()]
}

fn sym_norm2(c: &CSym) -> f64 {
    c[..3].iter().map(|z| z.norm_sqr()).sum::<f64>() + 2.0 * c[3..].iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// Fourier coefficients of χ̃ = χ − F on an n^d grid.
#[derive(Debug, Clone)]
pub struct SpectralField {
    pub d: usize,
    pub n: usize,
    pub lengths: V3,
    /// Coefficients in FFT order (index 0 is the zero mode, already shifted by F).
    pub coeffs: Vec<CSym>,
    pub datum: M3,
}

impl SpectralField {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Truncation radius |k|_∞ ≤ n/2.
    pub fn radius(&self) -> usize {
        self.n / 2
    }

    pub fn volume(&self) -> f64 {
        self.lengths[..self.d].iter().product()
    }

    /// Integer lattice vector of a flat index (last axis fastest).
    pub fn lattice(&self, idx: usize) -> [i64; 3] {
        lattice_of(idx, self.n, self.d)
    }

    /// Physical frequency ξ_i = k_i / L_i.
    pub fn frequency(&self, idx: usize) -> V3 {
        let k = self.lattice(idx);
        [0, 1, 2].map(|i| if i < self.d { k[i] as f64 / self.lengths[i] } else { 0.0 })
    }

    /// Flat index of −k.
    pub fn mirror(&self, idx: usize) -> usize {
        let k = self.lattice(idx);
        let n = self.n as i64;
        let mut out = 0usize;
        for &ki in k.iter().take(self.d) {
            out = out * self.n + (-ki).rem_euclid(n) as usize;
        }
        out
    }

    /// Largest |ĉ(−k) − conj ĉ(k)| over the lattice.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                let (a, b) = (&self.coeffs[i], &self.coeffs[self.mirror(i)]);
                (0..6).map(|c| (b[c] - a[c].conj()).norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Σ|ĉ|² (mean of |χ̃|² by Parseval).
    pub fn mass(&self) -> f64 {
        pairwise_sum(&self.coeffs.iter().map(sym_norm2).collect::<Vec<_>>())
    }
}

fn lattice_of(idx: usize, n: usize, d: usize) -> [i64; 3] {
    let mut k = [0i64; 3];
    let mut rem = idx;
    for a in (0..d).rev() {
        let m = (rem % n) as i64;
        rem /= n;
        k[a] = if m >= (n / 2) as i64 { m - n as i64 } else { m };
    }
    k
}

/// In-place forward DFT along every axis of an n^d array (last axis fastest).
pub fn fftn(data: &mut [C64], n: usize, d: usize) {
    let fft = FftPlanner::new().plan_fft_forward(n);
    let total = data.len();
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let mut line = vec![C64::new(0.0, 0.0); n];
        for start in 0..total {
            // Visit each line once, from the element whose axis coordinate is zero.
            if (start / stride) % n != 0 {
                continue;
            }
            for (t, v) in line.iter_mut().enumerate() {
                *v = data[start + t * stride];
            }
            fft.process(&mut line);
            for (t, v) in line.iter().enumerate() {
                data[start + t * stride] = *v;
            }
        }
    }
}

fn check_grid(n: usize, d: usize, len: usize) -> Result<(), SpectralError> {
    if !(1..=3).contains(&d) {
        return Err(SpectralError::Dim(d));
    }
    if !n.is_power_of_two() {
        return Err(SpectralError::GridSide(n));
    }
    let expected = n.pow(d as u32);
    if len != expected {
        return Err(SpectralError::GridSize { got: len, expected });
    }
    Ok(())
}

/// Series coefficients of a real scalar grid.
fn transform_scalar(values: impl Iterator<Item = f64>, n: usize, d: usize) -> Vec<C64> {
    let mut buf: Vec<C64> = values.map(|v| C64::new(v, 0.0)).collect();
    fftn(&mut buf, n, d);
    let scale = 1.0 / buf.len() as f64;
    buf.iter_mut().for_each(|z| *z *= scale);
    buf
}

/// Fourier coefficients of χ − F from samples of χ on a uniform periodic grid.
pub fn analyze_phase(chi: &[M3], n: usize, d: usize, lengths: V3, datum: M3) -> Result<SpectralField, SpectralError> {
    check_grid(n, d, chi.len())?;
    let comps: Vec<Vec<C64>> = SYM.iter().map(|&(i, j)| transform_scalar(chi.iter().map(|m| m[i][j]), n, d)).collect();
    let mut coeffs: Vec<CSym> = (0..chi.len()).map(|k| std::array::from_fn(|c| comps[c][k])).collect();
    for (c, &(i, j)) in SYM.iter().enumerate() {
        coeffs[0][c] -= datum[i][j];
    }
    Ok(SpectralField { d, n, lengths, coeffs, datum })
}

/// Per-frequency minimum for a diagonal coefficient, in summand form.
pub fn diagonal_summand(chi: &[C64], xi: &[f64]) -> f64 {
    let d = chi.len();
    let n2: f64 = xi.iter().map(|x| x * x).sum();
    let h: Vec<f64> = xi.iter().map(|x| x * x / n2).collect();
    let mut pairs = 0.0;
    let mut triples = 0.0;
    for i in 0..d {
        for j in i + 1..d {
            pairs += (chi[j] * h[i] + chi[i] * h[j]).norm_sqr();
        }
        for j in 0..d {
            for k in 0..d {
                if j != i && k != i && k != j {
                    triples += h[k] * h[j] * chi[i].norm_sqr();
                }
            }
        }
    }
    pairs + triples
}

/// Per-frequency minimum |ξ̂·χ̂ξ̂|² + |χ̂|² − 2|χ̂ξ̂|² for a symmetric coefficient.
pub fn full_summand(chi: &CSym, xi: &V3, d: usize) -> f64 {
    let n = xi[..d].iter().map(|x| x * x).sum::<f64>().sqrt();
    let e: Vec<f64> = xi[..d].iter().map(|x| x / n).collect();
    let ce: Vec<C64> = (0..d).map(|i| (0..d).map(|j| sym_get(chi, i, j) * e[j]).sum()).collect();
    let ece: C64 = (0..d).map(|i| ce[i] * e[i]).sum();
    let norm2: f64 = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| sym_get(chi, i, j).norm_sqr()).sum();
    let ce2: f64 = ce.iter().map(|z| z.norm_sqr()).sum();
    // Cancellation can leave a tiny negative value for compatible modes.
    (ece.norm_sqr() + norm2 - 2.0 * ce2).max(0.0)
}

/// Closed-form minimiser v̂* and value of |2π v̂ ⊙ iξ − χ̂|² over v̂ ∈ C^d.
pub fn per_frequency_min(chi: &CSym, xi: &V3, d: usize) -> Result<(f64, [C64; 3]), SpectralError> {
    let n2: f64 = xi[..d].iter().map(|x| x * x).sum();
    if n2 == 0.0 {
        return Err(SpectralError::ZeroFrequency);
    }
    let cx: Vec<C64> = (0..d).map(|i| (0..d).map(|j| sym_get(chi, i, j) * xi[j]).sum()).collect();
    let xcx: C64 = (0..d).map(|i| cx[i] * xi[i]).sum();
    let i = C64::new(0.0, 1.0);
    let mut v = [C64::new(0.0, 0.0); 3];
    for k in 0..d {
        v[k] = i * (xcx * xi[k] / (2.0 * PI * n2 * n2) - cx[k] / (PI * n2));
    }
    Ok((full_summand(chi, xi, d), v))
}

/// |2π v̂ ⊙ iξ − χ̂|², the quantity minimised per frequency.
pub fn frequency_residual(chi: &CSym, v: &[C64; 3], xi: &V3, d: usize) -> f64 {
    let i = C64::new(0.0, 1.0);
    let mut s = 0.0;
    for a in 0..d {
        for b in 0..d {
            let g = i * PI * (v[a] * xi[b] + v[b] * xi[a]);
            s += (g - sym_get(chi, a, b)).norm_sqr();
        }
    }
    s
}

/// Lower form from the diagonal entries: summand families over ξ ≠ 0 plus the zero mode.
pub fn elastic_lower_form(s: &SpectralField) -> f64 {
    let terms: Vec<f64> = (0..s.len())
        .into_par_iter()
        .map(|k| {
            let c = &s.coeffs[k];
            let diag: Vec<C64> = c[..s.d].to_vec();
            if k == 0 {
                diag.iter().map(|z| z.norm_sqr()).sum()
            } else {
                diagonal_summand(&diag, &s.frequency(k)[..s.d])
            }
        })
        .collect();
    s.volume() * pairwise_sum(&terms)
}

/// Lower form for full symmetric coefficients (agrees with [`elastic_lower_form`] when χ̃ is diagonal).
pub fn elastic_lower_form_full(s: &SpectralField) -> f64 {
    let terms: Vec<f64> = (0..s.len())
        .into_par_iter()
        .map(|k| if k == 0 { sym_norm2(&s.coeffs[0]) } else { full_summand(&s.coeffs[k], &s.frequency(k), s.d) })
        .collect();
    s.volume() * pairwise_sum(&terms)
}

/// Cone C_{V,κ,μ} with its smooth multiplier.
#[derive(Debug, Clone)]
pub struct ConeSpec {
    pub level: usize,
    pub space: CompatSpace,
    pub kappa: f64,
    pub mu: f64,
}

impl ConeSpec {
    pub fn for_level(w: &WellFamily<f64>, level: usize, kappa: f64, mu: f64) -> Result<Self, SpectralError> {
        if level == 0 || level > w.m() {
            return Err(SpectralError::Level(level));
        }
        Ok(Self { level, space: w.spaces[level - 1].clone(), kappa, mu })
    }

    /// dist(ξ̂, V); zero at ξ = 0.
    pub fn angle(&self, xi: &[f64]) -> f64 {
        let n = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n == 0.0 {
            return 0.0;
        }
        self.space.distance(&xi.iter().map(|x| x / n).collect::<Vec<_>>())
    }

    /// 1 on C_{κ,μ}, 0 outside C_{2κ,2μ}, smooth in between.
    pub fn multiplier(&self, xi: &[f64]) -> f64 {
        let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        let radial = 1.0 - psi(r / self.mu - 1.0);
        let angular = 1.0 - psi(self.angle(xi) / self.kappa - 1.0);
        radial * angular
    }
}

pub fn cone_multiplier(s: &SpectralField, cone: &ConeSpec) -> SpectralField {
    let mut out = s.clone();
    for (k, c) in out.coeffs.iter_mut().enumerate() {
        let m = cone.multiplier(&s.frequency(k)[..s.d]);
        c.iter_mut().for_each(|z| *z *= m);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoercivityReport {
    pub level: usize,
    pub coordinate: usize,
    pub power: i32,
    pub kappa: f64,
    pub mu: f64,
    /// W = Σ_{ξ≠0} dist(ξ̂,V)^power |χ̂_ll|².
    pub weighted: f64,
    /// M_κ = Σ_{dist>κ} |χ̂_ll|².
    pub complement: f64,
    /// Σ_{dist>κ} κ^power |χ̂_ll|², summed term by term in the same order as the matching part of W.
    pub complement_scaled: f64,
    /// Σ_{|ξ|≥μ} |χ̂_ll|².
    pub high: f64,
    /// κ^power·M_κ ≤ W, decided without tolerance.
    pub holds: bool,
}

/// Weighted, complement and high-frequency masses of the level-i coordinate.
pub fn coercivity_diagnostics(s: &SpectralField, w: &WellFamily<f64>, level: usize, kappa: f64, mu: f64) -> Result<CoercivityReport, SpectralError> {
    let cone = ConeSpec::for_level(w, level, kappa, mu)?;
    let l = w.l[level - 1] - 1;
    let power = if w.signature.at(level) == 1 { 4 } else { 2 };
    let kp = kappa.powi(power);
    let (mut inner, mut outer, mut scaled, mut mass, mut high) = (vec![], vec![], vec![], vec![], vec![]);
    for k in 1..s.len() {
        let xi = s.frequency(k);
        let a = s.coeffs[k][l].norm_sqr();
        let dist = cone.angle(&xi[..s.d]);
        let dp = dist.powi(power);
        // FP multiplication and addition are monotone, so termwise dp ≥ κ^p carries over to the sums.
        if dist > kappa {
            outer.push(dp * a);
            scaled.push(kp * a);
            mass.push(a);
        } else {
            inner.push(dp * a);
        }
        if xi[..s.d].iter().map(|x| x * x).sum::<f64>().sqrt() >= mu {
            high.push(a);
        }
    }
    let (wo, sc) = (pairwise_sum(&outer), pairwise_sum(&scaled));
    let weighted = wo + pairwise_sum(&inner);
    Ok(CoercivityReport {
        level,
        coordinate: l + 1,
        power,
        kappa,
        mu,
        weighted,
        complement: pairwise_sum(&mass),
        complement_scaled: sc,
        high: pairwise_sum(&high),
        holds: sc <= wo && wo <= weighted,
    })
}

/// Mass of the level-l coordinate bucketed by dist(ξ̂,V) and |ξ|, as CSV rows.
pub fn mass_buckets_csv(s: &SpectralField, cone: &ConeSpec, coordinate: usize, dist_bins: usize, radius_bins: usize) -> String {
    let rmax = (0..s.len()).map(|k| s.frequency(k).iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max).max(1e-300);
    let mut bins = vec![0.0; dist_bins * radius_bins];
    for k in 1..s.len() {
        let xi = s.frequency(k);
        let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        let a = cone.angle(&xi[..s.d]).min(1.0);
        let di = ((a * dist_bins as f64) as usize).min(dist_bins - 1);
        let ri = ((r / rmax * radius_bins as f64) as usize).min(radius_bins - 1);
        bins[di * radius_bins + ri] += s.coeffs[k][coordinate - 1].norm_sqr();
    }
    let mut out = String::from("dist_lo,dist_hi,radius_lo,radius_hi,mass\n");
    for di in 0..dist_bins {
        for ri in 0..radius_bins {
            let (d0, d1) = (di as f64 / dist_bins as f64, (di + 1) as f64 / dist_bins as f64);
            let (r0, r1) = (rmax * ri as f64 / radius_bins as f64, rmax * (ri + 1) as f64 / radius_bins as f64);
            out += &format!("{d0:.6},{d1:.6},{r0:.6e},{r1:.6e},{:.12e}\n", bins[di * radius_bins + ri]);
        }
    }
    out
}

/// A field sampled at cell centres of its bounding box, extended by u = Fx + b outside the domain.
#[derive(Debug, Clone)]
pub struct GridSample {
    pub d: usize,
    pub n: usize,
    pub lo: V3,
    pub lengths: V3,
    /// Projected phase (F outside the domain).
    pub chi: Vec<M3>,
    /// v = u − Fx − b.
    pub v: Vec<V3>,
    /// sym∇u − χ at each sample.
    pub residual: Vec<M3>,
}

pub fn sample_field(field: &Field, n: usize) -> Result<GridSample, SpectralError> {
    let d = field.dim;
    check_grid(n, d, n.pow(d as u32))?;
    let (lo, hi) = field.domain.bbox();
    let lengths = [0, 1, 2].map(|i| if i < d { hi[i] - lo[i] } else { 0.0 });
    let (f, b) = field.datum;
    let pts: Vec<(M3, V3, M3)> = (0..n.pow(d as u32))
        .into_par_iter()
        .map(|idx| {
            let mut x = [0.0; 3];
            let mut rem = idx;
            for a in (0..d).rev() {
                x[a] = lo[a] + ((rem % n) as f64 + 0.5) / n as f64 * lengths[a];
                rem /= n;
            }
            if field.periodic || field.domain.contains(&x) {
                let jet = field.jet(&x);
                let e = jet.strain();
                let chi = field.wells[nearest_well(&e, &field.wells).0];
                let fx = crate::field::matvec(&f, &x);
                let v = [0, 1, 2].map(|i| jet.u[i] - fx[i] - b[i]);
                (chi, v, crate::field::sub(&e, &chi))
            } else {
                (f, [0.0; 3], [[0.0; 3]; 3])
            }
        })
        .collect();
    Ok(GridSample {
        d,
        n,
        lo,
        lengths,
        chi: pts.iter().map(|p| p.0).collect(),
        v: pts.iter().map(|p| p.1).collect(),
        residual: pts.iter().map(|p| p.2).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundReport {
    pub n: usize,
    /// Lower form of the projected χ̃.
    pub form: f64,
    /// ∫|sym∇v_N − χ̃_N|² for the trigonometric interpolants of the samples.
    pub competitor: f64,
    /// Riemann sum of |sym∇u − χ|² at the samples.
    pub sampled: f64,
    pub holds: bool,
}

/// Compares the lower form of the projected phase with the energy of the sampled field.
///
/// The interpolant of v = u − Fx is a periodic competitor, so form ≤ competitor holds
/// frequency by frequency; `holds` allows 1e−6 absolute slack for rounding.
pub fn lower_bound_check(field: &Field, n: usize) -> Result<LowerBoundReport, SpectralError> {
    let g = sample_field(field, n)?;
    let s = analyze_phase(&g.chi, n, g.d, g.lengths, field.datum.0)?;
    let form = elastic_lower_form_full(&s);
    let vh: Vec<Vec<C64>> = (0..g.d).map(|a| transform_scalar(g.v.iter().map(|v| v[a]), n, g.d)).collect();
    let terms: Vec<f64> = (0..s.len())
        .into_par_iter()
        .map(|k| {
            let xi = s.frequency(k);
            let v = [0, 1, 2].map(|a| if a < g.d { vh[a][k] } else { C64::new(0.0, 0.0) });
            frequency_residual(&s.coeffs[k], &v, &xi, g.d)
        })
        .collect();
    let competitor = s.volume() * pairwise_sum(&terms);
    let sampled = s.volume() * pairwise_sum(&g.residual.iter().map(crate::field::frob).map(|x| x * x).collect::<Vec<_>>()) / g.chi.len() as f64;
    Ok(LowerBoundReport { n, form, competitor, sampled, holds: form <= competitor + 1e-6 })
}
