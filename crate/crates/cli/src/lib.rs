//! Batch driver for the staircase library: one config type, one runner per subcommand.
//!
//! Every subcommand returns its artifact as a string so that the binary and the tests
//! share the same code path. Output is deterministic for a fixed config.

use anyhow::{anyhow, bail, Context, Result};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use staircase::compat::{classify, hull_segments, CompatKind};
use staircase::energy::{total_energy, EnergyBreakdown, SurfaceMode};
use staircase::field::{diag3, Field, M3};
use staircase::quad::QuadSettings;
use staircase::scaling::{build, exponent_table, log_grid, scan, Boundary, Constructor, ParamRule, Rat};
use staircase::spectral::{
    analyze_phase, coercivity_diagnostics, elastic_lower_form_full, lower_bound_check, mass_buckets_csv, sample_field, ConeSpec,
    SpectralField,
};
use staircase::wells::{build_wells, LaminationSignature, WellFamily};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

/// Environment variable read for the worker thread count.
pub const THREADS_ENV: &str = "STAIRCASE_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Wells,
    Hull,
    Classify,
    Construct,
    Energy,
    Spectral,
    Scan,
    Exponents,
}

/// ε values: a single point when `points == 1`, otherwise log-spaced from `min` to `max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl EpsGrid {
    pub fn values(&self) -> Vec<f64> {
        log_grid(self.min, self.max, self.points)
    }
}

impl FromStr for EpsGrid {
    type Err = anyhow::Error;

    /// `1e-3` or `min:max:points`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.trim().parse::<f64>().with_context(|| format!("bad ε value {t:?}"));
        let g = match parts.as_slice() {
            [one] => {
                let e = num(one)?;
                EpsGrid { min: e, max: e, points: 1 }
            }
            [a, b, n] => EpsGrid { min: num(a)?, max: num(b)?, points: n.trim().parse().with_context(|| format!("bad point count {n:?}"))? },
            _ => bail!("ε grid must be `value` or `min:max:points`, got {s:?}"),
        };
        if !(g.min > 0.0 && g.max > 0.0 && g.points >= 1) {
            bail!("ε grid needs positive bounds and at least one point");
        }
        Ok(g)
    }
}

fn default_p() -> String {
    "2".into()
}
fn default_grid() -> usize {
    64
}
fn default_kappa() -> f64 {
    0.1
}
fn default_mu() -> f64 {
    4.0
}

/// A complete experiment description; round-trips through TOML bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    /// Lamination signature as digits, e.g. "12".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<String>,
    /// Datum order ℓ: F = J_ℓ for random phases, the exponent order otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Growth exponent p; a comma-separated list of rationals for `exponents`.
    #[serde(default = "default_p")]
    pub p: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<Constructor>,
    /// Fixed stripe count, overriding the rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    /// Matrix literals for `classify`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default)]
    pub surface: SurfaceMode,
    /// `csv` or `json` where a subcommand offers both.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    /// `dirichlet`, `periodic` or `both` for `exponents`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bc: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// At most 2⁶³ − 1, the TOML integer range.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<EpsGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<ParamRule>,
    #[serde(default)]
    pub quad: QuadSettings,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            signature: None,
            ell: None,
            m: None,
            p: default_p(),
            construction: None,
            n: None,
            a: None,
            b: None,
            grid: default_grid(),
            level: None,
            kappa: default_kappa(),
            mu: default_mu(),
            surface: SurfaceMode::default(),
            format: None,
            bc: None,
            output: None,
            seed: 0,
            eps: None,
            rule: None,
            quad: QuadSettings::default(),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }

    fn p_f64(&self) -> Result<f64> {
        let r = parse_rat(&self.p)?;
        Ok(*r.numer() as f64 / *r.denom() as f64)
    }

    fn family(&self) -> Result<WellFamily<f64>> {
        let s = self.signature.as_deref().ok_or_else(|| anyhow!("--signature is required"))?;
        let f: Vec<u8> = s
            .chars()
            .filter(|c| !matches!(c, ',' | ' '))
            .map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(|| anyhow!("signature digits must be 1 or 2, got {c:?}")))
            .collect::<Result<_>>()?;
        Ok(build_wells(&LaminationSignature::new(&f)?)?)
    }

    fn rule_for(&self, c: Constructor, p: f64) -> ParamRule {
        match (self.n, self.rule) {
            (Some(n), _) => ParamRule::Fixed { n },
            (None, Some(r)) => r,
            (None, None) => ParamRule::default_for(c, p),
        }
    }

    /// The single field described by construction, ε and rule.
    fn field(&self) -> Result<(Field, f64, f64)> {
        let c = self.construction.ok_or_else(|| anyhow!("--construction is required"))?;
        let p = self.p_f64()?;
        let eps = match self.eps {
            Some(g) if g.points == 1 => g.min,
            Some(_) => bail!("this subcommand takes a single ε"),
            None => 1e-3,
        };
        Ok((build(c, eps, p, &self.rule_for(c, p))?, eps, p))
    }
}

/// Full constructor names (any case) or the short forms `twodir`, `onedir`, `cylinder`, `cuboid`, `nested`.
pub fn parse_constructor(s: &str) -> Result<Constructor> {
    let short = match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
        "twodir" | "branch2d" => Some(Constructor::Branch2dTwoDir),
        "onedir" => Some(Constructor::Branch2dOneDir),
        "cylinder" => Some(Constructor::Cylinder3d),
        "cuboid" => Some(Constructor::Cuboid3d),
        "nested" => Some(Constructor::NestedSecondOrder),
        _ => None,
    };
    match short {
        Some(c) => Ok(c),
        None => Ok(s.parse::<Constructor>()?),
    }
}

/// `2`, `3/2` or `1.5`.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let (n, d): (i64, i64) = (n.trim().parse()?, d.trim().parse()?);
        if d == 0 {
            bail!("zero denominator in {s:?}");
        }
        return Ok(Rat::new(n, d));
    }
    if let Ok(n) = s.parse::<i64>() {
        return Ok(Rat::from_integer(n));
    }
    let x: f64 = s.parse().with_context(|| format!("bad number {s:?}"))?;
    Rat::approximate_float(x).ok_or_else(|| anyhow!("cannot represent {s:?} as a rational"))
}

/// `diag:a,b,c` or row-major `full:a11,a12,...`.
pub fn parse_matrix(s: &str) -> Result<DMatrix<f64>> {
    let (kind, body) = s.split_once(':').ok_or_else(|| anyhow!("matrix literal must start with diag: or full:, got {s:?}"))?;
    let vals: Vec<f64> = body.split(',').map(|t| t.trim().parse::<f64>().with_context(|| format!("bad entry {t:?} in {s:?}"))).collect::<Result<_>>()?;
    match kind {
        "diag" => Ok(DMatrix::from_diagonal(&DVector::from_vec(vals))),
        "full" => {
            let d = (vals.len() as f64).sqrt().round() as usize;
            if d * d != vals.len() || d == 0 {
                bail!("full: literal needs d² entries, got {}", vals.len());
            }
            Ok(DMatrix::from_row_slice(d, d, &vals))
        }
        _ => bail!("unknown matrix kind {kind:?}; use diag or full"),
    }
}

/// `e2`, `-e1` for signed unit basis vectors, bracketed entries otherwise.
fn vec_label(v: &DVector<f64>) -> String {
    let nz: Vec<usize> = (0..v.len()).filter(|&i| v[i].abs() > 1e-12).collect();
    if let [i] = nz.as_slice() {
        if (v[*i].abs() - 1.0).abs() < 1e-12 {
            return format!("{}e{}", if v[*i] < 0.0 { "-" } else { "" }, i + 1);
        }
    }
    let parts: Vec<String> = v.iter().map(|x| format!("{}", clean(*x))).collect();
    format!("[{}]", parts.join(","))
}

/// Rounds away last-bit noise and negative zero for display.
fn clean(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn run_classify(cfg: &ExperimentConfig) -> Result<String> {
    let a = parse_matrix(cfg.a.as_deref().ok_or_else(|| anyhow!("--A is required"))?)?;
    let b = parse_matrix(cfg.b.as_deref().ok_or_else(|| anyhow!("--B is required"))?)?;
    let c = classify(&a, &b)?;
    let eig: Vec<String> = c.eigenvalues.iter().map(|x| clean(*x).to_string()).collect();
    Ok(match (c.kind, c.factors) {
        (CompatKind::Degenerate, Some((fa, fb))) => {
            // Fix the sign so that the first nonzero entry of a is positive.
            let s = fa.iter().find(|x| x.abs() > 1e-12).map_or(1.0, |x| x.signum());
            let (fa, fb) = (fa * s, fb * s);
            if (&fa - &fb).norm() <= 1e-12 * fa.norm() {
                format!("degenerate, a=b={}\n", vec_label(&fa))
            } else {
                format!("degenerate, a={}, b={}\n", vec_label(&fa), vec_label(&fb))
            }
        }
        (CompatKind::NonDegenerate, Some((fa, fb))) => format!("non-degenerate, a={}, b={}\n", vec_label(&fa), vec_label(&fb)),
        _ => format!("incompatible, eigenvalues=[{}]\n", eig.join(",")),
    })
}

fn run_hull(cfg: &ExperimentConfig) -> Result<String> {
    let w = cfg.family()?;
    let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
    let mut out = String::from("# segment j: J_{j-1} + alpha * direction, alpha in (0,1); entries are diagonals\norder,direction_count,base,direction\n");
    for s in hull_segments(&w) {
        let _ = writeln!(out, "{},{},{},{}", s.order, s.direction_count, join(&s.base), join(&s.direction));
    }
    Ok(out)
}

fn run_exponents(cfg: &ExperimentConfig) -> Result<String> {
    let m = cfg.m.ok_or_else(|| anyhow!("--m is required"))?;
    if m == 0 {
        bail!("m ≥ 1 required");
    }
    let ps: Vec<Rat> = cfg.p.split(',').map(parse_rat).collect::<Result<_>>()?;
    if ps.iter().any(|p| *p < Rat::from_integer(1)) {
        bail!("p ≥ 1 required");
    }
    let keep = |bc: Boundary| match cfg.bc.as_deref().unwrap_or("dirichlet") {
        "both" => Ok(true),
        "dirichlet" => Ok(bc == Boundary::Dirichlet),
        "periodic" => Ok(bc == Boundary::Periodic),
        other => Err(anyhow!("unknown boundary condition {other:?}")),
    };
    let mut out = String::from("# energy ~ eps^(numerator/denominator); k_ell = degenerate levels up to ell\nm,f,ell,p,bc,k_ell,numerator,denominator\n");
    for r in exponent_table(m, &ps) {
        if !keep(r.bc)? {
            continue;
        }
        if cfg.ell.is_some_and(|l| l != r.ell) {
            continue;
        }
        let bc = if r.bc == Boundary::Dirichlet { "dirichlet" } else { "periodic" };
        let _ = writeln!(out, "{},{},{},{},{},{},{},{}", r.m, r.f, r.ell, r.p, bc, r.k_ell, r.numerator, r.denominator);
    }
    Ok(out)
}

fn params_label(f: &Field) -> String {
    f.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

fn run_construct(cfg: &ExperimentConfig) -> Result<String> {
    let (f, _, _) = cfg.field()?;
    match cfg.format.as_deref().unwrap_or("csv") {
        "csv" => Ok(f.grid_csv(cfg.grid)),
        "json" => Ok(serde_json::to_string_pretty(&f.summary_json())? + "\n"),
        other => bail!("unknown format {other:?}"),
    }
}

fn run_energy(cfg: &ExperimentConfig) -> Result<String> {
    let (f, eps, p) = cfg.field()?;
    let b: EnergyBreakdown = total_energy(&f, &f.wells, p, eps, cfg.surface, &cfg.quad);
    Ok(format!("# energies are integrals over the domain; surface is the total variation measure\n{}\n{}\n", EnergyBreakdown::CSV_HEADER, b.csv_row(&f.name, &params_label(&f))))
}

/// Random phase drawn from the family wells, datum J_ℓ.
fn random_spectral(cfg: &ExperimentConfig, w: &WellFamily<f64>) -> Result<SpectralField> {
    if w.d > 3 {
        bail!("spectral diagnostics need d ≤ 3, family has d = {}", w.d);
    }
    let ell = cfg.ell.unwrap_or(w.m());
    if ell > w.m() {
        bail!("ℓ ≤ m required");
    }
    let wells: Vec<M3> = w.wells_f64().iter().map(|a| diag3(a)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let chi: Vec<M3> = (0..cfg.grid.pow(w.d as u32)).map(|_| wells[rng.gen_range(0..wells.len())]).collect();
    let lengths = [0, 1, 2].map(|i| if i < w.d { 1.0 } else { 0.0 });
    Ok(analyze_phase(&chi, cfg.grid, w.d, lengths, diag3(&w.midpoint_f64(ell)))?)
}

fn run_spectral(cfg: &ExperimentConfig) -> Result<String> {
    let family = cfg.signature.as_ref().map(|_| cfg.family()).transpose()?;
    let (s, lower) = match cfg.construction {
        Some(_) => {
            let (f, _, _) = cfg.field()?;
            let g = sample_field(&f, cfg.grid)?;
            (analyze_phase(&g.chi, cfg.grid, g.d, g.lengths, f.datum.0)?, Some(lower_bound_check(&f, cfg.grid)?))
        }
        None => (random_spectral(cfg, family.as_ref().ok_or_else(|| anyhow!("--signature or --construction is required"))?)?, None),
    };
    let coercivity = match (&family, cfg.level) {
        (Some(w), Some(level)) if w.d == s.d => Some(coercivity_diagnostics(&s, w, level, cfg.kappa, cfg.mu)?),
        (Some(w), Some(_)) => bail!("family dimension {} does not match the field dimension {}", w.d, s.d),
        _ => None,
    };
    if cfg.format.as_deref() == Some("csv") {
        let (w, level) = family.as_ref().zip(cfg.level).ok_or_else(|| anyhow!("mass buckets need --signature and --level"))?;
        let cone = ConeSpec::for_level(w, level, cfg.kappa, cfg.mu)?;
        return Ok(mass_buckets_csv(&s, &cone, w.l[level - 1], 10, 10));
    }
    let report = serde_json::json!({
        "d": s.d,
        "grid": s.n,
        "mass": s.mass(),
        "hermitian_defect": s.hermitian_defect(),
        "lower_form": elastic_lower_form_full(&s),
        "lower_bound": lower,
        "coercivity": coercivity,
    });
    Ok(serde_json::to_string_pretty(&report)? + "\n")
}

fn run_scan(cfg: &ExperimentConfig) -> Result<String> {
    let c = cfg.construction.ok_or_else(|| anyhow!("--construction is required"))?;
    let p = cfg.p_f64()?;
    let grid = cfg.eps.ok_or_else(|| anyhow!("--eps min:max:points is required"))?;
    let r = scan(c, &grid.values(), p, &cfg.rule_for(c, p), cfg.surface, &cfg.quad)?;
    Ok(r.to_csv())
}

/// Runs one experiment and returns its artifact.
pub fn run(cfg: &ExperimentConfig) -> Result<String> {
    match cfg.command {
        Command::Wells => Ok(serde_json::to_string_pretty(&cfg.family()?.to_json())? + "\n"),
        Command::Hull => run_hull(cfg),
        Command::Classify => run_classify(cfg),
        Command::Construct => run_construct(cfg),
        Command::Energy => run_energy(cfg),
        Command::Spectral => run_spectral(cfg),
        Command::Scan => run_scan(cfg),
        Command::Exponents => run_exponents(cfg),
    }
}
