//! ε-scans of the explicit constructions and log–log slope fits.

use super::{robust_fit, SlopeFit};
use crate::constructions::{branch2d_one_dir, branch2d_two_dir, cuboid3d, cylinder3d, nested_from_plan, BranchMode, BranchPlan2D, ConstructionError, NestedPlan};
use crate::energy::{total_energy, EnergyBreakdown, SurfaceMode};
use crate::field::Field;
use crate::quad::QuadSettings;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScanError {
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error("invalid ε grid: {0}")]
    Grid(String),
    #[error("rule {rule} does not apply to {constructor}")]
    Rule { rule: String, constructor: String },
    #[error("unknown constructor {0:?}")]
    Unknown(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Constructor {
    Branch2dTwoDir,
    Branch2dOneDir,
    Cylinder3d,
    Cuboid3d,
    NestedSecondOrder,
}

impl Constructor {
    pub const ALL: [Constructor; 5] =
        [Self::Branch2dTwoDir, Self::Branch2dOneDir, Self::Cylinder3d, Self::Cuboid3d, Self::NestedSecondOrder];

    pub fn name(self) -> &'static str {
        match self {
            Self::Branch2dTwoDir => "branch2dTwoDir",
            Self::Branch2dOneDir => "branch2dOneDir",
            Self::Cylinder3d => "cylinder3d",
            Self::Cuboid3d => "cuboid3d",
            Self::NestedSecondOrder => "nestedSecondOrder",
        }
    }

    /// Geometry used by stripe-count rules: (L, H).
    fn cell(self) -> (f64, f64) {
        match self {
            Self::Cuboid3d => (CUBOID.0, CUBOID.1),
            _ => (1.0, 1.0),
        }
    }
}

impl std::fmt::Display for Constructor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Constructor {
    type Err = ScanError;
    fn from_str(s: &str) -> Result<Self, ScanError> {
        Self::ALL.into_iter().find(|c| c.name().eq_ignore_ascii_case(s)).ok_or_else(|| ScanError::Unknown(s.into()))
    }
}

/// Cuboid scans use (L, H₁, H₂) = (1/2, 1/2, 1).
const CUBOID: (f64, f64, f64) = (0.5, 0.5, 1.0);

/// How construction parameters follow ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum ParamRule {
    /// N = max(round(c·ε^{−γ}), ⌊4L/H⌋ + 1).
    Stripes { prefactor: f64, exponent: f64 },
    /// Fixed N, independent of ε.
    Fixed { n: u64 },
    /// r₁ = a·ε^{2/(2p+3)}, r₂ = b·ε^{3/(2p+3)}.
    Scales { a: f64, b: f64 },
}

impl ParamRule {
    /// Optimal exponents with the prefactors the constructions need to stay
    /// inside their hypotheses across ε ∈ [10⁻⁶, 10⁻²].
    pub fn default_for(c: Constructor, p: f64) -> Self {
        match c {
            Constructor::Branch2dTwoDir => Self::Stripes { prefactor: 8.0, exponent: 1.0 / (p + 1.0) },
            Constructor::Branch2dOneDir | Constructor::Cylinder3d | Constructor::Cuboid3d => {
                Self::Stripes { prefactor: 8.0, exponent: 1.0 / (2.0 * p + 1.0) }
            }
            Constructor::NestedSecondOrder => Self::Scales { a: 0.2, b: 0.007 },
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Stripes { prefactor, exponent } => format!("stripes(c={prefactor},gamma={exponent})"),
            Self::Fixed { n } => format!("fixed(N={n})"),
            Self::Scales { a, b } => format!("scales(a={a},b={b})"),
        }
    }

    fn stripes(&self, c: Constructor, eps: f64) -> Result<u64, ScanError> {
        let (l, h) = c.cell();
        let floor = (4.0 * l / h).floor() as u64 + 1;
        match *self {
            Self::Stripes { prefactor, exponent } => Ok(((prefactor * eps.powf(-exponent)).round() as u64).max(floor)),
            Self::Fixed { n } => Ok(n),
            Self::Scales { .. } => Err(ScanError::Rule { rule: self.label(), constructor: c.to_string() }),
        }
    }
}

/// The field a rule assigns to one ε.
pub fn build(c: Constructor, eps: f64, p: f64, rule: &ParamRule) -> Result<Field, ScanError> {
    if !(eps > 0.0) {
        return Err(ScanError::Grid(format!("ε must be positive (got {eps})")));
    }
    let field = match c {
        Constructor::Branch2dTwoDir | Constructor::Branch2dOneDir => {
            let mode = if c == Constructor::Branch2dTwoDir { BranchMode::TwoDirections } else { BranchMode::OneDirection };
            let plan = BranchPlan2D::new(1.0, 1.0, rule.stripes(c, eps)?, None, mode, p)?;
            if mode == BranchMode::TwoDirections {
                branch2d_two_dir(plan)?
            } else {
                branch2d_one_dir(plan)?
            }
        }
        Constructor::Cylinder3d => cylinder3d(rule.stripes(c, eps)?, p, None)?,
        Constructor::Cuboid3d => cuboid3d(CUBOID.0, CUBOID.1, CUBOID.2, rule.stripes(c, eps)?, p, None)?,
        Constructor::NestedSecondOrder => match *rule {
            ParamRule::Scales { a, b } => nested_from_plan(&NestedPlan::for_eps_scaled(eps, p, a, b)?)?,
            _ => return Err(ScanError::Rule { rule: rule.label(), constructor: c.to_string() }),
        },
    };
    Ok(field)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub eps: f64,
    pub params: BTreeMap<String, f64>,
    pub energy: EnergyBreakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub constructor: Constructor,
    pub p: f64,
    pub rule: ParamRule,
    pub points: Vec<ScanPoint>,
    /// Fit of log total against log ε.
    pub fit: SlopeFit,
}

impl ScanResult {
    pub fn totals(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|q| (q.eps, q.energy.total)).collect()
    }

    /// Slope metadata as `#` lines, then one row per ε.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let used: Vec<String> = self.fit.used.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "# constructor={} p={} rule={}", self.constructor, self.p, self.rule.label());
        let _ = writeln!(
            out,
            "# slope={} intercept={} r2={} used={}",
            self.fit.slope,
            self.fit.intercept,
            self.fit.r2,
            used.join(" ")
        );
        let _ = writeln!(out, "{}", EnergyBreakdown::CSV_HEADER);
        for q in &self.points {
            let params: Vec<String> = q.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let _ = writeln!(out, "{}", q.energy.csv_row(self.constructor.name(), &params.join(";")));
        }
        out
    }
}

/// At least 5 positive, log-spaced values spanning 3 decades.
pub fn check_grid(eps: &[f64]) -> Result<(), ScanError> {
    if eps.len() < 5 {
        return Err(ScanError::Grid(format!("need at least 5 points (got {})", eps.len())));
    }
    if eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(ScanError::Grid("ε values must be positive and finite".into()));
    }
    let logs: Vec<f64> = eps.iter().map(|e| e.log10()).collect();
    let step = logs[1] - logs[0];
    if logs.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > 1e-9 * (1.0 + step.abs())) {
        return Err(ScanError::Grid("ε grid must be log-spaced".into()));
    }
    let span = (logs[logs.len() - 1] - logs[0]).abs();
    if span < 3.0 - 1e-9 {
        return Err(ScanError::Grid(format!("grid spans {span:.3} decades; at least 3 required")));
    }
    Ok(())
}

/// Energies along an ε grid, one independent job per point.
pub fn scan(
    c: Constructor,
    eps_grid: &[f64],
    p: f64,
    rule: &ParamRule,
    mode: SurfaceMode,
    quad: &QuadSettings,
) -> Result<ScanResult, ScanError> {
    check_grid(eps_grid)?;
    let points = eps_grid
        .par_iter()
        .map(|&eps| {
            let f = build(c, eps, p, rule)?;
            let energy = total_energy(&f, &f.wells, p, eps, mode, quad);
            Ok(ScanPoint { eps, params: f.params.clone(), energy })
        })
        .collect::<Result<Vec<_>, ScanError>>()?;
    let totals: Vec<(f64, f64)> = points.iter().map(|q| (q.eps, q.energy.total)).collect();
    Ok(ScanResult { constructor: c, p, rule: *rule, fit: robust_fit(&totals), points })
}
