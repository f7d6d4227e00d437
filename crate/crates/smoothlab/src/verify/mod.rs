//! Numerical checks of the inequalities between moduli of smoothness,
//! best approximations and entire functions of exponential type.
//!
//! "A ≲ B with an unknown constant" is checked as: the ratio `A/B` stays below
//! a threshold on the tested grid and does not grow in the asymptotic direction
//! (delta -> 0 or sigma -> inf). Equivalences additionally need the ratio above
//! the reciprocal threshold and a flat ratio in both directions.

mod checks;
mod eta;
mod matrix;
mod quadrature;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use checks::jackson_sigmas;
pub use eta::{drops_norm_term, eta, EtaBranch, UlyanovParams};
pub use matrix::{default_matrix, quick_matrix, verify_all, CheckError, MatrixEntry, Summary, SummaryRow, VerifyConfig, VerifyRun};
pub use quadrature::{curve_at, log_trapezoid, marchaud_rhs, power_tail, segment, ulyanov_rhs, UlyanovRhs};

use crate::corpus::CorpusEntry;
use crate::error::{Error, Result};
use crate::grid::{Exponent, TorusGrid};
use crate::moduli::geometric_grid;

/// Checked statements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PropertyId {
    P1a,
    P1b,
    P1c,
    P1d,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7,
    P8,
    P9,
    P10,
    P11,
    P12,
    P13,
    P14,
    P15,
    P16,
    P17,
    #[serde(rename = "NSB")]
    Nsb,
    #[serde(rename = "HLN1")]
    Hln1,
    #[serde(rename = "HLN2")]
    Hln2,
    #[serde(rename = "HLN3")]
    Hln3,
    #[serde(rename = "BERN")]
    Bern,
    #[serde(rename = "NIK")]
    Nik,
}

impl PropertyId {
    pub const ALL: [PropertyId; 26] = [
        PropertyId::P1a,
        PropertyId::P1b,
        PropertyId::P1c,
        PropertyId::P1d,
        PropertyId::P2,
        PropertyId::P3,
        PropertyId::P4,
        PropertyId::P5,
        PropertyId::P6,
        PropertyId::P7,
        PropertyId::P8,
        PropertyId::P9,
        PropertyId::P10,
        PropertyId::P11,
        PropertyId::P12,
        PropertyId::P13,
        PropertyId::P14,
        PropertyId::P15,
        PropertyId::P16,
        PropertyId::P17,
        PropertyId::Nsb,
        PropertyId::Hln1,
        PropertyId::Hln2,
        PropertyId::Hln3,
        PropertyId::Bern,
        PropertyId::Nik,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PropertyId::P1a => "P1a",
            PropertyId::P1b => "P1b",
            PropertyId::P1c => "P1c",
            PropertyId::P1d => "P1d",
            PropertyId::P2 => "P2",
            PropertyId::P3 => "P3",
            PropertyId::P4 => "P4",
            PropertyId::P5 => "P5",
            PropertyId::P6 => "P6",
            PropertyId::P7 => "P7",
            PropertyId::P8 => "P8",
            PropertyId::P9 => "P9",
            PropertyId::P10 => "P10",
            PropertyId::P11 => "P11",
            PropertyId::P12 => "P12",
            PropertyId::P13 => "P13",
            PropertyId::P14 => "P14",
            PropertyId::P15 => "P15",
            PropertyId::P16 => "P16",
            PropertyId::P17 => "P17",
            PropertyId::Nsb => "NSB",
            PropertyId::Hln1 => "HLN1",
            PropertyId::Hln2 => "HLN2",
            PropertyId::Hln3 => "HLN3",
            PropertyId::Bern => "BERN",
            PropertyId::Nik => "NIK",
        }
    }

    /// Default ratio threshold: the band half-width for equivalences.
    pub fn default_threshold(&self) -> f64 {
        match self {
            PropertyId::P16 | PropertyId::P17 => 50.0,
            PropertyId::Nsb => 10.0,
            _ => 100.0,
        }
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PropertyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PropertyId::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parameter(format!("unknown property '{s}'")))
    }
}

/// Pass thresholds of one check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub max_ratio: f64,
    pub slope: f64,
}

impl Thresholds {
    pub fn for_property(id: PropertyId) -> Self {
        Self { max_ratio: id.default_threshold(), slope: 0.05 }
    }
}

fn default_m() -> f64 {
    1.0
}

fn default_lambda() -> f64 {
    2.0
}

fn default_sigma() -> f64 {
    8.0
}

/// Parameters of one check. Which fields matter depends on the property:
///
/// * `alpha`: order of the modulus (integer `r` for P3-P6, P11);
/// * `gamma`: extra order (`gamma` in P7/P9, `beta` in P8);
/// * `m`: derivative order in P11;
/// * `q`: second exponent (P5, P9, P10, NIK, HLN1-2; the averaging power in P6);
/// * `lambda`: dilation in P2; `sigma`: band in NSB;
/// * `seed`, `direction`: polynomial seed and direction index in NSB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckParams {
    pub f: String,
    pub n: usize,
    #[serde(default)]
    pub period: Option<f64>,
    pub p: Exponent,
    #[serde(default)]
    pub q: Option<Exponent>,
    pub alpha: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default = "default_m")]
    pub m: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub variant: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub direction: usize,
}

impl CheckParams {
    pub fn new(f: &str, n: usize, p: f64, alpha: f64) -> Result<Self> {
        Ok(Self {
            f: f.to_string(),
            n,
            period: None,
            p: Exponent::new(p)?,
            q: None,
            alpha,
            gamma: 0.0,
            m: default_m(),
            lambda: default_lambda(),
            sigma: default_sigma(),
            variant: None,
            seed: 0,
            direction: 0,
        })
    }

    pub fn q(mut self, q: f64) -> Result<Self> {
        self.q = Some(Exponent::new(q)?);
        Ok(self)
    }

    pub fn gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn m(mut self, m: f64) -> Self {
        self.m = m;
        self
    }

    pub fn lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn variant(mut self, v: &str) -> Self {
        self.variant = Some(v.to_string());
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn direction(mut self, k: usize) -> Self {
        self.direction = k;
        self
    }
}

/// Evaluation grids of a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grids {
    /// Check points in delta (increasing, below 1).
    pub deltas: Vec<f64>,
    /// Check points in sigma (increasing).
    pub sigmas: Vec<f64>,
    /// NSB steps as fractions of `1/sigma` (increasing, last = 1).
    pub steps: Vec<f64>,
    /// Quadrature nodes per unit of `ln t`.
    pub density: f64,
    /// Start of quadrature curves for integrals from 0.
    pub delta_min: f64,
}

impl Grids {
    /// Grids adapted to a torus: deltas from `h/4` to `1/8` (`h` the spacing; 9 points
    /// for d = 1, 6 for d = 2),
    /// sigmas `2^0 .. 2^6`, NSB steps `2^-6 .. 1`, 64 quadrature nodes per e-fold
    /// in d = 1 and 16 in d = 2.
    pub fn for_grid(grid: &TorusGrid) -> Self {
        let h = grid.spacing();
        let d1 = grid.dim() == 1;
        Self {
            deltas: geometric_grid(h / 4.0, 0.125, if d1 { 9 } else { 6 }).expect("h/4 < 1/8 on admissible grids"),
            sigmas: (0..=6).map(|k| 2f64.powi(k)).collect(),
            steps: (0..=6).map(|k| 2f64.powi(k - 6)).collect(),
            density: if d1 { 64.0 } else { 16.0 },
            delta_min: h / 16.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let inc = |v: &[f64]| !v.is_empty() && v.iter().all(|x| x.is_finite() && *x > 0.0) && v.windows(2).all(|w| w[1] > w[0]);
        if !(inc(&self.deltas) && inc(&self.sigmas) && inc(&self.steps)) {
            return Err(Error::Parameter("grids must be positive and strictly increasing".into()));
        }
        if !(self.density >= 2.0 && self.delta_min > 0.0 && self.delta_min <= self.deltas[0]) {
            return Err(Error::Parameter("need density >= 2 and 0 < delta_min <= deltas[0]".into()));
        }
        Ok(())
    }
}

/// Variable of the report grid; the slope is taken against `1/delta`, `sigma` or `1/h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridVariable {
    Delta,
    Sigma,
    Step,
}

/// How the ratio is judged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum CheckKind {
    /// `lhs <= bound * rhs` pointwise, no unknown constant.
    Exact { bound: f64 },
    /// `lhs ≲ rhs`: bounded ratio that does not grow asymptotically.
    Upper,
    /// `lhs ≍ rhs`: ratio in `[1/T, T]` with a flat trend.
    Band,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub max: f64,
    pub min: f64,
    pub median: f64,
    /// Least-squares slope of `ln ratio` against `ln(1/delta)`, `ln sigma` or `ln(1/h)`.
    pub slope: f64,
}

/// Parameters as recorded in a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub d: usize,
    #[serde(flatten)]
    pub check: CheckParams,
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub property_id: PropertyId,
    pub params: ReportParams,
    pub variable: GridVariable,
    pub kind: CheckKind,
    pub thresholds: Thresholds,
    pub grid: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub ratio: Vec<f64>,
    pub stats: Stats,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl InequalityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per grid point: `property,variant,f,grid,lhs,rhs,ratio,verdict`.
    pub fn to_csv_rows(&self) -> String {
        let v = self.params.check.variant.as_deref().unwrap_or("");
        let verdict = if self.verdict == Verdict::Pass { "pass" } else { "fail" };
        let mut out = String::new();
        for i in 0..self.grid.len() {
            out.push_str(&format!(
                "{},{},{},{:e},{:e},{:e},{:e},{}\n",
                self.property_id, v, self.params.check.f, self.grid[i], self.lhs[i], self.rhs[i], self.ratio[i], verdict
            ));
        }
        out
    }

    pub const CSV_HEADER: &'static str = "property,variant,f,grid,lhs,rhs,ratio,verdict\n";

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Entries below this fraction of the largest value on the grid count as zero.
/// In upper checks a left side below this fraction of the largest right side
/// is a zero ratio: it satisfies the bound and stays out of the slope fit.
const ZERO_FLOOR: f64 = 1e-10;

/// Ratio array, stats and verdict.
pub(crate) fn judge(
    variable: GridVariable,
    kind: CheckKind,
    th: Thresholds,
    grid: &[f64],
    lhs: &[f64],
    rhs: &[f64],
    notes: &mut Vec<String>,
) -> (Vec<f64>, Stats, Verdict) {
    let ratio: Vec<f64> = lhs.iter().zip(rhs).map(|(a, b)| a / b).collect();
    let top = |v: &[f64]| v.iter().cloned().filter(|x| x.is_finite()).fold(0.0, f64::max);
    let (fl, fr) = (ZERO_FLOOR * top(lhs), ZERO_FLOOR * top(rhs));
    let keep: Vec<usize> = (0..grid.len())
        .filter(|&i| !(lhs[i].abs() <= fl && rhs[i].abs() <= fr))
        .collect();
    if keep.len() < grid.len() {
        notes.push(format!("{} grid points with both sides numerically zero excluded", grid.len() - keep.len()));
    }
    if keep.is_empty() {
        notes.push("both sides vanish on the whole grid".into());
        let stats = Stats { max: 0.0, min: 0.0, median: 0.0, slope: 0.0 };
        return (ratio, stats, Verdict::Pass);
    }
    let mut r: Vec<f64> = keep.iter().map(|&i| if ratio[i].is_nan() { f64::INFINITY } else { ratio[i] }).collect();
    let max = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = r.iter().cloned().fold(f64::INFINITY, f64::min);
    r.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    let median = if r.len() % 2 == 1 { r[r.len() / 2] } else { 0.5 * (r[r.len() / 2 - 1] + r[r.len() / 2]) };
    let trivial = |i: usize| matches!(kind, CheckKind::Upper) && lhs[i].abs() <= fr;
    let trivial_count = keep.iter().filter(|&&i| trivial(i)).count();
    if trivial_count > 0 {
        notes.push(format!("{trivial_count} grid points with a numerically zero left side excluded from the slope"));
    }
    let pts: Vec<(f64, f64)> = keep
        .iter()
        .filter(|&&i| ratio[i].is_finite() && ratio[i] > 0.0 && !trivial(i))
        .map(|&i| {
            let x = match variable {
                GridVariable::Sigma => grid[i].ln(),
                GridVariable::Delta | GridVariable::Step => -grid[i].ln(),
            };
            (x, ratio[i].ln())
        })
        .collect();
    let slope = fit_slope(&pts);
    let stats = Stats { max, min, median, slope };
    // the asymptotic end is the largest sigma or the smallest delta / step
    let end = match variable {
        GridVariable::Sigma => grid.len() - 1,
        GridVariable::Delta | GridVariable::Step => 0,
    };
    let vanishes = keep.contains(&end) && trivial(end);
    if vanishes {
        notes.push("left side vanishes at the asymptotic end of the grid".into());
    }
    let pass = match kind {
        CheckKind::Exact { bound } => max <= bound,
        CheckKind::Upper => max <= th.max_ratio && (slope <= th.slope || vanishes),
        CheckKind::Band => max <= th.max_ratio && min >= 1.0 / th.max_ratio && slope.abs() <= th.slope,
    };
    (ratio, stats, if pass { Verdict::Pass } else { Verdict::Fail })
}

/// Least-squares slope; 0 for fewer than two distinct abscissae.
pub fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 1e-300 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Runs one check of `id` on `entry`.
pub fn run_check(
    id: PropertyId,
    entry: &CorpusEntry,
    params: &CheckParams,
    grids: &Grids,
    thresholds: Option<Thresholds>,
) -> Result<InequalityReport> {
    grids.validate()?;
    let th = thresholds.unwrap_or_else(|| Thresholds::for_property(id));
    let out = checks::evaluate(id, entry, params, grids)?;
    let mut notes = out.notes;
    let (ratio, stats, verdict) = judge(out.variable, out.kind, th, &out.grid, &out.lhs, &out.rhs, &mut notes);
    Ok(InequalityReport {
        property_id: id,
        params: ReportParams { d: entry.dim, check: params.clone() },
        variable: out.variable,
        kind: out.kind,
        thresholds: th,
        grid: out.grid,
        lhs: out.lhs,
        rhs: out.rhs,
        ratio,
        stats,
        verdict,
        notes,
    })
}
