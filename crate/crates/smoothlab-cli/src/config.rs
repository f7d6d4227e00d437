//! Run configuration shared by flags and `--config` files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use smoothlab::grid::Exponent;
use smoothlab::moduli::geometric_grid;
use smoothlab::verify::Thresholds;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Modulus,
    Curve,
    Approx,
    Verify,
    VerifyAll,
    Corpus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Direction design for `modulus` and `curve`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Design {
    /// +-1 in d = 1; 16 angles plus the four axis directions in d = 2.
    #[default]
    Standard,
    /// Axis directions +-e_j only.
    Axes,
}

/// Geometric grid `lo:hi:n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        Ok(geometric_grid(self.lo, self.hi, self.n)?)
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || format!("grid '{s}' must read lo:hi:n");
        if parts.len() != 3 {
            return Err(bad());
        }
        Ok(GridSpec {
            lo: parts[0].parse().map_err(|_| bad())?,
            hi: parts[1].parse().map_err(|_| bad())?,
            n: parts[2].parse().map_err(|_| bad())?,
        })
    }
}

fn parse_exponent(s: &str) -> Result<Exponent, String> {
    s.parse::<Exponent>().map_err(|e| e.to_string())
}

/// Every option of a run. Flags and config files fill the same structure; flags win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Set from the subcommand.
    #[arg(skip)]
    pub command: Option<Command>,
    /// Corpus entry name.
    #[arg(long = "f")]
    pub f: Option<String>,
    /// Dimension; picks the default entry and must match `--f`.
    #[arg(long)]
    pub d: Option<usize>,
    /// Points per axis.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<usize>,
    /// Torus period.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<f64>,
    /// Exponent p in (0, inf]; "inf" and fractions like 1/2 are accepted.
    #[arg(long, value_parser = parse_exponent)]
    pub p: Option<Exponent>,
    #[arg(long, value_parser = parse_exponent)]
    pub q: Option<Exponent>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Band: NSB polynomial band, largest band of `approx`.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Step of `modulus`.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Delta grid `lo:hi:n` (geometric).
    #[arg(long)]
    pub deltas: Option<GridSpec>,
    /// Sigma grid `lo:hi:n` (geometric) for verify.
    #[arg(long)]
    pub sigmas: Option<GridSpec>,
    #[arg(long, value_enum)]
    pub design: Option<Design>,
    #[arg(long)]
    pub property: Option<String>,
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Direction index into the design (NSB).
    #[arg(long)]
    pub direction: Option<usize>,
    /// Reduced verify-all matrix (d = 1, N = 256).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub quick: Option<bool>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Ratio threshold of `verify`.
    #[arg(long)]
    pub max_ratio: Option<f64>,
    /// Slope threshold of `verify`.
    #[arg(long)]
    pub slope: Option<f64>,
    /// Per-property thresholds for verify-all (config files only).
    #[arg(skip)]
    pub thresholds: BTreeMap<String, Thresholds>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident, $($field:ident),*) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field.clone(); } )*
    };
}

impl RunConfig {
    /// Fields set in `flags` replace those of `self`.
    pub fn overlay(mut self, flags: &RunConfig) -> Self {
        overlay!(
            self, flags, command, f, d, n, l, p, q, alpha, gamma, m, lambda, sigma, delta, deltas, sigmas, design, property,
            variant, seed, direction, quick, threads, format, out, max_ratio, slope
        );
        if !flags.thresholds.is_empty() {
            self.thresholds = flags.thresholds.clone();
        }
        self
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn p(&self) -> Result<Exponent, CliError> {
        self.p.ok_or_else(|| CliError::Usage("--p is required".into()))
    }

    pub fn alpha(&self) -> Result<f64, CliError> {
        self.alpha.ok_or_else(|| CliError::Usage("--alpha is required".into()))
    }
}

#[derive(Debug, Parser)]
#[command(name = "smoothlab", version, about = "Moduli of smoothness, approximation errors and inequality checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// One modulus value omega_alpha(f, delta)_p.
    Modulus(Invocation),
    /// Modulus curve on a delta grid.
    Curve(Invocation),
    /// Near-best approximation errors at bands 0, 1, 2, 4, ..., sigma.
    Approx(Invocation),
    /// One inequality check.
    Verify(Invocation),
    /// The whole check matrix.
    VerifyAll(Invocation),
    /// The function registry.
    Corpus(Invocation),
}

#[derive(Debug, Args)]
pub struct Invocation {
    /// JSON file with the same fields as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub flags: RunConfig,
}

impl Sub {
    pub fn split(self) -> (Command, Invocation) {
        match self {
            Sub::Modulus(i) => (Command::Modulus, i),
            Sub::Curve(i) => (Command::Curve, i),
            Sub::Approx(i) => (Command::Approx, i),
            Sub::Verify(i) => (Command::Verify, i),
            Sub::VerifyAll(i) => (Command::VerifyAll, i),
            Sub::Corpus(i) => (Command::Corpus, i),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunConfig {
        RunConfig {
            command: Some(Command::Curve),
            f: Some("gaussian".into()),
            d: Some(1),
            n: Some(512),
            l: Some(40.0),
            p: Some(Exponent::Infinity),
            q: Some(Exponent::new(0.5).unwrap()),
            alpha: Some(1.5),
            deltas: Some(GridSpec { lo: 0.01, hi: 1.0, n: 12 }),
            design: Some(Design::Axes),
            format: Some(Format::Csv),
            out: Some(PathBuf::from("r.csv")),
            thresholds: [("P2".to_string(), Thresholds { max_ratio: 10.0, slope: 0.1 })].into_iter().collect(),
            ..RunConfig::default()
        }
    }

    #[test]
    fn config_round_trips() {
        let c = sample();
        let back: RunConfig = serde_json::from_str(&c.to_json()).unwrap();
        assert_eq!(back, c);
        let empty: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(empty, RunConfig::default());
    }

    #[test]
    fn flags_win() {
        let file = sample();
        let flags = RunConfig { alpha: Some(2.0), format: Some(Format::Json), ..RunConfig::default() };
        let merged = file.clone().overlay(&flags);
        assert_eq!(merged.alpha, Some(2.0));
        assert_eq!(merged.format, Some(Format::Json));
        assert_eq!(merged.f, file.f);
        assert_eq!(merged.thresholds, file.thresholds);
    }

    #[test]
    fn unknown_config_field_is_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"alpah": 1}"#).is_err());
    }

    #[test]
    fn grid_spec_parses() {
        assert_eq!("0.1:1:5".parse::<GridSpec>().unwrap(), GridSpec { lo: 0.1, hi: 1.0, n: 5 });
        assert!("0.1:1".parse::<GridSpec>().is_err());
    }
}
