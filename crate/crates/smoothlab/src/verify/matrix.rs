//! The check matrix and its parallel driver.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_check, CheckParams, Grids, InequalityReport, PropertyId, Thresholds};
use crate::corpus::{corpus_entry, CorpusEntry};
use crate::error::{Error, Result};

/// One row of the matrix. `expect_error` marks excluded regimes whose
/// hypothesis error is the expected outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixEntry {
    pub id: PropertyId,
    pub params: CheckParams,
    #[serde(default)]
    pub grids: Option<Grids>,
    #[serde(default)]
    pub expect_error: bool,
}

impl MatrixEntry {
    pub fn new(id: PropertyId, params: CheckParams) -> Self {
        Self { id, params, grids: None, expect_error: false }
    }

    pub fn grids(mut self, g: Grids) -> Self {
        self.grids = Some(g);
        self
    }

    pub fn excluded(mut self) -> Self {
        self.expect_error = true;
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Reduced matrix: d = 1, N = 256.
    #[serde(default)]
    pub quick: bool,
    /// Replaces the matrix when given.
    #[serde(default)]
    pub matrix: Option<Vec<MatrixEntry>>,
    /// Per-property threshold overrides, keyed by property id.
    #[serde(default)]
    pub thresholds: BTreeMap<String, Thresholds>,
}

impl VerifyConfig {
    pub fn entries(&self) -> Vec<MatrixEntry> {
        match (&self.matrix, self.quick) {
            (Some(m), _) => m.clone(),
            (None, true) => quick_matrix(),
            (None, false) => default_matrix(),
        }
    }

    fn thresholds_for(&self, id: PropertyId) -> Result<Option<Thresholds>> {
        for (k, v) in &self.thresholds {
            if k.parse::<PropertyId>()? == id {
                return Ok(Some(*v));
            }
        }
        Ok(None)
    }
}

/// A matrix row that raised an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckError {
    pub property_id: PropertyId,
    pub params: CheckParams,
    pub error: String,
    pub expected: bool,
}

/// Reports in matrix order; failing rows are collected, not thrown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRun {
    pub reports: Vec<InequalityReport>,
    pub errors: Vec<CheckError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub property_id: PropertyId,
    pub checks: usize,
    pub passed: usize,
    pub failed: usize,
    pub expected_errors: usize,
    pub unexpected_errors: usize,
    /// Largest max-ratio over the reports of the property.
    pub worst_ratio: Option<f64>,
    /// Largest slope over the reports of the property.
    pub worst_slope: Option<f64>,
}

impl SummaryRow {
    fn empty(property_id: PropertyId) -> Self {
        Self {
            property_id,
            checks: 0,
            passed: 0,
            failed: 0,
            expected_errors: 0,
            unexpected_errors: 0,
            worst_ratio: None,
            worst_slope: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub properties: Vec<SummaryRow>,
}

impl Summary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

impl VerifyRun {
    /// True when every report passes and every error was expected.
    pub fn succeeded(&self) -> bool {
        self.reports.iter().all(|r| r.passed()) && self.errors.iter().all(|e| e.expected)
    }

    pub fn summary(&self) -> Summary {
        let mut rows: BTreeMap<PropertyId, SummaryRow> = BTreeMap::new();
        for r in &self.reports {
            let s = rows.entry(r.property_id).or_insert_with(|| SummaryRow::empty(r.property_id));
            s.checks += 1;
            if r.passed() {
                s.passed += 1;
            } else {
                s.failed += 1;
            }
            s.worst_ratio = Some(s.worst_ratio.map_or(r.stats.max, |w| w.max(r.stats.max)));
            s.worst_slope = Some(s.worst_slope.map_or(r.stats.slope, |w| w.max(r.stats.slope)));
        }
        for e in &self.errors {
            let s = rows.entry(e.property_id).or_insert_with(|| SummaryRow::empty(e.property_id));
            s.checks += 1;
            if e.expected {
                s.expected_errors += 1;
                s.passed += 1;
            } else {
                s.unexpected_errors += 1;
                s.failed += 1;
            }
        }
        let properties: Vec<SummaryRow> = rows.into_values().collect();
        let passed = properties.iter().map(|r| r.passed).sum();
        let failed = properties.iter().map(|r| r.failed).sum();
        Summary { total: passed + failed, passed, failed, properties }
    }
}

/// Runs every matrix row whose function is in `corpus`, in parallel, merged in matrix order.
pub fn verify_all(corpus: &[CorpusEntry], config: &VerifyConfig) -> Result<VerifyRun> {
    let rows: Vec<(MatrixEntry, CorpusEntry, Option<Thresholds>)> = config
        .entries()
        .into_iter()
        .filter_map(|m| corpus.iter().find(|e| e.name == m.params.f).map(|e| (m, e.clone())))
        .map(|(m, e)| Ok((m.clone(), e, config.thresholds_for(m.id)?)))
        .collect::<Result<_>>()?;
    let outcomes: Vec<(MatrixEntry, Result<InequalityReport>)> = rows
        .into_par_iter()
        .map(|(m, e, th)| {
            let grids = match &m.grids {
                Some(g) => Ok(g.clone()),
                None => e.grid(m.params.n).map(|g| Grids::for_grid(&g)),
            };
            let out = grids.and_then(|g| run_check(m.id, &e, &m.params, &g, th));
            (m, out)
        })
        .collect();
    let mut run = VerifyRun { reports: Vec::new(), errors: Vec::new() };
    for (m, out) in outcomes {
        match out {
            Ok(r) if !m.expect_error => run.reports.push(r),
            Ok(_) => run.errors.push(CheckError {
                property_id: m.id,
                params: m.params,
                error: "expected a hypothesis error but the check ran".into(),
                expected: false,
            }),
            Err(e) => {
                let expected = m.expect_error && matches!(e, Error::Hypothesis { .. });
                run.errors.push(CheckError { property_id: m.id, params: m.params, error: e.to_string(), expected });
            }
        }
    }
    Ok(run)
}

fn row(f: &str, n: usize, p: f64, alpha: f64) -> CheckParams {
    CheckParams::new(f, n, p, alpha).expect("valid exponent")
}

const N1: usize = 1024;
const N2: usize = 256;

/// Desk-scale matrix: d = 1 at N = 1024, d = 2 at N = 256.
pub fn default_matrix() -> Vec<MatrixEntry> {
    use PropertyId::*;
    let mut m = Vec::new();
    let mut add = |id, params: CheckParams| m.push(MatrixEntry::new(id, params));
    for (f, p, a) in [("gaussian", 2.0, 1.5), ("bump", 0.5, 2.0), ("cusp-0.5", f64::INFINITY, 1.0), ("gaussian-2d", 1.0, 0.7)] {
        let n = if f.ends_with("2d") { N2 } else { N1 };
        add(P1a, row(f, n, p, a));
        add(P1c, row(f, n, p, a));
    }
    add(P1b, row("bump", N1, 0.5, 1.5));
    add(P1d, row("gaussian", N1, 1.0, 1.0));
    add(P2, row("cusp-0.5", N1, 1.0, 1.0));
    add(P2, row("gaussian-2d", N2, 2.0, 1.5).lambda(4.0));
    add(P3, row("bump-2d-tensor", N2, 1.0, 2.0));
    add(P3, row("gaussian-2d", N2, 2.0, 2.0).variant("partial"));
    add(P4, row("gaussian", N1, 2.0, 2.0));
    add(P5, row("gaussian", N1, 1.0, 2.0).q(2.0).expect("q"));
    add(P5, row("fejer", N1, 0.5, 2.0).q(1.0).expect("q"));
    add(P6, row("gaussian", N1, 1.0, 2.0).q(1.0).expect("q"));
    add(P6, row("cusp-0.5", N1, 2.0, 1.0).q(1.0).expect("q").variant("inner"));
    add(P7, row("gaussian", N1, 2.0, 1.0).gamma(1.0));
    add(P8, row("bump", N1, 1.0, 1.0).gamma(1.0));
    add(P8, row("gaussian", N1, 2.0, 1.5).gamma(1.0).variant("sjj"));
    add(P9, row("gaussian", N1, 0.5, 1.0).q(2.0).expect("q").gamma(1.0));
    add(P9, row("gaussian", N1, 2.0, 1.0).q(4.0).expect("q").gamma(0.25));
    add(P9, row("gaussian-2d", N2, 0.5, 1.0).q(2.0).expect("q").variant("corollary"));
    add(P10, row("gaussian", N1, 2.0, 1.5).q(16.0).expect("q"));
    add(P10, row("fejer", N1, 1.5, 2.0).q(6.0).expect("q"));
    add(P11, row("gaussian", N1, 2.0, 1.0).m(1.0));
    add(P11, row("gaussian", N1, 2.0, 1.0).m(1.0).variant("upper"));
    add(P12, row("gaussian", N1, 2.0, 1.0));
    add(P12, row("cusp-0.5", N1, 1.0, 1.0));
    add(P13, row("gaussian", N1, 2.0, 1.0));
    add(P14, row("gaussian", N1, 2.0, 1.0).variant("upper"));
    add(P14, row("cusp-0.5", N1, 2.0, 1.0).variant("tau"));
    add(P14, row("bump", N1, 1.0, 1.0));
    add(P15, row("cusp-0.3", N1, 2.0, 1.0));
    add(P16, row("gaussian", N1, 2.0, 1.0));
    add(P17, row("gaussian", N1, 1.0, 1.0));
    add(Nsb, row("gaussian", N1, 1.0, 1.5));
    add(Hln1, row("gaussian", N1, 0.5, 1.5).q(2.0).expect("q"));
    add(Hln2, row("gaussian-2d", N2, 0.5, 1.0).q(2.0).expect("q"));
    add(Hln3, row("gaussian", N1, 4.0, 0.5));
    add(Bern, row("gaussian", N1, 1.0, 1.5));
    add(Nik, row("gaussian", N1, 1.0, 1.0).q(4.0).expect("q"));
    m.push(MatrixEntry::new(P10, row("gaussian", N1, 1.0, 1.5).q(2.0).expect("q")).excluded());
    m.push(MatrixEntry::new(Hln1, row("gaussian", N1, 0.5, 0.5).q(2.0).expect("q")).excluded());
    m
}

const NQ: usize = 256;

/// Reduced matrix: the d = 1 rows of the default matrix at N = 256, without
/// rows whose grids need a Nyquist frequency above 20 (the band sweep of HLN3,
/// the slowly converging Kolyada row on the Fejer kernel) and without the
/// exploratory P15.
pub fn quick_matrix() -> Vec<MatrixEntry> {
    let wide = |m: &MatrixEntry| match m.id {
        PropertyId::P15 | PropertyId::Hln3 => true,
        PropertyId::P10 => m.params.f == "fejer",
        _ => false,
    };
    default_matrix()
        .into_iter()
        .filter(|m| corpus_entry(&m.params.f).map(|e| e.dim == 1).unwrap_or(false) && !wide(m))
        .map(|mut m| {
            m.params.n = NQ;
            m
        })
        .collect()
}
