//! Command execution: one artifact per invocation.

use serde::Serialize;
use smoothlab::approx::approx_curve;
use smoothlab::corpus::{corpus_entry, corpus_list, CorpusEntry};
use smoothlab::grid::{periodize, GridFunction, SmoothnessOrder, TorusGrid};
use smoothlab::moduli::{modulus_curve, DifferenceMethod, Sampling};
use smoothlab::spectral::Direction;
use smoothlab::verify::{run_check, verify_all, CheckParams, Grids, PropertyId, Thresholds, VerifyConfig};

use crate::config::{Command, Design, Format, RunConfig};
use crate::CliError;

/// Output text and whether every check passed.
pub struct Artifact {
    pub text: String,
    pub passed: bool,
}

impl Artifact {
    fn ok(text: String) -> Self {
        Self { text, passed: true }
    }
}

fn entry(cfg: &RunConfig) -> Result<CorpusEntry, CliError> {
    let name = match (&cfg.f, cfg.d) {
        (Some(f), _) => f.clone(),
        (None, Some(2)) => "gaussian-2d".into(),
        (None, Some(1) | None) => "gaussian".into(),
        (None, Some(d)) => return Err(CliError::Usage(format!("d = {d} is not supported (1 or 2)"))),
    };
    let e = corpus_entry(&name)?;
    if let Some(d) = cfg.d {
        if d != e.dim {
            return Err(CliError::Usage(format!("--d {d} does not match '{}' (d = {})", e.name, e.dim)));
        }
    }
    Ok(e)
}

fn default_n(e: &CorpusEntry) -> usize {
    if e.dim == 1 {
        1024
    } else {
        256
    }
}

fn grid(cfg: &RunConfig, e: &CorpusEntry) -> Result<TorusGrid, CliError> {
    Ok(TorusGrid::new(e.dim, cfg.n.unwrap_or_else(|| default_n(e)), cfg.l.unwrap_or(e.period))?)
}

fn function(cfg: &RunConfig, e: &CorpusEntry) -> Result<(TorusGrid, GridFunction), CliError> {
    let g = grid(cfg, e)?;
    Ok((g, periodize(e, g)?.function))
}

fn sampling(cfg: &RunConfig, dim: usize) -> Result<Sampling, CliError> {
    Ok(match cfg.design.unwrap_or_default() {
        Design::Standard => Sampling::standard(dim),
        Design::Axes => {
            let mut directions = Vec::new();
            for j in 0..dim {
                directions.push(Direction::axis(dim, j, true)?);
                directions.push(Direction::axis(dim, j, false)?);
            }
            Sampling { directions, magnitudes: 16, method: DifferenceMethod::Spectral }
        }
    })
}

#[derive(Serialize)]
struct ModulusValue<'a> {
    f: &'a str,
    d: usize,
    n: usize,
    period: f64,
    alpha: f64,
    p: smoothlab::grid::Exponent,
    delta: f64,
    value: f64,
    directions: usize,
    magnitudes: usize,
}

fn modulus(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let e = entry(cfg)?;
    let (g, f) = function(cfg, &e)?;
    let delta = cfg.delta.ok_or_else(|| CliError::Usage("--delta is required".into()))?;
    let (alpha, p) = (SmoothnessOrder::new(cfg.alpha()?)?, cfg.p()?);
    let s = sampling(cfg, e.dim)?;
    let c = modulus_curve(&f, &[delta], alpha, p, &s)?;
    let v = ModulusValue {
        f: e.name,
        d: e.dim,
        n: g.n(),
        period: g.period(),
        alpha: alpha.value(),
        p,
        delta,
        value: c.values[0],
        directions: c.directions,
        magnitudes: c.magnitudes,
    };
    Ok(Artifact::ok(match cfg.format.unwrap_or_default() {
        Format::Json => serde_json::to_string_pretty(&v).expect("value serializes"),
        Format::Csv => format!("f,d,N,L,alpha,p,delta,value\n{},{},{},{},{},{},{:e},{:e}\n", v.f, v.d, v.n, v.period, v.alpha, p, delta, v.value),
    }))
}

fn curve(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let e = entry(cfg)?;
    let (g, f) = function(cfg, &e)?;
    let deltas = match cfg.deltas {
        Some(grid_arg) => grid_arg.points()?,
        None => smoothlab::moduli::default_delta_grid(&g),
    };
    let c = modulus_curve(&f, &deltas, SmoothnessOrder::new(cfg.alpha()?)?, cfg.p()?, &sampling(cfg, e.dim)?)?;
    Ok(Artifact::ok(match cfg.format.unwrap_or_default() {
        Format::Json => c.to_json(),
        Format::Csv => c.to_csv(),
    }))
}

fn approx(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let e = entry(cfg)?;
    let (g, f) = function(cfg, &e)?;
    let top = cfg.sigma.unwrap_or(64.0).min(g.nyquist());
    if top < 1.0 {
        return Err(CliError::Usage("--sigma must be at least 1".into()));
    }
    let c = approx_curve(&f, cfg.p()?, top.log2().floor() as u32)?;
    Ok(Artifact::ok(match cfg.format.unwrap_or_default() {
        Format::Json => c.to_json(),
        Format::Csv => c.to_csv(),
    }))
}

fn check_params(cfg: &RunConfig, e: &CorpusEntry) -> Result<CheckParams, CliError> {
    let mut c = CheckParams::new(e.name, cfg.n.unwrap_or_else(|| default_n(e)), 1.0, cfg.alpha.unwrap_or(1.0))?;
    c.p = cfg.p()?;
    c.q = cfg.q;
    c.period = cfg.l;
    c.gamma = cfg.gamma.unwrap_or(c.gamma);
    c.m = cfg.m.unwrap_or(c.m);
    c.lambda = cfg.lambda.unwrap_or(c.lambda);
    c.sigma = cfg.sigma.unwrap_or(c.sigma);
    c.variant = cfg.variant.clone();
    c.seed = cfg.seed.unwrap_or(0);
    c.direction = cfg.direction.unwrap_or(0);
    Ok(c)
}

fn verify(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let id: PropertyId = cfg.property.as_deref().ok_or_else(|| CliError::Usage("--property is required".into()))?.parse()?;
    let e = entry(cfg)?;
    let params = check_params(cfg, &e)?;
    let mut grids = Grids::for_grid(&grid(cfg, &e)?);
    if let Some(s) = cfg.deltas {
        grids.deltas = s.points()?;
        grids.delta_min = grids.delta_min.min(grids.deltas[0]);
    }
    if let Some(s) = cfg.sigmas {
        grids.sigmas = s.points()?;
    }
    let th = match (cfg.max_ratio, cfg.slope) {
        (None, None) => cfg.thresholds.get(id.as_str()).copied(),
        (r, s) => {
            let d = Thresholds::for_property(id);
            Some(Thresholds { max_ratio: r.unwrap_or(d.max_ratio), slope: s.unwrap_or(d.slope) })
        }
    };
    let r = run_check(id, &e, &params, &grids, th)?;
    let text = match cfg.format.unwrap_or_default() {
        Format::Json => r.to_json(),
        Format::Csv => format!("{}{}", smoothlab::verify::InequalityReport::CSV_HEADER, r.to_csv_rows()),
    };
    Ok(Artifact { text, passed: r.passed() })
}

#[derive(Serialize)]
struct VerifyAllOutput<'a> {
    summary: smoothlab::verify::Summary,
    reports: &'a [smoothlab::verify::InequalityReport],
    errors: &'a [smoothlab::verify::CheckError],
}

fn verify_matrix(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let corpus: Vec<CorpusEntry> = match &cfg.f {
        Some(_) => vec![entry(cfg)?],
        None => corpus_list(),
    };
    let vc = VerifyConfig { quick: cfg.quick.unwrap_or(false), matrix: None, thresholds: cfg.thresholds.clone() };
    let run = verify_all(&corpus, &vc)?;
    for e in &run.errors {
        if e.expected {
            log::info!("{} on {}: {} (expected)", e.property_id, e.params.f, e.error);
        } else {
            log::warn!("{} on {}: {}", e.property_id, e.params.f, e.error);
        }
    }
    let summary = run.summary();
    log::info!("{} of {} checks passed", summary.passed, summary.total);
    let text = match cfg.format.unwrap_or_default() {
        Format::Json => serde_json::to_string_pretty(&VerifyAllOutput { summary, reports: &run.reports, errors: &run.errors })
            .expect("output serializes"),
        Format::Csv => {
            let mut s = smoothlab::verify::InequalityReport::CSV_HEADER.to_string();
            run.reports.iter().for_each(|r| s.push_str(&r.to_csv_rows()));
            s
        }
    };
    Ok(Artifact { text, passed: run.succeeded() })
}

fn corpus(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let list = corpus_list();
    Ok(Artifact::ok(match cfg.format.unwrap_or_default() {
        Format::Json => serde_json::to_string_pretty(&list).expect("corpus serializes"),
        Format::Csv => {
            let mut s = String::from("name,d,period,smooth,real\n");
            for e in &list {
                s.push_str(&format!("{},{},{},{},{}\n", e.name, e.dim, e.period, e.smooth, e.real));
            }
            s
        }
    }))
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<Artifact, CliError> {
    match command {
        Command::Modulus => modulus(cfg),
        Command::Curve => curve(cfg),
        Command::Approx => approx(cfg),
        Command::Verify => verify(cfg),
        Command::VerifyAll => verify_matrix(cfg),
        Command::Corpus => corpus(cfg),
    }
}
