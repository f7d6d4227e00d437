//! The correction factor of the sharp Ulyanov inequality and its parameter set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{is_natural, Exponent};

const EQ_TOL: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= EQ_TOL * b.abs().max(1.0)
}

/// `x in N u (bound, inf)`.
fn admissible(x: f64, bound: f64) -> bool {
    is_natural(x) || x > bound
}

/// Parameters of the sharp Ulyanov inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UlyanovParams {
    pub p: Exponent,
    pub q: Exponent,
    pub alpha: f64,
    pub gamma: f64,
    /// Extra order of the strengthened form; only validated when present.
    pub m: Option<f64>,
    pub q1: f64,
    pub theta: f64,
    pub tau: Exponent,
}

impl UlyanovParams {
    /// Validates `alpha in N u ((1-1/q)_+, inf)` and `alpha+gamma in N u ((1/p-1)_+, inf)`
    /// (and `alpha+m`, `m-gamma` in the same set when `m` is given).
    pub fn new(p: Exponent, q: Exponent, alpha: f64, gamma: f64, m: Option<f64>) -> Result<Self> {
        let hyp = |condition: String| Error::Hypothesis { property: "P9".into(), condition };
        if p.value() >= q.value() {
            return Err(hyp(format!("need p < q, got p = {p}, q = {q}")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(hyp(format!("need gamma >= 0, got {gamma}")));
        }
        let qb = (1.0 - q.reciprocal()).max(0.0);
        let pb = p.deficiency();
        if !admissible(alpha, qb) {
            return Err(hyp(format!("alpha = {alpha} not in N u ({qb}, inf)")));
        }
        if !admissible(alpha + gamma, pb) {
            return Err(hyp(format!("alpha + gamma = {} not in N u ({pb}, inf)", alpha + gamma)));
        }
        if let Some(m) = m {
            for (name, x) in [("alpha + m", alpha + m), ("m - gamma", m - gamma)] {
                if !admissible(x, pb) {
                    return Err(hyp(format!("{name} = {x} not in N u ({pb}, inf)")));
                }
            }
        }
        Ok(Self { p, q, alpha, gamma, m, q1: q.q1(), theta: p.theta(), tau: p.tau() })
    }

    /// Branch of the eta table for dimension `d`.
    pub fn regime(&self, d: usize) -> Result<EtaBranch> {
        EtaBranch::select(self, d)
    }
}

/// Rows of the two eta tables, in printed order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EtaBranch {
    /// `0<p<=1`, `gamma > d(1-1/q)_+`: `t^{d(1/p-1)}`.
    LowAbove,
    /// `gamma = d(1-1/q)_+ >= 1`, `d >= 2`, `alpha+gamma in N`: `t^{d(1/p-1)}`.
    LowCriticalNatural,
    /// `gamma = d(1-1/q)_+ >= 1`, `d >= 2`, `alpha+gamma not in N`: `t^{d(1/p-1)} ln^{1/q1}(t+1)`.
    LowCriticalFractional,
    /// `0 < gamma = d(1-1/q)_+ = 1`, `d = 1`: `t^{d(1/p-1)} ln^{1/q}(t+1)`.
    LowCriticalLine,
    /// `0 < gamma = d(1-1/q)_+ < 1`: `t^{d(1/p-1)} ln^{1/q}(t+1)`.
    LowCriticalSmall,
    /// `0 < gamma < d(1-1/q)_+`: `t^{d(1/p-1/q)-gamma}`.
    LowBelow,
    /// `gamma = 0`: `t^{d(1/p-1/q)}`.
    LowZero,
    /// `1<p<q<inf`, `gamma >= d(1/p-1/q)`: 1.
    HighFinite,
    /// `q = inf`, `gamma > d/p`: 1.
    HighInfAbove,
    /// `q = inf`, `gamma = d/p`: `ln^{1/p'}(t+1)`.
    HighInfCritical,
    /// `0 <= gamma < d(1/p-1/q)`: `t^{d(1/p-1/q)-gamma}`.
    HighBelow,
}

impl EtaBranch {
    fn select(u: &UlyanovParams, d: usize) -> Result<Self> {
        let df = d as f64;
        let (ip, iq, g) = (u.p.reciprocal(), u.q.reciprocal(), u.gamma);
        let mut failed = Vec::new();
        if !(u.p.value() < u.q.value()) {
            failed.push(format!("p < q (p = {}, q = {})", u.p, u.q));
            return Err(Error::Regime { failed });
        }
        if u.p.value() <= 1.0 {
            let thr = df * (1.0 - iq).max(0.0);
            let crit = close(g, thr);
            let nat = is_natural(u.alpha + g);
            let rows: [(EtaBranch, bool, String); 7] = [
                (EtaBranch::LowAbove, g > thr && !crit, format!("gamma > d(1-1/q)_+ = {thr}")),
                (
                    EtaBranch::LowCriticalNatural,
                    crit && thr >= 1.0 - EQ_TOL && d >= 2 && nat,
                    "gamma = d(1-1/q)_+ >= 1, d >= 2, alpha+gamma in N".into(),
                ),
                (
                    EtaBranch::LowCriticalFractional,
                    crit && thr >= 1.0 - EQ_TOL && d >= 2 && !nat,
                    "gamma = d(1-1/q)_+ >= 1, d >= 2, alpha+gamma not in N".into(),
                ),
                (EtaBranch::LowCriticalLine, g > 0.0 && crit && close(thr, 1.0) && d == 1, "0 < gamma = d(1-1/q)_+ = 1, d = 1".into()),
                (EtaBranch::LowCriticalSmall, g > 0.0 && crit && thr < 1.0 - EQ_TOL, "0 < gamma = d(1-1/q)_+ < 1".into()),
                (EtaBranch::LowBelow, g > 0.0 && g < thr && !crit, format!("0 < gamma < d(1-1/q)_+ = {thr}")),
                (EtaBranch::LowZero, g == 0.0, "gamma = 0".into()),
            ];
            for (b, ok, cond) in rows {
                if ok {
                    return Ok(b);
                }
                failed.push(cond);
            }
        } else {
            let thr = df * (ip - iq);
            let crit = close(g, df * ip);
            let rows: [(EtaBranch, bool, String); 4] = [
                (
                    EtaBranch::HighFinite,
                    !u.q.is_infinite() && (g >= thr || close(g, thr)),
                    format!("gamma >= d(1/p-1/q) = {thr}, q < inf"),
                ),
                (EtaBranch::HighInfAbove, u.q.is_infinite() && g > df * ip && !crit, format!("gamma > d/p = {}, q = inf", df * ip)),
                (EtaBranch::HighInfCritical, u.q.is_infinite() && crit, format!("gamma = d/p = {}, q = inf", df * ip)),
                (EtaBranch::HighBelow, g >= 0.0 && g < thr && !close(g, thr), format!("0 <= gamma < d(1/p-1/q) = {thr}")),
            ];
            for (b, ok, cond) in rows {
                if ok {
                    return Ok(b);
                }
                failed.push(cond);
            }
        }
        Err(Error::Regime { failed })
    }

    /// Power `a` and log exponent `b` with `eta(t) = t^a ln^b(t+1)`.
    pub fn exponents(&self, u: &UlyanovParams, d: usize) -> (f64, f64) {
        let df = d as f64;
        let (ip, iq) = (u.p.reciprocal(), u.q.reciprocal());
        let low = df * (ip - 1.0);
        match self {
            EtaBranch::LowAbove | EtaBranch::LowCriticalNatural => (low, 0.0),
            EtaBranch::LowCriticalFractional => (low, 1.0 / u.q1),
            EtaBranch::LowCriticalLine | EtaBranch::LowCriticalSmall => (low, iq),
            EtaBranch::LowBelow | EtaBranch::HighBelow => (df * (ip - iq) - u.gamma, 0.0),
            EtaBranch::LowZero => (df * (ip - iq), 0.0),
            EtaBranch::HighFinite | EtaBranch::HighInfAbove => (0.0, 0.0),
            EtaBranch::HighInfCritical => (0.0, 1.0 - ip),
        }
    }
}

/// `eta(t)` for `t >= 1`.
pub fn eta(t: f64, params: &UlyanovParams, d: usize) -> Result<f64> {
    if !(t >= 1.0 && t.is_finite()) {
        return Err(Error::Parameter(format!("eta needs finite t >= 1, got {t}")));
    }
    let b = params.regime(d)?;
    Ok(eta_value(t, b.exponents(params, d)))
}

pub(crate) fn eta_value(t: f64, (a, b): (f64, f64)) -> f64 {
    let l = if b == 0.0 { 1.0 } else { (t + 1.0).ln().powf(b) };
    t.powf(a) * l
}

/// Whether the `delta^alpha ||f||_p` term may be omitted.
pub fn drops_norm_term(u: &UlyanovParams, d: usize) -> bool {
    let df = d as f64;
    let (p, q, g) = (u.p.value(), u.q.value(), u.gamma);
    let (ip, iq) = (u.p.reciprocal(), u.q.reciprocal());
    let low_thr = df * (1.0 - iq);
    let high_thr = df * (ip - iq);
    (close(g, 0.0) && p < q && q <= 1.0)
        || (p <= 1.0 && q > 1.0 && g >= 0.0 && g < low_thr && !close(g, low_thr))
        || (close(g, 1.0) && d == 1 && p <= 1.0 && u.q.is_infinite())
        || (close(g, low_thr) && low_thr >= 1.0 - EQ_TOL && p <= 1.0 && q > 1.0 && d >= 2 && is_natural(u.alpha + g))
        || (p > 1.0 && !u.q.is_infinite() && g >= 0.0 && (g <= high_thr || close(g, high_thr)))
        || (p > 1.0 && u.q.is_infinite() && g >= 0.0 && g < df * ip && !close(g, df * ip))
}
