//! Fractional binomials, fractional differences and moduli of smoothness.
//!
//! Every supremum over `|h| <= delta` is a maximum over a fixed design:
//! the directions of [`direction_design`] times `m` magnitudes
//! `delta (1 - j/m)`, `j = 0..m`. Curves over a delta-grid take the union
//! of the designs of all grid points, so a curve is exactly nondecreasing.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::grid::{quasi_norm, quasi_norm_values, Exponent, GridFunction, SmoothnessOrder, TorusGrid};
use crate::spectral::{direction_design, inverse, transform, Direction, SpectralFunction};

/// `binom(alpha, nu)` as the running product of `(alpha - k + 1)/k`.
pub fn frac_binomial(alpha: f64, nu: u64) -> f64 {
    (1..=nu).fold(1.0, |acc, k| acc * (alpha - k as f64 + 1.0) / k as f64)
}

/// `ln Gamma(x + a) - ln Gamma(x + b)`, with a Stirling expansion for large x.
fn ln_gamma_ratio(x: f64, a: f64, b: f64) -> f64 {
    if x < 1e4 {
        ln_gamma(x + a) - ln_gamma(x + b)
    } else {
        let c = a - b;
        c * x.ln() + c * (a + b - 1.0) / (2.0 * x)
    }
}

/// `ln |binom(alpha, n)|` for non-integer alpha and real n > alpha.
fn ln_abs_binomial(alpha: f64, n: f64) -> f64 {
    // |binom(alpha, n)| = Gamma(n - alpha) / (|Gamma(-alpha)| Gamma(n + 1))
    let ln_abs_gamma_neg = std::f64::consts::PI.ln() - (std::f64::consts::PI * alpha).sin().abs().ln() - ln_gamma(1.0 + alpha);
    ln_gamma_ratio(n, -alpha, 1.0) - ln_abs_gamma_neg
}

/// Upper bound on `sum_{nu > n} |binom(alpha, nu)|^s` for n > alpha.
///
/// Uses `|binom(alpha, nu)| <= |binom(alpha, n)| ((n+1)/(nu+1))^{alpha+1}`,
/// which follows from the term ratio `(nu - alpha)/(nu + 1)`.
fn binomial_tail_bound(alpha: f64, s: f64, n: f64) -> f64 {
    (s * ln_abs_binomial(alpha, n)).exp() * (n + 1.0) / (s * (alpha + 1.0) - 1.0)
}

/// Smallest N with `sum_{nu > N} |binom(alpha, nu)|^{min(p,1)} < tol`.
///
/// Integer alpha gives N = alpha. Otherwise N comes from the analytic tail
/// bound by bisection; it saturates at `u64::MAX` when the series converges
/// too slowly to be representable.
pub fn series_truncation(alpha: SmoothnessOrder, p: Exponent, tol: f64) -> Result<u64> {
    alpha.require_admissible(p)?;
    let a = alpha.value();
    if alpha.is_integer() {
        return Ok(a.round() as u64);
    }
    let s = p.value().min(1.0);
    let start = a.ceil();
    if binomial_tail_bound(a, s, start) < tol {
        return Ok(start as u64);
    }
    let mut hi = start.max(1.0) * 2.0;
    while binomial_tail_bound(a, s, hi) >= tol {
        hi *= 2.0;
        if hi > u64::MAX as f64 {
            return Ok(u64::MAX);
        }
    }
    let mut lo = hi / 2.0;
    while hi - lo > 1.0 {
        let mid = (0.5 * (lo + hi)).floor();
        if mid <= lo || mid >= hi {
            break;
        }
        if binomial_tail_bound(a, s, mid) < tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi as u64)
}

/// `(sum_nu |binom(alpha, nu)|^s)^{1/s}` with `s = min(p, 1)`: the constant in
/// `omega_alpha(f, delta)_p <= C ||f||_p`. For non-integer alpha the value is
/// an upper bound accurate to about 1e-10.
pub fn binomial_constant(alpha: SmoothnessOrder, p: Exponent) -> Result<f64> {
    alpha.require_admissible(p)?;
    let a = alpha.value();
    let s = p.value().min(1.0);
    if alpha.is_integer() {
        let k = a.round() as u64;
        let sum: f64 = (0..=k).map(|nu| frac_binomial(a, nu).abs().powf(s)).sum();
        return Ok(sum.powf(1.0 / s));
    }
    let head = a.ceil() as u64;
    let mut sum: f64 = (0..=head).map(|nu| frac_binomial(a, nu).abs().powf(s)).sum();
    if s == 1.0 {
        // beyond alpha the signed terms share one sign and all terms sum to zero
        let partial: f64 = (0..=head).map(|nu| signed(a, nu)).sum();
        return Ok(sum + partial.abs());
    }
    let n = series_truncation(alpha, p, 1e-10)?.clamp(head, head + (1 << 20));
    let mut c = frac_binomial(a, head);
    for nu in head + 1..=n {
        c *= (a - nu as f64 + 1.0) / nu as f64;
        sum += c.abs().powf(s);
    }
    sum += binomial_tail_bound(a, s, n as f64);
    Ok(sum.powf(1.0 / s))
}

fn signed(alpha: f64, nu: u64) -> f64 {
    let c = frac_binomial(alpha, nu);
    if nu % 2 == 0 {
        c
    } else {
        -c
    }
}

/// How the fractional difference is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DifferenceMethod {
    /// Binomial series of exact spectral translates.
    Series,
    /// Closed symbol `e^{i alpha t} (1 - e^{-it})^alpha`.
    Spectral,
}

/// Vector step `h zeta` with `h > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectionStep {
    pub direction: Direction,
    pub step: f64,
}

impl DirectionStep {
    pub fn new(direction: Direction, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::Parameter(format!("step must be positive, got {step}")));
        }
        Ok(Self { direction, step })
    }

    pub fn vector(&self) -> [f64; 2] {
        let z = self.direction.components();
        [self.step * z[0], self.step * z[1]]
    }
}

/// Closed symbol of the difference at `t = (h, omega)`.
pub fn difference_symbol(t: f64, alpha: f64) -> Complex64 {
    if alpha.fract() == 0.0 && (1.0..=64.0).contains(&alpha) {
        // e^{irt}(1 - e^{-it})^r = (e^{it} - 1)^r
        return (Complex64::from_polar(1.0, t) - 1.0).powu(alpha as u32);
    }
    // 1 - e^{-it} = 2 sin(r/2) e^{i(sgn(r) pi - r)/2} with r = t mod 2 pi in [-pi, pi]
    let r = t - TAU * (t / TAU).round();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let modulus = (2.0 * (0.5 * r).sin()).abs().powf(alpha);
    Complex64::from_polar(modulus, alpha * (t + r.signum() * FRAC_PI_2 - 0.5 * r))
}

const EULER_TERMS: usize = 12;
const MAX_DIRECT_TERMS: u64 = 1 << 24;

/// Symbol of the binomial series `sum_nu (-1)^nu binom(alpha,nu) e^{i(alpha-nu)t}`.
///
/// The first M terms are summed directly with M chosen so that `M |1 - z| >= 200`,
/// `z = e^{-it}`. The remainder is summed by repeated summation by parts;
/// the j-th backward difference of `(-1)^nu binom(alpha, nu)` is
/// `(-1)^nu binom(alpha + j, nu)`, so every correction term is a single
/// binomial and no cancellation occurs.
pub fn series_symbol(t: f64, alpha: f64) -> Complex64 {
    let zero = Complex64::new(0.0, 0.0);
    let z = Complex64::from_polar(1.0, -t);
    let one_minus_z = Complex64::new(1.0, 0.0) - z;
    if one_minus_z.norm() == 0.0 {
        // (1 - 1)^alpha = 0
        return zero;
    }
    let integer = SmoothnessOrder::new(alpha).map(|a| a.is_integer()).unwrap_or(false);
    let m = if integer {
        alpha.round() as u64 + 1
    } else {
        ((200.0 / one_minus_z.norm()).ceil() as u64).clamp(64, MAX_DIRECT_TERMS).max(alpha.ceil() as u64 + 1)
    };
    let mut sum = NeumaierSum::default();
    let mut a = 1.0;
    let mut zn = Complex64::new(1.0, 0.0);
    for nu in 0..m {
        // z^nu by recurrence, resynchronised every 256 terms
        if nu % 256 == 0 {
            zn = Complex64::from_polar(1.0, -(nu as f64) * t);
        }
        sum.add(a * zn);
        zn *= z;
        a *= (nu as f64 - alpha) / (nu as f64 + 1.0);
    }
    if !integer {
        // a now holds (-1)^M binom(alpha, M)
        let mut b = a;
        let mut tail = zero;
        let mut denom = one_minus_z;
        for j in 0..EULER_TERMS {
            tail += Complex64::from_polar(1.0, -(j as f64) * t) * b / denom;
            b *= (-alpha - (j as f64 + 1.0)) / (m as f64 + j as f64 + 1.0);
            denom *= one_minus_z;
        }
        sum.add(Complex64::from_polar(1.0, -(m as f64) * t) * tail);
    }
    Complex64::from_polar(1.0, alpha * t) * sum.value()
}

#[derive(Default)]
struct NeumaierSum {
    s: Complex64,
    c: Complex64,
}

impl NeumaierSum {
    fn add(&mut self, x: Complex64) {
        let comp = |s: f64, x: f64| {
            let t = s + x;
            let c = if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
            (t, c)
        };
        let (re, cr) = comp(self.s.re, x.re);
        let (im, ci) = comp(self.s.im, x.im);
        self.s = Complex64::new(re, im);
        self.c += Complex64::new(cr, ci);
    }

    fn value(&self) -> Complex64 {
        self.s + self.c
    }
}

/// Applies a frequency-wise multiplier, evaluating it only on nonzero coefficients.
fn apply_sparse(s: &SpectralFunction, symbol: impl Fn([f64; 2]) -> Complex64) -> Result<SpectralFunction> {
    let grid = *s.grid();
    let mut coeffs = Vec::with_capacity(grid.len());
    for (k, c) in s.coefficients().iter().enumerate() {
        if *c == Complex64::new(0.0, 0.0) {
            coeffs.push(*c);
            continue;
        }
        let m = symbol(grid.frequency(k));
        if !(m.re.is_finite() && m.im.is_finite()) {
            let xi = grid.frequency_index(k);
            return Err(Error::InvalidSymbol { frequency: xi[..grid.dim()].to_vec() });
        }
        coeffs.push(c * m);
    }
    SpectralFunction::from_coefficients(grid, coeffs)
}

/// Spectrum of `Delta_{h zeta}^alpha f`.
pub fn frac_difference_spectrum(
    s: &SpectralFunction,
    step: DirectionStep,
    alpha: f64,
    method: DifferenceMethod,
) -> Result<SpectralFunction> {
    crate::spectral::check_direction(s.grid(), step.direction)?;
    let h = step.vector();
    let dot = |w: [f64; 2]| h[0] * w[0] + h[1] * w[1];
    match method {
        DifferenceMethod::Spectral => apply_sparse(s, |w| difference_symbol(dot(w), alpha)),
        DifferenceMethod::Series => apply_sparse(s, |w| series_symbol(dot(w), alpha)),
    }
}

/// `Delta_{h zeta}^alpha f(x) = sum_nu (-1)^nu binom(alpha,nu) f(x + (alpha - nu) h zeta)`.
pub fn frac_difference(
    f: &GridFunction,
    step: DirectionStep,
    alpha: SmoothnessOrder,
    method: DifferenceMethod,
) -> Result<GridFunction> {
    Ok(inverse(&frac_difference_spectrum(&transform(f), step, alpha.value(), method)?))
}

/// Direction and magnitude design for sampled suprema.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sampling {
    pub directions: Vec<Direction>,
    /// Magnitudes per delta: `delta (1 - j/m)`, `j = 0..m`.
    pub magnitudes: usize,
    pub method: DifferenceMethod,
}

impl Sampling {
    /// Full direction design with 16 magnitudes and the closed symbol.
    pub fn standard(dim: usize) -> Self {
        Self { directions: direction_design(dim), magnitudes: 16, method: DifferenceMethod::Spectral }
    }

    /// Steps along `+e_j` and `-e_j` only.
    pub fn axis(dim: usize, axis: usize) -> Result<Self> {
        Ok(Self {
            directions: vec![Direction::axis(dim, axis, true)?, Direction::axis(dim, axis, false)?],
            magnitudes: 16,
            method: DifferenceMethod::Spectral,
        })
    }
}

/// `delta -> omega_alpha(f, delta)_p` on a delta-grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusCurve {
    pub alpha: f64,
    pub p: Exponent,
    pub delta_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub directions: usize,
    pub magnitudes: usize,
    /// Series length for a 1e-10 tail in the min(p,1)-sum.
    pub n_terms: u64,
    pub method: DifferenceMethod,
}

impl ModulusCurve {
    /// Builds a curve from precomputed values (used by tests and quadrature oracles).
    pub fn from_values(alpha: f64, p: Exponent, delta_grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_delta_grid(&delta_grid)?;
        if values.len() != delta_grid.len() {
            return Err(Error::ShapeMismatch { expected: delta_grid.len(), got: values.len() });
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput("curve values must be finite and nonnegative".into()));
        }
        Ok(Self {
            alpha,
            p,
            delta_grid,
            values,
            directions: 0,
            magnitudes: 0,
            n_terms: 0,
            method: DifferenceMethod::Spectral,
        })
    }

    /// Two columns `delta,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,value\n");
        for (d, v) in self.delta_grid.iter().zip(&self.values) {
            out.push_str(&format!("{d:e},{v:e}\n"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("curve serializes")
    }
}

/// `n` geometric points from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && n >= 2) {
        return Err(Error::Parameter(format!("bad geometric grid [{lo}, {hi}] with {n} points")));
    }
    let r = (hi / lo).ln() / (n - 1) as f64;
    Ok((0..n).map(|i| if i + 1 == n { hi } else { lo * (r * i as f64).exp() }).collect())
}

/// 24 geometric points from four grid cells up to 1.
pub fn default_delta_grid(grid: &TorusGrid) -> Vec<f64> {
    geometric_grid(4.0 * grid.spacing(), 1.0, 24).expect("four cells are below 1 for admissible grids")
}

fn check_delta_grid(deltas: &[f64]) -> Result<()> {
    if deltas.is_empty() || deltas.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(Error::Parameter("delta values must be positive".into()));
    }
    if deltas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("delta grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Union of the magnitude designs of every delta, ascending.
fn union_magnitudes(deltas: &[f64], m: usize) -> Vec<f64> {
    let mut t: Vec<f64> = deltas
        .iter()
        .flat_map(|&d| (0..m).map(move |j| d * (1.0 - j as f64 / m as f64)))
        .collect();
    t.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    t.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs());
    t
}

/// Norms of `F^{-1}(symbol(h, .) F f)` for every step vector, one row per step,
/// one column per exponent. Runs in parallel; rows come back in input order.
fn sweep_norms(
    s: &SpectralFunction,
    steps: &[[f64; 2]],
    ps: &[Exponent],
    symbol: impl Fn([f64; 2], [f64; 2]) -> Complex64 + Sync,
) -> Result<Vec<Vec<f64>>> {
    let cell = s.grid().cell_volume();
    steps
        .par_iter()
        .map(|h| {
            let d = inverse(&apply_sparse(s, |w| symbol(*h, w))?);
            ps.iter().map(|&p| quasi_norm_values(d.values(), cell, p)).collect()
        })
        .collect()
}

fn dot(h: [f64; 2], w: [f64; 2]) -> f64 {
    h[0] * w[0] + h[1] * w[1]
}

/// Moduli for several exponents sharing one difference sweep.
pub fn modulus_curves(
    f: &GridFunction,
    deltas: &[f64],
    alpha: SmoothnessOrder,
    ps: &[Exponent],
    sampling: &Sampling,
) -> Result<Vec<ModulusCurve>> {
    check_delta_grid(deltas)?;
    for &p in ps {
        alpha.require_admissible(p)?;
    }
    for &z in &sampling.directions {
        crate::spectral::check_direction(f.grid(), z)?;
    }
    if sampling.directions.is_empty() || sampling.magnitudes == 0 {
        return Err(Error::Parameter("empty sampling design".into()));
    }
    let a = alpha.value();
    let mags = union_magnitudes(deltas, sampling.magnitudes);
    let steps: Vec<[f64; 2]> = mags
        .iter()
        .flat_map(|&t| {
            sampling.directions.iter().map(move |z| {
                let c = z.components();
                [t * c[0], t * c[1]]
            })
        })
        .collect();
    let method = sampling.method;
    let norms = sweep_norms(&transform(f), &steps, ps, |h, w| match method {
        DifferenceMethod::Spectral => difference_symbol(dot(h, w), a),
        DifferenceMethod::Series => series_symbol(dot(h, w), a),
    })?;
    let nd = sampling.directions.len();
    ps.iter()
        .enumerate()
        .map(|(ip, &p)| {
            let per_mag: Vec<f64> =
                norms.chunks(nd).map(|rows| rows.iter().map(|r| r[ip]).fold(0.0, f64::max)).collect();
            let values = running_sup(&mags, &per_mag, deltas);
            Ok(ModulusCurve {
                alpha: a,
                p,
                delta_grid: deltas.to_vec(),
                values,
                directions: nd,
                magnitudes: sampling.magnitudes,
                n_terms: series_truncation(alpha, p, 1e-10)?,
                method,
            })
        })
        .collect()
}

fn running_sup(mags: &[f64], per_mag: &[f64], deltas: &[f64]) -> Vec<f64> {
    deltas
        .iter()
        .map(|&d| {
            mags.iter()
                .zip(per_mag)
                .take_while(|(t, _)| **t <= d * (1.0 + 1e-12))
                .map(|(_, v)| *v)
                .fold(0.0, f64::max)
        })
        .collect()
}

/// `omega_alpha(f, delta)_p` sampled on a delta-grid.
pub fn modulus_curve(
    f: &GridFunction,
    deltas: &[f64],
    alpha: SmoothnessOrder,
    p: Exponent,
    sampling: &Sampling,
) -> Result<ModulusCurve> {
    Ok(modulus_curves(f, deltas, alpha, &[p], sampling)?.remove(0))
}

/// `omega_alpha(f, delta)_p`: max over the design of `||Delta_{t zeta}^alpha f||_p`.
pub fn modulus(f: &GridFunction, delta: f64, alpha: SmoothnessOrder, p: Exponent, sampling: &Sampling) -> Result<f64> {
    Ok(modulus_curve(f, &[delta], alpha, p, sampling)?.values[0])
}

fn integer_order(r: u32) -> Result<SmoothnessOrder> {
    if r == 0 {
        return Err(Error::Parameter("order must be a positive integer".into()));
    }
    SmoothnessOrder::new(r as f64)
}

/// Partial modulus along axis j (steps `+- t e_j`) on a delta-grid.
pub fn partial_modulus_curve(f: &GridFunction, axis: usize, deltas: &[f64], r: u32, p: Exponent) -> Result<ModulusCurve> {
    let sampling = Sampling::axis(f.grid().dim(), axis)?;
    modulus_curve(f, deltas, integer_order(r)?, p, &sampling)
}

/// `omega_r^{(j)}(f, delta)_p`.
pub fn partial_modulus(f: &GridFunction, axis: usize, delta: f64, r: u32, p: Exponent) -> Result<f64> {
    Ok(partial_modulus_curve(f, axis, &[delta], r, p)?.values[0])
}

/// Mixed modulus with integer orders per axis on a delta-grid: sup over the
/// standard design of `||Delta_{e_1 h_1}^{k_1} ... Delta_{e_d h_d}^{k_d} f||_p`.
pub fn mixed_modulus_curve(f: &GridFunction, orders: &[u32], deltas: &[f64], p: Exponent) -> Result<ModulusCurve> {
    let dim = f.grid().dim();
    if orders.len() != dim {
        return Err(Error::Parameter(format!("need {dim} orders, got {}", orders.len())));
    }
    let r: u32 = orders.iter().sum();
    check_delta_grid(deltas)?;
    let sampling = Sampling::standard(dim);
    let mags = union_magnitudes(deltas, sampling.magnitudes);
    let steps: Vec<[f64; 2]> = mags
        .iter()
        .flat_map(|&t| sampling.directions.iter().map(move |z| [t * z.components()[0], t * z.components()[1]]))
        .collect();
    let k = [orders[0], orders.get(1).copied().unwrap_or(0)];
    let norms = sweep_norms(&transform(f), &steps, &[p], |h, w| {
        let one = Complex64::new(1.0, 0.0);
        (0..dim).fold(one, |acc, j| acc * (Complex64::from_polar(1.0, h[j] * w[j]) - one).powu(k[j]))
    })?;
    let nd = sampling.directions.len();
    let per_mag: Vec<f64> = norms.chunks(nd).map(|rows| rows.iter().map(|r| r[0]).fold(0.0, f64::max)).collect();
    Ok(ModulusCurve {
        alpha: r as f64,
        p,
        delta_grid: deltas.to_vec(),
        values: running_sup(&mags, &per_mag, deltas),
        directions: nd,
        magnitudes: sampling.magnitudes,
        n_terms: r as u64,
        method: DifferenceMethod::Spectral,
    })
}

/// `omega_{k_1,...,k_d}(f, delta)_p`.
pub fn mixed_modulus(f: &GridFunction, orders: &[u32], delta: f64, p: Exponent) -> Result<f64> {
    Ok(mixed_modulus_curve(f, orders, &[delta], p)?.values[0])
}

/// Which averaged modulus to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AveragedForm {
    /// `(delta^{-d} int_{|h|<=delta} ||Delta_h^r f||_p^q dh)^{1/q}`.
    Outer,
    /// `|| (delta^{-d} int_{|h|<=delta} |Delta_h^r f|^q dh)^{1/q} ||_p`, needs q <= p.
    Inner,
}

/// Midpoint nodes of `[-delta, delta]^d` (16 per axis) inside the ball, with weight
/// `(2 delta/16)^d delta^{-d}`.
fn ball_nodes(dim: usize, delta: f64) -> (Vec<[f64; 2]>, f64) {
    const M: usize = 16;
    let step = 2.0 * delta / M as f64;
    let axis: Vec<f64> = (0..M).map(|i| -delta + (i as f64 + 0.5) * step).collect();
    let nodes = if dim == 1 {
        axis.iter().map(|&x| [x, 0.0]).collect()
    } else {
        axis.iter()
            .flat_map(|&x| axis.iter().map(move |&y| [x, y]))
            .filter(|h| h[0].hypot(h[1]) <= delta)
            .collect()
    };
    (nodes, (step / delta).powi(dim as i32))
}

/// Averaged modulus of integer order r.
pub fn averaged_modulus(f: &GridFunction, delta: f64, r: u32, p: Exponent, q: f64, form: AveragedForm) -> Result<f64> {
    integer_order(r)?;
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::Parameter(format!("averaging exponent must be finite and positive, got {q}")));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Parameter("delta must be positive".into()));
    }
    if form == AveragedForm::Inner && q > p.value() {
        return Err(Error::Parameter(format!("inner averaged modulus needs q <= p, got q = {q}, p = {p}")));
    }
    let (nodes, weight) = ball_nodes(f.grid().dim(), delta);
    let s = transform(f);
    let symbol = |h: [f64; 2], w: [f64; 2]| (Complex64::from_polar(1.0, dot(h, w)) - 1.0).powu(r);
    match form {
        AveragedForm::Outer => {
            let norms = sweep_norms(&s, &nodes, &[p], symbol)?;
            let powers: Vec<f64> = norms.iter().map(|n| weight * n[0].powf(q)).collect();
            Ok(crate::grid::pairwise_sum(&powers).powf(1.0 / q))
        }
        AveragedForm::Inner => {
            let diffs: Vec<Vec<f64>> = nodes
                .par_iter()
                .map(|h| {
                    let d = inverse(&apply_sparse(&s, |w| symbol(*h, w))?);
                    Ok(d.values().iter().map(|v| v.norm().powf(q)).collect())
                })
                .collect::<Result<_>>()?;
            let grid = *f.grid();
            let pointwise: Vec<Complex64> = (0..grid.len())
                .map(|k| {
                    let col: Vec<f64> = diffs.iter().map(|d| weight * d[k]).collect();
                    Complex64::new(crate::grid::pairwise_sum(&col).powf(1.0 / q), 0.0)
                })
                .collect();
            quasi_norm(&GridFunction::new(grid, pointwise)?, p)
        }
    }
}

/// A measured quantity with the spectral-tail reliability flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measured {
    pub value: f64,
    pub tail_warning: bool,
}

/// Multi-indices of total order r in dimension d.
pub fn multi_indices(dim: usize, r: u32) -> Vec<[u32; 2]> {
    if dim == 1 {
        vec![[r, 0]]
    } else {
        (0..=r).map(|i| [r - i, i]).collect()
    }
}

/// `sum_{|nu| = r} ||D^nu f||_p` with spectral partial derivatives.
pub fn sobolev_seminorm(f: &GridFunction, r: u32, p: Exponent) -> Result<Measured> {
    let s = transform(f);
    let tail_warning = s.tail_fraction() > crate::spectral::TAIL_THRESHOLD;
    Ok(Measured { value: sobolev_seminorm_spectrum(&s, r, p)?, tail_warning })
}

pub(crate) fn sobolev_seminorm_spectrum(s: &SpectralFunction, r: u32, p: Exponent) -> Result<f64> {
    let dim = s.grid().dim();
    multi_indices(dim, r)
        .into_iter()
        .map(|nu| {
            let d = s.apply(|w| {
                (0..dim).fold(Complex64::new(1.0, 0.0), |acc, j| acc * Complex64::new(0.0, w[j]).powu(nu[j]))
            })?;
            quasi_norm(&inverse(&d), p)
        })
        .sum()
}
