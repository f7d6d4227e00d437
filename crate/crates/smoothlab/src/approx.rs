//! Near-best bandlimited approximation, realizations and K-functionals.
//!
//! `E_sigma(f)_p` is always reported as the smallest error over a fixed
//! candidate set, hence an upper bound on the true best approximation.
//! Candidates, in tie-break order:
//! 1. smooth projection `v(|omega|/sigma)`;
//! 2. sharp projection onto `|omega| <= sigma` (the exact best for p = 2);
//! 3. sampling operators `V_{sigma,lambda}` for 8 shifts `lambda` in
//!    `[-1/sigma, 1/sigma]`, composed per axis with band `sigma/sqrt(d)` in 2-D;
//! 4. Riesz means `(1 - |omega|^2/sigma^2)_+^{d+1}`;
//! 5. the zero function.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{quasi_norm, Exponent, GridFunction, SmoothnessOrder};
use crate::spectral::{
    direction_design, directional_derivative_spectrum, gauss_mollify, interp_v_composite, inverse, project_spectrum,
    riesz_project, sharp_project, transform, SpectralFunction,
};

/// Shifts used by the sampling-operator candidates.
pub const SHIFTS: usize = 8;

/// Best candidate for one band.
#[derive(Debug, Clone)]
pub struct NearBest {
    pub approximant: SpectralFunction,
    /// `||f - P||_p`, an upper bound on `E_sigma(f)_p`.
    pub error: f64,
    pub candidate: String,
}

fn candidates(s: &SpectralFunction, sigma: f64) -> Result<Vec<(String, SpectralFunction)>> {
    let grid = *s.grid();
    let d = grid.dim();
    let mut out = vec![
        ("smooth-projection".to_string(), project_spectrum(s, sigma)?),
        ("sharp-projection".to_string(), sharp_project(s, sigma)?),
    ];
    // per-axis lattice with K/L <= sigma/sqrt(d), so the composite stays in the ball
    let k = (grid.period() * sigma / (d as f64).sqrt()).floor();
    if k >= 1.0 {
        let axis_sigma = k / grid.period();
        for i in 0..SHIFTS {
            let lambda = (-1.0 + 2.0 * i as f64 / (SHIFTS - 1) as f64) / sigma;
            let v = interp_v_composite(s, axis_sigma, &vec![lambda; d], 1)?;
            out.push((format!("sampling-operator(lambda={lambda:.6})"), v.with_band(sigma)));
        }
    }
    out.push(("riesz-means".to_string(), riesz_project(s, sigma, d as f64 + 1.0)?));
    let zero = vec![Complex64::new(0.0, 0.0); grid.len()];
    out.push(("zero".to_string(), SpectralFunction::from_coefficients(grid, zero)?.with_band(sigma)));
    Ok(out)
}

fn near_best_spectrum(f: &GridFunction, s: &SpectralFunction, sigma: f64, p: Exponent) -> Result<NearBest> {
    let cands = candidates(s, sigma)?;
    let errors: Vec<f64> = cands
        .par_iter()
        .map(|(_, c)| quasi_norm(&f.sub(&inverse(c))?, p))
        .collect::<Result<_>>()?;
    // first minimum wins ties
    let best = errors
        .iter()
        .enumerate()
        .fold(0, |b, (i, e)| if *e < errors[b] { i } else { b });
    let (name, approximant) = cands.into_iter().nth(best).expect("nonempty candidate set");
    Ok(NearBest { approximant, error: errors[best], candidate: name })
}

/// Near-best approximant of band `sigma` and its error.
pub fn near_best(f: &GridFunction, sigma: f64, p: Exponent) -> Result<NearBest> {
    near_best_spectrum(f, &transform(f), sigma, p)
}

/// `E_{sigma_k}` upper bounds for `sigma_0 = 0` and `sigma_k = 2^{k-1}`, k = 1..=K+1.
#[derive(Debug, Clone, Serialize)]
pub struct ApproximationCurve {
    pub p: Exponent,
    pub sigmas: Vec<f64>,
    /// Running minimum of `raw`.
    pub values: Vec<f64>,
    pub raw: Vec<f64>,
    pub candidates: Vec<String>,
    #[serde(skip)]
    pub approximants: Vec<SpectralFunction>,
}

impl ApproximationCurve {
    /// Two columns `sigma,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sigma,value\n");
        for (s, v) in self.sigmas.iter().zip(&self.values) {
            out.push_str(&format!("{s:e},{v:e}\n"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("curve serializes")
    }
}

/// Centre and radius of the smallest disc containing every value (randomized
/// incremental construction with a fixed shuffle).
pub fn enclosing_disc(values: &[Complex64]) -> (Complex64, f64) {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut pts = values.to_vec();
    pts.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(0));
    let inside = |c: Complex64, r: f64, z: Complex64| (z - c).norm() <= r * (1.0 + 1e-12) + 1e-300;
    let Some(&first) = pts.first() else { return (Complex64::new(0.0, 0.0), 0.0) };
    let (mut c, mut r) = (first, 0.0);
    for i in 1..pts.len() {
        if inside(c, r, pts[i]) {
            continue;
        }
        (c, r) = (pts[i], 0.0);
        for j in 0..i {
            if inside(c, r, pts[j]) {
                continue;
            }
            c = (pts[i] + pts[j]) / 2.0;
            r = (pts[i] - pts[j]).norm() / 2.0;
            for k in 0..j {
                if !inside(c, r, pts[k]) {
                    (c, r) = circumcircle(pts[i], pts[j], pts[k]);
                }
            }
        }
    }
    (c, r)
}

fn circumcircle(a: Complex64, b: Complex64, c: Complex64) -> (Complex64, f64) {
    let (bx, by) = ((b - a).re, (b - a).im);
    let (cx, cy) = ((c - a).re, (c - a).im);
    let det = 2.0 * (bx * cy - by * cx);
    if det.abs() <= 1e-300 {
        // collinear: diametral disc of the farthest pair
        let pairs = [(a, b), (a, c), (b, c)];
        let (u, v) = pairs
            .into_iter()
            .fold((a, b), |m, pq| if (pq.0 - pq.1).norm() > (m.0 - m.1).norm() { pq } else { m });
        return ((u + v) / 2.0, (u - v).norm() / 2.0);
    }
    let (b2, c2) = (bx * bx + by * by, cx * cx + cy * cy);
    let o = Complex64::new((cy * b2 - by * c2) / det, (bx * c2 - cx * b2) / det);
    (a + o, o.norm())
}

/// `E_0(f)_p` and its approximant: `||f||_p` with `P = 0` for finite p,
/// `inf_c ||f - c||_inf` with the optimal constant for p = inf.
pub fn zero_band_error(f: &GridFunction, p: Exponent) -> Result<(f64, SpectralFunction)> {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); f.grid().len()];
    let e = if p.is_infinite() {
        let (c, r) = enclosing_disc(f.values());
        coeffs[0] = c;
        r
    } else {
        quasi_norm(f, p)?
    };
    Ok((e, SpectralFunction::from_coefficients(*f.grid(), coeffs)?.with_band(0.0)))
}

/// Near-best errors at `sigma = 2^0 ... 2^K` preceded by `E_0` (see [`zero_band_error`]).
pub fn approx_curve(f: &GridFunction, p: Exponent, k_max: u32) -> Result<ApproximationCurve> {
    let s = transform(f);
    let mut sigmas = vec![0.0];
    let (e0, p0) = zero_band_error(f, p)?;
    let mut raw = vec![e0];
    let mut candidates = vec![if p.is_infinite() { "constant" } else { "zero" }.to_string()];
    let mut approximants = vec![p0];
    for k in 0..=k_max {
        let sigma = 2f64.powi(k as i32);
        let nb = near_best_spectrum(f, &s, sigma, p)?;
        sigmas.push(sigma);
        raw.push(nb.error);
        candidates.push(nb.candidate);
        approximants.push(nb.approximant);
    }
    let values = raw
        .iter()
        .scan(f64::INFINITY, |m, &e| {
            *m = m.min(e);
            Some(*m)
        })
        .collect();
    Ok(ApproximationCurve { p, sigmas, values, raw, candidates, approximants })
}

/// `sup_zeta ||D_zeta^alpha P||_p` over the direction design.
pub fn sup_directional(s: &SpectralFunction, alpha: SmoothnessOrder, p: Exponent) -> Result<f64> {
    let norms: Vec<f64> = direction_design(s.grid().dim())
        .par_iter()
        .map(|&z| quasi_norm(&inverse(&directional_derivative_spectrum(s, z, alpha.value())?), p))
        .collect::<Result<_>>()?;
    Ok(norms.into_iter().fold(0.0, f64::max))
}

/// Value of the realization functional and its witness.
#[derive(Debug, Clone)]
pub struct Realization {
    pub value: f64,
    pub witness: SpectralFunction,
    pub error: f64,
    pub derivative: f64,
}

/// `||f - P||_p + delta^alpha sup_zeta ||D_zeta^alpha P||_p` at the near-best `P` of band `1/delta`.
pub fn realization(f: &GridFunction, delta: f64, alpha: SmoothnessOrder, p: Exponent) -> Result<Realization> {
    alpha.require_admissible(p)?;
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Parameter("delta must be positive".into()));
    }
    let nb = near_best(f, 1.0 / delta, p)?;
    let derivative = sup_directional(&nb.approximant, alpha, p)?;
    Ok(Realization {
        value: nb.error + delta.powf(alpha.value()) * derivative,
        witness: nb.approximant,
        error: nb.error,
        derivative,
    })
}

/// Upper bound on `inf_g ||f - g||_p + delta^alpha sup_zeta ||D_zeta^alpha g||_p`.
///
/// Candidates: smooth projections and Gaussian mollifications at
/// `sigma in {1/(4 delta), 1/(2 delta), 1/delta, 2/delta}` (bands above the
/// Nyquist frequency are skipped), `g = f` and `g = 0`.
pub fn k_functional(f: &GridFunction, delta: f64, alpha: SmoothnessOrder, p: Exponent) -> Result<f64> {
    if p.value() < 1.0 {
        return Err(Error::Unsupported(format!(
            "the K-functional vanishes identically for p = {p} < 1; use the realization instead"
        )));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Parameter("delta must be positive".into()));
    }
    let s = transform(f);
    let nyq = f.grid().nyquist();
    let mut gs = vec![s.clone()];
    for c in [0.25, 0.5, 1.0, 2.0] {
        let sigma = c / delta;
        if sigma <= nyq {
            gs.push(project_spectrum(&s, sigma)?);
        }
        gs.push(gauss_mollify(&s, sigma)?);
    }
    let weight = delta.powf(alpha.value());
    let values: Vec<f64> = gs
        .par_iter()
        .map(|g| Ok(quasi_norm(&f.sub(&inverse(g))?, p)? + weight * sup_directional(g, alpha, p)?))
        .collect::<Result<_>>()?;
    let zero = quasi_norm(f, p)?;
    Ok(values.into_iter().fold(zero, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{corpus_entry, fejer_poly, random_trig_poly};
    use crate::grid::{periodize, TorusGrid};
    use std::f64::consts::PI;

    fn line(n: usize, l: f64) -> TorusGrid {
        TorusGrid::new(1, n, l).unwrap()
    }

    fn gaussian() -> GridFunction {
        let e = corpus_entry("gaussian").unwrap();
        periodize(&e, line(1024, 40.0)).unwrap().function
    }

    #[test]
    fn half_band_input_is_reproduced() {
        let g = line(256, 40.0);
        let f = inverse(&random_trig_poly(g, 4.0, 3).unwrap());
        for p in [Exponent::Finite(0.5), Exponent::Finite(1.0), Exponent::Infinity] {
            let nb = near_best(&f, 8.0, p).unwrap();
            assert!(nb.error <= 1e-10 * quasi_norm(&f, p).unwrap(), "{p}");
        }
        let z = GridFunction::zeros(g);
        assert_eq!(near_best(&z, 8.0, Exponent::Finite(0.5)).unwrap().error, 0.0);
    }

    #[test]
    fn gaussian_l2_error_is_the_parseval_tail() {
        let f = gaussian();
        let l = 40.0;
        for sigma in [1.0, 2.0, 4.0] {
            let nb = near_best(&f, sigma, Exponent::Finite(2.0)).unwrap();
            // closed-form coefficients sqrt(pi) e^{-omega^2/4} / L above the band
            let tail: f64 = (-512i64..512)
                .map(|k| 2.0 * PI * k as f64 / l)
                .filter(|w| w.abs() > sigma)
                .map(|w| (PI.sqrt() * (-w * w / 4.0).exp() / l).powi(2) * l)
                .sum::<f64>()
                .sqrt();
            assert!((nb.error - tail).abs() < 1e-10 * tail.max(1e-300) + 1e-15, "{sigma}");
            assert_eq!(nb.candidate, "sharp-projection");
        }
    }

    #[test]
    fn curve_conventions() {
        let g = line(1024, 40.0);
        let f = inverse(&fejer_poly(g, 4.0).unwrap());
        let p = Exponent::Finite(1.0);
        let c = approx_curve(&f, p, 5).unwrap();
        assert_eq!(c.values[0], quasi_norm(&f, p).unwrap());
        assert_eq!(c.sigmas, vec![0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0]);
        for (s, v) in c.sigmas.iter().zip(&c.values) {
            if *s >= 4.0 {
                assert!(*v < 1e-12, "{s} {v}");
            }
        }
        assert!(c.values.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(c.to_csv().lines().count(), 8);
    }

    #[test]
    fn gaussian_decay_is_super_polynomial() {
        let c = approx_curve(&gaussian(), Exponent::Finite(2.0), 3).unwrap();
        let slopes: Vec<f64> = (1..c.values.len() - 1)
            .map(|i| (c.values[i + 1] / c.values[i]).ln() / 2f64.ln())
            .collect();
        assert!(slopes.windows(2).all(|w| w[1] < w[0]), "{slopes:?}");
    }

    #[test]
    fn realization_of_bandlimited_input() {
        let g = line(512, 40.0);
        let f = random_trig_poly(g, 2.0, 11).unwrap();
        let delta = 0.25;
        let alpha = SmoothnessOrder::new(1.5).unwrap();
        for p in [Exponent::Finite(0.7), Exponent::Finite(2.0)] {
            let r = realization(&inverse(&f), delta, alpha, p).unwrap();
            let exact = delta.powf(1.5) * sup_directional(&f, alpha, p).unwrap();
            assert!((r.value - exact).abs() < 1e-10 * exact, "{p}");
        }
        let z = GridFunction::zeros(g);
        assert_eq!(realization(&z, delta, alpha, Exponent::Finite(0.7)).unwrap().value, 0.0);
    }

    #[test]
    fn k_functional_candidates_and_gating() {
        let f = gaussian();
        let alpha = SmoothnessOrder::new(2.0).unwrap();
        assert!(matches!(k_functional(&f, 0.1, alpha, Exponent::Finite(0.5)), Err(Error::Unsupported(_))));
        let p = Exponent::Finite(1.0);
        let delta = 3.0;
        let k = k_functional(&f, delta, alpha, p).unwrap();
        let with_f = delta.powi(2) * sup_directional(&transform(&f), alpha, p).unwrap();
        assert!(k <= with_f.min(quasi_norm(&f, p).unwrap()));
        assert_eq!(k_functional(&GridFunction::zeros(*f.grid()), 0.1, alpha, p).unwrap(), 0.0);
    }

    #[test]
    fn sup_directional_cases() {
        let g = line(64, 2.0 * PI);
        let alpha = SmoothnessOrder::new(0.5).unwrap();
        let c = transform(&GridFunction::from_fn(g, |_| Complex64::new(1.0, 0.0)));
        assert_eq!(sup_directional(&c, alpha, Exponent::Finite(2.0)).unwrap(), 0.0);
        let norms = |f: fn(f64) -> f64| -> Vec<f64> {
            let s = transform(&GridFunction::from_fn(g, |x| Complex64::new(f(x[0]), 0.0)));
            direction_design(1)
                .iter()
                .map(|&z| quasi_norm(&inverse(&directional_derivative_spectrum(&s, z, 0.5).unwrap()), Exponent::Finite(1.0)).unwrap())
                .collect()
        };
        // D_{-1} P is D_{+1} P reflected when P is even or odd
        for f in [|x: f64| x.cos() + (3.0 * x).cos(), |x: f64| x.sin() - 0.5 * (2.0 * x).sin()] {
            let n = norms(f);
            assert!((n[0] - n[1]).abs() < 1e-12 * n[0]);
        }
        let mixed = norms(|x| x.cos() + (3.0 * x).sin());
        assert!((mixed[0] - mixed[1]).abs() > 1e-3 * mixed[0]);
        let g2 = TorusGrid::new(2, 16, 2.0 * PI).unwrap();
        let w = transform(&GridFunction::from_fn(g2, |x| Complex64::from_polar(1.0, x[0] + x[1])));
        let a = SmoothnessOrder::new(1.5).unwrap();
        let v = sup_directional(&w, a, Exponent::Infinity).unwrap();
        let full = 2f64.sqrt().powf(1.5);
        // the design misses the diagonal by 11.25 degrees at most
        assert!(v <= full * (1.0 + 1e-12) && v >= full * (PI / 16.0).cos().powf(1.5) * (1.0 - 1e-12));
    }

    #[test]
    fn enclosing_disc_oracles() {
        // real values: centre at the midrange
        let vals: Vec<Complex64> = [3.0, -1.0, 0.5, 2.0].iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let (c, r) = enclosing_disc(&vals);
        assert!((r - 2.0).abs() < 1e-12 && (c - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        // brute force over pairs and triples
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let pts: Vec<Complex64> = (0..12).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let covers = |c: Complex64, r: f64| pts.iter().all(|z| (z - c).norm() <= r * (1.0 + 1e-9));
            let mut best = f64::INFINITY;
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    let (c, r) = ((pts[i] + pts[j]) / 2.0, (pts[i] - pts[j]).norm() / 2.0);
                    if covers(c, r) {
                        best = best.min(r);
                    }
                    for k in j + 1..pts.len() {
                        let (c, r) = circumcircle(pts[i], pts[j], pts[k]);
                        if covers(c, r) {
                            best = best.min(r);
                        }
                    }
                }
            }
            let (c, r) = enclosing_disc(&pts);
            assert!(covers(c, r));
            assert!((r - best).abs() < 1e-12 * best.max(1.0));
        }
    }

    #[test]
    fn zero_band_error_conventions() {
        let g = line(256, 2.0 * PI);
        let wave = GridFunction::from_fn(g, |x| Complex64::from_polar(1.0, x[0]) + Complex64::new(5.0, 0.0));
        let (e, p0) = zero_band_error(&wave, Exponent::Infinity).unwrap();
        assert!((e - 1.0).abs() < 1e-12);
        assert!((quasi_norm(&wave.sub(&inverse(&p0)).unwrap(), Exponent::Infinity).unwrap() - e).abs() < 1e-12);
        let (e2, _) = zero_band_error(&wave, Exponent::Finite(2.0)).unwrap();
        assert!((e2 - quasi_norm(&wave, Exponent::Finite(2.0)).unwrap()).abs() < 1e-12);
        let c = approx_curve(&wave, Exponent::Infinity, 2).unwrap();
        assert_eq!(c.candidates[0], "constant");
        assert!((c.raw[0] - 1.0).abs() < 1e-12);
    }
}
