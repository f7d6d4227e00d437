//! Log-grid quadrature of modulus curves.

use serde::Serialize;

use super::eta::{drops_norm_term, eta_value, UlyanovParams};
use crate::error::{Error, Result};
use crate::grid::{pairwise_sum, Exponent};
use crate::moduli::ModulusCurve;

const COVER_TOL: f64 = 1e-9;

/// Trapezoid rule for `int g(t) dt/t` on nodes `ts` (increasing), i.e. in the variable `ln t`.
pub fn log_trapezoid(ts: &[f64], g: &[f64]) -> f64 {
    let terms: Vec<f64> = ts
        .windows(2)
        .zip(g.windows(2))
        .map(|(t, v)| 0.5 * (v[0] + v[1]) * (t[1] / t[0]).ln())
        .collect();
    pairwise_sum(&terms)
}

/// Curve value at `t`, linear in `ln t` between nodes.
pub fn curve_at(curve: &ModulusCurve, t: f64) -> Result<f64> {
    let ds = &curve.delta_grid;
    let (lo, hi) = (ds[0], ds[ds.len() - 1]);
    if t < lo * (1.0 - COVER_TOL) || t > hi * (1.0 + COVER_TOL) {
        return Err(Error::Coverage(format!("t = {t} outside [{lo}, {hi}]")));
    }
    let i = ds.partition_point(|&d| d < t);
    if i == 0 {
        return Ok(curve.values[0]);
    }
    if i == ds.len() {
        return Ok(curve.values[ds.len() - 1]);
    }
    let w = (t / ds[i - 1]).ln() / (ds[i] / ds[i - 1]).ln();
    Ok(curve.values[i - 1] * (1.0 - w) + curve.values[i] * w)
}

/// Nodes of the curve inside `[a, b]` with the endpoints added.
pub fn segment(curve: &ModulusCurve, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(a > 0.0 && b > a) {
        return Err(Error::Parameter(format!("bad integration range [{a}, {b}]")));
    }
    let (wa, wb) = (curve_at(curve, a)?, curve_at(curve, b)?);
    let mut ts = vec![a];
    let mut vs = vec![wa];
    for (&t, &v) in curve.delta_grid.iter().zip(&curve.values) {
        if t > a * (1.0 + COVER_TOL) && t < b * (1.0 - COVER_TOL) {
            ts.push(t);
            vs.push(v);
        }
    }
    ts.push(b);
    vs.push(wb);
    Ok((ts, vs))
}

/// `int_0^{t0} g(t) dt/t` for an integrand decaying like `t^c`, `c > 0`, as `t -> 0`.
/// Infinite when `c <= 0`.
pub fn power_tail(t0: f64, c: f64, g: impl Fn(f64) -> f64) -> f64 {
    if !(c > 0.0) {
        return f64::INFINITY;
    }
    const STEPS: usize = 4096;
    let span = 60.0 / c;
    let h = span / STEPS as f64;
    let vals: Vec<f64> = (0..=STEPS)
        .map(|i| {
            let w = if i == 0 || i == STEPS { 0.5 } else { 1.0 };
            w * g(t0 * (-(i as f64) * h).exp())
        })
        .collect();
    h * pairwise_sum(&vals)
}

/// `delta^alpha (int_delta^1 (omega(t)/t^alpha)^theta dt/t + ||f||_p^theta)^{1/theta}`
/// with `theta = min(p,2)` (1 for p = inf); `curve` holds the modulus of order `alpha + gamma`.
pub fn marchaud_rhs(curve: &ModulusCurve, delta: f64, alpha: f64, p: Exponent, f_norm: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter(format!("delta = {delta} must lie in (0, 1)")));
    }
    let th = p.theta();
    let (ts, ws) = segment(curve, delta, 1.0)?;
    let g: Vec<f64> = ts.iter().zip(&ws).map(|(t, w)| (w / t.powf(alpha)).powf(th)).collect();
    Ok(delta.powf(alpha) * (log_trapezoid(&ts, &g) + f_norm.powf(th)).powf(1.0 / th))
}

/// Right-hand side of the sharp Ulyanov inequality with its parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UlyanovRhs {
    pub value: f64,
    /// `int_{delta_min}^delta` part, before the outer power.
    pub integral: f64,
    /// Modelled `int_0^{delta_min}` part, before the outer power.
    pub tail: f64,
    /// `delta^alpha ||f||_p`, zero when dropped.
    pub norm_term: f64,
    pub dropped: bool,
}

/// `(int_0^delta (omega(t) t^{-gamma} eta(1/t))^{q1} dt/t)^{1/q1} + delta^alpha ||f||_p`,
/// `curve` holding the modulus of order `alpha + gamma` in `L_p`.
///
/// The curve must start at or below `delta_min = curve.delta_grid[0]`. Below
/// `delta_min` the modulus is replaced by `omega(delta_min) (t/delta_min)^s`,
/// `s = alpha + gamma + d(1/p-1)_+`; since `omega(t)/t^s` is quasi-decreasing this
/// underestimates the true tail up to a constant, so the ratio can only be overstated.
pub fn ulyanov_rhs(curve: &ModulusCurve, delta: f64, params: &UlyanovParams, d: usize, f_norm: f64) -> Result<UlyanovRhs> {
    let branch = params.regime(d)?;
    let ex = branch.exponents(params, d);
    let dmin = curve.delta_grid[0];
    if delta < dmin * (1.0 - COVER_TOL) {
        return Err(Error::Coverage(format!("delta = {delta} below the curve start {dmin}")));
    }
    let q1 = params.q1;
    let g = params.gamma;
    let integrand = |t: f64, w: f64| (w * t.powf(-g) * eta_value(1.0 / t, ex)).powf(q1);
    let integral = if delta > dmin * (1.0 + COVER_TOL) {
        let (ts, ws) = segment(curve, dmin, delta)?;
        let vals: Vec<f64> = ts.iter().zip(&ws).map(|(&t, &w)| integrand(t, w)).collect();
        log_trapezoid(&ts, &vals)
    } else {
        0.0
    };
    let s = params.alpha + g + d as f64 * params.p.deficiency();
    let w0 = curve.values[0];
    let tail = if w0 == 0.0 {
        0.0
    } else {
        power_tail(dmin, (s - g - ex.0) * q1, |t| integrand(t, w0 * (t / dmin).powf(s)))
    };
    let dropped = drops_norm_term(params, d);
    let norm_term = if dropped { 0.0 } else { delta.powf(params.alpha) * f_norm };
    Ok(UlyanovRhs { value: (integral + tail).powf(1.0 / q1) + norm_term, integral, tail, norm_term, dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moduli::geometric_grid;

    fn e(x: f64) -> Exponent {
        Exponent::new(x).unwrap()
    }

    fn curve(ts: Vec<f64>, f: impl Fn(f64) -> f64) -> ModulusCurve {
        let vs = ts.iter().map(|&t| f(t)).collect();
        ModulusCurve::from_values(1.0, e(1.0), ts, vs).unwrap()
    }

    #[test]
    fn zero_curve_gives_zero() {
        let c = curve(geometric_grid(1e-3, 1.0, 50).unwrap(), |_| 0.0);
        assert_eq!(marchaud_rhs(&c, 0.1, 1.0, e(2.0), 0.0).unwrap(), 0.0);
        let u = UlyanovParams::new(e(0.5), e(1.0), 1.0, 0.0, None).unwrap();
        let r = ulyanov_rhs(&c, 0.1, &u, 1, 5.0).unwrap();
        assert!(r.dropped);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn constant_curve_closed_form() {
        // theta = 1: delta^alpha (c (delta^{-alpha} - 1)/alpha + ||f||)
        let (c0, fnorm) = (0.7, 1.3);
        let c = curve(geometric_grid(1e-3, 1.0, 400).unwrap(), |_| c0);
        for (alpha, delta) in [(1.0f64, 0.01f64), (0.5, 0.1), (2.0, 0.05)] {
            let exact = delta.powf(alpha) * (c0 * (delta.powf(-alpha) - 1.0) / alpha + fnorm);
            let got = marchaud_rhs(&c, delta, alpha, e(1.0), fnorm).unwrap();
            assert!((got / exact - 1.0).abs() < 1e-4, "{alpha} {delta}: {got} vs {exact}");
        }
    }

    #[test]
    fn theta_branch() {
        // p = 3 uses theta = 2: check against the closed form with theta = 2
        let (c0, fnorm, alpha, delta) = (0.7, 1.3, 1.0f64, 0.05f64);
        let c = curve(geometric_grid(1e-3, 1.0, 400).unwrap(), |_| c0);
        let exact = delta.powf(alpha) * (c0 * c0 * (delta.powf(-2.0 * alpha) - 1.0) / (2.0 * alpha) + fnorm * fnorm).sqrt();
        let got = marchaud_rhs(&c, delta, alpha, e(3.0), fnorm).unwrap();
        assert!((got / exact - 1.0).abs() < 1e-4);
        let p1 = marchaud_rhs(&c, delta, alpha, e(1.0), fnorm).unwrap();
        assert!((got - p1).abs() > 1e-3);
        assert_eq!(e(3.0).theta(), 2.0);
    }

    #[test]
    fn coverage_error() {
        let c = curve(geometric_grid(0.05, 0.5, 20).unwrap(), |t| t);
        assert!(matches!(marchaud_rhs(&c, 0.1, 1.0, e(2.0), 1.0), Err(Error::Coverage(_))));
        assert!(matches!(marchaud_rhs(&c, 0.01, 1.0, e(2.0), 1.0), Err(Error::Coverage(_))));
        let u = UlyanovParams::new(e(2.0), e(4.0), 1.0, 0.25, None).unwrap();
        assert!(matches!(ulyanov_rhs(&c, 0.01, &u, 1, 1.0), Err(Error::Coverage(_))));
    }

    #[test]
    fn power_curve_closed_form() {
        // 1 < p < q < inf, gamma = d(1/p-1/q): eta = 1 and the norm term is dropped.
        // omega(t) = t^s with s = alpha + gamma, so the tail model is exact:
        // int_0^delta t^{(s-gamma) q} dt/t = delta^{alpha q}/(alpha q).
        let u = UlyanovParams::new(e(2.0), e(4.0), 1.5, 0.25, None).unwrap();
        let s = 1.75;
        let c = curve(geometric_grid(1e-3, 1.0, 600).unwrap(), |t| t.powf(s));
        for delta in [0.01f64, 0.1, 0.5] {
            let exact = (delta.powf(1.5 * 4.0) / (1.5 * 4.0)).powf(0.25);
            let r = ulyanov_rhs(&c, delta, &u, 1, 10.0).unwrap();
            assert!(r.dropped);
            assert!((r.value / exact - 1.0).abs() < 1e-4, "{delta}: {} vs {exact}", r.value);
        }
    }

    #[test]
    fn classical_form_at_zero_gamma() {
        // gamma = 0, 0 < p < q <= 1: eta(t) = t^{1/p-1/q}, integrand (omega(t) t^{-(1/p-1/q)})^q
        let u = UlyanovParams::new(e(0.5), e(1.0), 2.0, 0.0, None).unwrap();
        let c = curve(geometric_grid(1e-3, 1.0, 600).unwrap(), |t| t * t);
        let delta = 0.2f64;
        // int_{1e-3}^delta t dt/t plus the modelled tail omega ~ t^3 below 1e-3: 1e-3/2
        let exact = delta - 1e-3 + 5e-4;
        let r = ulyanov_rhs(&c, delta, &u, 1, 1.0).unwrap();
        assert!(r.dropped);
        assert!((r.value / exact - 1.0).abs() < 1e-4, "{r:?}");
    }

    #[test]
    fn norm_term_added_outside_drop_list() {
        let u = UlyanovParams::new(e(2.0), e(4.0), 1.0, 0.5, None).unwrap();
        let c = curve(geometric_grid(1e-3, 1.0, 100).unwrap(), |t| t.powf(1.5));
        let r = ulyanov_rhs(&c, 0.1, &u, 1, 2.0).unwrap();
        assert!(!r.dropped);
        assert!((r.norm_term - 0.2).abs() < 1e-12);
    }

    #[test]
    fn doubling_converges() {
        let f = |t: f64| (1.0 - (-t * t * 4.0).exp()).sqrt();
        let a = curve(geometric_grid(1e-3, 1.0, 97).unwrap(), f);
        let b = curve(geometric_grid(1e-3, 1.0, 193).unwrap(), f);
        let ra = marchaud_rhs(&a, 0.01, 0.5, e(2.0), 1.0).unwrap();
        let rb = marchaud_rhs(&b, 0.01, 0.5, e(2.0), 1.0).unwrap();
        assert!((ra / rb - 1.0).abs() < 1e-3);
    }
}
