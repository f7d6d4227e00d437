//! Test functions with closed forms, decay data and Fourier transforms.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Exponent, TorusGrid};
use crate::spectral::{inverse, norm, transform, SpectralFunction};

/// Closed-form profile of a corpus entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Profile {
    /// `exp(-|x|^2)`.
    Gaussian,
    /// `prod_j (sin(b x_j / 2) / (b x_j / 2))^2`, Fourier transform supported in `[-b,b]^d`.
    Fejer { band: f64 },
    /// `exp(1 - 1/(1-|x|^2))` on the unit ball.
    Bump,
    /// Product of one-dimensional bumps.
    TensorBump,
    /// `|x|^beta` times the bump.
    Cusp { beta: f64 },
    /// `exp(i kappa x_1) exp(-|x|^2)`.
    ModulatedGaussian { kappa: f64 },
    /// `exp(2 pi i mode x_1 / L)`, periodic on the torus of period L.
    PlaneWave { mode: i64 },
}

/// How fast an entry decays, used to bound the periodization tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Decay {
    /// Support inside the ball of the given radius.
    Compact { radius: f64 },
    /// `|f(x)| <= amplitude * exp(-rate |x|^2)`.
    Gaussian { amplitude: f64, rate: f64 },
    /// Fourier transform has compact support; periodized exactly through Poisson summation.
    Bandlimited,
    /// Already periodic on the torus.
    Periodic,
}

/// Declared modulus exponent for the slope fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpectedSlope {
    Value(f64),
    Fit,
}

/// A named test function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub dim: usize,
    pub profile: Profile,
    /// Recommended period L.
    pub period: f64,
    pub decay: Decay,
    /// Euclidean radius of the Fourier support, when bounded.
    pub band_radius: Option<f64>,
    /// True when every derivative exists; only these carry a declared slope.
    pub smooth: bool,
    pub real: bool,
    /// Smallest admissible exponent p (exclusive); every entry is bounded so p = inf is allowed.
    pub p_min: f64,
}

fn bump1(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

fn sinc_sq(t: f64) -> f64 {
    if t.abs() < 1e-8 {
        1.0 - t * t / 3.0
    } else {
        (t.sin() / t).powi(2)
    }
}

impl CorpusEntry {
    /// Point value of the closed form at `x` (only the first `dim` components are read).
    pub fn eval(&self, x: [f64; 2], period: f64) -> Complex64 {
        let r2 = if self.dim == 1 { x[0] * x[0] } else { x[0] * x[0] + x[1] * x[1] };
        let real = |v: f64| Complex64::new(v, 0.0);
        match self.profile {
            Profile::Gaussian => real((-r2).exp()),
            Profile::Fejer { band } => {
                let a = sinc_sq(0.5 * band * x[0]);
                real(if self.dim == 1 { a } else { a * sinc_sq(0.5 * band * x[1]) })
            }
            Profile::Bump => real(bump1(r2.sqrt())),
            Profile::TensorBump => real(if self.dim == 1 { bump1(x[0]) } else { bump1(x[0]) * bump1(x[1]) }),
            Profile::Cusp { beta } => {
                let r = r2.sqrt();
                real(if r == 0.0 { 0.0 } else { r.powf(beta) * bump1(r) })
            }
            Profile::ModulatedGaussian { kappa } => Complex64::from_polar((-r2).exp(), kappa * x[0]),
            Profile::PlaneWave { mode } => Complex64::from_polar(1.0, 2.0 * PI * mode as f64 * x[0] / period),
        }
    }

    /// Closed-form Fourier transform `int f(x) e^{-i(x,omega)} dx`, when known.
    pub fn fourier(&self, w: [f64; 2]) -> Option<Complex64> {
        let d = self.dim as i32;
        let w2 = if self.dim == 1 { w[0] * w[0] } else { w[0] * w[0] + w[1] * w[1] };
        match self.profile {
            Profile::Gaussian => Some(Complex64::new(PI.powf(d as f64 / 2.0) * (-w2 / 4.0).exp(), 0.0)),
            Profile::Fejer { band } => {
                let tri = |t: f64| 2.0 * PI / band * (1.0 - t.abs() / band).max(0.0);
                let v = if self.dim == 1 { tri(w[0]) } else { tri(w[0]) * tri(w[1]) };
                Some(Complex64::new(v, 0.0))
            }
            Profile::ModulatedGaussian { kappa } => {
                let s = (w[0] - kappa).powi(2) + if self.dim == 2 { w[1] * w[1] } else { 0.0 };
                Some(Complex64::new(PI.powf(d as f64 / 2.0) * (-s / 4.0).exp(), 0.0))
            }
            _ => None,
        }
    }

    /// Modulus exponent s with `omega_alpha(f,delta)_p ~ delta^s` as delta -> 0.
    ///
    /// Smooth entries saturate at s = alpha; this value is confirmed by the
    /// two-resolution fit in the test suite. Cusp entries return `Fit`.
    pub fn expected_slope(&self, alpha: f64, _p: Exponent) -> ExpectedSlope {
        if self.smooth {
            ExpectedSlope::Value(alpha)
        } else {
            ExpectedSlope::Fit
        }
    }

    /// Default torus for this entry at the given resolution.
    pub fn grid(&self, n: usize) -> Result<TorusGrid> {
        TorusGrid::new(self.dim, n, self.period)
    }
}

fn entry(
    name: &'static str,
    dim: usize,
    profile: Profile,
    decay: Decay,
    band_radius: Option<f64>,
    smooth: bool,
) -> CorpusEntry {
    let period = match profile {
        Profile::PlaneWave { .. } => 2.0 * PI,
        _ if dim == 1 => 40.0,
        _ => 20.0,
    };
    let real = !matches!(profile, Profile::ModulatedGaussian { .. } | Profile::PlaneWave { .. });
    CorpusEntry { name, dim, profile, period, decay, band_radius, smooth, real, p_min: 0.0 }
}

/// The fixed registry.
pub fn corpus_list() -> Vec<CorpusEntry> {
    let gauss = Decay::Gaussian { amplitude: 1.0, rate: 1.0 };
    let unit = Decay::Compact { radius: 1.0 };
    vec![
        entry("gaussian", 1, Profile::Gaussian, gauss, None, true),
        entry("fejer", 1, Profile::Fejer { band: 4.0 }, Decay::Bandlimited, Some(4.0), true),
        entry("bump", 1, Profile::Bump, unit, None, true),
        entry("cusp-0.3", 1, Profile::Cusp { beta: 0.3 }, unit, None, false),
        entry("cusp-0.5", 1, Profile::Cusp { beta: 0.5 }, unit, None, false),
        entry("cusp-1.5", 1, Profile::Cusp { beta: 1.5 }, unit, None, false),
        entry("modulated-gaussian", 1, Profile::ModulatedGaussian { kappa: 3.0 }, gauss, None, true),
        entry("plane-wave", 1, Profile::PlaneWave { mode: 1 }, Decay::Periodic, None, true),
        entry("gaussian-2d", 2, Profile::Gaussian, gauss, None, true),
        entry("fejer-2d", 2, Profile::Fejer { band: 4.0 }, Decay::Bandlimited, Some(4.0 * 2f64.sqrt()), true),
        entry("bump-2d-tensor", 2, Profile::TensorBump, Decay::Compact { radius: 2f64.sqrt() }, None, true),
        entry("bump-2d-radial", 2, Profile::Bump, unit, None, true),
        entry("cusp-0.5-2d-radial", 2, Profile::Cusp { beta: 0.5 }, unit, None, false),
    ]
}

/// Looks an entry up by name.
pub fn corpus_entry(name: &str) -> Result<CorpusEntry> {
    corpus_list()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownEntry(name.to_string()))
}

/// Seeded random trigonometric polynomial with coefficients uniform in the
/// unit square for every frequency with |omega| < sigma.
pub fn random_trig_poly(grid: TorusGrid, sigma: f64, seed: u64) -> Result<SpectralFunction> {
    if sigma > grid.nyquist() {
        return Err(Error::AboveNyquist { sigma, nyquist: grid.nyquist() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = (0..grid.len())
        .map(|k| {
            let (a, b): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if norm(grid.frequency(k)) < sigma {
                Complex64::new(a, b)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Ok(SpectralFunction::from_coefficients(grid, coeffs)?.with_band(sigma))
}

/// Fejer-type kernel of Euclidean band `sigma`, periodized exactly.
///
/// In d = 2 this is the tensor kernel with per-axis band `sigma / sqrt(2)`.
pub fn fejer_poly(grid: TorusGrid, sigma: f64) -> Result<SpectralFunction> {
    if sigma > grid.nyquist() {
        return Err(Error::AboveNyquist { sigma, nyquist: grid.nyquist() });
    }
    let b = sigma / (grid.dim() as f64).sqrt();
    let tri = |t: f64| (1.0 - t.abs() / b).max(0.0);
    let coeffs = (0..grid.len())
        .map(|k| {
            let w = grid.frequency(k);
            let v = if grid.dim() == 1 { tri(w[0]) } else { tri(w[0]) * tri(w[1]) };
            Complex64::new(v, 0.0)
        })
        .collect();
    Ok(SpectralFunction::from_coefficients(grid, coeffs)?.with_band(sigma))
}

/// Square of the Fejer-type kernel of band `sigma/2`: band `sigma`, decay `|x|^{-4}`.
pub fn jackson_poly(grid: TorusGrid, sigma: f64) -> Result<SpectralFunction> {
    let half = inverse(&fejer_poly(grid, sigma / 2.0)?);
    let sq = half.mul(&half)?;
    Ok(transform(&sq).with_band(sigma))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_shape() {
        let list = corpus_list();
        assert!(list.len() >= 8);
        for e in &list {
            let v = e.eval([0.0, 0.0], e.period);
            assert!(v.re.is_finite() && v.im.is_finite(), "{}", e.name);
        }
        for e in list.iter().filter(|e| matches!(e.decay, Decay::Bandlimited)) {
            assert!(e.band_radius.is_some());
        }
        let names: std::collections::BTreeSet<_> = list.iter().map(|e| e.name).collect();
        assert_eq!(names.len(), list.len());
        assert!(corpus_entry("nope").is_err());
    }

    #[test]
    fn fejer_transform_integrates_back() {
        // f(0) = (1/2pi) int F(w) dw = 1
        let e = corpus_entry("fejer").unwrap();
        let m = 20000;
        let b = 4.0;
        let h = 2.0 * b / m as f64;
        let s: f64 = (0..m).map(|i| e.fourier([-b + (i as f64 + 0.5) * h, 0.0]).unwrap().re * h).sum();
        assert!((s / (2.0 * PI) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn slopes_declared_only_for_smooth_entries() {
        let p = Exponent::Finite(2.0);
        assert_eq!(corpus_entry("gaussian").unwrap().expected_slope(1.5, p), ExpectedSlope::Value(1.5));
        assert_eq!(corpus_entry("cusp-0.5").unwrap().expected_slope(2.0, p), ExpectedSlope::Fit);
    }

    #[test]
    fn random_poly_is_seeded_and_bandlimited() {
        let g = TorusGrid::new(1, 256, 40.0).unwrap();
        let a = random_trig_poly(g, 8.0, 7).unwrap();
        let b = random_trig_poly(g, 8.0, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.effective_band(0.0) < 8.0);
        assert_ne!(a, random_trig_poly(g, 8.0, 8).unwrap());
    }

    #[test]
    fn jackson_coefficients_are_the_fejer_autoconvolution() {
        let g = TorusGrid::new(1, 256, 40.0).unwrap();
        let j = jackson_poly(g, 4.0).unwrap();
        let step = 2.0 * PI / 40.0;
        let tri = |xi: i64| (1.0 - (xi as f64 * step).abs() / 2.0).max(0.0);
        for xi in -40i64..=40 {
            let oracle: f64 = (-20i64..=20).map(|m| tri(m) * tri(xi - m)).sum();
            let c = j.coefficient(&[xi]).unwrap();
            assert!((c.re - oracle).abs() < 1e-9 * (1.0 + oracle) && c.im.abs() < 1e-9, "xi = {xi}");
        }
    }

    #[test]
    fn smooth_slope_matches_a_two_resolution_fit() {
        use crate::grid::{periodize, SmoothnessOrder};
        use crate::moduli::{modulus_curve, Sampling};
        let e = corpus_entry("gaussian").unwrap();
        let deltas = [0.02, 0.04, 0.08];
        let fit = |n: usize| {
            let f = periodize(&e, e.grid(n).unwrap()).unwrap().function;
            let c = modulus_curve(&f, &deltas, SmoothnessOrder::new(1.5).unwrap(), Exponent::Finite(2.0), &Sampling::standard(1)).unwrap();
            (c.values[2] / c.values[0]).ln() / 4f64.ln()
        };
        let (a, b) = (fit(1024), fit(2048));
        assert!((a - b).abs() < 1e-3, "{a} vs {b}");
        match e.expected_slope(1.5, Exponent::Finite(2.0)) {
            ExpectedSlope::Value(s) => assert!((a - s).abs() < 0.02, "fit {a}"),
            ExpectedSlope::Fit => panic!("gaussian declares its slope"),
        }
    }
}
