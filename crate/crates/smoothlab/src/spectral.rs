//! Discrete Fourier analysis on the torus.
//!
//! Coefficients follow the Fourier-series convention
//! `c_xi = N^{-d} sum_k f(x_k) exp(-2 pi i (k, xi) / N)`, so that
//! `f(x) = sum_xi c_xi exp(i (omega_xi, x))` with physical frequency
//! `omega_xi = 2 pi xi / L`. Parseval reads `||f||_2^2 = L^d sum |c_xi|^2`.
//! Coefficients are stored in FFT order; [`SpectralFunction::coefficient`]
//! indexes them by signed integer frequency in `{-N/2, ..., N/2-1}^d`.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{pairwise_sum, GridFunction, SmoothnessOrder, TorusGrid};

type Plan = Arc<dyn Fft<f64>>;

fn plan(n: usize, direction: FftDirection) -> Plan {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), Plan>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (n, direction == FftDirection::Forward);
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    map.entry(key)
        .or_insert_with(|| FftPlanner::new().plan_fft(n, direction))
        .clone()
}

fn transpose(data: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = data[i * n + j];
        }
    }
    out
}

fn fft_in_place(data: &mut Vec<Complex64>, grid: &TorusGrid, direction: FftDirection) {
    let n = grid.n();
    let fft = plan(n, direction);
    fft.process(data);
    if grid.dim() == 2 {
        let mut t = transpose(data, n);
        fft.process(&mut t);
        *data = transpose(&t, n);
    }
}

/// Fourier coefficients of a grid function, optionally with a declared band.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
    band: Option<f64>,
}

impl SpectralFunction {
    /// Builds from coefficients in FFT order.
    pub fn from_coefficients(grid: TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), got: coeffs.len() });
        }
        Ok(Self { grid, coeffs, band: None })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// Coefficients in FFT order.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn band(&self) -> Option<f64> {
        self.band
    }

    /// Coefficient at integer frequency `xi`, each component in `[-N/2, N/2)`.
    pub fn coefficient(&self, xi: &[i64]) -> Option<Complex64> {
        let n = self.grid.n() as i64;
        let wrap = |k: i64| -> Option<usize> {
            (-n / 2..n / 2).contains(&k).then(|| k.rem_euclid(n) as usize)
        };
        match (self.grid.dim(), xi) {
            (1, [a]) => Some(self.coeffs[wrap(*a)?]),
            (2, [a, b]) => Some(self.coeffs[wrap(*a)? * n as usize + wrap(*b)?]),
            _ => None,
        }
    }

    /// Declares a band radius; coefficients outside it are zeroed so the
    /// declaration is exact.
    pub fn with_band(mut self, sigma: f64) -> Self {
        for (k, c) in self.coeffs.iter_mut().enumerate() {
            if norm(self.grid.frequency(k)) > sigma {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        self.band = Some(sigma);
        self
    }

    /// Multiplies every coefficient by `symbol(omega)`.
    pub fn apply(&self, symbol: impl Fn([f64; 2]) -> Complex64) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (k, c) in self.coeffs.iter().enumerate() {
            let s = symbol(self.grid.frequency(k));
            if !(s.re.is_finite() && s.im.is_finite()) {
                let xi = self.grid.frequency_index(k);
                return Err(Error::InvalidSymbol { frequency: xi[..self.grid.dim()].to_vec() });
            }
            coeffs.push(c * s);
        }
        Ok(Self { grid: self.grid, coeffs, band: self.band })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::InvalidInput("spectra live on different grids".into()));
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(Self { grid: self.grid, coeffs, band: None })
    }

    /// L_2 norm through Parseval.
    pub fn parseval_norm(&self) -> f64 {
        let sq: Vec<f64> = self.coeffs.iter().map(|c| c.norm_sqr()).collect();
        (self.grid.measure() * pairwise_sum(&sq)).sqrt()
    }

    /// L_2 norm of the part with |omega| > radius, through Parseval.
    pub fn tail_norm(&self, radius: f64) -> f64 {
        let sq: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| if norm(self.grid.frequency(k)) > radius { c.norm_sqr() } else { 0.0 })
            .collect();
        (self.grid.measure() * pairwise_sum(&sq)).sqrt()
    }

    /// Relative L_2 energy above half the Nyquist frequency.
    pub fn tail_fraction(&self) -> f64 {
        let total = self.parseval_norm();
        if total == 0.0 {
            return 0.0;
        }
        self.tail_norm(0.5 * self.grid.nyquist()) / total
    }

    /// Largest |omega| carrying a coefficient above `tol` times the largest one.
    pub fn effective_band(&self, tol: f64) -> f64 {
        let top = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > tol * top)
            .map(|(k, _)| norm(self.grid.frequency(k)))
            .fold(0.0, f64::max)
    }
}

pub(crate) fn norm(w: [f64; 2]) -> f64 {
    w[0].hypot(w[1])
}

/// Forward transform.
pub fn transform(f: &GridFunction) -> SpectralFunction {
    let grid = *f.grid();
    let mut data = f.values().to_vec();
    fft_in_place(&mut data, &grid, FftDirection::Forward);
    let scale = 1.0 / grid.len() as f64;
    for c in &mut data {
        *c *= scale;
    }
    SpectralFunction { grid, coeffs: data, band: None }
}

/// Inverse transform.
pub fn inverse(s: &SpectralFunction) -> GridFunction {
    let grid = s.grid;
    let mut data = s.coeffs.clone();
    fft_in_place(&mut data, &grid, FftDirection::Inverse);
    GridFunction::new(grid, data).expect("length preserved by the transform")
}

/// Multiplies the coefficients of `f` by `symbol(omega)` and transforms back.
pub fn multiplier_apply(f: &GridFunction, symbol: impl Fn([f64; 2]) -> Complex64) -> Result<GridFunction> {
    Ok(inverse(&transform(f).apply(symbol)?))
}

/// Unit vector in R^d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    dim: usize,
    v: [f64; 2],
}

impl Direction {
    /// Normalizes a nonzero vector of length `dim`.
    pub fn new(components: &[f64]) -> Result<Self> {
        let dim = components.len();
        if !(1..=2).contains(&dim) {
            return Err(Error::Parameter(format!("direction of dimension {dim}")));
        }
        let mut v = [0.0; 2];
        v[..dim].copy_from_slice(components);
        let r = norm(v);
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::Parameter("direction must be a nonzero finite vector".into()));
        }
        Ok(Self { dim, v: [v[0] / r, v[1] / r] })
    }

    pub fn from_angle(phi: f64) -> Self {
        Self { dim: 2, v: [phi.cos(), phi.sin()] }
    }

    /// Unit vector along axis `j` with the given sign.
    pub fn axis(dim: usize, j: usize, positive: bool) -> Result<Self> {
        if j >= dim || dim > 2 {
            return Err(Error::Parameter(format!("axis {j} out of range for d = {dim}")));
        }
        let mut v = [0.0; 2];
        v[j] = if positive { 1.0 } else { -1.0 };
        Ok(Self { dim, v })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> [f64; 2] {
        self.v
    }

    pub fn dot(&self, w: [f64; 2]) -> f64 {
        self.v[0] * w[0] + self.v[1] * w[1]
    }
}

/// Directions used for every sampled supremum over |zeta| = 1.
///
/// d = 1: {+1, -1}. d = 2: sixteen angles `2 pi (k + 1/2) / 16` followed by
/// the four signed axis directions.
pub fn direction_design(dim: usize) -> Vec<Direction> {
    if dim == 1 {
        return vec![Direction { dim: 1, v: [1.0, 0.0] }, Direction { dim: 1, v: [-1.0, 0.0] }];
    }
    let mut dirs: Vec<Direction> =
        (0..16).map(|k| Direction::from_angle(2.0 * PI * (k as f64 + 0.5) / 16.0)).collect();
    for (j, s) in [(0, true), (1, true), (0, false), (1, false)] {
        dirs.push(Direction::axis(2, j, s).expect("valid axis"));
    }
    dirs
}

/// Principal-branch power `z^alpha`, with `0^alpha = 0`.
pub fn principal_pow(z: Complex64, alpha: f64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::from_polar(r.powf(alpha), alpha * z.im.atan2(z.re))
}

/// `(i t)^alpha` on the principal branch, zero at `t = 0`.
pub fn i_pow(t: f64, alpha: f64) -> Complex64 {
    if t == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let phase = if t > 0.0 { FRAC_PI_2 } else { -FRAC_PI_2 };
    Complex64::from_polar(t.abs().powf(alpha), alpha * phase)
}

/// Fixed smooth cutoff: 1 on [0,1/2], `exp(1 - 1/(1-(2s-1)^2))` on (1/2,1), 0 beyond.
pub fn cutoff(s: f64) -> f64 {
    let s = s.abs();
    if s <= 0.5 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        let u = 2.0 * s - 1.0;
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    }
}

/// Result of a derivative multiplier together with a reliability flag.
#[derive(Debug, Clone)]
pub struct Derivative {
    pub value: GridFunction,
    /// Set when the input carries more than 1e-8 of its L_2 energy above half Nyquist.
    pub tail_warning: bool,
}

pub(crate) const TAIL_THRESHOLD: f64 = 1e-8;

/// Symbol `(i (omega, zeta))^alpha` applied to a spectrum.
pub fn directional_derivative_spectrum(s: &SpectralFunction, zeta: Direction, alpha: f64) -> Result<SpectralFunction> {
    s.apply(|w| i_pow(zeta.dot(w), alpha))
}

/// `F^{-1}((i(xi,zeta))^alpha F f)` on the principal branch.
pub fn directional_derivative(f: &GridFunction, zeta: Direction, alpha: SmoothnessOrder) -> Result<Derivative> {
    check_direction(f.grid(), zeta)?;
    let s = transform(f);
    let tail_warning = s.tail_fraction() > TAIL_THRESHOLD;
    let value = inverse(&directional_derivative_spectrum(&s, zeta, alpha.value())?);
    Ok(Derivative { value, tail_warning })
}

pub(crate) fn check_direction(grid: &TorusGrid, zeta: Direction) -> Result<()> {
    if zeta.dim() != grid.dim() {
        return Err(Error::Parameter(format!(
            "direction of dimension {} on a {}-dimensional grid",
            zeta.dim(),
            grid.dim()
        )));
    }
    Ok(())
}

/// Multiplier `|omega|^alpha`, zero at the origin.
pub fn fractional_laplacian(f: &GridFunction, alpha: SmoothnessOrder) -> Result<GridFunction> {
    let a = alpha.value();
    multiplier_apply(f, |w| {
        let r = norm(w);
        Complex64::new(if r == 0.0 { 0.0 } else { r.powf(a) }, 0.0)
    })
}

fn check_band(grid: &TorusGrid, sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Parameter(format!("band sigma = {sigma} must be positive")));
    }
    let nyq = grid.nyquist();
    if sigma > nyq * (1.0 + 1e-12) {
        return Err(Error::AboveNyquist { sigma, nyquist: nyq });
    }
    Ok(())
}

/// Smooth radial projection with multiplier `v(|omega|/sigma)`; band `sigma`.
pub fn bandlimit_project(f: &GridFunction, sigma: f64) -> Result<SpectralFunction> {
    project_spectrum(&transform(f), sigma)
}

pub(crate) fn project_spectrum(s: &SpectralFunction, sigma: f64) -> Result<SpectralFunction> {
    check_band(s.grid(), sigma)?;
    Ok(s.apply(|w| Complex64::new(cutoff(norm(w) / sigma), 0.0))?.with_band(sigma))
}

/// Sharp projection onto |omega| <= sigma.
pub fn sharp_project(s: &SpectralFunction, sigma: f64) -> Result<SpectralFunction> {
    check_band(s.grid(), sigma)?;
    Ok(s.clone().with_band(sigma))
}

/// Riesz spherical mean `(1 - |omega|^2/sigma^2)_+^kappa`.
pub fn riesz_project(s: &SpectralFunction, sigma: f64, kappa: f64) -> Result<SpectralFunction> {
    check_band(s.grid(), sigma)?;
    let sym = |w: [f64; 2]| {
        let t = 1.0 - (norm(w) / sigma).powi(2);
        Complex64::new(if t > 0.0 { t.powf(kappa) } else { 0.0 }, 0.0)
    };
    Ok(s.apply(sym)?.with_band(sigma))
}

/// Gaussian mollifier `exp(-|omega|^2 / sigma^2)`.
pub fn gauss_mollify(s: &SpectralFunction, sigma: f64) -> Result<SpectralFunction> {
    s.apply(|w| Complex64::new((-(norm(w) / sigma).powi(2)).exp(), 0.0))
}

/// Sampling-series operator along one axis.
///
/// Samples `f(k/sigma + lambda)` on a lattice of `K = round(L sigma)` points
/// per period (so the lattice is periodic) and resynthesizes with the kernel
/// whose Fourier transform is `phi(xi) = (1 + i xi^(2r+1)) v(xi)`, at scale
/// `K/L`. The operator is evaluated exactly through aliasing:
/// `V_j = phi(omega_j / s) e^{-i omega_j lambda} sum_{j' = j mod K} c_j' e^{i omega_j' lambda}`.
pub fn interp_v_axis(s: &SpectralFunction, axis: usize, sigma: f64, lambda: f64, r: u32) -> Result<SpectralFunction> {
    let grid = *s.grid();
    check_band(&grid, sigma)?;
    if axis >= grid.dim() {
        return Err(Error::Parameter(format!("axis {axis} out of range")));
    }
    let n = grid.n();
    let l = grid.period();
    let k_samples = ((l * sigma).round() as usize).max(1);
    let scale = k_samples as f64 / l;
    let w0 = 2.0 * PI / l;
    let phi = |xi: f64| {
        let v = cutoff(xi);
        if v == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(1.0, xi.powi(2 * r as i32 + 1)) * v
        }
    };
    // per axis frequency: twiddles e^{i omega lambda}
    let twiddle: Vec<Complex64> = (0..n)
        .map(|j| Complex64::from_polar(1.0, grid.axis_frequency(j) as f64 * w0 * lambda))
        .collect();
    let lines = grid.len() / n;
    let stride = if grid.dim() == 1 || axis == 1 { 1 } else { n };
    let line_start = |m: usize| -> usize {
        if grid.dim() == 1 {
            0
        } else if axis == 1 {
            m * n
        } else {
            m
        }
    };
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut alias = vec![Complex64::new(0.0, 0.0); k_samples];
    for m in 0..lines {
        let base = line_start(m);
        alias.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
        for j in 0..n {
            let xi = grid.axis_frequency(j);
            let class = xi.rem_euclid(k_samples as i64) as usize;
            alias[class] += s.coefficients()[base + j * stride] * twiddle[j];
        }
        for j in 0..n {
            let xi = grid.axis_frequency(j);
            let p = phi(xi as f64 * w0 / scale);
            if p == Complex64::new(0.0, 0.0) {
                continue;
            }
            let class = xi.rem_euclid(k_samples as i64) as usize;
            out[base + j * stride] = p * twiddle[j].conj() * alias[class];
        }
    }
    let out_fn = SpectralFunction::from_coefficients(grid, out)?;
    Ok(SpectralFunction { band: Some(scale), ..out_fn })
}

/// One-dimensional sampling operator `V_{sigma,lambda}` applied to `f`.
pub fn interp_v(f: &GridFunction, sigma: f64, lambda: f64, r: u32) -> Result<GridFunction> {
    if f.grid().dim() != 1 {
        return Err(Error::Parameter("interp_v is one-dimensional; use interp_v_composite".into()));
    }
    Ok(inverse(&interp_v_axis(&transform(f), 0, sigma, lambda, r)?))
}

/// Composite of per-axis sampling operators with shifts `lambdas[j]` on axis `j`.
pub fn interp_v_composite(s: &SpectralFunction, sigma: f64, lambdas: &[f64], r: u32) -> Result<SpectralFunction> {
    let d = s.grid().dim();
    if lambdas.len() != d {
        return Err(Error::Parameter(format!("need {d} shifts, got {}", lambdas.len())));
    }
    let mut cur = s.clone();
    for j in (0..d).rev() {
        cur = interp_v_axis(&cur, j, sigma, lambdas[j], r)?;
    }
    Ok(cur)
}
