//! Uniform periodic grids, exponents and L_p quasi-norms.
//!
//! A function on R^d is represented by its periodization on the torus
//! [0,L)^d sampled at N points per axis. All sums use a fixed pairwise
//! order so results do not depend on the thread count.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Uniform grid on the torus [0,L)^d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: usize,
    n: usize,
    period: f64,
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize, period: f64) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::Grid(format!("dimension {dim} not in {{1,2}}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Grid(format!("N = {n} must be a power of two >= 8")));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::Grid(format!("period {period} must be positive")));
        }
        Ok(Self { dim, n, period })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight (L/N)^d.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Torus measure L^d.
    pub fn measure(&self) -> f64 {
        self.period.powi(self.dim as i32)
    }

    /// Largest physical frequency resolved by the grid, pi N / L.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI * self.n as f64 / self.period
    }

    /// Coordinates of the flat (row-major) index `k`.
    pub fn point(&self, k: usize) -> [f64; 2] {
        let h = self.spacing();
        match self.dim {
            1 => [k as f64 * h, 0.0],
            _ => [(k / self.n) as f64 * h, (k % self.n) as f64 * h],
        }
    }

    /// Integer frequency of FFT-ordered index `j` along one axis.
    pub fn axis_frequency(&self, j: usize) -> i64 {
        if j < self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Integer frequency vector of a flat FFT-ordered index.
    pub fn frequency_index(&self, k: usize) -> [i64; 2] {
        match self.dim {
            1 => [self.axis_frequency(k), 0],
            _ => [self.axis_frequency(k / self.n), self.axis_frequency(k % self.n)],
        }
    }

    /// Physical frequency 2 pi xi / L of a flat FFT-ordered index.
    pub fn frequency(&self, k: usize) -> [f64; 2] {
        let s = 2.0 * std::f64::consts::PI / self.period;
        let [a, b] = self.frequency_index(k);
        [a as f64 * s, b as f64 * s]
    }
}

/// Integrability exponent p in (0, inf].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else if p.is_finite() && p > 0.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::Parameter(format!("exponent p = {p} must lie in (0, inf]")))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    /// p as a float, `f64::INFINITY` for p = inf.
    pub fn value(&self) -> f64 {
        match *self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    /// 1/p, zero for p = inf.
    pub fn reciprocal(&self) -> f64 {
        match *self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinity => 0.0,
        }
    }

    /// Conjugate exponent p' with 1/p + 1/p' = 1; only defined for p >= 1.
    pub fn conjugate(&self) -> Option<Exponent> {
        match *self {
            Exponent::Infinity => Some(Exponent::Finite(1.0)),
            Exponent::Finite(p) if p == 1.0 => Some(Exponent::Infinity),
            Exponent::Finite(p) if p > 1.0 => Some(Exponent::Finite(p / (p - 1.0))),
            Exponent::Finite(_) => None,
        }
    }

    /// min(p,2) for finite p, 1 for p = inf.
    pub fn theta(&self) -> f64 {
        match *self {
            Exponent::Finite(p) => p.min(2.0),
            Exponent::Infinity => 1.0,
        }
    }

    /// max(p,2).
    pub fn tau(&self) -> Exponent {
        match *self {
            Exponent::Finite(p) => Exponent::Finite(p.max(2.0)),
            Exponent::Infinity => Exponent::Infinity,
        }
    }

    /// p for finite p, 1 for p = inf.
    pub fn q1(&self) -> f64 {
        match *self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => 1.0,
        }
    }

    /// (1/p - 1)_+.
    pub fn deficiency(&self) -> f64 {
        (self.reciprocal() - 1.0).max(0.0)
    }

    /// min(p,1), the exponent of the p-triangle inequality.
    pub fn triangle_power(&self) -> f64 {
        self.value().min(1.0)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(Exponent::Infinity);
        }
        if let Some((a, b)) = t.split_once('/') {
            let a: f64 = a.trim().parse().map_err(|_| Error::Parameter(format!("bad exponent '{s}'")))?;
            let b: f64 = b.trim().parse().map_err(|_| Error::Parameter(format!("bad exponent '{s}'")))?;
            return Exponent::new(a / b);
        }
        let p: f64 = t.parse().map_err(|_| Error::Parameter(format!("bad exponent '{s}'")))?;
        Exponent::new(p)
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Exponent::Finite(p) => s.serialize_f64(p),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Exponent::new(p).map_err(serde::de::Error::custom),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Order alpha > 0 of a difference or derivative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SmoothnessOrder(f64);

impl SmoothnessOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::Parameter(format!("order alpha = {alpha} must be positive")))
        }
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn is_integer(&self) -> bool {
        is_natural(self.0)
    }

    /// alpha in N or alpha > (1/p - 1)_+.
    pub fn admissible_for(&self, p: Exponent) -> bool {
        self.is_integer() || self.0 > p.deficiency()
    }

    pub fn require_admissible(&self, p: Exponent) -> Result<()> {
        if self.admissible_for(p) {
            Ok(())
        } else {
            Err(Error::Admissibility { alpha: self.0, p: p.to_string(), bound: p.deficiency() })
        }
    }
}

/// True for positive integers up to a relative rounding slack.
pub fn is_natural(x: f64) -> bool {
    x >= 1.0 - 1e-12 && (x - x.round()).abs() <= 1e-12 * x.max(1.0)
}

/// Complex samples on a torus grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: TorusGrid,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: TorusGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), got: values.len() });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: TorusGrid, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|k| f(grid.point(k))).collect();
        Self { grid, values }
    }

    pub fn from_real(grid: TorusGrid, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::InvalidInput("functions live on different grids".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { grid: self.grid, values })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self { grid: self.grid, values })
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(Self { grid: self.grid, values })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v * c).collect() }
    }

    /// Pointwise modulus |f| as a grid function.
    pub fn abs(&self) -> Self {
        let values = self.values.iter().map(|v| Complex64::new(v.norm(), 0.0)).collect();
        Self { grid: self.grid, values }
    }

    /// Largest imaginary part relative to the largest modulus.
    pub fn imaginary_fraction(&self) -> f64 {
        let top = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if top == 0.0 {
            return 0.0;
        }
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max) / top
    }
}

/// Sum in a fixed binary-tree order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Quasi-norm of a sample vector for a grid with cell volume `cell`.
pub fn quasi_norm_values(values: &[Complex64], cell: f64, p: Exponent) -> Result<f64> {
    let mut top = 0.0_f64;
    for v in values {
        let a = v.norm();
        if !a.is_finite() {
            return Err(Error::InvalidInput("non-finite sample value".into()));
        }
        top = top.max(a);
    }
    match p {
        Exponent::Infinity => Ok(top),
        Exponent::Finite(_) if top == 0.0 => Ok(0.0),
        Exponent::Finite(p) => {
            // scaling by the maximum keeps |f|^p away from overflow and underflow
            let powers: Vec<f64> = values.iter().map(|v| (v.norm() / top).powf(p)).collect();
            Ok(top * (pairwise_sum(&powers) * cell).powf(1.0 / p))
        }
    }
}

/// (sum_k |f(x_k)|^p (L/N)^d)^(1/p), or max_k |f(x_k)| for p = inf.
pub fn quasi_norm(f: &GridFunction, p: Exponent) -> Result<f64> {
    quasi_norm_values(f.values(), f.grid().cell_volume(), p)
}

/// How a corpus entry was wrapped onto the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PeriodizationMethod {
    /// Sum of translates f(x + mL), |m|_inf <= images.
    Images,
    /// Fourier coefficients `L^{-d} F(f)(omega_xi)` of a bandlimited entry.
    Poisson,
    /// Samples of an already periodic entry.
    Direct,
}

/// Samples of a periodized corpus entry with the bound on what was left out.
#[derive(Debug, Clone, PartialEq)]
pub struct Periodized {
    pub function: GridFunction,
    pub method: PeriodizationMethod,
    /// Largest image index kept.
    pub images: usize,
    /// Sup bound on the neglected translates over the box.
    pub truncation_bound: f64,
    /// Sup bound on the translates that were added to the centred copy
    /// (infinite when no bound is known).
    pub correction_bound: f64,
}

/// Refusal threshold for the neglected tail, relative to the sup of the entry.
pub const PERIODIZATION_TOL: f64 = 1e-10;

fn gaussian_image_bound(amplitude: f64, rate: f64, period: f64, dim: usize, from: usize) -> f64 {
    // translates with |m|_inf = k stay at distance >= (k - 1/2) L from the box
    (from.max(1)..from.max(1) + 64)
        .map(|k| {
            let count = (2 * k + 1).pow(dim as u32) - (2 * k - 1).pow(dim as u32);
            let dist = (k as f64 - 0.5) * period;
            amplitude * count as f64 * (-rate * dist * dist).exp()
        })
        .sum()
}

/// Samples `sum_m f(x + mL)` of a corpus entry on the grid, centred at the origin.
pub fn periodize(entry: &crate::corpus::CorpusEntry, grid: TorusGrid) -> Result<Periodized> {
    use crate::corpus::Decay;
    if entry.dim != grid.dim() {
        return Err(Error::Parameter(format!(
            "entry '{}' is {}-dimensional, grid is {}-dimensional",
            entry.name,
            entry.dim,
            grid.dim()
        )));
    }
    let l = grid.period();
    let centred = |x: [f64; 2]| {
        let wrap = |t: f64| if t >= 0.5 * l { t - l } else { t };
        [wrap(x[0]), wrap(x[1])]
    };
    let scale = entry.eval([0.0, 0.0], l).norm().max(1e-300);
    match entry.decay {
        Decay::Periodic => Ok(Periodized {
            function: GridFunction::from_fn(grid, |x| entry.eval(x, l)),
            method: PeriodizationMethod::Direct,
            images: 0,
            truncation_bound: 0.0,
            correction_bound: 0.0,
        }),
        Decay::Bandlimited => {
            let band = entry.band_radius.unwrap_or(f64::INFINITY);
            if band > grid.nyquist() {
                return Err(Error::AboveNyquist { sigma: band, nyquist: grid.nyquist() });
            }
            let coeffs = (0..grid.len())
                .map(|k| entry.fourier(grid.frequency(k)).map(|c| c / grid.measure()))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::InvalidInput(format!("entry '{}' has no Fourier transform", entry.name)))?;
            let s = crate::spectral::SpectralFunction::from_coefficients(grid, coeffs)?;
            // Fejer translates: sum_{k>=1} 2 * 4 / (b (k - 1/2) L)^2 = 4 pi^2 / (b L)^2 per axis
            let per_axis = match entry.profile {
                crate::corpus::Profile::Fejer { band } => (2.0 * std::f64::consts::PI / (band * l)).powi(2),
                _ => f64::INFINITY,
            };
            Ok(Periodized {
                function: crate::spectral::inverse(&s),
                method: PeriodizationMethod::Poisson,
                images: 0,
                truncation_bound: 0.0,
                correction_bound: (1.0 + per_axis).powi(grid.dim() as i32) - 1.0,
            })
        }
        Decay::Compact { radius } => {
            // the support fits in the box exactly when radius <= L/2 in every translate direction
            if radius > 0.5 * l {
                return Err(Error::PeriodTooSmall {
                    name: entry.name.to_string(),
                    tail: f64::INFINITY,
                    limit: PERIODIZATION_TOL * scale,
                });
            }
            Ok(Periodized {
                function: GridFunction::from_fn(grid, |x| entry.eval(centred(x), l)),
                method: PeriodizationMethod::Images,
                images: 0,
                truncation_bound: 0.0,
                correction_bound: 0.0,
            })
        }
        Decay::Gaussian { amplitude, rate } => {
            let images = 1;
            let tail = gaussian_image_bound(amplitude, rate, l, grid.dim(), images + 1);
            let limit = PERIODIZATION_TOL * scale;
            let correction = gaussian_image_bound(amplitude, rate, l, grid.dim(), 1);
            if correction > limit {
                return Err(Error::PeriodTooSmall { name: entry.name.to_string(), tail: correction, limit });
            }
            let m = images as i64;
            let shifts: Vec<[f64; 2]> = if grid.dim() == 1 {
                (-m..=m).map(|a| [a as f64 * l, 0.0]).collect()
            } else {
                (-m..=m).flat_map(|a| (-m..=m).map(move |b| [a as f64 * l, b as f64 * l])).collect()
            };
            let function = GridFunction::from_fn(grid, |x| {
                let c = centred(x);
                shifts.iter().map(|s| entry.eval([c[0] + s[0], c[1] + s[1]], l)).sum()
            });
            Ok(Periodized {
                function,
                method: PeriodizationMethod::Images,
                images,
                truncation_bound: tail,
                correction_bound: correction,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn line(n: usize, l: f64) -> TorusGrid {
        TorusGrid::new(1, n, l).unwrap()
    }

    #[test]
    fn grid_rejects_bad_shapes() {
        assert!(TorusGrid::new(1, 4, 1.0).is_err());
        assert!(TorusGrid::new(1, 24, 1.0).is_err());
        assert!(TorusGrid::new(3, 8, 1.0).is_err());
        assert!(TorusGrid::new(2, 8, 0.0).is_err());
        let g = TorusGrid::new(2, 16, 4.0).unwrap();
        assert_eq!(g.len(), 256);
        assert_eq!(g.point(17), [0.25, 0.25]);
    }

    #[test]
    fn exponent_derived_quantities() {
        let p = Exponent::Finite(3.0);
        assert_eq!(p.theta(), 2.0);
        assert_eq!(p.tau(), Exponent::Finite(3.0));
        assert!((p.reciprocal() + p.conjugate().unwrap().reciprocal() - 1.0).abs() < 1e-15);
        assert_eq!(Exponent::Infinity.theta(), 1.0);
        assert_eq!(Exponent::Infinity.q1(), 1.0);
        assert_eq!(Exponent::Infinity.conjugate(), Some(Exponent::Finite(1.0)));
        assert_eq!(Exponent::Finite(1.0).conjugate(), Some(Exponent::Infinity));
        assert_eq!(Exponent::Finite(0.5).conjugate(), None);
        assert_eq!(Exponent::Finite(0.5).deficiency(), 1.0);
        assert_eq!(Exponent::Finite(2.0).deficiency(), 0.0);
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinity);
        assert_eq!("1/2".parse::<Exponent>().unwrap(), Exponent::Finite(0.5));
        assert!(Exponent::new(0.0).is_err());
    }

    #[test]
    fn exponent_serde_round_trip() {
        for p in [Exponent::Finite(0.5), Exponent::Infinity] {
            let s = serde_json::to_string(&p).unwrap();
            assert_eq!(serde_json::from_str::<Exponent>(&s).unwrap(), p);
        }
    }

    #[test]
    fn admissibility() {
        let p = Exponent::Finite(0.8);
        assert!(SmoothnessOrder::new(0.4).unwrap().admissible_for(p));
        assert!(!SmoothnessOrder::new(0.2).unwrap().admissible_for(p));
        assert!(SmoothnessOrder::new(1.0).unwrap().admissible_for(Exponent::Finite(0.1)));
    }

    #[test]
    fn norm_of_zero_and_constant() {
        let g = line(64, 2.0 * PI);
        let z = GridFunction::zeros(g);
        for p in [0.5, 1.0, 2.0] {
            assert_eq!(quasi_norm(&z, Exponent::Finite(p)).unwrap(), 0.0);
        }
        let one = GridFunction::from_fn(g, |_| Complex64::new(1.0, 0.0));
        let n2 = quasi_norm(&one, Exponent::Finite(2.0)).unwrap();
        assert!((n2 - (2.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sup_norm_of_sine() {
        let g = line(256, 2.0 * PI);
        let f = GridFunction::from_fn(g, |x| Complex64::new(x[0].sin(), 0.0));
        let n = quasi_norm(&f, Exponent::Infinity).unwrap();
        assert!((n - 1.0).abs() <= 2.0 * g.spacing());
    }

    #[test]
    fn non_finite_samples_rejected() {
        let g = line(8, 1.0);
        let mut v = vec![Complex64::new(1.0, 0.0); 8];
        v[3] = Complex64::new(f64::NAN, 0.0);
        let f = GridFunction::new(g, v).unwrap();
        assert!(matches!(quasi_norm(&f, Exponent::Finite(1.0)), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn refinement_of_smooth_norm() {
        let norm_at = |n: usize| {
            let g = line(n, 40.0);
            let f = GridFunction::from_fn(g, |x| {
                let y = x[0] - 20.0;
                Complex64::new((-y * y).exp(), 0.0)
            });
            quasi_norm(&f, Exponent::Finite(1.5)).unwrap()
        };
        let (a, b) = (norm_at(512), norm_at(1024));
        assert!((a - b).abs() / b < 1e-6);
    }

    #[test]
    fn hoelder_monotone_on_normalized_torus() {
        let g = line(512, 2.0 * PI);
        let f = GridFunction::from_fn(g, |x| Complex64::new((x[0]).sin().abs().sqrt() + 0.1 * x[0].cos(), 0.0));
        let mut last = 0.0;
        for p in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let v = quasi_norm(&f, Exponent::Finite(p)).unwrap() * g.measure().powf(-1.0 / p);
            assert!(v >= last - 1e-14);
            last = v;
        }
        assert!(quasi_norm(&f, Exponent::Infinity).unwrap() >= last);
    }

    fn samples() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 16)
    }

    fn to_fn(v: &[(f64, f64)]) -> GridFunction {
        let g = line(16, 3.0);
        GridFunction::new(g, v.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap()
    }

    proptest! {
        #[test]
        fn homogeneity(v in samples(), c in -5.0..5.0f64, p in 0.2..6.0f64) {
            let f = to_fn(&v);
            for e in [Exponent::Finite(p), Exponent::Infinity] {
                let lhs = quasi_norm(&f.scale(Complex64::new(c, 0.0)), e).unwrap();
                let rhs = c.abs() * quasi_norm(&f, e).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
            }
        }

        #[test]
        fn p_triangle(a in samples(), b in samples(), p in 0.1..1.0f64) {
            let (f, g) = (to_fn(&a), to_fn(&b));
            let e = Exponent::Finite(p);
            let lhs = quasi_norm(&f.add(&g).unwrap(), e).unwrap().powf(p);
            let rhs = quasi_norm(&f, e).unwrap().powf(p) + quasi_norm(&g, e).unwrap().powf(p);
            prop_assert!(lhs <= rhs * (1.0 + 1e-12));
        }

        #[test]
        fn pairwise_sum_matches_naive(xs in prop::collection::vec(0.0..1.0f64, 0..300)) {
            let naive: f64 = xs.iter().sum();
            prop_assert!((pairwise_sum(&xs) - naive).abs() <= 1e-12 * naive.max(1.0));
        }
    }

    #[test]
    fn periodize_gaussian_correction_is_negligible() {
        let e = crate::corpus::corpus_entry("gaussian").unwrap();
        let per = periodize(&e, line(1024, 40.0)).unwrap();
        assert!(per.correction_bound < 1e-12);
        let direct = GridFunction::from_fn(line(1024, 40.0), |x| {
            let t = if x[0] >= 20.0 { x[0] - 40.0 } else { x[0] };
            Complex64::new((-t * t).exp(), 0.0)
        });
        let diff = quasi_norm(&per.function.sub(&direct).unwrap(), Exponent::Infinity).unwrap();
        assert!(diff < 1e-12);
    }

    #[test]
    fn periodize_bump_is_exact() {
        let e = crate::corpus::corpus_entry("bump").unwrap();
        let per = periodize(&e, line(256, 8.0)).unwrap();
        assert_eq!(per.correction_bound, 0.0);
        assert_eq!(per.truncation_bound, 0.0);
        assert!((per.function.values()[0].re - 1.0).abs() < 1e-15);
        let small = periodize(&e, line(256, 1.5));
        assert!(matches!(small, Err(Error::PeriodTooSmall { .. })));
    }

    #[test]
    fn periodize_plane_wave_is_identity() {
        let e = crate::corpus::corpus_entry("plane-wave").unwrap();
        let g = line(64, 7.0);
        let per = periodize(&e, g).unwrap();
        let direct = GridFunction::from_fn(g, |x| Complex64::from_polar(1.0, 2.0 * PI * x[0] / 7.0));
        assert_eq!(per.function, direct);
    }

    #[test]
    fn periodize_refuses_short_gaussian_period() {
        let e = crate::corpus::corpus_entry("gaussian").unwrap();
        assert!(matches!(periodize(&e, line(64, 4.0)), Err(Error::PeriodTooSmall { .. })));
    }

    #[test]
    fn closed_form_transforms_match_discrete() {
        for (name, n) in [("gaussian", 1024), ("modulated-gaussian", 1024), ("fejer", 1024), ("gaussian-2d", 256)] {
            let e = crate::corpus::corpus_entry(name).unwrap();
            let g = e.grid(n).unwrap();
            let s = crate::spectral::transform(&periodize(&e, g).unwrap().function);
            let top = (0..g.len()).map(|k| e.fourier(g.frequency(k)).unwrap().norm()).fold(0.0, f64::max);
            for k in 0..g.len() {
                let exact = e.fourier(g.frequency(k)).unwrap() / g.measure();
                assert!((s.coefficients()[k] - exact).norm() < 1e-8 * top / g.measure(), "{name} {k}");
            }
        }
    }

    #[test]
    fn grid_refinement_on_smooth_entries() {
        // the bump transition is Gevrey class, so it gets a tighter box
        for (name, l) in [("gaussian", 40.0), ("bump", 8.0), ("modulated-gaussian", 40.0)] {
            let e = crate::corpus::corpus_entry(name).unwrap();
            for p in [Exponent::Finite(0.5), Exponent::Finite(1.0), Exponent::Finite(2.0)] {
                let a = quasi_norm(&periodize(&e, line(1024, l)).unwrap().function, p).unwrap();
                let b = quasi_norm(&periodize(&e, line(2048, l)).unwrap().function, p).unwrap();
                assert!((a - b).abs() < 1e-6 * b, "{name} {p} {}", (a - b).abs() / b);
            }
        }
    }
}
