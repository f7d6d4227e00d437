//! Left- and right-hand sides of every check.

use num_complex::Complex64;

use super::eta::UlyanovParams;
use super::quadrature::{log_trapezoid, marchaud_rhs, power_tail, segment, ulyanov_rhs};
use super::{CheckKind, CheckParams, GridVariable, Grids, PropertyId};
use crate::approx::{k_functional, near_best, realization, sup_directional, zero_band_error};
use crate::corpus::{jackson_poly, random_trig_poly, CorpusEntry};
use crate::error::{Error, Result};
use crate::grid::{is_natural, periodize, quasi_norm, Exponent, GridFunction, SmoothnessOrder, TorusGrid};
use crate::moduli::{
    averaged_modulus, binomial_constant, frac_difference_spectrum, geometric_grid, mixed_modulus_curve, modulus_curve,
    multi_indices, partial_modulus_curve, sobolev_seminorm, AveragedForm, DifferenceMethod, DirectionStep, ModulusCurve,
    Sampling,
};
use crate::spectral::{direction_design, directional_derivative_spectrum, i_pow, inverse, transform, SpectralFunction};

pub(super) struct Outcome {
    pub variable: GridVariable,
    pub kind: CheckKind,
    pub grid: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub notes: Vec<String>,
}

impl Outcome {
    fn new(variable: GridVariable, kind: CheckKind, grid: Vec<f64>, lhs: Vec<f64>, rhs: Vec<f64>) -> Self {
        Self { variable, kind, grid, lhs, rhs, notes: Vec::new() }
    }

    fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }

    fn notes(mut self, more: Vec<String>) -> Self {
        self.notes.extend(more);
        self
    }
}

/// Sigmas of a grid that fit below the Nyquist frequency.
pub fn jackson_sigmas(sigmas: &[f64], grid: &TorusGrid) -> Vec<f64> {
    sigmas.iter().cloned().filter(|&s| s <= grid.nyquist()).collect()
}

struct Ctx<'a> {
    id: PropertyId,
    params: &'a CheckParams,
    grids: &'a Grids,
    entry: &'a CorpusEntry,
    grid: TorusGrid,
    d: usize,
    p: Exponent,
}

impl<'a> Ctx<'a> {
    fn hyp(&self, condition: impl Into<String>) -> Error {
        Error::Hypothesis { property: self.id.to_string(), condition: condition.into() }
    }

    fn require(&self, ok: bool, condition: &str) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(self.hyp(format!("requires {condition}")))
        }
    }

    fn variant(&self, allowed: &[&'static str]) -> Result<&'static str> {
        match &self.params.variant {
            None => Ok(allowed[0]),
            Some(v) => allowed
                .iter()
                .find(|a| **a == v.as_str())
                .copied()
                .ok_or_else(|| Error::Parameter(format!("variant '{v}' of {} not in {allowed:?}", self.id))),
        }
    }

    fn q(&self) -> Result<Exponent> {
        self.params.q.ok_or_else(|| Error::Parameter(format!("{} needs q", self.id)))
    }

    /// `x in N u ((1/p-1)_+, inf)`, as a hypothesis.
    fn order(&self, x: f64, p: Exponent, name: &str) -> Result<SmoothnessOrder> {
        let b = p.deficiency();
        if !(is_natural(x) || x > b) {
            return Err(self.hyp(format!("{name} = {x} must lie in N u ({b}, inf) for p = {p}")));
        }
        SmoothnessOrder::new(x)
    }

    fn integer(&self, x: f64, name: &str) -> Result<u32> {
        if !is_natural(x) {
            return Err(self.hyp(format!("{name} = {x} must be a positive integer")));
        }
        Ok(x.round() as u32)
    }

    fn function(&self) -> Result<(GridFunction, Vec<String>)> {
        let per = periodize(self.entry, self.grid)?;
        let mut notes = Vec::new();
        if per.correction_bound > 0.0 {
            notes.push(format!("periodization {:?}, correction bound {:.2e}", per.method, per.correction_bound));
        }
        Ok((per.function, notes))
    }

    fn sampling(&self) -> Sampling {
        Sampling::standard(self.d)
    }

    /// Deltas below 1 (integral checks) or the full list.
    fn deltas_below_one(&self) -> Result<Vec<f64>> {
        let ds: Vec<f64> = self.grids.deltas.iter().cloned().filter(|&d| d < 1.0).collect();
        if ds.is_empty() {
            return Err(Error::Parameter("no delta below 1 in the grid".into()));
        }
        Ok(ds)
    }

    fn sigmas(&self) -> Result<Vec<f64>> {
        let s = jackson_sigmas(&self.grids.sigmas, &self.grid);
        if s.is_empty() {
            return Err(Error::Parameter("no sigma below the Nyquist frequency".into()));
        }
        Ok(s)
    }

    /// Modulus values at arbitrary points `ts` with the standard design.
    fn omega(&self, f: &GridFunction, ts: &[f64], alpha: SmoothnessOrder, p: Exponent) -> Result<Vec<f64>> {
        let mut u = ts.to_vec();
        u.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        u.dedup();
        let c = modulus_curve(f, &u, alpha, p, &self.sampling())?;
        Ok(ts.iter().map(|t| c.values[u.partition_point(|x| x < t)]).collect())
    }

    /// Dense curve on `[lo, hi]` for quadrature: design directions, one magnitude per node.
    fn dense(&self, f: &GridFunction, lo: f64, hi: f64, alpha: SmoothnessOrder, p: Exponent, density: f64) -> Result<ModulusCurve> {
        let n = ((hi / lo).ln() * density).ceil().max(1.0) as usize + 1;
        let ts = geometric_grid(lo, hi, n)?;
        let sampling = Sampling { magnitudes: 1, ..self.sampling() };
        modulus_curve(f, &ts, alpha, p, &sampling)
    }
}

pub(super) fn evaluate(id: PropertyId, entry: &CorpusEntry, params: &CheckParams, grids: &Grids) -> Result<Outcome> {
    let period = params.period.unwrap_or(entry.period);
    let grid = TorusGrid::new(entry.dim, params.n, period)?;
    let ctx = Ctx { id, params, grids, entry, grid, d: entry.dim, p: params.p };
    match id {
        PropertyId::P1a => p1a(&ctx),
        PropertyId::P1b => p1b(&ctx),
        PropertyId::P1c => p1c(&ctx),
        PropertyId::P1d => p1d(&ctx),
        PropertyId::P2 => p2(&ctx),
        PropertyId::P3 => p3(&ctx),
        PropertyId::P4 => p4(&ctx),
        PropertyId::P5 => p5(&ctx),
        PropertyId::P6 => p6(&ctx),
        PropertyId::P7 => p7(&ctx),
        PropertyId::P8 => p8(&ctx),
        PropertyId::P9 => p9(&ctx),
        PropertyId::P10 => p10(&ctx),
        PropertyId::P11 => p11(&ctx),
        PropertyId::P12 => p12(&ctx),
        PropertyId::P13 => p13(&ctx),
        PropertyId::P14 => p14(&ctx),
        PropertyId::P15 => p15(&ctx),
        PropertyId::P16 => p16(&ctx),
        PropertyId::P17 => p17(&ctx),
        PropertyId::Nsb => nsb(&ctx),
        PropertyId::Hln1 | PropertyId::Hln2 | PropertyId::Hln3 => hln(&ctx),
        PropertyId::Bern => bern(&ctx),
        PropertyId::Nik => nik(&ctx),
    }
}

fn p1a(c: &Ctx) -> Result<Outcome> {
    let a = c.order(c.params.alpha, c.p, "alpha")?;
    let (f, notes) = c.function()?;
    let ds = &c.grids.deltas;
    let w = c.omega(&f, ds, a, c.p)?;
    let n = ds.len();
    if n < 2 {
        return Err(Error::Parameter("P1a needs at least two deltas".into()));
    }
    Ok(Outcome::new(GridVariable::Delta, CheckKind::Exact { bound: 1.0 }, ds[..n - 1].to_vec(), w[..n - 1].to_vec(), w[1..].to_vec())
        .note("ratio omega(delta_i)/omega(delta_{i+1})")
        .notes(notes))
}

/// Second summand for the subadditivity and product checks.
fn partner(grid: TorusGrid) -> Result<GridFunction> {
    Ok(inverse(&jackson_poly(grid, 4.0f64.min(grid.nyquist()))?))
}

fn p1b(c: &Ctx) -> Result<Outcome> {
    let a = c.order(c.params.alpha, c.p, "alpha")?;
    let (f, notes) = c.function()?;
    let g = partner(c.grid)?;
    let ds = &c.grids.deltas;
    let wsum = c.omega(&f.add(&g)?, ds, a, c.p)?;
    let wf = c.omega(&f, ds, a, c.p)?;
    let wg = c.omega(&g, ds, a, c.p)?;
    let k = 2f64.powf(c.p.deficiency());
    let rhs = wf.iter().zip(&wg).map(|(x, y)| k * (x + y)).collect();
    Ok(Outcome::new(GridVariable::Delta, CheckKind::Exact { bound: 1.0 + 1e-10 }, ds.clone(), wsum, rhs)
        .note("f2 = squared Fejer kernel of band 4")
        .notes(notes))
}

fn p1c(c: &Ctx) -> Result<Outcome> {
    let a = c.order(c.params.alpha, c.p, "alpha")?;
    let (f, notes) = c.function()?;
    let ds = &c.grids.deltas;
    let w = c.omega(&f, ds, a, c.p)?;
    let bound = binomial_constant(a, c.p)? * quasi_norm(&f, c.p)?;
    Ok(Outcome::new(GridVariable::Delta, CheckKind::Upper, ds.clone(), w, vec![bound; ds.len()])
        .note("C(alpha,p) = (sum |binom(alpha,nu)|^min(p,1))^(1/min(p,1))")
        .notes(notes))
}

fn p1d(c: &Ctx) -> Result<Outcome> {
    c.require(!c.p.is_infinite(), "0 < p < inf")?;
    let a = c.order(c.params.alpha, c.p, "alpha")?;
    let (f, notes) = c.function()?;
    let half = c.grid.period() / 2.0;
    let w = c.omega(&f, &[half], a, c.p)?;
    Ok(Outcome::new(GridVariable::Delta, CheckKind::Upper, vec![half], vec![quasi_norm(&f, c.p)?], w)
        .note("torus surrogate: delta -> inf replaced by delta = L/2, ratio ||f||_p/omega(L/2)")
        .notes(notes))
}

fn p2(c: &Ctx) -> Result<Outcome> {
    let a = c.order(c.params.alpha, c.p, "alpha")?;
    let lam = c.params.lambda;
    if !(lam > 0.0 && lam.is_finite()) {
        return Err(Error::Parameter(format!("lambda = {lam} must be positive")));
    }
    let (f, notes) = c.function()?;
    let ds = &c.grids.deltas;
    let scaled: Vec<f64> = ds.iter().map(|d| lam * d).collect();
    let all: Vec<f64> = ds.iter().chain(&scaled).cloned().collect();
    let w = c.omega(&f, &all, a, c.p)?;
    let k = (1.0 + lam).powf(a.value() + c.d as f64 * c.p.deficiency());
    let n = ds.len();
    let rhs = w[..n].iter().map(|x| k * x).collect();
    Ok(Outcome::new(GridVariable::Delta, CheckKind::Upper, ds.clone(), w[n..].to_vec(), rhs).notes(notes))
}

fn p3(c: &Ctx) -> Result<Outcome> {
    let r = c.integer(c.params.alpha, "r")?;
    let v = c.variant(&["mixed", "partial"])?;
    if v == "partial" {
        c.require(c.p.value() > 1.0 && !c.p.is_infinite(), "1 < p < inf for the partial-moduli form")?;
    }
    let (f, notes) = c.function()?;
    let ds = &c.grids.deltas;
    let lhs = c.omega(&f, ds, SmoothnessOrder::new(r as f64)?, c.p)?;
    let mut rhs = vec![0.0; ds.len()];
    if v == "mixed" {
        let orders: Vec<Vec<u32>> = if c.d == 1 { vec![vec![r]] } else { (0..=r).map(|k| vec![k, r - k]).collect() };
        for o in orders {
            let m = mixed_modulus_curve(&f, &o, ds, c.p)?;
            rhs.iter_mut().zip(&m.values).for_each(|(s, x)| *s += x);
        }
    } else {
        for j in 0..c.d {
            let m = partial_modulus_curve(&f, j, ds, r, c.p)?;
            rhs.iter_mut().zip(&m.values).for_each(|(s, x)| *s += x);
        }
    }
    Ok(Outcome::new(GridVariable::Delta, CheckKind::Band, ds.clone(), lhs, rhs).note(format!("{v} form")).notes(notes))
}

fn p4(c: &Ctx) -> Result<Outcome> {
    let r = c.integer(c.params.alpha, "r")?;
    c.require(c.p.value() > 1.0 && !c.p.is_infinite(), "1 < p < inf")?;
    let (f, mut notes) = c.function()?;
    let ds = &c.grids.deltas;
    let w = c.omega(&f, ds, SmoothnessOrder::new(r as f64)?, c.p)?;
    let sup = ds.iter().zip(&w).map(|(d, x)| x / d.powi(r as i32)).fold(0.0, f64::max);
    let semi = sobolev_seminorm(&f, r, c.p)?;
    if semi.tail_warning {
        notes.push("spectral tail above threshold: seminorm is grid dependent".into());
    }
    Ok(Outcome::new(GridVariable::Delta, CheckKind::Band, vec![ds[0]], vec![sup], vec![semi.value])
        .note("lhs = max over the delta grid of omega_r(h)/h^r")
        .notes(notes))
}

fn p5(c: &Ctx) -> Result<Outcome> {
    let r = c.integer(c.params.alpha, "r")?;
    let q = c.params.q.unwrap_or(c.p);
    let s = Exponent::new(1.0 / (c.p.reciprocal() + q.reciprocal()))?;
    let (f, notes) = c.function()?;
    let g = partner(c.grid)?;
    let ds = &c.grids.deltas;
    let lhs = c.omega(&f.mul(&g)?, ds, SmoothnessOrder::new(r as f64)?, s)?;
    let mut rhs = vec![0.0; ds.len()];
    let binom = |n: u32, k: u32| (1..=k).fold(1.0, |acc, i| acc * (n - k + i) as f64 / i as f64);
    for k in 0..=r {
        let wf = if k == 0 { vec![quasi_norm(&f, c.p)?; ds.len()] } else { c.omega(&f, ds, SmoothnessOrder::new(k as f64)?, c.p)? };
        let wg = if k == r { vec![quasi_norm(&g, q)?; ds.len()] } else { c.omega(&g, ds, SmoothnessOrder::new((r - k) as f64)?, q)? };
        for i in 0..ds.len() {
            rhs[i] += binom(r, k) * wf[i] * wg[i];
        }
    }
    Ok(Outcome::new(GridVariable::Delta, CheckKind::Upper, ds.clone(), lhs, rhs)
        .note(format!("g = squared Fejer kernel of band 4, s = {s}"))
        .notes(notes))
}

fn p6(c: &Ctx) -> Result<Outcome> {
    let r = c.integer(c.params.alpha, "r")?;
    let v = c.variant(&["outer", "inner"])?;
    let q = c.params.q.map(|q| q.value()).unwrap_or(1.0);
    c.require(q.is_finite() && q > 0.0, "0 < q < inf")?;
    let form = if v == "inner" {
        c.require(q <= c.p.value(), "q <= p for the inner form")?;
        AveragedForm::Inner
    } else {
        AveragedForm::Outer
    };
    let (f, notes) = c.function()?;
    let ds = &c.grids.deltas;
    let lhs = c.omega(&f, ds, SmoothnessOrder::new(r as f64)?, c.p)?;
    let rhs = ds.iter().map(|&d| averaged_modulus(&f, d, r, c.p, q, form)).collect::<Result<Vec<_>>>()?;
    Ok(Outcome::new(GridVariable::Delta, CheckKind::Band, ds.clone(), lhs, rhs).note(format!("{v} form, q = {q}")).notes(notes))
}

fn p7(c: &Ctx) -> Result<Outcome> {
    let a = c.order(c.params.alpha, c.p, "alpha")?;
    c.require(c.params.gamma > 0.0, "gamma > 0")?;
    let ag = c.order(c.params.alpha + c.params.gamma, c.p, "alpha + gamma")?;
    let (f, mut notes) = c.function()?;
    let ds = c.deltas_below_one()?;
    let lhs = c.omega(&f, &ds, a, c.p)?;
    let fnorm = quasi_norm(&f, c.p)?;
    let rhs_at = |density: f64| -> Result<Vec<f64>> {
        let curve = c.dense(&f, ds[0], 1.0, ag, c.p, density)?;
        ds.iter().map(|&d| marchaud_rhs(&curve, d, a.value(), c.p, fnorm)).collect()
    };
    let rhs = rhs_at(c.grids.density)?;
    let fine = rhs_at(2.0 * c.grids.density)?;
    notes.push(quadrature_note(&rhs, &fine));
    Ok(Outcome::new(GridVariable::Delta, CheckKind::Upper, ds, lhs, rhs).notes(notes))
}

fn quadrature_note(a: &[f64], b: &[f64]) -> String {
    let change = a.iter().zip(b).filter(|(_, y)| **y > 0.0).map(|(x, y)| (x / y - 1.0).abs()).fold(0.0, f64::max);
    format!("quadrature doubling change {change:.3e}")
}

/// `(int_a^b (w(t) t^pow)^e dt/t)` on a dense curve segment.
fn power_integral(curve: &ModulusCurve, a: f64, b: f64, pow: f64, e: f64) -> Result<f64> {
    let (ts, ws) = segment(curve, a, b)?;
    let g: Vec<f64> = ts.iter().zip(&ws).map(|(t, w)| (w * t.powf(pow)).powf(e)).collect();
    Ok(log_trapezoid(&ts, &g))
}

fn p8(c: &Ctx) -> Result<Outcome> {
    let a = c.order(c.params.alpha, c.p, "alpha")?;
    let b = c.order(c.params.gamma, c.p, "beta")?;
    let ab = SmoothnessOrder::new(a.value() + b.value())?;
    let v = c.variant(&["reverse", "sjj"])?;
    let (f, mut notes) = c.function()?;
    if v == "reverse" {
        let ds = &c.grids.deltas;
        let lhs = c.omega(&f, ds, ab, c.p)?;
        let k = binomial_constant(a, c.p)?;
        let rhs = c.omega(&f, ds, b, c.p)?.into_iter().map(|x| k * x).collect();
        notes.push(format!("explicit constant C(alpha,p) = {k:.6}"));
        return Ok(Outcome::new(GridVariable::Delta, CheckKind::Upper, ds.clone(), lhs, rhs).notes(notes));
    }
    c.require(c.p.value() > 1.0 && !c.p.is_infinite(), "1 < p < inf")?;
    let ds = c.deltas_below_one()?;
    let tau = c.p.tau().value();
    let curve = c.dense(&f, ds[0], 1.0, ab, c.p, c.grids.density)?;
    let lhs = ds
        .iter()
        .map(|&d| Ok(d.powf(a.value()) * power_integral(&curve, d, 1.0, -a.value(), tau)?.powf(1.0 / tau)))
        .collect::<Result<Vec<_>>>()?;
    let rhs = c.omega(&f, &ds, b, c.p)?;
    Ok(Outcome::new(GridVariable::Delta, CheckKind::Upper, ds, lhs, rhs).note(format!("tau = {tau}")).notes(notes))
}

fn p9(c: &Ctx) -> Result<Outcome> {
    let q = c.q()?;
    let v = c.variant(&["sharp", "corollary"])?;
    let d = c.d as f64;
    let gamma = if v == "corollary" {
        c.require(c.p.value() <= 1.0 && q.value() > 1.0, "0 < p <= 1 < q <= inf")?;
        c.require(c.d >= 2, "d >= 2")?;
        let g = d * (1.0 - q.reciprocal());
        c.require(is_natural(c.params.alpha + g), "alpha + d(1 - 1/q) in N")?;
        g
    } else {
        c.params.gamma
    };
    let u = UlyanovParams::new(c.p, q, c.params.alpha, gamma, None).map_err(|e| match e {
        Error::Hypothesis { condition, .. } => c.hyp(condition),
        other => other,
    })?;
    let a = SmoothnessOrder::new(c.params.alpha)?;
    let ag = SmoothnessOrder::new(c.params.alpha + gamma)?;
    let (f, mut notes) = c.function()?;
    let ds = c.deltas_below_one()?;
    let lhs = c.omega(&f, &ds, a, q)?;
    let fnorm = quasi_norm(&f, c.p)?;
    let top = *ds.last().expect("nonempty");
    let rhs_at = |density: f64| -> Result<(Vec<f64>, f64)> {
        let curve = c.dense(&f, c.grids.delta_min, top, ag, c.p, density)?;
        if v == "corollary" {
            // norm-free form with weight t^{-d(1/p-1/q)}
            let pw = -d * (c.p.reciprocal() - q.reciprocal());
            let s = ag.value() + d * c.p.deficiency();
            let w0 = curve.values[0];
            let dm = c.grids.delta_min;
            let tail = power_tail(dm, (s + pw) * u.q1, |t| (w0 * (t / dm).powf(s) * t.powf(pw)).powf(u.q1));
            let vals = ds
                .iter()
                .map(|&x| {
                    let i = if x > dm * (1.0 + 1e-9) { power_integral(&curve, dm, x, pw, u.q1)? } else { 0.0 };
                    Ok((i + tail).powf(1.0 / u.q1))
                })
                .collect::<Result<Vec<_>>>()?;
            let share = tail / (tail + power_integral(&curve, dm, top, pw, u.q1)?);
            Ok((vals, share))
        } else {
            let parts = ds.iter().map(|&x| ulyanov_rhs(&curve, x, &u, c.d, fnorm)).collect::<Result<Vec<_>>>()?;
            let last = parts.last().expect("nonempty");
            let share = last.tail / (last.tail + last.integral);
            Ok((parts.iter().map(|r| r.value).collect(), share))
        }
    };
    let (rhs, share) = rhs_at(c.grids.density)?;
    let (fine, _) = rhs_at(2.0 * c.grids.density)?;
    notes.push(format!("eta branch {:?}", u.regime(c.d)?));
    if v == "sharp" {
        notes.push(format!("norm term {}", if super::eta::drops_norm_term(&u, c.d) { "dropped" } else { "kept" }));
    }
    notes.push(format!("modelled tail below delta_min = {:.3e}: {:.2e} of the integral at the top delta", c.grids.delta_min, share));
    notes.push(quadrature_note(&rhs, &fine));
    Ok(Outcome::new(GridVariable::Delta, CheckKind::Upper, ds, lhs, rhs).notes(notes))
}

fn p10(c: &Ctx) -> Result<Outcome> {
    let q = c.q()?;
    if c.p.value() == 1.0 && c.d == 1 {
        return Err(c.hyp("inequality not valid for p = 1, d = 1"));
    }
    c.require(c.p.value() >= 1.0 && c.p.value() < q.value() && !q.is_infinite(), "1 < p < q < inf (or p = 1 with d >= 2)")?;
    let d = c.d as f64;
    let th = d * (c.p.reciprocal() - q.reciprocal());
    let a = c.order(c.params.alpha, c.p, "alpha")?;
    c.require(a.value() > th, &format!("alpha > d(1/p - 1/q) = {th}"))?;
    let (f, mut notes) = c.function()?;
    let ds = c.deltas_below_one()?;
    let (pv, qv, av) = (c.p.value(), q.value(), a.value());
    let big = c.grid.period() / 2.0 * d.sqrt();
    let cq = c.dense(&f, ds[0], big, a, q, c.grids.density)?;
    let wmax = *cq.values.last().expect("nonempty");
    let far = wmax.powf(pv) * big.powf(-(av - th) * pv) / ((av - th) * pv);
    let lhs = ds
        .iter()
        .map(|&x| Ok(x.powf(av - th) * (power_integral(&cq, x, big, -(av - th), pv)? + far).powf(1.0 / pv)))
        .collect::<Result<Vec<_>>>()?;
    let dm = c.grids.delta_min;
    let top = *ds.last().expect("nonempty");
    let cp = c.dense(&f, dm, top, a, c.p, c.grids.density)?;
    let tail = (cp.values[0] / dm.powf(th)).powf(qv) / ((av - th) * qv);
    let rhs = ds
        .iter()
        .map(|&x| {
            let i = if x > dm * (1.0 + 1e-9) { power_integral(&cp, dm, x, -th, qv)? } else { 0.0 };
            Ok((i + tail).powf(1.0 / qv))
        })
        .collect::<Result<Vec<_>>>()?;
    notes.push(format!("theta = {th}; omega_q taken constant beyond {big:.3} (every shift is reached)"));
    Ok(Outcome::new(GridVariable::Delta, CheckKind::Upper, ds, lhs, rhs).notes(notes))
}

/// `D^beta` for a multi-index.
fn partial_derivative(s: &SpectralFunction, beta: [u32; 2]) -> Result<SpectralFunction> {
    s.apply(|w| {
        let f = |t: f64, k: u32| if k == 0 { Complex64::new(1.0, 0.0) } else { i_pow(t, k as f64) };
        f(w[0], beta[0]) * f(w[1], beta[1])
    })
}

fn p11(c: &Ctx) -> Result<Outcome> {
    let r = c.integer(c.params.alpha, "r")?;
    let m = c.integer(c.params.m, "m")?;
    let v = c.variant(&["lower", "upper", "trebels1", "trebels2"])?;
    c.require(c.p.value() >= 1.0, "1 <= p <= inf")?;
    if v.starts_with("trebels") {
        c.require(c.p.value() > 1.0 && !c.p.is_infinite(), "1 < p < inf")?;
    }
    let (f, mut notes) = c.function()?;
    let s = transform(&f);
    let ds = c.deltas_below_one()?;
    let ro = SmoothnessOrder::new(r as f64)?;
    let rm = SmoothnessOrder::new((r + m) as f64)?;
    let betas: Vec<[u32; 2]> = if v == "trebels2" {
        (0..c.d).map(|j| if j == 0 { [m, 0] } else { [0, m] }).collect()
    } else {
        multi_indices(c.d, m)
    };
    let mut sup = vec![0.0f64; ds.len()];
    for b in betas {
        let g = inverse(&partial_derivative(&s, b)?);
        for (x, y) in sup.iter_mut().zip(c.omega(&g, &ds, ro, c.p)?) {
            *x = x.max(y);
        }
    }
    if v == "lower" {
        let lhs = c.omega(&f, &ds, rm, c.p)?.into_iter().zip(&ds).map(|(w, d)| w / d.powi(m as i32)).collect();
        return Ok(Outcome::new(GridVariable::Delta, CheckKind::Upper, ds, lhs, sup).notes(notes));
    }
    let e = match v {
        "upper" => 1.0,
        "trebels1" => c.p.theta(),
        _ => c.p.tau().value(),
    };
    let dm = c.grids.delta_min;
    let top = *ds.last().expect("nonempty");
    let curve = c.dense(&f, dm, top, rm, c.p, c.grids.density)?;
    // omega_{r+m}(u) ~ omega(dm) (u/dm)^{r+m} below dm
    let tail = (curve.values[0] * dm.powi(-(m as i32))).powf(e) / (r as f64 * e);
    let integral = ds
        .iter()
        .map(|&x| {
            let i = if x > dm * (1.0 + 1e-9) { power_integral(&curve, dm, x, -(m as f64), e)? } else { 0.0 };
            Ok((i + tail).powf(1.0 / e))
        })
        .collect::<Result<Vec<_>>>()?;
    notes.push(format!("integral power {e}"));
    if v == "trebels2" {
        Ok(Outcome::new(GridVariable::Delta, CheckKind::Upper, ds, integral, sup).notes(notes))
    } else {
        Ok(Outcome::new(GridVariable::Delta, CheckKind::Upper, ds, sup, integral).notes(notes))
    }
}

/// Near-best errors at the given bands, made nonincreasing.
fn best_errors(f: &GridFunction, sigmas: &[f64], p: Exponent) -> Result<Vec<f64>> {
    let raw = sigmas.iter().map(|&s| Ok(near_best(f, s, p)?.error)).collect::<Result<Vec<f64>>>()?;
    Ok(raw
        .iter()
        .scan(f64::INFINITY, |m, &e| {
            *m = m.min(e);
            Some(*m)
        })
        .collect())
}

fn p12(c: &Ctx) -> Result<Outcome> {
    let a = c.order(c.params.alpha, c.p, "alpha")?;
    let v = c.variant(&["jackson", "sharp"])?;
    let (f, mut notes) = c.function()?;
    let sig = c.sigmas()?;
    let inv: Vec<f64> = sig.iter().map(|s| 1.0 / s).collect();
    let rhs = c.omega(&f, &inv, a, c.p)?;
    notes.push("E_sigma is the near-best candidate error (an upper bound)".into());
    if v == "jackson" {
        let lhs = best_errors(&f, &sig, c.p)?;
        return Ok(Outcome::new(GridVariable::Sigma, CheckKind::Upper, sig, lhs, rhs).notes(notes));
    }
    c.require(c.p.value() > 1.0 && !c.p.is_infinite(), "1 < p < inf")?;
    c.require(sig[0] >= 1.0, "sigma >= 1")?;
    let kmax = sig.last().expect("nonempty").floor() as usize;
    let ks: Vec<f64> = (1..=kmax).map(|k| k as f64).collect();
    let e = best_errors(&f, &ks, c.p)?;
    let tau = c.p.tau().value();
    let av = a.value();
    let lhs = sig
        .iter()
        .map(|&s| {
            let terms: Vec<f64> = (1..=s.floor() as usize).map(|k| ((k + 1) as f64).powf(av * tau - 1.0) * e[k - 1].powf(tau)).collect();
            s.powf(-av) * terms.iter().sum::<f64>().powf(1.0 / tau)
        })
        .collect();
    Ok(Outcome::new(GridVariable::Sigma, CheckKind::Upper, sig, lhs, rhs).note(format!("tau = {tau}")).notes(notes))
}

fn p13(c: &Ctx) -> Result<Outcome> {
    let a = c.order(c.params.alpha, c.p, "alpha")?;
    let (f, mut notes) = c.function()?;
    let sig = c.sigmas()?;
    c.require(sig[0] >= 1.0, "sigma >= 1")?;
    let inv: Vec<f64> = sig.iter().map(|s| 1.0 / s).collect();
    let lhs = c.omega(&f, &inv, a, c.p)?;
    let kmax = sig.last().expect("nonempty").floor() as usize;
    let ks: Vec<f64> = (1..=kmax).map(|k| k as f64).collect();
    let (e0, _) = zero_band_error(&f, c.p)?;
    let mut e = vec![e0];
    e.extend(best_errors(&f, &ks, c.p)?.into_iter().map(|x| x.min(e0)));
    let th = c.p.theta();
    let av = a.value();
    let rhs = sig
        .iter()
        .map(|&s| {
            let terms: Vec<f64> = (0..=s.floor() as usize).map(|k| ((k + 1) as f64).powf(av * th - 1.0) * e[k].powf(th)).collect();
            s.powf(-av) * terms.iter().sum::<f64>().powf(1.0 / th)
        })
        .collect();
    notes.push(format!("theta = {th}; E_0 = {}", if c.p.is_infinite() { "inf_c ||f - c||_inf" } else { "||f||_p" }));
    Ok(Outcome::new(GridVariable::Sigma, CheckKind::Upper, sig, lhs, rhs).notes(notes))
}

fn p14(c: &Ctx) -> Result<Outcome> {
    let a = c.order(c.params.alpha, c.p, "alpha")?;
    let v = c.variant(&["lower", "upper", "tau", "theta"])?;
    if v == "tau" || v == "theta" {
        c.require(c.p.value() > 1.0 && !c.p.is_infinite(), "1 < p < inf")?;
    }
    let (f, mut notes) = c.function()?;
    let s = transform(&f);
    let nyq = c.grid.nyquist();
    let ns: Vec<i32> = c.sigmas()?.iter().map(|s| s.log2().round() as i32).filter(|&n| n >= 0).collect();
    let ns: Vec<i32> = {
        let mut v = ns;
        v.dedup();
        v
    };
    let kmax = nyq.log2().floor() as i32;
    let av = a.value();
    // sizes ||D P_{2^k}||: directional sup or fractional Laplacian
    let size = |sp: &SpectralFunction| -> Result<f64> {
        if v == "tau" || v == "theta" {
            quasi_norm(&inverse(&sp.apply(|w| Complex64::new(w[0].hypot(w[1]).powf(av), 0.0))?), c.p)
        } else {
            sup_directional(sp, a, c.p)
        }
    };
    let top = *ns.iter().max().expect("nonempty");
    let mut sizes = Vec::new();
    for k in 0..=kmax.max(top) {
        let sigma = 2f64.powi(k);
        let pk = if sigma <= nyq { near_best(&f, sigma, c.p)?.approximant } else { s.clone() };
        sizes.push(size(&pk)?);
    }
    let full = size(&s)?;
    let grid: Vec<f64> = ns.iter().map(|&n| 2f64.powi(-n)).collect();
    let w = c.omega(&f, &grid, a, c.p)?;
    let e = match v {
        "tau" => c.p.tau().value(),
        "theta" => c.p.theta(),
        _ => 1.0,
    };
    let series = |n: i32| -> f64 {
        let mut terms: Vec<f64> = ((n + 1)..=kmax.max(top)).map(|k| (2f64.powf(-(k as f64) * av) * sizes[k as usize]).powf(e)).collect();
        // beyond the grid band P_{2^k} = f
        let k0 = kmax.max(top).max(n) + 1;
        terms.push(full.powf(e) * 2f64.powf(-(k0 as f64) * av * e) / (1.0 - 2f64.powf(-av * e)));
        terms.iter().sum::<f64>().powf(1.0 / e)
    };
    notes.push("P_{2^k} is the near-best approximant; bands above the Nyquist frequency use f itself".into());
    let (lhs, rhs): (Vec<f64>, Vec<f64>) = match v {
        "lower" => (ns.iter().map(|&n| 2f64.powf(-(n as f64) * av) * sizes[n as usize]).collect(), w),
        "upper" | "theta" => (w, ns.iter().map(|&n| series(n)).collect()),
        _ => (ns.iter().map(|&n| series(n)).collect(), w),
    };
    Ok(Outcome::new(GridVariable::Delta, CheckKind::Upper, grid, lhs, rhs).note(format!("{v} form")).notes(notes))
}

fn p15(c: &Ctx) -> Result<Outcome> {
    let a = c.order(c.params.alpha, c.p, "alpha")?;
    let (f, mut notes) = c.function()?;
    let sig = c.sigmas()?;
    let inv: Vec<f64> = sig.iter().map(|s| 1.0 / s).collect();
    let lhs = c.omega(&f, &inv, a, c.p)?;
    let rhs = best_errors(&f, &sig, c.p)?;
    let b = SmoothnessOrder::new(a.value() + c.p.deficiency() + 1.0)?;
    let wb = c.omega(&f, &inv, b, c.p)?;
    let band = lhs.iter().zip(&wb).filter(|(_, y)| **y > 0.0).map(|(x, y)| x / y);
    let (lo, hi) = band.fold((f64::INFINITY, 0.0f64), |(l, h), r| (l.min(r), h.max(r)));
    notes.push(format!("exploratory; condition (i) with beta = {}: omega_alpha/omega_beta in [{lo:.3e}, {hi:.3e}]", b.value()));
    Ok(Outcome::new(GridVariable::Sigma, CheckKind::Band, sig, lhs, rhs).notes(notes))
}

fn p16(c: &Ctx) -> Result<Outcome> {
    c.require(c.p.value() >= 1.0, "1 <= p <= inf (the K-functional vanishes for p < 1)")?;
    let a = SmoothnessOrder::new(c.params.alpha)?;
    c.require(a.value() > 0.0, "alpha > 0")?;
    let (f, notes) = c.function()?;
    let ds = c.deltas_below_one()?;
    let lhs = c.omega(&f, &ds, a, c.p)?;
    let rhs = ds.iter().map(|&d| k_functional(&f, d, a, c.p)).collect::<Result<Vec<_>>>()?;
    Ok(Outcome::new(GridVariable::Delta, CheckKind::Band, ds, lhs, rhs)
        .note("K is the minimum over a fixed candidate set (an upper bound)")
        .notes(notes))
}

fn p17(c: &Ctx) -> Result<Outcome> {
    let a = c.order(c.params.alpha, c.p, "alpha")?;
    let (f, notes) = c.function()?;
    let nyq = c.grid.nyquist();
    let ds: Vec<f64> = c.deltas_below_one()?.into_iter().filter(|d| 1.0 / d <= nyq).collect();
    if ds.is_empty() {
        return Err(Error::Parameter("no delta with 1/delta below the Nyquist frequency".into()));
    }
    let lhs = c.omega(&f, &ds, a, c.p)?;
    let rhs = ds.iter().map(|&d| Ok(realization(&f, d, a, c.p)?.value)).collect::<Result<Vec<_>>>()?;
    Ok(Outcome::new(GridVariable::Delta, CheckKind::Band, ds, lhs, rhs)
        .note("realization at the near-best approximant of band 1/delta")
        .notes(notes))
}

fn nsb(c: &Ctx) -> Result<Outcome> {
    let a = SmoothnessOrder::new(c.params.alpha)?;
    let sigma = c.params.sigma;
    let poly = random_trig_poly(c.grid, sigma, c.params.seed)?;
    let design = direction_design(c.d);
    let zeta = *design
        .get(c.params.direction)
        .ok_or_else(|| Error::Parameter(format!("direction index {} out of range", c.params.direction)))?;
    let lhs0 = quasi_norm(&inverse(&directional_derivative_spectrum(&poly, zeta, a.value())?), c.p)?;
    let hs: Vec<f64> = c.grids.steps.iter().map(|t| t / sigma).collect();
    let rhs = hs
        .iter()
        .map(|&h| {
            let diff = frac_difference_spectrum(&poly, DirectionStep::new(zeta, h)?, a.value(), DifferenceMethod::Spectral)?;
            Ok(h.powf(-a.value()) * quasi_norm(&inverse(&diff), c.p)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let n = hs.len();
    let dev = (rhs[0] / rhs[n - 1] - 1.0).abs();
    Ok(Outcome::new(GridVariable::Step, CheckKind::Band, hs, vec![lhs0; n], rhs)
        .note(format!("random polynomial of band {sigma}, seed {}", c.params.seed))
        .note(format!("deviation of the ratio at h = 1/sigma from the smallest step: {dev:.4e}")))
}

fn poly_sigmas(c: &Ctx) -> Result<Vec<f64>> {
    let s: Vec<f64> = c.sigmas()?.into_iter().filter(|&s| s >= 2.0).collect();
    if s.is_empty() {
        return Err(Error::Parameter("no sigma in [2, Nyquist]".into()));
    }
    Ok(s)
}

fn hln(c: &Ctx) -> Result<Outcome> {
    let d = c.d as f64;
    let av = c.params.alpha;
    c.require(av > 0.0, "alpha > 0")?;
    let (q, gamma) = match c.id {
        PropertyId::Hln1 => {
            let q = c.q()?;
            c.require(c.p.value() <= 1.0 && q.value() > 1.0 && !q.is_infinite(), "0 < p <= 1 and 1 < q < inf")?;
            let g = d * (1.0 - q.reciprocal());
            let ag = av + g;
            if is_natural(ag) && (ag.round() as i64) % 2 == 1 {
                return Err(c.hyp(format!("alpha + gamma = {ag} must not be an odd integer")));
            }
            (q, g)
        }
        PropertyId::Hln2 => {
            let q = c.q()?;
            c.require(c.p.value() <= 1.0 && q.value() > 1.0, "0 < p <= 1 < q <= inf")?;
            c.require(c.d >= 2, "d >= 2")?;
            let g = d * (1.0 - q.reciprocal());
            c.require(g >= 1.0 - 1e-12, "gamma = d(1 - 1/q) >= 1")?;
            c.require(is_natural(av + g), "alpha + gamma in N")?;
            (q, g)
        }
        _ => {
            c.require(c.p.value() > 1.0 && !c.p.is_infinite(), "1 < p < inf")?;
            (Exponent::Infinity, d * c.p.reciprocal())
        }
    };
    let sig = poly_sigmas(c)?;
    let a = SmoothnessOrder::new(av)?;
    let ag = SmoothnessOrder::new(av + gamma)?;
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    for &s in &sig {
        let poly = jackson_poly(c.grid, s)?;
        lhs.push(sup_directional(&poly, a, q)?);
        let top = sup_directional(&poly, ag, c.p)?;
        rhs.push(match c.id {
            PropertyId::Hln1 => s.powf(d * (c.p.reciprocal() - 1.0)) * (s + 1.0).ln().powf(q.reciprocal()) * top + quasi_norm(&inverse(&poly), q)?,
            PropertyId::Hln2 => s.powf(d * (c.p.reciprocal() - 1.0)) * top,
            _ => (s + 1.0).ln().powf(1.0 - c.p.reciprocal()) * top + quasi_norm(&inverse(&poly), c.p)?,
        });
    }
    Ok(Outcome::new(GridVariable::Sigma, CheckKind::Upper, sig, lhs, rhs)
        .note(format!("P = squared Fejer kernel of band sigma; gamma = {gamma}, q = {q}")))
}

fn bern(c: &Ctx) -> Result<Outcome> {
    let a = c.order(c.params.alpha, c.p, "alpha")?;
    let sig = poly_sigmas(c)?;
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    for &s in &sig {
        let poly = jackson_poly(c.grid, s)?;
        lhs.push(sup_directional(&poly, a, c.p)?);
        rhs.push(s.powf(a.value()) * quasi_norm(&inverse(&poly), c.p)?);
    }
    Ok(Outcome::new(GridVariable::Sigma, CheckKind::Upper, sig, lhs, rhs).note("P = squared Fejer kernel of band sigma"))
}

fn nik(c: &Ctx) -> Result<Outcome> {
    let q = c.q()?;
    c.require(c.p.value() < q.value(), "p < q")?;
    let sig = poly_sigmas(c)?;
    let k = c.d as f64 * (c.p.reciprocal() - q.reciprocal());
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    for &s in &sig {
        let poly = inverse(&jackson_poly(c.grid, s)?);
        lhs.push(quasi_norm(&poly, q)?);
        rhs.push(s.powf(k) * quasi_norm(&poly, c.p)?);
    }
    Ok(Outcome::new(GridVariable::Sigma, CheckKind::Upper, sig, lhs, rhs).note("P = squared Fejer kernel of band sigma"))
}
