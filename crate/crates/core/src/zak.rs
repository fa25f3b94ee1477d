//! The kernel `Phi(x, y) = (1/2sigma) sum_j B(x - j pi/sigma) exp(i j pi y/sigma)`
//! by its time-domain sum and by its frequency-domain sum
//! `sum_nu B^(y + 2 nu sigma) exp(i (y + 2 nu sigma) x)`, and numerical checks
//! of its norm, periodicity, representation and inner-product identities.

use std::cell::{Cell, RefCell};
use std::f64::consts::PI;
use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::generator::{time_integral_order, Generator};
use crate::numerics::special::tapered_sum;
use crate::numerics::{pairwise_sum_by, Grid};
use crate::spectral::periodize;
use crate::C64;

/// Largest half-width of a plain (untapered) truncated sum.
const PLAIN_CAP: i64 = 1 << 16;

const PHASOR_BLOCK: usize = 64;

/// Which series produced a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    TimeSum,
    FreqSum,
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Representation::TimeSum => "time_sum",
            Representation::FreqSum => "freq_sum",
        })
    }
}

/// `sum_i values[i] exp(i (first + i) omega)` with a phasor recurrence
/// re-anchored at every block start.
fn oscillatory_sum(values: &[C64], first: i64, omega: f64) -> C64 {
    let n = values.len();
    let rot = C64::from_polar(1.0, omega);
    pairwise_sum_by(n.div_ceil(PHASOR_BLOCK), |b| {
        let lo = b * PHASOR_BLOCK;
        let hi = (lo + PHASOR_BLOCK).min(n);
        let mut phase = C64::from_polar(1.0, (first + lo as i64) as f64 * omega);
        let mut acc = C64::zero();
        for v in &values[lo..hi] {
            acc += v * phase;
            phase *= rot;
        }
        acc
    })
}

/// Index range of a truncated sum.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Plan {
    /// Terms vanish outside `[lo, hi]` (a support interval).
    Finite { lo: f64, hi: f64 },
    /// `|k - k0| <= half` with the omitted terms bounded by `tail`.
    Bounded { half: i64, tail: f64 },
    /// Gaussian-tapered partial sums until they settle.
    Tapered,
}

fn time_plan(gen: &Generator, sigma: f64, tol: f64) -> Result<Plan> {
    if !gen.has_time_domain() {
        return Err(Error::MissingTimeDomain(gen.label().to_string()));
    }
    if let Some((lo, hi)) = gen.time_support() {
        return Ok(Plan::Finite { lo, hi });
    }
    let d = gen.time_decay().ok_or_else(|| {
        Error::TruncationFailure(format!(
            "`{}` has neither compact support nor a time decay bound",
            gen.label()
        ))
    })?;
    let q = d.exponent;
    if q <= 1.0 {
        return Ok(Plan::Tapered);
    }
    let h = PI / sigma;
    // sum_{|k| > K} C (1 + k h - h/2)^-q / (2 sigma) <= tol
    let tail = |k: i64| {
        d.constant * (1.0 + k as f64 * h - 0.5 * h).powf(1.0 - q) / (sigma * h * (q - 1.0))
    };
    let target = (d.constant / (sigma * h * (q - 1.0) * tol)).powf(1.0 / (q - 1.0));
    let k = ((target - 1.0 + 0.5 * h) / h).ceil();
    if !(k.is_finite() && k <= PLAIN_CAP as f64) {
        return Ok(Plan::Tapered);
    }
    let half = (k as i64).max(1);
    Ok(Plan::Bounded {
        half,
        tail: tail(half),
    })
}

fn freq_plan(gen: &Generator, sigma: f64, tol: f64) -> Result<Plan> {
    if let Some((lo, hi)) = gen.spectral_support() {
        return Ok(Plan::Finite { lo, hi });
    }
    let d = gen.decay();
    let p = d.exponent;
    if p <= 1.0 {
        return Err(Error::TruncationFailure(format!(
            "frequency sum of `{}` converges only in L2 (decay exponent {p} <= 1)",
            gen.label()
        )));
    }
    let tail =
        |n: i64| d.constant / (sigma * (p - 1.0)) * (1.0 + (2.0 * n as f64 - 1.0) * sigma).powf(1.0 - p);
    let target = (d.constant / (sigma * (p - 1.0) * tol)).powf(1.0 / (p - 1.0));
    let n = (((target - 1.0) / sigma + 1.0) / 2.0).ceil();
    if !(n.is_finite() && n <= PLAIN_CAP as f64) {
        return Ok(Plan::Tapered);
    }
    let half = (n as i64).max(1);
    Ok(Plan::Bounded {
        half,
        tail: tail(half),
    })
}

/// A value of `Phi` with the bound on its truncation error and the number of
/// terms on either side of the centre.
#[derive(Debug, Clone, Copy)]
struct Evaluated {
    value: C64,
    tail: f64,
    half: usize,
}

/// Evaluates `Phi` for one generator in either representation.
struct PhiEvaluator<'a> {
    gen: &'a Generator,
    sigma: f64,
    tol: f64,
    time: Option<Plan>,
    freq: Option<Plan>,
}

impl<'a> PhiEvaluator<'a> {
    fn new(gen: &'a Generator, sigma: f64, tol: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        Ok(Self {
            gen,
            sigma,
            tol,
            time: time_plan(gen, sigma, tol).ok(),
            freq: freq_plan(gen, sigma, tol).ok(),
        })
    }

    fn step(&self) -> f64 {
        PI / self.sigma
    }

    /// Time sums converge absolutely: compact support or decay faster than `1/x`.
    fn time_summable(&self) -> bool {
        matches!(self.time, Some(Plan::Finite { .. } | Plan::Bounded { .. }))
    }

    fn primary(&self) -> Result<Representation> {
        if self.time_summable() {
            Ok(Representation::TimeSum)
        } else if self.freq.is_some() {
            Ok(Representation::FreqSum)
        } else if self.time.is_some() {
            Ok(Representation::TimeSum)
        } else {
            time_plan(self.gen, self.sigma, self.tol).map(|_| Representation::TimeSum)
        }
    }

    fn time_plan(&self) -> Result<Plan> {
        match self.time {
            Some(p) => Ok(p),
            None => time_plan(self.gen, self.sigma, self.tol),
        }
    }

    fn freq_plan(&self) -> Result<Plan> {
        match self.freq {
            Some(p) => Ok(p),
            None => freq_plan(self.gen, self.sigma, self.tol),
        }
    }

    /// Values `B(x - j h)` for the retained `j`, with the first index.
    fn time_terms(&self, plan: Plan, x: f64) -> Result<(i64, Vec<C64>)> {
        let h = self.step();
        let (first, last) = match plan {
            Plan::Finite { lo, hi } => (((x - hi) / h).ceil() as i64, ((x - lo) / h).floor() as i64),
            Plan::Bounded { half, .. } => {
                let j0 = (x / h).round() as i64;
                (j0 - half, j0 + half)
            }
            Plan::Tapered => unreachable!("tapered sums have no fixed range"),
        };
        let values = (first..=last)
            .map(|j| self.gen.time_domain(x - j as f64 * h))
            .collect::<Result<Vec<_>>>()?;
        Ok((first, values))
    }

    /// Values `B^(y + 2 nu sigma)` for the retained `nu`, with the first index.
    fn freq_terms(&self, plan: Plan, y: f64) -> (i64, Vec<C64>) {
        let two_sigma = 2.0 * self.sigma;
        let (first, last) = match plan {
            Plan::Finite { lo, hi } => (
                ((lo - y) / two_sigma).ceil() as i64,
                ((hi - y) / two_sigma).floor() as i64,
            ),
            Plan::Bounded { half, .. } => {
                let n0 = -(y / two_sigma).round() as i64;
                (n0 - half, n0 + half)
            }
            Plan::Tapered => unreachable!("tapered sums have no fixed range"),
        };
        let values = (first..=last)
            .map(|n| self.gen.spectrum(y + n as f64 * two_sigma))
            .collect();
        (first, values)
    }

    fn time_from_terms(&self, first: i64, terms: &[C64], y: f64) -> C64 {
        oscillatory_sum(terms, first, PI * y / self.sigma) / (2.0 * self.sigma)
    }

    fn freq_from_terms(&self, first: i64, terms: &[C64], x: f64, y: f64) -> C64 {
        C64::from_polar(1.0, x * y) * oscillatory_sum(terms, first, 2.0 * self.sigma * x)
    }

    fn plan_tail(plan: Plan) -> f64 {
        match plan {
            Plan::Bounded { tail, .. } => tail,
            _ => 0.0,
        }
    }

    fn time_at(&self, x: f64, y: f64) -> Result<Evaluated> {
        let plan = self.time_plan()?;
        if plan == Plan::Tapered {
            let h = self.step();
            let j0 = (x / h).round() as i64;
            let w = PI * y / self.sigma;
            let gen = self.gen;
            let time = gen.time_fn().ok_or_else(|| Error::MissingTimeDomain(gen.label().to_string()))?;
            let s = tapered_sum(
                |k| {
                    let j = j0 + k;
                    time(x - j as f64 * h) * C64::from_polar(1.0, j as f64 * w)
                },
                self.tol,
            )?;
            return Ok(Evaluated {
                value: s.value / (2.0 * self.sigma),
                tail: s.change / (2.0 * self.sigma),
                half: s.half_width,
            });
        }
        let (first, terms) = self.time_terms(plan, x)?;
        Ok(Evaluated {
            value: self.time_from_terms(first, &terms, y),
            tail: Self::plan_tail(plan),
            half: terms.len() / 2,
        })
    }

    fn freq_at(&self, x: f64, y: f64) -> Result<Evaluated> {
        let plan = self.freq_plan()?;
        if plan == Plan::Tapered {
            let two_sigma = 2.0 * self.sigma;
            let n0 = -(y / two_sigma).round() as i64;
            let s = tapered_sum(
                |k| {
                    let u = y + (n0 + k) as f64 * two_sigma;
                    self.gen.spectrum(u) * C64::from_polar(1.0, u * x)
                },
                self.tol,
            )?;
            return Ok(Evaluated {
                value: s.value,
                tail: s.change,
                half: s.half_width,
            });
        }
        let (first, terms) = self.freq_terms(plan, y);
        Ok(Evaluated {
            value: self.freq_from_terms(first, &terms, x, y),
            tail: Self::plan_tail(plan),
            half: terms.len() / 2,
        })
    }

    fn at(&self, repr: Representation, x: f64, y: f64) -> Result<Evaluated> {
        match repr {
            Representation::TimeSum => self.time_at(x, y),
            Representation::FreqSum => self.freq_at(x, y),
        }
    }

    /// Row-major `x` by `y` matrix of values, sharing the generator values
    /// along the index that does not enter the phases.
    fn field(&self, repr: Representation, xs: &[f64], ys: &[f64]) -> Result<(Vec<C64>, f64, usize)> {
        let ny = ys.len();
        let mut values = vec![C64::zero(); xs.len() * ny];
        let mut tail: f64 = 0.0;
        let mut half = 0;
        let plan = match repr {
            Representation::TimeSum => self.time_plan()?,
            Representation::FreqSum => self.freq_plan()?,
        };
        match (repr, plan) {
            (_, Plan::Tapered) => {
                for (ix, &x) in xs.iter().enumerate() {
                    for (iy, &y) in ys.iter().enumerate() {
                        let e = self.at(repr, x, y)?;
                        values[ix * ny + iy] = e.value;
                        tail = tail.max(e.tail);
                        half = half.max(e.half);
                    }
                }
            }
            (Representation::TimeSum, _) => {
                tail = Self::plan_tail(plan);
                for (ix, &x) in xs.iter().enumerate() {
                    let (first, terms) = self.time_terms(plan, x)?;
                    half = half.max(terms.len() / 2);
                    for (iy, &y) in ys.iter().enumerate() {
                        values[ix * ny + iy] = self.time_from_terms(first, &terms, y);
                    }
                }
            }
            (Representation::FreqSum, _) => {
                tail = Self::plan_tail(plan);
                for (iy, &y) in ys.iter().enumerate() {
                    let (first, terms) = self.freq_terms(plan, y);
                    half = half.max(terms.len() / 2);
                    for (ix, &x) in xs.iter().enumerate() {
                        values[ix * ny + iy] = self.freq_from_terms(first, &terms, x, y);
                    }
                }
            }
        }
        Ok((values, tail, half))
    }
}

/// `(1/2sigma) sum_j B(x - j pi/sigma) exp(i j pi y/sigma)`, exact for compact
/// support and truncated by the time decay bound otherwise.
pub fn phi_time(gen: &Generator, sigma: f64, x: f64, y: f64, tol: f64) -> Result<C64> {
    let ev = PhiEvaluator::new(gen, sigma, tol)?;
    ev.time_plan()?;
    ev.time_at(x, y).map(|e| e.value)
}

/// `sum_nu B^(y + 2 nu sigma) exp(i (y + 2 nu sigma) x)`; refused when the
/// spectrum decays no faster than `1/|y|`.
pub fn phi_freq(gen: &Generator, sigma: f64, x: f64, y: f64, tol: f64) -> Result<C64> {
    let ev = PhiEvaluator::new(gen, sigma, tol)?;
    ev.freq_plan()?;
    ev.freq_at(x, y).map(|e| e.value)
}

/// `Phi` on cell-centred grids over the fundamental cell
/// `[0, pi/sigma] x [-sigma, sigma]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiField {
    pub sigma: f64,
    pub x_grid: Grid,
    pub y_grid: Grid,
    /// Row-major: `values[ix * y_grid.count() + iy]`.
    pub values: Vec<C64>,
    pub representation: Representation,
    pub truncation_order: usize,
    pub tail_bound: f64,
}

impl PhiField {
    /// Field with `nx` by `ny` cells in the representation that converges
    /// best for `gen`, or in `repr` when given.
    pub fn compute(
        gen: &Generator,
        sigma: f64,
        nx: usize,
        ny: usize,
        repr: Option<Representation>,
        tol: f64,
    ) -> Result<Self> {
        let ev = PhiEvaluator::new(gen, sigma, tol)?;
        let repr = match repr {
            Some(r) => r,
            None => ev.primary()?,
        };
        let x_grid = Grid::cell_centered(0.0, PI / sigma, nx)?;
        let y_grid = Grid::cell_centered(-sigma, sigma, ny)?;
        let xs: Vec<f64> = x_grid.nodes().collect();
        let ys: Vec<f64> = y_grid.nodes().collect();
        let (values, tail_bound, truncation_order) = ev.field(repr, &xs, &ys)?;
        Ok(Self {
            sigma,
            x_grid,
            y_grid,
            values,
            representation: repr,
            truncation_order,
            tail_bound,
        })
    }

    pub fn at(&self, ix: usize, iy: usize) -> C64 {
        self.values[ix * self.y_grid.count() + iy]
    }

    /// `(x, y, value)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (f64, f64, C64)> + '_ {
        let ny = self.y_grid.count();
        self.values.iter().enumerate().map(move |(i, v)| {
            (self.x_grid.node(i / ny), self.y_grid.node(i % ny), *v)
        })
    }
}

/// Field in the representation that converges best for `gen`, with
/// `resolution` cells along each axis.
pub fn phi_field(gen: &Generator, sigma: f64, resolution: usize, tol: f64) -> Result<PhiField> {
    PhiField::compute(gen, sigma, resolution, resolution, None, tol)
}

/// Identity checked by [`verify_phi_properties`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiCheck {
    /// `integral over the cell of |Phi|^2 = ||B||^2 / 2sigma`.
    Norm,
    /// `Phi(x, y + 2sigma) = Phi(x, y)`.
    FrequencyPeriod,
    /// `Phi(x + pi/sigma, y) = exp(i pi y/sigma) Phi(x, y)`.
    TimeQuasiPeriod,
    /// `conj(Phi(x, y)) = Phi(x, -y)` for real generators.
    Conjugation,
    /// Time and frequency sums agree.
    Representations,
    /// `integral B(t) conj(Phi(t, y)) dt = 2 pi D(y)` in `L2[-sigma, sigma]`.
    InnerProduct,
}

impl PhiCheck {
    pub const ALL: [PhiCheck; 6] = [
        PhiCheck::Norm,
        PhiCheck::FrequencyPeriod,
        PhiCheck::TimeQuasiPeriod,
        PhiCheck::Conjugation,
        PhiCheck::Representations,
        PhiCheck::InnerProduct,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PhiCheck::Norm => "phi1_norm",
            PhiCheck::FrequencyPeriod => "phi2_y_period",
            PhiCheck::TimeQuasiPeriod => "phi2_x_quasi_period",
            PhiCheck::Conjugation => "phi2_conjugation",
            PhiCheck::Representations => "phi3_representations",
            PhiCheck::InnerProduct => "phi4_inner_product",
        }
    }
}

impl fmt::Display for PhiCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Residual of one identity with the estimated size of its numerical errors.
#[derive(Debug, Clone, PartialEq)]
pub enum CheckOutcome {
    Measured {
        residual: f64,
        /// Quadrature error estimate.
        quadrature: f64,
        /// Series truncation bound.
        truncation: f64,
    },
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub check: PhiCheck,
    pub outcome: CheckOutcome,
}

impl PropertyResult {
    pub fn residual(&self) -> Option<f64> {
        match self.outcome {
            CheckOutcome::Measured { residual, .. } => Some(residual),
            CheckOutcome::Skipped(_) => None,
        }
    }

    /// Quadrature plus truncation contributions, zero when skipped.
    pub fn numerical_error(&self) -> f64 {
        match self.outcome {
            CheckOutcome::Measured {
                quadrature,
                truncation,
                ..
            } => quadrature + truncation,
            CheckOutcome::Skipped(_) => 0.0,
        }
    }
}

/// Residuals of the identities satisfied by `Phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub sigma: f64,
    pub resolution: usize,
    pub representation: Representation,
    pub results: Vec<PropertyResult>,
}

impl PropertyReport {
    pub fn get(&self, check: PhiCheck) -> &PropertyResult {
        self.results
            .iter()
            .find(|r| r.check == check)
            .expect("every check is reported")
    }

    /// Largest measured residual.
    pub fn max_residual(&self) -> f64 {
        self.results
            .iter()
            .filter_map(PropertyResult::residual)
            .fold(0.0, f64::max)
    }
}

/// Gauss-Legendre orders for the `x` integrals and their error estimates.
const GL_FINE: usize = 24;
const GL_COARSE: usize = 12;

/// Runs every check on `resolution`-cell grids.
pub fn verify_phi_properties(
    gen: &Generator,
    sigma: f64,
    resolution: usize,
    tol: f64,
) -> Result<PropertyReport> {
    if resolution < 2 {
        return Err(Error::InvalidParameter(format!(
            "resolution must be at least 2, got {resolution}"
        )));
    }
    let ev = PhiEvaluator::new(gen, sigma, tol)?;
    let repr = ev.primary()?;
    let field = PhiField::compute(gen, sigma, resolution, resolution, Some(repr), tol)?;
    type Check<'a> = (PhiCheck, Box<dyn Fn() -> Result<CheckOutcome> + 'a>);
    let checks: [Check<'_>; 6] = [
        (PhiCheck::Norm, Box::new(|| norm_check(&ev, repr, resolution))),
        (
            PhiCheck::FrequencyPeriod,
            Box::new(|| frequency_period_check(&ev, repr, &field)),
        ),
        (
            PhiCheck::TimeQuasiPeriod,
            Box::new(|| time_quasi_period_check(&ev, repr, &field)),
        ),
        (
            PhiCheck::Conjugation,
            Box::new(|| conjugation_check(&ev, repr, &field)),
        ),
        (
            PhiCheck::Representations,
            Box::new(|| representation_check(&ev, repr, &field)),
        ),
        (
            PhiCheck::InnerProduct,
            Box::new(|| inner_product_check(&ev, repr, &field)),
        ),
    ];
    let results = checks
        .iter()
        .map(|(check, run)| {
            let outcome = match run() {
                Ok(o) => o,
                Err(e) if e.is_numerical() => CheckOutcome::Skipped(e.to_string()),
                Err(e) => return Err(e),
            };
            Ok(PropertyResult {
                check: *check,
                outcome,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PropertyReport {
        sigma,
        resolution,
        representation: repr,
        results,
    })
}

/// `integral_0^{pi/sigma} g(x) dx` by Gauss-Legendre panels split at the
/// generator's breakpoints, at two orders.
fn cell_integral(ev: &PhiEvaluator, n: usize, g: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let err = RefCell::new(None);
    let v = time_integral_order(
        ev.gen.breaks(),
        ev.gen.time_scale().min(ev.step()),
        0.0,
        ev.step(),
        n,
        |x| match g(x) {
            Ok(v) => C64::new(v, 0.0),
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                C64::zero()
            }
        },
    );
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(v.re),
    }
}

fn norm_check(ev: &PhiEvaluator, repr: Representation, resolution: usize) -> Result<CheckOutcome> {
    let sigma = ev.sigma;
    let norm_sq = ev.gen.norm_sq()?;
    let ys_fine: Vec<f64> = Grid::cell_centered(-sigma, sigma, resolution)?.nodes().collect();
    let ys_coarse: Vec<f64> = Grid::cell_centered(-sigma, sigma, resolution.div_ceil(2))?
        .nodes()
        .collect();
    let tail = Cell::new(0.0f64);
    let row = |ys: &[f64], x: f64| -> Result<f64> {
        let dy = 2.0 * sigma / ys.len() as f64;
        let mut s = 0.0;
        for &y in ys {
            let e = ev.at(repr, x, y)?;
            tail.set(tail.get().max(e.tail));
            s += e.value.norm_sqr();
        }
        Ok(s * dy)
    };
    let fine = cell_integral(ev, GL_FINE, |x| row(&ys_fine, x))?;
    let coarse_x = cell_integral(ev, GL_COARSE, |x| row(&ys_fine, x))?;
    let coarse_y = cell_integral(ev, GL_FINE, |x| row(&ys_coarse, x))?;
    let max_abs = (norm_sq / (2.0 * sigma) / (2.0 * PI)).sqrt().max(1.0);
    Ok(CheckOutcome::Measured {
        residual: (fine - norm_sq / (2.0 * sigma)).abs(),
        quadrature: (fine - coarse_x).abs() + (fine - coarse_y).abs(),
        // |Phi|^2 perturbed by 2 |Phi| tail over a cell of area 2 pi
        truncation: 2.0 * PI * (2.0 * max_abs * tail.get() + tail.get() * tail.get()),
    })
}

fn max_over_field(
    ev: &PhiEvaluator,
    repr: Representation,
    field: &PhiField,
    other: impl Fn(f64, f64) -> Result<(C64, f64)>,
) -> Result<CheckOutcome> {
    let mut residual: f64 = 0.0;
    let mut tail: f64 = 0.0;
    for (x, y, v) in field.entries() {
        let (w, t) = other(x, y)?;
        residual = residual.max((w - v).norm());
        tail = tail.max(t);
    }
    let _ = (ev, repr);
    Ok(CheckOutcome::Measured {
        residual,
        quadrature: 0.0,
        truncation: tail + field.tail_bound,
    })
}

fn frequency_period_check(
    ev: &PhiEvaluator,
    repr: Representation,
    field: &PhiField,
) -> Result<CheckOutcome> {
    max_over_field(ev, repr, field, |x, y| {
        let e = ev.at(repr, x, y + 2.0 * ev.sigma)?;
        Ok((e.value, e.tail))
    })
}

fn time_quasi_period_check(
    ev: &PhiEvaluator,
    repr: Representation,
    field: &PhiField,
) -> Result<CheckOutcome> {
    let mut residual: f64 = 0.0;
    let mut tail: f64 = 0.0;
    for (x, y, v) in field.entries() {
        let e = ev.at(repr, x + ev.step(), y)?;
        let expect = C64::from_polar(1.0, PI * y / ev.sigma) * v;
        residual = residual.max((e.value - expect).norm());
        tail = tail.max(e.tail);
    }
    Ok(CheckOutcome::Measured {
        residual,
        quadrature: 0.0,
        truncation: tail + field.tail_bound,
    })
}

fn conjugation_check(
    ev: &PhiEvaluator,
    repr: Representation,
    field: &PhiField,
) -> Result<CheckOutcome> {
    if !ev.gen.is_real_valued() {
        return Ok(CheckOutcome::Skipped(format!(
            "`{}` is not real-valued",
            ev.gen.label()
        )));
    }
    let ny = field.y_grid.count();
    let mut residual: f64 = 0.0;
    for ix in 0..field.x_grid.count() {
        // the cell-centred y grid is symmetric, so -y is node ny - 1 - iy
        for iy in 0..ny {
            residual = residual.max((field.at(ix, iy).conj() - field.at(ix, ny - 1 - iy)).norm());
        }
    }
    let _ = repr;
    Ok(CheckOutcome::Measured {
        residual,
        quadrature: 0.0,
        truncation: 2.0 * field.tail_bound,
    })
}

fn representation_check(
    ev: &PhiEvaluator,
    repr: Representation,
    field: &PhiField,
) -> Result<CheckOutcome> {
    let other = match repr {
        Representation::TimeSum => Representation::FreqSum,
        Representation::FreqSum => Representation::TimeSum,
    };
    match other {
        Representation::TimeSum => ev.time_plan()?,
        Representation::FreqSum => ev.freq_plan()?,
    };
    let xs: Vec<f64> = field.x_grid.nodes().collect();
    let ys: Vec<f64> = field.y_grid.nodes().collect();
    let (values, tail, _) = ev.field(other, &xs, &ys)?;
    let residual = values
        .iter()
        .zip(&field.values)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(CheckOutcome::Measured {
        residual,
        quadrature: 0.0,
        truncation: tail + field.tail_bound,
    })
}

fn inner_product_check(
    ev: &PhiEvaluator,
    repr: Representation,
    field: &PhiField,
) -> Result<CheckOutcome> {
    let sigma = ev.sigma;
    let gen = ev.gen;
    let y_grid = field.y_grid;
    let d = periodize(gen, sigma, &y_grid, ev.tol)?;
    let sup_phi = field.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    // `integral B conj(Phi(., y))` at a given Gauss-Legendre order, with a
    // bound on what lies outside the integration window
    let transform = |y: f64, n: usize| -> Result<(C64, f64)> {
        let err = RefCell::new(None);
        let tail = Cell::new(0.0f64);
        let record = |r: Result<Evaluated>| match r {
            Ok(e) => {
                tail.set(tail.get().max(e.tail));
                e.value
            }
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                C64::zero()
            }
        };
        let window = match (gen.time_support(), ev.time_plan()) {
            (Some(s), _) => Some((s, 0.0)),
            (None, Ok(Plan::Bounded { .. })) => {
                let (lo, hi) = gen.time_profile()?.window;
                let d = gen.time_decay().expect("bounded time sums have a decay bound");
                let r = lo.abs().min(hi.abs());
                let outside = 2.0 * d.constant * (1.0 + r).powf(1.0 - d.exponent) / (d.exponent - 1.0);
                Some(((lo, hi), outside * sup_phi))
            }
            _ => None,
        };
        let value = match window {
            Some(((lo, hi), outside)) => {
                let v = time_integral_order(gen.breaks(), gen.time_scale(), lo, hi, n, |t| {
                    let b = gen.time_domain(t).unwrap_or_default();
                    b * record(ev.time_at(t, y)).conj()
                });
                tail.set(tail.get().max(outside));
                v
            }
            None => {
                // fold the line onto one cell with the quasi-periodicity:
                // integral B conj(Phi) = 2 sigma integral_0^{pi/sigma} |Phi|^2
                let v = time_integral_order(
                    gen.breaks(),
                    gen.time_scale().min(ev.step()),
                    0.0,
                    ev.step(),
                    n,
                    |t| C64::new(record(ev.at(repr, t, y)).norm_sqr(), 0.0),
                );
                v * (2.0 * sigma)
            }
        };
        match err.into_inner() {
            Some(e) => Err(e),
            None => Ok((value, tail.get())),
        }
    };
    let dy = y_grid.step();
    let mut dist = 0.0;
    let mut quad = 0.0;
    let mut trunc: f64 = 0.0;
    for (k, y) in y_grid.nodes().enumerate() {
        let (fine, t) = transform(y, GL_FINE)?;
        let (coarse, _) = transform(y, GL_COARSE)?;
        dist += (fine - 2.0 * PI * d.values()[k]).norm_sqr() * dy;
        quad = f64::max(quad, (fine - coarse).norm());
        trunc = trunc.max(t);
    }
    let root = (2.0 * sigma).sqrt();
    Ok(CheckOutcome::Measured {
        residual: dist.sqrt(),
        quadrature: root * quad,
        truncation: root * (trunc + 2.0 * PI * d.tail_bound()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{DecayBound, SplineParams};

    fn spline(m: usize, sigma: f64) -> Generator {
        Generator::bspline(SplineParams::new(sigma, m).unwrap())
    }

    #[test]
    fn oscillatory_sum_matches_direct() {
        let v: Vec<C64> = (0..200).map(|i| C64::new((i as f64).sin(), 0.3)).collect();
        let direct: C64 = v
            .iter()
            .enumerate()
            .map(|(i, c)| c * C64::from_polar(1.0, (i as f64 - 7.0) * 0.37))
            .sum();
        assert!((oscillatory_sum(&v, -7, 0.37) - direct).norm() < 1e-12);
    }

    #[test]
    fn box_spline_time_sum() {
        // the degree-0 spline is 2 sigma on [-pi/sigma, 0]; only j = 1 covers x = 0.5
        let b = spline(0, 1.0);
        let v = phi_time(&b, 1.0, 0.5, 0.0, 1e-10).unwrap();
        assert!((v - 1.0).norm() < 1e-15);
        let v = phi_time(&b, 1.0, 0.5, 0.3, 1e-10).unwrap();
        assert!((v - C64::from_polar(1.0, 0.3 * PI)).norm() < 1e-15);
    }

    #[test]
    fn frequency_sum_closed_forms() {
        let s = Generator::bandlimited(1.0).unwrap();
        let v = phi_freq(&s, 1.0, 0.7, 0.4, 1e-10).unwrap();
        assert!((v - C64::from_polar(1.0, 0.28)).norm() < 1e-15);
        let b = spline(1, 1.0);
        let v = phi_freq(&b, 1.0, 0.0, 0.0, 1e-8).unwrap();
        assert!((v - 1.0).norm() < 1e-12);
        assert!(phi_freq(&spline(0, 1.0), 1.0, 0.0, 0.0, 1e-8).is_err());
    }

    #[test]
    fn gaussian_frequency_sum_matches_brute_force() {
        let g = Generator::gaussian(1.0).unwrap();
        let v = phi_freq(&g, 1.0, 0.0, 0.0, 1e-12).unwrap();
        let brute: C64 = (-400..=400).map(|n| g.spectrum(2.0 * n as f64)).sum();
        assert!((v - brute).norm() < 1e-14);
    }

    #[test]
    fn periodicity_in_y() {
        let b = spline(2, 1.5);
        for (x, y) in [(0.3, 0.2), (1.1, -0.9)] {
            let a = phi_time(&b, 1.5, x, y, 1e-10).unwrap();
            let c = phi_time(&b, 1.5, x, y + 3.0, 1e-10).unwrap();
            assert!((a - c).norm() < 1e-13);
        }
    }

    #[test]
    fn sinc_properties() {
        let s = Generator::bandlimited(1.0).unwrap();
        let r = verify_phi_properties(&s, 1.0, 33, 1e-10).unwrap();
        assert_eq!(r.representation, Representation::FreqSum);
        for res in &r.results {
            let v = res.residual().unwrap_or_else(|| panic!("{} skipped: {:?}", res.check, res.outcome));
            assert!(v <= 1e-8, "{}: {v}", res.check);
        }
    }

    #[test]
    fn spline_properties() {
        let b = spline(2, 1.0);
        let r = verify_phi_properties(&b, 1.0, 17, 1e-8).unwrap();
        for res in &r.results {
            let v = res.residual().unwrap_or_else(|| panic!("{} skipped: {:?}", res.check, res.outcome));
            assert!(v <= 1e-6, "{}: {v}", res.check);
        }
    }

    #[test]
    fn zero_generator_has_zero_residuals() {
        let z = Generator::custom("zero", |_| C64::zero(), DecayBound::new(2.0, 1.0).unwrap())
            .with_time_domain(|_| C64::zero())
            .with_time_support(-1.0, 1.0)
            .with_spectral_support(-1.0, 1.0)
            .with_real_values(true);
        let r = verify_phi_properties(&z, 1.0, 9, 1e-10).unwrap();
        for res in &r.results {
            assert_eq!(res.residual(), Some(0.0), "{}", res.check);
        }
    }
}
