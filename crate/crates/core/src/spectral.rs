//! Lattice sums along `y + 2 k sigma`: the periodization
//! `D(y) = sum_k |B^(y + 2k sigma)|^2`, mixed bracket products and Riesz
//! bound estimates.

use std::f64::consts::PI;
use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::generator::{DecayBound, Generator};
use crate::numerics::special::scaled_hurwitz;
use crate::numerics::{pairwise_sum_by, Grid, Tabulated};
use crate::C64;

/// Values of `D` at or below this are treated as zeros of the periodization.
pub const EPSILON_D: f64 = 1e-10;

/// Largest lattice half-width used by envelope-based truncation.
pub const MAX_LATTICE_ORDER: usize = 512;

/// Half-width used when the omitted tail is summed in closed form.
const CORRECTED_ORDER: usize = 32;

/// Nodes within this fraction of `sigma` of `+-sigma` are evaluated just
/// inside the period.
const EDGE_NUDGE: f64 = 1e-12;

/// A spectrum that can be evaluated along the lattice `y + 2 k sigma`.
pub trait LatticeSpectrum {
    fn value(&self, y: f64) -> C64;
    /// Envelope of `|value|`; `None` when only a support is known.
    fn decay(&self) -> Option<DecayBound>;
    /// Interval outside which the spectrum vanishes.
    fn support(&self) -> Option<(f64, f64)>;
    /// Exponent of an exact power-law tail along the lattice.
    fn power_law_on_lattice(&self, _sigma: f64) -> Option<f64> {
        None
    }
    fn describe(&self) -> String;
}

impl LatticeSpectrum for Generator {
    fn value(&self, y: f64) -> C64 {
        self.spectrum(y)
    }

    fn decay(&self) -> Option<DecayBound> {
        Some(Generator::decay(self))
    }

    fn support(&self) -> Option<(f64, f64)> {
        self.spectral_support()
    }

    fn power_law_on_lattice(&self, sigma: f64) -> Option<f64> {
        Generator::power_law_on_lattice(self, sigma)
    }

    fn describe(&self) -> String {
        self.label().to_string()
    }
}

impl LatticeSpectrum for Tabulated {
    fn value(&self, y: f64) -> C64 {
        self.cubic(y)
    }

    fn decay(&self) -> Option<DecayBound> {
        None
    }

    fn support(&self) -> Option<(f64, f64)> {
        Some((self.grid().start(), self.grid().stop()))
    }

    fn describe(&self) -> String {
        format!("table on [{}, {}]", self.grid().start(), self.grid().stop())
    }
}

/// Truncation of a lattice sum at `|k| <= order`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticePlan {
    pub sigma: f64,
    pub order: usize,
    /// Bound on the omitted terms when no closed-form tail is added.
    pub envelope_tail: f64,
    /// Power-law exponent of the summand when the tail is added in closed form.
    pub power: Option<f64>,
}

impl LatticePlan {
    /// Plan for `sum_k conj(a(y + 2k sigma)) b(y + 2k sigma)`.
    pub fn new(
        sigma: f64,
        a: &(impl LatticeSpectrum + ?Sized),
        b: &(impl LatticeSpectrum + ?Sized),
        tol: f64,
    ) -> Result<Self> {
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
        let by_support = [a.support(), b.support()]
            .into_iter()
            .flatten()
            .map(|(lo, hi)| {
                let reach = lo.abs().max(hi.abs());
                (((reach + sigma) / (2.0 * sigma)).ceil() as usize).max(1)
            })
            .min();
        if let Some(order) = by_support {
            return Ok(Self {
                sigma,
                order,
                envelope_tail: 0.0,
                power: None,
            });
        }
        let (da, db) = match (a.decay(), b.decay()) {
            (Some(da), Some(db)) => (da, db),
            _ => {
                return Err(Error::TruncationFailure(format!(
                    "no decay bound or support for `{}` / `{}`",
                    a.describe(),
                    b.describe()
                )))
            }
        };
        let s = da.exponent + db.exponent;
        if s <= 1.0 {
            return Err(Error::TruncationFailure(format!(
                "lattice sum for `{}` / `{}` has combined decay exponent {s} <= 1",
                a.describe(),
                b.describe()
            )));
        }
        let c = da.constant * db.constant;
        let bound = |n: usize| {
            c / (sigma * (s - 1.0)) * (1.0 + (2.0 * n as f64 - 1.0) * sigma).powf(1.0 - s)
        };
        let threshold = (c / (sigma * (s - 1.0) * tol)).powf(1.0 / (s - 1.0));
        let needed = (((threshold - 1.0) / sigma + 1.0) / 2.0).ceil();
        let needed = if needed.is_finite() {
            needed.clamp(1.0, 1e9) as usize
        } else {
            usize::MAX
        };
        let exact_tail = match (a.power_law_on_lattice(sigma), b.power_law_on_lattice(sigma)) {
            (Some(pa), Some(pb)) => Some(pa + pb),
            _ => None,
        };
        if let Some(power) = exact_tail.filter(|p| *p > 1.0) {
            return Ok(Self {
                sigma,
                order: needed.min(CORRECTED_ORDER),
                envelope_tail: 0.0,
                power: Some(power),
            });
        }
        let order = needed.min(MAX_LATTICE_ORDER);
        Ok(Self {
            sigma,
            order,
            envelope_tail: bound(order),
            power: None,
        })
    }

    /// `sum_{|k| <= order} term(y + 2k sigma)` plus the closed-form tail when
    /// available, with a bound on the remaining error.
    pub fn sum(&self, y: f64, term: impl Fn(f64) -> C64) -> (C64, f64) {
        let n = self.order as i64;
        let two_sigma = 2.0 * self.sigma;
        let mut total = pairwise_sum_by(2 * self.order + 1, |i| {
            term(y + (i as i64 - n) as f64 * two_sigma)
        });
        let mut tail = self.envelope_tail;
        if let Some(s) = self.power {
            for side in [-1.0, 1.0] {
                let x = y + side * n as f64 * two_sigma;
                let t = term(x);
                if t != C64::zero() {
                    let (h, err) = scaled_hurwitz(s, x.abs() / two_sigma);
                    total += t * h;
                    tail += t.norm() * err;
                }
            }
        }
        (total, tail)
    }
}

/// Node `k` of a grid on `[-sigma, sigma]`, moved just inside the period when
/// it sits on an endpoint so spectra with jumps at `+-sigma` contribute their
/// one-sided limits.
pub(crate) fn interior_node(grid: &Grid, sigma: f64, k: usize) -> f64 {
    let y = grid.node(k);
    if (y + sigma).abs() <= EDGE_NUDGE * sigma {
        -sigma + EDGE_NUDGE * sigma
    } else if (y - sigma).abs() <= EDGE_NUDGE * sigma {
        sigma - EDGE_NUDGE * sigma
    } else {
        y
    }
}

pub(crate) fn check_period_grid(grid: &Grid, sigma: f64) -> Result<()> {
    let slack = 1e-12 * sigma;
    if grid.start() < -sigma - slack || grid.stop() > sigma + slack {
        return Err(Error::InvalidRange(format!(
            "grid [{}, {}] is not inside [-{sigma}, {sigma}]",
            grid.start(),
            grid.stop()
        )));
    }
    Ok(())
}

/// `D(y)` tabulated on a grid inside `[-sigma, sigma]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodizedSpectrum {
    sigma: f64,
    grid: Grid,
    values: Vec<f64>,
    truncation_order: usize,
    tail_bound: f64,
}

impl PeriodizedSpectrum {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn truncation_order(&self) -> usize {
        self.truncation_order
    }

    /// Bound on the truncation error at any node.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn spans_period(&self) -> bool {
        let slack = 1e-12 * self.sigma;
        (self.grid.start() + self.sigma).abs() <= slack
            && (self.grid.stop() - self.sigma).abs() <= slack
    }
}

/// `D(y) = sum_k |B^(y + 2k sigma)|^2` at every node of `grid`.
pub fn periodize(
    gen: &(impl LatticeSpectrum + ?Sized),
    sigma: f64,
    grid: &Grid,
    tol: f64,
) -> Result<PeriodizedSpectrum> {
    check_period_grid(grid, sigma)?;
    let plan = LatticePlan::new(sigma, gen, gen, tol)?;
    let mut tail_bound: f64 = 0.0;
    let values = (0..grid.count())
        .map(|k| {
            let y = interior_node(grid, sigma, k);
            let (v, t) = plan.sum(y, |x| C64::new(gen.value(x).norm_sqr(), 0.0));
            tail_bound = tail_bound.max(t);
            v.re.max(0.0)
        })
        .collect();
    Ok(PeriodizedSpectrum {
        sigma,
        grid: *grid,
        values,
        truncation_order: plan.order,
        tail_bound,
    })
}

/// `sum_k conj(A^(y + 2k sigma)) F^(y + 2k sigma)`.
pub fn bracket(
    a: &(impl LatticeSpectrum + ?Sized),
    f: &(impl LatticeSpectrum + ?Sized),
    sigma: f64,
    y: f64,
    tol: f64,
) -> Result<C64> {
    if !(y.abs() <= sigma * (1.0 + 1e-12)) {
        return Err(Error::InvalidRange(format!(
            "bracket abscissa {y} outside [-{sigma}, {sigma}]"
        )));
    }
    let plan = LatticePlan::new(sigma, a, f, tol)?;
    Ok(plan.sum(y, |x| a.value(x).conj() * f.value(x)).0)
}

/// Outcome of a Riesz bound estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RieszClass {
    Riesz,
    BesselOnly,
    Degenerate,
}

impl fmt::Display for RieszClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RieszClass::Riesz => "riesz",
            RieszClass::BesselOnly => "bessel_only",
            RieszClass::Degenerate => "degenerate",
        })
    }
}

/// Grid estimates of `ess inf D` and `ess sup D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RieszReport {
    pub sigma: f64,
    pub lower: f64,
    pub upper: f64,
    pub classification: RieszClass,
}

impl RieszReport {
    /// Constants `(A, B)` in `A sum|b_j|^2 <= ||sum b_j B(. - j pi/sigma)||^2
    /// <= B sum|b_j|^2`, which are `4 pi sigma` times the bounds on `D`.
    pub fn riesz_constants(&self) -> (f64, f64) {
        let k = 4.0 * PI * self.sigma;
        (k * self.lower.max(0.0), k * self.upper)
    }
}

/// Extremes of `D` over its grid, widened by the truncation bound.
pub fn riesz_bounds(d: &PeriodizedSpectrum) -> RieszReport {
    let (min, max) = d
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let lower = min - d.tail_bound;
    let upper = max + d.tail_bound;
    let classification = if min <= EPSILON_D {
        RieszClass::Degenerate
    } else if lower > EPSILON_D {
        RieszClass::Riesz
    } else {
        RieszClass::BesselOnly
    };
    RieszReport {
        sigma: d.sigma,
        lower,
        upper,
        classification,
    }
}
