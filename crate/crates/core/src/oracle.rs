//! Brute-force least squares on the truncated shift system
//! `{B(. - j pi/sigma) : |j| <= J}` through its Gram matrix.

use std::cell::RefCell;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::generator::{common_breaks, time_integral_with, Breaks, Generator};
use crate::numerics::fourier::WeightedSamples;
use crate::numerics::{GaussLegendre, Grid, SampledFunction};
use crate::shiftspace::{best_approx_error_sq, ShiftExpansion, Signal};
use crate::C64;

/// Gram matrices with a larger eigenvalue ratio are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Gram matrix of the shifts `|j| <= j_range`, optionally with the inner
/// products `<f, B(. - j pi/sigma)>`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSystem {
    pub sigma: f64,
    pub j_range: usize,
    pub gram: DMatrix<C64>,
    pub rhs: Option<DVector<C64>>,
    /// Ratio of extreme eigenvalues; infinite when the smallest is not positive.
    pub condition_estimate: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

/// How inner products with the generator are integrated.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Route {
    /// Over `[lo, hi]` in time, split at the generator's breakpoints.
    Time { lo: f64, hi: f64, compact: bool },
    /// `2 pi integral f^ conj(B^) exp(i u a) du` over the spectral support.
    Frequency { lo: f64, hi: f64 },
}

fn route(gen: &Generator) -> Result<Route> {
    if gen.has_time_domain() {
        if let Some((lo, hi)) = gen.time_support() {
            return Ok(Route::Time {
                lo,
                hi,
                compact: true,
            });
        }
    }
    if let Some((lo, hi)) = gen.spectral_support() {
        return Ok(Route::Frequency { lo, hi });
    }
    if !gen.has_time_domain() {
        return Err(Error::MissingTimeDomain(gen.label().to_string()));
    }
    match gen.time_decay() {
        Some(d) if d.exponent >= 1.5 => {
            let (lo, hi) = gen.time_profile()?.window;
            Ok(Route::Time {
                lo,
                hi,
                compact: false,
            })
        }
        _ => Err(Error::TruncationFailure(format!(
            "`{}` has no compact support, band limit or fast time decay",
            gen.label()
        ))),
    }
}

fn shifted_breaks(b: Option<Breaks>, delta: f64) -> Option<Breaks> {
    b.map(|b| Breaks {
        origin: b.origin + delta,
        spacing: b.spacing,
    })
}

/// Gauss-Legendre panels over a spectral interval.
fn spectral_integral(lo: f64, hi: f64, scale: f64, g: impl Fn(f64) -> C64) -> C64 {
    let panel = (0.5 / scale.max(1e-300)).min((hi - lo) / 64.0);
    GaussLegendre::new(16).integrate_panels(lo, hi, panel, g)
}

/// `<B, B(. - d pi/sigma)>`.
fn gram_entry(gen: &Generator, sigma: f64, route: Route, d: i64) -> Result<C64> {
    let a = d as f64 * PI / sigma;
    match route {
        Route::Time { lo, hi, compact } => {
            let (lo, hi) = if compact {
                (lo.max(lo + a), hi.min(hi + a))
            } else {
                (lo, hi)
            };
            let breaks = common_breaks(
                [gen.breaks(), shifted_breaks(gen.breaks(), a)].into_iter(),
            );
            let err = RefCell::new(None);
            let v = time_integral_with(breaks, gen.time_scale(), lo, hi, |t| {
                match (gen.time_domain(t), gen.time_domain(t - a)) {
                    (Ok(x), Ok(y)) => x * y.conj(),
                    (Err(e), _) | (_, Err(e)) => {
                        err.borrow_mut().get_or_insert(e);
                        C64::zero()
                    }
                }
            });
            match err.into_inner() {
                Some(e) => Err(e),
                None => Ok(v),
            }
        }
        Route::Frequency { lo, hi } => Ok(spectral_integral(lo, hi, gen.time_scale(), |u| {
            C64::new(gen.spectrum(u).norm_sqr(), 0.0) * C64::from_polar(1.0, u * a)
        }) * (2.0 * PI)),
    }
}

fn check_inputs(sigma: f64, j_range: usize) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if j_range > 4096 {
        return Err(Error::InvalidParameter(format!(
            "j_range {j_range} is beyond the dense solver's reach"
        )));
    }
    Ok(())
}

/// Toeplitz Gram matrix `G[j][k] = <B(. - j h), B(. - k h)>` for
/// `|j|, |k| <= j_range`, `h = pi/sigma`.
pub fn gram_matrix(gen: &Generator, sigma: f64, j_range: usize) -> Result<GramSystem> {
    check_inputs(sigma, j_range)?;
    let route = route(gen)?;
    let n = 2 * j_range + 1;
    let mut g = (0..n as i64)
        .map(|d| gram_entry(gen, sigma, route, d))
        .collect::<Result<Vec<_>>>()?;
    g[0] = C64::new(g[0].re, 0.0);
    // <B(. - j h), B(. - k h)> = <B, B(. - (k - j) h)>
    let gram = DMatrix::from_fn(n, n, |j, k| if k >= j { g[k - j] } else { g[j - k].conj() });
    let eig = nalgebra::SymmetricEigen::new(gram.clone()).eigenvalues;
    let max_eigenvalue = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_eigenvalue = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let condition_estimate = if min_eigenvalue > 0.0 {
        max_eigenvalue / min_eigenvalue
    } else {
        f64::INFINITY
    };
    Ok(GramSystem {
        sigma,
        j_range,
        gram,
        rhs: None,
        condition_estimate,
        min_eigenvalue,
        max_eigenvalue,
    })
}

/// Spectrum of `f` where it has one in closed form or from samples.
fn signal_spectrum(f: &Signal) -> Box<dyn Fn(f64) -> C64 + '_> {
    match f {
        Signal::Analytic(g) => Box::new(move |u| g.spectrum(u)),
        Signal::Spectrum(s) => Box::new(move |u| s.cubic(u)),
        Signal::Samples(s) => {
            let ws = WeightedSamples::new(s);
            Box::new(move |u| ws.transform_at(u))
        }
    }
}

/// Time values of `f` with the window holding it and its breakpoints.
struct TimeSignal<'a> {
    eval: Box<dyn Fn(f64) -> Result<C64> + 'a>,
    window: (f64, f64),
    breaks: Option<Breaks>,
    scale: f64,
}

fn time_signal(f: &Signal) -> Result<TimeSignal<'_>> {
    match f {
        Signal::Analytic(g) => {
            if !g.has_time_domain() {
                return Err(Error::MissingTimeDomain(g.label().to_string()));
            }
            let window = g.time_profile()?.window;
            Ok(TimeSignal {
                eval: Box::new(move |t| g.time_domain(t)),
                window,
                breaks: g.breaks(),
                scale: g.time_scale(),
            })
        }
        Signal::Samples(s) => Ok(TimeSignal {
            eval: Box::new(move |t| Ok(s.cubic(t))),
            window: (s.grid().start(), s.grid().stop()),
            breaks: None,
            scale: 4.0 * s.grid().step(),
        }),
        Signal::Spectrum(_) => Err(Error::MissingTimeDomain(
            "a spectrum-only signal".to_string(),
        )),
    }
}

/// `<f, B(. - j pi/sigma)>` for `|j| <= j_range`.
fn inner_products(f: &Signal, gen: &Generator, sigma: f64, j_range: usize) -> Result<DVector<C64>> {
    let route = route(gen)?;
    let h = PI / sigma;
    let j = j_range as i64;
    let use_frequency = matches!(route, Route::Frequency { .. }) || matches!(f, Signal::Spectrum(_));
    if use_frequency {
        let (lo, hi) = match (route, f) {
            (Route::Frequency { lo, hi }, _) => (lo, hi),
            (_, Signal::Spectrum(s)) => (s.grid().start(), s.grid().stop()),
            _ => unreachable!(),
        };
        let spec = signal_spectrum(f);
        let scale = match f {
            Signal::Spectrum(s) => gen.time_scale().max(1.0 / s.grid().step()),
            _ => gen.time_scale(),
        };
        let products: Vec<(f64, C64)> = {
            // tabulate f^ conj(B^) once on the quadrature nodes
            let gl = GaussLegendre::new(16);
            let panel = (0.5 / scale.max(1e-300)).min((hi - lo) / 64.0);
            let panels = ((hi - lo) / panel).ceil().max(1.0) as usize;
            let width = (hi - lo) / panels as f64;
            let mut out = Vec::with_capacity(panels * 16);
            for p in 0..panels {
                let a = lo + p as f64 * width;
                for (x, w) in gl.nodes().iter().zip(gl.weights()) {
                    let u = a + 0.5 * width * (x + 1.0);
                    out.push((u, spec(u) * gen.spectrum(u).conj() * (0.5 * width * w)));
                }
            }
            out
        };
        let v = (-j..=j).map(|k| {
            let a = k as f64 * h;
            let s: C64 = crate::numerics::pairwise_sum_by(products.len(), |i| {
                let (u, p) = products[i];
                p * C64::from_polar(1.0, u * a)
            });
            s * (2.0 * PI)
        });
        return Ok(DVector::from_iterator(2 * j_range + 1, v));
    }
    let Route::Time {
        lo: blo,
        hi: bhi,
        compact,
    } = route
    else {
        unreachable!()
    };
    let ts = time_signal(f)?;
    let scale = ts.scale.min(gen.time_scale());
    let mut out = Vec::with_capacity(2 * j_range + 1);
    for k in -j..=j {
        let a = k as f64 * h;
        let (lo, hi) = if compact {
            (ts.window.0.max(blo + a), ts.window.1.min(bhi + a))
        } else {
            ts.window
        };
        let bb = shifted_breaks(gen.breaks(), a);
        let breaks = match ts.breaks {
            Some(fb) => common_breaks([Some(fb), bb].into_iter()),
            None if matches!(f, Signal::Samples(_)) => None,
            None => bb,
        };
        let err = RefCell::new(None);
        let v = time_integral_with(breaks, scale, lo, hi, |t| {
            match ((ts.eval)(t), gen.time_domain(t - a)) {
                (Ok(x), Ok(y)) => x * y.conj(),
                (Err(e), _) | (_, Err(e)) => {
                    err.borrow_mut().get_or_insert(e);
                    C64::zero()
                }
            }
        });
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        out.push(v);
    }
    Ok(DVector::from_vec(out))
}

/// Least-squares projection onto the truncated shift system.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub coeffs: ShiftExpansion,
    /// `||f||^2 - Re(c^H b)`, clamped at zero.
    pub residual_norm_sq: f64,
    pub norm_sq: f64,
    pub system: GramSystem,
}

/// Solves the normal equations `G c = b` for `|j| <= j_range`.
pub fn ls_project(f: &Signal, gen: &Generator, sigma: f64, j_range: usize) -> Result<LeastSquares> {
    let mut system = gram_matrix(gen, sigma, j_range)?;
    if !(system.condition_estimate <= MAX_CONDITION) {
        return Err(Error::SingularGram {
            condition: system.condition_estimate,
        });
    }
    let rhs = inner_products(f, gen, sigma, j_range)?;
    let chol = nalgebra::Cholesky::new(system.gram.clone()).ok_or(Error::SingularGram {
        condition: system.condition_estimate,
    })?;
    let c = chol.solve(&rhs);
    let norm_sq = f.norm_sq()?;
    let captured = c.dotc(&rhs).re;
    let residual_norm_sq = (norm_sq - captured).max(0.0);
    system.rhs = Some(rhs);
    let coeffs = ShiftExpansion::centered(sigma, sigma, c.iter().copied().collect())?;
    Ok(LeastSquares {
        coeffs,
        residual_norm_sq,
        norm_sq,
        system,
    })
}

/// One row of an oracle comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub j_range: usize,
    pub oracle_residual: f64,
    pub formula_error: f64,
    /// `oracle_residual - formula_error`; nonnegative up to rounding.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub sigma: f64,
    pub norm_sq: f64,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    /// Most negative gap, zero when all are nonnegative.
    pub fn worst_negative_gap(&self) -> f64 {
        self.rows.iter().map(|r| r.gap.min(0.0)).fold(0.0, f64::min)
    }

    /// Whether the gaps never grow by more than `slack`.
    pub fn gaps_nonincreasing(&self, slack: f64) -> bool {
        self.rows.windows(2).all(|w| w[1].gap <= w[0].gap + slack)
    }
}

/// Oracle residuals for each `j_range` against the error formula at
/// `rho = sigma` evaluated on `grid`.
pub fn compare(
    f: &Signal,
    gen: &Generator,
    sigma: f64,
    j_ranges: &[usize],
    grid: &Grid,
    tol: f64,
) -> Result<ComparisonReport> {
    let formula_error = best_approx_error_sq(f, gen, sigma, sigma, grid, tol)?;
    let mut norm_sq = f.norm_sq()?;
    let rows = j_ranges
        .iter()
        .map(|&j| {
            let ls = ls_project(f, gen, sigma, j)?;
            norm_sq = ls.norm_sq;
            Ok(ComparisonRow {
                j_range: j,
                oracle_residual: ls.residual_norm_sq,
                formula_error,
                gap: ls.residual_norm_sq - formula_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport {
        sigma,
        norm_sq,
        rows,
    })
}

/// Time samples of a generator, for feeding sampled signals to the oracle.
pub fn sample(gen: &Generator, grid: &Grid) -> Result<SampledFunction> {
    crate::numerics::Tabulated::new(
        *grid,
        grid.nodes().map(|x| gen.time_domain(x)).collect::<Result<Vec<_>>>()?,
    )
}
