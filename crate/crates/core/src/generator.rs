//! Generators `B` of shift systems: B-splines, Gaussian packets, band-limited
//! kernels, tabulated functions and user-supplied spectra.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::numerics::{
    fourier_transform_sampled, pairwise_sum_by, GaussLegendre, Grid, SampledFunction,
};
use crate::C64;

/// A complex function of one real variable.
pub type RealToComplex = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

/// Declared envelope `|g(t)| <= constant / (1 + |t|)^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayBound {
    pub exponent: f64,
    pub constant: f64,
}

impl DecayBound {
    pub fn new(exponent: f64, constant: f64) -> Result<Self> {
        if !(exponent >= 0.0 && exponent.is_finite()) || !(constant > 0.0 && constant.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "decay bound needs exponent >= 0 and constant > 0, got ({exponent}, {constant})"
            )));
        }
        Ok(Self { exponent, constant })
    }

    pub fn envelope(&self, t: f64) -> f64 {
        self.constant / (1.0 + t.abs()).powf(self.exponent)
    }

    /// Bound for `g(t - delta)`.
    fn shifted(&self, delta: f64) -> Self {
        Self {
            exponent: self.exponent,
            constant: self.constant * (1.0 + delta.abs()).powf(self.exponent),
        }
    }
}

/// Knot density `sigma` (knots at `j*pi/sigma`) and polynomial degree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplineParams {
    pub sigma: f64,
    pub degree: usize,
}

impl SplineParams {
    pub fn new(sigma: f64, degree: usize) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "spline sigma must be positive, got {sigma}"
            )));
        }
        Ok(Self { sigma, degree })
    }
}

/// Breakpoints `origin + k * spacing` of a piecewise-smooth time domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breaks {
    pub origin: f64,
    pub spacing: f64,
}

/// Spectra of the form `K(y) * y^(-exponent)` along every lattice
/// `y + k * period`, `k` an integer, with `K` depending on `y` only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawTail {
    pub period: f64,
    pub exponent: f64,
}

fn is_integer_multiple(x: f64, unit: f64) -> bool {
    let r = x / unit;
    r.round() >= 1.0 && (r - r.round()).abs() < 1e-9
}

/// A generator with its spectrum, optional time domain and the metadata the
/// lattice and quadrature routines rely on.
#[derive(Clone)]
pub struct Generator {
    label: String,
    spectrum: RealToComplex,
    time_domain: Option<RealToComplex>,
    decay: DecayBound,
    time_decay: Option<DecayBound>,
    time_support: Option<(f64, f64)>,
    spectral_support: Option<(f64, f64)>,
    breaks: Option<Breaks>,
    power_tail: Option<PowerLawTail>,
    time_scale: f64,
    real_valued: bool,
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Generator")
            .field("label", &self.label)
            .field("decay", &self.decay)
            .field("time_decay", &self.time_decay)
            .field("time_support", &self.time_support)
            .field("spectral_support", &self.spectral_support)
            .finish_non_exhaustive()
    }
}

/// `(exp(z) - 1) / z` for `z = i t`, with a series branch near 0.
fn exp_ratio(t: f64) -> C64 {
    let z = C64::new(0.0, t);
    if t.abs() < 1e-4 {
        C64::new(1.0, 0.0) + z * (0.5 + z * (1.0 / 6.0 + z / 24.0))
    } else {
        (z.exp() - 1.0) / z
    }
}

/// Cardinal B-spline of order `k` (degree `k - 1`) supported on `[0, k]`,
/// by the Cox-de Boor recursion.
pub fn cardinal_bspline(k: usize, t: f64) -> f64 {
    if !(t >= 0.0 && t < k as f64) {
        return 0.0;
    }
    let l = t.floor() as usize;
    let f = t - l as f64;
    // v[d] holds N_j(f + d)
    let mut v = vec![0.0; k];
    v[0] = 1.0;
    for j in 2..=k {
        for d in (0..j).rev() {
            let x = f + d as f64;
            let here = if d < j - 1 { v[d] } else { 0.0 };
            let below = if d >= 1 { v[d - 1] } else { 0.0 };
            v[d] = (x * here + (j as f64 - x) * below) / (j - 1) as f64;
        }
    }
    v[l]
}

/// Max of `(1 + |u|)^p * exp(-u^2 / (2 s^2))`.
fn gaussian_envelope_max(p: f64, s: f64) -> f64 {
    let u = 0.5 * (-1.0 + (1.0 + 4.0 * p * s * s).sqrt());
    (1.0 + u).powf(p) * (-u * u / (2.0 * s * s)).exp()
}

const GAUSSIAN_DECAY_EXPONENT: f64 = 16.0;
const BANDLIMITED_DECAY_EXPONENT: f64 = 32.0;

impl Generator {
    /// Spline of degree `m` with knots at `j*pi/sigma`, spectrum
    /// `((exp(i pi y/sigma) - 1) / (i pi y/sigma))^(m+1)`, supported on
    /// `[-(m+1) pi/sigma, 0]`.
    pub fn bspline(params: SplineParams) -> Self {
        let SplineParams { sigma, degree: m } = params;
        let order = m + 1;
        let h = PI / sigma;
        Self {
            label: format!("bspline:m={m},sigma={sigma}"),
            spectrum: Arc::new(move |y| exp_ratio(PI * y / sigma).powi(order as i32)),
            time_domain: Some(Arc::new(move |x| {
                C64::new(2.0 * sigma * cardinal_bspline(order, -x / h), 0.0)
            })),
            decay: DecayBound {
                exponent: order as f64,
                constant: (1.0 + 2.0 * sigma / PI).powi(order as i32),
            },
            time_decay: None,
            time_support: Some((-(order as f64) * h, 0.0)),
            spectral_support: None,
            breaks: Some(Breaks {
                origin: 0.0,
                spacing: h,
            }),
            power_tail: Some(PowerLawTail {
                period: 2.0 * sigma,
                exponent: order as f64,
            }),
            time_scale: h,
            real_valued: true,
        }
    }

    /// `exp(-x^2 / (2 width^2))`.
    pub fn gaussian(width: f64) -> Result<Self> {
        Self::gaussian_packet(width, 0.0, 0.0)
    }

    /// `exp(-(x - center)^2 / (2 width^2)) * exp(i freq x)`.
    pub fn gaussian_packet(width: f64, center: f64, freq: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite() && center.is_finite() && freq.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gaussian needs width > 0 and finite center/frequency, got ({width}, {center}, {freq})"
            )));
        }
        let w = width;
        let q = GAUSSIAN_DECAY_EXPONENT;
        let amp = w / (2.0 * PI).sqrt();
        let mut label = format!("gauss:width={w}");
        if center != 0.0 {
            label.push_str(&format!(",center={center}"));
        }
        if freq != 0.0 {
            label.push_str(&format!(",freq={freq}"));
        }
        Ok(Self {
            label,
            spectrum: Arc::new(move |y| {
                let d = y - freq;
                C64::from_polar(amp * (-0.5 * w * w * d * d).exp(), -center * d)
            }),
            time_domain: Some(Arc::new(move |x| {
                let d = x - center;
                C64::from_polar((-0.5 * d * d / (w * w)).exp(), freq * x)
            })),
            decay: DecayBound {
                exponent: q,
                constant: amp * gaussian_envelope_max(q, 1.0 / w) * (1.0 + freq.abs()).powf(q),
            },
            time_decay: Some(DecayBound {
                exponent: q,
                constant: gaussian_envelope_max(q, w) * (1.0 + center.abs()).powf(q),
            }),
            time_support: None,
            spectral_support: None,
            breaks: None,
            power_tail: None,
            time_scale: w / (1.0 + w * freq.abs()),
            real_valued: freq == 0.0,
        })
    }

    /// Indicator spectrum of `[-sigma, sigma]` (1/2 at the endpoints), time
    /// domain `2 sin(sigma x) / x`.
    pub fn bandlimited(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "band limit must be positive, got {sigma}"
            )));
        }
        Ok(Self {
            label: format!("sinc:sigma={sigma}"),
            spectrum: Arc::new(move |y| {
                let a = y.abs();
                let v = if a < sigma {
                    1.0
                } else if a == sigma {
                    0.5
                } else {
                    0.0
                };
                C64::new(v, 0.0)
            }),
            time_domain: Some(Arc::new(move |x| {
                if x.abs() < 1e-8 / sigma {
                    C64::new(2.0 * sigma * (1.0 - (sigma * x).powi(2) / 6.0), 0.0)
                } else {
                    C64::new(2.0 * (sigma * x).sin() / x, 0.0)
                }
            })),
            decay: DecayBound {
                exponent: BANDLIMITED_DECAY_EXPONENT,
                constant: (1.0 + sigma).powf(BANDLIMITED_DECAY_EXPONENT),
            },
            time_decay: Some(DecayBound {
                exponent: 1.0,
                constant: 2.0 * (sigma + 1.0),
            }),
            time_support: None,
            spectral_support: Some((-sigma, sigma)),
            breaks: None,
            power_tail: None,
            time_scale: PI / sigma,
            real_valued: true,
        })
    }

    /// Generator from time samples. The spectrum is the linear interpolant of
    /// the sampled transform on `freq` (zero outside); the decay envelope is
    /// fitted on the outer tenth of `freq` and then enlarged to hold on
    /// every node.
    pub fn sampled(label: &str, samples: SampledFunction, freq: Grid) -> Result<Self> {
        let spec = fourier_transform_sampled(&samples, &freq);
        let mags: Vec<(f64, f64)> = spec.nodes().map(|(y, v)| (y.abs(), v.norm())).collect();
        let y_max = mags.iter().fold(0.0f64, |m, (a, _)| m.max(*a));
        let fit: Vec<(f64, f64)> = mags
            .iter()
            .filter(|(a, v)| *a >= 0.9 * y_max && *v > 0.0)
            .map(|(a, v)| ((1.0 + a).ln(), v.ln()))
            .collect();
        let exponent = if fit.len() >= 2 {
            let n = fit.len() as f64;
            let (sx, sy) = fit.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
            let (mx, my) = (sx / n, sy / n);
            let (sxy, sxx) = fit.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
                (a + (x - mx) * (y - my), b + (x - mx) * (x - mx))
            });
            if sxx > 0.0 {
                (-sxy / sxx).clamp(0.0, 64.0)
            } else {
                0.0
            }
        } else {
            0.0
        };
        let constant = mags
            .windows(2)
            .map(|w| w[0].1.max(w[1].1) * (1.0 + w[0].0.max(w[1].0)).powf(exponent))
            .fold(f64::MIN_POSITIVE, f64::max);
        let sgrid = *samples.grid();
        let real_valued = samples.values().iter().all(|v| v.im == 0.0);
        let samples = Arc::new(samples);
        let spec = Arc::new(spec);
        Ok(Self {
            label: label.to_string(),
            spectrum: Arc::new(move |y| spec.linear(y)),
            time_domain: Some(Arc::new(move |x| samples.linear(x))),
            decay: DecayBound { exponent, constant },
            time_decay: None,
            time_support: Some((sgrid.start(), sgrid.stop())),
            spectral_support: Some((freq.start(), freq.stop())),
            breaks: Some(Breaks {
                origin: sgrid.start(),
                spacing: sgrid.step(),
            }),
            power_tail: None,
            time_scale: 4.0 * sgrid.step(),
            real_valued,
        })
    }

    /// Frequency grid used for tabulated generators: the Nyquist band of the
    /// samples, resolved at a quarter of the spacing set by the record length.
    pub fn sampled_frequency_grid(samples: &SampledFunction) -> Result<Grid> {
        let g = samples.grid();
        let nyquist = PI / g.step();
        let dy = 2.0 * PI / g.len() / 4.0;
        let count = ((2.0 * nyquist / dy).ceil() as usize + 1).clamp(4097, 1 << 16);
        Grid::new(-nyquist, nyquist, count | 1)
    }

    /// Spectrum-only generator; further metadata is attached with the
    /// `with_*` methods.
    pub fn custom(
        label: &str,
        spectrum: impl Fn(f64) -> C64 + Send + Sync + 'static,
        decay: DecayBound,
    ) -> Self {
        Self {
            label: label.to_string(),
            spectrum: Arc::new(spectrum),
            time_domain: None,
            decay,
            time_decay: None,
            time_support: None,
            spectral_support: None,
            breaks: None,
            power_tail: None,
            time_scale: 1.0,
            real_valued: false,
        }
    }

    pub fn with_time_domain(mut self, f: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Self {
        self.time_domain = Some(Arc::new(f));
        self
    }

    pub fn with_time_decay(mut self, decay: DecayBound) -> Self {
        self.time_decay = Some(decay);
        self
    }

    pub fn with_time_support(mut self, lo: f64, hi: f64) -> Self {
        self.time_support = Some((lo, hi));
        self
    }

    pub fn with_spectral_support(mut self, lo: f64, hi: f64) -> Self {
        self.spectral_support = Some((lo, hi));
        self
    }

    pub fn with_breaks(mut self, breaks: Breaks) -> Self {
        self.breaks = Some(breaks);
        self
    }

    pub fn with_power_tail(mut self, tail: PowerLawTail) -> Self {
        self.power_tail = Some(tail);
        self
    }

    pub fn with_time_scale(mut self, scale: f64) -> Self {
        self.time_scale = scale;
        self
    }

    pub fn with_real_values(mut self, real: bool) -> Self {
        self.real_valued = real;
        self
    }

    /// `B(x - delta)`.
    pub fn shifted(&self, delta: f64) -> Self {
        let spectrum = Arc::clone(&self.spectrum);
        let time = self.time_domain.clone();
        Self {
            label: format!("{}@{delta}", self.label),
            spectrum: Arc::new(move |y| spectrum(y) * C64::from_polar(1.0, -delta * y)),
            time_domain: time.map(|t| -> RealToComplex { Arc::new(move |x| t(x - delta)) }),
            decay: self.decay,
            time_decay: self.time_decay.map(|d| d.shifted(delta)),
            time_support: self.time_support.map(|(a, b)| (a + delta, b + delta)),
            spectral_support: self.spectral_support,
            breaks: self.breaks.map(|b| Breaks {
                origin: b.origin + delta,
                spacing: b.spacing,
            }),
            power_tail: self.power_tail.filter(|p| {
                delta == 0.0 || is_integer_multiple((delta * p.period / (2.0 * PI)).abs(), 1.0)
            }),
            time_scale: self.time_scale,
            real_valued: self.real_valued,
        }
    }

    /// `sum c_i g_i`.
    pub fn combine(terms: Vec<(C64, Generator)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidParameter("empty combination".into()));
        }
        let decay = DecayBound {
            exponent: terms.iter().map(|(_, g)| g.decay.exponent).fold(f64::INFINITY, f64::min),
            constant: terms
                .iter()
                .map(|(c, g)| c.norm() * g.decay.constant)
                .sum::<f64>()
                .max(f64::MIN_POSITIVE),
        };
        let time_decay = terms
            .iter()
            .map(|(c, g)| g.time_decay.map(|d| (c.norm(), d)))
            .collect::<Option<Vec<_>>>()
            .map(|ds| DecayBound {
                exponent: ds.iter().map(|(_, d)| d.exponent).fold(f64::INFINITY, f64::min),
                constant: ds
                    .iter()
                    .map(|(c, d)| c * d.constant)
                    .sum::<f64>()
                    .max(f64::MIN_POSITIVE),
            });
        let hull = |sel: fn(&Generator) -> Option<(f64, f64)>| {
            terms
                .iter()
                .map(|(_, g)| sel(g))
                .collect::<Option<Vec<_>>>()
                .map(|v| {
                    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (lo, hi)| {
                        (a.min(*lo), b.max(*hi))
                    })
                })
        };
        let time_support = hull(|g| g.time_support);
        let spectral_support = hull(|g| g.spectral_support);
        let breaks = common_breaks(terms.iter().map(|(_, g)| g.breaks));
        let power_tail = terms
            .iter()
            .map(|(_, g)| g.power_tail)
            .collect::<Option<Vec<_>>>()
            .and_then(|v| {
                let first = v[0];
                v.iter().all(|p| *p == first).then_some(first)
            });
        let time_scale = terms.iter().map(|(_, g)| g.time_scale).fold(f64::INFINITY, f64::min);
        let real_valued = terms.iter().all(|(c, g)| g.real_valued && c.im == 0.0);
        let label = terms
            .iter()
            .map(|(c, g)| format!("({c})*{}", g.label))
            .collect::<Vec<_>>()
            .join("+");
        let spectra: Vec<(C64, RealToComplex)> =
            terms.iter().map(|(c, g)| (*c, Arc::clone(&g.spectrum))).collect();
        let times: Option<Vec<(C64, RealToComplex)>> = terms
            .iter()
            .map(|(c, g)| g.time_domain.clone().map(|t| (*c, t)))
            .collect();
        Ok(Self {
            label,
            spectrum: Arc::new(move |y| {
                pairwise_sum_by(spectra.len(), |i| spectra[i].0 * (spectra[i].1)(y))
            }),
            time_domain: times.map(|ts| -> RealToComplex {
                Arc::new(move |x| pairwise_sum_by(ts.len(), |i| ts[i].0 * (ts[i].1)(x)))
            }),
            decay,
            time_decay,
            time_support,
            spectral_support,
            breaks,
            power_tail,
            time_scale,
            real_valued,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn spectrum(&self, y: f64) -> C64 {
        (self.spectrum)(y)
    }

    pub fn has_time_domain(&self) -> bool {
        self.time_domain.is_some()
    }

    pub fn time_domain(&self, x: f64) -> Result<C64> {
        self.time_domain
            .as_ref()
            .map(|f| f(x))
            .ok_or_else(|| Error::MissingTimeDomain(self.label.clone()))
    }

    pub(crate) fn time_fn(&self) -> Option<&RealToComplex> {
        self.time_domain.as_ref()
    }

    pub(crate) fn spectrum_fn(&self) -> &RealToComplex {
        &self.spectrum
    }

    pub fn decay(&self) -> DecayBound {
        self.decay
    }

    pub fn time_decay(&self) -> Option<DecayBound> {
        self.time_decay
    }

    pub fn time_support(&self) -> Option<(f64, f64)> {
        self.time_support
    }

    pub fn spectral_support(&self) -> Option<(f64, f64)> {
        self.spectral_support
    }

    pub fn breaks(&self) -> Option<Breaks> {
        self.breaks
    }

    pub fn power_tail(&self) -> Option<PowerLawTail> {
        self.power_tail
    }

    pub fn time_scale(&self) -> f64 {
        self.time_scale
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    /// Exponent of the exact power-law tail along the lattice `y + 2k sigma`,
    /// when the lattice step is a whole multiple of the declared period.
    pub fn power_law_on_lattice(&self, sigma: f64) -> Option<f64> {
        self.power_tail
            .filter(|p| is_integer_multiple(2.0 * sigma, p.period))
            .map(|p| p.exponent)
    }

    /// Largest ratio `|B^(y)| (1 + |y|)^p / C` over `points` equispaced
    /// audit nodes on `[-extent, extent]`; at most 1 when the declared decay
    /// bound holds there.
    pub fn audit_decay(&self, extent: f64, points: usize) -> f64 {
        let grid = match Grid::new(-extent, extent, points.max(2)) {
            Ok(g) => g,
            Err(_) => return f64::INFINITY,
        };
        grid.nodes()
            .map(|y| self.spectrum(y).norm() / self.decay.envelope(y))
            .fold(0.0, f64::max)
    }

    /// GL quadrature of `g` over `[a, b]`, split at the breakpoints when
    /// they are known and otherwise into panels of half the time scale.
    pub(crate) fn time_integral(&self, a: f64, b: f64, g: impl Fn(f64) -> C64) -> C64 {
        time_integral_with(self.breaks, self.time_scale, a, b, g)
    }

    /// `||B||^2` from the time domain where possible: Gauss-Legendre panels
    /// for compact support, a growing window for decaying functions, exact
    /// Nyquist-rate sampling for band-limited functions. Spectrum-only
    /// generators fall back to `2 pi * integral |B^|^2`.
    pub fn norm_sq(&self) -> Result<f64> {
        self.time_profile().map(|p| p.norm_sq)
    }

    /// Squared norm together with a window holding all but a relative
    /// `1e-16` of it.
    pub fn time_profile(&self) -> Result<TimeProfile> {
        if let Some(time) = &self.time_domain {
            if let Some((a, b)) = self.time_support {
                let v = self.time_integral(a, b, |x| C64::new(time(x).norm_sqr(), 0.0));
                return Ok(TimeProfile {
                    norm_sq: v.re.max(0.0),
                    window: (a, b),
                });
            }
            if let Some((lo, hi)) = self.spectral_support {
                if let Some(p) = self.nyquist_profile(time, hi - lo) {
                    return Ok(p);
                }
            }
            if let Some(d) = self.time_decay.filter(|d| d.exponent >= 1.5) {
                return self.decaying_profile(time, d);
            }
        }
        Ok(TimeProfile {
            norm_sq: self.spectral_norm_sq()?,
            window: (f64::NEG_INFINITY, f64::INFINITY),
        })
    }

    fn decaying_profile(&self, time: &RealToComplex, d: DecayBound) -> Result<TimeProfile> {
        let q2 = 2.0 * d.exponent - 1.0;
        let tail = |r: f64| 2.0 * d.constant * d.constant / (q2 * (1.0 + r).powf(q2));
        let mut r = 4.0 * self.time_scale;
        let mut norm = self.time_integral(-r, r, |x| C64::new(time(x).norm_sqr(), 0.0)).re;
        for _ in 0..64 {
            if tail(r) <= 1e-16 * norm {
                return Ok(TimeProfile {
                    norm_sq: norm.max(0.0),
                    window: (-r, r),
                });
            }
            let add = self.time_integral(-2.0 * r, -r, |x| C64::new(time(x).norm_sqr(), 0.0))
                + self.time_integral(r, 2.0 * r, |x| C64::new(time(x).norm_sqr(), 0.0));
            norm += add.re;
            r *= 2.0;
        }
        Err(Error::TruncationFailure(format!(
            "time window for `{}` did not close",
            self.label
        )))
    }

    /// `h * sum |f(n h)|^2` with `h = 2 pi / width`, which equals the
    /// integral for band-limited `f`. The window doubles until the sum is
    /// stable.
    fn nyquist_profile(&self, time: &RealToComplex, width: f64) -> Option<TimeProfile> {
        let h = 2.0 * PI / width;
        let block = |lo: i64, hi: i64| -> f64 {
            pairwise_sum_by((hi - lo) as usize, |i| time((lo + i as i64) as f64 * h).norm_sqr())
        };
        let mut n: i64 = 256;
        let mut sum = block(-n, n + 1);
        while n < (1 << 22) {
            let add = block(-2 * n, -n) + block(n + 1, 2 * n + 1);
            n *= 2;
            sum += add;
            if add <= 1e-15 * sum {
                return Some(TimeProfile {
                    norm_sq: h * sum,
                    window: (-(n as f64) * h, n as f64 * h),
                });
            }
        }
        None
    }

    /// `2 pi * integral |B^(y)|^2 dy` over the spectral support or a window
    /// closed by the decay bound.
    pub fn spectral_norm_sq(&self) -> Result<f64> {
        let gl = GaussLegendre::new(16);
        let sq = |y: f64| C64::new(self.spectrum(y).norm_sqr(), 0.0);
        let panel = 0.5 / self.time_scale.max(1e-300);
        if let Some((lo, hi)) = self.spectral_support {
            let panel = panel.min((hi - lo) / 64.0);
            return Ok(2.0 * PI * gl.integrate_panels(lo, hi, panel, sq).re.max(0.0));
        }
        let d = self.decay;
        if d.exponent <= 0.75 {
            return Err(Error::TruncationFailure(format!(
                "spectrum of `{}` decays too slowly (exponent {}) for a norm",
                self.label, d.exponent
            )));
        }
        let q2 = 2.0 * d.exponent - 1.0;
        let tail = |r: f64| 2.0 * d.constant * d.constant / (q2 * (1.0 + r).powf(q2));
        let mut r = 4.0 * panel;
        let mut norm = gl.integrate_panels(-r, r, panel, sq).re;
        for _ in 0..64 {
            if tail(r) <= 1e-16 * norm {
                return Ok(2.0 * PI * norm.max(0.0));
            }
            norm += gl.integrate_panels(-2.0 * r, -r, panel, sq).re
                + gl.integrate_panels(r, 2.0 * r, panel, sq).re;
            r *= 2.0;
        }
        Err(Error::TruncationFailure(format!(
            "spectral window for `{}` did not close",
            self.label
        )))
    }
}

/// Squared norm and an integration window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeProfile {
    pub norm_sq: f64,
    pub window: (f64, f64),
}

pub(crate) fn common_breaks(it: impl Iterator<Item = Option<Breaks>>) -> Option<Breaks> {
    let all: Vec<Breaks> = it.collect::<Option<Vec<_>>>()?;
    let finest = *all
        .iter()
        .min_by(|a, b| a.spacing.total_cmp(&b.spacing))?;
    all.iter()
        .all(|b| {
            is_integer_multiple(b.spacing, finest.spacing)
                && {
                    let off = (b.origin - finest.origin) / finest.spacing;
                    (off - off.round()).abs() < 1e-9
                }
        })
        .then_some(finest)
}

/// Gauss-Legendre quadrature of `g` over `[a, b]` on panels split at the
/// breakpoints, or of length `scale / 2` without them.
pub(crate) fn time_integral_with(
    breaks: Option<Breaks>,
    scale: f64,
    a: f64,
    b: f64,
    g: impl Fn(f64) -> C64,
) -> C64 {
    time_integral_order(breaks, scale, a, b, 16, g)
}

/// [`time_integral_with`] with `n`-point Gauss-Legendre panels.
pub(crate) fn time_integral_order(
    breaks: Option<Breaks>,
    scale: f64,
    a: f64,
    b: f64,
    n: usize,
    g: impl Fn(f64) -> C64,
) -> C64 {
    if b <= a {
        return C64::zero();
    }
    let gl = GaussLegendre::new(n);
    match breaks {
        Some(br) if (b - a) / br.spacing < 1e6 => {
            let k0 = ((a - br.origin) / br.spacing).floor() as i64;
            let k1 = ((b - br.origin) / br.spacing).ceil() as i64;
            let n = (k1 - k0).max(1) as usize;
            pairwise_sum_by(n, |i| {
                let lo = (br.origin + (k0 + i as i64) as f64 * br.spacing).max(a);
                let hi = (br.origin + (k0 + i as i64 + 1) as f64 * br.spacing).min(b);
                if hi - lo > 1e-14 * br.spacing {
                    gl.integrate(lo, hi, &g)
                } else {
                    C64::zero()
                }
            })
        }
        _ => gl.integrate_panels(a, b, 0.5 * scale, g),
    }
}
