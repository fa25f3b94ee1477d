//! Symbols `zeta(y) = sum_j b_j exp(-i j pi y / sigma)`, synthesis, the
//! Plancherel identities for shift spaces, orthogonal projections and
//! best-approximation errors.

use std::borrow::Cow;
use std::f64::consts::PI;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::generator::{DecayBound, Generator};
use crate::numerics::fourier::WeightedSamples;
use crate::numerics::{
    integrate_between, l2_norm_sq, pairwise_sum_by, trapezoid, Grid, SampledFunction,
    SampledSpectrum, Tabulated,
};
use crate::spectral::{
    check_period_grid, interior_node, periodize, LatticePlan, LatticeSpectrum,
    PeriodizedSpectrum, EPSILON_D,
};
use crate::C64;

/// Default node count of symbol and periodization grids on `[-sigma, sigma]`.
pub const DEFAULT_GRID_NODES: usize = 4097;

/// Default largest shift index recovered from a symbol.
pub const DEFAULT_J_RANGE: usize = 64;

/// Minimum nodes per period of the fastest recovered exponential.
const NODES_PER_OSCILLATION: f64 = 8.0;

fn check_sigma_rho(sigma: f64, rho: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if !(rho > 0.0 && rho <= sigma * (1.0 + 1e-12)) {
        return Err(Error::InvalidRange(format!(
            "rho must lie in (0, sigma] = (0, {sigma}], got {rho}"
        )));
    }
    Ok(())
}

fn is_full_band(sigma: f64, rho: f64) -> bool {
    rho >= sigma * (1.0 - 1e-12)
}

/// The default symbol grid on `[-sigma, sigma]`.
pub fn default_grid(sigma: f64) -> Result<Grid> {
    Grid::new(-sigma, sigma, DEFAULT_GRID_NODES)
}

/// Coefficients `b_j` for `j = first, first + 1, ...` of shifts at `j pi/sigma`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftExpansion {
    sigma: f64,
    rho: f64,
    first: i64,
    coeffs: Vec<C64>,
    zero_set_residual: Option<f64>,
}

impl ShiftExpansion {
    pub fn new(sigma: f64, rho: f64, first: i64, coeffs: Vec<C64>) -> Result<Self> {
        check_sigma_rho(sigma, rho)?;
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        Ok(Self {
            sigma,
            rho,
            first,
            coeffs,
            zero_set_residual: None,
        })
    }

    /// Coefficients for `j = -J..=J`; `coeffs` must have odd length `2J + 1`.
    pub fn centered(sigma: f64, rho: f64, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "centered expansion needs odd length, got {}",
                coeffs.len()
            )));
        }
        let j = (coeffs.len() / 2) as i64;
        Self::new(sigma, rho, -j, coeffs)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn first_index(&self) -> i64 {
        self.first
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn indexed(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (self.first + i as i64, *c))
    }

    /// `b_j`, zero outside the stored range.
    pub fn coeff(&self, j: i64) -> C64 {
        let i = j - self.first;
        if i >= 0 && (i as usize) < self.coeffs.len() {
            self.coeffs[i as usize]
        } else {
            C64::zero()
        }
    }

    /// Largest `|zeta(y)|` on `rho < |y| <= sigma` of the finite sum, when
    /// the expansion was recovered for `rho < sigma`.
    pub fn zero_set_residual(&self) -> Option<f64> {
        self.zero_set_residual
    }

    pub fn coeff_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `sum_j b_j exp(-i j pi y / sigma)`.
    pub fn symbol(&self, y: f64) -> C64 {
        let w = -PI * y / self.sigma;
        pairwise_sum_by(self.coeffs.len(), |i| {
            self.coeffs[i] * C64::from_polar(1.0, (self.first + i as i64) as f64 * w)
        })
    }

    /// Largest `|zeta|` at nodes of `grid` with `rho < |y| <= sigma`.
    pub fn symbol_outside_band(&self, grid: &Grid) -> f64 {
        grid.nodes()
            .filter(|y| y.abs() > self.rho * (1.0 + 1e-12))
            .map(|y| self.symbol(y).norm())
            .fold(0.0, f64::max)
    }

    /// `s = sum_j b_j B(. - j pi/sigma)` as a generator: spectrum
    /// `zeta(y) B^(y)`, time domain the finite shift sum.
    pub fn to_signal(&self, gen: &Generator) -> Result<Generator> {
        let h = PI / self.sigma;
        let this = self.clone();
        let spectrum = gen.spectrum_fn().clone();
        let total: f64 = self.coeffs.iter().map(|c| c.norm()).sum();
        let decay = DecayBound {
            exponent: gen.decay().exponent,
            constant: (gen.decay().constant * total).max(f64::MIN_POSITIVE),
        };
        let mut out = Generator::custom(
            &format!("expansion[{} shifts of {}]", self.coeffs.len(), gen.label()),
            move |y| this.symbol(y) * spectrum(y),
            decay,
        )
        .with_time_scale(gen.time_scale())
        .with_real_values(gen.is_real_valued() && self.coeffs.iter().all(|c| c.im == 0.0));
        let last = self.first + self.coeffs.len() as i64 - 1;
        if let Some(time) = gen.time_fn().cloned() {
            let this = self.clone();
            let support = gen.time_support();
            out = out.with_time_domain(move |x| {
                let (lo, hi) = match support {
                    Some((a, b)) => (
                        (((x - b) / h).floor() as i64).max(this.first),
                        (((x - a) / h).ceil() as i64).min(last),
                    ),
                    None => (this.first, last),
                };
                if hi < lo {
                    return C64::zero();
                }
                pairwise_sum_by((hi - lo + 1) as usize, |i| {
                    let j = lo + i as i64;
                    this.coeff(j) * time(x - j as f64 * h)
                })
            });
        }
        if let Some(d) = gen.time_decay() {
            let c: f64 = self
                .indexed()
                .map(|(j, b)| b.norm() * (1.0 + (j as f64 * h).abs()).powf(d.exponent))
                .sum();
            out = out.with_time_decay(DecayBound {
                exponent: d.exponent,
                constant: (d.constant * c).max(f64::MIN_POSITIVE),
            });
        }
        if let Some((a, b)) = gen.time_support() {
            out = out.with_time_support(a + self.first as f64 * h, b + last as f64 * h);
        }
        if let Some((lo, hi)) = gen.spectral_support() {
            out = out.with_spectral_support(lo, hi);
        }
        if let Some(br) = gen.breaks() {
            let r = h / br.spacing;
            if (r - r.round()).abs() < 1e-9 && r.round() >= 1.0 {
                out = out.with_breaks(br);
            }
        }
        if let Some(p) = gen.power_tail() {
            let r = p.period / (2.0 * self.sigma);
            if (r - r.round()).abs() < 1e-9 && r.round() >= 1.0 {
                out = out.with_power_tail(p);
            }
        }
        Ok(out)
    }
}

/// A symbol tabulated on a grid spanning `[-sigma, sigma]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaFunction {
    pub sigma: f64,
    pub rho: f64,
    pub grid: Grid,
    pub values: Vec<C64>,
    pub zero_set_enforced: bool,
}

impl ZetaFunction {
    pub fn as_table(&self) -> Tabulated {
        Tabulated::new(self.grid, self.values.clone()).expect("symbol values are finite")
    }
}

fn check_symbol_grid(grid: &Grid, sigma: f64) -> Result<()> {
    check_period_grid(grid, sigma)?;
    let slack = 1e-12 * sigma;
    if (grid.start() + sigma).abs() > slack || (grid.stop() - sigma).abs() > slack {
        return Err(Error::InvalidRange(format!(
            "symbol grid must span [-{sigma}, {sigma}], got [{}, {}]",
            grid.start(),
            grid.stop()
        )));
    }
    Ok(())
}

/// `zeta(y) = sum_j b_j exp(-i j pi y / sigma)` at every node.
pub fn zeta_of_coeffs(exp: &ShiftExpansion, grid: &Grid) -> Result<ZetaFunction> {
    check_symbol_grid(grid, exp.sigma)?;
    Ok(ZetaFunction {
        sigma: exp.sigma,
        rho: exp.rho,
        grid: *grid,
        values: grid.nodes().map(|y| exp.symbol(y)).collect(),
        zero_set_enforced: false,
    })
}

/// Integral of tabulated values over `[-rho, rho]`: the closed trapezoid rule
/// over the full period (spectrally accurate for periodic integrands), or
/// Simpson's rule with cubic end panels for a sub-band.
fn band_integral(grid: &Grid, values: &[C64], sigma: f64, rho: f64) -> Result<C64> {
    if is_full_band(sigma, rho) {
        Ok(trapezoid(values, grid.step()))
    } else {
        integrate_between(grid, values, -rho, rho)
    }
}

/// `b_j = (1/2sigma) integral_{-rho}^{rho} zeta(y) exp(i j pi y / sigma) dy`
/// for `|j| <= j_range`.
pub fn coeffs_from_zeta(zeta: &ZetaFunction, j_range: usize) -> Result<ShiftExpansion> {
    let sigma = zeta.sigma;
    check_symbol_grid(&zeta.grid, sigma)?;
    if zeta.values.len() != zeta.grid.count() {
        return Err(Error::GridMismatch("symbol length differs from its grid".into()));
    }
    let per_oscillation = if j_range == 0 {
        f64::INFINITY
    } else {
        2.0 * sigma / j_range as f64 / zeta.grid.step()
    };
    if per_oscillation < NODES_PER_OSCILLATION {
        return Err(Error::Resolution(format!(
            "{} nodes cannot resolve shift index {j_range} (need {} per oscillation)",
            zeta.grid.count(),
            NODES_PER_OSCILLATION
        )));
    }
    let j = j_range as i64;
    let mut work = vec![C64::zero(); zeta.values.len()];
    let coeffs = (-j..=j)
        .map(|k| {
            let w = PI * k as f64 / sigma;
            for (slot, (y, z)) in work.iter_mut().zip(zeta.grid.nodes().zip(&zeta.values)) {
                *slot = z * C64::from_polar(1.0, w * y);
            }
            band_integral(&zeta.grid, &work, sigma, zeta.rho).map(|v| v / (2.0 * sigma))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = ShiftExpansion::new(sigma, zeta.rho, -j, coeffs)?;
    if !is_full_band(sigma, zeta.rho) {
        out.zero_set_residual = Some(out.symbol_outside_band(&zeta.grid));
    }
    Ok(out)
}

/// `s(x) = sum_j b_j B(x - j pi/sigma)` at the nodes of `x_grid`.
pub fn synthesize(exp: &ShiftExpansion, gen: &Generator, x_grid: &Grid) -> Result<SampledFunction> {
    if !gen.has_time_domain() {
        return Err(Error::MissingTimeDomain(gen.label().to_string()));
    }
    let s = exp.to_signal(gen)?;
    Tabulated::new(
        *x_grid,
        x_grid.nodes().map(|x| s.time_domain(x)).collect::<Result<Vec<_>>>()?,
    )
}

fn check_shared_grid(zeta: &ZetaFunction, d: &PeriodizedSpectrum) -> Result<()> {
    if !zeta.grid.matches(d.grid(), 1e-9) || (zeta.sigma - d.sigma()).abs() > 1e-12 * zeta.sigma {
        return Err(Error::GridMismatch(format!(
            "symbol grid [{}, {}] x {} vs periodization grid [{}, {}] x {}",
            zeta.grid.start(),
            zeta.grid.stop(),
            zeta.grid.count(),
            d.grid().start(),
            d.grid().stop(),
            d.grid().count()
        )));
    }
    Ok(())
}

/// `2 pi integral_{-rho}^{rho} |zeta|^2 D`, the squared norm of the
/// synthesized function.
pub fn plancherel_norm_sq(zeta: &ZetaFunction, d: &PeriodizedSpectrum) -> Result<f64> {
    Ok(plancherel_inner(zeta, zeta, d)?.re.max(0.0))
}

/// `2 pi integral_{-rho}^{rho} zeta_s conj(zeta_t) D`, the inner product of
/// the synthesized functions.
pub fn plancherel_inner(
    zeta_s: &ZetaFunction,
    zeta_t: &ZetaFunction,
    d: &PeriodizedSpectrum,
) -> Result<C64> {
    check_shared_grid(zeta_s, d)?;
    check_shared_grid(zeta_t, d)?;
    let rho = zeta_s.rho.min(zeta_t.rho);
    let values: Vec<C64> = zeta_s
        .values
        .iter()
        .zip(&zeta_t.values)
        .zip(d.values())
        .map(|((s, t), dv)| s * t.conj() * *dv)
        .collect();
    Ok(band_integral(&zeta_s.grid, &values, zeta_s.sigma, rho)? * (2.0 * PI))
}

/// A function to approximate: analytic, time samples, or spectrum samples.
#[derive(Debug, Clone)]
pub enum Signal {
    Analytic(Generator),
    Samples(SampledFunction),
    Spectrum(SampledSpectrum),
}

impl Signal {
    /// `||f||^2` computed from the time domain whenever one exists.
    pub fn norm_sq(&self) -> Result<f64> {
        match self {
            Signal::Analytic(g) => g.norm_sq(),
            Signal::Samples(s) => Ok(l2_norm_sq(s)),
            Signal::Spectrum(s) => Ok(2.0 * PI * l2_norm_sq(s)),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Signal::Analytic(g) => g.label().to_string(),
            Signal::Samples(s) => format!(
                "samples on [{}, {}] x {}",
                s.grid().start(),
                s.grid().stop(),
                s.grid().count()
            ),
            Signal::Spectrum(s) => format!(
                "spectrum on [{}, {}] x {}",
                s.grid().start(),
                s.grid().stop(),
                s.grid().count()
            ),
        }
    }

    /// Spectrum evaluable along the lattice of `grid`. Time samples are
    /// transformed on lattice-aligned nodes, window by window, until a window
    /// carries less than `1e-16` of the energy or the Nyquist band ends.
    fn resolve(&self, sigma: f64, grid: &Grid) -> Result<Resolved<'_>> {
        match self {
            Signal::Analytic(g) => Ok(Resolved::Analytic(g)),
            Signal::Spectrum(s) => Ok(Resolved::Table(Cow::Borrowed(s))),
            Signal::Samples(s) => Ok(Resolved::Table(Cow::Owned(aligned_transform(s, sigma, grid)?))),
        }
    }
}

fn aligned_transform(samples: &SampledFunction, sigma: f64, grid: &Grid) -> Result<Tabulated> {
    let ws = WeightedSamples::new(samples);
    let nyquist = PI / samples.grid().step();
    let max_windows = (((nyquist - sigma) / (2.0 * sigma)).ceil().max(0.0) as usize).min(4096);
    let per_window = grid.count() - 1;
    let eval = |y: f64| {
        if y.abs() > nyquist {
            C64::zero()
        } else {
            ws.transform_at(y)
        }
    };
    let centre: Vec<C64> = grid.nodes().map(&eval).collect();
    let mut total: f64 = centre.iter().map(|v| v.norm_sqr()).sum();
    let mut left: Vec<Vec<C64>> = Vec::new();
    let mut right: Vec<Vec<C64>> = Vec::new();
    for k in 1..=max_windows {
        let shift = 2.0 * sigma * k as f64;
        // left windows exclude their right edge, right windows their left edge
        let lw: Vec<C64> = (0..per_window).map(|i| eval(grid.node(i) - shift)).collect();
        let rw: Vec<C64> = (1..=per_window).map(|i| eval(grid.node(i) + shift)).collect();
        let energy: f64 = lw.iter().chain(&rw).map(|v| v.norm_sqr()).sum();
        total += energy;
        left.push(lw);
        right.push(rw);
        if energy <= 1e-16 * total {
            break;
        }
    }
    let windows = left.len();
    let mut values = Vec::with_capacity(grid.count() + 2 * windows * per_window);
    for lw in left.iter().rev() {
        values.extend_from_slice(lw);
    }
    values.extend_from_slice(&centre[..]);
    for rw in &right {
        values.extend_from_slice(rw);
    }
    let ext = grid.extended(2.0 * sigma, windows)?;
    if values.len() != ext.count() {
        return Err(Error::GridMismatch(format!(
            "aligned transform has {} values for {} nodes",
            values.len(),
            ext.count()
        )));
    }
    Tabulated::new(ext, values)
}

enum Resolved<'a> {
    Analytic(&'a Generator),
    Table(Cow<'a, Tabulated>),
}

impl LatticeSpectrum for Resolved<'_> {
    fn value(&self, y: f64) -> C64 {
        match self {
            Resolved::Analytic(g) => g.spectrum(y),
            Resolved::Table(t) => t.cubic(y),
        }
    }

    fn decay(&self) -> Option<DecayBound> {
        match self {
            Resolved::Analytic(g) => Some(g.decay()),
            Resolved::Table(_) => None,
        }
    }

    fn support(&self) -> Option<(f64, f64)> {
        match self {
            Resolved::Analytic(g) => g.spectral_support(),
            Resolved::Table(t) => Some((t.grid().start(), t.grid().stop())),
        }
    }

    fn power_law_on_lattice(&self, sigma: f64) -> Option<f64> {
        match self {
            Resolved::Analytic(g) => g.power_law_on_lattice(sigma),
            Resolved::Table(_) => None,
        }
    }

    fn describe(&self) -> String {
        match self {
            Resolved::Analytic(g) => g.label().to_string(),
            Resolved::Table(t) => t.describe(),
        }
    }
}

/// Lattice quantities of a signal `f` against a generator `B` on a symbol
/// grid: `D_B`, the bracket `sum conj(B^) f^` and `D_f = sum |f^|^2`.
#[derive(Debug, Clone)]
pub struct SpectralAnalysis {
    sigma: f64,
    rho: f64,
    grid: Grid,
    d: PeriodizedSpectrum,
    bracket: Vec<C64>,
    d_f: Vec<f64>,
    lattice_tail: f64,
    norm_sq: f64,
}

impl SpectralAnalysis {
    pub fn new(
        signal: &Signal,
        gen: &Generator,
        sigma: f64,
        rho: f64,
        grid: &Grid,
        tol: f64,
    ) -> Result<Self> {
        check_sigma_rho(sigma, rho)?;
        check_symbol_grid(grid, sigma)?;
        let f = signal.resolve(sigma, grid)?;
        let d = periodize(gen, sigma, grid, tol)?;
        let plan_b = LatticePlan::new(sigma, gen, &f, tol)?;
        let plan_f = LatticePlan::new(sigma, &f, &f, tol)?;
        let mut lattice_tail = d.tail_bound();
        let mut bracket = Vec::with_capacity(grid.count());
        let mut d_f = Vec::with_capacity(grid.count());
        for k in 0..grid.count() {
            let y = interior_node(grid, sigma, k);
            let (b, tb) = plan_b.sum(y, |x| gen.spectrum(x).conj() * f.value(x));
            let (v, tf) = plan_f.sum(y, |x| C64::new(f.value(x).norm_sqr(), 0.0));
            lattice_tail = lattice_tail.max(tb).max(tf);
            bracket.push(b);
            d_f.push(v.re.max(0.0));
        }
        let norm_sq = signal.norm_sq()?;
        Ok(Self {
            sigma,
            rho,
            grid: *grid,
            d,
            bracket,
            d_f,
            lattice_tail,
            norm_sq,
        })
    }

    pub fn periodization(&self) -> &PeriodizedSpectrum {
        &self.d
    }

    pub fn bracket(&self) -> &[C64] {
        &self.bracket
    }

    pub fn signal_periodization(&self) -> &[f64] {
        &self.d_f
    }

    /// Largest truncation bound over the three lattice sums.
    pub fn lattice_tail(&self) -> f64 {
        self.lattice_tail
    }

    /// `||f||^2` from the time-domain path.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    fn in_band(&self, y: f64) -> bool {
        y.abs() <= self.rho * (1.0 + 1e-12)
    }

    fn guarded(&self, k: usize) -> bool {
        self.d.values()[k] <= EPSILON_D
    }

    /// `zeta = bracket / D` on `[-rho, rho]`, zero at guarded nodes and outside
    /// the band.
    pub fn zeta(&self) -> ZetaFunction {
        let values = self
            .grid
            .nodes()
            .enumerate()
            .map(|(k, y)| {
                if self.in_band(y) && !self.guarded(k) {
                    self.bracket[k] / self.d.values()[k]
                } else {
                    C64::zero()
                }
            })
            .collect();
        ZetaFunction {
            sigma: self.sigma,
            rho: self.rho,
            grid: self.grid,
            values,
            zero_set_enforced: true,
        }
    }

    /// `2 pi sum w_k |bracket_k|^2` over in-band nodes where `D <= EPSILON_D`.
    pub fn guard_mass(&self) -> f64 {
        let h = self.grid.step();
        let n = self.grid.count();
        let full = is_full_band(self.sigma, self.rho);
        let mass: f64 = self
            .grid
            .nodes()
            .enumerate()
            .filter(|(k, y)| self.in_band(*y) && self.guarded(*k))
            .map(|(k, _)| {
                let w = if full && (k == 0 || k + 1 == n) { 0.5 * h } else { h };
                w * self.bracket[k].norm_sqr()
            })
            .fold(0.0, |a, b| a + b);
        2.0 * PI * mass
    }

    /// `integral_{-sigma}^{sigma} D_f = integral |f^|^2`.
    pub fn spectral_energy(&self) -> f64 {
        let v: Vec<C64> = self.d_f.iter().map(|x| C64::new(*x, 0.0)).collect();
        trapezoid(&v, self.grid.step()).re
    }

    /// `integral_{-rho}^{rho} |bracket|^2 / D` over unguarded nodes.
    pub fn captured_energy(&self) -> Result<f64> {
        let v: Vec<C64> = (0..self.grid.count())
            .map(|k| {
                if self.guarded(k) {
                    C64::zero()
                } else {
                    C64::new(self.bracket[k].norm_sqr() / self.d.values()[k], 0.0)
                }
            })
            .collect();
        Ok(band_integral(&self.grid, &v, self.sigma, self.rho)?.re)
    }

    /// `2 pi (integral |f^|^2 - integral_{-rho}^{rho} |bracket|^2 / D)`,
    /// clamped at zero.
    pub fn error_sq(&self) -> Result<f64> {
        Ok((2.0 * PI * (self.spectral_energy() - self.captured_energy()?)).max(0.0))
    }
}

/// Result of projecting `f` onto the shift space.
#[derive(Debug, Clone)]
pub struct ProjectionResult {
    pub zeta: ZetaFunction,
    pub coeffs: ShiftExpansion,
    pub projection_norm_sq: f64,
    pub error_sq: f64,
    pub guard_mass: f64,
    /// `||f||^2` from the time-domain path.
    pub norm_sq: f64,
    pub lattice_tail: f64,
}

/// `zeta = (1/D) sum_k conj(B^(y + 2k sigma)) f^(y + 2k sigma)` over the full
/// period.
pub fn zeta_transform(
    f: &Signal,
    gen: &Generator,
    sigma: f64,
    grid: &Grid,
    tol: f64,
) -> Result<ZetaFunction> {
    let mut z = SpectralAnalysis::new(f, gen, sigma, sigma, grid, tol)?.zeta();
    z.zero_set_enforced = false;
    Ok(z)
}

/// Orthogonal projection of `f` onto the shifts of `gen` whose symbols vanish
/// outside `[-rho, rho]`.
pub fn project(
    f: &Signal,
    gen: &Generator,
    sigma: f64,
    rho: f64,
    grid: &Grid,
    j_range: usize,
    tol: f64,
) -> Result<ProjectionResult> {
    let analysis = SpectralAnalysis::new(f, gen, sigma, rho, grid, tol)?;
    let zeta = analysis.zeta();
    let coeffs = coeffs_from_zeta(&zeta, j_range)?;
    let projection_norm_sq = plancherel_norm_sq(&zeta, analysis.periodization())?;
    let error_sq = analysis.error_sq()?;
    let norm_sq = analysis.norm_sq();
    if projection_norm_sq > norm_sq * (1.0 + 1e-9) + tol {
        return Err(Error::Consistency(format!(
            "projection norm {projection_norm_sq} exceeds signal norm {norm_sq}"
        )));
    }
    Ok(ProjectionResult {
        zeta,
        coeffs,
        projection_norm_sq,
        error_sq,
        guard_mass: analysis.guard_mass(),
        norm_sq,
        lattice_tail: analysis.lattice_tail(),
    })
}

/// `E^2 = 2 pi (integral |f^|^2 - integral_{-rho}^{rho} |bracket|^2 / D)`.
pub fn best_approx_error_sq(
    f: &Signal,
    gen: &Generator,
    sigma: f64,
    rho: f64,
    grid: &Grid,
    tol: f64,
) -> Result<f64> {
    SpectralAnalysis::new(f, gen, sigma, rho, grid, tol)?.error_sq()
}
