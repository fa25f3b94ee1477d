//! Browser bindings for three views: the periodization `D(y)`, the field
//! `|Phi(x, y)|` over one cell, and the best-approximation error as a
//! function of the band `rho`.
//!
//! The plain functions work natively and are what the tests exercise; the
//! `#[wasm_bindgen]` wrappers only convert errors for JavaScript.

use shiftspace::numerics::make_uniform_grid;
use shiftspace::shiftspace::best_approx_error_sq;
use shiftspace::spectral::periodize;
use shiftspace::zak::phi_field;
use shiftspace::{Generator, Signal, SplineParams, DEFAULT_TOL};
use wasm_bindgen::prelude::*;

/// Largest grid or field resolution accepted from the page.
pub const MAX_NODES: usize = 8193;

#[derive(Debug, thiserror::Error)]
pub enum DemoError {
    #[error("unknown generator `{0}` (expected bspline, gauss or sinc)")]
    UnknownGenerator(String),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Numerical(#[from] shiftspace::Error),
}

/// Builds a generator from the page controls. `param` is the spline order
/// for `bspline` and the width for `gauss`; `sinc` ignores it.
pub fn make_generator(kind: &str, param: f64, sigma: f64) -> Result<Generator, DemoError> {
    match kind {
        "bspline" => {
            if !(param >= 0.0 && param.fract() == 0.0) {
                return Err(DemoError::Input(format!("spline order must be a whole number, got {param}")));
            }
            Ok(Generator::bspline(SplineParams::new(sigma, param as usize)?))
        }
        "gauss" => Ok(Generator::gaussian(param)?),
        "sinc" => Ok(Generator::bandlimited(sigma)?),
        other => Err(DemoError::UnknownGenerator(other.to_owned())),
    }
}

fn check_count(name: &str, n: usize, min: usize) -> Result<(), DemoError> {
    if (min..=MAX_NODES).contains(&n) {
        Ok(())
    } else {
        Err(DemoError::Input(format!("{name} must lie in {min}..={MAX_NODES}, got {n}")))
    }
}

/// `D(y)` on `nodes` points of `[-sigma, sigma]`, interleaved as `y0, D0, y1, D1, ...`.
pub fn d_curve(kind: &str, param: f64, sigma: f64, nodes: usize) -> Result<Vec<f64>, DemoError> {
    check_count("nodes", nodes, 2)?;
    let gen = make_generator(kind, param, sigma)?;
    let grid = make_uniform_grid(-sigma, sigma, nodes)?;
    let d = periodize(&gen, sigma, &grid, DEFAULT_TOL)?;
    Ok(grid
        .nodes()
        .zip(d.values())
        .flat_map(|(y, v)| [y, *v])
        .collect())
}

/// `|Phi|` on a `res x res` grid of the cell `[0, pi/sigma) x [-sigma, sigma)`,
/// row-major in `x`.
pub fn phi_magnitude(kind: &str, param: f64, sigma: f64, res: usize) -> Result<Vec<f64>, DemoError> {
    check_count("resolution", res, 2)?;
    let gen = make_generator(kind, param, sigma)?;
    let field = phi_field(&gen, sigma, res, DEFAULT_TOL)?;
    Ok(field.values.iter().map(|v| v.norm()).collect())
}

/// Best-approximation error of a Gaussian of the given width for `count`
/// values of `rho` spread over `(0, sigma]`, interleaved as `rho0, e0, ...`.
pub fn error_vs_rho(
    kind: &str,
    param: f64,
    sigma: f64,
    width: f64,
    count: usize,
    nodes: usize,
) -> Result<Vec<f64>, DemoError> {
    check_count("count", count, 1)?;
    check_count("nodes", nodes, 3)?;
    let gen = make_generator(kind, param, sigma)?;
    let f = Signal::Analytic(Generator::gaussian(width)?);
    let grid = make_uniform_grid(-sigma, sigma, nodes)?;
    let mut out = Vec::with_capacity(2 * count);
    for k in 1..=count {
        let rho = sigma * k as f64 / count as f64;
        out.push(rho);
        out.push(best_approx_error_sq(&f, &gen, sigma, rho, &grid, DEFAULT_TOL)?);
    }
    Ok(out)
}

fn to_js(e: DemoError) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = dCurve)]
pub fn d_curve_js(kind: &str, param: f64, sigma: f64, nodes: usize) -> Result<Vec<f64>, JsError> {
    d_curve(kind, param, sigma, nodes).map_err(to_js)
}

#[wasm_bindgen(js_name = phiMagnitude)]
pub fn phi_magnitude_js(kind: &str, param: f64, sigma: f64, res: usize) -> Result<Vec<f64>, JsError> {
    phi_magnitude(kind, param, sigma, res).map_err(to_js)
}

#[wasm_bindgen(js_name = errorVsRho)]
pub fn error_vs_rho_js(
    kind: &str,
    param: f64,
    sigma: f64,
    width: f64,
    count: usize,
    nodes: usize,
) -> Result<Vec<f64>, JsError> {
    error_vs_rho(kind, param, sigma, width, count, nodes).map_err(to_js)
}
