use std::f64::consts::PI;
use std::ops::Add;

use num_traits::Zero;

use super::grid::Grid;
use super::table::Tabulated;
use crate::error::{Error, Result};
use crate::C64;

const PAIRWISE_BLOCK: usize = 8;

/// Pairwise (cascade) summation in a fixed order.
pub fn pairwise_sum<T: Copy + Add<Output = T> + Zero>(values: &[T]) -> T {
    pairwise_sum_by(values.len(), |i| values[i])
}

/// Pairwise summation of `term(0) + ... + term(n - 1)` without a buffer.
pub fn pairwise_sum_by<T, F>(n: usize, term: F) -> T
where
    T: Copy + Add<Output = T> + Zero,
    F: Fn(usize) -> T,
{
    fn rec<T, F>(lo: usize, hi: usize, term: &F) -> T
    where
        T: Copy + Add<Output = T> + Zero,
        F: Fn(usize) -> T,
    {
        if hi - lo <= PAIRWISE_BLOCK {
            let mut acc = T::zero();
            for i in lo..hi {
                acc = acc + term(i);
            }
            acc
        } else {
            let mid = lo + (hi - lo) / 2;
            rec(lo, mid, term) + rec(mid, hi, term)
        }
    }
    rec(0, n, &term)
}

/// Composite Simpson weights; an even node count gets one trailing trapezoid
/// panel. Two nodes reduce to the trapezoid rule.
pub fn simpson_weights(count: usize, step: f64) -> Vec<f64> {
    let mut w = vec![0.0; count];
    if count < 2 {
        return w;
    }
    if count == 2 {
        w[0] = 0.5 * step;
        w[1] = 0.5 * step;
        return w;
    }
    let simpson_nodes = if count % 2 == 1 { count } else { count - 1 };
    let third = step / 3.0;
    for (i, wi) in w.iter_mut().enumerate().take(simpson_nodes) {
        *wi = if i == 0 || i + 1 == simpson_nodes {
            third
        } else if i % 2 == 1 {
            4.0 * third
        } else {
            2.0 * third
        };
    }
    if simpson_nodes < count {
        w[count - 2] += 0.5 * step;
        w[count - 1] += 0.5 * step;
    }
    w
}

/// Simpson's rule with a 3/8 tail for even counts (fourth order throughout).
fn simpson_38_weights(count: usize, step: f64) -> Vec<f64> {
    if count % 2 == 1 || count < 4 {
        return simpson_weights(count, step);
    }
    let head = count - 3;
    let mut w = if head >= 3 {
        simpson_weights(head, step)
    } else {
        vec![0.0; head]
    };
    w.resize(count, 0.0);
    let e = 3.0 * step / 8.0;
    w[head - 1] += e;
    w[head] += 3.0 * e;
    w[head + 1] += 3.0 * e;
    w[head + 2] += e;
    w
}

/// Composite Simpson quadrature of uniformly spaced samples.
pub fn integrate_values(values: &[C64], step: f64) -> C64 {
    let w = simpson_weights(values.len(), step);
    pairwise_sum_by(values.len(), |i| values[i] * w[i])
}

/// Integral of a tabulated function over its grid.
pub fn integrate(f: &Tabulated) -> C64 {
    integrate_values(f.values(), f.grid().step())
}

/// Trapezoid rule for one full period sampled at both endpoints; the last
/// sample duplicates the first and is skipped.
pub fn periodic_trapezoid(values: &[C64], step: f64) -> C64 {
    let n = values.len().saturating_sub(1);
    pairwise_sum(&values[..n]) * step
}

/// Closed trapezoid rule over uniformly spaced samples.
pub fn trapezoid(values: &[C64], step: f64) -> C64 {
    match values.len() {
        0 | 1 => C64::zero(),
        n => (pairwise_sum(values) - (values[0] + values[n - 1]) * 0.5) * step,
    }
}

fn lagrange4(u: f64, v: [C64; 4]) -> C64 {
    let l0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
    let l1 = u * (u - 2.0) * (u - 3.0) / 2.0;
    let l2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
    let l3 = u * (u - 1.0) * (u - 2.0) / 6.0;
    v[0] * l0 + v[1] * l1 + v[2] * l2 + v[3] * l3
}

/// Exact integral over `[u0, u1]` (local units) of the cubic through `v` at
/// `u = 0, 1, 2, 3`.
fn cubic_piece(u0: f64, u1: f64, v: [C64; 4]) -> C64 {
    let c = 0.5 * (u0 + u1);
    let r = 0.5 * (u1 - u0) / 3f64.sqrt();
    (lagrange4(c - r, v) + lagrange4(c + r, v)) * (0.5 * (u1 - u0))
}

/// Integral over `[a, b]` inside the grid. Whole panels use Simpson's rule;
/// the partial panels at either end integrate the cubic through the four
/// nearest interior nodes, so no samples outside `[a, b]` are read.
pub fn integrate_between(grid: &Grid, values: &[C64], a: f64, b: f64) -> Result<C64> {
    if values.len() != grid.count() {
        return Err(Error::GridMismatch(format!(
            "{} values on a {}-node grid",
            values.len(),
            grid.count()
        )));
    }
    let h = grid.step();
    let snap = 1e-9 * h;
    if a >= b || a < grid.start() - snap || b > grid.stop() + snap {
        return Err(Error::InvalidRange(format!(
            "[{a}, {b}] is not inside [{}, {}]",
            grid.start(),
            grid.stop()
        )));
    }
    let ua = (a - grid.start()) / h;
    let ub = (b - grid.start()) / h;
    let i0 = (ua - 1e-9).ceil().max(0.0) as usize;
    let i1 = ((ub + 1e-9).floor() as usize).min(grid.count() - 1);
    if i1 < i0 + 3 {
        return Err(Error::Resolution(format!(
            "[{a}, {b}] contains {} grid nodes, need at least 4",
            i1 as i64 - i0 as i64 + 1
        )));
    }
    let count = i1 - i0 + 1;
    let w = simpson_38_weights(count, h);
    let mut total = pairwise_sum_by(count, |k| values[i0 + k] * w[k]);

    let left = i0 as f64 - ua;
    if left > 1e-9 {
        let v = [values[i0], values[i0 + 1], values[i0 + 2], values[i0 + 3]];
        total += cubic_piece(-left, 0.0, v) * h;
    }
    let right = ub - i1 as f64;
    if right > 1e-9 {
        let v = [values[i1 - 3], values[i1 - 2], values[i1 - 1], values[i1]];
        total += cubic_piece(3.0, 3.0 + right, v) * h;
    }
    Ok(total)
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Newton iteration from the Chebyshev-like initial guess.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integral of `f` over `[a, b]` with one panel.
    pub fn integrate<F: Fn(f64) -> C64>(&self, a: f64, b: f64, f: F) -> C64 {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        let mut acc = C64::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(c + r * x) * *w;
        }
        acc * r
    }

    /// Integral over `[a, b]` split into equal panels no longer than `panel`.
    pub fn integrate_panels<F: Fn(f64) -> C64>(&self, a: f64, b: f64, panel: f64, f: F) -> C64 {
        if b <= a {
            return C64::zero();
        }
        let n = (((b - a) / panel) - 1e-9).ceil().max(1.0) as usize;
        let h = (b - a) / n as f64;
        pairwise_sum_by(n, |k| {
            let lo = a + k as f64 * h;
            let hi = if k + 1 == n { b } else { lo + h };
            self.integrate(lo, hi, &f)
        })
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
