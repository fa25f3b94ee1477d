//! Special sums: Hurwitz-type tails and smoothly tapered lattice sums.

use num_traits::Zero;

use super::quadrature::pairwise_sum_by;
use crate::error::{Error, Result};
use crate::C64;

/// `B_2, B_4, ..., B_16` divided by `(2k)!`.
const BERNOULLI_OVER_FACTORIAL: [f64; 8] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
    -3617.0 / 510.0 / 20922789888000.0,
];

/// `sum_{n >= 1} (a / (a + n))^s` for `s > 1`, `a > 0`, together with an
/// estimate of the Euler-Maclaurin remainder. Equals `a^s * zeta(s, a + 1)`.
pub fn scaled_hurwitz(s: f64, a: f64) -> (f64, f64) {
    debug_assert!(s > 1.0 && a > 0.0);
    let m = (s + 20.0 - a).ceil().max(1.0) as usize;
    let direct = pairwise_sum_by(m - 1, |i| (a / (a + (i + 1) as f64)).powf(s));
    let b = a + m as f64;
    let rs = (a / b).powf(s);
    let mut tail = b * rs / (s - 1.0) + 0.5 * rs;
    let mut rising = s;
    let mut power = rs / b;
    let mut last = 0.0;
    for (k, c) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        last = c * rising * power;
        tail += last;
        let j = (2 * k + 1) as f64;
        rising *= (s + j) * (s + j + 1.0);
        power /= b * b;
    }
    (direct + tail, last.abs() + f64::EPSILON * (direct + tail))
}

/// Smooth cutoff on `[0, 2]`: 1 at 0, 1/2 at 1, 0 at 2, with all
/// derivatives vanishing at both ends.
pub fn erfc_taper(u: f64) -> f64 {
    let z = u - 1.0;
    if z <= -1.0 {
        1.0
    } else if z >= 1.0 {
        0.0
    } else {
        0.5 * libm::erfc(6.0 * z / (1.0 - z * z).sqrt())
    }
}

/// A tapered sum with its final half-width and last change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaperedSum {
    pub value: C64,
    pub half_width: usize,
    pub change: f64,
}

pub const TAPER_START: usize = 16;
pub const TAPER_CAP: usize = 1 << 17;

/// `sum_{|j| < 2J} w(|j| / J) term(j)` with `J` doubling from 16 until two
/// consecutive sums agree within `tol * max(1, |S|)`. Converges quickly for
/// oscillating terms with slowly decaying smooth amplitude.
pub fn tapered_sum<F: Fn(i64) -> C64>(term: F, tol: f64) -> Result<TaperedSum> {
    let sum_at = |j: usize| -> C64 {
        let jf = j as f64;
        let n = 4 * j - 1;
        pairwise_sum_by(n, |i| {
            let k = i as i64 - (2 * j as i64 - 1);
            let w = erfc_taper(k.unsigned_abs() as f64 / jf);
            if w == 0.0 {
                C64::zero()
            } else {
                term(k) * w
            }
        })
    };
    let mut j = TAPER_START;
    let mut prev = sum_at(j);
    while j < TAPER_CAP {
        j *= 2;
        let next = sum_at(j);
        let change = (next - prev).norm();
        if change <= tol * next.norm().max(1.0) {
            return Ok(TaperedSum {
                value: next,
                half_width: j,
                change,
            });
        }
        prev = next;
    }
    Err(Error::TruncationFailure(format!(
        "tapered sum did not settle within half-width {TAPER_CAP}"
    )))
}
