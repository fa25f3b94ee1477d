use std::f64::consts::PI;

use num_traits::Zero;

use super::grid::Grid;
use super::quadrature::{integrate_values, pairwise_sum_by, simpson_weights};
use super::table::{SampledFunction, SampledSpectrum, Tabulated};
use crate::C64;

const PHASOR_BLOCK: usize = 64;

/// Quadrature weights premultiplied into the samples.
pub(crate) struct WeightedSamples {
    start: f64,
    step: f64,
    weighted: Vec<C64>,
}

impl WeightedSamples {
    pub(crate) fn new(f: &SampledFunction) -> Self {
        let w = simpson_weights(f.grid().count(), f.grid().step());
        Self {
            start: f.grid().start(),
            step: f.grid().step(),
            weighted: f.values().iter().zip(&w).map(|(v, w)| v * *w).collect(),
        }
    }

    /// `(1/2pi) * sum_k w_k f(x_k) exp(-i x_k y)`, evaluated with a phasor
    /// recurrence re-anchored at every block start.
    pub(crate) fn transform_at(&self, y: f64) -> C64 {
        let n = self.weighted.len();
        let blocks = n.div_ceil(PHASOR_BLOCK);
        let rot = C64::from_polar(1.0, -self.step * y);
        let total = pairwise_sum_by(blocks, |b| {
            let lo = b * PHASOR_BLOCK;
            let hi = (lo + PHASOR_BLOCK).min(n);
            let mut phase = C64::from_polar(1.0, -(self.start + lo as f64 * self.step) * y);
            let mut acc = C64::zero();
            for v in &self.weighted[lo..hi] {
                acc += v * phase;
                phase *= rot;
            }
            acc
        });
        total / (2.0 * PI)
    }
}

/// Quadrature of `(1/2pi) * integral f(x) exp(-i x y) dx` at every node of `freq`.
pub fn fourier_transform_sampled(f: &SampledFunction, freq: &Grid) -> SampledSpectrum {
    let ws = WeightedSamples::new(f);
    Tabulated::new(*freq, freq.nodes().map(|y| ws.transform_at(y)).collect())
        .expect("transform of finite samples is finite")
}

/// `integral |f|^2` by the same composite rule as `integrate`.
pub fn l2_norm_sq(f: &SampledFunction) -> f64 {
    let sq: Vec<C64> = f.values().iter().map(|v| C64::new(v.norm_sqr(), 0.0)).collect();
    integrate_values(&sq, f.grid().step()).re.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::make_uniform_grid;

    #[test]
    fn box_transform_at_zero() {
        let g = make_uniform_grid(-1.0, 1.0, 20001).unwrap();
        let f = Tabulated::from_fn(g, |_| C64::new(1.0, 0.0)).unwrap();
        let y = make_uniform_grid(0.0, 1.0, 2).unwrap();
        let s = fourier_transform_sampled(&f, &y);
        assert!((s.values()[0] - 1.0 / PI).norm() < 1e-6);
        let exact = (1.0f64).sin() / PI;
        assert!((s.values()[1] - exact).norm() < 1e-6);
    }

    #[test]
    fn gaussian_transform_and_norm() {
        let g = make_uniform_grid(-12.0, 12.0, 2401).unwrap();
        let f = Tabulated::from_fn(g, |x| C64::new((-x * x / 2.0).exp(), 0.0)).unwrap();
        let y = make_uniform_grid(-3.0, 3.0, 61).unwrap();
        let s = fourier_transform_sampled(&f, &y);
        for (yk, v) in s.nodes() {
            let exact = (-yk * yk / 2.0).exp() / (2.0 * PI).sqrt();
            assert!((v - exact).norm() < 1e-9, "y={yk}");
        }
        assert!((l2_norm_sq(&f) - PI.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn unit_modulus_norm() {
        let g = make_uniform_grid(0.0, 2.0 * PI, 4097).unwrap();
        let f = Tabulated::from_fn(g, |x| C64::new(0.0, x).exp()).unwrap();
        assert!((l2_norm_sq(&f) - 2.0 * PI).abs() < 1e-12);
        let z = Tabulated::zeros(g);
        assert_eq!(l2_norm_sq(&z), 0.0);
        assert!(fourier_transform_sampled(&z, &g).values().iter().all(|v| *v == C64::zero()));
    }
}
