//! Grids, quadrature and sampled transforms shared by every other module.

pub(crate) mod fourier;
mod grid;
mod quadrature;
pub mod special;
mod table;

pub use fourier::{fourier_transform_sampled, l2_norm_sq};
pub use grid::{make_uniform_grid, Grid};
pub use quadrature::{
    integrate, integrate_between, integrate_values, pairwise_sum, pairwise_sum_by,
    periodic_trapezoid, simpson_weights, trapezoid, GaussLegendre,
};
pub use table::{read_csv, read_table, write_csv, Axis, SampledFunction, SampledSpectrum, Tabulated};
