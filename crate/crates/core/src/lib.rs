//! Orthogonal projection onto, and best L2 approximation by, spaces spanned by
//! the equidistant shifts `B(x - j*pi/sigma)` of a single generator `B`.
//!
//! The Fourier transform convention throughout is
//! `f^(y) = (1/2pi) * integral f(x) exp(-i x y) dx`, so that
//! `||f||^2 = 2pi * ||f^||^2`.
//!
//! Module map:
//!
//! * [`numerics`]: uniform grids, quadrature, sampled Fourier transforms, CSV tables.
//! * [`generator`]: B-splines, Gaussians, band-limited and sampled generators.
//! * [`spectral`]: the periodization `D(y) = sum |B^(y + 2 nu sigma)|^2`, bracket
//!   products and Riesz bound estimates.
//! * [`zak`]: the kernel `Phi(x, y)` in its time and frequency representations.
//! * [`shiftspace`]: symbols, synthesis, Plancherel identities, projections and
//!   best-approximation errors.
//! * [`oracle`]: brute-force least squares on truncated shift systems.

// `!(x > 0.0)` style guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod generator;
pub mod numerics;
pub mod oracle;
pub mod shiftspace;
pub mod spectral;
pub mod zak;

pub use error::{Error, Result};
pub use generator::{DecayBound, Generator, SplineParams};
pub use numerics::{Grid, SampledFunction, SampledSpectrum, Tabulated};
pub use shiftspace::{ProjectionResult, ShiftExpansion, Signal, SpectralAnalysis, ZetaFunction};
pub use spectral::{PeriodizedSpectrum, RieszClass, RieszReport};

/// Complex double used for every sampled value.
pub type C64 = num_complex::Complex64;

/// Default summation tolerance for lattice and shift sums.
pub const DEFAULT_TOL: f64 = 1e-8;
