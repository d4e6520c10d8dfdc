//! Periodic-grid spectral representation: grids, fields, Fourier multipliers,
//! exact differential operators and dealiasing.
//!
//! Conventions. The forward transform produces coefficients `u_hat[k]` such
//! that `u(x) = sum_k u_hat[k] exp(i k.x)` with `k = (2 pi / L) * m`,
//! `m in {-n/2, ..., n/2 - 1}` per dimension. With this normalization the
//! discrete `L^2` norm is `(sum_k |u_hat[k]|^2)^(1/2)` and equals the
//! physical-space quadrature `(mean |u|^2)^(1/2)` exactly (Parseval). The
//! torus `H^sigma` norm sums `<k>^(2 sigma) |u_hat[k]|^2`.
//!
//! The unpaired Nyquist mode `m = -n/2` is zeroed by every derivative
//! operator, which keeps derivatives of real fields real.

mod field;
mod grid;
mod multiplier;
mod ops;
mod random;

pub use field::SpectralField;
pub use grid::{make_grid, SpectralGrid};
pub use multiplier::{
    apply_multiplier, bessel_symbol, mollifier_profile, mollifier_symbol, MultiplierSymbol,
};
pub use ops::{curl, deriv, div, grad, laplacian};
pub use random::{random_band_limited_field, random_field_with_profile};
