//! Pseudospectral simulation and verification laboratory for the scaled,
//! singularly perturbed compressible Navier-Stokes systems on the periodic
//! torus.
//!
//! The crate integrates the 1/eps-penalized pressure/velocity/temperature
//! systems over the parameter set `A = {(eps, mu, kappa)}`, instruments the
//! weighted Sobolev norms and the composite sup-plus-dissipation norm used in
//! the uniform-stability theory, and runs named experiments that turn the
//! structural identities of that theory (mollifier calculus, skew-symmetric
//! penalization, energy dissipation identities, singular-limit convergence,
//! acoustic local-energy decay) into desk-scale measurements.
//!
//! Layout:
//! - [`spectral`]: periodic grids, transforms, Fourier multipliers,
//!   mollifiers `J_h`, Bessel families `Lambda_h^m`, exact derivatives,
//!   dealiasing, seeded field generators.
//! - [`norms`]: `H^sigma`, weighted `H^sigma_rho`, the composite accumulator,
//!   and high/low frequency-split monitors.
//! - [`model`]: coefficient sets, structural validators, and right-hand sides
//!   for every system the lab integrates or cross-checks.
//! - [`stepper`]: stiff-aware exponential / IMEX time integration with
//!   per-wavenumber matrix exponentials.
//! - [`experiments`]: reproducible drivers producing CSV/JSON/SVG reports.
//! - [`config`], [`report`], [`cli`]: run configuration and persistence.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod model;
pub mod norms;
pub mod params;
pub mod report;
pub mod spectral;
pub mod stepper;

pub use error::{Error, Result};
pub use params::ParamTriple;
pub use spectral::{SpectralField, SpectralGrid};
