//! Coefficient sets, structural validators, system states, and right-hand
//! sides for every system the laboratory integrates or verifies: the scaled
//! primitive equations, the transformed fluctuation system, its formal limit,
//! the constant-coefficient example system, the symmetrized cross-check form,
//! the frozen-coefficient linearization and the scaled wave equation.

pub mod coefficients;
pub mod example;
pub mod limit;
pub mod linearized;
pub mod main_system;
pub mod primitive;
pub mod state;
pub mod symmetrized;
pub mod wave;

pub use coefficients::{
    default_perfect_gas, perfect_gas, validate_assumptions, CoefficientSet, MaterialLaw,
    ValidationReport,
};
pub use example::ExampleSystem;
pub use limit::{project_well_prepared, LimitSystem};
pub use linearized::{LinearizedCoefficients, LinearizedSystem};
pub use main_system::{singular_operator, MainSystem};
pub use primitive::PrimitiveSystem;
pub use state::{from_fluctuation, to_fluctuation, PrimitiveState, StateU, WaveState};
pub use symmetrized::SymmetrizedSystem;
pub use wave::{WaveCoefficients, WaveSystem};

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::Result;
use crate::spectral::{deriv, SpectralField, SpectralGrid};

/// Time derivatives of a state bundle; components are real and dealiased.
#[derive(Debug, Clone)]
pub struct Tendencies {
    pub dp: SpectralField,
    pub dv: Vec<SpectralField>,
    pub dtheta: SpectralField,
}

impl Tendencies {
    pub fn to_bundle(&self) -> Vec<SpectralField> {
        let mut out = vec![self.dp.clone()];
        out.extend(self.dv.iter().cloned());
        out.push(self.dtheta.clone());
        out
    }
}

/// Which constant-coefficient terms enter the stiff per-mode symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StiffScope {
    /// Every constant-coefficient term at the reference state (singular
    /// penalization and reference diffusion).
    Full,
    /// Only the terms carrying `1/eps` factors; reference diffusion is left
    /// to the explicit stage (used by order-measurement runs).
    SingularOnly,
}

/// A model the stepper can integrate: full right-hand side plus the
/// constant-coefficient stiff symbol per wavenumber.
pub trait Model: Send + Sync {
    fn grid(&self) -> &Arc<SpectralGrid>;
    fn n_fields(&self) -> usize;
    fn field_names(&self) -> Vec<String>;

    /// Full tendencies for the bundled state at time `t`.
    fn rhs(&self, fields: &[SpectralField], t: f64) -> Result<Vec<SpectralField>>;

    /// Constant-coefficient part at the reference state, as an
    /// `n_fields x n_fields` matrix acting on the coefficient vector of one
    /// wavenumber. Derivative entries follow the Nyquist-masking convention.
    fn stiff_matrix(&self, xi: &[f64], k: &[i64], scope: StiffScope) -> DMatrix<Complex64>;

    /// Max advection speed (for the CFL limit); zero when the model has no
    /// transport term.
    fn advective_vmax(&self, _fields: &[SpectralField]) -> f64 {
        0.0
    }

    /// Conservative stability bound for the explicitly treated remainder;
    /// infinity when the remainder imposes no limit. The `1/eps` penalization
    /// and reference diffusion are excluded (handled by the exponential).
    fn soft_dt_limit(&self, _fields: &[SpectralField]) -> f64 {
        f64::INFINITY
    }

    /// True when the soft remainder is identically zero for this stiff
    /// scope (fully constant-coefficient models); lets the exponential
    /// stepper skip the explicit stages.
    fn soft_vanishes(&self, _scope: StiffScope) -> bool {
        false
    }
}

/// Derivative entry `i xi_axis` with the Nyquist mode masked, matching
/// [`crate::spectral::deriv`].
pub(crate) fn ik(xi: &[f64], k: &[i64], n: usize, axis: usize) -> Complex64 {
    if k[axis] == -(n as i64) / 2 {
        Complex64::default()
    } else {
        Complex64::new(0.0, xi[axis])
    }
}

/// `|xi|^2` with per-axis Nyquist masking, matching `laplacian`.
pub(crate) fn xi_sq_masked(xi: &[f64], k: &[i64], n: usize) -> f64 {
    let mut s = 0.0;
    for (axis, &ki) in k.iter().enumerate() {
        if ki != -(n as i64) / 2 {
            s += xi[axis] * xi[axis];
        }
    }
    s
}

// ---- shared right-hand-side assembly pieces ----

/// Samples of the advective derivative `v . grad f`.
pub(crate) fn advect_samples(v: &[SpectralField], f: &SpectralField) -> Vec<f64> {
    let n = f.grid().len();
    let mut out = vec![0.0; n];
    for (axis, vi) in v.iter().enumerate() {
        let df = deriv(f, axis);
        let dfs = df.samples();
        for ((o, &vs), &ds) in out.iter_mut().zip(vi.samples()).zip(dfs) {
            *o += vs * ds;
        }
    }
    out
}

/// Dealiased field from a raw sample array.
pub(crate) fn field_from(grid: &Arc<SpectralGrid>, samples: Vec<f64>) -> Result<SpectralField> {
    Ok(SpectralField::from_samples(grid, &samples)?.dealias())
}

/// `div(beta grad theta)` with the flux product dealiased before the outer
/// divergence. `beta_s` are physical samples of the diffusion coefficient.
pub(crate) fn diffusion_flux_div(theta: &SpectralField, beta_s: &[f64]) -> Result<SpectralField> {
    let grid = theta.grid().clone();
    let mut acc = SpectralField::zero(&grid);
    for axis in 0..grid.dim() {
        let dth = deriv(theta, axis);
        let flux: Vec<f64> = dth
            .samples()
            .iter()
            .zip(beta_s)
            .map(|(&a, &b)| a * b)
            .collect();
        let flux_f = field_from(&grid, flux)?;
        acc = acc.add(&deriv(&flux_f, axis))?;
    }
    Ok(acc)
}

/// Velocity gradient samples `dv[i][j] = d_j v_i`.
pub(crate) fn velocity_gradient_samples(v: &[SpectralField]) -> Vec<Vec<Vec<f64>>> {
    let d = v.len();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| deriv(&v[i], j).samples().to_vec())
                .collect()
        })
        .collect()
}

/// Viscous operator `div(2 zeta D v) + grad(eta div v)` as a vector of
/// fields, with the stress products dealiased before the outer derivatives.
/// `zeta_s`, `eta_s` are physical samples of the Lame coefficients.
pub(crate) fn viscous_stress_div(
    v: &[SpectralField],
    zeta_s: &[f64],
    eta_s: &[f64],
) -> Result<Vec<SpectralField>> {
    let grid = v[0].grid().clone();
    let d = grid.dim();
    let grads = velocity_gradient_samples(v);
    let divv_s: Vec<f64> = {
        let mut s = vec![0.0; grid.len()];
        for (i, row) in grads.iter().enumerate() {
            for (o, &g) in s.iter_mut().zip(&row[i]) {
                *o += g;
            }
        }
        s
    };
    let mut out = Vec::with_capacity(d);
    for i in 0..d {
        let mut acc = SpectralField::zero(&grid);
        for j in 0..d {
            // 2 zeta D_ij = zeta (d_j v_i + d_i v_j)
            let stress: Vec<f64> = zeta_s
                .iter()
                .zip(&grads[i][j])
                .zip(&grads[j][i])
                .map(|((&z, &a), &b)| z * (a + b))
                .collect();
            let stress_f = field_from(&grid, stress)?;
            acc = acc.add(&deriv(&stress_f, j))?;
        }
        let bulk: Vec<f64> = eta_s
            .iter()
            .zip(&divv_s)
            .map(|(&e, &dv)| e * dv)
            .collect();
        let bulk_f = field_from(&grid, bulk)?;
        acc = acc.add(&deriv(&bulk_f, i))?;
        out.push(acc);
    }
    Ok(out)
}

/// Samples of the dissipation source `Q = eps^alpha mu sigma . Dv` with
/// `sigma = 2 zeta Dv + eta (div v) I`.
pub(crate) fn dissipation_q_samples(
    v: &[SpectralField],
    zeta_s: &[f64],
    eta_s: &[f64],
    eps: f64,
    mu: f64,
    alpha: f64,
) -> Vec<f64> {
    let grid = v[0].grid().clone();
    let npts = grid.len();
    if mu == 0.0 {
        return vec![0.0; npts];
    }
    let d = grid.dim();
    let grads = velocity_gradient_samples(v);
    let scale = eps.powf(alpha) * mu;
    let mut out = vec![0.0; npts];
    for (p, o) in out.iter_mut().enumerate() {
        let mut divv = 0.0;
        for row in grads.iter().enumerate().map(|(i, g)| &g[i]) {
            divv += row[p];
        }
        let mut contraction = 0.0;
        for i in 0..d {
            for j in 0..d {
                let dij = 0.5 * (grads[i][j][p] + grads[j][i][p]);
                let sij = 2.0 * zeta_s[p] * dij + if i == j { eta_s[p] * divv } else { 0.0 };
                contraction += sij * dij;
            }
        }
        *o = scale * contraction;
    }
    out
}

/// Max pointwise velocity magnitude over the grid.
pub(crate) fn vmax_samples(v: &[SpectralField]) -> f64 {
    let n = v[0].grid().len();
    let mut m = 0.0f64;
    for p in 0..n {
        let mut s = 0.0;
        for vi in v {
            let x = vi.samples()[p];
            s += x * x;
        }
        m = m.max(s);
    }
    m.sqrt()
}
