//! The constant-coefficient simplified system
//!
//! ```text
//! dt p + (1/eps) div v - (1/eps) Lap theta = 0
//! dt v + (1/eps) grad p                    = 0
//! dt theta + div v - beta Lap theta        = 0
//! ```
//!
//! with `beta > 1`. Per Fourier mode this is a `(d+2) x (d+2)` linear ODE
//! system, which makes it the workhorse for integrator oracles and for the
//! exact energy identities: with `v_e := v - grad theta`,
//!
//! `d/dt ||(p, v_e, sqrt(beta-1) grad theta)||^2 = -2 ||div v_e - (beta-1) Lap theta||^2`,
//!
//! and with `zeta := eps beta p - theta`, `v_eps := eps v`, the weighted
//! energy `||(zeta/sqrt(beta-1), sqrt(beta) v_eps, theta)||^2` decays
//! monotonically with rate `2 beta ||grad theta||^2`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::StateU;
use super::{ik, xi_sq_masked, Model, StiffScope, Tendencies};
use crate::error::{Error, Result};
use crate::spectral::{div, grad, laplacian, SpectralField, SpectralGrid};

pub struct ExampleSystem {
    grid: Arc<SpectralGrid>,
    pub eps: f64,
    pub beta: f64,
}

impl ExampleSystem {
    pub fn new(grid: Arc<SpectralGrid>, eps: f64, beta: f64) -> Result<Self> {
        if !(beta > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "example system requires beta > 1, got {beta}"
            )));
        }
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eps must lie in (0,1], got {eps}"
            )));
        }
        Ok(ExampleSystem { grid, eps, beta })
    }

    pub fn rhs_example(&self, state: &StateU) -> Result<Tendencies> {
        let divv = div(&state.v)?;
        let lap_th = laplacian(&state.theta);
        let dp = lap_th.sub(&divv)?.scale(1.0 / self.eps);
        let dv: Vec<SpectralField> = grad(&state.p)
            .into_iter()
            .map(|g| g.scale(-1.0 / self.eps))
            .collect();
        let dtheta = lap_th.scale(self.beta).sub(&divv)?;
        Ok(Tendencies { dp, dv, dtheta })
    }

    /// Energy `E = ||(p, v_e, sqrt(beta-1) grad theta)||^2`, `v_e = v - grad theta`.
    pub fn dissipation_energy(&self, state: &StateU) -> Result<f64> {
        let gth = grad(&state.theta);
        let mut e = state.p.l2_norm().powi(2);
        for (vi, gi) in state.v.iter().zip(&gth) {
            e += vi.sub(gi)?.l2_norm().powi(2);
        }
        for gi in &gth {
            e += (self.beta - 1.0) * gi.l2_norm().powi(2);
        }
        Ok(e)
    }

    /// Dissipation rate `D = ||div v_e - (beta-1) Lap theta||^2`; the exact
    /// identity is `dE/dt = -2 D`.
    pub fn dissipation_rate(&self, state: &StateU) -> Result<f64> {
        let gth = grad(&state.theta);
        let ve: Vec<SpectralField> = state
            .v
            .iter()
            .zip(&gth)
            .map(|(vi, gi)| vi.sub(gi))
            .collect::<Result<_>>()?;
        let diss = div(&ve)?.axpy(-(self.beta - 1.0), &laplacian(&state.theta))?;
        Ok(diss.l2_norm().powi(2))
    }

    /// Weighted slow energy `||(zeta/sqrt(beta-1), sqrt(beta) v_eps, theta)||^2`
    /// with `zeta = eps beta p - theta`, `v_eps = eps v`; exactly monotone
    /// nonincreasing along solutions.
    pub fn slow_energy(&self, state: &StateU) -> Result<f64> {
        let zeta = state.p.scale(self.eps * self.beta).sub(&state.theta)?;
        let mut e = zeta.l2_norm().powi(2) / (self.beta - 1.0);
        for vi in &state.v {
            e += self.beta * (self.eps * vi.l2_norm()).powi(2);
        }
        e += state.theta.l2_norm().powi(2);
        Ok(e)
    }

    /// Dense per-mode ODE matrix assembled directly from the equations (used
    /// by oracle tests; independent of `stiff_matrix` only in the sense that
    /// callers may rebuild it by hand).
    pub fn mode_matrix(&self, xi: &[f64], k: &[i64]) -> DMatrix<Complex64> {
        self.stiff_matrix(xi, k, StiffScope::Full)
    }
}

impl Model for ExampleSystem {
    fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    fn n_fields(&self) -> usize {
        self.grid.dim() + 2
    }

    fn field_names(&self) -> Vec<String> {
        let mut names = vec!["p".to_string()];
        for i in 0..self.grid.dim() {
            names.push(format!("v{}", i + 1));
        }
        names.push("theta".to_string());
        names
    }

    fn rhs(&self, fields: &[SpectralField], _t: f64) -> Result<Vec<SpectralField>> {
        let state = StateU::from_bundle(fields);
        Ok(self.rhs_example(&state)?.to_bundle())
    }

    fn stiff_matrix(&self, xi: &[f64], k: &[i64], scope: StiffScope) -> DMatrix<Complex64> {
        let d = self.grid.dim();
        let n = self.grid.points();
        let m = d + 2;
        let ksq = xi_sq_masked(xi, k, n);
        let mut l = DMatrix::<Complex64>::zeros(m, m);
        for j in 0..d {
            l[(0, 1 + j)] = -ik(xi, k, n, j) / self.eps;
            l[(1 + j, 0)] = -ik(xi, k, n, j) / self.eps;
        }
        l[(0, 1 + d)] = Complex64::new(-ksq / self.eps, 0.0);
        if scope == StiffScope::Full {
            for j in 0..d {
                l[(1 + d, 1 + j)] = -ik(xi, k, n, j);
            }
            l[(1 + d, 1 + d)] = Complex64::new(-self.beta * ksq, 0.0);
        }
        l
    }

    fn soft_dt_limit(&self, _fields: &[SpectralField]) -> f64 {
        // Only the SingularOnly scope leaves the O(1) diffusion explicit; the
        // limit below is safe for both scopes.
        let kmax = self.grid.xi_max_dealiased();
        2.5 / (self.beta * kmax * kmax)
    }

    fn soft_vanishes(&self, scope: StiffScope) -> bool {
        scope == StiffScope::Full
    }
}
