//! Linearized equations about frozen smooth coefficients `(phi, v)`:
//!
//! ```text
//! g1(phi)(dt p + v.grad p) + (1/eps) div u - (kappa/eps) div(beta1(phi) grad theta) = f1
//! g2(phi)(dt u + v.grad u) + (1/eps) grad p - mu beta2 Lap u - mu beta2s grad div u = f2
//! g3(phi)(dt theta + v.grad theta) + div u - kappa beta3 Lap theta                 = f3
//! ```
//!
//! The coefficient fields are time-independent here (the time-dependent case
//! is structurally identical but is not exercised). Elliptic terms are in
//! non-divergence form, as in the energy-estimate setting.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::StateU;
use super::{advect_samples, field_from, ik, vmax_samples, xi_sq_masked, Model, StiffScope, Tendencies};
use crate::error::{Error, Result};
use crate::params::ParamTriple;
use crate::spectral::{deriv, div, grad, laplacian, SpectralField, SpectralGrid};

/// Frozen coefficient fields of the linearized system. All positive where
/// the assumptions require; `beta1 < beta3` pointwise.
#[derive(Clone)]
pub struct LinearizedCoefficients {
    pub g1: SpectralField,
    pub g2: SpectralField,
    pub g3: SpectralField,
    pub beta1: SpectralField,
    pub beta2: SpectralField,
    pub beta2_sharp: SpectralField,
    pub beta3: SpectralField,
    pub vel: Vec<SpectralField>,
}

impl LinearizedCoefficients {
    /// Constant coefficients (reduces the system to the example form when
    /// `g_i = 1`, `beta1 = 1`, `beta3 = beta`).
    pub fn constant(grid: &Arc<SpectralGrid>, g: f64, beta1: f64, beta3: f64) -> Self {
        LinearizedCoefficients {
            g1: SpectralField::constant(grid, g),
            g2: SpectralField::constant(grid, g),
            g3: SpectralField::constant(grid, g),
            beta1: SpectralField::constant(grid, beta1),
            beta2: SpectralField::constant(grid, 1.0),
            beta2_sharp: SpectralField::constant(grid, 0.0),
            beta3: SpectralField::constant(grid, beta3),
            vel: (0..grid.dim()).map(|_| SpectralField::zero(grid)).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        let checks = [
            ("g1", &self.g1),
            ("g2", &self.g2),
            ("g3", &self.g3),
            ("beta1", &self.beta1),
            ("beta2", &self.beta2),
            ("beta3", &self.beta3),
        ];
        for (name, f) in checks {
            let m = f.samples().iter().fold(f64::INFINITY, |acc, &x| acc.min(x));
            if m <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "linearized coefficient {name} must be positive, reaches {m:.3e}"
                )));
            }
        }
        let m = self
            .beta2
            .samples()
            .iter()
            .zip(self.beta2_sharp.samples())
            .map(|(&a, &b)| a + b)
            .fold(f64::INFINITY, f64::min);
        if m <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "beta2 + beta2_sharp must be positive, reaches {m:.3e}"
            )));
        }
        let gap = self
            .beta3
            .samples()
            .iter()
            .zip(self.beta1.samples())
            .map(|(&b3, &b1)| b3 - b1)
            .fold(f64::INFINITY, f64::min);
        if gap <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "structural gap beta1 < beta3 violated; min(beta3-beta1) = {gap:.3e}"
            )));
        }
        Ok(())
    }
}

pub struct LinearizedSystem {
    grid: Arc<SpectralGrid>,
    pub params: ParamTriple,
    pub coeffs: LinearizedCoefficients,
}

impl LinearizedSystem {
    pub fn new(
        grid: Arc<SpectralGrid>,
        params: ParamTriple,
        coeffs: LinearizedCoefficients,
    ) -> Result<Self> {
        coeffs.validate()?;
        Ok(LinearizedSystem {
            grid,
            params,
            coeffs,
        })
    }

    pub fn rhs_linearized(&self, state: &StateU) -> Result<Tendencies> {
        let grid = self.grid.clone();
        let npts = grid.len();
        let (eps, mu, kappa) = (self.params.eps, self.params.mu, self.params.kappa);
        let c = &self.coeffs;

        let divv = div(&state.v)?;
        let gradp = grad(&state.p);

        // kappa/eps div(beta1 grad theta)
        let thermal = if kappa > 0.0 {
            Some(super::diffusion_flux_div(&state.theta, c.beta1.samples())?)
        } else {
            None
        };

        let adv_p = advect_samples(&c.vel, &state.p);
        let adv_th = advect_samples(&c.vel, &state.theta);
        let lap_th = laplacian(&state.theta);

        let mut dp_s = vec![0.0; npts];
        let mut dth_s = vec![0.0; npts];
        for i in 0..npts {
            let heat = thermal.as_ref().map_or(0.0, |t| t.samples()[i]);
            dp_s[i] =
                (kappa / eps * heat - divv.samples()[i] / eps) / c.g1.samples()[i] - adv_p[i];
            dth_s[i] = (kappa * c.beta3.samples()[i] * lap_th.samples()[i]
                - divv.samples()[i])
                / c.g3.samples()[i]
                - adv_th[i];
        }

        let mut dv = Vec::with_capacity(grid.dim());
        for i in 0..grid.dim() {
            let adv_vi = advect_samples(&c.vel, &state.v[i]);
            let lap_vi = laplacian(&state.v[i]);
            let graddiv_i = deriv(&divv, i);
            let mut s = vec![0.0; npts];
            for pnt in 0..npts {
                let visc = mu
                    * (c.beta2.samples()[pnt] * lap_vi.samples()[pnt]
                        + c.beta2_sharp.samples()[pnt] * graddiv_i.samples()[pnt]);
                s[pnt] = (visc - gradp[i].samples()[pnt] / eps) / c.g2.samples()[pnt]
                    - adv_vi[pnt];
            }
            dv.push(field_from(&grid, s)?);
        }

        Ok(Tendencies {
            dp: field_from(&grid, dp_s)?,
            dv,
            dtheta: field_from(&grid, dth_s)?,
        })
    }

    fn mean(&self, f: &SpectralField) -> f64 {
        f.mean()
    }
}

impl Model for LinearizedSystem {
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
        Ok(self.rhs_linearized(&state)?.to_bundle())
    }

    fn stiff_matrix(&self, xi: &[f64], k: &[i64], scope: StiffScope) -> DMatrix<Complex64> {
        // Constant part from the spatial means of the frozen coefficients.
        let d = self.grid.dim();
        let n = self.grid.points();
        let m = d + 2;
        let (eps, mu, kappa) = (self.params.eps, self.params.mu, self.params.kappa);
        let c = &self.coeffs;
        let g1 = self.mean(&c.g1);
        let g2 = self.mean(&c.g2);
        let g3 = self.mean(&c.g3);
        let b1 = self.mean(&c.beta1);
        let b2 = self.mean(&c.beta2);
        let b2s = self.mean(&c.beta2_sharp);
        let b3 = self.mean(&c.beta3);
        let ksq = xi_sq_masked(xi, k, n);
        let mut l = DMatrix::<Complex64>::zeros(m, m);
        for j in 0..d {
            l[(0, 1 + j)] = -ik(xi, k, n, j) / (eps * g1);
            l[(1 + j, 0)] = -ik(xi, k, n, j) / (eps * g2);
        }
        l[(0, 1 + d)] = Complex64::new(-kappa * b1 * ksq / (eps * g1), 0.0);
        if scope == StiffScope::Full {
            if mu > 0.0 {
                for i in 0..d {
                    for j in 0..d {
                        let mut v = ik(xi, k, n, i) * ik(xi, k, n, j) * b2s * mu / g2;
                        if i == j {
                            v += Complex64::new(-mu * b2 * ksq / g2, 0.0);
                        }
                        l[(1 + i, 1 + j)] += v;
                    }
                }
            }
            for j in 0..d {
                l[(1 + d, 1 + j)] = -ik(xi, k, n, j) / g3;
            }
            l[(1 + d, 1 + d)] = Complex64::new(-kappa * b3 * ksq / g3, 0.0);
        }
        l
    }

    fn advective_vmax(&self, _fields: &[SpectralField]) -> f64 {
        vmax_samples(&self.coeffs.vel)
    }

    fn soft_dt_limit(&self, _fields: &[SpectralField]) -> f64 {
        let c = &self.coeffs;
        let (mu, kappa) = (self.params.mu, self.params.kappa);
        let mut var = 0.0f64;
        if kappa > 0.0 {
            let r = self.mean(&c.beta3) / self.mean(&c.g3);
            for (&b, &g) in c.beta3.samples().iter().zip(c.g3.samples()) {
                var = var.max((kappa * (b / g - r)).abs());
            }
        }
        if mu > 0.0 {
            let r = (self.mean(&c.beta2) + self.mean(&c.beta2_sharp).abs()) / self.mean(&c.g2);
            for ((&b, &bs), &g) in c
                .beta2
                .samples()
                .iter()
                .zip(c.beta2_sharp.samples())
                .zip(c.g2.samples())
            {
                var = var.max((mu * ((b + bs.abs()) / g - r)).abs());
            }
        }
        if var == 0.0 {
            f64::INFINITY
        } else {
            let kmax = self.grid.xi_max_dealiased();
            2.5 / (var * kmax * kmax)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ExampleSystem, StateU};
    use crate::spectral::{make_grid, random_band_limited_field};
    use std::f64::consts::TAU;

    #[test]
    fn beta_gap_enforced() {
        let g = make_grid(2, 16, TAU).unwrap();
        let a = ParamTriple::new(0.5, 0.0, 1.0).unwrap();
        let c = LinearizedCoefficients::constant(&g, 1.0, 2.0, 1.5); // beta1 > beta3
        assert!(LinearizedSystem::new(g, a, c).is_err());
    }

    #[test]
    fn constant_coefficients_reduce_to_example_system() {
        // g_i = 1, beta1 = 1, beta3 = beta, mu = 0, kappa = 1 reproduces the
        // simplified system exactly.
        let g = make_grid(2, 32, TAU).unwrap();
        let eps = 0.25;
        let beta = 2.0;
        let a = ParamTriple::new(eps, 0.0, 1.0).unwrap();
        let lin = LinearizedSystem::new(
            g.clone(),
            a,
            LinearizedCoefficients::constant(&g, 1.0, 1.0, beta),
        )
        .unwrap();
        let ex = ExampleSystem::new(g.clone(), eps, beta).unwrap();
        let state = StateU::new(
            random_band_limited_field(1, &g, 8, 2.0, 1.0).unwrap(),
            vec![
                random_band_limited_field(2, &g, 8, 2.0, 1.0).unwrap(),
                random_band_limited_field(3, &g, 8, 2.0, 1.0).unwrap(),
            ],
            random_band_limited_field(4, &g, 8, 2.0, 1.0).unwrap(),
        )
        .unwrap();
        let tl = lin.rhs_linearized(&state).unwrap();
        let te = ex.rhs_example(&state).unwrap();
        assert!(tl.dp.sub(&te.dp).unwrap().max_norm() <= 1e-12 / eps);
        assert!(tl.dtheta.sub(&te.dtheta).unwrap().max_norm() <= 1e-12);
        for i in 0..2 {
            assert!(tl.dv[i].sub(&te.dv[i]).unwrap().max_norm() <= 1e-12 / eps);
        }
    }
}
