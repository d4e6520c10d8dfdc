//! The scaled primitive system in `(P, v, T)` for a perfect gas
//! `P = R rho T`, `e = C_V T`, `gamma = 1 + R/C_V`:
//!
//! ```text
//! dt P + v.grad P + gamma P div v = (gamma-1) kappa div(k grad T) + (gamma-1) eps Q
//! rho (dt v + v.grad v) + grad P / eps^2 = mu div sigma
//! rho C_V (dt T + v.grad T) + P div v = kappa div(k grad T) + eps Q
//! ```
//!
//! with `rho = P/(R T)`, `sigma = 2 zeta Dv + eta (div v) I` and
//! `Q = eps^alpha mu sigma . Dv`. Both `P` and `T` must stay pointwise
//! positive; tendencies error otherwise.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::coefficients::MaterialLaw;
use super::state::PrimitiveState;
use super::{
    advect_samples, diffusion_flux_div, dissipation_q_samples, field_from, ik,
    viscous_stress_div, vmax_samples, xi_sq_masked, Model, StiffScope, Tendencies,
};
use crate::error::Result;
use crate::params::ParamTriple;
use crate::spectral::{div, grad, SpectralField, SpectralGrid};

pub struct PrimitiveSystem {
    grid: Arc<SpectralGrid>,
    pub params: ParamTriple,
    pub r_gas: f64,
    pub c_v: f64,
    pub conductivity: MaterialLaw,
    pub shear_viscosity: MaterialLaw,
    pub bulk_viscosity: MaterialLaw,
    pub alpha: f64,
    /// Reference state about which the stiff symbol is built.
    pub p_bar: f64,
    pub t_bar: f64,
}

impl PrimitiveSystem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        grid: Arc<SpectralGrid>,
        params: ParamTriple,
        r_gas: f64,
        c_v: f64,
        conductivity: MaterialLaw,
        shear_viscosity: MaterialLaw,
        bulk_viscosity: MaterialLaw,
        alpha: f64,
    ) -> Self {
        PrimitiveSystem {
            grid,
            params,
            r_gas,
            c_v,
            conductivity,
            shear_viscosity,
            bulk_viscosity,
            alpha,
            p_bar: 1.0,
            t_bar: 1.0,
        }
    }

    pub fn gamma(&self) -> f64 {
        1.0 + self.r_gas / self.c_v
    }

    pub fn rhs_primitive(&self, state: &PrimitiveState) -> Result<Tendencies> {
        state.check_positive()?;
        let grid = state.pressure.grid().clone();
        let npts = grid.len();
        let (eps, mu, kappa) = (self.params.eps, self.params.mu, self.params.kappa);
        let gamma = self.gamma();

        let sp = state.pressure.samples();
        let st = state.temperature.samples();
        let rho: Vec<f64> = sp
            .iter()
            .zip(st)
            .map(|(&p, &t)| p / (self.r_gas * t))
            .collect();
        let k_s: Vec<f64> = st.iter().map(|&t| self.conductivity.eval(t)).collect();
        let zeta_s: Vec<f64> = st.iter().map(|&t| self.shear_viscosity.eval(t)).collect();
        let eta_s: Vec<f64> = st.iter().map(|&t| self.bulk_viscosity.eval(t)).collect();

        let divv = div(&state.v)?;
        let divv_s = divv.samples();
        let gradp = grad(&state.pressure);
        let q_s = dissipation_q_samples(&state.v, &zeta_s, &eta_s, eps, mu, self.alpha);

        let thermal = if kappa > 0.0 {
            Some(diffusion_flux_div(&state.temperature, &k_s)?)
        } else {
            None
        };
        let viscous = if mu > 0.0 {
            Some(viscous_stress_div(&state.v, &zeta_s, &eta_s)?)
        } else {
            None
        };

        let adv_p = advect_samples(&state.v, &state.pressure);
        let adv_t = advect_samples(&state.v, &state.temperature);

        let mut dp_s = vec![0.0; npts];
        let mut dt_s = vec![0.0; npts];
        for i in 0..npts {
            let heat = thermal.as_ref().map_or(0.0, |t| t.samples()[i]);
            dp_s[i] = -adv_p[i] - gamma * sp[i] * divv_s[i]
                + (gamma - 1.0) * (kappa * heat + eps * q_s[i]);
            dt_s[i] = -adv_t[i]
                + (kappa * heat + eps * q_s[i] - sp[i] * divv_s[i]) / (rho[i] * self.c_v);
        }

        let mut dv = Vec::with_capacity(grid.dim());
        for i in 0..grid.dim() {
            let adv_vi = advect_samples(&state.v, &state.v[i]);
            let gpi = gradp[i].samples();
            let mut dvi = vec![0.0; npts];
            for pnt in 0..npts {
                let visc = viscous.as_ref().map_or(0.0, |v| v[i].samples()[pnt]);
                dvi[pnt] = -adv_vi[pnt] + (mu * visc - gpi[pnt] / (eps * eps)) / rho[pnt];
            }
            dv.push(field_from(&grid, dvi)?);
        }

        Ok(Tendencies {
            dp: field_from(&grid, dp_s)?,
            dv,
            dtheta: field_from(&grid, dt_s)?,
        })
    }
}

impl Model for PrimitiveSystem {
    fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    fn n_fields(&self) -> usize {
        self.grid.dim() + 2
    }

    fn field_names(&self) -> Vec<String> {
        let mut names = vec!["P".to_string()];
        for i in 0..self.grid.dim() {
            names.push(format!("v{}", i + 1));
        }
        names.push("T".to_string());
        names
    }

    fn rhs(&self, fields: &[SpectralField], _t: f64) -> Result<Vec<SpectralField>> {
        let state = PrimitiveState::from_bundle(fields);
        Ok(self.rhs_primitive(&state)?.to_bundle())
    }

    fn stiff_matrix(&self, xi: &[f64], k: &[i64], scope: StiffScope) -> DMatrix<Complex64> {
        let d = self.grid.dim();
        let n = self.grid.points();
        let m = d + 2;
        let (eps, mu, kappa) = (self.params.eps, self.params.mu, self.params.kappa);
        let gamma = self.gamma();
        let rho_bar = self.p_bar / (self.r_gas * self.t_bar);
        let k_bar = self.conductivity.eval(self.t_bar);
        let zeta_bar = self.shear_viscosity.eval(self.t_bar);
        let eta_bar = self.bulk_viscosity.eval(self.t_bar);
        let ksq = xi_sq_masked(xi, k, n);
        let mut l = DMatrix::<Complex64>::zeros(m, m);
        // P row
        for j in 0..d {
            l[(0, 1 + j)] = -ik(xi, k, n, j) * gamma * self.p_bar;
        }
        // v rows: the 1/eps^2 pressure gradient is always stiff
        for i in 0..d {
            l[(1 + i, 0)] = -ik(xi, k, n, i) / (eps * eps * rho_bar);
        }
        if scope == StiffScope::Full {
            l[(0, 1 + d)] = Complex64::new(-(gamma - 1.0) * kappa * k_bar * ksq, 0.0);
            if mu > 0.0 {
                let c = mu / rho_bar;
                for i in 0..d {
                    for j in 0..d {
                        let mut v = ik(xi, k, n, i) * ik(xi, k, n, j) * (zeta_bar + eta_bar) * c;
                        if i == j {
                            v += Complex64::new(-c * zeta_bar * ksq, 0.0);
                        }
                        l[(1 + i, 1 + j)] += v;
                    }
                }
            }
            let ct = 1.0 / (rho_bar * self.c_v);
            for j in 0..d {
                l[(1 + d, 1 + j)] = -ik(xi, k, n, j) * self.p_bar * ct;
            }
            l[(1 + d, 1 + d)] = Complex64::new(-kappa * k_bar * ksq * ct, 0.0);
        } else {
            // Singular scope: keep the P row's div v as well since it feeds
            // the acoustic oscillation through grad P / eps^2.
        }
        l
    }

    fn advective_vmax(&self, fields: &[SpectralField]) -> f64 {
        let d = self.grid.dim();
        vmax_samples(&fields[1..1 + d])
    }

    fn soft_dt_limit(&self, fields: &[SpectralField]) -> f64 {
        let state = PrimitiveState::from_bundle(fields);
        let (mu, kappa) = (self.params.mu, self.params.kappa);
        let sp = state.pressure.samples();
        let st = state.temperature.samples();
        let rho_bar = self.p_bar / (self.r_gas * self.t_bar);
        let ref_t = kappa * self.conductivity.eval(self.t_bar) / (rho_bar * self.c_v);
        let ref_v = mu
            * (2.0 * self.shear_viscosity.eval(self.t_bar)
                + self.bulk_viscosity.eval(self.t_bar).abs())
            / rho_bar;
        let mut var = 0.0f64;
        for (&p, &t) in sp.iter().zip(st) {
            if t <= 0.0 || p <= 0.0 {
                return f64::INFINITY; // positivity error surfaces in rhs
            }
            let rho = p / (self.r_gas * t);
            if kappa > 0.0 {
                let c = kappa * self.conductivity.eval(t) / (rho * self.c_v);
                var = var.max((c - ref_t).abs());
            }
            if mu > 0.0 {
                let c = mu
                    * (2.0 * self.shear_viscosity.eval(t) + self.bulk_viscosity.eval(t).abs())
                    / rho;
                var = var.max((c - ref_v).abs());
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
    use crate::model::state::{to_fluctuation, StateU};
    use crate::model::{default_perfect_gas, MainSystem};
    use crate::spectral::{make_grid, random_band_limited_field};
    use std::f64::consts::TAU;

    fn test_system(grid: Arc<SpectralGrid>, a: ParamTriple) -> PrimitiveSystem {
        PrimitiveSystem::new(
            grid,
            a,
            1.0,
            1.5,
            MaterialLaw::constant(1.0),
            MaterialLaw::constant(1.0),
            MaterialLaw::constant(0.0),
            1.0,
        )
    }

    #[test]
    fn constant_state_is_equilibrium() {
        let g = make_grid(2, 16, TAU).unwrap();
        let a = ParamTriple::new(0.5, 1.0, 1.0).unwrap();
        let sys = test_system(g.clone(), a);
        let state = PrimitiveState {
            pressure: SpectralField::constant(&g, 1.0),
            v: vec![SpectralField::zero(&g), SpectralField::zero(&g)],
            temperature: SpectralField::constant(&g, 1.0),
        };
        let t = sys.rhs_primitive(&state).unwrap();
        assert!(t.dp.max_norm() <= 1e-14);
        assert!(t.dtheta.max_norm() <= 1e-14);
        for dvi in &t.dv {
            assert!(dvi.max_norm() <= 1e-14);
        }
    }

    #[test]
    fn negative_temperature_rejected() {
        let g = make_grid(1, 16, TAU).unwrap();
        let a = ParamTriple::new(0.5, 0.0, 0.0).unwrap();
        let sys = test_system(g.clone(), a);
        let state = PrimitiveState {
            pressure: SpectralField::constant(&g, 1.0),
            v: vec![SpectralField::zero(&g)],
            temperature: SpectralField::from_fn(&g, |x| 0.5 + x[0].sin()),
        };
        assert!(sys.rhs_primitive(&state).is_err());
    }

    #[test]
    fn chain_rule_cross_check_with_main_system() {
        // Transform a smooth positive state via the log change of variables,
        // evaluate the fluctuation tendencies, map back via
        // dt P = eps P dt p, dt T = T dt theta, and compare with the
        // primitive tendencies directly.
        let g = make_grid(2, 64, TAU).unwrap();
        let eps = 0.5;
        let a = ParamTriple::new(eps, 1.0, 1.0).unwrap();
        let prim_sys = test_system(g.clone(), a);
        let main_sys = MainSystem::new(g.clone(), a, default_perfect_gas());

        let base = random_band_limited_field(17, &g, 6, 4.0, 1.0).unwrap();
        let bump = random_band_limited_field(18, &g, 6, 4.0, 1.0).unwrap();
        let pressure = base.map_pointwise(|x| (0.08 * eps * x).exp());
        let temperature = bump.map_pointwise(|x| (0.08 * x).exp());
        let v = vec![
            random_band_limited_field(19, &g, 6, 4.0, 0.15).unwrap(),
            random_band_limited_field(20, &g, 6, 4.0, 0.15).unwrap(),
        ];
        let prim = PrimitiveState {
            pressure: pressure.clone(),
            v: v.clone(),
            temperature: temperature.clone(),
        };
        let fluct: StateU = to_fluctuation(&prim, eps, 1.0, 1.0).unwrap();

        let t_prim = prim_sys.rhs_primitive(&prim).unwrap();
        let t_main = main_sys.rhs_main(&fluct).unwrap();

        // dt P = eps P dt p
        let dp_from_main: Vec<f64> = pressure
            .samples()
            .iter()
            .zip(t_main.dp.samples())
            .map(|(&p, &dp)| eps * p * dp)
            .collect();
        let dt_from_main: Vec<f64> = temperature
            .samples()
            .iter()
            .zip(t_main.dtheta.samples())
            .map(|(&t, &dth)| t * dth)
            .collect();

        let scale_p = t_prim.dp.max_norm().max(1.0);
        let err_p: f64 = t_prim
            .dp
            .samples()
            .iter()
            .zip(&dp_from_main)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err_p <= 1e-9 * scale_p, "pressure tendency drift {err_p:.3e}");

        let scale_t = t_prim.dtheta.max_norm().max(1.0);
        let err_t: f64 = t_prim
            .dtheta
            .samples()
            .iter()
            .zip(&dt_from_main)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err_t <= 1e-9 * scale_t, "temperature tendency drift {err_t:.3e}");

        for i in 0..2 {
            let scale_v = t_prim.dv[i].max_norm().max(1.0);
            let err_v = t_prim.dv[i].sub(&t_main.dv[i]).unwrap().max_norm();
            assert!(err_v <= 1e-9 * scale_v, "velocity tendency drift {err_v:.3e}");
        }
    }
}
