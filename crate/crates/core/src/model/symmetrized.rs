//! Symmetrized cross-check formulation in `(rho, v, theta)` with
//! `rho = varrho(theta, eps p)`:
//!
//! ```text
//! delta1 (dt rho + v.grad rho) + gamma1 div v                          = 0
//! delta2 (dt v + v.grad v) + gamma1 grad rho + gamma2 grad theta
//!     - eps^2 mu B2 v                                                  = 0
//! delta3 (dt theta + v.grad theta) + gamma2 div v - kappa gamma2 B3 theta
//!                                                                      = eps gamma2 Ups3
//! ```
//!
//! with `gamma1 = 1/g1`, `gamma2 = chi1 g3 / (chi3 g1)`,
//! `delta1 = chi3 gamma1 / (chi3 - chi1)`, `delta2 = eps^2 g2`,
//! `delta3 = gamma2 g3`, all evaluated at `(theta, wp)` where
//! `wp = P(theta, rho)` inverts the density potential. The off-diagonal
//! first-order blocks pair `gamma1` between the `rho` and `v` equations and
//! `gamma2` between `theta` and `v`, which is the symmetric-hyperbolic
//! arrangement; the dissipation sources cancel exactly in the `rho`
//! equation. Trajectories transformed back to `(p, v, theta)` must agree
//! with the main formulation.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::coefficients::CoefficientSet;
use super::{
    advect_samples, diffusion_flux_div, dissipation_q_samples, field_from, ik,
    viscous_stress_div, vmax_samples, xi_sq_masked, Model, StiffScope, Tendencies,
};
use crate::error::{Error, Result};
use crate::params::ParamTriple;
use crate::spectral::{div, grad, SpectralField, SpectralGrid};

pub struct SymmetrizedSystem {
    grid: Arc<SpectralGrid>,
    pub params: ParamTriple,
    pub coeffs: CoefficientSet,
}

impl SymmetrizedSystem {
    pub fn new(
        grid: Arc<SpectralGrid>,
        params: ParamTriple,
        coeffs: CoefficientSet,
    ) -> Result<Self> {
        if coeffs.varrho.is_none() || coeffs.pressure_of.is_none() {
            return Err(Error::InvalidParameter(
                "symmetrized formulation requires the density potential varrho and its inverse"
                    .into(),
            ));
        }
        Ok(SymmetrizedSystem {
            grid,
            params,
            coeffs,
        })
    }

    /// Maps a fluctuation state `(p, v, theta)` to `(rho, v, theta)`.
    pub fn density_from_pressure(&self, p: &SpectralField, theta: &SpectralField) -> SpectralField {
        let varrho = self.coeffs.varrho.as_ref().expect("checked in new");
        let eps = self.params.eps;
        let s: Vec<f64> = p
            .samples()
            .iter()
            .zip(theta.samples())
            .map(|(&pp, &th)| varrho(th, eps * pp))
            .collect();
        SpectralField::from_samples(p.grid(), &s).expect("lengths match")
    }

    /// Maps `(rho, theta)` back to the pressure fluctuation `p = wp/eps`.
    pub fn pressure_from_density(
        &self,
        rho: &SpectralField,
        theta: &SpectralField,
    ) -> SpectralField {
        let pof = self.coeffs.pressure_of.as_ref().expect("checked in new");
        let eps = self.params.eps;
        let s: Vec<f64> = rho
            .samples()
            .iter()
            .zip(theta.samples())
            .map(|(&r, &th)| pof(th, r) / eps)
            .collect();
        SpectralField::from_samples(rho.grid(), &s).expect("lengths match")
    }

    pub fn rhs_symmetrized(
        &self,
        rho: &SpectralField,
        v: &[SpectralField],
        theta: &SpectralField,
    ) -> Result<Tendencies> {
        let grid = self.grid.clone();
        let npts = grid.len();
        let c = &self.coeffs;
        let pof = c.pressure_of.as_ref().expect("checked in new");
        let (eps, mu, kappa) = (self.params.eps, self.params.mu, self.params.kappa);

        let srho = rho.samples();
        let sth = theta.samples();
        let mut chi1 = vec![0.0; npts];
        let mut chi2 = vec![0.0; npts];
        let mut chi3 = vec![0.0; npts];
        let mut g1 = vec![0.0; npts];
        let mut g2 = vec![0.0; npts];
        let mut g3 = vec![0.0; npts];
        let mut beta = vec![0.0; npts];
        let mut zeta = vec![0.0; npts];
        let mut eta = vec![0.0; npts];
        for i in 0..npts {
            let th = sth[i];
            let wp = pof(th, srho[i]);
            g1[i] = (c.g1)(th, wp);
            g2[i] = (c.g2)(th, wp);
            g3[i] = (c.g3)(th, wp);
            chi1[i] = (c.chi1)(wp);
            chi2[i] = (c.chi2)(wp);
            chi3[i] = (c.chi3)(wp);
            beta[i] = (c.beta)(th);
            zeta[i] = (c.zeta)(th);
            eta[i] = (c.eta)(th);
        }

        let divv = div(v)?;
        let divv_s = divv.samples();
        let grho = grad(rho);
        let gth = grad(theta);

        let q_s = dissipation_q_samples(v, &zeta, &eta, eps, mu, c.alpha);
        let thermal = if kappa > 0.0 {
            Some(diffusion_flux_div(theta, &beta)?)
        } else {
            None
        };
        let viscous = if mu > 0.0 {
            Some(viscous_stress_div(v, &zeta, &eta)?)
        } else {
            None
        };

        // rho equation: dt rho = -v.grad rho - (1 - chi1/chi3) div v
        // (the Ups sources cancel exactly).
        let adv_rho = advect_samples(v, rho);
        let mut drho_s = vec![0.0; npts];
        for i in 0..npts {
            drho_s[i] = -adv_rho[i] - (1.0 - chi1[i] / chi3[i]) * divv_s[i];
        }

        // theta equation (gamma2 cancels against delta3 = gamma2 g3).
        let adv_th = advect_samples(v, theta);
        let mut dth_s = vec![0.0; npts];
        for i in 0..npts {
            let heat = thermal.as_ref().map_or(0.0, |t| t.samples()[i]);
            dth_s[i] =
                (eps * chi3[i] * q_s[i] + kappa * chi3[i] * heat - divv_s[i]) / g3[i] - adv_th[i];
        }

        // v equation: dt v = -v.grad v - (gamma1 grad rho + gamma2 grad theta)/(eps^2 g2)
        //             + mu chi2 (stress)/g2.
        let mut dv = Vec::with_capacity(grid.dim());
        for i in 0..grid.dim() {
            let adv_vi = advect_samples(v, &v[i]);
            let gri = grho[i].samples();
            let gti = gth[i].samples();
            let mut s = vec![0.0; npts];
            for pnt in 0..npts {
                let gamma1 = 1.0 / g1[pnt];
                let gamma2 = chi1[pnt] * g3[pnt] / (chi3[pnt] * g1[pnt]);
                let visc = viscous.as_ref().map_or(0.0, |w| w[i].samples()[pnt]);
                s[pnt] = -adv_vi[pnt]
                    + (mu * chi2[pnt] * visc
                        - (gamma1 * gri[pnt] + gamma2 * gti[pnt]) / (eps * eps))
                        / g2[pnt];
            }
            dv.push(field_from(&grid, s)?);
        }

        Ok(Tendencies {
            dp: field_from(&grid, drho_s)?,
            dv,
            dtheta: field_from(&grid, dth_s)?,
        })
    }

    /// Positivity of the symmetrizer weights `delta1, delta2, delta3` over a
    /// sample box in `(theta, rho)`.
    pub fn check_symmetrizer_positivity(&self, range: f64, n: usize) -> bool {
        let c = &self.coeffs;
        let pof = c.pressure_of.as_ref().expect("checked in new");
        let eps = self.params.eps;
        for i in 0..n {
            for j in 0..n {
                let th = -range + 2.0 * range * i as f64 / (n - 1) as f64;
                let rho = -range + 2.0 * range * j as f64 / (n - 1) as f64;
                let wp = pof(th, rho);
                let g1 = (c.g1)(th, wp);
                let g2 = (c.g2)(th, wp);
                let g3 = (c.g3)(th, wp);
                let chi1 = (c.chi1)(wp);
                let chi3 = (c.chi3)(wp);
                let gamma1 = 1.0 / g1;
                let gamma2 = chi1 * g3 / (chi3 * g1);
                let delta1 = chi3 * gamma1 / (chi3 - chi1);
                let delta2 = eps * eps * g2;
                let delta3 = gamma2 * g3;
                if !(delta1 > 0.0 && delta2 > 0.0 && delta3 > 0.0) {
                    return false;
                }
            }
        }
        true
    }
}

impl Model for SymmetrizedSystem {
    fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    fn n_fields(&self) -> usize {
        self.grid.dim() + 2
    }

    fn field_names(&self) -> Vec<String> {
        let mut names = vec!["rho".to_string()];
        for i in 0..self.grid.dim() {
            names.push(format!("v{}", i + 1));
        }
        names.push("theta".to_string());
        names
    }

    fn rhs(&self, fields: &[SpectralField], _t: f64) -> Result<Vec<SpectralField>> {
        let d = self.grid.dim();
        let t = self.rhs_symmetrized(&fields[0], &fields[1..1 + d], &fields[1 + d])?;
        Ok(t.to_bundle())
    }

    fn stiff_matrix(&self, xi: &[f64], k: &[i64], scope: StiffScope) -> DMatrix<Complex64> {
        let d = self.grid.dim();
        let n = self.grid.points();
        let m = d + 2;
        let c = &self.coeffs;
        let (eps, mu, kappa) = (self.params.eps, self.params.mu, self.params.kappa);
        let g1 = (c.g1)(0.0, 0.0);
        let g2 = (c.g2)(0.0, 0.0);
        let g3 = (c.g3)(0.0, 0.0);
        let chi1 = (c.chi1)(0.0);
        let chi2 = (c.chi2)(0.0);
        let chi3 = (c.chi3)(0.0);
        let beta0 = (c.beta)(0.0);
        let zeta0 = (c.zeta)(0.0);
        let eta0 = (c.eta)(0.0);
        let gamma1 = 1.0 / g1;
        let gamma2 = chi1 * g3 / (chi3 * g1);
        let ksq = xi_sq_masked(xi, k, n);
        let mut l = DMatrix::<Complex64>::zeros(m, m);
        // rho row
        for j in 0..d {
            l[(0, 1 + j)] = -ik(xi, k, n, j) * (1.0 - chi1 / chi3);
        }
        // v rows: 1/eps^2 gradients always stiff
        for i in 0..d {
            l[(1 + i, 0)] = -ik(xi, k, n, i) * gamma1 / (eps * eps * g2);
            l[(1 + i, 1 + d)] = -ik(xi, k, n, i) * gamma2 / (eps * eps * g2);
        }
        if scope == StiffScope::Full {
            if mu > 0.0 {
                let cvis = mu * chi2 / g2;
                for i in 0..d {
                    for j in 0..d {
                        let mut v = ik(xi, k, n, i) * ik(xi, k, n, j) * (zeta0 + eta0) * cvis;
                        if i == j {
                            v += Complex64::new(-cvis * zeta0 * ksq, 0.0);
                        }
                        l[(1 + i, 1 + j)] += v;
                    }
                }
            }
            for j in 0..d {
                l[(1 + d, 1 + j)] = -ik(xi, k, n, j) / g3;
            }
            l[(1 + d, 1 + d)] = Complex64::new(-kappa * chi3 * beta0 * ksq / g3, 0.0);
        }
        l
    }

    fn advective_vmax(&self, fields: &[SpectralField]) -> f64 {
        let d = self.grid.dim();
        vmax_samples(&fields[1..1 + d])
    }

    fn soft_dt_limit(&self, fields: &[SpectralField]) -> f64 {
        let d = self.grid.dim();
        let theta = &fields[1 + d];
        let c = &self.coeffs;
        let (mu, kappa) = (self.params.mu, self.params.kappa);
        let ref3 = kappa * (c.chi3)(0.0) * (c.beta)(0.0) / (c.g3)(0.0, 0.0);
        let ref2 = mu * (c.chi2)(0.0) * (2.0 * (c.zeta)(0.0) + (c.eta)(0.0).abs())
            / (c.g2)(0.0, 0.0);
        let mut var = 0.0f64;
        for &t in theta.samples() {
            if kappa > 0.0 {
                let c3 = kappa * (c.chi3)(0.0) * (c.beta)(t) / (c.g3)(t, 0.0);
                var = var.max((c3 - ref3).abs());
            }
            if mu > 0.0 {
                let c2 =
                    mu * (c.chi2)(0.0) * (2.0 * (c.zeta)(t) + (c.eta)(t).abs()) / (c.g2)(t, 0.0);
                var = var.max((c2 - ref2).abs());
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
    use crate::model::coefficients::default_perfect_gas;
    use crate::model::state::StateU;
    use crate::model::MainSystem;
    use crate::spectral::{make_grid, random_band_limited_field};
    use std::f64::consts::TAU;

    #[test]
    fn zero_state_zero_tendency() {
        let g = make_grid(2, 16, TAU).unwrap();
        let a = ParamTriple::new(0.5, 1.0, 1.0).unwrap();
        let sys = SymmetrizedSystem::new(g.clone(), a, default_perfect_gas()).unwrap();
        let z = SpectralField::zero(&g);
        let v = vec![SpectralField::zero(&g), SpectralField::zero(&g)];
        let t = sys.rhs_symmetrized(&z, &v, &z).unwrap();
        assert!(t.dp.max_norm() <= 1e-14);
        assert!(t.dtheta.max_norm() <= 1e-14);
    }

    #[test]
    fn missing_varrho_rejected() {
        let g = make_grid(2, 16, TAU).unwrap();
        let a = ParamTriple::new(0.5, 0.0, 0.0).unwrap();
        let mut c = default_perfect_gas();
        c.varrho = None;
        assert!(SymmetrizedSystem::new(g, a, c).is_err());
    }

    #[test]
    fn symmetrizer_weights_positive_for_perfect_gas() {
        let g = make_grid(2, 16, TAU).unwrap();
        let a = ParamTriple::new(0.5, 0.5, 0.5).unwrap();
        let sys = SymmetrizedSystem::new(g, a, default_perfect_gas()).unwrap();
        assert!(sys.check_symmetrizer_positivity(1.0, 40));
    }

    #[test]
    fn density_pressure_maps_invert() {
        let g = make_grid(2, 16, TAU).unwrap();
        let a = ParamTriple::new(0.5, 0.0, 0.0).unwrap();
        let sys = SymmetrizedSystem::new(g.clone(), a, default_perfect_gas()).unwrap();
        let p = random_band_limited_field(3, &g, 5, 3.0, 0.4).unwrap();
        let th = random_band_limited_field(4, &g, 5, 3.0, 0.3).unwrap();
        let rho = sys.density_from_pressure(&p, &th);
        let p2 = sys.pressure_from_density(&rho, &th);
        assert!(p.sub(&p2).unwrap().max_norm() <= 1e-12);
    }

    #[test]
    fn tendencies_consistent_with_main_formulation() {
        // The density tendency must equal the chain rule
        // d(rho)/dt = d_theta(varrho) dtheta + d_wp(varrho) eps dp applied to
        // the main-system tendencies at the matching state.
        let g = make_grid(2, 32, TAU).unwrap();
        let eps = 0.5;
        let a = ParamTriple::new(eps, 1.0, 1.0).unwrap();
        let c = default_perfect_gas();
        let gamma = 1.0 + 1.0 / 1.5;
        let main = MainSystem::new(g.clone(), a, c.clone());
        let sym = SymmetrizedSystem::new(g.clone(), a, c).unwrap();

        let state = StateU::new(
            random_band_limited_field(7, &g, 5, 4.0, 0.3).unwrap(),
            vec![
                random_band_limited_field(8, &g, 5, 4.0, 0.2).unwrap(),
                random_band_limited_field(9, &g, 5, 4.0, 0.2).unwrap(),
            ],
            random_band_limited_field(10, &g, 5, 4.0, 0.2).unwrap(),
        )
        .unwrap();
        let rho = sym.density_from_pressure(&state.p, &state.theta);

        let tm = main.rhs_main(&state).unwrap();
        let ts = sym.rhs_symmetrized(&rho, &state.v, &state.theta).unwrap();

        // chain rule for the perfect gas: drho = (eps dp - dtheta)/gamma
        let expect: Vec<f64> = tm
            .dp
            .samples()
            .iter()
            .zip(tm.dtheta.samples())
            .map(|(&dp, &dth)| (eps * dp - dth) / gamma)
            .collect();
        let scale = ts.dp.max_norm().max(1.0);
        let err: f64 = ts
            .dp
            .samples()
            .iter()
            .zip(&expect)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-9 * scale, "density tendency drift {err:.2e}");

        // theta tendencies agree directly
        let err_th = ts.dtheta.sub(&tm.dtheta).unwrap().max_norm();
        assert!(err_th <= 1e-9 * tm.dtheta.max_norm().max(1.0));

        // velocity tendencies agree (eps grad p = gamma1 grad rho + gamma2 grad theta)
        for i in 0..2 {
            let err_v = ts.dv[i].sub(&tm.dv[i]).unwrap().max_norm();
            assert!(
                err_v <= 1e-9 * tm.dv[i].max_norm().max(1.0),
                "velocity drift {err_v:.2e}"
            );
        }
    }
}
