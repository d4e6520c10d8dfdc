//! The transformed fluctuation system in `(p, v, theta)`:
//!
//! ```text
//! g1(theta,ep)(dt p + v.grad p) + (1/eps) div v - (kappa/eps) B1 theta = Ups1
//! g2(theta,ep)(dt v + v.grad v) + (1/eps) grad p - mu B2 v             = 0
//! g3(theta,ep)(dt theta + v.grad theta) + div v - kappa B3 theta       = eps Ups3
//! ```
//!
//! with `B1 = chi1 div(beta grad .)`, `B2 = chi2 div(2 zeta D .) +
//! chi2 grad(eta div .)`, `B3 = chi3 div(beta grad .)`,
//! `Ups_i = chi_i F(theta, sqrt(mu) grad v)` and `F = Q`, the dissipation
//! source. Coefficients are evaluated pointwise at `(theta, eps p)`; every
//! nonlinear product is dealiased.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::coefficients::CoefficientSet;
use super::state::StateU;
use super::{
    advect_samples, diffusion_flux_div, dissipation_q_samples, field_from, ik, viscous_stress_div,
    vmax_samples, xi_sq_masked, Model, StiffScope, Tendencies,
};
use crate::error::Result;
use crate::params::ParamTriple;
use crate::spectral::{deriv, div, grad, SpectralField, SpectralGrid};

pub struct MainSystem {
    grid: Arc<SpectralGrid>,
    pub params: ParamTriple,
    pub coeffs: CoefficientSet,
}

impl MainSystem {
    pub fn new(grid: Arc<SpectralGrid>, params: ParamTriple, coeffs: CoefficientSet) -> Self {
        MainSystem {
            grid,
            params,
            coeffs,
        }
    }

    /// Full tendencies of the system at a state.
    pub fn rhs_main(&self, state: &StateU) -> Result<Tendencies> {
        let grid = state.grid().clone();
        let a = &self.params;
        let c = &self.coeffs;
        let npts = grid.len();
        let (eps, mu, kappa) = (a.eps, a.mu, a.kappa);

        let sp = state.p.samples();
        let sth = state.theta.samples();
        let mut g1 = vec![0.0; npts];
        let mut g2 = vec![0.0; npts];
        let mut g3 = vec![0.0; npts];
        let mut chi1 = vec![0.0; npts];
        let mut chi2 = vec![0.0; npts];
        let mut chi3 = vec![0.0; npts];
        let mut beta = vec![0.0; npts];
        let mut zeta = vec![0.0; npts];
        let mut eta = vec![0.0; npts];
        for i in 0..npts {
            let th = sth[i];
            let wp = eps * sp[i];
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

        let divv = div(&state.v)?;
        let divv_s = divv.samples();
        let gradp = grad(&state.p);

        let q_s = dissipation_q_samples(&state.v, &zeta, &eta, eps, mu, c.alpha);

        let thermal = if kappa > 0.0 {
            Some(diffusion_flux_div(&state.theta, &beta)?)
        } else {
            None
        };
        let viscous = if mu > 0.0 {
            Some(viscous_stress_div(&state.v, &zeta, &eta)?)
        } else {
            None
        };

        let adv_p = advect_samples(&state.v, &state.p);
        let adv_th = advect_samples(&state.v, &state.theta);

        let mut dp_s = vec![0.0; npts];
        let mut dth_s = vec![0.0; npts];
        for i in 0..npts {
            let q3 = thermal.as_ref().map_or(0.0, |t| t.samples()[i]);
            dp_s[i] = (chi1[i] * q_s[i] - divv_s[i] / eps + kappa / eps * chi1[i] * q3) / g1[i]
                - adv_p[i];
            dth_s[i] =
                (eps * chi3[i] * q_s[i] - divv_s[i] + kappa * chi3[i] * q3) / g3[i] - adv_th[i];
        }

        let mut dv = Vec::with_capacity(grid.dim());
        for i in 0..grid.dim() {
            let adv_vi = advect_samples(&state.v, &state.v[i]);
            let gpi = gradp[i].samples();
            let mut dvi = vec![0.0; npts];
            for pnt in 0..npts {
                let visc = viscous.as_ref().map_or(0.0, |v| v[i].samples()[pnt]);
                dvi[pnt] =
                    (mu * chi2[pnt] * visc - gpi[pnt] / eps) / g2[pnt] - adv_vi[pnt];
            }
            dv.push(field_from(&grid, dvi)?);
        }

        Ok(Tendencies {
            dp: field_from(&grid, dp_s)?,
            dv,
            dtheta: field_from(&grid, dth_s)?,
        })
    }

    fn ref_coeffs(&self) -> (f64, f64, f64, f64, f64, f64, f64, f64, f64) {
        let c = &self.coeffs;
        (
            (c.g1)(0.0, 0.0),
            (c.g2)(0.0, 0.0),
            (c.g3)(0.0, 0.0),
            (c.chi1)(0.0),
            (c.chi2)(0.0),
            (c.chi3)(0.0),
            (c.beta)(0.0),
            (c.zeta)(0.0),
            (c.eta)(0.0),
        )
    }
}

impl Model for MainSystem {
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
        Ok(self.rhs_main(&state)?.to_bundle())
    }

    fn stiff_matrix(&self, xi: &[f64], k: &[i64], scope: StiffScope) -> DMatrix<Complex64> {
        let d = self.grid.dim();
        let n = self.grid.points();
        let m = d + 2;
        let (eps, mu, kappa) = (self.params.eps, self.params.mu, self.params.kappa);
        let (g1, g2, g3, chi1, chi2, chi3, beta, zeta, eta) = self.ref_coeffs();
        let ksq = xi_sq_masked(xi, k, n);
        let mut l = DMatrix::<Complex64>::zeros(m, m);
        // p row: -(1/(eps g1)) div v + (kappa/(eps g1)) chi1 beta Delta theta
        for j in 0..d {
            l[(0, 1 + j)] = -ik(xi, k, n, j) / (eps * g1);
        }
        l[(0, 1 + d)] = Complex64::new(-kappa * chi1 * beta * ksq / (eps * g1), 0.0);
        // v rows: -(1/(eps g2)) grad p (+ reference viscosity)
        for i in 0..d {
            l[(1 + i, 0)] = -ik(xi, k, n, i) / (eps * g2);
        }
        if scope == StiffScope::Full && mu > 0.0 {
            let c = mu * chi2 / g2;
            for i in 0..d {
                for j in 0..d {
                    let mut v = ik(xi, k, n, i) * ik(xi, k, n, j) * (zeta + eta) * c;
                    if i == j {
                        v += Complex64::new(-c * zeta * ksq, 0.0);
                    }
                    l[(1 + i, 1 + j)] += v;
                }
            }
        }
        // theta row: O(1) terms, stiff only in Full scope
        if scope == StiffScope::Full {
            for j in 0..d {
                l[(1 + d, 1 + j)] = -ik(xi, k, n, j) / g3;
            }
            l[(1 + d, 1 + d)] = Complex64::new(-kappa * chi3 * beta * ksq / g3, 0.0);
        }
        l
    }

    fn advective_vmax(&self, fields: &[SpectralField]) -> f64 {
        let d = self.grid.dim();
        vmax_samples(&fields[1..1 + d])
    }

    fn soft_dt_limit(&self, fields: &[SpectralField]) -> f64 {
        let state = StateU::from_bundle(fields);
        let c = &self.coeffs;
        let (eps, mu, kappa) = (self.params.eps, self.params.mu, self.params.kappa);
        let (g1r, g2r, g3r, _, chi2r, chi3r, betar, zetar, etar) = self.ref_coeffs();
        let _ = g1r;
        let sp = state.p.samples();
        let sth = state.theta.samples();
        let mut var = 0.0f64;
        let ref3 = kappa * chi3r * betar / g3r;
        let ref2 = mu * chi2r * (2.0 * zetar + etar.abs()) / g2r;
        for i in 0..sp.len() {
            let th = sth[i];
            let wp = eps * sp[i];
            if kappa > 0.0 {
                let c3 = kappa * (c.chi3)(wp) * (c.beta)(th) / (c.g3)(th, wp);
                var = var.max((c3 - ref3).abs());
            }
            if mu > 0.0 {
                let c2 = mu * (c.chi2)(wp) * (2.0 * (c.zeta)(th) + (c.eta)(th).abs())
                    / (c.g2)(th, wp);
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

/// The skew-symmetric singular operator of the normal form, acting on
/// `(zeta, v, theta)` with coefficient fields `gamma1, gamma2`:
///
/// `S(U) = (gamma1 div v, grad(gamma1 zeta) + grad(gamma2 theta), gamma2 div v)`.
///
/// `<S U, U>_{L^2} = 0` holds to rounding for dealiased states because
/// `grad(gamma .)` and `-gamma div` are exact spectral adjoints.
pub fn singular_operator(
    gamma1: &SpectralField,
    gamma2: &SpectralField,
    zeta: &SpectralField,
    v: &[SpectralField],
    theta: &SpectralField,
) -> Result<(SpectralField, Vec<SpectralField>, SpectralField)> {
    let divv = div(v)?;
    let s_zeta = gamma1.mul_pointwise(&divv)?;
    let s_theta = gamma2.mul_pointwise(&divv)?;
    let g1z = gamma1.mul_pointwise(zeta)?;
    let g2t = gamma2.mul_pointwise(theta)?;
    let mut s_v = Vec::with_capacity(v.len());
    for axis in 0..v.len() {
        s_v.push(deriv(&g1z, axis).add(&deriv(&g2t, axis))?);
    }
    Ok((s_zeta, s_v, s_theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::coefficients::default_perfect_gas;
    use crate::spectral::{laplacian, make_grid, random_band_limited_field};
    use std::f64::consts::TAU;

    fn zero_state(grid: &Arc<SpectralGrid>) -> StateU {
        StateU::zero(grid)
    }

    #[test]
    fn equilibrium_tendencies_vanish() {
        let g = make_grid(2, 16, TAU).unwrap();
        let a = ParamTriple::new(0.25, 1.0, 1.0).unwrap();
        let sys = MainSystem::new(g.clone(), a, default_perfect_gas());
        let t = sys.rhs_main(&zero_state(&g)).unwrap();
        assert!(t.dp.max_norm() <= 1e-14);
        assert!(t.dtheta.max_norm() <= 1e-14);
        for dvi in &t.dv {
            assert!(dvi.max_norm() <= 1e-14);
        }
    }

    #[test]
    fn pressure_mode_drives_velocity() {
        // state (p = cos x1, v = 0, theta = 0), kappa = mu = 0:
        // dt p = 0, dt theta = 0, dt v = (sin x1 / (eps g2(0,0))) e1.
        let g = make_grid(2, 32, TAU).unwrap();
        let eps = 0.5;
        let a = ParamTriple::new(eps, 0.0, 0.0).unwrap();
        let c = default_perfect_gas();
        let g2_ref = (c.g2)(0.0, 0.0);
        let sys = MainSystem::new(g.clone(), a, c);
        let mut state = zero_state(&g);
        state.p = SpectralField::from_fn(&g, |x| x[0].cos());
        let t = sys.rhs_main(&state).unwrap();
        assert!(t.dp.max_norm() <= 1e-13);
        assert!(t.dtheta.max_norm() <= 1e-13);
        let expect = SpectralField::from_fn(&g, |x| x[0].sin() / (eps * g2_ref));
        assert!(t.dv[0].sub(&expect).unwrap().max_norm() <= 1e-11);
        assert!(t.dv[1].max_norm() <= 1e-13);
    }

    #[test]
    fn thermal_diffusion_matches_finite_difference_oracle() {
        // (p=0, v=0, theta = cos x), mu=0, kappa=1, perfect gas with k == 1:
        // dt theta = chi3(0) div(beta(theta) grad theta) / g3(theta, 0),
        // checked against a dense 4th-order finite-difference evaluation.
        let n = 512;
        let g = make_grid(1, n, TAU).unwrap();
        let a = ParamTriple::new(0.5, 0.0, 1.0).unwrap();
        let c = default_perfect_gas();
        let sys = MainSystem::new(g.clone(), a, c.clone());
        let mut state = zero_state(&g);
        state.theta = SpectralField::from_fn(&g, |x| x[0].cos());
        let t = sys.rhs_main(&state).unwrap();

        let h = TAU / n as f64;
        let th: Vec<f64> = state.theta.samples().to_vec();
        let at = |i: i64| th[(i.rem_euclid(n as i64)) as usize];
        // 4th-order central first derivative
        let d1 = |i: i64| (-at(i + 2) + 8.0 * at(i + 1) - 8.0 * at(i - 1) + at(i - 2)) / (12.0 * h);
        let mut oracle = vec![0.0; n];
        let flux: Vec<f64> = (0..n as i64).map(|i| (c.beta)(at(i)) * d1(i)).collect();
        let fat = |i: i64| flux[(i.rem_euclid(n as i64)) as usize];
        for (i, o) in oracle.iter_mut().enumerate() {
            let i = i as i64;
            let dflux =
                (-fat(i + 2) + 8.0 * fat(i + 1) - 8.0 * fat(i - 1) + fat(i - 2)) / (12.0 * h);
            let chi3 = (c.chi3)(0.0);
            let g3 = (c.g3)(at(i), 0.0);
            *o = chi3 * dflux / g3;
        }
        let scale = oracle.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let err: f64 = t
            .dtheta
            .samples()
            .iter()
            .zip(&oracle)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-6 * scale, "FD oracle mismatch: {err:.3e}");
    }

    #[test]
    fn singular_operator_is_skew() {
        let g = make_grid(2, 32, TAU).unwrap();
        let gamma1 = random_band_limited_field(21, &g, 4, 3.0, 0.3)
            .unwrap()
            .map_pointwise(|x| 1.0 + 0.5 * x.tanh());
        let gamma2 = random_band_limited_field(22, &g, 4, 3.0, 0.3)
            .unwrap()
            .map_pointwise(|x| 0.8 + 0.4 * x.tanh());
        for seed in 0..20 {
            let z = random_band_limited_field(100 + seed, &g, 10, 2.0, 1.0).unwrap();
            let v = vec![
                random_band_limited_field(200 + seed, &g, 10, 2.0, 1.0).unwrap(),
                random_band_limited_field(300 + seed, &g, 10, 2.0, 1.0).unwrap(),
            ];
            let th = random_band_limited_field(400 + seed, &g, 10, 2.0, 1.0).unwrap();
            let (sz, sv, sth) = singular_operator(&gamma1, &gamma2, &z, &v, &th).unwrap();
            let pairing = sz.inner(&z).unwrap()
                + sv[0].inner(&v[0]).unwrap()
                + sv[1].inner(&v[1]).unwrap()
                + sth.inner(&th).unwrap();
            let scale = z.l2_norm().powi(2)
                + v[0].l2_norm().powi(2)
                + v[1].l2_norm().powi(2)
                + th.l2_norm().powi(2);
            assert!(
                pairing.abs() <= 1e-10 * scale,
                "skew pairing {pairing:.3e} vs {scale:.3e}"
            );
        }
    }

    #[test]
    fn lemma_elliptic_lower_bound() {
        // -<zeta Lap u + eta grad div u, u> >= K1 m ||grad u||^2 - (K2 M^2/m) ||u||^2
        // with K2 = 25; fitted K1 must be >= 0.2 over 200 random samples.
        let g = make_grid(2, 32, TAU).unwrap();
        let mut fitted_k1 = f64::INFINITY;
        for seed in 0..200u64 {
            let zeta = random_band_limited_field(1000 + seed, &g, 3, 3.0, 0.25)
                .unwrap()
                .map_pointwise(|x| 0.6 + 0.4 * x.tanh());
            let eta = random_band_limited_field(2000 + seed, &g, 3, 3.0, 0.25)
                .unwrap()
                .map_pointwise(|x| -0.2 + 0.3 * x.tanh());
            let u = vec![
                random_band_limited_field(3000 + seed, &g, 8, 2.0, 1.0).unwrap(),
                random_band_limited_field(4000 + seed, &g, 8, 2.0, 1.0).unwrap(),
            ];
            let divu = div(&u).unwrap();
            let mut lhs = 0.0;
            for i in 0..2 {
                let lap = laplacian(&u[i]);
                let zl = zeta.mul_pointwise(&lap).unwrap();
                let ed = eta.mul_pointwise(&deriv(&divu, i)).unwrap();
                lhs -= zl.add(&ed).unwrap().inner(&u[i]).unwrap();
            }
            let m = zeta
                .samples()
                .iter()
                .zip(eta.samples())
                .map(|(&z, &e)| z.min(z + e))
                .fold(f64::INFINITY, f64::min);
            assert!(m > 0.0);
            let minf = |f: &SpectralField| {
                grad(f)
                    .iter()
                    .map(|d| d.max_norm())
                    .fold(0.0f64, f64::max)
            };
            let big_m = minf(&zeta) + minf(&eta);
            let grad_sq: f64 = u
                .iter()
                .map(|ui| grad(ui).iter().map(|d| d.l2_norm().powi(2)).sum::<f64>())
                .sum();
            let u_sq: f64 = u.iter().map(|ui| ui.l2_norm().powi(2)).sum();
            let k2 = 25.0;
            let k1 = (lhs + k2 * big_m * big_m / m * u_sq) / (m * grad_sq);
            fitted_k1 = fitted_k1.min(k1);
        }
        assert!(fitted_k1 >= 0.2, "fitted K1 = {fitted_k1}");
    }
}
