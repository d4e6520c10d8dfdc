//! The formal low-Mach limit system in `(v, theta)`:
//!
//! ```text
//! div v = kappa chi1(0) div(beta(theta) grad theta)
//! g2(theta,0)(dt v + v.grad v) + grad pi - mu B2(theta,0) v = 0
//! g3(theta,0)(dt theta + v.grad theta)
//!     - kappa (chi3(0) - chi1(0)) div(beta(theta) grad theta) = 0
//! ```
//!
//! The divergence constraint slaves `div v` to heat conduction; `pi` is the
//! Lagrange multiplier determined (up to a constant) by the compatibility
//! condition `d/dt(div v) = d/dt(constraint right side)`, a
//! variable-coefficient elliptic problem solved by preconditioned conjugate
//! gradients with the constant-coefficient inverse Laplacian as the
//! preconditioner. `kappa = 0` reduces to the incompressible constraint
//! `div v = 0`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::coefficients::CoefficientSet;
use super::{
    advect_samples, diffusion_flux_div, field_from, ik, viscous_stress_div, vmax_samples,
    xi_sq_masked, Model, StiffScope,
};
use crate::error::{Error, Result};
use crate::spectral::{deriv, div, grad, SpectralField, SpectralGrid};

pub struct LimitSystem {
    grid: Arc<SpectralGrid>,
    pub mu: f64,
    pub kappa: f64,
    pub coeffs: CoefficientSet,
    /// Relative residual target of the pressure solve.
    pub solver_tol: f64,
    /// Constraint-violation tolerance for incoming states.
    pub constraint_tol: f64,
}

/// Tendencies of the limit system plus the solved pressure field.
pub struct LimitTendencies {
    pub dv: Vec<SpectralField>,
    pub dtheta: SpectralField,
    pub pi: SpectralField,
}

impl LimitSystem {
    pub fn new(grid: Arc<SpectralGrid>, mu: f64, kappa: f64, coeffs: CoefficientSet) -> Self {
        LimitSystem {
            grid,
            mu,
            kappa,
            coeffs,
            solver_tol: 1e-10,
            constraint_tol: 1e-8,
        }
    }

    /// Residual field of the divergence constraint.
    pub fn constraint_residual(
        &self,
        v: &[SpectralField],
        theta: &SpectralField,
    ) -> Result<SpectralField> {
        let divv = div(v)?;
        if self.kappa == 0.0 {
            return Ok(divv);
        }
        let beta_s: Vec<f64> = theta.samples().iter().map(|&t| (self.coeffs.beta)(t)).collect();
        let heat = diffusion_flux_div(theta, &beta_s)?;
        divv.axpy(-self.kappa * (self.coeffs.chi1)(0.0), &heat)
    }

    pub fn rhs_limit(&self, v: &[SpectralField], theta: &SpectralField) -> Result<LimitTendencies> {
        let grid = self.grid.clone();
        let npts = grid.len();
        let c = &self.coeffs;
        let chi1_0 = (c.chi1)(0.0);
        let chi3_0 = (c.chi3)(0.0);
        let chi2_0 = (c.chi2)(0.0);

        let res = self.constraint_residual(v, theta)?;
        let scale = div(v)?.l2_norm().max(1.0);
        if res.l2_norm() > self.constraint_tol * scale {
            return Err(Error::ConstraintViolation {
                residual: res.l2_norm(),
                tolerance: self.constraint_tol * scale,
            });
        }

        let sth = theta.samples();
        let beta_s: Vec<f64> = sth.iter().map(|&t| (c.beta)(t)).collect();
        let g2_s: Vec<f64> = sth.iter().map(|&t| (c.g2)(t, 0.0)).collect();
        let g3_s: Vec<f64> = sth.iter().map(|&t| (c.g3)(t, 0.0)).collect();
        let zeta_s: Vec<f64> = sth.iter().map(|&t| (c.zeta)(t)).collect();
        let eta_s: Vec<f64> = sth.iter().map(|&t| (c.eta)(t)).collect();

        // theta equation
        let mut dth_s = advect_samples(v, theta);
        for x in dth_s.iter_mut() {
            *x = -*x;
        }
        if self.kappa > 0.0 {
            let heat = diffusion_flux_div(theta, &beta_s)?;
            let hs = heat.samples();
            for i in 0..npts {
                dth_s[i] += self.kappa * (chi3_0 - chi1_0) * hs[i] / g3_s[i];
            }
        }
        let dtheta = field_from(&grid, dth_s)?;

        // Velocity before the pressure correction: G = -v.grad v + mu B2 v / g2.
        let viscous = if self.mu > 0.0 {
            Some(viscous_stress_div(v, &zeta_s, &eta_s)?)
        } else {
            None
        };
        let mut g_fields = Vec::with_capacity(grid.dim());
        for i in 0..grid.dim() {
            let adv = advect_samples(v, &v[i]);
            let mut gi = vec![0.0; npts];
            for pnt in 0..npts {
                let visc = viscous.as_ref().map_or(0.0, |w| w[i].samples()[pnt]);
                gi[pnt] = -adv[pnt] + self.mu * chi2_0 * visc / g2_s[pnt];
            }
            g_fields.push(field_from(&grid, gi)?);
        }

        // Time derivative of the constraint right side, substituting dtheta:
        // R = kappa chi1(0) div(beta'(theta) dtheta grad theta + beta grad dtheta).
        let r_field = if self.kappa > 0.0 {
            let bp_s: Vec<f64> = sth.iter().map(|&t| c.beta_deriv(t)).collect();
            let dth_samples = dtheta.samples();
            let mut acc = SpectralField::zero(&grid);
            for axis in 0..grid.dim() {
                let gth = deriv(theta, axis);
                let gdth = deriv(&dtheta, axis);
                let flux: Vec<f64> = (0..npts)
                    .map(|i| {
                        bp_s[i] * dth_samples[i] * gth.samples()[i] + beta_s[i] * gdth.samples()[i]
                    })
                    .collect();
                acc = acc.add(&deriv(&field_from(&grid, flux)?, axis))?;
            }
            acc.scale(self.kappa * chi1_0)
        } else {
            SpectralField::zero(&grid)
        };

        // Solve div(g2^{-1} grad pi) = div(G) - R.
        let rhs = div(&g_fields)?.sub(&r_field)?;
        let inv_g2: Vec<f64> = g2_s.iter().map(|&g| 1.0 / g).collect();
        let pi = solve_variable_poisson(&grid, &inv_g2, &rhs, self.solver_tol)?;

        // dt v = G - grad(pi)/g2.
        let gpi = grad(&pi);
        let mut dv = Vec::with_capacity(grid.dim());
        for i in 0..grid.dim() {
            let mut s = g_fields[i].samples().to_vec();
            for (pnt, x) in s.iter_mut().enumerate() {
                *x -= gpi[i].samples()[pnt] * inv_g2[pnt];
            }
            dv.push(field_from(&grid, s)?);
        }
        Ok(LimitTendencies { dv, dtheta, pi })
    }
}

/// Solves `div(c grad pi) = rhs` on the torus for mean-zero `rhs`, returning
/// the mean-zero solution. `c` is a positive sample array. Preconditioned CG
/// on `-div(c grad .)` with preconditioner `(-c_mean Lap)^{-1}`.
pub fn solve_variable_poisson(
    grid: &Arc<SpectralGrid>,
    c_samples: &[f64],
    rhs: &SpectralField,
    rel_tol: f64,
) -> Result<SpectralField> {
    let apply = |p: &SpectralField| -> Result<SpectralField> {
        let mut acc = SpectralField::zero(grid);
        for axis in 0..grid.dim() {
            let gp = deriv(p, axis);
            let flux: Vec<f64> = gp
                .samples()
                .iter()
                .zip(c_samples)
                .map(|(&g, &c)| g * c)
                .collect();
            acc = acc.add(&deriv(&field_from(grid, flux)?, axis))?;
        }
        // negative definite -> return -A for SPD CG
        Ok(acc.scale(-1.0))
    };
    let c_mean = c_samples.iter().sum::<f64>() / c_samples.len() as f64;
    let precond = |r: &SpectralField| -> SpectralField {
        let mut out = r.coeffs().to_vec();
        for (flat, z) in out.iter_mut().enumerate() {
            let ksq = grid.xi_norm_sq(flat);
            if ksq > 0.0 {
                *z /= Complex64::new(c_mean * ksq, 0.0);
            } else {
                *z = Complex64::default();
            }
        }
        SpectralField::from_coeffs(grid, out)
    };

    let mut b = rhs.scale(-1.0);
    // project out the mean (solvability)
    b.coeffs_mut()[0] = Complex64::default();
    let b_norm = b.l2_norm();
    if b_norm == 0.0 {
        return Ok(SpectralField::zero(grid));
    }

    let mut x = SpectralField::zero(grid);
    let mut r = b.clone();
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = r.inner(&z)?;
    let max_iters = 512;
    for iter in 0..max_iters {
        if r.l2_norm() <= rel_tol * b_norm {
            return Ok(x);
        }
        let ap = apply(&p)?;
        let pap = p.inner(&ap)?;
        if pap <= 0.0 {
            return Err(Error::EllipticSolve {
                residual: r.l2_norm() / b_norm,
                iters: iter,
            });
        }
        let alpha = rz / pap;
        x = x.axpy(alpha, &p)?;
        r = r.axpy(-alpha, &ap)?;
        z = precond(&r);
        let rz_new = r.inner(&z)?;
        let beta = rz_new / rz;
        rz = rz_new;
        p = z.axpy(beta, &p)?;
    }
    if r.l2_norm() <= rel_tol * b_norm {
        Ok(x)
    } else {
        Err(Error::EllipticSolve {
            residual: r.l2_norm() / b_norm,
            iters: max_iters,
        })
    }
}

/// Projects raw data onto the limit constraint: returns `v + grad phi` with
/// `Lap phi = kappa chi1(0) div(beta(theta) grad theta) - div v`, making the
/// constraint exact to rounding.
pub fn project_well_prepared(
    v_raw: &[SpectralField],
    theta: &SpectralField,
    kappa: f64,
    coeffs: &CoefficientSet,
) -> Result<Vec<SpectralField>> {
    let grid = theta.grid().clone();
    let target = if kappa > 0.0 {
        let beta_s: Vec<f64> = theta.samples().iter().map(|&t| (coeffs.beta)(t)).collect();
        diffusion_flux_div(theta, &beta_s)?.scale(kappa * (coeffs.chi1)(0.0))
    } else {
        SpectralField::zero(&grid)
    };
    let rhs = target.sub(&div(v_raw)?)?;
    // phi = Lap^{-1} rhs (mean zero)
    let mut out = rhs.coeffs().to_vec();
    let n = grid.points() as i64;
    let mut k = [0i64; 3];
    for (flat, z) in out.iter_mut().enumerate() {
        grid.k_tuple(flat, &mut k);
        let mut ksq = 0.0;
        for (axis, &ki) in k[..grid.dim()].iter().enumerate() {
            if ki != -n / 2 {
                let xi = grid.xi_scale() * ki as f64;
                ksq += xi * xi;
            }
            let _ = axis;
        }
        if ksq > 0.0 {
            *z /= Complex64::new(-ksq, 0.0);
        } else {
            *z = Complex64::default();
        }
    }
    let phi = SpectralField::from_coeffs(&grid, out);
    let gphi = grad(&phi);
    v_raw
        .iter()
        .zip(&gphi)
        .map(|(vi, gi)| vi.add(gi))
        .collect()
}

impl Model for LimitSystem {
    fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    fn n_fields(&self) -> usize {
        self.grid.dim() + 1
    }

    fn field_names(&self) -> Vec<String> {
        let mut names: Vec<String> = (0..self.grid.dim()).map(|i| format!("v{}", i + 1)).collect();
        names.push("theta".to_string());
        names
    }

    fn rhs(&self, fields: &[SpectralField], _t: f64) -> Result<Vec<SpectralField>> {
        let d = self.grid.dim();
        let t = self.rhs_limit(&fields[..d], &fields[d])?;
        let mut out = t.dv;
        out.push(t.dtheta);
        Ok(out)
    }

    fn stiff_matrix(&self, xi: &[f64], k: &[i64], scope: StiffScope) -> DMatrix<Complex64> {
        let d = self.grid.dim();
        let n = self.grid.points();
        let m = d + 1;
        let mut l = DMatrix::<Complex64>::zeros(m, m);
        if scope == StiffScope::SingularOnly {
            return l; // no 1/eps terms in the limit system
        }
        let c = &self.coeffs;
        let ksq = xi_sq_masked(xi, k, n);
        let g2 = (c.g2)(0.0, 0.0);
        let g3 = (c.g3)(0.0, 0.0);
        let beta0 = (c.beta)(0.0);
        let zeta0 = (c.zeta)(0.0);
        let eta0 = (c.eta)(0.0);
        if self.mu > 0.0 {
            let cvis = self.mu * (c.chi2)(0.0) / g2;
            for i in 0..d {
                for j in 0..d {
                    let mut v = ik(xi, k, n, i) * ik(xi, k, n, j) * (zeta0 + eta0) * cvis;
                    if i == j {
                        v += Complex64::new(-cvis * zeta0 * ksq, 0.0);
                    }
                    l[(i, j)] += v;
                }
            }
        }
        if self.kappa > 0.0 {
            let cth = self.kappa * ((c.chi3)(0.0) - (c.chi1)(0.0)) * beta0 / g3;
            l[(d, d)] = Complex64::new(-cth * ksq, 0.0);
        }
        l
    }

    fn advective_vmax(&self, fields: &[SpectralField]) -> f64 {
        vmax_samples(&fields[..self.grid.dim()])
    }

    fn soft_dt_limit(&self, fields: &[SpectralField]) -> f64 {
        let d = self.grid.dim();
        let theta = &fields[d];
        let c = &self.coeffs;
        let mut var = 0.0f64;
        let ref3 =
            self.kappa * ((c.chi3)(0.0) - (c.chi1)(0.0)) * (c.beta)(0.0) / (c.g3)(0.0, 0.0);
        let ref2 = self.mu * (c.chi2)(0.0) * (2.0 * (c.zeta)(0.0) + (c.eta)(0.0).abs())
            / (c.g2)(0.0, 0.0);
        for &t in theta.samples() {
            if self.kappa > 0.0 {
                let c3 =
                    self.kappa * ((c.chi3)(0.0) - (c.chi1)(0.0)) * (c.beta)(t) / (c.g3)(t, 0.0);
                var = var.max((c3 - ref3).abs());
            }
            if self.mu > 0.0 {
                let c2 = self.mu * (c.chi2)(0.0) * (2.0 * (c.zeta)(t) + (c.eta)(t).abs())
                    / (c.g2)(t, 0.0);
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
    use crate::spectral::{make_grid, random_band_limited_field};
    use std::f64::consts::TAU;

    #[test]
    fn zero_state_zero_tendency_constant_pressure() {
        let g = make_grid(2, 16, TAU).unwrap();
        let sys = LimitSystem::new(g.clone(), 0.0, 1.0, default_perfect_gas());
        let v = vec![SpectralField::zero(&g), SpectralField::zero(&g)];
        let th = SpectralField::zero(&g);
        let t = sys.rhs_limit(&v, &th).unwrap();
        assert!(t.dtheta.max_norm() <= 1e-14);
        for dvi in &t.dv {
            assert!(dvi.max_norm() <= 1e-14);
        }
        assert!(t.pi.max_norm() <= 1e-12); // constant (zero) up to solver tol
    }

    #[test]
    fn solenoidal_mode_preserves_divergence() {
        // theta = 0, mu = 0: single solenoidal mode; dt(div v) must vanish.
        let g = make_grid(2, 32, TAU).unwrap();
        let sys = LimitSystem::new(g.clone(), 0.0, 1.0, default_perfect_gas());
        // v = (sin x2, 0): div v = 0.
        let v = vec![
            SpectralField::from_fn(&g, |x| x[1].sin()),
            SpectralField::zero(&g),
        ];
        let th = SpectralField::zero(&g);
        let t = sys.rhs_limit(&v, &th).unwrap();
        let ddivv = div(&t.dv).unwrap();
        assert!(
            ddivv.l2_norm() <= 1e-10,
            "constraint drift {}",
            ddivv.l2_norm()
        );
    }

    #[test]
    fn kappa_zero_is_incompressible_constraint() {
        let g = make_grid(2, 16, TAU).unwrap();
        let sys = LimitSystem::new(g.clone(), 1.0, 0.0, default_perfect_gas());
        // compressible mode violates the constraint
        let v = vec![
            SpectralField::from_fn(&g, |x| x[0].sin()),
            SpectralField::zero(&g),
        ];
        let th = SpectralField::zero(&g);
        assert!(matches!(
            sys.rhs_limit(&v, &th),
            Err(Error::ConstraintViolation { .. })
        ));
    }

    #[test]
    fn projection_enforces_constraint() {
        let g = make_grid(2, 32, TAU).unwrap();
        let c = default_perfect_gas();
        let kappa = 1.0;
        let v_raw = vec![
            random_band_limited_field(31, &g, 8, 3.0, 0.5).unwrap(),
            random_band_limited_field(32, &g, 8, 3.0, 0.5).unwrap(),
        ];
        let theta = random_band_limited_field(33, &g, 6, 4.0, 0.2).unwrap();
        let v = project_well_prepared(&v_raw, &theta, kappa, &c).unwrap();
        let sys = LimitSystem::new(g.clone(), 1.0, kappa, c);
        let res = sys.constraint_residual(&v, &theta).unwrap();
        assert!(res.l2_norm() <= 1e-12, "residual {}", res.l2_norm());
        // and the general rhs keeps it invariant
        let t = sys.rhs_limit(&v, &theta).unwrap();
        // d/dt residual = div dv - R where R built from dtheta; recompute both
        let ddivv = div(&t.dv).unwrap();
        // finite check: |div dv| should match the constraint transport term,
        // i.e. the full residual derivative is small relative to |div dv|.
        let beta_s: Vec<f64> = theta
            .samples()
            .iter()
            .map(|&x| (sys.coeffs.beta)(x))
            .collect();
        let bp_s: Vec<f64> = theta
            .samples()
            .iter()
            .map(|&x| sys.coeffs.beta_deriv(x))
            .collect();
        let mut r = SpectralField::zero(&g);
        for axis in 0..2 {
            let gth = deriv(&theta, axis);
            let gdth = deriv(&t.dtheta, axis);
            let flux: Vec<f64> = (0..g.len())
                .map(|i| {
                    bp_s[i] * t.dtheta.samples()[i] * gth.samples()[i]
                        + beta_s[i] * gdth.samples()[i]
                })
                .collect();
            r = r
                .add(&deriv(&field_from(&g, flux).unwrap(), axis))
                .unwrap();
        }
        let r = r.scale(kappa * (sys.coeffs.chi1)(0.0));
        let drift = ddivv.sub(&r).unwrap().l2_norm();
        let scale = ddivv.l2_norm().max(1.0);
        assert!(drift <= 1e-8 * scale, "constraint derivative drift {drift}");
    }

    #[test]
    fn variable_poisson_solver_matches_constant_case() {
        let g = make_grid(2, 32, TAU).unwrap();
        let rhs = random_band_limited_field(44, &g, 8, 2.0, 1.0).unwrap();
        let c = vec![2.0; g.len()];
        let pi = solve_variable_poisson(&g, &c, &rhs, 1e-12).unwrap();
        // 2 Lap pi = rhs
        let check = crate::spectral::laplacian(&pi).scale(2.0);
        let err = check.sub(&rhs).unwrap().l2_norm();
        assert!(err <= 1e-9 * rhs.l2_norm(), "poisson error {err}");
    }
}
