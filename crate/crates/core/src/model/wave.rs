//! The scaled wave equation with variable coefficients,
//!
//! `eps^2 dt(a(t,x) dt u) - div(b(t,x) grad u) = c(t,x)`,
//!
//! integrated as the first-order system `(u, w = dt u)`:
//!
//! `dt u = w`, `dt w = (div(b grad u) + c - eps^2 (dt a) w) / (a eps^2)`.
//!
//! Coefficients must stay above a positive floor; time-varying coefficients
//! are supplied as closures of `t`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{diffusion_flux_div, field_from, xi_sq_masked, Model, StiffScope};
use crate::error::{Error, Result};
use crate::spectral::{SpectralField, SpectralGrid};

type CoefFn = Arc<dyn Fn(f64) -> SpectralField + Send + Sync>;

/// Coefficient provider for the wave model. The static constructor covers
/// time-independent profiles (then `dt a = 0`).
#[derive(Clone)]
pub struct WaveCoefficients {
    a: CoefFn,
    da_dt: Option<CoefFn>,
    b: CoefFn,
    forcing: Option<CoefFn>,
}

impl WaveCoefficients {
    pub fn static_fields(a: SpectralField, b: SpectralField) -> Self {
        WaveCoefficients {
            a: Arc::new(move |_| a.clone()),
            da_dt: None,
            b: Arc::new(move |_| b.clone()),
            forcing: None,
        }
    }

    pub fn with_forcing(mut self, c: impl Fn(f64) -> SpectralField + Send + Sync + 'static) -> Self {
        self.forcing = Some(Arc::new(c));
        self
    }

    pub fn with_time_derivative(
        mut self,
        da: impl Fn(f64) -> SpectralField + Send + Sync + 'static,
    ) -> Self {
        self.da_dt = Some(Arc::new(da));
        self
    }
}

pub struct WaveSystem {
    grid: Arc<SpectralGrid>,
    pub eps: f64,
    pub coeffs: WaveCoefficients,
    /// Positive floor both coefficient fields must respect.
    pub floor: f64,
    /// Constant reference values entering the stiff symbol.
    a_ref: f64,
    b_ref: f64,
}

impl WaveSystem {
    pub fn new(
        grid: Arc<SpectralGrid>,
        eps: f64,
        coeffs: WaveCoefficients,
        floor: f64,
    ) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "wave system requires eps > 0, got {eps}"
            )));
        }
        let a0 = (coeffs.a)(0.0);
        let b0 = (coeffs.b)(0.0);
        for (name, f) in [("a", &a0), ("b", &b0)] {
            let m = f.samples().iter().fold(f64::INFINITY, |acc, &x| acc.min(x));
            if m < floor {
                return Err(Error::InvalidParameter(format!(
                    "coefficient {name} falls to {m:.3e}, below the floor {floor:.3e}"
                )));
            }
        }
        let a_ref = a0.mean();
        let b_ref = b0.mean();
        Ok(WaveSystem {
            grid,
            eps,
            coeffs,
            floor,
            a_ref,
            b_ref,
        })
    }

    pub fn rhs_wave(&self, u: &SpectralField, w: &SpectralField, t: f64) -> Result<(SpectralField, SpectralField)> {
        let grid = self.grid.clone();
        let a_f = (self.coeffs.a)(t);
        let b_f = (self.coeffs.b)(t);
        let a_s = a_f.samples();
        let amin = a_s.iter().fold(f64::INFINITY, |acc, &x| acc.min(x));
        if amin < self.floor {
            return Err(Error::NonPhysicalState(format!(
                "wave coefficient a dips to {amin:.3e}"
            )));
        }
        let flux = diffusion_flux_div(u, b_f.samples())?;
        let eps2 = self.eps * self.eps;
        let c_s: Option<&[f64]> = None;
        let forcing = self.coeffs.forcing.as_ref().map(|f| f(t));
        let da = self.coeffs.da_dt.as_ref().map(|f| f(t));
        let mut dw = vec![0.0; grid.len()];
        let ws = w.samples();
        for (i, o) in dw.iter_mut().enumerate() {
            let mut num = flux.samples()[i];
            if let Some(f) = &forcing {
                num += f.samples()[i];
            }
            if let Some(cs) = c_s {
                num += cs[i];
            }
            if let Some(dad) = &da {
                num -= eps2 * dad.samples()[i] * ws[i];
            }
            *o = num / (a_s[i] * eps2);
        }
        Ok((w.clone(), field_from(&grid, dw)?))
    }

    /// Windowed local energy `mean over {|x - x0| < r} of (eps w)^2 + b |grad u|^2`.
    pub fn windowed_energy(
        &self,
        u: &SpectralField,
        w: &SpectralField,
        t: f64,
        center: &[f64],
        radius: f64,
    ) -> f64 {
        let grid = self.grid.clone();
        let b_f = (self.coeffs.b)(t);
        let gu: Vec<SpectralField> = crate::spectral::grad(u);
        let mut x = [0.0f64; 3];
        let length = grid.box_length();
        let mut acc = 0.0;
        for i in 0..grid.len() {
            grid.coords(i, &mut x);
            let mut dist_sq = 0.0;
            for ax in 0..grid.dim() {
                let mut dx = (x[ax] - center[ax]).abs();
                dx = dx.min(length - dx); // periodic distance
                dist_sq += dx * dx;
            }
            if dist_sq < radius * radius {
                let mut g2 = 0.0;
                for gui in &gu {
                    g2 += gui.samples()[i] * gui.samples()[i];
                }
                acc += (self.eps * w.samples()[i]).powi(2) + b_f.samples()[i] * g2;
            }
        }
        acc / grid.len() as f64
    }

    /// Total wave energy `mean of a (eps w)^2 + b |grad u|^2` (conserved for
    /// time-independent coefficients and zero forcing).
    pub fn total_energy(&self, u: &SpectralField, w: &SpectralField, t: f64) -> f64 {
        let a_f = (self.coeffs.a)(t);
        let b_f = (self.coeffs.b)(t);
        let gu = crate::spectral::grad(u);
        let mut acc = 0.0;
        let n = self.grid.len();
        for i in 0..n {
            let mut g2 = 0.0;
            for gui in &gu {
                g2 += gui.samples()[i] * gui.samples()[i];
            }
            acc += a_f.samples()[i] * (self.eps * w.samples()[i]).powi(2)
                + b_f.samples()[i] * g2;
        }
        acc / n as f64
    }
}

impl Model for WaveSystem {
    fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    fn n_fields(&self) -> usize {
        2
    }

    fn field_names(&self) -> Vec<String> {
        vec!["u".to_string(), "w".to_string()]
    }

    fn rhs(&self, fields: &[SpectralField], t: f64) -> Result<Vec<SpectralField>> {
        let (du, dw) = self.rhs_wave(&fields[0], &fields[1], t)?;
        Ok(vec![du, dw])
    }

    fn stiff_matrix(&self, xi: &[f64], k: &[i64], _scope: StiffScope) -> DMatrix<Complex64> {
        // Both entries carry the 1/eps^2 scale, so Full and SingularOnly agree.
        let n = self.grid.points();
        let ksq = xi_sq_masked(xi, k, n);
        let mut l = DMatrix::<Complex64>::zeros(2, 2);
        l[(0, 1)] = Complex64::new(1.0, 0.0);
        l[(1, 0)] = Complex64::new(-self.b_ref * ksq / (self.a_ref * self.eps * self.eps), 0.0);
        l
    }

    fn soft_dt_limit(&self, _fields: &[SpectralField]) -> f64 {
        // Effective soft scale: variation of the local wave speed
        // sqrt(b/a) - sqrt(b_ref/a_ref), acting at rate kmax/eps.
        let a_f = (self.coeffs.a)(0.0);
        let b_f = (self.coeffs.b)(0.0);
        let cref = (self.b_ref / self.a_ref).sqrt();
        let mut var = 0.0f64;
        for (&a, &b) in a_f.samples().iter().zip(b_f.samples()) {
            var = var.max(((b / a).sqrt() - cref).abs());
        }
        if var == 0.0 {
            f64::INFINITY
        } else {
            let kmax = self.grid.xi_max_dealiased();
            0.5 * self.eps / (var * kmax)
        }
    }
}
