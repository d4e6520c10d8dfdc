use std::sync::Arc;

use num_complex::Complex64;

use super::field::SpectralField;
use crate::error::{Error, Result};

/// Fourier multiplier symbol: an evaluator `xi -> q(xi)` together with its
/// order tag `m` (the symbol class exponent; informational).
///
/// Symbols are grid-free; they are evaluated at the grid wavenumbers when
/// applied. Composition laws hold exactly per mode.
#[derive(Clone)]
pub struct MultiplierSymbol {
    order: f64,
    eval: Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>,
}

impl MultiplierSymbol {
    pub fn new(order: f64, eval: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static) -> Self {
        MultiplierSymbol {
            order,
            eval: Arc::new(eval),
        }
    }

    pub fn new_real(order: f64, eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(order, move |xi| Complex64::new(eval(xi), 0.0))
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        (self.eval)(xi)
    }

    pub fn identity() -> Self {
        Self::new_real(0.0, |_| 1.0)
    }

    pub fn constant(c: f64) -> Self {
        Self::new_real(0.0, move |_| c)
    }

    /// `i xi_axis` (exact spectral derivative).
    pub fn derivative(axis: usize) -> Self {
        Self::new(1.0, move |xi| Complex64::new(0.0, xi[axis]))
    }

    /// Pointwise product of two symbols.
    pub fn product(&self, other: &Self) -> Self {
        let a = self.eval.clone();
        let b = other.eval.clone();
        Self::new(self.order + other.order, move |xi| a(xi) * b(xi))
    }
}

/// Smooth even cutoff profile `j(r)` with `j = 1` on `r <= 1`, `j = 0` on
/// `r >= 2`, `0 <= j <= 1`:
/// `j(r) = psi(2 - r) / (psi(2 - r) + psi(r - 1))`, `psi(t) = exp(-1/t)` for
/// `t > 0` and `0` otherwise.
pub fn mollifier_profile(r: f64) -> f64 {
    fn psi(t: f64) -> f64 {
        if t > 0.0 {
            (-1.0 / t).exp()
        } else {
            0.0
        }
    }
    let r = r.abs();
    if r <= 1.0 {
        return 1.0;
    }
    if r >= 2.0 {
        return 0.0;
    }
    let a = psi(2.0 - r);
    let b = psi(r - 1.0);
    a / (a + b)
}

/// Symbol of the Friedrichs mollifier `J_h`: `xi -> j(h |xi|)`.
pub fn mollifier_symbol(h: f64) -> Result<MultiplierSymbol> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "mollifier scale h must lie in (0,1], got {h}"
        )));
    }
    Ok(MultiplierSymbol::new_real(0.0, move |xi| {
        let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        mollifier_profile(h * r)
    }))
}

/// Symbol of the Bessel family `Lambda_h^m = (I - h^2 Delta)^(m/2)`:
/// `xi -> <h xi>^m = (1 + h^2 |xi|^2)^(m/2)`.
pub fn bessel_symbol(h: f64, m: f64) -> Result<MultiplierSymbol> {
    if !(0.0..=1.0).contains(&h) {
        return Err(Error::InvalidParameter(format!(
            "bessel scale h must lie in [0,1], got {h}"
        )));
    }
    Ok(MultiplierSymbol::new_real(m, move |xi| {
        let s = xi.iter().map(|x| x * x).sum::<f64>();
        (1.0 + h * h * s).powf(0.5 * m)
    }))
}

/// Applies a multiplier per mode: `out_hat(xi) = q(xi) u_hat(xi)`.
///
/// Errors if the symbol is not finite at some grid wavenumber.
pub fn apply_multiplier(q: &MultiplierSymbol, u: &SpectralField) -> Result<SpectralField> {
    let grid = u.grid().clone();
    let mut out = u.coeffs().to_vec();
    let mut xi = [0.0f64; 3];
    for (flat, z) in out.iter_mut().enumerate() {
        grid.xi_tuple(flat, &mut xi);
        let qv = q.eval(&xi[..grid.dim()]);
        if !(qv.re.is_finite() && qv.im.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "multiplier not finite at xi = {:?}",
                &xi[..grid.dim()]
            )));
        }
        *z *= qv;
    }
    Ok(SpectralField::from_coeffs(&grid, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_grid, random_band_limited_field};
    use std::f64::consts::TAU;

    #[test]
    fn identity_symbols_leave_fields_unchanged() {
        let g = make_grid(2, 16, TAU).unwrap();
        let u = random_band_limited_field(7, &g, 5, 2.0, 1.0).unwrap();
        for q in [
            MultiplierSymbol::identity(),
            bessel_symbol(0.5, 0.0).unwrap(), // Lambda_h^0 = I
            bessel_symbol(0.0, 3.0).unwrap(), // <0>^m = 1
        ] {
            let v = apply_multiplier(&q, &u).unwrap();
            let diff: f64 = u
                .coeffs()
                .iter()
                .zip(v.coeffs())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert_eq!(diff, 0.0);
        }
    }

    #[test]
    fn spectral_derivative_of_sine() {
        let g = make_grid(1, 16, TAU).unwrap();
        let u = SpectralField::from_fn(&g, |x| x[0].sin());
        let du = apply_multiplier(&MultiplierSymbol::derivative(0), &u).unwrap();
        let cosx = SpectralField::from_fn(&g, |x| x[0].cos());
        assert!(du.sub(&cosx).unwrap().max_norm() <= 1e-12);
    }

    #[test]
    fn mollifier_profile_plateaus() {
        assert_eq!(mollifier_profile(0.5), 1.0); // h=0.1, |xi|=5
        assert_eq!(mollifier_profile(3.0), 0.0); // h=1, |xi|=3
        assert_eq!(mollifier_profile(1.0), 1.0);
        assert_eq!(mollifier_profile(2.0), 0.0);
        let m = mollifier_profile(1.5);
        assert!(m > 0.0 && m < 1.0);
        assert_eq!(mollifier_profile(-1.2), mollifier_profile(1.2));
    }

    #[test]
    fn bessel_point_values() {
        let q = bessel_symbol(1.0, -2.0).unwrap();
        let v = q.eval(&[3.0]);
        assert!((v.re - 0.1).abs() < 1e-15); // (1+9)^{-1}
    }

    #[test]
    fn mollifier_rejects_out_of_range() {
        assert!(mollifier_symbol(0.0).is_err());
        assert!(mollifier_symbol(1.5).is_err());
        assert!(bessel_symbol(-0.1, 1.0).is_err());
    }

    #[test]
    fn composition_is_per_mode_product() {
        let g = make_grid(1, 32, TAU).unwrap();
        let u = random_band_limited_field(3, &g, 10, 1.0, 1.0).unwrap();
        let q1 = bessel_symbol(0.5, 1.5).unwrap();
        let q2 = mollifier_symbol(0.25).unwrap();
        let a = apply_multiplier(&q1, &apply_multiplier(&q2, &u).unwrap()).unwrap();
        let b = apply_multiplier(&q1.product(&q2), &u).unwrap();
        // associativity of the FP products holds to the ulp level
        let diff: f64 = a
            .coeffs()
            .iter()
            .zip(b.coeffs())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(diff <= 1e-15, "composition drift {diff}");
    }

    #[test]
    fn mollifier_of_real_field_is_real() {
        let g = make_grid(2, 16, TAU).unwrap();
        let u = random_band_limited_field(11, &g, 5, 1.0, 1.0).unwrap();
        let j = mollifier_symbol(0.3).unwrap();
        let ju = apply_multiplier(&j, &u).unwrap();
        assert!(ju.imag_residue() <= 1e-14);
    }
}
