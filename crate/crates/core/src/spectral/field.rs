use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use super::grid::{same_grid, SpectralGrid};
use crate::error::{Error, Result};

/// Real scalar field on a periodic grid, stored as its Fourier coefficients
/// with a lazily computed physical-space sample cache.
///
/// Fields are immutable values: every operation returns a new field. The
/// coefficient array is Hermitian-symmetric (the represented field is real);
/// constructors from samples guarantee this up to rounding and generators
/// enforce it exactly.
pub struct SpectralField {
    grid: Arc<SpectralGrid>,
    coeffs: Vec<Complex64>,
    samples: OnceLock<Vec<f64>>,
}

impl Clone for SpectralField {
    fn clone(&self) -> Self {
        let samples = OnceLock::new();
        if let Some(s) = self.samples.get() {
            let _ = samples.set(s.clone());
        }
        SpectralField {
            grid: self.grid.clone(),
            coeffs: self.coeffs.clone(),
            samples,
        }
    }
}

impl std::fmt::Debug for SpectralField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralField")
            .field("grid", &self.grid)
            .field("l2", &self.l2_norm())
            .finish()
    }
}

impl SpectralField {
    pub fn zero(grid: &Arc<SpectralGrid>) -> Self {
        SpectralField {
            grid: grid.clone(),
            coeffs: vec![Complex64::default(); grid.len()],
            samples: OnceLock::new(),
        }
    }

    pub fn constant(grid: &Arc<SpectralGrid>, value: f64) -> Self {
        let mut f = Self::zero(grid);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    /// Builds a field from physical samples in row-major order.
    pub fn from_samples(grid: &Arc<SpectralGrid>, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "sample count {} does not match grid size {}",
                samples.len(),
                grid.len()
            )));
        }
        let mut data: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        grid.forward_in_place(&mut data);
        let cache = OnceLock::new();
        let _ = cache.set(samples.to_vec());
        Ok(SpectralField {
            grid: grid.clone(),
            coeffs: data,
            samples: cache,
        })
    }

    /// Samples a smooth function of the physical coordinates.
    pub fn from_fn(grid: &Arc<SpectralGrid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut samples = vec![0.0f64; grid.len()];
        let mut x = [0.0f64; 3];
        for (flat, s) in samples.iter_mut().enumerate() {
            grid.coords(flat, &mut x);
            *s = f(&x[..grid.dim()]);
        }
        Self::from_samples(grid, &samples).expect("sample count matches by construction")
    }

    /// Builds a field directly from Fourier coefficients; the caller is
    /// responsible for Hermitian symmetry.
    pub fn from_coeffs(grid: &Arc<SpectralGrid>, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        SpectralField {
            grid: grid.clone(),
            coeffs,
            samples: OnceLock::new(),
        }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        self.samples = OnceLock::new();
        &mut self.coeffs
    }

    /// Physical samples (real parts of the inverse transform), cached.
    pub fn samples(&self) -> &[f64] {
        self.samples.get_or_init(|| {
            let mut data = self.coeffs.clone();
            self.grid.inverse_in_place(&mut data);
            data.iter().map(|z| z.re).collect()
        })
    }

    /// Largest imaginary residue of the inverse transform; a diagnostic for
    /// Hermitian symmetry of the coefficients.
    pub fn imag_residue(&self) -> f64 {
        let mut data = self.coeffs.clone();
        self.grid.inverse_in_place(&mut data);
        data.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Discrete `L^2` norm `(sum_k |u_hat|^2)^(1/2)`.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Max-norm over physical samples.
    pub fn max_norm(&self) -> f64 {
        self.samples().iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Applies the 2/3 rule: zeroes every coefficient with any `|k_i| > n/3`.
    /// Idempotent projection.
    pub fn dealias(&self) -> Self {
        let band = (self.grid.points() / 3) as i64;
        let mut out = self.coeffs.clone();
        let mut k = [0i64; 3];
        for (flat, z) in out.iter_mut().enumerate() {
            self.grid.k_tuple(flat, &mut k);
            if k[..self.grid.dim()].iter().any(|ki| ki.abs() > band) {
                *z = Complex64::default();
            }
        }
        Self::from_coeffs(&self.grid, out)
    }

    /// Largest `|k_i|` carrying a nonzero coefficient (0 for the zero field).
    pub fn max_band(&self) -> i64 {
        let mut k = [0i64; 3];
        let mut band = 0i64;
        for (flat, z) in self.coeffs.iter().enumerate() {
            if z.norm_sqr() > 0.0 {
                self.grid.k_tuple(flat, &mut k);
                for ki in &k[..self.grid.dim()] {
                    band = band.max(ki.abs());
                }
            }
        }
        band
    }

    pub fn scale(&self, factor: f64) -> Self {
        let coeffs = self.coeffs.iter().map(|z| z * factor).collect();
        Self::from_coeffs(&self.grid, coeffs)
    }

    /// `self + factor * other`.
    pub fn axpy(&self, factor: f64, other: &Self) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + factor * b)
            .collect();
        Ok(Self::from_coeffs(&self.grid, coeffs))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// Pointwise product evaluated in physical space, dealiased.
    pub fn mul_pointwise(&self, other: &Self) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        let s: Vec<f64> = self
            .samples()
            .iter()
            .zip(other.samples())
            .map(|(a, b)| a * b)
            .collect();
        Ok(Self::from_samples(&self.grid, &s)?.dealias())
    }

    /// Composition with a smooth scalar function, evaluated pointwise on the
    /// physical grid and dealiased.
    pub fn map_pointwise(&self, f: impl Fn(f64) -> f64) -> Self {
        let s: Vec<f64> = self.samples().iter().map(|&x| f(x)).collect();
        Self::from_samples(&self.grid, &s)
            .expect("sample count matches")
            .dealias()
    }

    /// Discrete `L^2` inner product `<u, v> = mean(u v)` over samples.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        same_grid(&self.grid, &other.grid)?;
        let n = self.grid.len() as f64;
        Ok(self
            .samples()
            .iter()
            .zip(other.samples())
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n)
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use std::f64::consts::TAU;

    #[test]
    fn round_trip_physical_spectral_physical() {
        let g = make_grid(2, 16, TAU).unwrap();
        let u = SpectralField::from_fn(&g, |x| (x[0].sin() + (2.0 * x[1]).cos()) * 0.7 + 0.1);
        let back = u.samples();
        let direct: Vec<f64> = {
            let mut v = vec![0.0; g.len()];
            let mut x = [0.0; 3];
            for (flat, s) in v.iter_mut().enumerate() {
                g.coords(flat, &mut x);
                *s = (x[0].sin() + (2.0 * x[1]).cos()) * 0.7 + 0.1;
            }
            v
        };
        let max: f64 = back
            .iter()
            .zip(&direct)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let amp: f64 = direct.iter().map(|x| x.abs()).fold(0.0, f64::max);
        assert!(max <= 1e-12 * amp.max(1.0), "round trip error {max}");
    }

    #[test]
    fn parseval_l2_matches_quadrature() {
        let g = make_grid(1, 32, TAU).unwrap();
        let u = SpectralField::from_fn(&g, |x| x[0].sin() * (3.0 * x[0]).cos() + 0.25);
        let quad = (u.samples().iter().map(|x| x * x).sum::<f64>() / g.len() as f64).sqrt();
        assert!((u.l2_norm() - quad).abs() <= 1e-12 * quad);
    }

    #[test]
    fn single_mode_coefficients() {
        let g = make_grid(1, 8, TAU).unwrap();
        // 2 cos(3x) = e^{i3x} + e^{-i3x}: unit coefficients at k = +-3.
        let u = SpectralField::from_fn(&g, |x| 2.0 * (3.0 * x[0]).cos());
        let mut k = [0i64; 3];
        for (flat, z) in u.coeffs().iter().enumerate() {
            g.k_tuple(flat, &mut k);
            let expect = if k[0].abs() == 3 { 1.0 } else { 0.0 };
            assert!((z.re - expect).abs() < 1e-12 && z.im.abs() < 1e-12);
        }
    }

    #[test]
    fn dealias_is_idempotent_projection() {
        let g = make_grid(1, 24, TAU).unwrap();
        // n/3 = 8: mode 9 must vanish, mode 8 survive.
        let u = SpectralField::from_fn(&g, |x| (9.0 * x[0]).cos() + (8.0 * x[0]).sin());
        let d = u.dealias();
        assert_eq!(d.max_band(), 8);
        let dd = d.dealias();
        let diff: f64 = d
            .coeffs()
            .iter()
            .zip(dd.coeffs())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert_eq!(diff, 0.0);
    }

    #[test]
    fn nyquist_mode_zeroed_by_dealias() {
        let g = make_grid(1, 8, TAU).unwrap();
        let mut u = SpectralField::zero(&g);
        u.coeffs_mut()[4] = Complex64::new(1.0, 0.0); // k = -4 (Nyquist)
        assert_eq!(u.dealias().l2_norm(), 0.0);
    }
}
