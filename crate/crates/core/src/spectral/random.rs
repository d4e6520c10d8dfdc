use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::field::SpectralField;
use super::grid::SpectralGrid;
use crate::error::{Error, Result};

/// Deterministic random real field with all modes `|k_i| <= band`, zero mean,
/// drawn with a radial amplitude profile and rescaled so that
/// `||u||_{H^sigma} = target`.
///
/// Hermitian symmetry is enforced exactly: each canonical mode gets an
/// independent complex Gaussian draw and its mirror gets the conjugate. The
/// draw order is the flat index order of the canonical modes, so the output
/// is a pure function of `(seed, grid, band, profile, sigma, target)`.
pub fn random_field_with_profile(
    seed: u64,
    grid: &Arc<SpectralGrid>,
    band: usize,
    profile: impl Fn(f64) -> f64,
    sigma: f64,
    target: f64,
) -> Result<SpectralField> {
    let n = grid.points();
    if band > n / 3 {
        return Err(Error::InvalidParameter(format!(
            "band {band} exceeds the dealias limit n/3 = {}",
            n / 3
        )));
    }
    if target < 0.0 || !target.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "target norm must be finite and nonnegative, got {target}"
        )));
    }
    let mut coeffs = vec![Complex64::default(); grid.len()];
    if target == 0.0 {
        return Ok(SpectralField::from_coeffs(grid, coeffs));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let d = grid.dim();
    let band = band as i64;
    let mut k = [0i64; 3];
    for flat in 0..grid.len() {
        grid.k_tuple(flat, &mut k);
        let ks = &k[..d];
        if ks.iter().all(|&ki| ki == 0) {
            continue;
        }
        if ks.iter().any(|&ki| ki.abs() > band) {
            continue;
        }
        // Canonical representative of the (k, -k) pair: first nonzero
        // component positive.
        let first = ks.iter().copied().find(|&ki| ki != 0).unwrap();
        if first < 0 {
            continue;
        }
        let xi_abs = {
            let s = grid.xi_scale();
            ks.iter().map(|&ki| (s * ki as f64).powi(2)).sum::<f64>().sqrt()
        };
        let amp = profile(xi_abs);
        let re: f64 = normal.sample(&mut rng);
        let im: f64 = normal.sample(&mut rng);
        let z = Complex64::new(re, im) * amp;
        coeffs[flat] = z;
        coeffs[mirror_index(grid, ks)] = z.conj();
    }

    let mut u = SpectralField::from_coeffs(grid, coeffs);
    let raw = crate::norms::sobolev_norm(&u, sigma);
    if raw == 0.0 {
        return Err(Error::InvalidParameter(
            "generated field is identically zero; cannot rescale".into(),
        ));
    }
    u = u.scale(target / raw);
    Ok(u)
}

/// Default generator: amplitude profile `<xi>^-(sigma+1)`.
pub fn random_band_limited_field(
    seed: u64,
    grid: &Arc<SpectralGrid>,
    band: usize,
    sigma: f64,
    target: f64,
) -> Result<SpectralField> {
    let decay = sigma + 1.0;
    random_field_with_profile(
        seed,
        grid,
        band,
        move |r| (1.0 + r * r).powf(-0.5 * decay),
        sigma,
        target,
    )
}

fn mirror_index(grid: &SpectralGrid, k: &[i64]) -> usize {
    let n = grid.points() as i64;
    let mut flat = 0usize;
    for &ki in k {
        let m = -ki;
        let idx = if m >= 0 { m } else { n + m } as usize;
        flat = flat * grid.points() + idx;
    }
    flat
}
