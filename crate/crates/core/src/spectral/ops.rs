use num_complex::Complex64;

use super::field::SpectralField;
use super::grid::same_grid;
use crate::error::{Error, Result};

/// Exact spectral partial derivative along one axis. The unpaired Nyquist
/// mode of that axis is zeroed, keeping derivatives of real fields real.
pub fn deriv(u: &SpectralField, axis: usize) -> SpectralField {
    let grid = u.grid().clone();
    debug_assert!(axis < grid.dim());
    let n = grid.points() as i64;
    let scale = grid.xi_scale();
    let mut out = u.coeffs().to_vec();
    let mut k = [0i64; 3];
    for (flat, z) in out.iter_mut().enumerate() {
        grid.k_tuple(flat, &mut k);
        if k[axis] == -n / 2 {
            *z = Complex64::default();
        } else {
            *z *= Complex64::new(0.0, scale * k[axis] as f64);
        }
    }
    SpectralField::from_coeffs(&grid, out)
}

/// Gradient as a vector of fields.
pub fn grad(u: &SpectralField) -> Vec<SpectralField> {
    (0..u.grid().dim()).map(|ax| deriv(u, ax)).collect()
}

/// Divergence of a vector field.
pub fn div(w: &[SpectralField]) -> Result<SpectralField> {
    let grid = w
        .first()
        .ok_or_else(|| Error::InvalidParameter("div of empty vector".into()))?
        .grid()
        .clone();
    if w.len() != grid.dim() {
        return Err(Error::InvalidParameter(format!(
            "vector field has {} components on a {}-d grid",
            w.len(),
            grid.dim()
        )));
    }
    for wi in w {
        same_grid(&grid, wi.grid())?;
    }
    let mut acc = deriv(&w[0], 0);
    for (ax, wi) in w.iter().enumerate().skip(1) {
        acc = acc.add(&deriv(wi, ax))?;
    }
    Ok(acc)
}

/// Laplacian, realized as `div(grad(u))` per mode: each axis contributes
/// `-xi_i^2` with its Nyquist mode masked, so `div(grad u) = laplacian(u)`
/// holds exactly.
pub fn laplacian(u: &SpectralField) -> SpectralField {
    let grid = u.grid().clone();
    let n = grid.points() as i64;
    let scale = grid.xi_scale();
    let mut out = u.coeffs().to_vec();
    let mut k = [0i64; 3];
    for (flat, z) in out.iter_mut().enumerate() {
        grid.k_tuple(flat, &mut k);
        let mut s = 0.0;
        for ki in &k[..grid.dim()] {
            if *ki != -n / 2 {
                let xi = scale * *ki as f64;
                s += xi * xi;
            }
        }
        *z *= -s;
    }
    SpectralField::from_coeffs(&grid, out)
}

/// Antisymmetric curl matrix `(curl w)_ij = d_j w_i - d_i w_j`.
pub fn curl(w: &[SpectralField]) -> Result<Vec<Vec<SpectralField>>> {
    let grid = w
        .first()
        .ok_or_else(|| Error::InvalidParameter("curl of empty vector".into()))?
        .grid()
        .clone();
    if w.len() != grid.dim() {
        return Err(Error::InvalidParameter(format!(
            "vector field has {} components on a {}-d grid",
            w.len(),
            grid.dim()
        )));
    }
    let d = grid.dim();
    let mut rows = Vec::with_capacity(d);
    for i in 0..d {
        let mut row = Vec::with_capacity(d);
        for j in 0..d {
            row.push(deriv(&w[i], j).sub(&deriv(&w[j], i))?);
        }
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_grid, random_band_limited_field, SpectralField};
    use std::f64::consts::TAU;

    #[test]
    fn grad_of_constant_is_zero() {
        let g = make_grid(2, 16, TAU).unwrap();
        let c = SpectralField::constant(&g, 3.5);
        for gi in grad(&c) {
            assert_eq!(gi.l2_norm(), 0.0);
        }
    }

    #[test]
    fn laplacian_eigenfunction() {
        let g = make_grid(2, 32, TAU).unwrap();
        let u = SpectralField::from_fn(&g, |x| x[0].sin() * x[1].sin());
        let lap = div(&grad(&u)).unwrap();
        let expect = u.scale(-2.0);
        assert!(lap.sub(&expect).unwrap().max_norm() <= 1e-12);
    }

    #[test]
    fn div_grad_equals_laplacian() {
        let g = make_grid(2, 32, TAU).unwrap();
        let u = random_band_limited_field(5, &g, 10, 2.0, 1.0).unwrap();
        let a = div(&grad(&u)).unwrap();
        let b = laplacian(&u);
        assert!(a.sub(&b).unwrap().max_norm() <= 1e-12);
    }

    #[test]
    fn curl_of_gradient_vanishes() {
        let g = make_grid(3, 8, TAU).unwrap();
        let u = random_band_limited_field(9, &g, 2, 2.0, 1.0).unwrap();
        let cg = curl(&grad(&u)).unwrap();
        for row in &cg {
            for entry in row {
                assert!(entry.max_norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn mismatched_vector_length_rejected() {
        let g = make_grid(2, 16, TAU).unwrap();
        let u = SpectralField::zero(&g);
        assert!(div(&[u]).is_err());
    }
}
