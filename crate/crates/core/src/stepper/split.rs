//! Stiff/soft splitting: the constant-coefficient part of each model is
//! tabulated as one dense matrix per wavenumber; the soft remainder is the
//! full right-hand side minus the stiff part applied to the state.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::expm::expm;
use crate::error::Result;
use crate::model::{Model, StiffScope};
use crate::spectral::{SpectralField, SpectralGrid};

/// Per-wavenumber matrices of the stiff symbol.
pub struct SplitOperator {
    grid: Arc<SpectralGrid>,
    n_fields: usize,
    pub scope: StiffScope,
    pub soft_zero: bool,
    mats: Vec<DMatrix<Complex64>>,
}

/// Tabulates the stiff symbol of a model over all grid wavenumbers.
pub fn build_split(model: &dyn Model, scope: StiffScope) -> SplitOperator {
    let grid = model.grid().clone();
    let m = model.n_fields();
    let mats: Vec<DMatrix<Complex64>> = (0..grid.len())
        .map(|flat| {
            let mut xi = [0.0f64; 3];
            let mut k = [0i64; 3];
            grid.xi_tuple(flat, &mut xi);
            grid.k_tuple(flat, &mut k);
            model.stiff_matrix(&xi[..grid.dim()], &k[..grid.dim()], scope)
        })
        .collect();
    SplitOperator {
        grid,
        n_fields: m,
        scope,
        soft_zero: model.soft_vanishes(scope),
        mats,
    }
}

impl SplitOperator {
    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn n_fields(&self) -> usize {
        self.n_fields
    }

    pub fn matrices(&self) -> &[DMatrix<Complex64>] {
        &self.mats
    }

    /// Applies the stiff symbol to a state bundle: per mode, the matrix acts
    /// on the vector of coefficients.
    pub fn apply(&self, fields: &[SpectralField]) -> Vec<SpectralField> {
        apply_permode(&self.grid, &self.mats, fields)
    }

    /// Soft remainder: full model right-hand side minus the stiff part.
    pub fn soft_rhs(
        &self,
        model: &dyn Model,
        fields: &[SpectralField],
        t: f64,
    ) -> Result<Vec<SpectralField>> {
        let full = model.rhs(fields, t)?;
        let stiff = self.apply(fields);
        full.iter()
            .zip(&stiff)
            .map(|(f, s)| f.sub(s))
            .collect()
    }
}

/// Applies one dense matrix per mode to a bundle of coefficient arrays.
pub fn apply_permode(
    grid: &Arc<SpectralGrid>,
    mats: &[DMatrix<Complex64>],
    fields: &[SpectralField],
) -> Vec<SpectralField> {
    let m = fields.len();
    let npts = grid.len();
    let mut out = vec![vec![Complex64::default(); npts]; m];
    let coeffs: Vec<&[Complex64]> = fields.iter().map(|f| f.coeffs()).collect();
    // column chunks over modes
    let chunks: Vec<(usize, Vec<Vec<Complex64>>)> = (0..npts)
        .into_par_iter()
        .chunks(4096)
        .map(|chunk| {
            let start = chunk[0];
            let mut local = vec![vec![Complex64::default(); chunk.len()]; m];
            for (off, &flat) in chunk.iter().enumerate() {
                let mat = &mats[flat];
                for i in 0..m {
                    let mut acc = Complex64::default();
                    for j in 0..m {
                        acc += mat[(i, j)] * coeffs[j][flat];
                    }
                    local[i][off] = acc;
                }
            }
            (start, local)
        })
        .collect();
    for (start, local) in chunks {
        for i in 0..m {
            let len = local[i].len();
            out[i][start..start + len].copy_from_slice(&local[i]);
        }
    }
    out.into_iter()
        .map(|c| SpectralField::from_coeffs(grid, c))
        .collect()
}

/// Cached exponentials `exp(dt L)` and `exp(dt L / 2)` per mode.
pub struct ExpCache {
    pub dt: f64,
    full: Vec<DMatrix<Complex64>>,
    half: Vec<DMatrix<Complex64>>,
}

impl ExpCache {
    pub fn build(split: &SplitOperator, dt: f64) -> Self {
        let (full, half): (Vec<_>, Vec<_>) = split
            .mats
            .par_iter()
            .map(|l| {
                let full = expm(&l.map(|z| z * dt));
                let half = expm(&l.map(|z| z * (0.5 * dt)));
                (full, half)
            })
            .unzip();
        ExpCache { dt, full, half }
    }

    pub fn apply_full(&self, grid: &Arc<SpectralGrid>, fields: &[SpectralField]) -> Vec<SpectralField> {
        apply_permode(grid, &self.full, fields)
    }

    pub fn apply_half(&self, grid: &Arc<SpectralGrid>, fields: &[SpectralField]) -> Vec<SpectralField> {
        apply_permode(grid, &self.half, fields)
    }
}

/// Cached dense inverses of `(I - gamma dt L)` per mode for the implicit
/// stages of the IMEX scheme.
pub struct ImplicitCache {
    pub dt: f64,
    pub gamma: f64,
    inv: Vec<DMatrix<Complex64>>,
}

impl ImplicitCache {
    pub fn build(split: &SplitOperator, dt: f64, gamma: f64) -> Self {
        let m = split.n_fields;
        let inv: Vec<DMatrix<Complex64>> = split
            .mats
            .par_iter()
            .map(|l| {
                let a = DMatrix::<Complex64>::identity(m, m) - l.map(|z| z * (gamma * dt));
                a.try_inverse().expect("implicit matrix invertible")
            })
            .collect();
        ImplicitCache { dt, gamma, inv }
    }

    pub fn solve(&self, grid: &Arc<SpectralGrid>, fields: &[SpectralField]) -> Vec<SpectralField> {
        apply_permode(grid, &self.inv, fields)
    }
}
