use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform periodic grid on the torus `[0, L)^d`, `d in {1,2,3}`, with the
/// same even sample count `n >= 8` in every dimension.
///
/// Holds the FFT plans for its line length so transforms are planned once per
/// grid. Grids are shared behind `Arc` and compared by value `(d, n, L)`.
pub struct SpectralGrid {
    dim: usize,
    points: usize,
    box_length: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("dim", &self.dim)
            .field("points", &self.points)
            .field("box_length", &self.box_length)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.points == other.points
            && self.box_length == other.box_length
    }
}

/// Build a grid. Rejects `d` outside `{1,2,3}`, odd `n`, `n < 8`, `L <= 0`.
pub fn make_grid(dim: usize, points: usize, box_length: f64) -> Result<Arc<SpectralGrid>> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidGrid(format!("dim must be 1, 2 or 3, got {dim}")));
    }
    if points % 2 != 0 {
        return Err(Error::InvalidGrid(format!("n must be even, got {points}")));
    }
    if points < 8 {
        return Err(Error::InvalidGrid(format!("n must be at least 8, got {points}")));
    }
    if !(box_length > 0.0) {
        return Err(Error::InvalidGrid(format!(
            "box length must be positive, got {box_length}"
        )));
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(points);
    let inv = planner.plan_fft_inverse(points);
    Ok(Arc::new(SpectralGrid {
        dim,
        points,
        box_length,
        fwd,
        inv,
    }))
}

impl SpectralGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    /// Total number of samples / modes, `n^d`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `L / n`.
    pub fn dx(&self) -> f64 {
        self.box_length / self.points as f64
    }

    /// Wavenumber scale `2 pi / L` converting integer modes to physical
    /// frequencies.
    pub fn xi_scale(&self) -> f64 {
        TAU / self.box_length
    }

    /// Signed integer mode for a per-axis index: `0..n/2-1, -n/2..-1`.
    #[inline]
    pub fn k_of_index(&self, i: usize) -> i64 {
        let n = self.points as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Decomposes a flat (row-major) index into per-axis indices.
    #[inline]
    pub fn axis_indices(&self, flat: usize, out: &mut [usize; 3]) {
        let n = self.points;
        let mut rest = flat;
        for ax in (0..self.dim).rev() {
            out[ax] = rest % n;
            rest /= n;
        }
    }

    /// Integer mode tuple at a flat index.
    #[inline]
    pub fn k_tuple(&self, flat: usize, out: &mut [i64; 3]) {
        let mut idx = [0usize; 3];
        self.axis_indices(flat, &mut idx);
        for ax in 0..self.dim {
            out[ax] = self.k_of_index(idx[ax]);
        }
    }

    /// Physical wavenumber tuple `xi = (2 pi / L) k` at a flat index.
    #[inline]
    pub fn xi_tuple(&self, flat: usize, out: &mut [f64; 3]) {
        let mut k = [0i64; 3];
        self.k_tuple(flat, &mut k);
        let s = self.xi_scale();
        for ax in 0..self.dim {
            out[ax] = s * k[ax] as f64;
        }
    }

    /// `|xi|^2` at a flat index, Nyquist modes included.
    #[inline]
    pub fn xi_norm_sq(&self, flat: usize) -> f64 {
        let mut xi = [0.0f64; 3];
        self.xi_tuple(flat, &mut xi);
        xi[..self.dim].iter().map(|x| x * x).sum()
    }

    /// Largest `|xi|` surviving the 2/3-rule dealias cut.
    pub fn xi_max_dealiased(&self) -> f64 {
        let band = (self.points / 3) as f64;
        self.xi_scale() * band * (self.dim as f64).sqrt()
    }

    /// Physical coordinates of a sample at a flat index.
    pub fn coords(&self, flat: usize, out: &mut [f64; 3]) {
        let mut idx = [0usize; 3];
        self.axis_indices(flat, &mut idx);
        for ax in 0..self.dim {
            out[ax] = self.box_length * idx[ax] as f64 / self.points as f64;
        }
    }

    /// In-place forward transform of a flat row-major complex array:
    /// samples -> coefficients (including the 1/N normalization).
    pub(crate) fn forward_in_place(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.len());
        self.transform_axes(data, true);
        let scale = 1.0 / self.len() as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }

    /// In-place inverse transform: coefficients -> samples (no scaling).
    pub(crate) fn inverse_in_place(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.len());
        self.transform_axes(data, false);
    }

    fn transform_axes(&self, data: &mut [Complex64], forward: bool) {
        let n = self.points;
        let plan = if forward { &self.fwd } else { &self.inv };
        let mut line = vec![Complex64::default(); n];
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        match self.dim {
            1 => {
                plan.process_with_scratch(data, &mut scratch);
            }
            2 => {
                // axis 1 (contiguous rows)
                for row in data.chunks_exact_mut(n) {
                    plan.process_with_scratch(row, &mut scratch);
                }
                // axis 0 (strided columns)
                for col in 0..n {
                    for (i, z) in line.iter_mut().enumerate() {
                        *z = data[i * n + col];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (i, z) in line.iter().enumerate() {
                        data[i * n + col] = *z;
                    }
                }
            }
            3 => {
                let n2 = n * n;
                for row in data.chunks_exact_mut(n) {
                    plan.process_with_scratch(row, &mut scratch);
                }
                for i in 0..n {
                    for k in 0..n {
                        let base = i * n2 + k;
                        for (j, z) in line.iter_mut().enumerate() {
                            *z = data[base + j * n];
                        }
                        plan.process_with_scratch(&mut line, &mut scratch);
                        for (j, z) in line.iter().enumerate() {
                            data[base + j * n] = *z;
                        }
                    }
                }
                for j in 0..n {
                    for k in 0..n {
                        let base = j * n + k;
                        for (i, z) in line.iter_mut().enumerate() {
                            *z = data[base + i * n2];
                        }
                        plan.process_with_scratch(&mut line, &mut scratch);
                        for (i, z) in line.iter().enumerate() {
                            data[base + i * n2] = *z;
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
    }
}

/// Checks two grids describe the same discretization.
pub(crate) fn same_grid(a: &Arc<SpectralGrid>, b: &Arc<SpectralGrid>) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}
