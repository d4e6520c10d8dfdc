//! Local-energy decay of the scaled wave equation on a large periodic box:
//! compactly supported data radiates at speed `~ 1/eps`, so the windowed
//! energy `W(t)` around the source must drain before wrap-around returns the
//! packets. Passes when `W(T)/W(0) <= 0.2` at the finest eps and the drain
//! ratio does not degrade as eps decreases.

use serde::Serialize;

use super::{all_pass, CheckRow};
use crate::error::{Error, Result};
use crate::model::{WaveCoefficients, WaveSystem};
use crate::report::CsvTable;
use crate::spectral::{make_grid, mollifier_profile, SpectralField};
use crate::stepper::{integrate_full, Monitor, Scheme, StepperConfig};

#[derive(Debug, Clone, Serialize)]
pub struct AcousticDecayConfig {
    pub dims: Vec<usize>,
    /// Samples per dimension for each dim (indexed by d-1; unused dims 0).
    pub n_by_dim: [usize; 3],
    /// Box length as a multiple of 2 pi (the "large box" scale).
    pub box_scale: f64,
    pub eps_list: Vec<f64>,
    /// Coefficient bump amplitudes for a(x) and b(x).
    pub coef_amplitude: f64,
    /// Final time; when zero it is chosen as 0.45 of the wrap-around time of
    /// the finest eps.
    pub t_end: f64,
    pub safety: f64,
}

impl Default for AcousticDecayConfig {
    fn default() -> Self {
        AcousticDecayConfig {
            dims: vec![1, 2],
            n_by_dim: [1024, 192, 0],
            box_scale: 8.0,
            eps_list: vec![0.4, 0.2, 0.1, 0.05],
            coef_amplitude: 0.2,
            t_end: 0.0,
            safety: 0.4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AcousticDecayReport {
    pub pass: bool,
    pub checks: Vec<CheckRow>,
    /// Rows `(dim, eps, W(0), W(T), ratio)`.
    pub rows: Vec<(usize, f64, f64, f64, f64)>,
    #[serde(skip)]
    pub table: CsvTable,
}

/// Smooth compactly supported radial bump: 1 at the center, 0 beyond
/// `2 * width` (reuses the mollifier cutoff profile).
fn bump(grid: &std::sync::Arc<crate::spectral::SpectralGrid>, center: &[f64], width: f64) -> SpectralField {
    let length = grid.box_length();
    SpectralField::from_fn(grid, |x| {
        let mut dist_sq = 0.0;
        for (ax, &xi) in x.iter().enumerate() {
            let mut dx = (xi - center[ax]).abs();
            dx = dx.min(length - dx);
            dist_sq += dx * dx;
        }
        mollifier_profile(dist_sq.sqrt() / width)
    })
}

pub fn run_acoustic_decay(cfg: &AcousticDecayConfig) -> Result<AcousticDecayReport> {
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    let mut table = CsvTable::new(&["dim", "eps", "t", "windowed_energy"]);

    let eps_min = cfg
        .eps_list
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);

    for &d in &cfg.dims {
        let n = cfg.n_by_dim[d - 1];
        if n == 0 {
            return Err(Error::InvalidParameter(format!(
                "no sample count configured for dimension {d}"
            )));
        }
        let length = cfg.box_scale * std::f64::consts::TAU;
        let grid = make_grid(d, n, length)?;
        let center = [length / 2.0; 3];

        // Geometry: data and coefficient bumps supported inside the window
        // (radius L/12), leaving a wrap-around path of 5L/6 so the packets
        // can fully exit (exit distance L/6) well before recontact.
        let coef_width = length / 24.0;
        let bump_f = bump(&grid, &center[..d], coef_width);
        let a_field = bump_f.scale(cfg.coef_amplitude).map_pointwise(|x| 1.0 + x);
        let b_field = bump_f.scale(-cfg.coef_amplitude).map_pointwise(|x| 1.0 + x);

        let data_width = length / 24.0; // support radius 2 * width = L/12
        let u0 = bump(&grid, &center[..d], data_width);
        let w0 = SpectralField::zero(&grid);

        let window_radius = length / 12.0;

        // Wrap-around guard: the fastest packet travels at c_max/eps and must
        // not re-enter the window within [0, T].
        let c_max = {
            let mut m = 0.0f64;
            for (&a, &b) in a_field.samples().iter().zip(b_field.samples()) {
                m = m.max((b / a).sqrt());
            }
            m
        };
        let support = 2.0 * data_width;
        let wrap_distance = length - window_radius - support;
        let t_wrap_min = eps_min * wrap_distance / c_max;
        let t_end = if cfg.t_end > 0.0 {
            cfg.t_end
        } else {
            0.45 * t_wrap_min
        };
        if t_end >= 0.5 * t_wrap_min + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "transit-time violation: T = {t_end:.3} exceeds half the wrap-around time {:.3}",
                0.5 * t_wrap_min
            )));
        }

        let mut dim_ratios = Vec::new();
        for &eps in &cfg.eps_list {
            let coeffs = WaveCoefficients::static_fields(a_field.clone(), b_field.clone());
            let sys = WaveSystem::new(grid.clone(), eps, coeffs, 1e-3)?;
            let mut w_series: Vec<(f64, f64)> = Vec::new();
            let summary = {
                let sys_ref = &sys;
                let stride = 5usize;
                let counter = std::cell::Cell::new(0usize);
                let w_ref = &mut w_series;
                let mut monitors: Vec<Monitor> = vec![Box::new(move |t, fields| {
                    let k = counter.get();
                    counter.set(k + 1);
                    if k % stride == 0 {
                        let w = sys_ref.windowed_energy(
                            &fields[0],
                            &fields[1],
                            t,
                            &center[..d],
                            window_radius,
                        );
                        w_ref.push((t, w));
                    }
                    Ok(())
                })];
                let stepper = StepperConfig {
                    scheme: Scheme::Erk4Exponential,
                    dt: None,
                    dt_max: t_end / 50.0,
                    safety: cfg.safety,
                    t_end,
                };
                integrate_full(&sys, vec![u0.clone(), w0.clone()], &stepper, &mut monitors)?
            };
            // final sample exactly at T
            let wt = sys.windowed_energy(
                &summary.final_state[0],
                &summary.final_state[1],
                t_end,
                &center[..d],
                window_radius,
            );
            w_series.push((t_end, wt));
            let w0_val = w_series[0].1;
            let wt_val = w_series.last().unwrap().1;
            let ratio = wt_val / w0_val;
            rows.push((d, eps, w0_val, wt_val, ratio));
            dim_ratios.push((eps, ratio));
            for &(t, w) in &w_series {
                table.push(vec![d as f64, eps, t, w]);
            }
        }

        // finest eps drains the window
        let finest = dim_ratios
            .iter()
            .cloned()
            .fold((f64::INFINITY, 0.0), |acc, r| if r.0 < acc.0 { r } else { acc });
        checks.push(CheckRow::le(
            format!("windowed energy W(T)/W(0) at finest eps ({}d)", d),
            finest.1,
            0.2,
        ));
        // drain ratio does not degrade as eps decreases (5% slack)
        let mut sorted = dim_ratios.clone();
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap()); // ascending eps
        let mut worst_inversion = 0.0f64;
        for w in sorted.windows(2) {
            // smaller eps must drain at least as much: ratio(e_small) <= ratio(e_big) * 1.05
            worst_inversion = worst_inversion.max(w[0].1 / (w[1].1 * 1.05 + 1e-300));
        }
        checks.push(CheckRow::le(
            format!("drain ratio nonincreasing as eps decreases ({}d)", d),
            worst_inversion,
            1.0,
        ));
    }

    let pass = all_pass(&checks);
    Ok(AcousticDecayReport {
        pass,
        checks,
        rows,
        table,
    })
}
