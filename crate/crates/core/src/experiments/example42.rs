//! Energy-identity and uniform-boundedness measurements on the simplified
//! constant-coefficient system. Three checks per run:
//!
//! (i)   the exact dissipation identity
//!       `E(T) - E(0) + 2 int_0^T D dt = 0` with
//!       `E = ||(p, v_e, sqrt(beta-1) grad theta)||^2`,
//!       `D = ||div v_e - (beta-1) Lap theta||^2`, discrete residual at most
//!       `1e-8 E(0)` per unit time (Simpson quadrature on per-step records);
//! (ii)  monotone decay of the weighted slow energy
//!       `||(zeta/sqrt(beta-1), sqrt(beta) v_eps, theta)||^2`,
//!       `zeta = eps beta p - theta`, `v_eps = eps v`;
//! (iii) eps-uniform boundedness of the final-estimate bracket: the ratio of
//!       the left side (sup norms plus dissipation integrals, including
//!       `int ||grad p||^2`) to the initial-data right side stays within
//!       1.5x across the eps list.

use serde::Serialize;

use super::{all_pass, simpson, CheckRow};
use crate::error::{Error, Result};
use crate::model::{ExampleSystem, StateU, StiffScope};
use crate::report::CsvTable;
use crate::spectral::{div, grad, make_grid, random_band_limited_field};
use crate::stepper::{integrate, Monitor, Scheme, StepperConfig};

#[derive(Debug, Clone, Serialize)]
pub struct Example42Config {
    pub beta: f64,
    pub eps_list: Vec<f64>,
    pub n: usize,
    pub d: usize,
    pub band: usize,
    pub seed: u64,
    pub t_end: f64,
}

impl Default for Example42Config {
    fn default() -> Self {
        Example42Config {
            beta: 2.0,
            eps_list: vec![0.1, 0.025],
            n: 32,
            d: 2,
            band: 3,
            seed: 1,
            t_end: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Example42Report {
    pub pass: bool,
    pub checks: Vec<CheckRow>,
    /// Per-eps `(eps, identity residual per unit time / E(0), boundedness ratio)`.
    pub rows: Vec<(f64, f64, f64)>,
    #[serde(skip)]
    pub table: CsvTable,
}

pub fn run_example42(cfg: &Example42Config) -> Result<Example42Report> {
    if !(cfg.beta > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta must exceed 1, got {}",
            cfg.beta
        )));
    }
    let grid = make_grid(cfg.d, cfg.n, std::f64::consts::TAU)?;
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    let mut table = CsvTable::new(&["eps", "t", "dissipation_energy", "dissipation_rate", "slow_energy"]);

    let state0 = StateU::new(
        random_band_limited_field(cfg.seed, &grid, cfg.band, 2.0, 1.0)?,
        (0..cfg.d)
            .map(|i| random_band_limited_field(cfg.seed + 1 + i as u64, &grid, cfg.band, 2.0, 1.0))
            .collect::<Result<_>>()?,
        random_band_limited_field(cfg.seed + 4, &grid, cfg.band, 2.0, 1.0)?,
    )?;

    let mut ratios = Vec::new();
    for &eps in &cfg.eps_list {
        let sys = ExampleSystem::new(grid.clone(), eps, cfg.beta)?;
        // Resolve the fastest acoustic beat (frequency ~ sqrt(beta) |k|_max / eps)
        // well enough that Simpson quadrature reaches the 1e-8 identity target.
        let kmax = grid.xi_scale() * (cfg.band as f64) * (cfg.d as f64).sqrt();
        let dt = (2e-3 * eps / (kmax.max(1.0) * cfg.beta.sqrt())).min(cfg.t_end / 16.0);

        let mut times = Vec::new();
        let mut e_series = Vec::new();
        let mut d_series = Vec::new();
        let mut slow_series = Vec::new();
        let mut bounded_sup = 0.0f64;
        let mut diss_records: Vec<(f64, f64)> = Vec::new();
        {
            let sys_ref = &sys;
            let stride = 10usize;
            let counter = std::cell::Cell::new(0usize);
            let mut monitors: Vec<Monitor> = vec![Box::new(|t, fields| {
                let state = StateU::from_bundle(fields);
                times.push(t);
                e_series.push(sys_ref.dissipation_energy(&state)?);
                d_series.push(sys_ref.dissipation_rate(&state)?);
                slow_series.push(sys_ref.slow_energy(&state)?);
                Ok(())
            })];
            // Boundedness monitor at a coarser cadence: the final-estimate
            // bracket sup ||(p,v,theta)|| + ||grad(theta, eps p, eps v)||
            // and the integrals of ||div v||^2 + ||grad theta||^2_{H^1}
            // + ||grad p||^2.
            monitors.push(Box::new(|t, fields| {
                let k = counter.get();
                counter.set(k + 1);
                if k % stride != 0 {
                    return Ok(());
                }
                let state = StateU::from_bundle(fields);
                let mut l2 = state.p.l2_norm().powi(2) + state.theta.l2_norm().powi(2);
                for vi in &state.v {
                    l2 += vi.l2_norm().powi(2);
                }
                let mut grad_part = 0.0;
                for gi in grad(&state.theta) {
                    grad_part += gi.l2_norm().powi(2);
                }
                for gi in grad(&state.p) {
                    grad_part += (eps * gi.l2_norm()).powi(2);
                }
                for vi in &state.v {
                    for gi in grad(vi) {
                        grad_part += (eps * gi.l2_norm()).powi(2);
                    }
                }
                bounded_sup = bounded_sup.max(l2.sqrt() + grad_part.sqrt());

                let divv = div(&state.v)?;
                let mut integrand = divv.l2_norm().powi(2);
                for gi in grad(&state.theta) {
                    integrand += crate::norms::sobolev_norm(&gi, 1.0).powi(2);
                }
                for gi in grad(&state.p) {
                    integrand += gi.l2_norm().powi(2);
                }
                diss_records.push((t, integrand));
                Ok(())
            }));

            let config = StepperConfig {
                scheme: Scheme::Erk4Exponential,
                dt: Some(dt),
                dt_max: dt,
                safety: 1.0,
                t_end: cfg.t_end,
            };
            integrate(&sys, state0.to_bundle(), &config, StiffScope::Full, &mut monitors)?;
        }

        // (i) identity residual per unit time, relative to E(0)
        let dt_rec = times[1] - times[0];
        let integral = simpson(&d_series, dt_rec);
        let e0 = e_series[0];
        let residual = (e_series.last().unwrap() - e0 + 2.0 * integral).abs()
            / (e0 * cfg.t_end);
        checks.push(CheckRow::le(
            format!("dissipation identity residual per unit time (eps={eps})"),
            residual,
            1e-8,
        ));

        // (ii) slow energy monotone nonincreasing
        let mut worst_uptick: f64 = 0.0;
        for w in slow_series.windows(2) {
            worst_uptick = worst_uptick.max((w[1] - w[0]) / slow_series[0]);
        }
        checks.push(CheckRow::le(
            format!("slow energy monotone decay (worst relative uptick, eps={eps})"),
            worst_uptick,
            1e-12,
        ));

        // (iii) boundedness ratio of the final estimate
        let t_rec: Vec<f64> = diss_records.iter().map(|r| r.0).collect();
        let i_rec: Vec<f64> = diss_records.iter().map(|r| r.1).collect();
        let mut diss_integral = 0.0;
        for w in 0..t_rec.len().saturating_sub(1) {
            diss_integral += 0.5 * (t_rec[w + 1] - t_rec[w]) * (i_rec[w] + i_rec[w + 1]);
        }
        let left = bounded_sup + diss_integral.sqrt();
        let right = {
            let state = &state0;
            let mut l2 = state.p.l2_norm().powi(2) + state.theta.l2_norm().powi(2);
            for vi in &state.v {
                l2 += vi.l2_norm().powi(2);
            }
            let mut grad_part = 0.0;
            for gi in grad(&state.theta) {
                grad_part += gi.l2_norm().powi(2);
            }
            for gi in grad(&state.p) {
                grad_part += (eps * gi.l2_norm()).powi(2);
            }
            for vi in &state.v {
                for gi in grad(vi) {
                    grad_part += (eps * gi.l2_norm()).powi(2);
                }
            }
            l2.sqrt() + grad_part.sqrt()
        };
        let ratio = left / right;
        ratios.push(ratio);
        rows.push((eps, residual, ratio));

        for (i, &t) in times.iter().enumerate().step_by(10) {
            table.push(vec![eps, t, e_series[i], d_series[i], slow_series[i]]);
        }
    }

    let rmax = ratios.iter().copied().fold(0.0, f64::max);
    let rmin = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    checks.push(CheckRow::le(
        "boundedness ratio eps-uniformity (max/min)",
        rmax / rmin,
        1.5,
    ));

    let pass = all_pass(&checks);
    Ok(Example42Report {
        pass,
        checks,
        rows,
        table,
    })
}
