//! Time-stepping schemes: the exponential integrating-factor RK4 (Lawson)
//! scheme, which applies `exp(dt L)` exactly per mode, and the ARS(4,4,3)
//! IMEX Runge-Kutta scheme solving per-mode linear systems implicitly.

use serde::{Deserialize, Serialize};

use super::split::{ExpCache, ImplicitCache, SplitOperator};
use crate::error::Result;
use crate::model::Model;
use crate::spectral::SpectralField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Erk4Exponential,
    ImexArs443,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepperConfig {
    pub scheme: Scheme,
    /// Fixed step; when absent the step is chosen from the CFL and soft
    /// stability limits.
    pub dt: Option<f64>,
    pub dt_max: f64,
    /// CFL safety factor.
    pub safety: f64,
    pub t_end: f64,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            scheme: Scheme::Erk4Exponential,
            dt: None,
            dt_max: 0.01,
            safety: 0.5,
            t_end: 0.25,
        }
    }
}

/// `dt = min(safety * min(advective, soft), dt_max)`. The `1/eps`
/// penalization and reference diffusion are excluded: they are integrated
/// exactly (or implicitly) per mode.
pub fn choose_dt(model: &dyn Model, fields: &[SpectralField], safety: f64, dt_max: f64) -> f64 {
    let grid = model.grid();
    let vmax = model.advective_vmax(fields);
    let dt_adv = if vmax > 0.0 {
        grid.dx() / vmax
    } else {
        f64::INFINITY
    };
    let dt_soft = model.soft_dt_limit(fields);
    let dt = safety * dt_adv.min(dt_soft);
    dt.min(dt_max)
}

/// Scheme-specific cached operators for one (split, dt) pair.
pub enum StepperCache {
    Lawson(ExpCache),
    Imex(ImplicitCache),
}

impl StepperCache {
    pub fn build(scheme: Scheme, split: &SplitOperator, dt: f64) -> Self {
        match scheme {
            Scheme::Erk4Exponential => StepperCache::Lawson(ExpCache::build(split, dt)),
            Scheme::ImexArs443 => StepperCache::Imex(ImplicitCache::build(split, dt, 0.5)),
        }
    }

    pub fn dt(&self) -> f64 {
        match self {
            StepperCache::Lawson(c) => c.dt,
            StepperCache::Imex(c) => c.dt,
        }
    }
}

fn axpy_bundle(
    base: &[SpectralField],
    factor: f64,
    other: &[SpectralField],
) -> Result<Vec<SpectralField>> {
    base.iter()
        .zip(other)
        .map(|(b, o)| b.axpy(factor, o))
        .collect()
}

/// One step of the selected scheme.
pub fn step(
    model: &dyn Model,
    split: &SplitOperator,
    cache: &StepperCache,
    fields: &[SpectralField],
    t: f64,
) -> Result<Vec<SpectralField>> {
    match cache {
        StepperCache::Lawson(exp) => step_lawson(model, split, exp, fields, t),
        StepperCache::Imex(imp) => step_ars443(model, split, imp, fields, t),
    }
}

/// Integrating-factor RK4 (Lawson): exact on the stiff part, classical RK4
/// on the exponentially transformed soft part.
fn step_lawson(
    model: &dyn Model,
    split: &SplitOperator,
    cache: &ExpCache,
    fields: &[SpectralField],
    t: f64,
) -> Result<Vec<SpectralField>> {
    let grid = model.grid().clone();
    let dt = cache.dt;
    let half = 0.5 * dt;

    if split.soft_zero {
        // Constant-coefficient model: the step is the exact exponential.
        return Ok(cache.apply_full(&grid, fields));
    }

    let k1 = split.soft_rhs(model, fields, t)?;
    let ua = cache.apply_half(&grid, &axpy_bundle(fields, half, &k1)?);
    let k2 = split.soft_rhs(model, &ua, t + half)?;

    let e_half_u = cache.apply_half(&grid, fields);
    let ub = axpy_bundle(&e_half_u, half, &k2)?;
    let k3 = split.soft_rhs(model, &ub, t + half)?;

    let e_full_u = cache.apply_full(&grid, fields);
    let e_half_k3 = cache.apply_half(&grid, &k3);
    let uc = axpy_bundle(&e_full_u, dt, &e_half_k3)?;
    let k4 = split.soft_rhs(model, &uc, t + dt)?;

    let e_full_k1 = cache.apply_full(&grid, &k1);
    let k23 = axpy_bundle(&k2, 1.0, &k3)?;
    let e_half_k23 = cache.apply_half(&grid, &k23);

    let mut out = e_full_u;
    out = axpy_bundle(&out, dt / 6.0, &e_full_k1)?;
    out = axpy_bundle(&out, dt / 3.0, &e_half_k23)?;
    out = axpy_bundle(&out, dt / 6.0, &k4)?;
    Ok(out)
}

/// ARS(4,4,3): 4-stage, third-order IMEX scheme, SDIRK implicit part with
/// diagonal 1/2, stiffly accurate (the last stage is the update).
fn step_ars443(
    model: &dyn Model,
    split: &SplitOperator,
    cache: &ImplicitCache,
    fields: &[SpectralField],
    t: f64,
) -> Result<Vec<SpectralField>> {
    let grid = model.grid().clone();
    let dt = cache.dt;
    // explicit tableau (hat), rows for stages 1..4
    let a_hat: [&[f64]; 4] = [
        &[0.5],
        &[11.0 / 18.0, 1.0 / 18.0],
        &[5.0 / 6.0, -5.0 / 6.0, 0.5],
        &[0.25, 7.0 / 4.0, 0.75, -7.0 / 4.0],
    ];
    // implicit tableau, columns for stages 1..i-1 (diagonal 1/2 handled by the solve)
    let a_imp: [&[f64]; 4] = [
        &[],
        &[1.0 / 6.0],
        &[-0.5, 0.5],
        &[1.5, -1.5, 0.5],
    ];
    let c_hat = [0.0, 0.5, 2.0 / 3.0, 0.5, 1.0];

    let mut soft_stages: Vec<Vec<SpectralField>> = Vec::with_capacity(5);
    let mut stiff_stages: Vec<Vec<SpectralField>> = Vec::with_capacity(4);
    soft_stages.push(split.soft_rhs(model, fields, t)?);

    let mut last_stage: Option<Vec<SpectralField>> = None;
    for i in 0..4 {
        let mut rhs = fields.to_vec();
        for (j, coeff) in a_hat[i].iter().enumerate() {
            rhs = axpy_bundle(&rhs, dt * coeff, &soft_stages[j])?;
        }
        for (j, coeff) in a_imp[i].iter().enumerate() {
            rhs = axpy_bundle(&rhs, dt * coeff, &stiff_stages[j])?;
        }
        let stage = cache.solve(&grid, &rhs);
        let stiff_i = split.apply(&stage);
        stiff_stages.push(stiff_i);
        if i < 3 {
            soft_stages.push(split.soft_rhs(model, &stage, t + c_hat[i + 1] * dt)?);
        }
        last_stage = Some(stage);
    }
    Ok(last_stage.expect("four stages executed"))
}

// Orders check for zero stiff part: both schemes reduce to classical explicit
// methods; exercised in the integrate tests.
