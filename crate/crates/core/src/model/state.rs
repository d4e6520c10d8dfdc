use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::{SpectralField, SpectralGrid};

/// Unknown triple `(p, v, theta)` of the fluctuation systems: pressure
/// fluctuation, velocity components, temperature fluctuation on one grid.
#[derive(Debug, Clone)]
pub struct StateU {
    pub p: SpectralField,
    pub v: Vec<SpectralField>,
    pub theta: SpectralField,
}

impl StateU {
    pub fn zero(grid: &Arc<SpectralGrid>) -> Self {
        StateU {
            p: SpectralField::zero(grid),
            v: (0..grid.dim()).map(|_| SpectralField::zero(grid)).collect(),
            theta: SpectralField::zero(grid),
        }
    }

    pub fn new(p: SpectralField, v: Vec<SpectralField>, theta: SpectralField) -> Result<Self> {
        let grid = p.grid().clone();
        if v.len() != grid.dim() {
            return Err(Error::InvalidParameter(format!(
                "velocity has {} components on a {}-d grid",
                v.len(),
                grid.dim()
            )));
        }
        for f in v.iter().chain([&theta]) {
            if **f.grid() != *grid {
                return Err(Error::GridMismatch);
            }
        }
        Ok(StateU { p, v, theta })
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        self.p.grid()
    }

    /// Bundle layout `[p, v_1..v_d, theta]` used by the time stepper.
    pub fn to_bundle(&self) -> Vec<SpectralField> {
        let mut out = vec![self.p.clone()];
        out.extend(self.v.iter().cloned());
        out.push(self.theta.clone());
        out
    }

    pub fn from_bundle(fields: &[SpectralField]) -> Self {
        let d = fields.len() - 2;
        StateU {
            p: fields[0].clone(),
            v: fields[1..1 + d].to_vec(),
            theta: fields[1 + d].clone(),
        }
    }
}

/// Primitive unknowns `(P, v, T)` with pointwise-positive `P` and `T`.
#[derive(Debug, Clone)]
pub struct PrimitiveState {
    pub pressure: SpectralField,
    pub v: Vec<SpectralField>,
    pub temperature: SpectralField,
}

impl PrimitiveState {
    pub fn check_positive(&self) -> Result<()> {
        let pmin = self
            .pressure
            .samples()
            .iter()
            .fold(f64::INFINITY, |m, &x| m.min(x));
        if pmin <= 0.0 {
            return Err(Error::NonPhysicalState(format!(
                "pressure reaches {pmin:.3e}"
            )));
        }
        let tmin = self
            .temperature
            .samples()
            .iter()
            .fold(f64::INFINITY, |m, &x| m.min(x));
        if tmin <= 0.0 {
            return Err(Error::NonPhysicalState(format!(
                "temperature reaches {tmin:.3e}"
            )));
        }
        Ok(())
    }

    pub fn to_bundle(&self) -> Vec<SpectralField> {
        let mut out = vec![self.pressure.clone()];
        out.extend(self.v.iter().cloned());
        out.push(self.temperature.clone());
        out
    }

    pub fn from_bundle(fields: &[SpectralField]) -> Self {
        let d = fields.len() - 2;
        PrimitiveState {
            pressure: fields[0].clone(),
            v: fields[1..1 + d].to_vec(),
            temperature: fields[1 + d].clone(),
        }
    }
}

/// Wave-equation unknowns `(u, w = du/dt)`.
#[derive(Debug, Clone)]
pub struct WaveState {
    pub u: SpectralField,
    pub w: SpectralField,
}

/// Forward change of variables `p = log(P/Pbar)/eps`, `theta = log(T/Tbar)`,
/// evaluated pointwise. The spectra are kept untruncated so the round trip
/// with [`from_fluctuation`] is an identity to rounding.
pub fn to_fluctuation(
    state: &PrimitiveState,
    eps: f64,
    p_bar: f64,
    t_bar: f64,
) -> Result<StateU> {
    if !(eps > 0.0) || !(p_bar > 0.0) || !(t_bar > 0.0) {
        return Err(Error::InvalidParameter(
            "to_fluctuation requires eps, Pbar, Tbar > 0".into(),
        ));
    }
    state.check_positive()?;
    let grid = state.pressure.grid().clone();
    let p_samples: Vec<f64> = state
        .pressure
        .samples()
        .iter()
        .map(|&x| (x / p_bar).ln() / eps)
        .collect();
    let t_samples: Vec<f64> = state
        .temperature
        .samples()
        .iter()
        .map(|&x| (x / t_bar).ln())
        .collect();
    Ok(StateU {
        p: SpectralField::from_samples(&grid, &p_samples)?,
        v: state.v.clone(),
        theta: SpectralField::from_samples(&grid, &t_samples)?,
    })
}

/// Inverse map `P = Pbar exp(eps p)`, `T = Tbar exp(theta)`.
pub fn from_fluctuation(
    state: &StateU,
    eps: f64,
    p_bar: f64,
    t_bar: f64,
) -> Result<PrimitiveState> {
    if !(eps > 0.0) || !(p_bar > 0.0) || !(t_bar > 0.0) {
        return Err(Error::InvalidParameter(
            "from_fluctuation requires eps, Pbar, Tbar > 0".into(),
        ));
    }
    let grid = state.p.grid().clone();
    let p_samples: Vec<f64> = state
        .p
        .samples()
        .iter()
        .map(|&x| p_bar * (eps * x).exp())
        .collect();
    let t_samples: Vec<f64> = state
        .theta
        .samples()
        .iter()
        .map(|&x| t_bar * x.exp())
        .collect();
    Ok(PrimitiveState {
        pressure: SpectralField::from_samples(&grid, &p_samples)?,
        v: state.v.clone(),
        temperature: SpectralField::from_samples(&grid, &t_samples)?,
    })
}
