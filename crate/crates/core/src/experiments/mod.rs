//! Named, reproducible experiment drivers: each one turns a structural claim
//! of the uniform-stability theory into a measurement with explicit pass
//! criteria, emitting deterministic CSV/JSON/SVG reports.

pub mod acoustic_decay;
pub mod example42;
pub mod limit_convergence;
pub mod linearized_probe;
pub mod operator_suite;
pub mod sweep;

pub use acoustic_decay::{run_acoustic_decay, AcousticDecayReport};
pub use example42::{run_example42, Example42Report};
pub use limit_convergence::{run_limit_convergence, LimitConvergenceReport};
pub use linearized_probe::{run_linearized_probe, LinearizedProbeReport};
pub use operator_suite::{run_operator_suite, OperatorSuiteReport};
pub use sweep::{run_uniform_sweep, SweepReport, SweepRow};

use serde::Serialize;

/// One named check with its measured value and threshold.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    /// "<=" or ">=" or "in" (threshold is then the half-width around 1).
    pub relation: String,
    pub pass: bool,
}

impl CheckRow {
    pub fn le(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        CheckRow {
            name: name.into(),
            measured,
            threshold,
            relation: "<=".into(),
            pass: measured <= threshold && measured.is_finite(),
        }
    }

    pub fn ge(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        CheckRow {
            name: name.into(),
            measured,
            threshold,
            relation: ">=".into(),
            pass: measured >= threshold && measured.is_finite(),
        }
    }

    pub fn within(name: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Self {
        CheckRow {
            name: name.into(),
            measured,
            threshold: hi,
            relation: format!("in [{lo}, {hi}]"),
            pass: measured >= lo && measured <= hi && measured.is_finite(),
        }
    }
}

pub(crate) fn all_pass(checks: &[CheckRow]) -> bool {
    checks.iter().all(|c| c.pass)
}

/// Least-squares slope of `log(y)` against `log(x)`.
pub(crate) fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Composite Simpson rule over uniformly spaced samples (falls back to a
/// trapezoid for the final interval when the count is even).
pub(crate) fn simpson(values: &[f64], dt: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    let mut i = 0;
    while i + 2 < n {
        acc += dt / 3.0 * (values[i] + 4.0 * values[i + 1] + values[i + 2]);
        i += 2;
    }
    if i + 1 < n {
        acc += 0.5 * dt * (values[i] + values[i + 1]);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (1..6).map(|i| (i as f64, 3.0 * (i as f64).powi(2))).collect();
        assert!((loglog_slope(&pts) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn simpson_exact_for_cubics() {
        let n = 101;
        let dt = 1.0 / (n - 1) as f64;
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 * dt;
                t * t * t - 2.0 * t + 1.0
            })
            .collect();
        let exact = 0.25 - 1.0 + 1.0;
        assert!((simpson(&vals, dt) - exact).abs() < 1e-14);
    }
}
