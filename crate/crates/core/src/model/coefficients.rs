//! Coefficient sets defining a model instance, the perfect-gas preset, and
//! the structural-assumption validator.
//!
//! A coefficient set carries the smooth maps
//! `g1, g2, g3 : (theta, eps p) -> (0, inf)`,
//! `chi1, chi2, chi3 : eps p -> (0, inf)` with `chi1 < chi3`,
//! `beta, zeta : theta -> (0, inf)`, `eta : theta -> R` with `eta + zeta > 0`,
//! the dissipation exponent `alpha >= 0`, and (when available) the entropy
//! and density potentials `S`, `varrho` satisfying
//! `dS = g3 dtheta - g1 dwp` and `dvarrho = -(chi1/chi3) g3 dtheta + g1 dwp`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};

type Map2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type Map1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Smooth material law in the temperature variable, serializable for
/// configuration files. `PowerLaw { coeff, exponent }` is `coeff * T^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MaterialLaw {
    Constant { value: f64 },
    PowerLaw { coeff: f64, exponent: f64 },
}

impl MaterialLaw {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            MaterialLaw::Constant { value } => value,
            MaterialLaw::PowerLaw { coeff, exponent } => coeff * t.powf(exponent),
        }
    }

    pub fn constant(value: f64) -> Self {
        MaterialLaw::Constant { value }
    }
}

/// The coefficient functions of one model instance.
#[derive(Clone)]
pub struct CoefficientSet {
    pub g1: Map2,
    pub g2: Map2,
    pub g3: Map2,
    pub chi1: Map1,
    pub chi2: Map1,
    pub chi3: Map1,
    pub beta: Map1,
    /// Analytic derivative of `beta` when known (used by the limit-system
    /// constraint transport); falls back to central differences otherwise.
    pub beta_prime: Option<Map1>,
    pub zeta: Map1,
    pub eta: Map1,
    /// Entropy potential `S(theta, wp)` with `S(0,0) = 0`.
    pub entropy: Option<Map2>,
    /// Density potential `varrho(theta, wp)` with `varrho(0,0) = 0`.
    pub varrho: Option<Map2>,
    /// Inverse of `varrho` in its second slot: `wp = pressure_of(theta, rho)`.
    pub pressure_of: Option<Map2>,
    /// Exponent in the dissipation source `Q = eps^alpha mu sigma . Dv`.
    pub alpha: f64,
    /// Human-readable tag echoed into reports.
    pub label: String,
}

impl std::fmt::Debug for CoefficientSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoefficientSet")
            .field("label", &self.label)
            .field("alpha", &self.alpha)
            .finish()
    }
}

impl CoefficientSet {
    /// Numerical derivative of `beta`, preferring the stored closed form.
    pub fn beta_deriv(&self, theta: f64) -> f64 {
        if let Some(bp) = &self.beta_prime {
            bp(theta)
        } else {
            let h = 1e-6;
            ((self.beta)(theta + h) - (self.beta)(theta - h)) / (2.0 * h)
        }
    }
}

/// Perfect-gas coefficient set in the fluctuation variables, with reference
/// state `P = T = 1`:
///
/// `g1 = 1/gamma`, `g2 = 1/(R T)`, `g3 = C_V / R`,
/// `chi1 = (gamma-1)/(gamma P)`, `chi2 = chi3 = 1/P`, `beta = k(T) T`,
/// with `P = e^(eps p)`, `T = e^theta` and `gamma = 1 + R/C_V`. The closed
/// forms `S = (C_V/R) theta - wp/gamma` and `varrho = (wp - theta)/gamma`
/// integrate the compatibility differentials exactly; the inverse pressure
/// map is `wp = gamma rho + theta`.
pub fn perfect_gas(
    r_gas: f64,
    c_v: f64,
    conductivity: MaterialLaw,
    shear_viscosity: MaterialLaw,
    bulk_viscosity: MaterialLaw,
    alpha: f64,
) -> Result<CoefficientSet> {
    if !(r_gas > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "perfect gas requires R > 0, got {r_gas}"
        )));
    }
    if !(c_v > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "perfect gas requires C_V > 0, got {c_v}"
        )));
    }
    if alpha < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "alpha must be nonnegative, got {alpha}"
        )));
    }
    let gamma = 1.0 + r_gas / c_v;
    let k = conductivity;
    let zeta = shear_viscosity;
    let eta = bulk_viscosity;
    Ok(CoefficientSet {
        g1: Arc::new(move |_, _| 1.0 / gamma),
        g2: Arc::new(move |theta, _| 1.0 / (r_gas * theta.exp())),
        g3: Arc::new(move |_, _| c_v / r_gas),
        chi1: Arc::new(move |wp| (gamma - 1.0) / (gamma * wp.exp())),
        chi2: Arc::new(move |wp| (-wp).exp()),
        chi3: Arc::new(move |wp| (-wp).exp()),
        beta: Arc::new(move |theta| {
            let t = theta.exp();
            k.eval(t) * t
        }),
        beta_prime: Some(Arc::new(move |theta| {
            // d/dtheta [k(e^theta) e^theta] = (k'(T) T + k(T)) T
            let t = theta.exp();
            let kp = match k {
                MaterialLaw::Constant { .. } => 0.0,
                MaterialLaw::PowerLaw { coeff, exponent } => {
                    coeff * exponent * t.powf(exponent - 1.0)
                }
            };
            (kp * t + k.eval(t)) * t
        })),
        zeta: Arc::new(move |theta| zeta.eval(theta.exp())),
        eta: Arc::new(move |theta| eta.eval(theta.exp())),
        entropy: Some(Arc::new(move |theta, wp| c_v / r_gas * theta - wp / gamma)),
        varrho: Some(Arc::new(move |theta, wp| (wp - theta) / gamma)),
        pressure_of: Some(Arc::new(move |theta, rho| gamma * rho + theta)),
        alpha,
        label: format!("perfect-gas(R={r_gas},C_V={c_v})"),
    })
}

/// Default laboratory gas: `R = 1`, `C_V = 3/2` (gamma = 5/3), `k = zeta = 1`,
/// `eta = 0`, `alpha = 1`.
pub fn default_perfect_gas() -> CoefficientSet {
    perfect_gas(
        1.0,
        1.5,
        MaterialLaw::constant(1.0),
        MaterialLaw::constant(1.0),
        MaterialLaw::constant(0.0),
        1.0,
    )
    .expect("default parameters are valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClauseStatus {
    Pass,
    Fail,
    NotChecked,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClauseResult {
    pub name: String,
    pub status: ClauseStatus,
    /// Worst-case margin of the inequality over the sample box (positive
    /// means satisfied; for identity clauses, the worst relative error).
    pub margin: f64,
    /// Sample point attaining the worst margin.
    pub worst_point: (f64, f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub clauses: Vec<ClauseResult>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.clauses.iter().all(|c| c.status != ClauseStatus::Fail)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "pass": self.pass(),
            "clauses": self.clauses,
        })
    }
}

/// Samples the structural assumptions (positivity of the `g_i`, `beta`,
/// `zeta`, `eta + zeta`, `chi_i`; the gap `chi1 < chi3`) and, when the
/// potentials are present, the compatibility differentials by central finite
/// differences, over a lattice on `[-range, range]^2` in `(theta, wp)`.
pub fn validate_assumptions(
    c: &CoefficientSet,
    range: f64,
    samples_per_axis: usize,
) -> Result<ValidationReport> {
    if samples_per_axis < 10 {
        return Err(Error::InvalidParameter(format!(
            "need at least 10 samples per axis, got {samples_per_axis}"
        )));
    }
    let n = samples_per_axis;
    let coord = |i: usize| -range + 2.0 * range * i as f64 / (n - 1) as f64;

    struct Clause {
        name: &'static str,
        margin: f64,
        point: (f64, f64),
    }
    let mut margins: Vec<Clause> = [
        "A1: g1 > 0",
        "A1: g2 > 0",
        "A1: g3 > 0",
        "A2: beta > 0",
        "A2: zeta > 0",
        "A2: eta + zeta > 0",
        "A3: chi1 > 0",
        "A3: chi2 > 0",
        "A3: chi3 > 0",
        "A3: chi1 < chi3",
    ]
    .iter()
    .map(|&name| Clause {
        name,
        margin: f64::INFINITY,
        point: (0.0, 0.0),
    })
    .collect();

    for i in 0..n {
        for j in 0..n {
            let th = coord(i);
            let wp = coord(j);
            let vals = [
                (c.g1)(th, wp),
                (c.g2)(th, wp),
                (c.g3)(th, wp),
                (c.beta)(th),
                (c.zeta)(th),
                (c.eta)(th) + (c.zeta)(th),
                (c.chi1)(wp),
                (c.chi2)(wp),
                (c.chi3)(wp),
                (c.chi3)(wp) - (c.chi1)(wp),
            ];
            for (clause, v) in margins.iter_mut().zip(vals) {
                if v < clause.margin {
                    clause.margin = v;
                    clause.point = (th, wp);
                }
            }
        }
    }

    let mut clauses: Vec<ClauseResult> = margins
        .into_iter()
        .map(|cl| ClauseResult {
            name: cl.name.to_string(),
            status: if cl.margin > 0.0 {
                ClauseStatus::Pass
            } else {
                ClauseStatus::Fail
            },
            margin: cl.margin,
            worst_point: cl.point,
        })
        .collect();

    // Compatibility identities via central differences, relative tolerance 1e-6.
    let fd_clauses: [(&str, Option<&Map2>, Box<dyn Fn(f64, f64) -> (f64, f64)>); 4] = [
        (
            "(2.2): dS/dtheta = g3",
            c.entropy.as_ref(),
            Box::new(|th, wp| ((c.g3)(th, wp), 0.0)),
        ),
        (
            "(2.2): dS/dwp = -g1",
            c.entropy.as_ref(),
            Box::new(|th, wp| (-(c.g1)(th, wp), 1.0)),
        ),
        (
            "(2.2): dvarrho/dtheta = -(chi1/chi3) g3",
            c.varrho.as_ref(),
            Box::new(|th, wp| (-(c.chi1)(wp) / (c.chi3)(wp) * (c.g3)(th, wp), 0.0)),
        ),
        (
            "(2.2): dvarrho/dwp = g1",
            c.varrho.as_ref(),
            Box::new(|th, wp| ((c.g1)(th, wp), 1.0)),
        ),
    ];
    let h = 1e-4 * range.max(1.0);
    for (name, map, target) in fd_clauses {
        match map {
            None => clauses.push(ClauseResult {
                name: name.to_string(),
                status: ClauseStatus::NotChecked,
                margin: f64::NAN,
                worst_point: (0.0, 0.0),
            }),
            Some(map) => {
                let mut worst = 0.0f64;
                let mut point = (0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        let th = coord(i);
                        let wp = coord(j);
                        let (expect, slot) = target(th, wp);
                        let fd = if slot == 0.0 {
                            (map(th + h, wp) - map(th - h, wp)) / (2.0 * h)
                        } else {
                            (map(th, wp + h) - map(th, wp - h)) / (2.0 * h)
                        };
                        let rel = (fd - expect).abs() / expect.abs().max(1e-12);
                        if rel > worst {
                            worst = rel;
                            point = (th, wp);
                        }
                    }
                }
                clauses.push(ClauseResult {
                    name: name.to_string(),
                    status: if worst <= 1e-6 {
                        ClauseStatus::Pass
                    } else {
                        ClauseStatus::Fail
                    },
                    margin: worst,
                    worst_point: point,
                });
            }
        }
    }

    // Potentials vanish at the origin.
    for (name, map) in [("S(0,0) = 0", &c.entropy), ("varrho(0,0) = 0", &c.varrho)] {
        match map {
            None => clauses.push(ClauseResult {
                name: name.to_string(),
                status: ClauseStatus::NotChecked,
                margin: f64::NAN,
                worst_point: (0.0, 0.0),
            }),
            Some(m) => {
                let v = m(0.0, 0.0).abs();
                clauses.push(ClauseResult {
                    name: name.to_string(),
                    status: if v <= 1e-12 {
                        ClauseStatus::Pass
                    } else {
                        ClauseStatus::Fail
                    },
                    margin: v,
                    worst_point: (0.0, 0.0),
                });
            }
        }
    }

    Ok(ValidationReport { clauses })
}
