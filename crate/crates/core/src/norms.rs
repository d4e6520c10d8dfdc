//! Norm instrumentation: torus Sobolev norms `H^sigma`, the weighted norms
//! `H^sigma_rho = H^(sigma-1) + rho H^sigma`, the composite
//! sup-plus-dissipation norm accumulated along a trajectory, the initial-data
//! norm, and high/low frequency-split monitors cut at `|xi| ~ 1/(eps nu)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ParamTriple;
use crate::spectral::{apply_multiplier, div, mollifier_symbol, SpectralField};

/// `||u||_{H^sigma} = (sum_k <xi>^(2 sigma) |u_hat|^2)^(1/2)`.
pub fn sobolev_norm(u: &SpectralField, sigma: f64) -> f64 {
    sobolev_norm_sq(u, sigma).sqrt()
}

fn sobolev_norm_sq(u: &SpectralField, sigma: f64) -> f64 {
    let grid = u.grid();
    let mut acc = 0.0;
    for (flat, z) in u.coeffs().iter().enumerate() {
        let w = 1.0 + grid.xi_norm_sq(flat);
        acc += w.powf(sigma) * z.norm_sqr();
    }
    acc
}

/// `||grad u||_{H^sigma}^2` computed mode-wise (Nyquist masked per axis,
/// consistent with the derivative operators).
fn grad_sobolev_norm_sq(u: &SpectralField, sigma: f64) -> f64 {
    let grid = u.grid();
    let n = grid.points() as i64;
    let scale = grid.xi_scale();
    let mut k = [0i64; 3];
    let mut acc = 0.0;
    for (flat, z) in u.coeffs().iter().enumerate() {
        grid.k_tuple(flat, &mut k);
        let mut g = 0.0;
        let mut w = 1.0;
        for ki in &k[..grid.dim()] {
            let xi = scale * *ki as f64;
            w += xi * xi;
            if *ki != -n / 2 {
                g += xi * xi;
            }
        }
        acc += g * w.powf(sigma) * z.norm_sqr();
    }
    acc
}

/// Bundle norm of several components, `(sum_i ||u_i||^2)^(1/2)`.
pub fn bundle_sobolev_norm(fields: &[&SpectralField], sigma: f64) -> f64 {
    fields
        .iter()
        .map(|f| sobolev_norm_sq(f, sigma))
        .sum::<f64>()
        .sqrt()
}

/// Weighted norm `||u||_{H^sigma_rho} = ||u||_{H^(sigma-1)} + rho ||u||_{H^sigma}`.
pub fn weighted_norm(u: &SpectralField, sigma: f64, rho: f64) -> f64 {
    sobolev_norm(u, sigma - 1.0) + rho * sobolev_norm(u, sigma)
}

/// Weighted norm of a bundle.
pub fn bundle_weighted_norm(fields: &[&SpectralField], sigma: f64, rho: f64) -> f64 {
    bundle_sobolev_norm(fields, sigma - 1.0) + rho * bundle_sobolev_norm(fields, sigma)
}

/// Instantaneous bracket of the composite norm:
/// `||(p,v)||_{H^(s+1)_(eps nu)} + ||theta||_{H^(s+1)_nu}`.
/// This is also the initial-data norm.
pub fn instantaneous_bracket(
    p: &SpectralField,
    v: &[SpectralField],
    theta: &SpectralField,
    a: &ParamTriple,
    s: f64,
) -> f64 {
    let nu = a.nu();
    let mut pv: Vec<&SpectralField> = vec![p];
    pv.extend(v.iter());
    bundle_weighted_norm(&pv, s + 1.0, a.eps * nu) + weighted_norm(theta, s + 1.0, nu)
}

/// Initial-data norm `||(p,v,theta)||_{H^s_(a,0)}`.
pub fn initial_norm(
    p: &SpectralField,
    v: &[SpectralField],
    theta: &SpectralField,
    a: &ParamTriple,
    s: f64,
) -> f64 {
    instantaneous_bracket(p, v, theta, a, s)
}

/// Squared dissipation integrand of the composite norm:
/// `mu ||grad v||^2_{H^(s+1)_(eps nu)} + kappa ||grad theta||^2_{H^(s+1)_nu}
///  + kappa ||div v||^2_{H^s} + (mu+kappa) ||grad p||^2_{H^s}`.
pub fn dissipation_integrand(
    p: &SpectralField,
    v: &[SpectralField],
    theta: &SpectralField,
    a: &ParamTriple,
    s: f64,
) -> Result<f64> {
    let nu = a.nu();
    let eps_nu = a.eps * nu;
    let mut total = 0.0;
    if a.mu > 0.0 {
        let gv_low: f64 = v.iter().map(|vi| grad_sobolev_norm_sq(vi, s)).sum();
        let gv_high: f64 = v.iter().map(|vi| grad_sobolev_norm_sq(vi, s + 1.0)).sum();
        let gv = (gv_low.sqrt() + eps_nu * gv_high.sqrt()).powi(2);
        total += a.mu * gv;
    }
    if a.kappa > 0.0 {
        let gt = (grad_sobolev_norm_sq(theta, s).sqrt()
            + nu * grad_sobolev_norm_sq(theta, s + 1.0).sqrt())
        .powi(2);
        total += a.kappa * gt;
        let dv = div(v)?;
        total += a.kappa * sobolev_norm_sq(&dv, s);
    }
    if a.mu + a.kappa > 0.0 {
        total += (a.mu + a.kappa) * grad_sobolev_norm_sq(p, s);
    }
    Ok(total)
}

/// Running accumulator for the composite trajectory norm: a sup over recorded
/// times of the instantaneous bracket plus the square root of the
/// trapezoidal time integral of the dissipation integrand.
#[derive(Debug, Clone)]
pub struct CompositeNormAccumulator {
    params: ParamTriple,
    order_s: f64,
    sup_term: f64,
    integral_term: f64,
    last: Option<(f64, f64)>,
}

impl CompositeNormAccumulator {
    pub fn new(params: ParamTriple, order_s: f64) -> Self {
        CompositeNormAccumulator {
            params,
            order_s,
            sup_term: 0.0,
            integral_term: 0.0,
            last: None,
        }
    }

    pub fn record(
        &mut self,
        t: f64,
        p: &SpectralField,
        v: &[SpectralField],
        theta: &SpectralField,
    ) -> Result<()> {
        if let Some((t0, _)) = self.last {
            if t < t0 {
                return Err(Error::InvalidParameter(format!(
                    "non-monotone recording time {t} after {t0}"
                )));
            }
        }
        let bracket = instantaneous_bracket(p, v, theta, &self.params, self.order_s);
        self.sup_term = self.sup_term.max(bracket);
        let integrand = dissipation_integrand(p, v, theta, &self.params, self.order_s)?;
        if let Some((t0, i0)) = self.last {
            self.integral_term += 0.5 * (t - t0) * (i0 + integrand);
        }
        self.last = Some((t, integrand));
        Ok(())
    }

    pub fn sup_term(&self) -> f64 {
        self.sup_term
    }

    pub fn integral_term(&self) -> f64 {
        self.integral_term
    }

    /// `sup + sqrt(integral)`.
    pub fn value(&self) -> f64 {
        self.sup_term + self.integral_term.sqrt()
    }

    pub fn last_time(&self) -> Option<f64> {
        self.last.map(|(t, _)| t)
    }
}

/// Snapshot of the monitored norms at one time.
#[derive(Debug, Clone, Serialize)]
pub struct NormReport {
    pub time: f64,
    /// `H^s` norms of the individual components at the monitor order.
    pub h_sigma: Vec<(String, f64)>,
    /// Composite accumulator value up to this time.
    pub composite: f64,
    /// Instantaneous bracket of `J_(eps nu) U`.
    pub split_low: f64,
    /// Instantaneous bracket of `(I - J_(eps nu)) U`.
    pub split_high: f64,
}

impl NormReport {
    pub fn csv_header(&self) -> String {
        let mut cols = vec!["t".to_string()];
        cols.extend(self.h_sigma.iter().map(|(name, _)| name.clone()));
        cols.extend(
            ["composite", "split_low", "split_high"]
                .iter()
                .map(|s| s.to_string()),
        );
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut cols = vec![crate::report::fmt_float(self.time)];
        cols.extend(self.h_sigma.iter().map(|(_, v)| crate::report::fmt_float(*v)));
        cols.push(crate::report::fmt_float(self.composite));
        cols.push(crate::report::fmt_float(self.split_low));
        cols.push(crate::report::fmt_float(self.split_high));
        cols.join(",")
    }
}

/// Applies `J_(eps nu)` and `I - J_(eps nu)` to every component and returns
/// both instantaneous composite brackets (plus per-field `H^s` norms).
///
/// When `eps nu = 0` the low part is the whole state and the high bracket is
/// zero by convention.
pub fn frequency_split_report(
    time: f64,
    p: &SpectralField,
    v: &[SpectralField],
    theta: &SpectralField,
    a: &ParamTriple,
    s: f64,
    composite: f64,
) -> Result<NormReport> {
    let mut h_sigma = vec![(format!("H{s}_p"), sobolev_norm(p, s))];
    let vnorm = bundle_sobolev_norm(&v.iter().collect::<Vec<_>>(), s);
    h_sigma.push((format!("H{s}_v"), vnorm));
    h_sigma.push((format!("H{s}_theta"), sobolev_norm(theta, s)));

    let eps_nu = a.eps_nu();
    let (split_low, split_high) = if eps_nu == 0.0 {
        (instantaneous_bracket(p, v, theta, a, s), 0.0)
    } else {
        let h = eps_nu.min(1.0);
        let j = mollifier_symbol(h)?;
        let lp = apply_multiplier(&j, p)?;
        let lth = apply_multiplier(&j, theta)?;
        let lv: Vec<SpectralField> = v
            .iter()
            .map(|vi| apply_multiplier(&j, vi))
            .collect::<Result<_>>()?;
        let hp = p.sub(&lp)?;
        let hth = theta.sub(&lth)?;
        let hv: Vec<SpectralField> = v
            .iter()
            .zip(&lv)
            .map(|(vi, lvi)| vi.sub(lvi))
            .collect::<Result<_>>()?;
        (
            instantaneous_bracket(&lp, &lv, &lth, a, s),
            instantaneous_bracket(&hp, &hv, &hth, a, s),
        )
    };

    let report = NormReport {
        time,
        h_sigma,
        composite,
        split_low,
        split_high,
    };
    for (_, v) in &report.h_sigma {
        debug_assert!(*v >= 0.0 && v.is_finite());
    }
    Ok(report)
}
