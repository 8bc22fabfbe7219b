//! Large-`beta` limits of the dimensional functionals:
//!
//! * convex: `(beta - n) [(int (1 + phi/beta)_+^(-beta))^(-1/(beta-n)) - 1] -> -log int e^(-phi)`
//! * concave: `(beta + n) [(int (1 - phi/beta)_+^beta)^(1/(beta+n)) - 1] -> log int e^(-phi)`
//!
//! Powers go through `ln_1p` and `exp_m1`, and integrals through a shifted
//! log-sum-exp, so the differences stay accurate at `beta = 1e5` and beyond.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::Field;
use crate::geometry::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Convex,
    Concave,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitPoint {
    pub beta: f64,
    pub value: f64,
    /// `value - target`.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitSweep {
    pub branch: Branch,
    pub t: f64,
    pub target: f64,
    pub points: Vec<LimitPoint>,
    /// Least-squares slope of `ln |error|` against `ln beta`; `NaN` with fewer
    /// than two nonzero errors.
    pub decay_exponent: f64,
}

/// `ln sum_k exp(a_k)`.
fn log_sum_exp(a: impl Iterator<Item = f64> + Clone) -> f64 {
    let shift = a.clone().fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return shift;
    }
    shift + a.map(|v| (v - shift).exp()).sum::<f64>().ln()
}

fn values(mesh: &Mesh, field: &dyn Field, t: f64) -> Vec<f64> {
    mesh.interior_nodes.iter().map(|x| field.value(t, x)).collect()
}

/// The left-hand expression of the selected branch at one `beta`. Fails when
/// the base `1 +- phi/beta` is nonpositive at a node, since the positive-part
/// clamp would then be active.
pub fn limit_expression(mesh: &Mesh, field: &dyn Field, t: f64, beta: f64, branch: Branch) -> Result<f64> {
    let n = mesh.domain.dim() as f64;
    if !(beta > n) {
        return Err(Error::Hypothesis(format!(
            "limit sweep requires beta > n (beta = {beta}, n = {n})"
        )));
    }
    let sign = match branch {
        Branch::Convex => 1.0,
        Branch::Concave => -1.0,
    };
    let phi = values(mesh, field, t);
    let mut logs = Vec::with_capacity(phi.len());
    for (p, w) in phi.iter().zip(&mesh.interior_weights) {
        let ratio = sign * p / beta;
        if !(1.0 + ratio > 0.0) {
            return Err(Error::PositivePartClamp {
                beta,
                base: 1.0 + ratio,
            });
        }
        // Convex: (1 + phi/beta)^(-beta). Concave: (1 - phi/beta)^beta.
        logs.push(w.ln() - sign * beta * ratio.ln_1p());
    }
    let log_integral = log_sum_exp(logs.iter().copied());
    Ok(match branch {
        Branch::Convex => (beta - n) * (-log_integral / (beta - n)).exp_m1(),
        Branch::Concave => (beta + n) * (log_integral / (beta + n)).exp_m1(),
    })
}

/// `-log int e^(-phi)` for the convex branch, `+log int e^(-phi)` for the
/// concave one.
pub fn limit_target(mesh: &Mesh, field: &dyn Field, t: f64, branch: Branch) -> f64 {
    let phi = values(mesh, field, t);
    let log_integral = log_sum_exp(phi.iter().zip(&mesh.interior_weights).map(|(p, w)| w.ln() - p));
    match branch {
        Branch::Convex => -log_integral,
        Branch::Concave => log_integral,
    }
}

fn fitted_slope(points: &[LimitPoint]) -> f64 {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.error != 0.0 && p.error.is_finite())
        .map(|p| (p.beta.ln(), p.error.abs().ln()))
        .collect();
    if xy.len() < 2 {
        return f64::NAN;
    }
    let m = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / m;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Evaluates the branch at every `beta` (strictly increasing, all `> n`) and
/// fits the decay exponent of the error.
pub fn beta_limit_sweep(mesh: &Mesh, field: &dyn Field, t: f64, betas: &[f64], branch: Branch) -> Result<LimitSweep> {
    if betas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Hypothesis("beta values must be strictly increasing".into()));
    }
    let target = limit_target(mesh, field, t, branch);
    let points = betas
        .iter()
        .map(|&beta| {
            let value = limit_expression(mesh, field, t, beta, branch)?;
            Ok(LimitPoint {
                beta,
                value,
                error: value - target,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LimitSweep {
        branch,
        t,
        target,
        decay_exponent: fitted_slope(&points),
        points,
    })
}
