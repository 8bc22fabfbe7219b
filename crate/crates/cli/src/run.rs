//! Executes a validated [`RunConfig`] and decides pass or fail.
//!
//! Every `t` value is evaluated independently on the rayon pool. Results are
//! collected in input order, so output does not depend on scheduling.

use marginal_core::elliptic::SolverOptions;
use marginal_core::identity::{
    beta_limit_sweep, certify, check_ibp_identities, solve_instance, verify_identity, Case, CertificateEntry,
    IbpResiduals, IdentityReport, LimitSweep, VerifyOptions,
};
use marginal_core::{build_mesh, Builtin, Error as CoreError, Mesh, Resolution, Stage};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Mode, RunConfig, Tolerances};

/// Error ratio between the base and the doubled resolution, and whether it
/// meets the refinement requirement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Refinement {
    pub base: f64,
    pub refined: f64,
    pub ratio: f64,
    pub pass: bool,
}

impl Refinement {
    pub fn new(base: f64, refined: f64, tol: &Tolerances) -> Self {
        let ratio = base / refined;
        let converged = base <= tol.refinement_floor && refined <= tol.refinement_floor;
        Refinement {
            base,
            refined,
            ratio,
            pass: converged || ratio >= tol.refinement_ratio,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyRow {
    pub report: IdentityReport,
    pub refined_spread: f64,
    pub refinement: Refinement,
    pub identity_pass: bool,
    pub solver_pass: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifyRow {
    pub entry: CertificateEntry,
    pub solver_pass: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IbpCheck {
    pub name: &'static str,
    pub refinement: Refinement,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct IbpRow {
    pub t: f64,
    pub base: IbpResiduals,
    pub refined: IbpResiduals,
    pub checks: [IbpCheck; 4],
    pub algebraic_residual: f64,
    pub solver_pass: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitRow {
    pub sweep: LimitSweep,
    pub final_error: f64,
    pub error_pass: bool,
    pub exponent_pass: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", content = "rows", rename_all = "snake_case")]
pub enum Rows {
    Verify(Vec<VerifyRow>),
    Certify(Vec<CertifyRow>),
    Ibp(Vec<IbpRow>),
    Limit(Vec<LimitRow>),
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub config: RunConfig,
    /// Doubled resolution used for refinement checks, where one is run.
    pub refined_resolution: Option<Resolution>,
    pub rows: Rows,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        match &self.rows {
            Rows::Verify(r) => r.iter().all(|r| r.pass),
            Rows::Certify(r) => r.iter().all(|r| r.pass),
            Rows::Ibp(r) => r.iter().all(|r| r.pass),
            Rows::Limit(r) => r.iter().all(|r| r.pass),
        }
    }

    /// One human-readable line per failed row.
    pub fn failures(&self) -> Vec<String> {
        match &self.rows {
            Rows::Verify(rows) => rows
                .iter()
                .filter(|r| !r.pass)
                .map(|r| {
                    format!(
                        "t = {}: spread {:.3e} (tol {:.1e}), refinement ratio {:.2}, solver residual {:.3e}",
                        r.report.t,
                        r.report.residuals.spread(),
                        self.config.tolerances.identity_rel,
                        r.refinement.ratio,
                        r.report.diagnostics.algebraic_residual
                    )
                })
                .collect(),
            Rows::Certify(rows) => rows
                .iter()
                .filter(|r| !r.pass)
                .map(|r| {
                    let bad: Vec<&str> = r
                        .entry
                        .signs
                        .terms
                        .iter()
                        .zip(marginal_core::identity::TermSet::NAMES)
                        .filter(|(s, _)| !s.pass)
                        .map(|(_, name)| name)
                        .collect();
                    format!(
                        "t = {}: failed signs {:?}, phi2 sign {}, solver {}",
                        r.entry.t,
                        bad,
                        flag(r.entry.phi2_pass),
                        flag(r.solver_pass)
                    )
                })
                .collect(),
            Rows::Ibp(rows) => rows
                .iter()
                .filter(|r| !r.pass)
                .map(|r| {
                    let bad: Vec<String> = r
                        .checks
                        .iter()
                        .filter(|c| !c.pass)
                        .map(|c| format!("{} {:.3e} (ratio {:.2})", c.name, c.refinement.base, c.refinement.ratio))
                        .collect();
                    format!("t = {}: {}", r.t, bad.join(", "))
                })
                .collect(),
            Rows::Limit(rows) => rows
                .iter()
                .filter(|r| !r.pass)
                .map(|r| {
                    format!(
                        "t = {}: final error {:.3e} ({}), decay exponent {:.3} ({})",
                        r.sweep.t,
                        r.final_error,
                        flag(r.error_pass),
                        r.sweep.decay_exponent,
                        flag(r.exponent_pass)
                    )
                })
                .collect(),
        }
    }
}

pub(crate) fn flag(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "fail"
    }
}

fn options(config: &RunConfig) -> VerifyOptions {
    VerifyOptions {
        h_t: config.h_t,
        solver: SolverOptions::default(),
        sign_slack: config.tolerances.sign_slack,
    }
}

fn mesh_at(config: &RunConfig, resolution: Resolution) -> Result<Mesh, CoreError> {
    build_mesh(&config.domain, resolution)
}

/// Runs the configured mode.
pub fn execute(config: &RunConfig) -> Result<Outcome, CoreError> {
    let mut refined_resolution = None;
    let rows = match config.mode {
        Mode::Verify => {
            let refined = config.resolution.doubled();
            refined_resolution = Some(refined);
            Rows::Verify(run_verify(config, refined)?)
        }
        Mode::IbpCheck => {
            let refined = config.resolution.doubled();
            refined_resolution = Some(refined);
            Rows::Ibp(run_ibp(config, refined)?)
        }
        Mode::CertifyConvex => Rows::Certify(run_certify(config, Case::Convex)?),
        Mode::CertifyConcave => Rows::Certify(run_certify(config, Case::Concave)?),
        Mode::BetaLimit => Rows::Limit(run_limit(config)?),
    };
    Ok(Outcome {
        config: config.clone(),
        refined_resolution,
        rows,
    })
}

fn beta(config: &RunConfig) -> f64 {
    config.beta.expect("validated configs carry beta outside beta_limit")
}

fn run_verify(config: &RunConfig, refined: Resolution) -> Result<Vec<VerifyRow>, CoreError> {
    let (coarse, fine) = (mesh_at(config, config.resolution)?, mesh_at(config, refined)?);
    let (field, beta, opts, tol) = (&config.field, beta(config), options(config), config.tolerances);
    config
        .t_values
        .par_iter()
        .map(|&t| {
            let report = verify_identity(&coarse, field, t, beta, &opts)?;
            let refined = verify_identity(&fine, field, t, beta, &opts)?;
            let spread = report.residuals.spread();
            let refinement = Refinement::new(spread, refined.residuals.spread(), &tol);
            let identity_pass = spread <= tol.identity_rel;
            let solver_pass = report.diagnostics.algebraic_residual <= tol.solver_residual;
            Ok(VerifyRow {
                refined_spread: refined.residuals.spread(),
                pass: identity_pass && refinement.pass && solver_pass,
                report,
                refinement,
                identity_pass,
                solver_pass,
            })
        })
        .collect()
}

fn ibp_at(mesh: &Mesh, field: &Builtin, t: f64, beta: f64) -> Result<(IbpResiduals, f64), CoreError> {
    let inst = solve_instance(mesh, field, t, beta, SolverOptions::default())?;
    let residuals = check_ibp_identities(mesh, field, &inst).map_err(|e| e.at(Stage::Terms, t))?;
    Ok((residuals, inst.solution.diagnostics.algebraic_residual))
}

fn run_ibp(config: &RunConfig, refined: Resolution) -> Result<Vec<IbpRow>, CoreError> {
    let (coarse, fine) = (mesh_at(config, config.resolution)?, mesh_at(config, refined)?);
    let (field, beta, tol) = (&config.field, beta(config), config.tolerances);
    config
        .t_values
        .par_iter()
        .map(|&t| {
            let (base, algebraic_residual) = ibp_at(&coarse, field, t, beta)?;
            let (refined, _) = ibp_at(&fine, field, t, beta)?;
            let (b, r) = (base.to_array(), refined.to_array());
            let checks: [IbpCheck; 4] = std::array::from_fn(|i| {
                let refinement = Refinement::new(b[i].residual, r[i].residual, &tol);
                IbpCheck {
                    name: IbpResiduals::NAMES[i],
                    pass: b[i].residual <= tol.ibp_rel && refinement.pass,
                    refinement,
                }
            });
            let solver_pass = algebraic_residual <= tol.solver_residual;
            Ok(IbpRow {
                t,
                base,
                refined,
                pass: solver_pass && checks.iter().all(|c| c.pass),
                checks,
                algebraic_residual,
                solver_pass,
            })
        })
        .collect()
}

fn run_certify(config: &RunConfig, case: Case) -> Result<Vec<CertifyRow>, CoreError> {
    let mesh = mesh_at(config, config.resolution)?;
    let (field, beta, opts, tol) = (&config.field, beta(config), options(config), config.tolerances);
    config
        .t_values
        .par_iter()
        .map(|&t| {
            let cert = certify(case, &mesh, field, &[t], beta, &opts)?;
            let entry = cert.entries.into_iter().next().expect("one entry per t");
            let solver_pass = entry.diagnostics.algebraic_residual <= tol.solver_residual;
            Ok(CertifyRow {
                pass: entry.pass() && solver_pass,
                entry,
                solver_pass,
            })
        })
        .collect()
}

fn run_limit(config: &RunConfig) -> Result<Vec<LimitRow>, CoreError> {
    let mesh = mesh_at(config, config.resolution)?;
    let branch = config.branch.expect("validated beta_limit configs carry a branch");
    let tol = config.tolerances;
    config
        .t_values
        .par_iter()
        .map(|&t| {
            let sweep = beta_limit_sweep(&mesh, &config.field, t, &config.beta_values, branch)?;
            let final_error = sweep.points.last().map_or(f64::NAN, |p| p.error);
            let error_pass = final_error.abs() <= tol.limit_error;
            let exponent_pass = (sweep.decay_exponent - tol.limit_exponent).abs() <= tol.limit_exponent_tol;
            Ok(LimitRow {
                sweep,
                final_error,
                error_pass,
                exponent_pass,
                pass: error_pass && exponent_pass,
            })
        })
        .collect()
}
