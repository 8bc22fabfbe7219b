//! Second derivative of `Phi(t)` computed three ways: from the four-term
//! decomposition built on the Neumann solution `u`, from the direct variance
//! formula, and by finite differences of `Phi` itself.
//!
//! Every evaluator takes the exponent `beta` literally. The concave functional
//! `(int phi^beta)^(1/(beta+n))` is the same machinery run at `-beta`.

mod certify;
mod ibp;
mod limit;
mod terms;

pub use certify::{certify, Case, Certificate, CertificateEntry, Orientation, SignCertificate, TermSign};
pub use ibp::{check_ibp_identities, IbpResidual, IbpResiduals};
pub use limit::{beta_limit_sweep, limit_expression, limit_target, Branch, LimitPoint, LimitSweep};
pub use terms::{
    hs_defect, tangential_gradient, term_boundary, term_hessian_x, term_hs_defect, term_integrands, term_square,
    TermIntegrands, TermSet, BC_ABSOLUTE_FLOOR, BC_RELATIVE_THRESHOLD,
};

use serde::Serialize;

use crate::elliptic::{
    apply_strong_operator, solve_for_measure, Diagnostics, NeumannSolution, SolverOptions, MIN_STENCIL_NODES,
};
use crate::error::{Error, Result, Stage};
use crate::fields::Field;
use crate::geometry::Mesh;
use crate::measure::{build_measure, eval_phi, mean_under_mu, variance_under_mu, MeasureState};

/// `|Phi''|` below `PHI2_FLOOR * Phi` counts as zero when forming relative
/// residuals.
pub const PHI2_FLOOR: f64 = 1e-6;

pub fn default_h_t(t: f64) -> f64 {
    1e-3 * (1.0 + t.abs())
}

/// Checks that the field matches the mesh dimension and that every node lies
/// in the validity box for all times in `[t_lo, t_hi]`.
pub fn check_admissible(mesh: &Mesh, field: &dyn Field, t_lo: f64, t_hi: f64) -> Result<()> {
    if field.dim() != mesh.domain.dim() {
        return Err(Error::Hypothesis(format!(
            "field `{}` has dimension {}, domain has dimension {}",
            field.name(),
            field.dim(),
            mesh.domain.dim()
        )));
    }
    // The box is a product, so the two time endpoints suffice.
    for x in mesh.interior_nodes.iter().chain(&mesh.boundary_nodes) {
        field.check_point(t_lo, x)?;
        field.check_point(t_hi, x)?;
    }
    Ok(())
}

fn check_beta(beta: f64, n: usize) -> Result<()> {
    if beta == 0.0 {
        return Err(Error::BetaZero);
    }
    if beta == n as f64 {
        return Err(Error::BetaEqualsDimension { n });
    }
    if !beta.is_finite() {
        return Err(Error::Hypothesis(format!("beta must be finite, got {beta}")));
    }
    Ok(())
}

/// `d_t phi / phi` at the interior nodes.
pub fn time_log_derivative(mesh: &Mesh, field: &dyn Field, t: f64) -> Vec<f64> {
    mesh.interior_nodes
        .iter()
        .map(|x| field.dt(t, x) / field.value(t, x))
        .collect()
}

/// Everything the decomposition needs at one `(t, beta)`.
#[derive(Debug, Clone)]
pub struct SolvedInstance {
    pub t: f64,
    pub beta: f64,
    pub state: MeasureState,
    /// `g = d_t phi / phi`.
    pub g: Vec<f64>,
    /// `int g d mu_t`.
    pub mean_g: f64,
    /// Right-hand side `g - mean_g`.
    pub f: Vec<f64>,
    pub solution: NeumannSolution,
}

impl SolvedInstance {
    pub fn phi(&self, n: usize) -> f64 {
        (-self.state.log_z / (self.beta - n as f64)).exp()
    }
}

/// Builds `mu_t` and solves `L_t u = g - int g d mu_t` with Neumann data.
pub fn solve_instance(
    mesh: &Mesh,
    field: &dyn Field,
    t: f64,
    beta: f64,
    options: SolverOptions,
) -> Result<SolvedInstance> {
    check_admissible(mesh, field, t, t).map_err(|e| e.at(Stage::Measure, t))?;
    let nodes = mesh.resolution.min_nodes();
    if nodes < MIN_STENCIL_NODES {
        return Err(Error::UnderResolved {
            nodes,
            required: MIN_STENCIL_NODES,
        }
        .at(Stage::Solve, t));
    }
    let state = build_measure(mesh, field, t, beta).map_err(|e| e.at(Stage::Measure, t))?;
    let g = time_log_derivative(mesh, field, t);
    let mean_g = mean_under_mu(&state, &g)?;
    let f: Vec<f64> = g.iter().map(|v| v - mean_g).collect();
    let mut solution = solve_for_measure(mesh, field, &state, &f, options).map_err(|e| e.at(Stage::Solve, t))?;
    // Relative to max(|f|, |g|): f vanishes to rounding for separable fields.
    let lu = apply_strong_operator(mesh, field, t, beta, &solution.derivatives);
    let scale = f.iter().chain(&g).fold(0.0f64, |m, v| m.max(v.abs()));
    let worst = lu.iter().zip(&f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    solution.diagnostics.strong_residual = Some(if scale > 0.0 { worst / scale } else { worst });
    Ok(SolvedInstance {
        t,
        beta,
        state,
        g,
        mean_g,
        f,
        solution,
    })
}

/// `Phi'' = Phi * (T1 + T2 + T3 + T4)`.
pub fn phi2_from_terms(phi: f64, terms: &TermSet) -> f64 {
    terms.sum() * phi
}

/// `Phi''` from the direct formula
/// `((beta - n)/beta) Phi''/Phi = E[phi_tt/phi] - (beta + 1) Var(g) + n/(beta - n) E[g]^2`.
/// Needs no PDE solve.
pub fn phi2_from_variance(mesh: &Mesh, field: &dyn Field, t: f64, beta: f64) -> Result<f64> {
    let n = mesh.domain.dim();
    check_beta(beta, n)?;
    check_admissible(mesh, field, t, t)?;
    let state = build_measure(mesh, field, t, beta)?;
    let g = time_log_derivative(mesh, field, t);
    let tt: Vec<f64> = mesh
        .interior_nodes
        .iter()
        .map(|x| field.dtt(t, x) / field.value(t, x))
        .collect();
    let nf = n as f64;
    let mean = mean_under_mu(&state, &g)?;
    let rhs =
        mean_under_mu(&state, &tt)? - (beta + 1.0) * variance_under_mu(&state, &g)? + nf / (beta - nf) * mean * mean;
    let phi = (-state.log_z / (beta - nf)).exp();
    Ok(phi * beta / (beta - nf) * rhs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdEstimate {
    /// Richardson-extrapolated second difference.
    pub value: f64,
    /// `|D(h) - D(h/2)|`, the step-sensitivity estimate.
    pub sensitivity: f64,
    pub h_t: f64,
}

/// Five-point second difference of `Phi` at steps `h_t` and `h_t / 2`,
/// combined as `(16 D(h/2) - D(h)) / 15`.
pub fn phi2_fd(mesh: &Mesh, field: &dyn Field, t: f64, beta: f64, h_t: f64) -> Result<FdEstimate> {
    if !(h_t > 0.0 && h_t.is_finite()) {
        return Err(Error::Hypothesis(format!("h_t must be positive, got {h_t}")));
    }
    check_admissible(mesh, field, t - 2.0 * h_t, t + 2.0 * h_t)?;
    let phi = |s: f64| eval_phi(mesh, field, s, beta);
    let centre = phi(t)?;
    let second = |h: f64| -> Result<f64> {
        let (p1, m1) = (phi(t + h)?, phi(t - h)?);
        let (p2, m2) = (phi(t + 2.0 * h)?, phi(t - 2.0 * h)?);
        Ok((-(p2 + m2) + 16.0 * (p1 + m1) - 30.0 * centre) / (12.0 * h * h))
    };
    let coarse = second(h_t)?;
    let fine = second(h_t / 2.0)?;
    Ok(FdEstimate {
        value: (16.0 * fine - coarse) / 15.0,
        sensitivity: (coarse - fine).abs(),
        h_t,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Finite-difference step; `None` uses [`default_h_t`].
    pub h_t: Option<f64>,
    pub solver: SolverOptions,
    pub sign_slack: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            h_t: None,
            solver: SolverOptions::default(),
            sign_slack: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residuals {
    pub fd_vs_direct: f64,
    pub fd_vs_terms: f64,
    pub direct_vs_terms: f64,
    pub pde_strong_residual: f64,
}

impl Residuals {
    /// Largest of the three pairwise `Phi''` discrepancies.
    pub fn spread(&self) -> f64 {
        self.fd_vs_direct.max(self.fd_vs_terms).max(self.direct_vs_terms)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub t: f64,
    pub beta: f64,
    pub n: usize,
    pub phi: f64,
    pub phi2_fd: f64,
    pub fd_sensitivity: f64,
    pub h_t: f64,
    pub phi2_direct: f64,
    pub phi2_terms: f64,
    pub terms: TermSet,
    pub residuals: Residuals,
    pub sign_certificate: SignCertificate,
    /// Smallest pointwise `||grad^2 u||^2 - (Lap u)^2 / n` over the nodes.
    pub min_cs_defect: f64,
    pub mu_sum: f64,
    pub mean_g: f64,
    pub diagnostics: Diagnostics,
}

/// `|a - b| / max(|reference|, PHI2_FLOOR * phi)`.
fn relative_to(a: f64, b: f64, reference: f64, phi: f64) -> f64 {
    (a - b).abs() / reference.abs().max(PHI2_FLOOR * phi.abs())
}

/// Runs measure, solve, terms and finite differences at one `(t, beta)`.
pub fn verify_identity(
    mesh: &Mesh,
    field: &dyn Field,
    t: f64,
    beta: f64,
    options: &VerifyOptions,
) -> Result<IdentityReport> {
    let n = mesh.domain.dim();
    check_beta(beta, n)?;
    let h_t = options.h_t.unwrap_or_else(|| default_h_t(t));

    let inst = solve_instance(mesh, field, t, beta, options.solver)?;
    let integrands = term_integrands(mesh, field, &inst).map_err(|e| e.at(Stage::Terms, t))?;
    let terms = integrands.integrate(&inst.state);
    let phi = inst.phi(n);
    let phi2_terms = phi2_from_terms(phi, &terms);
    let phi2_direct = phi2_from_variance(mesh, field, t, beta).map_err(|e| e.at(Stage::Terms, t))?;
    let fd = phi2_fd(mesh, field, t, beta, h_t).map_err(|e| e.at(Stage::FiniteDifference, t))?;

    let residuals = Residuals {
        fd_vs_direct: relative_to(phi2_direct, fd.value, fd.value, phi),
        fd_vs_terms: relative_to(phi2_terms, fd.value, fd.value, phi),
        direct_vs_terms: relative_to(phi2_terms, phi2_direct, fd.value, phi),
        pde_strong_residual: inst.solution.diagnostics.strong_residual.unwrap_or(f64::NAN),
    };
    let min_cs_defect = inst
        .solution
        .hess_u()
        .iter()
        .map(|h| hs_defect(h, n))
        .fold(f64::INFINITY, f64::min);
    Ok(IdentityReport {
        t,
        beta,
        n,
        phi,
        phi2_fd: fd.value,
        fd_sensitivity: fd.sensitivity,
        h_t,
        phi2_direct,
        phi2_terms,
        terms,
        residuals,
        sign_certificate: SignCertificate::evaluate(&integrands, &terms, beta, n, options.sign_slack),
        min_cs_defect,
        mu_sum: inst.state.interior_mu.iter().sum(),
        mean_g: inst.mean_g,
        diagnostics: inst.solution.diagnostics.clone(),
    })
}
