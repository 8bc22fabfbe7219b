//! The weighted Neumann problem `L_t u = f`, `du/dnu = 0`, where
//! `L_t u = Lap u - beta <grad phi, grad u> / phi` is the diffusion operator
//! with invariant measure `mu_t`.
//!
//! The weak form `a(u, v) = -int (L_t u) v d mu_t` is discretized by a
//! cell-centred finite-volume scheme; the Neumann condition is natural (zero
//! flux through the outer faces).

mod assembly;
mod derivatives;
mod solver;
pub mod stencil;

pub use assembly::{assemble, Edge, WeakSystem};
pub use derivatives::{reconstruct_derivatives, BoundaryTrace, Derivatives, MIN_STENCIL_NODES};
pub use solver::{solve_singular, SolveStats, SolverOptions};

use crate::error::{Error, Result};
use crate::fields::Field;
use crate::geometry::Mesh;
use crate::measure::MeasureState;

/// Largest tolerated `mu_t`-mean of the right-hand side before projection.
pub const COMPATIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct Diagnostics {
    pub iterations: usize,
    /// Relative algebraic residual of the linear solve.
    pub algebraic_residual: f64,
    /// `int f d mu_t` as received.
    pub pre_projection_mean: f64,
    /// Constant removed from `f` to make it exactly compatible with the
    /// finite-volume masses.
    pub projection_shift: f64,
    /// `max |<grad u, nu>|` over the boundary nodes.
    pub bc_residual: f64,
    /// `int u d mu_t` after gauge fixing.
    pub gauge: f64,
    /// `max |L_t u - f| / max |f|`, once computed.
    pub strong_residual: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct NeumannSolution {
    pub u: Vec<f64>,
    pub derivatives: Derivatives,
    pub diagnostics: Diagnostics,
}

impl NeumannSolution {
    pub fn grad_u(&self) -> &[nalgebra::Vector2<f64>] {
        &self.derivatives.grad
    }

    pub fn hess_u(&self) -> &[nalgebra::Matrix2<f64>] {
        &self.derivatives.hess
    }

    pub fn lap_u(&self) -> &[f64] {
        &self.derivatives.lap
    }
}

/// Solves `L_t u = f` with homogeneous Neumann data and `int u d mu_t = 0`.
pub fn solve_neumann(
    mesh: &Mesh,
    system: &WeakSystem,
    state: &MeasureState,
    f: &[f64],
    options: SolverOptions,
) -> Result<NeumannSolution> {
    let n = system.len();
    if f.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            actual: f.len(),
        });
    }
    let pre_projection_mean: f64 = f.iter().zip(&state.interior_mu).map(|(v, w)| v * w).sum();
    let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    if pre_projection_mean.abs() > COMPATIBILITY_TOL * scale {
        return Err(Error::IncompatibleRhs {
            mean: pre_projection_mean,
        });
    }

    let total_mass: f64 = system.mass.iter().sum();
    let shift = f.iter().zip(&system.mass).map(|(v, m)| v * m).sum::<f64>() / total_mass;
    let rhs: Vec<f64> = f.iter().zip(&system.mass).map(|(v, m)| -(v - shift) * m).collect();

    let (mut u, stats) = solve_singular(system, &rhs, options)?;
    let mean: f64 = u.iter().zip(&state.interior_mu).map(|(v, w)| v * w).sum();
    u.iter_mut().for_each(|v| *v -= mean);
    let gauge: f64 = u.iter().zip(&state.interior_mu).map(|(v, w)| v * w).sum();

    let derivatives = if u.iter().all(|v| *v == 0.0) {
        Derivatives::zeros(n, mesh.boundary_nodes.len())
    } else {
        reconstruct_derivatives(mesh, &u)?
    };
    let bc_residual = derivatives
        .boundary
        .grad
        .iter()
        .zip(&mesh.normals)
        .map(|(g, nu)| g.dot(nu).abs())
        .fold(0.0, f64::max);
    Ok(NeumannSolution {
        u,
        derivatives,
        diagnostics: Diagnostics {
            iterations: stats.iterations,
            algebraic_residual: stats.relative_residual,
            pre_projection_mean,
            projection_shift: shift,
            bc_residual,
            gauge,
            strong_residual: None,
        },
    })
}

/// Nodal `L_t u = Lap u - beta <grad_x phi, grad u> / phi` from reconstructed
/// derivatives.
pub fn apply_strong_operator(mesh: &Mesh, field: &dyn Field, t: f64, beta: f64, derivatives: &Derivatives) -> Vec<f64> {
    mesh.interior_nodes
        .iter()
        .enumerate()
        .map(|(k, x)| derivatives.lap[k] - beta * field.grad_x(t, x).dot(&derivatives.grad[k]) / field.value(t, x))
        .collect()
}

/// `max |L_t u - f| / max(|f|)` over the interior nodes.
pub fn strong_residual(mesh: &Mesh, field: &dyn Field, t: f64, beta: f64, sol: &NeumannSolution, f: &[f64]) -> f64 {
    let lu = apply_strong_operator(mesh, field, t, beta, &sol.derivatives);
    let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let worst = lu.iter().zip(f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if scale > 0.0 {
        worst / scale
    } else {
        worst
    }
}

/// Measure, assemble and solve `L_t u = f` in one call.
pub fn solve_for_measure(
    mesh: &Mesh,
    field: &dyn Field,
    state: &MeasureState,
    f: &[f64],
    options: SolverOptions,
) -> Result<NeumannSolution> {
    let system = assemble(mesh, field, state)?;
    let mut sol = solve_neumann(mesh, &system, state, f, options)?;
    sol.diagnostics.strong_residual = Some(strong_residual(mesh, field, state.t, state.beta, &sol, f));
    Ok(sol)
}
