//! The four terms of the decomposition of `Phi''/Phi`, each carrying its
//! prefactor, so that `Phi'' = Phi * (T1 + T2 + T3 + T4)`.

use nalgebra::{Matrix2, Vector2};
use serde::Serialize;

use super::SolvedInstance;
use crate::elliptic::NeumannSolution;
use crate::error::{Error, Result};
use crate::fields::{quadratic_form_unchecked, Field};
use crate::geometry::{second_fundamental_form, Mesh};
use crate::measure::MeasureState;

/// The Neumann condition is accepted when `max |<grad u, nu>|` is below
/// `BC_RELATIVE_THRESHOLD * max |grad u| + BC_ABSOLUTE_FLOOR`.
pub const BC_RELATIVE_THRESHOLD: f64 = 1e-2;
pub const BC_ABSOLUTE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct TermSet {
    #[serde(rename = "T1_hessianX")]
    pub hessian_x: f64,
    #[serde(rename = "T2_hs_defect")]
    pub hs_defect: f64,
    #[serde(rename = "T3_square")]
    pub square: f64,
    #[serde(rename = "T4_boundary")]
    pub boundary: f64,
}

impl TermSet {
    pub const NAMES: [&'static str; 4] = ["T1_hessianX", "T2_hs_defect", "T3_square", "T4_boundary"];

    pub fn sum(&self) -> f64 {
        self.hessian_x + self.hs_defect + self.square + self.boundary
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.hessian_x, self.hs_defect, self.square, self.boundary]
    }
}

/// Pointwise integrands with prefactors applied: `T_i = sum mu_k * integrand_k`.
/// The first three live on interior nodes, `boundary` on boundary nodes.
#[derive(Debug, Clone)]
pub struct TermIntegrands {
    pub hessian_x: Vec<f64>,
    pub hs_defect: Vec<f64>,
    pub square: Vec<f64>,
    pub boundary: Vec<f64>,
}

impl TermIntegrands {
    pub fn integrate(&self, state: &MeasureState) -> TermSet {
        let dot = |a: &[f64], w: &[f64]| a.iter().zip(w).map(|(x, y)| x * y).sum::<f64>();
        TermSet {
            hessian_x: dot(&self.hessian_x, &state.interior_mu),
            hs_defect: dot(&self.hs_defect, &state.interior_mu),
            square: dot(&self.square, &state.interior_mu),
            boundary: dot(&self.boundary, &state.boundary_mu),
        }
    }

    pub fn as_slices(&self) -> [&[f64]; 4] {
        [&self.hessian_x, &self.hs_defect, &self.square, &self.boundary]
    }
}

struct Prefactors {
    /// `beta / (beta - n)`
    first: f64,
    /// `beta^2 / (beta - n)`
    second: f64,
    /// `beta / |beta - n|`
    square: f64,
    /// `sqrt(|beta - n| / n)`
    lap_coeff: f64,
    /// `sign(beta - n) sqrt(n / |beta - n|)`
    mean_coeff: f64,
}

fn prefactors(beta: f64, n: usize) -> Result<Prefactors> {
    let nf = n as f64;
    if beta == nf {
        return Err(Error::BetaEqualsDimension { n });
    }
    let gap = beta - nf;
    Ok(Prefactors {
        first: beta / gap,
        second: beta * beta / gap,
        square: beta / gap.abs(),
        lap_coeff: (gap.abs() / nf).sqrt(),
        mean_coeff: gap.signum() * (nf / gap.abs()).sqrt(),
    })
}

/// `||H||_HS^2 - (tr H)^2 / n`, written so that it is nonnegative in floating
/// point. For `n = 1` the Hessian is a scalar and the defect is identically 0.
pub fn hs_defect(h: &Matrix2<f64>, n: usize) -> f64 {
    if n == 1 {
        return 0.0;
    }
    let off = 0.5 * (h[(0, 1)] + h[(1, 0)]);
    0.5 * (h[(0, 0)] - h[(1, 1)]).powi(2) + 2.0 * off * off
}

fn check_boundary_condition(sol: &NeumannSolution) -> Result<()> {
    let max_grad = sol.grad_u().iter().map(|g| g.norm()).fold(0.0, f64::max);
    let threshold = BC_RELATIVE_THRESHOLD * max_grad + BC_ABSOLUTE_FLOOR;
    let residual = sol.diagnostics.bc_residual;
    if residual > threshold || !residual.is_finite() {
        return Err(Error::BoundaryResidual { residual, threshold });
    }
    Ok(())
}

/// `grad u - <grad u, nu> nu` at the boundary nodes.
pub fn tangential_gradient(mesh: &Mesh, sol: &NeumannSolution) -> Vec<Vector2<f64>> {
    sol.derivatives
        .boundary
        .grad
        .iter()
        .zip(&mesh.normals)
        .map(|(g, nu)| g - g.dot(nu) * nu)
        .collect()
}

/// All four integrands at once. Fails on `beta = n` and on a boundary
/// residual above threshold.
pub fn term_integrands(mesh: &Mesh, field: &dyn Field, inst: &SolvedInstance) -> Result<TermIntegrands> {
    let n = mesh.domain.dim();
    let p = prefactors(inst.beta, n)?;
    let sol = &inst.solution;
    check_boundary_condition(sol)?;
    let t = inst.t;
    let beta = inst.beta;

    let hessian_x = mesh
        .interior_nodes
        .iter()
        .zip(sol.grad_u())
        .map(|(x, g)| p.first * quadratic_form_unchecked(field, t, x, 1.0, &(beta * g)) / field.value(t, x))
        .collect();
    let hs_defect = sol.hess_u().iter().map(|h| p.second * hs_defect(h, n)).collect();
    let square = sol
        .lap_u()
        .iter()
        .map(|l| p.square * (p.lap_coeff * l - p.mean_coeff * inst.mean_g).powi(2))
        .collect();
    let boundary = tangential_gradient(mesh, sol)
        .iter()
        .zip(&mesh.boundary_nodes)
        .map(|(tau, x)| Ok(p.second * second_fundamental_form(&mesh.domain, x, tau)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(TermIntegrands {
        hessian_x,
        hs_defect,
        square,
        boundary,
    })
}

/// `beta/(beta - n) int <grad^2_{(t,x)} phi X, X> / phi d mu_t` with `X = (1, beta grad u)`.
pub fn term_hessian_x(mesh: &Mesh, field: &dyn Field, inst: &SolvedInstance) -> Result<f64> {
    let p = prefactors(inst.beta, mesh.domain.dim())?;
    let sum = mesh
        .interior_nodes
        .iter()
        .zip(inst.solution.grad_u())
        .zip(&inst.state.interior_mu)
        .map(|((x, g), w)| {
            w * quadratic_form_unchecked(field, inst.t, x, 1.0, &(inst.beta * g)) / field.value(inst.t, x)
        })
        .sum::<f64>();
    Ok(p.first * sum)
}

/// `beta^2/(beta - n) int (||grad^2 u||^2 - (Lap u)^2 / n) d mu_t`.
pub fn term_hs_defect(state: &MeasureState, sol: &NeumannSolution, beta: f64, n: usize) -> Result<f64> {
    let p = prefactors(beta, n)?;
    let sum = sol
        .hess_u()
        .iter()
        .zip(&state.interior_mu)
        .map(|(h, w)| w * hs_defect(h, n))
        .sum::<f64>();
    Ok(p.second * sum)
}

/// `beta/|beta - n| int (sqrt(|beta-n|/n) Lap u - s sqrt(n/|beta-n|) m)^2 d mu_t`
/// with `s = sign(beta - n)` and `m = int g d mu_t`.
pub fn term_square(state: &MeasureState, sol: &NeumannSolution, mean_g: f64, beta: f64, n: usize) -> Result<f64> {
    let p = prefactors(beta, n)?;
    let sum = sol
        .lap_u()
        .iter()
        .zip(&state.interior_mu)
        .map(|(l, w)| w * (p.lap_coeff * l - p.mean_coeff * mean_g).powi(2))
        .sum::<f64>();
    Ok(p.square * sum)
}

/// `beta^2/(beta - n) int_{dV} II(grad u, grad u) d mu_t`, with `grad u`
/// projected onto the tangent space.
pub fn term_boundary(mesh: &Mesh, state: &MeasureState, sol: &NeumannSolution, beta: f64) -> Result<f64> {
    let p = prefactors(beta, mesh.domain.dim())?;
    check_boundary_condition(sol)?;
    let mut sum = 0.0;
    for ((tau, x), w) in tangential_gradient(mesh, sol)
        .iter()
        .zip(&mesh.boundary_nodes)
        .zip(&state.boundary_mu)
    {
        sum += w * second_fundamental_form(&mesh.domain, x, tau)?;
    }
    Ok(p.second * sum)
}
