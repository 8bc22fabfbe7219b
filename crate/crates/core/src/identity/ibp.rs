//! The integration-by-parts identities behind the decomposition, evaluated
//! with the computed `u` and with `L_t u` replaced by the right-hand side `f`.
//! Each residual measures both the identity and how well `u` solves the PDE.
//!
//! Write `D = <grad phi, grad u> / phi`, `Q = <grad^2 phi grad u, grad u> / phi`
//! and `H = grad^2 u`:
//!
//! * bochner: `int f^2 = int ||H||^2 + beta int Q - beta int D^2 - int_{dV} <H grad u, nu>`
//! * drift_square: `beta^2 int D^2 = int (f^2 + (Lap u)^2) - 2 int f Lap u`
//! * mixed: `(beta + 1) int g D = int <grad d_t phi, grad u> / phi + int g Lap u`
//! * boundary_hessian: `<H grad u, nu> = -II(grad u, grad u)` pointwise on `dV`

use serde::Serialize;

use super::{tangential_gradient, SolvedInstance};
use crate::error::Result;
use crate::fields::Field;
use crate::geometry::{second_fundamental_form, Mesh};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IbpResidual {
    pub lhs: f64,
    pub rhs: f64,
    /// Sum of the magnitudes of the integrals entering either side.
    pub scale: f64,
    /// `|lhs - rhs| / scale`, and 0 when every integral vanishes.
    pub residual: f64,
}

impl IbpResidual {
    fn new(lhs: f64, rhs: f64, scale: f64) -> Self {
        let residual = if scale > 0.0 { (lhs - rhs).abs() / scale } else { 0.0 };
        IbpResidual {
            lhs,
            rhs,
            scale,
            residual,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IbpResiduals {
    pub bochner: IbpResidual,
    pub drift_square: IbpResidual,
    pub mixed: IbpResidual,
    pub boundary_hessian: IbpResidual,
}

impl IbpResiduals {
    pub const NAMES: [&'static str; 4] = ["bochner", "drift_square", "mixed", "boundary_hessian"];

    pub fn to_array(&self) -> [IbpResidual; 4] {
        [self.bochner, self.drift_square, self.mixed, self.boundary_hessian]
    }

    pub fn max_residual(&self) -> f64 {
        self.to_array().iter().map(|r| r.residual).fold(0.0, f64::max)
    }
}

pub fn check_ibp_identities(mesh: &Mesh, field: &dyn Field, inst: &SolvedInstance) -> Result<IbpResiduals> {
    let (t, beta) = (inst.t, inst.beta);
    let sol = &inst.solution;
    let mu = &inst.state.interior_mu;

    let mut f2 = 0.0;
    let mut hs = 0.0;
    let mut q = 0.0;
    let mut d2 = 0.0;
    let mut lap2 = 0.0;
    let mut f_lap = 0.0;
    let mut g_d = 0.0;
    let mut mixed_grad = 0.0;
    let mut g_lap = 0.0;
    for k in 0..mu.len() {
        let x = &mesh.interior_nodes[k];
        let phi = field.value(t, x);
        let grad = sol.grad_u()[k];
        let h = sol.hess_u()[k];
        let lap = sol.lap_u()[k];
        let d = field.grad_x(t, x).dot(&grad) / phi;
        let w = mu[k];
        f2 += w * inst.f[k] * inst.f[k];
        hs += w * h.norm_squared();
        q += w * grad.dot(&(field.hess_x(t, x) * grad)) / phi;
        d2 += w * d * d;
        lap2 += w * lap * lap;
        f_lap += w * inst.f[k] * lap;
        g_d += w * inst.g[k] * d;
        mixed_grad += w * field.grad_x_dt(t, x).dot(&grad) / phi;
        g_lap += w * inst.g[k] * lap;
    }

    let mut flux = 0.0;
    let mut flux_abs = 0.0;
    let mut defect = 0.0;
    let mut defect_scale = 0.0;
    let tangents = tangential_gradient(mesh, sol);
    for j in 0..mesh.boundary_nodes.len() {
        let w = inst.state.boundary_mu[j];
        let nu = &mesh.normals[j];
        let h = &sol.derivatives.boundary.hess[j];
        let c = (h * sol.derivatives.boundary.grad[j]).dot(nu);
        flux += w * c;
        flux_abs += w * c.abs();
        let tau = &tangents[j];
        let normal_curvature = (h * tau).dot(nu);
        let ii = second_fundamental_form(&mesh.domain, &mesh.boundary_nodes[j], tau)?;
        defect += w * (normal_curvature + ii).abs();
        defect_scale += w * (normal_curvature.abs() + ii.abs());
    }

    Ok(IbpResiduals {
        bochner: IbpResidual::new(
            f2,
            hs + beta * q - beta * d2 - flux,
            f2 + hs + (beta * q).abs() + (beta * d2).abs() + flux_abs,
        ),
        drift_square: IbpResidual::new(
            beta * beta * d2,
            f2 + lap2 - 2.0 * f_lap,
            beta * beta * d2 + f2 + lap2 + 2.0 * f_lap.abs(),
        ),
        mixed: IbpResidual::new(
            (beta + 1.0) * g_d,
            mixed_grad + g_lap,
            ((beta + 1.0) * g_d).abs() + mixed_grad.abs() + g_lap.abs(),
        ),
        boundary_hessian: IbpResidual::new(defect, 0.0, defect_scale),
    })
}
