use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fields::Field;
use crate::geometry::{Layout, Mesh, Point};
use crate::measure::MeasureState;

/// One face of the finite-volume grid: couples nodes `a` and `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Discrete Dirichlet form `a(u, v) = int <grad u, grad v> d mu_t` as a sum of
/// face contributions `w_e (u_a - u_b)(v_a - v_b)`, plus the lumped masses.
///
/// Symmetry and the constant kernel hold by construction.
#[derive(Debug, Clone)]
pub struct WeakSystem {
    pub layout: Layout,
    pub edges: Vec<Edge>,
    /// Finite-volume masses `density * cell volume`.
    pub mass: Vec<f64>,
    /// Quadrature weights of `mu_t`.
    pub mu: Vec<f64>,
    pub(crate) diagonal: Vec<f64>,
}

impl WeakSystem {
    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// `y = A u`.
    pub fn apply(&self, u: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for e in &self.edges {
            let flux = e.weight * (u[e.a] - u[e.b]);
            y[e.a] += flux;
            y[e.b] -= flux;
        }
    }

    pub fn matvec(&self, u: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; u.len()];
        self.apply(u, &mut y);
        y
    }

    pub fn dirichlet_form(&self, u: &[f64], v: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|e| e.weight * (u[e.a] - u[e.b]) * (v[e.a] - v[e.b]))
            .sum()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }
}

/// Assembles the weighted finite-volume stiffness for `mu_t`.
///
/// Face densities are evaluated exactly from the field at face centres.
pub fn assemble(mesh: &Mesh, field: &dyn Field, state: &MeasureState) -> Result<WeakSystem> {
    if state.len() != mesh.interior_nodes.len() {
        return Err(Error::SizeMismatch {
            expected: mesh.interior_nodes.len(),
            actual: state.len(),
        });
    }
    let density = |x: &Point| state.density(field, x);
    let mut edges = Vec::new();
    match mesh.layout {
        Layout::Line { a, h, cells } => {
            for i in 0..cells - 1 {
                let face = Point::new(a + (i + 1) as f64 * h, 0.0);
                edges.push(Edge {
                    a: i,
                    b: i + 1,
                    weight: density(&face) / h,
                });
            }
        }
        Layout::Polar {
            center,
            h,
            radial,
            angular,
            ..
        } => {
            let c = Point::from(center);
            let dtheta = 2.0 * PI / angular as f64;
            let at = |r: f64, th: f64| c + r * Point::new(th.cos(), th.sin());
            for i in 0..radial {
                let r = (i as f64 + 0.5) * h;
                for j in 0..angular {
                    let node = i * angular + j;
                    if i + 1 < radial {
                        let rf = (i + 1) as f64 * h;
                        edges.push(Edge {
                            a: node,
                            b: node + angular,
                            weight: density(&at(rf, j as f64 * dtheta)) * rf * dtheta / h,
                        });
                    }
                    let th = (j as f64 + 0.5) * dtheta;
                    edges.push(Edge {
                        a: node,
                        b: i * angular + (j + 1) % angular,
                        weight: density(&at(r, th)) * h / (r * dtheta),
                    });
                }
            }
        }
    }

    let mass: Vec<f64> = mesh
        .interior_nodes
        .iter()
        .zip(&mesh.cell_volumes)
        .map(|(x, v)| density(x) * v)
        .collect();
    if mass
        .iter()
        .chain(edges.iter().map(|e| &e.weight))
        .any(|w| !(w.is_finite() && *w > 0.0))
    {
        return Err(Error::NonFiniteWeight {
            t: state.t,
            x: [f64::NAN, f64::NAN],
        });
    }
    let mut diagonal = vec![0.0; mass.len()];
    for e in &edges {
        diagonal[e.a] += e.weight;
        diagonal[e.b] += e.weight;
    }
    Ok(WeakSystem {
        layout: mesh.layout,
        edges,
        mass,
        mu: state.interior_mu.clone(),
        diagonal,
    })
}
