//! Gradient, Hessian and Laplacian of nodal fields.
//!
//! On the interval: fourth-order central differences with one-sided
//! closures. On the disk: spectral differentiation in angle and fourth-order
//! differences in radius, where the radial line through a node is continued
//! across the centre (`u(-r, theta) = u(r, theta + pi)`) so only the outer
//! rim needs one-sided closures. Polar derivatives are then rotated into
//! Cartesian components.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::geometry::{Layout, Mesh};

use super::stencil::{far_end_stencil, line_stencils, near_end_stencil, CLOSURE_WIDTH};

/// Minimum nodes per direction for the derivative stencils.
pub const MIN_STENCIL_NODES: usize = 8;

/// Derivative data at the boundary nodes, obtained by one-sided extrapolation.
#[derive(Debug, Clone, Default)]
pub struct BoundaryTrace {
    pub u: Vec<f64>,
    pub grad: Vec<Vector2<f64>>,
    pub hess: Vec<Matrix2<f64>>,
}

#[derive(Debug, Clone, Default)]
pub struct Derivatives {
    pub grad: Vec<Vector2<f64>>,
    pub hess: Vec<Matrix2<f64>>,
    /// Trace of `hess`.
    pub lap: Vec<f64>,
    pub boundary: BoundaryTrace,
}

impl Derivatives {
    pub fn zeros(interior: usize, boundary: usize) -> Self {
        Derivatives {
            grad: vec![Vector2::zeros(); interior],
            hess: vec![Matrix2::zeros(); interior],
            lap: vec![0.0; interior],
            boundary: BoundaryTrace {
                u: vec![0.0; boundary],
                grad: vec![Vector2::zeros(); boundary],
                hess: vec![Matrix2::zeros(); boundary],
            },
        }
    }
}

pub fn reconstruct_derivatives(mesh: &Mesh, u: &[f64]) -> Result<Derivatives> {
    if u.len() != mesh.interior_nodes.len() {
        return Err(Error::SizeMismatch {
            expected: mesh.interior_nodes.len(),
            actual: u.len(),
        });
    }
    let nodes = mesh.resolution.min_nodes();
    if nodes < MIN_STENCIL_NODES {
        return Err(Error::UnderResolved {
            nodes,
            required: MIN_STENCIL_NODES,
        });
    }
    match mesh.layout {
        Layout::Line { h, cells, .. } => Ok(line(u, h, cells)),
        Layout::Polar {
            h,
            radius,
            radial,
            angular,
            ..
        } => Ok(polar(u, h, radius, radial, angular)),
    }
}

fn line(u: &[f64], h: f64, m: usize) -> Derivatives {
    let mut out = Derivatives::zeros(m, 2);
    for (i, st) in line_stencils(m, h, false).iter().enumerate() {
        let (_, d1, d2) = st.apply(|k| u[k as usize]);
        out.grad[i] = Vector2::new(d1, 0.0);
        out.hess[i] = Matrix2::new(d2, 0.0, 0.0, 0.0);
        out.lap[i] = d2;
    }
    for (b, st) in [near_end_stencil(h), far_end_stencil(m, h)].iter().enumerate() {
        let (v, d1, d2) = st.apply(|k| u[k as usize]);
        out.boundary.u[b] = v;
        out.boundary.grad[b] = Vector2::new(d1, 0.0);
        out.boundary.hess[b] = Matrix2::new(d2, 0.0, 0.0, 0.0);
    }
    out
}

/// Spectral first and second angular derivatives of every ring of `u`.
fn angular_derivatives(u: &[f64], rings: usize, m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(m);
    let inverse = planner.plan_fft_inverse(m);
    let mut d1 = vec![0.0; rings * m];
    let mut d2 = vec![0.0; rings * m];
    let mut buf = vec![Complex::new(0.0, 0.0); m];
    let mut tmp = vec![Complex::new(0.0, 0.0); m];
    let scale = 1.0 / m as f64;
    for ring in 0..rings {
        let slice = &u[ring * m..(ring + 1) * m];
        for (b, v) in buf.iter_mut().zip(slice) {
            *b = Complex::new(*v, 0.0);
        }
        forward.process(&mut buf);
        for (order, out) in [(1, &mut d1), (2, &mut d2)] {
            for (k, (t, b)) in tmp.iter_mut().zip(&buf).enumerate() {
                let wave = if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
                *t = if order == 1 {
                    if 2 * k == m {
                        Complex::new(0.0, 0.0)
                    } else {
                        b * Complex::new(0.0, wave)
                    }
                } else {
                    b * (-wave * wave)
                };
            }
            inverse.process(&mut tmp);
            for (o, t) in out[ring * m..(ring + 1) * m].iter_mut().zip(&tmp) {
                *o = t.re * scale;
            }
        }
    }
    (d1, d2)
}

/// Cartesian gradient and Hessian from polar derivatives at radius `r`,
/// angle `theta`.
#[allow(clippy::too_many_arguments)]
fn polar_to_cartesian(
    r: f64,
    theta: f64,
    u_r: f64,
    u_rr: f64,
    u_t: f64,
    u_tt: f64,
    u_rt: f64,
) -> (Vector2<f64>, Matrix2<f64>) {
    let (s, c) = theta.sin_cos();
    let q = Matrix2::new(c, -s, s, c);
    let grad = q * Vector2::new(u_r, u_t / r);
    let h_rt = u_rt / r - u_t / (r * r);
    let h_tt = u_tt / (r * r) + u_r / r;
    let local = Matrix2::new(u_rr, h_rt, h_rt, h_tt);
    (grad, q * local * q.transpose())
}

fn polar(u: &[f64], h: f64, radius: f64, radial: usize, angular: usize) -> Derivatives {
    let dtheta = 2.0 * PI / angular as f64;
    let (u_t, u_tt) = angular_derivatives(u, radial, angular);
    let stencils = line_stencils(radial, h, true);
    // Sample of a nodal field along the line through the centre at angle j.
    let along = |field: &[f64], j: usize, k: isize| -> f64 {
        if k >= 0 {
            field[k as usize * angular + j]
        } else {
            let i = (-k - 1) as usize;
            field[i * angular + (j + angular / 2) % angular]
        }
    };

    let n = radial * angular;
    let mut out = Derivatives::zeros(n, angular);
    for i in 0..radial {
        let r = (i as f64 + 0.5) * h;
        let st = &stencils[i];
        for j in 0..angular {
            let idx = i * angular + j;
            let (_, u_r, u_rr) = st.apply(|k| along(u, j, k));
            let (_, u_rt, _) = st.apply(|k| along(&u_t, j, k));
            let (g, hs) = polar_to_cartesian(r, j as f64 * dtheta, u_r, u_rr, u_t[idx], u_tt[idx], u_rt);
            out.grad[idx] = g;
            out.hess[idx] = hs;
            out.lap[idx] = hs.trace();
        }
    }

    debug_assert!(radial >= CLOSURE_WIDTH);
    let rim = far_end_stencil(radial, h);
    let mut rim_u = vec![0.0; angular];
    let mut rim_ur = vec![0.0; angular];
    let mut rim_urr = vec![0.0; angular];
    let mut rim_urt = vec![0.0; angular];
    for j in 0..angular {
        let (v, d1, d2) = rim.apply(|k| along(u, j, k));
        rim_u[j] = v;
        rim_ur[j] = d1;
        rim_urr[j] = d2;
        rim_urt[j] = rim.apply(|k| along(&u_t, j, k)).1;
    }
    let (rim_ut, rim_utt) = angular_derivatives(&rim_u, 1, angular);
    for j in 0..angular {
        let (g, hs) = polar_to_cartesian(
            radius,
            j as f64 * dtheta,
            rim_ur[j],
            rim_urr[j],
            rim_ut[j],
            rim_utt[j],
            rim_urt[j],
        );
        out.boundary.u[j] = rim_u[j];
        out.boundary.grad[j] = g;
        out.boundary.hess[j] = hs;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, Domain, Point, Resolution};

    fn disk(m: usize) -> Mesh {
        build_mesh(
            &Domain::disk([0.0, 0.0], 1.0).unwrap(),
            Resolution::Polar {
                radial: m,
                angular: 2 * m,
            },
        )
        .unwrap()
    }

    fn sample(mesh: &Mesh, f: impl Fn(&Point) -> f64) -> Vec<f64> {
        mesh.interior_nodes.iter().map(f).collect()
    }

    #[test]
    fn linear_field() {
        let mesh = disk(16);
        let d = reconstruct_derivatives(&mesh, &sample(&mesh, |p| p[0])).unwrap();
        for (g, h) in d.grad.iter().zip(&d.hess) {
            assert!((g - Vector2::new(1.0, 0.0)).norm() < 1e-12);
            assert!(h.norm() < 1e-10);
        }
        for g in &d.boundary.grad {
            assert!((g - Vector2::new(1.0, 0.0)).norm() < 1e-11);
        }
    }

    #[test]
    fn radial_quadratic_has_identity_hessian() {
        let mesh = disk(16);
        let d = reconstruct_derivatives(&mesh, &sample(&mesh, |p| p.norm_squared() / 2.0)).unwrap();
        for (k, h) in d.hess.iter().enumerate() {
            assert!((h - Matrix2::identity()).norm() < 1e-8, "{h}");
            assert!((d.lap[k] - 2.0).abs() < 1e-8);
            assert!((d.lap[k] - h.trace()).abs() < 1e-10);
        }
        for h in &d.boundary.hess {
            assert!((h - Matrix2::identity()).norm() < 1e-8);
        }
    }

    /// Symbolic derivatives of `u = (r^3/8 - 3r/8) cos(theta)`, i.e.
    /// `u = x (x^2 + y^2)/8 - 3x/8`.
    fn exact(p: &Point) -> (f64, Vector2<f64>, Matrix2<f64>) {
        let (x, y) = (p[0], p[1]);
        let u = x * (x * x + y * y) / 8.0 - 3.0 * x / 8.0;
        let g = Vector2::new((3.0 * x * x + y * y) / 8.0 - 3.0 / 8.0, x * y / 4.0);
        let h = Matrix2::new(0.75 * x, 0.25 * y, 0.25 * y, 0.25 * x);
        (u, g, h)
    }

    #[test]
    fn cubic_field_reproduced() {
        // Cubic in Cartesian coordinates: the radial closures are exact.
        let mesh = disk(16);
        let d = reconstruct_derivatives(&mesh, &sample(&mesh, |p| exact(p).0)).unwrap();
        for (k, p) in mesh.interior_nodes.iter().enumerate() {
            let (_, g, h) = exact(p);
            assert!((d.grad[k] - g).norm() < 1e-10);
            assert!((d.hess[k] - h).norm() < 1e-9);
        }
        for (k, p) in mesh.boundary_nodes.iter().enumerate() {
            let (u, g, h) = exact(p);
            assert!((d.boundary.u[k] - u).abs() < 1e-10);
            assert!((d.boundary.grad[k] - g).norm() < 1e-9);
            assert!((d.boundary.hess[k] - h).norm() < 1e-8);
        }
    }

    #[test]
    fn smooth_field_converges() {
        let f = |p: &Point| (1.3 * p[0] - 0.4 * p[1]).sin() * (0.7 * p[1]).exp();
        let hxx = |p: &Point| -1.69 * (1.3 * p[0] - 0.4 * p[1]).sin() * (0.7 * p[1]).exp();
        let err = |m: usize| {
            let mesh = disk(m);
            let d = reconstruct_derivatives(&mesh, &sample(&mesh, f)).unwrap();
            mesh.interior_nodes
                .iter()
                .zip(&d.hess)
                .map(|(p, h)| (h[(0, 0)] - hxx(p)).abs())
                .fold(0.0, f64::max)
        };
        // Fourth order away from the centre; the 1/r factors in the polar
        // Hessian cost one order on the innermost ring.
        let (e1, e2) = (err(16), err(32));
        assert!(e1 / e2 > 6.0, "{e1} {e2}");
    }

    #[test]
    fn interval_derivatives() {
        let mesh = build_mesh(&Domain::interval(0.0, 2.0).unwrap(), Resolution::Cells(16)).unwrap();
        let u = sample(&mesh, |p| p[0].powi(4) - p[0]);
        let d = reconstruct_derivatives(&mesh, &u).unwrap();
        for (k, p) in mesh.interior_nodes.iter().enumerate() {
            assert!((d.grad[k][0] - (4.0 * p[0].powi(3) - 1.0)).abs() < 1e-9);
            assert!((d.lap[k] - 12.0 * p[0] * p[0]).abs() < 1e-8);
            assert_eq!(d.hess[k][(1, 1)], 0.0);
        }
        assert!((d.boundary.grad[0][0] + 1.0).abs() < 1e-9);
        assert!((d.boundary.grad[1][0] - 31.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_coarse_grids() {
        let mesh = build_mesh(&Domain::interval(0.0, 1.0).unwrap(), Resolution::Cells(6)).unwrap();
        assert!(matches!(
            reconstruct_derivatives(&mesh, &[0.0; 6]),
            Err(Error::UnderResolved { .. })
        ));
        let mesh = disk(4);
        assert!(reconstruct_derivatives(&mesh, &vec![0.0; 32]).is_err());
    }
}
