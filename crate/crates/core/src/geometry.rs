//! Spatial domains, quadrature meshes and boundary geometry.
//!
//! Both supported domains are discretized on cell-centred grids: the interval
//! by `m` equal cells, the disk by a polar grid with radial nodes at
//! `r_i = (i + 1/2) h` (so no node sits on the coordinate singularity) and
//! uniform angles. The same nodes carry the finite-volume unknowns of the
//! elliptic solver and the quadrature rule used for every integral.
//!
//! Quadrature in the radial (or interval) direction is the midpoint rule with
//! Euler–Maclaurin end corrections on the outermost [`END_CORRECTION_NODES`]
//! nodes at each end, which makes it exact for polynomials of degree five.
//! In angle the uniform trapezoid rule is spectrally accurate.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Vector2};

use crate::error::{Error, Result};

pub type Point = Vector2<f64>;

/// Number of nodes at each end of a line that receive an end correction.
pub const END_CORRECTION_NODES: usize = 6;

const BOUNDARY_TOL: f64 = 1e-9;

/// An open, bounded, convex spatial domain `V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Interval { a: f64, b: f64 },
    Disk { center: [f64; 2], radius: f64 },
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        let d = Domain::Interval { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn disk(center: [f64; 2], radius: f64) -> Result<Self> {
        let d = Domain::Disk { center, radius };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Domain::Interval { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(Error::InvalidDomain(format!("interval needs a < b, got [{a}, {b}]")));
                }
            }
            Domain::Disk { center, radius } => {
                if !(center.iter().all(|c| c.is_finite()) && radius.is_finite() && radius > 0.0) {
                    return Err(Error::InvalidDomain(format!("disk needs radius > 0, got {radius}")));
                }
            }
        }
        Ok(())
    }

    /// Spatial dimension `n`.
    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Disk { .. } => 2,
        }
    }

    /// Lebesgue measure `|V|`.
    pub fn volume(&self) -> f64 {
        match *self {
            Domain::Interval { a, b } => b - a,
            Domain::Disk { radius, .. } => PI * radius * radius,
        }
    }

    /// Boundary measure: counting measure on the endpoints for the interval.
    pub fn boundary_measure(&self) -> f64 {
        match *self {
            Domain::Interval { .. } => 2.0,
            Domain::Disk { radius, .. } => 2.0 * PI * radius,
        }
    }

    pub fn contains(&self, x: &Point) -> bool {
        match *self {
            Domain::Interval { a, b } => x[0] > a && x[0] < b,
            Domain::Disk { center, radius } => (x - Point::from(center)).norm() < radius,
        }
    }

    fn boundary_distance(&self, x: &Point) -> f64 {
        match *self {
            Domain::Interval { a, b } => (x[0] - a).abs().min((x[0] - b).abs()),
            Domain::Disk { center, radius } => ((x - Point::from(center)).norm() - radius).abs(),
        }
    }

    fn scale(&self) -> f64 {
        match *self {
            Domain::Interval { a, b } => (b - a).max(a.abs()).max(b.abs()),
            Domain::Disk { center, radius } => radius.max(center[0].abs()).max(center[1].abs()),
        }
    }
}

/// Grid parameters. `Cells` for the interval, `Polar` for the disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    Cells(usize),
    Polar { radial: usize, angular: usize },
}

impl Resolution {
    pub fn doubled(self) -> Self {
        match self {
            Resolution::Cells(m) => Resolution::Cells(2 * m),
            Resolution::Polar { radial, angular } => Resolution::Polar {
                radial: 2 * radial,
                angular: 2 * angular,
            },
        }
    }

    /// Smallest node count along any grid direction.
    pub fn min_nodes(self) -> usize {
        match self {
            Resolution::Cells(m) => m,
            Resolution::Polar { radial, angular } => radial.min(angular),
        }
    }

    pub fn from_counts(counts: &[usize]) -> Result<Self> {
        match *counts {
            [m] => Ok(Resolution::Cells(m)),
            [radial, angular] => Ok(Resolution::Polar { radial, angular }),
            _ => Err(Error::InvalidResolution(format!(
                "expected one or two grid counts, got {}",
                counts.len()
            ))),
        }
    }

    pub fn counts(self) -> Vec<usize> {
        match self {
            Resolution::Cells(m) => vec![m],
            Resolution::Polar { radial, angular } => vec![radial, angular],
        }
    }
}

/// Structured layout of the nodes of a [`Mesh`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Layout {
    /// Cell centres `a + (i + 1/2) h`, `i = 0..cells`.
    Line { a: f64, h: f64, cells: usize },
    /// Node `(i, j)` at radius `(i + 1/2) h` and angle `2 pi j / angular`,
    /// stored at index `i * angular + j`.
    Polar {
        center: [f64; 2],
        radius: f64,
        h: f64,
        radial: usize,
        angular: usize,
    },
}

impl Layout {
    pub fn len(&self) -> usize {
        match *self {
            Layout::Line { cells, .. } => cells,
            Layout::Polar { radial, angular, .. } => radial * angular,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Interior and boundary quadrature nodes of a domain.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub domain: Domain,
    pub resolution: Resolution,
    pub layout: Layout,
    pub interior_nodes: Vec<Point>,
    /// High-order Lebesgue quadrature weights.
    pub interior_weights: Vec<f64>,
    /// Finite-volume control-cell measures (second-order, used by the solver).
    pub cell_volumes: Vec<f64>,
    pub boundary_nodes: Vec<Point>,
    pub boundary_weights: Vec<f64>,
    pub normals: Vec<Point>,
}

/// Builds the cell-centred mesh of `domain` at the given resolution.
pub fn build_mesh(domain: &Domain, resolution: Resolution) -> Result<Mesh> {
    domain.validate()?;
    match (*domain, resolution) {
        (Domain::Interval { a, b }, Resolution::Cells(m)) => {
            check_count("cells", m)?;
            let h = (b - a) / m as f64;
            let line = line_weights(m, h, |_| 1.0);
            let interior_nodes = (0..m).map(|i| Point::new(a + (i as f64 + 0.5) * h, 0.0)).collect();
            Ok(Mesh {
                domain: *domain,
                resolution,
                layout: Layout::Line { a, h, cells: m },
                interior_nodes,
                interior_weights: line,
                cell_volumes: vec![h; m],
                boundary_nodes: vec![Point::new(a, 0.0), Point::new(b, 0.0)],
                boundary_weights: vec![1.0, 1.0],
                normals: vec![Point::new(-1.0, 0.0), Point::new(1.0, 0.0)],
            })
        }
        (Domain::Disk { center, radius }, Resolution::Polar { radial, angular }) => {
            check_count("radial", radial)?;
            check_count("angular", angular)?;
            if angular % 2 != 0 {
                return Err(Error::InvalidResolution(format!(
                    "angular count must be even, got {angular}"
                )));
            }
            let h = radius / radial as f64;
            let dtheta = 2.0 * PI / angular as f64;
            let c = Point::from(center);
            let radial_w = line_weights(radial, h, |r| r);

            let n = radial * angular;
            let mut interior_nodes = Vec::with_capacity(n);
            let mut interior_weights = Vec::with_capacity(n);
            let mut cell_volumes = Vec::with_capacity(n);
            for (i, wr) in radial_w.iter().enumerate() {
                let r = (i as f64 + 0.5) * h;
                for j in 0..angular {
                    let th = j as f64 * dtheta;
                    interior_nodes.push(c + r * Point::new(th.cos(), th.sin()));
                    interior_weights.push(wr * dtheta);
                    cell_volumes.push(r * h * dtheta);
                }
            }
            let normals: Vec<Point> = (0..angular)
                .map(|j| {
                    let th = j as f64 * dtheta;
                    Point::new(th.cos(), th.sin())
                })
                .collect();
            let boundary_nodes = normals.iter().map(|nu| c + radius * nu).collect();
            Ok(Mesh {
                domain: *domain,
                resolution,
                layout: Layout::Polar {
                    center,
                    radius,
                    h,
                    radial,
                    angular,
                },
                interior_nodes,
                interior_weights,
                cell_volumes,
                boundary_nodes,
                boundary_weights: vec![radius * dtheta; angular],
                normals,
            })
        }
        (d, r) => Err(Error::InvalidResolution(format!("{r:?} does not match domain {d:?}"))),
    }
}

fn check_count(what: &str, m: usize) -> Result<()> {
    if m < 4 {
        return Err(Error::InvalidResolution(format!("{what} count must be >= 4, got {m}")));
    }
    Ok(())
}

/// Corrected-midpoint weights for `int_0^{m h} F(s) J(s) ds` on the nodes
/// `(i + 1/2) h`, returned as `w_i` with the Jacobian already folded in.
fn line_weights(m: usize, h: f64, jacobian: impl Fn(f64) -> f64) -> Vec<f64> {
    let p = END_CORRECTION_NODES.min(m);
    let corr = midpoint_end_corrections(p);
    let mut factor = vec![1.0; m];
    for (j, c) in corr.iter().enumerate() {
        factor[j] += c;
        factor[m - 1 - j] += c;
    }
    factor
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let s = (i as f64 + 0.5) * h;
            h * f * jacobian(s)
        })
        .collect()
}

/// Coefficients `c_j` such that adding `h * sum_j c_j F(end -/+ (j + 1/2) h)`
/// at each end of the midpoint rule cancels the Euler–Maclaurin boundary
/// terms through derivative order `p - 1`.
pub(crate) fn midpoint_end_corrections(p: usize) -> Vec<f64> {
    // B_{q+1}(1/2) / (q + 1) for q = 0..8; odd-index Bernoulli values vanish.
    const BERNOULLI_HALF: [f64; 9] = [
        0.0,
        -1.0 / 12.0,
        0.0,
        7.0 / 240.0,
        0.0,
        -31.0 / 1344.0,
        0.0,
        127.0 / 3840.0,
        0.0,
    ];
    assert!(p <= BERNOULLI_HALF.len());
    let vandermonde = DMatrix::from_fn(p, p, |q, j| (-(j as f64 + 0.5)).powi(q as i32));
    let rhs = DVector::from_fn(p, |q, _| -BERNOULLI_HALF[q] / (q as f64 + 1.0));
    let sol = vandermonde
        .lu()
        .solve(&rhs)
        .expect("Vandermonde matrix on distinct nodes is invertible");
    sol.iter().copied().collect()
}

/// Outward unit normal at a boundary point.
pub fn outer_normal(domain: &Domain, x: &Point) -> Result<Point> {
    check_on_boundary(domain, x)?;
    Ok(match *domain {
        Domain::Interval { a, b } => {
            if (x[0] - a).abs() <= (x[0] - b).abs() {
                Point::new(-1.0, 0.0)
            } else {
                Point::new(1.0, 0.0)
            }
        }
        Domain::Disk { center, radius } => (x - Point::from(center)) / radius,
    })
}

/// `II_x(X, X) = sum_ij X_i X_j d_i(nu_j)(x)` for a tangent vector `X`.
///
/// For the disk `d_i nu_j = delta_ij / R` on tangent vectors, so the form is
/// `|X|^2 / R`. The interval has a zero tangent space.
pub fn second_fundamental_form(domain: &Domain, x: &Point, tangent: &Point) -> Result<f64> {
    let nu = outer_normal(domain, x)?;
    match *domain {
        Domain::Interval { .. } => {
            if tangent[0] != 0.0 {
                return Err(Error::NotTangent {
                    normal_component: tangent[0],
                });
            }
            Ok(0.0)
        }
        Domain::Disk { radius, .. } => {
            let normal_component = tangent.dot(&nu);
            if normal_component.abs() > BOUNDARY_TOL * tangent.norm().max(1.0) {
                return Err(Error::NotTangent { normal_component });
            }
            Ok(tangent.norm_squared() / radius)
        }
    }
}

fn check_on_boundary(domain: &Domain, x: &Point) -> Result<()> {
    let distance = domain.boundary_distance(x);
    if distance > BOUNDARY_TOL * domain.scale().max(1.0) {
        return Err(Error::NotOnBoundary {
            point: [x[0], x[1]],
            distance,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_disk() -> Domain {
        Domain::disk([0.0, 0.0], 1.0).unwrap()
    }

    #[test]
    fn interval_weights_sum_to_length() {
        let mesh = build_mesh(&Domain::interval(0.0, 1.0).unwrap(), Resolution::Cells(32)).unwrap();
        let s: f64 = mesh.interior_weights.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disk_weights_sum_to_area_and_circumference() {
        let mesh = build_mesh(
            &unit_disk(),
            Resolution::Polar {
                radial: 32,
                angular: 64,
            },
        )
        .unwrap();
        let area: f64 = mesh.interior_weights.iter().sum();
        let perim: f64 = mesh.boundary_weights.iter().sum();
        assert!((area - PI).abs() < 1e-6);
        assert!((perim - 2.0 * PI).abs() < 1e-10);
        for nu in &mesh.normals {
            assert!((nu.norm() - 1.0).abs() < 1e-12);
        }
        assert!(mesh.interior_weights.iter().all(|w| *w > 0.0));
        assert!(mesh.interior_nodes.iter().all(|x| unit_disk().contains(x)));
    }

    #[test]
    fn end_corrections_keep_weights_positive() {
        let c = midpoint_end_corrections(END_CORRECTION_NODES);
        assert!(c.iter().all(|cj| 1.0 + cj > 0.0));
        assert!(c.iter().sum::<f64>().abs() < 1e-14);
    }

    #[test]
    fn rejects_small_or_mismatched_resolution() {
        let d = Domain::interval(0.0, 1.0).unwrap();
        assert!(build_mesh(&d, Resolution::Cells(3)).is_err());
        assert!(build_mesh(&d, Resolution::Cells(0)).is_err());
        assert!(build_mesh(&d, Resolution::Polar { radial: 8, angular: 8 }).is_err());
        assert!(build_mesh(&unit_disk(), Resolution::Polar { radial: 8, angular: 9 }).is_err());
    }

    #[test]
    fn rejects_invalid_domains() {
        assert!(Domain::interval(1.0, 1.0).is_err());
        assert!(Domain::disk([0.0, 0.0], 0.0).is_err());
        assert!(Domain::disk([0.0, 0.0], -1.0).is_err());
    }

    #[test]
    fn normals() {
        let n = outer_normal(&unit_disk(), &Point::new(1.0, 0.0)).unwrap();
        assert!((n - Point::new(1.0, 0.0)).norm() < 1e-15);
        let d2 = Domain::disk([0.0, 0.0], 2.0).unwrap();
        let n = outer_normal(&d2, &Point::new(0.0, 2.0)).unwrap();
        assert!((n - Point::new(0.0, 1.0)).norm() < 1e-15);
        let i = Domain::interval(0.0, 1.0).unwrap();
        assert_eq!(outer_normal(&i, &Point::new(0.0, 0.0)).unwrap()[0], -1.0);
        assert_eq!(outer_normal(&i, &Point::new(1.0, 0.0)).unwrap()[0], 1.0);
        assert!(matches!(
            outer_normal(&unit_disk(), &Point::new(0.5, 0.0)),
            Err(Error::NotOnBoundary { .. })
        ));
    }

    /// Second fundamental form by central differences of the extended
    /// normal field `(x - c) / |x - c|`.
    fn ii_by_differences(center: Point, x: Point, v: Point) -> f64 {
        let nu = |p: Point| (p - center) / (p - center).norm();
        let h = 1e-6;
        let mut total = 0.0;
        for i in 0..2 {
            let mut e = Point::zeros();
            e[i] = h;
            let d_nu = (nu(x + e) - nu(x - e)) / (2.0 * h);
            for j in 0..2 {
                total += v[i] * v[j] * d_nu[j];
            }
        }
        total
    }

    #[test]
    fn second_fundamental_form_matches_normal_field_differences() {
        let cases = [
            (1.0, Point::new(1.0, 0.0), Point::new(0.0, 3.0), 9.0),
            (2.0, Point::new(0.0, 2.0), Point::new(1.0, 0.0), 0.5),
        ];
        for (radius, x, v, expected) in cases {
            let d = Domain::disk([0.0, 0.0], radius).unwrap();
            let ii = second_fundamental_form(&d, &x, &v).unwrap();
            let fd = ii_by_differences(Point::zeros(), x, v);
            assert!((fd - expected).abs() < 1e-6, "{fd} vs {expected}");
            assert!((ii - expected).abs() < 1e-12);
        }
        let i = Domain::interval(0.0, 1.0).unwrap();
        assert_eq!(
            second_fundamental_form(&i, &Point::new(1.0, 0.0), &Point::zeros()).unwrap(),
            0.0
        );
        assert!(second_fundamental_form(&unit_disk(), &Point::new(1.0, 0.0), &Point::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn second_fundamental_form_nonnegative_on_disk_boundary() {
        let d = Domain::disk([0.3, -0.2], 1.5).unwrap();
        let mesh = build_mesh(&d, Resolution::Polar { radial: 8, angular: 16 }).unwrap();
        for (x, nu) in mesh.boundary_nodes.iter().zip(&mesh.normals) {
            for s in [-2.0, 0.1, 5.0] {
                let t = s * Point::new(-nu[1], nu[0]);
                assert!(second_fundamental_form(&d, x, &t).unwrap() >= 0.0);
            }
        }
    }

    fn disk_integral(mesh: &Mesh, f: impl Fn(&Point) -> f64) -> f64 {
        mesh.interior_nodes
            .iter()
            .zip(&mesh.interior_weights)
            .map(|(x, w)| w * f(x))
            .sum()
    }

    #[test]
    fn quadrature_exact_for_quadratics() {
        let d = Domain::disk([0.0, 0.0], 1.0).unwrap();
        let mesh = build_mesh(
            &d,
            Resolution::Polar {
                radial: 32,
                angular: 64,
            },
        )
        .unwrap();
        // int x^2 = pi/4, int (1 + x + 2 y^2 + x y) = pi + pi/2
        type Integrand = fn(&Point) -> f64;
        let cases: [(Integrand, f64); 2] = [
            (|p| p[0] * p[0], PI / 4.0),
            (|p| 1.0 + p[0] + 2.0 * p[1] * p[1] + p[0] * p[1], 1.5 * PI),
        ];
        for (f, exact) in cases {
            let q = disk_integral(&mesh, f);
            assert!(((q - exact) / exact).abs() < 1e-8, "{q} vs {exact}");
        }
        let line = build_mesh(&Domain::interval(-1.0, 2.0).unwrap(), Resolution::Cells(32)).unwrap();
        let q = disk_integral(&line, |p| 1.0 - p[0] + 3.0 * p[0] * p[0]);
        assert!((q - 10.5).abs() < 1e-12 * 10.5);
    }

    #[test]
    fn quadrature_refinement_reduces_error() {
        let d = Domain::disk([0.0, 0.0], 1.0).unwrap();
        // int exp(x) over the unit disk = 2 pi I_1(1)
        let exact = 2.0 * PI * 0.565_159_103_992_485;
        let err = |m: usize| {
            let mesh = build_mesh(
                &d,
                Resolution::Polar {
                    radial: m,
                    angular: 2 * m,
                },
            )
            .unwrap();
            (disk_integral(&mesh, |p| p[0].exp()) - exact).abs()
        };
        let (e1, e2) = (err(4), err(8));
        assert!(e1 / e2 >= 3.0, "{e1} {e2}");
    }
}
