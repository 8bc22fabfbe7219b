//! Positive test fields `phi(t, x)` with closed-form derivatives.
//!
//! All spatial quantities use two-component storage; for `n = 1` the second
//! component of every point, gradient and Hessian row is zero.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::geometry::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convexity {
    Convex,
    Concave,
    /// Both convex and concave (e.g. constants).
    Affine,
    Neither,
}

impl Convexity {
    pub fn is_convex(self) -> bool {
        matches!(self, Convexity::Convex | Convexity::Affine)
    }

    pub fn is_concave(self) -> bool {
        matches!(self, Convexity::Concave | Convexity::Affine)
    }
}

/// Admissible `(t, x)` region of a field: an interval in `t` times an
/// axis-aligned box in `x`. Inactive coordinates are left unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityBox {
    pub t: (f64, f64),
    pub x_lo: [f64; 2],
    pub x_hi: [f64; 2],
}

impl ValidityBox {
    pub fn unbounded() -> Self {
        ValidityBox {
            t: (f64::NEG_INFINITY, f64::INFINITY),
            x_lo: [f64::NEG_INFINITY; 2],
            x_hi: [f64::INFINITY; 2],
        }
    }

    /// True if the `margin`-neighbourhood of `(t, x)` lies in the box.
    pub fn contains_with_margin(&self, t: f64, x: &Point, margin: f64) -> bool {
        let inside = |v: f64, lo: f64, hi: f64| v - margin >= lo && v + margin <= hi;
        inside(t, self.t.0, self.t.1)
            && inside(x[0], self.x_lo[0], self.x_hi[0])
            && inside(x[1], self.x_lo[1], self.x_hi[1])
    }

    pub fn contains(&self, t: f64, x: &Point) -> bool {
        self.contains_with_margin(t, x, 0.0)
    }
}

/// A field `phi: U x V -> R_+` together with the derivatives the identity needs.
pub trait Field: Send + Sync {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn convexity(&self) -> Convexity;
    fn validity(&self) -> ValidityBox;

    fn value(&self, t: f64, x: &Point) -> f64;
    fn dt(&self, t: f64, x: &Point) -> f64;
    fn dtt(&self, t: f64, x: &Point) -> f64;
    fn grad_x(&self, t: f64, x: &Point) -> Vector2<f64>;
    fn hess_x(&self, t: f64, x: &Point) -> Matrix2<f64>;
    /// `grad_x (d_t phi)`.
    fn grad_x_dt(&self, t: f64, x: &Point) -> Vector2<f64>;

    fn check_point(&self, t: f64, x: &Point) -> Result<()> {
        if self.validity().contains(t, x) {
            Ok(())
        } else {
            Err(Error::OutsideValidityBox {
                field: self.name().to_string(),
                t,
                x: [x[0], x[1]],
            })
        }
    }
}

/// Full `(n+1) x (n+1)` Hessian in `(t, x)`, zero-padded to 3x3 when `n = 1`.
pub fn space_time_hessian(field: &dyn Field, t: f64, x: &Point) -> Matrix3<f64> {
    let dtt = field.dtt(t, x);
    let mixed = field.grad_x_dt(t, x);
    let hx = field.hess_x(t, x);
    Matrix3::new(
        dtt,
        mixed[0],
        mixed[1], //
        mixed[0],
        hx[(0, 0)],
        hx[(0, 1)], //
        mixed[1],
        hx[(1, 0)],
        hx[(1, 1)],
    )
}

/// `<(grad^2_{(t,x)} phi) X, X>` for `X = (x0, xs)`.
pub fn hessian_quadratic_form(field: &dyn Field, t: f64, x: &Point, x0: f64, xs: &Vector2<f64>) -> Result<f64> {
    field.check_point(t, x)?;
    Ok(quadratic_form_unchecked(field, t, x, x0, xs))
}

pub(crate) fn quadratic_form_unchecked(field: &dyn Field, t: f64, x: &Point, x0: f64, xs: &Vector2<f64>) -> f64 {
    x0 * x0 * field.dtt(t, x) + 2.0 * x0 * field.grad_x_dt(t, x).dot(xs) + xs.dot(&(field.hess_x(t, x) * xs))
}

/// Worst relative discrepancy between the declared derivatives and central
/// finite differences of `phi` with step `h`, over `points`.
///
/// Discrepancies are measured relative to `max(|exact|, 1)`.
pub fn validate_derivatives(field: &dyn Field, points: &[(f64, Point)], h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Hypothesis(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let n = field.dim();
    let mut worst: f64 = 0.0;
    let mut record = |exact: f64, approx: f64| {
        let d = (exact - approx).abs() / exact.abs().max(1.0);
        worst = worst.max(d);
    };
    for &(t, x) in points {
        if !field.validity().contains_with_margin(t, &x, 2.0 * h) {
            return Err(Error::OutsideValidityBox {
                field: field.name().to_string(),
                t,
                x: [x[0], x[1]],
            });
        }
        let f = |s: f64, y: &Point| field.value(s, y);
        let e = |i: usize| {
            let mut v = Point::zeros();
            v[i] = h;
            v
        };
        let f0 = f(t, &x);
        record(field.dt(t, &x), (f(t + h, &x) - f(t - h, &x)) / (2.0 * h));
        record(field.dtt(t, &x), (f(t + h, &x) - 2.0 * f0 + f(t - h, &x)) / (h * h));

        let grad = field.grad_x(t, &x);
        let hess = field.hess_x(t, &x);
        let mixed = field.grad_x_dt(t, &x);
        for i in 0..n {
            let ei = e(i);
            record(grad[i], (f(t, &(x + ei)) - f(t, &(x - ei))) / (2.0 * h));
            let d_dt =
                (f(t + h, &(x + ei)) - f(t + h, &(x - ei)) - f(t - h, &(x + ei)) + f(t - h, &(x - ei))) / (4.0 * h * h);
            record(mixed[i], d_dt);
            for j in 0..n {
                let approx = if i == j {
                    (f(t, &(x + ei)) - 2.0 * f0 + f(t, &(x - ei))) / (h * h)
                } else {
                    let ej = e(j);
                    (f(t, &(x + ei + ej)) - f(t, &(x + ei - ej)) - f(t, &(x - ei + ej)) + f(t, &(x - ei - ej)))
                        / (4.0 * h * h)
                };
                record(hess[(i, j)], approx);
            }
        }
    }
    Ok(worst)
}

/// Smallest eigenvalue of the space-time Hessian restricted to the active
/// `n + 1` coordinates.
pub fn min_hessian_eigenvalue(field: &dyn Field, t: f64, x: &Point) -> f64 {
    let h = space_time_hessian(field, t, x);
    if field.dim() == 1 {
        let m = h.fixed_view::<2, 2>(0, 0).into_owned();
        m.symmetric_eigenvalues().min()
    } else {
        h.symmetric_eigenvalues().min()
    }
}

pub fn max_hessian_eigenvalue(field: &dyn Field, t: f64, x: &Point) -> f64 {
    let h = space_time_hessian(field, t, x);
    if field.dim() == 1 {
        let m = h.fixed_view::<2, 2>(0, 0).into_owned();
        m.symmetric_eigenvalues().max()
    } else {
        h.symmetric_eigenvalues().max()
    }
}

/// Closed-form test fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    /// `phi = c`.
    Constant { c: f64 },
    /// `phi = c + (t - t0)^2 + |x - x0|^2`.
    QuadraticConvex { c: f64, t0: f64, x0: [f64; 2] },
    /// `phi = c - (t - t0)^2 - |x - x0|^2`.
    QuadraticConcave { c: f64, t0: f64, x0: [f64; 2] },
    /// `phi = e^t b(x)` with `b(x) = b0 + <b1, x> + b2 |x|^2`.
    SeparableExponential { b0: f64, b1: [f64; 2], b2: f64 },
    /// `phi = c + (t + <v, x>)^2 + |x|^2`.
    AnisotropicConvex { c: f64, v: [f64; 2] },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Builtin {
    kind: Kind,
    dim: usize,
    name: String,
    validity: ValidityBox,
}

impl Builtin {
    /// Builds a catalog field for spatial dimension `dim` (1 or 2). Vector
    /// parameters are truncated to the active dimension.
    pub fn new(kind: Kind, dim: usize) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::Hypothesis(format!("dimension must be 1 or 2, got {dim}")));
        }
        let mask = |v: [f64; 2]| if dim == 1 { [v[0], 0.0] } else { v };
        let kind = match kind {
            Kind::QuadraticConvex { c, t0, x0 } => Kind::QuadraticConvex { c, t0, x0: mask(x0) },
            Kind::QuadraticConcave { c, t0, x0 } => Kind::QuadraticConcave { c, t0, x0: mask(x0) },
            Kind::SeparableExponential { b0, b1, b2 } => Kind::SeparableExponential { b0, b1: mask(b1), b2 },
            Kind::AnisotropicConvex { c, v } => Kind::AnisotropicConvex { c, v: mask(v) },
            k @ Kind::Constant { .. } => k,
        };
        let (name, positive) = match kind {
            Kind::Constant { c } => ("constant", c > 0.0),
            Kind::QuadraticConvex { c, .. } => ("quadratic_convex", c > 0.0),
            Kind::QuadraticConcave { c, .. } => ("quadratic_concave", c > 0.0),
            Kind::SeparableExponential { .. } => ("separable_exponential", true),
            Kind::AnisotropicConvex { c, .. } => ("anisotropic_convex", c > 0.0),
        };
        if !positive {
            return Err(Error::Hypothesis(format!("{name} requires c > 0")));
        }
        let validity = match kind {
            Kind::QuadraticConcave { c, t0, x0 } => {
                // phi >= c / 2 on the cube of half-width s.
                let s = (c / (2.0 * (dim as f64 + 1.0))).sqrt();
                let hi1 = if dim == 1 { f64::INFINITY } else { x0[1] + s };
                let lo1 = if dim == 1 { f64::NEG_INFINITY } else { x0[1] - s };
                ValidityBox {
                    t: (t0 - s, t0 + s),
                    x_lo: [x0[0] - s, lo1],
                    x_hi: [x0[0] + s, hi1],
                }
            }
            _ => ValidityBox::unbounded(),
        };
        Ok(Builtin {
            kind,
            dim,
            name: name.to_string(),
            validity,
        })
    }

    pub fn constant(c: f64, dim: usize) -> Result<Self> {
        Self::new(Kind::Constant { c }, dim)
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn with_validity(mut self, validity: ValidityBox) -> Self {
        self.validity = validity;
        self
    }

    fn active(&self, v: Vector2<f64>) -> Vector2<f64> {
        if self.dim == 1 {
            Vector2::new(v[0], 0.0)
        } else {
            v
        }
    }

    fn identity(&self) -> Matrix2<f64> {
        if self.dim == 1 {
            Matrix2::new(1.0, 0.0, 0.0, 0.0)
        } else {
            Matrix2::identity()
        }
    }
}

impl Field for Builtin {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn convexity(&self) -> Convexity {
        match self.kind {
            Kind::Constant { .. } => Convexity::Affine,
            Kind::QuadraticConvex { .. } | Kind::AnisotropicConvex { .. } => Convexity::Convex,
            Kind::QuadraticConcave { .. } => Convexity::Concave,
            Kind::SeparableExponential { b1, b2, .. } => {
                if b1 == [0.0, 0.0] && b2 == 0.0 {
                    Convexity::Convex
                } else {
                    Convexity::Neither
                }
            }
        }
    }

    fn validity(&self) -> ValidityBox {
        self.validity
    }

    fn value(&self, t: f64, x: &Point) -> f64 {
        let x = self.active(*x);
        match self.kind {
            Kind::Constant { c } => c,
            Kind::QuadraticConvex { c, t0, x0 } => c + (t - t0).powi(2) + (x - Vector2::from(x0)).norm_squared(),
            Kind::QuadraticConcave { c, t0, x0 } => c - (t - t0).powi(2) - (x - Vector2::from(x0)).norm_squared(),
            Kind::SeparableExponential { b0, b1, b2 } => {
                t.exp() * (b0 + Vector2::from(b1).dot(&x) + b2 * x.norm_squared())
            }
            Kind::AnisotropicConvex { c, v } => c + (t + Vector2::from(v).dot(&x)).powi(2) + x.norm_squared(),
        }
    }

    fn dt(&self, t: f64, x: &Point) -> f64 {
        let x = self.active(*x);
        match self.kind {
            Kind::Constant { .. } => 0.0,
            Kind::QuadraticConvex { t0, .. } => 2.0 * (t - t0),
            Kind::QuadraticConcave { t0, .. } => -2.0 * (t - t0),
            Kind::SeparableExponential { .. } => self.value(t, &x),
            Kind::AnisotropicConvex { v, .. } => 2.0 * (t + Vector2::from(v).dot(&x)),
        }
    }

    fn dtt(&self, t: f64, x: &Point) -> f64 {
        match self.kind {
            Kind::Constant { .. } => 0.0,
            Kind::QuadraticConvex { .. } | Kind::AnisotropicConvex { .. } => 2.0,
            Kind::QuadraticConcave { .. } => -2.0,
            Kind::SeparableExponential { .. } => self.value(t, x),
        }
    }

    fn grad_x(&self, t: f64, x: &Point) -> Vector2<f64> {
        let x = self.active(*x);
        let g = match self.kind {
            Kind::Constant { .. } => Vector2::zeros(),
            Kind::QuadraticConvex { x0, .. } => 2.0 * (x - Vector2::from(x0)),
            Kind::QuadraticConcave { x0, .. } => -2.0 * (x - Vector2::from(x0)),
            Kind::SeparableExponential { b1, b2, .. } => t.exp() * (Vector2::from(b1) + 2.0 * b2 * x),
            Kind::AnisotropicConvex { v, .. } => {
                let v = Vector2::from(v);
                2.0 * (t + v.dot(&x)) * v + 2.0 * x
            }
        };
        self.active(g)
    }

    fn hess_x(&self, t: f64, _x: &Point) -> Matrix2<f64> {
        let id = self.identity();
        match self.kind {
            Kind::Constant { .. } => Matrix2::zeros(),
            Kind::QuadraticConvex { .. } => 2.0 * id,
            Kind::QuadraticConcave { .. } => -2.0 * id,
            Kind::SeparableExponential { b2, .. } => 2.0 * b2 * t.exp() * id,
            Kind::AnisotropicConvex { v, .. } => {
                let v = Vector2::from(v);
                2.0 * v * v.transpose() + 2.0 * id
            }
        }
    }

    fn grad_x_dt(&self, t: f64, x: &Point) -> Vector2<f64> {
        match self.kind {
            Kind::SeparableExponential { .. } => self.grad_x(t, x),
            Kind::AnisotropicConvex { v, .. } => 2.0 * Vector2::from(v),
            _ => Vector2::zeros(),
        }
    }
}

/// Space-time vector `(x0, xs)` as a 3-vector.
pub fn space_time_vector(x0: f64, xs: &Vector2<f64>) -> Vector3<f64> {
    Vector3::new(x0, xs[0], xs[1])
}
