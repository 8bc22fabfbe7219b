//! The probability measure `d mu_t = phi(t,.)^(-beta) dx / Z(t)` and the
//! functional `Phi(t) = Z(t)^(-1 / (beta - n))`.

use crate::error::{Error, Result};
use crate::fields::Field;
use crate::geometry::{Mesh, Point};

#[derive(Debug, Clone)]
pub struct MeasureState {
    pub t: f64,
    pub beta: f64,
    /// `ln Z`, kept in log form so large `beta` does not overflow.
    pub log_z: f64,
    /// Quadrature weight times density, normalized to sum to one.
    pub interior_mu: Vec<f64>,
    /// Surface weight times `phi^(-beta) / Z` with the interior normalizer.
    pub boundary_mu: Vec<f64>,
}

impl MeasureState {
    /// `Z = int_V phi^(-beta) dx` from the raw quadrature.
    pub fn z(&self) -> f64 {
        self.log_z.exp()
    }

    /// Density `phi(t, x)^(-beta) / Z` at an arbitrary point.
    pub fn density(&self, field: &dyn Field, x: &Point) -> f64 {
        (-self.beta * field.value(self.t, x).ln() - self.log_z).exp()
    }

    pub fn len(&self) -> usize {
        self.interior_mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interior_mu.is_empty()
    }
}

fn log_density(field: &dyn Field, t: f64, beta: f64, x: &Point) -> Result<f64> {
    let value = field.value(t, x);
    if !(value > 0.0) {
        return Err(Error::NonPositiveField {
            t,
            x: [x[0], x[1]],
            value,
        });
    }
    let l = -beta * value.ln();
    if !l.is_finite() {
        return Err(Error::NonFiniteWeight { t, x: [x[0], x[1]] });
    }
    Ok(l)
}

pub fn build_measure(mesh: &Mesh, field: &dyn Field, t: f64, beta: f64) -> Result<MeasureState> {
    let interior_log = mesh
        .interior_nodes
        .iter()
        .map(|x| log_density(field, t, beta, x))
        .collect::<Result<Vec<_>>>()?;
    let boundary_log = mesh
        .boundary_nodes
        .iter()
        .map(|x| log_density(field, t, beta, x))
        .collect::<Result<Vec<_>>>()?;

    let shift = interior_log.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = interior_log
        .iter()
        .zip(&mesh.interior_weights)
        .map(|(l, w)| w * (l - shift).exp())
        .collect();
    let sum = compensated_sum(raw.iter().copied());
    if !(sum > 0.0 && sum.is_finite()) {
        return Err(Error::NonFiniteWeight {
            t,
            x: [f64::NAN, f64::NAN],
        });
    }
    let log_z = shift + sum.ln();
    let interior_mu = raw.iter().map(|w| w / sum).collect();
    let boundary_mu = boundary_log
        .iter()
        .zip(&mesh.boundary_weights)
        .map(|(l, w)| w * (l - log_z).exp())
        .collect();
    Ok(MeasureState {
        t,
        beta,
        log_z,
        interior_mu,
        boundary_mu,
    })
}

/// `Phi(t) = (int_V phi^(-beta))^(-1/(beta - n))`.
pub fn eval_phi(mesh: &Mesh, field: &dyn Field, t: f64, beta: f64) -> Result<f64> {
    let n = mesh.domain.dim() as f64;
    if beta == n {
        return Err(Error::BetaEqualsDimension { n: n as usize });
    }
    let state = build_measure(mesh, field, t, beta)?;
    Ok((-state.log_z / (beta - n)).exp())
}

/// Neumaier summation; `Phi` is finite-differenced, so the rounding error of
/// `Z` must not grow with the node count.
pub(crate) fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0;
    for v in values {
        let next = sum + v;
        carry += if sum.abs() >= v.abs() {
            (sum - next) + v
        } else {
            (v - next) + sum
        };
        sum = next;
    }
    sum + carry
}

pub fn mean_under_mu(state: &MeasureState, g: &[f64]) -> Result<f64> {
    check_len(state, g)?;
    Ok(g.iter().zip(&state.interior_mu).map(|(v, w)| v * w).sum())
}

/// `Var_mu(g) = E[g^2] - E[g]^2`, clamped at zero against rounding.
pub fn variance_under_mu(state: &MeasureState, g: &[f64]) -> Result<f64> {
    check_len(state, g)?;
    let mean = mean_under_mu(state, g)?;
    let second: f64 = g.iter().zip(&state.interior_mu).map(|(v, w)| v * v * w).sum();
    let var = second - mean * mean;
    if var < 0.0 {
        debug_assert!(-var <= 1e-14 * second.max(f64::MIN_POSITIVE) + f64::EPSILON * mean * mean);
        return Ok(0.0);
    }
    Ok(var)
}

fn check_len(state: &MeasureState, g: &[f64]) -> Result<()> {
    if g.len() != state.len() {
        return Err(Error::SizeMismatch {
            expected: state.len(),
            actual: g.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Builtin, Kind};
    use crate::geometry::{build_mesh, Domain, Resolution};
    use std::f64::consts::PI;

    fn unit_interval(m: usize) -> Mesh {
        build_mesh(&Domain::interval(0.0, 1.0).unwrap(), Resolution::Cells(m)).unwrap()
    }

    fn unit_disk(m: usize) -> Mesh {
        build_mesh(
            &Domain::disk([0.0, 0.0], 1.0).unwrap(),
            Resolution::Polar {
                radial: m,
                angular: 2 * m,
            },
        )
        .unwrap()
    }

    #[test]
    fn constant_field_on_unit_interval() {
        let mesh = unit_interval(16);
        let one = Builtin::constant(1.0, 1).unwrap();
        for beta in [-2.0, 0.5, 3.0] {
            let s = build_measure(&mesh, &one, 0.0, beta).unwrap();
            assert!((s.z() - 1.0).abs() < 1e-14);
            let total: f64 = s.interior_mu.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            let expected = mesh.interior_weights.clone();
            for (m, w) in s.interior_mu.iter().zip(&expected) {
                assert!((m - w).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn constant_two_on_unit_disk() {
        let mesh = unit_disk(32);
        let two = Builtin::constant(2.0, 2).unwrap();
        let s = build_measure(&mesh, &two, 0.0, 1.0).unwrap();
        assert!((s.z() - PI / 2.0).abs() < 1e-6);
        assert!((s.interior_mu.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partition_function_refinement() {
        let f = Builtin::new(
            Kind::QuadraticConvex {
                c: 1.0,
                t0: 0.0,
                x0: [0.0; 2],
            },
            1,
        )
        .unwrap();
        let coarse = build_measure(&unit_interval(64), &f, 0.0, 3.0).unwrap().z();
        let fine = build_measure(&unit_interval(640), &f, 0.0, 3.0).unwrap().z();
        assert!((coarse - fine).abs() < 1e-8);
    }

    #[test]
    fn phi_values() {
        let mesh = unit_interval(32);
        let one = Builtin::constant(1.0, 1).unwrap();
        assert!((eval_phi(&mesh, &one, 0.0, 3.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((eval_phi(&mesh, &one, 0.0, 0.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(
            eval_phi(&mesh, &one, 0.0, 1.0),
            Err(Error::BetaEqualsDimension { n: 1 })
        ));
        let sep = Builtin::new(
            Kind::SeparableExponential {
                b0: 1.0,
                b1: [0.0; 2],
                b2: 0.0,
            },
            1,
        )
        .unwrap();
        let phi = eval_phi(&mesh, &sep, 0.2, 3.0).unwrap();
        assert!((phi - 0.3f64.exp()).abs() < 1e-13);
    }

    #[test]
    fn phi_of_constant_field() {
        let mesh = unit_disk(16);
        let kappa = 1.7;
        let f = Builtin::constant(kappa, 2).unwrap();
        for beta in [-1.0, 0.5, 5.0] {
            let phi = eval_phi(&mesh, &f, 0.0, beta).unwrap();
            let area: f64 = mesh.interior_weights.iter().sum();
            let expected = kappa.powf(beta / (beta - 2.0)) * area.powf(-1.0 / (beta - 2.0));
            assert!((phi - expected).abs() < 1e-13 * expected);
        }
    }

    #[test]
    fn means_and_variances() {
        let mesh = unit_interval(64);
        let one = Builtin::constant(1.0, 1).unwrap();
        let s = build_measure(&mesh, &one, 0.0, 2.0).unwrap();
        let c = vec![3.5; mesh.interior_nodes.len()];
        assert!((mean_under_mu(&s, &c).unwrap() - 3.5).abs() < 1e-14);
        assert_eq!(variance_under_mu(&s, &c).unwrap(), 0.0);
        let x: Vec<f64> = mesh.interior_nodes.iter().map(|p| p[0]).collect();
        assert!((variance_under_mu(&s, &x).unwrap() - 1.0 / 12.0).abs() < 1e-10);
        let bump: Vec<f64> = mesh
            .interior_nodes
            .iter()
            .map(|p| (-(p[0] - 0.5f64).powi(2) * 20.0).exp())
            .collect();
        let plain: f64 = bump.iter().zip(&mesh.interior_weights).map(|(b, w)| b * w).sum();
        assert!((mean_under_mu(&s, &bump).unwrap() - plain).abs() < 1e-14);
        assert!(matches!(mean_under_mu(&s, &[1.0]), Err(Error::SizeMismatch { .. })));
        assert!(variance_under_mu(&s, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn separable_time_log_derivative_is_one() {
        let mesh = unit_disk(16);
        let sep = Builtin::new(
            Kind::SeparableExponential {
                b0: 2.0,
                b1: [0.3, 0.1],
                b2: 0.5,
            },
            2,
        )
        .unwrap();
        let s = build_measure(&mesh, &sep, 0.4, 3.0).unwrap();
        let g: Vec<f64> = mesh
            .interior_nodes
            .iter()
            .map(|x| sep.dt(0.4, x) / sep.value(0.4, x))
            .collect();
        assert!((mean_under_mu(&s, &g).unwrap() - 1.0).abs() < 1e-14);
        assert!(variance_under_mu(&s, &g).unwrap() < 1e-15);
    }

    #[test]
    fn weights_invariant_under_scaling_the_field() {
        let mesh = unit_disk(16);
        let f = Builtin::new(Kind::AnisotropicConvex { c: 1.0, v: [1.0, 0.5] }, 2).unwrap();
        let scaled = Builtin::new(Kind::AnisotropicConvex { c: 1.0, v: [1.0, 0.5] }, 2).unwrap();
        struct Scaled<'a>(&'a Builtin, f64);
        impl Field for Scaled<'_> {
            fn name(&self) -> &str {
                "scaled"
            }
            fn dim(&self) -> usize {
                2
            }
            fn convexity(&self) -> crate::fields::Convexity {
                self.0.convexity()
            }
            fn validity(&self) -> crate::fields::ValidityBox {
                self.0.validity()
            }
            fn value(&self, t: f64, x: &Point) -> f64 {
                self.1 * self.0.value(t, x)
            }
            fn dt(&self, t: f64, x: &Point) -> f64 {
                self.1 * self.0.dt(t, x)
            }
            fn dtt(&self, t: f64, x: &Point) -> f64 {
                self.1 * self.0.dtt(t, x)
            }
            fn grad_x(&self, t: f64, x: &Point) -> nalgebra::Vector2<f64> {
                self.1 * self.0.grad_x(t, x)
            }
            fn hess_x(&self, t: f64, x: &Point) -> nalgebra::Matrix2<f64> {
                self.1 * self.0.hess_x(t, x)
            }
            fn grad_x_dt(&self, t: f64, x: &Point) -> nalgebra::Vector2<f64> {
                self.1 * self.0.grad_x_dt(t, x)
            }
        }
        let a = build_measure(&mesh, &f, 0.2, 4.0).unwrap();
        let b = build_measure(&mesh, &Scaled(&scaled, 7.5), 0.2, 4.0).unwrap();
        for (x, y) in a.interior_mu.iter().zip(&b.interior_mu) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_nonpositive_field() {
        let mesh = unit_interval(16);
        let f = Builtin::new(
            Kind::SeparableExponential {
                b0: -1.0,
                b1: [0.0; 2],
                b2: 0.0,
            },
            1,
        )
        .unwrap();
        assert!(matches!(
            build_measure(&mesh, &f, 0.0, 2.0),
            Err(Error::NonPositiveField { .. })
        ));
    }
}
