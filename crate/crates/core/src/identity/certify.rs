//! Term-by-term sign certificates. In the convex case (`phi` convex,
//! `beta > n`) every term is nonnegative; in the concave case (`phi` concave,
//! `beta > 0`) the decomposition at `-beta` has every term nonpositive.

use serde::Serialize;

use super::{
    default_h_t, phi2_fd, phi2_from_terms, solve_instance, term_integrands, TermIntegrands, TermSet, VerifyOptions,
    PHI2_FLOOR,
};
use crate::elliptic::Diagnostics;
use crate::error::{Error, Result, Stage};
use crate::fields::Field;
use crate::geometry::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    Convex,
    Concave,
}

impl Case {
    /// Exponent actually fed to the shared machinery.
    pub fn effective_beta(self, beta: f64) -> f64 {
        match self {
            Case::Convex => beta,
            Case::Concave => -beta,
        }
    }

    pub fn orientation(self) -> Orientation {
        match self {
            Case::Convex => Orientation::Nonnegative,
            Case::Concave => Orientation::Nonpositive,
        }
    }

    fn check(self, field: &dyn Field, beta: f64, n: usize) -> Result<()> {
        match self {
            Case::Convex => {
                if !field.convexity().is_convex() {
                    return Err(Error::Hypothesis(format!(
                        "convex case requires a convex field, `{}` is not",
                        field.name()
                    )));
                }
                if !(beta > n as f64) {
                    return Err(Error::Hypothesis(format!(
                        "convex case requires beta > n (beta = {beta}, n = {n})"
                    )));
                }
            }
            Case::Concave => {
                if !field.convexity().is_concave() {
                    return Err(Error::Hypothesis(format!(
                        "concave case requires a concave field, `{}` is not",
                        field.name()
                    )));
                }
                if !(beta > 0.0) {
                    return Err(Error::Hypothesis(format!(
                        "concave case requires beta > 0 (beta = {beta})"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Nonnegative,
    Nonpositive,
    /// `0 < beta < n`: the terms carry mixed signs.
    Indefinite,
}

impl Orientation {
    pub fn for_beta(beta: f64, n: usize) -> Self {
        if beta > n as f64 {
            Orientation::Nonnegative
        } else if beta < 0.0 {
            Orientation::Nonpositive
        } else {
            Orientation::Indefinite
        }
    }

    /// `value` has this sign up to `slack`.
    pub fn admits(self, value: f64, slack: f64) -> bool {
        match self {
            Orientation::Nonnegative => value >= -slack,
            Orientation::Nonpositive => value <= slack,
            Orientation::Indefinite => true,
        }
    }

    /// The pointwise value closest to violating the sign.
    fn extreme(self, values: &[f64]) -> f64 {
        match self {
            Orientation::Nonpositive => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            _ => values.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TermSign {
    pub value: f64,
    /// Worst pointwise integrand; `NaN` when the term has no nodes.
    pub pointwise_extreme: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignCertificate {
    pub orientation: Orientation,
    pub slack: f64,
    pub terms: [TermSign; 4],
}

impl SignCertificate {
    pub fn evaluate(integrands: &TermIntegrands, terms: &TermSet, beta: f64, n: usize, slack: f64) -> Self {
        let orientation = Orientation::for_beta(beta, n);
        let values = terms.to_array();
        let slices = integrands.as_slices();
        let terms = std::array::from_fn(|i| {
            let extreme = if slices[i].is_empty() {
                f64::NAN
            } else {
                orientation.extreme(slices[i])
            };
            TermSign {
                value: values[i],
                pointwise_extreme: extreme,
                pass: orientation.admits(values[i], slack) && (extreme.is_nan() || orientation.admits(extreme, slack)),
            }
        });
        SignCertificate {
            orientation,
            slack,
            terms,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.terms.iter().all(|t| t.pass)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateEntry {
    pub t: f64,
    pub phi: f64,
    /// `Phi''` from the term decomposition.
    pub phi2: f64,
    pub phi2_fd: f64,
    pub fd_vs_terms: f64,
    pub terms: TermSet,
    pub signs: SignCertificate,
    /// `Phi''` has the certified sign, up to `slack * Phi`.
    pub phi2_pass: bool,
    pub diagnostics: Diagnostics,
}

impl CertificateEntry {
    pub fn pass(&self) -> bool {
        self.phi2_pass && self.signs.all_pass()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub case: Case,
    pub beta: f64,
    pub effective_beta: f64,
    pub entries: Vec<CertificateEntry>,
}

impl Certificate {
    pub fn pass(&self) -> bool {
        self.entries.iter().all(CertificateEntry::pass)
    }
}

/// Evaluates the decomposition at every `t` and checks the sign of each term
/// and of `Phi''`.
pub fn certify(
    case: Case,
    mesh: &Mesh,
    field: &dyn Field,
    t_grid: &[f64],
    beta: f64,
    options: &VerifyOptions,
) -> Result<Certificate> {
    let n = mesh.domain.dim();
    case.check(field, beta, n)?;
    let effective_beta = case.effective_beta(beta);
    let orientation = case.orientation();
    let entries = t_grid
        .iter()
        .map(|&t| certify_at(orientation, mesh, field, t, effective_beta, options))
        .collect::<Result<Vec<_>>>()?;
    Ok(Certificate {
        case,
        beta,
        effective_beta,
        entries,
    })
}

fn certify_at(
    orientation: Orientation,
    mesh: &Mesh,
    field: &dyn Field,
    t: f64,
    beta: f64,
    options: &VerifyOptions,
) -> Result<CertificateEntry> {
    let n = mesh.domain.dim();
    let inst = solve_instance(mesh, field, t, beta, options.solver)?;
    let integrands = term_integrands(mesh, field, &inst).map_err(|e| e.at(Stage::Terms, t))?;
    let terms = integrands.integrate(&inst.state);
    let phi = inst.phi(n);
    let phi2 = phi2_from_terms(phi, &terms);
    let h_t = options.h_t.unwrap_or_else(|| default_h_t(t));
    let fd = phi2_fd(mesh, field, t, beta, h_t).map_err(|e| e.at(Stage::FiniteDifference, t))?;
    let signs = SignCertificate::evaluate(&integrands, &terms, beta, n, options.sign_slack);
    debug_assert_eq!(signs.orientation, orientation);
    Ok(CertificateEntry {
        t,
        phi,
        phi2,
        phi2_fd: fd.value,
        fd_vs_terms: (phi2 - fd.value).abs() / fd.value.abs().max(PHI2_FLOOR * phi),
        terms,
        phi2_pass: orientation.admits(phi2, options.sign_slack * phi),
        signs,
        diagnostics: inst.solution.diagnostics,
    })
}
