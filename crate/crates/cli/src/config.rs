//! Flat TOML run configuration.
//!
//! ```toml
//! mode = "verify"              # verify | certify_i | certify_ii | beta_limit | ibp_check
//! domain = "disk"              # interval | disk
//! center = [0.0, 0.0]
//! radius = 1.0
//! oracle = "anisotropic_convex"
//! oracle_c = 1.0
//! oracle_v = [1.0, 0.0]
//! beta = 5.0
//! t_values = [0.0]
//! resolution = [64, 128]       # [cells] on an interval, [radial, angular] on a disk
//! ```
//!
//! `beta`, `resolution` and the domain have no defaults. Tolerances default
//! to [`Tolerances::default`]. Unknown keys are rejected.

use std::path::PathBuf;

use marginal_core::identity::{default_h_t, Branch};
use marginal_core::{Builtin, Domain, Field, Kind, Resolution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "verify")]
    Verify,
    #[serde(rename = "certify_i")]
    CertifyConvex,
    #[serde(rename = "certify_ii")]
    CertifyConcave,
    #[serde(rename = "beta_limit")]
    BetaLimit,
    #[serde(rename = "ibp_check")]
    IbpCheck,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Verify => "verify",
            Mode::CertifyConvex => "certify_i",
            Mode::CertifyConcave => "certify_ii",
            Mode::BetaLimit => "beta_limit",
            Mode::IbpCheck => "ibp_check",
        }
    }

    fn uses_beta(self) -> bool {
        self != Mode::BetaLimit
    }

    fn uses_fd(self) -> bool {
        matches!(self, Mode::Verify | Mode::CertifyConvex | Mode::CertifyConcave)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Interval,
    Disk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleName {
    Constant,
    QuadraticConvex,
    QuadraticConcave,
    SeparableExponential,
    AnisotropicConvex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitBranch {
    Convex,
    Concave,
}

/// The config file as written, before validation. Echoed into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub mode: Mode,
    pub domain: DomainKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,

    pub oracle: OracleName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_t0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_v: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_b0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_b1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_b2: Option<f64>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_branch: Option<LimitBranch>,
    pub t_values: Vec<f64>,
    pub resolution: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_t: Option<f64>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity_rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign_slack: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinement_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinement_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ibp_rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_exponent_tol: Option<f64>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Largest accepted relative spread of the three `Phi''` values.
    pub identity_rel: f64,
    /// Largest accepted relative algebraic residual of the linear solve.
    pub solver_residual: f64,
    /// Slack on every sign check.
    pub sign_slack: f64,
    /// Smallest accepted error ratio per resolution doubling.
    pub refinement_ratio: f64,
    /// Errors below this on both meshes count as converged; their ratio is
    /// rounding noise and is not checked.
    pub refinement_floor: f64,
    /// Largest accepted integration-by-parts residual.
    pub ibp_rel: f64,
    /// Largest accepted `|e(beta)|` at the largest `beta` of a limit sweep.
    pub limit_error: f64,
    /// Expected decay exponent of `e(beta)` and its tolerance.
    pub limit_exponent: f64,
    pub limit_exponent_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity_rel: 1e-2,
            solver_residual: 1e-10,
            sign_slack: 1e-8,
            refinement_ratio: 3.0,
            refinement_floor: 1e-8,
            ibp_rel: 1e-3,
            limit_error: 1e-3,
            limit_exponent: -1.0,
            limit_exponent_tol: 0.2,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("malformed config: {0}")]
    Syntax(String),
    #[error("missing key `{0}`")]
    Missing(&'static str),
    #[error("key `{key}` is not used by {context}")]
    Unused { key: &'static str, context: String },
    #[error("invalid `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
    #[error("hypothesis {hypothesis} violated: {detail}")]
    Hypothesis { hypothesis: &'static str, detail: String },
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub raw: RawConfig,
    pub mode: Mode,
    pub domain: Domain,
    pub n: usize,
    pub field: Builtin,
    /// `None` only in `beta_limit` mode.
    pub beta: Option<f64>,
    pub beta_values: Vec<f64>,
    pub branch: Option<Branch>,
    pub t_values: Vec<f64>,
    pub resolution: Resolution,
    pub h_t: Option<f64>,
    pub tolerances: Tolerances,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn h_t_at(&self, t: f64) -> f64 {
        self.h_t.unwrap_or_else(|| default_h_t(t))
    }

    /// Re-validates with different resolution counts.
    pub fn with_resolution(&self, counts: &[usize]) -> Result<RunConfig, ConfigError> {
        let mut raw = self.raw.clone();
        raw.resolution = counts.to_vec();
        RunConfig::from_raw(raw)
    }

    pub fn from_raw(raw: RawConfig) -> Result<RunConfig, ConfigError> {
        let domain = build_domain(&raw)?;
        let n = domain.dim();
        let field = build_field(&raw, n)?;
        let resolution = build_resolution(&raw.resolution, n)?;

        let positive = |key: &'static str, v: Option<f64>, default: f64| -> Result<f64, ConfigError> {
            match v {
                None => Ok(default),
                Some(x) if x > 0.0 && x.is_finite() => Ok(x),
                Some(x) => Err(ConfigError::Invalid {
                    key,
                    reason: format!("must be positive and finite, got {x}"),
                }),
            }
        };
        let d = Tolerances::default();
        let tolerances = Tolerances {
            identity_rel: positive("identity_rel", raw.identity_rel, d.identity_rel)?,
            solver_residual: positive("solver_residual", raw.solver_residual, d.solver_residual)?,
            sign_slack: positive("sign_slack", raw.sign_slack, d.sign_slack)?,
            refinement_ratio: positive("refinement_ratio", raw.refinement_ratio, d.refinement_ratio)?,
            refinement_floor: positive("refinement_floor", raw.refinement_floor, d.refinement_floor)?,
            ibp_rel: positive("ibp_rel", raw.ibp_rel, d.ibp_rel)?,
            limit_error: positive("limit_error", raw.limit_error, d.limit_error)?,
            limit_exponent: match raw.limit_exponent {
                Some(x) if !x.is_finite() => {
                    return Err(ConfigError::Invalid {
                        key: "limit_exponent",
                        reason: format!("must be finite, got {x}"),
                    })
                }
                Some(x) => x,
                None => d.limit_exponent,
            },
            limit_exponent_tol: positive("limit_exponent_tol", raw.limit_exponent_tol, d.limit_exponent_tol)?,
        };
        let h_t = raw.h_t.map(|h| positive("h_t", Some(h), 0.0)).transpose()?;

        if raw.t_values.is_empty() {
            return Err(ConfigError::Missing("t_values"));
        }
        if let Some(t) = raw.t_values.iter().find(|t| !t.is_finite()) {
            return Err(ConfigError::Invalid {
                key: "t_values",
                reason: format!("{t} is not finite"),
            });
        }

        let nf = n as f64;
        let (beta, beta_values, branch) = if raw.mode.uses_beta() {
            for (key, present) in [
                ("beta_values", raw.beta_values.is_some()),
                ("limit_branch", raw.limit_branch.is_some()),
            ] {
                if present {
                    return Err(ConfigError::Unused {
                        key,
                        context: format!("mode {}", raw.mode.as_str()),
                    });
                }
            }
            let beta = raw.beta.ok_or(ConfigError::Missing("beta"))?;
            if !beta.is_finite() {
                return Err(ConfigError::Invalid {
                    key: "beta",
                    reason: format!("must be finite, got {beta}"),
                });
            }
            check_beta(raw.mode, beta, nf, &field)?;
            (Some(beta), Vec::new(), None)
        } else {
            if raw.beta.is_some() {
                return Err(ConfigError::Unused {
                    key: "beta",
                    context: "mode beta_limit (use `beta_values`)".into(),
                });
            }
            let values = raw.beta_values.clone().ok_or(ConfigError::Missing("beta_values"))?;
            if values.len() < 2 {
                return Err(ConfigError::Invalid {
                    key: "beta_values",
                    reason: "need at least two values to fit a decay exponent".into(),
                });
            }
            if values.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(ConfigError::Invalid {
                    key: "beta_values",
                    reason: "must be strictly increasing".into(),
                });
            }
            if let Some(b) = values.iter().find(|b| !(**b > nf) || !b.is_finite()) {
                return Err(ConfigError::Hypothesis {
                    hypothesis: "β > n",
                    detail: format!("beta_values contains {b} with n = {n}"),
                });
            }
            let branch = match raw.limit_branch.ok_or(ConfigError::Missing("limit_branch"))? {
                LimitBranch::Convex => Branch::Convex,
                LimitBranch::Concave => Branch::Concave,
            };
            (None, values, Some(branch))
        };

        check_validity_box(&raw, &domain, &field, h_t)?;

        Ok(RunConfig {
            mode: raw.mode,
            domain,
            n,
            field,
            beta,
            beta_values,
            branch,
            t_values: raw.t_values.clone(),
            resolution,
            h_t,
            tolerances,
            output: raw.output.clone(),
            raw,
        })
    }
}

/// Parses and validates a config file.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    RunConfig::from_raw(raw)
}

fn check_beta(mode: Mode, beta: f64, n: f64, field: &Builtin) -> Result<(), ConfigError> {
    match mode {
        Mode::Verify | Mode::IbpCheck => {
            if beta == n {
                return Err(ConfigError::Hypothesis {
                    hypothesis: "β ≠ n",
                    detail: format!("beta = {beta} equals the dimension n = {n}"),
                });
            }
            if beta == 0.0 {
                return Err(ConfigError::Hypothesis {
                    hypothesis: "β ≠ 0",
                    detail: "beta = 0 makes the functional constant".into(),
                });
            }
        }
        Mode::CertifyConvex => {
            if !(beta > n) {
                return Err(ConfigError::Hypothesis {
                    hypothesis: "β > n",
                    detail: format!("certify_i requires beta > n, got beta = {beta}, n = {n}"),
                });
            }
            if !field.convexity().is_convex() {
                return Err(ConfigError::Hypothesis {
                    hypothesis: "convex oracle",
                    detail: format!("certify_i requires a convex oracle, `{}` is not", field.name()),
                });
            }
        }
        Mode::CertifyConcave => {
            if !(beta > 0.0) {
                return Err(ConfigError::Hypothesis {
                    hypothesis: "β > 0",
                    detail: format!("certify_ii requires beta > 0, got {beta}"),
                });
            }
            if !field.convexity().is_concave() {
                return Err(ConfigError::Hypothesis {
                    hypothesis: "concave oracle",
                    detail: format!("certify_ii requires a concave oracle, `{}` is not", field.name()),
                });
            }
        }
        Mode::BetaLimit => unreachable!("beta_limit has no single beta"),
    }
    Ok(())
}

fn build_domain(raw: &RawConfig) -> Result<Domain, ConfigError> {
    let invalid = |key, e: marginal_core::Error| ConfigError::Invalid {
        key,
        reason: e.to_string(),
    };
    match raw.domain {
        DomainKind::Interval => {
            for (key, present) in [("center", raw.center.is_some()), ("radius", raw.radius.is_some())] {
                if present {
                    return Err(ConfigError::Unused {
                        key,
                        context: "an interval domain".into(),
                    });
                }
            }
            let [a, b] = raw.interval.ok_or(ConfigError::Missing("interval"))?;
            Domain::interval(a, b).map_err(|e| invalid("interval", e))
        }
        DomainKind::Disk => {
            if raw.interval.is_some() {
                return Err(ConfigError::Unused {
                    key: "interval",
                    context: "a disk domain".into(),
                });
            }
            let center = raw.center.ok_or(ConfigError::Missing("center"))?;
            let radius = raw.radius.ok_or(ConfigError::Missing("radius"))?;
            Domain::disk(center, radius).map_err(|e| invalid("radius", e))
        }
    }
}

fn build_resolution(counts: &[usize], n: usize) -> Result<Resolution, ConfigError> {
    if counts.len() != n {
        return Err(ConfigError::Invalid {
            key: "resolution",
            reason: format!(
                "expected {n} count(s) ({}), got {}",
                if n == 1 { "cells" } else { "radial, angular" },
                counts.len()
            ),
        });
    }
    Resolution::from_counts(counts).map_err(|e| ConfigError::Invalid {
        key: "resolution",
        reason: e.to_string(),
    })
}

fn vector(key: &'static str, v: &Option<Vec<f64>>, n: usize) -> Result<Option<[f64; 2]>, ConfigError> {
    match v {
        None => Ok(None),
        Some(v) if v.len() == n => Ok(Some([v[0], if n == 2 { v[1] } else { 0.0 }])),
        Some(v) => Err(ConfigError::Invalid {
            key,
            reason: format!("expected {n} component(s), got {}", v.len()),
        }),
    }
}

fn build_field(raw: &RawConfig, n: usize) -> Result<Builtin, ConfigError> {
    let present: [(&'static str, bool); 7] = [
        ("oracle_c", raw.oracle_c.is_some()),
        ("oracle_t0", raw.oracle_t0.is_some()),
        ("oracle_x0", raw.oracle_x0.is_some()),
        ("oracle_v", raw.oracle_v.is_some()),
        ("oracle_b0", raw.oracle_b0.is_some()),
        ("oracle_b1", raw.oracle_b1.is_some()),
        ("oracle_b2", raw.oracle_b2.is_some()),
    ];
    let allowed: &[&str] = match raw.oracle {
        OracleName::Constant => &["oracle_c"],
        OracleName::QuadraticConvex | OracleName::QuadraticConcave => &["oracle_c", "oracle_t0", "oracle_x0"],
        OracleName::SeparableExponential => &["oracle_b0", "oracle_b1", "oracle_b2"],
        OracleName::AnisotropicConvex => &["oracle_c", "oracle_v"],
    };
    if let Some((key, _)) = present.iter().find(|(k, p)| *p && !allowed.contains(k)) {
        return Err(ConfigError::Unused {
            key,
            context: format!("oracle {:?}", raw.oracle),
        });
    }
    let c = || raw.oracle_c.ok_or(ConfigError::Missing("oracle_c"));
    let x0 = vector("oracle_x0", &raw.oracle_x0, n)?.unwrap_or([0.0; 2]);
    let t0 = raw.oracle_t0.unwrap_or(0.0);
    let kind = match raw.oracle {
        OracleName::Constant => Kind::Constant { c: c()? },
        OracleName::QuadraticConvex => Kind::QuadraticConvex { c: c()?, t0, x0 },
        OracleName::QuadraticConcave => Kind::QuadraticConcave { c: c()?, t0, x0 },
        OracleName::SeparableExponential => Kind::SeparableExponential {
            b0: raw.oracle_b0.ok_or(ConfigError::Missing("oracle_b0"))?,
            b1: vector("oracle_b1", &raw.oracle_b1, n)?.unwrap_or([0.0; 2]),
            b2: raw.oracle_b2.unwrap_or(0.0),
        },
        OracleName::AnisotropicConvex => Kind::AnisotropicConvex {
            c: c()?,
            v: vector("oracle_v", &raw.oracle_v, n)?.ok_or(ConfigError::Missing("oracle_v"))?,
        },
    };
    Builtin::new(kind, n).map_err(|e| ConfigError::Invalid {
        key: "oracle",
        reason: e.to_string(),
    })
}

/// Every `t` (widened by `2 h_t` where finite differences are taken) and the
/// bounding box of the domain must lie inside the oracle's validity box. For
/// an axis-aligned box the domain is inside exactly when its bounding box is.
fn check_validity_box(raw: &RawConfig, domain: &Domain, field: &Builtin, h_t: Option<f64>) -> Result<(), ConfigError> {
    let bx = field.validity();
    let (lo, hi) = match *domain {
        Domain::Interval { a, b } => ([a, 0.0], [b, 0.0]),
        Domain::Disk { center, radius } => (
            [center[0] - radius, center[1] - radius],
            [center[0] + radius, center[1] + radius],
        ),
    };
    for k in 0..domain.dim() {
        if lo[k] < bx.x_lo[k] || hi[k] > bx.x_hi[k] {
            return Err(ConfigError::Hypothesis {
                hypothesis: "validity box",
                detail: format!(
                    "domain spans [{}, {}] in coordinate {k}, oracle `{}` is valid on [{}, {}]",
                    lo[k],
                    hi[k],
                    field.name(),
                    bx.x_lo[k],
                    bx.x_hi[k]
                ),
            });
        }
    }
    for &t in &raw.t_values {
        let margin = if raw.mode.uses_fd() {
            2.0 * h_t.unwrap_or_else(|| default_h_t(t))
        } else {
            0.0
        };
        if t - margin < bx.t.0 || t + margin > bx.t.1 {
            return Err(ConfigError::Hypothesis {
                hypothesis: "validity box",
                detail: format!(
                    "t = {t} with stencil margin {margin} leaves the oracle's time range [{}, {}]",
                    bx.t.0, bx.t.1
                ),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
mode = "verify"
domain = "interval"
interval = [0.0, 1.0]
oracle = "separable_exponential"
oracle_b0 = 1.0
beta = 3.0
t_values = [0.3]
resolution = [32]
"#;

    #[test]
    fn minimal_config_parses() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.mode, Mode::Verify);
        assert_eq!(c.n, 1);
        assert_eq!(c.beta, Some(3.0));
        assert_eq!(c.resolution, Resolution::Cells(32));
        assert_eq!(c.tolerances, Tolerances::default());
    }

    #[test]
    fn beta_equal_to_dimension_is_rejected() {
        let err = parse_config(&MINIMAL.replace("beta = 3.0", "beta = 1.0")).unwrap_err();
        assert!(err.to_string().contains("β ≠ n"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config(&format!("{MINIMAL}\nbeta_typo = 2.0\n")).unwrap_err();
        assert!(matches!(err, ConfigError::Syntax(_)));
        assert!(err.to_string().contains("beta_typo"), "{err}");
    }

    #[test]
    fn missing_beta_is_rejected() {
        let err = parse_config(&MINIMAL.replace("beta = 3.0", "")).unwrap_err();
        assert!(matches!(err, ConfigError::Missing("beta")));
    }

    #[test]
    fn convex_certification_needs_convex_oracle_and_large_beta() {
        let concave = r#"
mode = "certify_i"
domain = "interval"
interval = [0.0, 1.0]
oracle = "quadratic_concave"
oracle_c = 4.0
oracle_x0 = [0.5]
beta = 3.0
t_values = [0.0]
resolution = [32]
"#;
        let err = parse_config(concave).unwrap_err();
        assert!(err.to_string().contains("convex oracle"), "{err}");
        let small_beta = MINIMAL
            .replace("mode = \"verify\"", "mode = \"certify_i\"")
            .replace("beta = 3.0", "beta = 0.5");
        let err = parse_config(&small_beta).unwrap_err();
        assert!(err.to_string().contains("β > n"), "{err}");
        let ok = concave.replace("certify_i", "certify_ii");
        assert!(parse_config(&ok).is_ok());
    }

    #[test]
    fn domain_must_fit_validity_box() {
        let text = r#"
mode = "certify_ii"
domain = "interval"
interval = [0.0, 1.0]
oracle = "quadratic_concave"
oracle_c = 0.5
oracle_x0 = [0.5]
beta = 2.0
t_values = [0.0]
resolution = [32]
"#;
        let err = parse_config(text).unwrap_err();
        assert!(err.to_string().contains("validity box"), "{err}");
    }

    #[test]
    fn mismatched_resolution_is_rejected() {
        assert!(parse_config(&MINIMAL.replace("[32]", "[32, 64]")).is_err());
    }

    #[test]
    fn oracle_parameters_are_checked() {
        let err = parse_config(&format!("{MINIMAL}oracle_v = [1.0]\n")).unwrap_err();
        assert!(matches!(err, ConfigError::Unused { key: "oracle_v", .. }), "{err}");
        let err =
            parse_config(&MINIMAL.replace("oracle_b0 = 1.0", "oracle_b0 = 1.0\noracle_b1 = [1.0, 2.0]")).unwrap_err();
        assert!(err.to_string().contains("oracle_b1"), "{err}");
    }

    #[test]
    fn beta_limit_config() {
        let text = r#"
mode = "beta_limit"
domain = "interval"
interval = [0.0, 1.0]
oracle = "constant"
oracle_c = 1.0
beta_values = [100.0, 1000.0]
limit_branch = "concave"
t_values = [0.0]
resolution = [32]
"#;
        let c = parse_config(text).unwrap();
        assert_eq!(c.branch, Some(Branch::Concave));
        assert!(parse_config(&text.replace("[100.0, 1000.0]", "[1000.0, 100.0]")).is_err());
        assert!(parse_config(&text.replace("[100.0, 1000.0]", "[0.5, 1000.0]")).is_err());
        assert!(parse_config(&format!("{text}beta = 3.0\n")).is_err());
    }

    #[test]
    fn resolution_override_revalidates() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.with_resolution(&[64]).unwrap().resolution, Resolution::Cells(64));
        assert!(c.with_resolution(&[64, 128]).is_err());
    }
}
