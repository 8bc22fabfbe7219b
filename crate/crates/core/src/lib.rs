//! Numerical verification of the second-derivative identity for
//! `Phi(t) = (int_V phi(t,x)^(-beta) dx)^(-1/(beta - n))` and of the convexity
//! (concavity) of `Phi` for convex (concave) `phi`.
//!
//! The pipeline for one `(t, beta)`:
//!
//! 1. [`geometry::build_mesh`] discretizes `V` (an interval or a disk).
//! 2. [`measure::build_measure`] forms the probability measure `mu_t`.
//! 3. [`elliptic`] solves `L_t u = d_t phi / phi - mean` with Neumann data.
//! 4. [`identity`] evaluates `Phi''` three ways: a finite-difference oracle,
//!    the variance formula, and the four-term decomposition built from `u`.

pub mod elliptic;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod identity;
pub mod measure;

pub use error::{Error, Result, Stage};
pub use fields::{Builtin, Convexity, Field, Kind, ValidityBox};
pub use geometry::{build_mesh, Domain, Mesh, Point, Resolution};
pub use identity::{
    beta_limit_sweep, certify, check_ibp_identities, solve_instance, verify_identity, Branch, Case, Certificate,
    IbpResiduals, IdentityReport, LimitSweep, SolvedInstance, TermSet, VerifyOptions,
};
pub use measure::{build_measure, eval_phi, MeasureState};
