//! `summary.json` and `table.csv` writers.
//!
//! Both files are pure functions of the [`Outcome`]: no timestamps, host
//! names or thread counts, so identical runs give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use marginal_core::identity::{IbpResiduals, TermSet};
use serde::Serialize;

use crate::config::{RawConfig, Tolerances};
use crate::run::{flag, Outcome, Rows};

pub const SUMMARY_FILE: &str = "summary.json";
pub const TABLE_FILE: &str = "table.csv";

#[derive(Serialize)]
struct Summary<'a> {
    status: &'static str,
    mode: &'static str,
    n: usize,
    field: &'a str,
    resolution: Vec<usize>,
    refined_resolution: Option<Vec<usize>>,
    tolerances: Tolerances,
    config: &'a RawConfig,
    failures: Vec<String>,
    results: &'a Rows,
}

pub fn render_summary(outcome: &Outcome) -> String {
    use marginal_core::Field;
    let cfg = &outcome.config;
    let summary = Summary {
        status: flag(outcome.pass()),
        mode: cfg.mode.as_str(),
        n: cfg.n,
        field: cfg.field.name(),
        resolution: cfg.resolution.counts(),
        refined_resolution: outcome.refined_resolution.map(|r| r.counts()),
        tolerances: cfg.tolerances,
        config: &cfg.raw,
        failures: outcome.failures(),
        results: &outcome.rows,
    };
    let mut text = serde_json::to_string_pretty(&summary).expect("summary is plain data");
    text.push('\n');
    text
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

struct Table {
    out: String,
}

impl Table {
    fn new(header: &[String]) -> Self {
        Table {
            out: header.join(",") + "\n",
        }
    }

    fn row(&mut self, cells: Vec<String>) {
        let _ = writeln!(self.out, "{}", cells.join(","));
    }
}

fn names(prefix: &[&str], middle: impl IntoIterator<Item = String>, suffix: &[&str]) -> Vec<String> {
    prefix
        .iter()
        .map(|s| s.to_string())
        .chain(middle)
        .chain(suffix.iter().map(|s| s.to_string()))
        .collect()
}

pub fn render_table(outcome: &Outcome) -> String {
    match &outcome.rows {
        Rows::Verify(rows) => {
            let mut table = Table::new(&names(
                &["t", "phi", "phi2_fd", "phi2_direct", "phi2_terms"],
                TermSet::NAMES
                    .iter()
                    .map(|s| s.to_string())
                    .chain(TermSet::NAMES.iter().map(|s| format!("{s}_sign"))),
                &[
                    "fd_vs_direct",
                    "fd_vs_terms",
                    "direct_vs_terms",
                    "pde_strong_residual",
                    "spread",
                    "refined_spread",
                    "refinement_ratio",
                    "algebraic_residual",
                    "identity_pass",
                    "refinement_pass",
                    "solver_pass",
                    "pass",
                ],
            ));
            for r in rows {
                let rep = &r.report;
                let res = &rep.residuals;
                let mut cells = vec![
                    num(rep.t),
                    num(rep.phi),
                    num(rep.phi2_fd),
                    num(rep.phi2_direct),
                    num(rep.phi2_terms),
                ];
                cells.extend(rep.terms.to_array().map(num));
                cells.extend(rep.sign_certificate.terms.map(|s| flag(s.pass).to_string()));
                cells.extend([
                    num(res.fd_vs_direct),
                    num(res.fd_vs_terms),
                    num(res.direct_vs_terms),
                    num(res.pde_strong_residual),
                    num(res.spread()),
                    num(r.refined_spread),
                    num(r.refinement.ratio),
                    num(rep.diagnostics.algebraic_residual),
                ]);
                cells.extend([r.identity_pass, r.refinement.pass, r.solver_pass, r.pass].map(|b| flag(b).to_string()));
                table.row(cells);
            }
            table.out
        }
        Rows::Certify(rows) => {
            let mut table = Table::new(&names(
                &["t", "phi", "phi2", "phi2_fd", "fd_vs_terms"],
                TermSet::NAMES
                    .iter()
                    .map(|s| s.to_string())
                    .chain(TermSet::NAMES.iter().map(|s| format!("{s}_extreme")))
                    .chain(TermSet::NAMES.iter().map(|s| format!("{s}_sign"))),
                &["phi2_sign", "algebraic_residual", "solver_pass", "pass"],
            ));
            for r in rows {
                let e = &r.entry;
                let mut cells = vec![num(e.t), num(e.phi), num(e.phi2), num(e.phi2_fd), num(e.fd_vs_terms)];
                cells.extend(e.terms.to_array().map(num));
                cells.extend(e.signs.terms.map(|s| num(s.pointwise_extreme)));
                cells.extend(e.signs.terms.map(|s| flag(s.pass).to_string()));
                cells.push(flag(e.phi2_pass).to_string());
                cells.push(num(e.diagnostics.algebraic_residual));
                cells.push(flag(r.solver_pass).to_string());
                cells.push(flag(r.pass).to_string());
                table.row(cells);
            }
            table.out
        }
        Rows::Ibp(rows) => {
            let per_identity = IbpResiduals::NAMES.iter().flat_map(|s| {
                [
                    format!("{s}_lhs"),
                    format!("{s}_rhs"),
                    format!("{s}_residual"),
                    format!("{s}_refined_residual"),
                    format!("{s}_ratio"),
                    format!("{s}_pass"),
                ]
            });
            let mut table = Table::new(&names(
                &["t"],
                per_identity,
                &["algebraic_residual", "solver_pass", "pass"],
            ));
            for r in rows {
                let mut cells = vec![num(r.t)];
                for (base, check) in r.base.to_array().iter().zip(&r.checks) {
                    cells.extend([
                        num(base.lhs),
                        num(base.rhs),
                        num(check.refinement.base),
                        num(check.refinement.refined),
                        num(check.refinement.ratio),
                        flag(check.pass).to_string(),
                    ]);
                }
                cells.push(num(r.algebraic_residual));
                cells.push(flag(r.solver_pass).to_string());
                cells.push(flag(r.pass).to_string());
                table.row(cells);
            }
            table.out
        }
        Rows::Limit(rows) => {
            let header: Vec<String> = [
                "branch",
                "t",
                "beta",
                "value",
                "target",
                "error",
                "decay_exponent",
                "error_pass",
                "exponent_pass",
                "pass",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect();
            let mut table = Table::new(&header);
            for r in rows {
                let branch = match r.sweep.branch {
                    marginal_core::identity::Branch::Convex => "convex",
                    marginal_core::identity::Branch::Concave => "concave",
                };
                for p in &r.sweep.points {
                    table.row(vec![
                        branch.to_string(),
                        num(r.sweep.t),
                        num(p.beta),
                        num(p.value),
                        num(r.sweep.target),
                        num(p.error),
                        num(r.sweep.decay_exponent),
                        flag(r.error_pass).to_string(),
                        flag(r.exponent_pass).to_string(),
                        flag(r.pass).to_string(),
                    ]);
                }
            }
            table.out
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFiles {
    pub summary: PathBuf,
    pub table: PathBuf,
}

/// Writes both report files into `dir`, creating it if needed.
pub fn emit_report(outcome: &Outcome, dir: &Path) -> io::Result<ReportFiles> {
    fs::create_dir_all(dir)?;
    let files = ReportFiles {
        summary: dir.join(SUMMARY_FILE),
        table: dir.join(TABLE_FILE),
    };
    fs::write(&files.summary, render_summary(outcome))?;
    fs::write(&files.table, render_table(outcome))?;
    Ok(files)
}
