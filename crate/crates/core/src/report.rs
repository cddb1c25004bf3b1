//! Rendering of suite results, integral tables and point evaluations.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::boundary_tractions::BoundaryState;
use crate::config::{Config, ConfigError, Mode};
use crate::constitutive::StressState;
use crate::identity_suite::{IntegralsReport, Status, SuiteError, SuiteReport, CATALOGUE};
use crate::poly_fields::{format_poly_vec, Jet, PolyVec};
use crate::scalar::{Field, Rational, Surd};
use crate::surface_geom::LevelSurface;
use crate::tensor_core::{Mat3, Ten3, Vec3};

/// JSON schema the suite report conforms to.
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

pub const REPORT_FILE: &str = "report.json";
pub const SUMMARY_FILE: &str = "summary.md";
pub const INTEGRALS_FILE: &str = "integrals.json";

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Write `report.json` and `summary.md` into `dir`.
pub fn write_suite_outputs(report: &SuiteReport, dir: &Path) -> io::Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let json = dir.join(REPORT_FILE);
    let md = dir.join(SUMMARY_FILE);
    fs::write(&json, to_json(report))?;
    fs::write(&md, render_summary(report))?;
    Ok((json, md))
}

pub fn write_integrals(report: &IntegralsReport, dir: &Path) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(INTEGRALS_FILE);
    fs::write(&path, to_json(report))?;
    Ok(path)
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "FAIL",
        Status::Skipped => "skipped",
    }
}

/// Markdown summary with one table row per check.
pub fn render_summary(r: &SuiteReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Identity suite\n");
    let _ = writeln!(
        out,
        "mode `{}`, seed {}, {} fields of degree {} on {}; tolerance {:e}\n",
        r.mode,
        r.seed,
        r.corpus.fields,
        r.corpus.degree,
        r.corpus.surfaces.join(", "),
        r.tolerance
    );
    let m = &r.material;
    let _ = writeln!(
        out,
        "material: mu {}, lambda {}, alpha1 {}, alpha2 {}, eta {}, Lc {} ({:?})\n",
        m.mu, m.lambda, m.alpha1, m.alpha2, m.eta, m.length_scale, m.definiteness
    );
    let _ = writeln!(out, "| id | status | mode | evaluations | max residual | anchor |");
    let _ = writeln!(out, "|----|--------|------|-------------|--------------|--------|");
    for c in &r.checks {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | `{}` | {} |",
            c.id,
            status_word(c.status),
            c.mode,
            c.evaluations,
            c.max_residual,
            c.anchor
        );
    }
    let detailed: Vec<_> = r.checks.iter().filter(|c| !c.quadrature.is_empty() || c.witness.is_some() || !c.notes.is_empty()).collect();
    if !detailed.is_empty() {
        let _ = writeln!(out, "\n## Details\n");
    }
    for c in detailed {
        let mut parts = Vec::new();
        for q in &c.quadrature {
            parts.push(format!("{} nodes: {:.3e}", q.nodes, q.max_relative_residual));
        }
        if let Some(w) = &c.witness {
            parts.push(format!(
                "witness field {} on {} at ({}), residual ({}), norm {:.6e}",
                w.field,
                w.surface,
                w.point.join(", "),
                w.residual.join(", "),
                w.norm_f64
            ));
        }
        parts.extend(c.notes.iter().cloned());
        let _ = writeln!(out, "- {}: {}", c.id, parts.join("; "));
    }
    if !r.warnings.is_empty() {
        let _ = writeln!(out, "\n## Warnings\n");
        for w in &r.warnings {
            let _ = writeln!(out, "- {w}");
        }
    }
    let passed = r.checks.iter().filter(|c| c.passed()).count();
    let _ = writeln!(
        out,
        "\n{} of {} checks passed; {}.",
        passed,
        r.checks.len(),
        if r.all_passed { "all passed" } else { "FAILURES present" }
    );
    out
}

/// One line per failing check, for the terminal.
pub fn render_failures(r: &SuiteReport) -> String {
    let mut out = String::new();
    for c in r.failures() {
        let _ = writeln!(
            out,
            "FAIL {}: {} nonzero residuals, max {} (relative {:.3e}){}",
            c.id,
            c.nonzero_residuals,
            c.max_residual,
            c.max_relative_residual,
            if c.notes.is_empty() { String::new() } else { format!(" [{}]", c.notes.join("; ")) }
        );
    }
    out
}

pub fn render_integrals(r: &IntegralsReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "mode {}, tolerance {:e}, refinement {:?}", r.mode, r.tolerance, r.refinement);
    for row in &r.rows {
        let _ = write!(out, "{:<24} {:<30} {:<18} {:<11}", row.check, row.identity, row.patch, row.field);
        if let Some(e) = &row.exact {
            let _ = write!(out, " exact {}π vs {}π", e.surface, e.boundary);
        }
        for l in &row.levels {
            let _ = write!(out, " | {}: {:.2e}", l.nodes, l.relative_residual);
        }
        let _ = writeln!(out, " {}", if row.converged { "ok" } else { "NOT CONVERGED" });
    }
    let _ = writeln!(out, "{}", if r.all_converged { "all converged" } else { "convergence FAILED" });
    out
}

/// A tensor at a point, flattened to `(indices, value)` entries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TensorTable {
    pub name: &'static str,
    pub tag: &'static str,
    pub entries: Vec<(Vec<usize>, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointEvaluation {
    pub field: String,
    pub point: [String; 3],
    pub surface: Option<String>,
    pub tables: Vec<TensorTable>,
}

fn vec_table<S: Field>(name: &'static str, tag: &'static str, v: &Vec3<S>) -> TensorTable {
    TensorTable { name, tag, entries: (0..3).map(|i| (vec![i + 1], v[i].exact_repr())).collect() }
}

fn mat_table<S: Field>(name: &'static str, tag: &'static str, m: &Mat3<S>) -> TensorTable {
    let mut entries = Vec::with_capacity(9);
    for i in 0..3 {
        for j in 0..3 {
            entries.push((vec![i + 1, j + 1], m.at(i, j).exact_repr()));
        }
    }
    TensorTable { name, tag, entries }
}

fn ten3_table<S: Field>(name: &'static str, tag: &'static str, t: &Ten3<S>) -> TensorTable {
    let mut entries = Vec::with_capacity(27);
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                entries.push((vec![i + 1, j + 1, k + 1], t.0[i][j][k].exact_repr()));
            }
        }
    }
    TensorTable { name, tag, entries }
}

fn evaluate_with<S: Field>(
    config: &Config,
    u: &PolyVec,
    x: &Vec3<Rational>,
    surface: Option<&LevelSurface>,
) -> Result<PointEvaluation, SuiteError> {
    let params = config.material.params().map_err(ConfigError::from)?;
    let point: Vec3<S> = Vec3::from_rationals(x);
    let jet = Jet::of(u);
    let stress = StressState::from_jet(&params, &jet.eval(&point));
    let mut tables = vec![
        mat_table("σ", "bulk", &stress.cauchy),
        mat_table("m̃", "bulk", &stress.couple),
        ten3_table("𝔪̃", "bulk", &stress.hyper),
        mat_table("τ̃", "bulk", &stress.nonlocal),
    ];
    if let Some(s) = surface {
        let b = BoundaryState::<S>::new(&params, &jet, s, point.clone())?;
        tables.push(vec_table("n", "surface", &b.point.normal));
        for set in b.traction_sets() {
            let tag = set.formulation.tag();
            let (t_name, g_name) = match tag {
                "mindlin-tiersten" => ("t̃^int", "g̃^int"),
                _ => ("t^int", "g^int"),
            };
            tables.push(vec_table(t_name, tag, &set.t));
            tables.push(vec_table(g_name, tag, &set.g));
        }
    }
    Ok(PointEvaluation {
        field: format_poly_vec(u),
        point: std::array::from_fn(|i| point[i].exact_repr()),
        surface: surface.map(|s| s.name().to_string()),
        tables,
    })
}

/// Bulk tensors at `x`, plus tractions in every formulation when a surface is given.
pub fn evaluate_point(
    config: &Config,
    u: &PolyVec,
    x: &Vec3<Rational>,
    surface: Option<&LevelSurface>,
) -> Result<PointEvaluation, SuiteError> {
    config.validate()?;
    match config.mode {
        Mode::Rational => evaluate_with::<Surd>(config, u, x, surface),
        Mode::Float => evaluate_with::<f64>(config, u, x, surface),
    }
}

pub fn render_evaluation(e: &PointEvaluation) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "u = ({})", e.field);
    let _ = writeln!(
        out,
        "x = ({}){}",
        e.point.join(", "),
        e.surface.as_ref().map(|s| format!(" on {s}")).unwrap_or_default()
    );
    for t in &e.tables {
        let _ = writeln!(out, "\n{} [{}]", t.name, t.tag);
        for (idx, v) in &t.entries {
            let idx: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(out, "  ({}) {}", idx.join(","), v);
        }
    }
    out
}

/// Ids in catalogue order, for consumers that check summary completeness.
pub fn catalogue_ids() -> impl Iterator<Item = &'static str> {
    CATALOGUE.iter().map(|c| c.id)
}
