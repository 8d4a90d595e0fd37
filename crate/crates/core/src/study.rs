//! Convergence-study driver: builds a mesh family, solves each level,
//! measures errors against the manufactured solution, fits rates, and writes
//! CSV and Markdown outputs.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    cea_ratio, error_norms, fit_rate, ColumnFits, ConvergenceTable, RateFit, StudyRow,
};
use crate::error::{Error, Result};
use crate::fem::{nodal_interpolant, solve_problem, ProblemSpec};
use crate::mesh_io::write_mesh_files;
use crate::meshgen::{
    build_disk_polar_mesh, build_square_line_mesh, build_unfitted_square_mesh, Mesh,
};
use crate::solver::SolverConfig;

pub const CSV_HEADER: &str =
    "h,dofs,l2_uh,h1_uh,h1_uh_regular,h1_uh_irregular,l2_uI,h1_uI,cea_ratio,cg_iters";

/// Which manufactured problem a study runs, with its coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemKind {
    Radial {
        #[serde(rename = "B1")]
        b1: f64,
        #[serde(rename = "B2")]
        b2: f64,
        r0: f64,
    },
    Line {
        #[serde(rename = "B1")]
        b1: f64,
        #[serde(rename = "B2")]
        b2: f64,
        x0: f64,
    },
    Smooth,
    RadialUnfitted {
        #[serde(rename = "B1")]
        b1: f64,
        #[serde(rename = "B2")]
        b2: f64,
        r0: f64,
    },
}

impl ProblemKind {
    /// Named default instances for CLI shorthand.
    pub fn from_name(name: &str) -> Result<ProblemKind> {
        match name {
            "radial" => Ok(ProblemKind::Radial {
                b1: 1.0,
                b2: 100.0,
                r0: 0.5,
            }),
            "line" => Ok(ProblemKind::Line {
                b1: 1.0,
                b2: 100.0,
                x0: 0.5,
            }),
            "smooth" => Ok(ProblemKind::Smooth),
            "radial_unfitted" => Ok(ProblemKind::RadialUnfitted {
                b1: 1.0,
                b2: 100.0,
                r0: 0.5,
            }),
            other => Err(Error::InvalidInput(format!(
                "unknown problem '{other}'; expected radial, line, smooth, or radial_unfitted"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::Radial { .. } => "radial",
            ProblemKind::Line { .. } => "line",
            ProblemKind::Smooth => "smooth",
            ProblemKind::RadialUnfitted { .. } => "radial_unfitted",
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ProblemKind::Radial { b1, b2, r0 } => format!("radial (B1={b1}, B2={b2}, r0={r0})"),
            ProblemKind::Line { b1, b2, x0 } => format!("line (B1={b1}, B2={b2}, x0={x0})"),
            ProblemKind::Smooth => "smooth".to_string(),
            ProblemKind::RadialUnfitted { b1, b2, r0 } => {
                format!("radial_unfitted (B1={b1}, B2={b2}, r0={r0})")
            }
        }
    }

    pub fn build_problem(&self) -> Result<ProblemSpec> {
        match *self {
            ProblemKind::Radial { b1, b2, r0 } => crate::problems::radial_problem(b1, b2, r0),
            ProblemKind::Line { b1, b2, x0 } => crate::problems::line_problem(b1, b2, x0),
            ProblemKind::Smooth => Ok(crate::problems::smooth_problem()),
            ProblemKind::RadialUnfitted { b1, b2, r0 } => {
                crate::problems::radial_unfitted_problem(b1, b2, r0)
            }
        }
    }

    pub fn build_mesh(&self, problem: &ProblemSpec, target_h: f64) -> Result<Mesh> {
        match self {
            ProblemKind::Radial { .. } | ProblemKind::Smooth => {
                build_disk_polar_mesh(&problem.domain, target_h)
            }
            ProblemKind::Line { .. } => build_square_line_mesh(&problem.domain, target_h),
            ProblemKind::RadialUnfitted { .. } => {
                build_unfitted_square_mesh(&problem.domain, target_h)
            }
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("study_out")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyConfig {
    pub problem: ProblemKind,
    pub h_values: Vec<f64>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub emit_mesh: bool,
}

impl StudyConfig {
    pub fn from_json(text: &str) -> Result<StudyConfig> {
        let config: StudyConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.h_values.is_empty() {
            return Err(Error::InvalidInput("h_values must be non-empty".into()));
        }
        for &h in &self.h_values {
            if !(h > 0.0 && h < 1.0) {
                return Err(Error::InvalidInput(format!(
                    "h_values must lie in (0, 1), got {h}"
                )));
            }
        }
        for w in self.h_values.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::InvalidInput(format!(
                    "h_values must be strictly decreasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }
}

fn fit_column(rows: &[StudyRow], get: impl Fn(&StudyRow) -> f64) -> Option<RateFit> {
    let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.err_uh.h, get(r))).collect();
    fit_rate(&pairs).ok()
}

fn fits_for(rows: &[StudyRow]) -> ColumnFits {
    ColumnFits {
        l2_uh: fit_column(rows, |r| r.err_uh.l2),
        h1_uh: fit_column(rows, |r| r.err_uh.h1),
        h1_uh_regular: fit_column(rows, |r| r.err_uh.h1_regular),
        h1_uh_irregular: fit_column(rows, |r| r.err_uh.h1_irregular),
        l2_ui: fit_column(rows, |r| r.err_ui.l2),
        h1_ui: fit_column(rows, |r| r.err_ui.h1),
        h1_ui_regular: fit_column(rows, |r| r.err_ui.h1_regular),
        h1_ui_irregular: fit_column(rows, |r| r.err_ui.h1_irregular),
    }
}

/// Solves every level and fits rates without touching the filesystem.
/// Returns the meshes alongside the table so callers can export them.
pub fn compute_study(config: &StudyConfig) -> Result<(ConvergenceTable, Vec<Mesh>)> {
    config.validate()?;
    let problem = config.problem.build_problem()?;
    let exact = problem.exact.clone().ok_or_else(|| {
        Error::InvalidInput("study requires a problem with an exact solution".into())
    })?;
    let mut rows = Vec::with_capacity(config.h_values.len());
    let mut meshes = Vec::new();
    for &target_h in &config.h_values {
        let level = |e: Error| e.at_level(target_h);
        let mesh = config
            .problem
            .build_mesh(&problem, target_h)
            .map_err(level)?;
        let (uh, stats) = solve_problem(&mesh, &problem, &config.solver).map_err(level)?;
        let ui = nodal_interpolant(&mesh, &exact).map_err(level)?;
        let err_uh = error_norms(&mesh, &uh, &exact);
        let err_ui = error_norms(&mesh, &ui, &exact);
        let cea = cea_ratio(&err_uh, &err_ui).map_err(level)?;
        rows.push(StudyRow {
            err_uh,
            err_ui,
            cea_ratio: cea,
            stats,
        });
        meshes.push(mesh);
    }
    for w in rows.windows(2) {
        if !(w[1].err_uh.h < w[0].err_uh.h) {
            return Err(Error::InvalidInput(format!(
                "requested h_values produced non-decreasing mesh sizes ({} then {}); refine the list",
                w[0].err_uh.h, w[1].err_uh.h
            )));
        }
    }
    let fits = fits_for(&rows);
    Ok((ConvergenceTable { rows, fits }, meshes))
}

pub fn csv_contents(table: &ConvergenceTable) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in &table.rows {
        writeln!(
            out,
            "{:.11e},{},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{}",
            row.err_uh.h,
            row.err_uh.dof_count,
            row.err_uh.l2,
            row.err_uh.h1,
            row.err_uh.h1_regular,
            row.err_uh.h1_irregular,
            row.err_ui.l2,
            row.err_ui.h1,
            row.cea_ratio,
            row.stats.iterations
        )
        .expect("writing to String cannot fail");
    }
    out
}

fn fit_cells(fit: &Option<RateFit>) -> String {
    match fit {
        Some(f) => format!(
            "{:.4} | {:.2e} | {:.4} | {:.2e}",
            f.slope, f.residual_pure, f.slope_with_log, f.residual_log
        ),
        None => "n/a | n/a | n/a | n/a".to_string(),
    }
}

fn pairwise_rate(h0: f64, e0: f64, h1: f64, e1: f64) -> Option<f64> {
    (e0 > 0.0 && e1 > 0.0).then(|| (e0 / e1).ln() / (h0 / h1).ln())
}

fn rate_cell(rate: Option<f64>) -> String {
    match rate {
        Some(r) => format!("{r:.3}"),
        None => "n/a".to_string(),
    }
}

pub fn markdown_report(config: &StudyConfig, table: &ConvergenceTable) -> String {
    let mut out = String::new();
    writeln!(out, "# Convergence study: {}\n", config.problem.describe()).unwrap();
    writeln!(out, "| {} |", CSV_HEADER.replace(',', " | ")).unwrap();
    writeln!(out, "|{}", "---|".repeat(10)).unwrap();
    for row in &table.rows {
        writeln!(
            out,
            "| {:.4e} | {} | {:.4e} | {:.4e} | {:.4e} | {:.4e} | {:.4e} | {:.4e} | {:.3} | {} |",
            row.err_uh.h,
            row.err_uh.dof_count,
            row.err_uh.l2,
            row.err_uh.h1,
            row.err_uh.h1_regular,
            row.err_uh.h1_irregular,
            row.err_ui.l2,
            row.err_ui.h1,
            row.cea_ratio,
            row.stats.iterations
        )
        .unwrap();
    }
    writeln!(out, "\n## Fitted slopes\n").unwrap();
    writeln!(
        out,
        "| column | pure slope | pure rms | log-corrected slope | log rms |"
    )
    .unwrap();
    writeln!(out, "|{}", "---|".repeat(5)).unwrap();
    let fits = &table.fits;
    for (name, fit) in [
        ("l2_uh", &fits.l2_uh),
        ("h1_uh", &fits.h1_uh),
        ("h1_uh_regular", &fits.h1_uh_regular),
        ("h1_uh_irregular", &fits.h1_uh_irregular),
        ("l2_uI", &fits.l2_ui),
        ("h1_uI", &fits.h1_ui),
        ("h1_uI_regular", &fits.h1_ui_regular),
        ("h1_uI_irregular", &fits.h1_ui_irregular),
    ] {
        writeln!(out, "| {} | {} |", name, fit_cells(fit)).unwrap();
    }
    writeln!(out, "\n## Pairwise rates\n").unwrap();
    writeln!(out, "| levels | l2_uh | h1_uh | l2_uI | h1_uI |").unwrap();
    writeln!(out, "|{}", "---|".repeat(5)).unwrap();
    for w in table.rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (h0, h1) = (a.err_uh.h, b.err_uh.h);
        writeln!(
            out,
            "| {:.4e} -> {:.4e} | {} | {} | {} | {} |",
            h0,
            h1,
            rate_cell(pairwise_rate(h0, a.err_uh.l2, h1, b.err_uh.l2)),
            rate_cell(pairwise_rate(h0, a.err_uh.h1, h1, b.err_uh.h1)),
            rate_cell(pairwise_rate(h0, a.err_ui.l2, h1, b.err_ui.l2)),
            rate_cell(pairwise_rate(h0, a.err_ui.h1, h1, b.err_ui.h1)),
        )
        .unwrap();
    }
    out
}

/// Runs the study and writes study.csv, report.md, and (optionally) one
/// .node/.ele pair per level into the output directory.
pub fn run_study(config: &StudyConfig) -> Result<ConvergenceTable> {
    let (table, meshes) = compute_study(config)?;
    std::fs::create_dir_all(&config.output_dir)?;
    std::fs::write(config.output_dir.join("study.csv"), csv_contents(&table))?;
    std::fs::write(
        config.output_dir.join("report.md"),
        markdown_report(config, &table),
    )?;
    if config.emit_mesh {
        for (i, mesh) in meshes.iter().enumerate() {
            write_mesh_files(mesh, &config.output_dir, &format!("level_{i:02}"))?;
        }
    }
    Ok(table)
}
