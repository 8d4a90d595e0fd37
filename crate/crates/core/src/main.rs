use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ifem::mesh_io::write_mesh_files;
use ifem::meshgen::quality_report;
use ifem::study::{run_study, ProblemKind, StudyConfig};

#[derive(Parser)]
#[command(
    name = "ifem",
    version,
    about = "P1 finite elements for elliptic problems with an interface coefficient jump"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study described by a JSON config file
    Study {
        /// Path to the JSON study configuration
        #[arg(long)]
        config: PathBuf,
        /// Mesh sizes overriding the config, comma separated (e.g. 0.25,0.125)
        #[arg(long, value_delimiter = ',')]
        h: Option<Vec<f64>>,
        /// Problem name overriding the config: radial, line, smooth, radial_unfitted
        #[arg(long)]
        problem: Option<String>,
        /// Output directory overriding the config
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build one mesh and write Triangle-style .node/.ele files
    Mesh {
        /// Problem name: radial, line, smooth, radial_unfitted
        #[arg(long)]
        problem: String,
        /// Target mesh size
        #[arg(long)]
        h: f64,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> ifem::error::Result<()> {
    match cli.command {
        Command::Study {
            config,
            h,
            problem,
            out,
        } => {
            let text = std::fs::read_to_string(&config)?;
            let mut config = StudyConfig::from_json(&text)?;
            if let Some(h_values) = h {
                config.h_values = h_values;
            }
            if let Some(name) = problem {
                config.problem = ProblemKind::from_name(&name)?;
            }
            if let Some(dir) = out {
                config.output_dir = dir;
            }
            config.validate()?;
            let table = run_study(&config)?;
            println!("problem: {}", config.problem.describe());
            for row in &table.rows {
                println!(
                    "h={:.4e} dofs={} h1_uh={:.4e} h1_uI={:.4e} cea={:.3} iters={}",
                    row.err_uh.h,
                    row.err_uh.dof_count,
                    row.err_uh.h1,
                    row.err_ui.h1,
                    row.cea_ratio,
                    row.stats.iterations
                );
            }
            if let Some(fit) = &table.fits.h1_uh {
                println!(
                    "h1_uh slope: {:.4} pure, {:.4} log-corrected",
                    fit.slope, fit.slope_with_log
                );
            }
            println!("wrote {}", config.output_dir.join("study.csv").display());
            println!("wrote {}", config.output_dir.join("report.md").display());
        }
        Command::Mesh { problem, h, out } => {
            let kind = ProblemKind::from_name(&problem)?;
            let spec = kind.build_problem()?;
            let mesh = kind.build_mesh(&spec, h)?;
            write_mesh_files(&mesh, &out, kind.name())?;
            let quality = quality_report(&mesh);
            println!(
                "mesh: {} vertices, {} triangles (h={:.4e})",
                mesh.n_vertices(),
                mesh.n_triangles(),
                mesh.h
            );
            println!(
                "quality: min inradius ratio {:.4}, {} regular, {} irregular",
                quality.min_inradius_ratio, quality.n_regular, quality.n_irregular
            );
            println!(
                "wrote {} and {}",
                out.join(format!("{}.node", kind.name())).display(),
                out.join(format!("{}.ele", kind.name())).display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
