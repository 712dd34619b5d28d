use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nsls_core::experiment::{build_mesh, parse_number_list, run_experiment, ExperimentConfig, Geometry, RunReport};
use nsls_core::mesh::write_triangle_format;
use nsls_core::newton::{SolveStatus, StepPolicy, Variant};

/// Exit status of a diverged run.
const EXIT_DIVERGED: u8 = 3;
/// Exit status of a run stopped by the iteration cap.
const EXIT_CAP: u8 = 4;

#[derive(Parser)]
#[command(name = "nsls", version, about = "Space-time least-squares damped Newton solver for 2D unsteady Navier-Stokes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML configuration file.
    Run {
        config: PathBuf,
        /// Step-length policy: quartic, cheap or fixed1.
        #[arg(long)]
        policy: Option<StepPolicy>,
        /// Functional: E or Etilde.
        #[arg(long)]
        variant: Option<Variant>,
        /// Decreasing viscosities, e.g. "1/500,1/1000".
        #[arg(long, value_parser = parse_schedule)]
        schedule: Option<Schedule>,
        /// Output directory (overrides output.dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a mesh and write it as Triangle .node/.ele files.
    Mesh {
        /// semidisk or unit_square.
        geometry: Geometry,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone)]
struct Schedule(Vec<f64>);

fn parse_schedule(s: &str) -> Result<Schedule, String> {
    parse_number_list(s).map(Schedule)
}

fn print_report(report: &RunReport) {
    let c = &report.counts;
    println!(
        "mesh: {} triangles, {} vertices, {} velocity dofs, {} time levels",
        c.triangles, c.vertices, c.velocity_dofs, c.time_levels
    );
    for stage in &report.stages {
        println!("nu = {:e}", stage.nu);
        println!("{:>4} {:>14} {:>14} {:>10}", "k", "rel_increment", "sqrt(2E)", "lambda");
        for r in &stage.history {
            let rel = r.rel_increment.map_or(String::new(), |v| format!("{v:.4e}"));
            let lambda = r.lambda.map_or(String::new(), |v| format!("{v:.4}"));
            println!("{:>4} {:>14} {:>14.4e} {:>10}", r.k, rel, r.sqrt2e, lambda);
        }
    }
    if let Some(study) = &report.convergence_study {
        for l in &study.levels {
            println!("h = {:.4e}  dt = {:.4e}  error = {:.4e}", l.h, l.dt, l.error);
        }
        if let Some(rate) = study.fitted_rate {
            println!("fitted rate: {rate:.3}");
        }
    }
    println!("status: {} ({:.1} s)", report.status, report.wall_time);
}

fn run(command: Command) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match command {
        Command::Run {
            config,
            policy,
            variant,
            schedule,
            out,
        } => {
            let text = std::fs::read_to_string(&config).map_err(|e| format!("{}: {e}", config.display()))?;
            let mut cfg = ExperimentConfig::parse(&text)?;
            if let Some(p) = policy {
                cfg.policy = p;
            }
            if let Some(v) = variant {
                cfg.variant = v;
            }
            if let Some(Schedule(s)) = schedule {
                cfg.nu = *s.last().ok_or("empty schedule")?;
                cfg.schedule = Some(s);
            }
            if let Some(o) = out {
                cfg.output = o;
            }
            let report = run_experiment(&cfg)?;
            print_report(&report);
            Ok(match report.status {
                SolveStatus::Converged => ExitCode::SUCCESS,
                SolveStatus::Diverged => ExitCode::from(EXIT_DIVERGED),
                SolveStatus::IterationCap => ExitCode::from(EXIT_CAP),
            })
        }
        Command::Mesh { geometry, h, out } => {
            let mesh = build_mesh(&geometry, h)?;
            std::fs::create_dir_all(&out).map_err(|e| format!("{}: {e}", out.display()))?;
            let name = match &geometry {
                Geometry::External(p) => p.file_name().map_or("mesh".into(), |s| s.to_string_lossy().into_owned()),
                g => g.to_string(),
            };
            let (node, ele) = write_triangle_format(&mesh);
            for (ext, text) in [("node", node), ("ele", ele)] {
                let path = out.join(format!("{name}.{ext}"));
                std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?;
            }
            println!("{}: {} triangles, {} vertices", out.join(&name).display(), mesh.n_triangles(), mesh.n_vertices());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
