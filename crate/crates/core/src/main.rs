use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use defect_equilibrium::io::{mesh_info, parse_config, run_pipeline, ProblemConfig, RunOptions};
use defect_equilibrium::verification::{AnalyticSuite, CheckLevel};

/// Airy-potential equilibrium of planar bodies with dislocations and disclinations.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a configuration and write the report, tables and heatmaps.
    Solve {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// all, fast or none; overrides the configuration.
        #[arg(long)]
        checks: Option<CheckLevel>,
        /// Uniform mesh refinements; overrides the configuration.
        #[arg(long)]
        refine: Option<usize>,
    },
    /// Run the built-in analytic identity checks; no mesh involved.
    VerifyAnalytic {
        #[arg(long, default_value = "all")]
        suite: AnalyticSuite,
    },
    /// Print mesh statistics and dof counts for a configuration.
    MeshInfo { config: PathBuf },
}

fn load(path: &PathBuf) -> Result<ProblemConfig, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(1)
    })?;
    parse_config(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(1)
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // Bad arguments are rejected input, like an invalid configuration.
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match cli.command {
        Command::Solve { config, out, checks, refine } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            match run_pipeline(&cfg, &RunOptions { out_dir: out.clone(), checks, refine }) {
                Ok(report) => {
                    println!("minimum energy {:e}", report.solver.min_energy);
                    for r in &report.checks {
                        println!("{r}");
                    }
                    println!("wrote {} files to {}", report.artifacts.len(), out.display());
                    ExitCode::from(report.exit_code())
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code())
                }
            }
        }
        Command::VerifyAnalytic { suite } => match suite.run() {
            Ok(records) => {
                for r in &records {
                    println!("{r}");
                }
                let failed = records.iter().filter(|r| !r.pass).count();
                println!("{} checks, {failed} failed", records.len());
                ExitCode::from(if failed == 0 { 0 } else { 3 })
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::MeshInfo { config } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            match mesh_info(&cfg, None) {
                Ok(info) => {
                    println!("{info}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: [mesh] {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
