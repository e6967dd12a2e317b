//! Runs the full solve pipeline on a configuration file, as the `solve`
//! command does.
//!
//! ```text
//! cargo run --release --example run_config -- examples/configs/two_defects.toml /tmp/out
//! ```

use defect_equilibrium::io::{parse_config, run_pipeline, RunOptions};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/single_disclination.toml").into());
    let out = args.next().unwrap_or_else(|| std::env::temp_dir().join("run_config").display().to_string());
    let text = std::fs::read_to_string(&path).expect("readable configuration");
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{path}: {e}");
            std::process::exit(1);
        }
    };
    match run_pipeline(&cfg, &RunOptions { out_dir: out.clone().into(), ..Default::default() }) {
        Ok(report) => {
            println!("mesh: {} triangles, h = {}", report.mesh.stats.triangles, report.mesh.h);
            println!("minimum energy {:.6e}", report.solver.min_energy);
            for c in &report.checks {
                println!("{c}");
            }
            for t in &report.timings {
                println!("{:>10} {:7.2}s", t.stage.to_string(), t.seconds);
            }
            println!("artifacts in {out}: {}", report.artifacts.join(", "));
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code().into());
        }
    }
}
