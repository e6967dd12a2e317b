use std::path::PathBuf;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_defect-equilibrium");

const COARSE: &str = r#"
core_radius = 0.2

[domain]
kind = "polygon"
vertices = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]

[[defects]]
kind = "dislocation"
position = [0.0, 0.0]
burgers = [1.0, 0.0]

[mesh]
h = 0.15

[output]
grid = [20, 20]
"#;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("defect-equilibrium-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn solve_writes_report_and_exits_zero() {
    let dir = scratch("solve");
    let cfg = dir.join("coarse.toml");
    std::fs::write(&cfg, COARSE).unwrap();
    let out = dir.join("out");
    let o = run(&["solve", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--checks", "fast"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["report.json", "fields.csv", "heatmap_v.svg"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn invalid_configurations_exit_one() {
    let dir = scratch("invalid");
    let empty = dir.join("empty.toml");
    std::fs::write(&empty, "core_radius = 0.2\n[domain]\nkind = \"disk\"\nradius = 1.0\n").unwrap();
    let o = run(&["solve", empty.to_str().unwrap(), "--out", dir.join("out").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("at least one defect"), "{}", stderr(&o));
    assert!(!dir.join("out").exists());

    let broken = dir.join("broken.toml");
    std::fs::write(&broken, "core_radius = 0.2\n[domain\n").unwrap();
    let o = run(&["mesh-info", broken.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    assert_eq!(code(&run(&["solve", dir.join("missing.toml").to_str().unwrap()])), 1);
    assert_eq!(code(&run(&["verify-analytic", "--suite", "torus"])), 1);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn unwritable_output_exits_two() {
    let dir = scratch("unwritable");
    let cfg = dir.join("coarse.toml");
    std::fs::write(&cfg, COARSE).unwrap();
    let blocker = dir.join("file");
    std::fs::write(&blocker, "").unwrap();
    let o = run(&["solve", cfg.to_str().unwrap(), "--out", blocker.to_str().unwrap(), "--checks", "none"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("[write]"), "{}", stderr(&o));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn mesh_info_prints_statistics() {
    let dir = scratch("info");
    let cfg = dir.join("coarse.toml");
    std::fs::write(&cfg, COARSE).unwrap();
    let o = run(&["mesh-info", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    for key in ["triangles", "min angle", "loop core 0", "argyris dofs"] {
        assert!(text.contains(key), "{key} missing from\n{text}");
    }
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn analytic_annulus_suite_passes() {
    let o = run(&["verify-analytic", "--suite", "annulus"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains(", 0 failed"));
}
