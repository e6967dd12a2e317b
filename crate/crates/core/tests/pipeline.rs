use std::collections::HashMap;
use std::path::{Path, PathBuf};

use defect_equilibrium::io::{
    cell_pixels, hex, palette, parse_config, read_field_table, run_pipeline, PipelineError, RunOptions, RunReport, Stage,
};
use defect_equilibrium::verification::CheckLevel;
use defect_equilibrium::Error;

const CENTERED: &str = r#"
core_radius = 0.2

[domain]
kind = "disk"
radius = 1.0

[[defects]]
kind = "disclination"
position = [0.0, 0.0]
frank = 0.5

[mesh]
h = 0.1

[output]
grid = [60, 60]
heatmaps = ["v"]
checks = "fast"
"#;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("defect-equilibrium-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn run(text: &str, dir: &Path) -> Result<RunReport, PipelineError> {
    let cfg = parse_config(text).unwrap();
    run_pipeline(&cfg, &RunOptions { out_dir: dir.to_path_buf(), ..Default::default() })
}

#[test]
fn centered_disclination_has_negative_energy_and_passing_checks() {
    let dir = scratch("energy");
    let r = run(CENTERED, &dir).unwrap();
    assert!(r.solver.min_energy < 0.0);
    assert_eq!(r.solver.cell_problems, 3);
    assert!(r.all_checks_passed, "{:#?}", r.checks);
    assert_eq!(r.exit_code(), 0);
    for a in &r.artifacts {
        assert!(dir.join(a).is_file(), "{a}");
    }
    let names: Vec<&str> = r.checks.iter().map(|c| c.name.as_str()).collect();
    let mut uniq = names.clone();
    uniq.sort();
    uniq.dedup();
    assert_eq!(uniq.len(), names.len(), "every check appears once");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn reruns_are_identical_except_for_timings() {
    let (d1, d2) = (scratch("rerun-a"), scratch("rerun-b"));
    let mut a = run(CENTERED, &d1).unwrap();
    let mut b = run(CENTERED, &d2).unwrap();
    a.timings.clear();
    b.timings.clear();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    for f in ["fields.csv", "mesh.txt", "heatmap_v.svg"] {
        assert_eq!(std::fs::read(d1.join(f)).unwrap(), std::fs::read(d2.join(f)).unwrap(), "{f}");
    }
    let on_disk: RunReport = serde_json::from_slice(&std::fs::read(d1.join("report.json")).unwrap()).unwrap();
    assert_eq!(on_disk.solver, a.solver);
    std::fs::remove_dir_all(d1).unwrap();
    std::fs::remove_dir_all(d2).unwrap();
}

#[test]
fn field_table_marks_core_points_absent() {
    let dir = scratch("table");
    run(CENTERED, &dir).unwrap();
    let t = read_field_table(std::io::BufReader::new(std::fs::File::open(dir.join("fields.csv")).unwrap())).unwrap();
    assert_eq!(t.rows.len(), 60 * 60);
    let (x1, x2, v) = (t.column("x1").unwrap(), t.column("x2").unwrap(), t.column("v").unwrap());
    let mut inside_core = 0;
    for row in &t.rows {
        let r = row[x1].unwrap().hypot(row[x2].unwrap());
        if r < 0.2 || r > 1.0 {
            assert!(row[v].is_none());
            assert!(row[2..].iter().all(Option::is_none));
            inside_core += usize::from(r < 0.2);
        } else if (0.25..0.95).contains(&r) {
            assert!(row[2..].iter().all(Option::is_some));
        }
    }
    assert!(inside_core > 0);
    std::fs::remove_dir_all(dir).unwrap();
}

/// Grid levels recovered from the rendered cell rectangles.
fn rendered_levels(svg: &str, nx: usize, ny: usize) -> Vec<Option<usize>> {
    let inverse: HashMap<String, usize> = palette().iter().enumerate().rev().map(|(k, c)| (hex(*c), k)).collect();
    let cells = &svg[svg.find(r#"<g id="cells""#).unwrap()..];
    let cells = &cells[..cells.find("</g>").unwrap()];
    let attr = |l: &str, k: &str| -> String {
        let a = &l[l.find(&format!(" {k}=\"")).unwrap() + k.len() + 3..];
        a[..a.find('"').unwrap()].to_string()
    };
    let cell = cell_pixels(nx, ny);
    // The plot area starts below the title, inside the margin.
    let (left, top) = (20.0, 48.0);
    let mut out = vec![None; nx * ny];
    for l in cells.lines().filter(|l| l.starts_with("<rect")) {
        let n = |k| attr(l, k).parse::<f64>().unwrap();
        let level = inverse[&attr(l, "fill")];
        let row = ny - 1 - ((n("y") - top) / cell).round() as usize;
        let first = ((n("x") - left) / cell).round() as usize;
        for i in first..first + (n("width") / cell).round() as usize {
            out[row * nx + i] = Some(level);
        }
    }
    out
}

#[test]
fn heatmap_of_centered_disclination_is_radially_symmetric() {
    let dir = scratch("radial");
    let text = CENTERED.replace("grid = [60, 60]", "grid = [100, 100]");
    run(&text, &dir).unwrap();
    let svg = std::fs::read_to_string(dir.join("heatmap_v.svg")).unwrap();
    let (n, cell) = (100usize, 2.0 / 100.0);
    let levels = rendered_levels(&svg, n, n);
    // Rings one cell wide; the spread of the color level around each ring
    // measures angular variation.
    let mut rings: Vec<Vec<f64>> = vec![Vec::new(); 80];
    for j in 0..n {
        for i in 0..n {
            if let Some(l) = levels[j * n + i] {
                let (x, y) = (-1.0 + (i as f64 + 0.5) * cell, -1.0 + (j as f64 + 0.5) * cell);
                rings[(x.hypot(y) / cell) as usize].push(l as f64 / 255.0);
            }
        }
    }
    let mut worst = 0.0f64;
    for ring in rings.iter().filter(|r| r.len() >= 8) {
        let mean = ring.iter().sum::<f64>() / ring.len() as f64;
        let var = ring.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / ring.len() as f64;
        worst = worst.max(var.sqrt());
    }
    assert!(worst < 0.02, "angular spread {worst} of the color range");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn zero_defects_fail_validation() {
    let text = "core_radius = 0.2\n[domain]\nkind = \"disk\"\nradius = 1.0\n";
    match parse_config(text) {
        Err(Error::Validation(v)) => assert!(v.iter().any(|m| m.contains("at least one defect"))),
        other => panic!("{other:?}"),
    }
}

#[test]
fn failed_write_removes_partial_artifacts() {
    let dir = scratch("partial");
    // A directory in the way of the field table makes the write stage fail
    // after the mesh table is already on disk.
    std::fs::create_dir_all(dir.join("fields.csv")).unwrap();
    let err = run(CENTERED, &dir).unwrap_err();
    assert_eq!(err.stage, Stage::Write);
    assert_eq!(err.exit_code(), 2);
    assert!(!dir.join("mesh.txt").exists());
    assert!(!dir.join("report.json").exists());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn overrides_reach_the_report() {
    let dir = scratch("override");
    let cfg = parse_config(CENTERED).unwrap();
    let opts = RunOptions { out_dir: dir.clone(), checks: Some(CheckLevel::None), refine: Some(0) };
    let r = run_pipeline(&cfg, &opts).unwrap();
    assert!(r.checks.is_empty());
    assert_eq!(r.config.output.checks.as_deref(), Some("none"));
    std::fs::remove_dir_all(dir).unwrap();
}
