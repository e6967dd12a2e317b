//! Solve-and-verify pipeline behind the `solve` and `mesh-info` commands.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{check_name, ProblemConfig, RawConfig};
use super::heatmap::render_heatmap;
use super::table::{sample_fields, write_field_table, SampleGrid};
use crate::domain::{build_perforated_domain, generate_mesh, Mesh, MeshStats, PerforatedDomain};
use crate::equilibrium::{solve_on_mesh, SolvedProblem};
use crate::error::{Error, Result};
use crate::fem::FeSpace;
use crate::verification::{solution_checks, CheckLevel, CheckRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Validation,
    Mesh,
    Solve,
    Sample,
    Verify,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Validation => "validation",
            Stage::Mesh => "mesh",
            Stage::Solve => "solve",
            Stage::Sample => "sample",
            Stage::Verify => "verify",
            Stage::Write => "write",
        };
        f.write_str(s)
    }
}

#[derive(Debug)]
pub struct PipelineError {
    pub stage: Stage,
    pub error: Error,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.stage, self.error)
    }
}

impl std::error::Error for PipelineError {}

impl PipelineError {
    /// 1 for rejected input, 2 for failures after validation.
    pub fn exit_code(&self) -> u8 {
        match self.stage {
            Stage::Validation => 1,
            _ => 2,
        }
    }
}

trait StageExt<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, PipelineError>;
}

impl<T> StageExt<T> for Result<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, PipelineError> {
        self.map_err(|error| PipelineError { stage, error })
    }
}

/// Command-line overrides of the configuration.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub checks: Option<CheckLevel>,
    pub refine: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshSummary {
    pub h: f64,
    pub refine: usize,
    #[serde(flatten)]
    pub stats: MeshStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub defects: usize,
    pub element: String,
    pub dofs: usize,
    pub free_dofs: usize,
    pub cell_problems: usize,
    /// `A`, three per core.
    pub coefficients: Vec<f64>,
    pub min_energy: f64,
    pub influence_matrix: Vec<Vec<f64>>,
    pub forcing: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: Stage,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RawConfig,
    pub mesh: MeshSummary,
    pub solver: SolverSummary,
    pub checks: Vec<CheckRecord>,
    pub all_checks_passed: bool,
    pub artifacts: Vec<String>,
    /// The only part of the report that varies between identical runs.
    pub timings: Vec<StageTiming>,
}

impl RunReport {
    /// 0 when every enabled check passed, 3 otherwise.
    pub fn exit_code(&self) -> u8 {
        if self.all_checks_passed {
            0
        } else {
            3
        }
    }
}

/// Files written so far, removed again if the run fails.
struct Artifacts {
    dir: PathBuf,
    created_dir: bool,
    files: Vec<PathBuf>,
}

impl Artifacts {
    fn open(dir: &Path) -> Result<Self> {
        let created_dir = !dir.exists();
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), created_dir, files: Vec::new() })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        self.files.push(path.clone());
        std::fs::write(&path, bytes)?;
        Ok(())
    }

    fn discard(self) {
        for f in &self.files {
            let _ = std::fs::remove_file(f);
        }
        if self.created_dir {
            let _ = std::fs::remove_dir(&self.dir);
        }
    }
}

/// Domain and mesh of a validated configuration, refined `refine` times.
pub fn build_mesh(cfg: &ProblemConfig, refine: usize) -> Result<(PerforatedDomain, Mesh)> {
    let s = &cfg.setup;
    let dom = build_perforated_domain(s.outer.clone(), &s.defects, s.eps)?;
    let mut mesh = generate_mesh(&dom, &s.mesh)?;
    for _ in 0..refine {
        mesh = mesh.refine_uniform(&dom)?;
    }
    Ok((dom, mesh))
}

pub fn run_pipeline(cfg: &ProblemConfig, opts: &RunOptions) -> std::result::Result<RunReport, PipelineError> {
    let mut config = cfg.resolved.clone();
    let refine = opts.refine.unwrap_or(cfg.refine);
    let checks = opts.checks.unwrap_or(cfg.output.checks);
    config.mesh.refine = Some(refine);
    config.output.checks = Some(check_name(checks).into());
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |stage: Stage, timings: &mut Vec<StageTiming>| {
        timings.push(StageTiming { stage, seconds: clock.elapsed().as_secs_f64() });
        clock = Instant::now();
    };

    let (dom, mesh) = build_mesh(cfg, refine).at(Stage::Mesh)?;
    let mesh_summary = MeshSummary { h: mesh.h, refine, stats: mesh.stats(dom.num_loops()) };
    let mesh = Arc::new(mesh);
    lap(Stage::Mesh, &mut timings);

    let SolvedProblem { system, solution, .. } = solve_on_mesh(dom, mesh.clone(), &cfg.setup).at(Stage::Solve)?;
    let solver = SolverSummary {
        defects: solution.defects.len(),
        element: cfg.setup.element.name().into(),
        dofs: system.space.num_dofs(),
        free_dofs: system.num_free(),
        cell_problems: solution.coeffs.len(),
        coefficients: solution.coeffs.clone(),
        min_energy: solution.min_energy,
        influence_matrix: solution.influence.m.row_iter().map(|r| r.iter().copied().collect()).collect(),
        forcing: solution.forcing.phi.clone(),
    };
    drop(system);
    lap(Stage::Solve, &mut timings);

    let out = &cfg.output;
    let fields = if out.field_table || !out.heatmaps.is_empty() {
        let grid = SampleGrid::over(&solution.domain, out.grid[0], out.grid[1]);
        Some(sample_fields(&solution, grid).at(Stage::Sample)?)
    } else {
        None
    };
    lap(Stage::Sample, &mut timings);

    let records = solution_checks(&solution, checks).at(Stage::Verify)?;
    lap(Stage::Verify, &mut timings);

    let mut art = Artifacts::open(&opts.out_dir).at(Stage::Write)?;
    let written = (|| -> Result<Vec<String>> {
        let mut names = Vec::new();
        if out.mesh_table {
            let mut buf = Vec::new();
            mesh.write_table(&mut buf)?;
            art.write("mesh.txt", &buf)?;
            names.push("mesh.txt".to_string());
        }
        if let Some(fields) = &fields {
            if out.field_table {
                let mut buf = Vec::new();
                write_field_table(fields, &mut buf)?;
                art.write("fields.csv", &buf)?;
                names.push("fields.csv".into());
            }
            for &c in &out.heatmaps {
                let mut buf = Vec::new();
                render_heatmap(fields, c, &solution.domain, &mut buf)?;
                let name = format!("heatmap_{}.svg", c.name());
                art.write(&name, &buf)?;
                names.push(name);
            }
        }
        names.push("report.json".into());
        Ok(names)
    })();
    let artifacts = match written {
        Ok(a) => a,
        Err(error) => {
            art.discard();
            return Err(PipelineError { stage: Stage::Write, error });
        }
    };
    lap(Stage::Write, &mut timings);

    let report = RunReport {
        config,
        mesh: mesh_summary,
        solver,
        all_checks_passed: records.iter().all(|r| r.pass),
        checks: records,
        artifacts,
        timings,
    };
    let json = serde_json::to_vec_pretty(&report).map_err(|e| Error::Config(format!("report encoding: {e}")));
    if let Err(error) = json.and_then(|j| art.write("report.json", &j)) {
        art.discard();
        return Err(PipelineError { stage: Stage::Write, error });
    }
    Ok(report)
}

/// Mesh statistics and dof counts without solving.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshInfo {
    pub mesh: MeshSummary,
    pub element: String,
    pub dofs: usize,
    pub boundary_dofs: usize,
    pub domain_area: f64,
}

pub fn mesh_info(cfg: &ProblemConfig, refine: Option<usize>) -> Result<MeshInfo> {
    let refine = refine.unwrap_or(cfg.refine);
    let (dom, mesh) = build_mesh(cfg, refine)?;
    let summary = MeshSummary { h: mesh.h, refine, stats: mesh.stats(dom.num_loops()) };
    let space = FeSpace::new(Arc::new(mesh), cfg.setup.element)?;
    Ok(MeshInfo {
        mesh: summary,
        element: cfg.setup.element.name().into(),
        dofs: space.num_dofs(),
        boundary_dofs: space.boundary_mask().iter().filter(|&&b| b).count(),
        domain_area: dom.area(),
    })
}

impl fmt::Display for MeshInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.mesh.stats;
        writeln!(f, "h                {}", self.mesh.h)?;
        writeln!(f, "refinements      {}", self.mesh.refine)?;
        writeln!(f, "vertices         {}", s.vertices)?;
        writeln!(f, "triangles        {}", s.triangles)?;
        writeln!(f, "edges            {}", s.edges)?;
        writeln!(f, "min angle (deg)  {:.2}", s.min_angle_deg)?;
        writeln!(f, "edge length      {:.4e} .. {:.4e}", s.min_edge, s.max_edge)?;
        writeln!(f, "mesh area        {:.6} (exact {:.6})", s.area, self.domain_area)?;
        for (i, l) in s.loop_lengths.iter().enumerate() {
            let name = if i == 0 { "outer".to_string() } else { format!("core {}", i - 1) };
            writeln!(f, "loop {name:<11} {l:.6}")?;
        }
        write!(f, "{} dofs          {} ({} on the boundary)", self.element, self.dofs, self.boundary_dofs)
    }
}
