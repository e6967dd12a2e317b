//! Problem configuration: TOML in, validated setup out.
//!
//! ```toml
//! core_radius = 0.2
//!
//! [material]
//! young_modulus = 1.0   # default 1
//! poisson_ratio = 0.3   # default 0.3
//!
//! [domain]
//! kind = "disk"         # or "polygon" with `vertices = [[x, y], ...]`
//! center = [0.0, 0.0]
//! radius = 1.0
//!
//! [[defects]]
//! kind = "disclination"
//! position = [0.0, 0.0]
//! frank = 0.5
//!
//! [[defects]]
//! kind = "dislocation"
//! position = [0.5, 0.0]
//! burgers = [1.0, 0.0]
//!
//! [mesh]
//! h = 0.05              # default core_radius / 4
//! refine = 0            # uniform refinements of the generated mesh
//! element = "argyris"   # or "morley"
//!
//! [output]
//! grid = [200, 200]
//! field_table = true
//! heatmaps = ["v", "sigma11"]
//! mesh_table = true
//! checks = "all"        # "fast" or "none"
//! ```

use serde::{Deserialize, Serialize};

use super::channel::Channel;
use crate::defects::{core_radius_bound, Defect, DefectConfiguration};
use crate::domain::{core_radius_violations, MeshOptions, OuterBoundary};
use crate::elasticity::MaterialParams;
use crate::equilibrium::ProblemSetup;
use crate::error::{Error, Result};
use crate::fem::ElementKind;
use crate::verification::CheckLevel;

pub const DEFAULT_YOUNG_MODULUS: f64 = 1.0;
pub const DEFAULT_POISSON_RATIO: f64 = 0.3;
pub const DEFAULT_GRID: [usize; 2] = [200, 200];
/// Largest grid side accepted; keeps tables and images to a sane size.
pub const MAX_GRID: usize = 4000;

/// The file as written, with every default filled in after resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub core_radius: f64,
    #[serde(default)]
    pub material: RawMaterial,
    pub domain: RawDomain,
    #[serde(default)]
    pub defects: Vec<RawDefect>,
    #[serde(default)]
    pub mesh: RawMesh,
    #[serde(default)]
    pub output: RawOutput,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMaterial {
    pub young_modulus: Option<f64>,
    pub poisson_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDomain {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDefect {
    pub kind: String,
    pub position: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burgers: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frank: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMesh {
    pub h: Option<f64>,
    pub refine: Option<usize>,
    pub element: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    pub grid: Option<[usize; 2]>,
    pub field_table: Option<bool>,
    pub heatmaps: Option<Vec<String>>,
    pub mesh_table: Option<bool>,
    pub checks: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub grid: [usize; 2],
    pub field_table: bool,
    pub heatmaps: Vec<Channel>,
    pub mesh_table: bool,
    pub checks: CheckLevel,
}

/// A configuration that passed every up-front check.
#[derive(Debug, Clone)]
pub struct ProblemConfig {
    pub setup: ProblemSetup,
    pub refine: usize,
    pub output: OutputConfig,
    /// Input with defaults filled, echoed into reports.
    pub resolved: RawConfig,
}

/// Parses and validates. Syntax and type errors carry the line number;
/// semantic problems are all collected into one [`Error::Validation`].
pub fn parse_config(text: &str) -> Result<ProblemConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(syntax_message(text, &e)))?;
    raw.validate()
}

fn syntax_message(text: &str, e: &toml::de::Error) -> String {
    let msg = e.message().trim_end();
    match e.span() {
        Some(span) => {
            let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
            format!("line {line}: {msg}")
        }
        None => msg.to_string(),
    }
}

impl RawConfig {
    pub fn validate(&self) -> Result<ProblemConfig> {
        let mut errs: Vec<String> = Vec::new();
        let eps = self.core_radius;

        let young = self.material.young_modulus.unwrap_or(DEFAULT_YOUNG_MODULUS);
        let poisson = self.material.poisson_ratio.unwrap_or(DEFAULT_POISSON_RATIO);
        let mat = MaterialParams::new(young, poisson).map_err(|e| errs.push(e.to_string())).ok();

        let outer = self.domain.build().map_err(|e| errs.push(e)).ok();

        let mut defects = Vec::with_capacity(self.defects.len());
        for (i, d) in self.defects.iter().enumerate() {
            match d.build(i) {
                Ok(x) => defects.push(x),
                Err(e) => errs.push(e),
            }
        }
        if self.defects.is_empty() {
            errs.push("at least one defect is required; add a [[defects]] entry".into());
        }
        let parsed_all = defects.len() == self.defects.len();
        if parsed_all {
            errs.extend(duplicate_positions(&defects));
        }
        if let Some(outer) = &outer {
            for (i, d) in self.defects.iter().enumerate() {
                let p = d.position;
                if p.iter().all(|c| c.is_finite()) && !outer.contains(&p.into()) {
                    errs.push(format!("defect {i} at ({}, {}) is not strictly inside the domain", p[0], p[1]));
                }
            }
        }
        if !(eps.is_finite() && eps > 0.0) {
            errs.push(format!("core_radius must be positive, got {eps}"));
        }
        let cfg = DefectConfiguration::new(defects).ok();
        if let (Some(outer), Some(cfg)) = (&outer, &cfg) {
            if eps.is_finite() && eps > 0.0 && parsed_all && !cfg.is_empty() {
                if let Ok(bound) = core_radius_bound(cfg, outer) {
                    if eps >= bound {
                        errs.push(format!(
                            "core_radius {eps} must be strictly below eps0 = {bound}, half the smallest defect spacing \
                             or the smallest distance to the outer boundary"
                        ));
                        errs.extend(core_radius_violations(outer, cfg, eps));
                    }
                }
            }
        }

        let h = self.mesh.h.unwrap_or(eps / 4.0);
        if !(h.is_finite() && h > 0.0) {
            errs.push(format!("mesh.h must be positive, got {h}"));
        } else if eps.is_finite() && h >= eps {
            errs.push(format!("mesh.h = {h} must be below core_radius = {eps}"));
        }
        let refine = self.mesh.refine.unwrap_or(0);
        let element = match self.mesh.element.as_deref().unwrap_or("argyris") {
            "argyris" => Some(ElementKind::Argyris),
            "morley" => Some(ElementKind::Morley),
            other => {
                errs.push(format!("mesh.element `{other}` is unknown (expected argyris or morley)"));
                None
            }
        };

        let grid = self.output.grid.unwrap_or(DEFAULT_GRID);
        if grid.iter().any(|&n| !(2..=MAX_GRID).contains(&n)) {
            errs.push(format!("output.grid sides must lie in 2..={MAX_GRID}, got {grid:?}"));
        }
        let mut heatmaps = Vec::new();
        for name in self.output.heatmaps.clone().unwrap_or_else(|| vec!["v".into()]) {
            match name.parse::<Channel>() {
                Ok(c) => heatmaps.push(c),
                Err(e) => errs.push(format!("output.heatmaps: {e}")),
            }
        }
        let checks = self
            .output
            .checks
            .as_deref()
            .unwrap_or("all")
            .parse::<CheckLevel>()
            .map_err(|e| errs.push(format!("output.checks: {e}")))
            .ok();

        if !errs.is_empty() {
            return Err(Error::Validation(errs));
        }
        let (Some(mat), Some(outer), Some(cfg), Some(element), Some(checks)) = (mat, outer, cfg, element, checks) else {
            unreachable!("every missing part records a violation")
        };
        let output = OutputConfig {
            grid,
            field_table: self.output.field_table.unwrap_or(true),
            heatmaps,
            mesh_table: self.output.mesh_table.unwrap_or(true),
            checks,
        };
        let resolved = RawConfig {
            core_radius: eps,
            material: RawMaterial { young_modulus: Some(young), poisson_ratio: Some(poisson) },
            domain: self.domain.clone(),
            defects: self.defects.clone(),
            mesh: RawMesh { h: Some(h), refine: Some(refine), element: Some(element.name().into()) },
            output: RawOutput {
                grid: Some(grid),
                field_table: Some(output.field_table),
                heatmaps: Some(output.heatmaps.iter().map(|c| c.name().to_string()).collect()),
                mesh_table: Some(output.mesh_table),
                checks: Some(check_name(checks).into()),
            },
        };
        let setup = ProblemSetup { outer, defects: cfg, eps, mat, mesh: MeshOptions::new(h), element };
        Ok(ProblemConfig { setup, refine, output, resolved })
    }
}

fn duplicate_positions(defects: &[Defect]) -> Vec<String> {
    let mut out = Vec::new();
    for (i, d) in defects.iter().enumerate() {
        for (j, e) in defects.iter().enumerate().skip(i + 1) {
            if d.position() == e.position() {
                out.push(format!(
                    "defects {i} and {j} share position ({}, {}); defect supports must be disjoint",
                    d.position().x,
                    d.position().y
                ));
            }
        }
    }
    out
}

pub fn check_name(level: CheckLevel) -> &'static str {
    match level {
        CheckLevel::All => "all",
        CheckLevel::Fast => "fast",
        CheckLevel::None => "none",
    }
}

impl RawDomain {
    fn build(&self) -> std::result::Result<OuterBoundary, String> {
        let r = match self.kind.as_str() {
            "disk" => {
                if self.vertices.is_some() {
                    return Err("domain: a disk takes center and radius, not vertices".into());
                }
                let radius = self.radius.ok_or("domain: disk needs a radius")?;
                OuterBoundary::disk(self.center.unwrap_or([0.0, 0.0]), radius)
            }
            "polygon" => {
                if self.center.is_some() || self.radius.is_some() {
                    return Err("domain: a polygon takes vertices, not center or radius".into());
                }
                OuterBoundary::polygon(self.vertices.clone().ok_or("domain: polygon needs vertices")?)
            }
            other => return Err(format!("domain.kind `{other}` is unknown (expected disk or polygon)")),
        };
        r.map_err(|e| format!("domain: {e}"))
    }
}

impl RawDefect {
    fn build(&self, i: usize) -> std::result::Result<Defect, String> {
        let p = self.position;
        if !p.iter().all(|c| c.is_finite()) {
            return Err(format!("defect {i}: position must be finite"));
        }
        match self.kind.as_str() {
            "dislocation" => {
                if self.frank.is_some() {
                    return Err(format!("defect {i}: a dislocation takes `burgers`, not `frank`"));
                }
                let b = self.burgers.ok_or_else(|| format!("defect {i}: dislocation needs `burgers`"))?;
                if !(b.iter().all(|c| c.is_finite()) && (b[0] != 0.0 || b[1] != 0.0)) {
                    return Err(format!("defect {i}: Burgers vector must be finite and nonzero"));
                }
                Ok(Defect::dislocation(p, b))
            }
            "disclination" => {
                if self.burgers.is_some() {
                    return Err(format!("defect {i}: a disclination takes `frank`, not `burgers`"));
                }
                let s = self.frank.ok_or_else(|| format!("defect {i}: disclination needs `frank`"))?;
                if !(s.is_finite() && s != 0.0) {
                    return Err(format!("defect {i}: Frank angle must be finite and nonzero"));
                }
                Ok(Defect::disclination(p, s))
            }
            other => Err(format!("defect {i}: kind `{other}` is unknown (expected dislocation or disclination)")),
        }
    }
}
