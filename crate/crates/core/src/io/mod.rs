//! Batch front end: configuration files, the solve pipeline, field tables
//! and heatmaps.

mod channel;
mod config;
mod heatmap;
mod pipeline;
mod table;

pub use channel::{Channel, Part};
pub use config::{
    parse_config, OutputConfig, ProblemConfig, RawConfig, RawDefect, RawDomain, RawMaterial, RawMesh, RawOutput,
    DEFAULT_GRID, DEFAULT_POISSON_RATIO, DEFAULT_YOUNG_MODULUS,
};
pub use heatmap::{cell_pixels, color_range, emit_heatmap, hex, level, palette, render_heatmap, BACKGROUND, LEVELS};
pub use pipeline::{
    build_mesh, mesh_info, run_pipeline, MeshInfo, MeshSummary, PipelineError, RunOptions, RunReport, SolverSummary, Stage,
    StageTiming,
};
pub use table::{read_field_table, sample_fields, write_field_table, FieldGrid, FieldTable, SampleGrid, ABSENT};
