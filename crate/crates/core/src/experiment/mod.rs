//! Config-driven pipeline: potentials → réduite → barrier → simulation → files.

mod config;
mod presets;
mod run;

pub use config::{
    validate_config, Bm2dConfig, Bm2dTarget, DpConfig, ExperimentConfig, GridConfig, MeasureSpec, OneDim, OutputConfig,
    CONFIG_SCHEMA,
};
pub use presets::{list_presets, preset, PresetInfo};
pub use run::{
    build_barrier, run_bm2d, run_experiment, run_one_dim, run_pipeline, stats_json, write_outputs, Bm2dRun, ExitReport,
    OneDimRun, RunOutput, STATS_SCHEMA,
};
