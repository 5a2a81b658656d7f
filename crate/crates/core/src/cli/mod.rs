//! Batch front end: instance files, the end-to-end pipeline, and reports.

pub mod instance;
pub mod pipeline;
pub mod render;

pub use instance::{parse_instance, parse_instance_str, InstanceError, InstanceFile};
pub use pipeline::{
    run_instance, run_pipeline, Format, Mode, Outcome, PipelineError, RunOptions, RunReport,
    RunRequest,
};
pub use render::{emit_report, parse_structured};
