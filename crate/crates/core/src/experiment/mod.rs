//! Configuration-driven experiment harness and figure-data emitters.
//!
//! Everything here is deterministic given a seed: repetitions run in
//! parallel on independent substreams and are assembled in index order, and
//! CSV output uses a fixed float format, so reruns produce identical bytes.

mod config;
mod dataset;
mod figures;
mod runner;

pub use config::{default_squeezing, ExperimentConfig, LONG_MODE_PATTERNS};
pub use dataset::{format_value, FigureDataset};
pub use figures::{emit_figure1, emit_figure2, emit_figure3, emit_figure4, Figure4Output};
pub use runner::{
    prepare_instance, run_experiment, run_repetitions, summarize_runs, ExperimentOutput, Instance,
};
