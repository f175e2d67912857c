//! Experiment driver for the STAR-RIS beamforming controllers: configuration,
//! seeded training runs, scheme and surface-mode comparisons, metrics files
//! and plots.

pub mod compare;
pub mod complexity;
pub mod config;
pub mod error;
pub mod output;
pub mod train;

pub use compare::{compare_algorithms, compare_ris_modes, run_many, thread_cap, Comparison, ComparisonRow};
pub use complexity::{report_complexity, ComplexityReport, SchemeComplexity};
pub use config::{load_config, save_config, ExperimentConfig};
pub use error::{Error, Result};
pub use output::{emit_outputs, render_svg, Summary};
pub use train::{run_training, run_training_with, RunRecord};
