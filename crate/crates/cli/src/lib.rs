//! Batch experiments over the `sdelab` schemes, written as CSV.
//!
//! ```
//! use sdelab_cli::{load, run_experiment, ExperimentKind, Overrides};
//!
//! let plan = load(ExperimentKind::Validate, Some("seed = 1\n"), &Overrides::default()).unwrap();
//! let csv = run_experiment(&plan).unwrap();
//! assert!(csv.rows().any(|r| r == "feller_ratio,2.011276"));
//! ```

pub mod config;
pub mod resolve;
pub mod run;

pub use config::{default_config_text, parse_config, ConfigError, ExperimentConfig, ExperimentKind, Problem};
pub use resolve::{load, resolve, Grid, Overrides, Plan};
pub use run::{run_experiment, write_artifact, Artifact, CliError};
