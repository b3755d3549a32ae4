//! Configuration, serialization and the experiment drivers behind the CLI.

pub mod check;
pub mod config;
pub mod hypertop;
pub mod json;
pub mod pauli;
pub mod simulate;

pub use check::{run_check, CheckItem, CheckReport, SUITES};
pub use config::{Experiment, ExperimentConfig, FlowMethod};
pub use json::{PolynomialSpec, StateSpec};
pub use pauli::{parse_pauli, PauliString};
pub use simulate::{run_simulate, simulate, trajectory_csv};
