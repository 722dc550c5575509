//! Monte Carlo verification of the expansions.
//!
//! A study draws M seeded samples for each n, solves the MLE, and compares
//! the empirical law of √(nI)θ̂ with the Edgeworth approximations and the
//! stochastic-expansion truncations with √nθ̂.

pub mod config;
pub mod ecdf;
pub mod sampling;
pub mod stats;
pub mod study;

pub use config::{parse_grid, GridSpec, SimulationConfig};
pub use ecdf::{ecdf_distance, Distance, Ecdf};
pub use sampling::{replicate_seed, sample_iid};
pub use study::{
    run_study, run_study_for, run_study_with, ComparisonReport, EcdfTable, ReplicationResult, SampleSizeReport, StudyOutput,
};
