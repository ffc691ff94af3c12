//! Configuration, orchestration, seeding and metrics for simulation runs.

pub mod config;
pub mod metrics;
pub mod run;
pub mod seeding;
pub mod sweep;

pub use config::{DataKind, PartitionKind, RunConfig};
pub use metrics::{write_metrics_csv, write_windows_csv, EventKind, MetricsRow};
pub use run::{run_simulation, run_with_schedule, RunOutput, Schedule, Workload};
pub use sweep::{compare_sweep, write_cells_csv, write_summary_csv, Stat, SweepArm, SweepReport};
