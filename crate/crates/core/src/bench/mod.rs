//! Experiment harness: configuration, calibration, sweeps and plot data.

pub mod calibrate;
pub mod config;
pub mod plot;
pub mod sweep;

pub use calibrate::{calibrate_c1, calibrate_c2, m1_for, Calibration, Part1Problem};
pub use config::{Constant, EpsilonRule, Mode, SweepConfig};
pub use plot::{emit_plot_data, summarize, Metric, PointSummary};
pub use sweep::{read_records, run_sweep, Status, SweepOutcome, TrialRecord, CSV_HEADER};
