//! Two-part reconstruction for 1-bit compressed sensing.
//!
//! Part 1 measures the signal with a sparse Bernoulli matrix, keeps one bit
//! per measurement (`|y| <= epsilon` or not) and declares a coefficient zero
//! when enough small measurements touch it. Part 2 runs binary iterative
//! hard thresholding (BIHT) on dense Gaussian sign measurements restricted
//! to the coefficients Part 1 could not resolve.
//!
//! The [`bench`] module drives measurement-rate sweeps comparing the
//! two-part scheme against BIHT on the full problem.
//!
//! Indices are 0-based throughout.

pub mod bench;
pub mod error;
pub mod model;
pub mod onebit;
pub mod pipeline;
pub mod registry;
pub mod seed;
pub mod sensing;
pub mod zero_ident;

pub use error::{Error, Result};
pub use model::{generate_signal, snr_db, support_metrics, IndexSet, ReconstructionReport, Snr, SparseSignal};
pub use onebit::{biht, consistency_check, hard_threshold, BihtConfig, BihtVariant, SolverTrace};
pub use pipeline::{embed_solution, reduce_columns, run_direct, run_two_part, DirectConfig, TwoPartConfig};
pub use registry::{Reconstructor, Registry, Trial, TrialSeeds};
pub use sensing::{
    gen_bernoulli_matrix, gen_gaussian_matrix, measure, quantize_magnitude, quantize_sign, BitMeasurements,
    DenseGaussianMatrix, SparseBinaryMatrix,
};
pub use zero_ident::{identify_zeros, small_measurement_set, Part1Result};
