//! Two-part reconstruction and the direct-BIHT baseline.
//!
//! Two-part flow: measure with a sparse Bernoulli matrix, quantize
//! magnitudes, identify zeros, then run BIHT on the Gaussian measurements
//! restricted to the surviving columns and embed the result. Only zeros are
//! removed, so the Part 2 measurements are used as acquired.

use std::time::Instant;

use crate::error::{invalid, Error, Result};
use crate::model::{generate_signal, snr_db, support_metrics, IndexSet, ReconstructionReport};
use crate::onebit::{biht, BihtConfig};
use crate::sensing::{
    gen_bernoulli_matrix, measure, quantize_magnitude, quantize_sign, DenseGaussianMatrix, Precision,
};
use crate::zero_ident::{identify_zeros, small_measurement_set, NOISELESS_THRESHOLD, NOISY_THRESHOLD};

/// Columns of `matrix` at `t`, in order.
pub fn reduce_columns(matrix: &DenseGaussianMatrix, t: &IndexSet) -> Result<DenseGaussianMatrix> {
    if t.is_empty() {
        return Err(Error::EmptyResidual);
    }
    if let Some(max) = t.max() {
        if max >= crate::sensing::LinearOperator::cols(matrix) {
            return Err(invalid(format!("column {max} out of range")));
        }
    }
    Ok(matrix.select_columns(t.as_slice()))
}

/// Length-`n` vector with `xhat2` placed at `t` and zeros elsewhere.
pub fn embed_solution(xhat2: &[f64], t: &IndexSet, n: usize) -> Result<Vec<f64>> {
    if xhat2.len() != t.len() {
        return Err(invalid(format!(
            "{} values for {} residual indices",
            xhat2.len(),
            t.len()
        )));
    }
    if t.max().is_some_and(|i| i >= n) {
        return Err(invalid("residual index out of range"));
    }
    let mut x = vec![0.0; n];
    for (i, &v) in t.iter().zip(xhat2) {
        x[i] = v;
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TwoPartSeeds {
    pub signal: u64,
    pub matrix1: u64,
    pub matrix2: u64,
    pub noise1: u64,
    pub noise2: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoPartConfig {
    pub n: usize,
    pub k: usize,
    pub m1: usize,
    pub m2: usize,
    /// Bernoulli parameter of the Part 1 matrix.
    pub p: f64,
    pub epsilon: f64,
    pub zero_threshold: usize,
    pub noise_variance: f64,
    pub biht: BihtConfig,
    pub seeds: TwoPartSeeds,
    pub precision: Precision,
}

impl TwoPartConfig {
    /// Noiseless defaults: `epsilon = 0`, threshold 1, l1 BIHT with
    /// consistency stopping.
    pub fn noiseless(n: usize, k: usize, m1: usize, m2: usize, p: f64, seeds: TwoPartSeeds) -> Self {
        Self {
            n,
            k,
            m1,
            m2,
            p,
            epsilon: 0.0,
            zero_threshold: NOISELESS_THRESHOLD,
            noise_variance: 0.0,
            biht: BihtConfig::noiseless(k),
            seeds,
            precision: Precision::F64,
        }
    }

    /// Noisy defaults: `epsilon` = one noise standard deviation, threshold 3,
    /// l2 BIHT for a fixed number of iterations.
    #[allow(clippy::too_many_arguments)]
    pub fn noisy(
        n: usize,
        k: usize,
        m1: usize,
        m2: usize,
        p: f64,
        noise_variance: f64,
        iterations: usize,
        seeds: TwoPartSeeds,
    ) -> Self {
        Self {
            n,
            k,
            m1,
            m2,
            p,
            epsilon: noise_variance.sqrt(),
            zero_threshold: NOISY_THRESHOLD,
            noise_variance,
            biht: BihtConfig::noisy(k, iterations),
            seeds,
            precision: Precision::F64,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.noise_variance == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > self.n {
            return Err(invalid(format!("need 1 <= k <= n, got k={}, n={}", self.k, self.n)));
        }
        if self.m2 == 0 {
            return Err(invalid("Part 2 needs at least one measurement"));
        }
        if !(self.epsilon >= 0.0) {
            return Err(invalid("epsilon must be >= 0"));
        }
        if !(self.noise_variance >= 0.0) {
            return Err(invalid("noise variance must be >= 0"));
        }
        if self.epsilon == 0.0 && !self.is_noiseless() {
            return Err(invalid("epsilon = 0 is only meaningful without noise"));
        }
        self.biht.validate()
    }
}

/// Runs two-part reconstruction. `runtime_seconds` covers zero
/// identification, column reduction, the BIHT solve and embedding.
pub fn run_two_part(config: &TwoPartConfig) -> Result<(Vec<f64>, ReconstructionReport)> {
    config.validate()?;
    let n = config.n;
    let x = generate_signal(n, config.k, config.seeds.signal)?;

    // Acquisition.
    let phi1 = gen_bernoulli_matrix(config.m1, n, config.p, config.seeds.matrix1)?;
    let y1 = measure(&phi1, x.values(), config.noise_variance, config.seeds.noise1)?;
    let bits1 = quantize_magnitude(&y1, config.epsilon)?;
    let phi2 =
        DenseGaussianMatrix::generate_with_precision(config.m2, n, config.seeds.matrix2, config.precision)?;
    let y2 = quantize_sign(&measure(&phi2, x.values(), config.noise_variance, config.seeds.noise2)?);

    // Reconstruction.
    let start = Instant::now();
    let s_set = small_measurement_set(&bits1)?;
    let part1 = identify_zeros(phi1.col_supports(), &s_set, config.zero_threshold)?;
    let t = &part1.residual_set;
    let (xhat, iterations_used, consistent) = if t.is_empty() {
        (vec![0.0; n], 0, false)
    } else {
        let reduced = reduce_columns(&phi2, t)?;
        let cfg = BihtConfig {
            k: config.biht.k.min(t.len()),
            ..config.biht
        };
        let (xhat2, trace) = biht(&reduced, &y2, &cfg)?;
        (embed_solution(&xhat2, t, n)?, trace.iterations_run, trace.consistent)
    };
    let runtime_seconds = start.elapsed().as_secs_f64();

    let (zero_identified, false_zeros) = support_metrics(&x, &part1.zero_set)?;
    let report = ReconstructionReport {
        snr: snr_db(x.values(), &xhat)?,
        runtime_seconds,
        part1_zero_identified: zero_identified,
        part1_false_zeros: false_zeros,
        residual_problem_size: t.len(),
        iterations_used,
        consistent,
        empty_residual: t.is_empty(),
    };
    Ok((xhat, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DirectSeeds {
    pub signal: u64,
    pub matrix: u64,
    pub noise: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectConfig {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub noise_variance: f64,
    pub biht: BihtConfig,
    pub seeds: DirectSeeds,
    pub precision: Precision,
}

/// BIHT on an `m x n` Gaussian matrix with no Part 1. `runtime_seconds`
/// covers the solve only.
pub fn run_direct(config: &DirectConfig) -> Result<(Vec<f64>, ReconstructionReport)> {
    if config.m == 0 {
        return Err(invalid("direct BIHT needs at least one measurement"));
    }
    config.biht.validate()?;
    let x = generate_signal(config.n, config.k, config.seeds.signal)?;
    let phi = DenseGaussianMatrix::generate_with_precision(config.m, config.n, config.seeds.matrix, config.precision)?;
    let y = quantize_sign(&measure(&phi, x.values(), config.noise_variance, config.seeds.noise)?);

    let start = Instant::now();
    let (xhat, trace) = biht(&phi, &y, &config.biht)?;
    let runtime_seconds = start.elapsed().as_secs_f64();

    let report = ReconstructionReport {
        snr: snr_db(x.values(), &xhat)?,
        runtime_seconds,
        part1_zero_identified: 0,
        part1_false_zeros: 0,
        residual_problem_size: config.n,
        iterations_used: trace.iterations_run,
        consistent: trace.consistent,
        empty_residual: false,
    };
    Ok((xhat, report))
}
