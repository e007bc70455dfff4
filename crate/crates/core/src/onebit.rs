//! Binary iterative hard thresholding (BIHT) for 1-bit measurements.
//!
//! Each iteration takes a step `a + tau * Phi^T r` and keeps the `k` largest
//! entries. The per-measurement residual `r` is what distinguishes the
//! variants; each lives behind [`BihtUpdate`] and is looked up by name.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::l2_norm;
use crate::sensing::{sign, Alphabet, BitMeasurements, DenseGaussianMatrix, LinearOperator};

/// Keeps the `k` largest-magnitude entries; ties keep the lower index.
pub fn hard_threshold(a: &[f64], k: usize) -> Vec<f64> {
    let mut out = a.to_vec();
    hard_threshold_in_place(&mut out, k);
    out
}

pub(crate) fn hard_threshold_in_place(a: &mut [f64], k: usize) {
    if k >= a.len() {
        return;
    }
    if k == 0 {
        a.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    let mut order: Vec<usize> = (0..a.len()).collect();
    let rank = |&i: &usize, &j: &usize| -> Ordering {
        a[j].abs().total_cmp(&a[i].abs()).then(i.cmp(&j))
    };
    order.select_nth_unstable_by(k - 1, rank);
    for &i in &order[k..] {
        a[i] = 0.0;
    }
}

/// One BIHT variant: how measurement mismatches turn into a step.
pub trait BihtUpdate: Send + Sync {
    fn name(&self) -> &'static str;

    /// Step size used when the config does not give one.
    fn default_step_size(&self, m: usize) -> f64;

    /// Fills `r` so that the next iterate is `H_k(a + tau * Phi^T r)`.
    fn residual(&self, y: &[f64], phi_a: &[f64], r: &mut [f64]);
}

/// One-sided l1 penalty: `r = (y - sign(Phi a)) / 2`.
pub struct OneSidedL1;

impl BihtUpdate for OneSidedL1 {
    fn name(&self) -> &'static str {
        "l1"
    }

    fn default_step_size(&self, _m: usize) -> f64 {
        1.0
    }

    fn residual(&self, y: &[f64], phi_a: &[f64], r: &mut [f64]) {
        for ((r, &y), &v) in r.iter_mut().zip(y).zip(phi_a) {
            *r = 0.5 * (y - sign(v) as f64);
        }
    }
}

/// One-sided l2 penalty: `r = -y * min(y * Phi a, 0)`.
pub struct OneSidedL2;

impl BihtUpdate for OneSidedL2 {
    fn name(&self) -> &'static str {
        "l2"
    }

    fn default_step_size(&self, m: usize) -> f64 {
        1.0 / m.max(1) as f64
    }

    fn residual(&self, y: &[f64], phi_a: &[f64], r: &mut [f64]) {
        for ((r, &y), &v) in r.iter_mut().zip(y).zip(phi_a) {
            *r = -y * (y * v).min(0.0);
        }
    }
}

static UPDATE_RULES: [&dyn BihtUpdate; 2] = [&OneSidedL1, &OneSidedL2];

/// Looks up an update rule by name.
pub fn update_rule(name: &str) -> Option<&'static dyn BihtUpdate> {
    UPDATE_RULES.iter().copied().find(|u| u.name() == name)
}

pub fn update_rule_names() -> impl Iterator<Item = &'static str> {
    UPDATE_RULES.iter().map(|u| u.name())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BihtVariant {
    L1,
    L2,
}

impl BihtVariant {
    pub fn rule(self) -> &'static dyn BihtUpdate {
        let name = match self {
            BihtVariant::L1 => "l1",
            BihtVariant::L2 => "l2",
        };
        update_rule(name).expect("built-in rule is registered")
    }
}

impl fmt::Display for BihtVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.rule().name())
    }
}

impl FromStr for BihtVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(BihtVariant::L1),
            "l2" => Ok(BihtVariant::L2),
            _ => Err(invalid(format!("unknown BIHT variant {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BihtConfig {
    pub k: usize,
    /// `None` uses the variant's default for the problem's row count.
    pub step_size: Option<f64>,
    pub max_iterations: usize,
    pub variant: BihtVariant,
    pub stop_on_consistency: bool,
}

impl BihtConfig {
    /// l1 variant, stop on consistency, at most 100 iterations.
    pub fn noiseless(k: usize) -> Self {
        Self {
            k,
            step_size: None,
            max_iterations: 100,
            variant: BihtVariant::L1,
            stop_on_consistency: true,
        }
    }

    /// l2 variant run for exactly `iterations` iterations.
    pub fn noisy(k: usize, iterations: usize) -> Self {
        Self {
            k,
            step_size: None,
            max_iterations: iterations,
            variant: BihtVariant::L2,
            stop_on_consistency: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(invalid("BIHT sparsity must be >= 1"));
        }
        if self.max_iterations == 0 {
            return Err(invalid("BIHT needs at least one iteration"));
        }
        if let Some(tau) = self.step_size {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(invalid(format!("step size must be positive, got {tau}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SolverTrace {
    pub iterations_run: usize,
    pub consistent: bool,
    /// Sign mismatches against `y` after each iteration.
    pub hamming_errors_per_iteration: Vec<usize>,
}

impl SolverTrace {
    pub fn final_hamming(&self) -> Option<usize> {
        self.hamming_errors_per_iteration.last().copied()
    }
}

fn check_signs(y: &BitMeasurements, m: usize) -> Result<()> {
    if y.alphabet() != Alphabet::Sign {
        return Err(invalid("BIHT needs sign bits"));
    }
    if y.len() != m {
        return Err(invalid(format!("{} bits for a matrix with {m} rows", y.len())));
    }
    Ok(())
}

fn hamming(y: &[i8], phi_a: &[f64]) -> usize {
    y.iter().zip(phi_a).filter(|(&b, &v)| b != sign(v)).count()
}

/// Runs BIHT from `a = 0` and returns the unit-norm estimate.
///
/// The first step from the zero iterate is the matched filter
/// `H_k((tau/2) Phi^T y)` for every variant (the l2 residual vanishes at
/// zero). The output is normalized once at the end; an all-zero iterate is
/// returned unchanged and reported inconsistent.
pub fn biht(
    matrix: &DenseGaussianMatrix,
    y: &BitMeasurements,
    config: &BihtConfig,
) -> Result<(Vec<f64>, SolverTrace)> {
    config.validate()?;
    let (m, n) = (matrix.rows(), matrix.cols());
    check_signs(y, m)?;
    let rule = config.variant.rule();
    let tau = config.step_size.unwrap_or_else(|| rule.default_step_size(m));
    let yf = y.to_f64();

    let mut a = vec![0.0; n];
    let mut phi_a = vec![0.0; m];
    let mut r = vec![0.0; m];
    let mut grad = vec![0.0; n];
    let mut trace = SolverTrace::default();
    let mut at_zero = true;

    for _ in 0..config.max_iterations {
        if at_zero {
            r.iter_mut().zip(&yf).for_each(|(r, &y)| *r = 0.5 * y);
        } else {
            rule.residual(&yf, &phi_a, &mut r);
        }
        matrix.apply_transpose_into(&r, &mut grad);
        a.iter_mut().zip(&grad).for_each(|(a, g)| *a += tau * g);
        hard_threshold_in_place(&mut a, config.k);
        at_zero = a.iter().all(|&v| v == 0.0);
        matrix.apply_into(&a, &mut phi_a);

        let errors = hamming(y.bits(), &phi_a);
        trace.hamming_errors_per_iteration.push(errors);
        trace.iterations_run += 1;
        if config.stop_on_consistency && errors == 0 && !at_zero {
            break;
        }
    }

    let norm = l2_norm(&a);
    if norm > 0.0 {
        a.iter_mut().for_each(|v| *v /= norm);
        // Report the mismatch count of the vector actually returned.
        matrix.apply_into(&a, &mut phi_a);
        let last = trace.hamming_errors_per_iteration.last_mut().expect("ran >= 1 iteration");
        *last = hamming(y.bits(), &phi_a);
        trace.consistent = *last == 0;
    }
    Ok((a, trace))
}

/// Compares `sign(Phi xhat)` with `y`; returns `(consistent, mismatches)`.
pub fn consistency_check(
    matrix: &DenseGaussianMatrix,
    y: &BitMeasurements,
    xhat: &[f64],
) -> Result<(bool, usize)> {
    check_signs(y, matrix.rows())?;
    if xhat.len() != matrix.cols() {
        return Err(invalid(format!(
            "estimate has length {}, matrix has {} columns",
            xhat.len(),
            matrix.cols()
        )));
    }
    let errors = hamming(y.bits(), &matrix.apply(xhat));
    Ok((errors == 0, errors))
}

/// `J(a) = 1/2 * sum_j min(y_j (Phi a)_j, 0)^2`.
pub fn one_sided_l2_objective(matrix: &DenseGaussianMatrix, y: &BitMeasurements, a: &[f64]) -> Result<f64> {
    check_signs(y, matrix.rows())?;
    if a.len() != matrix.cols() {
        return Err(invalid("estimate length does not match matrix"));
    }
    Ok(0.5
        * matrix
            .apply(a)
            .iter()
            .zip(y.bits())
            .map(|(&v, &b)| (b as f64 * v).min(0.0).powi(2))
            .sum::<f64>())
}
