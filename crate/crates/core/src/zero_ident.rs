//! Part 1: zero identification from magnitude bits.
//!
//! A coefficient is declared zero when at least `threshold` of the
//! measurements touching it came back small. Cost is linear in the number
//! of nonzeros of the sparse matrix.

use crate::error::{invalid, Result};
use crate::model::IndexSet;
use crate::sensing::{zero_bits, Alphabet, BitMeasurements};

/// Default rule for noisy measurements.
pub const NOISY_THRESHOLD: usize = 3;
/// Default rule when `epsilon = 0` and there is no noise; a zero measurement
/// is then proof that every coefficient it touches is zero.
pub const NOISELESS_THRESHOLD: usize = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Part1Result {
    /// Coefficients identified as zero.
    pub zero_set: IndexSet,
    /// Coefficients left for Part 2.
    pub residual_set: IndexSet,
    /// Small-valued measurement indices.
    pub s_set: IndexSet,
}

/// Indices of measurements whose magnitude bit is 0.
pub fn small_measurement_set(bits: &BitMeasurements) -> Result<IndexSet> {
    if bits.alphabet() != Alphabet::Magnitude {
        return Err(invalid("small-measurement set needs magnitude bits"));
    }
    Ok(zero_bits(bits))
}

/// Splits `0..col_supports.len()` by `|col_supports[i] ∩ s_set| >= threshold`.
///
/// Coefficients that no measurement touches always land in the residual set.
pub fn identify_zeros(
    col_supports: &[Vec<usize>],
    s_set: &IndexSet,
    threshold: usize,
) -> Result<Part1Result> {
    if threshold == 0 {
        return Err(invalid("zero-identification threshold must be >= 1"));
    }
    let m = col_supports
        .iter()
        .filter_map(|c| c.last())
        .max()
        .map_or(0, |&j| j + 1)
        .max(s_set.max().map_or(0, |j| j + 1));
    let mut small = vec![false; m];
    for j in s_set.iter() {
        small[j] = true;
    }

    let mut zero_set = Vec::new();
    let mut residual_set = Vec::new();
    for (i, col) in col_supports.iter().enumerate() {
        let hits = col.iter().filter(|&&j| small[j]).count();
        if hits >= threshold {
            zero_set.push(i);
        } else {
            residual_set.push(i);
        }
    }
    Ok(Part1Result {
        zero_set: IndexSet::from_sorted(zero_set)?,
        residual_set: IndexSet::from_sorted(residual_set)?,
        s_set: s_set.clone(),
    })
}
