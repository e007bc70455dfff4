//! Signals, index sets and reconstruction-quality metrics.

use std::fmt;

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::seed;

/// A strictly increasing list of 0-based indices (measurement or coefficient).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    /// Builds a set from arbitrary indices, sorting and removing duplicates.
    pub fn from_unsorted(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self(indices)
    }

    /// Wraps an already strictly increasing list.
    pub fn from_sorted(indices: Vec<usize>) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("index set must be strictly increasing"));
        }
        Ok(Self(indices))
    }

    /// `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl<'a> IntoIterator for &'a IndexSet {
    type Item = &'a usize;
    type IntoIter = std::slice::Iter<'a, usize>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Exactly `k`-sparse signal with unit Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    values: Vec<f64>,
    k: usize,
}

impl SparseSignal {
    /// Draws `k` support positions uniformly without replacement (partial
    /// Fisher-Yates), then `k` i.i.d. standard-normal amplitudes from the same
    /// stream, then rescales to unit norm.
    pub fn generate(n: usize, k: usize, seed: u64) -> Result<Self> {
        if k == 0 || k > n {
            return Err(invalid(format!("need 1 <= k <= n, got k={k}, n={n}")));
        }
        let mut rng = seed::rng(seed);
        let mut positions: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = rng.random_range(i..n);
            positions.swap(i, j);
        }
        let mut values = vec![0.0; n];
        for &pos in &positions[..k] {
            let mut amp: f64 = rng.sample(StandardNormal);
            // A draw of exactly 0.0 would break the k-nonzero invariant.
            while amp == 0.0 {
                amp = rng.sample(StandardNormal);
            }
            values[pos] = amp;
        }
        let norm = l2_norm(&values);
        values.iter_mut().for_each(|v| *v /= norm);
        Ok(Self { values, k })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support(&self) -> IndexSet {
        IndexSet(
            self.values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, _)| i)
                .collect(),
        )
    }
}

/// Generates a unit-norm `k`-sparse Gaussian signal of length `n`.
pub fn generate_signal(n: usize, k: usize, seed: u64) -> Result<SparseSignal> {
    SparseSignal::generate(n, k, seed)
}

/// Reconstruction SNR in decibels. `Exact` is the zero-error case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Snr {
    Db(f64),
    Exact,
}

impl Snr {
    pub fn finite(self) -> Option<f64> {
        match self {
            Snr::Db(v) => Some(v),
            Snr::Exact => None,
        }
    }

    /// Maps exact recovery to `+inf`.
    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Snr::Exact)
    }
}

impl fmt::Display for Snr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Snr::Db(v) => write!(f, "{v}"),
            Snr::Exact => f.write_str("inf"),
        }
    }
}

/// `10 log10(|x|^2 / |x - xhat|^2)`.
pub fn snr_db(x: &[f64], xhat: &[f64]) -> Result<Snr> {
    if x.len() != xhat.len() {
        return Err(invalid(format!(
            "length mismatch: x has {}, xhat has {}",
            x.len(),
            xhat.len()
        )));
    }
    let signal: f64 = x.iter().map(|v| v * v).sum();
    if signal == 0.0 {
        return Err(invalid("x is all zero"));
    }
    let error: f64 = x.iter().zip(xhat).map(|(a, b)| (a - b) * (a - b)).sum();
    if error == 0.0 {
        return Ok(Snr::Exact);
    }
    Ok(Snr::Db(10.0 * (signal / error).log10()))
}

/// Returns `(|zero_set|, number of zero_set entries where x is nonzero)`.
pub fn support_metrics(x: &SparseSignal, zero_set: &IndexSet) -> Result<(usize, usize)> {
    if let Some(max) = zero_set.max() {
        if max >= x.n() {
            return Err(invalid(format!("index {max} out of range for n={}", x.n())));
        }
    }
    let false_zeros = zero_set.iter().filter(|&i| x.values[i] != 0.0).count();
    Ok((zero_set.len(), false_zeros))
}

pub(crate) fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Outcome of one reconstruction run.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionReport {
    pub snr: Snr,
    pub runtime_seconds: f64,
    pub part1_zero_identified: usize,
    pub part1_false_zeros: usize,
    /// `|T|`, the number of coefficients handed to the solver.
    pub residual_problem_size: usize,
    pub iterations_used: usize,
    pub consistent: bool,
    /// Set when Part 1 left nothing to solve and the output is all zero.
    pub empty_residual: bool,
}

impl ReconstructionReport {
    /// Fraction of the true zeros that Part 1 identified.
    pub fn zero_fraction(&self, n: usize, k: usize) -> f64 {
        let zeros = n - k;
        if zeros == 0 {
            return 1.0;
        }
        (self.part1_zero_identified - self.part1_false_zeros) as f64 / zeros as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn paper_profile_signal() {
        let x = generate_signal(10_000, 50, 7).unwrap();
        assert_eq!(x.support().len(), 50);
        assert_relative_eq!(l2_norm(x.values()), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_coefficient_is_plus_or_minus_one() {
        for seed in 0..20 {
            let x = generate_signal(1, 1, seed).unwrap();
            assert!(x.values()[0] == 1.0 || x.values()[0] == -1.0);
        }
    }

    #[test]
    fn rejects_bad_sparsity() {
        assert!(generate_signal(10, 0, 1).is_err());
        assert!(generate_signal(10, 11, 1).is_err());
    }

    #[test]
    fn support_positions_are_uniform() {
        // Each of 100 positions is hit Binomial(10000, 5/100) times.
        let (n, k, trials) = (100usize, 5usize, 10_000u64);
        let mut hist = vec![0u32; n];
        for seed in 0..trials {
            for i in generate_signal(n, k, seed).unwrap().support().iter() {
                hist[i] += 1;
            }
        }
        let p = k as f64 / n as f64;
        let mean = trials as f64 * p;
        let sd = (trials as f64 * p * (1.0 - p)).sqrt();
        for (i, &h) in hist.iter().enumerate() {
            assert!(
                (h as f64 - mean).abs() <= 3.0 * sd + 1.0,
                "position {i}: {h} vs {mean}"
            );
        }
        let chi2: f64 = hist.iter().map(|&h| (h as f64 - mean).powi(2) / mean).sum();
        // 99 degrees of freedom; 99.9th percentile is about 148.
        assert!(chi2 < 148.0, "chi2 = {chi2}");
    }

    #[test]
    fn snr_examples() {
        assert_eq!(snr_db(&[0.6, 0.8], &[0.6, 0.8]).unwrap(), Snr::Exact);
        assert_eq!(snr_db(&[0.6, 0.8], &[0.0, 0.0]).unwrap(), Snr::Db(0.0));
        let v = snr_db(&[1.0, 0.0], &[0.9, 0.0]).unwrap().finite().unwrap();
        assert_relative_eq!(v, 20.0, epsilon = 1e-9);
        assert_eq!(Snr::Exact.to_string(), "inf");
    }

    #[test]
    fn snr_errors() {
        assert!(snr_db(&[1.0], &[1.0, 2.0]).is_err());
        assert!(snr_db(&[0.0, 0.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn support_metric_examples() {
        let x = SparseSignal {
            values: vec![0.0, 3.0, 0.0],
            k: 1,
        };
        let z = |v: Vec<usize>| IndexSet::from_sorted(v).unwrap();
        assert_eq!(support_metrics(&x, &z(vec![0, 2])).unwrap(), (2, 0));
        assert_eq!(support_metrics(&x, &z(vec![1])).unwrap(), (1, 1));
        assert_eq!(support_metrics(&x, &IndexSet::new()).unwrap(), (0, 0));
        assert!(support_metrics(&x, &z(vec![3])).is_err());
    }

    proptest! {
        #[test]
        fn generation_is_deterministic(n in 1usize..300, kf in 0.0f64..1.0, seed in any::<u64>()) {
            let k = 1 + ((n - 1) as f64 * kf) as usize;
            let a = generate_signal(n, k, seed).unwrap();
            let b = generate_signal(n, k, seed).unwrap();
            let bits = |s: &SparseSignal| s.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&a), bits(&b));
            prop_assert_eq!(a.support().len(), k);
            prop_assert!((l2_norm(a.values()) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn snr_of_shrinkage(seed in any::<u64>(), delta in 0.01f64..0.99) {
            let x = generate_signal(64, 6, seed).unwrap();
            let xhat: Vec<f64> = x.values().iter().map(|v| v * (1.0 - delta)).collect();
            let snr = snr_db(x.values(), &xhat).unwrap().finite().unwrap();
            prop_assert!((snr + 20.0 * delta.log10()).abs() < 1e-9);
        }

        #[test]
        fn support_metrics_match_scan(seed in any::<u64>(), picks in proptest::collection::vec(0usize..40, 0..40)) {
            let x = generate_signal(40, 8, seed).unwrap();
            let zs = IndexSet::from_unsorted(picks);
            let mut false_zeros = 0;
            for i in 0..40 {
                let mut in_set = false;
                for &z in zs.as_slice() {
                    if z == i { in_set = true; }
                }
                if in_set && x.values()[i] != 0.0 { false_zeros += 1; }
            }
            prop_assert_eq!(support_metrics(&x, &zs).unwrap(), (zs.len(), false_zeros));
        }
    }
}
