//! Measurement operators, noisy linear measurement and the two 1-bit
//! quantizers.

use rand::Rng as _;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::IndexSet;
use crate::seed;

/// A linear map `R^cols -> R^rows`.
pub trait LinearOperator {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// Writes `Phi x` into `out`. Lengths are checked by the caller.
    fn apply_into(&self, x: &[f64], out: &mut [f64]);

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows()];
        self.apply_into(x, &mut out);
        out
    }
}

/// i.i.d. Bernoulli(p) matrix whose nonzero entries all equal `1/sqrt(p)`.
///
/// Stored twice: as row supports (for measuring) and column supports (for
/// Part 1's per-coefficient lookups).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseBinaryMatrix {
    n: usize,
    row_supports: Vec<Vec<usize>>,
    col_supports: Vec<Vec<usize>>,
    scale: f64,
}

impl SparseBinaryMatrix {
    /// Entries are drawn row-major, so for a fixed seed a matrix with more
    /// rows extends one with fewer.
    pub fn generate(m1: usize, n: usize, p: f64, seed: u64) -> Result<Self> {
        let mut rows = BernoulliRows::new(n, p, seed)?;
        let row_supports: Vec<Vec<usize>> = (0..m1).map(|_| rows.next_row()).collect();
        let col_supports = transpose_supports(&row_supports, n);
        Ok(Self {
            n,
            row_supports,
            col_supports,
            scale: 1.0 / p.sqrt(),
        })
    }

    /// Builds a matrix from explicit row supports.
    pub fn from_row_supports(row_supports: Vec<Vec<usize>>, n: usize, scale: f64) -> Result<Self> {
        for row in &row_supports {
            if row.windows(2).any(|w| w[0] >= w[1]) || row.last().is_some_and(|&i| i >= n) {
                return Err(invalid("row support must be strictly increasing and in range"));
            }
        }
        if !(scale > 0.0) {
            return Err(invalid("scale must be positive"));
        }
        let col_supports = transpose_supports(&row_supports, n);
        Ok(Self {
            n,
            row_supports,
            col_supports,
            scale,
        })
    }

    pub fn row_supports(&self) -> &[Vec<usize>] {
        &self.row_supports
    }

    pub fn col_supports(&self) -> &[Vec<usize>] {
        &self.col_supports
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn nnz(&self) -> usize {
        self.row_supports.iter().map(Vec::len).sum()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows() * self.n];
        for (j, row) in self.row_supports.iter().enumerate() {
            for &i in row {
                out[j * self.n + i] = self.scale;
            }
        }
        out
    }
}

/// Row-by-row generator behind [`SparseBinaryMatrix::generate`]. The first
/// `m` rows it yields are exactly the rows of the `m`-row matrix built from
/// the same seed.
pub struct BernoulliRows {
    n: usize,
    p: f64,
    rng: seed::Rng,
}

impl BernoulliRows {
    pub fn new(n: usize, p: f64, seed: u64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(invalid(format!("Bernoulli parameter must lie in (0, 1], got {p}")));
        }
        Ok(Self {
            n,
            p,
            rng: seed::rng(seed),
        })
    }

    /// Value of every nonzero entry.
    pub fn scale(&self) -> f64 {
        1.0 / self.p.sqrt()
    }

    pub fn next_row(&mut self) -> Vec<usize> {
        if self.p == 1.0 {
            return (0..self.n).collect();
        }
        let (p, rng) = (self.p, &mut self.rng);
        (0..self.n).filter(|_| rng.random::<f64>() < p).collect()
    }
}

/// Additive N(0, variance) noise in measurement order, matching [`measure`].
pub struct NoiseStream {
    normal: Option<Normal<f64>>,
    rng: seed::Rng,
}

impl NoiseStream {
    pub fn new(variance: f64, seed: u64) -> Result<Self> {
        if !(variance >= 0.0) || !variance.is_finite() {
            return Err(invalid(format!("noise variance must be >= 0, got {variance}")));
        }
        let normal = if variance > 0.0 {
            Some(Normal::new(0.0, variance.sqrt()).map_err(|e| invalid(e.to_string()))?)
        } else {
            None
        };
        Ok(Self {
            normal,
            rng: seed::rng(seed),
        })
    }

    /// Adds the next noise sample to `v`.
    pub fn perturb(&mut self, v: f64) -> f64 {
        match &self.normal {
            Some(normal) => v + normal.sample(&mut self.rng),
            None => v,
        }
    }
}

pub(crate) fn transpose_supports(row_supports: &[Vec<usize>], n: usize) -> Vec<Vec<usize>> {
    let mut cols = vec![Vec::new(); n];
    for (j, row) in row_supports.iter().enumerate() {
        for &i in row {
            cols[i].push(j);
        }
    }
    cols
}

impl LinearOperator for SparseBinaryMatrix {
    fn rows(&self) -> usize {
        self.row_supports.len()
    }

    fn cols(&self) -> usize {
        self.n
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (y, row) in out.iter_mut().zip(&self.row_supports) {
            *y = self.scale * row.iter().map(|&i| x[i]).sum::<f64>();
        }
    }
}

/// Storage width of a dense matrix. Arithmetic always accumulates in `f64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    F64,
    F32,
}

#[derive(Debug, Clone, PartialEq)]
enum Entries {
    F64(Vec<f64>),
    F32(Vec<f32>),
}

/// Row-major dense matrix, normally filled with i.i.d. N(0, 1) entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseGaussianMatrix {
    m: usize,
    n: usize,
    entries: Entries,
    seed: Option<u64>,
}

impl DenseGaussianMatrix {
    pub fn generate(m: usize, n: usize, seed: u64) -> Result<Self> {
        Self::generate_with_precision(m, n, seed, Precision::F64)
    }

    pub fn generate_with_precision(m: usize, n: usize, seed: u64, precision: Precision) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(invalid(format!("dense matrix needs m, n >= 1, got {m}x{n}")));
        }
        let mut rng = seed::rng(seed);
        let len = m * n;
        let entries = match precision {
            Precision::F64 => Entries::F64((0..len).map(|_| rng.sample(StandardNormal)).collect()),
            Precision::F32 => Entries::F32(
                (0..len)
                    .map(|_| rng.sample::<f64, _>(StandardNormal) as f32)
                    .collect(),
            ),
        };
        Ok(Self {
            m,
            n,
            entries,
            seed: Some(seed),
        })
    }

    /// Wraps explicit row-major entries.
    pub fn from_row_major(m: usize, n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != m * n {
            return Err(invalid(format!("expected {} entries, got {}", m * n, entries.len())));
        }
        Ok(Self {
            m,
            n,
            entries: Entries::F64(entries),
            seed: None,
        })
    }

    /// Seed the matrix was generated from, if any.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn precision(&self) -> Precision {
        match self.entries {
            Entries::F64(_) => Precision::F64,
            Entries::F32(_) => Precision::F32,
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let idx = row * self.n + col;
        match &self.entries {
            Entries::F64(e) => e[idx],
            Entries::F32(e) => e[idx] as f64,
        }
    }

    /// Entries as `f64`, row-major.
    pub fn to_row_major(&self) -> Vec<f64> {
        match &self.entries {
            Entries::F64(e) => e.clone(),
            Entries::F32(e) => e.iter().map(|&v| v as f64).collect(),
        }
    }

    /// `out = Phi^T r`. Rows with `r[j] == 0` are skipped.
    pub fn apply_transpose_into(&self, r: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        match &self.entries {
            Entries::F64(e) => transpose_rows(e, self.n, r, out),
            Entries::F32(e) => transpose_rows(e, self.n, r, out),
        }
    }

    pub fn apply_transpose(&self, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.apply_transpose_into(r, &mut out);
        out
    }

    /// Submatrix of the columns in `cols`, in order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        fn pick<T: Copy>(e: &[T], n: usize, m: usize, cols: &[usize]) -> Vec<T> {
            let mut out = Vec::with_capacity(m * cols.len());
            for row in e.chunks_exact(n) {
                out.extend(cols.iter().map(|&c| row[c]));
            }
            out
        }
        let entries = match &self.entries {
            Entries::F64(e) => Entries::F64(pick(e, self.n, self.m, cols)),
            Entries::F32(e) => Entries::F32(pick(e, self.n, self.m, cols)),
        };
        Self {
            m: self.m,
            n: cols.len(),
            entries,
            seed: self.seed,
        }
    }
}

fn dot_rows<T: Copy + Into<f64>>(e: &[T], n: usize, x: &[f64], out: &mut [f64]) {
    for (y, row) in out.iter_mut().zip(e.chunks_exact(n)) {
        *y = row.iter().zip(x).map(|(&a, &b)| a.into() * b).sum();
    }
}

fn transpose_rows<T: Copy + Into<f64>>(e: &[T], n: usize, r: &[f64], out: &mut [f64]) {
    for (&rj, row) in r.iter().zip(e.chunks_exact(n)) {
        if rj == 0.0 {
            continue;
        }
        for (o, &a) in out.iter_mut().zip(row) {
            *o += rj * a.into();
        }
    }
}

impl LinearOperator for DenseGaussianMatrix {
    fn rows(&self) -> usize {
        self.m
    }

    fn cols(&self) -> usize {
        self.n
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.entries {
            Entries::F64(e) => dot_rows(e, self.n, x, out),
            Entries::F32(e) => dot_rows(e, self.n, x, out),
        }
    }
}

pub fn gen_bernoulli_matrix(m1: usize, n: usize, p: f64, seed: u64) -> Result<SparseBinaryMatrix> {
    SparseBinaryMatrix::generate(m1, n, p, seed)
}

pub fn gen_gaussian_matrix(m: usize, n: usize, seed: u64) -> Result<DenseGaussianMatrix> {
    DenseGaussianMatrix::generate(m, n, seed)
}

/// `Phi x + z` with `z` i.i.d. N(0, noise_variance) drawn from `noise_seed`.
/// Zero variance gives the exact product and consumes no randomness.
pub fn measure<Op: LinearOperator + ?Sized>(
    matrix: &Op,
    x: &[f64],
    noise_variance: f64,
    noise_seed: u64,
) -> Result<Vec<f64>> {
    if x.len() != matrix.cols() {
        return Err(invalid(format!(
            "signal length {} does not match matrix with {} columns",
            x.len(),
            matrix.cols()
        )));
    }
    let mut noise = NoiseStream::new(noise_variance, noise_seed)?;
    let mut y = matrix.apply(x);
    y.iter_mut().for_each(|v| *v = noise.perturb(*v));
    Ok(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alphabet {
    /// `{0, 1}`: whether `|y| > epsilon`.
    Magnitude,
    /// `{-1, +1}`.
    Sign,
}

/// One bit per measurement, tagged with its alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMeasurements {
    alphabet: Alphabet,
    bits: Vec<i8>,
}

impl BitMeasurements {
    pub fn new(alphabet: Alphabet, bits: Vec<i8>) -> Result<Self> {
        let ok = match alphabet {
            Alphabet::Magnitude => bits.iter().all(|&b| b == 0 || b == 1),
            Alphabet::Sign => bits.iter().all(|&b| b == 1 || b == -1),
        };
        if !ok {
            return Err(invalid(format!("bit outside the {alphabet:?} alphabet")));
        }
        Ok(Self { alphabet, bits })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn bits(&self) -> &[i8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Sign bits as `+-1.0`.
    pub fn to_f64(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| b as f64).collect()
    }
}

/// `sign(0) = +1`.
#[inline]
pub fn sign(v: f64) -> i8 {
    if v < 0.0 {
        -1
    } else {
        1
    }
}

pub fn quantize_sign(y: &[f64]) -> BitMeasurements {
    BitMeasurements {
        alphabet: Alphabet::Sign,
        bits: y.iter().map(|&v| sign(v)).collect(),
    }
}

/// 0 where `|y| <= epsilon`, 1 elsewhere.
pub fn quantize_magnitude(y: &[f64], epsilon: f64) -> Result<BitMeasurements> {
    if !(epsilon >= 0.0) {
        return Err(invalid(format!("epsilon must be >= 0, got {epsilon}")));
    }
    Ok(BitMeasurements {
        alphabet: Alphabet::Magnitude,
        bits: y.iter().map(|&v| i8::from(v.abs() > epsilon)).collect(),
    })
}

/// Measurement indices whose magnitude bit is 0.
pub(crate) fn zero_bits(bits: &BitMeasurements) -> IndexSet {
    IndexSet::from_sorted(
        bits.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 0)
            .map(|(j, _)| j)
            .collect(),
    )
    .expect("enumeration order is increasing")
}
