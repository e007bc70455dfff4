//! Numerical calibration of the Part 1 constants.
//!
//! `c1` sets the Part 1 measurement count `m1 = ceil(c1 k log2(n/k))`; `c2`
//! sets the Bernoulli parameter `p = c2 / k`. Both are chosen by Monte Carlo
//! over a geometric grid. Trials reuse their seeds at every grid point, and
//! because Bernoulli rows and noise are drawn in row order a larger `m1`
//! only appends rows, so the `c1` curve is non-decreasing for each trial.

use crate::error::{invalid, Error, Result};
use crate::model::generate_signal;
use crate::seed::{self, stream};
use crate::sensing::{BernoulliRows, NoiseStream};

/// Part 1 setup being calibrated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Part1Problem {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub epsilon: f64,
    pub noise_variance: f64,
    pub zero_threshold: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    /// Selected constant.
    pub constant: f64,
    pub m1: usize,
    /// Mean zero-identification fraction at the selected point.
    pub fraction: f64,
    /// `(constant, m1, mean fraction)` for every grid point evaluated.
    pub curve: Vec<(f64, usize, f64)>,
}

pub const C1_GRID_START: f64 = 0.5;
pub const C1_GRID_MAX: f64 = 64.0;
pub const GRID_FACTOR: f64 = 1.25;
pub const C2_GRID_START: f64 = 0.25;
pub const C2_GRID_MAX: f64 = 16.0;

fn geometric_grid(start: f64, max: f64) -> Vec<f64> {
    let mut grid = Vec::new();
    let mut c = start;
    while c <= max {
        grid.push(c);
        c *= GRID_FACTOR;
    }
    grid
}

/// `0.5, 0.625, ...` up to 64.
pub fn c1_grid() -> Vec<f64> {
    geometric_grid(C1_GRID_START, C1_GRID_MAX)
}

/// `0.25, 0.3125, ...` up to `min(16, k)` so that `p <= 1`.
pub fn c2_grid(k: usize) -> Vec<f64> {
    geometric_grid(C2_GRID_START, C2_GRID_MAX.min(k as f64))
}

/// `ceil(c1 k log2(n / k))`.
pub fn m1_for(c1: f64, n: usize, k: usize) -> usize {
    (c1 * k as f64 * (n as f64 / k as f64).log2()).ceil().max(0.0) as usize
}

/// One Monte Carlo trial whose Part 1 matrix grows a row at a time.
struct GrowingTrial {
    x: Vec<f64>,
    rows: BernoulliRows,
    noise: NoiseStream,
    scale: f64,
    hits: Vec<usize>,
    rows_done: usize,
}

impl GrowingTrial {
    fn new(problem: &Part1Problem, seed: u64, trial: u64) -> Result<Self> {
        let x = generate_signal(problem.n, problem.k, seed::derive(seed, &[trial, stream::SIGNAL]))?;
        let rows = BernoulliRows::new(problem.n, problem.p, seed::derive(seed, &[trial, stream::MATRIX1]))?;
        let noise = NoiseStream::new(problem.noise_variance, seed::derive(seed, &[trial, stream::NOISE1]))?;
        Ok(Self {
            x: x.values().to_vec(),
            scale: rows.scale(),
            rows,
            noise,
            hits: vec![0; problem.n],
            rows_done: 0,
        })
    }

    fn extend_to(&mut self, m1: usize, epsilon: f64) {
        while self.rows_done < m1 {
            let support = self.rows.next_row();
            let y = self.noise.perturb(self.scale * support.iter().map(|&i| self.x[i]).sum::<f64>());
            if !(y.abs() > epsilon) {
                support.iter().for_each(|&i| self.hits[i] += 1);
            }
            self.rows_done += 1;
        }
    }

    fn zero_fraction(&self, threshold: usize) -> f64 {
        let zeros = self.x.iter().filter(|&&v| v == 0.0).count();
        if zeros == 0 {
            return 1.0;
        }
        let found = self
            .x
            .iter()
            .zip(&self.hits)
            .filter(|(&v, &h)| v == 0.0 && h >= threshold)
            .count();
        found as f64 / zeros as f64
    }
}

/// Mean fraction of true zeros identified at each `m1` (ascending).
pub fn zero_fraction_curve(problem: &Part1Problem, m1_values: &[usize], trials: usize, seed: u64) -> Result<Vec<f64>> {
    if problem.zero_threshold == 0 {
        return Err(invalid("zero threshold must be >= 1"));
    }
    if m1_values.windows(2).any(|w| w[0] > w[1]) {
        return Err(invalid("m1 values must be ascending"));
    }
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let mut states = (0..trials as u64)
        .map(|t| GrowingTrial::new(problem, seed, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(m1_values
        .iter()
        .map(|&m1| {
            states
                .iter_mut()
                .map(|s| {
                    s.extend_to(m1, problem.epsilon);
                    s.zero_fraction(problem.zero_threshold)
                })
                .sum::<f64>()
                / trials as f64
        })
        .collect())
}

/// Smallest `c1` on the grid whose mean zero-identification fraction
/// reaches `target`.
pub fn calibrate_c1(problem: &Part1Problem, target: f64, trials: usize, seed: u64) -> Result<Calibration> {
    if !(target > 0.0 && target < 1.0) {
        return Err(invalid(format!("target fraction must lie in (0, 1), got {target}")));
    }
    let grid = c1_grid();
    let m1s: Vec<usize> = grid.iter().map(|&c| m1_for(c, problem.n, problem.k)).collect();
    // Evaluated lazily so the search stops at the first success.
    let mut states = (0..trials.max(1) as u64)
        .map(|t| GrowingTrial::new(problem, seed, t))
        .collect::<Result<Vec<_>>>()?;
    let mut curve = Vec::new();
    for (&c1, &m1) in grid.iter().zip(&m1s) {
        let fraction = states
            .iter_mut()
            .map(|s| {
                s.extend_to(m1, problem.epsilon);
                s.zero_fraction(problem.zero_threshold)
            })
            .sum::<f64>()
            / states.len() as f64;
        log::debug!("c1={c1:.4} m1={m1} fraction={fraction:.4}");
        curve.push((c1, m1, fraction));
        if fraction >= target {
            return Ok(Calibration {
                constant: c1,
                m1,
                fraction,
                curve,
            });
        }
    }
    Err(failure(&curve, target))
}

/// `c2` on the grid maximizing mean zero identification at fixed `m1`;
/// ties go to the smaller value.
pub fn calibrate_c2(problem: &Part1Problem, m1: usize, trials: usize, seed: u64) -> Result<Calibration> {
    let mut curve = Vec::new();
    for c2 in c2_grid(problem.k) {
        let p = (c2 / problem.k as f64).min(1.0);
        let candidate = Part1Problem { p, ..*problem };
        let fraction = zero_fraction_curve(&candidate, &[m1], trials, seed)?[0];
        curve.push((c2, m1, fraction));
    }
    let best = curve
        .iter()
        .copied()
        .fold(None::<(f64, usize, f64)>, |best, cur| match best {
            Some(b) if b.2 >= cur.2 => Some(b),
            _ => Some(cur),
        })
        .ok_or_else(|| invalid("empty c2 grid"))?;
    if best.2 == 0.0 {
        return Err(failure(&curve, 0.0));
    }
    Ok(Calibration {
        constant: best.0,
        m1,
        fraction: best.2,
        curve,
    })
}

fn failure(curve: &[(f64, usize, f64)], target: f64) -> Error {
    let (best_constant, _, best_fraction) = curve
        .iter()
        .copied()
        .fold((f64::NAN, 0, f64::NEG_INFINITY), |b, c| if c.2 > b.2 { c } else { b });
    Error::CalibrationFailure {
        best_constant,
        best_fraction,
        target,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::support_metrics;
    use crate::sensing::{gen_bernoulli_matrix, measure, quantize_magnitude};
    use crate::zero_ident::{identify_zeros, small_measurement_set};

    fn noisy(n: usize, k: usize) -> Part1Problem {
        let var = 10f64.powf(-2.5);
        Part1Problem {
            n,
            k,
            p: 1.0 / k as f64,
            epsilon: var.sqrt(),
            noise_variance: var,
            zero_threshold: 3,
        }
    }

    #[test]
    fn grid_shape() {
        let g = c1_grid();
        assert_eq!(g[0], 0.5);
        assert!((g[1] - 0.625).abs() < 1e-15);
        assert!(*g.last().unwrap() <= 64.0 && g.last().unwrap() * 1.25 > 64.0);
        assert_eq!(m1_for(1.0, 2000, 10), (10.0 * 200f64.log2()).ceil() as usize);
        assert_eq!(m1_for(3.0, 10, 10), 0);
    }

    #[test]
    fn growing_trial_matches_pipeline_part1() {
        let problem = noisy(300, 5);
        let seed = 17;
        for (t, m1) in [(0u64, 40usize), (3, 95)] {
            let mut g = GrowingTrial::new(&problem, seed, t).unwrap();
            g.extend_to(m1, problem.epsilon);

            let x = generate_signal(300, 5, seed::derive(seed, &[t, stream::SIGNAL])).unwrap();
            let phi = gen_bernoulli_matrix(m1, 300, problem.p, seed::derive(seed, &[t, stream::MATRIX1])).unwrap();
            let y = measure(&phi, x.values(), problem.noise_variance, seed::derive(seed, &[t, stream::NOISE1])).unwrap();
            let s = small_measurement_set(&quantize_magnitude(&y, problem.epsilon).unwrap()).unwrap();
            let part1 = identify_zeros(phi.col_supports(), &s, 3).unwrap();
            let (found, false_zeros) = support_metrics(&x, &part1.zero_set).unwrap();
            let want = (found - false_zeros) as f64 / 295.0;
            assert_eq!(g.zero_fraction(3), want);
        }
    }

    #[test]
    fn curve_is_monotone_in_m1() {
        let problem = noisy(500, 5);
        let m1s: Vec<usize> = c1_grid().iter().take(12).map(|&c| m1_for(c, 500, 5)).collect();
        let curve = zero_fraction_curve(&problem, &m1s, 8, 3).unwrap();
        assert!(curve.windows(2).all(|w| w[0] <= w[1]), "{curve:?}");
    }

    #[test]
    fn calibration_reaches_target() {
        let problem = noisy(500, 5);
        let c = calibrate_c1(&problem, 0.9, 10, 5).unwrap();
        assert!(c.fraction >= 0.9);
        assert_eq!(c.m1, m1_for(c.constant, 500, 5));
        // Previous grid point, if any, missed the target.
        if c.curve.len() > 1 {
            assert!(c.curve[c.curve.len() - 2].2 < 0.9);
        }
    }

    #[test]
    fn dense_matrix_cannot_calibrate() {
        // Every measurement touches a nonzero, so no measurement is ever zero.
        let problem = Part1Problem {
            n: 50,
            k: 2,
            p: 1.0,
            epsilon: 0.0,
            noise_variance: 0.0,
            zero_threshold: 1,
        };
        match calibrate_c1(&problem, 0.9, 3, 1) {
            Err(Error::CalibrationFailure { best_fraction, .. }) => assert_eq!(best_fraction, 0.0),
            other => panic!("expected calibration failure, got {other:?}"),
        }
    }

    #[test]
    fn bad_target_rejected() {
        assert!(calibrate_c1(&noisy(100, 2), 1.0, 3, 1).is_err());
        assert!(calibrate_c1(&noisy(100, 2), 0.0, 3, 1).is_err());
    }

    #[test]
    fn c2_calibration_picks_interior_point() {
        let problem = noisy(500, 5);
        let c = calibrate_c2(&problem, 150, 6, 2).unwrap();
        assert!(c.fraction > 0.0);
        assert!(c.curve.iter().all(|p| p.2 <= c.fraction));
        assert!(c.constant < 5.0);
    }
}
