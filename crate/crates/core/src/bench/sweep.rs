//! Measurement-rate sweeps.
//!
//! For each grid value `M/N`, iteration budget and trial, every configured
//! algorithm runs on the same derived seeds. Rows are appended to the CSV
//! as they complete.
//!
//! Seeds: trial `t` at grid index `g` uses `derive(base_seed, [g, t])`, and
//! each random stream inside the trial uses `derive(trial_seed, [tag])`
//! with the tags in [`crate::seed::stream`]. With `redraw_signal = false`
//! the signal seed is `derive(base_seed, [SIGNAL])` for every trial.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::calibrate::{calibrate_c1, calibrate_c2, m1_for, Calibration, Part1Problem};
use super::config::{Constant, Mode, SweepConfig, PROVISIONAL_C1};
use crate::error::{invalid, Result};
use crate::onebit::BihtConfig;
use crate::registry::{Registry, Trial, TrialSeeds};
use crate::seed::{self, stream};

pub const CSV_HEADER: [&str; 16] = [
    "mode",
    "algorithm",
    "m_over_n",
    "m",
    "m1",
    "m2",
    "iters",
    "trial",
    "seed",
    "snr_db",
    "runtime_s",
    "part1_zero_frac",
    "part1_false_zeros",
    "residual_size",
    "consistent",
    "status",
];

/// Coordinate reserved for the calibration seed.
const CALIBRATION_TAG: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// Part 1 resolved every coefficient; the estimate is all zero.
    EmptyResidual,
    /// `m2 <= 0` at this grid point.
    Infeasible,
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub mode: Mode,
    pub algorithm: String,
    pub m_over_n: f64,
    pub m: usize,
    pub m1: usize,
    pub m2: i64,
    pub iters: usize,
    pub trial: Option<usize>,
    pub seed: Option<u64>,
    /// `inf` on exact recovery.
    pub snr_db: Option<f64>,
    pub runtime_s: Option<f64>,
    pub part1_zero_frac: Option<f64>,
    pub part1_false_zeros: Option<usize>,
    pub residual_size: Option<usize>,
    pub consistent: Option<bool>,
    pub status: Status,
}

/// Constants after calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConstants {
    pub c1: f64,
    pub c2: f64,
    pub m1: usize,
    pub p: f64,
    pub epsilon: f64,
    pub c1_calibration: Option<Calibration>,
    pub c2_calibration: Option<Calibration>,
}

pub fn calibration_seed(base_seed: u64) -> u64 {
    seed::derive(base_seed, &[CALIBRATION_TAG])
}

/// Resolves `c2` first (at the configured or provisional `c1`), then `c1`.
pub fn resolve_constants(cfg: &SweepConfig) -> Result<ResolvedConstants> {
    let (n, k) = (cfg.n, cfg.k);
    let epsilon = cfg.epsilon();
    let cal_seed = calibration_seed(cfg.base_seed);
    let problem = |p: f64| Part1Problem {
        n,
        k,
        p,
        epsilon,
        noise_variance: cfg.noise_variance,
        zero_threshold: cfg.zero_threshold,
    };

    let (c2, c2_calibration) = match cfg.c2 {
        Constant::Value(v) => (v, None),
        Constant::Calibrate => {
            let c1 = match cfg.c1 {
                Constant::Value(v) => v,
                Constant::Calibrate => PROVISIONAL_C1,
            };
            let cal = calibrate_c2(&problem(1.0 / k as f64), m1_for(c1, n, k), cfg.calibration_trials, cal_seed)?;
            log::info!("calibrated c2 = {} (zero fraction {:.4})", cal.constant, cal.fraction);
            (cal.constant, Some(cal))
        }
    };
    let p = (c2 / k as f64).min(1.0);
    let (c1, c1_calibration) = match cfg.c1 {
        Constant::Value(v) => (v, None),
        Constant::Calibrate => {
            let cal = calibrate_c1(&problem(p), cfg.calibration_target, cfg.calibration_trials, cal_seed)?;
            log::info!("calibrated c1 = {} (m1 = {}, zero fraction {:.4})", cal.constant, cal.m1, cal.fraction);
            (cal.constant, Some(cal))
        }
    };
    Ok(ResolvedConstants {
        c1,
        c2,
        m1: m1_for(c1, n, k),
        p,
        epsilon,
        c1_calibration,
        c2_calibration,
    })
}

pub fn trial_seed(base_seed: u64, grid_index: usize, trial: usize) -> u64 {
    seed::derive(base_seed, &[grid_index as u64, trial as u64])
}

pub fn trial_seeds(cfg: &SweepConfig, grid_index: usize, trial: usize) -> TrialSeeds {
    let base = trial_seed(cfg.base_seed, grid_index, trial);
    let s = |tag| seed::derive(base, &[tag]);
    TrialSeeds {
        signal: if cfg.redraw_signal {
            s(stream::SIGNAL)
        } else {
            seed::derive(cfg.base_seed, &[stream::SIGNAL])
        },
        matrix1: s(stream::MATRIX1),
        matrix2: s(stream::MATRIX2),
        noise1: s(stream::NOISE1),
        noise2: s(stream::NOISE2),
        direct_matrix: s(stream::DIRECT_MATRIX),
        direct_noise: s(stream::DIRECT_NOISE),
    }
}

/// `m = round(n * M/N)`.
pub fn total_measurements(n: usize, m_over_n: f64) -> usize {
    (n as f64 * m_over_n).round() as usize
}

/// Builds the trial for grid index `g`, budget `iters`, trial `t`.
/// Returns `None` when `m2 <= 0`.
pub fn build_trial(
    cfg: &SweepConfig,
    constants: &ResolvedConstants,
    grid_index: usize,
    iters: usize,
    trial: usize,
) -> Option<Trial> {
    let m = total_measurements(cfg.n, cfg.m_over_n_grid[grid_index]);
    if m <= constants.m1 {
        return None;
    }
    Some(Trial {
        n: cfg.n,
        k: cfg.k,
        m1: constants.m1,
        m2: m - constants.m1,
        p: constants.p,
        epsilon: constants.epsilon,
        zero_threshold: cfg.zero_threshold,
        noise_variance: cfg.noise_variance,
        biht: BihtConfig {
            k: cfg.k,
            step_size: cfg.step_size,
            max_iterations: iters,
            variant: cfg.biht_variant,
            stop_on_consistency: cfg.mode == Mode::Noiseless,
        },
        seeds: trial_seeds(cfg, grid_index, trial),
        precision: cfg.precision,
    })
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub records: Vec<TrialRecord>,
    pub constants: ResolvedConstants,
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
}

impl SweepOutcome {
    pub fn all_infeasible(&self) -> bool {
        self.records.iter().all(|r| r.status == Status::Infeasible)
    }
}

pub fn manifest_path_for(csv: &Path) -> PathBuf {
    let mut name = csv.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".manifest.toml");
    csv.with_file_name(name)
}

/// SHA-256 of the config's canonical TOML form.
pub fn config_hash(cfg: &SweepConfig) -> String {
    let text = toml::to_string(cfg).expect("config serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Runs the whole sweep, writing the CSV and its manifest.
pub fn run_sweep(cfg: &SweepConfig, registry: &Registry) -> Result<SweepOutcome> {
    cfg.validate()?;
    let algorithms = cfg
        .algorithms
        .iter()
        .map(|name| registry.get(name).ok_or_else(|| invalid(format!("unknown algorithm {name:?}"))))
        .collect::<Result<Vec<_>>>()?;
    let constants = resolve_constants(cfg)?;
    warn_on_memory(cfg);

    if let Some(dir) = cfg.output_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut writer = csv::Writer::from_path(&cfg.output_path)?;
    let mut records = Vec::new();
    let mut emit = |rec: TrialRecord, writer: &mut csv::Writer<File>| -> Result<()> {
        writer.serialize(&rec)?;
        writer.flush()?;
        records.push(rec);
        Ok(())
    };

    for (g, &ratio) in cfg.m_over_n_grid.iter().enumerate() {
        let m = total_measurements(cfg.n, ratio);
        let m2 = m as i64 - constants.m1 as i64;
        for &iters in &cfg.iteration_budgets {
            if build_trial(cfg, &constants, g, iters, 0).is_none() {
                log::warn!("M/N = {ratio}: m = {m} leaves no Part 2 measurements (m1 = {}); skipped", constants.m1);
                for alg in &algorithms {
                    let rec = infeasible_record(cfg.mode, alg.name(), ratio, m, constants.m1, m2, iters);
                    emit(rec, &mut writer)?;
                }
                continue;
            }
            for t in 0..cfg.trials_per_point {
                let trial = build_trial(cfg, &constants, g, iters, t).expect("feasibility checked");
                for alg in &algorithms {
                    let (_, report) = alg.run(&trial)?;
                    let two_part = trial_uses_part1(alg.name());
                    let rec = TrialRecord {
                        mode: cfg.mode,
                        algorithm: alg.name().to_string(),
                        m_over_n: ratio,
                        m,
                        m1: constants.m1,
                        m2,
                        iters,
                        trial: Some(t),
                        seed: Some(trial_seed(cfg.base_seed, g, t)),
                        snr_db: Some(report.snr.as_f64()),
                        runtime_s: cfg.record_runtime.then_some(report.runtime_seconds),
                        part1_zero_frac: two_part.then(|| report.zero_fraction(cfg.n, cfg.k)),
                        part1_false_zeros: two_part.then_some(report.part1_false_zeros),
                        residual_size: Some(report.residual_problem_size),
                        consistent: Some(report.consistent),
                        status: if report.empty_residual {
                            Status::EmptyResidual
                        } else {
                            Status::Ok
                        },
                    };
                    emit(rec, &mut writer)?;
                }
            }
            log::info!("M/N = {ratio}, iters = {iters}: {} trials done", cfg.trials_per_point);
        }
    }
    drop(writer);

    let manifest_path = manifest_path_for(&cfg.output_path);
    write_manifest(&manifest_path, cfg, &constants)?;
    Ok(SweepOutcome {
        records,
        constants,
        csv_path: cfg.output_path.clone(),
        manifest_path,
    })
}

fn trial_uses_part1(algorithm: &str) -> bool {
    algorithm != "direct-biht"
}

fn infeasible_record(mode: Mode, algorithm: &str, ratio: f64, m: usize, m1: usize, m2: i64, iters: usize) -> TrialRecord {
    TrialRecord {
        mode,
        algorithm: algorithm.to_string(),
        m_over_n: ratio,
        m,
        m1,
        m2,
        iters,
        trial: None,
        seed: None,
        snr_db: None,
        runtime_s: None,
        part1_zero_frac: None,
        part1_false_zeros: None,
        residual_size: None,
        consistent: None,
        status: Status::Infeasible,
    }
}

fn warn_on_memory(cfg: &SweepConfig) {
    let max_ratio = cfg.m_over_n_grid.iter().copied().fold(0.0, f64::max);
    let entries = total_measurements(cfg.n, max_ratio) as f64 * cfg.n as f64;
    let bytes = entries
        * match cfg.precision {
            crate::sensing::Precision::F64 => 8.0,
            crate::sensing::Precision::F32 => 4.0,
        };
    if bytes > 1e9 {
        log::warn!(
            "largest dense matrix needs about {:.1} GB; consider precision = \"f32\"",
            bytes / 1e9
        );
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    library_version: &'static str,
    config_sha256: String,
    c1: f64,
    c2: f64,
    m1: usize,
    p: f64,
    epsilon: f64,
    calibration_seed: u64,
    config: &'a SweepConfig,
    seeds: Vec<ManifestSeeds>,
}

#[derive(Serialize)]
struct ManifestSeeds {
    grid_index: usize,
    m_over_n: f64,
    trial: usize,
    trial_seed: u64,
    signal: u64,
    matrix1: u64,
    matrix2: u64,
    noise1: u64,
    noise2: u64,
    direct_matrix: u64,
    direct_noise: u64,
}

fn write_manifest(path: &Path, cfg: &SweepConfig, constants: &ResolvedConstants) -> Result<()> {
    let mut seeds = Vec::new();
    for (g, &ratio) in cfg.m_over_n_grid.iter().enumerate() {
        for t in 0..cfg.trials_per_point {
            let s = trial_seeds(cfg, g, t);
            seeds.push(ManifestSeeds {
                grid_index: g,
                m_over_n: ratio,
                trial: t,
                trial_seed: trial_seed(cfg.base_seed, g, t),
                signal: s.signal,
                matrix1: s.matrix1,
                matrix2: s.matrix2,
                noise1: s.noise1,
                noise2: s.noise2,
                direct_matrix: s.direct_matrix,
                direct_noise: s.direct_noise,
            });
        }
    }
    let manifest = Manifest {
        library_version: env!("CARGO_PKG_VERSION"),
        config_sha256: config_hash(cfg),
        c1: constants.c1,
        c2: constants.c2,
        m1: constants.m1,
        p: constants.p,
        epsilon: constants.epsilon,
        calibration_seed: calibration_seed(cfg.base_seed),
        config: cfg,
        seeds,
    };
    let text = toml::to_string(&manifest).map_err(|e| invalid(e.to_string()))?;
    File::create(path)?.write_all(text.as_bytes())?;
    Ok(())
}

/// Reads a sweep CSV back into records.
pub fn read_records(path: &Path) -> Result<Vec<TrialRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    let header = reader.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(invalid(format!("{} does not have the sweep CSV header", path.display())));
    }
    Ok(reader.deserialize().collect::<std::result::Result<Vec<_>, _>>()?)
}
