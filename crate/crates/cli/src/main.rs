use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use twopart_cs::bench::calibrate::{calibrate_c1, calibrate_c2, m1_for, Part1Problem};
use twopart_cs::bench::config::{Constant, SweepConfig, PROVISIONAL_C1};
use twopart_cs::bench::sweep::{build_trial, resolve_constants};
use twopart_cs::bench::{emit_plot_data, read_records, run_sweep, summarize, Metric};
use twopart_cs::{Error, Registry};

#[derive(Parser)]
#[command(name = "twopart", version, about = "Two-part 1-bit compressed sensing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find c2 (if requested) and the smallest c1 reaching the zero-identification target.
    Calibrate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `calibration_target`.
        #[arg(long)]
        target: Option<f64>,
        /// Overrides `calibration_trials`.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Run a measurement-rate sweep and write the CSV and manifest.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_path`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Turn a sweep CSV into per-series data files.
    PlotData {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "snr")]
        metric: String,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run every configured algorithm once and print the reports.
    Single {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        grid_index: usize,
        #[arg(long, default_value_t = 0)]
        trial: usize,
        /// Iteration budget; defaults to the first configured budget.
        #[arg(long)]
        iters: Option<usize>,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidParameter(_) => 2,
        Error::CalibrationFailure { .. } => 3,
        Error::InfeasibleSweep => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(cli: Cli) -> twopart_cs::Result<()> {
    match cli.command {
        Command::Calibrate { config, target, trials } => {
            let mut cfg = SweepConfig::from_path(&config)?;
            if let Some(t) = target {
                cfg.calibration_target = t;
            }
            if let Some(t) = trials {
                cfg.calibration_trials = t;
            }
            cfg.validate()?;
            calibrate(&cfg)
        }
        Command::Sweep { config, output } => {
            let mut cfg = SweepConfig::from_path(&config)?;
            if let Some(out) = output {
                cfg.output_path = out;
            }
            let outcome = run_sweep(&cfg, &Registry::builtin())?;
            println!(
                "wrote {} rows to {} (manifest {})",
                outcome.records.len(),
                outcome.csv_path.display(),
                outcome.manifest_path.display()
            );
            for p in summarize(&outcome.records, Metric::Snr) {
                println!(
                    "{:<12} iters={:<4} M/N={:<5} mean SNR {:>7.2} dB ± {:.2} (exact {})",
                    p.algorithm, p.iters, p.m_over_n, p.mean, p.stderr, p.exact
                );
            }
            if outcome.all_infeasible() {
                return Err(Error::InfeasibleSweep);
            }
            Ok(())
        }
        Command::PlotData { input, metric, out_dir } => {
            let metric: Metric = metric.parse()?;
            let records = read_records(&input)?;
            for path in emit_plot_data(&records, metric, &out_dir)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Single {
            config,
            grid_index,
            trial,
            iters,
        } => {
            let cfg = SweepConfig::from_path(&config)?;
            if grid_index >= cfg.m_over_n_grid.len() {
                return Err(Error::Config(format!("grid index {grid_index} out of range")));
            }
            let constants = resolve_constants(&cfg)?;
            let iters = iters.unwrap_or(cfg.iteration_budgets[0]);
            let t = build_trial(&cfg, &constants, grid_index, iters, trial).ok_or(Error::InfeasibleSweep)?;
            println!(
                "n={} k={} m1={} m2={} p={} epsilon={} iters={}",
                t.n, t.k, t.m1, t.m2, t.p, t.epsilon, iters
            );
            let registry = Registry::builtin();
            for name in &cfg.algorithms {
                let alg = registry.get(name).ok_or_else(|| Error::Config(format!("unknown algorithm {name}")))?;
                let (_, r) = alg.run(&t)?;
                println!(
                    "{name}: snr_db={} runtime_s={:.6} zeros_identified={} false_zeros={} residual={} iterations={} consistent={}",
                    r.snr, r.runtime_seconds, r.part1_zero_identified, r.part1_false_zeros,
                    r.residual_problem_size, r.iterations_used, r.consistent
                );
            }
            Ok(())
        }
    }
}

fn calibrate(cfg: &SweepConfig) -> twopart_cs::Result<()> {
    let seed = twopart_cs::bench::sweep::calibration_seed(cfg.base_seed);
    let mut problem = Part1Problem {
        n: cfg.n,
        k: cfg.k,
        p: 1.0 / cfg.k as f64,
        epsilon: cfg.epsilon(),
        noise_variance: cfg.noise_variance,
        zero_threshold: cfg.zero_threshold,
    };
    match cfg.c2 {
        Constant::Value(c2) => problem.p = (c2 / cfg.k as f64).min(1.0),
        Constant::Calibrate => {
            let c1 = match cfg.c1 {
                Constant::Value(v) => v,
                Constant::Calibrate => PROVISIONAL_C1,
            };
            let cal = calibrate_c2(&problem, m1_for(c1, cfg.n, cfg.k), cfg.calibration_trials, seed)?;
            for (c, m1, f) in &cal.curve {
                println!("c2={c:.4} m1={m1} zero_fraction={f:.4}");
            }
            println!("c2 = {}", cal.constant);
            problem.p = (cal.constant / cfg.k as f64).min(1.0);
        }
    }
    let cal = calibrate_c1(&problem, cfg.calibration_target, cfg.calibration_trials, seed)?;
    for (c, m1, f) in &cal.curve {
        println!("c1={c:.4} m1={m1} zero_fraction={f:.4}");
    }
    println!("c1 = {} (m1 = {}, zero fraction {:.4})", cal.constant, cal.m1, cal.fraction);
    Ok(())
}
