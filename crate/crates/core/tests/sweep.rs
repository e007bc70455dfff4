use std::collections::BTreeMap;

use twopart_cs::bench::config::{Constant, Mode, SweepConfig};
use twopart_cs::bench::sweep::{manifest_path_for, resolve_constants, trial_seeds};
use twopart_cs::bench::{emit_plot_data, read_records, run_sweep, Metric, Status};
use twopart_cs::pipeline::{run_direct, run_two_part, DirectConfig, DirectSeeds, TwoPartConfig, TwoPartSeeds};
use twopart_cs::sensing::Precision;
use twopart_cs::{BihtConfig, Registry};

fn small_noisy(dir: &std::path::Path) -> SweepConfig {
    let mut cfg = SweepConfig::defaults(Mode::Noisy, vec![0.02, 0.4], dir.join("out.csv"));
    cfg.n = 600;
    cfg.k = 4;
    cfg.c1 = Constant::Value(2.0);
    cfg.iteration_budgets = vec![20, 40];
    cfg.trials_per_point = 3;
    cfg
}

#[test]
fn single_point_sweep_equals_pipeline_calls() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_noisy(dir.path());
    cfg.m_over_n_grid = vec![0.5];
    cfg.iteration_budgets = vec![25];
    cfg.trials_per_point = 1;
    let outcome = run_sweep(&cfg, &Registry::builtin()).unwrap();
    assert_eq!(outcome.records.len(), 2);

    let c = resolve_constants(&cfg).unwrap();
    let s = trial_seeds(&cfg, 0, 0);
    let m = 300;
    let two = TwoPartConfig {
        n: 600,
        k: 4,
        m1: c.m1,
        m2: m - c.m1,
        p: 0.25,
        epsilon: cfg.noise_variance.sqrt(),
        zero_threshold: 3,
        noise_variance: cfg.noise_variance,
        biht: BihtConfig::noisy(4, 25),
        seeds: TwoPartSeeds {
            signal: s.signal,
            matrix1: s.matrix1,
            matrix2: s.matrix2,
            noise1: s.noise1,
            noise2: s.noise2,
        },
        precision: Precision::F64,
    };
    let (_, r2) = run_two_part(&two).unwrap();
    let direct = DirectConfig {
        n: 600,
        k: 4,
        m,
        noise_variance: cfg.noise_variance,
        biht: BihtConfig::noisy(4, 25),
        seeds: DirectSeeds {
            signal: s.signal,
            matrix: s.direct_matrix,
            noise: s.direct_noise,
        },
        precision: Precision::F64,
    };
    let (_, rd) = run_direct(&direct).unwrap();

    let rec2 = &outcome.records[0];
    let recd = &outcome.records[1];
    assert_eq!(rec2.algorithm, "sudo-biht");
    assert_eq!(rec2.snr_db, Some(r2.snr.as_f64()));
    assert_eq!(rec2.residual_size, Some(r2.residual_problem_size));
    assert_eq!(rec2.part1_false_zeros, Some(r2.part1_false_zeros));
    assert_eq!(recd.snr_db, Some(rd.snr.as_f64()));
    assert_eq!(recd.part1_zero_frac, None);
}

#[test]
fn csv_round_trips_and_marks_infeasible_points() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_noisy(dir.path());
    let outcome = run_sweep(&cfg, &Registry::builtin()).unwrap();
    let text = std::fs::read_to_string(&cfg.output_path).unwrap();
    assert!(text.starts_with(
        "mode,algorithm,m_over_n,m,m1,m2,iters,trial,seed,snr_db,runtime_s,part1_zero_frac,part1_false_zeros,residual_size,consistent,status\n"
    ));
    let back = read_records(&cfg.output_path).unwrap();
    assert_eq!(back, outcome.records);
    // 0.02 * 600 = 12 measurements is below m1: one row per algorithm and budget.
    let infeasible: Vec<_> = back.iter().filter(|r| r.status == Status::Infeasible).collect();
    assert_eq!(infeasible.len(), 4);
    assert!(infeasible.iter().all(|r| r.m2 <= 0 && r.trial.is_none()));
    assert_eq!(back.len(), 4 + 2 * 2 * 3);
    assert!(!outcome.all_infeasible());

    let manifest = std::fs::read_to_string(manifest_path_for(&cfg.output_path)).unwrap();
    assert!(manifest.contains("config_sha256"));
    assert!(manifest.contains("library_version"));
    assert_eq!(manifest.matches("[[seeds]]").count(), 2 * 3);
}

#[test]
fn plot_data_matches_independent_aggregation() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_noisy(dir.path());
    cfg.m_over_n_grid = vec![0.6, 0.3];
    cfg.trials_per_point = 4;
    run_sweep(&cfg, &Registry::builtin()).unwrap();

    // Recompute means straight from the CSV text.
    let text = std::fs::read_to_string(&cfg.output_path).unwrap();
    let mut groups: BTreeMap<(String, String, String), Vec<f64>> = BTreeMap::new();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f[15] != "ok" {
            continue;
        }
        groups
            .entry((f[1].to_string(), f[6].to_string(), f[2].to_string()))
            .or_default()
            .push(f[9].parse().unwrap());
    }

    let out = dir.path().join("plots");
    let records = read_records(&cfg.output_path).unwrap();
    let paths = emit_plot_data(&records, Metric::Snr, &out).unwrap();
    assert_eq!(paths.len(), 4);
    for path in paths {
        let name = path.file_stem().unwrap().to_str().unwrap().to_string();
        let parts: Vec<&str> = name.splitn(3, '_').collect();
        let (alg, iters) = (parts[1], parts[2]);
        let body = std::fs::read_to_string(&path).unwrap();
        let rows: Vec<Vec<f64>> = body
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).collect())
            .collect();
        assert!(rows.windows(2).all(|w| w[0][0] < w[1][0]));
        for row in rows {
            let vals = &groups[&(alg.to_string(), iters.to_string(), row[0].to_string())];
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            assert!((row[1] - mean).abs() < 1e-9, "{name}: {} vs {mean}", row[1]);
            assert_eq!(row[3] as usize, vals.len());
        }
    }
    assert!(out.join("series_snr.txt").exists());
    assert!(emit_plot_data(&records, Metric::Runtime, &out).unwrap().len() == 4);
}

#[test]
fn fixed_signal_option_reuses_the_signal_seed() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_noisy(dir.path());
    cfg.redraw_signal = false;
    assert_eq!(trial_seeds(&cfg, 0, 0).signal, trial_seeds(&cfg, 1, 5).signal);
    assert_ne!(trial_seeds(&cfg, 0, 0).matrix1, trial_seeds(&cfg, 0, 1).matrix1);
    cfg.redraw_signal = true;
    assert_ne!(trial_seeds(&cfg, 0, 0).signal, trial_seeds(&cfg, 0, 1).signal);
}
