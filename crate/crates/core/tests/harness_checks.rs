//! Behavioral checks of the Monte Carlo harness: determinism, cross-method
//! consistency, config validation, output contracts.

use beamsel_core::harness::{
    csv_string, noise_variance, run_sweep, run_trial, run_trial_with_context,
    validate_decomposition, HarnessError, Method, SimConfig, SweepContext, CSV_HEADER,
};
use std::collections::BTreeSet;

fn tiny_config() -> SimConfig {
    SimConfig {
        n_t: 4,
        n_r: 4,
        n_rf: 2,
        l: 64,
        l_c: 16,
        n_f: 4,
        n_w: 4,
        p: 3,
        rho: 16.0,
        snr_grid: vec![-5.0, 10.0],
        trials: 3,
        seed: 9,
        modes: Method::ALL.to_vec(),
    }
}

// 1. Identical inputs give bit-identical trial records, whether the shared
//    context is rebuilt or reused.
#[test]
fn trials_are_deterministic() {
    let cfg = tiny_config();
    let a = run_trial(&cfg, 1, 2).unwrap();
    let b = run_trial(&cfg, 1, 2).unwrap();
    assert_eq!(a, b);
    let ctx = SweepContext::new(&cfg).unwrap();
    let c = run_trial_with_context(&ctx, 1, 2).unwrap();
    assert_eq!(a, c);
    // Different trial indices give different noise, hence different errors.
    let d = run_trial_with_context(&ctx, 1, 3).unwrap();
    assert_ne!(a.mode_error, d.mode_error);
}

// 2. Vanishing noise: every method's error collapses toward zero and the
//    estimated tap set covers the true delays.
#[test]
fn high_snr_limit() {
    let cfg = SimConfig {
        snr_grid: vec![80.0],
        ..tiny_config()
    };
    let record = run_trial(&cfg, 0, 0).unwrap();
    for (method, err) in &record.mode_error {
        assert!(
            *err < 1e-3,
            "method {method} error {err} did not collapse at 80 dB"
        );
    }
    let est: BTreeSet<usize> = record
        .estimated_delays
        .as_ref()
        .unwrap()
        .indices
        .iter()
        .copied()
        .collect();
    for d in &record.true_delays {
        assert!(est.contains(d), "true delay {d} missing from {est:?}");
    }
    assert_eq!(record.delay_error_rate, Some(0.0));
}

// 3. When the estimated tap set equals the true set, the delay-estimating
//    and known-delay methods agree exactly (same readout, same bound).
#[test]
fn estimated_equals_explicit_on_equal_sets() {
    // Every tap occupied and high SNR: the threshold keeps all of them.
    let cfg = SimConfig {
        p: 16,
        snr_grid: vec![40.0],
        ..tiny_config()
    };
    let record = run_trial(&cfg, 0, 0).unwrap();
    let est: BTreeSet<usize> = record
        .estimated_delays
        .as_ref()
        .unwrap()
        .indices
        .iter()
        .copied()
        .collect();
    let truth: BTreeSet<usize> = record.true_delays.iter().copied().collect();
    assert_eq!(est, truth, "precondition: sets must match");
    assert_eq!(
        record.mode_error[&Method::EstimatedDelay],
        record.mode_error[&Method::ExplicitDelay]
    );
    assert_eq!(
        record.mode_bound[&Method::EstimatedDelay],
        record.mode_bound[&Method::ExplicitDelay]
    );
}

// 4. Config validation failures surface through the harness and name the
//    offending field.
#[test]
fn validation_errors_name_fields() {
    let cfg = SimConfig {
        l_c: 48, // not a power of two
        ..tiny_config()
    };
    match run_sweep(&cfg) {
        Err(HarnessError::Config(e)) => assert_eq!(e.field, "l_c"),
        other => panic!("expected a config error, got {other:?}"),
    }
    let cfg = SimConfig {
        l: 64,
        l_c: 128, // power of two but larger than l
        ..tiny_config()
    };
    match run_sweep(&cfg) {
        Err(HarnessError::Config(e)) => assert_eq!(e.field, "l_c"),
        other => panic!("expected a config error, got {other:?}"),
    }
}

// 5. A real sweep renders the contractual CSV: exact header, one row per
//    (snr, mode) in order, and identical bytes on a rerun.
#[test]
fn sweep_csv_contract() {
    let cfg = tiny_config();
    let records = run_sweep(&cfg).unwrap();
    assert_eq!(records.len(), 2);
    let text = csv_string(&records);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 1 + 2 * 4);
    assert!(lines[1].starts_with("-5,ref,"));
    assert!(lines[2].starts_with("-5,refined,"));
    assert!(lines[3].starts_with("-5,estimated_delay,"));
    assert!(lines[4].starts_with("-5,explicit_delay,"));
    assert!(lines[5].starts_with("10,ref,"));
    for line in &lines[1..] {
        assert_eq!(line.matches(',').count(), 7, "column count in {line}");
        assert!(line.ends_with(",3"), "trial count in {line}");
    }

    let again = csv_string(&run_sweep(&cfg).unwrap());
    assert_eq!(text, again);
}

// 6. Disabling the delay-estimating method leaves no rate to report: the
//    CSV prints `nan` in that column.
#[test]
fn missing_rate_prints_nan() {
    let cfg = SimConfig {
        modes: vec![Method::Ref, Method::Refined],
        ..tiny_config()
    };
    let records = run_sweep(&cfg).unwrap();
    assert!(records.iter().all(|r| r.delay_error_rate.is_none()));
    let text = csv_string(&records);
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[6], "nan");
    }
}

// 7. Trial records serialize with the stable method names.
#[test]
fn record_wire_format() {
    let record = run_trial(&tiny_config(), 0, 0).unwrap();
    let text = serde_json::to_string(&record).unwrap();
    for key in [
        "\"ref\"",
        "\"refined\"",
        "\"estimated_delay\"",
        "\"explicit_delay\"",
        "\"mode_error\"",
        "\"mode_bound\"",
        "\"optimal\"",
        "\"true_delays\"",
    ] {
        assert!(text.contains(key), "missing {key}");
    }
}

// 8. Moment validation runs on a small setup: the split identity holds to
//    machine precision, the error stays under its bound, and the noise
//    tally lands near its expectation.
#[test]
fn moment_validation_smoke() {
    let cfg = tiny_config();
    let report = validate_decomposition(&cfg, 0.0, 500).unwrap();
    assert_eq!(report.draws, 500);
    assert!(report.identity_ok(), "residual {}", report.max_identity_residual);
    assert!(report.mae_ok(), "mae {} bound {}", report.mae, report.mae_bound);
    assert!(
        (report.nu_mean / report.nu_mean_expected - 1.0).abs() < 0.1,
        "nu mean {} vs {}",
        report.nu_mean,
        report.nu_mean_expected
    );
    assert!(report.pair.0 < cfg.n_w && report.pair.1 < cfg.n_f);
    // The expected tally follows the noise-variance convention.
    assert!((report.nu_mean_expected - cfg.l as f64 * noise_variance(0.0)).abs() < 1e-12);

    // Too few draws for a variance estimate is a config error.
    match validate_decomposition(&cfg, 0.0, 1) {
        Err(HarnessError::Config(e)) => assert_eq!(e.field, "draws"),
        other => panic!("expected a config error, got {other:?}"),
    }
}
