use std::time::Duration;

use chrono::Utc;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scuc_core::benchmark::{
    compare, mean_sd, percent_gain, run_trials, EnvironmentProfile, FixedDelaySolver, MipTrialSolver,
    TrialRecord,
};
use scuc_core::formats::{read_trials_csv, write_plot_data, write_report_csv, write_trials_csv};
use scuc_core::{synth_instance, SolverOptions};

fn two_pass(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, if xs.len() > 1 { (ss / (n - 1.0)).sqrt() } else { 0.0 })
}

fn record(env: &str, trial: usize, secs: f64) -> TrialRecord {
    TrialRecord {
        env: env.into(),
        trial,
        compile_seconds: 0.0,
        solve_seconds: secs,
        objective: Some(100.0),
        rel_gap: Some(0.001),
        nodes: Some(3),
        timestamp: Utc::now(),
        stub: false,
        error: None,
    }
}

#[test]
fn gain_on_rational_grid() {
    for b in 1..=40 {
        for e in 0..=40 {
            let (b, e) = (b as f64 * 0.25, e as f64 * 0.25);
            assert_eq!(percent_gain(b, e).unwrap(), (b - e) * 100.0 / b);
        }
    }
    assert_eq!(percent_gain(100.0, 85.5).unwrap(), 14.5);
}

#[test]
fn welford_matches_two_pass() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let n = rng.gen_range(1..300);
        let scale = 10f64.powi(rng.gen_range(-3..4));
        let xs: Vec<f64> = (0..n).map(|_| scale * rng.gen_range(0.5..2.0)).collect();
        let (m, s) = mean_sd(&xs);
        let (rm, rs) = two_pass(&xs);
        assert!((m - rm).abs() <= 1e-12 * rm.abs());
        assert!((s - rs).abs() <= 1e-12 * rs.abs().max(1e-300) || (s - rs).abs() <= 1e-15 * rm);
    }
}

#[test]
fn report_is_order_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut recs: Vec<TrialRecord> = ["A", "B", "C"]
        .iter()
        .flat_map(|e| (0..30).map(move |i| (e, i)))
        .map(|(e, i)| record(e, i, 1.0 + (i as f64).sin().abs()))
        .collect();
    let first = compare(&recs, "B", &[]).unwrap();
    for _ in 0..5 {
        recs.shuffle(&mut rng);
        assert_eq!(compare(&recs, "B", &[]).unwrap(), first);
    }
}

#[test]
fn five_environment_report() {
    let means = [100.0, 104.0, 97.0, 90.0, 94.5];
    let presets = EnvironmentProfile::presets();
    let recs: Vec<TrialRecord> = presets
        .iter()
        .zip(means)
        .flat_map(|(p, m)| [record(&p.name, 0, m - 1.0), record(&p.name, 1, m + 1.0)])
        .collect();
    let report = compare(&recs, "ANLBlues", &presets).unwrap();
    assert_eq!(report.rows.len(), 5);
    assert_eq!(report.row("ANLBlues").unwrap().percent_gain, 0.0);
    assert_eq!(report.row("c4.2xlarge").unwrap().percent_gain, -4.0);
    assert_eq!(report.row("c4.8xlarge").unwrap().percent_gain, 10.0);
    assert_eq!(report.rows[0].env, "c4.8xlarge");
    let gains: Vec<f64> = report.rows.iter().map(|r| r.percent_gain).collect();
    assert!(gains.windows(2).all(|w| w[0] >= w[1]));
    let csv = write_report_csv(&report).unwrap();
    assert!(csv.starts_with("env,cpu,ram_gb,trials,mean_s,sd_s,percent_gain\n"));
    assert_eq!(csv.lines().count(), 6);
    assert_eq!(write_plot_data(&report).lines().count(), 6);
}

#[test]
fn stub_solver_timing() {
    let inst = synth_instance(1, 1, 0, 1, 0).unwrap();
    let env = EnvironmentProfile::preset("ANLBlues").unwrap();
    let mut stub = FixedDelaySolver {
        delay: Duration::from_millis(10),
    };
    let recs = run_trials(&inst, &SolverOptions::default(), 20, &env, &mut stub, |_| {}).unwrap();
    assert_eq!(recs.len(), 20);
    assert!(recs.iter().all(|r| r.stub && r.succeeded()));
    let times: Vec<f64> = recs.iter().map(|r| r.solve_seconds).collect();
    let (mean, _) = mean_sd(&times);
    assert!(mean >= 0.010 && mean < 0.030, "mean {mean}");
}

#[test]
fn real_trials_and_csv_round_trip() {
    let inst = synth_instance(2, 1, 0, 3, 1).unwrap();
    let env = EnvironmentProfile::preset("c4.4xlarge").unwrap();
    let mut solver = MipTrialSolver::default();
    let recs = run_trials(&inst, &SolverOptions::default(), 3, &env, &mut solver, |_| {}).unwrap();
    assert_eq!(recs.len(), 3);
    for r in &recs {
        assert!(r.solve_seconds > 0.0 && r.succeeded());
        assert!(r.rel_gap.unwrap() <= 0.005);
    }
    let text = write_trials_csv(&recs).unwrap();
    assert!(text.starts_with("env,trial,compile_seconds,solve_seconds,objective,rel_gap,nodes,timestamp\n"));
    assert_eq!(read_trials_csv(&text).unwrap(), recs);
}
