//! Repeated timed solves and cross-environment comparison.
//!
//! Percent gain is `(baseline_mean − env_mean) · 100 / baseline_mean`:
//! positive means the environment solved faster than the baseline, negative
//! means it was slower.

use std::collections::BTreeMap;
use std::thread;
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compiler::{compile, CompactModel};
use crate::instance::UcInstance;
use crate::mip::{solve_mip, MipResult, MipStatus, SolverOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("baseline environment {0:?} has no records")]
    MissingBaseline(String),
    #[error("environment {0:?} has no successful trials")]
    EmptyEnvironment(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentProfile {
    pub name: String,
    pub cpu_count: u32,
    pub ram_gb: f64,
    pub ssd: bool,
    pub processor: String,
}

impl EnvironmentProfile {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.name.trim().is_empty() {
            return Err(BenchError::Argument("environment name is empty".into()));
        }
        if self.cpu_count < 1 {
            return Err(BenchError::Argument("cpu_count must be at least 1".into()));
        }
        if !(self.ram_gb.is_finite() && self.ram_gb > 0.0) {
            return Err(BenchError::Argument("ram_gb must be positive".into()));
        }
        Ok(())
    }

    /// The local cluster and the four EC2 instance types used as reference
    /// environments, in that order.
    pub fn presets() -> Vec<EnvironmentProfile> {
        let p = |name: &str, cpu_count, ram_gb, processor: &str| EnvironmentProfile {
            name: name.into(),
            cpu_count,
            ram_gb,
            ssd: true,
            processor: processor.into(),
        };
        vec![
            p("ANLBlues", 16, 64.0, "Xeon Nehalem"),
            p("c4.2xlarge", 8, 16.0, "Xeon E5-2666v3"),
            p("c4.4xlarge", 16, 30.0, "Xeon E5-2666v3"),
            p("c4.8xlarge", 36, 60.0, "Xeon E5-2666v3"),
            p("m4.16xlarge", 64, 256.0, "Xeon E5-2686v4"),
        ]
    }

    pub fn preset(name: &str) -> Option<EnvironmentProfile> {
        Self::presets().into_iter().find(|p| p.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub env: String,
    pub trial: usize,
    pub compile_seconds: f64,
    pub solve_seconds: f64,
    /// Present only for trials that finished within the gap.
    pub objective: Option<f64>,
    pub rel_gap: Option<f64>,
    pub nodes: Option<usize>,
    pub timestamp: DateTime<Utc>,
    /// Produced by a fixed-delay stand-in rather than the real solver.
    pub stub: bool,
    pub error: Option<String>,
}

impl TrialRecord {
    pub fn succeeded(&self) -> bool {
        self.objective.is_some()
    }
}

/// What the harness times. `prepare` counts as compile time and `solve` as
/// solve time.
pub trait TrialSolver {
    fn prepare(&mut self, inst: &UcInstance) -> Result<(), String>;
    fn solve(&mut self, options: &SolverOptions) -> Result<MipResult, String>;
    fn is_stub(&self) -> bool {
        false
    }
}

/// Compiles the instance and runs branch-and-bound.
#[derive(Default)]
pub struct MipTrialSolver {
    model: Option<CompactModel>,
}

impl TrialSolver for MipTrialSolver {
    fn prepare(&mut self, inst: &UcInstance) -> Result<(), String> {
        self.model = Some(compile(inst).map_err(|e| e.to_string())?);
        Ok(())
    }

    fn solve(&mut self, options: &SolverOptions) -> Result<MipResult, String> {
        let model = self.model.as_ref().ok_or("solve called before prepare")?;
        solve_mip(model, options).map_err(|e| e.to_string())
    }
}

/// Sleeps for a fixed time and reports a zero-cost result.
pub struct FixedDelaySolver {
    pub delay: Duration,
}

impl TrialSolver for FixedDelaySolver {
    fn prepare(&mut self, _inst: &UcInstance) -> Result<(), String> {
        Ok(())
    }

    fn solve(&mut self, _options: &SolverOptions) -> Result<MipResult, String> {
        thread::sleep(self.delay);
        Ok(MipResult {
            status: MipStatus::OptimalWithinGap,
            z: Vec::new(),
            y: Vec::new(),
            objective: 0.0,
            best_bound: 0.0,
            rel_gap_achieved: 0.0,
            nodes_explored: 0,
            solve_seconds: self.delay.as_secs_f64(),
        })
    }

    fn is_stub(&self) -> bool {
        true
    }
}

/// Runs `n_trials` solves back to back. Failed trials are recorded with an
/// error and the run continues.
pub fn run_trials(
    inst: &UcInstance,
    options: &SolverOptions,
    n_trials: usize,
    env: &EnvironmentProfile,
    solver: &mut dyn TrialSolver,
    mut on_trial: impl FnMut(&TrialRecord),
) -> Result<Vec<TrialRecord>, BenchError> {
    if n_trials < 1 {
        return Err(BenchError::Argument("n_trials must be at least 1".into()));
    }
    env.validate()?;
    options
        .validate()
        .map_err(|e| BenchError::Argument(e.to_string()))?;
    let mut out = Vec::with_capacity(n_trials);
    for trial in 0..n_trials {
        let timestamp = Utc::now();
        let t0 = Instant::now();
        let prepared = solver.prepare(inst);
        let compile_seconds = t0.elapsed().as_secs_f64();
        let mut record = TrialRecord {
            env: env.name.clone(),
            trial,
            compile_seconds,
            solve_seconds: f64::MIN_POSITIVE,
            objective: None,
            rel_gap: None,
            nodes: None,
            timestamp,
            stub: solver.is_stub(),
            error: None,
        };
        match prepared {
            Err(e) => record.error = Some(e),
            Ok(()) => {
                let t1 = Instant::now();
                let result = solver.solve(options);
                record.solve_seconds = t1.elapsed().as_secs_f64().max(f64::MIN_POSITIVE);
                match result {
                    Ok(r) if r.status == MipStatus::OptimalWithinGap => {
                        record.objective = Some(r.objective);
                        record.rel_gap = Some(r.rel_gap_achieved);
                        record.nodes = Some(r.nodes_explored);
                    }
                    Ok(r) => {
                        record.nodes = Some(r.nodes_explored);
                        record.error = Some(format!("solver finished with status {}", r.status));
                    }
                    Err(e) => record.error = Some(e),
                }
            }
        }
        if let Some(e) = &record.error {
            log::warn!("trial {trial} on {} failed: {e}", env.name);
        }
        on_trial(&record);
        out.push(record);
    }
    Ok(out)
}

/// `(baseline_mean − env_mean) · 100 / baseline_mean`.
pub fn percent_gain(baseline_mean: f64, env_mean: f64) -> Result<f64, BenchError> {
    if !(baseline_mean > 0.0) || !baseline_mean.is_finite() {
        return Err(BenchError::Argument(format!(
            "baseline mean must be positive, got {baseline_mean}"
        )));
    }
    Ok((baseline_mean - env_mean) * 100.0 / baseline_mean)
}

/// Mean and sample standard deviation (0 for a single value) by Welford's
/// recurrence over the values in ascending order, so the result does not
/// depend on input order.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    let n = sorted.len();
    let sd = if n > 1 { (m2 / (n - 1) as f64).sqrt() } else { 0.0 };
    (mean, sd)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub env: String,
    pub cpu_count: Option<u32>,
    pub ram_gb: Option<f64>,
    /// Successful trials used for the statistics.
    pub trials: usize,
    pub failed_trials: usize,
    pub mean_seconds: f64,
    pub sd_seconds: f64,
    pub percent_gain: f64,
}

impl ReportRow {
    pub fn incomplete(&self) -> bool {
        self.failed_trials > 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub baseline: String,
    /// Sorted by descending percent gain, then by name.
    pub rows: Vec<ReportRow>,
}

impl ComparisonReport {
    pub fn row(&self, env: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.env == env)
    }
}

/// Groups records by environment and compares each environment's mean
/// solve time with the baseline's. Only successful trials enter the
/// statistics. `profiles` supplies hardware columns where known.
pub fn compare(
    records: &[TrialRecord],
    baseline: &str,
    profiles: &[EnvironmentProfile],
) -> Result<ComparisonReport, BenchError> {
    let mut groups: BTreeMap<&str, (Vec<f64>, usize)> = BTreeMap::new();
    for r in records {
        let g = groups.entry(r.env.as_str()).or_default();
        if r.succeeded() {
            g.0.push(r.solve_seconds);
        } else {
            g.1 += 1;
        }
    }
    if !groups.contains_key(baseline) {
        return Err(BenchError::MissingBaseline(baseline.into()));
    }
    if let Some((env, _)) = groups.iter().find(|(_, g)| g.0.is_empty()) {
        return Err(BenchError::EmptyEnvironment(env.to_string()));
    }
    let base_mean = mean_sd(&groups[baseline].0).0;
    let mut rows = Vec::with_capacity(groups.len());
    for (env, (times, failed)) in &groups {
        let (mean, sd) = mean_sd(times);
        let profile = profiles.iter().find(|p| p.name == *env);
        rows.push(ReportRow {
            env: env.to_string(),
            cpu_count: profile.map(|p| p.cpu_count),
            ram_gb: profile.map(|p| p.ram_gb),
            trials: times.len(),
            failed_trials: *failed,
            mean_seconds: mean,
            sd_seconds: sd,
            percent_gain: percent_gain(base_mean, mean)?,
        });
    }
    rows.sort_by(|a, b| {
        b.percent_gain
            .total_cmp(&a.percent_gain)
            .then_with(|| a.env.cmp(&b.env))
    });
    Ok(ComparisonReport {
        baseline: baseline.into(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(env: &str, trial: usize, secs: f64) -> TrialRecord {
        TrialRecord {
            env: env.into(),
            trial,
            compile_seconds: 0.001,
            solve_seconds: secs,
            objective: Some(1.0),
            rel_gap: Some(0.0),
            nodes: Some(1),
            timestamp: Utc::now(),
            stub: true,
            error: None,
        }
    }

    #[test]
    fn gain_arithmetic() {
        assert_eq!(percent_gain(100.0, 85.5).unwrap(), 14.5);
        assert_eq!(percent_gain(100.0, 105.0).unwrap(), -5.0);
        assert_eq!(percent_gain(3.7, 3.7).unwrap(), 0.0);
        assert!(percent_gain(0.0, 1.0).is_err());
        assert!(percent_gain(-1.0, 1.0).is_err());
    }

    #[test]
    fn two_environment_example() {
        let recs = vec![rec("A", 0, 10.0), rec("A", 1, 10.0), rec("B", 0, 8.0), rec("B", 1, 12.0)];
        let r = compare(&recs, "A", &[]).unwrap();
        let b = r.row("B").unwrap();
        assert_eq!(b.mean_seconds, 10.0);
        assert_eq!(b.percent_gain, 0.0);
        assert_eq!(r.row("A").unwrap().percent_gain, 0.0);
    }

    #[test]
    fn comparison_errors() {
        let recs = vec![rec("A", 0, 1.0)];
        assert_eq!(compare(&recs, "Z", &[]), Err(BenchError::MissingBaseline("Z".into())));
        let mut failed = rec("B", 0, 1.0);
        failed.objective = None;
        let recs = vec![rec("A", 0, 1.0), failed];
        assert_eq!(compare(&recs, "A", &[]), Err(BenchError::EmptyEnvironment("B".into())));
    }

    #[test]
    fn failed_trials_are_excluded_and_flagged() {
        let mut failed = rec("A", 2, 100.0);
        failed.objective = None;
        let recs = vec![rec("A", 0, 1.0), rec("A", 1, 3.0), failed];
        let r = compare(&recs, "A", &[]).unwrap();
        let a = r.row("A").unwrap();
        assert_eq!((a.trials, a.failed_trials, a.mean_seconds), (2, 1, 2.0));
        assert!(a.incomplete());
    }

    #[test]
    fn presets_are_valid() {
        let p = EnvironmentProfile::presets();
        assert_eq!(p.len(), 5);
        assert!(p.iter().all(|e| e.validate().is_ok()));
        assert_eq!(EnvironmentProfile::preset("c4.8xlarge").unwrap().cpu_count, 36);
    }

    #[test]
    fn zero_trials_rejected() {
        let inst = crate::instance::parse_instance(&crate::instance::tests::one_gen_doc()).unwrap();
        let env = EnvironmentProfile::preset("ANLBlues").unwrap();
        let mut s = MipTrialSolver::default();
        let r = run_trials(&inst, &SolverOptions::default(), 0, &env, &mut s, |_| {});
        assert!(matches!(r, Err(BenchError::Argument(_))));
    }
}
