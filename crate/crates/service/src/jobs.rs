//! In-memory job table, bounded FIFO queue and worker threads.

use std::collections::{HashMap, VecDeque};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use uuid::Uuid;

use scuc_core::formats::SolutionDocument;
use scuc_core::instance::{check, InstanceError, Violation};
use scuc_core::mip::{solve_mip_with, SolveControl};
use scuc_core::{compile, parse_instance, MipStatus, SolverOptions, UcInstance};

pub const DEFAULT_QUEUE_DEPTH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
    Cancelled,
}

impl JobStatus {
    pub fn is_terminal(self) -> bool {
        matches!(self, JobStatus::Done | JobStatus::Failed | JobStatus::Cancelled)
    }
}

/// Everything about a job except its solution body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobInfo {
    pub id: Uuid,
    pub instance: String,
    pub status: JobStatus,
    pub options: SolverOptions,
    pub submitted_at: DateTime<Utc>,
    pub started_at: Option<DateTime<Utc>>,
    pub finished_at: Option<DateTime<Utc>>,
    pub error: Option<String>,
    /// Best bounds known when the job ended, also set for failed jobs.
    pub objective: Option<f64>,
    pub best_bound: Option<f64>,
    pub rel_gap: Option<f64>,
    pub solve_seconds: Option<f64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ServiceError {
    #[error("malformed request: {0}")]
    Schema(String),
    #[error("instance failed validation")]
    Validation(Vec<Violation>),
    #[error("invalid options: {0}")]
    Options(String),
    #[error("unknown job {0}")]
    UnknownJob(String),
    #[error("job is {status:?}: {detail}")]
    NotReady { status: JobStatus, detail: String },
    #[error("queue is full ({0} jobs waiting)")]
    QueueFull(usize),
    #[error("service is shutting down")]
    ShuttingDown,
}

/// Solves one job. `stop` is raised when the job is cancelled.
pub trait JobSolver: Send + Sync {
    fn solve(&self, inst: &UcInstance, options: &SolverOptions, stop: &AtomicBool) -> Result<SolutionDocument, String>;
}

/// Compiles and runs branch-and-bound.
#[derive(Debug, Default, Clone, Copy)]
pub struct MipJobSolver;

impl JobSolver for MipJobSolver {
    fn solve(&self, inst: &UcInstance, options: &SolverOptions, stop: &AtomicBool) -> Result<SolutionDocument, String> {
        let t0 = Instant::now();
        let model = compile(inst).map_err(|e| e.to_string())?;
        let compile_seconds = t0.elapsed().as_secs_f64();
        let ctl = SolveControl {
            stop: Some(stop),
            ..Default::default()
        };
        let result = solve_mip_with(&model, options, ctl).map_err(|e| e.to_string())?;
        Ok(SolutionDocument::new(inst, &model, &result, compile_seconds))
    }
}

/// Waits a fixed time before solving, to make queueing observable in tests.
/// The wait ends early on cancellation.
#[derive(Debug, Clone, Copy)]
pub struct SlowSolver {
    pub delay: Duration,
}

impl JobSolver for SlowSolver {
    fn solve(&self, inst: &UcInstance, options: &SolverOptions, stop: &AtomicBool) -> Result<SolutionDocument, String> {
        let until = Instant::now() + self.delay;
        while Instant::now() < until && !stop.load(Ordering::Relaxed) {
            thread::sleep(Duration::from_millis(2).min(until.saturating_duration_since(Instant::now())));
        }
        MipJobSolver.solve(inst, options, stop)
    }
}

struct Job {
    info: JobInfo,
    instance: Arc<UcInstance>,
    stop: Arc<AtomicBool>,
    result: Option<SolutionDocument>,
}

#[derive(Default)]
struct State {
    jobs: HashMap<Uuid, Job>,
    queue: VecDeque<Uuid>,
    running: usize,
    peak_running: usize,
    shutdown: bool,
}

struct Shared {
    state: Mutex<State>,
    ready: Condvar,
    queue_depth: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ServiceConfig {
    pub workers: usize,
    pub queue_depth: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            workers: 1,
            queue_depth: DEFAULT_QUEUE_DEPTH,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceStats {
    pub workers: usize,
    pub queued: usize,
    pub running: usize,
    /// Most jobs ever running at the same time.
    pub peak_running: usize,
}

/// The job table plus its worker pool. Dropping it stops the workers after
/// their current jobs.
pub struct JobService {
    shared: Arc<Shared>,
    workers: Vec<JoinHandle<()>>,
}

impl JobService {
    pub fn start(config: ServiceConfig, solver: Arc<dyn JobSolver>) -> JobService {
        let shared = Arc::new(Shared {
            state: Mutex::new(State::default()),
            ready: Condvar::new(),
            queue_depth: config.queue_depth,
        });
        let workers = (0..config.workers.max(1))
            .map(|i| {
                let shared = shared.clone();
                let solver = solver.clone();
                thread::Builder::new()
                    .name(format!("solve-worker-{i}"))
                    .spawn(move || worker(&shared, solver.as_ref()))
                    .expect("spawn worker")
            })
            .collect();
        JobService { shared, workers }
    }

    /// Parses and validates an instance document, then queues it.
    pub fn submit_document(&self, document: &str, options: SolverOptions) -> Result<Uuid, ServiceError> {
        let inst = parse_instance(document).map_err(|e| match e {
            InstanceError::Schema(m) => ServiceError::Schema(m),
            other => ServiceError::Validation(other.violations()),
        })?;
        self.submit(inst, options)
    }

    pub fn submit(&self, inst: UcInstance, options: SolverOptions) -> Result<Uuid, ServiceError> {
        check(&inst).map_err(|e| ServiceError::Validation(e.violations()))?;
        options.validate().map_err(|e| ServiceError::Options(e.to_string()))?;
        let mut st = self.shared.state.lock().expect("lock");
        if st.shutdown {
            return Err(ServiceError::ShuttingDown);
        }
        if st.queue.len() >= self.shared.queue_depth {
            return Err(ServiceError::QueueFull(st.queue.len()));
        }
        let id = Uuid::new_v4();
        let info = JobInfo {
            id,
            instance: inst.name.clone(),
            status: JobStatus::Queued,
            options,
            submitted_at: Utc::now(),
            started_at: None,
            finished_at: None,
            error: None,
            objective: None,
            best_bound: None,
            rel_gap: None,
            solve_seconds: None,
        };
        st.jobs.insert(
            id,
            Job {
                info,
                instance: Arc::new(inst),
                stop: Arc::new(AtomicBool::new(false)),
                result: None,
            },
        );
        st.queue.push_back(id);
        self.shared.ready.notify_one();
        Ok(id)
    }

    pub fn status(&self, id: Uuid) -> Result<JobInfo, ServiceError> {
        let st = self.shared.state.lock().expect("lock");
        st.jobs
            .get(&id)
            .map(|j| j.info.clone())
            .ok_or_else(|| ServiceError::UnknownJob(id.to_string()))
    }

    pub fn result(&self, id: Uuid) -> Result<SolutionDocument, ServiceError> {
        let st = self.shared.state.lock().expect("lock");
        let job = st
            .jobs
            .get(&id)
            .ok_or_else(|| ServiceError::UnknownJob(id.to_string()))?;
        match (&job.info.status, &job.result) {
            (JobStatus::Done, Some(doc)) => Ok(doc.clone()),
            (status, _) => {
                let detail = match status {
                    JobStatus::Queued => "job is waiting for a worker".to_string(),
                    JobStatus::Running => "job is still running".to_string(),
                    JobStatus::Cancelled => "job was cancelled before it ran; no solution will be produced".into(),
                    _ => format!(
                        "job ended without a solution: {}",
                        job.info.error.as_deref().unwrap_or("unknown error")
                    ),
                };
                Err(ServiceError::NotReady {
                    status: *status,
                    detail,
                })
            }
        }
    }

    /// Queued jobs are cancelled at once; running jobs are asked to stop and
    /// end as failed. Finished jobs are left as they are.
    pub fn cancel(&self, id: Uuid) -> Result<JobInfo, ServiceError> {
        let mut st = self.shared.state.lock().expect("lock");
        let job = st
            .jobs
            .get_mut(&id)
            .ok_or_else(|| ServiceError::UnknownJob(id.to_string()))?;
        match job.info.status {
            JobStatus::Queued => {
                job.info.status = JobStatus::Cancelled;
                job.info.finished_at = Some(Utc::now());
                let info = job.info.clone();
                st.queue.retain(|q| *q != id);
                Ok(info)
            }
            JobStatus::Running => {
                job.stop.store(true, Ordering::Relaxed);
                Ok(job.info.clone())
            }
            _ => Ok(job.info.clone()),
        }
    }

    pub fn stats(&self) -> ServiceStats {
        let st = self.shared.state.lock().expect("lock");
        ServiceStats {
            workers: self.workers.len(),
            queued: st.queue.len(),
            running: st.running,
            peak_running: st.peak_running,
        }
    }

    /// Stops accepting work, cancels queued jobs and signals running ones,
    /// then waits for the workers.
    pub fn shutdown(mut self) {
        self.stop_workers();
    }

    fn stop_workers(&mut self) {
        {
            let mut st = self.shared.state.lock().expect("lock");
            st.shutdown = true;
            let now = Utc::now();
            let queued: Vec<Uuid> = st.queue.drain(..).collect();
            for id in queued {
                if let Some(j) = st.jobs.get_mut(&id) {
                    j.info.status = JobStatus::Cancelled;
                    j.info.finished_at = Some(now);
                }
            }
            for j in st.jobs.values() {
                if j.info.status == JobStatus::Running {
                    j.stop.store(true, Ordering::Relaxed);
                }
            }
            self.shared.ready.notify_all();
        }
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

impl Drop for JobService {
    fn drop(&mut self) {
        self.stop_workers();
    }
}

fn worker(shared: &Shared, solver: &dyn JobSolver) {
    loop {
        let (id, inst, options, stop) = {
            let mut st = shared.state.lock().expect("lock");
            loop {
                if st.shutdown {
                    return;
                }
                if let Some(id) = st.queue.pop_front() {
                    break start_job(&mut st, id);
                }
                st = shared.ready.wait(st).expect("lock");
            }
        };
        let outcome = solver.solve(&inst, &options, &stop);
        let mut st = shared.state.lock().expect("lock");
        st.running -= 1;
        let cancelled = stop.load(Ordering::Relaxed);
        let Some(job) = st.jobs.get_mut(&id) else { continue };
        let info = &mut job.info;
        info.finished_at = Some(Utc::now());
        match outcome {
            Ok(doc) => {
                info.objective = doc.objective;
                info.best_bound = doc.best_bound;
                info.rel_gap = doc.rel_gap;
                info.solve_seconds = Some(doc.solve_seconds);
                match doc.status {
                    MipStatus::OptimalWithinGap if doc.has_schedule() => {
                        info.status = JobStatus::Done;
                        job.result = Some(doc);
                    }
                    MipStatus::Cancelled => fail(info, "cancelled"),
                    _ if cancelled => fail(info, "cancelled"),
                    MipStatus::Infeasible => fail(info, "instance is infeasible"),
                    MipStatus::TimeLimit => fail(info, "time limit reached before the gap closed"),
                    MipStatus::OptimalWithinGap => fail(info, "solver returned no schedule"),
                }
            }
            Err(e) if cancelled => fail(info, &format!("cancelled ({e})")),
            Err(e) => fail(info, &e),
        }
        log::info!("job {id} finished as {:?}", info.status);
    }
}

fn start_job(st: &mut State, id: Uuid) -> (Uuid, Arc<UcInstance>, SolverOptions, Arc<AtomicBool>) {
    st.running += 1;
    st.peak_running = st.peak_running.max(st.running);
    let job = st.jobs.get_mut(&id).expect("queued job exists");
    job.info.status = JobStatus::Running;
    job.info.started_at = Some(Utc::now());
    (id, job.instance.clone(), job.info.options, job.stop.clone())
}

fn fail(info: &mut JobInfo, msg: &str) {
    info.status = JobStatus::Failed;
    info.error = Some(msg.to_string());
}
