use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use scuc_core::{compile, parse_instance, serialize_instance, synth_instance, SolverOptions};
use scuc_service::jobs::{JobInfo, JobService, JobStatus, MipJobSolver, ServiceConfig, ServiceError, SlowSolver};
use uuid::Uuid;

fn tiny_doc() -> String {
    serialize_instance(&synth_instance(2, 1, 0, 3, 4).unwrap())
}

fn wait_terminal(svc: &JobService, id: Uuid, limit: Duration) -> JobInfo {
    let start = Instant::now();
    loop {
        let info = svc.status(id).unwrap();
        if info.status.is_terminal() {
            return info;
        }
        assert!(start.elapsed() < limit, "job {id} still {:?}", info.status);
        thread::sleep(Duration::from_millis(5));
    }
}

#[test]
fn tiny_job_completes_and_replays() {
    let svc = JobService::start(ServiceConfig::default(), Arc::new(MipJobSolver));
    let doc = tiny_doc();
    let id = svc.submit_document(&doc, SolverOptions::default()).unwrap();
    let info = wait_terminal(&svc, id, Duration::from_secs(30));
    assert_eq!(info.status, JobStatus::Done);
    assert!(info.finished_at.unwrap() >= info.started_at.unwrap());
    assert!(info.started_at.unwrap() >= info.submitted_at);

    let sol = svc.result(id).unwrap();
    assert!(sol.rel_gap.unwrap() <= 0.005);
    let inst = parse_instance(&doc).unwrap();
    let model = compile(&inst).unwrap();
    let (z, y) = sol.to_vectors(&inst, &model).unwrap();
    let e = model.evaluate(&z, &y).unwrap();
    assert!(e.residuals.max_block() <= 1e-6 && e.residuals.integrality <= 1e-6);
    assert!((e.objective - sol.objective.unwrap()).abs() <= 1e-6 * e.objective.abs());
}

#[test]
fn submission_errors() {
    let svc = JobService::start(ServiceConfig::default(), Arc::new(MipJobSolver));
    let err = svc.submit_document("{\"name\": 3}", SolverOptions::default()).unwrap_err();
    assert!(matches!(err, ServiceError::Schema(ref m) if m.contains("name")), "{err:?}");

    let mut inst = synth_instance(1, 1, 0, 2, 0).unwrap();
    inst.generators[0].p_min = inst.generators[0].p_max + 1.0;
    match svc.submit(inst, SolverOptions::default()).unwrap_err() {
        ServiceError::Validation(v) => assert!(v.iter().any(|x| x.path.starts_with("generators[0]"))),
        other => panic!("{other:?}"),
    }
    let bad = SolverOptions {
        rel_gap: -1.0,
        ..Default::default()
    };
    assert!(matches!(svc.submit_document(&tiny_doc(), bad), Err(ServiceError::Options(_))));
    assert!(matches!(svc.status(Uuid::new_v4()), Err(ServiceError::UnknownJob(_))));
    assert!(matches!(svc.result(Uuid::new_v4()), Err(ServiceError::UnknownJob(_))));
    assert!(matches!(svc.cancel(Uuid::new_v4()), Err(ServiceError::UnknownJob(_))));
}

#[test]
fn cancel_queued_running_and_done() {
    let svc = JobService::start(
        ServiceConfig::default(),
        Arc::new(SlowSolver {
            delay: Duration::from_millis(300),
        }),
    );
    let doc = tiny_doc();
    let first = svc.submit_document(&doc, SolverOptions::default()).unwrap();
    let second = svc.submit_document(&doc, SolverOptions::default()).unwrap();
    assert_eq!(svc.status(second).unwrap().status, JobStatus::Queued);

    let c = svc.cancel(second).unwrap();
    assert_eq!(c.status, JobStatus::Cancelled);
    match svc.result(second).unwrap_err() {
        ServiceError::NotReady { status, detail } => {
            assert_eq!(status, JobStatus::Cancelled);
            assert!(detail.contains("cancelled"));
        }
        other => panic!("{other:?}"),
    }

    while svc.status(first).unwrap().status == JobStatus::Queued {
        thread::sleep(Duration::from_millis(2));
    }
    assert!(matches!(
        svc.result(first),
        Err(ServiceError::NotReady {
            status: JobStatus::Running,
            ..
        })
    ));
    let done = wait_terminal(&svc, first, Duration::from_secs(30));
    assert_eq!(done.status, JobStatus::Done);
    assert_eq!(svc.cancel(first).unwrap().status, JobStatus::Done);
    assert_eq!(svc.status(second).unwrap().started_at, None);
}

#[test]
fn cancel_mid_solve_stops_quickly() {
    let svc = JobService::start(ServiceConfig::default(), Arc::new(MipJobSolver));
    let inst = synth_instance(60, 40, 60, 24, 2).unwrap();
    let opts = SolverOptions {
        rel_gap: 0.0,
        ..Default::default()
    };
    let id = svc.submit(inst, opts).unwrap();
    while svc.status(id).unwrap().status != JobStatus::Running {
        thread::sleep(Duration::from_millis(2));
    }
    thread::sleep(Duration::from_millis(200));
    let t0 = Instant::now();
    svc.cancel(id).unwrap();
    let info = wait_terminal(&svc, id, Duration::from_secs(10));
    let took = t0.elapsed();
    assert!(took < Duration::from_secs(5), "took {took:?}");
    assert_eq!(info.status, JobStatus::Failed);
    assert!(info.error.unwrap().starts_with("cancelled"));
    assert!(info.best_bound.is_some());
}

#[test]
fn full_queue_rejects() {
    let svc = JobService::start(
        ServiceConfig {
            workers: 1,
            queue_depth: 2,
        },
        Arc::new(SlowSolver {
            delay: Duration::from_millis(500),
        }),
    );
    let doc = tiny_doc();
    let mut results = Vec::new();
    for _ in 0..6 {
        results.push(svc.submit_document(&doc, SolverOptions::default()));
    }
    assert!(results.iter().any(|r| matches!(r, Err(ServiceError::QueueFull(_)))));
    assert!(results.iter().filter(|r| r.is_ok()).count() <= 3);
}
