use std::collections::HashSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use reqwest::StatusCode;
use scuc_core::formats::SolutionDocument;
use scuc_core::{compile, parse_instance, serialize_instance, synth_instance};
use scuc_service::http::{ErrorBody, SubmitReply};
use scuc_service::jobs::{JobInfo, JobService, ServiceConfig, SlowSolver};
use serde_json::{json, Value};

async fn start(config: ServiceConfig, delay_ms: u64) -> (String, Arc<JobService>) {
    let svc = Arc::new(JobService::start(
        config,
        Arc::new(SlowSolver {
            delay: Duration::from_millis(delay_ms),
        }),
    ));
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let s = svc.clone();
    tokio::spawn(async move { scuc_service::serve(listener, s, std::future::pending()).await });
    (format!("http://{addr}"), svc)
}

fn instance_value(seed: u64) -> Value {
    serde_json::from_str(&serialize_instance(&synth_instance(2, 1, 0, 3, seed).unwrap())).unwrap()
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn hundred_concurrent_jobs() {
    let pool = 4;
    let (base, svc) = start(
        ServiceConfig {
            workers: pool,
            queue_depth: 128,
        },
        20,
    )
    .await;
    let client = reqwest::Client::new();
    let submits = (0..100u64).map(|i| {
        let client = client.clone();
        let url = format!("{base}/v1/jobs");
        async move {
            let body = json!({ "instance": instance_value(i % 5), "options": { "rel_gap": 0.005 } });
            let r = client.post(url).json(&body).send().await.unwrap();
            assert_eq!(r.status(), StatusCode::ACCEPTED);
            r.json::<SubmitReply>().await.unwrap().id
        }
    });
    let ids: Vec<_> = futures_join_all(submits).await;
    assert_eq!(ids.iter().collect::<HashSet<_>>().len(), 100);

    let deadline = Instant::now() + Duration::from_secs(60);
    let mut max_running = 0;
    loop {
        let health: Value = client.get(format!("{base}/v1/health")).send().await.unwrap().json().await.unwrap();
        max_running = max_running.max(health["running"].as_u64().unwrap() as usize);
        let mut terminal = 0;
        for id in &ids {
            let info: JobInfo = client
                .get(format!("{base}/v1/jobs/{id}"))
                .send()
                .await
                .unwrap()
                .json()
                .await
                .unwrap();
            terminal += info.status.is_terminal() as usize;
        }
        if terminal == ids.len() {
            break;
        }
        assert!(Instant::now() < deadline, "jobs did not finish");
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
    assert!(max_running <= pool);
    assert!(svc.stats().peak_running <= pool);

    for (i, id) in ids.iter().enumerate() {
        let r = client.get(format!("{base}/v1/jobs/{id}/solution")).send().await.unwrap();
        assert_eq!(r.status(), StatusCode::OK);
        let doc: SolutionDocument = r.json().await.unwrap();
        let inst = parse_instance(&serialize_instance(&synth_instance(2, 1, 0, 3, i as u64 % 5).unwrap())).unwrap();
        let model = compile(&inst).unwrap();
        let (z, y) = doc.to_vectors(&inst, &model).unwrap();
        let e = model.evaluate(&z, &y).unwrap();
        assert!(e.residuals.max_block() <= 1e-6 && e.residuals.integrality <= 1e-6);
    }
}

async fn futures_join_all<F: std::future::Future<Output = T> + Send + 'static, T: Send + 'static>(
    futs: impl Iterator<Item = F>,
) -> Vec<T> {
    let handles: Vec<_> = futs.map(tokio::spawn).collect();
    let mut out = Vec::with_capacity(handles.len());
    for h in handles {
        out.push(h.await.unwrap());
    }
    out
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn error_bodies_follow_schema() {
    let (base, _svc) = start(ServiceConfig::default(), 200).await;
    let client = reqwest::Client::new();

    let r = client.get(format!("{base}/v1/health")).send().await.unwrap();
    assert_eq!(r.status(), StatusCode::OK);
    assert_eq!(r.json::<Value>().await.unwrap()["status"], "ok");

    let r = client.post(format!("{base}/v1/jobs")).body("not json").send().await.unwrap();
    assert_eq!(r.status(), StatusCode::BAD_REQUEST);
    assert_eq!(r.json::<ErrorBody>().await.unwrap().error, "schema");

    let mut inst = instance_value(1);
    inst["generators"][0]["min_up"] = json!(0);
    let r = client
        .post(format!("{base}/v1/jobs"))
        .json(&json!({ "instance": inst }))
        .send()
        .await
        .unwrap();
    assert_eq!(r.status(), StatusCode::BAD_REQUEST);
    let body: ErrorBody = r.json().await.unwrap();
    assert_eq!(body.error, "validation");
    assert!(body.detail.to_string().contains("generators[0].min_up"));

    let unknown = uuid::Uuid::new_v4();
    for url in [format!("{base}/v1/jobs/{unknown}"), format!("{base}/v1/jobs/{unknown}/solution"), format!("{base}/v1/jobs/garbage")] {
        let r = client.get(url).send().await.unwrap();
        assert_eq!(r.status(), StatusCode::NOT_FOUND);
        assert_eq!(r.json::<ErrorBody>().await.unwrap().error, "unknown_job");
    }

    let id = client
        .post(format!("{base}/v1/jobs"))
        .json(&json!({ "instance": instance_value(2) }))
        .send()
        .await
        .unwrap()
        .json::<SubmitReply>()
        .await
        .unwrap()
        .id;
    let r = client.get(format!("{base}/v1/jobs/{id}/solution")).send().await.unwrap();
    assert_eq!(r.status(), StatusCode::CONFLICT);
    assert_eq!(r.json::<ErrorBody>().await.unwrap().error, "not_ready");

    let r = client.delete(format!("{base}/v1/jobs/{id}")).send().await.unwrap();
    assert_eq!(r.status(), StatusCode::OK);
    let info: JobInfo = r.json().await.unwrap();
    assert_eq!(info.id, id);
}
