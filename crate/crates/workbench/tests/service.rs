mod common;

use std::sync::Arc;

use common::*;
use numeracy_workbench::service::router;
use numeracy_workbench::Workbench;

async fn open(app: &axum::Router) -> String {
    let (status, body) = call(app, "POST", "/sessions", r#"{"student_ref":"c","activity_id":"straw-transcoding"}"#.into()).await;
    assert_eq!(status, 200);
    serde_json::from_str::<serde_json::Value>(&body).unwrap()["state"]["session_id"]
        .as_str()
        .unwrap()
        .to_string()
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn racing_events_for_one_session_are_serialized() {
    let app = router(Arc::new(Workbench::in_memory()));
    let id = open(&app).await;
    let path = format!("/sessions/{id}/events");
    let tasks: Vec<_> = (0..16)
        .map(|_| {
            let (app, path) = (app.clone(), path.clone());
            tokio::spawn(async move {
                call(&app, "POST", &path, r#"{"seq":2,"kind":"board_move","payload":{"kind":"add_loose","count":1}}"#.into())
                    .await
                    .0
            })
        })
        .collect();
    let mut statuses = Vec::new();
    for t in tasks {
        statuses.push(t.await.unwrap());
    }
    assert_eq!(statuses.iter().filter(|s| **s == 200).count(), 1);
    assert_eq!(statuses.iter().filter(|s| **s == 409).count(), 15);
    let (_, body) = call(&app, "GET", &format!("/sessions/{id}"), String::new()).await;
    let v: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["state"]["board_value"], 1);
    assert_eq!(v["events"], 2);
}

#[tokio::test]
async fn sessions_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let id = {
        let app = router(Arc::new(Workbench::with_data_dir(dir.path()).unwrap()));
        let id = open(&app).await;
        for (seq, m) in [(2, r#"{"kind":"add_loose","count":23}"#), (3, r#"{"kind":"bundle_ten"}"#)] {
            let body = format!(r#"{{"seq":{seq},"kind":"board_move","payload":{m}}}"#);
            assert_eq!(call(&app, "POST", &format!("/sessions/{id}/events"), body).await.0, 200);
        }
        // a rejected event leaves no trace in the log
        let bad = r#"{"seq":4,"kind":"board_move","payload":{"kind":"bundle_hundred"}}"#;
        assert_eq!(call(&app, "POST", &format!("/sessions/{id}/events"), bad.into()).await.0, 422);
        id
    };
    let app = router(Arc::new(Workbench::with_data_dir(dir.path()).unwrap()));
    let (status, body) = call(&app, "GET", &format!("/sessions/{id}"), String::new()).await;
    assert_eq!(status, 200);
    let v: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["state"]["board"], serde_json::json!({"loose": 13, "tens": 1, "hundreds": 0}));
    assert_eq!(v["events"], 3);
}

#[tokio::test]
async fn path_ids_never_escape_the_store() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(Arc::new(Workbench::with_data_dir(dir.path()).unwrap()));
    for id in ["..%2F..%2Fetc%2Fpasswd", "abc.jsonl", "ABCDEFG"] {
        let (status, body) = call(&app, "GET", &format!("/sessions/{id}"), String::new()).await;
        assert_eq!(status, 404, "{id}");
        assert!(body.contains("NotFound"));
    }
}

#[tokio::test]
async fn stateless_endpoints_run_in_parallel() {
    let app = router(Arc::new(Workbench::in_memory()));
    let tasks: Vec<_> = (1..=10u32)
        .flat_map(|r| (1..=10u32).map(move |c| (r, c)))
        .map(|(r, c)| {
            let app = app.clone();
            tokio::spawn(async move {
                let (status, body) = call(&app, "POST", "/derive", format!(r#"{{"rect":[{r},{c}],"ghost":true}}"#)).await;
                (status, serde_json::from_str::<serde_json::Value>(&body).unwrap()["value"].clone(), r * c)
            })
        })
        .collect();
    for t in tasks {
        let (status, value, area) = t.await.unwrap();
        assert_eq!(status, 200);
        assert_eq!(value, area);
    }
}
