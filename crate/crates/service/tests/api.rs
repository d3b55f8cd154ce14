use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use smm_core::report::render_json;
use smm_core::store::Store;
use smm_core::{evaluate, parse_assessment, parse_model, Method};
use smm_service::{router, AppState, ErrorBody, DEFAULT_BODY_LIMIT};
use smm_testkit::read_fixture;

struct Harness {
    _dir: tempfile::TempDir,
    store: Arc<Store>,
    app: Router,
}

fn harness() -> Harness {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(Store::open(dir.path()).unwrap());
    for (m, a) in [
        ("reference-smm.smmdl", "team-alpha.smma"),
        ("two-params.smmdl", "two-params-zero.smma"),
    ] {
        store.put_model(&parse_model(&read_fixture(m)).unwrap(), 0).unwrap();
        store
            .put_assessment(&parse_assessment(&read_fixture(a)).unwrap(), 0)
            .unwrap();
    }
    let app = router(
        AppState {
            store: store.clone(),
            exhaustive_threshold: 16,
        },
        DEFAULT_BODY_LIMIT,
    );
    Harness { _dir: dir, store, app }
}

struct Reply {
    status: StatusCode,
    etag: Option<String>,
    body: String,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_str(&self.body).unwrap_or_else(|e| panic!("{e}: {}", self.body))
    }

    fn error(&self) -> ErrorBody {
        serde_json::from_str(&self.body).unwrap()
    }
}

async fn call(app: &Router, method: &str, uri: &str, if_match: Option<&str>, body: Option<Value>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(rev) = if_match {
        req = req.header(header::IF_MATCH, rev);
    }
    let req = match body {
        Some(b) => req
            .header(header::CONTENT_TYPE, "application/json")
            .body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let etag = res
        .headers()
        .get(header::ETAG)
        .map(|v| v.to_str().unwrap().to_owned());
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    Reply {
        status,
        etag,
        body: String::from_utf8(bytes.to_vec()).unwrap(),
    }
}

const ALPHA: &str = "team-alpha-2024-03";

fn fixture_evaluation(method: Method) -> String {
    let model = parse_model(&read_fixture("reference-smm.smmdl")).unwrap();
    let assessment = parse_assessment(&read_fixture("team-alpha.smma")).unwrap();
    render_json(&evaluate(&model, &assessment).unwrap().for_method(method))
}

#[tokio::test]
async fn evaluation_body_is_render_json() {
    let h = harness();
    for (query, method) in [
        ("", Method::Both),
        ("?method=compensatory", Method::Compensatory),
        ("?method=two-tier", Method::TwoTier),
        ("?method=both", Method::Both),
    ] {
        let r = call(&h.app, "GET", &format!("/api/assessments/{ALPHA}/evaluation{query}"), None, None).await;
        assert_eq!(r.status, StatusCode::OK);
        assert_eq!(r.body, fixture_evaluation(method), "{query}");
    }
    let r = call(&h.app, "GET", &format!("/api/assessments/{ALPHA}/evaluation?method=staged"), None, None).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn list_and_get() {
    let h = harness();
    let r = call(&h.app, "GET", "/api/models", None, None).await;
    assert_eq!(
        r.json(),
        json!([{"id": "reference-smm", "revision": 1}, {"id": "two-params", "revision": 1}])
    );
    let r = call(&h.app, "GET", "/api/models/reference-smm", None, None).await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.etag.as_deref(), Some("\"1\""));
    assert_eq!(r.json()["kpas"].as_array().unwrap().len(), 5);

    let r = call(&h.app, "GET", "/api/assessments", None, None).await;
    assert_eq!(r.json().as_array().unwrap().len(), 2);
    let r = call(&h.app, "GET", &format!("/api/assessments/{ALPHA}"), None, None).await;
    assert_eq!(r.json()["scores"]["REQ.ELICIT"]["level"], 2);

    let r = call(&h.app, "GET", "/api/models/nope", None, None).await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    assert_eq!(r.error().code, "NOT_FOUND");
}

#[tokio::test]
async fn put_round_trip_and_revisions() {
    let h = harness();
    let model = call(&h.app, "GET", "/api/models/two-params", None, None).await.json();

    let r = call(&h.app, "PUT", "/api/models/two-params", None, Some(model.clone())).await;
    assert_eq!(r.status, StatusCode::PRECONDITION_REQUIRED);
    assert_eq!(r.error().code, "REVISION_REQUIRED");

    let mut renamed = model.clone();
    renamed["name"] = json!("Renamed");
    let r = call(&h.app, "PUT", "/api/models/two-params", Some("\"1\""), Some(renamed.clone())).await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.json(), json!({"id": "two-params", "revision": 2}));
    assert_eq!(r.etag.as_deref(), Some("\"2\""));

    // repeating the same request is idempotent
    let r = call(&h.app, "PUT", "/api/models/two-params", Some("1"), Some(renamed.clone())).await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.json()["revision"], 2);

    let r = call(&h.app, "PUT", "/api/models/two-params", Some("1"), Some(model.clone())).await;
    assert_eq!(r.status, StatusCode::CONFLICT);
    assert_eq!(r.error().code, "CONFLICT");

    let r = call(&h.app, "GET", "/api/models/two-params", None, None).await;
    assert_eq!(r.json(), renamed);

    let mut copy = model.clone();
    copy["id"] = json!("copy");
    let r = call(&h.app, "PUT", "/api/models/copy", Some("0"), Some(copy)).await;
    assert_eq!(r.status, StatusCode::CREATED);

    let r = call(&h.app, "PUT", "/api/models/other", Some("0"), Some(model)).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(r.error().code, "ID_MISMATCH");
}

#[tokio::test]
async fn invalid_bodies() {
    let h = harness();
    let mut model = call(&h.app, "GET", "/api/models/two-params", None, None).await.json();
    model["parameters"]
        .as_array_mut()
        .unwrap()
        .push(json!({"id": "C", "description": "c", "category": "team_quality"}));
    let r = call(&h.app, "PUT", "/api/models/two-params", Some("1"), Some(model)).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY, "{}", r.body);
    let e = r.error();
    assert_eq!(e.code, "VALIDATION_FAILED");
    assert_eq!(e.diagnostics[0].rule_code, "ORPHAN_PARAM");

    let r = call(&h.app, "PUT", "/api/models/two-params", Some("1"), Some(json!({"id": 3}))).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(r.error().code, "MALFORMED_BODY");

    let r = call(&h.app, "PUT", "/api/models/two-params", Some("one"), Some(json!({}))).await;
    assert_eq!(r.error().code, "BAD_REVISION");
}

#[tokio::test]
async fn patch_then_evaluation_reflects_change() {
    let h = harness();
    let before = call(&h.app, "GET", "/api/assessments/two-params-zero/evaluation", None, None).await.json();
    assert_eq!(before["pa_evaluations"][0]["compensatory_score"], 0.0);

    let r = call(
        &h.app,
        "PATCH",
        "/api/assessments/two-params-zero/scores",
        None,
        Some(json!({"A": {"level": 2, "note": "done"}})),
    )
    .await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.json()["revision"], 2);

    let after = call(&h.app, "GET", "/api/assessments/two-params-zero/evaluation", None, None).await.json();
    assert_eq!(after["pa_evaluations"][0]["compensatory_score"], 50.0);
    assert_eq!(after["pa_evaluations"][0]["compensatory_level"], "intermediate");
    let stored = h.store.get_assessment("two-params-zero").unwrap().value;
    assert_eq!(stored.scores["A"].note.as_deref(), Some("done"));

    // null removes a score
    call(&h.app, "PATCH", "/api/assessments/two-params-zero/scores", None, Some(json!({"B": null}))).await;
    let stored = h.store.get_assessment("two-params-zero").unwrap().value;
    assert!(!stored.scores.contains_key("B"));

    // stale If-Match
    let r = call(
        &h.app,
        "PATCH",
        "/api/assessments/two-params-zero/scores",
        Some("1"),
        Some(json!({"A": {"level": 1}})),
    )
    .await;
    assert_eq!(r.status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn patch_rejects_levels_outside_the_scale() {
    let h = harness();
    for bad in [json!(3), json!(-1), json!(1.5)] {
        let r = call(
            &h.app,
            "PATCH",
            "/api/assessments/two-params-zero/scores",
            None,
            Some(json!({"A": {"level": bad}})),
        )
        .await;
        assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY, "{bad}");
        assert_eq!(r.error().code, "SCORE_RANGE");
    }
    let r = call(
        &h.app,
        "PATCH",
        "/api/assessments/two-params-zero/scores",
        None,
        Some(json!({"NOPE": {"level": 1}})),
    )
    .await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.error().diagnostics[0].rule_code, "UNKNOWN_PARAM");
    assert_eq!(h.store.revision(smm_core::store::EntityKind::Assessment, "two-params-zero").unwrap(), 1);
}

#[tokio::test]
async fn what_if_is_pure() {
    let h = harness();
    let kind = smm_core::store::EntityKind::Assessment;
    let r = call(&h.app, "POST", &format!("/api/assessments/{ALPHA}/what-if"), None, Some(json!({"overrides": {}}))).await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.body, fixture_evaluation(Method::Both));

    let r = call(
        &h.app,
        "POST",
        &format!("/api/assessments/{ALPHA}/what-if"),
        None,
        Some(json!({"overrides": {"QA.METRICS": 2, "QA.ACCEPT": 2}, "method": "compensatory"})),
    )
    .await;
    assert_eq!(r.status, StatusCode::OK);
    let v = r.json();
    assert!(v["pa_evaluations"][0].get("two_tier_level").is_none());
    assert_eq!(h.store.revision(kind, ALPHA).unwrap(), 1);
    let stored = h.store.get_assessment(ALPHA).unwrap().value;
    assert!(!stored.scores.contains_key("QA.METRICS"));

    let r = call(
        &h.app,
        "POST",
        &format!("/api/assessments/{ALPHA}/what-if"),
        None,
        Some(json!({"overrides": {"NOPE": 2}})),
    )
    .await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.error().code, "UNKNOWN_PARAM");
}

#[tokio::test]
async fn plan_on_two_parameter_fixture() {
    let h = harness();
    let r = call(
        &h.app,
        "POST",
        "/api/assessments/two-params-zero/plan",
        None,
        Some(json!({"kpa_id": "K", "method": "compensatory", "target": "Intermediate"})),
    )
    .await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.body);
    let plan = r.json();
    assert_eq!(plan["steps"].as_array().unwrap().len(), 2);
    assert_eq!(plan["total_cost"], 2.0);
    assert_eq!(plan["exact"], true);
    assert_eq!(plan["achieved"], true);

    let r = call(
        &h.app,
        "POST",
        "/api/assessments/two-params-zero/plan",
        None,
        Some(json!({"kpa_id": "K", "method": "two-tier", "target": "advanced"})),
    )
    .await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.error().code, "TIER_MISSING");

    let r = call(
        &h.app,
        "POST",
        "/api/assessments/two-params-zero/plan",
        None,
        Some(json!({"kpa_id": "X", "target": "advanced"})),
    )
    .await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    assert_eq!(r.error().code, "UNKNOWN_KPA");
}

#[tokio::test]
async fn delete() {
    let h = harness();
    let r = call(&h.app, "DELETE", "/api/assessments/two-params-zero", Some("5"), None).await;
    assert_eq!(r.status, StatusCode::CONFLICT);
    let r = call(&h.app, "DELETE", "/api/assessments/two-params-zero", Some("1"), None).await;
    assert_eq!(r.status, StatusCode::NO_CONTENT);
    let r = call(&h.app, "GET", "/api/assessments/two-params-zero", None, None).await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    let r = call(&h.app, "GET", "/api/assessments/two-params-zero/evaluation", None, None).await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn body_limit() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(
        AppState {
            store: Arc::new(Store::open(dir.path()).unwrap()),
            exhaustive_threshold: 16,
        },
        64,
    );
    let big = json!({"id": "x".repeat(200)});
    let r = call(&app, "PUT", "/api/models/x", Some("0"), Some(big)).await;
    assert_eq!(r.status, StatusCode::PAYLOAD_TOO_LARGE);
}
