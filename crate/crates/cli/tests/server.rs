use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let resp = middom_cli::server::router().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

#[tokio::test]
async fn health() {
    let (status, body) = call("GET", "/api/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!({"status": "ok"}));
}

#[tokio::test]
async fn synthesize_matches_library() {
    let (status, body) = call("POST", "/api/synthesize", Some(json!({"n": 2, "tau": 0.5, "s0": -5.2}))).await;
    assert_eq!(status, StatusCode::OK);
    let expected = serde_json::to_value(middom::synthesize(2, 0.5, -5.2).unwrap()).unwrap();
    assert_eq!(body, expected);
}

#[tokio::test]
async fn roots_of_synthesized_system() {
    let qp = serde_json::to_value(middom::synthesize(2, 0.5, -5.2).unwrap().quasipolynomial()).unwrap();
    let rect = json!({"re_min": -30.0, "re_max": 0.0, "im_min": -40.0, "im_max": 40.0});
    let (status, body) = call("POST", "/api/roots", Some(json!({"qp": qp, "rect": rect}))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["rectangle"], rect);
    let roots = body["roots"].as_array().unwrap();
    assert!(roots.iter().any(|r| r["multiplicity"] == 4));
    let located: i64 = roots.iter().map(|r| r["multiplicity"].as_i64().unwrap()).sum();
    assert_eq!(body["total_count"].as_i64().unwrap(), located);
}

#[tokio::test]
async fn simulate_scenario() {
    let req = json!({"scenario": "wind_tunnel_row1", "t_end": 2.0});
    let (status, body) = call("POST", "/api/simulate", Some(req)).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["scenario"], "wind_tunnel_row1");
    assert!(body["closed_loop"]["y"].as_array().unwrap().len() > 100);
}

#[tokio::test]
async fn designs() {
    let (status, body) = call(
        "POST",
        "/api/design/wind-tunnel",
        Some(json!({"kappa": 1.964, "k_gain": -0.67036, "tau0": 0.33, "tau1": 0.70})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert!((body["s0"].as_f64().unwrap() + 4.041).abs() < 5e-4);

    let (status, body) = call(
        "POST",
        "/api/design/second-order",
        Some(json!({"zeta": 0.2, "omega": 6.0, "tau": 0.5})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert!((body["a0"].as_f64().unwrap() + 26.56).abs() < 1e-10);
}

#[tokio::test]
async fn errors_carry_exit_codes() {
    let (status, body) = call("POST", "/api/synthesize", Some(json!({"n": 0, "tau": 1.0, "s0": 0.0}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["exit_code"], 2);

    let (status, body) = call("POST", "/api/synthesize", Some(json!({"tau": 1.0}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body["error"].as_str().unwrap().contains("invalid JSON"));

    let (status, _) = call("POST", "/api/design/second-order", Some(json!({"zeta": 0.2, "omega": 6.0, "tau": -1.0}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let req = Request::builder().uri("/api/nothing").body(Body::empty()).unwrap();
    let resp = middom_cli::server::router().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::NOT_FOUND);
}
