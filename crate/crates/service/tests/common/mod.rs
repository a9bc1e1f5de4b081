#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use gasrotor_core::design::{reference_design, OracleSettings};
use gasrotor_core::rotor::serialize_rotor;
use gasrotor_core::surrogate::{
    generate_dataset, save_model, train_surrogate, Activation, BlockConfig, FeatureRanges, Hyperparameters,
    SurrogateModel, TrainingConfig,
};
use gasrotor_service::config::Config;
use gasrotor_service::server::{router, AppState};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

pub fn fast_config() -> Config {
    let mut c = Config::default();
    c.oracle.grid_n = 41;
    c
}

pub fn state(config: Config) -> Arc<AppState> {
    Arc::new(AppState::new(config).unwrap())
}

pub fn reference_request() -> Value {
    let d = reference_design();
    json!({
        "rotor": serde_json::from_str::<Value>(&serialize_rotor(&d.rotor)).unwrap(),
        "bearing": d.bearing,
        "operating": d.operating,
    })
}

pub async fn send(state: &Arc<AppState>, method: &str, uri: &str, body: Option<Vec<u8>>) -> (StatusCode, String, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, Body::from))
        .unwrap();
    let resp = router(state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let ctype = resp.headers().get("content-type").map_or(String::new(), |v| v.to_str().unwrap().to_string());
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, ctype, bytes)
}

pub async fn post_json(state: &Arc<AppState>, uri: &str, body: &Value) -> (StatusCode, Value) {
    let (s, _, b) = send(state, "POST", uri, Some(body.to_string().into_bytes())).await;
    (s, serde_json::from_slice(&b).unwrap())
}

pub async fn get_json(state: &Arc<AppState>, uri: &str) -> (StatusCode, Value) {
    let (s, _, b) = send(state, "GET", uri, None).await;
    (s, serde_json::from_slice(&b).unwrap())
}

/// Sixteen one-layer, four-unit blocks trained for three epochs.
pub fn tiny_model() -> SurrogateModel {
    let ranges = FeatureRanges::default();
    let data = generate_dataset(&ranges, 150, 3, &OracleSettings { grid_n: 41, ..OracleSettings::default() }).unwrap();
    let block = BlockConfig {
        hidden: vec![4],
        activation: Activation::Tanh,
        hyper: Hyperparameters { max_epochs: 3, ..Hyperparameters::default() },
    };
    let config = TrainingConfig { classifier: block.clone(), regressor: block, ..TrainingConfig::default() };
    train_surrogate(&data, &config, &ranges, 1).unwrap().0
}

pub fn write_tiny_model(path: &Path) -> SurrogateModel {
    let m = tiny_model();
    save_model(&m, path).unwrap();
    m
}
