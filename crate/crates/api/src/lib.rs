//! Read-only HTTP/JSON service over an immutable catalog snapshot.
//!
//! Endpoints:
//! - `POST /query` runs the selection pipeline (`?limit=N` caps result arrays)
//! - `GET /schema` lists dimensions, senses and observed fixed-attribute values
//! - `GET /catalog/stats` reports the service count and per-dimension extrema
//!
//! CORS is permissive so a locally served UI can call the API.

mod error;

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query as UrlQuery, State};
use axum::http::header::CONTENT_TYPE;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use skyfilter_core::pipeline::{self, ElectreOverrides, Importance, Query};
use skyfilter_core::{Catalog, DimensionSpec};
use tokio::net::TcpListener;
use tower_http::cors::CorsLayer;

pub use error::{ApiError, ErrorCode};

pub struct AppState {
    pub catalog: Catalog,
    /// Deployment-level thresholds, applied below per-query overrides.
    pub thresholds: Option<ElectreOverrides>,
}

impl AppState {
    pub fn new(catalog: Catalog) -> Self {
        AppState {
            catalog,
            thresholds: None,
        }
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/query", post(query))
        .route("/schema", get(schema))
        .route("/catalog/stats", get(stats))
        .fallback(not_found)
        .method_not_allowed_fallback(not_found)
        .layer(CorsLayer::permissive())
        .with_state(state)
}

/// Serves until the process is interrupted.
pub async fn serve(listener: TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

pub async fn bind(addr: SocketAddr) -> std::io::Result<TcpListener> {
    TcpListener::bind(addr).await
}

#[derive(Debug, Deserialize)]
struct Limit {
    limit: Option<usize>,
}

async fn query(
    State(state): State<Arc<AppState>>,
    UrlQuery(limit): UrlQuery<Limit>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let query = parse_query(&body)?;
    let result = tokio::task::spawn_blocking(move || {
        pipeline::run_query_with(&state.catalog, &query, state.thresholds.as_ref())
    })
    .await
    .map_err(|e| ApiError::new(ErrorCode::Internal, e.to_string()))??;
    let mut result = result;
    if let Some(n) = limit.limit {
        result.truncate(n);
    }
    Ok(([(CONTENT_TYPE, "application/json")], result.to_json()).into_response())
}

/// 400 for malformed JSON, 422 (with the offending field path) for JSON
/// that does not describe a query.
pub fn parse_query(body: &[u8]) -> Result<Query, ApiError> {
    let value: serde_json::Value =
        serde_json::from_slice(body).map_err(|e| ApiError::new(ErrorCode::MalformedJson, e.to_string()))?;
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        ApiError::new(ErrorCode::InvalidQuery, e.into_inner().to_string()).at(path)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedAttributeValues {
    pub name: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaResponse {
    pub dimensions: Vec<DimensionSpec>,
    pub fixed_attributes: Vec<FixedAttributeValues>,
    pub importance_levels: Vec<Importance>,
}

impl SchemaResponse {
    pub fn of(catalog: &Catalog) -> Self {
        let mut observed = catalog.observed_values();
        SchemaResponse {
            dimensions: catalog.schema().dimensions.clone(),
            fixed_attributes: catalog
                .schema()
                .fixed_attributes
                .iter()
                .map(|a| FixedAttributeValues {
                    name: a.name.clone(),
                    values: observed.remove(&a.name).unwrap_or_default(),
                })
                .collect(),
            importance_levels: Importance::ALL.to_vec(),
        }
    }
}

async fn schema(State(state): State<Arc<AppState>>) -> Json<SchemaResponse> {
    Json(SchemaResponse::of(&state.catalog))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionStats {
    pub id: String,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogStats {
    pub count: usize,
    pub dimensions: Vec<DimensionStats>,
}

impl CatalogStats {
    pub fn of(catalog: &Catalog) -> Self {
        let dimensions = catalog
            .schema()
            .dimensions
            .iter()
            .map(|d| {
                let values = catalog.services().iter().map(|s| s.dims[&d.id]);
                DimensionStats {
                    id: d.id.clone(),
                    min: values.clone().reduce(f64::min),
                    max: values.reduce(f64::max),
                }
            })
            .collect();
        CatalogStats {
            count: catalog.len(),
            dimensions,
        }
    }
}

async fn stats(State(state): State<Arc<AppState>>) -> Json<CatalogStats> {
    Json(CatalogStats::of(&state.catalog))
}

async fn not_found() -> ApiError {
    ApiError::new(ErrorCode::NotFound, "no such endpoint")
}
