//! HTTP simulation sessions over DCR graphs.
//!
//! Each session owns a graph and a marking. Clients load a model with
//! `POST /graphs`, then query and drive it under `/sessions/{id}`. Mutations
//! on one session are serialized; a rejected request (409) leaves the
//! session untouched.

mod api;
mod session;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::routing::{get, post};
use axum::Router;
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

pub use session::{HistoryEntry, Session, Store};

#[derive(Debug, Clone)]
pub struct Config {
    pub cors: bool,
    pub idle_ttl: Duration,
    /// Directory of static assets served for paths no endpoint claims.
    pub static_dir: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            cors: false,
            idle_ttl: Duration::from_secs(3600),
            static_dir: None,
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<Store>,
}

pub fn router(config: &Config) -> Router {
    let state = AppState {
        store: Arc::new(Store::new(config.idle_ttl)),
    };
    router_with_state(config, state)
}

pub fn router_with_state(config: &Config, state: AppState) -> Router {
    let mut app = Router::new()
        .route("/graphs", post(api::create_graph))
        .route("/patterns", get(api::list_patterns))
        .route("/patterns/{name}", get(api::get_pattern))
        .route("/sessions/{id}", get(api::get_session))
        .route("/sessions/{id}/enabled", get(api::get_enabled))
        .route("/sessions/{id}/execute", post(api::post_execute))
        .route("/sessions/{id}/advance", post(api::post_advance))
        .route("/sessions/{id}/reset", post(api::post_reset))
        .route("/sessions/{id}/accepting", get(api::get_accepting))
        .route("/sessions/{id}/export.dot", get(api::get_dot))
        .route("/sessions/{id}/trace.jsonl", get(api::get_trace))
        .route("/sessions/{id}/events/stream", get(api::get_stream))
        .with_state(state);
    if let Some(dir) = &config.static_dir {
        app = app.fallback_service(ServeDir::new(dir));
    }
    if config.cors {
        app = app.layer(CorsLayer::permissive());
    }
    app
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(addr: SocketAddr, config: Config) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    serve_on(listener, config).await
}

pub async fn serve_on(listener: tokio::net::TcpListener, config: Config) -> std::io::Result<()> {
    let state = AppState {
        store: Arc::new(Store::new(config.idle_ttl)),
    };
    let sweeper = state.store.clone();
    let period = config.idle_ttl.min(Duration::from_secs(60)).max(Duration::from_millis(100));
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(period);
        loop {
            tick.tick().await;
            sweeper.evict_idle();
        }
    });
    axum::serve(listener, router_with_state(&config, state)).await
}
