//! HTTP front end for `screening-core`: stateless calculator endpoints and
//! stateful sequential-testing sessions.

pub mod api;
pub mod config;
pub mod error;
pub mod openapi;
pub mod session;

use std::sync::Arc;

pub use api::{router, AppState};
pub use config::{ConfigError, ServiceConfig};
pub use session::{SessionStore, SessionView};

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Journal(#[from] session::JournalError),
    #[error("binding {addr}: {source}")]
    Bind {
        addr: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn build_state(config: &ServiceConfig) -> Result<Arc<AppState>, session::JournalError> {
    let sessions = match &config.journal_path {
        Some(path) => SessionStore::with_journal(config.session_ttl(), path)?,
        None => SessionStore::in_memory(config.session_ttl()),
    };
    Ok(Arc::new(AppState { sessions }))
}

/// Serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> Result<(), ServeError> {
    let state = build_state(&config)?;
    let app = router(state, &config);
    let addr = format!("{}:{}", config.bind, config.port);
    let listener = tokio::net::TcpListener::bind(&addr)
        .await
        .map_err(|source| ServeError::Bind {
            addr: addr.clone(),
            source,
        })?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
