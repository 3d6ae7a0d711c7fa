//! HTTP service for sequential expert review.
//!
//! The service loads one index artifact at startup and keeps it read-only.
//! Every query opens a review session that presents candidates one at a
//! time, records a verdict on each before moving on, and can re-rank from
//! the accepted authors' articles. Errors are JSON bodies of the form
//! `{"code": ..., "message": ...}` with codes from [`ErrorCode`].

pub mod api;
pub mod config;
pub mod error;
pub mod sessions;

use std::future::Future;
use std::sync::Arc;

use expertfind_core::textmodel::load_embeddings;
use expertfind_core::{Engine, FeedbackLog};

pub use api::{router, AppState, QueryDefaults};
pub use config::ServiceConfig;
pub use error::{ApiError, ErrorBody, ErrorCode, ServiceError};
pub use sessions::SessionStore;

/// Reads the artifact and, when configured, the embeddings it was built
/// with. Fails if the configured default regime cannot be served.
pub fn load_engine(config: &ServiceConfig) -> Result<Engine, ServiceError> {
    let store = match &config.embeddings {
        Some(path) => {
            let (store, warnings) = load_embeddings(path).map_err(ServiceError::Load)?;
            for w in &warnings {
                tracing::warn!(?w, "embedding file");
            }
            Some(store)
        }
        None => None,
    };
    let engine = Engine::load(&config.index, store).map_err(ServiceError::Load)?;
    match config.regime {
        Some(regime) if !engine.supports(regime) => Err(ServiceError::Config(format!(
            "regime {regime} is not available from {}",
            config.index.display()
        ))),
        _ if engine.default_regime().is_none() => Err(ServiceError::Config(format!(
            "{} holds no servable representation",
            config.index.display()
        ))),
        _ => Ok(engine),
    }
}

impl QueryDefaults {
    pub fn from_config(config: &ServiceConfig) -> Self {
        Self {
            regime: config.regime,
            fusion: config.fusion,
            top_k: config.top_k,
            prune_candidates: config.prune_candidates,
        }
    }
}

/// Binds, then serves while the index loads in the background. Requests
/// that need the index get 503 until loading finishes. Returns when
/// `shutdown` resolves, or with the load error if loading fails.
pub async fn serve(
    config: ServiceConfig,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServiceError> {
    config.validate()?;
    let log = match &config.feedback_log {
        Some(path) => Some(FeedbackLog::open(path).map_err(ServiceError::Load)?),
        None => None,
    };
    let listener = tokio::net::TcpListener::bind(config.listen)
        .await
        .map_err(|source| ServiceError::Bind {
            addr: config.listen,
            source,
        })?;
    let state = AppState::new(
        QueryDefaults::from_config(&config),
        SessionStore::new(config.session_ttl()),
        log,
    );
    tracing::info!(addr = %config.listen, index = %config.index.display(), "listening");

    let (fail_tx, fail_rx) = tokio::sync::oneshot::channel();
    {
        let state = state.clone();
        tokio::spawn(async move {
            let loaded = tokio::task::spawn_blocking(move || load_engine(&config)).await;
            match loaded {
                Ok(Ok(engine)) => {
                    tracing::info!(
                        docs = engine.index().num_docs(),
                        authors = engine.index().num_authors(),
                        "index loaded"
                    );
                    state.install(engine);
                }
                Ok(Err(err)) => {
                    let _ = fail_tx.send(err);
                }
                Err(join) => {
                    let _ =
                        fail_tx.send(ServiceError::Config(format!("index loader failed: {join}")));
                }
            }
        });
    }

    let failure = Arc::new(parking_lot::Mutex::new(None));
    let stop = {
        let failure = Arc::clone(&failure);
        async move {
            tokio::select! {
                _ = shutdown => {}
                Ok(err) = fail_rx => *failure.lock() = Some(err),
            }
        }
    };
    axum::serve(listener, router(state))
        .with_graceful_shutdown(stop)
        .await
        .map_err(ServiceError::Serve)?;
    let failed = failure.lock().take();
    match failed {
        Some(err) => Err(err),
        None => Ok(()),
    }
}
