//! Routes and handlers of the `/api` JSON interface.

use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::routing::{get, post};
use axum::{Json, Router};
use expertfind_core::feedback::{CandidateProfile, NextCandidate};
use expertfind_core::{
    Decision, Engine, FeedbackLog, FusionMethod, PruneCandidates, RankingConfig, Regime,
    ReviewSession,
};
use serde::{Deserialize, Serialize};

use crate::error::{ApiError, ErrorCode};
use crate::sessions::{SessionSlot, SessionStore};

/// Ranking settings applied when a query does not override them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryDefaults {
    pub regime: Option<Regime>,
    pub fusion: FusionMethod,
    pub top_k: usize,
    pub prune_candidates: PruneCandidates,
}

impl Default for QueryDefaults {
    fn default() -> Self {
        Self {
            regime: None,
            fusion: FusionMethod::ReciprocalRank,
            top_k: expertfind_core::expertrank::DEFAULT_TOP_K,
            prune_candidates: PruneCandidates::default(),
        }
    }
}

struct Shared {
    engine: OnceLock<Arc<Engine>>,
    defaults: QueryDefaults,
    sessions: SessionStore,
    log: Option<FeedbackLog>,
}

/// State shared by all handlers. The engine slot starts empty and is filled
/// once; until then every index-backed endpoint answers 503.
#[derive(Clone)]
pub struct AppState {
    shared: Arc<Shared>,
}

impl AppState {
    pub fn new(defaults: QueryDefaults, sessions: SessionStore, log: Option<FeedbackLog>) -> Self {
        Self {
            shared: Arc::new(Shared {
                engine: OnceLock::new(),
                defaults,
                sessions,
                log,
            }),
        }
    }

    /// State with `engine` already installed.
    pub fn loaded(
        engine: Engine,
        defaults: QueryDefaults,
        sessions: SessionStore,
        log: Option<FeedbackLog>,
    ) -> Self {
        let state = Self::new(defaults, sessions, log);
        state.install(engine);
        state
    }

    /// Installs the engine. Later calls are ignored.
    pub fn install(&self, engine: Engine) {
        if self.shared.engine.set(Arc::new(engine)).is_err() {
            tracing::warn!("index already loaded; ignoring second install");
        }
    }

    pub fn engine(&self) -> Option<&Arc<Engine>> {
        self.shared.engine.get()
    }

    pub fn sessions(&self) -> &SessionStore {
        &self.shared.sessions
    }

    fn require_engine(&self) -> Result<Arc<Engine>, ApiError> {
        self.engine()
            .cloned()
            .ok_or_else(|| ApiError::new(ErrorCode::IndexNotLoaded, "the index is still loading"))
    }

    fn session(&self, id: &str) -> Result<Arc<SessionSlot>, ApiError> {
        self.shared
            .sessions
            .get(id)
            .ok_or_else(|| ApiError::session_not_found(id))
    }

    fn default_regime(&self, engine: &Engine) -> Result<Regime, ApiError> {
        self.shared
            .defaults
            .regime
            .or_else(|| engine.default_regime())
            .ok_or_else(|| ApiError::new(ErrorCode::BadConfig, "the index supports no regime"))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/healthz", get(health))
        .route("/api/query", post(submit_query))
        .route("/api/session/{id}/candidate", get(current_candidate))
        .route("/api/session/{id}/verdict", post(submit_verdict))
        .route("/api/session/{id}/recompute", post(recompute))
        .with_state(state)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub index_docs: usize,
    pub index_authors: usize,
    pub regime: Regime,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct QueryRequest {
    #[serde(default)]
    pub title: String,
    #[serde(default, rename = "abstract")]
    pub abstract_text: String,
    #[serde(default)]
    pub regime: Option<String>,
    #[serde(default)]
    pub fusion: Option<String>,
}

/// Session head returned by query submission and recompute. `candidate` is
/// null only when a recompute leaves no unjudged author.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub total_candidates: usize,
    pub candidate: Option<CandidateProfile>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct VerdictRequest {
    pub author_id: String,
    pub decision: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionSummary {
    pub accepted: Vec<String>,
    pub rejected: Vec<String>,
    pub recompute_epoch: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Next {
    Candidate(CandidateProfile),
    Complete(CompletionSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictResponse {
    pub next: Next,
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ApiError::new(ErrorCode::BadRequest, e.body_text()))
}

/// Runs CPU-bound work off the async workers.
async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f).await.map_err(|e| {
        tracing::error!(error = %e, "worker task failed");
        ApiError::new(ErrorCode::Internal, "worker task failed")
    })?
}

fn session_view(session: &ReviewSession, engine: &Engine) -> Result<SessionView, ApiError> {
    Ok(SessionView {
        session_id: session.id().to_owned(),
        total_candidates: session.candidates().len(),
        candidate: session.candidate_profile(engine.index())?,
    })
}

fn completion(session: &ReviewSession, engine: &Engine) -> CompletionSummary {
    let mut summary = CompletionSummary {
        accepted: Vec::new(),
        rejected: Vec::new(),
        recompute_epoch: session.recompute_count(),
    };
    for v in session.verdicts() {
        let id = engine.index().author(v.author).author_id.clone();
        match v.decision {
            Decision::Accept => summary.accepted.push(id),
            Decision::Reject => summary.rejected.push(id),
        }
    }
    summary
}

async fn health(State(state): State<AppState>) -> Result<Json<Health>, ApiError> {
    let engine = state.require_engine()?;
    Ok(Json(Health {
        status: "ok".into(),
        index_docs: engine.index().num_docs(),
        index_authors: engine.index().num_authors(),
        regime: state.default_regime(&engine)?,
    }))
}

async fn submit_query(
    State(state): State<AppState>,
    payload: Result<Json<QueryRequest>, JsonRejection>,
) -> Result<Json<SessionView>, ApiError> {
    let request = body(payload)?;
    let engine = state.require_engine()?;
    let defaults = state.shared.defaults;
    let regime = match request.regime.as_deref() {
        Some(r) => Regime::from_str(r).map_err(|e| ApiError::new(ErrorCode::BadConfig, e))?,
        None => state.default_regime(&engine)?,
    };
    let fusion = match request.fusion.as_deref() {
        Some(f) => FusionMethod::from_str(f).map_err(|e| ApiError::new(ErrorCode::BadConfig, e))?,
        None => defaults.fusion,
    };
    if !engine.supports(regime) {
        return Err(ApiError::new(
            ErrorCode::BadConfig,
            format!("regime {regime} is not available in the loaded index"),
        ));
    }
    let mut config = RankingConfig::new(regime, fusion);
    config.top_k = defaults.top_k;
    config.scoring.prune_candidates = defaults.prune_candidates;

    let view = blocking(move || {
        let (text, representation, scored) =
            engine.query(&request.title, &request.abstract_text, &config)?;
        let session =
            ReviewSession::open(SessionStore::new_id(), text, representation, scored, config)?;
        let view = session_view(&session, &engine)?;
        state.sessions().insert(session);
        tracing::info!(session = %view.session_id, %regime, %fusion, "session opened");
        Ok(view)
    })
    .await?;
    Ok(Json(view))
}

async fn current_candidate(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<CandidateProfile>, ApiError> {
    let engine = state.require_engine()?;
    let slot = state.session(&id)?;
    let session = slot.session.lock();
    match session.candidate_profile(engine.index())? {
        Some(profile) => Ok(Json(profile)),
        None => Err(expertfind_core::Error::SessionComplete.into()),
    }
}

async fn submit_verdict(
    State(state): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<VerdictRequest>, JsonRejection>,
) -> Result<Json<VerdictResponse>, ApiError> {
    let engine = state.require_engine()?;
    let slot = state.session(&id)?;
    let request = body(payload)?;
    let decision = Decision::from_str(&request.decision)
        .map_err(|e| ApiError::new(ErrorCode::BadDecision, e))?;

    let response = blocking(move || {
        let mut session = slot.session.lock();
        let author = match engine.index().author_index(&request.author_id) {
            Some(a) => a,
            None if session.is_complete() => {
                return Err(expertfind_core::Error::SessionComplete.into())
            }
            None => {
                return Err(ApiError::new(
                    ErrorCode::OutOfOrder,
                    format!("{:?} is not the current candidate", request.author_id),
                ))
            }
        };
        session.record_verdict(engine.index(), author, decision, state.shared.log.as_ref())?;
        let next = match session.next_candidate()? {
            NextCandidate::Candidate { .. } => Next::Candidate(
                session
                    .candidate_profile(engine.index())?
                    .expect("a candidate is pending"),
            ),
            NextCandidate::Complete => Next::Complete(completion(&session, &engine)),
        };
        Ok(VerdictResponse { next })
    })
    .await?;
    Ok(Json(response))
}

async fn recompute(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<SessionView>, ApiError> {
    let engine = state.require_engine()?;
    let slot = state.session(&id)?;
    let view = blocking(move || {
        let mut session = slot.session.lock();
        session.recompute(&engine)?;
        tracing::info!(
            session = %session.id(),
            epoch = session.recompute_count(),
            candidates = session.candidates().len(),
            "session recomputed"
        );
        session_view(&session, &engine)
    })
    .await?;
    Ok(Json(view))
}
