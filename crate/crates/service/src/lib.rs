//! HTTP service for interactive preference sessions.
//!
//! A session asks the decision maker to compare two candidates at a time,
//! the new proposal (left) against the current best (right), until the
//! budget is spent. Every accepted answer is written to disk before it is
//! acknowledged, so a restarted server picks up where it left off.
//!
//! | method | path | body |
//! |---|---|---|
//! | POST | `/sessions` | [`CreateSession`] |
//! | GET | `/sessions/{id}/query` | |
//! | POST | `/sessions/{id}/preference` | [`SubmitPreference`] |
//! | GET | `/sessions/{id}/history` | |
//! | GET | `/sessions/{id}/best` | |
//! | DELETE | `/sessions/{id}` | |

pub mod api;
pub mod error;
pub mod store;

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use gmrs::gmrs::Observation;
use gmrs::{GmrsConfig, SessionState};

pub use api::{
    Answer, BestView, CreateSession, HistoryEntry, HistoryView, LabeledPoint, ProblemDescriptor, Progress, QueryView,
    SessionCreated, SubmitPreference,
};
pub use error::{ApiError, ErrorBody};
pub use store::{SessionRecord, Store};

type Shared = Arc<Store>;

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", delete(delete_session))
        .route("/sessions/{id}/query", get(get_query))
        .route("/sessions/{id}/preference", post(submit_preference))
        .route("/sessions/{id}/history", get(get_history))
        .route("/sessions/{id}/best", get(get_best))
        .with_state(store)
}

/// Serves until ctrl-c.
pub async fn serve(addr: SocketAddr, store: Arc<Store>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(store))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

/// Builds the optimizer configuration of a new session. Sessions are
/// preference sessions, so a conflicting `mode` is refused.
pub fn session_config(config: Option<serde_json::Value>) -> Result<GmrsConfig, ApiError> {
    let mut value = config.unwrap_or_else(|| serde_json::json!({}));
    let obj = value
        .as_object_mut()
        .ok_or_else(|| ApiError::validation("`config` must be an object"))?;
    match obj.get("mode") {
        None => {}
        Some(m) if m == "preference" => {}
        Some(m) => {
            return Err(ApiError::validation(format!(
                "sessions run in preference mode, got mode {m}"
            )))
        }
    }
    obj.insert("mode".into(), "preference".into());
    serde_json::from_value(value).map_err(|e| ApiError::validation(format!("invalid config: {e}")))
}

fn progress(record: &SessionRecord, query: Option<gmrs::gmrs::Query>) -> Progress {
    let state = &record.state;
    match query {
        Some(q) => Progress::Pending {
            query: QueryView::new(&record.problem, &q, state.history().len()),
        },
        None => Progress::Finished {
            best: BestView::new(&record.problem, state),
            history: api::history(&record.problem, state),
        },
    }
}

/// Runs `f` on the session's record off the async executor, with the
/// session locked for the whole call.
async fn with_session<T, F>(store: &Shared, id: String, f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce(&Store, &mut SessionRecord) -> Result<T, ApiError> + Send + 'static,
{
    let slot = store.get(&id).ok_or_else(|| ApiError::not_found(&id))?;
    let store = store.clone();
    tokio::task::spawn_blocking(move || {
        let mut guard = slot.blocking_lock();
        if guard.deleted {
            return Err(ApiError::not_found(&id));
        }
        f(&store, &mut guard.record)
    })
    .await
    .map_err(|e| ApiError::internal(format!("request task failed: {e}")))?
}

async fn create_session(
    State(store): State<Shared>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<(StatusCode, Json<SessionCreated>), ApiError> {
    let Json(req) = body?;
    let bounds = req.problem.bounds()?;
    let config = session_config(req.config)?;
    let problem = req.problem;
    let created = tokio::task::spawn_blocking(move || -> Result<SessionCreated, ApiError> {
        let mut state = SessionState::new(config, bounds)?;
        let query = state.next_query()?;
        let record = SessionRecord::new(uuid::Uuid::new_v4().to_string(), problem, state);
        let progress = progress(&record, query);
        let created = SessionCreated {
            id: record.id.clone(),
            problem: record.problem.clone(),
            progress,
        };
        store.insert(record)?;
        Ok(created)
    })
    .await
    .map_err(|e| ApiError::internal(format!("request task failed: {e}")))??;
    log::info!("created session {}", created.id);
    Ok((StatusCode::CREATED, Json(created)))
}

async fn get_query(State(store): State<Shared>, Path(id): Path<String>) -> Result<Json<Progress>, ApiError> {
    with_session(&store, id, |store, record| {
        let had_pending = record.state.pending().is_some();
        let query = record.state.next_query()?;
        if !had_pending && query.is_some() {
            record.touch();
            store.persist(record)?;
        }
        Ok(Json(progress(record, query)))
    })
    .await
}

async fn submit_preference(
    State(store): State<Shared>,
    Path(id): Path<String>,
    body: Result<Json<SubmitPreference>, JsonRejection>,
) -> Result<Json<Progress>, ApiError> {
    let Json(req) = body?;
    with_session(&store, id, move |store, record| {
        record
            .state
            .submit(req.token.as_deref(), Observation::Preference(req.answer.preference()))?;
        // Propose the follow-up before persisting so that the stored state
        // already carries the query the client is about to see.
        let next = record.state.next_query();
        record.touch();
        store.persist(record)?;
        Ok(Json(progress(record, next?)))
    })
    .await
}

async fn get_history(State(store): State<Shared>, Path(id): Path<String>) -> Result<Json<HistoryView>, ApiError> {
    with_session(&store, id, |_, record| {
        Ok(Json(HistoryView {
            entries: api::history(&record.problem, &record.state),
        }))
    })
    .await
}

async fn get_best(State(store): State<Shared>, Path(id): Path<String>) -> Result<Json<BestView>, ApiError> {
    with_session(&store, id, |_, record| {
        Ok(Json(BestView::new(&record.problem, &record.state)))
    })
    .await
}

async fn delete_session(State(store): State<Shared>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    if store.remove(&id).await? {
        log::info!("deleted session {id}");
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ApiError::not_found(&id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gmrs::Mode;

    #[test]
    fn config_defaults_to_preference() {
        assert_eq!(session_config(None).unwrap().mode, Mode::Preference);
        let c = session_config(Some(serde_json::json!({"mode": "preference", "n_max": 12}))).unwrap();
        assert_eq!(c.n_max, 12);
    }

    #[test]
    fn config_rejects_other_modes_and_unknown_fields() {
        assert!(session_config(Some(serde_json::json!({"mode": "blackbox"}))).is_err());
        assert!(session_config(Some(serde_json::json!({"nmax": 3}))).is_err());
        assert!(session_config(Some(serde_json::json!([1]))).is_err());
    }

    #[test]
    fn answers_map_to_preferences() {
        for a in [Answer::Left, Answer::Right, Answer::Tie] {
            assert_eq!(Answer::from_preference(a.preference()), Some(a));
        }
        assert_eq!(Answer::Left.preference(), -1);
    }
}
