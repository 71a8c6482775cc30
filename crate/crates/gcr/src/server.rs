//! HTTP API over one project. Writes are serialized through a lock and saved
//! before the response; committed events are pushed to `/events` listeners.

use std::convert::Infallible;
use std::net::SocketAddr;
use std::sync::{Arc, RwLock};
use std::thread::JoinHandle;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::sse::{Event as SseEvent, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use futures::Stream;
use gcr_core::emit::code_behind_step;
use gcr_core::timeline::Event;
use gcr_core::{EngineError, InteractionId, StepId};
use serde::{Deserialize, Serialize};
use tokio::sync::{broadcast, watch};

use crate::ops::{
    self, ComponentSummary, InteractRequest, ModifyRequest, Project, ServiceError, ServiceResult,
    TreeOp,
};

/// Messages pushed on `/events`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Notice {
    Event(Event),
    Seek { head: usize },
}

struct AppState {
    project: RwLock<Project>,
    notices: broadcast::Sender<Notice>,
    shutdown: watch::Receiver<bool>,
}

type Shared = Arc<AppState>;

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::Engine(
                EngineError::UnknownStep(_)
                | EngineError::UnknownGoal(_)
                | EngineError::UnknownComponent(_)
                | EngineError::UnknownInteraction(_),
            ) => StatusCode::NOT_FOUND,
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::Project(_) | ServiceError::PortInUse(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        let body = serde_json::json!({ "error": self.name(), "message": self.to_string() });
        (status, Json(body)).into_response()
    }
}

impl AppState {
    fn read<T>(&self, f: impl FnOnce(&Project) -> ServiceResult<T>) -> ServiceResult<T> {
        let project = self.project.read().expect("project lock");
        f(&project)
    }

    /// Runs a mutation and announces the event it committed, if any.
    fn write<T>(&self, f: impl FnOnce(&mut Project) -> ServiceResult<T>) -> ServiceResult<T> {
        let mut project = self.project.write().expect("project lock");
        let before = (project.ws.head(), project.ws.timeline().len());
        let out = f(&mut project)?;
        let tl = project.ws.timeline();
        if (tl.head(), tl.len()) != before && tl.head() == before.0 + 1 {
            let event = tl.events()[tl.head() - 1].clone();
            let _ = self.notices.send(Notice::Event(event));
        }
        Ok(out)
    }
}

#[derive(Debug, Deserialize)]
struct ComponentQuery {
    domain: Option<String>,
    #[serde(default)]
    query: String,
}

async fn list_components(
    State(s): State<Shared>,
    Query(q): Query<ComponentQuery>,
) -> ServiceResult<Json<Vec<ComponentSummary>>> {
    s.read(|p| {
        Ok(Json(
            p.ws.library()
                .find_components(q.domain.as_deref(), &q.query)?
                .into_iter()
                .map(ComponentSummary::from)
                .collect(),
        ))
    })
}

async fn get_component(State(s): State<Shared>, Path(id): Path<String>) -> ServiceResult<Response> {
    s.read(|p| {
        let c =
            p.ws.library()
                .get(&id)
                .ok_or_else(|| EngineError::UnknownComponent(id.clone()))?;
        let defaults = gcr_core::interaction::default_values(c);
        Ok(Json(serde_json::json!({ "component": c, "defaults": defaults })).into_response())
    })
}

async fn get_tree(State(s): State<Shared>) -> ServiceResult<Json<ops::TreeView>> {
    s.read(|p| Ok(Json(ops::tree_view(&p.ws))))
}

async fn tree_ops(
    State(s): State<Shared>,
    Json(op): Json<TreeOp>,
) -> ServiceResult<Json<ops::OpOutcome>> {
    s.write(|p| ops::apply_tree_op(p, &op)).map(Json)
}

async fn create_interaction(
    State(s): State<Shared>,
    Json(req): Json<InteractRequest>,
) -> ServiceResult<(StatusCode, Json<ops::InteractionOutcome>)> {
    s.write(|p| ops::interact(p, &req))
        .map(|r| (StatusCode::CREATED, Json(r)))
}

async fn modify_interaction(
    State(s): State<Shared>,
    Path(id): Path<u64>,
    Json(req): Json<ModifyRequest>,
) -> ServiceResult<Json<ops::InteractionOutcome>> {
    s.write(|p| ops::modify(p, InteractionId(id), &req))
        .map(Json)
}

async fn delete_interaction(
    State(s): State<Shared>,
    Path(id): Path<u64>,
) -> ServiceResult<StatusCode> {
    s.write(|p| ops::delete_interaction(p, InteractionId(id)))
        .map(|_| StatusCode::NO_CONTENT)
}

#[derive(Debug, Deserialize)]
struct CodeQuery {
    goal: Option<String>,
    profile: Option<String>,
}

async fn get_code(State(s): State<Shared>, Query(q): Query<CodeQuery>) -> ServiceResult<Response> {
    s.read(|p| {
        let profile = p.profile(q.profile.as_deref())?;
        let program = match &q.goal {
            Some(goal) => p.ws.emit(goal, &profile)?,
            None => p.ws.emit_all(&profile)?,
        };
        Ok(Json(program).into_response())
    })
}

async fn get_step_code(State(s): State<Shared>, Path(id): Path<u64>) -> ServiceResult<Response> {
    s.read(|p| {
        let code = code_behind_step(p.ws.state(), StepId(id))?;
        Ok(Json(serde_json::json!({ "step": id, "code": code })).into_response())
    })
}

async fn get_timeline(State(s): State<Shared>) -> ServiceResult<Response> {
    s.read(|p| {
        let tl = p.ws.timeline();
        Ok(Json(serde_json::json!({
            "head": tl.head(),
            "length": tl.len(),
            "events": tl.events(),
        }))
        .into_response())
    })
}

#[derive(Debug, Deserialize)]
struct SeekBody {
    t: usize,
}

async fn seek(State(s): State<Shared>, Json(body): Json<SeekBody>) -> ServiceResult<Response> {
    let head = s.write(|p| ops::seek(p, body.t))?;
    let _ = s.notices.send(Notice::Seek { head });
    Ok(Json(serde_json::json!({ "head": head })).into_response())
}

#[derive(Debug, Deserialize)]
struct FromQuery {
    #[serde(default)]
    from: usize,
}

async fn movie(State(s): State<Shared>, Query(q): Query<FromQuery>) -> ServiceResult<Response> {
    s.read(|p| Ok(Json(p.ws.movie(q.from)?).into_response()))
}

#[derive(Debug, Deserialize)]
struct EventsQuery {
    /// Replay committed events with index above this first.
    since: Option<usize>,
}

fn sse(notice: &Notice) -> SseEvent {
    let (kind, id) = match notice {
        Notice::Event(e) => ("event", e.index),
        Notice::Seek { head } => ("seek", *head),
    };
    SseEvent::default()
        .event(kind)
        .id(id.to_string())
        .data(serde_json::to_string(notice).expect("serializable"))
}

async fn events(
    State(s): State<Shared>,
    Query(q): Query<EventsQuery>,
) -> Sse<impl Stream<Item = Result<SseEvent, Infallible>>> {
    // Subscribe before reading the backlog so nothing falls between them.
    let rx = s.notices.subscribe();
    let backlog: Vec<Notice> = match q.since {
        Some(since) => {
            let project = s.project.read().expect("project lock");
            let tl = project.ws.timeline();
            tl.events()[since.min(tl.head())..tl.head()]
                .iter()
                .cloned()
                .map(Notice::Event)
                .collect()
        }
        None => Vec::new(),
    };
    let shutdown = s.shutdown.clone();
    let live = futures::stream::unfold((rx, shutdown), |(mut rx, mut shutdown)| async move {
        loop {
            tokio::select! {
                msg = rx.recv() => match msg {
                    Ok(n) => return Some((Ok(sse(&n)), (rx, shutdown))),
                    Err(broadcast::error::RecvError::Lagged(_)) => continue,
                    Err(broadcast::error::RecvError::Closed) => return None,
                },
                _ = shutdown.changed() => return None,
            }
        }
    });
    let head = futures::stream::iter(backlog.into_iter().map(|n| Ok(sse(&n))));
    Sse::new(futures::StreamExt::chain(head, live)).keep_alive(KeepAlive::default())
}

fn router(state: Shared) -> Router {
    Router::new()
        .route("/components", get(list_components))
        .route("/components/{id}", get(get_component))
        .route("/tree", get(get_tree))
        .route("/tree/ops", post(tree_ops))
        .route("/interactions", post(create_interaction))
        .route(
            "/interactions/{id}",
            put(modify_interaction).delete(delete_interaction),
        )
        .route("/code", get(get_code))
        .route("/code/step/{id}", get(get_step_code))
        .route("/timeline", get(get_timeline))
        .route("/timeline/seek", post(seek))
        .route("/movie", get(movie))
        .route("/events", get(events))
        .with_state(state)
}

/// A server running on its own thread.
pub struct RunningServer {
    pub addr: SocketAddr,
    stop: watch::Sender<bool>,
    thread: Option<JoinHandle<()>>,
}

impl RunningServer {
    /// Blocks until the server exits (Ctrl-C or [`RunningServer::stop`]).
    pub fn wait(mut self) {
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }

    pub fn stop(mut self) {
        let _ = self.stop.send(true);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

/// Binds `addr` and serves the project in the background.
pub fn start(project: Project, addr: &str) -> ServiceResult<RunningServer> {
    let listener = std::net::TcpListener::bind(addr).map_err(|e| {
        if e.kind() == std::io::ErrorKind::AddrInUse {
            let port = addr
                .rsplit(':')
                .next()
                .and_then(|p| p.parse().ok())
                .unwrap_or(0);
            ServiceError::PortInUse(port)
        } else {
            ServiceError::BadRequest(format!("cannot bind {addr}: {e}"))
        }
    })?;
    listener
        .set_nonblocking(true)
        .map_err(|e| ServiceError::BadRequest(e.to_string()))?;
    let local = listener
        .local_addr()
        .map_err(|e| ServiceError::BadRequest(e.to_string()))?;
    let (stop_tx, stop_rx) = watch::channel(false);
    let (closing_tx, closing_rx) = watch::channel(false);
    let (notices, _) = broadcast::channel(256);
    let state = Arc::new(AppState {
        project: RwLock::new(project),
        notices,
        shutdown: closing_rx,
    });
    let thread = std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .enable_all()
            .build()
            .expect("tokio runtime");
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener).expect("listener");
            let mut stop = stop_rx;
            let signal = async move {
                tokio::select! {
                    _ = stop.changed() => {}
                    _ = tokio::signal::ctrl_c() => {}
                }
                // End open event streams so shutdown can finish.
                let _ = closing_tx.send(true);
            };
            let _ = axum::serve(listener, router(state))
                .with_graceful_shutdown(signal)
                .await;
        });
    });
    Ok(RunningServer {
        addr: local,
        stop: stop_tx,
        thread: Some(thread),
    })
}
