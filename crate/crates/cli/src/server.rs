//! HTTP+JSON study service.
//!
//! | route                                   | purpose                               |
//! |-----------------------------------------|---------------------------------------|
//! | `POST /sessions`                        | open a session for a subject          |
//! | `GET  /sessions/{id}/next`              | blinded descriptor of the next trial  |
//! | `POST /sessions/{id}/responses`         | answer the current trial              |
//! | `GET  /sessions/{id}/status`            | progress                              |
//! | `GET  /sessions/{id}/media/{i}`         | image, or frame manifest for a video  |
//! | `GET  /sessions/{id}/media/{i}/frames/{n}` | one video frame                    |
//!
//! Response times are measured on the server from the first `next` that served
//! a trial. Each session has its own lock and JSON-lines log.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::future::Future;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use anyhow::Context;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use spv_core::study::{
    Catalog, SessionLog, SessionState, SessionStatus, StimulusKind, TrialRecord, GROUND_TRUTH_KEYS,
};
use spv_core::{Likert, ObjectClass, Room};
use tokio::net::TcpListener;

use crate::args::StudyArgs;
use crate::video::VideoManifest;

pub trait Clock: Send + Sync + 'static {
    /// Time since an arbitrary fixed origin.
    fn now(&self) -> Duration;
}

pub struct SystemClock(Instant);

impl SystemClock {
    pub fn new() -> Self {
        Self(Instant::now())
    }
}

impl Default for SystemClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.0.elapsed()
    }
}

/// A clock that only moves when told to.
#[derive(Clone, Default)]
pub struct ManualClock(Arc<Mutex<Duration>>);

impl ManualClock {
    pub fn advance(&self, by: Duration) {
        *self.0.lock().unwrap() += by;
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Duration {
        *self.0.lock().unwrap()
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn conflict(message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, message)
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, message)
    }
}

impl From<spv_core::Error> for ApiError {
    fn from(e: spv_core::Error) -> Self {
        use spv_core::Error as E;
        let status = match e {
            E::Protocol(_) => StatusCode::CONFLICT,
            E::InvalidValue(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T = Response> = Result<T, ApiError>;

/// Names of ground-truth keys found anywhere in `v`.
pub fn ground_truth_keys_in(v: &Value) -> Vec<String> {
    let mut found = Vec::new();
    let mut stack = vec![v];
    while let Some(v) = stack.pop() {
        match v {
            Value::Object(m) => {
                for (k, inner) in m {
                    if GROUND_TRUTH_KEYS.contains(&k.as_str()) {
                        found.push(k.clone());
                    }
                    stack.push(inner);
                }
            }
            Value::Array(a) => stack.extend(a),
            _ => {}
        }
    }
    found
}

/// Every JSON body leaves through here and is scanned for ground truth first.
fn reply(status: StatusCode, body: Value) -> ApiResult {
    let leaked = ground_truth_keys_in(&body);
    if !leaked.is_empty() {
        return Err(ApiError::internal(format!(
            "refusing to send ground-truth fields {leaked:?}"
        )));
    }
    Ok((status, Json(body)).into_response())
}

struct LiveSession {
    id: String,
    state: SessionState,
    log: SessionLog,
    /// Trial index currently on screen and when it was first served.
    served: Option<(usize, Duration)>,
}

struct Inner {
    catalog: Catalog,
    base_seed: u64,
    log_dir: PathBuf,
    clock: Arc<dyn Clock>,
    next_number: AtomicU64,
    sessions: Mutex<HashMap<String, Arc<Mutex<LiveSession>>>>,
}

#[derive(Clone)]
pub struct StudyService(Arc<Inner>);

fn check_media(catalog: &Catalog) -> anyhow::Result<()> {
    for t in catalog.trial_specs() {
        let ok = match t.kind {
            StimulusKind::Image => t.media_path.is_file(),
            StimulusKind::Video => t.media_path.join(crate::video::MANIFEST).is_file(),
        };
        if !ok {
            anyhow::bail!(
                "media for `{}` not found at {}",
                t.stimulus_id,
                t.media_path.display()
            );
        }
    }
    Ok(())
}

fn highest_session_number(log_dir: &Path) -> anyhow::Result<Option<u64>> {
    let mut max = None;
    for e in std::fs::read_dir(log_dir).with_context(|| format!("listing {}", log_dir.display()))? {
        let p = e?.path();
        let n = p
            .file_stem()
            .and_then(|s| s.to_str())
            .and_then(|s| s.rsplit_once('-'))
            .and_then(|(_, n)| n.parse::<u64>().ok());
        max = max.max(n);
    }
    Ok(max)
}

impl StudyService {
    /// Checks that every stimulus has its media and prepares `log_dir`.
    pub fn new(
        catalog: Catalog,
        base_seed: u64,
        log_dir: &Path,
        clock: Arc<dyn Clock>,
    ) -> anyhow::Result<Self> {
        check_media(&catalog)?;
        std::fs::create_dir_all(log_dir)
            .with_context(|| format!("creating {}", log_dir.display()))?;
        let next = highest_session_number(log_dir)?.map_or(1, |n| n + 1);
        Ok(Self(Arc::new(Inner {
            catalog,
            base_seed,
            log_dir: log_dir.to_path_buf(),
            clock,
            next_number: AtomicU64::new(next),
            sessions: Mutex::new(HashMap::new()),
        })))
    }

    pub fn router(&self) -> Router {
        Router::new()
            .route("/sessions", post(create_session))
            .route("/sessions/{id}/next", get(next_trial))
            .route("/sessions/{id}/responses", post(submit_response))
            .route("/sessions/{id}/status", get(status))
            .route("/sessions/{id}/media/{index}", get(media))
            .route("/sessions/{id}/media/{index}/frames/{frame}", get(media_frame))
            .with_state(self.clone())
    }

    pub fn log_path(&self, session_id: &str) -> PathBuf {
        self.0.log_dir.join(format!("{session_id}.jsonl"))
    }

    fn session(&self, id: &str) -> ApiResult<Arc<Mutex<LiveSession>>> {
        self.0
            .sessions
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("no session `{id}`")))
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct CreateSession {
    pub subject_id: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

/// One answered form as sent by the client. Which stimulus it belongs to and
/// how long it took are known to the server only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResponseForm {
    pub trial_index: usize,
    #[serde(default)]
    pub objects_marked: BTreeSet<ObjectClass>,
    pub room_choice: Room,
    pub likert: Likert,
}

fn sanitize(subject: &str) -> String {
    subject
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect()
}

async fn create_session(State(svc): State<StudyService>, Json(req): Json<CreateSession>) -> ApiResult {
    if req.subject_id.trim().is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "subject_id must not be empty"));
    }
    let inner = &svc.0;
    let number = inner.next_number.fetch_add(1, Ordering::SeqCst);
    let seed = req.seed.unwrap_or_else(|| inner.base_seed.wrapping_add(number));
    let plan = inner.catalog.build_plan(seed);
    let mut state = SessionState::new(req.subject_id.clone(), plan, req.metadata);
    state.start()?;
    let id = format!("{}-{number:04}", sanitize(&req.subject_id));
    let log = SessionLog::create(&svc.log_path(&id), state.header())
        .map_err(|e| ApiError::conflict(e.to_string()))?;
    let body = json!({
        "session_id": id,
        "subject_id": req.subject_id,
        "seed": seed,
        "trial_count": state.plan().trials.len(),
        "time_limit_s": state.plan().time_limit_s,
    });
    let live = LiveSession {
        id: id.clone(),
        state,
        log,
        served: None,
    };
    inner.sessions.lock().unwrap().insert(id, Arc::new(Mutex::new(live)));
    reply(StatusCode::CREATED, body)
}

async fn next_trial(State(svc): State<StudyService>, UrlPath(id): UrlPath<String>) -> ApiResult {
    let session = svc.session(&id)?;
    let mut s = session.lock().unwrap();
    let now = svc.0.clock.now();
    let cursor = s.state.cursor();
    let Some(trial) = s.state.current_trial() else {
        return reply(
            StatusCode::OK,
            json!({ "done": true, "trials_completed": s.state.records().len() }),
        );
    };
    let n = s.state.plan().trials.len();
    let descriptor = trial.descriptor(n, s.state.plan().time_limit_s);
    if s.served.map(|(i, _)| i) != Some(cursor) {
        s.served = Some((cursor, now));
    }
    let elapsed = now.saturating_sub(s.served.expect("set above").1).as_secs_f64();
    reply(
        StatusCode::OK,
        json!({
            "done": false,
            "descriptor": descriptor,
            "media_url": format!("/sessions/{}/media/{cursor}", s.id),
            "elapsed_s": elapsed,
        }),
    )
}

fn ack(record: &TrialRecord, duplicate: bool, done: bool) -> Value {
    json!({
        "trial_index": record.trial_index,
        "late": record.late,
        "response_time_s": record.response_time_s,
        "duplicate": duplicate,
        "done": done,
    })
}

async fn submit_response(
    State(svc): State<StudyService>,
    UrlPath(id): UrlPath<String>,
    Json(form): Json<ResponseForm>,
) -> ApiResult {
    let session = svc.session(&id)?;
    let mut s = session.lock().unwrap();
    let done = s.state.status() == SessionStatus::Done;
    if let Some(prev) = s.state.records().get(form.trial_index) {
        let same = prev.objects_marked == form.objects_marked
            && prev.room_choice == form.room_choice
            && prev.likert == form.likert;
        if same {
            return reply(StatusCode::OK, ack(prev, true, done));
        }
        return Err(ApiError::conflict(format!(
            "trial {} already answered differently",
            form.trial_index
        )));
    }
    if done {
        return Err(ApiError::conflict("session is already complete"));
    }
    let cursor = s.state.cursor();
    if form.trial_index != cursor {
        return Err(ApiError::conflict(format!(
            "trial {} submitted out of order; expected {cursor}",
            form.trial_index
        )));
    }
    let started = match s.served {
        Some((i, t)) if i == cursor => t,
        _ => return Err(ApiError::conflict(format!("trial {cursor} has not been served"))),
    };
    let elapsed = svc.0.clock.now().saturating_sub(started).as_secs_f64();
    let record = TrialRecord {
        subject_id: s.state.header().subject_id.clone(),
        trial_index: cursor,
        stimulus_id: s.state.plan().trials[cursor].stimulus_id.clone(),
        objects_marked: form.objects_marked,
        room_choice: form.room_choice,
        likert: form.likert,
        response_time_s: elapsed,
        late: false,
    };
    let mut next = s.state.clone();
    let stored = next.submit(record)?.clone();
    s.log
        .append(&stored)
        .map_err(|e| ApiError::internal(format!("could not log response: {e}")))?;
    s.state = next;
    s.served = None;
    let done = s.state.status() == SessionStatus::Done;
    reply(StatusCode::CREATED, ack(&stored, false, done))
}

async fn status(State(svc): State<StudyService>, UrlPath(id): UrlPath<String>) -> ApiResult {
    let session = svc.session(&id)?;
    let s = session.lock().unwrap();
    let st = &s.state;
    reply(
        StatusCode::OK,
        json!({
            "session_id": s.id,
            "subject_id": st.header().subject_id,
            "status": st.status(),
            "cursor": st.cursor(),
            "trial_count": st.plan().trials.len(),
            "late_count": st.records().iter().filter(|r| r.late).count(),
            "time_limit_s": st.plan().time_limit_s,
        }),
    )
}

/// Media of trial `index`, available once that trial has been served.
fn presented_media(svc: &StudyService, id: &str, index: usize) -> ApiResult<(StimulusKind, PathBuf)> {
    let session = svc.session(id)?;
    let s = session.lock().unwrap();
    let trial = s
        .state
        .plan()
        .trials
        .get(index)
        .ok_or_else(|| ApiError::not_found(format!("no trial {index}")))?;
    let shown = index < s.state.cursor() || s.served.map(|(i, _)| i) == Some(index);
    if !shown {
        return Err(ApiError::conflict(format!("trial {index} has not been served")));
    }
    Ok((trial.kind, trial.media_path.clone()))
}

async fn png(path: &Path) -> ApiResult {
    let bytes = tokio::fs::read(path)
        .await
        .map_err(|e| ApiError::internal(format!("reading media: {e}")))?;
    Ok(([(header::CONTENT_TYPE, "image/png")], bytes).into_response())
}

async fn media(
    State(svc): State<StudyService>,
    UrlPath((id, index)): UrlPath<(String, usize)>,
) -> ApiResult {
    let (kind, path) = presented_media(&svc, &id, index)?;
    match kind {
        StimulusKind::Image => png(&path).await,
        StimulusKind::Video => {
            let m = VideoManifest::load(&path).map_err(|e| ApiError::internal(format!("{e:#}")))?;
            let frames: Vec<String> = (0..m.frame_count)
                .map(|n| format!("/sessions/{id}/media/{index}/frames/{n}"))
                .collect();
            reply(
                StatusCode::OK,
                json!({ "fps": m.fps, "frame_count": m.frame_count, "frames": frames }),
            )
        }
    }
}

async fn media_frame(
    State(svc): State<StudyService>,
    UrlPath((id, index, frame)): UrlPath<(String, usize, usize)>,
) -> ApiResult {
    let (kind, dir) = presented_media(&svc, &id, index)?;
    if kind != StimulusKind::Video {
        return Err(ApiError::not_found(format!("trial {index} is not a video")));
    }
    let m = VideoManifest::load(&dir).map_err(|e| ApiError::internal(format!("{e:#}")))?;
    let name = m
        .frames
        .get(frame)
        .ok_or_else(|| ApiError::not_found(format!("no frame {frame}")))?;
    png(&dir.join(name)).await
}

/// Binds `addr`; a port already in use is reported here, before serving.
pub async fn bind(addr: SocketAddr) -> anyhow::Result<TcpListener> {
    TcpListener::bind(addr)
        .await
        .with_context(|| format!("cannot listen on {addr}"))
}

pub async fn serve(
    listener: TcpListener,
    service: StudyService,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> anyhow::Result<()> {
    axum::serve(listener, service.router())
        .with_graceful_shutdown(shutdown)
        .await
        .context("study server failed")
}

/// Runs until Ctrl-C. Returns the base seed in use.
pub async fn cmd_study(args: &StudyArgs) -> anyhow::Result<u64> {
    let catalog = Catalog::load(&args.catalog)?;
    let seed = args.seed.unwrap_or_else(rand::random);
    let service = StudyService::new(catalog, seed, &args.log_dir, Arc::new(SystemClock::new()))?;
    let listener = bind(SocketAddr::new(args.host, args.port)).await?;
    eprintln!(
        "serving study on http://{} (base seed {seed}, logs in {})",
        listener.local_addr()?,
        args.log_dir.display()
    );
    serve(listener, service, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await?;
    Ok(seed)
}
