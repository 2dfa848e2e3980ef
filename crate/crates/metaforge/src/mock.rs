//! In-process stand-ins for the remote services, for tests and local demos.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use parking_lot::Mutex;
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::oneshot;

pub const TAXONOMY: &str = include_str!("../fixtures/taxonomy.json");

/// A server running on its own thread; stopped on drop.
pub struct MockServer {
    addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl MockServer {
    pub fn spawn(router: Router) -> std::io::Result<MockServer> {
        let listener = std::net::TcpListener::bind("127.0.0.1:0")?;
        listener.set_nonblocking(true)?;
        let addr = listener.local_addr()?;
        let (stop, stopped) = oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_current_thread()
                .enable_all()
                .build()
                .expect("mock runtime");
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(listener).expect("mock listener");
                let _ = axum::serve(listener, router)
                    .with_graceful_shutdown(async {
                        let _ = stopped.await;
                    })
                    .await;
            });
        });
        Ok(MockServer {
            addr,
            stop: Some(stop),
            thread: Some(thread),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

// ----- terminology -----

#[derive(Debug, Clone, Deserialize)]
pub struct TaxonomyTerm {
    #[serde(rename = "@id")]
    pub id: String,
    #[serde(rename = "prefLabel")]
    pub pref_label: String,
    pub synonym: Vec<String>,
    pub parents: Vec<String>,
    #[serde(rename = "type")]
    pub kind: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Taxonomy {
    pub ontology: String,
    pub terms: Vec<TaxonomyTerm>,
}

impl Taxonomy {
    pub fn fixture() -> Taxonomy {
        serde_json::from_str(TAXONOMY).expect("taxonomy fixture parses")
    }

    /// Transitive descendants by walking parent links, excluding `root`.
    pub fn descendants(&self, root: &str) -> Vec<&TaxonomyTerm> {
        let mut out: Vec<&TaxonomyTerm> = Vec::new();
        let mut frontier = vec![root.to_owned()];
        while let Some(p) = frontier.pop() {
            for t in &self.terms {
                if t.parents.contains(&p) && !out.iter().any(|o| o.id == t.id) {
                    out.push(t);
                    frontier.push(t.id.clone());
                }
            }
        }
        out
    }
}

pub struct TerminologyMock {
    pub taxonomy: Taxonomy,
    /// Descendant pages are cut to this size so clients must follow `nextPage`.
    pub page_size: usize,
    pub api_key: Option<String>,
    pub down: AtomicBool,
    pub requests: AtomicU64,
    base: Mutex<String>,
}

impl TerminologyMock {
    pub fn new(taxonomy: Taxonomy) -> Arc<TerminologyMock> {
        Self::build(taxonomy, None)
    }

    /// Answers 401 unless requests carry `Authorization: apikey token=<key>`.
    pub fn requiring_key(taxonomy: Taxonomy, key: &str) -> Arc<TerminologyMock> {
        Self::build(taxonomy, Some(key.to_owned()))
    }

    fn build(taxonomy: Taxonomy, api_key: Option<String>) -> Arc<TerminologyMock> {
        Arc::new(TerminologyMock {
            taxonomy,
            page_size: 2,
            api_key,
            down: AtomicBool::new(false),
            requests: AtomicU64::new(0),
            base: Mutex::new(String::new()),
        })
    }

    pub fn set_down(&self, down: bool) {
        self.down.store(down, Ordering::SeqCst);
    }

    pub fn request_count(&self) -> u64 {
        self.requests.load(Ordering::SeqCst)
    }

    fn class(&self, t: &TaxonomyTerm) -> Value {
        json!({
            "@id": t.id,
            "prefLabel": t.pref_label,
            "synonym": t.synonym,
            "ontology": self.taxonomy.ontology,
            "type": t.kind,
        })
    }

    fn gate(&self, headers: &HeaderMap) -> Option<Response> {
        self.requests.fetch_add(1, Ordering::SeqCst);
        if self.down.load(Ordering::SeqCst) {
            return Some((StatusCode::SERVICE_UNAVAILABLE, "down").into_response());
        }
        if let Some(key) = &self.api_key {
            let expected = format!("apikey token={key}");
            let given = headers.get("authorization").and_then(|v| v.to_str().ok());
            if given != Some(expected.as_str()) {
                return Some((StatusCode::UNAUTHORIZED, Json(json!({"error": "bad api key"}))).into_response());
            }
        }
        None
    }
}

async fn term_search(
    State(mock): State<Arc<TerminologyMock>>,
    headers: HeaderMap,
    Query(q): Query<HashMap<String, String>>,
) -> Response {
    if let Some(r) = mock.gate(&headers) {
        return r;
    }
    let query = q.get("q").map(|s| s.trim().to_lowercase()).unwrap_or_default();
    let size: usize = q.get("pagesize").and_then(|s| s.parse().ok()).unwrap_or(50);
    if q.get("ontologies")
        .is_some_and(|o| !o.split(',').any(|a| a == mock.taxonomy.ontology))
    {
        return Json(json!({"collection": []})).into_response();
    }
    let hits: Vec<Value> = mock
        .taxonomy
        .terms
        .iter()
        .filter(|t| {
            std::iter::once(&t.pref_label)
                .chain(&t.synonym)
                .any(|n| n.to_lowercase().contains(&query))
        })
        .take(size)
        .map(|t| mock.class(t))
        .collect();
    Json(json!({"collection": hits})).into_response()
}

async fn descendants(
    State(mock): State<Arc<TerminologyMock>>,
    headers: HeaderMap,
    Path((acronym, iri)): Path<(String, String)>,
    Query(q): Query<HashMap<String, String>>,
) -> Response {
    if let Some(r) = mock.gate(&headers) {
        return r;
    }
    if acronym != mock.taxonomy.ontology || !mock.taxonomy.terms.iter().any(|t| t.id == iri) {
        return (StatusCode::NOT_FOUND, Json(json!({"error": "no such class"}))).into_response();
    }
    let all = mock.taxonomy.descendants(&iri);
    let requested: usize = q.get("pagesize").and_then(|s| s.parse().ok()).unwrap_or(50);
    let size = requested.min(mock.page_size).max(1);
    let page: usize = q.get("page").and_then(|s| s.parse().ok()).unwrap_or(1).max(1);
    let chunk: Vec<Value> = all
        .iter()
        .skip((page - 1) * size)
        .take(size)
        .map(|t| mock.class(t))
        .collect();
    let page_count = all.len().div_ceil(size).max(1);
    let next = (page < page_count).then(|| {
        format!(
            "{}/ontologies/{}/classes/{}/descendants?pagesize={requested}&page={}",
            mock.base.lock(),
            acronym,
            urlencoding::encode(&iri),
            page + 1
        )
    });
    Json(json!({"page": page, "pageCount": page_count, "collection": chunk, "nextPage": next})).into_response()
}

/// Serves the taxonomy over the search and descendants routes.
pub fn spawn_terminology(mock: Arc<TerminologyMock>) -> std::io::Result<MockServer> {
    let router = Router::new()
        .route("/search", get(term_search))
        .route("/ontologies/:acronym/classes/:iri/descendants", get(descendants))
        .with_state(mock.clone());
    let server = MockServer::spawn(router)?;
    *mock.base.lock() = server.url();
    Ok(server)
}

// ----- external validator -----

pub struct ValidatorMock {
    pub status: Mutex<u16>,
    pub body: Mutex<String>,
    pub requests: AtomicU64,
    pub last_content_type: Mutex<Option<String>>,
}

impl ValidatorMock {
    /// Accepts everything with `{"valid":true,"messages":[]}`.
    pub fn accepting() -> Arc<ValidatorMock> {
        Arc::new(ValidatorMock {
            status: Mutex::new(200),
            body: Mutex::new(r#"{"valid":true,"messages":[]}"#.into()),
            requests: AtomicU64::new(0),
            last_content_type: Mutex::new(None),
        })
    }

    pub fn respond(&self, status: u16, body: impl Into<String>) {
        *self.status.lock() = status;
        *self.body.lock() = body.into();
    }
}

async fn validate(State(mock): State<Arc<ValidatorMock>>, headers: HeaderMap, _body: String) -> Response {
    mock.requests.fetch_add(1, Ordering::SeqCst);
    *mock.last_content_type.lock() = headers
        .get("content-type")
        .and_then(|v| v.to_str().ok())
        .map(String::from);
    let status = StatusCode::from_u16(*mock.status.lock()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (status, [("content-type", "application/json")], mock.body.lock().clone()).into_response()
}

pub fn spawn_validator(mock: Arc<ValidatorMock>) -> std::io::Result<MockServer> {
    MockServer::spawn(Router::new().route("/", post(validate)).with_state(mock))
}

// ----- submission target -----

pub struct SubmissionMock {
    pub counter: AtomicU64,
    /// When set, every POST answers with this status and body instead.
    pub fail_with: Mutex<Option<(u16, String)>>,
    pub last_authorization: Mutex<Option<String>>,
    pub bodies: Mutex<Vec<String>>,
}

impl SubmissionMock {
    pub fn new() -> Arc<SubmissionMock> {
        Arc::new(SubmissionMock {
            counter: AtomicU64::new(0),
            fail_with: Mutex::new(None),
            last_authorization: Mutex::new(None),
            bodies: Mutex::new(Vec::new()),
        })
    }

    pub fn received(&self) -> usize {
        self.bodies.lock().len()
    }
}

async fn submit(State(mock): State<Arc<SubmissionMock>>, headers: HeaderMap, body: String) -> Response {
    *mock.last_authorization.lock() = headers
        .get("authorization")
        .and_then(|v| v.to_str().ok())
        .map(String::from);
    mock.bodies.lock().push(body);
    if let Some((status, body)) = mock.fail_with.lock().clone() {
        let status = StatusCode::from_u16(status).unwrap_or(StatusCode::BAD_REQUEST);
        return (status, [("content-type", "application/json")], body).into_response();
    }
    let n = mock.counter.fetch_add(1, Ordering::SeqCst) + 1;
    (StatusCode::CREATED, Json(json!({"id": format!("MOCK-{n}")}))).into_response()
}

pub fn spawn_submission(mock: Arc<SubmissionMock>) -> std::io::Result<MockServer> {
    MockServer::spawn(Router::new().route("/", post(submit)).with_state(mock))
}
