//! HTTP routes under `/api/v1`, authenticated by `Authorization: apikey token=<key>`.

use std::collections::HashMap;
use std::sync::Arc;

use axum::async_trait;
use axum::body::Body;
use axum::extract::{FromRequestParts, Path, Query, State};
use axum::http::request::Parts;
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::Router;
use metaforge_core::model::TemplateKind;
use metaforge_core::ResourceId;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{Code, Error};
use crate::render::{self, ExportFormat};
use crate::repository::{AclEntry, ResourceType, SearchQuery};
use crate::service::{RecommendRequest, Service};
use crate::terminology::Mapping;

pub const PREFIX: &str = "/api/v1";

/// Every route as (method, path, summary); the OpenAPI document is built from this.
pub const ROUTES: &[(&str, &str, &str)] = &[
    ("post", "/templates", "Create a template"),
    ("post", "/elements", "Create a reusable element"),
    ("post", "/fields", "Create a standalone field"),
    (
        "post",
        "/instances",
        "Create a metadata instance (stored only when valid)",
    ),
    ("post", "/folders", "Create a folder"),
    ("post", "/value-sets", "Create a value set"),
    ("get", "/resources/{id}", "Read a resource record"),
    (
        "put",
        "/resources/{id}",
        "Replace a resource document (If-Match: <version>)",
    ),
    ("delete", "/resources/{id}", "Delete a resource"),
    ("post", "/resources/{id}/move", "Move a resource to another folder"),
    ("put", "/resources/{id}/permissions", "Replace a resource's ACL"),
    ("get", "/folders/{id}/children", "List readable children of a folder"),
    ("get", "/search", "Keyword and faceted search"),
    (
        "post",
        "/templates/{id}/validate",
        "Validate an instance document against a template",
    ),
    ("get", "/templates/{id}/schema", "Compiled JSON Schema of a template"),
    (
        "get",
        "/instances/{id}",
        "Export an instance (format=jsonld|ntriples|tsv)",
    ),
    ("get", "/instances/{id}/receipts", "Submission receipts of an instance"),
    (
        "post",
        "/instances/{id}/submit",
        "Submit an instance to a configured target",
    ),
    ("post", "/recommend", "Ranked value suggestions for a field"),
    ("get", "/terminology/search", "Search ontology and provisional terms"),
    ("get", "/terminology/branch", "Expand an ontology branch"),
    ("post", "/terminology/provisional-terms", "Mint a provisional term"),
    ("post", "/groups", "Create a group"),
    ("get", "/groups/{id}", "Read a group"),
    ("put", "/groups/{id}/members", "Add and remove group members"),
    ("get", "/users/me", "The authenticated user"),
];

pub struct ApiError(pub Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

fn body_response(status: StatusCode, content_type: &'static str, body: String) -> Response {
    let mut resp = Response::new(Body::from(body));
    *resp.status_mut() = status;
    resp.headers_mut()
        .insert(header::CONTENT_TYPE, HeaderValue::from_static(content_type));
    resp
}

fn json_text(status: StatusCode, value: &impl serde::Serialize) -> Response {
    let mut text = serde_json::to_string(value).expect("response bodies serialize");
    text.push('\n');
    body_response(status, render::JSON, text)
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.0.code.http_status()).unwrap_or(StatusCode::BAD_REQUEST);
        json_text(status, &self.0.body())
    }
}

type ApiResult = Result<Response, ApiError>;
type Shared = Arc<Service>;

fn unauthenticated() -> ApiError {
    ApiError(Error::new(Code::Unauthenticated, "missing or unknown API key"))
}

/// The authenticated user.
pub struct Actor(pub ResourceId);

#[async_trait]
impl FromRequestParts<Shared> for Actor {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, service: &Shared) -> Result<Self, Self::Rejection> {
        let token = parts
            .headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().strip_prefix("apikey"))
            .and_then(|v| v.trim_start().strip_prefix("token="))
            .unwrap_or("");
        // Missing and unknown tokens go through the same lookup.
        service.repo.authenticate(token).map(Actor).ok_or_else(unauthenticated)
    }
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> crate::Result<T> + Send + 'static,
    T: Send + 'static,
{
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map_err(ApiError),
        Err(e) => Err(ApiError(Error::new(Code::Io, format!("worker failed: {e}")))),
    }
}

fn parse_id(s: &str) -> Result<ResourceId, ApiError> {
    ResourceId::parse(s)
        .ok_or_else(|| ApiError(Error::new(Code::InvalidRequest, format!("`{s}` is not a resource id"))))
}

fn folder_param(q: &HashMap<String, String>) -> Result<Option<ResourceId>, ApiError> {
    q.get("folder").map(|f| parse_id(f)).transpose()
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &str) -> Result<T, ApiError> {
    serde_json::from_str(body).map_err(|e| {
        let code = if e.is_syntax() || e.is_eof() {
            Code::MalformedJson
        } else {
            Code::InvalidPayload
        };
        ApiError(Error::new(code, e.to_string()))
    })
}

// ----- creation -----

async fn create_template_kind(
    kind: TemplateKind,
    service: Shared,
    actor: ResourceId,
    q: HashMap<String, String>,
    body: String,
) -> ApiResult {
    let folder = folder_param(&q)?;
    let rec = blocking(move || service.create_template(kind, &body, folder, &actor)).await?;
    Ok(json_text(StatusCode::CREATED, &rec))
}

async fn create_template(
    State(s): State<Shared>,
    Actor(a): Actor,
    Query(q): Query<HashMap<String, String>>,
    body: String,
) -> ApiResult {
    create_template_kind(TemplateKind::Template, s, a, q, body).await
}

async fn create_element(
    State(s): State<Shared>,
    Actor(a): Actor,
    Query(q): Query<HashMap<String, String>>,
    body: String,
) -> ApiResult {
    create_template_kind(TemplateKind::Element, s, a, q, body).await
}

async fn create_field(
    State(s): State<Shared>,
    Actor(a): Actor,
    Query(q): Query<HashMap<String, String>>,
    body: String,
) -> ApiResult {
    create_template_kind(TemplateKind::Field, s, a, q, body).await
}

async fn create_instance(
    State(s): State<Shared>,
    Actor(a): Actor,
    Query(q): Query<HashMap<String, String>>,
    body: String,
) -> ApiResult {
    let folder = folder_param(&q)?;
    let rec = blocking(move || s.create_instance(&body, folder, &a)).await?;
    Ok(json_text(StatusCode::CREATED, &rec))
}

async fn create_folder(
    State(s): State<Shared>,
    Actor(a): Actor,
    Query(q): Query<HashMap<String, String>>,
    body: String,
) -> ApiResult {
    let folder = folder_param(&q)?;
    let rec = blocking(move || s.create_folder(&body, folder, &a)).await?;
    Ok(json_text(StatusCode::CREATED, &rec))
}

async fn create_value_set(
    State(s): State<Shared>,
    Actor(a): Actor,
    Query(q): Query<HashMap<String, String>>,
    body: String,
) -> ApiResult {
    let folder = folder_param(&q)?;
    let rec = blocking(move || s.create_value_set(&body, folder, &a)).await?;
    Ok(json_text(StatusCode::CREATED, &rec))
}

// ----- resources -----

async fn get_resource(State(s): State<Shared>, Actor(a): Actor, Path(id): Path<String>) -> ApiResult {
    let id = parse_id(&id)?;
    let rec = blocking(move || s.get(&id, &a)).await?;
    Ok(json_text(StatusCode::OK, &rec))
}

fn if_match(headers: &HeaderMap) -> Result<u64, ApiError> {
    let raw = headers
        .get(header::IF_MATCH)
        .and_then(|v| v.to_str().ok())
        .ok_or_else(|| ApiError(Error::new(Code::InvalidRequest, "If-Match: <version> is required")))?;
    let trimmed = raw.trim().trim_start_matches("W/").trim_matches('"');
    trimmed.parse().map_err(|_| {
        ApiError(Error::new(
            Code::InvalidRequest,
            format!("If-Match `{raw}` is not a version number"),
        ))
    })
}

async fn put_resource(
    State(s): State<Shared>,
    Actor(a): Actor,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: String,
) -> ApiResult {
    let id = parse_id(&id)?;
    let version = if_match(&headers)?;
    let rec = blocking(move || s.update(&id, version, &body, &a)).await?;
    Ok(json_text(StatusCode::OK, &rec))
}

async fn delete_resource(State(s): State<Shared>, Actor(a): Actor, Path(id): Path<String>) -> ApiResult {
    let id = parse_id(&id)?;
    let rec = blocking(move || s.delete(&id, &a)).await?;
    Ok(json_text(StatusCode::OK, &json!({"deleted": rec.id})))
}

#[derive(Deserialize)]
struct MoveBody {
    folder: ResourceId,
}

async fn move_resource(State(s): State<Shared>, Actor(a): Actor, Path(id): Path<String>, body: String) -> ApiResult {
    let id = parse_id(&id)?;
    let MoveBody { folder } = parse_body(&body)?;
    let rec = blocking(move || s.move_resource(&id, &folder, &a)).await?;
    Ok(json_text(StatusCode::OK, &rec))
}

#[derive(Deserialize)]
struct AclBody {
    acl: Vec<AclEntry>,
}

async fn set_permissions(State(s): State<Shared>, Actor(a): Actor, Path(id): Path<String>, body: String) -> ApiResult {
    let id = parse_id(&id)?;
    let AclBody { acl } = parse_body(&body)?;
    let rec = blocking(move || s.set_permissions(&id, acl, &a)).await?;
    Ok(json_text(StatusCode::OK, &rec))
}

async fn children(State(s): State<Shared>, Actor(a): Actor, Path(id): Path<String>) -> ApiResult {
    let id = parse_id(&id)?;
    let list = blocking(move || s.list_children(&id, &a)).await?;
    Ok(json_text(StatusCode::OK, &list))
}

async fn search(State(s): State<Shared>, Actor(a): Actor, Query(q): Query<HashMap<String, String>>) -> ApiResult {
    let non_empty = |k: &str| q.get(k).filter(|v| !v.trim().is_empty()).cloned();
    let resource_type = match non_empty("type") {
        Some(t) => Some(
            ResourceType::parse(&t)
                .ok_or_else(|| ApiError(Error::new(Code::InvalidQuery, format!("unknown resource type `{t}`"))))?,
        ),
        None => None,
    };
    let query = SearchQuery {
        text: non_empty("q"),
        resource_type,
        annotated_with: non_empty("annotatedWith"),
        folder: non_empty("folder").map(|f| parse_id(&f)).transpose()?,
    };
    let hits = blocking(move || s.search(&query, &a)).await?;
    Ok(json_text(StatusCode::OK, &hits))
}

// ----- templates and instances -----

async fn validate(State(s): State<Shared>, Actor(a): Actor, Path(id): Path<String>, body: String) -> ApiResult {
    let id = parse_id(&id)?;
    let report = blocking(move || s.validate_document(&id, &body, &a)).await?;
    Ok(body_response(StatusCode::OK, render::JSON, render::report(&report)))
}

async fn schema(State(s): State<Shared>, Actor(a): Actor, Path(id): Path<String>) -> ApiResult {
    let id = parse_id(&id)?;
    let doc = blocking(move || s.schema(&id, &a)).await?;
    Ok(body_response(StatusCode::OK, render::JSON, doc))
}

async fn get_instance(
    State(s): State<Shared>,
    Actor(a): Actor,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult {
    let id = parse_id(&id)?;
    let format = ExportFormat::parse(q.get("format").map_or("jsonld", String::as_str))?;
    let body = blocking(move || s.export_instance(&id, format, &a)).await?;
    Ok(body_response(StatusCode::OK, format.content_type(), body))
}

async fn receipts(State(s): State<Shared>, Actor(a): Actor, Path(id): Path<String>) -> ApiResult {
    let id = parse_id(&id)?;
    let list = blocking(move || s.receipts(&id, &a)).await?;
    Ok(json_text(StatusCode::OK, &list))
}

#[derive(Deserialize)]
struct SubmitBody {
    target: String,
    #[serde(default)]
    force: bool,
}

async fn submit(State(s): State<Shared>, Actor(a): Actor, Path(id): Path<String>, body: String) -> ApiResult {
    let id = parse_id(&id)?;
    let SubmitBody { target, force } = parse_body(&body)?;
    let receipt = blocking(move || s.submit(&id, &target, force, &a)).await?;
    Ok(json_text(StatusCode::CREATED, &receipt))
}

async fn recommend(State(s): State<Shared>, Actor(a): Actor, body: String) -> ApiResult {
    let req: RecommendRequest = parse_body(&body)?;
    let list = blocking(move || s.recommend(&req, &a)).await?;
    Ok(body_response(StatusCode::OK, render::JSON, render::suggestions(&list)))
}

// ----- terminology -----

async fn term_search(State(s): State<Shared>, Actor(_): Actor, Query(q): Query<HashMap<String, String>>) -> ApiResult {
    let query = q.get("q").cloned().unwrap_or_default();
    let source = q.get("source").filter(|v| !v.is_empty()).cloned();
    let limit = match q.get("limit") {
        Some(l) => l.parse().map_err(|_| {
            ApiError(Error::new(
                Code::InvalidRequest,
                format!("limit `{l}` is not a positive integer"),
            ))
        })?,
        None => 20,
    };
    let outcome = blocking(move || s.terminology.search_terms(&query, source.as_deref(), limit)).await?;
    Ok(json_text(StatusCode::OK, &outcome))
}

async fn term_branch(State(s): State<Shared>, Actor(_): Actor, Query(q): Query<HashMap<String, String>>) -> ApiResult {
    let param = |k: &str| {
        q.get(k)
            .filter(|v| !v.is_empty())
            .cloned()
            .ok_or_else(|| ApiError(Error::new(Code::InvalidRequest, format!("`{k}` is required"))))
    };
    let source = param("source")?;
    let root = param("root")?;
    let include_root = match q.get("includeRoot").map(String::as_str) {
        None | Some("false") => false,
        Some("true") => true,
        Some(other) => {
            return Err(ApiError(Error::new(
                Code::InvalidRequest,
                format!("includeRoot `{other}` is not a boolean"),
            )))
        }
    };
    let iris = blocking(move || s.terminology.expand_branch(&source, &root, include_root)).await?;
    Ok(json_text(StatusCode::OK, &json!({ "iris": iris })))
}

#[derive(Deserialize)]
struct ProvisionalBody {
    label: String,
    #[serde(default)]
    mappings: Vec<Mapping>,
    #[serde(default)]
    force: bool,
    #[serde(default)]
    folder: Option<ResourceId>,
}

async fn provisional(State(s): State<Shared>, Actor(a): Actor, body: String) -> ApiResult {
    let b: ProvisionalBody = parse_body(&body)?;
    let term = blocking(move || s.create_provisional_term(&b.label, b.mappings, b.force, b.folder, &a)).await?;
    Ok(json_text(StatusCode::CREATED, &term))
}

// ----- groups and users -----

#[derive(Deserialize)]
struct GroupBody {
    name: String,
}

async fn create_group(State(s): State<Shared>, Actor(a): Actor, body: String) -> ApiResult {
    let GroupBody { name } = parse_body(&body)?;
    let g = blocking(move || s.create_group(&name, &a)).await?;
    Ok(json_text(StatusCode::CREATED, &g))
}

async fn get_group(State(s): State<Shared>, Actor(a): Actor, Path(id): Path<String>) -> ApiResult {
    let id = parse_id(&id)?;
    let g = blocking(move || s.group(&id, &a)).await?;
    Ok(json_text(StatusCode::OK, &g))
}

#[derive(Deserialize)]
struct MembersBody {
    #[serde(default)]
    add: Vec<ResourceId>,
    #[serde(default)]
    remove: Vec<ResourceId>,
}

async fn members(State(s): State<Shared>, Actor(a): Actor, Path(id): Path<String>, body: String) -> ApiResult {
    let id = parse_id(&id)?;
    let b: MembersBody = parse_body(&body)?;
    let g = blocking(move || s.change_members(&id, &b.add, &b.remove, &a)).await?;
    Ok(json_text(StatusCode::OK, &g))
}

async fn me(State(s): State<Shared>, Actor(a): Actor) -> ApiResult {
    let user = s.repo.user(&a).ok_or_else(unauthenticated)?;
    Ok(json_text(
        StatusCode::OK,
        &json!({"id": user.id, "name": user.name, "homeFolder": user.home_folder}),
    ))
}

// ----- plumbing -----

pub fn openapi() -> Value {
    let mut paths = serde_json::Map::new();
    for (method, path, summary) in ROUTES {
        let entry = paths
            .entry(format!("{PREFIX}{path}"))
            .or_insert_with(|| json!({}))
            .as_object_mut()
            .expect("path items are objects");
        let mut op = json!({
            "summary": summary,
            "security": [{"apiKey": []}],
            "responses": {
                "default": {
                    "description": "Error body {error, message, path?}",
                    "content": {"application/json": {"schema": {"$ref": "#/components/schemas/Error"}}}
                }
            }
        });
        if path.contains("{id}") {
            op["parameters"] =
                json!([{"name": "id", "in": "path", "required": true, "schema": {"type": "string", "format": "uuid"}}]);
        }
        entry.insert((*method).to_owned(), op);
    }
    json!({
        "openapi": "3.0.3",
        "info": {"title": "metaforge", "version": env!("CARGO_PKG_VERSION")},
        "paths": paths,
        "components": {
            "securitySchemes": {"apiKey": {"type": "apiKey", "in": "header", "name": "Authorization"}},
            "schemas": {"Error": {
                "type": "object",
                "required": ["error", "message"],
                "properties": {"error": {"type": "string"}, "message": {"type": "string"}, "path": {"type": "string"}}
            }}
        }
    })
}

async fn openapi_doc() -> Response {
    json_text(StatusCode::OK, &openapi())
}

async fn not_found() -> ApiError {
    ApiError(Error::new(Code::NotFound, "no such route"))
}

/// Gives bare 405 responses the standard error body.
async fn method_not_allowed(resp: Response) -> Response {
    if resp.status() == StatusCode::METHOD_NOT_ALLOWED {
        let allow = resp.headers().get(header::ALLOW).cloned();
        let mut out = json_text(
            StatusCode::METHOD_NOT_ALLOWED,
            &json!({"error": "METHOD_NOT_ALLOWED", "message": "method not allowed on this route"}),
        );
        if let Some(allow) = allow {
            out.headers_mut().insert(header::ALLOW, allow);
        }
        return out;
    }
    resp
}

pub fn router(service: Arc<Service>) -> Router {
    let api = Router::new()
        .route("/templates", post(create_template))
        .route("/elements", post(create_element))
        .route("/fields", post(create_field))
        .route("/instances", post(create_instance))
        .route("/folders", post(create_folder))
        .route("/value-sets", post(create_value_set))
        .route(
            "/resources/:id",
            get(get_resource).put(put_resource).delete(delete_resource),
        )
        .route("/resources/:id/move", post(move_resource))
        .route("/resources/:id/permissions", put(set_permissions))
        .route("/folders/:id/children", get(children))
        .route("/search", get(search))
        .route("/templates/:id/validate", post(validate))
        .route("/templates/:id/schema", get(schema))
        .route("/instances/:id", get(get_instance))
        .route("/instances/:id/receipts", get(receipts))
        .route("/instances/:id/submit", post(submit))
        .route("/recommend", post(recommend))
        .route("/terminology/search", get(term_search))
        .route("/terminology/branch", get(term_branch))
        .route("/terminology/provisional-terms", post(provisional))
        .route("/groups", post(create_group))
        .route("/groups/:id", get(get_group))
        .route("/groups/:id/members", put(members))
        .route("/users/me", get(me))
        .route("/openapi.json", get(openapi_doc));
    Router::new()
        .nest(PREFIX, api)
        .route("/openapi.json", get(openapi_doc))
        .fallback(not_found)
        .layer(axum::middleware::map_response(method_not_allowed))
        .with_state(service)
}

/// Serves until ctrl-c.
pub fn serve(service: Arc<Service>, port: u16) -> crate::Result<()> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
        tracing::info!("listening on {}", listener.local_addr()?);
        axum::serve(listener, router(service))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}
