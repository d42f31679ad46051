//! HTTP/JSON service over an [`Engine`].
//!
//! Reads never change the store revision. Every mutation answers with the
//! revision it produced. Mutations require the admin token header when one
//! is configured.

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{FromRequest, Path, Query, Request, State};
use axum::http::{HeaderMap, Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use nameguard_core::{
    Account, AccountId, AccountStatus, Engine, LowAdequacy, MetricsError, ModerationError,
    ReasonCode, Registration, RegistrationRequest, RenameOutcome, Revision, SanctionCode,
    StoreError, TermSeverity, Timestamp,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::webhook::{event_for, Notifier};

pub const ADMIN_TOKEN_HEADER: &str = "x-admin-token";

#[derive(Clone)]
pub struct AppState {
    pub engine: Arc<Engine>,
    pub admin_token: Option<String>,
    pub notifier: Option<Notifier>,
    /// Saved to on shutdown; `None` keeps the service in memory only.
    pub data_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(engine: Engine) -> Self {
        AppState {
            engine: Arc::new(engine),
            admin_token: None,
            notifier: None,
            data_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub status: u16,
    pub code: String,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status: status.as_u16(),
            code: code.to_owned(),
            message: message.into(),
        }
    }

    fn bad_request(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    fn not_found(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let msg = e.to_string();
        match e {
            StoreError::RecordConflict { .. } => Self::new(StatusCode::CONFLICT, "record_conflict", msg),
            StoreError::AccountConflict(_) => Self::new(StatusCode::CONFLICT, "account_conflict", msg),
            StoreError::TermNotFound(_) => Self::not_found("term_not_found", msg),
            StoreError::BlacklistNotFound(_) => Self::not_found("blacklist_entry_not_found", msg),
            StoreError::AccountNotFound(_) => Self::not_found("account_not_found", msg),
            StoreError::RecordNotFound(_) => Self::not_found("record_not_found", msg),
            StoreError::InvalidInput(_) => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_input", msg),
        }
    }
}

impl From<ModerationError> for ApiError {
    fn from(e: ModerationError) -> Self {
        let msg = e.to_string();
        match e {
            ModerationError::AccountNotFound(_) => Self::not_found("account_not_found", msg),
            ModerationError::InvalidState { .. } => Self::new(StatusCode::CONFLICT, "invalid_state", msg),
            ModerationError::Store(s) => s.into(),
        }
    }
}

impl From<MetricsError> for ApiError {
    fn from(e: MetricsError) -> Self {
        let code = match e {
            MetricsError::SideCondition(_) => "efficiency_undefined",
            MetricsError::LowAdequacyExceedsVerified { .. } => "low_adequacy_exceeds_verified",
            MetricsError::NoAccounts => "no_accounts",
        };
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, code, e.to_string())
    }
}

/// `Json` extractor whose rejections use the [`ApiError`] body.
pub struct ApiJson<T>(pub T);

impl<S, T> FromRequest<S> for ApiJson<T>
where
    Json<T>: FromRequest<S, Rejection = JsonRejection>,
    S: Send + Sync,
{
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(ApiJson(v)),
            Err(JsonRejection::JsonDataError(e)) => Err(ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "invalid_body",
                e.body_text(),
            )),
            Err(e) => Err(ApiError::bad_request("bad_request", e.body_text())),
        }
    }
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> Result<T, ApiError> {
    q.map(|Query(v)| v)
        .map_err(|e| ApiError::bad_request("bad_query", e.body_text()))
}

type ApiResult<T> = Result<Json<T>, ApiError>;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/verify", post(verify))
        .route("/api/register", post(register))
        .route("/api/accounts", get(list_accounts))
        .route("/api/accounts/{id}/status", post(set_status))
        .route("/api/accounts/{id}/rename", post(rename))
        .route("/api/flags", get(flags))
        .route("/api/scan", post(scan))
        .route("/api/sanctions", post(sanction))
        .route(
            "/api/prohibited",
            get(list_prohibited).post(add_prohibited).delete(remove_prohibited),
        )
        .route(
            "/api/blacklist",
            get(list_blacklist).post(add_blacklist).delete(remove_blacklist),
        )
        .route("/api/metrics/classification", get(classification))
        .route("/api/metrics/efficiency", get(efficiency))
        .fallback(|| async { ApiError::not_found("not_found", "no such endpoint") })
        .layer(middleware::from_fn_with_state(state.clone(), require_token))
        .with_state(state)
}

/// `/api/verify` changes nothing and stays open.
async fn require_token(State(state): State<AppState>, req: Request, next: Next) -> Response {
    let mutating = matches!(*req.method(), Method::POST | Method::DELETE | Method::PUT | Method::PATCH);
    if let Some(expected) = &state.admin_token {
        if mutating && req.uri().path() != "/api/verify" && !token_matches(req.headers(), expected) {
            return ApiError::new(
                StatusCode::UNAUTHORIZED,
                "unauthorized",
                format!("missing or wrong `{ADMIN_TOKEN_HEADER}` header"),
            )
            .into_response();
        }
    }
    next.run(req).await
}

fn token_matches(headers: &HeaderMap, expected: &str) -> bool {
    let Some(got) = headers.get(ADMIN_TOKEN_HEADER) else {
        return false;
    };
    let (a, b) = (got.as_bytes(), expected.as_bytes());
    // Length leaks; contents do not.
    a.len() == b.len() && a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

#[derive(Serialize)]
struct Revised<T> {
    revision: Revision,
    #[serde(flatten)]
    body: T,
}

fn revised<T>(revision: Revision, body: T) -> Json<Revised<T>> {
    Json(Revised { revision, body })
}

async fn verify(State(st): State<AppState>, ApiJson(req): ApiJson<RegistrationRequest>) -> Json<Value> {
    Json(serde_json::to_value(st.engine.verify(&req)).unwrap_or(Value::Null))
}

async fn register(
    State(st): State<AppState>,
    ApiJson(req): ApiJson<RegistrationRequest>,
) -> ApiResult<Revised<Registration>> {
    let out = st.engine.register(&req, Timestamp::now())?;
    Ok(revised(st.engine.revision(), out))
}

#[derive(Debug, Serialize)]
pub struct AccountView {
    #[serde(flatten)]
    pub account: Account,
    pub username: Option<String>,
    pub flagged: bool,
}

#[derive(Deserialize)]
struct AccountsQuery {
    status: Option<String>,
}

async fn list_accounts(
    State(st): State<AppState>,
    q: Result<Query<AccountsQuery>, QueryRejection>,
) -> ApiResult<Value> {
    let status = match query(q)?.status.filter(|s| !s.is_empty()) {
        Some(s) => Some(
            s.parse::<AccountStatus>()
                .map_err(|e| ApiError::bad_request("invalid_status", e.to_string()))?,
        ),
        None => None,
    };
    let snapshot = st.engine.snapshot();
    let open: std::collections::BTreeSet<AccountId> =
        st.engine.open_flags().iter().map(|f| f.account_id).collect();
    let accounts: Vec<AccountView> = snapshot
        .accounts()
        .filter(|a| status.is_none_or(|s| a.status == s))
        .map(|a| AccountView {
            account: a.clone(),
            username: snapshot.record(a.username_id).map(|r| r.raw.clone()),
            flagged: open.contains(&a.id),
        })
        .collect();
    Ok(Json(json!({ "revision": snapshot.revision(), "accounts": accounts })))
}

fn parse_account_id(raw: &str) -> Result<AccountId, ApiError> {
    raw.parse()
        .map_err(|_| ApiError::bad_request("invalid_account_id", format!("bad account id `{raw}`")))
}

#[derive(Deserialize)]
struct StatusBody {
    status: AccountStatus,
}

async fn set_status(
    State(st): State<AppState>,
    Path(id): Path<String>,
    ApiJson(body): ApiJson<StatusBody>,
) -> ApiResult<Value> {
    let id = parse_account_id(&id)?;
    let revision = st.engine.set_status(id, body.status)?;
    Ok(Json(json!({ "revision": revision, "account_id": id, "status": body.status })))
}

#[derive(Deserialize)]
struct RenameBody {
    username: String,
}

async fn rename(
    State(st): State<AppState>,
    Path(id): Path<String>,
    ApiJson(body): ApiJson<RenameBody>,
) -> ApiResult<Revised<RenameOutcome>> {
    let id = parse_account_id(&id)?;
    let out = st.engine.rename(id, &body.username, Timestamp::now())?;
    Ok(revised(st.engine.revision(), out))
}

async fn flags(State(st): State<AppState>) -> Json<Value> {
    Json(json!({ "revision": st.engine.revision(), "flags": st.engine.open_flags() }))
}

async fn scan(State(st): State<AppState>) -> Json<Value> {
    let now = Timestamp::now();
    let new_flags = st.engine.scan(now);
    Json(json!({
        "revision": st.engine.revision(),
        "new_flags": new_flags,
        "report": st.engine.report(now),
    }))
}

#[derive(Deserialize)]
struct SanctionBody {
    account_id: AccountId,
    sanction_code: SanctionCode,
    rule_code: ReasonCode,
    #[serde(default)]
    note: String,
}

async fn sanction(State(st): State<AppState>, ApiJson(body): ApiJson<SanctionBody>) -> ApiResult<Value> {
    let deviation = st.engine.sanction(
        body.account_id,
        body.sanction_code,
        body.rule_code,
        &body.note,
        Timestamp::now(),
    )?;
    let snapshot = st.engine.snapshot();
    let username = snapshot
        .account_record(body.account_id)
        .map(|r| r.raw.clone())
        .unwrap_or_default();
    if let (Some(notifier), Some(event)) = (&st.notifier, event_for(&deviation, &username)) {
        let notifier = notifier.clone();
        tokio::spawn(async move { notifier.deliver(event).await });
    }
    let status = snapshot.account(body.account_id).map(|a| a.status);
    Ok(Json(json!({
        "revision": snapshot.revision(),
        "deviation": deviation,
        "status": status,
    })))
}

async fn list_prohibited(State(st): State<AppState>) -> Json<Value> {
    let s = st.engine.snapshot();
    let terms: Vec<_> = s.prohibited().collect();
    Json(json!({ "revision": s.revision(), "terms": terms }))
}

#[derive(Deserialize)]
struct TermBody {
    term: String,
    #[serde(default = "default_category")]
    category: String,
    #[serde(default = "default_severity")]
    severity: TermSeverity,
}

fn default_category() -> String {
    "general".into()
}

fn default_severity() -> TermSeverity {
    TermSeverity::Reject
}

async fn add_prohibited(State(st): State<AppState>, ApiJson(body): ApiJson<TermBody>) -> ApiResult<Value> {
    let (revision, term) = st.engine.stores().write(|s| {
        let rev = s.add_prohibited(&body.term, &body.category, body.severity)?;
        let canonical = s.canonical_term(&body.term);
        Ok::<_, StoreError>((rev, s.prohibited_term(&canonical).cloned()))
    })?;
    Ok(Json(json!({ "revision": revision, "term": term })))
}

#[derive(Deserialize)]
struct TermQuery {
    term: String,
}

async fn remove_prohibited(
    State(st): State<AppState>,
    q: Result<Query<TermQuery>, QueryRejection>,
) -> ApiResult<Value> {
    let q = query(q)?;
    let revision = st.engine.stores().write(|s| s.remove_prohibited(&q.term))?;
    Ok(Json(json!({ "revision": revision })))
}

async fn list_blacklist(State(st): State<AppState>) -> Json<Value> {
    let s = st.engine.snapshot();
    let entries: Vec<_> = s.blacklist().collect();
    Json(json!({ "revision": s.revision(), "entries": entries }))
}

#[derive(Deserialize)]
struct BlacklistBody {
    name: String,
    #[serde(default = "default_code")]
    sanction_code: SanctionCode,
    #[serde(default)]
    reason: String,
}

fn default_code() -> SanctionCode {
    SanctionCode::HIGHEST
}

async fn add_blacklist(State(st): State<AppState>, ApiJson(body): ApiJson<BlacklistBody>) -> ApiResult<Value> {
    let (revision, entry) = st.engine.stores().write(|s| {
        let rev = s.add_blacklist(&body.name, body.sanction_code, &body.reason, Timestamp::now())?;
        let key = nameguard_core::normalize(&body.name);
        let entry = s.blacklist().find(|e| e.normalized_name == key).cloned();
        Ok::<_, StoreError>((rev, entry))
    })?;
    Ok(Json(json!({ "revision": revision, "entry": entry })))
}

#[derive(Deserialize)]
struct NameQuery {
    name: String,
}

async fn remove_blacklist(
    State(st): State<AppState>,
    q: Result<Query<NameQuery>, QueryRejection>,
) -> ApiResult<Value> {
    let q = query(q)?;
    let revision = st.engine.stores().write(|s| s.remove_blacklist(&q.name))?;
    Ok(Json(json!({ "revision": revision })))
}

async fn classification(State(st): State<AppState>) -> ApiResult<Value> {
    let report = st.engine.classification()?;
    let mut v = serde_json::to_value(report).unwrap_or(Value::Null);
    v["revision"] = json!(st.engine.revision());
    Ok(Json(v))
}

#[derive(Deserialize)]
struct EfficiencyQuery {
    low_adequacy: Option<String>,
}

async fn efficiency(
    State(st): State<AppState>,
    q: Result<Query<EfficiencyQuery>, QueryRejection>,
) -> ApiResult<Value> {
    let low: LowAdequacy = query(q)?
        .low_adequacy
        .as_deref()
        .unwrap_or("auto")
        .parse()
        .map_err(|e: String| ApiError::bad_request("invalid_low_adequacy", e))?;
    let input = st.engine.efficiency_input(low);
    let value = nameguard_core::efficiency(input)?;
    Ok(Json(json!({
        "efficiency": value,
        "n_verified": input.n_verified,
        "n_low_adequacy": input.n_low_adequacy,
        "revision": st.engine.revision(),
    })))
}

/// Runs the service until `shutdown` resolves, then saves the stores.
pub async fn serve(
    state: AppState,
    listener: tokio::net::TcpListener,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let engine = state.engine.clone();
    let data_dir = state.data_dir.clone();
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await?;
    if let Some(dir) = data_dir {
        engine
            .save(&dir)
            .map_err(|e| std::io::Error::other(e.to_string()))?;
        tracing::info!(dir = %dir.display(), revision = engine.revision(), "stores saved");
    }
    Ok(())
}

/// Resolves on Ctrl-C or SIGTERM.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
}
