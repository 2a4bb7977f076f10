//! JSON over HTTP, rooted at `/api/v1`.
//!
//! Requests other than login and registration carry `Authorization: Bearer
//! <token>`. Every failure, including malformed paths, bodies and unknown
//! routes, answers with `{ code, message, details }`.

use std::sync::Arc;

use axum::extract::rejection::{PathRejection, QueryRejection};
use axum::extract::{FromRequest, FromRequestParts, Request, State};
use axum::http::request::Parts;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use indexmap::IndexMap;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{Forum, NewTopic};
use crate::error::Error;
use crate::ids::{GiftId, PollId, PostId, SessionId, TemplateId, TestId, TopicId, UserId};
use crate::model::{LifecycleEvent, RelationKind, Role, TopicState};
use crate::stakeholders::{GiftDraft, Stakeholder, TestDraft};
use crate::templates::TemplateDraft;
use crate::threads::{Answer, Outcome, PollKind};

type AppState = Arc<Forum>;

/// An [`Error`] on its way to becoming a response.
#[derive(Debug)]
pub struct ApiError(pub Error);

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        ApiError(err)
    }
}

pub fn status_of(err: &Error) -> StatusCode {
    match err {
        Error::Unauthenticated | Error::BadCredentials => StatusCode::UNAUTHORIZED,
        Error::Forbidden(_) | Error::NotParticipant => StatusCode::FORBIDDEN,
        Error::NotFound(_) => StatusCode::NOT_FOUND,
        Error::InvalidTransition { .. }
        | Error::StaleVersion { .. }
        | Error::Duplicate(_)
        | Error::AlreadyExists(_)
        | Error::AlreadyAccepted
        | Error::TopicNotOpen(_)
        | Error::PollClosed
        | Error::SessionClosed
        | Error::OutOfStock => StatusCode::CONFLICT,
        Error::TemplateViolations(_)
        | Error::MalformedTemplate(_)
        | Error::SelfRelation
        | Error::EmptyBody
        | Error::UnknownOption(_)
        | Error::ArityMismatch { .. }
        | Error::LengthMismatch { .. }
        | Error::InsufficientScore { .. }
        | Error::InvalidAmount => StatusCode::UNPROCESSABLE_ENTITY,
        Error::BadRequest(_) | Error::InvalidConfig(_) => StatusCode::BAD_REQUEST,
        Error::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = status_of(&self.0);
        if status == StatusCode::INTERNAL_SERVER_ERROR {
            tracing::error!(error = %self.0, "request failed");
        }
        (status, axum::Json(self.0.to_body())).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// JSON body extractor whose rejections use the error vocabulary.
pub struct Json<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for Json<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match axum::Json::<T>::from_request(req, state).await {
            Ok(axum::Json(value)) => Ok(Json(value)),
            Err(rejection) => Err(ApiError(Error::BadRequest(rejection.body_text()))),
        }
    }
}

impl<T: Serialize> IntoResponse for Json<T> {
    fn into_response(self) -> Response {
        axum::Json(self.0).into_response()
    }
}

pub struct Path<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned + Send> FromRequestParts<S> for Path<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        axum::extract::Path::<T>::from_request_parts(parts, state)
            .await
            .map(|axum::extract::Path(v)| Path(v))
            .map_err(|r: PathRejection| ApiError(Error::BadRequest(r.body_text())))
    }
}

pub struct Query<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequestParts<S> for Query<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        axum::extract::Query::<T>::from_request_parts(parts, state)
            .await
            .map(|axum::extract::Query(v)| Query(v))
            .map_err(|r: QueryRejection| ApiError(Error::BadRequest(r.body_text())))
    }
}

/// The authenticated stakeholder behind a request.
pub struct Caller(pub Stakeholder);

impl FromRequestParts<AppState> for Caller {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, forum: &AppState) -> Result<Self, Self::Rejection> {
        let token = parts
            .headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(str::trim)
            .ok_or(Error::Unauthenticated)?;
        Ok(Caller(forum.authenticate(token)?))
    }
}

fn require_management(caller: &Stakeholder) -> Result<(), Error> {
    if caller.role == Role::Management {
        Ok(())
    } else {
        Err(Error::Forbidden(format!("{} is not a management user", caller.name)))
    }
}

/// Runs a storage-bound forum call off the async workers.
async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce() -> crate::Result<T> + Send + 'static,
{
    match tokio::task::spawn_blocking(f).await {
        Ok(result) => result.map_err(ApiError),
        Err(join) => Err(ApiError(Error::Storage(format!("worker failed: {join}")))),
    }
}

fn created<T: Serialize>(value: T) -> Response {
    (StatusCode::CREATED, axum::Json(value)).into_response()
}

/// Parses a comma-separated state list; `None` when absent or empty.
fn parse_states(raw: Option<&str>) -> Result<Option<Vec<TopicState>>, Error> {
    match raw.map(str::trim).filter(|s| !s.is_empty()) {
        None => Ok(None),
        Some(list) => list
            .split(',')
            .map(|s| s.trim().parse::<TopicState>())
            .collect::<Result<Vec<_>, _>>()
            .map(Some),
    }
}

pub fn router(forum: Arc<Forum>) -> Router {
    let api = Router::new()
        .route("/auth/login", post(login))
        .route("/auth/register", post(register))
        .route("/auth/logout", post(logout))
        .route("/me", get(me))
        .route("/config", get(config))
        .route("/templates", get(list_templates).post(define_template))
        .route("/templates/{id}", get(get_template))
        .route("/templates/{id}/form", get(template_form))
        .route("/screen", post(screen))
        .route("/topics", get(list_topics).post(create_topic))
        .route("/topics/{id}", get(get_topic))
        .route("/topics/{id}/aggregate", get(aggregate))
        .route("/topics/{id}/events", post(apply_event))
        .route("/topics/{id}/transitions", get(transitions))
        .route("/topics/{id}/relations", get(relations).post(link))
        .route("/topics/{id}/posts", post(add_post))
        .route("/topics/{id}/polls", post(open_poll))
        .route("/topics/{id}/responses", post(submit_response))
        .route("/topics/{id}/summary", get(summary))
        .route("/topics/{id}/sessions", post(open_session))
        .route("/topics/{id}/accept", post(accept_answer))
        .route("/polls/{id}", get(get_poll))
        .route("/polls/{id}/votes", post(cast_vote))
        .route("/polls/{id}/tally", get(tally))
        .route("/polls/{id}/close", post(close_poll))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/messages", get(fetch_messages).post(post_message))
        .route("/sessions/{id}/close", post(close_session))
        .route("/tests", get(list_tests).post(define_test))
        .route("/tests/{id}", get(get_test))
        .route("/tests/{id}/grade", post(grade_test))
        .route("/users/{id}", get(get_user))
        .route("/users/{id}/award", post(award))
        .route("/gifts", get(list_gifts).post(define_gift))
        .route("/gifts/{id}/redeem", post(redeem))
        .route("/messages", get(inbox).post(send_message))
        .route("/ledger", get(ledger))
        .route("/export", get(export));
    Router::new()
        .nest("/api/v1", api)
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed)
        .with_state(forum)
}

async fn not_found() -> ApiError {
    ApiError(Error::not_found("route"))
}

async fn method_not_allowed() -> Response {
    let body = json!({
        "code": "METHOD_NOT_ALLOWED",
        "message": "method not allowed on this route",
        "details": Value::Null,
    });
    (StatusCode::METHOD_NOT_ALLOWED, axum::Json(body)).into_response()
}

/// Serves `forum` on `listener` until Ctrl-C.
pub async fn serve(forum: Arc<Forum>, listener: tokio::net::TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router(forum))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

// Accounts.

#[derive(Deserialize)]
struct Credentials {
    handle: String,
    secret: String,
}

async fn login(State(forum): State<AppState>, Json(c): Json<Credentials>) -> ApiResult<Response> {
    let session = blocking(move || forum.login(&c.handle, &c.secret)).await?;
    Ok(Json(session).into_response())
}

async fn register(State(forum): State<AppState>, Json(c): Json<Credentials>) -> ApiResult<Response> {
    let user = blocking(move || forum.register(&c.handle, &c.secret, Role::General)).await?;
    Ok(created(user))
}

async fn logout(State(forum): State<AppState>, parts: axum::http::HeaderMap) -> ApiResult<StatusCode> {
    let token = parts
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .map(|t| t.trim().to_owned())
        .ok_or(Error::Unauthenticated)?;
    forum.authenticate(&token)?;
    blocking(move || forum.logout(&token)).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn me(Caller(caller): Caller) -> Json<Stakeholder> {
    Json(caller)
}

async fn get_user(
    State(forum): State<AppState>,
    Caller(_): Caller,
    Path(id): Path<UserId>,
) -> ApiResult<Json<Stakeholder>> {
    Ok(Json(forum.stakeholder(id)?))
}

async fn config(State(forum): State<AppState>, Caller(_): Caller) -> Json<super::Config> {
    Json(forum.config().clone())
}

// Templates and the duplicate gate.

async fn list_templates(State(forum): State<AppState>, Caller(_): Caller) -> ApiResult<Response> {
    Ok(Json(forum.templates()?).into_response())
}

async fn define_template(
    State(forum): State<AppState>,
    Caller(caller): Caller,
    Json(draft): Json<TemplateDraft>,
) -> ApiResult<Response> {
    let template = blocking(move || forum.define_template(&caller, draft)).await?;
    Ok(created(template))
}

async fn get_template(
    State(forum): State<AppState>,
    Caller(_): Caller,
    Path(id): Path<TemplateId>,
) -> ApiResult<Response> {
    Ok(Json(forum.template(id)?).into_response())
}

async fn template_form(
    State(forum): State<AppState>,
    Caller(_): Caller,
    Path(id): Path<TemplateId>,
) -> ApiResult<Response> {
    Ok(Json(forum.template(id)?.guidance()).into_response())
}

#[derive(Deserialize)]
struct ScreenRequest {
    text: String,
}

async fn screen(
    State(forum): State<AppState>,
    Caller(_): Caller,
    Json(req): Json<ScreenRequest>,
) -> Json<crate::dedup::ScreenResult> {
    Json(forum.screen(&req.text))
}

// Topics and the lifecycle.

async fn create_topic(
    State(forum): State<AppState>,
    Caller(caller): Caller,
    Json(req): Json<NewTopic>,
) -> ApiResult<Response> {
    let topic = blocking(move || forum.create_topic(&caller, req)).await?;
    Ok(created(topic))
}

#[derive(Deserialize)]
struct TopicQuery {
    state: Option<String>,
    after: Option<TopicId>,
    limit: Option<usize>,
}

async fn list_topics(
    State(forum): State<AppState>,
    Caller(caller): Caller,
    Query(q): Query<TopicQuery>,
) -> ApiResult<Response> {
    let states = parse_states(q.state.as_deref())?;
    let page = forum.list_topics(caller.role, states.as_deref(), q.after, q.limit.unwrap_or(100))?;
    Ok(Json(page).into_response())
}

async fn get_topic(
    State(forum): State<AppState>,
    Caller(_): Caller,
    Path(id): Path<TopicId>,
) -> ApiResult<Response> {
    Ok(Json(forum.topic(id)?).into_response())
}

async fn aggregate(
    State(forum): State<AppState>,
    Caller(_): Caller,
    Path(id): Path<TopicId>,
) -> ApiResult<Response> {
    let view = blocking(move || forum.aggregate(id)).await?;
    Ok(Json(view).into_response())
}

#[derive(Deserialize)]
struct EventRequest {
    event: LifecycleEvent,
    #[serde(default)]
    expected_version: Option<u64>,
    #[serde(default)]
    duplicate_of: Option<TopicId>,
}

async fn apply_event(
    State(forum): State<AppState>,
    Caller(caller): Caller,
    Path(id): Path<TopicId>,
    Json(req): Json<EventRequest>,
) -> ApiResult<Response> {
    let (topic, transition) = blocking(move || {
        forum.apply_event(&caller, id, req.event, req.expected_version, req.duplicate_of)
    })
    .await?;
    Ok(Json(json!({ "topic": topic, "transition": transition })).into_response())
}

async fn transitions(
    State(forum): State<AppState>,
    Caller(_): Caller,
    Path(id): Path<TopicId>,
) -> ApiResult<Response> {
    forum.topic(id)?;
    Ok(Json(forum.transitions(id)?).into_response())
}

async fn relations(
    State(forum): State<AppState>,
    Caller(_): Caller,
    Path(id): Path<TopicId>,
) -> ApiResult<Response> {
    forum.topic(id)?;
    Ok(Json(forum.relations(id)?).into_response())
}

#[derive(Deserialize)]
struct LinkRequest {
    target: TopicId,
    kind: RelationKind,
}

async fn link(
    State(forum): State<AppState>,
    Caller(caller): Caller,
    Path(id): Path<TopicId>,
    Json(req): Json<LinkRequest>,
) -> ApiResult<Response> {
    let relation = blocking(move || forum.link_requirements(&caller, id, req.target, req.kind)).await?;
    Ok(created(relation))
}

async fn export(
    State(forum): State<AppState>,
    Caller(caller): Caller,
    Query(q): Query<TopicQuery>,
) -> ApiResult<Response> {
    let states = parse_states(q.state.as_deref())?;
    let views = blocking(move || forum.export_requirements(&caller, states.as_deref())).await?;
    Ok(Json(views).into_response())
}

// Threads, polls, questionnaires and negotiation.

#[derive(Deserialize)]
struct PostRequest {
    body: String,
}

async fn add_post(
    State(forum): State<AppState>,
    Caller(caller): Caller,
    Path(id): Path<TopicId>,
    Json(req): Json<PostRequest>,
) -> ApiResult<Response> {
    let (post, merged) = blocking(move || forum.add_post(&caller, id, &req.body)).await?;
    Ok(created(json!({ "post": post, "merged": merged })))
}

#[derive(Deserialize)]
struct PollRequest {
    kind: PollKind,
    #[serde(default)]
    options: Vec<String>,
}

async fn open_poll(
    State(forum): State<AppState>,
    Caller(caller): Caller,
    Path(id): Path<TopicId>,
    Json(req): Json<PollRequest>,
) -> ApiResult<Response> {
    let poll = blocking(move || forum.open_poll(&caller, id, req.kind, req.options)).await?;
    Ok(created(poll))
}

async fn get_poll(
    State(forum): State<AppState>,
    Caller(_): Caller,
    Path(id): Path<PollId>,
) -> ApiResult<Response> {
    Ok(Json(crate::threads::PollView::from(&forum.poll(id)?)).into_response())
}

#[derive(Deserialize)]
struct VoteRequest {
    option: String,
}

async fn cast_vote(
    State(forum): State<AppState>,
    Caller(caller): Caller,
    Path(id): Path<PollId>,
    Json(req): Json<VoteRequest>,
) -> ApiResult<Response> {
    let tally = blocking(move || {
        forum.cast_vote(&caller, id, &req.option)?;
        forum.tally(id)
    })
    .await?;
    Ok(Json(json!({ "poll": id, "tally": tally })).into_response())
}

async fn tally(
    State(forum): State<AppState>,
    Caller(_): Caller,
    Path(id): Path<PollId>,
) -> ApiResult<Json<IndexMap<String, usize>>> {
    Ok(Json(forum.tally(id)?))
}

async fn close_poll(
    State(forum): State<AppState>,
    Caller(caller): Caller,
    Path(id): Path<PollId>,
) -> ApiResult<Response> {
    let poll = blocking(move || forum.close_poll(&caller, id)).await?;
    Ok(Json(crate::threads::PollView::from(&poll)).into_response())
}

#[derive(Deserialize)]
struct ResponseRequest {
    answers: Vec<Answer>,
}

async fn submit_response(
    State(forum): State<AppState>,
    Caller(caller): Caller,
    Path(id): Path<TopicId>,
    Json(req): Json<ResponseRequest>,
) -> ApiResult<StatusCode> {
    blocking(move || forum.submit_response(&caller, id, req.answers)).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn summary(
    State(forum): State<AppState>,
    Caller(_): Caller,
    Path(id): Path<TopicId>,
) -> ApiResult<Response> {
    Ok(Json(forum.summarize(id)?).into_response())
}

#[derive(Deserialize)]
struct SessionRequest {
    #[serde(default)]
    participants: Vec<UserId>,
}

async fn open_session(
    State(forum): State<AppState>,
    Caller(caller): Caller,
    Path(id): Path<TopicId>,
    Json(req): Json<SessionRequest>,
) -> ApiResult<Response> {
    let session = blocking(move || forum.open_session(&caller, id, req.participants)).await?;
    Ok(created(session))
}

async fn get_session(
    State(forum): State<AppState>,
    Caller(caller): Caller,
    Path(id): Path<SessionId>,
) -> ApiResult<Response> {
    let session = forum.session(id)?;
    if !session.participants.contains(&caller.id) && caller.role != Role::Management {
        return Err(Error::NotParticipant.into());
    }
    Ok(Json(session).into_response())
}

#[derive(Deserialize)]
struct TextRequest {
    text: String,
}

async fn post_message(
    State(forum): State<AppState>,
    Caller(caller): Caller,
    Path(id): Path<SessionId>,
    Json(req): Json<TextRequest>,
) -> ApiResult<Response> {
    let message = blocking(move || forum.post_message(&caller, id, &req.text)).await?;
    Ok(created(message))
}

#[derive(Deserialize)]
struct SinceQuery {
    #[serde(default)]
    since: u64,
}

async fn fetch_messages(
    State(forum): State<AppState>,
    Caller(caller): Caller,
    Path(id): Path<SessionId>,
    Query(q): Query<SinceQuery>,
) -> ApiResult<Response> {
    Ok(Json(forum.fetch_messages(&caller, id, q.since)?).into_response())
}

#[derive(Deserialize)]
struct CloseRequest {
    outcome: Outcome,
}

async fn close_session(
    State(forum): State<AppState>,
    Caller(caller): Caller,
    Path(id): Path<SessionId>,
    Json(req): Json<CloseRequest>,
) -> ApiResult<Response> {
    let (session, topic) = blocking(move || forum.close_session(&caller, id, req.outcome)).await?;
    Ok(Json(json!({ "session": session, "topic": topic })).into_response())
}

// Incentives.

#[derive(Deserialize)]
struct AcceptRequest {
    post: PostId,
}

async fn accept_answer(
    State(forum): State<AppState>,
    Caller(caller): Caller,
    Path(id): Path<TopicId>,
    Json(req): Json<AcceptRequest>,
) -> ApiResult<Response> {
    let reward = blocking(move || forum.accept_answer(&caller, id, req.post)).await?;
    Ok(Json(reward).into_response())
}

async fn list_tests(State(forum): State<AppState>, Caller(_): Caller) -> ApiResult<Response> {
    let tests: Vec<super::PublicTest> = forum.tests()?.iter().map(Into::into).collect();
    Ok(Json(tests).into_response())
}

async fn define_test(
    State(forum): State<AppState>,
    Caller(caller): Caller,
    Json(draft): Json<TestDraft>,
) -> ApiResult<Response> {
    let test = blocking(move || forum.define_test(&caller, draft)).await?;
    Ok(created(super::PublicTest::from(&test)))
}

async fn get_test(
    State(forum): State<AppState>,
    Caller(_): Caller,
    Path(id): Path<TestId>,
) -> ApiResult<Response> {
    Ok(Json(super::PublicTest::from(&forum.test(id)?)).into_response())
}

#[derive(Deserialize)]
struct GradeRequest {
    answers: Vec<usize>,
}

async fn grade_test(
    State(forum): State<AppState>,
    Caller(caller): Caller,
    Path(id): Path<TestId>,
    Json(req): Json<GradeRequest>,
) -> ApiResult<Response> {
    let (result, user) = blocking(move || forum.grade_test(&caller, id, &req.answers)).await?;
    Ok(Json(json!({
        "correct": result.correct,
        "passed": result.passed,
        "level": result.level,
        "capability": user.capability,
        "rights": user.rights,
    }))
    .into_response())
}

#[derive(Deserialize)]
struct AwardRequest {
    amount: u64,
    #[serde(default)]
    note: String,
}

async fn award(
    State(forum): State<AppState>,
    Caller(caller): Caller,
    Path(id): Path<UserId>,
    Json(req): Json<AwardRequest>,
) -> ApiResult<Response> {
    let score = blocking(move || forum.award_score(&caller, id, req.amount, &req.note)).await?;
    Ok(Json(json!({ "user": id, "score": score })).into_response())
}

async fn list_gifts(State(forum): State<AppState>, Caller(_): Caller) -> ApiResult<Response> {
    Ok(Json(forum.gifts()?).into_response())
}

async fn define_gift(
    State(forum): State<AppState>,
    Caller(caller): Caller,
    Json(draft): Json<GiftDraft>,
) -> ApiResult<Response> {
    let gift = blocking(move || forum.define_gift(&caller, draft)).await?;
    Ok(created(gift))
}

async fn redeem(
    State(forum): State<AppState>,
    Caller(caller): Caller,
    Path(id): Path<GiftId>,
) -> ApiResult<Response> {
    let (score, stock) = blocking(move || forum.redeem(&caller, id)).await?;
    Ok(Json(json!({ "gift": id, "score": score, "stock": stock })).into_response())
}

#[derive(Deserialize)]
struct MessageRequest {
    to: UserId,
    text: String,
}

async fn send_message(
    State(forum): State<AppState>,
    Caller(caller): Caller,
    Json(req): Json<MessageRequest>,
) -> ApiResult<Response> {
    let to = req.to;
    let sequence = blocking(move || forum.send_message(&caller, to, &req.text)).await?;
    Ok(created(json!({ "to": to, "sequence": sequence })))
}

async fn inbox(
    State(forum): State<AppState>,
    Caller(caller): Caller,
    Query(q): Query<SinceQuery>,
) -> ApiResult<Response> {
    Ok(Json(forum.inbox(caller.id, q.since)?).into_response())
}

async fn ledger(State(forum): State<AppState>, Caller(caller): Caller) -> ApiResult<Response> {
    require_management(&caller)?;
    Ok(Json(forum.ledger()?).into_response())
}
