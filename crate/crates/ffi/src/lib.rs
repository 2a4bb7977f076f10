//! C ABI over the reqforum engine.
//!
//! A forum lives behind an opaque [`RfForum`] handle. Every call returns an
//! [`RfStatus`]; on failure [`rf_last_error`] yields the `{ code, message,
//! details }` JSON for the calling thread. Structured values cross the
//! boundary as UTF-8 JSON strings owned by the library, released with
//! [`rf_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use reqforum::dedup;
use reqforum::ids::TopicId;
use reqforum::model::{LifecycleEvent, TopicState};
use reqforum::service::{Config, Fixture, Forum, NewTopic};
use reqforum::Error;
use serde::Serialize;
use serde_json::{json, Value};

/// Result of every `rf_*` call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RfStatus {
    Ok = 0,
    /// Null pointer, invalid UTF-8 or malformed JSON argument.
    InvalidArgument = 1,
    /// A Rust panic was caught at the boundary.
    Panic = 2,
    InvalidTransition = 10,
    Forbidden = 11,
    StaleVersion = 12,
    NotFound = 13,
    SelfRelation = 14,
    MalformedTemplate = 15,
    TemplateViolations = 16,
    Duplicate = 17,
    Unauthenticated = 18,
    BadCredentials = 19,
    TopicNotOpen = 20,
    EmptyBody = 21,
    PollClosed = 22,
    UnknownOption = 23,
    ArityMismatch = 24,
    SessionClosed = 25,
    NotParticipant = 26,
    LengthMismatch = 27,
    AlreadyAccepted = 28,
    InsufficientScore = 29,
    OutOfStock = 30,
    InvalidAmount = 31,
    InvalidConfig = 32,
    BadRequest = 33,
    AlreadyExists = 34,
    Storage = 35,
}

/// Opaque forum handle.
pub struct RfForum {
    forum: Forum,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

enum Failure {
    Forum(Error),
    Argument(String),
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure::Forum(err)
    }
}

fn status_of(err: &Error) -> RfStatus {
    match err {
        Error::InvalidTransition { .. } => RfStatus::InvalidTransition,
        Error::Forbidden(_) => RfStatus::Forbidden,
        Error::StaleVersion { .. } => RfStatus::StaleVersion,
        Error::NotFound(_) => RfStatus::NotFound,
        Error::SelfRelation => RfStatus::SelfRelation,
        Error::MalformedTemplate(_) => RfStatus::MalformedTemplate,
        Error::TemplateViolations(_) => RfStatus::TemplateViolations,
        Error::Duplicate(_) => RfStatus::Duplicate,
        Error::Unauthenticated => RfStatus::Unauthenticated,
        Error::BadCredentials => RfStatus::BadCredentials,
        Error::TopicNotOpen(_) => RfStatus::TopicNotOpen,
        Error::EmptyBody => RfStatus::EmptyBody,
        Error::PollClosed => RfStatus::PollClosed,
        Error::UnknownOption(_) => RfStatus::UnknownOption,
        Error::ArityMismatch { .. } => RfStatus::ArityMismatch,
        Error::SessionClosed => RfStatus::SessionClosed,
        Error::NotParticipant => RfStatus::NotParticipant,
        Error::LengthMismatch { .. } => RfStatus::LengthMismatch,
        Error::AlreadyAccepted => RfStatus::AlreadyAccepted,
        Error::InsufficientScore { .. } => RfStatus::InsufficientScore,
        Error::OutOfStock => RfStatus::OutOfStock,
        Error::InvalidAmount => RfStatus::InvalidAmount,
        Error::InvalidConfig(_) => RfStatus::InvalidConfig,
        Error::BadRequest(_) => RfStatus::BadRequest,
        Error::AlreadyExists(_) => RfStatus::AlreadyExists,
        Error::Storage(_) => RfStatus::Storage,
    }
}

fn set_last_error(body: Value) {
    let text = CString::new(body.to_string()).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

/// Runs `f` at the boundary: clears the last error, catches panics and
/// converts failures into a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RfStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RfStatus::Ok,
        Ok(Err(Failure::Forum(err))) => {
            set_last_error(err.to_body());
            status_of(&err)
        }
        Ok(Err(Failure::Argument(message))) => {
            set_last_error(json!({ "code": "INVALID_ARGUMENT", "message": message, "details": null }));
            RfStatus::InvalidArgument
        }
        Err(_) => {
            set_last_error(json!({ "code": "PANIC", "message": "internal panic", "details": null }));
            RfStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or a NUL-terminated string valid for the duration of the call.
unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Argument(format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Argument(format!("{name} is not valid UTF-8")))
}

unsafe fn optional_text<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, name).map(Some)
    }
}

unsafe fn handle<'a>(p: *const RfForum) -> Result<&'a Forum, Failure> {
    p.as_ref()
        .map(|h| &h.forum)
        .ok_or_else(|| Failure::Argument("forum handle is null".into()))
}

unsafe fn put_string(out: *mut *mut c_char, value: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Argument("output pointer is null".into()));
    }
    let c = CString::new(value).map_err(|_| Failure::Argument("output contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn put_json(out: *mut *mut c_char, value: &impl Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string(value).map_err(|e| Failure::Forum(Error::from(e)))?;
    put_string(out, text)
}

fn parse_json<T: serde::de::DeserializeOwned>(raw: &str, name: &str) -> Result<T, Failure> {
    serde_json::from_str(raw).map_err(|e| Failure::Argument(format!("{name}: {e}")))
}

/// The `{ code, message, details }` JSON of the last failed call on this
/// thread, or null. Valid until the next `rf_*` call on the same thread.
#[no_mangle]
pub extern "C" fn rf_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Machine-readable name of a status, e.g. `"DUPLICATE"`. Static storage.
#[no_mangle]
pub extern "C" fn rf_status_name(status: RfStatus) -> *const c_char {
    let name: &'static CStr = match status {
        RfStatus::Ok => c"OK",
        RfStatus::InvalidArgument => c"INVALID_ARGUMENT",
        RfStatus::Panic => c"PANIC",
        RfStatus::InvalidTransition => c"INVALID_TRANSITION",
        RfStatus::Forbidden => c"FORBIDDEN",
        RfStatus::StaleVersion => c"STALE_VERSION",
        RfStatus::NotFound => c"NOT_FOUND",
        RfStatus::SelfRelation => c"SELF_RELATION",
        RfStatus::MalformedTemplate => c"MALFORMED_TEMPLATE",
        RfStatus::TemplateViolations => c"TEMPLATE_VIOLATIONS",
        RfStatus::Duplicate => c"DUPLICATE",
        RfStatus::Unauthenticated => c"UNAUTHENTICATED",
        RfStatus::BadCredentials => c"BAD_CREDENTIALS",
        RfStatus::TopicNotOpen => c"TOPIC_NOT_OPEN",
        RfStatus::EmptyBody => c"EMPTY_BODY",
        RfStatus::PollClosed => c"POLL_CLOSED",
        RfStatus::UnknownOption => c"UNKNOWN_OPTION",
        RfStatus::ArityMismatch => c"ARITY_MISMATCH",
        RfStatus::SessionClosed => c"SESSION_CLOSED",
        RfStatus::NotParticipant => c"NOT_PARTICIPANT",
        RfStatus::LengthMismatch => c"LENGTH_MISMATCH",
        RfStatus::AlreadyAccepted => c"ALREADY_ACCEPTED",
        RfStatus::InsufficientScore => c"INSUFFICIENT_SCORE",
        RfStatus::OutOfStock => c"OUT_OF_STOCK",
        RfStatus::InvalidAmount => c"INVALID_AMOUNT",
        RfStatus::InvalidConfig => c"INVALID_CONFIG",
        RfStatus::BadRequest => c"BAD_REQUEST",
        RfStatus::AlreadyExists => c"ALREADY_EXISTS",
        RfStatus::Storage => c"STORAGE",
    };
    name.as_ptr()
}

/// Releases a string returned through an `out` parameter. Null is ignored.
///
/// # Safety
/// `s` is null or was produced by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Opens a forum from TOML configuration text. Null or empty text gives an
/// in-memory forum with default settings.
///
/// # Safety
/// `config_toml` is null or a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rf_forum_open(config_toml: *const c_char, out: *mut *mut RfForum) -> RfStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Argument("output pointer is null".into()));
        }
        let config = match optional_text(config_toml, "config_toml")? {
            Some(raw) if !raw.trim().is_empty() => Config::parse(raw)?,
            _ => Config::default(),
        };
        let forum = Forum::from_config(config)?;
        *out = Box::into_raw(Box::new(RfForum { forum }));
        Ok(())
    })
}

/// Closes a forum. Null is ignored.
///
/// # Safety
/// `forum` is null or a handle from [`rf_forum_open`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rf_forum_free(forum: *mut RfForum) {
    if !forum.is_null() {
        drop(Box::from_raw(forum));
    }
}

/// Loads a seed fixture; writes the created ids as JSON to `out_json`.
///
/// # Safety
/// Pointers are valid as described in the module documentation.
#[no_mangle]
pub unsafe extern "C" fn rf_seed(
    forum: *const RfForum,
    fixture_json: *const c_char,
    out_json: *mut *mut c_char,
) -> RfStatus {
    guard(|| {
        let forum = handle(forum)?;
        let fixture = Fixture::parse(text(fixture_json, "fixture_json")?)?;
        put_json(out_json, &fixture.apply(forum)?)
    })
}

/// Logs in; writes the session (with its `token`) as JSON.
///
/// # Safety
/// Pointers are valid as described in the module documentation.
#[no_mangle]
pub unsafe extern "C" fn rf_login(
    forum: *const RfForum,
    handle_name: *const c_char,
    secret: *const c_char,
    out_json: *mut *mut c_char,
) -> RfStatus {
    guard(|| {
        let forum = handle(forum)?;
        let session = forum.login(text(handle_name, "handle")?, text(secret, "secret")?)?;
        put_json(out_json, &session)
    })
}

/// Runs the creation pipeline with a JSON request
/// (`{ "template_id", "fields", ... }`); writes the new topic as JSON.
///
/// # Safety
/// Pointers are valid as described in the module documentation.
#[no_mangle]
pub unsafe extern "C" fn rf_create_topic(
    forum: *const RfForum,
    token: *const c_char,
    request_json: *const c_char,
    out_json: *mut *mut c_char,
) -> RfStatus {
    guard(|| {
        let forum = handle(forum)?;
        let caller = forum.authenticate(text(token, "token")?)?;
        let request: NewTopic = parse_json(text(request_json, "request_json")?, "request_json")?;
        put_json(out_json, &forum.create_topic(&caller, request)?)
    })
}

/// Fires a lifecycle event named like `"OPEN_FOR_SUGGESTIONS"`. A non-zero
/// `expected_version` must match the stored version. Writes
/// `{ "topic", "transition" }`.
///
/// # Safety
/// Pointers are valid as described in the module documentation.
#[no_mangle]
pub unsafe extern "C" fn rf_apply_event(
    forum: *const RfForum,
    token: *const c_char,
    topic: u64,
    event: *const c_char,
    expected_version: u64,
    out_json: *mut *mut c_char,
) -> RfStatus {
    guard(|| {
        let forum = handle(forum)?;
        let caller = forum.authenticate(text(token, "token")?)?;
        let event: LifecycleEvent = text(event, "event")?.parse()?;
        let expected = (expected_version != 0).then_some(expected_version);
        let (topic, transition) = forum.apply_event(&caller, TopicId(topic), event, expected, None)?;
        put_json(out_json, &json!({ "topic": topic, "transition": transition }))
    })
}

/// Adds a post, merging into the last one when the caller wrote it. Writes
/// `{ "post", "merged" }`.
///
/// # Safety
/// Pointers are valid as described in the module documentation.
#[no_mangle]
pub unsafe extern "C" fn rf_add_post(
    forum: *const RfForum,
    token: *const c_char,
    topic: u64,
    body: *const c_char,
    out_json: *mut *mut c_char,
) -> RfStatus {
    guard(|| {
        let forum = handle(forum)?;
        let caller = forum.authenticate(text(token, "token")?)?;
        let (post, merged) = forum.add_post(&caller, TopicId(topic), text(body, "body")?)?;
        put_json(out_json, &json!({ "post": post, "merged": merged }))
    })
}

/// Writes the aggregated view of one topic.
///
/// # Safety
/// Pointers are valid as described in the module documentation.
#[no_mangle]
pub unsafe extern "C" fn rf_aggregate(
    forum: *const RfForum,
    token: *const c_char,
    topic: u64,
    out_json: *mut *mut c_char,
) -> RfStatus {
    guard(|| {
        let forum = handle(forum)?;
        forum.authenticate(text(token, "token")?)?;
        put_json(out_json, &forum.aggregate(TopicId(topic))?)
    })
}

/// Exports aggregated views. `states_csv` is null for every topic or a
/// comma-separated state list such as `"LOCKED,UNLOCKED"`.
///
/// # Safety
/// Pointers are valid as described in the module documentation.
#[no_mangle]
pub unsafe extern "C" fn rf_export(
    forum: *const RfForum,
    token: *const c_char,
    states_csv: *const c_char,
    out_json: *mut *mut c_char,
) -> RfStatus {
    guard(|| {
        let forum = handle(forum)?;
        let caller = forum.authenticate(text(token, "token")?)?;
        let states = match optional_text(states_csv, "states_csv")? {
            Some(list) if !list.trim().is_empty() => Some(
                list.split(',')
                    .map(|s| s.parse::<TopicState>())
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            _ => None,
        };
        put_json(out_json, &forum.export_requirements(&caller, states.as_deref())?)
    })
}

/// Dry-runs the duplicate gate for `text`; writes the screening result.
///
/// # Safety
/// Pointers are valid as described in the module documentation.
#[no_mangle]
pub unsafe extern "C" fn rf_screen(
    forum: *const RfForum,
    text_in: *const c_char,
    out_json: *mut *mut c_char,
) -> RfStatus {
    guard(|| {
        let forum = handle(forum)?;
        put_json(out_json, &forum.screen(text(text_in, "text")?))
    })
}

/// Character n-gram Jaccard similarity of two texts after normalization.
///
/// # Safety
/// `a` and `b` are NUL-terminated strings; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rf_similarity(
    a: *const c_char,
    b: *const c_char,
    gram_size: usize,
    out: *mut f64,
) -> RfStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Argument("output pointer is null".into()));
        }
        if gram_size == 0 {
            return Err(Failure::Argument("gram_size must be at least 1".into()));
        }
        *out = dedup::similarity(text(a, "a")?, text(b, "b")?, gram_size);
        Ok(())
    })
}

/// Lowercases, collapses whitespace and trims.
///
/// # Safety
/// `text_in` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rf_normalize(text_in: *const c_char, out: *mut *mut c_char) -> RfStatus {
    guard(|| put_string(out, dedup::normalize(text(text_in, "text")?)))
}
