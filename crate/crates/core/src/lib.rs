//! ReqForum: a forum engine for distributed requirements elicitation.
//!
//! Stakeholders submit templated opinion topics which pass a near-duplicate
//! gate, discuss them in merged threads, polls and questionnaires, and
//! analysts drive each topic through a fixed lifecycle until it is locked
//! as an agreed requirement or cancelled. Scores, reputation and capability
//! levels reward participation.
//!
//! The pure domain lives in [`model`], [`templates`], [`dedup`],
//! [`threads`] and [`stakeholders`]. [`service::Forum`] persists it through
//! the [`store::Store`] seam and [`service::http`] exposes it over HTTP.

pub mod clock;
pub mod dedup;
pub mod error;
pub mod ids;
pub mod model;
pub mod service;
pub mod stakeholders;
pub mod store;
pub mod templates;
pub mod threads;

pub use error::{Error, Result};
pub use service::{Config, Forum};
