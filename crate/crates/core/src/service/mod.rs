//! The service layer: configuration, the forum engine, the HTTP API and
//! fixture seeding.

pub mod config;
pub mod fixture;
mod forum;
pub mod http;
pub mod keys;

pub use config::{Config, DedupSettings, Scoring};
pub use fixture::{Fixture, FixtureUser, SeedReport};
pub use forum::{AuthSession, DedupRecord, Forum, NewTopic, PublicQuestion, PublicTest, TopicPage, TopicSummary};
