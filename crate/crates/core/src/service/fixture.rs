//! Seed data for a fresh forum: accounts, templates, gifts and capability tests.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Forum;
use crate::error::{Error, Result};
use crate::ids::{GiftId, TemplateId, TestId, UserId};
use crate::model::Role;
use crate::stakeholders::{GiftDraft, Stakeholder, TestDraft};
use crate::templates::TemplateDraft;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureUser {
    pub handle: String,
    pub secret: String,
    pub role: Role,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fixture {
    pub stakeholders: Vec<FixtureUser>,
    pub templates: Vec<TemplateDraft>,
    pub gifts: Vec<GiftDraft>,
    pub tests: Vec<TestDraft>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedReport {
    pub stakeholders: Vec<UserId>,
    pub templates: Vec<TemplateId>,
    pub gifts: Vec<GiftId>,
    pub tests: Vec<TestId>,
}

impl Fixture {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::BadRequest(format!("malformed fixture: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::BadRequest(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Loads everything into `forum`. Handles that already exist are skipped.
    pub fn apply(&self, forum: &Forum) -> Result<SeedReport> {
        let admin = Stakeholder::system();
        let mut report = SeedReport::default();
        for user in &self.stakeholders {
            match forum.register(&user.handle, &user.secret, user.role) {
                Ok(s) => report.stakeholders.push(s.id),
                Err(Error::AlreadyExists(_)) => {}
                Err(e) => return Err(e),
            }
        }
        for draft in &self.templates {
            report.templates.push(forum.define_template(&admin, draft.clone())?.id);
        }
        for draft in &self.gifts {
            report.gifts.push(forum.define_gift(&admin, draft.clone())?.id);
        }
        for draft in &self.tests {
            report.tests.push(forum.define_test(&admin, draft.clone())?.id);
        }
        Ok(report)
    }
}
