//! Topic templates: ordered mandatory/optional items plus item relations, and
//! the validation every submission must pass before it is persisted.

use std::collections::{BTreeSet, HashSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::TemplateId;
use crate::model::TopicKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ItemKind {
    Mandatory,
    Optional,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateItem {
    pub id: String,
    pub label: String,
    pub kind: ItemKind,
    #[serde(default)]
    pub hint: String,
    pub max_length: usize,
}

impl TemplateItem {
    pub fn new(id: &str, label: &str, kind: ItemKind, hint: &str, max_length: usize) -> Self {
        Self {
            id: id.to_owned(),
            label: label.to_owned(),
            kind,
            hint: hint.to_owned(),
            max_length,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RelationRule {
    /// If `a` is filled then `b` must be filled.
    Requires,
    /// `a` and `b` must not both be filled.
    Excludes,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemRelation {
    pub kind: RelationRule,
    pub a: String,
    pub b: String,
}

/// Everything needed to define a template except its id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateDraft {
    pub name: String,
    pub topic_kind: TopicKind,
    pub items: Vec<TemplateItem>,
    #[serde(default)]
    pub relations: Vec<ItemRelation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub id: TemplateId,
    pub name: String,
    pub topic_kind: TopicKind,
    pub items: Vec<TemplateItem>,
    pub relations: Vec<ItemRelation>,
}

impl TemplateDraft {
    /// Structural problems, empty when the draft is well formed.
    pub fn problems(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let mut seen = HashSet::new();
        for item in &self.items {
            if item.id.trim().is_empty() {
                problems.push("item id must not be empty".to_owned());
            }
            if !seen.insert(item.id.as_str()) {
                problems.push(format!("duplicate item id {:?}", item.id));
            }
            if item.max_length == 0 {
                problems.push(format!("item {:?} has max_length 0", item.id));
            }
        }
        if !self.items.iter().any(|i| i.kind == ItemKind::Mandatory) {
            problems.push("template needs at least one mandatory item".to_owned());
        }
        let mut pairs = HashSet::new();
        for rel in &self.relations {
            if rel.a == rel.b {
                problems.push(format!("relation {:?} relates {:?} to itself", rel.kind, rel.a));
            }
            for end in [&rel.a, &rel.b] {
                if !seen.contains(end.as_str()) {
                    problems.push(format!("relation references unknown item {end:?}"));
                }
            }
            // EXCLUDES is symmetric, so (a, b) and (b, a) are the same rule.
            let key = match rel.kind {
                RelationRule::Excludes if rel.b < rel.a => (rel.kind, &rel.b, &rel.a),
                _ => (rel.kind, &rel.a, &rel.b),
            };
            if !pairs.insert(key) {
                problems.push(format!("relation {:?}({}, {}) declared twice", rel.kind, rel.a, rel.b));
            }
        }
        problems
    }

    pub fn into_template(self, id: TemplateId) -> Result<Template> {
        let problems = self.problems();
        if !problems.is_empty() {
            return Err(Error::MalformedTemplate(problems));
        }
        Ok(Template {
            id,
            name: self.name,
            topic_kind: self.topic_kind,
            items: self.items,
            relations: self.relations,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    MissingMandatory,
    OverLength,
    RequiresUnmet,
    ExcludesConflict,
    UnknownItem,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub item: String,
    /// Second item of a relation violation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub related: Option<String>,
    pub message: String,
}

/// An item counts as filled when its value is non-empty after trimming.
pub fn is_filled(value: Option<&String>) -> bool {
    value.is_some_and(|v| !v.trim().is_empty())
}

impl Template {
    fn item(&self, id: &str) -> Option<&TemplateItem> {
        self.items.iter().find(|i| i.id == id)
    }

    /// Checks `fields` against every rule and reports all violations.
    ///
    /// Violations come back sorted, so the result does not depend on the
    /// order of entries in `fields`.
    pub fn validate(&self, fields: &IndexMap<String, String>) -> Result<(), Vec<Violation>> {
        let mut out = BTreeSet::new();
        for key in fields.keys() {
            if self.item(key).is_none() {
                out.insert(Violation {
                    code: ViolationCode::UnknownItem,
                    item: key.clone(),
                    related: None,
                    message: format!("{key:?} is not an item of template {:?}", self.name),
                });
            }
        }
        for item in &self.items {
            let value = fields.get(&item.id);
            if !is_filled(value) {
                if item.kind == ItemKind::Mandatory {
                    out.insert(Violation {
                        code: ViolationCode::MissingMandatory,
                        item: item.id.clone(),
                        related: None,
                        message: format!("{} is required", item.label),
                    });
                }
                continue;
            }
            let len = value.map_or(0, |v| v.trim().chars().count());
            if len > item.max_length {
                out.insert(Violation {
                    code: ViolationCode::OverLength,
                    item: item.id.clone(),
                    related: None,
                    message: format!("{} is {len} characters, limit is {}", item.label, item.max_length),
                });
            }
        }
        for rel in &self.relations {
            let a = is_filled(fields.get(&rel.a));
            let b = is_filled(fields.get(&rel.b));
            let violation = match rel.kind {
                RelationRule::Requires if a && !b => Some((
                    ViolationCode::RequiresUnmet,
                    format!("{} must be filled when {} is filled", rel.b, rel.a),
                )),
                RelationRule::Excludes if a && b => Some((
                    ViolationCode::ExcludesConflict,
                    format!("{} and {} cannot both be filled", rel.a, rel.b),
                )),
                _ => None,
            };
            if let Some((code, message)) = violation {
                out.insert(Violation {
                    code,
                    item: rel.a.clone(),
                    related: Some(rel.b.clone()),
                    message,
                });
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out.into_iter().collect())
        }
    }

    /// The ordered form description a client renders as a submission wizard.
    pub fn guidance(&self) -> FormDescriptor {
        let items = self
            .items
            .iter()
            .map(|item| {
                let mut field = FormField {
                    id: item.id.clone(),
                    label: item.label.clone(),
                    kind: item.kind,
                    hint: item.hint.clone(),
                    max_length: item.max_length,
                    requires: Vec::new(),
                    required_when: Vec::new(),
                    excludes: Vec::new(),
                };
                for rel in &self.relations {
                    match rel.kind {
                        RelationRule::Requires if rel.a == item.id => field.requires.push(rel.b.clone()),
                        RelationRule::Requires if rel.b == item.id => {
                            field.required_when.push(rel.a.clone())
                        }
                        RelationRule::Excludes if rel.a == item.id => field.excludes.push(rel.b.clone()),
                        RelationRule::Excludes if rel.b == item.id => field.excludes.push(rel.a.clone()),
                        _ => {}
                    }
                }
                field
            })
            .collect();
        FormDescriptor {
            template_id: self.id,
            name: self.name.clone(),
            topic_kind: self.topic_kind,
            items,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormDescriptor {
    pub template_id: TemplateId,
    pub name: String,
    pub topic_kind: TopicKind,
    pub items: Vec<FormField>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormField {
    pub id: String,
    pub label: String,
    pub kind: ItemKind,
    pub hint: String,
    pub max_length: usize,
    /// Items that must be filled once this one is.
    pub requires: Vec<String>,
    /// This item becomes required when any of these is filled.
    pub required_when: Vec<String>,
    pub excludes: Vec<String>,
}

/// Templates installed into an empty forum, one per topic kind.
pub fn default_drafts() -> Vec<TemplateDraft> {
    use ItemKind::{Mandatory as M, Optional as O};
    vec![
        TemplateDraft {
            name: "Opinion".to_owned(),
            topic_kind: TopicKind::Opinion,
            items: vec![
                TemplateItem::new("title", "Title", M, "One line naming the requirement", 120),
                TemplateItem::new("problem", "Problem description", M, "What is missing or wrong today", 4000),
                TemplateItem::new("rationale", "Rationale", M, "Why this matters and to whom", 2000),
                TemplateItem::new("solution", "Proposed solution", O, "How you would address it", 4000),
                TemplateItem::new("component", "Affected component", O, "Module or feature area", 200),
                TemplateItem::new("priority", "Suggested priority", O, "low, medium, high", 20),
            ],
            relations: Vec::new(),
        },
        TemplateDraft {
            name: "Questionnaire".to_owned(),
            topic_kind: TopicKind::Questionnaire,
            items: vec![
                TemplateItem::new("title", "Title", M, "What the questionnaire is about", 120),
                TemplateItem::new("description", "Description", M, "Context for respondents", 4000),
            ],
            relations: Vec::new(),
        },
        TemplateDraft {
            name: "Reward".to_owned(),
            topic_kind: TopicKind::Reward,
            items: vec![
                TemplateItem::new("title", "Title", M, "The question in one line", 120),
                TemplateItem::new("question", "Question", M, "What a good answer must cover", 4000),
                TemplateItem::new("details", "Details", O, "Background material", 4000),
            ],
            relations: Vec::new(),
        },
    ]
}
