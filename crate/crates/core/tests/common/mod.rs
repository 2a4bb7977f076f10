#![allow(dead_code)]

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;

use chrono::{Duration, TimeZone, Utc};
use indexmap::IndexMap;
use reqforum::clock::ManualClock;
use reqforum::ids::TemplateId;
use reqforum::model::{LifecycleEvent, Role, Topic, TopicKind};
use reqforum::service::{Config, Forum, NewTopic};
use reqforum::stakeholders::Stakeholder;
use reqforum::store::{Entry, MemoryStore, Op, Store, StoreError};
use reqforum::threads::{Question, QuestionKind};
use serde_json::Value;

pub const OPINION: TemplateId = TemplateId(1);
pub const QUESTIONNAIRE: TemplateId = TemplateId(2);
pub const REWARD: TemplateId = TemplateId(3);

/// A store whose next commit can be made to fail, leaving nothing behind.
#[derive(Default)]
pub struct FlakyStore {
    inner: MemoryStore,
    fail_next: AtomicBool,
    commits: AtomicUsize,
}

impl FlakyStore {
    pub fn arm(&self) {
        self.fail_next.store(true, Ordering::SeqCst);
    }

    pub fn disarm(&self) {
        self.fail_next.store(false, Ordering::SeqCst);
    }

    pub fn commits(&self) -> usize {
        self.commits.load(Ordering::SeqCst)
    }
}

impl Store for FlakyStore {
    fn get(&self, key: &str) -> Result<Option<Entry>, StoreError> {
        self.inner.get(key)
    }

    fn scan(&self, prefix: &str) -> Result<Vec<(String, Entry)>, StoreError> {
        self.inner.scan(prefix)
    }

    fn commit(&self, ops: Vec<Op>) -> Result<(), StoreError> {
        if self.fail_next.swap(false, Ordering::SeqCst) {
            return Err(StoreError::Io("injected failure".into()));
        }
        self.inner.commit(ops)?;
        self.commits.fetch_add(1, Ordering::SeqCst);
        Ok(())
    }
}

pub struct World {
    pub forum: Forum,
    pub clock: ManualClock,
    /// Management user.
    pub ana: Stakeholder,
    /// General users.
    pub gus: Stakeholder,
    pub eve: Stakeholder,
}

impl World {
    pub fn new() -> Self {
        Self::with(Config::default(), Arc::new(MemoryStore::new()))
    }

    pub fn with(config: Config, store: Arc<dyn Store>) -> Self {
        let clock = ManualClock::new(Utc.with_ymd_and_hms(2024, 5, 1, 9, 0, 0).unwrap());
        let forum = Forum::open(config, store, Arc::new(clock.clone())).unwrap();
        let ana = forum.register("ana", "pw-ana", Role::Management).unwrap();
        let gus = forum.register("gus", "pw-gus", Role::General).unwrap();
        let eve = forum.register("eve", "pw-eve", Role::General).unwrap();
        World {
            forum,
            clock,
            ana,
            gus,
            eve,
        }
    }

    pub fn tick(&self) {
        self.clock.advance(Duration::seconds(1));
    }

    /// Re-reads a stakeholder after rights or score changed.
    pub fn fresh(&self, who: &Stakeholder) -> Stakeholder {
        self.forum.stakeholder(who.id).unwrap()
    }

    pub fn submit(&self, author: &Stakeholder, title: &str) -> Topic {
        self.forum.create_topic(author, opinion(title)).unwrap()
    }

    pub fn fire(&self, topic: &Topic, events: &[LifecycleEvent]) -> Topic {
        let mut current = topic.clone();
        for &event in events {
            self.tick();
            current = self.forum.apply_event(&self.ana, current.id, event, None, None).unwrap().0;
        }
        current
    }

    pub fn reward_topic(&self, title: &str, bounty: u64) -> Topic {
        let req = NewTopic {
            kind: Some(TopicKind::Reward),
            template_id: REWARD,
            fields: fields(&[("title", title), ("question", "How do we measure response time?")]),
            bounty: Some(bounty),
            ..NewTopic::default()
        };
        self.forum.create_topic(&self.ana, req).unwrap()
    }

    pub fn questionnaire_topic(&self, title: &str) -> Topic {
        let req = NewTopic {
            kind: Some(TopicKind::Questionnaire),
            template_id: QUESTIONNAIRE,
            fields: fields(&[("title", title), ("description", "Tell us how you use reports")]),
            questions: Some(vec![
                Question {
                    prompt: "Which format?".into(),
                    kind: QuestionKind::SingleChoice,
                    choices: vec!["PDF".into(), "CSV".into()],
                },
                Question {
                    prompt: "Which days?".into(),
                    kind: QuestionKind::MultiChoice,
                    choices: vec!["Mon".into(), "Tue".into(), "Wed".into()],
                },
                Question {
                    prompt: "Anything else?".into(),
                    kind: QuestionKind::FreeText,
                    choices: vec![],
                },
            ]),
            ..NewTopic::default()
        };
        self.forum.create_topic(&self.ana, req).unwrap()
    }
}

pub fn fields(pairs: &[(&str, &str)]) -> IndexMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

/// A valid opinion submission whose screened text is `title` three times.
pub fn opinion(title: &str) -> NewTopic {
    NewTopic {
        template_id: OPINION,
        fields: fields(&[
            ("title", title),
            ("problem", title),
            ("rationale", title),
        ]),
        ..NewTopic::default()
    }
}

pub fn json(value: impl serde::Serialize) -> Value {
    serde_json::to_value(value).unwrap()
}

/// Minimal JSON client for the HTTP API.
pub struct Client {
    agent: ureq::Agent,
    pub base: String,
    pub token: Option<String>,
}

impl Client {
    pub fn new(base: impl Into<String>) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .build()
            .into();
        Client {
            agent,
            base: base.into(),
            token: None,
        }
    }

    pub fn as_user(&self, token: &str) -> Self {
        Client {
            agent: self.agent.clone(),
            base: self.base.clone(),
            token: Some(token.to_owned()),
        }
    }

    fn finish(resp: Result<ureq::http::Response<ureq::Body>, ureq::Error>) -> (u16, Value) {
        let mut resp = resp.expect("transport error");
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().unwrap_or_default();
        let body = if text.is_empty() { Value::Null } else { serde_json::from_str(&text).expect("JSON body") };
        (status, body)
    }

    pub fn get(&self, path: &str) -> (u16, Value) {
        let mut req = self.agent.get(format!("{}{path}", self.base));
        if let Some(t) = &self.token {
            req = req.header("Authorization", format!("Bearer {t}"));
        }
        Self::finish(req.call())
    }

    pub fn post(&self, path: &str, body: Value) -> (u16, Value) {
        let mut req = self.agent.post(format!("{}{path}", self.base));
        if let Some(t) = &self.token {
            req = req.header("Authorization", format!("Bearer {t}"));
        }
        Self::finish(req.send_json(body))
    }

    pub fn send_raw(&self, method: &str, path: &str, content_type: &str, body: &str) -> (u16, Value) {
        let uri = format!("{}{path}", self.base);
        let mut builder = ureq::http::Request::builder().method(method).uri(uri).header("Content-Type", content_type);
        if let Some(t) = &self.token {
            builder = builder.header("Authorization", format!("Bearer {t}"));
        }
        Self::finish(self.agent.run(builder.body(body.to_owned()).unwrap()))
    }

    /// Logs in and returns a client carrying the session token.
    pub fn login(&self, handle: &str, secret: &str) -> Self {
        let (status, body) = self.post("/auth/login", serde_json::json!({ "handle": handle, "secret": secret }));
        assert_eq!(status, 200, "{body}");
        self.as_user(body["token"].as_str().unwrap())
    }
}

/// Writes a config file with a journal next to it and returns its path.
pub fn write_config(dir: &std::path::Path, extra: &str) -> std::path::PathBuf {
    let path = dir.join("reqforum.toml");
    let journal = dir.join("journal.jsonl");
    let text = format!("listen = \"127.0.0.1:0\"\nstorage = {:?}\n{extra}", journal.display().to_string());
    std::fs::write(&path, text).unwrap();
    path
}

pub fn cli() -> std::process::Command {
    let mut cmd = std::process::Command::new(env!("CARGO_BIN_EXE_reqforum"));
    cmd.env_remove("REQFORUM_LISTEN").env_remove("REQFORUM_STORAGE");
    cmd
}

/// A `reqforum serve` child process, killed on drop.
pub struct Served {
    child: std::process::Child,
    pub client: Client,
}

impl Served {
    pub fn start(config: &std::path::Path) -> Self {
        use std::io::BufRead;
        let mut child = cli()
            .arg("serve")
            .arg("-c")
            .arg(config)
            .stdout(std::process::Stdio::piped())
            .stderr(std::process::Stdio::null())
            .spawn()
            .expect("spawn reqforum serve");
        let stdout = child.stdout.take().unwrap();
        let mut line = String::new();
        std::io::BufReader::new(stdout).read_line(&mut line).unwrap();
        let addr = line
            .trim()
            .strip_prefix("listening on ")
            .unwrap_or_else(|| panic!("unexpected banner {line:?}"))
            .to_owned();
        Served {
            child,
            client: Client::new(format!("{addr}/api/v1")),
        }
    }
}

impl Drop for Served {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
