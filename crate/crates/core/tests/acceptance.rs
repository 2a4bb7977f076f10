//! Acceptance suite. Prints one line per criterion and exits non-zero when
//! any of them fails.

mod common;

use std::collections::{BTreeMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reqforum::dedup::{similarity, Match, ScreenResult, Verdict};
use reqforum::ids::{GiftId, PostId, TemplateId, TopicId, UserId};
use reqforum::model::{replay, LifecycleEvent, Role, Topic, TopicKind, TopicState};
use reqforum::service::{Config, NewTopic};
use reqforum::stakeholders::{GiftDraft, LedgerEntry, Stakeholder};
use reqforum::templates::{ItemKind, TemplateDraft, TemplateItem};
use reqforum::threads::Thread;
use reqforum::Error;
use serde_json::{json, Value};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

use LifecycleEvent as E;
use TopicState as S;

/// The lifecycle as a plain table, written out independently of the crate.
const LEGAL: [(TopicState, LifecycleEvent, TopicState); 10] = [
    (S::New, E::OpenForSuggestions, S::SuggestionCollected),
    (S::New, E::CancelDuplicate, S::Cancelled),
    (S::SuggestionCollected, E::StartNegotiation, S::Negotiation),
    (S::SuggestionCollected, E::LockDirect, S::Locked),
    (S::SuggestionCollected, E::CancelLowEvaluation, S::Cancelled),
    (S::Negotiation, E::LockConsistent, S::Locked),
    (S::Negotiation, E::CancelFromNegotiation, S::Cancelled),
    (S::Negotiation, E::ReopenSuggestions, S::SuggestionCollected),
    (S::Locked, E::Unlock, S::Unlocked),
    (S::Unlocked, E::Renegotiate, S::Negotiation),
];

const ALL_STATES: [TopicState; 6] = [S::New, S::SuggestionCollected, S::Negotiation, S::Unlocked, S::Locked, S::Cancelled];

const ALL_EVENTS: [LifecycleEvent; 11] = [
    E::Submit,
    E::OpenForSuggestions,
    E::StartNegotiation,
    E::LockConsistent,
    E::CancelFromNegotiation,
    E::Unlock,
    E::Renegotiate,
    E::LockDirect,
    E::ReopenSuggestions,
    E::CancelDuplicate,
    E::CancelLowEvaluation,
];

fn legal_target(state: TopicState, event: LifecycleEvent) -> Option<TopicState> {
    LEGAL.iter().find(|(s, e, _)| *s == state && *e == event).map(|(_, _, t)| *t)
}

fn path_to(state: TopicState) -> &'static [LifecycleEvent] {
    match state {
        S::New => &[],
        S::SuggestionCollected => &[E::OpenForSuggestions],
        S::Negotiation => &[E::OpenForSuggestions, E::StartNegotiation],
        S::Locked => &[E::OpenForSuggestions, E::LockDirect],
        S::Unlocked => &[E::OpenForSuggestions, E::LockDirect, E::Unlock],
        S::Cancelled => &[E::CancelDuplicate],
    }
}

fn bypassing(title: &str) -> NewTopic {
    NewTopic {
        bypass_dedup: true,
        ..opinion(title)
    }
}

fn state_machine() -> Outcome {
    let w = World::new();
    let started = Instant::now();
    let mut combos = 0;
    let mut successes = 0;
    for state in ALL_STATES {
        for event in ALL_EVENTS {
            for (actor, role) in [(&w.ana, Role::Management), (&w.gus, Role::General)] {
                combos += 1;
                let topic = w.fire(&w.forum.create_topic(&w.ana, bypassing("Combination")).unwrap(), path_to(state));
                ensure!(topic.state == state, "setup reached {} instead of {state}", topic.state);
                let result = w.forum.apply_event(actor, topic.id, event, None, None);
                match (legal_target(state, event), role, result) {
                    (Some(to), Role::Management, Ok((after, record))) => {
                        ensure!(after.state == to && record.to == to, "{state} --{event}--> {} expected {to}", after.state);
                        successes += 1;
                    }
                    (Some(_), Role::General, Err(Error::Forbidden(_))) => {}
                    (None, _, Err(Error::InvalidTransition { .. })) => {}
                    (expected, role, got) => {
                        return Err(format!(
                            "{state} x {event} x {role}: expected {expected:?}, got {:?}",
                            got.map(|(t, _)| t.state)
                        ))
                    }
                }
                if legal_target(state, event).is_none() || role == Role::General {
                    let stored = w.forum.topic(topic.id).unwrap();
                    ensure!(stored.state == state && stored.version == topic.version, "failed event changed {state}");
                }
            }
        }
    }
    let elapsed = started.elapsed();
    ensure!(combos == 132 && successes == 10, "{combos} combinations, {successes} successes");
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("132 combinations, 10 legal, {elapsed:.2?}"))
}

fn audit_replay() -> Outcome {
    let w = World::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut topics: Vec<Topic> = (0..50)
        .map(|i| w.forum.create_topic(&w.ana, bypassing(&format!("Audited topic {i}"))).unwrap())
        .collect();
    let mut steps = 0;
    while steps < 1000 {
        let live: Vec<usize> = (0..topics.len()).filter(|&i| topics[i].state != S::Cancelled).collect();
        let Some(&i) = live.choose(&mut rng) else { break };
        let options: Vec<_> = LEGAL.iter().filter(|(s, _, _)| *s == topics[i].state).collect();
        let &&(_, event, to) = options.choose(&mut rng).unwrap();
        if to == S::Cancelled && rng.random_bool(0.85) {
            continue;
        }
        w.tick();
        let (after, _) = w
            .forum
            .apply_event(&w.ana, topics[i].id, event, Some(topics[i].version), None)
            .map_err(|e| format!("step {steps}: {e}"))?;
        ensure!(after.state == to, "step {steps}: landed in {} not {to}", after.state);
        topics[i] = after;
        steps += 1;
    }
    ensure!(steps == 1000, "ran out of live topics after {steps} steps");
    let mut matched = 0;
    for t in &topics {
        let stored = w.forum.topic(t.id).unwrap();
        let records = w.forum.transitions(t.id).unwrap();
        ensure!(records.len() as u64 == stored.version, "topic {} has {} records at version {}", t.id, records.len(), stored.version);
        let replayed = replay(&records).map_err(|e| format!("topic {}: {e}", t.id))?;
        ensure!(replayed == stored.state && stored.state == t.state, "topic {} replays to {replayed}, stored {}", t.id, stored.state);
        matched += 1;
    }
    Ok(format!("1000 steps over 50 topics, {matched}/50 replay matches"))
}

fn oracle_grams(text: &str) -> HashSet<String> {
    let lowered: Vec<String> = text.split_whitespace().map(|w| w.to_lowercase()).collect();
    let chars: Vec<char> = lowered.join(" ").chars().collect();
    match chars.len() {
        0 => HashSet::new(),
        len if len < 3 => HashSet::from([chars.iter().collect()]),
        len => (0..=len - 3).map(|i| chars[i..i + 3].iter().collect()).collect(),
    }
}

fn oracle_jaccard(a: &HashSet<String>, b: &HashSet<String>) -> f64 {
    let inter = a.iter().filter(|g| b.contains(*g)).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

fn oracle_screen(text: &str, stored: &[(TopicId, HashSet<String>)], threshold: f64) -> ScreenResult {
    let grams = oracle_grams(text);
    let mut all: Vec<Match> = stored
        .iter()
        .map(|(id, g)| Match { topic: *id, score: oracle_jaccard(&grams, g) })
        .collect();
    all.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap().then(a.topic.cmp(&b.topic)));
    all.truncate(3);
    let verdict = if all.first().is_some_and(|m| m.score >= threshold) { Verdict::Rejected } else { Verdict::Accepted };
    ScreenResult { verdict, nearest: all, threshold }
}

fn random_words(rng: &mut ChaCha8Rng, vocabulary: &[String]) -> Vec<String> {
    let len = rng.random_range(5..=60);
    (0..len).map(|_| vocabulary.choose(rng).unwrap().clone()).collect()
}

fn mutate(rng: &mut ChaCha8Rng, words: &[String], vocabulary: &[String]) -> Vec<String> {
    let mut out = words.to_vec();
    let edits = rng.random_range(1..=(out.len() / 2).max(1));
    for _ in 0..edits {
        let at = rng.random_range(0..out.len());
        match rng.random_range(0..3) {
            0 => out[at] = vocabulary.choose(rng).unwrap().clone(),
            1 if out.len() > 5 => {
                out.remove(at);
            }
            _ => out.insert(at, vocabulary.choose(rng).unwrap().clone()),
        }
    }
    out.truncate(60);
    out
}

fn dedup_oracle() -> Outcome {
    let w = World::new();
    let template = w
        .forum
        .define_template(
            &w.ana,
            TemplateDraft {
                name: "Free text".into(),
                topic_kind: TopicKind::Opinion,
                items: vec![TemplateItem::new("text", "Text", ItemKind::Mandatory, "", 2000)],
                relations: vec![],
            },
        )
        .unwrap();
    let submit = |text: &str, template: TemplateId| {
        w.forum.create_topic(
            &w.gus,
            NewTopic {
                template_id: template,
                fields: fields(&[("text", text)]),
                ..NewTopic::default()
            },
        )
    };

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let syllables = ["ka", "lo", "mi", "ne", "ru", "sa", "to", "vi", "ze", "qu", "or", "an"];
    let vocabulary: Vec<String> = (0..400)
        .map(|_| (0..rng.random_range(1..=4)).map(|_| *syllables.choose(&mut rng).unwrap()).collect())
        .collect();
    let threshold = w.forum.config().dedup.threshold;

    let started = Instant::now();
    let mut generated: Vec<Vec<String>> = Vec::new();
    let mut stored: Vec<(TopicId, HashSet<String>)> = Vec::new();
    let mut persisted_texts: Vec<(TopicId, String)> = Vec::new();
    let mut discrepancies = Vec::new();
    let mut rejected = 0;
    for i in 0..200 {
        let words = if !generated.is_empty() && rng.random_bool(0.25) {
            let base = generated.choose(&mut rng).unwrap().clone();
            mutate(&mut rng, &base, &vocabulary)
        } else {
            random_words(&mut rng, &vocabulary)
        };
        let text = words.join(" ");
        generated.push(words);

        let expected = oracle_screen(&text, &stored, threshold);
        let screened = w.forum.screen(&text);
        if screened != expected {
            discrepancies.push(format!("topic {i}: index {screened:?} oracle {expected:?}"));
        }
        match (submit(&text, template.id), expected.verdict) {
            (Ok(topic), Verdict::Accepted) => {
                stored.push((topic.id, oracle_grams(&text)));
                persisted_texts.push((topic.id, text));
            }
            (Err(Error::Duplicate(result)), Verdict::Rejected) => {
                rejected += 1;
                if result != expected {
                    discrepancies.push(format!("topic {i}: rejection carried {result:?}"));
                }
            }
            (got, verdict) => discrepancies.push(format!("topic {i}: oracle {verdict:?}, pipeline {:?}", got.map(|t| t.id))),
        }
    }
    let elapsed = started.elapsed();
    ensure!(discrepancies.is_empty(), "{} discrepancies, first: {}", discrepancies.len(), discrepancies[0]);
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    ensure!(rejected > 0 && rejected < 200, "{rejected} rejections gives no coverage of both verdicts");

    for (id, text) in &persisted_texts {
        match submit(text, template.id) {
            Err(Error::Duplicate(result)) => {
                ensure!(result.max_score() == 1.0, "resubmitting {id} scored {}", result.max_score());
                ensure!(result.nearest.iter().any(|m| m.topic == *id && m.score == 1.0), "{id} missing from nearest");
            }
            other => return Err(format!("resubmitting {id} gave {:?}", other.map(|t| t.id))),
        }
    }
    Ok(format!(
        "200 topics ({} accepted, {rejected} rejected), 0 discrepancies, {elapsed:.2?}; {} identical resubmissions rejected",
        persisted_texts.len(),
        persisted_texts.len()
    ))
}

fn hand_values() -> Outcome {
    let third = similarity("abcd", "abce", 3);
    ensure!((third - 1.0 / 3.0).abs() < 1e-12, "abcd vs abce = {third}");
    for s in ["abcd", "Add CSV export to reports", "x"] {
        ensure!(similarity(s, s, 3) == 1.0, "{s:?} vs itself");
    }
    let disjoint = similarity("abcdef", "uvwxyz", 3);
    ensure!(disjoint == 0.0, "disjoint texts = {disjoint}");
    Ok(format!("1/3 (error {:.1e}), self 1.0, disjoint 0.0", (third - 1.0 / 3.0).abs()))
}

fn merge_property() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let start = chrono::Utc::now();
    for seq in 0..1000 {
        let mut thread = Thread::new(TopicId(1));
        let mut next = 0u64;
        let mut submitted = Vec::new();
        for k in 0..rng.random_range(1..=40) {
            let author = UserId(rng.random_range(1..=3));
            let body = format!("s{seq}-{k}");
            let at = start + chrono::Duration::seconds(rng.random_range(-5..60));
            thread
                .add_post(author, &body, at, || {
                    next += 1;
                    PostId(next)
                })
                .map_err(|e| e.to_string())?;
            submitted.push((author, body));
        }
        ensure!(thread.posts.windows(2).all(|p| p[0].author != p[1].author), "sequence {seq} has adjacent same-author posts");
        let flattened: Vec<(UserId, String)> = thread
            .posts
            .iter()
            .flat_map(|p| p.segments.iter().map(|s| (p.author, s.body.clone())))
            .collect();
        ensure!(flattened == submitted, "sequence {seq} reordered or lost segments");
    }
    Ok("1000 sequences, 1000 match".into())
}

struct Snapshot {
    scores: BTreeMap<UserId, u64>,
    ledger: usize,
    stocks: Vec<u64>,
    rewards: Vec<Option<PostId>>,
}

fn snapshot(w: &World, rewards: &[TopicId]) -> Snapshot {
    Snapshot {
        scores: w.forum.stakeholders().unwrap().into_iter().map(|s| (s.id, s.score)).collect(),
        ledger: w.forum.ledger().unwrap().len(),
        stocks: w.forum.gifts().unwrap().iter().map(|g| g.stock).collect(),
        rewards: rewards.iter().map(|t| w.forum.reward(*t).unwrap().accepted_post).collect(),
    }
}

fn running_balances_ok(entries: &[LedgerEntry]) -> Result<(), String> {
    let mut running: BTreeMap<UserId, i64> = BTreeMap::new();
    let mut ordered: Vec<&LedgerEntry> = entries.iter().collect();
    ordered.sort_by_key(|e| e.sequence);
    for e in ordered {
        let b = running.entry(e.counterparty).or_default();
        *b += e.delta;
        if *b < 0 {
            return Err(format!("user {} dips to {b} at ledger entry {}", e.counterparty, e.sequence));
        }
    }
    Ok(())
}

fn ledger_conservation() -> Outcome {
    let store = Arc::new(FlakyStore::default());
    let w = World::with(Config::default(), store.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let mut users: Vec<Stakeholder> = vec![w.gus.clone(), w.eve.clone()];
    for i in 0..4 {
        users.push(w.forum.register(&format!("member{i}"), "pw", Role::General).unwrap());
    }
    for (name, cost, stock) in [("Sticker", 5, 6), ("Mug", 15, 3), ("Hoodie", 40, 1)] {
        w.forum.define_gift(&w.ana, GiftDraft { name: name.into(), cost, stock }).unwrap();
    }
    let gifts: Vec<GiftId> = w.forum.gifts().unwrap().iter().map(|g| g.id).collect();
    let rewards: Vec<TopicId> = (0..12)
        .map(|i| {
            let req = NewTopic {
                kind: Some(TopicKind::Reward),
                template_id: REWARD,
                fields: fields(&[("title", &format!("Bounty {i}")), ("question", "Which metric matters?")]),
                bounty: Some(rng.random_range(5..=30)),
                bypass_dedup: true,
                ..NewTopic::default()
            };
            let t = w.forum.create_topic(&w.ana, req).unwrap();
            w.fire(&t, &[E::OpenForSuggestions]).id
        })
        .collect();

    let (mut ok, mut failed, mut injected, mut failed_redeems) = (0, 0, 0, 0);
    for op in 0..500 {
        let user = users.choose(&mut rng).unwrap().clone();
        let kind = rng.random_range(0..3);
        let post = if kind == 1 {
            let topic = *rewards.choose(&mut rng).unwrap();
            let (post, _) = w.forum.add_post(&user, topic, &format!("answer {op}")).map_err(|e| e.to_string())?;
            Some((topic, if rng.random_bool(0.1) { PostId(9999) } else { post.id }))
        } else {
            None
        };
        let inject = rng.random_bool(0.2);
        let before = snapshot(&w, &rewards);
        if inject {
            store.arm();
        }
        let result: Result<(), Error> = match (kind, post) {
            (0, _) => {
                let manager = if rng.random_bool(0.1) { &w.gus } else { &w.ana };
                let target = if rng.random_bool(0.05) { UserId(999) } else { user.id };
                w.forum.award_score(manager, target, rng.random_range(0..=25), "bonus").map(|_| ())
            }
            (1, Some((topic, post))) => w.forum.accept_answer(&w.ana, topic, post).map(|_| ()),
            _ => {
                let gift = if rng.random_bool(0.05) { GiftId(99) } else { *gifts.choose(&mut rng).unwrap() };
                let fresh = w.fresh(&user);
                w.forum.redeem(&fresh, gift).map(|_| ())
            }
        };
        store.disarm();
        match result {
            Ok(()) => ok += 1,
            Err(e) => {
                failed += 1;
                if e.code() == "STORAGE" {
                    injected += 1;
                }
                if kind == 2 {
                    failed_redeems += 1;
                }
                let after = snapshot(&w, &rewards);
                ensure!(after.scores == before.scores, "op {op} ({}) changed scores", e.code());
                ensure!(after.ledger == before.ledger, "op {op} ({}) wrote to the ledger", e.code());
                ensure!(after.stocks == before.stocks, "op {op} ({}) changed stock", e.code());
                ensure!(after.rewards == before.rewards, "op {op} ({}) changed a reward", e.code());
            }
        }
        let ledger = w.forum.ledger().unwrap();
        for s in w.forum.stakeholders().unwrap() {
            let sum: i64 = ledger.iter().filter(|e| e.counterparty == s.id).map(|e| e.delta).sum();
            ensure!(sum == s.score as i64, "after op {op}: {} has score {} but ledger sum {sum}", s.name, s.score);
        }
        running_balances_ok(&ledger).map_err(|e| format!("after op {op}: {e}"))?;
    }
    ensure!(injected > 0 && ok > 0 && failed_redeems > 0, "weak coverage: {ok} ok, {injected} injected, {failed_redeems} failed redeems");
    Ok(format!("500 ops: {ok} ok, {failed} failed ({injected} injected, {failed_redeems} redeems); all balances match"))
}

fn e2e_fixture() -> Value {
    let questions: Vec<Value> = (0..10)
        .map(|i| json!({ "prompt": format!("Question {i}"), "choices": ["right", "wrong"], "correct": 0 }))
        .collect();
    json!({
        "stakeholders": [
            { "handle": "ana", "secret": "pw-ana", "role": "MANAGEMENT" },
            { "handle": "gus", "secret": "pw-gus", "role": "GENERAL" },
        ],
        "tests": [{
            "name": "Domain basics",
            "questions": questions,
            "pass_threshold": 8,
            "level_map": [
                { "threshold": 5, "level": "NOVICE" },
                { "threshold": 8, "level": "CONTRIBUTOR" },
                { "threshold": 10, "level": "EXPERT" },
            ],
        }],
        "gifts": [{ "name": "Sticker pack", "cost": 15, "stock": 5 }],
    })
}

fn expect(step: &str, got: (u16, Value), status: u16) -> Result<Value, String> {
    if got.0 == status {
        Ok(got.1)
    } else {
        Err(format!("{step}: expected {status}, got {} {}", got.0, got.1))
    }
}

fn end_to_end() -> Outcome {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "");
    let fixture = dir.path().join("fixture.json");
    std::fs::write(&fixture, e2e_fixture().to_string()).unwrap();
    let seeded = cli().arg("seed").arg("-c").arg(&config).arg(&fixture).output().unwrap();
    ensure!(seeded.status.success(), "seed failed: {}", String::from_utf8_lossy(&seeded.stderr));

    let server = Served::start(&config);
    let api = &server.client;
    expect("register", api.post("/auth/register", json!({ "handle": "eve", "secret": "pw-eve" })), 201)?;
    let ana = api.login("ana", "pw-ana");
    let gus = api.login("gus", "pw-gus");
    let eve = api.login("eve", "pw-eve");
    let gus_id = gus.get("/me").1["id"].clone();

    let tests = expect("list tests", gus.get("/tests"), 200)?;
    let test_id = tests[0]["id"].clone();
    ensure!(tests[0].get("questions").and_then(|q| q[0].get("correct")).is_none(), "test leaks answers");
    let answers = [0, 0, 0, 0, 0, 0, 0, 0, 1, 1];
    let graded = expect("grade", gus.post(&format!("/tests/{test_id}/grade"), json!({ "answers": answers })), 200)?;
    ensure!(graded["correct"] == 8 && graded["passed"] == true, "graded {graded}");
    ensure!(graded["capability"] == "CONTRIBUTOR", "capability {}", graded["capability"]);

    let body = json!({
        "template_id": 1,
        "fields": {
            "title": "Offline mode for field engineers",
            "problem": "Engineers lose connectivity on site",
            "rationale": "Reports are lost when the network drops",
        },
    });
    let topic = expect("submit", gus.post("/topics", body.clone()), 201)?;
    let id = topic["id"].clone();
    let dup = expect("resubmit", gus.post("/topics", body), 409)?;
    ensure!(dup["code"] == "DUPLICATE", "resubmit code {}", dup["code"]);
    ensure!(dup["details"]["nearest"][0]["score"] == 1.0 && dup["details"]["nearest"][0]["topic"] == id, "nearest {}", dup["details"]);

    let events = format!("/topics/{id}/events");
    let opened = expect("open", ana.post(&events, json!({ "event": "OPEN_FOR_SUGGESTIONS" })), 200)?;
    ensure!(opened["topic"]["state"] == "SUGGESTION_COLLECTED", "opened {}", opened["topic"]["state"]);

    let posts = format!("/topics/{id}/posts");
    let first = expect("first post", gus.post(&posts, json!({ "body": "Sync when back online" })), 201)?;
    let second = expect("second post", gus.post(&posts, json!({ "body": "Keep drafts on the device" })), 201)?;
    ensure!(first["merged"] == false && second["merged"] == true, "merge flags {} {}", first["merged"], second["merged"]);
    let view = expect("aggregate", gus.get(&format!("/topics/{id}/aggregate")), 200)?;
    ensure!(view["posts"].as_array().map(Vec::len) == Some(1), "{} posts", view["posts"]);
    ensure!(view["posts"][0]["segments"].as_array().map(Vec::len) == Some(2), "segments {}", view["posts"][0]["segments"]);

    let poll = expect("open poll", ana.post(&format!("/topics/{id}/polls"), json!({ "kind": "PRIORITY" })), 201)?;
    let votes = format!("/polls/{}/votes", poll["id"]);
    expect("gus votes", gus.post(&votes, json!({ "option": "4" })), 200)?;
    expect("eve votes", eve.post(&votes, json!({ "option": "2" })), 200)?;
    expect("gus revotes", gus.post(&votes, json!({ "option": "5" })), 200)?;
    let tally = expect("tally", eve.get(&format!("/polls/{}/tally", poll["id"])), 200)?;
    let expected_tally = json!({ "1": 0, "2": 1, "3": 0, "4": 0, "5": 1 });
    ensure!(tally == expected_tally, "tally {tally}");

    expect("negotiate", ana.post(&events, json!({ "event": "START_NEGOTIATION" })), 200)?;
    let session = expect("session", ana.post(&format!("/topics/{id}/sessions"), json!({ "participants": [gus_id] })), 201)?;
    let session_id = session["id"].clone();
    expect("chat", gus.post(&format!("/sessions/{session_id}/messages"), json!({ "text": "Agreed on sync" })), 201)?;
    let closed = expect("close", ana.post(&format!("/sessions/{session_id}/close"), json!({ "outcome": "CONSISTENT" })), 200)?;
    ensure!(closed["topic"]["state"] == "LOCKED", "after consistent close {}", closed["topic"]["state"]);

    let reward = expect(
        "reward topic",
        ana.post(
            "/topics",
            json!({
                "kind": "REWARD",
                "template_id": 3,
                "fields": { "title": "Metric for sync latency", "question": "How should we measure sync latency?" },
                "bounty": 20,
            }),
        ),
        201,
    )?;
    let rid = reward["id"].clone();
    expect("open reward", ana.post(&format!("/topics/{rid}/events"), json!({ "event": "OPEN_FOR_SUGGESTIONS" })), 200)?;
    let answer = expect("answer", gus.post(&format!("/topics/{rid}/posts"), json!({ "body": "p95 from queue to ack" })), 201)?;
    let before = gus.get("/me").1["score"].as_u64().unwrap();
    let accepted = expect("accept", ana.post(&format!("/topics/{rid}/accept"), json!({ "post": answer["post"]["id"] })), 200)?;
    ensure!(accepted["answerer"] == gus_id, "answerer {}", accepted["answerer"]);
    let after = gus.get("/me").1["score"].as_u64().unwrap();
    ensure!(after == before + 20, "score went {before} -> {after}");

    let gift = expect("gifts", gus.get("/gifts"), 200)?[0]["id"].clone();
    let redeemed = expect("redeem", gus.post(&format!("/gifts/{gift}/redeem"), json!({})), 200)?;
    ensure!(redeemed["score"].as_u64() == Some(after - 15), "score after redeem {}", redeemed["score"]);
    let refused = expect("second redeem", gus.post(&format!("/gifts/{gift}/redeem"), json!({})), 422)?;
    ensure!(refused["code"] == "INSUFFICIENT_SCORE", "second redeem {}", refused["code"]);

    drop(server);
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!("scenario complete in {elapsed:.2?}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("state machine exhaustiveness", state_machine),
        ("audit replay", audit_replay),
        ("dedup oracle equivalence", dedup_oracle),
        ("similarity hand values", hand_values),
        ("merge property", merge_property),
        ("ledger conservation", ledger_conservation),
        ("end-to-end scenario over HTTP", end_to_end),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let message = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {message}"))
        });
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(reason) => {
                failures += 1;
                println!("[FAIL] {name}: {reason}");
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
