//! Duplicate gate for new topics.
//!
//! Candidates are compared with every indexed topic using the Jaccard
//! coefficient of their character n-gram sets. An inverted index from gram to
//! topic ids limits the work to topics sharing at least one gram; the result
//! is identical to a full scan, including the zero-score tail of the nearest
//! list.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::TopicId;

pub const DEFAULT_GRAM_SIZE: usize = 3;
pub const DEFAULT_THRESHOLD: f64 = 0.6;
pub const NEAREST_LIMIT: usize = 3;

/// Lowercases, collapses whitespace runs to one space and trims the ends.
/// Punctuation is kept.
pub fn normalize(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Character n-grams of the normalized text.
///
/// Non-empty text shorter than `n` yields a single gram holding the whole
/// text, so two different short texts are not mistaken for identical.
pub fn ngrams(text: &str, n: usize) -> HashSet<String> {
    assert!(n >= 1, "gram size must be at least 1");
    let chars: Vec<char> = normalize(text).chars().collect();
    if chars.is_empty() {
        return HashSet::new();
    }
    if chars.len() < n {
        return HashSet::from([chars.into_iter().collect()]);
    }
    chars.windows(n).map(|w| w.iter().collect()).collect()
}

fn jaccard(intersection: usize, left: usize, right: usize) -> f64 {
    let union = left + right - intersection;
    if union == 0 {
        1.0
    } else {
        intersection as f64 / union as f64
    }
}

/// Jaccard similarity of the n-gram sets of `a` and `b`.
pub fn similarity(a: &str, b: &str, n: usize) -> f64 {
    let ga = ngrams(a, n);
    let gb = ngrams(b, n);
    let inter = ga.intersection(&gb).count();
    jaccard(inter, ga.len(), gb.len())
}

/// The text a topic is screened on: its field values in template order.
pub fn topic_text<'a>(values: impl IntoIterator<Item = &'a String>) -> String {
    let parts: Vec<&str> = values.into_iter().map(String::as_str).collect();
    normalize(&parts.join(" "))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Accepted,
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub topic: TopicId,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenResult {
    pub verdict: Verdict,
    /// Up to three closest topics, highest score first, ties by ascending id.
    pub nearest: Vec<Match>,
    pub threshold: f64,
}

impl ScreenResult {
    pub fn max_score(&self) -> f64 {
        self.nearest.first().map_or(0.0, |m| m.score)
    }
}

/// Orders matches by descending score, then ascending topic id.
pub fn rank(a: &Match, b: &Match) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then(a.topic.cmp(&b.topic))
}

/// Pluggable duplicate screener. The forum only talks to this trait, so a
/// different measure can replace the n-gram index without touching callers.
pub trait Screener: Send + Sync {
    fn screen(&self, text: &str, threshold: f64) -> ScreenResult;
    fn insert(&mut self, topic: TopicId, text: &str);
    fn remove(&mut self, topic: TopicId) -> Result<()>;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NgramProfile {
    pub topic: TopicId,
    pub grams: HashSet<String>,
}

impl NgramProfile {
    pub fn new(topic: TopicId, text: &str, n: usize) -> Self {
        Self {
            topic,
            grams: ngrams(text, n),
        }
    }
}

/// Inverted gram index over n-gram profiles.
#[derive(Debug, Clone)]
pub struct NgramIndex {
    gram_size: usize,
    postings: HashMap<String, BTreeSet<TopicId>>,
    profile_sizes: BTreeMap<TopicId, usize>,
    profiles: HashMap<TopicId, HashSet<String>>,
}

impl NgramIndex {
    pub fn new(gram_size: usize) -> Self {
        assert!(gram_size >= 1, "gram size must be at least 1");
        Self {
            gram_size,
            postings: HashMap::new(),
            profile_sizes: BTreeMap::new(),
            profiles: HashMap::new(),
        }
    }

    pub fn gram_size(&self) -> usize {
        self.gram_size
    }

    pub fn posting(&self, gram: &str) -> Option<&BTreeSet<TopicId>> {
        self.postings.get(gram)
    }

    pub fn contains(&self, topic: TopicId) -> bool {
        self.profile_sizes.contains_key(&topic)
    }

    pub fn insert_profile(&mut self, profile: NgramProfile) {
        if self.contains(profile.topic) {
            let _ = self.remove(profile.topic);
        }
        for gram in &profile.grams {
            self.postings
                .entry(gram.clone())
                .or_default()
                .insert(profile.topic);
        }
        self.profile_sizes.insert(profile.topic, profile.grams.len());
        self.profiles.insert(profile.topic, profile.grams);
    }
}

impl Screener for NgramIndex {
    fn screen(&self, text: &str, threshold: f64) -> ScreenResult {
        let grams = ngrams(text, self.gram_size);
        let mut shared: HashMap<TopicId, usize> = HashMap::new();
        for gram in &grams {
            if let Some(ids) = self.postings.get(gram) {
                for id in ids {
                    *shared.entry(*id).or_default() += 1;
                }
            }
        }
        let mut scored: Vec<Match> = if grams.is_empty() {
            // Only other empty profiles score above zero (1.0).
            self.profile_sizes
                .iter()
                .filter(|(_, size)| **size == 0)
                .map(|(topic, _)| Match { topic: *topic, score: 1.0 })
                .collect()
        } else {
            shared
                .iter()
                .map(|(topic, inter)| Match {
                    topic: *topic,
                    score: jaccard(*inter, grams.len(), self.profile_sizes[topic]),
                })
                .collect()
        };
        scored.sort_by(rank);
        scored.truncate(NEAREST_LIMIT);
        if scored.len() < NEAREST_LIMIT {
            let taken: HashSet<TopicId> = scored.iter().map(|m| m.topic).collect();
            let fill: Vec<Match> = self
                .profile_sizes
                .keys()
                .filter(|id| !taken.contains(id))
                .take(NEAREST_LIMIT - scored.len())
                .map(|id| Match { topic: *id, score: 0.0 })
                .collect();
            scored.extend(fill);
        }
        let verdict = if scored.first().is_some_and(|m| m.score >= threshold) {
            Verdict::Rejected
        } else {
            Verdict::Accepted
        };
        ScreenResult {
            verdict,
            nearest: scored,
            threshold,
        }
    }

    fn insert(&mut self, topic: TopicId, text: &str) {
        let profile = NgramProfile::new(topic, text, self.gram_size);
        self.insert_profile(profile);
    }

    fn remove(&mut self, topic: TopicId) -> Result<()> {
        let grams = self
            .profiles
            .remove(&topic)
            .ok_or_else(|| Error::not_found(format!("topic {topic} in dedup index")))?;
        self.profile_sizes.remove(&topic);
        for gram in grams {
            if let Some(ids) = self.postings.get_mut(&gram) {
                ids.remove(&topic);
                if ids.is_empty() {
                    self.postings.remove(&gram);
                }
            }
        }
        Ok(())
    }

    fn len(&self) -> usize {
        self.profile_sizes.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Brute-force trigram enumeration, written without `ngrams`.
    fn enumerate(s: &str, n: usize) -> BTreeSet<String> {
        let c: Vec<char> = s.chars().collect();
        (0..c.len().saturating_sub(n - 1))
            .map(|i| c[i..i + n].iter().collect())
            .collect()
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize("  Add   DARK mode "), "add dark mode");
        assert_eq!(normalize(""), "");
        assert_eq!(normalize("AbC"), "abc");
        assert_eq!(normalize("a\t\n b!"), "a b!");
    }

    #[test]
    fn hand_checked_similarities() {
        let a = enumerate("abcd", 3);
        let b = enumerate("abce", 3);
        assert_eq!(a.iter().map(String::as_str).collect::<Vec<_>>(), ["abc", "bcd"]);
        let oracle = a.intersection(&b).count() as f64 / a.union(&b).count() as f64;
        assert_eq!(oracle, 1.0 / 3.0);
        assert!((similarity("abcd", "abce", 3) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(similarity("abcdef", "uvwxyz", 3), 0.0);
        assert_eq!(similarity("same text", "same text", 3), 1.0);
        assert_eq!(similarity("", "", 3), 1.0);
        assert_eq!(similarity("", "abc", 3), 0.0);
    }

    #[test]
    fn short_text_is_its_own_gram() {
        assert_eq!(ngrams("ab", 3), HashSet::from(["ab".to_string()]));
        assert_eq!(similarity("ab", "xy", 3), 0.0);
        assert!(ngrams("   ", 3).is_empty());
    }

    #[test]
    fn screening_examples() {
        let mut index = NgramIndex::new(3);
        let empty = index.screen("anything", 0.6);
        assert_eq!(empty.verdict, Verdict::Accepted);
        assert!(empty.nearest.is_empty());

        index.insert(TopicId(1), "add dark mode to the settings page");
        let dup = index.screen("Add dark mode to the SETTINGS page", 0.6);
        assert_eq!(dup.verdict, Verdict::Rejected);
        assert_eq!(dup.nearest[0], Match { topic: TopicId(1), score: 1.0 });

        index.insert(TopicId(1), "add dark mode to the settings page");
        assert_eq!(index.len(), 1);
        assert_eq!(index.posting("dar").unwrap().len(), 1);

        index.remove(TopicId(1)).unwrap();
        assert_eq!(index.screen("add dark mode to the settings page", 0.6).verdict, Verdict::Accepted);
        assert_eq!(index.remove(TopicId(1)).unwrap_err().code(), "NOT_FOUND");
    }

    #[test]
    fn score_just_below_threshold_is_accepted() {
        // "abcdefghij" has 8 trigrams; "abcdefghxy" shares abc..fgh (6) and
        // adds ghx, hxy: 6 / (8 + 8 - 6) = 0.6. Dropping one more shared gram
        // gives 5 / 11 < 0.6. Both values come from `enumerate` above.
        let base = "abcdefghij";
        let at = "abcdefghxy";
        let below = "abcdefgxyz";
        let ratio = |x: &str| {
            let a = enumerate(base, 3);
            let b = enumerate(x, 3);
            a.intersection(&b).count() as f64 / a.union(&b).count() as f64
        };
        assert_eq!(ratio(at), 0.6);
        assert_eq!(ratio(below), 5.0 / 11.0);

        let mut index = NgramIndex::new(3);
        index.insert(TopicId(1), base);
        assert_eq!(index.screen(at, 0.6).verdict, Verdict::Rejected);
        let r = index.screen(below, 0.6);
        assert_eq!(r.verdict, Verdict::Accepted);
        assert_eq!(r.max_score(), 5.0 / 11.0);
    }

    #[test]
    fn constructed_pair_at_point_five_five_is_accepted() {
        // 16 trigrams against 15, sharing abc..klm (11): 11 / 20.
        let corpus = "abcdefghijklmnopqr";
        let candidate = "abcdefghijklmwxyz";
        let a = enumerate(corpus, 3);
        let b = enumerate(candidate, 3);
        assert_eq!((a.len(), b.len(), a.intersection(&b).count()), (16, 15, 11));
        let oracle = a.intersection(&b).count() as f64 / a.union(&b).count() as f64;
        assert_eq!(oracle, 0.55);

        let mut index = NgramIndex::new(3);
        index.insert(TopicId(1), corpus);
        let r = index.screen(candidate, 0.6);
        assert_eq!(r.verdict, Verdict::Accepted);
        assert_eq!(r.max_score(), oracle);
    }

    #[test]
    fn nearest_is_padded_with_zero_scores() {
        let mut index = NgramIndex::new(3);
        index.insert(TopicId(5), "zzzzzz");
        index.insert(TopicId(2), "yyyyyy");
        index.insert(TopicId(9), "hello world");
        let r = index.screen("hello world", 0.6);
        let ids: Vec<_> = r.nearest.iter().map(|m| m.topic.0).collect();
        assert_eq!(ids, [9, 2, 5]);
        assert_eq!(r.nearest[1].score, 0.0);
    }

    #[test]
    fn empty_candidate_matches_only_empty_profiles() {
        let mut index = NgramIndex::new(3);
        index.insert(TopicId(1), "text");
        index.insert(TopicId(2), "  ");
        let r = index.screen("", 0.6);
        assert_eq!(r.nearest[0], Match { topic: TopicId(2), score: 1.0 });
        assert_eq!(r.verdict, Verdict::Rejected);
    }

    proptest! {
        #[test]
        fn similarity_is_symmetric_and_bounded(a in ".{0,40}", b in ".{0,40}", n in 1usize..5) {
            let ab = similarity(&a, &b, n);
            prop_assert_eq!(ab, similarity(&b, &a, n));
            prop_assert!((0.0..=1.0).contains(&ab));
        }

        #[test]
        fn normalize_is_idempotent(s in "\\PC{0,60}") {
            let once = normalize(&s);
            prop_assert_eq!(normalize(&once), once);
        }
    }
}
