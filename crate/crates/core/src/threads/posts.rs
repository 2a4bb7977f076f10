use serde::{Deserialize, Serialize};

use crate::clock::Timestamp;
use crate::error::{Error, Result};
use crate::ids::{PostId, TopicId, UserId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub body: String,
    pub submitted_at: Timestamp,
}

/// A reply, possibly made of several consecutive submissions by one author.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub id: PostId,
    pub topic: TopicId,
    pub author: UserId,
    pub segments: Vec<Segment>,
    pub first_at: Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostOutcome {
    pub post: PostId,
    pub merged: bool,
}

/// The posts of one topic in arrival order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thread {
    pub topic: TopicId,
    pub posts: Vec<Post>,
}

impl Thread {
    pub fn new(topic: TopicId) -> Self {
        Self {
            topic,
            posts: Vec::new(),
        }
    }

    /// Appends `body`, merging into the last post when it has the same author.
    ///
    /// `next_id` is only called when a new post is created. A segment's
    /// timestamp is raised to its predecessor's if the caller's clock went
    /// backwards, keeping each post's segments non-decreasing.
    pub fn add_post(
        &mut self,
        author: UserId,
        body: &str,
        at: Timestamp,
        next_id: impl FnOnce() -> PostId,
    ) -> Result<PostOutcome> {
        let body = body.trim();
        if body.is_empty() {
            return Err(Error::EmptyBody);
        }
        if let Some(last) = self.posts.last_mut().filter(|p| p.author == author) {
            let floor = last.segments.last().map_or(at, |s| s.submitted_at);
            last.segments.push(Segment {
                body: body.to_owned(),
                submitted_at: at.max(floor),
            });
            return Ok(PostOutcome {
                post: last.id,
                merged: true,
            });
        }
        let id = next_id();
        self.posts.push(Post {
            id,
            topic: self.topic,
            author,
            segments: vec![Segment {
                body: body.to_owned(),
                submitted_at: at,
            }],
            first_at: at,
        });
        Ok(PostOutcome {
            post: id,
            merged: false,
        })
    }

    pub fn post(&self, id: PostId) -> Option<&Post> {
        self.posts.iter().find(|p| p.id == id)
    }

    /// Posts ordered by `first_at`, ties in arrival order.
    pub fn chronological(&self) -> Vec<Post> {
        let mut posts = self.posts.clone();
        posts.sort_by_key(|p| p.first_at);
        posts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{Duration, Utc};
    use proptest::prelude::*;

    fn ids() -> impl FnMut() -> PostId {
        let mut next = 0;
        move || {
            next += 1;
            PostId(next)
        }
    }

    #[test]
    fn same_author_merges_different_author_splits() {
        let now = Utc::now();
        let mut alloc = ids();
        let mut thread = Thread::new(TopicId(1));
        let first = thread.add_post(UserId(1), "one", now, &mut alloc).unwrap();
        assert!(!first.merged);
        let second = thread.add_post(UserId(1), "two", now, &mut alloc).unwrap();
        assert!(second.merged);
        assert_eq!(thread.posts.len(), 1);
        assert_eq!(thread.posts[0].segments.len(), 2);
        thread.add_post(UserId(2), "three", now, &mut alloc).unwrap();
        assert_eq!(thread.posts.len(), 2);
        assert_eq!(thread.posts[1].id, PostId(2));
    }

    #[test]
    fn empty_body_is_rejected() {
        let mut thread = Thread::new(TopicId(1));
        let err = thread.add_post(UserId(1), " \n", Utc::now(), ids()).unwrap_err();
        assert_eq!(err.code(), "EMPTY_BODY");
        assert!(thread.posts.is_empty());
    }

    #[test]
    fn chronological_orders_by_first_at() {
        let now = Utc::now();
        let mut alloc = ids();
        let mut thread = Thread::new(TopicId(1));
        thread.add_post(UserId(1), "late", now, &mut alloc).unwrap();
        thread.add_post(UserId(2), "early", now - Duration::minutes(5), &mut alloc).unwrap();
        let order: Vec<_> = thread.chronological().into_iter().map(|p| p.segments[0].body.clone()).collect();
        assert_eq!(order, ["early", "late"]);
    }

    #[test]
    fn merged_segment_timestamps_do_not_go_backwards() {
        let now = Utc::now();
        let mut thread = Thread::new(TopicId(1));
        let mut alloc = ids();
        thread.add_post(UserId(1), "a", now, &mut alloc).unwrap();
        thread.add_post(UserId(1), "b", now - Duration::seconds(3), &mut alloc).unwrap();
        let segs = &thread.posts[0].segments;
        assert!(segs[1].submitted_at >= segs[0].submitted_at);
    }

    proptest! {
        #[test]
        fn merging_keeps_authors_alternating_and_text_in_order(authors in proptest::collection::vec(1u64..4, 0..40)) {
            let now = Utc::now();
            let mut thread = Thread::new(TopicId(1));
            let mut alloc = ids();
            let bodies: Vec<String> = (0..authors.len()).map(|i| format!("body {i}")).collect();
            for (i, author) in authors.iter().enumerate() {
                thread.add_post(UserId(*author), &bodies[i], now + Duration::seconds(i as i64), &mut alloc).unwrap();
            }
            for pair in thread.posts.windows(2) {
                prop_assert_ne!(pair[0].author, pair[1].author);
            }
            let flat: Vec<String> = thread.posts.iter().flat_map(|p| p.segments.iter().map(|s| s.body.clone())).collect();
            prop_assert_eq!(flat, bodies);
        }
    }
}
