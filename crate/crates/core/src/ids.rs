//! Typed identifiers for the forum's entities.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(
            Debug, Default, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u64);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }

        impl FromStr for $name {
            type Err = std::num::ParseIntError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                s.parse().map($name)
            }
        }

        impl From<u64> for $name {
            fn from(raw: u64) -> Self {
                $name(raw)
            }
        }
    };
}

id_type!(
    /// Identifies a stakeholder account. `UserId(0)` is the built-in system actor.
    UserId
);
id_type!(TopicId);
id_type!(TemplateId);
id_type!(PostId);
id_type!(PollId);
id_type!(SessionId);
id_type!(GiftId);
id_type!(TestId);

impl UserId {
    /// Actor used for automatic transitions and minted credits.
    pub const SYSTEM: UserId = UserId(0);
}
