use serde::{Deserialize, Serialize};

use super::Stakeholder;
use crate::error::{Error, Result};
use crate::ids::GiftId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GiftDraft {
    pub name: String,
    pub cost: u64,
    pub stock: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gift {
    pub id: GiftId,
    pub name: String,
    pub cost: u64,
    pub stock: u64,
}

impl GiftDraft {
    pub fn into_gift(self, id: GiftId) -> Result<Gift> {
        if self.cost == 0 {
            return Err(Error::InvalidAmount);
        }
        Ok(Gift {
            id,
            name: self.name,
            cost: self.cost,
            stock: self.stock,
        })
    }
}

impl Gift {
    /// Debits `user` and takes one item from stock, or changes nothing.
    pub fn redeem(&mut self, user: &mut Stakeholder) -> Result<()> {
        if self.stock == 0 {
            return Err(Error::OutOfStock);
        }
        if user.score < self.cost {
            return Err(Error::InsufficientScore {
                score: user.score,
                cost: self.cost,
            });
        }
        user.score -= self.cost;
        self.stock -= 1;
        Ok(())
    }
}
