//! Largest parcel the long player can pass to the short player.
//!
//! As a linear program: maximize `x` subject to `0 <= x <= A` and
//! `x <= B`, where `A` is the receiver's absolute need and `B` the sender's
//! holding. With one bounded variable the optimum is `min(A, B)`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferProblem {
    /// Player 2's absolute short balance.
    pub capacity_receiver: u64,
    /// Player 1's long balance.
    pub capacity_sender: u64,
}

impl TransferProblem {
    pub const fn new(capacity_receiver: u64, capacity_sender: u64) -> Self {
        TransferProblem {
            capacity_receiver,
            capacity_sender,
        }
    }

    pub fn is_feasible(&self, x: u64) -> bool {
        x <= self.capacity_receiver && x <= self.capacity_sender
    }
}

pub fn max_transfer(problem: TransferProblem) -> u64 {
    let x = problem.capacity_receiver.min(problem.capacity_sender);
    assert!(problem.is_feasible(x));
    assert!(
        x.checked_add(1).is_none_or(|next| !problem.is_feasible(next)),
        "x + 1 must violate a bound"
    );
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(max_transfer(TransferProblem::new(10, 20)), 10);
        assert_eq!(max_transfer(TransferProblem::new(0, 7)), 0);
        assert_eq!(max_transfer(TransferProblem::new(13, 13)), 13);
    }

    #[test]
    fn feasibility() {
        let p = TransferProblem::new(4, 9);
        assert!(p.is_feasible(0) && p.is_feasible(4));
        assert!(!p.is_feasible(5));
    }
}
