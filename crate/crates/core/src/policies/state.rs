use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::{RewardSample, RoundView};
use crate::matching::{ArmId, Matching, PlayerId};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("round {expected} update received rewards for round {found}")]
    RoundMismatch { expected: usize, found: usize },
    #[error("no reward observation for present player {0}")]
    MissingObservation(PlayerId),
    #[error("reward observation for {player} disagrees with the matching")]
    InconsistentObservation { player: PlayerId },
}

/// Upper and lower confidence index of one (player, arm) pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndexPair<F> {
    pub ucb: F,
    pub lcb: F,
}

/// `sqrt(log_t / count)`, infinite when `count` is zero.
pub fn confidence_radius<F: Scalar>(log_t: F, count: u64) -> F {
    if count == 0 {
        F::infinity()
    } else {
        (log_t / F::from_count(count)).sqrt()
    }
}

/// Per-(player, arm) match counts and empirical means plus each player's
/// local round counter (rounds attended so far, plus one).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct PolicyState<F> {
    num_players: usize,
    num_arms: usize,
    counts: Vec<u64>,
    means: Vec<F>,
    local_rounds: Vec<u64>,
}

impl<F: Scalar> PolicyState<F> {
    pub fn new(num_players: usize, num_arms: usize) -> Self {
        Self {
            num_players,
            num_arms,
            counts: vec![0; num_players * num_arms],
            means: vec![F::zero(); num_players * num_arms],
            local_rounds: vec![1; num_players],
        }
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    fn idx(&self, player: PlayerId, arm: ArmId) -> usize {
        debug_assert!(player.0 < self.num_players && arm.0 < self.num_arms);
        player.0 * self.num_arms + arm.0
    }

    pub fn count(&self, player: PlayerId, arm: ArmId) -> u64 {
        self.counts[self.idx(player, arm)]
    }

    /// Empirical mean; `None` before the first match.
    pub fn mean(&self, player: PlayerId, arm: ArmId) -> Option<F> {
        let i = self.idx(player, arm);
        (self.counts[i] > 0).then_some(self.means[i])
    }

    /// The player's current local round `t_i`.
    pub fn local_round(&self, player: PlayerId) -> u64 {
        self.local_rounds[player.0]
    }

    /// Overwrites the statistics of one pair. Meant for constructing states
    /// in tests and diagnostics.
    pub fn set_statistics(&mut self, player: PlayerId, arm: ArmId, count: u64, mean: F) {
        let i = self.idx(player, arm);
        self.counts[i] = count;
        self.means[i] = if count == 0 { F::zero() } else { mean };
    }

    pub fn set_local_round(&mut self, player: PlayerId, local_round: u64) {
        assert!(local_round >= 1, "local rounds start at 1");
        self.local_rounds[player.0] = local_round;
    }

    /// Confidence radius `sqrt(ln t_i / T_ij)`; infinite before the first match.
    pub fn radius(&self, player: PlayerId, arm: ArmId) -> F {
        let n = self.count(player, arm);
        if n == 0 {
            return F::infinity();
        }
        confidence_radius(F::from_count(self.local_round(player)).ln(), n)
    }

    /// UCB/LCB with natural log at the player's current local round;
    /// `(+inf, -inf)` for pairs never matched.
    pub fn indices(&self, player: PlayerId, arm: ArmId) -> IndexPair<F> {
        match self.mean(player, arm) {
            None => IndexPair {
                ucb: F::infinity(),
                lcb: F::neg_infinity(),
            },
            Some(mean) => {
                let r = self.radius(player, arm);
                IndexPair {
                    ucb: mean + r,
                    lcb: mean - r,
                }
            }
        }
    }

    /// Folds in one round: matched pairs get a count and running-mean update,
    /// and every present player's local round advances.
    pub fn update(
        &mut self,
        rv: &RoundView<'_>,
        m: &Matching,
        rewards: &RewardSample,
    ) -> Result<(), PolicyError> {
        if rewards.round != rv.round() {
            return Err(PolicyError::RoundMismatch {
                expected: rv.round(),
                found: rewards.round,
            });
        }
        for &player in rv.players() {
            let obs = rewards
                .observations
                .iter()
                .find(|o| o.player == player)
                .ok_or(PolicyError::MissingObservation(player))?;
            if obs.assignment != m.get(player) {
                return Err(PolicyError::InconsistentObservation { player });
            }
            if let Some(arm) = obs.assignment.arm() {
                let i = self.idx(player, arm);
                self.counts[i] += 1;
                let reward = F::from_count(u64::from(obs.reward));
                self.means[i] = self.means[i] + (reward - self.means[i]) / F::from_count(self.counts[i]);
            }
            self.local_rounds[player.0] += 1;
        }
        Ok(())
    }
}
