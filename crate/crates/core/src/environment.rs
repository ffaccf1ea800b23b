//! Ground-truth market: mean rewards, per-round availability, arm rankings and
//! capacities, plus Bernoulli reward sampling.
//!
//! Rounds are numbered from 1 to the horizon. Local rounds of a player are
//! numbered from 1 to the number of rounds that player attends.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matching::{ArmId, Assignment, MatchError, MatchInstance, Matching, PlayerId};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("expected {expected} {what}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("mean reward of {player} on {arm} is {value}, outside (0, 1)")]
    MeanOutOfRange {
        player: PlayerId,
        arm: ArmId,
        value: f64,
    },
    #[error("round {round} outside 1..={horizon}")]
    RoundOutOfRange { round: usize, horizon: usize },
    #[error("round {round}: player {player} does not exist")]
    UnknownPlayer { round: usize, player: PlayerId },
    #[error("round {round}: arm {arm} does not exist")]
    UnknownArm { round: usize, arm: ArmId },
    #[error("round {round}: {player} has equal means on co-available arms {first} and {second}")]
    TiedMeans {
        round: usize,
        player: PlayerId,
        first: ArmId,
        second: ArmId,
    },
    #[error("round {round}: invalid matching: {source}")]
    InvalidMatching { round: usize, source: MatchError },
}

/// Who is present in one round, with the arms' rankings and capacities.
///
/// Players and arms are kept sorted by id; `arm_prefs[k]` and `capacities[k]`
/// belong to `arms[k]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RoundDocument")]
pub struct RoundSchedule {
    players: Vec<PlayerId>,
    arms: Vec<ArmId>,
    arm_prefs: Vec<Vec<PlayerId>>,
    capacities: Vec<u32>,
    #[serde(skip)]
    local_arm_prefs: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
struct RoundDocument {
    players: Vec<PlayerId>,
    arms: Vec<ArmId>,
    arm_prefs: Vec<Vec<PlayerId>>,
    capacities: Vec<u32>,
}

impl TryFrom<RoundDocument> for RoundSchedule {
    type Error = MatchError;

    fn try_from(doc: RoundDocument) -> Result<Self, MatchError> {
        Self::new(doc.players, doc.arms, doc.arm_prefs, doc.capacities)
    }
}

impl RoundSchedule {
    pub fn new(
        players: Vec<PlayerId>,
        arms: Vec<ArmId>,
        arm_prefs: Vec<Vec<PlayerId>>,
        capacities: Vec<u32>,
    ) -> Result<Self, MatchError> {
        // Validate shape through the matching instance constructor.
        MatchInstance::new(
            players.clone(),
            arms.clone(),
            vec![Vec::new(); players.len()],
            arm_prefs.clone(),
            capacities.clone(),
        )?;
        let mut players = players;
        players.sort_unstable();
        let mut order: Vec<usize> = (0..arms.len()).collect();
        order.sort_unstable_by_key(|&k| arms[k]);
        let mut schedule = Self {
            players,
            arms: order.iter().map(|&k| arms[k]).collect(),
            arm_prefs: order.iter().map(|&k| arm_prefs[k].clone()).collect(),
            capacities: order.iter().map(|&k| capacities[k]).collect(),
            local_arm_prefs: Vec::new(),
        };
        schedule.index();
        Ok(schedule)
    }

    /// Every one of `num_players` players and `num_arms` arms present, unit
    /// capacities, each arm ranking players by id.
    pub fn everyone(num_players: usize, num_arms: usize) -> Self {
        let players: Vec<PlayerId> = (0..num_players).map(PlayerId).collect();
        Self::new(
            players.clone(),
            (0..num_arms).map(ArmId).collect(),
            vec![players; num_arms],
            vec![1; num_arms],
        )
        .expect("well-formed")
    }

    fn index(&mut self) {
        self.local_arm_prefs = self
            .arm_prefs
            .iter()
            .map(|r| {
                r.iter()
                    .map(|p| self.players.binary_search(p).expect("validated"))
                    .collect()
            })
            .collect();
    }

    pub fn players(&self) -> &[PlayerId] {
        &self.players
    }

    pub fn arms(&self) -> &[ArmId] {
        &self.arms
    }

    pub fn arm_prefs(&self) -> &[Vec<PlayerId>] {
        &self.arm_prefs
    }

    pub fn capacities(&self) -> &[u32] {
        &self.capacities
    }
}

/// Complete description of a problem instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar", try_from = "SpecDocument<F>")]
pub struct EnvironmentSpec<F> {
    num_players: usize,
    num_arms: usize,
    mu: Vec<Vec<F>>,
    rounds: Vec<RoundSchedule>,
}

#[derive(Deserialize)]
#[serde(bound = "F: Scalar")]
struct SpecDocument<F> {
    num_players: usize,
    num_arms: usize,
    mu: Vec<Vec<F>>,
    rounds: Vec<RoundSchedule>,
}

impl<F: Scalar> TryFrom<SpecDocument<F>> for EnvironmentSpec<F> {
    type Error = EnvError;

    fn try_from(doc: SpecDocument<F>) -> Result<Self, EnvError> {
        Self::new(doc.num_players, doc.num_arms, doc.mu, doc.rounds)
    }
}

impl<F: Scalar> EnvironmentSpec<F> {
    /// Validates means, ids and per-round distinctness of co-available means.
    pub fn new(
        num_players: usize,
        num_arms: usize,
        mu: Vec<Vec<F>>,
        rounds: Vec<RoundSchedule>,
    ) -> Result<Self, EnvError> {
        if mu.len() != num_players {
            return Err(EnvError::Dimension {
                what: "rows of mean rewards",
                expected: num_players,
                found: mu.len(),
            });
        }
        for (i, row) in mu.iter().enumerate() {
            if row.len() != num_arms {
                return Err(EnvError::Dimension {
                    what: "columns of mean rewards",
                    expected: num_arms,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !(v > F::zero() && v < F::one()) {
                    return Err(EnvError::MeanOutOfRange {
                        player: PlayerId(i),
                        arm: ArmId(j),
                        value: v.to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
        }

        for (t, r) in rounds.iter().enumerate() {
            let round = t + 1;
            if let Some(&player) = r.players.iter().find(|p| p.0 >= num_players) {
                return Err(EnvError::UnknownPlayer { round, player });
            }
            if let Some(&arm) = r.arms.iter().find(|a| a.0 >= num_arms) {
                return Err(EnvError::UnknownArm { round, arm });
            }
            for &player in &r.players {
                let row = &mu[player.0];
                let mut present: Vec<(F, ArmId)> = r.arms.iter().map(|&a| (row[a.0], a)).collect();
                present.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite means"));
                if let Some(w) = present.windows(2).find(|w| w[0].0 == w[1].0) {
                    return Err(EnvError::TiedMeans {
                        round,
                        player,
                        first: w[0].1.min(w[1].1),
                        second: w[0].1.max(w[1].1),
                    });
                }
            }
        }

        Ok(Self {
            num_players,
            num_arms,
            mu,
            rounds,
        })
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    pub fn horizon(&self) -> usize {
        self.rounds.len()
    }

    pub fn mean(&self, player: PlayerId, arm: ArmId) -> F {
        self.mu[player.0][arm.0]
    }

    /// Mean reward of an assignment; unmatched yields zero.
    pub fn mean_of(&self, player: PlayerId, assignment: Assignment) -> F {
        assignment.arm().map_or(F::zero(), |a| self.mean(player, a))
    }

    pub fn means(&self) -> &[Vec<F>] {
        &self.mu
    }

    /// The largest mean of `player` over all arms.
    pub fn max_mean(&self, player: PlayerId) -> F {
        self.mu[player.0]
            .iter()
            .copied()
            .fold(F::zero(), F::max)
    }

    pub fn schedule(&self) -> &[RoundSchedule] {
        &self.rounds
    }

    /// The slice of the market at global round `t` (1-based).
    pub fn view(&self, t: usize) -> Result<RoundView<'_>, EnvError> {
        if t == 0 || t > self.rounds.len() {
            return Err(EnvError::RoundOutOfRange {
                round: t,
                horizon: self.rounds.len(),
            });
        }
        Ok(RoundView {
            round: t,
            schedule: &self.rounds[t - 1],
        })
    }

    /// The round's instance under true player preferences: every present arm,
    /// ranked by decreasing mean.
    pub fn true_instance(&self, t: usize) -> Result<MatchInstance, EnvError> {
        let view = self.view(t)?;
        let rankings = view
            .players()
            .iter()
            .map(|&p| {
                let row = &self.mu[p.0];
                let mut order: Vec<usize> = (0..view.arms().len()).collect();
                order.sort_by(|&x, &y| {
                    row[view.arms()[y].0]
                        .partial_cmp(&row[view.arms()[x].0])
                        .expect("finite means")
                });
                order
            })
            .collect();
        Ok(view.instance_from_positions(rankings))
    }

    /// Per-player attendance: `H_i` sorted ascending.
    pub fn local_clock(&self) -> LocalClock {
        let mut rounds = vec![Vec::new(); self.num_players];
        for (t, r) in self.rounds.iter().enumerate() {
            for p in &r.players {
                rounds[p.0].push(t + 1);
            }
        }
        LocalClock { rounds }
    }

    /// Smallest gap between means of co-available arms, over every player
    /// and every round that player attends. Infinite when no round has two
    /// arms alongside a player.
    pub fn min_gap(&self) -> F {
        let mut gap = F::infinity();
        let mut buf: Vec<F> = Vec::with_capacity(self.num_arms);
        for r in &self.rounds {
            for p in &r.players {
                buf.clear();
                buf.extend(r.arms.iter().map(|a| self.mu[p.0][a.0]));
                buf.sort_by(|x, y| x.partial_cmp(y).expect("finite means"));
                for w in buf.windows(2) {
                    gap = gap.min(w[1] - w[0]);
                }
            }
        }
        gap
    }

    /// Samples Bernoulli rewards for the matched pairs of round `t`.
    ///
    /// Players of the round missing from `m` are unmatched. One uniform draw
    /// is consumed per matched pair, in increasing player order.
    pub fn step<R: Rng + ?Sized>(
        &self,
        t: usize,
        m: &Matching,
        rng: &mut R,
    ) -> Result<RewardSample, EnvError> {
        let view = self.view(t)?;
        view.check_matching(m)?;
        let observations = view
            .players()
            .iter()
            .map(|&player| {
                let assignment = m.get(player);
                let reward = match assignment {
                    Assignment::Arm(arm) => {
                        let p = self.mean(player, arm).to_f64().expect("finite mean");
                        u8::from(rng.gen::<f64>() < p)
                    }
                    Assignment::Unmatched => 0,
                };
                Observation {
                    player,
                    assignment,
                    reward,
                }
            })
            .collect();
        Ok(RewardSample {
            round: t,
            observations,
        })
    }
}

/// Read-only view of one round.
#[derive(Clone, Copy, Debug)]
pub struct RoundView<'a> {
    round: usize,
    schedule: &'a RoundSchedule,
}

impl<'a> RoundView<'a> {
    pub fn new(round: usize, schedule: &'a RoundSchedule) -> Self {
        Self { round, schedule }
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn players(&self) -> &'a [PlayerId] {
        &self.schedule.players
    }

    pub fn arms(&self) -> &'a [ArmId] {
        &self.schedule.arms
    }

    pub fn arm_prefs(&self) -> &'a [Vec<PlayerId>] {
        &self.schedule.arm_prefs
    }

    pub fn capacities(&self) -> &'a [u32] {
        &self.schedule.capacities
    }

    pub fn schedule(&self) -> &'a RoundSchedule {
        self.schedule
    }

    /// Instance with the given player rankings (one per present player, in
    /// `players()` order) against this round's arm side.
    pub fn instance(&self, rankings: Vec<Vec<ArmId>>) -> Result<MatchInstance, MatchError> {
        MatchInstance::new(
            self.schedule.players.clone(),
            self.schedule.arms.clone(),
            rankings,
            self.schedule.arm_prefs.clone(),
            self.schedule.capacities.clone(),
        )
    }

    /// Like [`RoundView::instance`] with rankings given as positions into
    /// `arms()`. Positions must be distinct and in range.
    pub(crate) fn instance_from_positions(&self, rankings: Vec<Vec<usize>>) -> MatchInstance {
        debug_assert_eq!(rankings.len(), self.schedule.players.len());
        MatchInstance::from_local(
            self.schedule.players.clone(),
            self.schedule.arms.clone(),
            rankings,
            self.schedule.local_arm_prefs.clone(),
            self.schedule.capacities.clone(),
        )
    }

    /// Players of `m` must be present; assigned arms present; capacities hold.
    pub fn check_matching(&self, m: &Matching) -> Result<(), EnvError> {
        let round = self.round;
        let mut load = vec![0u32; self.schedule.arms.len()];
        for (player, a) in m.iter() {
            if self.schedule.players.binary_search(&player).is_err() {
                return Err(EnvError::InvalidMatching {
                    round,
                    source: MatchError::UnknownPlayer(player),
                });
            }
            if let Assignment::Arm(arm) = a {
                let k = self.schedule.arms.binary_search(&arm).map_err(|_| {
                    EnvError::InvalidMatching {
                        round,
                        source: MatchError::UnknownArm(arm),
                    }
                })?;
                load[k] += 1;
                if load[k] > self.schedule.capacities[k] {
                    return Err(EnvError::InvalidMatching {
                        round,
                        source: MatchError::CapacityExceeded {
                            arm,
                            capacity: self.schedule.capacities[k],
                            load: load[k] as usize,
                        },
                    });
                }
            }
        }
        Ok(())
    }
}

/// Global rounds attended by each player.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalClock {
    rounds: Vec<Vec<usize>>,
}

impl LocalClock {
    /// `H_i` as an ascending sequence (`h_i`).
    pub fn rounds(&self, player: PlayerId) -> &[usize] {
        &self.rounds[player.0]
    }

    /// `T_i`.
    pub fn count(&self, player: PlayerId) -> usize {
        self.rounds[player.0].len()
    }

    /// `h_i(t_i)` for a 1-based local round.
    pub fn global_round(&self, player: PlayerId, local: usize) -> Option<usize> {
        local
            .checked_sub(1)
            .and_then(|k| self.rounds[player.0].get(k).copied())
    }

    /// `h_i^{-1}(t)`; `None` when the player is absent at `t`.
    pub fn local_round(&self, player: PlayerId, global: usize) -> Option<usize> {
        self.rounds[player.0].binary_search(&global).ok().map(|k| k + 1)
    }

    pub fn attends(&self, player: PlayerId, global: usize) -> bool {
        self.local_round(player, global).is_some()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub player: PlayerId,
    pub assignment: Assignment,
    /// 0 or 1; always 0 when unmatched.
    pub reward: u8,
}

/// Realized rewards of one round, one entry per present player.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewardSample {
    pub round: usize,
    pub observations: Vec<Observation>,
}

impl RewardSample {
    pub fn reward(&self, player: PlayerId) -> Option<u8> {
        self.observations
            .iter()
            .find(|o| o.player == player)
            .map(|o| o.reward)
    }
}
