//! Capacity-aware stable matching.
//!
//! A [`MatchInstance`] is one round's market: present players with strict
//! rankings over (a subset of) present arms, and present arms with strict
//! rankings over all present players plus a capacity. Players left out of a
//! ranking are unacceptable to that player; unmatched is worse than any
//! acceptable arm.

mod blocking;
mod gale_shapley;
mod oracle;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use blocking::{find_blocking_pairs, find_blocking_triplets, is_stable, BlockingTriplet};
pub use gale_shapley::{arm_proposing_gs, player_proposing_gs};
pub use oracle::{enumerate_stable_matchings, ORACLE_MAX_ARMS, ORACLE_MAX_PLAYERS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArmId(pub usize);

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

impl fmt::Display for ArmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

/// Where a player ends up in a round: a real arm, or the virtual "unmatched" arm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Assignment {
    Unmatched,
    Arm(ArmId),
}

impl Assignment {
    pub fn arm(self) -> Option<ArmId> {
        match self {
            Assignment::Arm(a) => Some(a),
            Assignment::Unmatched => None,
        }
    }

    pub fn is_matched(self) -> bool {
        matches!(self, Assignment::Arm(_))
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Assignment::Unmatched => f.write_str("-"),
            Assignment::Arm(a) => a.fmt(f),
        }
    }
}

impl From<ArmId> for Assignment {
    fn from(a: ArmId) -> Self {
        Assignment::Arm(a)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("player {0} listed twice")]
    DuplicatePlayer(PlayerId),
    #[error("arm {0} listed twice")]
    DuplicateArm(ArmId),
    #[error("expected {expected} {what}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("ranking of player {player} lists arm {arm} more than once")]
    DuplicateInPlayerRanking { player: PlayerId, arm: ArmId },
    #[error("ranking of player {player} lists arm {arm} which is not in the instance")]
    UnknownArmInRanking { player: PlayerId, arm: ArmId },
    #[error("ranking of arm {arm} is not a strict total order over the instance's players")]
    ArmRankingNotTotal { arm: ArmId },
    #[error("arm {0} has capacity 0")]
    ZeroCapacity(ArmId),
    #[error("matching refers to player {0} which is not in the instance")]
    UnknownPlayer(PlayerId),
    #[error("matching assigns arm {0} which is not in the instance")]
    UnknownArm(ArmId),
    #[error("arm {arm} holds {load} players but has capacity {capacity}")]
    CapacityExceeded { arm: ArmId, capacity: u32, load: usize },
    #[error("brute-force oracle limited to {max_players} players and {max_arms} arms, got {players}x{arms}")]
    OracleTooLarge {
        players: usize,
        arms: usize,
        max_players: usize,
        max_arms: usize,
    },
}

/// A validated one-round stable matching instance.
///
/// Internally every ranking is stored over local positions (index into
/// `players` / `arms`) together with inverse rank tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchInstance {
    players: Vec<PlayerId>,
    arms: Vec<ArmId>,
    player_prefs: Vec<Vec<usize>>,
    arm_prefs: Vec<Vec<usize>>,
    capacities: Vec<u32>,
    // player_rank[p][a]: position of arm a in p's ranking, NOT_RANKED if absent.
    player_rank: Vec<Vec<usize>>,
    // arm_rank[a][p]: position of player p in a's ranking.
    arm_rank: Vec<Vec<usize>>,
}

pub(crate) const NOT_RANKED: usize = usize::MAX;

fn position_map<T: Copy + Into<usize>>(ids: &[T]) -> Vec<Option<usize>> {
    let len = ids.iter().map(|&id| id.into() + 1).max().unwrap_or(0);
    let mut map = vec![None; len];
    for (pos, &id) in ids.iter().enumerate() {
        map[id.into()] = Some(pos);
    }
    map
}

impl From<PlayerId> for usize {
    fn from(p: PlayerId) -> usize {
        p.0
    }
}

impl From<ArmId> for usize {
    fn from(a: ArmId) -> usize {
        a.0
    }
}

impl MatchInstance {
    pub fn new(
        players: Vec<PlayerId>,
        arms: Vec<ArmId>,
        player_prefs: Vec<Vec<ArmId>>,
        arm_prefs: Vec<Vec<PlayerId>>,
        capacities: Vec<u32>,
    ) -> Result<Self, MatchError> {
        check_len("player rankings", players.len(), player_prefs.len())?;
        check_len("arm rankings", arms.len(), arm_prefs.len())?;
        check_len("capacities", arms.len(), capacities.len())?;

        let player_pos = position_map(&players);
        let arm_pos = position_map(&arms);
        if let Some(dup) = first_duplicate(&players) {
            return Err(MatchError::DuplicatePlayer(dup));
        }
        if let Some(dup) = first_duplicate(&arms) {
            return Err(MatchError::DuplicateArm(dup));
        }

        let mut local_player_prefs = Vec::with_capacity(players.len());
        for (&player, ranking) in players.iter().zip(&player_prefs) {
            let mut seen = vec![false; arms.len()];
            let mut local = Vec::with_capacity(ranking.len());
            for &arm in ranking {
                let pos = arm_pos
                    .get(arm.0)
                    .copied()
                    .flatten()
                    .ok_or(MatchError::UnknownArmInRanking { player, arm })?;
                if std::mem::replace(&mut seen[pos], true) {
                    return Err(MatchError::DuplicateInPlayerRanking { player, arm });
                }
                local.push(pos);
            }
            local_player_prefs.push(local);
        }

        let mut local_arm_prefs = Vec::with_capacity(arms.len());
        for (&arm, ranking) in arms.iter().zip(&arm_prefs) {
            if ranking.len() != players.len() {
                return Err(MatchError::ArmRankingNotTotal { arm });
            }
            let mut seen = vec![false; players.len()];
            let mut local = Vec::with_capacity(ranking.len());
            for &player in ranking {
                let pos = player_pos
                    .get(player.0)
                    .copied()
                    .flatten()
                    .ok_or(MatchError::ArmRankingNotTotal { arm })?;
                if std::mem::replace(&mut seen[pos], true) {
                    return Err(MatchError::ArmRankingNotTotal { arm });
                }
                local.push(pos);
            }
            local_arm_prefs.push(local);
        }

        if let Some((&arm, _)) = arms.iter().zip(&capacities).find(|(_, &c)| c == 0) {
            return Err(MatchError::ZeroCapacity(arm));
        }

        Ok(Self::from_local(
            players,
            arms,
            local_player_prefs,
            local_arm_prefs,
            capacities,
        ))
    }

    /// Builds an instance from rankings already expressed as local positions.
    /// Callers guarantee validity.
    pub(crate) fn from_local(
        players: Vec<PlayerId>,
        arms: Vec<ArmId>,
        player_prefs: Vec<Vec<usize>>,
        arm_prefs: Vec<Vec<usize>>,
        capacities: Vec<u32>,
    ) -> Self {
        let mut player_rank = vec![vec![NOT_RANKED; arms.len()]; players.len()];
        for (p, ranking) in player_prefs.iter().enumerate() {
            for (r, &a) in ranking.iter().enumerate() {
                player_rank[p][a] = r;
            }
        }
        let mut arm_rank = vec![vec![NOT_RANKED; players.len()]; arms.len()];
        for (a, ranking) in arm_prefs.iter().enumerate() {
            for (r, &p) in ranking.iter().enumerate() {
                arm_rank[a][p] = r;
            }
        }
        debug_assert!(capacities.iter().all(|&c| c >= 1));
        Self {
            players,
            arms,
            player_prefs,
            arm_prefs,
            capacities,
            player_rank,
            arm_rank,
        }
    }

    pub fn players(&self) -> &[PlayerId] {
        &self.players
    }

    pub fn arms(&self) -> &[ArmId] {
        &self.arms
    }

    pub fn player_ranking(&self, player: PlayerId) -> Option<Vec<ArmId>> {
        let p = self.player_index(player)?;
        Some(self.player_prefs[p].iter().map(|&a| self.arms[a]).collect())
    }

    pub fn arm_ranking(&self, arm: ArmId) -> Option<Vec<PlayerId>> {
        let a = self.arm_index(arm)?;
        Some(self.arm_prefs[a].iter().map(|&p| self.players[p]).collect())
    }

    pub fn capacity(&self, arm: ArmId) -> Option<u32> {
        self.arm_index(arm).map(|a| self.capacities[a])
    }

    pub(crate) fn player_index(&self, player: PlayerId) -> Option<usize> {
        self.players.iter().position(|&p| p == player)
    }

    pub(crate) fn arm_index(&self, arm: ArmId) -> Option<usize> {
        self.arms.iter().position(|&a| a == arm)
    }

    /// Rank of `assignment` in `player`'s ranking; lower is better. Unmatched
    /// and unacceptable arms share the worst rank.
    pub fn player_rank_of(&self, player: PlayerId, assignment: Assignment) -> usize {
        let (Some(p), Some(arm)) = (self.player_index(player), assignment.arm()) else {
            return NOT_RANKED;
        };
        self.arm_index(arm)
            .map_or(NOT_RANKED, |a| self.player_rank[p][a])
    }

    /// Whether `player` likes `x` at least as much as `y`.
    pub fn weakly_prefers(&self, player: PlayerId, x: Assignment, y: Assignment) -> bool {
        self.player_rank_of(player, x) <= self.player_rank_of(player, y)
    }
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<(), MatchError> {
    if expected == found {
        Ok(())
    } else {
        Err(MatchError::LengthMismatch {
            what,
            expected,
            found,
        })
    }
}

fn first_duplicate<T: Copy + Ord>(ids: &[T]) -> Option<T> {
    let mut sorted = ids.to_vec();
    sorted.sort_unstable();
    sorted.windows(2).find(|w| w[0] == w[1]).map(|w| w[0])
}

/// Canonical rendering used by golden tests.
impl fmt::Display for MatchInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "players:")?;
        for p in &self.players {
            write!(f, " {p}")?;
        }
        write!(f, "\narms:")?;
        for (a, c) in self.arms.iter().zip(&self.capacities) {
            write!(f, " {a}[{c}]")?;
        }
        for (p, ranking) in self.players.iter().zip(&self.player_prefs) {
            write!(f, "\n{p}:")?;
            write_ranking(f, ranking.iter().map(|&a| self.arms[a]))?;
        }
        for (a, ranking) in self.arms.iter().zip(&self.arm_prefs) {
            write!(f, "\n{a}:")?;
            write_ranking(f, ranking.iter().map(|&p| self.players[p]))?;
        }
        Ok(())
    }
}

fn write_ranking<T: fmt::Display>(
    f: &mut fmt::Formatter<'_>,
    items: impl Iterator<Item = T>,
) -> fmt::Result {
    for (i, item) in items.enumerate() {
        if i > 0 {
            write!(f, " >")?;
        }
        write!(f, " {item}")?;
    }
    Ok(())
}

/// One round's assignment of present players to arms or to the virtual
/// unmatched arm.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Matching {
    assignment: BTreeMap<PlayerId, Assignment>,
}

impl Matching {
    /// Every listed player unmatched.
    pub fn unmatched(players: &[PlayerId]) -> Self {
        Self {
            assignment: players.iter().map(|&p| (p, Assignment::Unmatched)).collect(),
        }
    }

    pub fn from_pairs(
        players: &[PlayerId],
        pairs: impl IntoIterator<Item = (PlayerId, ArmId)>,
    ) -> Self {
        let mut m = Self::unmatched(players);
        for (p, a) in pairs {
            m.assign(p, Assignment::Arm(a));
        }
        m
    }

    pub fn assign(&mut self, player: PlayerId, to: Assignment) {
        self.assignment.insert(player, to);
    }

    /// Assignment of `player`; players absent from the matching count as unmatched.
    pub fn get(&self, player: PlayerId) -> Assignment {
        self.assignment
            .get(&player)
            .copied()
            .unwrap_or(Assignment::Unmatched)
    }

    pub fn contains(&self, player: PlayerId) -> bool {
        self.assignment.contains_key(&player)
    }

    pub fn iter(&self) -> impl Iterator<Item = (PlayerId, Assignment)> + '_ {
        self.assignment.iter().map(|(&p, &a)| (p, a))
    }

    pub fn players(&self) -> impl Iterator<Item = PlayerId> + '_ {
        self.assignment.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (PlayerId, ArmId)> + '_ {
        self.iter().filter_map(|(p, a)| a.arm().map(|a| (p, a)))
    }

    pub fn load(&self, arm: ArmId) -> usize {
        self.pairs().filter(|&(_, a)| a == arm).count()
    }

    /// Checks that every player and arm belongs to `inst` and capacities hold.
    pub fn validate(&self, inst: &MatchInstance) -> Result<(), MatchError> {
        let mut load = vec![0usize; inst.arms.len()];
        for (p, a) in self.iter() {
            inst.player_index(p).ok_or(MatchError::UnknownPlayer(p))?;
            if let Assignment::Arm(arm) = a {
                let idx = inst.arm_index(arm).ok_or(MatchError::UnknownArm(arm))?;
                load[idx] += 1;
            }
        }
        for (a, &l) in load.iter().enumerate() {
            if l > inst.capacities[a] as usize {
                return Err(MatchError::CapacityExceeded {
                    arm: inst.arms[a],
                    capacity: inst.capacities[a],
                    load: l,
                });
            }
        }
        Ok(())
    }

    /// Every player of `inst` weakly prefers their assignment here to the one in `other`.
    pub fn weakly_dominates(&self, other: &Matching, inst: &MatchInstance) -> bool {
        inst.players
            .iter()
            .all(|&p| inst.weakly_prefers(p, self.get(p), other.get(p)))
    }
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (p, a)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}->{a}")?;
        }
        f.write_str("}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlockingPair {
    pub player: PlayerId,
    pub arm: ArmId,
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    /// Shorthand for tests: ids are the numbers given.
    pub fn inst(
        player_prefs: &[&[usize]],
        arm_prefs: &[&[usize]],
        capacities: &[u32],
    ) -> MatchInstance {
        MatchInstance::new(
            (0..player_prefs.len()).map(PlayerId).collect(),
            (0..arm_prefs.len()).map(ArmId).collect(),
            player_prefs
                .iter()
                .map(|r| r.iter().map(|&a| ArmId(a)).collect())
                .collect(),
            arm_prefs
                .iter()
                .map(|r| r.iter().map(|&p| PlayerId(p)).collect())
                .collect(),
            capacities.to_vec(),
        )
        .unwrap()
    }

    pub fn pairs(players: usize, pairs: &[(usize, usize)]) -> Matching {
        let ps: Vec<PlayerId> = (0..players).map(PlayerId).collect();
        Matching::from_pairs(&ps, pairs.iter().map(|&(p, a)| (PlayerId(p), ArmId(a))))
    }
}
