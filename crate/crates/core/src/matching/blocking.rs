use serde::{Deserialize, Serialize};

use super::{ArmId, Assignment, BlockingPair, MatchError, MatchInstance, Matching, PlayerId, NOT_RANKED};

/// A blocking pair together with the player's current assignment (possibly
/// the virtual unmatched arm).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlockingTriplet {
    pub player: PlayerId,
    pub arm: ArmId,
    pub current: Assignment,
}

/// All pairs `(p, a)` where `p` ranks `a` above its current assignment and
/// `a` either has a free seat or ranks `p` above one of its members.
///
/// Players missing from `m` are treated as unmatched. Output is sorted by
/// (player, arm).
pub fn find_blocking_pairs(
    inst: &MatchInstance,
    m: &Matching,
) -> Result<Vec<BlockingPair>, MatchError> {
    m.validate(inst)?;
    let (load, worst) = arm_status(inst, m);

    let mut out = Vec::new();
    for (p, &player) in inst.players.iter().enumerate() {
        let current = current_rank(inst, p, m.get(player));
        for &a in inst.player_prefs[p].iter().take(current.min(inst.player_prefs[p].len())) {
            let has_room = load[a] < inst.capacities[a] as usize;
            if has_room || inst.arm_rank[a][p] < worst[a] {
                out.push(BlockingPair {
                    player,
                    arm: inst.arms[a],
                });
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Blocking pairs extended with the player's current assignment.
pub fn find_blocking_triplets(
    inst: &MatchInstance,
    m: &Matching,
) -> Result<Vec<BlockingTriplet>, MatchError> {
    Ok(find_blocking_pairs(inst, m)?
        .into_iter()
        .map(|bp| BlockingTriplet {
            player: bp.player,
            arm: bp.arm,
            current: m.get(bp.player),
        })
        .collect())
}

pub fn is_stable(inst: &MatchInstance, m: &Matching) -> Result<bool, MatchError> {
    Ok(find_blocking_pairs(inst, m)?.is_empty())
}

fn current_rank(inst: &MatchInstance, p: usize, a: Assignment) -> usize {
    match a {
        Assignment::Unmatched => NOT_RANKED,
        Assignment::Arm(arm) => inst
            .arm_index(arm)
            .map_or(NOT_RANKED, |a| inst.player_rank[p][a]),
    }
}

/// Per arm: number of members and the arm-rank of its least preferred member
/// (0 when empty, so no player beats it through the second condition).
fn arm_status(inst: &MatchInstance, m: &Matching) -> (Vec<usize>, Vec<usize>) {
    let mut load = vec![0usize; inst.arms.len()];
    let mut worst = vec![0usize; inst.arms.len()];
    for (player, a) in m.iter() {
        let (Some(p), Some(arm)) = (inst.player_index(player), a.arm()) else {
            continue;
        };
        let a = inst.arm_index(arm).expect("validated");
        load[a] += 1;
        worst[a] = worst[a].max(inst.arm_rank[a][p]);
    }
    (load, worst)
}
