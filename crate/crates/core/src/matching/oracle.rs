//! Exhaustive enumeration of stable matchings, for tests on small instances.

use super::{is_stable, Assignment, MatchError, MatchInstance, Matching};

pub const ORACLE_MAX_PLAYERS: usize = 6;
pub const ORACLE_MAX_ARMS: usize = 6;

/// Every stable matching of `inst`, sorted.
///
/// Enumerates all capacity-respecting assignments (each player unmatched or on
/// an acceptable arm) and keeps those without a blocking pair.
pub fn enumerate_stable_matchings(inst: &MatchInstance) -> Result<Vec<Matching>, MatchError> {
    let (players, arms) = (inst.players().len(), inst.arms().len());
    if players > ORACLE_MAX_PLAYERS || arms > ORACLE_MAX_ARMS {
        return Err(MatchError::OracleTooLarge {
            players,
            arms,
            max_players: ORACLE_MAX_PLAYERS,
            max_arms: ORACLE_MAX_ARMS,
        });
    }

    let mut out = Vec::new();
    let mut load = vec![0u32; arms];
    let mut current = Matching::unmatched(inst.players());
    extend(inst, 0, &mut load, &mut current, &mut out)?;
    out.sort();
    Ok(out)
}

fn extend(
    inst: &MatchInstance,
    p: usize,
    load: &mut [u32],
    current: &mut Matching,
    out: &mut Vec<Matching>,
) -> Result<(), MatchError> {
    let Some(&player) = inst.players().get(p) else {
        if is_stable(inst, current)? {
            out.push(current.clone());
        }
        return Ok(());
    };

    current.assign(player, Assignment::Unmatched);
    extend(inst, p + 1, load, current, out)?;

    for &arm in &inst.player_ranking(player).unwrap_or_default() {
        let a = inst.arm_index(arm).expect("ranked arm exists");
        if load[a] < inst.capacity(arm).expect("arm exists") {
            load[a] += 1;
            current.assign(player, Assignment::Arm(arm));
            extend(inst, p + 1, load, current, out)?;
            load[a] -= 1;
        }
    }
    current.assign(player, Assignment::Unmatched);
    Ok(())
}
