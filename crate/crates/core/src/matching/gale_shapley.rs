use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use super::{Assignment, MatchInstance, Matching, NOT_RANKED};

/// Player-proposing deferred acceptance with arm capacities.
///
/// Returns the player-optimal stable matching. Free players are served lowest
/// position first; a full arm keeps its members in an ordered set keyed by its
/// own ranking and bumps the least preferred one when a better player proposes.
pub fn player_proposing_gs(inst: &MatchInstance) -> Matching {
    let n = inst.players.len();
    let mut next = vec![0usize; n];
    let mut held: Vec<BTreeSet<(usize, usize)>> = vec![BTreeSet::new(); inst.arms.len()];
    let mut matched_to: Vec<Option<usize>> = vec![None; n];
    let mut free: BinaryHeap<Reverse<usize>> = (0..n).map(Reverse).collect();

    while let Some(Reverse(p)) = free.pop() {
        while let Some(&a) = inst.player_prefs[p].get(next[p]) {
            next[p] += 1;
            let rank = inst.arm_rank[a][p];
            let members = &mut held[a];
            if members.len() < inst.capacities[a] as usize {
                members.insert((rank, p));
                matched_to[p] = Some(a);
                break;
            }
            let &(worst_rank, worst) = members.last().expect("full arm has members");
            if rank < worst_rank {
                members.pop_last();
                members.insert((rank, p));
                matched_to[p] = Some(a);
                matched_to[worst] = None;
                free.push(Reverse(worst));
                break;
            }
        }
    }

    collect(inst, &matched_to)
}

/// Arm-proposing deferred acceptance; returns the player-pessimal stable matching.
///
/// An arm of capacity `c` is split into `c` unit seats sharing its ranking.
/// Players rank seats by arm, and seats of one arm by seat index. Free seats
/// propose lowest (arm, seat) first.
pub fn arm_proposing_gs(inst: &MatchInstance) -> Matching {
    let n = inst.players.len();
    let mut next: Vec<Vec<usize>> = inst
        .capacities
        .iter()
        .map(|&c| vec![0usize; c as usize])
        .collect();
    let mut holding: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut free: BinaryHeap<Reverse<(usize, usize)>> = inst
        .capacities
        .iter()
        .enumerate()
        .flat_map(|(a, &c)| (0..c as usize).map(move |s| Reverse((a, s))))
        .collect();

    while let Some(Reverse((a, s))) = free.pop() {
        while let Some(&p) = inst.arm_prefs[a].get(next[a][s]) {
            next[a][s] += 1;
            let rank = inst.player_rank[p][a];
            if rank == NOT_RANKED {
                continue;
            }
            match holding[p] {
                None => {
                    holding[p] = Some((a, s));
                    break;
                }
                Some((a2, s2)) => {
                    if (rank, s) < (inst.player_rank[p][a2], s2) {
                        holding[p] = Some((a, s));
                        free.push(Reverse((a2, s2)));
                        break;
                    }
                }
            }
        }
    }

    let matched_to: Vec<Option<usize>> = holding.iter().map(|h| h.map(|(a, _)| a)).collect();
    collect(inst, &matched_to)
}

fn collect(inst: &MatchInstance, matched_to: &[Option<usize>]) -> Matching {
    let mut m = Matching::unmatched(&inst.players);
    for (p, a) in matched_to.iter().enumerate() {
        if let Some(a) = a {
            m.assign(inst.players[p], Assignment::Arm(inst.arms[*a]));
        }
    }
    m
}
