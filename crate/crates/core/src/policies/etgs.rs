use rand::seq::SliceRandom;
use rand::Rng;

use super::ucb::{ucb_gs, ucb_order};
use super::{ExplorationMode, PolicyState, RoundDecision, RoundMode};
use crate::assignment::lexicographic_max_weight_assignment;
use crate::environment::RoundView;
use crate::matching::{Assignment, Matching};
use crate::scalar::Scalar;

/// True when every present player's intervals over the present arms are
/// strictly separated in UCB-descending order. An unexplored arm has an
/// infinite interval and fails against any neighbour.
///
/// Checking the UCB order is enough: a permutation whose consecutive
/// intervals are disjoint must already be sorted by UCB.
pub fn separation_check<F: Scalar>(state: &PolicyState<F>, rv: &RoundView<'_>) -> bool {
    rv.players().iter().all(|&p| {
        let order = ucb_order(state, p, rv.arms());
        order.windows(2).all(|w| {
            let hi = state.indices(p, rv.arms()[w[0]]);
            let lo = state.indices(p, rv.arms()[w[1]]);
            hi.lcb > lo.ucb
        })
    })
}

/// Uniformly random one-to-one matching of size `min(|P_t|, |A_t|)`;
/// capacities beyond one seat are ignored.
pub fn explore_uniform<R: Rng + ?Sized>(rv: &RoundView<'_>, rng: &mut R) -> Matching {
    let players = rv.players();
    let mut m = Matching::unmatched(players);
    if players.len() <= rv.arms().len() {
        let mut arms = rv.arms().to_vec();
        let (chosen, _) = arms.partial_shuffle(rng, players.len());
        for (&p, &a) in players.iter().zip(chosen.iter()) {
            m.assign(p, Assignment::Arm(a));
        }
    } else {
        let mut ps = players.to_vec();
        let (chosen, _) = ps.partial_shuffle(rng, rv.arms().len());
        for (&p, &a) in chosen.iter().zip(rv.arms()) {
            m.assign(p, Assignment::Arm(a));
        }
    }
    m
}

/// Maximum-weight one-to-one matching with weights `1 / (count + 1)`, ties
/// resolved towards lower (player, arm) indices.
pub fn explore_weighted<F: Scalar>(rv: &RoundView<'_>, state: &PolicyState<F>) -> Matching {
    let weights: Vec<Vec<F>> = rv
        .players()
        .iter()
        .map(|&p| {
            rv.arms()
                .iter()
                .map(|&a| F::one() / F::from_count(state.count(p, a) + 1))
                .collect()
        })
        .collect();
    let solution = lexicographic_max_weight_assignment(&weights);
    let mut m = Matching::unmatched(rv.players());
    for (&p, col) in rv.players().iter().zip(solution.row_to_col) {
        if let Some(c) = col {
            m.assign(p, Assignment::Arm(rv.arms()[c]));
        }
    }
    m
}

/// One AC-ETGS round: exploit with UCB-ranked Gale–Shapley once every
/// present player is separated, otherwise explore.
pub fn ac_etgs_round<F: Scalar, R: Rng + ?Sized>(
    state: &PolicyState<F>,
    rv: &RoundView<'_>,
    rng: &mut R,
    mode: ExplorationMode,
) -> RoundDecision {
    if separation_check(state, rv) {
        return ucb_gs(state, rv, RoundMode::Exploit);
    }
    let matching = match mode {
        ExplorationMode::Uniform => explore_uniform(rv, rng),
        ExplorationMode::Weighted => explore_weighted(rv, state),
    };
    RoundDecision {
        matching,
        mode: RoundMode::Explore,
        rankings: Vec::new(),
    }
}
