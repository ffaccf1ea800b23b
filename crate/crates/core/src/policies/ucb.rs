use std::cmp::Ordering;

use super::{PolicyState, RoundDecision, RoundMode};
use crate::environment::RoundView;
use crate::matching::{player_proposing_gs, ArmId, PlayerId};
use crate::scalar::Scalar;

/// Positions into `rv.arms()` sorted by decreasing UCB; ties go to the lower
/// arm id (arms are stored sorted by id and the sort is stable).
pub(crate) fn ucb_order<F: Scalar>(state: &PolicyState<F>, player: PlayerId, arms: &[ArmId]) -> Vec<usize> {
    let ucb: Vec<F> = arms.iter().map(|&a| state.indices(player, a).ucb).collect();
    let mut order: Vec<usize> = (0..arms.len()).collect();
    order.sort_by(|&x, &y| ucb[y].partial_cmp(&ucb[x]).unwrap_or(Ordering::Equal));
    order
}

/// `player`'s ranking of the present arms by decreasing UCB.
pub fn ucb_ranking<F: Scalar>(state: &PolicyState<F>, player: PlayerId, rv: &RoundView<'_>) -> Vec<ArmId> {
    ucb_order(state, player, rv.arms())
        .into_iter()
        .map(|k| rv.arms()[k])
        .collect()
}

/// Player-proposing Gale–Shapley on UCB-descending player rankings against
/// the round's true arm rankings and capacities.
pub(crate) fn ucb_gs<F: Scalar>(state: &PolicyState<F>, rv: &RoundView<'_>, mode: RoundMode) -> RoundDecision {
    let orders: Vec<Vec<usize>> = rv
        .players()
        .iter()
        .map(|&p| ucb_order(state, p, rv.arms()))
        .collect();
    let rankings = rv
        .players()
        .iter()
        .zip(&orders)
        .map(|(&p, order)| (p, order.iter().map(|&k| rv.arms()[k]).collect()))
        .collect();
    let instance = rv.instance_from_positions(orders);
    RoundDecision {
        matching: player_proposing_gs(&instance),
        mode,
        rankings,
    }
}

/// One AC-UCB round.
pub fn ac_ucb_round<F: Scalar>(state: &PolicyState<F>, rv: &RoundView<'_>) -> RoundDecision {
    ucb_gs(state, rv, RoundMode::UcbGs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{EnvironmentSpec, RoundSchedule};
    use crate::matching::{Assignment, Matching};

    fn everyone(n: usize, k: usize) -> RoundSchedule {
        RoundSchedule::everyone(n, k)
    }

    #[test]
    fn fresh_state_everyone_proposes_to_lowest_arm_first() {
        // arms rank players by id; GS by hand: p0 keeps a0, p1 bumped to a1, p2 to a2
        let sched = everyone(3, 3);
        let rv = RoundView::new(1, &sched);
        let state = PolicyState::<f64>::new(3, 3);
        let d = ac_ucb_round(&state, &rv);
        assert_eq!(d.mode, RoundMode::UcbGs);
        for (p, ranking) in &d.rankings {
            assert_eq!(ranking, &vec![ArmId(0), ArmId(1), ArmId(2)], "{p}");
        }
        let expected = Matching::from_pairs(
            rv.players(),
            [(PlayerId(0), ArmId(0)), (PlayerId(1), ArmId(1)), (PlayerId(2), ArmId(2))],
        );
        assert_eq!(d.matching, expected);
    }

    #[test]
    fn single_player_takes_highest_ucb() {
        let sched = everyone(1, 2);
        let rv = RoundView::new(1, &sched);
        let mut state = PolicyState::<f64>::new(1, 2);
        // t = 1 so radius is zero and ucb equals the mean
        state.set_statistics(PlayerId(0), ArmId(0), 3, 0.9);
        state.set_statistics(PlayerId(0), ArmId(1), 3, 0.95);
        let d = ac_ucb_round(&state, &rv);
        assert_eq!(d.matching.get(PlayerId(0)), Assignment::Arm(ArmId(1)));
    }

    #[test]
    fn accurate_estimates_give_true_player_optimal_matching() {
        let mu = vec![vec![0.2, 0.8, 0.5], vec![0.7, 0.6, 0.1]];
        let prefs = vec![vec![PlayerId(1), PlayerId(0)], vec![PlayerId(0), PlayerId(1)], vec![PlayerId(1), PlayerId(0)]];
        let players = vec![PlayerId(0), PlayerId(1)];
        let sched = RoundSchedule::new(players, (0..3).map(ArmId).collect(), prefs, vec![1; 3]).unwrap();
        let spec = EnvironmentSpec::new(2, 3, mu.clone(), vec![sched]).unwrap();
        let mut state = PolicyState::<f64>::new(2, 3);
        for (i, row) in mu.iter().enumerate() {
            for (j, &m) in row.iter().enumerate() {
                state.set_statistics(PlayerId(i), ArmId(j), 100_000, m);
            }
            state.set_local_round(PlayerId(i), 100);
        }
        let rv = spec.view(1).unwrap();
        let truth = player_proposing_gs(&spec.true_instance(1).unwrap());
        assert_eq!(ac_ucb_round(&state, &rv).matching, truth);
    }
}
