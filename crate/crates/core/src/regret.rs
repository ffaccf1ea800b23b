//! Stable-matching baselines, stable-regret ledgers, failure events and
//! Bernoulli KL utilities.
//!
//! Regret is pseudo-regret by default: a round adds `μ_{i,baseline(i)} −
//! μ_{i,m(i)}`, the conditional expectation of the realized gap. Increments
//! are signed and never clamped, so a lucky unstable matching can lower a
//! cumulative curve.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::{EnvError, EnvironmentSpec, RewardSample};
use crate::matching::{arm_proposing_gs, player_proposing_gs, Matching, PlayerId};
use crate::policies::PolicyState;
use crate::scalar::Scalar;

/// Player-optimal and player-pessimal stable matchings of one round under
/// true preferences.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundBaselines {
    pub optimal: Matching,
    pub pessimal: Matching,
}

/// Runs both Gale–Shapley variants on the true-preference instance of round `t`.
pub fn baselines<F: Scalar>(spec: &EnvironmentSpec<F>, t: usize) -> Result<RoundBaselines, EnvError> {
    let inst = spec.true_instance(t)?;
    Ok(RoundBaselines {
        optimal: player_proposing_gs(&inst),
        pessimal: arm_proposing_gs(&inst),
    })
}

/// Baselines for every round of a spec, computed once per distinct round
/// configuration.
#[derive(Clone, Debug)]
pub struct BaselineTable {
    unique: Vec<RoundBaselines>,
    by_round: Vec<usize>,
}

impl BaselineTable {
    pub fn new<F: Scalar>(spec: &EnvironmentSpec<F>) -> Self {
        let mut seen = HashMap::new();
        let mut unique = Vec::new();
        let mut by_round = Vec::with_capacity(spec.horizon());
        for (k, schedule) in spec.schedule().iter().enumerate() {
            let slot = *seen.entry(schedule).or_insert_with(|| {
                unique.push(baselines(spec, k + 1).expect("round in range"));
                unique.len() - 1
            });
            by_round.push(slot);
        }
        Self { unique, by_round }
    }

    /// Baselines of global round `t` (1-based).
    pub fn get(&self, t: usize) -> &RoundBaselines {
        &self.unique[self.by_round[t - 1]]
    }

    pub fn horizon(&self) -> usize {
        self.by_round.len()
    }

    /// Number of distinct round configurations.
    pub fn distinct(&self) -> usize {
        self.unique.len()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegretMode {
    /// Baseline mean minus the mean of the arm actually matched.
    #[default]
    Pseudo,
    /// Baseline mean minus the observed reward.
    Realized,
}

/// Per-player cumulative optimal and pessimal stable regret, indexed by local
/// round: entry `k` is the total after the player's `k + 1`-th round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct RegretLedger<F> {
    optimal: Vec<Vec<F>>,
    pessimal: Vec<Vec<F>>,
    delta_max: Vec<F>,
}

impl<F: Scalar> RegretLedger<F> {
    pub fn new(spec: &EnvironmentSpec<F>) -> Self {
        let clock = spec.local_clock();
        let n = spec.num_players();
        Self {
            optimal: (0..n).map(|i| Vec::with_capacity(clock.count(PlayerId(i)))).collect(),
            pessimal: (0..n).map(|i| Vec::with_capacity(clock.count(PlayerId(i)))).collect(),
            delta_max: (0..n).map(|i| spec.max_mean(PlayerId(i))).collect(),
        }
    }

    pub fn num_players(&self) -> usize {
        self.optimal.len()
    }

    /// Pseudo-regret increments for every player present in the round.
    pub fn record_round(&mut self, spec: &EnvironmentSpec<F>, base: &RoundBaselines, m: &Matching) {
        for player in base.optimal.players() {
            let got = spec.mean_of(player, m.get(player));
            self.push(spec, base, player, got);
        }
    }

    /// Realized-reward increments for every player in the sample.
    pub fn record_realized(&mut self, spec: &EnvironmentSpec<F>, base: &RoundBaselines, sample: &RewardSample) {
        for obs in &sample.observations {
            self.push(spec, base, obs.player, F::from_count(u64::from(obs.reward)));
        }
    }

    /// Records one round in the given mode.
    pub fn record(
        &mut self,
        mode: RegretMode,
        spec: &EnvironmentSpec<F>,
        base: &RoundBaselines,
        m: &Matching,
        sample: &RewardSample,
    ) {
        match mode {
            RegretMode::Pseudo => self.record_round(spec, base, m),
            RegretMode::Realized => self.record_realized(spec, base, sample),
        }
    }

    fn push(&mut self, spec: &EnvironmentSpec<F>, base: &RoundBaselines, player: PlayerId, got: F) {
        let i = player.0;
        let opt = spec.mean_of(player, base.optimal.get(player)) - got;
        let pes = spec.mean_of(player, base.pessimal.get(player)) - got;
        let prev_opt = self.optimal[i].last().copied().unwrap_or_else(F::zero);
        let prev_pes = self.pessimal[i].last().copied().unwrap_or_else(F::zero);
        self.optimal[i].push(prev_opt + opt);
        self.pessimal[i].push(prev_pes + pes);
    }

    /// Cumulative optimal regret after each local round.
    pub fn optimal(&self, player: PlayerId) -> &[F] {
        &self.optimal[player.0]
    }

    /// Cumulative pessimal regret after each local round.
    pub fn pessimal(&self, player: PlayerId) -> &[F] {
        &self.pessimal[player.0]
    }

    /// Local rounds recorded so far for `player`.
    pub fn rounds(&self, player: PlayerId) -> usize {
        self.optimal[player.0].len()
    }

    /// `max_j μ_{i,j}` over all arms.
    pub fn delta_max(&self, player: PlayerId) -> F {
        self.delta_max[player.0]
    }
}

/// Players whose round `t` is a failure round: some present pair has an
/// estimate outside its confidence radius. `state` must be the snapshot taken
/// before the round's update. Unexplored pairs never violate.
///
/// The event is shared by the whole round, so either every present player is
/// returned or none is.
pub fn failure_event<F: Scalar>(
    state: &PolicyState<F>,
    spec: &EnvironmentSpec<F>,
    t: usize,
) -> Result<BTreeSet<PlayerId>, EnvError> {
    let rv = spec.view(t)?;
    let violated = rv.players().iter().any(|&p| {
        rv.arms().iter().any(|&a| match state.mean(p, a) {
            None => false,
            Some(mean) => (mean - spec.mean(p, a)).abs() > state.radius(p, a),
        })
    });
    Ok(if violated {
        rv.players().iter().copied().collect()
    } else {
        BTreeSet::new()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("Bernoulli parameters out of range: p = {p}, q = {q}")]
pub struct KlDomainError {
    pub p: f64,
    pub q: f64,
}

/// `KL(Ber(p) || Ber(q))` with `0 log 0 = 0`. Returns `+inf` when `q` is 0 or
/// 1 and `p` differs from it.
pub fn kl_bernoulli<F: Scalar>(p: F, q: F) -> Result<F, KlDomainError> {
    let (zero, one) = (F::zero(), F::one());
    if !(zero..=one).contains(&p) || !(zero..=one).contains(&q) {
        return Err(KlDomainError {
            p: p.to_f64().unwrap_or(f64::NAN),
            q: q.to_f64().unwrap_or(f64::NAN),
        });
    }
    let term = |a: F, b: F| {
        if a == zero {
            zero
        } else if b == zero {
            F::infinity()
        } else {
            a * (a / b).ln()
        }
    };
    Ok(term(p, q) + term(one - p, one - q))
}

/// Closed-form bound `(δ + ε)² / (1/4 − ε²)` on `KL(Ber(1/2 − δ) || Ber(1/2 + ε))`.
pub fn kl_upper_bound<F: Scalar>(delta: F, eps: F) -> F {
    (delta + eps).powi(2) / (F::lit(0.25) - eps * eps)
}

/// Scaled regret rates `C·N·K·ln T/Δ²` and `C·N·K²·ln T/Δ²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Envelope<F> {
    pub nk: F,
    pub nk2: F,
}

pub fn log_envelope<F: Scalar>(c: F, n: usize, k: usize, horizon: u64, gap: F) -> Envelope<F> {
    let base = c * F::from_count(n as u64) * F::from_count(k as u64) * F::from_count(horizon).ln() / (gap * gap);
    Envelope {
        nk: base,
        nk2: base * F::from_count(k as u64),
    }
}

/// [`log_envelope`] at the environment's size and minimum gap.
pub fn min_gap_regret_envelope<F: Scalar>(spec: &EnvironmentSpec<F>, horizon: u64, c: F) -> Envelope<F> {
    log_envelope(c, spec.num_players(), spec.num_arms(), horizon, spec.min_gap())
}

/// Explicit AC-UCB bound `Δ_max·N·K·(4K + 8 ln T/Δ²)`.
pub fn ucb_regret_bound<F: Scalar>(delta_max: F, n: usize, k: usize, horizon: u64, gap: F) -> F {
    let (n, k) = (F::from_count(n as u64), F::from_count(k as u64));
    delta_max * n * k * (F::lit(4.0) * k + F::lit(8.0) * F::from_count(horizon).ln() / (gap * gap))
}
