//! One trial: view → decide → sample rewards → update → record regret.

use thiserror::Error;

use crate::environment::{EnvError, EnvironmentSpec};
use crate::policies::{Algorithm, PolicyError, PolicyState, RoundDecision};
use crate::regret::{failure_event, BaselineTable, RegretLedger, RegretMode, RoundBaselines};
use crate::rng::{stream, POLICY_STREAM, REWARD_STREAM};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialConfig {
    pub algorithm: Algorithm,
    pub regret_mode: RegretMode,
    /// Count failure rounds per player (an extra pass over present pairs).
    pub track_failures: bool,
}

impl TrialConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            regret_mode: RegretMode::Pseudo,
            track_failures: false,
        }
    }
}

/// Passed to the per-round observer after the state update.
pub struct RoundRecord<'a, F> {
    pub round: usize,
    pub decision: &'a RoundDecision,
    pub baselines: &'a RoundBaselines,
    pub state: &'a PolicyState<F>,
}

#[derive(Clone, Debug)]
pub struct TrialOutcome<F> {
    pub ledger: RegretLedger<F>,
    /// Failure rounds per player; all zero unless tracking was requested.
    pub failure_rounds: Vec<u64>,
    pub state: PolicyState<F>,
}

/// Runs one trial over the whole horizon. Rewards come from stream
/// [`REWARD_STREAM`] of `seed` and policy randomness from [`POLICY_STREAM`],
/// so different algorithms given the same seed face the same reward stream.
pub fn run_trial<F: Scalar>(
    spec: &EnvironmentSpec<F>,
    table: &BaselineTable,
    config: TrialConfig,
    seed: u64,
) -> Result<TrialOutcome<F>, SimError> {
    run_trial_with(spec, table, config, seed, |_| {})
}

/// [`run_trial`] with a callback invoked once per round.
pub fn run_trial_with<F: Scalar>(
    spec: &EnvironmentSpec<F>,
    table: &BaselineTable,
    config: TrialConfig,
    seed: u64,
    mut observe: impl FnMut(RoundRecord<'_, F>),
) -> Result<TrialOutcome<F>, SimError> {
    let mut reward_rng = stream(seed, REWARD_STREAM);
    let mut policy_rng = stream(seed, POLICY_STREAM);
    let mut state = PolicyState::new(spec.num_players(), spec.num_arms());
    let mut ledger = RegretLedger::new(spec);
    let mut failure_rounds = vec![0u64; spec.num_players()];

    for t in 1..=spec.horizon() {
        let rv = spec.view(t)?;
        if config.track_failures {
            for p in failure_event(&state, spec, t)? {
                failure_rounds[p.0] += 1;
            }
        }
        let decision = config.algorithm.decide(&state, &rv, &mut policy_rng);
        let sample = spec.step(t, &decision.matching, &mut reward_rng)?;
        state.update(&rv, &decision.matching, &sample)?;
        let base = table.get(t);
        ledger.record(config.regret_mode, spec, base, &decision.matching, &sample);
        observe(RoundRecord {
            round: t,
            decision: &decision,
            baselines: base,
            state: &state,
        });
    }
    Ok(TrialOutcome {
        ledger,
        failure_rounds,
        state,
    })
}
