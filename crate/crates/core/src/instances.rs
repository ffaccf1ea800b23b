//! Instance generators: the randomized experiment family, a static
//! all-available market, and the two lower-bound constructions.
//!
//! Ids are 0-based throughout. In the single-competitor family the target is
//! `p0`, competitor `pb` occupies block `b` (rounds `L(b-1)+1 ..= Lb`), and
//! arms `a0`/`a1` are the target's preferred/second arm. In the fixed/variable
//! family arms `a0 .. a(N-2)` are fixed, the rest variable, and `p(N-1)` is
//! the low-priority victim.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::{EnvError, EnvironmentSpec, RoundSchedule};
use crate::matching::{ArmId, PlayerId};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("invalid parameters: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error(transparent)]
    Env(#[from] EnvError),
}

fn check(problems: Vec<String>) -> Result<(), InstanceError> {
    if problems.is_empty() {
        Ok(())
    } else {
        Err(InstanceError::Invalid(problems))
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive; `[lo]` when `n == 1`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

fn players(n: usize) -> Vec<PlayerId> {
    (0..n).map(PlayerId).collect()
}

fn arms(k: usize) -> Vec<ArmId> {
    (0..k).map(ArmId).collect()
}

fn to_scalar<F: Scalar>(rows: Vec<Vec<f64>>) -> Vec<Vec<F>> {
    rows.into_iter()
        .map(|r| r.into_iter().map(F::lit).collect())
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArmPreferenceMode {
    /// Each present arm ranks the present players uniformly at random, afresh
    /// every round.
    #[default]
    PerRoundRandom,
    /// One uniformly random ranking per arm, drawn once and restricted to the
    /// present players each round.
    FixedRandom,
}

/// Randomized family: per-player permuted reward grids with independent
/// per-round player and arm unavailability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentFamilyParams {
    pub num_players: usize,
    pub num_arms: usize,
    pub horizon: usize,
    pub reward_lo: f64,
    pub reward_hi: f64,
    /// Per-player probability of sitting a round out; defaults to a linear
    /// spacing over [0.1, 0.9].
    pub player_unavailability: Option<Vec<f64>>,
    /// Per-arm probability of sitting a round out; same default.
    pub arm_unavailability: Option<Vec<f64>>,
    pub arm_preferences: ArmPreferenceMode,
    /// Seed for the fixed arm rankings. When set, every instance shares the
    /// same rankings; otherwise they come from the instance's own stream.
    pub preference_seed: Option<u64>,
}

impl Default for ExperimentFamilyParams {
    fn default() -> Self {
        Self::fig1()
    }
}

impl ExperimentFamilyParams {
    /// Heterogeneous player and arm unavailability, random arm rankings.
    pub fn fig1() -> Self {
        Self {
            num_players: 5,
            num_arms: 10,
            horizon: 20_000,
            reward_lo: 0.1,
            reward_hi: 0.9,
            player_unavailability: None,
            arm_unavailability: None,
            arm_preferences: ArmPreferenceMode::PerRoundRandom,
            preference_seed: None,
        }
    }

    /// As [`Self::fig1`] with every player unavailable half the time.
    pub fn fig2() -> Self {
        Self {
            player_unavailability: Some(vec![0.5; 5]),
            ..Self::fig1()
        }
    }

    /// As [`Self::fig2`] with arm rankings fixed across rounds and instances.
    pub fn fig3() -> Self {
        Self {
            arm_preferences: ArmPreferenceMode::FixedRandom,
            preference_seed: Some(0x5eed_0fa4),
            ..Self::fig2()
        }
    }

    pub fn player_unavailability(&self) -> Vec<f64> {
        self.player_unavailability
            .clone()
            .unwrap_or_else(|| linspace(0.1, 0.9, self.num_players))
    }

    pub fn arm_unavailability(&self) -> Vec<f64> {
        self.arm_unavailability
            .clone()
            .unwrap_or_else(|| linspace(0.1, 0.9, self.num_arms))
    }

    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.num_players == 0 {
            out.push("num_players must be at least 1".into());
        }
        if self.num_arms == 0 {
            out.push("num_arms must be at least 1".into());
        }
        if self.horizon == 0 {
            out.push("horizon must be at least 1".into());
        }
        if !(self.reward_lo > 0.0 && self.reward_lo < self.reward_hi && self.reward_hi < 1.0) {
            out.push(format!(
                "reward grid needs 0 < lo < hi < 1, got [{}, {}]",
                self.reward_lo, self.reward_hi
            ));
        }
        for (what, probs, n) in [
            ("player_unavailability", self.player_unavailability(), self.num_players),
            ("arm_unavailability", self.arm_unavailability(), self.num_arms),
        ] {
            if probs.len() != n {
                out.push(format!("{what} needs {n} entries, got {}", probs.len()));
            }
            if let Some(q) = probs.iter().find(|q| !(0.0..1.0).contains(*q)) {
                out.push(format!("{what} entries must lie in [0, 1), got {q}"));
            }
        }
        out
    }
}

fn random_rankings<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<Vec<PlayerId>> {
    (0..k)
        .map(|_| {
            let mut ranking = players(n);
            ranking.shuffle(rng);
            ranking
        })
        .collect()
}

/// One instance of the randomized family. All randomness, including the
/// availability sequence, is drawn here, so trials on the returned spec
/// share it.
pub fn gen_experiment_instance<F: Scalar, R: Rng + ?Sized>(
    params: &ExperimentFamilyParams,
    rng: &mut R,
) -> Result<EnvironmentSpec<F>, InstanceError> {
    check(params.validate())?;
    let (n, k) = (params.num_players, params.num_arms);
    let grid = linspace(params.reward_lo, params.reward_hi, k);
    let mu: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut row = grid.clone();
            row.shuffle(rng);
            row
        })
        .collect();

    let fixed: Option<Vec<Vec<PlayerId>>> = match params.arm_preferences {
        ArmPreferenceMode::PerRoundRandom => None,
        ArmPreferenceMode::FixedRandom => Some(match params.preference_seed {
            Some(seed) => random_rankings(n, k, &mut ChaCha8Rng::seed_from_u64(seed)),
            None => random_rankings(n, k, rng),
        }),
    };

    let player_q = params.player_unavailability();
    let arm_q = params.arm_unavailability();
    let mut rounds = Vec::with_capacity(params.horizon);
    for _ in 0..params.horizon {
        let present: Vec<PlayerId> = (0..n)
            .filter(|&i| !rng.gen_bool(player_q[i]))
            .map(PlayerId)
            .collect();
        let open: Vec<ArmId> = (0..k)
            .filter(|&j| !rng.gen_bool(arm_q[j]))
            .map(ArmId)
            .collect();
        let prefs = open
            .iter()
            .map(|a| match &fixed {
                Some(global) => global[a.0]
                    .iter()
                    .copied()
                    .filter(|p| present.binary_search(p).is_ok())
                    .collect(),
                None => {
                    let mut ranking = present.clone();
                    ranking.shuffle(rng);
                    ranking
                }
            })
            .collect();
        let caps = vec![1; open.len()];
        rounds.push(RoundSchedule::new(present, open, prefs, caps).expect("well-formed round"));
    }
    Ok(EnvironmentSpec::new(n, k, to_scalar(mu), rounds)?)
}

/// Everyone present every round, unit capacities, per-player permuted reward
/// grids and one random ranking per arm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StaticParams {
    pub num_players: usize,
    pub num_arms: usize,
    pub horizon: usize,
    pub reward_lo: f64,
    pub reward_hi: f64,
}

impl Default for StaticParams {
    fn default() -> Self {
        Self {
            num_players: 3,
            num_arms: 5,
            horizon: 50_000,
            reward_lo: 0.1,
            reward_hi: 0.9,
        }
    }
}

impl StaticParams {
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.num_players == 0 || self.num_arms == 0 || self.horizon == 0 {
            out.push("num_players, num_arms and horizon must be at least 1".into());
        }
        if !(self.reward_lo > 0.0 && self.reward_lo < self.reward_hi && self.reward_hi < 1.0) {
            out.push(format!(
                "reward grid needs 0 < lo < hi < 1, got [{}, {}]",
                self.reward_lo, self.reward_hi
            ));
        }
        out
    }
}

pub fn gen_static<F: Scalar, R: Rng + ?Sized>(
    params: &StaticParams,
    rng: &mut R,
) -> Result<EnvironmentSpec<F>, InstanceError> {
    check(params.validate())?;
    let (n, k) = (params.num_players, params.num_arms);
    let grid = linspace(params.reward_lo, params.reward_hi, k);
    let mu: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut row = grid.clone();
            row.shuffle(rng);
            row
        })
        .collect();
    let prefs = random_rankings(n, k, rng);
    let round = RoundSchedule::new(players(n), arms(k), prefs, vec![1; k]).expect("well-formed round");
    Ok(EnvironmentSpec::new(n, k, to_scalar(mu), vec![round; params.horizon])?)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hard41Variant {
    #[default]
    Reference,
    /// Competitor `pk` prefers `a0` instead of `a1`.
    Alternative(usize),
}

/// Target player facing a fresh competitor every block of `L` rounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HardInstanceParams41 {
    pub horizon: usize,
    /// Exponent `c`; the default block length is `round(T^(1-c))`.
    pub exponent: f64,
    pub delta: f64,
    pub block_length: Option<usize>,
    pub variant: Hard41Variant,
}

impl Default for HardInstanceParams41 {
    fn default() -> Self {
        Self {
            horizon: 10_000,
            exponent: 0.5,
            delta: 0.2,
            block_length: None,
            variant: Hard41Variant::Reference,
        }
    }
}

impl HardInstanceParams41 {
    pub fn block_length(&self) -> usize {
        self.block_length
            .unwrap_or_else(|| (self.horizon as f64).powf(1.0 - self.exponent).round() as usize)
    }

    /// Number of competitors, one per full block.
    pub fn blocks(&self) -> usize {
        self.horizon / self.block_length().max(1)
    }

    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.exponent > 0.0 && self.exponent < 1.0) {
            out.push(format!("exponent must lie in (0, 1), got {}", self.exponent));
        }
        if !(self.delta > 0.0 && self.delta < 0.25) {
            out.push(format!("delta must lie in (0, 0.25), got {}", self.delta));
        }
        let l = self.block_length();
        if l < 2 {
            out.push(format!("block length must be at least 2, got {l}"));
        } else if l > self.horizon {
            out.push(format!("block length {l} exceeds the horizon {}", self.horizon));
        }
        if let Hard41Variant::Alternative(k) = self.variant {
            if k == 0 || k > self.blocks() {
                out.push(format!(
                    "alternative competitor must be in 1..={}, got {k}",
                    self.blocks()
                ));
            }
        }
        out
    }
}

/// Rounds past the last full block keep only the target.
pub fn gen_hard_41<F: Scalar>(params: &HardInstanceParams41) -> Result<EnvironmentSpec<F>, InstanceError> {
    check(params.validate())?;
    let (l, blocks, d) = (params.block_length(), params.blocks(), params.delta);
    let n = blocks + 1;
    let mut mu = vec![vec![0.5, 0.5 + d]; n];
    mu[0] = vec![0.5 + d, 0.5];
    if let Hard41Variant::Alternative(k) = params.variant {
        mu[k] = vec![0.5 + 2.0 * d, 0.5 + d];
    }

    let target_only = RoundSchedule::new(vec![PlayerId(0)], arms(2), vec![vec![PlayerId(0)]; 2], vec![1, 1])
        .expect("well-formed round");
    let mut rounds = Vec::with_capacity(params.horizon);
    for b in 1..=blocks {
        let c = PlayerId(b);
        let round = RoundSchedule::new(vec![PlayerId(0), c], arms(2), vec![vec![c, PlayerId(0)]; 2], vec![1, 1])
            .expect("well-formed round");
        rounds.extend(std::iter::repeat_n(round, l));
    }
    rounds.resize(params.horizon, target_only);
    Ok(EnvironmentSpec::new(n, 2, to_scalar(mu), rounds)?)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hard42Variant {
    #[default]
    Reference,
    /// Competitor `player` raises variable arm `arm` to `0.5 + ε`.
    Alternative { player: usize, arm: usize },
}

/// Fixed arms for the competitors, one rotating variable arm for the victim.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HardInstanceParams42 {
    pub num_players: usize,
    pub num_arms: usize,
    pub horizon: usize,
    pub gap: f64,
    /// Tilt of the alternative; defaults to `gap / 20`.
    pub epsilon: Option<f64>,
    pub variant: Hard42Variant,
}

impl Default for HardInstanceParams42 {
    fn default() -> Self {
        Self {
            num_players: 3,
            num_arms: 5,
            horizon: 10_000,
            gap: 0.05,
            epsilon: None,
            variant: Hard42Variant::Reference,
        }
    }
}

impl HardInstanceParams42 {
    pub fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(self.gap / 20.0)
    }

    /// Arm ids `N-1 .. K`.
    pub fn variable_arms(&self) -> std::ops::Range<usize> {
        self.num_players.saturating_sub(1)..self.num_arms
    }

    /// The variable arm present at global round `t` (round-robin).
    pub fn variable_arm_at(&self, t: usize) -> ArmId {
        let var = self.variable_arms();
        ArmId(var.start + (t - 1) % var.len())
    }

    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let (n, k) = (self.num_players, self.num_arms);
        if n == 0 {
            out.push("num_players must be at least 1".into());
        }
        if n > k {
            out.push(format!("requires N <= K, got N = {n}, K = {k}"));
        }
        if self.horizon == 0 {
            out.push("horizon must be at least 1".into());
        }
        // keeps every competitor mean positive and the victim's fixed-arm
        // range [0.3, 0.5 - gap] nonempty
        if !(self.gap > 0.0 && self.gap < 1.0 / 6.0) {
            out.push(format!("gap must lie in (0, 1/6), got {}", self.gap));
        }
        let eps = self.epsilon();
        if !(eps > 0.0 && eps < 0.1 * self.gap) {
            out.push(format!("epsilon must lie in (0, 0.1 * gap), got {eps}"));
        }
        if let Hard42Variant::Alternative { player, arm } = self.variant {
            if player + 1 >= n {
                out.push(format!("alternative player must be a competitor (< {}), got {player}", n.saturating_sub(1)));
            }
            if !self.variable_arms().contains(&arm) {
                out.push(format!("alternative arm must be variable ({:?}), got {arm}", self.variable_arms()));
            }
        }
        out
    }
}

pub fn gen_hard_42<F: Scalar>(params: &HardInstanceParams42) -> Result<EnvironmentSpec<F>, InstanceError> {
    check(params.validate())?;
    let (n, k, d) = (params.num_players, params.num_arms, params.gap);
    let var = params.variable_arms();
    let victim = n - 1;

    let mut mu = vec![vec![0.0; k]; n];
    for (i, row) in mu.iter_mut().enumerate().take(victim) {
        for (j, m) in row.iter_mut().enumerate() {
            *m = if j == i {
                0.5
            } else if var.contains(&j) {
                0.5 - d
            } else {
                0.5 - 2.0 * d - (j + 1) as f64 * d / k as f64
            };
        }
    }
    let fixed_means = linspace(0.3, 0.5 - d, victim);
    let var_means = linspace(0.6, 0.7, var.len());
    mu[victim] = fixed_means.into_iter().chain(var_means).collect();
    if let Hard42Variant::Alternative { player, arm } = params.variant {
        mu[player][arm] = 0.5 + params.epsilon();
    }

    let everyone = players(n);
    let rounds = (1..=params.horizon)
        .map(|t| {
            let mut open: Vec<ArmId> = (0..victim).map(ArmId).collect();
            open.push(params.variable_arm_at(t));
            RoundSchedule::new(everyone.clone(), open, vec![everyone.clone(); n], vec![1; n])
                .expect("well-formed round")
        })
        .collect();
    Ok(EnvironmentSpec::new(n, k, to_scalar(mu), rounds)?)
}
