//! Sleeping competing bandits.
//!
//! A two-sided market of players and arms in which the set of present players
//! and arms, the arms' rankings over players and the arms' capacities all vary
//! from round to round. Players' preferences are unknown Bernoulli means that a
//! central platform learns while matching.
//!
//! The crate is organised bottom-up:
//!
//! - [`matching`]: capacity-aware Gale–Shapley (both sides proposing),
//!   blocking pair/triplet certification and a brute-force oracle.
//! - [`assignment`]: rectangular maximum-weight assignment (Hungarian method).
//! - [`environment`]: the ground-truth market, round views, local clocks and
//!   reward sampling.
//! - [`policies`]: confidence indices, AC-UCB and AC-ETGS.
//! - [`regret`]: stable baselines, regret ledgers, failure events, KL tools.
//! - [`instances`]: randomized experiment families and lower-bound constructions.
//! - [`simulation`]: the per-trial loop tying the pieces together.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64` / `*32`
//! aliases below fix the scalar type.

pub mod assignment;
pub mod environment;
pub mod instances;
pub mod matching;
pub mod policies;
pub mod regret;
pub mod rng;
pub mod scalar;
pub mod simulation;

pub use environment::{EnvError, EnvironmentSpec, LocalClock, RewardSample, RoundView};
pub use matching::{ArmId, Assignment, BlockingPair, MatchError, MatchInstance, Matching, PlayerId};
pub use policies::{Algorithm, ExplorationMode, PolicyState, RoundDecision, RoundMode};
pub use regret::{RegretLedger, RegretMode, RoundBaselines};
pub use scalar::Scalar;

pub type EnvironmentSpec64 = EnvironmentSpec<f64>;
pub type EnvironmentSpec32 = EnvironmentSpec<f32>;
pub type PolicyState64 = PolicyState<f64>;
pub type PolicyState32 = PolicyState<f32>;
pub type RegretLedger64 = RegretLedger<f64>;
pub type RegretLedger32 = RegretLedger<f32>;
pub type IndexPair64 = policies::IndexPair<f64>;
pub type IndexPair32 = policies::IndexPair<f32>;
