//! Platform policies: confidence indices, AC-UCB and AC-ETGS.
//!
//! Both policies rank the present arms of every present player by their
//! upper confidence index and run player-proposing Gale–Shapley against the
//! arms' true rankings and capacities. AC-ETGS does so only once every
//! present player's intervals are fully separated, and otherwise explores.

mod etgs;
mod state;
mod ucb;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use etgs::{ac_etgs_round, explore_uniform, explore_weighted, separation_check};
pub use state::{confidence_radius, IndexPair, PolicyError, PolicyState};
pub use ucb::{ac_ucb_round, ucb_ranking};

use crate::environment::RoundView;
use crate::matching::{ArmId, Matching, PlayerId};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RoundMode {
    /// AC-UCB round.
    UcbGs,
    /// AC-ETGS exploitation round.
    Exploit,
    /// AC-ETGS exploration round.
    Explore,
}

/// What the platform did in a round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundDecision {
    pub matching: Matching,
    pub mode: RoundMode,
    /// UCB-descending rankings fed to Gale–Shapley; empty in exploration rounds.
    pub rankings: Vec<(PlayerId, Vec<ArmId>)>,
}

/// How AC-ETGS picks a matching in exploration rounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExplorationMode {
    /// Uniformly random one-to-one matching of maximal size.
    Uniform,
    /// Maximum-weight matching with weights `1 / (count + 1)`.
    Weighted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    AcUcb,
    AcEtgsRandom,
    AcEtgsWeighted,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [
        Algorithm::AcUcb,
        Algorithm::AcEtgsRandom,
        Algorithm::AcEtgsWeighted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::AcUcb => "ac-ucb",
            Algorithm::AcEtgsRandom => "ac-etgs-random",
            Algorithm::AcEtgsWeighted => "ac-etgs-weighted",
        }
    }

    /// Chooses the matching for the round described by `rv`.
    pub fn decide<F: Scalar, R: Rng + ?Sized>(
        self,
        state: &PolicyState<F>,
        rv: &RoundView<'_>,
        rng: &mut R,
    ) -> RoundDecision {
        match self {
            Algorithm::AcUcb => ac_ucb_round(state, rv),
            Algorithm::AcEtgsRandom => ac_etgs_round(state, rv, rng, ExplorationMode::Uniform),
            Algorithm::AcEtgsWeighted => ac_etgs_round(state, rv, rng, ExplorationMode::Weighted),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown algorithm {0:?}; expected one of: ac-ucb, ac-etgs-random, ac-etgs-weighted")]
pub struct UnknownAlgorithm(pub String);

impl FromStr for Algorithm {
    type Err = UnknownAlgorithm;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| UnknownAlgorithm(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        let json = serde_json::to_string(&Algorithm::ALL).unwrap();
        assert_eq!(json, r#"["ac-ucb","ac-etgs-random","ac-etgs-weighted"]"#);
        let err = "ucb".parse::<Algorithm>().unwrap_err();
        assert!(err.to_string().contains("ac-etgs-weighted"));
    }
}
