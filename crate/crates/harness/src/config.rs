//! Run configuration, read from TOML.
//!
//! ```toml
//! algorithms = ["ac-etgs-random", "ac-etgs-weighted"]
//! instances = 5
//! trials = 5
//! seed = 1
//! horizon = 20000          # optional, overrides the generator's horizon
//! output_dir = "out/fig1"
//! aggregation = "mean"     # or "sum": how players combine into one curve
//! per_player = false       # also write one aggregate file per player
//! regret_mode = "pseudo"   # or "realized"
//! raw_ledger = true        # write every ledger row to ledger.csv
//! track_failures = false
//!
//! [generator]
//! name = "fig1"            # fig1 | fig2 | fig3 | static | hard41 | hard42 | file
//! num_players = 5          # any parameter of the generator, over its preset
//! ```

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sleeping_bandits::instances::{
    ExperimentFamilyParams, HardInstanceParams41, HardInstanceParams42, StaticParams,
};
use sleeping_bandits::{Algorithm, RegretMode};

use crate::error::HarnessError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// Mean over players of their cumulative regret.
    #[default]
    Mean,
    /// Sum over players.
    Sum,
}

/// Raw document as written by the user.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    algorithms: Vec<String>,
    instances: usize,
    trials: usize,
    #[serde(default)]
    seed: u64,
    horizon: Option<usize>,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    #[serde(default)]
    aggregation: Aggregation,
    #[serde(default)]
    per_player: bool,
    #[serde(default)]
    regret_mode: RegretMode,
    #[serde(default = "yes")]
    raw_ledger: bool,
    #[serde(default)]
    track_failures: bool,
    generator: toml::Table,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn yes() -> bool {
    true
}

/// Instance generator with fully resolved parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Generator {
    Fig1(ExperimentFamilyParams),
    Fig2(ExperimentFamilyParams),
    Fig3(ExperimentFamilyParams),
    Static(StaticParams),
    Hard41(HardInstanceParams41),
    Hard42(HardInstanceParams42),
    /// A serialized environment spec (JSON).
    File { path: PathBuf },
}

pub const GENERATORS: [(&str, &str); 7] = [
    ("fig1", "randomized family: heterogeneous player/arm unavailability, per-round random arm rankings"),
    ("fig2", "as fig1 with every player unavailable with probability 0.5"),
    ("fig3", "as fig2 with arm rankings fixed across rounds and instances"),
    ("static", "everyone present every round, permuted reward grid"),
    ("hard41", "target player against a fresh competitor each block"),
    ("hard42", "fixed arms for competitors, one rotating variable arm for the victim"),
    ("file", "environment spec read from a JSON file (path = ...)"),
];

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::Fig1(_) => "fig1",
            Generator::Fig2(_) => "fig2",
            Generator::Fig3(_) => "fig3",
            Generator::Static(_) => "static",
            Generator::Hard41(_) => "hard41",
            Generator::Hard42(_) => "hard42",
            Generator::File { .. } => "file",
        }
    }

    fn set_horizon(&mut self, horizon: usize) {
        match self {
            Generator::Fig1(p) | Generator::Fig2(p) | Generator::Fig3(p) => p.horizon = horizon,
            Generator::Static(p) => p.horizon = horizon,
            Generator::Hard41(p) => p.horizon = horizon,
            Generator::Hard42(p) => p.horizon = horizon,
            Generator::File { .. } => {}
        }
    }

    pub fn validate(&self) -> Vec<String> {
        match self {
            Generator::Fig1(p) | Generator::Fig2(p) | Generator::Fig3(p) => p.validate(),
            Generator::Static(p) => p.validate(),
            Generator::Hard41(p) => p.validate(),
            Generator::Hard42(p) => p.validate(),
            Generator::File { path } => {
                if path.as_os_str().is_empty() {
                    vec!["file generator needs a path".into()]
                } else {
                    Vec::new()
                }
            }
        }
    }

    /// Resolves a `[generator]` table: the named preset with the table's
    /// remaining keys laid over it.
    fn from_table(mut table: toml::Table, base_dir: &Path) -> Result<Self, String> {
        let name = match table.remove("name") {
            Some(toml::Value::String(s)) => s,
            Some(other) => return Err(format!("generator.name must be a string, got {other}")),
            None => return Err("generator.name is required".into()),
        };
        fn overlay<T: Serialize + DeserializeOwned>(preset: T, table: toml::Table) -> Result<T, String> {
            let mut merged = toml::Table::try_from(preset).map_err(|e| e.to_string())?;
            merged.extend(table);
            toml::Value::Table(merged).try_into().map_err(|e: toml::de::Error| e.message().to_string())
        }
        let generator = match name.as_str() {
            "fig1" => Generator::Fig1(overlay(ExperimentFamilyParams::fig1(), table)?),
            "fig2" => Generator::Fig2(overlay(ExperimentFamilyParams::fig2(), table)?),
            "fig3" => Generator::Fig3(overlay(ExperimentFamilyParams::fig3(), table)?),
            "static" => Generator::Static(overlay(StaticParams::default(), table)?),
            "hard41" => Generator::Hard41(overlay(HardInstanceParams41::default(), table)?),
            "hard42" => Generator::Hard42(overlay(HardInstanceParams42::default(), table)?),
            "file" => {
                #[derive(Deserialize)]
                #[serde(deny_unknown_fields)]
                struct FileParams {
                    path: PathBuf,
                }
                let p: FileParams = toml::Value::Table(table)
                    .try_into()
                    .map_err(|e: toml::de::Error| e.message().to_string())?;
                Generator::File {
                    path: base_dir.join(p.path),
                }
            }
            other => {
                let names: Vec<&str> = GENERATORS.iter().map(|(n, _)| *n).collect();
                return Err(format!(
                    "unknown generator {other:?}; expected one of: {}",
                    names.join(", ")
                ));
            }
        };
        Ok(generator)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub algorithms: Vec<Algorithm>,
    pub instances: usize,
    pub trials: usize,
    pub seed: u64,
    pub horizon: Option<usize>,
    pub output_dir: PathBuf,
    pub aggregation: Aggregation,
    pub per_player: bool,
    pub regret_mode: RegretMode,
    pub raw_ledger: bool,
    pub track_failures: bool,
    pub generator: Generator,
}

impl RunConfig {
    /// Parses and validates a TOML document. Relative `file` generator paths
    /// resolve against `base_dir`. Every problem found is reported.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self, HarnessError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| HarnessError::Config(vec![e.to_string()]))?;
        let mut problems = Vec::new();

        let mut algorithms = Vec::new();
        if raw.algorithms.is_empty() {
            problems.push("algorithms must list at least one algorithm".into());
        }
        for name in &raw.algorithms {
            match name.parse::<Algorithm>() {
                Ok(a) if algorithms.contains(&a) => problems.push(format!("algorithm {a} listed twice")),
                Ok(a) => algorithms.push(a),
                Err(e) => problems.push(e.to_string()),
            }
        }
        if raw.instances == 0 {
            problems.push("instances must be >= 1".into());
        }
        if raw.trials == 0 {
            problems.push("trials must be >= 1".into());
        }
        if raw.horizon == Some(0) {
            problems.push("horizon must be >= 1".into());
        }

        let generator = match Generator::from_table(raw.generator, base_dir) {
            Ok(mut g) => {
                if let Some(h) = raw.horizon {
                    g.set_horizon(h);
                }
                problems.extend(g.validate().into_iter().map(|p| format!("generator {}: {p}", g.name())));
                Some(g)
            }
            Err(e) => {
                problems.push(e);
                None
            }
        };

        match generator {
            Some(generator) if problems.is_empty() => Ok(Self {
                algorithms,
                instances: raw.instances,
                trials: raw.trials,
                seed: raw.seed,
                horizon: raw.horizon,
                output_dir: raw.output_dir,
                aggregation: raw.aggregation,
                per_player: raw.per_player,
                regret_mode: raw.regret_mode,
                raw_ledger: raw.raw_ledger,
                track_failures: raw.track_failures,
                generator,
            }),
            _ => Err(HarnessError::Config(problems)),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml_str(&text, base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sleeping_bandits::instances::{ArmPreferenceMode, Hard42Variant};

    fn parse(text: &str) -> Result<RunConfig, Vec<String>> {
        RunConfig::from_toml_str(text, Path::new("/base")).map_err(|e| match e {
            HarnessError::Config(p) => p,
            other => panic!("{other}"),
        })
    }

    const MINIMAL: &str = r#"
        algorithms = ["ac-ucb"]
        instances = 1
        trials = 1
        [generator]
        name = "fig3"
    "#;

    #[test]
    fn presets_fill_missing_parameters() {
        let c = parse(MINIMAL).unwrap();
        let Generator::Fig3(p) = &c.generator else { panic!() };
        assert_eq!(p, &ExperimentFamilyParams::fig3());
        assert_eq!(p.arm_preferences, ArmPreferenceMode::FixedRandom);
        assert!(c.raw_ledger);
        assert_eq!(c.aggregation, Aggregation::Mean);
        assert_eq!(c.regret_mode, RegretMode::Pseudo);
    }

    #[test]
    fn overrides_and_horizon() {
        let c = parse(
            r#"
            algorithms = ["ac-etgs-random", "ac-etgs-weighted"]
            instances = 2
            trials = 3
            seed = 9
            horizon = 123
            regret_mode = "realized"
            aggregation = "sum"
            [generator]
            name = "hard42"
            num_players = 2
            num_arms = 4
            variant = { alternative = { player = 0, arm = 2 } }
        "#,
        )
        .unwrap();
        let Generator::Hard42(p) = &c.generator else { panic!() };
        assert_eq!(p.horizon, 123);
        assert_eq!(p.num_players, 2);
        assert_eq!(p.variant, Hard42Variant::Alternative { player: 0, arm: 2 });
        assert_eq!(c.regret_mode, RegretMode::Realized);
        assert_eq!(c.aggregation, Aggregation::Sum);
    }

    #[test]
    fn errors_are_collected() {
        let problems = parse(
            r#"
            algorithms = ["ucb", "ac-ucb"]
            instances = 0
            trials = 0
            [generator]
            name = "hard42"
            num_players = 6
            num_arms = 5
        "#,
        )
        .unwrap_err();
        assert_eq!(problems.len(), 4, "{problems:?}");
        assert!(problems.iter().any(|p| p.contains("ac-etgs-weighted")));
        assert!(problems.iter().any(|p| p == "trials must be >= 1"));
        assert!(problems.iter().any(|p| p.contains("N <= K")));
    }

    #[test]
    fn unknown_keys_and_generators() {
        let problems = parse(&MINIMAL.replace("fig3", "fig9")).unwrap_err();
        assert!(problems[0].contains("fig1, fig2"));
        let problems = parse(&format!("{MINIMAL}\nbogus = 1")).unwrap_err();
        assert!(problems[0].contains("bogus"), "{problems:?}");
        let problems = parse(&MINIMAL.replace("algorithms", "algos")).unwrap_err();
        assert_eq!(problems.len(), 1);
    }

    #[test]
    fn file_paths_resolve_against_config_dir() {
        let c = parse(&MINIMAL.replace("name = \"fig3\"", "name = \"file\"\npath = \"spec.json\"")).unwrap();
        assert_eq!(
            c.generator,
            Generator::File {
                path: PathBuf::from("/base/spec.json")
            }
        );
    }
}
