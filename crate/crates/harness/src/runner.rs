//! Ensemble execution: instances × trials × algorithms on a worker pool,
//! then two-level aggregation and file output.
//!
//! Seeds fan out as `instance_seed = derive(master, instance)` and
//! `trial_seed = derive(instance_seed, trial)`. Every algorithm sees the same
//! instance specs (including availability sequences) and the same trial
//! seeds; reward draws still diverge once match histories differ.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sleeping_bandits::instances::{gen_experiment_instance, gen_hard_41, gen_hard_42, gen_static};
use sleeping_bandits::regret::BaselineTable;
use sleeping_bandits::rng::derive_seed;
use sleeping_bandits::simulation::{run_trial, TrialConfig, TrialOutcome};
use sleeping_bandits::{Algorithm, EnvironmentSpec64, PlayerId, RegretLedger64};

use crate::aggregate::{aggregate, downsample_indices, trial_curve, AggregateSeries, CurveScope};
use crate::config::{Generator, RunConfig};
use crate::error::HarnessError;

/// Longest series written to an aggregate file.
pub const MAX_POINTS: usize = 2000;

pub fn instance_seed(master: u64, instance: usize) -> u64 {
    derive_seed(master, instance as u64)
}

pub fn trial_seed(instance_seed: u64, trial: usize) -> u64 {
    derive_seed(instance_seed, trial as u64)
}

/// Builds instance `index` of the configured generator.
pub fn build_instance(config: &RunConfig, index: usize) -> Result<EnvironmentSpec64, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(config.seed, index));
    let wrap = |source| HarnessError::Instance {
        instance: index,
        source,
    };
    match &config.generator {
        Generator::Fig1(p) | Generator::Fig2(p) | Generator::Fig3(p) => {
            gen_experiment_instance(p, &mut rng).map_err(wrap)
        }
        Generator::Static(p) => gen_static(p, &mut rng).map_err(wrap),
        Generator::Hard41(p) => gen_hard_41(p).map_err(wrap),
        Generator::Hard42(p) => gen_hard_42(p).map_err(wrap),
        Generator::File { path } => load_spec(path, config.horizon),
    }
}

fn load_spec(path: &Path, horizon: Option<usize>) -> Result<EnvironmentSpec64, HarnessError> {
    let fail = |message: String| HarnessError::SpecFile {
        path: path.to_path_buf(),
        message,
    };
    let file = File::open(path).map_err(|e| fail(e.to_string()))?;
    let spec: EnvironmentSpec64 =
        serde_json::from_reader(std::io::BufReader::new(file)).map_err(|e| fail(e.to_string()))?;
    match horizon {
        None => Ok(spec),
        Some(h) if h > spec.horizon() => Err(fail(format!(
            "horizon override {h} exceeds the file's {} rounds",
            spec.horizon()
        ))),
        Some(h) => EnvironmentSpec64::new(
            spec.num_players(),
            spec.num_arms(),
            spec.means().to_vec(),
            spec.schedule()[..h].to_vec(),
        )
        .map_err(|e| fail(e.to_string())),
    }
}

/// One finished trial.
#[derive(Clone, Debug)]
pub struct TrialResult {
    pub algorithm: Algorithm,
    pub instance: usize,
    pub trial: usize,
    pub ledger: RegretLedger64,
    pub failure_rounds: Vec<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AlgorithmSummary {
    pub algorithm: String,
    pub local_rounds: usize,
    pub final_mean_optimal: f64,
    pub final_std_optimal: f64,
    pub final_mean_pessimal: f64,
    pub final_std_pessimal: f64,
    /// Mean over trials and players; present when failures are tracked.
    pub mean_failure_rounds_per_player: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub generator: String,
    pub instances: usize,
    pub trials: usize,
    pub seed: u64,
    pub num_players: Vec<usize>,
    pub min_gap: Vec<f64>,
    pub algorithms: Vec<AlgorithmSummary>,
}

/// Everything a run produced, kept in memory for callers.
pub struct RunReport {
    /// Full-resolution aggregate per algorithm, in config order.
    pub aggregates: Vec<AggregateSeries>,
    pub results: Vec<TrialResult>,
    pub summary: Summary,
    pub files: Vec<PathBuf>,
}

/// Runs the configured ensemble and writes its outputs to `out_dir`.
pub fn run(config: &RunConfig, out_dir: &Path, threads: Option<usize>) -> Result<RunReport, HarnessError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build()?;
    let (specs, results) = pool.install(|| simulate(config))?;
    write_outputs(config, out_dir, &specs, results)
}

fn simulate(config: &RunConfig) -> Result<(Vec<EnvironmentSpec64>, Vec<TrialResult>), HarnessError> {
    let specs: Vec<EnvironmentSpec64> = (0..config.instances)
        .into_par_iter()
        .map(|i| build_instance(config, i))
        .collect::<Result<_, _>>()?;
    let tables: Vec<BaselineTable> = specs.par_iter().map(BaselineTable::new).collect();
    log::info!(
        "{} instance(s) of {} ready; running {} trial(s) each for {} algorithm(s)",
        specs.len(),
        config.generator.name(),
        config.trials,
        config.algorithms.len()
    );

    let mut tasks = Vec::new();
    for instance in 0..config.instances {
        for trial in 0..config.trials {
            for &algorithm in &config.algorithms {
                tasks.push((instance, trial, algorithm));
            }
        }
    }
    let results = tasks
        .into_par_iter()
        .map(|(instance, trial, algorithm)| {
            let trial_config = TrialConfig {
                algorithm,
                regret_mode: config.regret_mode,
                track_failures: config.track_failures,
            };
            let seed = trial_seed(instance_seed(config.seed, instance), trial);
            let TrialOutcome {
                ledger,
                failure_rounds,
                ..
            } = run_trial(&specs[instance], &tables[instance], trial_config, seed)?;
            log::debug!("{algorithm} instance {instance} trial {trial} done");
            Ok(TrialResult {
                algorithm,
                instance,
                trial,
                ledger,
                failure_rounds,
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    Ok((specs, results))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> HarnessError + '_ {
    move |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Serialize)]
struct LedgerRow<'a> {
    algorithm: &'a str,
    instance_id: usize,
    trial_id: usize,
    player: usize,
    local_round: usize,
    optimal_regret: f64,
    pessimal_regret: f64,
}

#[derive(Serialize)]
struct AggregateRow<'a> {
    algorithm: &'a str,
    local_round: usize,
    mean_optimal: f64,
    std_optimal: f64,
    mean_pessimal: f64,
    std_pessimal: f64,
}

fn write_outputs(
    config: &RunConfig,
    out_dir: &Path,
    specs: &[EnvironmentSpec64],
    results: Vec<TrialResult>,
) -> Result<RunReport, HarnessError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut files = Vec::new();
    let num_players = specs.first().map_or(0, |s| s.num_players());

    if config.raw_ledger {
        let path = out_dir.join("ledger.csv");
        let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
        for r in &results {
            for p in 0..r.ledger.num_players() {
                let player = PlayerId(p);
                for (k, (&o, &q)) in r.ledger.optimal(player).iter().zip(r.ledger.pessimal(player)).enumerate() {
                    w.serialize(LedgerRow {
                        algorithm: r.algorithm.name(),
                        instance_id: r.instance,
                        trial_id: r.trial,
                        player: p,
                        local_round: k + 1,
                        optimal_regret: o,
                        pessimal_regret: q,
                    })
                    .map_err(csv_err(&path))?;
                }
            }
        }
        w.flush().map_err(io_err(&path))?;
        files.push(path);
    }

    let mut aggregates = Vec::new();
    let mut summaries = Vec::new();
    for &algorithm in &config.algorithms {
        let mut scopes = vec![(CurveScope::All(config.aggregation), format!("aggregate_{}.csv", algorithm.name()))];
        if config.per_player {
            scopes.extend((0..num_players).map(|p| {
                (
                    CurveScope::Player(PlayerId(p)),
                    format!("aggregate_{}_p{p}.csv", algorithm.name()),
                )
            }));
        }
        for (scope, file_name) in scopes {
            let series = aggregate_algorithm(config, &results, algorithm, scope);
            let path = out_dir.join(file_name);
            write_aggregate(&path, &series)?;
            files.push(path);
            if matches!(scope, CurveScope::All(_)) {
                summaries.push(summarize(config, &results, &series));
                aggregates.push(series);
            }
        }
    }

    let summary = Summary {
        generator: config.generator.name().to_string(),
        instances: config.instances,
        trials: config.trials,
        seed: config.seed,
        num_players: specs.iter().map(|s| s.num_players()).collect(),
        min_gap: specs.iter().map(|s| s.min_gap()).collect(),
        algorithms: summaries,
    };
    let path = out_dir.join("summary.json");
    let mut w = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
    serde_json::to_writer_pretty(&mut w, &summary).map_err(|e| io_err(&path)(e.into()))?;
    writeln!(w).map_err(io_err(&path))?;
    w.flush().map_err(io_err(&path))?;
    files.push(path);

    Ok(RunReport {
        aggregates,
        results,
        summary,
        files,
    })
}

/// Two-level aggregate for one algorithm: trial curves grouped by instance.
pub fn aggregate_algorithm(
    config: &RunConfig,
    results: &[TrialResult],
    algorithm: Algorithm,
    scope: CurveScope,
) -> AggregateSeries {
    let mut by_instance = vec![Vec::new(); config.instances];
    for r in results.iter().filter(|r| r.algorithm == algorithm) {
        by_instance[r.instance].push(trial_curve(&r.ledger, scope));
    }
    aggregate(algorithm.name(), &by_instance)
}

fn write_aggregate(path: &Path, series: &AggregateSeries) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for k in downsample_indices(series.len(), MAX_POINTS) {
        w.serialize(AggregateRow {
            algorithm: &series.algorithm,
            local_round: k + 1,
            mean_optimal: series.mean_optimal[k],
            std_optimal: series.std_optimal[k],
            mean_pessimal: series.mean_pessimal[k],
            std_pessimal: series.std_pessimal[k],
        })
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn summarize(config: &RunConfig, results: &[TrialResult], series: &AggregateSeries) -> AlgorithmSummary {
    let last = |v: &[f64]| v.last().copied().unwrap_or(0.0);
    let failures = config.track_failures.then(|| {
        let counts: Vec<f64> = results
            .iter()
            .filter(|r| r.algorithm.name() == series.algorithm)
            .flat_map(|r| r.failure_rounds.iter().map(|&c| c as f64))
            .collect();
        counts.iter().sum::<f64>() / counts.len().max(1) as f64
    });
    AlgorithmSummary {
        algorithm: series.algorithm.clone(),
        local_rounds: series.len(),
        final_mean_optimal: last(&series.mean_optimal),
        final_std_optimal: last(&series.std_optimal),
        final_mean_pessimal: last(&series.mean_pessimal),
        final_std_pessimal: last(&series.std_pessimal),
        mean_failure_rounds_per_player: failures,
    }
}
