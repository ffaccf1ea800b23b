//! Turning ledgers into curves and curves into ensemble statistics.
//!
//! A trial curve is indexed by local round. When players are combined, a
//! player who has already played all of their rounds contributes their final
//! value (zero if they never played). Aggregation first averages the trial
//! curves of each instance, then takes the mean and sample standard deviation
//! of those per-instance curves across instances. Shorter curves are extended
//! by their last value.

use sleeping_bandits::{PlayerId, RegretLedger64};

use crate::config::Aggregation;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveScope {
    /// All players combined.
    All(Aggregation),
    /// A single player.
    Player(PlayerId),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrialCurve {
    pub optimal: Vec<f64>,
    pub pessimal: Vec<f64>,
}

fn value_at(series: &[f64], k: usize) -> f64 {
    series.get(k).or(series.last()).copied().unwrap_or(0.0)
}

pub fn trial_curve(ledger: &RegretLedger64, scope: CurveScope) -> TrialCurve {
    let players: Vec<PlayerId> = match scope {
        CurveScope::Player(p) => vec![p],
        CurveScope::All(_) => (0..ledger.num_players()).map(PlayerId).collect(),
    };
    let len = players.iter().map(|&p| ledger.rounds(p)).max().unwrap_or(0);
    let scale = match scope {
        CurveScope::All(Aggregation::Mean) => 1.0 / players.len().max(1) as f64,
        _ => 1.0,
    };
    let combine = |pick: fn(&RegretLedger64, PlayerId) -> &[f64]| -> Vec<f64> {
        (0..len)
            .map(|k| players.iter().map(|&p| value_at(pick(ledger, p), k)).sum::<f64>() * scale)
            .collect()
    };
    TrialCurve {
        optimal: combine(RegretLedger64::optimal),
        pessimal: combine(RegretLedger64::pessimal),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregateSeries {
    pub algorithm: String,
    pub mean_optimal: Vec<f64>,
    pub std_optimal: Vec<f64>,
    pub mean_pessimal: Vec<f64>,
    pub std_pessimal: Vec<f64>,
    /// Trials behind every point (instances × trials per instance).
    pub trials: usize,
}

impl AggregateSeries {
    pub fn len(&self) -> usize {
        self.mean_optimal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean_optimal.is_empty()
    }
}

/// Mean over trials within each instance, then mean and sample standard
/// deviation (zero for a single instance) across instances.
pub fn aggregate(algorithm: &str, by_instance: &[Vec<TrialCurve>]) -> AggregateSeries {
    let len = by_instance
        .iter()
        .flatten()
        .map(|c| c.optimal.len())
        .max()
        .unwrap_or(0);
    let instance_means = |pick: fn(&TrialCurve) -> &[f64]| -> Vec<Vec<f64>> {
        by_instance
            .iter()
            .map(|curves| {
                (0..len)
                    .map(|k| curves.iter().map(|c| value_at(pick(c), k)).sum::<f64>() / curves.len().max(1) as f64)
                    .collect()
            })
            .collect()
    };
    let (mean_optimal, std_optimal) = across(&instance_means(|c| &c.optimal), len);
    let (mean_pessimal, std_pessimal) = across(&instance_means(|c| &c.pessimal), len);
    AggregateSeries {
        algorithm: algorithm.to_string(),
        mean_optimal,
        std_optimal,
        mean_pessimal,
        std_pessimal,
        trials: by_instance.iter().map(Vec::len).sum(),
    }
}

fn across(rows: &[Vec<f64>], len: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    (0..len)
        .map(|k| {
            let mean = rows.iter().map(|r| r[k]).sum::<f64>() / n;
            let std = if rows.len() < 2 {
                0.0
            } else {
                (rows.iter().map(|r| (r[k] - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            };
            (mean, std)
        })
        .unzip()
}

/// Indices kept when a series of `len` points is thinned to at most
/// `max_points` by uniform striding; the last point is always kept.
pub fn downsample_indices(len: usize, max_points: usize) -> Vec<usize> {
    assert!(max_points >= 2, "need room for both endpoints");
    if len <= max_points {
        return (0..len).collect();
    }
    let stride = (len - 1).div_ceil(max_points - 2);
    let mut out: Vec<usize> = (0..len).step_by(stride).collect();
    if out.last() != Some(&(len - 1)) {
        out.push(len - 1);
    }
    out
}
