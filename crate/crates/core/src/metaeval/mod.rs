//! Meta-evaluation: how well a metric agrees with human judgments.
//!
//! Scores are grouped by sample. Sample-level aggregation correlates the
//! outputs of each sample separately and averages the per-sample values;
//! dataset-level aggregation correlates all (sample, output) pairs at once.

mod bootstrap;
mod correlation;
mod join;

use serde::{Deserialize, Serialize};

pub use bootstrap::{bootstrap_compare, resample_seed_stream, SignificanceResult};
pub use correlation::{pearson, ranks, spearman};
pub use join::{join_records, Joined};

use crate::error::{Error, Result};
use crate::task::{CorrelationKind, Strategy};

/// Metric and human scores grouped by sample: `groups[i][j] = (auto, human)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedScores {
    pub groups: Vec<Vec<(f64, f64)>>,
}

impl PairedScores {
    pub fn new(groups: Vec<Vec<(f64, f64)>>) -> Result<Self> {
        let ps = PairedScores { groups };
        ps.validate()?;
        Ok(ps)
    }

    pub fn validate(&self) -> Result<()> {
        if self.groups.is_empty() {
            return Err(Error::Invalid("no groups".into()));
        }
        for (i, g) in self.groups.iter().enumerate() {
            if g.is_empty() {
                return Err(Error::Invalid(format!("group {i} is empty")));
            }
            if g.iter().any(|(a, h)| !a.is_finite() || !h.is_finite()) {
                return Err(Error::Invalid(format!("group {i} has a non-finite value")));
            }
        }
        Ok(())
    }

    pub fn n_pairs(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub kind: CorrelationKind,
    pub strategy: Strategy,
    pub value: f64,
    pub n_used: usize,
    pub n_skipped: usize,
}

pub fn correlate(kind: CorrelationKind, x: &[f64], y: &[f64]) -> Result<f64> {
    match kind {
        CorrelationKind::Spearman => spearman(x, y),
        CorrelationKind::Pearson => pearson(x, y),
    }
}

/// Correlation of one group, or `None` if either side is degenerate.
pub(crate) fn group_correlation(kind: CorrelationKind, g: &[(f64, f64)]) -> Result<Option<f64>> {
    let (auto, human): (Vec<f64>, Vec<f64>) = g.iter().copied().unzip();
    match correlate(kind, &auto, &human) {
        Ok(v) => Ok(Some(v)),
        Err(Error::Degenerate(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

pub(crate) fn dataset_level<'a>(
    kind: CorrelationKind,
    groups: impl IntoIterator<Item = &'a Vec<(f64, f64)>>,
) -> Result<f64> {
    let (auto, human): (Vec<f64>, Vec<f64>) = groups.into_iter().flatten().copied().unzip();
    correlate(kind, &auto, &human)
}

pub fn aggregate(
    ps: &PairedScores,
    kind: CorrelationKind,
    strategy: Strategy,
) -> Result<CorrelationReport> {
    ps.validate()?;
    match strategy {
        Strategy::SampleLevel => {
            let mut sum = 0.0;
            let mut used = 0;
            for g in &ps.groups {
                if let Some(v) = group_correlation(kind, g)? {
                    sum += v;
                    used += 1;
                }
            }
            if used == 0 {
                return Err(Error::Degenerate(format!(
                    "all {} groups are degenerate",
                    ps.groups.len()
                )));
            }
            Ok(CorrelationReport {
                kind,
                strategy,
                value: sum / used as f64,
                n_used: used,
                n_skipped: ps.groups.len() - used,
            })
        }
        Strategy::DatasetLevel => Ok(CorrelationReport {
            kind,
            strategy,
            value: dataset_level(kind, &ps.groups)?,
            n_used: ps.groups.len(),
            n_skipped: 0,
        }),
    }
}
