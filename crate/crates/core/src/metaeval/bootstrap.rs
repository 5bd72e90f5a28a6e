use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{dataset_level, group_correlation, PairedScores};
use crate::error::{Error, Result};
use crate::task::{CorrelationKind, Strategy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceResult {
    /// Fraction of resamples in which metric A did not beat metric B.
    pub p_value: f64,
    pub n_resamples: usize,
    pub alpha: f64,
    pub significant: bool,
    pub seed: u64,
}

/// Random stream of resample `r`. Each resample owns its stream, so results
/// do not depend on how resamples are spread over threads.
pub fn resample_seed_stream(seed: u64, r: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r);
    rng
}

fn check_paired(a: &PairedScores, b: &PairedScores) -> Result<()> {
    a.validate()?;
    b.validate()?;
    if a.groups.len() != b.groups.len() {
        return Err(Error::Invalid(format!(
            "metrics cover {} and {} groups",
            a.groups.len(),
            b.groups.len()
        )));
    }
    for (i, (ga, gb)) in a.groups.iter().zip(&b.groups).enumerate() {
        if ga.len() != gb.len() {
            return Err(Error::Invalid(format!(
                "group {i} differs in size between metrics"
            )));
        }
        if ga.iter().zip(gb).any(|(x, y)| x.1 != y.1) {
            return Err(Error::Invalid(format!(
                "group {i} has different human scores"
            )));
        }
    }
    Ok(())
}

/// Per-metric state reused across resamples.
enum Prepared<'a> {
    /// Per-group correlation, `None` for degenerate groups.
    Sample(Vec<Option<f64>>),
    Dataset(&'a PairedScores),
}

impl<'a> Prepared<'a> {
    fn new(ps: &'a PairedScores, kind: CorrelationKind, strategy: Strategy) -> Result<Self> {
        Ok(match strategy {
            Strategy::SampleLevel => Prepared::Sample(
                ps.groups
                    .iter()
                    .map(|g| group_correlation(kind, g))
                    .collect::<Result<_>>()?,
            ),
            Strategy::DatasetLevel => Prepared::Dataset(ps),
        })
    }

    fn on(&self, kind: CorrelationKind, draw: &[usize]) -> Result<Option<f64>> {
        match self {
            Prepared::Sample(per_group) => {
                let used: Vec<f64> = draw.iter().filter_map(|&i| per_group[i]).collect();
                Ok((!used.is_empty()).then(|| used.iter().sum::<f64>() / used.len() as f64))
            }
            Prepared::Dataset(ps) => match dataset_level(kind, draw.iter().map(|&i| &ps.groups[i]))
            {
                Ok(v) => Ok(Some(v)),
                Err(Error::Degenerate(_)) => Ok(None),
                Err(e) => Err(e),
            },
        }
    }
}

/// Paired bootstrap over sample groups: is metric A significantly better
/// correlated with humans than metric B?
///
/// Each resample draws `n` group indices with replacement, shared by both
/// metrics. `p_value` is the fraction of resamples with `corr_a <= corr_b`.
/// Resamples on which either metric is undefined are redrawn; more than
/// `10 * n_resamples` draws in total is an error.
pub fn bootstrap_compare(
    a: &PairedScores,
    b: &PairedScores,
    kind: CorrelationKind,
    strategy: Strategy,
    n_resamples: usize,
    alpha: f64,
    seed: u64,
) -> Result<SignificanceResult> {
    if n_resamples == 0 {
        return Err(Error::Usage("n_resamples must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Usage(format!("alpha {alpha} is outside [0, 1]")));
    }
    check_paired(a, b)?;
    let pa = Prepared::new(a, kind, strategy)?;
    let pb = Prepared::new(b, kind, strategy)?;
    let n = a.groups.len();
    let budget = 10 * n_resamples;

    let outcomes: Vec<Result<(bool, usize)>> = (0..n_resamples as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = resample_seed_stream(seed, r);
            let mut draw = vec![0usize; n];
            for attempt in 1..=budget {
                for d in draw.iter_mut() {
                    *d = rng.gen_range(0..n);
                }
                if let (Some(ca), Some(cb)) = (pa.on(kind, &draw)?, pb.on(kind, &draw)?) {
                    return Ok((ca <= cb, attempt));
                }
            }
            Err(Error::Degenerate(format!("resample {r} stayed degenerate")))
        })
        .collect();

    let mut not_better = 0usize;
    let mut draws = 0usize;
    for o in outcomes {
        let (le, attempts) = o?;
        not_better += le as usize;
        draws += attempts;
    }
    if draws > budget {
        return Err(Error::Degenerate(format!(
            "needed {draws} draws for {n_resamples} resamples (bound {budget})"
        )));
    }
    let p_value = not_better as f64 / n_resamples as f64;
    Ok(SignificanceResult {
        p_value,
        n_resamples,
        alpha,
        significant: p_value < alpha,
        seed,
    })
}
