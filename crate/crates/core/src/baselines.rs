//! ROUGE-1/2/L over lowercased whitespace tokens, without stemming.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::datasets::Dataset;
use crate::error::{Error, Result};
use crate::scoring::ScoreRecord;
use crate::task::{Direction, Setting};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    pub const ZERO: RougeScore = RougeScore {
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
    };

    fn from_counts(overlap: usize, hypo_total: usize, ref_total: usize) -> Self {
        if hypo_total == 0 || ref_total == 0 {
            return Self::ZERO;
        }
        let precision = overlap as f64 / hypo_total as f64;
        let recall = overlap as f64 / ref_total as f64;
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        RougeScore {
            precision,
            recall,
            f1,
        }
    }
}

pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_lowercase).collect()
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for w in tokens.windows(n) {
        *counts.entry(w).or_insert(0) += 1;
    }
    counts
}

/// Clipped n-gram overlap for `n` in {1, 2}.
pub fn rouge_n(hypo: &str, reference: &str, n: usize) -> Result<RougeScore> {
    if !(1..=2).contains(&n) {
        return Err(Error::Usage(format!(
            "ROUGE-{n} is not supported (n must be 1 or 2)"
        )));
    }
    let (h, r) = (tokenize(hypo), tokenize(reference));
    if h.len() < n || r.len() < n {
        return Ok(RougeScore::ZERO);
    }
    let hc = ngram_counts(&h, n);
    let rc = ngram_counts(&r, n);
    let overlap = hc
        .iter()
        .map(|(g, c)| (*c).min(rc.get(g).copied().unwrap_or(0)))
        .sum();
    Ok(RougeScore::from_counts(
        overlap,
        h.len() + 1 - n,
        r.len() + 1 - n,
    ))
}

pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

/// Longest-common-subsequence precision, recall and F1.
pub fn rouge_l(hypo: &str, reference: &str) -> RougeScore {
    let (h, r) = (tokenize(hypo), tokenize(reference));
    RougeScore::from_counts(lcs_len(&h, &r), h.len(), r.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RougeVariant {
    Rouge1,
    Rouge2,
    RougeL,
}

impl RougeVariant {
    pub fn score(self, hypo: &str, reference: &str) -> RougeScore {
        match self {
            RougeVariant::Rouge1 => rouge_n(hypo, reference, 1).expect("n = 1"),
            RougeVariant::Rouge2 => rouge_n(hypo, reference, 2).expect("n = 2"),
            RougeVariant::RougeL => rouge_l(hypo, reference),
        }
    }
}

impl std::str::FromStr for RougeVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "rouge1" | "r1" => Ok(RougeVariant::Rouge1),
            "rouge2" | "r2" => Ok(RougeVariant::Rouge2),
            "rougel" | "rl" => Ok(RougeVariant::RougeL),
            _ => Err(Error::Usage(format!("unknown ROUGE variant `{s}`"))),
        }
    }
}

/// ROUGE F1 against the first reference, as score records under `aspect`
/// so they join with human scores like any other metric.
pub fn rouge_records(
    ds: &Dataset,
    aspect: &str,
    variant: RougeVariant,
) -> Result<Vec<ScoreRecord>> {
    let mut out = Vec::new();
    for s in &ds.samples {
        let reference = s.first_reference().ok_or_else(|| {
            Error::Invalid(format!("sample {} has no reference for ROUGE", s.sample_id))
        })?;
        for o in &s.outputs {
            out.push(ScoreRecord {
                sample_id: s.sample_id.clone(),
                system_id: o.system_id.clone(),
                aspect: aspect.to_string(),
                direction: Direction::RefToHypo,
                setting: Setting::Val,
                k: 0,
                value: variant.score(&o.text, reference).f1,
                token_count: tokenize(&o.text).len().max(1),
            });
        }
    }
    Ok(out)
}
