use std::collections::{BTreeSet, HashMap};

use super::PairedScores;
use crate::datasets::Dataset;
use crate::error::{Error, Result};
use crate::scoring::ScoreRecord;

/// Paired scores for one aspect plus the (sample, system) key of every pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Joined {
    pub scores: PairedScores,
    pub keys: Vec<Vec<(String, String)>>,
}

impl Joined {
    pub fn key_set(&self) -> BTreeSet<(&str, &str)> {
        self.keys
            .iter()
            .flatten()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect()
    }
}

/// Joins `records` of `aspect` to the human scores of `ds` by
/// (sample_id, system_id, aspect). Groups follow dataset order. Records that
/// do not join are collected into an [`Error::Unmatched`].
pub fn join_records(ds: &Dataset, records: &[ScoreRecord], aspect: &str) -> Result<Joined> {
    let mut by_key: HashMap<(&str, &str), f64> = HashMap::new();
    let mut unmatched = Vec::new();
    for r in records.iter().filter(|r| r.aspect == aspect) {
        let human = ds
            .sample(&r.sample_id)
            .and_then(|s| s.outputs.iter().find(|o| o.system_id == r.system_id))
            .and_then(|o| o.human_scores.get(aspect));
        if human.is_none() {
            unmatched.push(format!("{}/{}/{}", r.sample_id, r.system_id, aspect));
            continue;
        }
        if by_key
            .insert((r.sample_id.as_str(), r.system_id.as_str()), r.value)
            .is_some()
        {
            return Err(Error::Invalid(format!(
                "duplicate score for {}/{}/{}",
                r.sample_id, r.system_id, aspect
            )));
        }
    }
    if !unmatched.is_empty() {
        return Err(Error::Unmatched(unmatched));
    }

    let mut groups = Vec::new();
    let mut keys = Vec::new();
    for s in &ds.samples {
        let mut g = Vec::new();
        let mut k = Vec::new();
        for o in &s.outputs {
            if let (Some(&auto), Some(&human)) = (
                by_key.get(&(s.sample_id.as_str(), o.system_id.as_str())),
                o.human_scores.get(aspect),
            ) {
                g.push((auto, human));
                k.push((s.sample_id.clone(), o.system_id.clone()));
            }
        }
        if !g.is_empty() {
            groups.push(g);
            keys.push(k);
        }
    }
    if groups.is_empty() {
        return Err(Error::Invalid(format!(
            "no score records for aspect {aspect}"
        )));
    }
    Ok(Joined {
        scores: PairedScores::new(groups)?,
        keys,
    })
}
