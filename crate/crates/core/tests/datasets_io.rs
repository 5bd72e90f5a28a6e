mod common;

use std::collections::BTreeSet;

use gptscore::datasets::{self, subsample, Dataset, GenSample};
use gptscore::{Error, Task};

/// Samples with MQM scores on every output at the given positions.
fn mixed(n: usize, with_mqm: &[usize]) -> Dataset {
    let mut samples = common::summ_samples(n, 2, &["FLU"], 9);
    for s in &mut samples {
        s.task = Task::Mt;
    }
    for &i in with_mqm {
        for o in &mut samples[i].outputs {
            o.human_scores.insert("MQM".into(), 1.0);
        }
    }
    common::dataset("mixed", Task::Mt, samples)
}

fn subsets(n: usize, k: usize) -> Vec<BTreeSet<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect())
        .collect()
}

/// Brute force: the admissible subsets are those holding as many preferred
/// samples as possible.
fn admissible(n: usize, k: usize, preferred: &BTreeSet<usize>) -> Vec<BTreeSet<usize>> {
    let all = subsets(n, k);
    let best = all
        .iter()
        .map(|s| s.intersection(preferred).count())
        .max()
        .unwrap();
    all.into_iter()
        .filter(|s| s.intersection(preferred).count() == best)
        .collect()
}

fn positions(ds: &Dataset, sub: &Dataset) -> Vec<usize> {
    sub.samples
        .iter()
        .map(|s| {
            ds.samples
                .iter()
                .position(|t| t.sample_id == s.sample_id)
                .unwrap()
        })
        .collect()
}

#[test]
fn subsample_matches_brute_force_preference() {
    let with_mqm = [1, 4, 5];
    let ds = mixed(8, &with_mqm);
    let preferred: BTreeSet<usize> = with_mqm.into_iter().collect();
    for k in 1..=8 {
        let ok = admissible(8, k, &preferred);
        let mut seen = BTreeSet::new();
        for seed in 0..40 {
            let sub = subsample(&ds, k, seed, &["MQM"]).unwrap();
            let pos = positions(&ds, &sub);
            assert!(
                pos.windows(2).all(|w| w[0] < w[1]),
                "order not preserved: {pos:?}"
            );
            let set: BTreeSet<usize> = pos.into_iter().collect();
            assert!(
                ok.contains(&set),
                "k={k} seed={seed}: {set:?} not admissible"
            );
            assert_eq!(sub, subsample(&ds, k, seed, &["MQM"]).unwrap());
            seen.insert(set);
        }
        if ok.len() > 1 {
            assert!(seen.len() > 1, "k={k}: seed has no effect");
        }
    }
}

#[test]
fn subsample_without_preference_is_uniform_choice() {
    let ds = mixed(6, &[]);
    let none: [&str; 0] = [];
    let sub = subsample(&ds, 3, 1, &none).unwrap();
    assert_eq!(sub.len(), 3);
    assert!(matches!(
        subsample(&ds, 7, 1, &none),
        Err(Error::OutOfRange { .. })
    ));
    assert!(matches!(
        subsample(&ds, 0, 1, &none),
        Err(Error::OutOfRange { .. })
    ));
}

#[test]
fn save_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let ds = common::dataset("turns", Task::DiagTurn, common::turn_samples(4, 2, 3));
    let path = dir.path().join("turns.jsonl");
    ds.save(&path).unwrap();
    let back = datasets::load(&path, Task::DiagTurn).unwrap();
    assert_eq!(back, ds);
}

#[test]
fn load_reports_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsonl");
    let good: Vec<GenSample> = common::summ_samples(2, 1, &["FLU"], 1);
    let mut text = String::new();
    for s in &good {
        text.push_str(&serde_json::to_string(s).unwrap());
        text.push('\n');
    }
    text.push_str("{not json}\n");
    std::fs::write(&path, text).unwrap();
    match datasets::load(&path, Task::Summ) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn task_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("summ.jsonl");
    common::write_dataset(&path, &common::summ_samples(2, 1, &["FLU"], 1));
    assert!(datasets::load(&path, Task::DiagTurn).is_err());
}
