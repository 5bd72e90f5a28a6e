//! GPTScore: the mean target-token log-probability of a hypothesis under an
//! instruction-bearing prompt, and batch scoring over datasets.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backend::{token_logprobs, LogprobBackend, TokenScore};
use crate::datasets::{Dataset, GenSample, SystemOutput};
use crate::error::{Error, Result};
use crate::prompt::{render, select_demos, Demonstration, TemplateRegistry};
use crate::task::{Direction, Setting};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub sample_id: String,
    pub system_id: String,
    pub aspect: String,
    pub direction: Direction,
    pub setting: Setting,
    pub k: usize,
    pub value: f64,
    pub token_count: usize,
}

/// Uniformly weighted mean of the target-token logprobs.
pub fn gptscore(tokens: &[TokenScore]) -> Result<f64> {
    mean_logprob(tokens.iter().map(|t| t.logprob))
}

pub(crate) fn mean_logprob(lps: impl IntoIterator<Item = f64>) -> Result<f64> {
    let mut sum = 0.0;
    let mut m = 0usize;
    for lp in lps {
        if !lp.is_finite() {
            return Err(Error::NonFinite {
                token: format!("#{m}"),
            });
        }
        sum += lp;
        m += 1;
    }
    if m == 0 {
        return Err(Error::Invalid("gptscore of an empty token list".into()));
    }
    Ok(sum / m as f64)
}

/// Everything `score_output` needs besides the sample itself.
#[derive(Clone, Copy)]
pub struct Scorer<'a> {
    pub backend: &'a dyn LogprobBackend,
    pub templates: &'a TemplateRegistry,
}

impl<'a> Scorer<'a> {
    pub fn new(backend: &'a dyn LogprobBackend, templates: &'a TemplateRegistry) -> Self {
        Scorer { backend, templates }
    }

    fn one_direction(
        &self,
        sample: &GenSample,
        output: &SystemOutput,
        aspect: &str,
        direction: Direction,
        setting: Setting,
        demos: &[Demonstration],
    ) -> Result<(f64, usize)> {
        let tpl = self.templates.get(sample.task, aspect, direction)?;
        let prompt = render(tpl, setting, sample, output, demos)?;
        let tokens = token_logprobs(self.backend, &prompt)?;
        Ok((gptscore(&tokens)?, tokens.len()))
    }

    /// Scores one system output. `RefBidir` averages the two paraphrase
    /// directions and counts the tokens of both spans.
    pub fn score_output(
        &self,
        sample: &GenSample,
        output: &SystemOutput,
        aspect: &str,
        direction: Direction,
        setting: Setting,
        demos: &[Demonstration],
    ) -> Result<ScoreRecord> {
        if setting != Setting::Idm && !demos.is_empty() {
            return Err(Error::Usage(format!(
                "demonstrations need the IDM setting (got {setting})"
            )));
        }
        let (value, token_count) = match direction {
            Direction::RefBidir => {
                if sample.references.is_empty() {
                    return Err(Error::Invalid(format!(
                        "sample {} has no reference for RefBidir",
                        sample.sample_id
                    )));
                }
                let (fwd, n_fwd) = self.one_direction(
                    sample,
                    output,
                    aspect,
                    Direction::RefToHypo,
                    setting,
                    demos,
                )?;
                let (rev, n_rev) = self.one_direction(
                    sample,
                    output,
                    aspect,
                    Direction::HypoToRef,
                    setting,
                    demos,
                )?;
                ((fwd + rev) / 2.0, n_fwd + n_rev)
            }
            d => self.one_direction(sample, output, aspect, d, setting, demos)?,
        };
        Ok(ScoreRecord {
            sample_id: sample.sample_id.clone(),
            system_id: output.system_id.clone(),
            aspect: aspect.to_string(),
            direction,
            setting,
            k: demos.len(),
            value,
            token_count,
        })
    }
}

/// Options of one dataset scoring run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSpec<'a> {
    pub aspect: &'a str,
    pub direction: Direction,
    pub setting: Setting,
    pub k: usize,
    pub seed: u64,
    /// Concurrent backend calls.
    pub parallel: usize,
}

/// Demonstration pool for sample `i`: the first output of every other sample.
pub fn demo_pool(ds: &Dataset, i: usize) -> Vec<Demonstration> {
    ds.samples
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, s)| Demonstration::from_sample(s, &s.outputs[0]))
        .collect()
}

pub fn check_run(ds: &Dataset, spec: &RunSpec<'_>) -> Result<()> {
    if spec.setting != Setting::Idm && spec.k > 0 {
        return Err(Error::Usage(format!(
            "k = {} requires the IDM setting (got {})",
            spec.k, spec.setting
        )));
    }
    if spec.k > 0 && ds.len() < spec.k + 1 {
        return Err(Error::OutOfRange {
            what: "demonstration count",
            value: spec.k,
            expected: format!("0..={} for {} samples", ds.len() - 1, ds.len()),
        });
    }
    if spec.direction == Direction::BooleanQA && !ds.task.is_dialogue() {
        return Err(Error::Usage(
            "BooleanQA applies to dialogue datasets only".into(),
        ));
    }
    Ok(())
}

/// One record per (sample, output), in dataset order.
pub fn score_dataset(
    scorer: Scorer<'_>,
    ds: &Dataset,
    spec: &RunSpec<'_>,
) -> Result<Vec<ScoreRecord>> {
    check_run(ds, spec)?;
    let mut jobs = Vec::new();
    for (i, sample) in ds.samples.iter().enumerate() {
        let demos = if spec.k == 0 {
            Vec::new()
        } else {
            select_demos(&demo_pool(ds, i), spec.k, spec.seed ^ i as u64)?
        };
        for output in &sample.outputs {
            jobs.push((sample, output, i, demos.clone()));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.parallel.max(1))
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    let results: Vec<Result<ScoreRecord>> = pool.install(|| {
        jobs.par_iter()
            .map(|(sample, output, _, demos)| {
                scorer.score_output(
                    sample,
                    output,
                    spec.aspect,
                    spec.direction,
                    spec.setting,
                    demos,
                )
            })
            .collect()
    });

    let total = results.len();
    let completed = results.iter().filter(|r| r.is_ok()).count();
    let mut records = Vec::with_capacity(total);
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => {
                return Err(Error::Partial {
                    completed,
                    total,
                    source: Box::new(e),
                })
            }
        }
    }
    Ok(records)
}

pub fn write_records(path: impl AsRef<Path>, records: &[ScoreRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<ScoreRecord>> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ScoreRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: PathBuf::from(path),
            line: i + 1,
            message: e.to_string(),
        })?;
        if !rec.value.is_finite() || rec.token_count == 0 {
            return Err(Error::Parse {
                path: PathBuf::from(path),
                line: i + 1,
                message: "value must be finite and token_count >= 1".into(),
            });
        }
        out.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{FixtureBackend, FixtureEntry, UnigramBackend};
    use crate::prompt::builtin_templates;
    use crate::task::Task;
    use std::collections::BTreeMap;

    fn ts(lps: &[f64]) -> Vec<TokenScore> {
        lps.iter()
            .enumerate()
            .map(|(i, &logprob)| TokenScore {
                token: format!("t{i}"),
                logprob,
                offset: i,
            })
            .collect()
    }

    #[test]
    fn mean_examples() {
        assert_eq!(gptscore(&ts(&[-0.5])).unwrap(), -0.5);
        assert_eq!(gptscore(&ts(&[-1.0, -3.0])).unwrap(), -2.0);
        assert!(gptscore(&[]).is_err());
        assert!(gptscore(&ts(&[-1.0, f64::NEG_INFINITY])).is_err());
    }

    fn sample(task: Task, src: &str, refs: &[&str], outs: &[(&str, &str)]) -> GenSample {
        GenSample {
            sample_id: "s".into(),
            task,
            source: src.into(),
            references: refs.iter().map(|r| r.to_string()).collect(),
            outputs: outs
                .iter()
                .map(|(id, t)| SystemOutput {
                    system_id: id.to_string(),
                    text: t.to_string(),
                    human_scores: BTreeMap::new(),
                })
                .collect(),
        }
    }

    #[test]
    fn unigram_end_to_end_value() {
        let backend = UnigramBackend::from_corpus("u", "a a b");
        let templates = builtin_templates();
        let s = sample(Task::Summ, "x", &[], &[("A", "a b")]);
        let rec = Scorer::new(&backend, &templates)
            .score_output(
                &s,
                &s.outputs[0],
                "FLU",
                Direction::SrcToHypo,
                Setting::Val,
                &[],
            )
            .unwrap();
        let expected = ((0.6f64).ln() + (0.4f64).ln()) / 2.0;
        assert!((rec.value - expected).abs() < 1e-12);
        assert!((rec.value + 0.71355).abs() < 1e-5);
        assert_eq!(rec.token_count, 2);
    }

    #[test]
    fn boolean_qa_fixture() {
        let templates = builtin_templates();
        let tpl = templates
            .get(Task::DiagTurn, "INT", Direction::BooleanQA)
            .unwrap();
        let s = sample(Task::DiagTurn, "Human: hi", &[], &[("bot", "AI: hey")]);
        let prompt = render(tpl, Setting::Ist, &s, &s.outputs[0], &[]).unwrap();
        let full = prompt.full();
        let p = prompt.prefix.len();
        let backend = FixtureBackend::new(
            "m",
            vec![FixtureEntry {
                prompt: full.clone(),
                tokens: vec![prompt.prefix.clone(), " Yes".into(), ".".into()],
                token_logprobs: vec![None, Some(-0.2), Some(-0.4)],
                text_offset: vec![0, p, p + 4],
            }],
        );
        let rec = Scorer::new(&backend, &templates)
            .score_output(
                &s,
                &s.outputs[0],
                "INT",
                Direction::BooleanQA,
                Setting::Ist,
                &[],
            )
            .unwrap();
        assert!((rec.value + 0.3).abs() < 1e-12);
        assert_eq!(rec.token_count, 2);
    }

    #[test]
    fn ref_bidir_averages_and_needs_reference() {
        let backend = UnigramBackend::from_corpus("u", "a a a b b c");
        let templates = builtin_templates();
        let s = sample(Task::Mt, "src", &["a a"], &[("A", "b c c")]);
        let sc = Scorer::new(&backend, &templates);
        let bi = sc
            .score_output(
                &s,
                &s.outputs[0],
                "ACC",
                Direction::RefBidir,
                Setting::Ist,
                &[],
            )
            .unwrap();
        let f = sc
            .score_output(
                &s,
                &s.outputs[0],
                "ACC",
                Direction::RefToHypo,
                Setting::Ist,
                &[],
            )
            .unwrap();
        let r = sc
            .score_output(
                &s,
                &s.outputs[0],
                "ACC",
                Direction::HypoToRef,
                Setting::Ist,
                &[],
            )
            .unwrap();
        assert!((bi.value - (f.value + r.value) / 2.0).abs() < 1e-15);
        assert_eq!(bi.token_count, 5);

        let no_ref = sample(Task::Mt, "src", &[], &[("A", "b")]);
        assert!(sc
            .score_output(
                &no_ref,
                &no_ref.outputs[0],
                "ACC",
                Direction::RefBidir,
                Setting::Ist,
                &[]
            )
            .is_err());
    }

    #[test]
    fn demos_require_idm() {
        let backend = UnigramBackend::from_corpus("u", "a");
        let templates = builtin_templates();
        let s = sample(Task::Summ, "x", &[], &[("A", "a")]);
        let d = Demonstration::from_sample(&s, &s.outputs[0]);
        let err = Scorer::new(&backend, &templates)
            .score_output(
                &s,
                &s.outputs[0],
                "FLU",
                Direction::SrcToHypo,
                Setting::Ist,
                &[d],
            )
            .unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
    }

    #[test]
    fn records_round_trip() {
        let recs = vec![ScoreRecord {
            sample_id: "s1".into(),
            system_id: "A".into(),
            aspect: "FLU".into(),
            direction: Direction::RefBidir,
            setting: Setting::Idm,
            k: 2,
            value: -1.25,
            token_count: 7,
        }];
        let f = tempfile::NamedTempFile::new().unwrap();
        write_records(f.path(), &recs).unwrap();
        assert_eq!(read_records(f.path()).unwrap(), recs);
    }
}
