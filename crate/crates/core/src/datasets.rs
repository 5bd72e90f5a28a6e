//! JSON-Lines human-judgment datasets.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::task::{Direction, Strategy, Task};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemOutput {
    pub system_id: String,
    pub text: String,
    #[serde(default)]
    pub human_scores: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSample {
    pub sample_id: String,
    pub task: Task,
    #[serde(default)]
    pub source: String,
    #[serde(default)]
    pub references: Vec<String>,
    pub outputs: Vec<SystemOutput>,
}

impl GenSample {
    pub fn first_reference(&self) -> Option<&str> {
        self.references.first().map(String::as_str)
    }

    /// True when every output carries a human score for each of `aspects`.
    pub fn has_scores_for(&self, aspects: &[impl AsRef<str>]) -> bool {
        self.outputs.iter().all(|o| {
            aspects
                .iter()
                .all(|a| o.human_scores.contains_key(a.as_ref()))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub task: Task,
    pub samples: Vec<GenSample>,
    pub default_direction: Direction,
    pub default_strategy: Strategy,
}

impl Dataset {
    /// Builds a dataset with the task's default direction and strategy.
    pub fn new(name: impl Into<String>, task: Task, samples: Vec<GenSample>) -> Result<Self> {
        let ds = Dataset {
            name: name.into(),
            task,
            samples,
            default_direction: task.default_direction(),
            default_strategy: task.default_strategy(),
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.is_empty() {
            return Err(Error::Invalid(format!("dataset {} is empty", self.name)));
        }
        let mut ids = HashSet::new();
        for s in &self.samples {
            validate_sample(s, self.task).map_err(Error::Invalid)?;
            if !ids.insert(s.sample_id.as_str()) {
                return Err(Error::Invalid(format!(
                    "duplicate sample_id {}",
                    s.sample_id
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample(&self, id: &str) -> Option<&GenSample> {
        self.samples.iter().find(|s| s.sample_id == id)
    }

    /// Canonical JSON-Lines form: one sample per line, trailing newline.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for s in &self.samples {
            out.push_str(&serde_json::to_string(s).expect("sample serializes"));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(self.to_jsonl().as_bytes())?;
        w.flush()?;
        Ok(())
    }
}

fn validate_sample(s: &GenSample, task: Task) -> Result<(), String> {
    if s.task != task {
        return Err(format!(
            "sample {} has task {} but the dataset is {}",
            s.sample_id, s.task, task
        ));
    }
    if s.sample_id.is_empty() {
        return Err("sample_id must be non-empty".into());
    }
    if s.outputs.is_empty() {
        return Err(format!("sample {}: outputs must be non-empty", s.sample_id));
    }
    if task == Task::Mt && s.references.is_empty() {
        return Err(format!(
            "sample {}: MT samples need references",
            s.sample_id
        ));
    }
    for o in &s.outputs {
        if o.text.is_empty() {
            return Err(format!(
                "sample {} system {}: text must be non-empty",
                s.sample_id, o.system_id
            ));
        }
        if let Some((k, v)) = o.human_scores.iter().find(|(_, v)| !v.is_finite()) {
            return Err(format!(
                "sample {} system {}: human score {k} = {v} is not finite",
                s.sample_id, o.system_id
            ));
        }
    }
    Ok(())
}

/// Loads a JSON-Lines dataset of `task` samples. Blank lines are skipped.
pub fn load(path: impl AsRef<Path>, task: Task) -> Result<Dataset> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let parse_err = |line: usize, message: String| Error::Parse {
        path: PathBuf::from(path),
        line,
        message,
    };

    let mut samples = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let sample: GenSample =
            serde_json::from_str(&line).map_err(|e| parse_err(lineno, e.to_string()))?;
        validate_sample(&sample, task).map_err(|m| parse_err(lineno, m))?;
        if !ids.insert(sample.sample_id.clone()) {
            return Err(parse_err(
                lineno,
                format!("duplicate sample_id {}", sample.sample_id),
            ));
        }
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(Error::Invalid(format!(
            "{} contains no samples",
            path.display()
        )));
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Dataset::new(name, task, samples)
}

/// Draws `n` samples deterministically for `seed`.
///
/// Samples whose outputs all carry scores for every aspect in `prefer` are
/// taken first (in random order), then the remainder is filled randomly.
/// Selected samples keep their original relative order.
pub fn subsample(ds: &Dataset, n: usize, seed: u64, prefer: &[impl AsRef<str>]) -> Result<Dataset> {
    if n == 0 || n > ds.len() {
        return Err(Error::OutOfRange {
            what: "subsample size",
            value: n,
            expected: format!("1..={}", ds.len()),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut complete, mut rest): (Vec<usize>, Vec<usize>) =
        (0..ds.len()).partition(|&i| !prefer.is_empty() && ds.samples[i].has_scores_for(prefer));
    complete.shuffle(&mut rng);
    rest.shuffle(&mut rng);

    let mut chosen: Vec<usize> = complete.into_iter().chain(rest).take(n).collect();
    chosen.sort_unstable();
    Ok(Dataset {
        name: ds.name.clone(),
        task: ds.task,
        samples: chosen.into_iter().map(|i| ds.samples[i].clone()).collect(),
        default_direction: ds.default_direction,
        default_strategy: ds.default_strategy,
    })
}
