//! Task kinds and the small enums shared across modules.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Concrete task kind of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Task {
    Summ,
    #[serde(rename = "MT")]
    Mt,
    #[serde(rename = "D2T")]
    D2t,
    DiagTurn,
    DiagDialog,
}

/// Task family used for aspect applicability. Both dialogue granularities
/// map onto `Diag`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskFamily {
    Summ,
    #[serde(rename = "MT")]
    Mt,
    #[serde(rename = "D2T")]
    D2t,
    Diag,
}

impl Task {
    pub const ALL: [Task; 5] = [
        Task::Summ,
        Task::Mt,
        Task::D2t,
        Task::DiagTurn,
        Task::DiagDialog,
    ];

    pub fn family(self) -> TaskFamily {
        match self {
            Task::Summ => TaskFamily::Summ,
            Task::Mt => TaskFamily::Mt,
            Task::D2t => TaskFamily::D2t,
            Task::DiagTurn | Task::DiagDialog => TaskFamily::Diag,
        }
    }

    pub fn is_dialogue(self) -> bool {
        matches!(self, Task::DiagTurn | Task::DiagDialog)
    }

    /// Scoring direction used when a run does not override it.
    pub fn default_direction(self) -> Direction {
        match self {
            Task::Summ => Direction::SrcToHypo,
            Task::Mt | Task::D2t => Direction::RefBidir,
            Task::DiagTurn | Task::DiagDialog => Direction::BooleanQA,
        }
    }

    pub fn default_strategy(self) -> Strategy {
        if self.is_dialogue() {
            Strategy::DatasetLevel
        } else {
            Strategy::SampleLevel
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Summ => "Summ",
            Task::Mt => "MT",
            Task::D2t => "D2T",
            Task::DiagTurn => "DiagTurn",
            Task::DiagDialog => "DiagDialog",
        }
    }
}

impl TaskFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskFamily::Summ => "Summ",
            TaskFamily::Mt => "MT",
            TaskFamily::D2t => "D2T",
            TaskFamily::Diag => "Diag",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for TaskFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let norm = |t: &str| {
            t.chars()
                .filter(char::is_ascii_alphanumeric)
                .collect::<String>()
                .to_ascii_lowercase()
        };
        Task::ALL
            .into_iter()
            .find(|t| norm(t.as_str()) == norm(s))
            .ok_or_else(|| Error::Usage(format!("unknown task `{s}`")))
    }
}

/// Which text conditions which when scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    SrcToHypo,
    RefToHypo,
    HypoToRef,
    /// Mean of `RefToHypo` and `HypoToRef`.
    RefBidir,
    /// Dialogue only: score the " Yes." answer to an aspect question.
    BooleanQA,
}

impl Direction {
    pub const ALL: [Direction; 5] = [
        Direction::SrcToHypo,
        Direction::RefToHypo,
        Direction::HypoToRef,
        Direction::RefBidir,
        Direction::BooleanQA,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::SrcToHypo => "SrcToHypo",
            Direction::RefToHypo => "RefToHypo",
            Direction::HypoToRef => "HypoToRef",
            Direction::RefBidir => "RefBidir",
            Direction::BooleanQA => "BooleanQA",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        let found = match norm.as_str() {
            "srctohypo" | "srchypo" => Some(Direction::SrcToHypo),
            "reftohypo" | "refhypo" => Some(Direction::RefToHypo),
            "hypotoref" | "hyporef" => Some(Direction::HypoToRef),
            "refbidir" | "bidir" => Some(Direction::RefBidir),
            "booleanqa" | "boolqa" => Some(Direction::BooleanQA),
            _ => None,
        };
        found.ok_or_else(|| Error::Usage(format!("unknown direction `{s}`")))
    }
}

/// Evaluation setting: vanilla, instruction, instruction plus demonstrations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Setting {
    Val,
    Ist,
    Idm,
}

impl Setting {
    pub fn as_str(self) -> &'static str {
        match self {
            Setting::Val => "VAL",
            Setting::Ist => "IST",
            Setting::Idm => "IDM",
        }
    }

    pub fn has_instruction(self) -> bool {
        !matches!(self, Setting::Val)
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "val" => Ok(Setting::Val),
            "ist" => Ok(Setting::Ist),
            "idm" => Ok(Setting::Idm),
            _ => Err(Error::Usage(format!("unknown setting `{s}`"))),
        }
    }
}

/// How per-output correlations are aggregated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    SampleLevel,
    DatasetLevel,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::SampleLevel => "SampleLevel",
            Strategy::DatasetLevel => "DatasetLevel",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "samplelevel" | "sample" => Ok(Strategy::SampleLevel),
            "datasetlevel" | "dataset" => Ok(Strategy::DatasetLevel),
            _ => Err(Error::Usage(format!("unknown strategy `{s}`"))),
        }
    }
}

/// Correlation coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CorrelationKind {
    Spearman,
    Pearson,
}

impl CorrelationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CorrelationKind::Spearman => "Spearman",
            CorrelationKind::Pearson => "Pearson",
        }
    }
}

impl fmt::Display for CorrelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CorrelationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "spearman" => Ok(CorrelationKind::Spearman),
            "pearson" => Ok(CorrelationKind::Pearson),
            _ => Err(Error::Usage(format!("unknown correlation kind `{s}`"))),
        }
    }
}
