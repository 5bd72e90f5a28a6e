//! Evaluate generated text by its conditional log-probability under a
//! generative language model, and meta-evaluate metrics against human
//! judgments.
//!
//! The pieces, bottom-up:
//!
//! - [`aspects`]: named quality dimensions and their definitions.
//! - [`datasets`]: JSON-Lines human-judgment data.
//! - [`prompt`]: instruction templates rendered into (prefix, target) pairs.
//! - [`backend`]: per-token logprobs from an HTTP endpoint or offline oracles.
//! - [`scoring`]: GPTScore values for outputs and whole datasets.
//! - [`metaeval`]: Spearman/Pearson aggregation and paired bootstrap tests.
//! - [`baselines`]: ROUGE-1, ROUGE-2 and ROUGE-L reference scores.
//! - [`cli`]: the commands behind the `gptscore` binary.

pub mod aspects;
pub mod backend;
pub mod baselines;
pub mod cli;
pub mod datasets;
pub mod error;
pub mod metaeval;
pub mod prompt;
pub mod scoring;
pub mod task;

pub use error::{Error, ExitCode, Result};
pub use task::{CorrelationKind, Direction, Setting, Strategy, Task, TaskFamily};
