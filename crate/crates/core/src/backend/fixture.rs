use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{LogprobBackend, RawLogprobs};
use crate::error::{Error, Result};

/// One canned echo response, keyed by the exact prompt text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub prompt: String,
    pub tokens: Vec<String>,
    pub token_logprobs: Vec<Option<f64>>,
    pub text_offset: Vec<usize>,
}

/// Offline backend answering from canned responses.
///
/// Prompts without a canned entry get a synthetic response: the prompt is
/// split into tokens that carry their leading whitespace (`"a"`, `" b"`), the
/// first token has a null logprob, and every other logprob is derived from a
/// hash of the model id, the previous token and the token. Output is a pure
/// function of the model id and the prompt.
#[derive(Debug, Clone)]
pub struct FixtureBackend {
    model_id: String,
    entries: HashMap<String, RawLogprobs>,
}

impl FixtureBackend {
    pub fn new(model_id: &str, entries: Vec<FixtureEntry>) -> Self {
        FixtureBackend {
            model_id: model_id.to_string(),
            entries: entries
                .into_iter()
                .map(|e| {
                    (
                        e.prompt,
                        RawLogprobs {
                            tokens: e.tokens,
                            token_logprobs: e.token_logprobs,
                            text_offset: e.text_offset,
                        },
                    )
                })
                .collect(),
        }
    }

    /// Reads a JSON array of [`FixtureEntry`].
    pub fn load(model_id: &str, path: impl AsRef<Path>) -> Result<Self> {
        let entries: Vec<FixtureEntry> = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        for e in &entries {
            if e.tokens.len() != e.token_logprobs.len() || e.tokens.len() != e.text_offset.len() {
                return Err(Error::Invalid(format!(
                    "fixture entry for {:?} has mismatched arrays",
                    e.prompt
                )));
            }
        }
        Ok(Self::new(model_id, entries))
    }

    /// Deterministic stand-in response: whitespace-led tokens whose logprobs
    /// depend on the model and on all preceding text.
    fn synthetic(&self, prompt: &str) -> RawLogprobs {
        let mut raw = RawLogprobs::default();
        let mut context = Sha256::new();
        context.update(self.model_id.as_bytes());
        context.update([0u8]);
        for (offset, tok) in leading_space_tokens(prompt) {
            let lp = if raw.tokens.is_empty() {
                None
            } else {
                Some(pseudo_logprob(context.clone(), tok))
            };
            raw.tokens.push(tok.to_string());
            raw.token_logprobs.push(lp);
            raw.text_offset.push(offset);
            context.update(tok.as_bytes());
        }
        raw
    }
}

/// Splits `text` into tokens of leading whitespace plus one word.
fn leading_space_tokens(text: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut in_word = false;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if in_word {
                out.push((start, &text[start..i]));
                start = i;
                in_word = false;
            }
        } else {
            in_word = true;
        }
    }
    if start < text.len() {
        out.push((start, &text[start..]));
    }
    out
}

fn pseudo_logprob(mut context: Sha256, token: &str) -> f64 {
    context.update([0xffu8]);
    context.update(token.as_bytes());
    let digest = context.finalize();
    let v = u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"));
    -0.05 - (v % 10_000) as f64 / 2_000.0
}

impl LogprobBackend for FixtureBackend {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn echo(&self, prompt: &str) -> Result<RawLogprobs> {
        Ok(self
            .entries
            .get(prompt)
            .cloned()
            .unwrap_or_else(|| self.synthetic(prompt)))
    }
}
