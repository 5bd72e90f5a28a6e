use std::collections::HashMap;

use super::{LogprobBackend, RawLogprobs};
use crate::error::Result;

/// Add-one smoothed unigram model over a whitespace-tokenized corpus.
///
/// A word seen `c` times among `n` corpus tokens with vocabulary size `v` has
/// probability `(c + 1) / (n + v)`, so the vocabulary sums to one. Words
/// outside the vocabulary share the unknown bucket with the add-one floor
/// `1 / (n + v)`. Scores do not depend on position or context.
#[derive(Debug, Clone)]
pub struct UnigramBackend {
    model_id: String,
    counts: HashMap<String, u64>,
    total: u64,
}

impl UnigramBackend {
    pub fn from_corpus(model_id: &str, corpus: &str) -> Self {
        let mut counts = HashMap::new();
        let mut total = 0;
        for w in corpus.split_whitespace() {
            *counts.entry(w.to_string()).or_insert(0) += 1;
            total += 1;
        }
        UnigramBackend {
            model_id: model_id.to_string(),
            counts,
            total,
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.counts.len()
    }

    fn denominator(&self) -> f64 {
        (self.total + self.counts.len() as u64) as f64
    }

    pub fn prob(&self, word: &str) -> f64 {
        let c = self.counts.get(word).copied().unwrap_or(0);
        (c + 1) as f64 / self.denominator()
    }

    pub fn logprob(&self, word: &str) -> f64 {
        self.prob(word).ln()
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }
}

/// Whitespace-delimited words with their byte offsets.
pub(crate) fn words_with_offsets(text: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s, &text[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &text[s..]));
    }
    out
}

impl LogprobBackend for UnigramBackend {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn echo(&self, prompt: &str) -> Result<RawLogprobs> {
        let mut raw = RawLogprobs::default();
        for (offset, w) in words_with_offsets(prompt) {
            raw.tokens.push(w.to_string());
            raw.token_logprobs.push(Some(self.logprob(w)));
            raw.text_offset.push(offset);
        }
        Ok(raw)
    }

    fn request_params(&self) -> serde_json::Value {
        serde_json::json!({ "unigram_tokens": self.total, "unigram_vocab": self.counts.len() })
    }
}
