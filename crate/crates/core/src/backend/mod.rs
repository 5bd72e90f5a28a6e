//! Sources of per-token log-probabilities for a prompt.
//!
//! Every backend returns the echoed prompt as parallel arrays of token
//! text, natural-log probability, and byte offset. [`token_logprobs`] then
//! keeps the tokens that belong to the target span of a [`RenderedPrompt`].

mod cache;
mod fixture;
mod http;
mod retry;
mod unigram;

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use cache::{cache_key, CacheEntry, CacheStats, CachedBackend, DirStats};
pub use fixture::{FixtureBackend, FixtureEntry};
pub use http::{completion_request, HttpBackend, API_KEY_ENV};
pub use retry::{retry, Attempt, RetryPolicy};
pub use unigram::UnigramBackend;

use crate::error::{Error, Result};
use crate::prompt::RenderedPrompt;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenScore {
    pub token: String,
    /// Natural log.
    pub logprob: f64,
    /// Byte offset of the token start within the full prompt.
    pub offset: usize,
}

/// Echoed prompt as returned by a completions endpoint.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawLogprobs {
    pub tokens: Vec<String>,
    /// The first entry is usually `null`: nothing conditions the first token.
    pub token_logprobs: Vec<Option<f64>>,
    pub text_offset: Vec<usize>,
}

impl RawLogprobs {
    pub fn validate(&self) -> Result<()> {
        let n = self.tokens.len();
        if self.token_logprobs.len() != n || self.text_offset.len() != n {
            return Err(Error::NoLogprobs(format!(
                "array lengths differ: tokens {n}, token_logprobs {}, text_offset {}",
                self.token_logprobs.len(),
                self.text_offset.len()
            )));
        }
        if self.text_offset.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::NoLogprobs(
                "text_offset is not strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

pub trait LogprobBackend: Send + Sync {
    fn model_id(&self) -> &str;

    /// Per-token logprobs of `prompt` itself; nothing is generated.
    fn echo(&self, prompt: &str) -> Result<RawLogprobs>;

    /// Request parameters that change the response; part of the cache key.
    fn request_params(&self) -> serde_json::Value {
        serde_json::Value::Null
    }

    fn cache_stats(&self) -> Option<CacheStats> {
        None
    }
}

impl<B: LogprobBackend + ?Sized> LogprobBackend for Arc<B> {
    fn model_id(&self) -> &str {
        (**self).model_id()
    }

    fn echo(&self, prompt: &str) -> Result<RawLogprobs> {
        (**self).echo(prompt)
    }

    fn request_params(&self) -> serde_json::Value {
        (**self).request_params()
    }

    fn cache_stats(&self) -> Option<CacheStats> {
        (**self).cache_stats()
    }
}

/// Keeps the tokens of `raw` that start at or after byte `boundary` of
/// `full`.
///
/// A token that starts before the boundary and ends after it straddles the
/// boundary. If its pre-boundary part is pure whitespace (a BPE token like
/// `" S"` after a prefix ending in a space) it is counted as a target token;
/// any other straddle is an error.
pub fn slice_target(raw: &RawLogprobs, full: &str, boundary: usize) -> Result<Vec<TokenScore>> {
    raw.validate()?;
    let mut out = Vec::new();
    for ((token, lp), &offset) in raw
        .tokens
        .iter()
        .zip(&raw.token_logprobs)
        .zip(&raw.text_offset)
    {
        if offset < boundary {
            let end = offset + token.len();
            if end <= boundary {
                continue;
            }
            let lead = full.get(offset..boundary).unwrap_or_default();
            if lead.is_empty() || !lead.chars().all(char::is_whitespace) {
                return Err(Error::Straddle { offset, boundary });
            }
        }
        let logprob = lp.ok_or_else(|| {
            Error::NoLogprobs(format!(
                "null logprob for target token {token:?} at byte {offset}"
            ))
        })?;
        if !logprob.is_finite() {
            return Err(Error::NonFinite {
                token: token.clone(),
            });
        }
        out.push(TokenScore {
            token: token.clone(),
            logprob,
            offset,
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyTarget { boundary });
    }
    Ok(out)
}

/// Log-probabilities of the target tokens of `prompt`.
pub fn token_logprobs(
    backend: &dyn LogprobBackend,
    prompt: &RenderedPrompt,
) -> Result<Vec<TokenScore>> {
    if prompt.target.is_empty() {
        return Err(Error::Invalid("prompt target is empty".into()));
    }
    let full = prompt.full();
    let raw = backend.echo(&full)?;
    slice_target(&raw, &full, prompt.prefix.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Http,
    Fixture,
    Unigram,
}

impl std::str::FromStr for BackendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "http" => Ok(BackendKind::Http),
            "fixture" => Ok(BackendKind::Fixture),
            "unigram" => Ok(BackendKind::Unigram),
            _ => Err(Error::Usage(format!(
                "unknown backend kind {s:?} (http, fixture, unigram)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub model_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint_url: Option<String>,
    #[serde(default = "default_parallel")]
    pub max_parallel: usize,
    #[serde(default)]
    pub retry: RetryPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
    /// Canned responses for the fixture backend.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture_path: Option<PathBuf>,
    /// Corpus file for the unigram backend.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_path: Option<PathBuf>,
}

fn default_parallel() -> usize {
    4
}

impl BackendConfig {
    pub fn new(kind: BackendKind, model_id: impl Into<String>) -> Self {
        BackendConfig {
            kind,
            model_id: model_id.into(),
            endpoint_url: None,
            max_parallel: default_parallel(),
            retry: RetryPolicy::default(),
            cache_dir: None,
            fixture_path: None,
            corpus_path: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_parallel == 0 {
            return Err(Error::Usage("max_parallel must be at least 1".into()));
        }
        if self.retry.max_attempts == 0 {
            return Err(Error::Usage("retry.max_attempts must be at least 1".into()));
        }
        match self.kind {
            BackendKind::Http if self.endpoint_url.is_none() => {
                Err(Error::Usage("http backend needs endpoint_url".into()))
            }
            BackendKind::Unigram if self.corpus_path.is_none() => {
                Err(Error::Usage("unigram backend needs corpus_path".into()))
            }
            _ => Ok(()),
        }
    }

    /// Instantiates the backend, wrapped in a disk cache when `cache_dir` is set.
    pub fn build(&self) -> Result<Arc<dyn LogprobBackend>> {
        self.validate()?;
        let inner: Arc<dyn LogprobBackend> = match self.kind {
            BackendKind::Http => Arc::new(HttpBackend::new(
                self.endpoint_url.clone().unwrap_or_default(),
                &self.model_id,
                self.max_parallel,
                self.retry,
            )?),
            BackendKind::Fixture => Arc::new(match &self.fixture_path {
                Some(p) => FixtureBackend::load(&self.model_id, p)?,
                None => FixtureBackend::new(&self.model_id, Vec::new()),
            }),
            BackendKind::Unigram => {
                let path = self.corpus_path.as_ref().expect("validated");
                let corpus = std::fs::read_to_string(path)?;
                Arc::new(UnigramBackend::from_corpus(&self.model_id, &corpus))
            }
        };
        Ok(match &self.cache_dir {
            Some(dir) => Arc::new(CachedBackend::new(inner, dir)?),
            None => inner,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(tokens: &[&str], lps: &[Option<f64>], offs: &[usize]) -> RawLogprobs {
        RawLogprobs {
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
            token_logprobs: lps.to_vec(),
            text_offset: offs.to_vec(),
        }
    }

    #[test]
    fn keeps_tokens_from_boundary() {
        let full = "abc defghi jk lm";
        let r = raw(
            &["abc ", "defghi", " jk", " lm"],
            &[None, Some(-1.0), Some(-2.0), Some(-3.0)],
            &[0, 4, 10, 13],
        );
        let got = slice_target(&r, full, 10).unwrap();
        assert_eq!(
            got.iter().map(|t| t.offset).collect::<Vec<_>>(),
            vec![10, 13]
        );
        assert_eq!(got[0].logprob, -2.0);
    }

    #[test]
    fn whitespace_straddle_belongs_to_target() {
        let full = "T. Tl;dr S.";
        let r = raw(
            &["T.", " Tl;dr", " S."],
            &[None, Some(-1.0), Some(-0.5)],
            &[0, 2, 8],
        );
        let got = slice_target(&r, full, 9).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].token, " S.");
    }

    #[test]
    fn text_straddle_is_error() {
        let full = "abcdef";
        let r = raw(&["abc", "def"], &[None, Some(-1.0)], &[0, 3]);
        assert!(matches!(
            slice_target(&r, full, 4),
            Err(Error::Straddle {
                offset: 3,
                boundary: 4
            })
        ));
    }

    #[test]
    fn empty_target_and_bad_payloads() {
        let full = "abc def";
        let r = raw(&["abc", " def"], &[None, Some(-1.0)], &[0, 3]);
        assert!(matches!(
            slice_target(&r, full, 7),
            Err(Error::EmptyTarget { .. })
        ));

        let r = raw(&["abc", " def"], &[None, None], &[0, 3]);
        assert!(matches!(
            slice_target(&r, full, 3),
            Err(Error::NoLogprobs(_))
        ));

        let r = raw(&["abc", " def"], &[None, Some(f64::NAN)], &[0, 3]);
        assert!(matches!(
            slice_target(&r, full, 3),
            Err(Error::NonFinite { .. })
        ));

        let r = raw(&["abc", " def"], &[None], &[0, 3]);
        assert!(slice_target(&r, full, 3).is_err());

        let r = raw(&["abc", " def"], &[None, Some(-1.0)], &[3, 3]);
        assert!(slice_target(&r, full, 3).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = BackendConfig::new(BackendKind::Http, "m");
        assert!(cfg.validate().is_err());
        cfg.endpoint_url = Some("http://127.0.0.1:1".into());
        cfg.validate().unwrap();
        cfg.max_parallel = 0;
        assert!(cfg.validate().is_err());
        let cfg = BackendConfig::new(BackendKind::Unigram, "m");
        assert!(cfg.validate().is_err());
    }
}
