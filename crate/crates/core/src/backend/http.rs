use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

use super::retry::{retry, Attempt, RetryPolicy};
use super::{LogprobBackend, RawLogprobs};
use crate::error::{Error, Result};

/// Environment variable holding the bearer token for the endpoint.
pub const API_KEY_ENV: &str = "GPTSCORE_API_KEY";

/// Request body asking the endpoint to echo `prompt` with logprobs and
/// generate nothing.
pub fn completion_request(model: &str, prompt: &str) -> serde_json::Value {
    json!({
        "model": model,
        "prompt": prompt,
        "max_tokens": 0,
        "echo": true,
        "logprobs": 1,
        "temperature": 0,
    })
}

#[derive(Deserialize)]
struct CompletionResponse {
    #[serde(default)]
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    #[serde(default)]
    logprobs: Option<ChoiceLogprobs>,
}

#[derive(Deserialize)]
struct ChoiceLogprobs {
    tokens: Vec<String>,
    token_logprobs: Vec<Option<f64>>,
    text_offset: Vec<usize>,
}

struct Gate {
    in_flight: Mutex<usize>,
    freed: Condvar,
    limit: usize,
}

impl Gate {
    fn acquire(&self) -> GateGuard<'_> {
        let mut n = self.in_flight.lock().expect("gate lock");
        while *n >= self.limit {
            n = self.freed.wait(n).expect("gate lock");
        }
        *n += 1;
        GateGuard(self)
    }
}

struct GateGuard<'a>(&'a Gate);

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        *self.0.in_flight.lock().expect("gate lock") -= 1;
        self.0.freed.notify_one();
    }
}

/// Client for an OpenAI-compatible `/v1/completions` endpoint.
pub struct HttpBackend {
    url: String,
    model_id: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
    retry: RetryPolicy,
    gate: Gate,
}

impl HttpBackend {
    pub fn new(
        endpoint_url: impl Into<String>,
        model_id: &str,
        max_parallel: usize,
        retry: RetryPolicy,
    ) -> Result<Self> {
        let base: String = endpoint_url.into();
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| Error::Transport {
                attempts: 0,
                message: e.to_string(),
            })?;
        Ok(HttpBackend {
            url: format!("{}/v1/completions", base.trim_end_matches('/')),
            model_id: model_id.to_string(),
            api_key: std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()),
            client,
            retry,
            gate: Gate {
                in_flight: Mutex::new(0),
                freed: Condvar::new(),
                limit: max_parallel.max(1),
            },
        })
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    fn attempt(&self, body: &serde_json::Value) -> Attempt<RawLogprobs> {
        let _slot = self.gate.acquire();
        let mut req = self.client.post(&self.url).json(body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = match req.send() {
            Ok(r) => r,
            Err(e) => return Attempt::Retry(e.to_string()),
        };
        let status = resp.status();
        if status.as_u16() == 429 || status.is_server_error() {
            return Attempt::Retry(format!("HTTP {status}"));
        }
        let text = match resp.text() {
            Ok(t) => t,
            Err(e) => return Attempt::Retry(e.to_string()),
        };
        if !status.is_success() {
            return Attempt::Fatal(Error::Transport {
                attempts: 1,
                message: format!("HTTP {status}: {}", truncate(&text, 300)),
            });
        }
        match parse_response(&text) {
            Ok(raw) => Attempt::Done(raw),
            Err(e) => Attempt::Fatal(e),
        }
    }
}

fn truncate(s: &str, n: usize) -> &str {
    match s.char_indices().nth(n) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

/// Extracts `choices[0].logprobs` from a completions response body.
pub(crate) fn parse_response(body: &str) -> Result<RawLogprobs> {
    let resp: CompletionResponse = serde_json::from_str(body)
        .map_err(|e| Error::NoLogprobs(format!("unparseable response: {e}")))?;
    let lp = resp
        .choices
        .into_iter()
        .next()
        .and_then(|c| c.logprobs)
        .ok_or_else(|| Error::NoLogprobs("choices[0].logprobs missing".into()))?;
    let raw = RawLogprobs {
        tokens: lp.tokens,
        token_logprobs: lp.token_logprobs,
        text_offset: lp.text_offset,
    };
    raw.validate()?;
    Ok(raw)
}

impl LogprobBackend for HttpBackend {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn echo(&self, prompt: &str) -> Result<RawLogprobs> {
        let body = completion_request(&self.model_id, prompt);
        retry(self.retry, |_| self.attempt(&body))
    }

    fn request_params(&self) -> serde_json::Value {
        let mut body = completion_request(&self.model_id, "");
        if let Some(obj) = body.as_object_mut() {
            obj.remove("prompt");
        }
        body
    }
}
