use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    /// Delay before the second attempt; doubles after each further failure.
    pub base_backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 5,
            base_backoff_ms: 500,
        }
    }
}

impl RetryPolicy {
    pub fn backoff(&self, failed_attempts: u32) -> Duration {
        let factor = 1u64 << failed_attempts.saturating_sub(1).min(16);
        Duration::from_millis(self.base_backoff_ms.saturating_mul(factor))
    }
}

/// Outcome of one attempt.
pub enum Attempt<T> {
    Done(T),
    /// Throttling, 5xx, or a connection failure.
    Retry(String),
    Fatal(Error),
}

/// Runs `op` until it succeeds, fails fatally, or `max_attempts` is used up.
/// `op` receives the 1-based attempt number.
pub fn retry<T>(policy: RetryPolicy, mut op: impl FnMut(u32) -> Attempt<T>) -> Result<T> {
    let max = policy.max_attempts.max(1);
    let mut last = String::new();
    for attempt in 1..=max {
        match op(attempt) {
            Attempt::Done(v) => return Ok(v),
            Attempt::Fatal(e) => return Err(e),
            Attempt::Retry(msg) => {
                log::debug!("attempt {attempt}/{max} failed: {msg}");
                last = msg;
                if attempt < max {
                    std::thread::sleep(policy.backoff(attempt));
                }
            }
        }
    }
    Err(Error::Transport {
        attempts: max,
        message: last,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast(max_attempts: u32) -> RetryPolicy {
        RetryPolicy {
            max_attempts,
            base_backoff_ms: 1,
        }
    }

    #[test]
    fn succeeds_after_max_minus_one_failures() {
        let mut calls = 0;
        let v = retry(fast(3), |n| {
            calls += 1;
            if n < 3 {
                Attempt::Retry(format!("boom {n}"))
            } else {
                Attempt::Done(42)
            }
        })
        .unwrap();
        assert_eq!((v, calls), (42, 3));
    }

    #[test]
    fn gives_up_after_max_attempts() {
        let mut calls = 0;
        let err = retry(fast(3), |_| -> Attempt<()> {
            calls += 1;
            Attempt::Retry("nope".into())
        })
        .unwrap_err();
        assert_eq!(calls, 3);
        assert!(matches!(err, Error::Transport { attempts: 3, .. }));
    }

    #[test]
    fn fatal_stops_immediately() {
        let mut calls = 0;
        let err = retry(fast(5), |_| -> Attempt<()> {
            calls += 1;
            Attempt::Fatal(Error::NoLogprobs("x".into()))
        })
        .unwrap_err();
        assert_eq!(calls, 1);
        assert!(matches!(err, Error::NoLogprobs(_)));
    }

    #[test]
    fn backoff_doubles() {
        let p = RetryPolicy {
            max_attempts: 4,
            base_backoff_ms: 100,
        };
        assert_eq!(p.backoff(1), Duration::from_millis(100));
        assert_eq!(p.backoff(2), Duration::from_millis(200));
        assert_eq!(p.backoff(3), Duration::from_millis(400));
    }
}
