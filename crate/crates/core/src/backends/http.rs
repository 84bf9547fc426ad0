//! Remote masked-LM adapter and shared HTTP plumbing.
//!
//! The fill-mask adapter speaks the common inference-server format: POST
//! `{"inputs": text, "parameters": {"top_k": n}}`, answered by a list of
//! `{"token_str", "score"}`. Subword pieces (`##x`), empty strings, and
//! fillers without a letter or digit are dropped, so only whole words reach
//! the pipeline.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{
    rank_predictions, BackendDescriptor, BackendError, BackendKind, BackendResult,
    MaskedPredictor, MaskedSentence, Prediction,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub initial_delay_ms: u64,
    pub max_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 4,
            initial_delay_ms: 250,
            max_delay_ms: 8000,
        }
    }
}

impl RetryPolicy {
    /// Run `call`, retrying retryable errors with exponential backoff.
    pub fn run<T>(&self, mut call: impl FnMut() -> BackendResult<T>) -> BackendResult<T> {
        let mut delay = self.initial_delay_ms;
        let mut attempt = 1;
        loop {
            match call() {
                Err(e) if e.retryable && attempt < self.attempts.max(1) => {
                    log::debug!("retrying after {delay} ms: {e}");
                    std::thread::sleep(Duration::from_millis(delay));
                    delay = (delay * 2).min(self.max_delay_ms);
                    attempt += 1;
                }
                other => return other,
            }
        }
    }
}

pub(crate) fn agent(timeout: Duration) -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .http_status_as_error(false)
        .build()
        .into()
}

pub(crate) fn classify(err: ureq::Error) -> BackendError {
    match err {
        ureq::Error::Timeout(_) => BackendError::timeout(err.to_string()),
        ureq::Error::Io(_)
        | ureq::Error::HostNotFound
        | ureq::Error::ConnectionFailed
        | ureq::Error::BodyStalled => BackendError::unavailable(err.to_string()),
        _ => BackendError::protocol(err.to_string()),
    }
}

pub(crate) fn check_status(status: u16, url: &str) -> BackendResult<()> {
    match status {
        200..=299 => Ok(()),
        429 | 500..=599 => Err(BackendError::unavailable(format!("{url} answered {status}"))),
        _ => Err(BackendError::protocol(format!("{url} answered {status}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FillMaskConfig {
    pub url: String,
    pub model_id: String,
    /// Mask marker the remote model expects.
    #[serde(default = "default_mask")]
    pub mask_token: String,
    #[serde(default)]
    pub bearer_token: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default)]
    pub retry: RetryPolicy,
}

fn default_mask() -> String {
    MaskedSentence::MASK.to_string()
}

fn default_timeout() -> u64 {
    30
}

pub struct HttpFillMask {
    config: FillMaskConfig,
    agent: ureq::Agent,
}

#[derive(Deserialize)]
struct Filler {
    token_str: String,
    score: f64,
}

impl HttpFillMask {
    pub fn new(config: FillMaskConfig) -> Self {
        let agent = agent(Duration::from_secs(config.timeout_secs));
        Self { config, agent }
    }

    fn request(&self, text: &str, top_k: usize) -> BackendResult<Vec<Filler>> {
        let body = serde_json::json!({"inputs": text, "parameters": {"top_k": top_k}});
        let mut req = self.agent.post(&self.config.url);
        if let Some(token) = &self.config.bearer_token {
            req = req.header("Authorization", &format!("Bearer {token}"));
        }
        let mut resp = req.send_json(&body).map_err(classify)?;
        check_status(resp.status().as_u16(), &self.config.url)?;
        resp.body_mut()
            .read_json::<Vec<Filler>>()
            .map_err(|e| BackendError::protocol(format!("unexpected fill-mask reply: {e}")))
    }
}

/// Whole-word fillers only.
pub fn is_whole_word(token: &str) -> bool {
    let t = token.trim();
    !t.is_empty()
        && !t.starts_with("##")
        && !t.contains(char::is_whitespace)
        && t.chars().any(char::is_alphanumeric)
}

impl MaskedPredictor for HttpFillMask {
    fn descriptor(&self) -> BackendDescriptor {
        BackendDescriptor::new(
            BackendKind::MaskedPredictor,
            &self.config.model_id,
            "fill-mask/whole-words",
        )
    }

    fn predict_fillers(&self, masked: &MaskedSentence, k: usize) -> BackendResult<Vec<Prediction>> {
        if k == 0 {
            return Err(BackendError::invalid("k must be at least 1"));
        }
        let text = masked.render_text(&self.config.mask_token);
        let top_k = k * 2 + 10;
        let fillers = self.config.retry.run(|| self.request(&text, top_k))?;
        let mut seen = std::collections::HashSet::new();
        let raw = fillers
            .into_iter()
            .filter(|f| is_whole_word(&f.token_str) && f.score > 0.0)
            .map(|f| (f.token_str.trim().to_string(), f.score.min(1.0)))
            .filter(|(t, _)| seen.insert(t.to_lowercase()))
            .collect();
        Ok(rank_predictions(raw, k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    #[test]
    fn subword_pieces_are_rejected() {
        assert!(is_whole_word("cells"));
        assert!(!is_whole_word("##s"));
        assert!(!is_whole_word(","));
        assert!(!is_whole_word(""));
    }

    #[test]
    fn retry_stops_on_success_or_fatal_error() {
        let policy = RetryPolicy {
            attempts: 5,
            initial_delay_ms: 1,
            max_delay_ms: 2,
        };
        let calls = Cell::new(0);
        let r = policy.run(|| {
            calls.set(calls.get() + 1);
            if calls.get() < 3 {
                Err(BackendError::timeout("slow"))
            } else {
                Ok(7)
            }
        });
        assert_eq!((r, calls.get()), (Ok(7), 3));

        calls.set(0);
        let r: BackendResult<()> = policy.run(|| {
            calls.set(calls.get() + 1);
            Err(BackendError::protocol("bad"))
        });
        assert!(r.is_err());
        assert_eq!(calls.get(), 1);
    }

    #[test]
    fn unreachable_server_is_retryable() {
        let model = HttpFillMask::new(FillMaskConfig {
            url: "http://127.0.0.1:9/fill".into(),
            model_id: "m".into(),
            mask_token: "[MASK]".into(),
            bearer_token: None,
            timeout_secs: 2,
            retry: RetryPolicy {
                attempts: 1,
                ..Default::default()
            },
        });
        let ms = MaskedSentence {
            prefix: vec![],
            suffix: vec![".".into()],
            sentence_id: 0,
            span: crate::text::Span::new(0, 1),
        };
        let err = model.predict_fillers(&ms, 3).unwrap_err();
        assert!(err.retryable, "{err:?}");
    }
}
