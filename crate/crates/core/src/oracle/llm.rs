//! Chat-completion oracle with two-step prompt chaining.

use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use serde_json::{json, Value};

use super::prompt::{render_first_prompt, render_second_prompt};
use super::replay::{interpret_completion, ReplayCache};
use super::{DecompositionOracle, OracleFailure, OracleRequest, OracleResponse};

pub const API_KEY_ENV: &str = "CHATHTN_LLM_API_KEY";

#[derive(Debug, Clone, PartialEq)]
pub struct LlmConfig {
    pub endpoint: String,
    pub model: String,
    pub retries: u32,
    pub backoff_ms: u64,
    /// Upper bound on prompt size, in tokens estimated as characters / 4.
    pub token_budget: usize,
    pub max_completion_tokens: u32,
    pub temperature: f64,
    pub max_in_flight: usize,
    pub timeout_secs: u64,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-4-turbo".into(),
            retries: 3,
            backoff_ms: 500,
            token_budget: 100_000,
            max_completion_tokens: 1024,
            temperature: 0.0,
            max_in_flight: 4,
            timeout_secs: 120,
        }
    }
}

impl LlmConfig {
    /// Reads flat `key=value` lines over the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut cfg = LlmConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value", i + 1))?;
            let (k, v) = (k.trim(), v.trim());
            let bad = |e: &dyn std::fmt::Display| format!("line {}: {k}: {e}", i + 1);
            match k {
                "endpoint" => cfg.endpoint = v.to_string(),
                "model" => cfg.model = v.to_string(),
                "retries" => cfg.retries = v.parse().map_err(|e| bad(&e))?,
                "backoff_ms" => cfg.backoff_ms = v.parse().map_err(|e| bad(&e))?,
                "token_budget" => cfg.token_budget = v.parse().map_err(|e| bad(&e))?,
                "max_completion_tokens" => cfg.max_completion_tokens = v.parse().map_err(|e| bad(&e))?,
                "temperature" => cfg.temperature = v.parse().map_err(|e| bad(&e))?,
                "max_in_flight" => cfg.max_in_flight = v.parse().map_err(|e| bad(&e))?,
                "timeout_secs" => cfg.timeout_secs = v.parse().map_err(|e| bad(&e))?,
                _ => return Err(format!("line {}: unknown key `{k}`", i + 1)),
            }
        }
        if cfg.max_in_flight == 0 {
            return Err("max_in_flight must be at least 1".into());
        }
        Ok(cfg)
    }
}

/// Sends one user prompt and returns the completion text.
pub trait ChatTransport: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, String>;
}

/// OpenAI-compatible chat-completions endpoint over HTTPS.
pub struct HttpTransport {
    agent: ureq::Agent,
    cfg: LlmConfig,
    api_key: String,
}

impl HttpTransport {
    pub fn new(cfg: LlmConfig, api_key: String) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(cfg.timeout_secs)))
            .build();
        HttpTransport {
            agent: ureq::Agent::new_with_config(config),
            cfg,
            api_key,
        }
    }
}

impl ChatTransport for HttpTransport {
    fn complete(&self, prompt: &str) -> Result<String, String> {
        let body = json!({
            "model": self.cfg.model,
            "temperature": self.cfg.temperature,
            "max_tokens": self.cfg.max_completion_tokens,
            "messages": [{"role": "user", "content": prompt}],
        });
        let value: Value = self
            .agent
            .post(&self.cfg.endpoint)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(body)
            .map_err(|e| e.to_string())?
            .body_mut()
            .read_json()
            .map_err(|e| e.to_string())?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| format!("unexpected response shape: {value}"))
    }
}

/// Counting semaphore bounding concurrent requests.
struct InFlight {
    count: Mutex<usize>,
    freed: Condvar,
    limit: usize,
}

impl InFlight {
    fn acquire(&self) -> InFlightGuard<'_> {
        let mut n = self.count.lock().expect("in-flight lock");
        while *n >= self.limit {
            n = self.freed.wait(n).expect("in-flight lock");
        }
        *n += 1;
        InFlightGuard(self)
    }
}

struct InFlightGuard<'a>(&'a InFlight);

impl Drop for InFlightGuard<'_> {
    fn drop(&mut self) {
        *self.0.count.lock().expect("in-flight lock") -= 1;
        self.0.freed.notify_one();
    }
}

/// Two chained completions per request: a first proposal, then a checked
/// final list given the first answer. The final completion is parsed and,
/// when a cache is attached, recorded for offline replay.
pub struct LlmOracle {
    transport: Option<Box<dyn ChatTransport>>,
    cfg: LlmConfig,
    cache: Option<Arc<ReplayCache>>,
    in_flight: InFlight,
}

impl LlmOracle {
    pub fn with_transport(transport: Box<dyn ChatTransport>, cfg: LlmConfig, cache: Option<Arc<ReplayCache>>) -> Self {
        let limit = cfg.max_in_flight.max(1);
        LlmOracle {
            transport: Some(transport),
            cfg,
            cache,
            in_flight: InFlight {
                count: Mutex::new(0),
                freed: Condvar::new(),
                limit,
            },
        }
    }

    /// HTTP oracle using the key in the environment. Without a key every
    /// request fails with a transport error and nothing is sent.
    pub fn from_env(cfg: LlmConfig, cache: Option<Arc<ReplayCache>>) -> Self {
        let mut o = LlmOracle::with_transport(Box::new(NoTransport), cfg.clone(), cache);
        o.transport = std::env::var(API_KEY_ENV)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .map(|k| Box::new(HttpTransport::new(cfg, k)) as Box<dyn ChatTransport>);
        o
    }

    fn check_budget(&self, prompt: &str) -> Result<(), OracleFailure> {
        let estimate = prompt.chars().count().div_ceil(4);
        if estimate > self.cfg.token_budget {
            return Err(OracleFailure::Malformed {
                line: 0,
                reason: format!(
                    "request of about {estimate} tokens exceeds the budget of {}",
                    self.cfg.token_budget
                ),
            });
        }
        Ok(())
    }

    fn call(&self, transport: &dyn ChatTransport, prompt: &str) -> Result<String, OracleFailure> {
        let mut last = String::new();
        for attempt in 0..=self.cfg.retries {
            if attempt > 0 {
                let wait = self.cfg.backoff_ms.saturating_mul(1 << (attempt - 1).min(16));
                std::thread::sleep(Duration::from_millis(wait));
            }
            match transport.complete(prompt) {
                Ok(text) => return Ok(text),
                Err(e) => last = e,
            }
        }
        Err(OracleFailure::Transport(format!(
            "{} attempts failed; last error: {last}",
            self.cfg.retries + 1
        )))
    }
}

struct NoTransport;

impl ChatTransport for NoTransport {
    fn complete(&self, _: &str) -> Result<String, String> {
        Err("no transport".into())
    }
}

impl DecompositionOracle for LlmOracle {
    fn propose(&self, req: &OracleRequest) -> Result<OracleResponse, OracleFailure> {
        let Some(transport) = self.transport.as_deref() else {
            return Err(OracleFailure::Transport(format!("{API_KEY_ENV} is not set")));
        };
        let first = render_first_prompt(req);
        self.check_budget(&first)?;
        let _slot = self.in_flight.acquire();
        let c1 = self.call(transport, &first)?;
        let second = render_second_prompt(req, &c1);
        self.check_budget(&second)?;
        let c2 = self.call(transport, &second)?;
        if let Some(cache) = &self.cache {
            // a failed cache write must not change the planning outcome
            let _ = cache.store(req, &c2);
        }
        let steps = interpret_completion(&c2)?;
        Ok(OracleResponse {
            steps,
            raw_text: c2.clone(),
            transcript: vec![(first, c1), (second, c2)],
        })
    }

    fn is_deterministic(&self) -> bool {
        false
    }
}
