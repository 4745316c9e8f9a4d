//! Chat-completions transport for judge queries, with retry and backoff.

use std::time::Duration;

use super::{EndpointConfig, GenerationConfig};
use crate::error::{Error, Result};

fn retryable(status: u16) -> bool {
    status == 429 || (500..600).contains(&status)
}

fn backoff_delay(base: Duration, attempt: u32) -> Duration {
    let doubled = base.saturating_mul(1u32 << attempt.min(16));
    // jitter widens the delay by up to 25%; it never shortens it
    doubled.mul_f64(1.0 + 0.25 * rand::random::<f64>())
}

fn bearer_token(endpoint: &EndpointConfig) -> Result<Option<String>> {
    match &endpoint.api_key_env {
        None => Ok(None),
        Some(var) => match std::env::var(var) {
            Ok(key) => Ok(Some(key)),
            Err(_) => Err(Error::InvalidParam(format!(
                "api key environment variable {var} is not set"
            ))),
        },
    }
}

/// Sends one chat-completion request carrying the generation parameters
/// and returns the assistant message text. Transient failures (transport
/// errors, 429, 5xx) are retried up to `max_retries` times with
/// exponential backoff; other statuses fail immediately.
pub fn query_judge(
    prompt: &str,
    gen: &GenerationConfig,
    endpoint: &EndpointConfig,
) -> Result<String> {
    endpoint.validate()?;
    let token = bearer_token(endpoint)?;
    let url = format!(
        "{}/v1/chat/completions",
        endpoint.base_url.trim_end_matches('/')
    );
    let body = serde_json::json!({
        "model": endpoint.model_name,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": gen.temperature,
        "top_p": gen.top_p,
        "max_tokens": gen.max_new_tokens,
    })
    .to_string();

    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(endpoint.timeout))
        .http_status_as_error(false)
        .build()
        .into();

    let attempts = endpoint.max_retries + 1;
    let mut last_failure = String::new();
    for attempt in 0..attempts {
        if attempt > 0 {
            std::thread::sleep(backoff_delay(endpoint.backoff_base, attempt - 1));
        }
        let mut request = agent.post(&url).content_type("application/json");
        if let Some(token) = &token {
            request = request.header("authorization", format!("Bearer {token}"));
        }
        match request.send(body.as_str()) {
            Ok(mut response) => {
                let status = response.status().as_u16();
                let text = response
                    .body_mut()
                    .read_to_string()
                    .map_err(|e| Error::Transport(format!("reading body from {url}: {e}")))?;
                if (200..300).contains(&status) {
                    return extract_content(&text);
                }
                let excerpt: String = text.chars().take(200).collect();
                if !retryable(status) {
                    return Err(Error::Status { status, excerpt });
                }
                last_failure = format!("status {status}: {excerpt}");
            }
            Err(e) => last_failure = e.to_string(),
        }
    }
    Err(Error::Transport(format!(
        "{url}: giving up after {attempts} attempts; last failure: {last_failure}"
    )))
}

fn extract_content(body: &str) -> Result<String> {
    let value: serde_json::Value = serde_json::from_str(body)
        .map_err(|e| Error::Transport(format!("malformed completion response: {e}")))?;
    value["choices"][0]["message"]["content"]
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| {
            Error::Transport("completion response lacks choices[0].message.content".into())
        })
}
