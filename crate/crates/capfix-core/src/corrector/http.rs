//! Chat-completion HTTP backend.
//!
//! Speaks the minimal request shape `{model, messages, temperature}` and
//! reads the reply at `choices[0].message.content`, so any compatible
//! service works. Status 429 and 5xx map to transient errors that the
//! caller's retry loop handles; other non-success statuses are refusals.

use serde_json::{json, Value};

use super::{BackendConfig, CompletionBackend, CompletionRequest, CorrectorError};

#[derive(Debug)]
pub struct HttpBackend {
    id: String,
    client: reqwest::blocking::Client,
    endpoint: String,
    model: String,
    temperature: f64,
    timeout_ms: u64,
    api_key: Option<String>,
}

impl HttpBackend {
    /// Build a backend from config. The API key, when configured, is read
    /// from the named environment variable at construction time.
    pub fn from_config(config: &BackendConfig) -> Result<Self, CorrectorError> {
        let endpoint = config.endpoint.clone().ok_or_else(|| {
            CorrectorError::BackendUnavailable("no endpoint configured".to_string())
        })?;
        let api_key = match &config.api_key_env {
            Some(var) => match std::env::var(var) {
                Ok(value) if !value.is_empty() => Some(value),
                _ => {
                    return Err(CorrectorError::BackendUnavailable(format!(
                        "environment variable {var} is not set"
                    )))
                }
            },
            None => None,
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|err| CorrectorError::BackendUnavailable(err.to_string()))?;
        Ok(HttpBackend {
            id: config.backend_id.clone(),
            client,
            endpoint,
            model: config.model_name.clone(),
            temperature: config.temperature,
            timeout_ms: config.timeout_ms,
            api_key,
        })
    }
}

impl CompletionBackend for HttpBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, CorrectorError> {
        let payload = json!({
            "model": self.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": self.temperature,
        });
        let mut builder = self.client.post(&self.endpoint).json(&payload);
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = builder.send().map_err(|err| {
            if err.is_timeout() {
                CorrectorError::Timeout(self.timeout_ms)
            } else {
                CorrectorError::BackendUnavailable(err.to_string())
            }
        })?;

        let status = response.status();
        let body = response.text().map_err(|err| {
            if err.is_timeout() {
                CorrectorError::Timeout(self.timeout_ms)
            } else {
                CorrectorError::BackendUnavailable(err.to_string())
            }
        })?;
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(CorrectorError::BackendUnavailable(format!(
                "status {status}: {}",
                snippet(&body)
            )));
        }
        if !status.is_success() {
            return Err(CorrectorError::BackendRefusal(format!(
                "status {status}: {}",
                snippet(&body)
            )));
        }

        let value: Value = serde_json::from_str(&body).map_err(|_| {
            CorrectorError::BackendRefusal("response is not JSON".to_string())
        })?;
        let content = value
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .ok_or_else(|| {
                CorrectorError::BackendRefusal(
                    "response missing choices[0].message.content".to_string(),
                )
            })?;
        if content.trim().is_empty() {
            return Err(CorrectorError::BackendRefusal(
                "response content is empty".to_string(),
            ));
        }
        Ok(content.to_string())
    }
}

fn snippet(body: &str) -> &str {
    let end = body
        .char_indices()
        .take(200)
        .last()
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(0);
    body[..end].trim()
}
