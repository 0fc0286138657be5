//! Generic JSON-over-HTTP chat-completion client.
//!
//! The wire contract is vendor-neutral: POST `{model, temperature, messages}`
//! with a bearer credential, read `choices[0].message.content`, and extract
//! the fenced JSON payload. A response that fails payload extraction gets
//! one corrective re-ask before the call fails with a schema error.

use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use serde_json::{json, Value};

use super::backend::{
    extract_json_payload, BackendRequest, BackendResponse, Message, OracleError, ReasoningBackend,
};

#[derive(Debug, Clone)]
pub struct HttpBackendConfig {
    pub url: String,
    pub model: String,
    pub temperature: f64,
    pub credential: Option<String>,
    pub timeout: Duration,
    /// Additional attempts after a transport failure.
    pub transport_retries: u32,
    /// Bounded concurrent in-flight requests.
    pub max_in_flight: usize,
}

impl Default for HttpBackendConfig {
    fn default() -> Self {
        HttpBackendConfig {
            url: String::new(),
            model: "default".into(),
            temperature: 0.2,
            credential: None,
            timeout: Duration::from_secs(30),
            transport_retries: 2,
            max_in_flight: 4,
        }
    }
}

impl HttpBackendConfig {
    /// Read endpoint settings from the environment:
    /// `EVOPOC_BACKEND_URL`, `EVOPOC_BACKEND_MODEL`,
    /// `EVOPOC_BACKEND_TEMPERATURE`, and the credential variable named by
    /// `credential_env`.
    pub fn from_env(credential_env: &str) -> Result<Self, OracleError> {
        let url = std::env::var("EVOPOC_BACKEND_URL")
            .map_err(|_| OracleError::NotConfigured("EVOPOC_BACKEND_URL unset".into()))?;
        let mut config = HttpBackendConfig {
            url,
            ..HttpBackendConfig::default()
        };
        if let Ok(model) = std::env::var("EVOPOC_BACKEND_MODEL") {
            config.model = model;
        }
        if let Ok(t) = std::env::var("EVOPOC_BACKEND_TEMPERATURE") {
            config.temperature = t
                .parse()
                .map_err(|_| OracleError::NotConfigured("bad temperature".into()))?;
        }
        config.credential = std::env::var(credential_env).ok();
        Ok(config)
    }
}

/// Counting semaphore bounding in-flight requests.
#[derive(Debug)]
struct Gate {
    slots: Mutex<usize>,
    cond: Condvar,
}

impl Gate {
    fn new(slots: usize) -> Self {
        Gate {
            slots: Mutex::new(slots.max(1)),
            cond: Condvar::new(),
        }
    }

    fn acquire(&self) {
        let mut slots = self.slots.lock().expect("gate lock");
        while *slots == 0 {
            slots = self.cond.wait(slots).expect("gate wait");
        }
        *slots -= 1;
    }

    fn release(&self) {
        let mut slots = self.slots.lock().expect("gate lock");
        *slots += 1;
        self.cond.notify_one();
    }
}

pub struct HttpBackend {
    config: HttpBackendConfig,
    client: reqwest::blocking::Client,
    gate: Arc<Gate>,
}

impl HttpBackend {
    pub fn new(config: HttpBackendConfig) -> Result<Self, OracleError> {
        if config.url.is_empty() {
            return Err(OracleError::NotConfigured("empty endpoint URL".into()));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| OracleError::Transport(e.to_string()))?;
        let gate = Arc::new(Gate::new(config.max_in_flight));
        Ok(HttpBackend {
            config,
            client,
            gate,
        })
    }

    fn round_trip(&self, messages: &[Message]) -> Result<String, OracleError> {
        let body = json!({
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": messages,
        });
        let mut last_err = OracleError::Transport("no attempt made".into());
        for _ in 0..=self.config.transport_retries {
            let mut request = self.client.post(&self.config.url).json(&body);
            if let Some(credential) = &self.config.credential {
                request = request.bearer_auth(credential);
            }
            self.gate.acquire();
            let sent = request.send();
            self.gate.release();
            match sent {
                Ok(response) => {
                    let status = response.status();
                    let text = response
                        .text()
                        .map_err(|e| OracleError::Transport(e.to_string()))?;
                    if !status.is_success() {
                        last_err = OracleError::Transport(format!("HTTP {status}: {text}"));
                        continue;
                    }
                    let value: Value = serde_json::from_str(&text)
                        .map_err(|e| OracleError::Schema(format!("response envelope: {e}")))?;
                    let content = value["choices"][0]["message"]["content"]
                        .as_str()
                        .ok_or_else(|| {
                            OracleError::Schema("missing choices[0].message.content".into())
                        })?;
                    return Ok(content.to_string());
                }
                Err(e) if e.is_timeout() => last_err = OracleError::Timeout,
                Err(e) => last_err = OracleError::Transport(e.to_string()),
            }
        }
        Err(last_err)
    }
}

impl ReasoningBackend for HttpBackend {
    fn chat(&mut self, request: &BackendRequest) -> Result<BackendResponse, OracleError> {
        let text = self.round_trip(&request.messages)?;
        match extract_json_payload(&text) {
            Ok(payload) => Ok(BackendResponse { text, payload }),
            Err(_) => {
                // one corrective re-ask, then fail on schema
                let mut messages = request.messages.clone();
                messages.push(Message::user(
                    "The previous reply had no parseable JSON payload. \
                     Respond again with only a fenced ```json block.",
                ));
                let text = self.round_trip(&messages)?;
                let payload = extract_json_payload(&text)?;
                Ok(BackendResponse { text, payload })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::SchemaTag;
    use std::io::{Read, Write};
    use std::net::TcpListener;

    /// Minimal local HTTP stub answering each connection with the next
    /// canned body. No external network is involved.
    fn stub_server(bodies: Vec<String>) -> String {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind stub");
        let addr = listener.local_addr().expect("stub addr");
        std::thread::spawn(move || {
            for body in bodies {
                let Ok((mut stream, _)) = listener.accept() else {
                    return;
                };
                let mut buf = [0u8; 8192];
                let _ = stream.read(&mut buf);
                let response = format!(
                    "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{}",
                    body.len(),
                    body
                );
                let _ = stream.write_all(response.as_bytes());
            }
        });
        format!("http://{addr}/v1/chat/completions")
    }

    fn envelope(content: &str) -> String {
        serde_json::json!({
            "choices": [{"message": {"role": "assistant", "content": content}}]
        })
        .to_string()
    }

    fn backend(url: String) -> HttpBackend {
        HttpBackend::new(HttpBackendConfig {
            url,
            transport_retries: 0,
            timeout: Duration::from_secs(2),
            ..HttpBackendConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn parses_fenced_payload() {
        let url = stub_server(vec![envelope(
            "Here you go:\n```json\n{\"keep\": true, \"confidence\": 0.9}\n```",
        )]);
        let mut b = backend(url);
        let response = b
            .chat(&BackendRequest::new(
                SchemaTag::Relevance,
                vec![Message::user("candidate")],
            ))
            .unwrap();
        assert_eq!(response.payload["keep"], serde_json::json!(true));
    }

    #[test]
    fn malformed_payload_twice_is_schema_failure() {
        let url = stub_server(vec![
            envelope("no json here"),
            envelope("still prose only"),
        ]);
        let mut b = backend(url);
        let err = b
            .chat(&BackendRequest::new(
                SchemaTag::Relevance,
                vec![Message::user("candidate")],
            ))
            .unwrap_err();
        assert!(matches!(err, OracleError::Schema(_)), "got {err:?}");
    }

    #[test]
    fn reask_recovers_once() {
        let url = stub_server(vec![
            envelope("free-form reasoning without payload"),
            envelope("```json\n{\"keep\": false, \"confidence\": 0.2, \"rationale\": \"n\"}\n```"),
        ]);
        let mut b = backend(url);
        let response = b
            .chat(&BackendRequest::new(
                SchemaTag::Relevance,
                vec![Message::user("candidate")],
            ))
            .unwrap();
        assert_eq!(response.payload["keep"], serde_json::json!(false));
    }
}
