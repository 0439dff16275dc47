//! Minimal HTTP transport abstraction shared by the LLM client and the
//! data-retrieval clients. Tests and offline runs use [`DenyNetwork`].

use std::sync::atomic::{AtomicUsize, Ordering};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransportError {
    #[error("network access is disabled")]
    Disabled,
    #[error("connection failed: {0}")]
    Connect(String),
}

pub type Headers = [(String, String)];

pub trait Transport: Send + Sync {
    fn get(&self, url: &str, headers: &Headers) -> Result<HttpResponse, TransportError>;
    fn post_json(
        &self,
        url: &str,
        headers: &Headers,
        body: &str,
    ) -> Result<HttpResponse, TransportError>;
}

/// Refuses every request and counts the attempts.
#[derive(Debug, Default)]
pub struct DenyNetwork {
    attempts: AtomicUsize,
}

impl DenyNetwork {
    pub fn attempts(&self) -> usize {
        self.attempts.load(Ordering::SeqCst)
    }
}

impl Transport for DenyNetwork {
    fn get(&self, _url: &str, _headers: &Headers) -> Result<HttpResponse, TransportError> {
        self.attempts.fetch_add(1, Ordering::SeqCst);
        Err(TransportError::Disabled)
    }

    fn post_json(
        &self,
        _url: &str,
        _headers: &Headers,
        _body: &str,
    ) -> Result<HttpResponse, TransportError> {
        self.attempts.fetch_add(1, Ordering::SeqCst);
        Err(TransportError::Disabled)
    }
}

#[cfg(feature = "live-http")]
pub use live::UreqTransport;

#[cfg(feature = "live-http")]
mod live {
    use std::time::Duration;

    use super::{Headers, HttpResponse, Transport, TransportError};

    pub struct UreqTransport {
        agent: ureq::Agent,
    }

    impl UreqTransport {
        pub fn new(timeout: Duration) -> Self {
            let agent = ureq::Agent::config_builder()
                .http_status_as_error(false)
                .timeout_global(Some(timeout))
                .build()
                .into();
            Self { agent }
        }
    }

    fn finish(
        resp: Result<ureq::http::Response<ureq::Body>, ureq::Error>,
    ) -> Result<HttpResponse, TransportError> {
        let mut resp = resp.map_err(|e| TransportError::Connect(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| TransportError::Connect(e.to_string()))?;
        Ok(HttpResponse { status, body })
    }

    impl Transport for UreqTransport {
        fn get(&self, url: &str, headers: &Headers) -> Result<HttpResponse, TransportError> {
            let mut req = self.agent.get(url);
            for (k, v) in headers {
                req = req.header(k.as_str(), v.as_str());
            }
            finish(req.call())
        }

        fn post_json(
            &self,
            url: &str,
            headers: &Headers,
            body: &str,
        ) -> Result<HttpResponse, TransportError> {
            let mut req = self
                .agent
                .post(url)
                .header("Content-Type", "application/json");
            for (k, v) in headers {
                req = req.header(k.as_str(), v.as_str());
            }
            finish(req.send(body))
        }
    }
}
