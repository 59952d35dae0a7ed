//! A local HTTP server speaking the wire protocol, backed by in-process
//! providers. Used to exercise [`HttpProvider`](super::HttpProvider) and the
//! conformance checks without any real model.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::de::DeserializeOwned;
use serde::Serialize;
use tiny_http::{Header, Method, Request, Response, Server};

use super::protocol::*;
use super::{Classifier, Embedder, Generator, ProviderError, TokenScorer};

pub struct Backend {
    pub embedder: Box<dyn Embedder>,
    pub generator: Box<dyn Generator>,
    pub classifier: Box<dyn Classifier>,
    pub scorer: Box<dyn TokenScorer>,
}

impl Backend {
    /// The default deterministic mocks with the given embedding dim.
    pub fn mock(dim: usize) -> Self {
        use super::mock::*;
        Self {
            embedder: Box::new(HashEmbedder::new(dim)),
            generator: Box::new(TemplateGenerator),
            classifier: Box::new(KeywordClassifier),
            scorer: Box::new(HashScorer),
        }
    }
}

/// Injected misbehavior: the first `slow_requests` requests sleep for `delay`
/// before answering.
#[derive(Debug, Clone, Copy, Default)]
pub struct Faults {
    pub slow_requests: usize,
    pub delay: Duration,
}

pub struct MockServer {
    addr: SocketAddr,
    server: Arc<Server>,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
    served: Arc<AtomicUsize>,
}

impl MockServer {
    pub fn start(backend: Backend) -> std::io::Result<Self> {
        Self::start_with(backend, Faults::default())
    }

    /// Binds an ephemeral localhost port and serves on a background thread.
    pub fn start_with(backend: Backend, faults: Faults) -> std::io::Result<Self> {
        let server = Server::http("127.0.0.1:0").map_err(std::io::Error::other)?;
        let addr = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| std::io::Error::other("server has no IP address"))?;
        let server = Arc::new(server);
        let stop = Arc::new(AtomicBool::new(false));
        let served = Arc::new(AtomicUsize::new(0));
        let backend = Arc::new(backend);
        let handle = {
            let (server, stop, served) = (server.clone(), stop.clone(), served.clone());
            thread::spawn(move || {
                while !stop.load(Ordering::SeqCst) {
                    let req = match server.recv_timeout(Duration::from_millis(50)) {
                        Ok(Some(r)) => r,
                        Ok(None) => continue,
                        Err(_) => break,
                    };
                    let n = served.fetch_add(1, Ordering::SeqCst);
                    let backend = backend.clone();
                    // one thread per request so slow requests do not block others
                    thread::spawn(move || {
                        if n < faults.slow_requests {
                            thread::sleep(faults.delay);
                        }
                        handle(&backend, req);
                    });
                }
            })
        };
        Ok(Self {
            addr,
            server,
            stop,
            handle: Some(handle),
            served,
        })
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn requests_served(&self) -> usize {
        self.served.load(Ordering::SeqCst)
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        self.server.unblock();
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn json_response<T: Serialize>(status: u16, body: &T) -> Response<std::io::Cursor<Vec<u8>>> {
    let bytes = serde_json::to_vec(body).expect("serializable response");
    let header = Header::from_bytes("Content-Type", "application/json").expect("static header");
    Response::from_data(bytes).with_status_code(status).with_header(header)
}

fn error(status: u16, msg: impl Into<String>) -> Response<std::io::Cursor<Vec<u8>>> {
    json_response(status, &ErrorBody { error: msg.into() })
}

fn provider_error(e: ProviderError) -> Response<std::io::Cursor<Vec<u8>>> {
    match e {
        ProviderError::Status { status, excerpt } => error(status, excerpt),
        ProviderError::Protocol(m) => error(422, m),
        other => error(503, other.to_string()),
    }
}

fn parse<T: DeserializeOwned>(body: &str) -> Result<T, Response<std::io::Cursor<Vec<u8>>>> {
    serde_json::from_str(body).map_err(|e| error(400, format!("invalid request body: {e}")))
}

fn route(backend: &Backend, path: &str, body: &str) -> Response<std::io::Cursor<Vec<u8>>> {
    let result = match path {
        EMBED_TEXT => parse::<EmbedTextRequest>(body).map(|r| {
            backend
                .embedder
                .embed_text(&r.texts)
                .map(|e| json_response(200, &EmbedResponse { vectors: e.vectors, dim: e.dim }))
        }),
        EMBED_IMAGE => parse::<EmbedImageRequest>(body).and_then(|r| {
            let images = r
                .images_b64
                .iter()
                .map(|s| B64.decode(s))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| error(400, format!("bad base64 image: {e}")))?;
            Ok(backend
                .embedder
                .embed_image(&images)
                .map(|e| json_response(200, &EmbedResponse { vectors: e.vectors, dim: e.dim })))
        }),
        GENERATE => parse::<GenerateRequest>(body).map(|r| {
            backend
                .generator
                .generate(&r)
                .map(|(text, _)| json_response(200, &GenerateResponse { text }))
        }),
        CLASSIFY => parse::<ClassifyRequest>(body).map(|r| {
            backend
                .classifier
                .classify(&r.prompt)
                .map(|answer| json_response(200, &ClassifyResponse { answer }))
        }),
        SCORE_TOKENS => parse::<ScoreTokensRequest>(body)
            .map(|r| backend.scorer.score_tokens(&r.text).map(|s| json_response(200, &s))),
        other => return error(404, format!("no such endpoint {other}")),
    };
    match result {
        Ok(Ok(resp)) => resp,
        Ok(Err(e)) => provider_error(e),
        Err(resp) => resp,
    }
}

fn handle(backend: &Backend, mut req: Request) {
    let resp = if *req.method() != Method::Post {
        error(405, "only POST is supported")
    } else {
        let mut body = String::new();
        match req.as_reader().read_to_string(&mut body) {
            Ok(_) => route(backend, req.url(), &body),
            Err(e) => error(400, format!("unreadable body: {e}")),
        }
    };
    // the client may have timed out and gone away; nothing useful to do then
    let _ = req.respond(resp);
}
