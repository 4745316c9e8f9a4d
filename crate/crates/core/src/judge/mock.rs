//! A scriptable in-process chat-completions server.
//!
//! Speaks just enough HTTP/1.1 for the judge client: POST
//! `/v1/chat/completions` with a JSON body, one response per connection.
//! Tests and end-to-end runs script it with a closure over the decoded
//! request, so judging pipelines can run deterministically with no
//! external model.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

/// One decoded judge request.
#[derive(Debug, Clone)]
pub struct MockRequest {
    /// Full user-message text.
    pub prompt: String,
    /// Text after the final "sentence to analyze" marker line, i.e. the
    /// caption the prompt was built from.
    pub caption: String,
    pub model: String,
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u64,
    /// Zero-based ordinal of this request since the server started.
    pub hit: usize,
}

/// Scripted reaction to one request.
#[derive(Debug, Clone)]
pub enum MockReply {
    /// 200 with the given text as the assistant message.
    Verdict(String),
    /// A bare status code with the given body.
    Status(u16, String),
    /// 200 with a body that is not a completion payload.
    MalformedBody(String),
}

pub struct MockJudgeServer {
    addr: SocketAddr,
    shutdown: Arc<AtomicBool>,
    hits: Arc<AtomicUsize>,
    handle: Option<JoinHandle<()>>,
}

impl MockJudgeServer {
    /// Binds an ephemeral localhost port and serves until dropped.
    pub fn start<F>(script: F) -> std::io::Result<Self>
    where
        F: Fn(&MockRequest) -> MockReply + Send + Sync + 'static,
    {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        listener.set_nonblocking(true)?;
        let addr = listener.local_addr()?;
        let shutdown = Arc::new(AtomicBool::new(false));
        let hits = Arc::new(AtomicUsize::new(0));

        let thread_shutdown = Arc::clone(&shutdown);
        let thread_hits = Arc::clone(&hits);
        let handle = std::thread::spawn(move || {
            while !thread_shutdown.load(Ordering::SeqCst) {
                match listener.accept() {
                    Ok((stream, _)) => {
                        let hit = thread_hits.fetch_add(1, Ordering::SeqCst);
                        // connection errors only fail the one request
                        let _ = serve_connection(stream, hit, &script);
                    }
                    Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                        std::thread::sleep(std::time::Duration::from_millis(1));
                    }
                    Err(_) => break,
                }
            }
        });

        Ok(MockJudgeServer {
            addr,
            shutdown,
            hits,
            handle: Some(handle),
        })
    }

    /// Base URL to point an `EndpointConfig` at.
    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Number of requests accepted so far.
    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }
}

impl Drop for MockJudgeServer {
    fn drop(&mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

const CAPTION_MARKER: &str = "The sentence to analyze is the following:\n";

fn serve_connection<F>(mut stream: TcpStream, hit: usize, script: &F) -> std::io::Result<()>
where
    F: Fn(&MockRequest) -> MockReply,
{
    stream.set_nonblocking(false)?;
    stream.set_read_timeout(Some(std::time::Duration::from_secs(10)))?;
    let mut reader = BufReader::new(stream.try_clone()?);

    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    let mut content_length = 0usize;
    loop {
        let mut line = String::new();
        reader.read_line(&mut line)?;
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            if name.eq_ignore_ascii_case("content-length") {
                content_length = value.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body)?;

    if !request_line.starts_with("POST /v1/chat/completions ") {
        return write_response(&mut stream, 404, "text/plain", "not found");
    }

    let reply = match decode_request(&body, hit) {
        Some(request) => script(&request),
        None => MockReply::Status(400, "unintelligible request body".to_string()),
    };

    match reply {
        MockReply::Verdict(text) => {
            let payload = serde_json::json!({
                "choices": [{"message": {"role": "assistant", "content": text}}]
            });
            write_response(&mut stream, 200, "application/json", &payload.to_string())
        }
        MockReply::Status(status, body) => write_response(&mut stream, status, "text/plain", &body),
        MockReply::MalformedBody(body) => {
            write_response(&mut stream, 200, "application/json", &body)
        }
    }
}

fn decode_request(body: &[u8], hit: usize) -> Option<MockRequest> {
    let value: serde_json::Value = serde_json::from_slice(body).ok()?;
    let prompt = value["messages"][0]["content"].as_str()?.to_string();
    let caption = prompt
        .rfind(CAPTION_MARKER)
        .map(|i| prompt[i + CAPTION_MARKER.len()..].to_string())
        .unwrap_or_default();
    Some(MockRequest {
        caption,
        model: value["model"].as_str().unwrap_or_default().to_string(),
        temperature: value["temperature"].as_f64().unwrap_or(f64::NAN),
        top_p: value["top_p"].as_f64().unwrap_or(f64::NAN),
        max_tokens: value["max_tokens"].as_u64().unwrap_or(0),
        prompt,
        hit,
    })
}

fn write_response(
    stream: &mut TcpStream,
    status: u16,
    content_type: &str,
    body: &str,
) -> std::io::Result<()> {
    let reason = match status {
        200 => "OK",
        400 => "Bad Request",
        404 => "Not Found",
        429 => "Too Many Requests",
        500 => "Internal Server Error",
        _ => "Mock",
    };
    write!(
        stream,
        "HTTP/1.1 {status} {reason}\r\nContent-Type: {content_type}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len(),
    )?;
    stream.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decodes_caption_from_prompt() {
        let prompt = crate::judge::build_prompt("Un perro pequeño.");
        let body = serde_json::json!({
            "model": "m",
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0.8,
            "top_p": 0.6,
            "max_tokens": 50,
        });
        let request = decode_request(body.to_string().as_bytes(), 7).unwrap();
        assert_eq!(request.caption, "Un perro pequeño.");
        assert_eq!(request.hit, 7);
        assert_eq!(request.model, "m");
    }
}
