//! OpenAI-compatible chat-completion client.

use std::time::Duration;

use serde_json::{json, Value};

use super::{ChatBackend, GatewayError};

pub struct LiveBackend {
    endpoint: String,
    model: String,
    api_key_env: String,
    timeout_ms: u64,
    max_retries: u32,
}

impl LiveBackend {
    pub fn new(endpoint: String, model: String, api_key_env: String, timeout_ms: u64, max_retries: u32) -> Self {
        LiveBackend { endpoint, model, api_key_env, timeout_ms, max_retries }
    }

    fn attempt(&self, client: &reqwest::blocking::Client, body: &Value) -> Result<String, GatewayError> {
        let mut req = client.post(&self.endpoint).json(body);
        if let Ok(key) = std::env::var(&self.api_key_env) {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| {
            if e.is_timeout() {
                GatewayError::Timeout(self.timeout_ms)
            } else {
                GatewayError::BackendUnavailable(e.to_string())
            }
        })?;
        let status = resp.status();
        if !status.is_success() {
            return Err(GatewayError::BackendUnavailable(format!("HTTP {status}")));
        }
        let v: Value = resp.json().map_err(|e| GatewayError::InvalidResponse(e.to_string()))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| GatewayError::InvalidResponse("missing choices[0].message.content".into()))
    }
}

impl ChatBackend for LiveBackend {
    fn id(&self) -> String {
        format!("live:{}", self.model)
    }

    fn complete(&self, prompt: &str) -> Result<String, GatewayError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(self.timeout_ms))
            .build()
            .map_err(|e| GatewayError::BackendUnavailable(e.to_string()))?;
        let body = json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        });
        let mut last = GatewayError::BackendUnavailable("no attempt made".into());
        for _ in 0..=self.max_retries {
            match self.attempt(&client, &body) {
                Ok(text) => return Ok(text),
                Err(e @ GatewayError::InvalidResponse(_)) => return Err(e),
                Err(e) => last = e,
            }
        }
        Err(last)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    /// Serves `replies` in order, one connection each, and returns the request bodies.
    fn serve(replies: Vec<(u16, String)>) -> (String, std::thread::JoinHandle<Vec<String>>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let handle = std::thread::spawn(move || {
            let mut bodies = Vec::new();
            for (status, body) in replies {
                let (stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut len = 0usize;
                let mut auth = String::new();
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                    let lower = line.to_ascii_lowercase();
                    if let Some(v) = lower.strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                    if lower.starts_with("authorization:") {
                        auth = line.trim().to_string();
                    }
                }
                let mut buf = vec![0; len];
                reader.read_exact(&mut buf).unwrap();
                bodies.push(format!("{auth}\n{}", String::from_utf8(buf).unwrap()));
                let mut stream = stream;
                write!(
                    stream,
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                )
                .unwrap();
            }
            bodies
        });
        (format!("http://{addr}/v1/chat/completions"), handle)
    }

    #[test]
    fn returns_first_choice_and_sends_messages() {
        let reply = r#"{"choices":[{"message":{"role":"assistant","content":"Selected: Oil Painting"}},{"message":{"content":"other"}}]}"#;
        let (url, handle) = serve(vec![(200, reply.into())]);
        std::env::set_var("FORGE_TEST_KEY_A", "sekrit");
        let b = LiveBackend::new(url, "gpt-4".into(), "FORGE_TEST_KEY_A".into(), 5_000, 0);
        assert_eq!(b.complete("hello").unwrap(), "Selected: Oil Painting");
        let bodies = handle.join().unwrap();
        assert!(bodies[0].contains("Bearer sekrit"));
        let json: Value = serde_json::from_str(bodies[0].lines().nth(1).unwrap()).unwrap();
        assert_eq!(json["messages"][0]["content"], "hello");
        assert_eq!(json["model"], "gpt-4");
    }

    #[test]
    fn retries_then_succeeds() {
        let ok = r#"{"choices":[{"message":{"content":"fine"}}]}"#;
        let (url, handle) = serve(vec![(500, "{}".into()), (200, ok.into())]);
        let b = LiveBackend::new(url, "m".into(), "FORGE_TEST_UNSET".into(), 5_000, 1);
        assert_eq!(b.complete("x").unwrap(), "fine");
        assert_eq!(handle.join().unwrap().len(), 2);
    }

    #[test]
    fn unreachable_endpoint_is_unavailable() {
        let port = {
            let l = TcpListener::bind("127.0.0.1:0").unwrap();
            l.local_addr().unwrap().port()
        };
        let b = LiveBackend::new(format!("http://127.0.0.1:{port}/v1"), "m".into(), "X".into(), 2_000, 2);
        assert!(matches!(b.complete("x"), Err(GatewayError::BackendUnavailable(_))));
    }

    #[test]
    fn slow_server_times_out() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let hits = Arc::new(AtomicUsize::new(0));
        let h2 = hits.clone();
        std::thread::spawn(move || {
            for s in listener.incoming() {
                h2.fetch_add(1, Ordering::SeqCst);
                let s = s.unwrap();
                std::thread::spawn(move || {
                    std::thread::sleep(Duration::from_millis(800));
                    drop(s);
                });
            }
        });
        let b = LiveBackend::new(format!("http://{addr}/v1"), "m".into(), "X".into(), 100, 1);
        assert_eq!(b.complete("x"), Err(GatewayError::Timeout(100)));
        assert_eq!(hits.load(Ordering::SeqCst), 2);
    }
}
