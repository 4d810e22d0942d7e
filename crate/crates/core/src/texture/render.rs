//! Render backends: a deterministic placeholder renderer and an HTTP client.

use std::time::Duration;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::request::{encode_png, RenderRequest};
use super::TextureError;
use crate::artifact::{ArtifactMetadata, ArtifactStore};
use crate::domain::ArtifactRef;
use crate::hash::stable_hash64;

const MOCK_SCALE: usize = 4;
const BACKGROUND: [u8; 3] = [250, 250, 250];
const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

fn default_timeout() -> u64 {
    60_000
}

fn default_retries() -> u32 {
    2
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum RenderBackendConfig {
    #[default]
    Mock,
    Live {
        endpoint: String,
        #[serde(default = "default_timeout")]
        timeout_ms: u64,
        #[serde(default = "default_retries")]
        max_retries: u32,
    },
}

/// Tint derived from the request id, kept away from the background.
pub fn tint(request_id: &str) -> [u8; 3] {
    let h = stable_hash64(request_id.as_bytes()).to_be_bytes();
    [h[0] % 200, h[1] % 200, h[2] % 200]
}

/// Glyph mask upscaled 4x, glyph cells in the request tint.
pub fn mock_image(req: &RenderRequest) -> Result<Vec<u8>, TextureError> {
    let mask = req.mask()?;
    let color = tint(&req.request_id);
    let size = mask.size * MOCK_SCALE;
    let mut px = Vec::with_capacity(size * size * 3);
    for y in 0..size {
        for x in 0..size {
            let on = mask.get(x / MOCK_SCALE, y / MOCK_SCALE);
            px.extend_from_slice(if on { &color } else { &BACKGROUND });
        }
    }
    Ok(encode_png(size, png::ColorType::Rgb, &px))
}

fn wire_body(req: &RenderRequest) -> serde_json::Value {
    json!({
        "request_id": req.request_id,
        "prompt": req.prompt,
        "negative_prompt": req.negative_prompt,
        "glyph": req.glyph_mask,
        "controls": req.control.iter().map(|(k, c)| json!({
            "condition": k.name(),
            "map": c.map,
            "weight": c.weight,
        })).collect::<Vec<_>>(),
        "fusion": req.fusion.iter().map(|(m, a)| json!({"model": m, "alpha": a})).collect::<Vec<_>>(),
        "guidance": req.guidance,
        "seed": req.seed,
    })
}

#[derive(Deserialize)]
struct WireResponse {
    request_id: String,
    image: String,
}

fn post_once(endpoint: &str, timeout_ms: u64, body: &serde_json::Value) -> Result<WireResponse, (bool, String)> {
    let client = reqwest::blocking::Client::builder()
        .timeout(Duration::from_millis(timeout_ms))
        .build()
        .map_err(|e| (true, e.to_string()))?;
    let resp = client.post(endpoint).json(body).send().map_err(|e| (true, e.to_string()))?;
    let status = resp.status();
    if !status.is_success() {
        return Err((status.is_server_error(), format!("HTTP {status}")));
    }
    resp.json::<WireResponse>().map_err(|e| (false, e.to_string()))
}

fn live_image(req: &RenderRequest, endpoint: &str, timeout_ms: u64, max_retries: u32) -> Result<Vec<u8>, TextureError> {
    let body = wire_body(req);
    let mut last = String::new();
    for _ in 0..=max_retries {
        match post_once(endpoint, timeout_ms, &body) {
            Ok(r) => {
                if r.request_id != req.request_id {
                    return Err(TextureError::InvalidResponse(format!(
                        "echoed request id {} != {}",
                        r.request_id, req.request_id
                    )));
                }
                let bytes = B64.decode(r.image.as_bytes()).map_err(|e| TextureError::InvalidResponse(e.to_string()))?;
                if !bytes.starts_with(PNG_SIGNATURE) {
                    return Err(TextureError::InvalidResponse("image payload is not a PNG".into()));
                }
                return Ok(bytes);
            }
            Err((true, m)) => last = m,
            Err((false, m)) => return Err(TextureError::InvalidResponse(m)),
        }
    }
    Err(TextureError::RenderBackendUnavailable(last))
}

/// Renders `req` and stores the image under its request id.
pub fn render(req: &RenderRequest, cfg: &RenderBackendConfig, store: &ArtifactStore) -> Result<ArtifactRef, TextureError> {
    req.validate()?;
    let (image, backend) = match cfg {
        RenderBackendConfig::Mock => (mock_image(req)?, "mock".to_string()),
        RenderBackendConfig::Live { endpoint, timeout_ms, max_retries } => {
            (live_image(req, endpoint, *timeout_ms, *max_retries)?, endpoint.clone())
        }
    };
    let artifact_ref = ArtifactRef(req.request_id.clone());
    let meta = ArtifactMetadata { artifact_ref: artifact_ref.clone(), backend, request: req.clone() };
    store.write(&image, &meta).map_err(|e| TextureError::Io(e.to_string()))?;
    Ok(artifact_ref)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::HyperParams;
    use crate::glyph::raster::Raster;
    use crate::texture::{build_render_request, fuse_weights, ModelTree};
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;

    fn request() -> RenderRequest {
        let tree = ModelTree::bundled().unwrap();
        let models = [tree.find("sci-fi/cyber").unwrap().clone(), tree.find("art/sketch").unwrap().clone()];
        let fusion = fuse_weights(&models, &[0.7, 0.3]).unwrap();
        let glyph = Raster::from_fn(32, |x, y| (8..24).contains(&x) && (4..28).contains(&y));
        build_render_request(&glyph, "neon circuits", &fusion, &HyperParams::default()).unwrap()
    }

    #[test]
    fn mock_is_byte_identical_and_records_request() {
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (ArtifactStore::new(dir.path().join("a")), ArtifactStore::new(dir.path().join("b")));
        let req = request();
        let ra = render(&req, &RenderBackendConfig::Mock, &a).unwrap();
        let rb = render(&req, &RenderBackendConfig::Mock, &b).unwrap();
        assert_eq!(ra, rb);
        assert_eq!(a.read_image(&ra).unwrap(), b.read_image(&rb).unwrap());
        let meta = a.read_metadata(&ra).unwrap();
        assert_eq!(meta.request.prompt, req.prompt);
        assert_eq!(meta.request.fusion, req.fusion);
        assert!(a.read_image(&ra).unwrap().starts_with(PNG_SIGNATURE));
    }

    #[test]
    fn unreachable_live_backend() {
        let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
        let cfg = RenderBackendConfig::Live { endpoint: format!("http://127.0.0.1:{port}/render"), timeout_ms: 500, max_retries: 1 };
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            render(&request(), &cfg, &ArtifactStore::new(dir.path())),
            Err(TextureError::RenderBackendUnavailable(_))
        ));
    }

    fn serve_once(body: String) -> String {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        std::thread::spawn(move || {
            let (mut s, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(s.try_clone().unwrap());
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                if line == "\r\n" {
                    break;
                }
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            let resp = format!(
                "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\n\r\n{}",
                body.len(),
                body
            );
            s.write_all(resp.as_bytes()).unwrap();
        });
        format!("http://{addr}/render")
    }

    #[test]
    fn live_round_trip_and_echo_check() {
        let req = request();
        let png = mock_image(&req).unwrap();
        let ok = json!({"request_id": req.request_id, "image": B64.encode(&png)}).to_string();
        let dir = tempfile::tempdir().unwrap();
        let store = ArtifactStore::new(dir.path());
        let cfg = RenderBackendConfig::Live { endpoint: serve_once(ok), timeout_ms: 5000, max_retries: 0 };
        let r = render(&req, &cfg, &store).unwrap();
        assert_eq!(store.read_image(&r).unwrap(), png);

        let wrong = json!({"request_id": "0000", "image": B64.encode(&png)}).to_string();
        let cfg = RenderBackendConfig::Live { endpoint: serve_once(wrong), timeout_ms: 5000, max_retries: 0 };
        assert!(matches!(render(&req, &cfg, &store), Err(TextureError::InvalidResponse(_))));
    }
}
