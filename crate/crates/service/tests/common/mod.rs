#![allow(dead_code)]

use std::sync::{Arc, Mutex};

use blurcap::api::{ChallengeResponse, VerifyResponse};
use blurcap::{AppState, ManualClock, ServiceConfig};
use blurcap_core::ChallengeId;
use reqwest::StatusCode;
use serde_json::{json, Value};
use tempfile::TempDir;

pub const START_MS: u64 = 1_700_000_000_000;

/// A live server on an ephemeral port with a hand-driven clock. Every
/// response body it hands back is kept for the confidentiality scan.
pub struct TestServer {
    pub base: String,
    pub state: AppState,
    pub clock: Arc<ManualClock>,
    pub config: ServiceConfig,
    pub dir: TempDir,
    client: reqwest::Client,
    bodies: Mutex<Vec<Vec<u8>>>,
}

pub struct Reply {
    pub status: StatusCode,
    pub content_type: Option<String>,
    pub cache_control: Option<String>,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.body)
            .unwrap_or_else(|e| panic!("non-JSON body ({e}): {:?}", String::from_utf8_lossy(&self.body)))
    }
}

impl TestServer {
    pub async fn start(ttl_secs: u64) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let config = ServiceConfig {
            listen: "127.0.0.1:0".parse().unwrap(),
            ttl_secs,
            transcript_dir: dir.path().join("transcripts"),
            corpus_dir: dir.path().join("corpus"),
            ..Default::default()
        };
        let clock = Arc::new(ManualClock::new(START_MS));
        let state = AppState::new(&config, clock.clone()).unwrap();
        let (addr, _handle) = blurcap::start(state.clone(), config.listen).await.unwrap();
        Self {
            base: format!("http://{addr}"),
            state,
            clock,
            config,
            dir,
            client: reqwest::Client::new(),
            bodies: Mutex::new(Vec::new()),
        }
    }

    async fn finish(&self, resp: reqwest::Response) -> Reply {
        let header = |name| {
            resp.headers()
                .get(name)
                .map(|v: &reqwest::header::HeaderValue| v.to_str().unwrap().to_owned())
        };
        let status = resp.status();
        let content_type = header(reqwest::header::CONTENT_TYPE);
        let cache_control = header(reqwest::header::CACHE_CONTROL);
        let body = resp.bytes().await.unwrap().to_vec();
        self.bodies.lock().unwrap().push(body.clone());
        Reply {
            status,
            content_type,
            cache_control,
            body,
        }
    }

    pub async fn get(&self, path: &str) -> Reply {
        let resp = self.client.get(format!("{}{path}", self.base)).send().await.unwrap();
        self.finish(resp).await
    }

    pub async fn post(&self, path: &str, body: &Value) -> Reply {
        let resp = self
            .client
            .post(format!("{}{path}", self.base))
            .json(body)
            .send()
            .await
            .unwrap();
        self.finish(resp).await
    }

    pub async fn post_raw(&self, path: &str, body: &'static str) -> Reply {
        let resp = self
            .client
            .post(format!("{}{path}", self.base))
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(body)
            .send()
            .await
            .unwrap();
        self.finish(resp).await
    }

    pub async fn create(&self, radius: Option<f64>) -> ChallengeResponse {
        let body = match radius {
            Some(r) => json!({ "radius": r }),
            None => json!({}),
        };
        let reply = self.post("/api/challenge", &body).await;
        assert_eq!(reply.status, StatusCode::OK, "{}", String::from_utf8_lossy(&reply.body));
        serde_json::from_slice(&reply.body).unwrap()
    }

    pub async fn verify(&self, id: &str, response: &str) -> Reply {
        self.post("/api/verify", &json!({ "id": id, "response": response }))
            .await
    }

    pub async fn verify_pass(&self, id: &str, response: &str) -> bool {
        let reply = self.verify(id, response).await;
        assert_eq!(reply.status, StatusCode::OK);
        serde_json::from_slice::<VerifyResponse>(&reply.body).unwrap().pass
    }

    pub async fn answer(&self, id: &str, response: &str, rating: i64) -> Reply {
        self.post(
            "/api/trial/answer",
            &json!({ "id": id, "response": response, "rating": rating }),
        )
        .await
    }

    /// Server-side truth lookup, standing in for a human who read the image.
    pub fn truth(&self, id: &str) -> String {
        self.state
            .store()
            .reveal_truth(&ChallengeId::parse(id).unwrap())
            .unwrap()
    }

    pub fn transcript_lines(&self) -> usize {
        std::fs::read_to_string(self.config.transcript_path())
            .map(|s| s.lines().filter(|l| !l.trim().is_empty()).count())
            .unwrap_or(0)
    }

    pub fn bodies(&self) -> Vec<Vec<u8>> {
        self.bodies.lock().unwrap().clone()
    }

    /// Asserts that none of the given truths occurs in any response so far.
    /// Whole truths are searched in every body; single words only in text
    /// bodies, where a chance hit inside compressed image data cannot occur.
    pub fn assert_no_truth_leaked(&self, truths: &[String]) {
        let bodies = self.bodies();
        for truth in truths {
            for body in &bodies {
                assert!(!contains(body, truth.as_bytes()), "truth {truth:?} leaked");
                if body.starts_with(b"\x89PNG") {
                    continue;
                }
                for word in truth.split(' ') {
                    assert!(!contains(body, word.as_bytes()), "truth word {word:?} leaked");
                }
            }
        }
    }
}

pub fn contains(haystack: &[u8], needle: &[u8]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

/// Replaces the first character with a different alphanumeric one.
pub fn one_substitution(truth: &str) -> String {
    let mut chars: Vec<char> = truth.chars().collect();
    chars[0] = if chars[0] == 'Q' { 'R' } else { 'Q' };
    chars.into_iter().collect()
}

/// Five scripted blind-trial answers at radius 1 and the values a person
/// would compute for them by hand.
pub struct ScriptedTrial {
    pub truths: Vec<String>,
    pub expected_similarity: f64,
    pub expected_exact_pct: f64,
    pub expected_readable_pct: f64,
    pub expected_rating: f64,
}

pub async fn scripted_trial(server: &TestServer) -> ScriptedTrial {
    let mut truths = Vec::new();
    let mut similarity_sum = 0.0;
    let mut ids = Vec::new();
    for _ in 0..5 {
        let c = server.create(Some(1.0)).await;
        truths.push(server.truth(&c.id));
        ids.push(c.id);
    }
    // 1: verbatim, rating 10. Similarity 1, exact, readable.
    // 2: same text with padded whitespace, rating 8. Exact after
    //    normalization; two extra spaces at the ends and one inside cost 3
    //    inserts against the raw truth.
    // 3: first character wrong, rating 6. One substitution.
    // 4: empty, rating 2. Similarity 0, unreadable.
    // 5: "?!?", rating 1. No overlap with a truth of 9+ chars: similarity 0,
    //    unreadable.
    let padded = format!(" {} ", truths[1].replacen(' ', "  ", 1));
    let third = one_substitution(&truths[2]);
    let script: [(&str, i64); 5] = [(&truths[0], 10), (&padded, 8), (&third, 6), ("", 2), ("?!?", 1)];
    for (id, (response, rating)) in ids.iter().zip(script) {
        let reply = server.answer(id, response, rating).await;
        assert_eq!(reply.status, StatusCode::OK, "{}", String::from_utf8_lossy(&reply.body));
        assert_eq!(reply.json(), json!({ "recorded": true }));
    }
    let len = |s: &String| s.chars().count() as f64;
    similarity_sum += 1.0;
    similarity_sum += 1.0 - 3.0 / (len(&truths[1]) + 3.0);
    similarity_sum += 1.0 - 1.0 / len(&truths[2]);
    ScriptedTrial {
        truths,
        expected_similarity: similarity_sum / 5.0,
        expected_exact_pct: 40.0,
        expected_readable_pct: 60.0,
        expected_rating: 27.0 / 5.0,
    }
}

/// Checks the human bucket at radius 1 against the scripted values. Counts,
/// percentages and the rating must match exactly; the similarity mean may
/// differ only by summation order.
pub fn check_scripted_report(report: &Value, trial: &ScriptedTrial) -> Result<(), String> {
    let buckets = report["buckets"].as_array().ok_or("no buckets")?;
    if buckets.len() != 1 {
        return Err(format!("expected one bucket, got {}", buckets.len()));
    }
    let b = &buckets[0];
    let checks = [
        ("responder", b["responder"] == "human"),
        ("radius", b["radius"].as_f64() == Some(1.0)),
        ("n", b["n"].as_u64() == Some(5)),
        (
            "exact_match_pct",
            b["exact_match_pct"].as_f64() == Some(trial.expected_exact_pct),
        ),
        (
            "readable_pct",
            b["readable_pct"].as_f64() == Some(trial.expected_readable_pct),
        ),
        ("avg_rating", b["avg_rating"].as_f64() == Some(trial.expected_rating)),
        (
            "avg_char_similarity",
            b["avg_char_similarity"]
                .as_f64()
                .is_some_and(|s| (s - trial.expected_similarity).abs() <= 1e-12),
        ),
    ];
    for (field, ok) in checks {
        if !ok {
            return Err(format!("{field} mismatch in {b}"));
        }
    }
    Ok(())
}
