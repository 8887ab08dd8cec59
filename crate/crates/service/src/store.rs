//! In-memory one-shot challenge registry.
//!
//! Each challenge moves `pending -> consumed` or `pending -> expired` and
//! never back. Transitions happen under a single lock, so two concurrent
//! attempts on one id cannot both succeed.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use blurcap_core::{Challenge, ChallengeId, ChallengeState};
use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum StoreError {
    #[error("unknown challenge")]
    Unknown,
    #[error("challenge already used or expired")]
    Gone,
}

struct Entry {
    truth: String,
    radius: f64,
    png: Arc<[u8]>,
    created_at_ms: u64,
    expires_at_ms: u64,
    state: ChallengeState,
}

impl Entry {
    /// Applies expiry, then reports whether the entry is still usable.
    fn refresh(&mut self, now_ms: u64) -> Result<(), StoreError> {
        if self.state == ChallengeState::Pending && now_ms >= self.expires_at_ms {
            self.state = ChallengeState::Expired;
        }
        match self.state {
            ChallengeState::Pending => Ok(()),
            ChallengeState::Consumed | ChallengeState::Expired => Err(StoreError::Gone),
        }
    }
}

/// What a consumer learns when it takes a challenge.
#[derive(Debug, Clone, PartialEq)]
pub struct Consumed {
    pub truth: String,
    pub radius: f64,
    pub created_at_ms: u64,
}

pub struct ChallengeStore {
    ttl: Duration,
    /// Dead entries are kept this long past expiry so late attempts still
    /// see 410 rather than 404.
    retention: Duration,
    entries: Mutex<HashMap<ChallengeId, Entry>>,
}

impl ChallengeStore {
    pub fn new(ttl: Duration) -> Self {
        Self {
            ttl,
            retention: ttl.saturating_mul(10).max(Duration::from_secs(3600)),
            entries: Mutex::new(HashMap::new()),
        }
    }

    pub fn ttl(&self) -> Duration {
        self.ttl
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, HashMap<ChallengeId, Entry>> {
        self.entries.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Registers a freshly generated challenge with its encoded image and
    /// returns the expiry time.
    pub fn insert(&self, challenge: Challenge, png: Vec<u8>, now_ms: u64) -> u64 {
        let expires_at_ms = now_ms.saturating_add(self.ttl.as_millis() as u64);
        let entry = Entry {
            truth: challenge.truth,
            radius: challenge.radius,
            png: png.into(),
            created_at_ms: now_ms,
            expires_at_ms,
            state: ChallengeState::Pending,
        };
        let mut entries = self.lock();
        let horizon = self.retention.as_millis() as u64;
        entries.retain(|_, e| e.state == ChallengeState::Pending || now_ms < e.expires_at_ms.saturating_add(horizon));
        entries.insert(challenge.id, entry);
        expires_at_ms
    }

    /// The encoded image of a pending challenge.
    pub fn image(&self, id: &ChallengeId, now_ms: u64) -> Result<Arc<[u8]>, StoreError> {
        let mut entries = self.lock();
        let entry = entries.get_mut(id).ok_or(StoreError::Unknown)?;
        entry.refresh(now_ms)?;
        Ok(entry.png.clone())
    }

    /// Atomically moves a pending challenge to consumed.
    pub fn consume(&self, id: &ChallengeId, now_ms: u64) -> Result<Consumed, StoreError> {
        let mut entries = self.lock();
        let entry = entries.get_mut(id).ok_or(StoreError::Unknown)?;
        entry.refresh(now_ms)?;
        entry.state = ChallengeState::Consumed;
        Ok(Consumed {
            truth: entry.truth.clone(),
            radius: entry.radius,
            created_at_ms: entry.created_at_ms,
        })
    }

    pub fn state(&self, id: &ChallengeId, now_ms: u64) -> Option<ChallengeState> {
        let mut entries = self.lock();
        let entry = entries.get_mut(id)?;
        let _ = entry.refresh(now_ms);
        Some(entry.state)
    }

    /// The secret answer of a challenge. For scripted trials and tests only;
    /// no HTTP route exposes it.
    pub fn reveal_truth(&self, id: &ChallengeId) -> Option<String> {
        self.lock().get(id).map(|e| e.truth.clone())
    }

    pub fn len(&self) -> usize {
        self.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
