//! Command-line tools and the HTTP challenge service.

pub mod api;
pub mod cli;
pub mod clock;
pub mod config;
pub mod store;

pub use api::{router, start, AppState};
pub use clock::{Clock, ManualClock, SystemClock};
pub use config::ServiceConfig;
pub use store::{ChallengeStore, StoreError};
