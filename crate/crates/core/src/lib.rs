//! Gaussian-blurred text CAPTCHAs: rendering, convolution, seeded
//! generation and OCR robustness scoring.

pub mod challenge;
pub mod evaluate;
pub mod filter;
pub mod raster;

pub use challenge::{Alphabet, Challenge, ChallengeId, ChallengeSpec, ChallengeState};
pub use evaluate::{aggregate, MetricsReport, Responder, TrialRecord};
pub use filter::{gaussian_blur, BorderPolicy, Kernel};
pub use raster::ImageGray;
