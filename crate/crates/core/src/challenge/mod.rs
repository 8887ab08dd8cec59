//! Seeded CAPTCHA generation.
//!
//! A challenge's truth is two random words of 4 to 7 characters separated by a
//! single space. The text is drawn with [`SplitMix64`] seeded by the
//! challenge seed, consuming draws in a fixed order:
//!
//! 1. one draw for the first word's length (`4 + below(4)`),
//! 2. one draw per character of the first word (`below(alphabet.len())`),
//! 3. the same again for the second word.
//!
//! The image is the truth rendered with the embedded font and then
//! Gaussian-blurred at the requested radius. Seeds make experiments
//! reproducible; challenge ids are drawn independently from OS randomness.

mod manifest;
mod rng;

pub use self::manifest::{
    read_manifest, write_corpus, write_corpus_images, CorpusManifest, ManifestItem, MANIFEST_FILE,
};
pub use self::rng::SplitMix64;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::filter::{gaussian_blur, FilterError};
use crate::raster::{FontFace, ImageGray, RasterError};

pub const MIN_WORD_LEN: usize = 4;
pub const MAX_WORD_LEN: usize = 7;

/// Characters that are easy to confuse with one another in the embedded font.
pub const CONFUSABLES: &[char] = &['0', 'O', 'o', '1', 'l', 'I'];

#[derive(Debug, Error)]
pub enum ChallengeError {
    #[error("alphabet is empty")]
    EmptyAlphabet,
    #[error("corpus size must be at least 1")]
    EmptyCorpus,
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("manifest error: {0}")]
    Manifest(#[from] serde_json::Error),
}

/// The set of characters truths are drawn from, in draw order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet(Vec<char>);

impl Alphabet {
    /// `A-Z`, `a-z`, `0-9`: 62 characters.
    pub fn alphanumeric() -> Self {
        Self(('A'..='Z').chain('a'..='z').chain('0'..='9').collect())
    }

    /// Alphanumerics without [`CONFUSABLES`].
    pub fn without_confusables() -> Self {
        let mut a = Self::alphanumeric();
        a.0.retain(|c| !CONFUSABLES.contains(c));
        a
    }

    /// Deduplicates while keeping first-occurrence order.
    pub fn new(chars: impl IntoIterator<Item = char>) -> Result<Self, ChallengeError> {
        let mut out: Vec<char> = Vec::new();
        for c in chars {
            if !out.contains(&c) {
                out.push(c);
            }
        }
        if out.is_empty() {
            return Err(ChallengeError::EmptyAlphabet);
        }
        Ok(Self(out))
    }

    pub fn chars(&self) -> &[char] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, c: char) -> bool {
        self.0.contains(&c)
    }

    /// Fails with [`RasterError::UnsupportedChar`] on the first character
    /// the font cannot draw.
    pub fn check_font(&self, font: &FontFace) -> Result<(), ChallengeError> {
        match self.0.iter().find(|&&c| !font.has_glyph(c)) {
            Some(&c) => Err(RasterError::UnsupportedChar(c).into()),
            None => Ok(()),
        }
    }
}

impl Default for Alphabet {
    fn default() -> Self {
        Self::alphanumeric()
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|c| write!(f, "{c}"))
    }
}

/// Two words of 4 to 7 alphabet characters joined by one space.
pub fn random_words(rng: &mut SplitMix64, alphabet: &Alphabet) -> String {
    let mut word = |out: &mut String| {
        let len = MIN_WORD_LEN + rng.below(MAX_WORD_LEN - MIN_WORD_LEN + 1);
        for _ in 0..len {
            out.push(alphabet.0[rng.below(alphabet.len())]);
        }
    };
    let mut text = String::with_capacity(2 * MAX_WORD_LEN + 1);
    word(&mut text);
    text.push(' ');
    word(&mut text);
    text
}

/// Whether `text` has the `word word` shape over `alphabet`.
pub fn is_valid_truth(text: &str, alphabet: &Alphabet) -> bool {
    let mut parts = text.split(' ');
    let ok = |w: Option<&str>| {
        w.is_some_and(|w| {
            let n = w.chars().count();
            (MIN_WORD_LEN..=MAX_WORD_LEN).contains(&n) && w.chars().all(|c| alphabet.contains(c))
        })
    };
    ok(parts.next()) && ok(parts.next()) && parts.next().is_none()
}

/// Parameters fully determining a challenge's truth and image.
#[derive(Debug, Clone, PartialEq)]
pub struct ChallengeSpec {
    pub seed: u64,
    pub radius: f64,
    pub scale: usize,
    pub padding: usize,
    pub alphabet: Alphabet,
}

impl Default for ChallengeSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            radius: 2.0,
            scale: 4,
            padding: 8,
            alphabet: Alphabet::default(),
        }
    }
}

impl ChallengeSpec {
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    /// Draws the truth and renders the blurred image.
    pub fn render(&self) -> Result<(String, ImageGray), ChallengeError> {
        let font = FontFace::embedded();
        self.alphabet.check_font(&font)?;
        let truth = random_words(&mut SplitMix64::new(self.seed), &self.alphabet);
        let sharp = font.render(&truth, self.scale, self.padding)?;
        let image = gaussian_blur(&sharp, self.radius)?;
        Ok((truth, image))
    }
}

/// Opaque 128-bit challenge identifier, rendered as 32 lowercase hex digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChallengeId(String);

impl ChallengeId {
    pub fn from_bytes(bytes: [u8; 16]) -> Self {
        Self(bytes.iter().map(|b| format!("{b:02x}")).collect())
    }

    /// A fresh identifier from the operating system's CSPRNG.
    #[cfg(feature = "runtime")]
    pub fn random() -> Self {
        let mut bytes = [0u8; 16];
        getrandom::fill(&mut bytes).expect("OS randomness unavailable");
        Self::from_bytes(bytes)
    }

    /// Accepts only the canonical 32-hex-digit form.
    pub fn parse(s: &str) -> Option<Self> {
        (s.len() == 32 && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))).then(|| Self(s.to_owned()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ChallengeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChallengeState {
    Pending,
    Consumed,
    Expired,
}

/// A generated CAPTCHA. `Debug` redacts the truth.
#[derive(Clone)]
pub struct Challenge {
    pub id: ChallengeId,
    pub truth: String,
    pub radius: f64,
    pub seed: u64,
    pub image: ImageGray,
    /// Milliseconds since the Unix epoch.
    pub created_at_ms: u64,
    pub state: ChallengeState,
}

impl fmt::Debug for Challenge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Challenge")
            .field("id", &self.id)
            .field("truth", &"<redacted>")
            .field("radius", &self.radius)
            .field("seed", &self.seed)
            .field("image", &self.image)
            .field("created_at_ms", &self.created_at_ms)
            .field("state", &self.state)
            .finish()
    }
}

/// Builds a pending challenge with a caller-supplied id and creation time.
pub fn make_challenge_with(
    spec: &ChallengeSpec,
    id: ChallengeId,
    created_at_ms: u64,
) -> Result<Challenge, ChallengeError> {
    let (truth, image) = spec.render()?;
    Ok(Challenge {
        id,
        truth,
        radius: spec.radius,
        seed: spec.seed,
        image,
        created_at_ms,
        state: ChallengeState::Pending,
    })
}

/// A seed for a live challenge, drawn from OS randomness.
#[cfg(feature = "runtime")]
pub fn random_seed() -> u64 {
    let mut bytes = [0u8; 8];
    getrandom::fill(&mut bytes).expect("OS randomness unavailable");
    u64::from_le_bytes(bytes)
}

/// Builds a pending challenge with a random id, stamped with the wall clock.
#[cfg(feature = "runtime")]
pub fn make_challenge(spec: &ChallengeSpec) -> Result<Challenge, ChallengeError> {
    let now = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0);
    make_challenge_with(spec, ChallengeId::random(), now)
}

/// `n` challenges where challenge `i` uses seed `base_seed + i` (wrapping).
#[cfg(feature = "runtime")]
pub fn make_corpus(n: usize, template: &ChallengeSpec, base_seed: u64) -> Result<Vec<Challenge>, ChallengeError> {
    if n == 0 {
        return Err(ChallengeError::EmptyCorpus);
    }
    (0..n as u64)
        .map(|i| make_challenge(&template.with_seed(base_seed.wrapping_add(i))))
        .collect()
}
