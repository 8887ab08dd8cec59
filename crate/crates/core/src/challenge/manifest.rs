use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Challenge, ChallengeError, ChallengeSpec};
use crate::raster::{write_pgm, write_png, ImageGray};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Private description of a generated corpus. Contains the truths, so it is
/// only ever written next to the images for offline experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub base_seed: u64,
    pub radius: f64,
    pub scale: usize,
    pub padding: usize,
    pub alphabet: String,
    pub items: Vec<ManifestItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestItem {
    pub index: usize,
    pub seed: u64,
    pub truth: String,
    pub image_file: String,
}

impl ManifestItem {
    pub fn stem(index: usize) -> String {
        format!("challenge_{index}")
    }
}

impl CorpusManifest {
    pub fn new<'a>(template: &ChallengeSpec, base_seed: u64, items: impl IntoIterator<Item = (u64, &'a str)>) -> Self {
        Self {
            base_seed,
            radius: template.radius,
            scale: template.scale,
            padding: template.padding,
            alphabet: template.alphabet.to_string(),
            items: items
                .into_iter()
                .enumerate()
                .map(|(index, (seed, truth))| ManifestItem {
                    index,
                    seed,
                    truth: truth.to_owned(),
                    image_file: format!("{}.png", ManifestItem::stem(index)),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// Writes `challenge_<i>.pgm` and `challenge_<i>.png` for every image plus
/// the manifest into `dir`, creating it if needed.
pub fn write_corpus(
    dir: &Path,
    template: &ChallengeSpec,
    base_seed: u64,
    challenges: &[Challenge],
) -> Result<CorpusManifest, ChallengeError> {
    for (i, c) in challenges.iter().enumerate() {
        write_corpus_images(dir, i, &c.image)?;
    }
    fs::create_dir_all(dir)?;
    let manifest = CorpusManifest::new(
        template,
        base_seed,
        challenges.iter().map(|c| (c.seed, c.truth.as_str())),
    );
    fs::write(dir.join(MANIFEST_FILE), manifest.to_json())?;
    Ok(manifest)
}

/// Writes `challenge_<index>.pgm` and `.png` into `dir`, creating it if needed.
pub fn write_corpus_images(dir: &Path, index: usize, image: &ImageGray) -> Result<(), ChallengeError> {
    fs::create_dir_all(dir)?;
    let stem = ManifestItem::stem(index);
    fs::write(dir.join(format!("{stem}.pgm")), write_pgm(image))?;
    fs::write(dir.join(format!("{stem}.png")), write_png(image))?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<CorpusManifest, ChallengeError> {
    Ok(serde_json::from_slice(&fs::read(path)?)?)
}
