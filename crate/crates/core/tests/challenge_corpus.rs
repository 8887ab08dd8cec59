use std::collections::HashSet;

use blurcap_core::challenge::{
    is_valid_truth, make_challenge, make_corpus, random_words, Alphabet, ChallengeId, ChallengeSpec, SplitMix64,
};
use blurcap_core::filter::total_variation;
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
#[allow(clippy::needless_range_loop)]
fn word_lengths_and_characters_are_uniform() {
    let alphabet = Alphabet::default();
    let mut rng = SplitMix64::new(2024);
    let mut lengths = [0usize; 8];
    let mut chars = vec![0usize; alphabet.len()];
    let draws = 10_000;
    for _ in 0..draws {
        let text = random_words(&mut rng, &alphabet);
        for word in text.split(' ') {
            lengths[word.len()] += 1;
            for c in word.chars() {
                chars[alphabet.chars().iter().position(|&a| a == c).unwrap()] += 1;
            }
        }
    }
    let words = (2 * draws) as f64;
    for len in 4..=7 {
        let freq = lengths[len] as f64 / words;
        assert!((freq - 0.25).abs() <= 0.02, "length {len}: {freq}");
    }
    let total: usize = chars.iter().sum();
    let expected = total as f64 / chars.len() as f64;
    let stat: f64 = chars.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    let critical = ChiSquared::new((chars.len() - 1) as f64).unwrap().inverse_cdf(0.999);
    assert!(stat < critical, "chi-square {stat} >= {critical}");
}

#[test]
fn corpus_is_reproducible() {
    let template = ChallengeSpec {
        radius: 1.0,
        ..Default::default()
    };
    let a = make_corpus(50, &template, 7).unwrap();
    let b = make_corpus(50, &template, 7).unwrap();
    assert_eq!(a.len(), 50);
    let truths: HashSet<&str> = a.iter().map(|c| c.truth.as_str()).collect();
    assert_eq!(truths.len(), 50);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.truth, y.truth);
        assert_eq!(x.image, y.image);
        assert_ne!(x.id, y.id);
    }
}

#[test]
fn blur_smooths_every_corpus_image() {
    let base = ChallengeSpec::default();
    let mut monotone = 0;
    for i in 0..50 {
        let tv = |radius| {
            let (_, img) = ChallengeSpec {
                radius,
                ..base.with_seed(100 + i)
            }
            .render()
            .unwrap();
            total_variation(&img)
        };
        let (t0, t1, t2) = (tv(0.0), tv(1.0), tv(2.0));
        if t2 <= t1 && t1 <= t0 {
            monotone += 1;
        }
    }
    assert_eq!(monotone, 50);
}

#[test]
fn ids_are_unique_and_unrelated_to_seed() {
    let mut seen = HashSet::with_capacity(100_000);
    for _ in 0..100_000 {
        let id = ChallengeId::random();
        assert_eq!(id.as_str().len(), 32);
        assert!(seen.insert(id));
    }
    let spec = ChallengeSpec {
        radius: 0.0,
        ..Default::default()
    };
    let ids: HashSet<_> = (0..20).map(|_| make_challenge(&spec).unwrap().id).collect();
    assert_eq!(ids.len(), 20);
}

#[test]
fn ids_have_balanced_bits() {
    // 4096 ids x 128 bits: every bit position should be set about half the time.
    let mut ones = [0u32; 128];
    let n = 4096;
    for _ in 0..n {
        let id = ChallengeId::random();
        let bytes = (0..16).map(|i| u8::from_str_radix(&id.as_str()[2 * i..2 * i + 2], 16).unwrap());
        for (i, b) in bytes.enumerate() {
            for bit in 0..8 {
                ones[i * 8 + bit] += u32::from(b >> bit & 1);
            }
        }
    }
    // 6 standard deviations around n/2.
    let sd = (n as f64 / 4.0).sqrt();
    for count in ones {
        assert!((count as f64 - n as f64 / 2.0).abs() < 6.0 * sd);
    }
}

proptest! {
    #[test]
    fn every_seed_yields_grammatical_truth(seed: u64, confusables: bool) {
        let alphabet = if confusables { Alphabet::alphanumeric() } else { Alphabet::without_confusables() };
        let spec = ChallengeSpec { seed, radius: 0.0, scale: 1, padding: 0, alphabet: alphabet.clone() };
        let (truth, image) = spec.render().unwrap();
        prop_assert!(is_valid_truth(&truth, &alphabet), "{}", truth);
        prop_assert_eq!(image.width(), truth.chars().count() * 8);
        prop_assert_eq!(spec.render().unwrap().0, truth);
    }
}
