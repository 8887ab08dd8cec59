use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::metrics::{char_similarity, exact_match, is_readable};
use super::record::{Responder, TrialRecord};
use super::EvalError;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Scores for one group of records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n: usize,
    /// Mean character similarity in `[0, 1]`.
    pub avg_char_similarity: f64,
    pub exact_match_pct: f64,
    pub readable_pct: f64,
    /// Mean of the ratings that were given, if any.
    pub avg_rating: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    pub responder: Responder,
    pub radius: f64,
    #[serde(flatten)]
    pub metrics: Metrics,
}

/// Record-weighted scores across every OCR responder and across humans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub ocr: Option<Metrics>,
    pub human: Option<Metrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusTotals {
    pub radius: f64,
    #[serde(flatten)]
    pub totals: Totals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    /// One entry per (responder, radius), ordered by responder then radius.
    pub buckets: Vec<Bucket>,
    pub totals: Totals,
    /// The same totals restricted to each radius, ascending.
    pub by_radius: Vec<RadiusTotals>,
}

#[derive(Default)]
struct Accumulator {
    similarities: Vec<f64>,
    exact: usize,
    readable: usize,
    rating_sum: u64,
    ratings: usize,
}

impl Accumulator {
    fn push(&mut self, r: &TrialRecord) {
        self.similarities.push(char_similarity(&r.truth, &r.response));
        self.exact += usize::from(exact_match(&r.truth, &r.response));
        self.readable += usize::from(is_readable(&r.response));
        if let Some(rating) = r.rating {
            self.rating_sum += u64::from(rating);
            self.ratings += 1;
        }
    }

    fn finish(mut self) -> Option<Metrics> {
        let n = self.similarities.len();
        if n == 0 {
            return None;
        }
        // Summing in sorted order keeps the result independent of record order.
        self.similarities.sort_by(f64::total_cmp);
        let sim_sum: f64 = self.similarities.iter().sum();
        let pct = |k: usize| 100.0 * k as f64 / n as f64;
        Some(Metrics {
            n,
            avg_char_similarity: sim_sum / n as f64,
            exact_match_pct: pct(self.exact),
            readable_pct: pct(self.readable),
            avg_rating: (self.ratings > 0).then(|| self.rating_sum as f64 / self.ratings as f64),
        })
    }
}

/// Orders radii numerically with `-0.0` folded into `0.0`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct RadiusKey(f64);

impl Eq for RadiusKey {}

impl PartialOrd for RadiusKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RadiusKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl RadiusKey {
    fn new(r: f64) -> Self {
        Self(if r == 0.0 { 0.0 } else { r })
    }
}

#[derive(Default)]
struct Split {
    ocr: Accumulator,
    human: Accumulator,
}

impl Split {
    fn push(&mut self, r: &TrialRecord) {
        if r.responder.is_human() {
            self.human.push(r)
        } else {
            self.ocr.push(r)
        }
    }

    fn finish(self) -> Totals {
        Totals {
            ocr: self.ocr.finish(),
            human: self.human.finish(),
        }
    }
}

/// Scores every record against its truth and groups the results.
pub fn aggregate(records: &[TrialRecord]) -> Result<MetricsReport, EvalError> {
    if records.is_empty() {
        return Err(EvalError::NoRecords);
    }
    let mut buckets: BTreeMap<(Responder, RadiusKey), Accumulator> = BTreeMap::new();
    let mut totals = Split::default();
    let mut by_radius: BTreeMap<RadiusKey, Split> = BTreeMap::new();
    for r in records {
        let radius = RadiusKey::new(r.radius);
        buckets.entry((r.responder.clone(), radius)).or_default().push(r);
        totals.push(r);
        by_radius.entry(radius).or_default().push(r);
    }
    Ok(MetricsReport {
        schema_version: REPORT_SCHEMA_VERSION,
        buckets: buckets
            .into_iter()
            .map(|((responder, radius), acc)| Bucket {
                responder,
                radius: radius.0,
                metrics: acc.finish().expect("bucket has at least one record"),
            })
            .collect(),
        totals: totals.finish(),
        by_radius: by_radius
            .into_iter()
            .map(|(radius, split)| RadiusTotals {
                radius: radius.0,
                totals: split.finish(),
            })
            .collect(),
    })
}

impl MetricsReport {
    pub fn bucket(&self, responder: &Responder, radius: f64) -> Option<&Bucket> {
        self.buckets
            .iter()
            .find(|b| &b.responder == responder && RadiusKey::new(b.radius) == RadiusKey::new(radius))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Human-readable table with values rounded to two decimals.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<24} {:>6} {:>5} {:>11} {:>9} {:>10} {:>7}",
            "responder", "radius", "n", "similarity%", "exact%", "readable%", "rating"
        );
        let mut row = |label: &str, radius: Option<f64>, m: &Metrics| {
            let radius = radius.map_or_else(|| "all".to_owned(), |r| format!("{r}"));
            let rating = m.avg_rating.map_or_else(|| "-".to_owned(), |r| format!("{r:.2}"));
            let _ = writeln!(
                out,
                "{:<24} {:>6} {:>5} {:>11.2} {:>9.2} {:>10.2} {:>7}",
                label,
                radius,
                m.n,
                100.0 * m.avg_char_similarity,
                m.exact_match_pct,
                m.readable_pct,
                rating
            );
        };
        for b in &self.buckets {
            row(&b.responder.to_string(), Some(b.radius), &b.metrics);
        }
        for r in &self.by_radius {
            if let Some(m) = &r.totals.ocr {
                row("total ocr", Some(r.radius), m);
            }
            if let Some(m) = &r.totals.human {
                row("total human", Some(r.radius), m);
            }
        }
        if let Some(m) = &self.totals.ocr {
            row("total ocr", None, m);
        }
        if let Some(m) = &self.totals.human {
            row("total human", None, m);
        }
        out
    }
}
