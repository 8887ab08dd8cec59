use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use super::ocr::{run_ocr, OcrAdapter};
use super::record::{write_transcript, Responder, TrialRecord};
use super::report::{aggregate, MetricsReport};
use super::EvalError;
use crate::challenge::{write_corpus_images, ChallengeSpec, CorpusManifest, MANIFEST_FILE};

pub const TRANSCRIPT_FILE: &str = "transcript.jsonl";
pub const REPORT_FILE: &str = "report.json";

/// Batch robustness run: one corpus per radius, every adapter on every image.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub n: usize,
    pub radii: Vec<f64>,
    pub base_seed: u64,
    /// Rendering parameters; its seed and radius are overridden per challenge.
    pub template: ChallengeSpec,
    pub out_dir: PathBuf,
    /// Upper bound on concurrently running adapter processes.
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn new(n: usize, radii: Vec<f64>, base_seed: u64, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            n,
            radii,
            base_seed,
            template: ChallengeSpec::default(),
            out_dir: out_dir.into(),
            workers: thread::available_parallelism().map_or(1, usize::from),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub records: Vec<TrialRecord>,
    pub report: MetricsReport,
}

/// Directory holding the corpus for one radius, e.g. `r1` or `r1.5`.
pub fn radius_dir(out_dir: &Path, radius: f64) -> PathBuf {
    out_dir.join(format!("r{radius}"))
}

/// Transcript id for challenge `index` of the corpus at `radius`. Batch ids
/// are derived from the run parameters so reruns produce identical
/// transcripts; they are never served to clients.
pub fn experiment_challenge_id(base_seed: u64, index: usize, radius: f64) -> String {
    format!("s{}-r{radius}", base_seed.wrapping_add(index as u64))
}

/// Generates the corpora, runs every adapter over them and writes
/// `transcript.jsonl` and `report.json` into the output directory.
///
/// Adapter failures become records with an empty response and an `error`
/// note. Records are ordered by radius, then challenge, then adapter,
/// whatever order the adapters finish in.
pub fn run_experiment(config: &ExperimentConfig, adapters: &[OcrAdapter]) -> Result<ExperimentOutcome, EvalError> {
    if config.n == 0 {
        return Err(EvalError::Config("challenge count must be at least 1".into()));
    }
    if config.radii.is_empty() {
        return Err(EvalError::Config("at least one radius is required".into()));
    }
    if adapters.is_empty() {
        return Err(EvalError::Config("at least one OCR adapter is required".into()));
    }
    if let Some(r) = config.radii.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
        return Err(EvalError::Config(format!("invalid radius {r}")));
    }

    let mut jobs = Vec::new();
    for &radius in &config.radii {
        let dir = radius_dir(&config.out_dir, radius);
        let template = ChallengeSpec {
            radius,
            ..config.template.clone()
        };
        let mut truths = Vec::with_capacity(config.n);
        for index in 0..config.n {
            let seed = config.base_seed.wrapping_add(index as u64);
            let (truth, image) = template.with_seed(seed).render()?;
            write_corpus_images(&dir, index, &image)?;
            truths.push((seed, truth));
        }
        let manifest = CorpusManifest::new(
            &template,
            config.base_seed,
            truths.iter().map(|(s, t)| (*s, t.as_str())),
        );
        fs::write(dir.join(MANIFEST_FILE), manifest.to_json())?;
        for (index, (_, truth)) in truths.into_iter().enumerate() {
            for adapter in adapters {
                let image = dir.join(format!("challenge_{index}.{}", adapter.format().extension()));
                jobs.push(Job {
                    adapter,
                    image,
                    record: TrialRecord {
                        challenge_id: experiment_challenge_id(config.base_seed, index, radius),
                        truth: truth.clone(),
                        response: String::new(),
                        responder: Responder::Ocr(adapter.name().to_owned()),
                        rating: None,
                        radius,
                        elapsed_ms: None,
                        error: None,
                    },
                });
            }
        }
    }

    let records = run_jobs(jobs, config.workers.max(1));
    let report = aggregate(&records)?;
    let mut transcript = Vec::new();
    write_transcript(&mut transcript, &records)?;
    fs::write(config.out_dir.join(TRANSCRIPT_FILE), transcript)?;
    fs::write(config.out_dir.join(REPORT_FILE), report.to_json())?;
    Ok(ExperimentOutcome { records, report })
}

struct Job<'a> {
    adapter: &'a OcrAdapter,
    image: PathBuf,
    record: TrialRecord,
}

fn run_jobs(jobs: Vec<Job<'_>>, workers: usize) -> Vec<TrialRecord> {
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<TrialRecord>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
    thread::scope(|s| {
        for _ in 0..workers.min(jobs.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(i) else { break };
                let mut record = job.record.clone();
                match run_ocr(job.adapter, &job.image) {
                    Ok(text) => record.response = text,
                    Err(e) => record.error = Some(e.to_string()),
                }
                *slots[i].lock().unwrap() = Some(record);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("every job ran"))
        .collect()
}
