use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::EvalError;

pub const MIN_RATING: u8 = 1;
pub const MAX_RATING: u8 = 10;

/// Who answered a challenge. Serialized as `"human"` or `"ocr:<name>"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Responder {
    Human,
    Ocr(String),
}

impl Responder {
    pub fn is_human(&self) -> bool {
        matches!(self, Responder::Human)
    }
}

impl fmt::Display for Responder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Responder::Human => f.write_str("human"),
            Responder::Ocr(name) => write!(f, "ocr:{name}"),
        }
    }
}

impl FromStr for Responder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "human" => Ok(Responder::Human),
            _ => match s.strip_prefix("ocr:") {
                Some(name) if !name.is_empty() => Ok(Responder::Ocr(name.to_owned())),
                _ => Err(format!("unknown responder {s:?}")),
            },
        }
    }
}

impl Serialize for Responder {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Responder {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// One answer to one challenge. Field order is the transcript line layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub challenge_id: String,
    pub truth: String,
    pub response: String,
    pub responder: Responder,
    pub rating: Option<u8>,
    pub radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
    #[serde(default)]
    pub error: Option<String>,
}

impl TrialRecord {
    /// Ratings must lie in `1..=10` and only humans give them.
    pub fn validate(&self) -> Result<(), EvalError> {
        if let Some(r) = self.rating {
            if !self.responder.is_human() {
                return Err(EvalError::InvalidRecord(format!(
                    "{} cannot give a rating",
                    self.responder
                )));
            }
            if !(MIN_RATING..=MAX_RATING).contains(&r) {
                return Err(EvalError::InvalidRecord(format!("rating {r} outside 1..=10")));
            }
        }
        if !(self.radius >= 0.0 && self.radius.is_finite()) {
            return Err(EvalError::InvalidRecord(format!("radius {}", self.radius)));
        }
        Ok(())
    }

    /// Serialized form without the trailing newline.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

/// Parses JSON Lines, skipping blank lines. Each record is validated.
pub fn read_transcript(reader: impl BufRead) -> Result<Vec<TrialRecord>, EvalError> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TrialRecord = serde_json::from_str(&line).map_err(|e| EvalError::Transcript {
            line: n + 1,
            message: e.to_string(),
        })?;
        record.validate().map_err(|e| EvalError::Transcript {
            line: n + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

pub fn read_transcript_file(path: &Path) -> Result<Vec<TrialRecord>, EvalError> {
    match File::open(path) {
        Ok(f) => read_transcript(io::BufReader::new(f)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(e) => Err(e.into()),
    }
}

pub fn write_transcript(mut writer: impl Write, records: &[TrialRecord]) -> io::Result<()> {
    for r in records {
        writeln!(writer, "{}", r.to_json_line())?;
    }
    writer.flush()
}

/// Append-only transcript file. Appends are serialized through one lock and
/// flushed line by line.
#[derive(Debug)]
pub struct TranscriptWriter {
    path: PathBuf,
    file: Mutex<BufWriter<File>>,
}

impl TranscriptWriter {
    pub fn open(path: &Path) -> io::Result<Self> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            path: path.to_owned(),
            file: Mutex::new(BufWriter::new(file)),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Reads every record written so far. Holds the append lock, so no
    /// partially written line is ever observed.
    pub fn read_all(&self) -> Result<Vec<TrialRecord>, EvalError> {
        let _guard = self.file.lock().unwrap_or_else(|e| e.into_inner());
        read_transcript_file(&self.path)
    }

    pub fn append(&self, record: &TrialRecord) -> Result<(), EvalError> {
        record.validate()?;
        let line = record.to_json_line();
        let mut file = self.file.lock().unwrap_or_else(|e| e.into_inner());
        writeln!(file, "{line}")?;
        file.flush()?;
        Ok(())
    }
}
