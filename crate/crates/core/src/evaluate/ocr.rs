//! External OCR programs driven through a command template.
//!
//! A template is split on whitespace (no shell quoting) and must contain the
//! placeholder `{image}` exactly once; it is replaced by the image path. The
//! program's standard output, minus trailing newlines, is the response.

use std::io::{self, Read};
use std::path::Path;
use std::process::{Child, Command, Stdio};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use wait_timeout::ChildExt;

pub const IMAGE_PLACEHOLDER: &str = "{image}";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OcrError {
    #[error("OCR command not found: {0}")]
    AdapterNotFound(String),
    #[error("OCR command exited with {}: {stderr}", code.map_or_else(|| "a signal".to_owned(), |c| format!("status {c}")))]
    NonZeroExit { code: Option<i32>, stderr: String },
    #[error("OCR command timed out after {0:?}")]
    Timeout(Duration),
    #[error("invalid adapter {name:?}: {reason}")]
    InvalidAdapter { name: String, reason: String },
    #[error("failed to run OCR command: {0}")]
    Io(String),
}

/// Which file the adapter is handed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageFormat {
    #[default]
    Png,
    Pgm,
}

impl ImageFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ImageFormat::Png => "png",
            ImageFormat::Pgm => "pgm",
        }
    }
}

/// On-disk adapter description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdapterConfig {
    pub name: String,
    pub command: String,
    pub timeout_ms: u64,
    #[serde(default)]
    pub format: ImageFormat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OcrAdapter {
    name: String,
    argv: Vec<String>,
    timeout: Duration,
    format: ImageFormat,
}

impl OcrAdapter {
    pub fn new(
        name: impl Into<String>,
        command: &str,
        timeout: Duration,
        format: ImageFormat,
    ) -> Result<Self, OcrError> {
        let name = name.into();
        let invalid = |reason: &str| OcrError::InvalidAdapter {
            name: name.clone(),
            reason: reason.to_owned(),
        };
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(invalid("name must be non-empty without whitespace"));
        }
        let argv: Vec<String> = command.split_whitespace().map(str::to_owned).collect();
        if argv.is_empty() {
            return Err(invalid("empty command"));
        }
        match command.matches(IMAGE_PLACEHOLDER).count() {
            1 => {}
            n => {
                return Err(invalid(&format!(
                    "command must contain {IMAGE_PLACEHOLDER} exactly once, found {n}"
                )))
            }
        }
        if argv[0].contains(IMAGE_PLACEHOLDER) {
            return Err(invalid("the program itself cannot be the placeholder"));
        }
        if timeout.is_zero() {
            return Err(invalid("timeout must be positive"));
        }
        Ok(Self {
            name,
            argv,
            timeout,
            format,
        })
    }

    pub fn from_config(cfg: &AdapterConfig) -> Result<Self, OcrError> {
        Self::new(
            &cfg.name,
            &cfg.command,
            Duration::from_millis(cfg.timeout_ms),
            cfg.format,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    pub fn format(&self) -> ImageFormat {
        self.format
    }

    fn command_for(&self, image: &Path) -> Command {
        let path = image.to_string_lossy();
        let mut args = self.argv.iter().map(|a| a.replace(IMAGE_PLACEHOLDER, &path));
        let mut cmd = Command::new(args.next().expect("validated non-empty"));
        cmd.args(args)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped());
        cmd
    }
}

/// Adapter config files hold either a bare list or `{"adapters": [...]}`.
pub fn parse_adapter_config(json: &str) -> Result<Vec<OcrAdapter>, OcrError> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum File {
        List(Vec<AdapterConfig>),
        Wrapped { adapters: Vec<AdapterConfig> },
    }
    let file: File = serde_json::from_str(json).map_err(|e| OcrError::InvalidAdapter {
        name: "<config>".into(),
        reason: e.to_string(),
    })?;
    let (File::List(list) | File::Wrapped { adapters: list }) = file;
    list.iter().map(OcrAdapter::from_config).collect()
}

fn drain(mut pipe: impl Read + Send + 'static) -> JoinHandle<Vec<u8>> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = pipe.read_to_end(&mut buf);
        buf
    })
}

fn kill(child: &mut Child) {
    let _ = child.kill();
    let _ = child.wait();
}

/// Runs the adapter on one image file and returns what it printed.
pub fn run_ocr(adapter: &OcrAdapter, image: &Path) -> Result<String, OcrError> {
    let mut child = adapter.command_for(image).spawn().map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => OcrError::AdapterNotFound(adapter.argv[0].clone()),
        _ => OcrError::Io(e.to_string()),
    })?;
    let stdout = drain(child.stdout.take().expect("piped"));
    let stderr = drain(child.stderr.take().expect("piped"));

    let status = match child.wait_timeout(adapter.timeout) {
        Ok(Some(status)) => status,
        Ok(None) => {
            kill(&mut child);
            // Grandchildren may still hold the pipes, so the readers are left detached.
            return Err(OcrError::Timeout(adapter.timeout));
        }
        Err(e) => {
            kill(&mut child);
            return Err(OcrError::Io(e.to_string()));
        }
    };
    let out = stdout.join().unwrap_or_default();
    let err = stderr.join().unwrap_or_default();
    if !status.success() {
        return Err(OcrError::NonZeroExit {
            code: status.code(),
            stderr: String::from_utf8_lossy(&err).trim_end().to_owned(),
        });
    }
    let text = String::from_utf8_lossy(&out);
    Ok(text.trim_end_matches(['\n', '\r']).to_owned())
}
