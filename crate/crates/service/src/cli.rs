use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use blurcap_core::challenge::{make_corpus, write_corpus};
use blurcap_core::evaluate::{parse_adapter_config, read_transcript_file, run_experiment, ExperimentConfig};
use blurcap_core::raster::{read_pgm, read_png, write_pgm, write_png};
use blurcap_core::{aggregate, gaussian_blur, ImageGray};
use clap::{Args, Parser, Subcommand};

use crate::clock::SystemClock;
use crate::config::ServiceConfig;

#[derive(Debug, Parser)]
#[command(name = "blurcap", version, about = "Gaussian-blurred text CAPTCHAs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded corpus with a manifest.
    Gen(GenArgs),
    /// Blur one PGM or PNG image.
    Blur(BlurArgs),
    /// Run or summarize a robustness evaluation.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Start the HTTP challenge service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Pixel scale applied to the 8x8 glyphs.
    #[arg(long)]
    pub scale: Option<usize>,
    /// White border around the text, in pixels.
    #[arg(long)]
    pub padding: Option<usize>,
    /// Drop 0, O, o, 1, l and I from the alphabet.
    #[arg(long)]
    pub exclude_confusables: bool,
    /// Service config supplying defaults for unset flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl RenderArgs {
    fn service_config(&self) -> anyhow::Result<ServiceConfig> {
        let mut cfg = match &self.config {
            Some(path) => ServiceConfig::load(path)?,
            None => ServiceConfig::default(),
        };
        if let Some(scale) = self.scale {
            cfg.scale = scale;
        }
        if let Some(padding) = self.padding {
            cfg.padding = padding;
        }
        cfg.exclude_confusables |= self.exclude_confusables;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub radius: f64,
    #[arg(long)]
    pub seed: u64,
    /// Output directory; defaults to the config's corpus directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub render: RenderArgs,
}

#[derive(Debug, Args)]
pub struct BlurArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub radius: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Render corpora at each radius and run every OCR adapter on them.
    Run(EvalRunArgs),
    /// Aggregate a transcript into a metrics report.
    Report(EvalReportArgs),
}

#[derive(Debug, Args)]
pub struct EvalRunArgs {
    #[arg(long)]
    pub n: usize,
    /// Comma-separated radii, e.g. `0,1,2`.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub radii: Vec<f64>,
    /// Adapter config file; defaults to the config's adapters path.
    #[arg(long)]
    pub adapters: Option<PathBuf>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Concurrent adapter processes; defaults to the CPU count.
    #[arg(long)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub render: RenderArgs,
}

#[derive(Debug, Args)]
pub struct EvalReportArgs {
    #[arg(long)]
    pub transcript: PathBuf,
    /// Print a text table instead of JSON.
    #[arg(long)]
    pub table: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Gen(args) => gen(args),
        Command::Blur(args) => blur(args),
        Command::Eval(EvalCommand::Run(args)) => eval_run(args),
        Command::Eval(EvalCommand::Report(args)) => {
            print!("{}", eval_report(&args.transcript, args.table)?);
            Ok(())
        }
        Command::Serve(args) => serve(args),
    }
}

fn check_radius(radius: f64) -> anyhow::Result<()> {
    if !(radius >= 0.0 && radius.is_finite()) {
        bail!("radius must be a non-negative number, got {radius}");
    }
    Ok(())
}

fn gen(args: GenArgs) -> anyhow::Result<()> {
    check_radius(args.radius)?;
    let cfg = args.render.service_config()?;
    let template = blurcap_core::ChallengeSpec {
        radius: args.radius,
        ..cfg.template()
    };
    let out = args.out.unwrap_or(cfg.corpus_dir);
    let corpus = make_corpus(args.n, &template, args.seed)?;
    let manifest = write_corpus(&out, &template, args.seed, &corpus)?;
    eprintln!("wrote {} challenges to {}", manifest.items.len(), out.display());
    Ok(())
}

#[derive(Clone, Copy)]
enum Format {
    Pgm,
    Png,
}

fn format_of(path: &Path) -> anyhow::Result<Format> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("pgm") => Ok(Format::Pgm),
        Some("png") => Ok(Format::Png),
        _ => bail!("{}: expected a .pgm or .png file", path.display()),
    }
}

fn read_image(path: &Path) -> anyhow::Result<ImageGray> {
    let format = format_of(path)?;
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let img = match format {
        Format::Pgm => read_pgm(&bytes),
        Format::Png => read_png(&bytes),
    };
    img.with_context(|| format!("decoding {}", path.display()))
}

fn blur(args: BlurArgs) -> anyhow::Result<()> {
    check_radius(args.radius)?;
    let out_format = format_of(&args.out)?;
    let img = read_image(&args.input)?;
    let blurred = gaussian_blur(&img, args.radius)?;
    let bytes = match out_format {
        Format::Pgm => write_pgm(&blurred),
        Format::Png => write_png(&blurred),
    };
    std::fs::write(&args.out, bytes).with_context(|| format!("writing {}", args.out.display()))
}

fn eval_run(args: EvalRunArgs) -> anyhow::Result<()> {
    for &r in &args.radii {
        check_radius(r)?;
    }
    let cfg = args.render.service_config()?;
    let adapters_path = args
        .adapters
        .or(cfg.adapters_path.clone())
        .context("no adapter config: pass --adapters or set adapters_path")?;
    let text =
        std::fs::read_to_string(&adapters_path).with_context(|| format!("reading {}", adapters_path.display()))?;
    let adapters = parse_adapter_config(&text)?;
    let mut experiment = ExperimentConfig::new(
        args.n,
        args.radii,
        args.seed,
        args.out.unwrap_or(cfg.corpus_dir.clone()),
    );
    experiment.template = cfg.template();
    if let Some(w) = args.workers {
        experiment.workers = w.max(1);
    }
    let outcome = run_experiment(&experiment, &adapters)?;
    print!("{}", outcome.report.to_table());
    Ok(())
}

/// The report for a transcript file, as printed by `eval report`.
pub fn eval_report(transcript: &Path, table: bool) -> anyhow::Result<String> {
    if !transcript.exists() {
        bail!("{}: no such transcript", transcript.display());
    }
    let records = read_transcript_file(transcript)?;
    let report = aggregate(&records)?;
    Ok(if table { report.to_table() } else { report.to_json() })
}

fn serve(args: ServeArgs) -> anyhow::Result<()> {
    let cfg = match &args.config {
        Some(path) => ServiceConfig::load(path)?,
        None => {
            let mut cfg = ServiceConfig::default();
            cfg.apply_env(|k| std::env::var(k).ok())?;
            cfg
        }
    };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(crate::api::serve(&cfg, Arc::new(SystemClock)))
}
