use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use motiondet::kv::KvMap;
use motiondet_cli::commands;
use motiondet_cli::config::RunConfig;

#[derive(Parser)]
#[command(
    name = "motiondet",
    version,
    about = "Background reconstruction and vehicle counting for fixed-camera image sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reconstruct the static background and write it as an image.
    Background(RunArgs),
    /// Detect vehicles against a given or reconstructed background.
    Detect(RunArgs),
    /// Reconstruct the background, then detect.
    Run(RunArgs),
    /// Time background reconstruction and detection.
    Bench(RunArgs),
    /// Render a synthetic scene and its ground truth.
    Synth(SynthArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Key-value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Frame directory or scene spec file.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file (background, bench) or directory (detect, run).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Precomputed background image.
    #[arg(long)]
    background: Option<PathBuf>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threshold: Option<u8>,
    #[arg(long)]
    se_size: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    min_pts: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
    /// Region of interest as x,y,w,h, or `none`.
    #[arg(long)]
    roi: Option<String>,
    /// Background sampling interval in seconds.
    #[arg(long)]
    interval: Option<f64>,
    #[arg(long)]
    max_frames: Option<usize>,
    /// Frame rate of the input sequence.
    #[arg(long)]
    fps: Option<f64>,
    #[arg(long)]
    kmeans_frames: Option<usize>,
    /// Write annotated frames next to the records.
    #[arg(long)]
    annotate: bool,
    /// Write the background next to the records.
    #[arg(long)]
    emit_background: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// Scene spec file.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Replaces the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
                KvMap::parse(&text).with_context(|| format!("invalid config {}", p.display()))?
            }
            None => KvMap::default(),
        };
        let mut o: Vec<(&str, String)> = Vec::new();
        let path = |p: &PathBuf| p.display().to_string();
        push(&mut o, "input", self.input.as_ref().map(path));
        push(&mut o, "output", self.out.as_ref().map(path));
        push(&mut o, "background", self.background.as_ref().map(path));
        push(&mut o, "method", self.method);
        push(&mut o, "seed", self.seed);
        push(&mut o, "threshold", self.threshold);
        push(&mut o, "se_size", self.se_size);
        push(&mut o, "epsilon", self.epsilon);
        push(&mut o, "min_pts", self.min_pts);
        push(&mut o, "stride", self.stride);
        push(&mut o, "roi", self.roi);
        push(&mut o, "interval", self.interval);
        push(&mut o, "max_frames", self.max_frames);
        push(&mut o, "fps", self.fps);
        push(&mut o, "kmeans_frames", self.kmeans_frames);
        push(&mut o, "emit_annotated", self.annotate.then_some(true));
        push(&mut o, "emit_background", self.emit_background.then_some(true));
        RunConfig::from_kv(file, &o)
    }
}

fn push<T: ToString>(out: &mut Vec<(&'static str, String)>, key: &'static str, value: Option<T>) {
    if let Some(v) = value {
        out.push((key, v.to_string()));
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Background(a) => print!("{}", commands::cmd_background(&a.into_config()?)?),
        Command::Detect(a) => print!("{}", commands::cmd_detect(&a.into_config()?)?),
        Command::Run(a) => print!("{}", commands::cmd_run(&a.into_config()?)?),
        Command::Bench(a) => {
            let cfg = a.into_config()?;
            let (csv, table) = commands::cmd_bench(&cfg)?;
            if cfg.output.is_none() {
                print!("{csv}");
            }
            eprint!("{table}");
        }
        Command::Synth(a) => print!("{}", commands::cmd_synth(&a.spec, &a.out, a.seed)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
