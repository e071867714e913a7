use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

mod commands;
mod settings;

use commands::SimOutput;
use settings::{ConfigFile, PipelineArgs};

/// Environment variable capping the number of worker threads.
const THREADS_ENV: &str = "MEFUSE_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "mefuse",
    version,
    about = "Multi-exposure fusion with exposure compensation"
)]
struct Cli {
    /// `key = value` file providing defaults for any flag
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fuse LDR exposures of one scene into a single image
    Fuse {
        /// Input images (PNG or binary PPM), in any order; they are ranked by brightness
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Output image; `.ppm` writes PPM, anything else PNG
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Fuse the raw inputs, without enhancement or compensation
        #[arg(long)]
        skip_enhance: bool,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Synthesize exposure stacks from HDR images and compare both methods
    Simulate1 {
        /// Radiance `.hdr` files
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Comma-separated exposure offsets in EV [default: -1,0,1]
        #[arg(long, allow_hyphen_values = true)]
        evs: Option<String>,
        /// Also write every synthesized exposure
        #[arg(long)]
        dump_stacks: bool,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Compare both methods on captured LDR stacks
    Simulate2 {
        /// Stacks: a directory of PNG/PPM files or a comma-separated file list
        #[arg(required = true)]
        stacks: Vec<String>,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
}

#[derive(Debug, clap::Args)]
struct SimArgs {
    /// CSV table with input, original and proposed scores [default: stdout]
    #[arg(long)]
    report: Option<PathBuf>,
    /// CSV with one row per image and method
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Directory receiving the fused images [default: .]
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl SimArgs {
    fn resolve(self, file: &ConfigFile, dump_stacks: bool) -> Result<SimOutput> {
        Ok(SimOutput {
            out_dir: file
                .pick(self.out_dir, "out-dir")?
                .unwrap_or_else(|| PathBuf::from(".")),
            report: file.pick(self.report, "report")?,
            scores: file.pick(self.scores, "scores")?,
            dump_stacks,
        })
    }
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| anyhow!("{THREADS_ENV} must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring worker threads")
}

fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    let file = ConfigFile::load(cli.config.as_deref())?;
    match cli.command {
        Command::Fuse {
            inputs,
            output,
            skip_enhance,
            pipeline,
        } => {
            let cfg = pipeline.resolve(&file)?;
            let Some(output) = file.pick(output, "output")? else {
                bail!("no output path given (use -o)");
            };
            let skip = file.switch(skip_enhance, "skip-enhance")?;
            commands::fuse(&inputs, &output, &cfg, skip)
        }
        Command::Simulate1 {
            inputs,
            evs,
            dump_stacks,
            sim,
            pipeline,
        } => {
            let mut cfg = pipeline.resolve(&file)?;
            if let Some(evs) = file.evs(evs.as_deref())? {
                cfg.ev_offsets = evs;
            }
            let out = sim.resolve(&file, file.switch(dump_stacks, "dump-stacks")?)?;
            commands::simulate1(&inputs, &cfg.ev_offsets, &cfg, &out)
        }
        Command::Simulate2 {
            stacks,
            sim,
            pipeline,
        } => {
            let cfg = pipeline.resolve(&file)?;
            let out = sim.resolve(&file, false)?;
            commands::simulate2(&stacks, &cfg, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::FAILURE,
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
