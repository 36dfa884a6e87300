//! Command-line front end: model fitting, object generation, fusion,
//! evaluation and parameter sweeps driven by a run manifest.

pub mod commands;
pub mod manifest;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use mistfuse::fusion::FusionMode;
use mistfuse::objectgen::ObjectKind;

pub use commands::{cmd_eval, cmd_fit, cmd_fuse, cmd_gen, cmd_roundtrip_audit, cmd_sweep, Detector, FuseSummary};
pub use manifest::{Overrides, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "mistfuse", version, about = "Fuse water-mist and smoke point clouds into LiDAR scenes and score detectors")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Run manifest (TOML).
    pub manifest: PathBuf,
    #[arg(long)]
    pub mode: Option<FusionMode>,
    #[arg(long)]
    pub dh: Option<f64>,
    #[arg(long)]
    pub dv: Option<f64>,
    /// Spray angle in degrees.
    #[arg(long, allow_hyphen_values = true)]
    pub angle: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Laser model file; overrides the manifest.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

impl RunArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            mode: self.mode,
            d_h: self.dh,
            d_v: self.dv,
            angle: self.angle,
            seed: self.seed,
            model: self.model.clone(),
        }
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Score with the built-in point-count detector.
    #[arg(long)]
    pub mock_detector: bool,
    /// Directory of detection interchange files.
    #[arg(long, conflicts_with = "mock_detector")]
    pub detections: Option<PathBuf>,
}

impl EvalArgs {
    fn detector(&self) -> Result<Detector> {
        match (&self.detections, self.mock_detector) {
            (Some(dir), _) => Ok(Detector::Files(dir.clone())),
            (None, true) => Ok(Detector::Mock),
            (None, false) => anyhow::bail!("choose --mock-detector or --detections <dir>"),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a per-ring laser model to raw frames.
    Fit {
        #[arg(required = true)]
        frames: Vec<PathBuf>,
        /// Output model file.
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = mistfuse::rangesim::DEFAULT_AZIMUTH_BINS)]
        azimuth_bins: usize,
    },
    /// Generate an object sequence in the recording layout.
    Gen {
        #[arg(long, default_value = "water_mist")]
        kind: ObjectKind,
        #[arg(long, default_value_t = mistfuse::objectgen::DEFAULT_FRAMES)]
        frames: usize,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fuse the object sequence into every manifest frame.
    Fuse(RunArgs),
    /// Score the manifest's fusion config.
    Eval(EvalArgs),
    /// Score every cell of the manifest's sweep grid.
    Sweep(EvalArgs),
    /// Report points lost by a project/back-project round trip.
    RoundtripAudit {
        #[arg(required = true)]
        frames: Vec<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

/// How a successful run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    /// No vehicle was detected before the perturbation.
    Undefined,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Done => 0,
            Outcome::Undefined => 1,
        }
    }
}

/// Exit code for a failed run.
pub const INPUT_ERROR: u8 = 2;

pub fn run(cli: Cli) -> Result<Outcome> {
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = cli.jobs {
            b = b.num_threads(n.max(1));
        }
        b.build()?
    };
    pool.install(|| dispatch(cli.command))
}

fn dispatch(command: Command) -> Result<Outcome> {
    match command {
        Command::Fit {
            frames,
            model,
            azimuth_bins,
        } => {
            let fitted = cmd_fit(&frames, &model, azimuth_bins)?;
            println!("fitted {} rings -> {}", fitted.ring_count(), model.display());
        }
        Command::Gen {
            kind,
            frames,
            points,
            seed,
            out,
        } => {
            cmd_gen(kind, frames, points, seed, &out)?;
            println!("wrote {frames} frames -> {}", out.display());
        }
        Command::Fuse(args) => {
            let manifest = RunManifest::load(&args.manifest, &args.overrides())?;
            let s = cmd_fuse(&manifest)?;
            println!("fused {} frames ({} skipped) -> {}", s.written, s.skipped, manifest.output_dir.display());
        }
        Command::Eval(args) => {
            let manifest = RunManifest::load(&args.run.manifest, &args.run.overrides())?;
            let result = cmd_eval(&manifest, &args.detector()?)?;
            print!("{}", result.to_csv());
            if result.rows[0].asr().is_none() {
                eprintln!("attack success rate undefined: no vehicle detected before fusion");
                return Ok(Outcome::Undefined);
            }
        }
        Command::Sweep(args) => {
            let manifest = RunManifest::load(&args.run.manifest, &args.run.overrides())?;
            let result = cmd_sweep(&manifest, &args.detector()?)?;
            print!("{}", result.to_csv());
            match result.argmax() {
                Some(i) => {
                    let r = &result.rows[i];
                    eprintln!("best: {} asr={:.6}", r.cell.tag(), r.asr().unwrap_or_default());
                }
                None => {
                    eprintln!("attack success rate undefined in every cell");
                    return Ok(Outcome::Undefined);
                }
            }
        }
        Command::RoundtripAudit { frames, model } => {
            print!("{}", cmd_roundtrip_audit(&frames, model.as_deref())?);
        }
    }
    Ok(Outcome::Done)
}
