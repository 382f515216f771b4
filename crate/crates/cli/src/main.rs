//! `brdf`: encode segmented meshes as BR-DFs, extract B-Reps, combine
//! models and evaluate reconstructions.
//!
//! Exit codes: 0 success, 2 usage or format errors, 3 geometry errors,
//! 4 invalid B-Rep output.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use brdf_core::csg::CsgOp;
use brdf_core::postproc::{
    FitParams, PostprocessParams, DEFAULT_DAMPING, DEFAULT_ENDPOINT_WEIGHT,
    DEFAULT_RESIDUAL_THRESHOLD, DEFAULT_SIMPLIFY_RATIO, DEFAULT_SMOOTH_ITERATIONS,
};

use crate::commands::CliError;
use crate::config::Config;

pub const DEFAULT_RESOLUTION: usize = 64;
pub const DEFAULT_TRUNCATION: f64 = 0.1;
pub const DEFAULT_FUZZ_COUNT: usize = 200;

#[derive(Debug, Parser)]
#[command(name = "brdf", version, about = "B-Rep distance field toolkit")]
struct Cli {
    /// JSON file with flag defaults (keys are flag names with `_`).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a segmented OBJ into a BR-DF container.
    Encode {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Extract a faceted B-Rep (JSON + OBJ) from a BR-DF container.
    Decode {
        input: PathBuf,
        out_dir: PathBuf,
        #[command(flatten)]
        post: PostArgs,
    },
    /// Encode, decode and score one OBJ or every OBJ in a directory.
    Roundtrip {
        input: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        post: PostArgs,
        /// Write JSON-lines records here instead of stdout.
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
        /// Surface sampling seed [default: 0]
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Union or intersection of two BR-DF containers.
    Csg {
        a: PathBuf,
        b: PathBuf,
        output: PathBuf,
        /// union or intersection
        #[arg(long, value_parser = parse_op)]
        op: CsgOp,
    },
    /// Decode every container in a directory and report validity.
    Validate {
        in_dir: PathBuf,
        #[command(flatten)]
        post: PostArgs,
    },
    /// Write a corpus of random blended-primitive BR-DFs.
    Fuzz {
        out_dir: PathBuf,
        /// Number of models [default: 200]
        #[arg(long)]
        count: Option<usize>,
        /// First model seed [default: 0]
        #[arg(long)]
        seed: Option<u64>,
        /// Lattice nodes per axis [default: 64]
        #[arg(long)]
        resolution: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Lattice nodes per axis [default: 64]
    #[arg(long)]
    resolution: Option<usize>,
    /// Distance truncation in normalized units [default: 0.1]
    #[arg(long)]
    truncation: Option<f64>,
}

#[derive(Debug, Args)]
struct PostArgs {
    /// Emit the raw MCT mesh.
    #[arg(long)]
    no_postprocess: bool,
    /// Laplacian smoothing iterations [default: 10]
    #[arg(long)]
    smooth_iters: Option<usize>,
    /// Per-face triangle ratio kept by simplification, in (0, 1] [default: 0.5]
    #[arg(long)]
    simplify: Option<f64>,
    /// Largest residual for a straight boundary fit [default: 0.002]
    #[arg(long)]
    fit_threshold: Option<f64>,
    /// Weight of boundary endpoints in the fit [default: 1000]
    #[arg(long)]
    endpoint_weight: Option<f64>,
}

fn parse_op(s: &str) -> Result<CsgOp, String> {
    s.parse()
        .map_err(|_| format!("unsupported operation '{s}' (expected union or intersection)"))
}

impl GridArgs {
    fn resolve(&self, cfg: &Config) -> (usize, f64) {
        (
            self.resolution.or(cfg.resolution).unwrap_or(DEFAULT_RESOLUTION),
            self.truncation.or(cfg.truncation).unwrap_or(DEFAULT_TRUNCATION),
        )
    }
}

impl PostArgs {
    /// `None` when post-processing is switched off.
    fn resolve(&self, cfg: &Config) -> Option<PostprocessParams> {
        if self.no_postprocess || cfg.no_postprocess == Some(true) {
            return None;
        }
        Some(PostprocessParams {
            fit: FitParams {
                residual_threshold: self
                    .fit_threshold
                    .or(cfg.fit_threshold)
                    .unwrap_or(DEFAULT_RESIDUAL_THRESHOLD),
                endpoint_weight: self
                    .endpoint_weight
                    .or(cfg.endpoint_weight)
                    .unwrap_or(DEFAULT_ENDPOINT_WEIGHT),
            },
            smooth_iterations: self
                .smooth_iters
                .or(cfg.smooth_iters)
                .unwrap_or(DEFAULT_SMOOTH_ITERATIONS),
            damping: DEFAULT_DAMPING,
            simplify_ratio: self.simplify.or(cfg.simplify).unwrap_or(DEFAULT_SIMPLIFY_RATIO),
        })
    }
}

/// Cap rayon's pool with `BRDF_THREADS`.
fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("BRDF_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("BRDF_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Encode { input, output, grid } => {
            let (r, tau) = grid.resolve(&cfg);
            commands::encode(&input, &output, r, tau)
        }
        Command::Decode { input, out_dir, post } => {
            commands::decode(&input, &out_dir, post.resolve(&cfg).as_ref())
        }
        Command::Roundtrip {
            input,
            grid,
            post,
            report,
            seed,
        } => {
            if post.no_postprocess {
                return Err(CliError::Usage(
                    "roundtrip always reports raw and post-processed results; drop --no-postprocess".into(),
                ));
            }
            let (r, tau) = grid.resolve(&cfg);
            let cfg = Config {
                no_postprocess: None,
                ..cfg
            };
            let params = post.resolve(&cfg).unwrap_or_default();
            let seed = seed.or(cfg.seed).unwrap_or(0);
            commands::roundtrip(&input, r, tau, &params, seed, report.as_deref())
        }
        Command::Csg { a, b, output, op } => commands::csg(&a, &b, &output, op),
        Command::Validate { in_dir, post } => commands::validate(&in_dir, post.resolve(&cfg).as_ref()),
        Command::Fuzz {
            out_dir,
            count,
            seed,
            resolution,
        } => commands::fuzz(
            &out_dir,
            count.or(cfg.count).unwrap_or(DEFAULT_FUZZ_COUNT),
            seed.or(cfg.seed).unwrap_or(0),
            resolution.or(cfg.resolution).unwrap_or(DEFAULT_RESOLUTION),
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("brdf: {e}");
            ExitCode::from(e.code())
        }
    }
}
