//! `vline`: phantoms, forward transforms, reconstructions, Radon data,
//! images and error reports from the command line.
//!
//! Exit status: 0 success, 2 configuration error, 3 mathematical or
//! geometric obstruction, 4 file error.

mod commands;
mod error;
mod files;
mod render;
mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{in_file, CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "vline", version, about = "V-line and star transform tomography of planar vector fields")]
struct Cli {
    /// Worker threads; 0 picks one per core. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// key=value file whose entries act as long flags; flags given on the
    /// command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a standard phantom and its closed-form oracles.
    Phantom(PhantomArgs),
    /// Apply a transform to a field file.
    Forward(ForwardArgs),
    /// Reconstruct from transform data.
    Invert(InvertArgs),
    /// Radon transform of each component of a field file.
    Radon(RadonArgs),
    /// Export a field file as PGM/PPM images.
    Render(RenderArgs),
    /// Relative L1, L2 and Linf errors of a field against an oracle.
    Report(ReportArgs),
}

const COMMANDS: [&str; 6] = ["phantom", "forward", "invert", "radon", "render", "report"];

#[derive(Debug, Args)]
pub struct PhantomArgs {
    /// potential, solenoidal or mixed.
    #[arg(long, default_value = "mixed")]
    pub kind: String,
    #[arg(long, default_value_t = 256)]
    pub nx: usize,
    /// Support radius of the phantom.
    #[arg(long, default_value_t = 1.0)]
    pub r1: f64,
    #[arg(long, default_value = "0,0")]
    pub center: String,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Geometry the data disc must accommodate; defaults to u=(1,0), v=(0,1).
    #[arg(long)]
    pub geometry: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ForwardArgs {
    /// L, T, I, J, star or signed.
    #[arg(long)]
    pub transform: String,
    /// VLT1 field (two components; one for signed).
    #[arg(long)]
    pub field: PathBuf,
    #[arg(long)]
    pub geometry: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Gaussian noise standard deviation relative to max|data|.
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Ray quadrature step; defaults to half the grid spacing.
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InvertArgs {
    /// lt, li, tj, star, potential, stream, curl, div or signed.
    #[arg(long)]
    pub pipeline: String,
    /// Comma-separated transform files in pipeline order (lt: L,T; li: L,I; tj: T,J).
    #[arg(long)]
    pub inputs: String,
    #[arg(long)]
    pub geometry: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// VLT1 oracle to compare the reconstruction against.
    #[arg(long)]
    pub oracle: Option<PathBuf>,
    /// Report path; defaults to <out>.report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Star pipeline: angles over the full turn.
    #[arg(long, default_value_t = 360)]
    pub angles: usize,
    /// Star pipeline: guard band half-width in degrees around singular directions.
    #[arg(long, default_value_t = 2.0)]
    pub guard: f64,
    /// Star pipeline: ramlak or hann.
    #[arg(long, default_value = "ramlak")]
    pub window: String,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RadonArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 180)]
    pub angles: usize,
    /// Offsets across the data disc; defaults to one per grid cell.
    #[arg(long)]
    pub offsets: Option<usize>,
    /// Cover [0, 2 pi) instead of [0, pi).
    #[arg(long)]
    pub full_turn: bool,
    /// VLS1 output.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Output prefix: <out>.pgm for scalars, <out>_mag.pgm and <out>_dir.ppm for vectors.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub field: PathBuf,
    #[arg(long)]
    pub oracle: PathBuf,
    /// Disc radius of the comparison; defaults to the grid's r1.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

/// Inserts the entries of the `--config` file after the subcommand name,
/// skipping keys already given as flags. `true` becomes a bare switch and
/// `false` is dropped.
fn expand_config(args: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let strs: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let path = strs.iter().enumerate().find_map(|(i, s)| {
        if s == "--config" {
            strs.get(i + 1).cloned()
        } else {
            s.strip_prefix("--config=").map(str::to_owned)
        }
    });
    let (Some(path), Some(at)) = (path, strs.iter().position(|s| COMMANDS.contains(&s.as_str()))) else {
        return Ok(args);
    };
    let path = PathBuf::from(path);
    let file = std::fs::File::open(&path).map_err(|e| CliError::at(&path, e))?;
    let entries = in_file(&path, vline_core::io::parse_key_values(std::io::BufReader::new(file)))
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut extra: Vec<OsString> = Vec::new();
    for (k, v) in entries {
        let flag = format!("--{}", k.replace('_', "-"));
        let given = strs.iter().any(|s| *s == flag || s.starts_with(&format!("{flag}=")));
        if k == "config" || given || v == "false" {
            continue;
        }
        extra.push(flag.into());
        if v != "true" {
            extra.push(v.into());
        }
    }
    let mut out = args;
    out.splice(at + 1..at + 1, extra);
    Ok(out)
}

fn run() -> CliResult<()> {
    let args = expand_config(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    match &cli.command {
        Command::Phantom(a) => commands::phantom(a),
        Command::Forward(a) => commands::forward(a),
        Command::Invert(a) => commands::invert(a),
        Command::Radon(a) => commands::radon(a),
        Command::Render(a) => commands::render(a),
        Command::Report(a) => commands::report(a),
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("vline: {e}");
        std::process::exit(e.exit_code());
    }
}
