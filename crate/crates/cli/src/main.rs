mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qtemplate_core::glyphs::RECOMMENDED_K_MAX;
use qtemplate_core::{Aliasing, FilterSpec};

use crate::commands::Failure;

/// Quantum template recognition simulator.
#[derive(Debug, Parser)]
#[command(name = "qtemplate", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Match one image against a template and print the probabilities as CSV.
    Match(MatchArgs),
    /// Average acceptance over noisy images for all image/template pairs.
    Sweep(SweepArgs),
    /// Compare the algorithm's error with the Helstrom bound and naive projectors.
    Discriminate(DiscriminateArgs),
    /// Check the beamsplitter QFT network against the exact transform.
    Optics(OpticsArgs),
    /// Write an amplitude map of a pipeline stage as a PGM image.
    Render(RenderArgs),
    /// Write the built-in letter fixtures as PBM files.
    Fixtures(FixturesArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AliasingArg {
    Signed,
    Unsigned,
}

#[derive(Debug, Clone, Args)]
struct FilterArgs {
    /// Sharp-cutoff radius in k-space, cycles per image side.
    #[arg(long, default_value_t = RECOMMENDED_K_MAX)]
    k_max: f64,
    /// Keep the k = 0 component instead of removing it.
    #[arg(long)]
    keep_dc: bool,
    /// Skip the Fourier noise filter.
    #[arg(long)]
    no_filter: bool,
    /// How register values map to frequencies before taking the radius.
    #[arg(long, value_enum, default_value_t = AliasingArg::Signed)]
    aliasing: AliasingArg,
}

impl FilterArgs {
    fn spec(&self) -> Option<FilterSpec> {
        if self.no_filter {
            return None;
        }
        let aliasing = match self.aliasing {
            AliasingArg::Signed => Aliasing::Signed,
            AliasingArg::Unsigned => Aliasing::Unsigned,
        };
        Some(
            FilterSpec::sharp_cutoff(self.k_max)
                .keep_dc(self.keep_dc)
                .with_aliasing(aliasing),
        )
    }
}

#[derive(Debug, Args)]
struct MatchArgs {
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    template: PathBuf,
    /// Second hypothesis tested after a rejection of the first template.
    #[arg(long)]
    template2: Option<PathBuf>,
    /// Pixel inversion probability applied to the image first.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also draw the outcome of a single photon.
    #[arg(long)]
    sample: bool,
    #[command(flatten)]
    filter: FilterArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Template A.
    #[arg(long)]
    template: PathBuf,
    /// Template B.
    #[arg(long)]
    template2: PathBuf,
    /// Clean image A; defaults to template A.
    #[arg(long)]
    image: Option<PathBuf>,
    /// Clean image B; defaults to template B.
    #[arg(long)]
    image2: Option<PathBuf>,
    /// Noise level; repeat for several.
    #[arg(long = "noise", default_values_t = [0.0, 0.05, 0.1, 0.2, 0.4])]
    noise: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    filter: FilterArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DiscriminateArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    /// Prior probability of letter A.
    #[arg(long, default_value_t = 0.5)]
    prior_a: f64,
}

#[derive(Debug, Args)]
struct OpticsArgs {
    /// Largest register size to verify.
    #[arg(long, default_value_t = 6)]
    max_n: usize,
    /// Print the phase-shifter table for this register size.
    #[arg(long)]
    schedule: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Stage {
    /// Prepared point state.
    Input,
    /// After the Fourier filter, back in position space.
    Filtered,
    /// After the Grover rotation, before the final Hadamards.
    Rotated,
}

#[derive(Debug, Args)]
struct RenderArgs {
    #[arg(long)]
    image: PathBuf,
    /// Needed for the rotated stage.
    #[arg(long)]
    template: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Stage::Filtered)]
    stage: Stage,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Saturate amplitudes above half the maximum.
    #[arg(long)]
    highlight: bool,
    /// Binary P5 instead of plain P2.
    #[arg(long)]
    raw: bool,
    #[command(flatten)]
    filter: FilterArgs,
    /// Output PGM file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct FixturesArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Also write noisy copies of the 64×64 letters at these levels.
    #[arg(long = "noise")]
    noise: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("QTEMPLATE_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Input(format!("QTEMPLATE_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Other(format!("cannot configure thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Match(args) => commands::cmd_match(&args),
        Command::Sweep(args) => commands::cmd_sweep(&args),
        Command::Discriminate(args) => commands::cmd_discriminate(&args),
        Command::Optics(args) => commands::cmd_optics(&args),
        Command::Render(args) => commands::cmd_render(&args),
        Command::Fixtures(args) => commands::cmd_fixtures(&args),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("qtemplate: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
