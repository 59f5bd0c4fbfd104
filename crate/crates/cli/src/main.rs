//! `anelkin`: analyze mesh fields, decompose configurations, compare embodiments and
//! synthesize defect data.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "anelkin", version, about = "Discrete kinematics of anelastic bodies")]
pub struct Cli {
    /// Relative tolerance for verdicts (overrides the config file).
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// TOML run configuration; defaults to $ANELKIN_CONFIG, then built-in values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Seed for synthetic data (overrides the config file).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output path (a file prefix for `decompose`); stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Holonomy and integrability of a mesh-field document.
    Check { input: PathBuf },
    /// Split a configuration into its compatible factor and its embodiment.
    Decompose { input: PathBuf },
    /// Decide whether two configurations share an embodiment.
    Equiv {
        first: PathBuf,
        /// Second document; when absent, the first one pushed forward by --affine.
        second: Option<PathBuf>,
        /// Affine displacement "a11,a12,...;c1,c2,..." (row-major) applied to the first input.
        #[arg(long, allow_hyphen_values = true)]
        affine: Option<String>,
    },
    /// Groupoid axioms, orbits and body points of a point-configuration family.
    Groupoid { manifest: PathBuf },
    /// Generate synthetic data.
    Synth {
        #[command(subcommand)]
        kind: SynthKind,
    },
    /// Burgers circuit of a field along a closed vertex loop.
    Burgers {
        input: PathBuf,
        /// Closed vertex loop "i0,i1,...,i0".
        #[arg(long = "loop")]
        loop_vertices: String,
    },
    /// SVG rendering of per-cell incompatibility, with an optional loop overlay.
    Report {
        input: PathBuf,
        #[arg(long = "loop")]
        loop_vertices: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
pub enum SynthKind {
    /// Volterra dislocation on a punctured square grid.
    Dislocation(DislocationArgs),
    /// One-dimensional cut-and-project chain as CSV.
    Quasicrystal(QuasicrystalArgs),
    /// Random configuration on a jittered grid, driven by the seed.
    Random(RandomArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum DefectKind {
    Edge,
    Screw,
}

#[derive(Args, Debug)]
pub struct DislocationArgs {
    /// Burgers vector "b1,b2" in lattice units.
    #[arg(long, allow_hyphen_values = true)]
    pub b: String,
    /// Squares per side.
    #[arg(long, default_value_t = 32)]
    pub grid: usize,
    /// Core position "x,y"; defaults to the centroid of a central triangle.
    #[arg(long, allow_hyphen_values = true)]
    pub core: Option<String>,
    #[arg(long, value_enum, default_value_t = DefectKind::Edge)]
    pub kind: DefectKind,
}

#[derive(Args, Debug)]
pub struct QuasicrystalArgs {
    /// Slope of the cut line; defaults to 1/φ (Fibonacci chain).
    #[arg(long)]
    pub slope: Option<f64>,
    /// Number of points to keep.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    /// Length of the parallel range; defaults to enough room for --points.
    #[arg(long)]
    pub length: Option<f64>,
}

#[derive(Args, Debug)]
pub struct RandomArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Approximate number of cells.
    #[arg(long, default_value_t = 32)]
    pub cells: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(&cli) {
        Ok(verdict) => verdict.into(),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
