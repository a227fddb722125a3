use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "lienard-lab", version, about = "Limit-cycle bounds and dynamics for even-degree Liénard systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the explicit limit-cycle bound and its intermediate constants.
    Bound(BoundArgs),
    /// Integrate one orbit, or compute one return to the positive y axis.
    Simulate(SimulateArgs),
    /// Enumerate limit cycles through the displacement map.
    Cycles(CyclesArgs),
    /// Check every lemma-level inequality by sampling.
    Verify(VerifyArgs),
    /// Write phase-portrait trajectories as CSV files.
    Portrait(PortraitArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Forward,
    Inverse,
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// Degree of F (even).
    #[arg(long, default_value_t = 2)]
    pub n: u32,
    /// Coefficient bound.
    #[arg(long = "C", default_value_t = 4.0, allow_negative_numbers = true)]
    pub c: f64,
    /// Linear coefficient of F.
    #[arg(long, allow_negative_numbers = true)]
    pub a1: Option<f64>,
    /// Radius of the ball B_R.
    #[arg(long = "R", default_value_t = 1.0, allow_negative_numbers = true)]
    pub r: f64,
}

#[derive(Debug, Clone, Args)]
pub struct PolyArgs {
    /// Coefficients a1,...,a_{n-1} of a C-monic F = x^n + ... + a1 x.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub coeffs: Option<Vec<f64>>,
    /// Ascending coefficients c0,...,cm of an arbitrary F (needs --allow-raw).
    #[arg(long = "raw-coeffs", value_delimiter = ',', allow_negative_numbers = true)]
    pub raw_coeffs: Option<Vec<f64>>,
    #[arg(long = "allow-raw")]
    pub allow_raw: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Replace the certified trap radius; the report is marked uncertified.
    #[arg(long = "sigma-override")]
    pub sigma_override: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub poly: PolyArgs,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x0: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub y0: f64,
    /// Integration time; negative integrates backwards.
    #[arg(long = "t-end", default_value_t = std::f64::consts::TAU, allow_negative_numbers = true)]
    pub t_end: f64,
    /// Compute one return to the section from (0, y0) instead.
    #[arg(long)]
    pub section: bool,
    #[arg(long, value_enum, default_value_t = DirectionArg::Forward)]
    pub direction: DirectionArg,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Keep every k-th sample in CSV output.
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct CyclesArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub poly: PolyArgs,
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Lower end of the scan (defaults to sigma, or 1e-3 R for raw F).
    #[arg(long = "y-min")]
    pub y_min: Option<f64>,
    /// Upper end of the scan (defaults to R).
    #[arg(long = "y-max")]
    pub y_max: Option<f64>,
    /// Map to scan (defaults to the one expanding near the focus).
    #[arg(long, value_enum)]
    pub direction: Option<DirectionArg>,
    /// Also write the sampled displacement map here.
    #[arg(long = "displacement-csv")]
    pub displacement_csv: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub poly: PolyArgs,
    /// Verify this many random C-monic polynomials instead of one.
    #[arg(long)]
    pub suite: Option<usize>,
    /// Draw a1 per polynomial from (-1.9,-0.1) U (0.1,1.9).
    #[arg(long = "random-a1")]
    pub random_a1: bool,
    /// Draw n per polynomial from {2, 4, 6}.
    #[arg(long = "random-n")]
    pub random_n: bool,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long = "strip-orbits", default_value_t = 32)]
    pub strip_orbits: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Grid for the cycle scan behind the transit-time check.
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    #[arg(long = "sigma-override")]
    pub sigma_override: Option<f64>,
    /// Skip the integration-based checks.
    #[arg(long = "no-dynamics")]
    pub no_dynamics: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct PortraitArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub poly: PolyArgs,
    /// Number of initial conditions spread on a circle.
    #[arg(long, default_value_t = 8)]
    pub ring: usize,
    #[arg(long = "ring-radius", default_value_t = 1.0)]
    pub ring_radius: f64,
    /// Extra initial condition "x,y"; repeatable.
    #[arg(long = "ic", value_parser = parse_point, allow_negative_numbers = true)]
    pub ic: Vec<(f64, f64)>,
    #[arg(long = "t-end", default_value_t = 20.0, allow_negative_numbers = true)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_point(s: &str) -> Result<(f64, f64), String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y but got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((parse(x)?, parse(y)?))
}
