use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const GRID_ENV: &str = "TWOLEVEL_GRID_POINTS";

#[derive(Debug, Parser)]
#[command(
    name = "twolevel",
    version,
    about = "Potentials with two prescribed bound states, built from a generating function"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build U, psi1, psi2 and W on a grid.
    Construct(ConstructArgs),
    /// Report zeros, poles and critical points of xi and the predicted state indices.
    Classify(ClassifyArgs),
    /// Build and check the two levels against a finite-difference eigensolver.
    Verify(VerifyArgs),
    /// Apply a Möbius deformation to a base function and build the result.
    Deform(DeformArgs),
    /// Spherically symmetric construction with angular momenta l1, l2.
    Radial(RadialArgs),
    /// Built-in generating functions.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogAction {
    /// List entries with their parameters.
    List {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Show one instantiated entry.
    Show {
        name: String,
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Where xi and the levels come from.
#[derive(Debug, Args)]
pub struct Source {
    /// Generating function of x, e.g. "x^4 + 2*x^2 - 1".
    #[arg(long, conflicts_with = "catalog")]
    pub xi: Option<String>,
    /// Catalog entry name.
    #[arg(long)]
    pub catalog: Option<String>,
    /// Catalog parameter, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE", requires = "catalog")]
    pub params: Vec<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub e1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub e2: Option<f64>,
    /// Interval ends.
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    pub domain: Option<Vec<f64>>,
    /// Number of grid points (odd, at least 101).
    #[arg(long, env = GRID_ENV, default_value_t = 4001)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: Source,
    /// Verify a table written by `construct` instead of building one.
    #[arg(long, conflicts_with_all = ["xi", "catalog"], requires_all = ["n1", "n2"])]
    pub csv: Option<PathBuf>,
    /// Expected index of E1 (with --csv).
    #[arg(long)]
    pub n1: Option<usize>,
    /// Expected index of E2 (with --csv).
    #[arg(long)]
    pub n2: Option<usize>,
    /// Absolute eigenvalue tolerance; defaults to an O(h^2) bound.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Keep the domain as given instead of growing it.
    #[arg(long)]
    pub fixed_domain: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DeformArgs {
    /// Base function eta.
    #[arg(long, conflicts_with = "catalog")]
    pub eta: Option<String>,
    /// Catalog entry carrying a deformation.
    #[arg(long)]
    pub catalog: Option<String>,
    #[arg(long = "param", value_name = "KEY=VALUE", requires = "catalog")]
    pub params: Vec<String>,
    /// xi = (c2 eta + d2)/(c1 eta + d1).
    #[arg(long, num_args = 4, value_names = ["C1", "C2", "D1", "D2"], allow_negative_numbers = true,
          conflicts_with_all = ["canonical", "catalog"])]
    pub mobius: Option<Vec<f64>>,
    /// Canonical family with Y = beta eta^2 + deltaBar eta + gamma.
    #[arg(long, num_args = 2, value_names = ["BETA", "DELTA_BAR"], allow_negative_numbers = true,
          conflicts_with = "catalog")]
    pub canonical: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub e1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub e2: Option<f64>,
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    pub domain: Option<Vec<f64>>,
    #[arg(long, env = GRID_ENV, default_value_t = 4001)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RadialArgs {
    #[arg(long, conflicts_with = "catalog")]
    pub xi: Option<String>,
    #[arg(long)]
    pub catalog: Option<String>,
    #[arg(long = "param", value_name = "KEY=VALUE", requires = "catalog")]
    pub params: Vec<String>,
    #[arg(long)]
    pub l1: u32,
    #[arg(long)]
    pub l2: u32,
    /// Defaults to the catalog levels.
    #[arg(long, allow_negative_numbers = true)]
    pub e1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub e2: Option<f64>,
    /// Outer radius.
    #[arg(long, default_value_t = 10.0)]
    pub rmax: f64,
    /// Number of radial points.
    #[arg(long, env = GRID_ENV, default_value_t = 4001)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
