use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "orlicz-hardy", version, about = "Certify and test weighted Hardy inequalities in Orlicz spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Tolerance file (TOML, JSON, or `key = value` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for batches of test functions.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,

    /// Include wall-clock timing (makes reports differ between runs).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TripleArgs {
    /// Triple description file with keys M, phi, omega.
    #[arg(long, conflicts_with_all = ["preset", "m", "phi", "omega"])]
    pub triple: Option<PathBuf>,

    /// Catalog entry, e.g. `classical:p=2,alpha=4`.
    #[arg(long, conflicts_with_all = ["m", "phi", "omega"])]
    pub preset: Option<String>,

    /// N-function: `power:p=..`, `power_sum:p=..,q=..`, or an expression in r.
    #[arg(long = "M", requires_all = ["phi", "omega"], allow_hyphen_values = true)]
    pub m: Option<String>,

    #[arg(long, requires_all = ["m", "omega"], allow_hyphen_values = true)]
    pub phi: Option<String>,

    #[arg(long, requires_all = ["m", "phi"], allow_hyphen_values = true)]
    pub omega: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct FunctionArgs {
    /// Functions file (TOML or JSON) with a `functions` list.
    #[arg(long, conflicts_with_all = ["stock", "u"])]
    pub functions: Option<PathBuf>,

    /// Use the built-in stock test functions.
    #[arg(long, conflicts_with = "u")]
    pub stock: bool,

    /// A single test function u(r); `laplace` selects the Laplace function.
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<String>,

    /// Its derivative; differentiated symbolically when omitted.
    #[arg(long, requires = "u", allow_hyphen_values = true)]
    pub uprime: Option<String>,

    #[arg(long, value_enum, default_value_t = KindArg::Generic, requires = "u")]
    pub kind: KindArg,

    /// Support interval `a,b` of a compactly supported u.
    #[arg(long, value_delimiter = ',', requires = "u", allow_hyphen_values = true)]
    pub support: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Generic,
    HardyTransform,
    ConjugateHardyTransform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Curve {
    B1,
    B2,
    /// ω/|φ'| on the probe grid.
    L,
    /// K(r) near zero.
    K,
    /// L(R) near infinity.
    BigL,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    /// r^{γ±ε} with a linear cutoff, for classical triples.
    Extremal,
    /// Compact tents of varying position and width.
    Bumps,
    /// `--template` with `--param` ranges.
    Custom,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify conditions (B1)/(B2) and the constant C.
    Analyze {
        #[command(flatten)]
        triple: TripleArgs,
        /// CSV file for a plot trace.
        #[arg(long, requires = "curve")]
        trace: Option<PathBuf>,
        #[arg(long, value_enum)]
        curve: Option<Curve>,
    },
    /// Evaluate both sides of the modular inequality for test functions.
    Verify {
        #[command(flatten)]
        triple: TripleArgs,
        #[command(flatten)]
        functions: FunctionArgs,
        /// Compare against this constant instead of the certified one.
        #[arg(long)]
        constant: Option<f64>,
        /// Also compare Luxemburg norms against C + 1.
        #[arg(long)]
        norm: bool,
    },
    /// Decide membership in R⁺ and R⁻.
    Classify {
        #[command(flatten)]
        triple: TripleArgs,
        #[command(flatten)]
        functions: FunctionArgs,
        /// CSV file for the θ_n traces.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Grid check of the Bloom–Kerman condition.
    Bk {
        #[command(flatten)]
        triple: TripleArgs,
    },
    /// Two-factor constant B for M = λ^p.
    Muckenhoupt {
        #[command(flatten)]
        triple: TripleArgs,
        #[arg(long)]
        p: f64,
    },
    /// Search a family of test functions for the largest J/H.
    Sharpness {
        #[command(flatten)]
        triple: TripleArgs,
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// p of the classical extremal family.
        #[arg(long = "family-p")]
        family_p: Option<f64>,
        /// α of the classical extremal family.
        #[arg(long = "family-alpha", allow_negative_numbers = true)]
        family_alpha: Option<f64>,
        /// Template with `{name}` placeholders.
        #[arg(long)]
        template: Option<String>,
        /// `name=lo:hi` or `name=lo:hi:log`.
        #[arg(long = "param")]
        params: Vec<String>,
        /// Candidate budget; defaults to the configured one.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Named triples with known answers.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogAction {
    List,
    Show { name: String },
}
