use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "thinlab",
    version,
    about = "Exact point counts, large-sieve bounds and reducibility tests for thin sets of integer points"
)]
pub struct Cli {
    /// Worker threads for box enumeration (output does not depend on it)
    #[arg(long, global = true, env = "THINLAB_WORKERS", default_value_t = 1,
          value_parser = clap::value_parser!(u64).range(1..), hide_env_values = true)]
    pub workers: u64,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write output to this file instead of standard output
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Record wall-clock times (otherwise wall_time_s is null)
    #[arg(long, global = true)]
    pub timings: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count integer points in the box [-B, B]^n
    Count(CountArgs),
    /// Large-sieve upper bound for the number of solvable fibers
    Sieve(SieveArgs),
    /// Counts over F_p: solvable fibers and solutions, or zeros of a Y-free polynomial
    Modp(ModpArgs),
    /// Solution counts M_p against p^(n) for all good primes up to a limit
    Langweil(LangweilArgs),
    /// Factor a polynomial in Y over the integers
    Factor(UnivariateArgs),
    /// Integer, rational and real roots of a polynomial in Y
    Roots(RootsArgs),
    /// Number of representations of k as a sum of two squares
    Rk(RkArgs),
    /// Product of primes = 1 mod 4 up to ln B
    ConstructK(ConstructKArgs),
    /// Run a named experiment
    Experiment(ExperimentArgs),
    /// Fit log2(count) = slope * log2(B) + intercept by least squares
    Fit(FitArgs),
}

#[derive(Debug, Args)]
pub struct PolyArgs {
    /// Polynomial in Y, X1, ..., Xn, e.g. "Y^2 - (X1 + X2)"
    #[arg(long)]
    pub poly: String,

    /// Number of X variables
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Cov,
    CovRestricted,
    Aff,
    Proj,
    ReducibleFibers,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[command(flatten)]
    pub poly: PolyArgs,

    #[arg(long, value_enum)]
    pub mode: Mode,

    /// Height, or a grid: "16,32,64" or "2^4..2^10"
    #[arg(long = "B", value_name = "HEIGHTS")]
    pub b: String,

    /// cov: count fibers with a rational root instead of an integer root
    #[arg(long)]
    pub rational: bool,

    /// cov-restricted: bound on |y| (defaults to B)
    #[arg(long)]
    pub y_bound: Option<u64>,

    /// cov-restricted: count points x instead of pairs (y, x)
    #[arg(long)]
    pub projection: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LModeArg {
    Full,
    PrimesOnly,
}

#[derive(Debug, Args)]
pub struct SieveArgs {
    #[command(flatten)]
    pub poly: PolyArgs,

    #[arg(long = "B", value_name = "HEIGHT")]
    pub b: u64,

    /// Sieve level (defaults to floor(sqrt(B)))
    #[arg(long = "Q")]
    pub q: Option<u64>,

    /// Sum over all squarefree q <= Q, or over primes only
    #[arg(long, value_enum)]
    pub l_mode: Option<LModeArg>,

    /// Use only primes p = a mod m, given as "a:m"
    #[arg(long, value_name = "A:M")]
    pub prime_class: Option<String>,

    /// Also compute the exact count and compare
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Args)]
pub struct ModpArgs {
    #[command(flatten)]
    pub poly: PolyArgs,

    /// Prime modulus below 2^32
    #[arg(long)]
    pub p: u64,

    /// Also check m * N_p'' <= M_p for F a polynomial in Y^m
    #[arg(long)]
    pub m: Option<u64>,
}

#[derive(Debug, Args)]
pub struct LangweilArgs {
    #[command(flatten)]
    pub poly: PolyArgs,

    /// Largest prime scanned
    #[arg(long)]
    pub p_max: u64,
}

#[derive(Debug, Args)]
pub struct UnivariateArgs {
    /// Polynomial in Y alone
    #[arg(long)]
    pub poly: String,
}

#[derive(Debug, Args)]
pub struct RootsArgs {
    /// Polynomial in Y alone
    #[arg(long)]
    pub poly: String,

    /// Also count distinct roots modulo this prime
    #[arg(long)]
    pub p: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RkArgs {
    #[arg(long)]
    pub k: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    /// primes p <= ln B
    Full,
    /// primes with ln B / 2 <= p <= ln B
    Dyadic,
}

#[derive(Debug, Args)]
pub struct ConstructKArgs {
    #[arg(long = "B", value_name = "HEIGHT")]
    pub b: u64,

    #[arg(long, value_enum, default_value_t = VariantArg::Full)]
    pub variant: VariantArg,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Write <name>-<params>.json and .csv into this directory
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub which: Experiment,
}

#[derive(Debug, Subcommand)]
pub enum Experiment {
    /// count_cov of Y^d - (X1 + ... + Xn), slope against n - 1 + 1/d
    CovLower {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        n: usize,
        #[arg(long = "B", value_name = "HEIGHTS", default_value = "2^4..2^10")]
        b: String,
    },
    /// count_aff of X1^d - (X2 + ... + Xn), slope against n - 2 + 1/d
    AffineLower {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        n: usize,
        #[arg(long = "B", value_name = "HEIGHTS", default_value = "2^4..2^10")]
        b: String,
    },
    /// Projective points on X1 X2 = X3 X4; count / B^2 should increase
    Quadric {
        #[arg(long = "B", value_name = "HEIGHTS", default_value = "8,16,32")]
        b: String,
    },
    /// Values x1 with k - x1^2 a square, against r2(k)/2
    TwoSquares {
        #[arg(long)]
        k: u64,
        #[arg(long = "B", value_name = "HEIGHT")]
        b: u64,
    },
    /// Y^2 + X1^2 - k (X2 + ... + Xn) against sum_z r2(kz) and its main term
    Multidim {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        n: usize,
        #[arg(long = "B", value_name = "HEIGHTS", default_value = "2^6..2^10")]
        b: String,
    },
    /// Counts for a list of k at fixed B
    UniformitySweep {
        #[arg(long)]
        n: usize,
        #[arg(long = "B", value_name = "HEIGHT")]
        b: u64,
        /// Comma-separated list of k
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<u64>,
    },
    /// Reducible fibers with the containment check, slope fitted
    ReducibleFibers {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long = "B", value_name = "HEIGHTS", default_value = "2^6..2^14")]
        b: String,
    },
    /// Sieve bound normalized by B^(n - 1/2) ln B across a grid
    SieveGrowth {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long = "B", value_name = "HEIGHTS", default_value = "10^2..10^4")]
        b: String,
        /// Largest allowed normalized bound
        #[arg(long, default_value_t = 50.0)]
        cap: f64,
        /// Compute exact counts only for boxes with at most this many points
        #[arg(long, default_value_t = 500_000_000)]
        exact_limit: u64,
    },
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Points as "B:count,B:count,..."
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    pub points: Option<String>,

    /// CSV file with columns B and count
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
}
