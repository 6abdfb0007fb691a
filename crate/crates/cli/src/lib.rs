//! Command-line front end: argument grammar, configuration merging, output
//! files and exit codes.

mod commands;
pub mod config;
pub mod error;
mod kernel_cmd;
mod restrict_cmd;
mod selftest;

pub use config::{load_config, ExperimentConfig, Format};
pub use error::{CliError, CliResult};

use clap::{Args, CommandFactory, Parser, Subcommand};
use restlab_core::report::ExperimentReport;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(name = "restlab", version, about = "Numerical experiments on discrete restriction for lattice spheres")]
pub struct Cli {
    /// key=value file supplying defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (0 or unset: all cores).
    #[arg(long, global = true, env = "RESTLAB_THREADS")]
    pub threads: Option<usize>,
    /// Report file; defaults to results/<report>.<format>.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Required by every randomized command.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Enumerate or count the lattice points of a sphere.
    Shell(ShellArgs),
    /// Complete exponential sums.
    #[command(subcommand)]
    Sums(SumsCmd),
    /// Smooth quadratic Weyl sums.
    #[command(subcommand)]
    Weyl(WeylCmd),
    /// The kernel and its major/minor arc pieces.
    #[command(subcommand)]
    Kernel(KernelCmd),
    /// Extension operator norms and level sets.
    #[command(subcommand)]
    Restrict(RestrictCmd),
    /// Run the quick invariant suite.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug)]
pub struct ShellArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub lambda: u64,
    /// Print only the number of points.
    #[arg(long)]
    pub count: bool,
    /// Write the packed binary shell format instead of a report.
    #[arg(long)]
    pub binary: bool,
    /// Largest number of candidate vectors the enumeration may visit.
    #[arg(long)]
    pub budget: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum SumsCmd {
    /// Normalised Gauss sums G(q), one q or a sweep over q ≤ q-max.
    Gauss {
        #[arg(long)]
        q: Option<u64>,
        #[arg(long)]
        q_max: Option<u64>,
    },
    /// S(a, m, q) directly and, for odd q, in closed form.
    Quad {
        #[arg(long, allow_negative_numbers = true)]
        a: i64,
        #[arg(long, allow_negative_numbers = true)]
        m: i64,
        #[arg(long)]
        q: u64,
    },
    /// Kloosterman sums; with --sweep-max, the Weil bound over all primes up to it.
    Kloosterman(PairArgs),
    /// Salié sums; --check-explicit compares the prime closed form.
    Salie(PairArgs),
    /// The singular-series factor; with --q-max, the prime bound sweep.
    Sigma(SigmaArgs),
    /// Running sums of K(m, n, q)/q.
    Selberg {
        #[arg(long, allow_negative_numbers = true)]
        m: i64,
        #[arg(long, allow_negative_numbers = true)]
        n: i64,
        #[arg(long)]
        x_max: u64,
    },
}

#[derive(Args, Debug)]
pub struct PairArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<i64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<i64>,
    #[arg(long)]
    pub q: Option<u64>,
    /// Exhaustive (a, b) sweep over primes up to this bound.
    #[arg(long)]
    pub sweep_max: Option<u64>,
    #[arg(long)]
    pub check_explicit: bool,
}

#[derive(Args, Debug)]
pub struct SigmaArgs {
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub m: Vec<i64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<i64>,
    #[arg(long)]
    pub s: Option<u64>,
    #[arg(long)]
    pub check_reduced: bool,
    /// Bound sweep over primes up to q-max (needs --seed).
    #[arg(long)]
    pub q_max: Option<u64>,
    /// Dimensions for the bound sweep.
    #[arg(long, value_delimiter = ',', default_value = "4,5")]
    pub dims: Vec<usize>,
    /// Random (m, λ) draws per prime in the bound sweep.
    #[arg(long, default_value_t = 20)]
    pub draws: usize,
    /// Constant of the prime bound.
    #[arg(long, default_value_t = 4.0)]
    pub constant: f64,
}

#[derive(Subcommand, Debug)]
pub enum WeylCmd {
    /// Poisson expansion against direct summation (fixed regression suite by default).
    PoissonCheck {
        #[arg(long, default_value_t = 100)]
        n: u64,
        #[arg(long, allow_negative_numbers = true)]
        a: Option<i64>,
        #[arg(long)]
        q: Option<u64>,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        phi: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        x: f64,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
    },
    /// Major-arc envelope ratio at random (t, x).
    Envelope {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
}

#[derive(Args, Debug, Clone)]
pub struct ShellSel {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub lambda: u64,
}

#[derive(Args, Debug, Clone)]
pub struct PointSel {
    /// Torus point, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x: Vec<f64>,
    /// Number of random points instead of --x (needs --seed).
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum KernelCmd {
    /// K(x) = Σ_ξ e(ξ·x).
    Direct {
        #[command(flatten)]
        shell: ShellSel,
        #[command(flatten)]
        at: PointSel,
    },
    /// K(x) through the t-integral of Weyl sums, compared with the direct sum.
    Integral {
        #[command(flatten)]
        shell: ShellSel,
        #[command(flatten)]
        at: PointSel,
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// A major-arc piece K^Q (prime) or K^{Q,s} (dyadic), or the minor arc remainder.
    Piece {
        #[command(flatten)]
        shell: ShellSel,
        #[command(flatten)]
        at: PointSel,
        #[command(flatten)]
        piece: PieceSel,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Fourier coefficients of a piece, at --k or maximised over the support.
    Fourier {
        #[command(flatten)]
        shell: ShellSel,
        #[command(flatten)]
        piece: PieceSel,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        k: Vec<i64>,
    },
    /// Lower estimate of the sup norm of a piece.
    Supnorm {
        #[command(flatten)]
        shell: ShellSel,
        #[command(flatten)]
        piece: PieceSel,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Monte Carlo check of the level-set inequality chain.
    Levelchain(LevelChainArgs),
}

#[derive(Args, Debug, Clone)]
pub struct PieceSel {
    /// k, kq (prime), kqs (dyadic), kminor, k1, or k-minus-kq.
    #[arg(long, default_value = "kq")]
    pub piece: String,
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long)]
    pub s: Option<u32>,
    /// Ratio N/Q below which dyadic pieces are kept.
    #[arg(long, default_value_t = restlab_core::kernel::DEFAULT_DYADIC_DIVISOR)]
    pub divisor: u64,
    /// Index of the dyadic piece for k1.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
}

#[derive(Args, Debug, Clone)]
pub struct LevelChainArgs {
    #[command(flatten)]
    pub shell: ShellSel,
    #[arg(long)]
    pub q: Option<u64>,
    /// Level α; defaults to N^alpha-exp.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 0.8)]
    pub alpha_exp: f64,
    #[arg(long, default_value = "random_signs")]
    pub coeffs: String,
    #[arg(long, default_value_t = 5)]
    pub draws: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Random starts for the sup-norm estimate of K^Q.
    #[arg(long, default_value_t = 1000)]
    pub sup_samples: usize,
}

#[derive(Subcommand, Debug)]
pub enum RestrictCmd {
    /// Monte Carlo (or exact grid) L^p norms of one extension.
    Norms {
        #[command(flatten)]
        shell: ShellSel,
        #[arg(long, default_value = "random_signs")]
        coeffs: String,
        #[arg(long, value_delimiter = ',', default_value = "2,4,6")]
        p: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Exact grid of this side length (even p only).
        #[arg(long)]
        grid: Option<u64>,
    },
    /// Level-set measures |{|F| > α}|.
    Levelsets {
        #[command(flatten)]
        shell: ShellSel,
        #[arg(long, default_value = "random_signs")]
        coeffs: String,
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Growth of the best extension norm across a λ grid.
    Theorem1 {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        /// lo:hi:dyadic, lo:hi:powers or a comma list.
        #[arg(long)]
        lambdas: String,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 32)]
        draws: usize,
        #[arg(long, default_value = "peaked")]
        sampler: String,
    },
    /// The lower-bound constructions.
    Lowerbounds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long)]
        lambdas: String,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 32)]
        draws: usize,
    },
}

#[derive(Args, Debug)]
pub struct SelftestArgs {}

/// What a command produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: Vec<String>,
    pub verdict: Option<bool>,
    pub path: Option<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.verdict == Some(false) {
            2
        } else {
            0
        }
    }
}

/// Global settings shared by every command.
#[derive(Debug, Clone)]
pub struct Context {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Context {
    pub fn seed(&self, what: &str) -> CliResult<u64> {
        self.seed.ok_or_else(|| CliError::Invalid(format!("{what} is randomized: --seed is required")))
    }

    pub fn path_for(&self, name: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| {
            let ext = match self.format {
                Format::Json => "json",
                Format::Csv => "csv",
            };
            Path::new("results").join(format!("{name}.{ext}"))
        })
    }

    /// Writes `report` in the selected format and builds the outcome.
    pub fn emit(&self, report: &ExperimentReport, summary: Vec<String>) -> CliResult<Outcome> {
        let path = self.path_for(&report.kind);
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let file = std::io::BufWriter::new(std::fs::File::create(&path)?);
        match self.format {
            Format::Json => report.write_json(file)?,
            Format::Csv => report.write_csv(file)?,
        }
        log::info!("wrote {}", path.display());
        Ok(Outcome { summary, verdict: report.verdict, path: Some(path) })
    }
}

/// Finds the value of `--config` in raw arguments.
fn config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
    }
    None
}

/// Appends config-file entries as flags for the selected subcommand unless
/// the flag is already on the command line.
fn merge_config(mut argv: Vec<OsString>, cfg: &ExperimentConfig) -> Vec<OsString> {
    let mut cmd = Cli::command();
    cmd.build();
    let mut leaf = &cmd;
    for a in argv.iter().skip(1) {
        let s = a.to_string_lossy();
        if s.starts_with('-') {
            continue;
        }
        if let Some(sub) = leaf.find_subcommand(s.as_ref()) {
            leaf = sub;
        }
    }
    let present = |key: &str| {
        argv.iter().any(|a| {
            let s = a.to_string_lossy();
            s == format!("--{key}") || s.starts_with(&format!("--{key}="))
        })
    };
    let mut extra = Vec::new();
    for (key, value) in &cfg.entries {
        if key == "config" || present(key) {
            continue;
        }
        let Some(arg) = leaf.get_arguments().find(|a| a.get_long() == Some(key.as_str())) else {
            log::warn!("config key {key} is not a flag of this command; ignored");
            continue;
        };
        if arg.get_action().takes_values() {
            extra.push(OsString::from(format!("--{key}")));
            extra.push(OsString::from(value));
        } else if value == "true" || value == "1" {
            extra.push(OsString::from(format!("--{key}")));
        }
    }
    argv.extend(extra);
    argv
}

/// Parses arguments, merging a `--config` file underneath the flags.
pub fn parse_args(argv: Vec<OsString>) -> CliResult<Cli> {
    let argv = match config_path(&argv) {
        Some(path) => {
            let cfg = load_config(&path)?;
            merge_config(argv, &cfg)
        }
        None => argv,
    };
    Ok(Cli::try_parse_from(argv)?)
}

fn configure_threads(threads: Option<usize>) -> CliResult<()> {
    #[cfg(feature = "parallel")]
    if let Some(t) = threads.filter(|&t| t > 0) {
        // A pool may already exist when called twice in one process (tests).
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            log::debug!("thread pool already configured: {e}");
        }
    }
    #[cfg(not(feature = "parallel"))]
    if threads.is_some_and(|t| t > 1) {
        log::warn!("built without the parallel feature; --threads ignored");
    }
    Ok(())
}

pub fn run(cli: Cli) -> CliResult<Outcome> {
    configure_threads(cli.threads)?;
    let ctx = Context { seed: cli.seed, out: cli.out, format: cli.format.unwrap_or(Format::Json) };
    match cli.command {
        Command::Shell(a) => commands::shell(&ctx, a),
        Command::Sums(c) => commands::sums(&ctx, c),
        Command::Weyl(c) => commands::weyl(&ctx, c),
        Command::Kernel(c) => kernel_cmd::run(&ctx, c),
        Command::Restrict(c) => restrict_cmd::run(&ctx, c),
        Command::Selftest(_) => selftest::run(&ctx),
    }
}

/// Full entry point: parse, run, print, and map the result to an exit code
/// (0 success, 1 validation error, 2 failed acceptance check).
pub fn main_with_args(argv: Vec<OsString>) -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match parse_args(argv) {
        Ok(c) => c,
        Err(CliError::Usage(e)) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match run(cli) {
        Ok(out) => {
            for line in &out.summary {
                println!("{line}");
            }
            out.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
