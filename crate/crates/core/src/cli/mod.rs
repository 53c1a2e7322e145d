//! Command-line front end: `verify`, `simulate`, `gridcheck` and
//! `elliptic-selftest`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or configuration
//! error, 3 numerical or domain error.

mod config;
mod gridcheck;
mod report;
mod selftest;
mod simulate;
mod verify;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{CampaignConfig, GridConfig, ModeChoice, RawConfig};
pub use gridcheck::parse_monomial_spec;

use crate::error::{Error, Result};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "superint", version, about = "Checks of superintegrable potentials and their third-order integrals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the determining equations of every catalog integral.
    Verify(VerifyArgs),
    /// Integrate a classical trajectory and report the drift of H and the integrals.
    Simulate(SimulateArgs),
    /// Measure the convergence of grid commutators [H, X].
    Gridcheck(GridArgs),
    /// Run the Jacobi elliptic function identity suites.
    EllipticSelftest(SelftestArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Potential family, e.g. coulomb, oscillator, soliton_V1a.
    #[arg(long)]
    family: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    hbar: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    omega: Option<f64>,
    /// Elliptic modulus.
    #[arg(long, allow_negative_numbers = true)]
    k: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    tolerance: Option<f64>,
    /// Extra integrals to add to the entry (repeatable), e.g. X4.
    #[arg(long)]
    include: Vec<String>,
    /// Flat `key = value` file; flags override its entries.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long, short, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// classical or quantum.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    /// Also compare the quantum residuals at hbar = 1e-6 with the classical ones.
    #[arg(long)]
    classical_limit: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    y: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    p1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    p2: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Where to write the JSON drift summary.
    #[arg(long, value_name = "FILE")]
    summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Coarsest grid spacing.
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    levels: Option<usize>,
    /// Number of Gaussian test functions.
    #[arg(long)]
    tests: Option<usize>,
    /// Spec to check (repeatable): a catalog name, H, or a monomial such as p1^3.
    #[arg(long)]
    spec: Vec<String>,
    /// Add a corrupted control for every spec.
    #[arg(long)]
    corrupt: bool,
    /// Grid box `x0,x1,y0,y1`; defaults to the catalog box.
    #[arg(long = "box", value_name = "X0,X1,Y0,Y1", allow_hyphen_values = true)]
    bbox: Option<String>,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    /// Random points per modulus.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, short, value_name = "FILE")]
    output: Option<PathBuf>,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

/// What a command concluded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    /// The run finished but hit a numerical or domain problem.
    Numerical,
}

impl Outcome {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Outcome::Pass => EXIT_OK,
            Outcome::Fail => EXIT_FAILED,
            Outcome::Numerical => EXIT_NUMERICAL,
        }
    }
}

pub fn error_code(e: &Error) -> u8 {
    if e.is_numerical() || matches!(e, Error::Classification(_)) {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

impl CommonArgs {
    fn raw(&self) -> Result<RawConfig> {
        let mut raw = match &self.config {
            Some(path) => RawConfig::load(path)?,
            None => RawConfig::default(),
        };
        let mut put = |key: &str, v: Option<String>| {
            if let Some(v) = v {
                raw.set(key, v);
            }
        };
        put("family", self.family.clone());
        put("hbar", self.hbar.map(|v| v.to_string()));
        put("omega", self.omega.map(|v| v.to_string()));
        put("k", self.k.map(|v| v.to_string()));
        put("a", self.a.map(|v| v.to_string()));
        put("alpha", self.alpha.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("tolerance", self.tolerance.map(|v| v.to_string()));
        put("output", self.output.as_ref().map(|p| p.display().to_string()));
        if !self.include.is_empty() {
            put("include", Some(self.include.join(",")));
        }
        Ok(raw)
    }
}

fn put<T: ToString>(raw: &mut RawConfig, key: &str, v: Option<T>) {
    if let Some(v) = v {
        raw.set(key, v.to_string());
    }
}

fn dispatch(command: Command) -> Result<Outcome> {
    match command {
        Command::Verify(a) => {
            let mut raw = a.common.raw()?;
            put(&mut raw, "mode", a.mode);
            put(&mut raw, "samples", a.samples);
            if a.classical_limit {
                raw.set("classical_limit", true);
            }
            verify::run(&CampaignConfig::from_raw(&raw, verify::DEFAULT_TOLERANCE)?)
        }
        Command::Simulate(a) => {
            let mut raw = a.common.raw()?;
            put(&mut raw, "x", a.x);
            put(&mut raw, "y", a.y);
            put(&mut raw, "p1", a.p1);
            put(&mut raw, "p2", a.p2);
            put(&mut raw, "dt", a.dt);
            put(&mut raw, "steps", a.steps);
            put(&mut raw, "summary", a.summary.map(|p| p.display().to_string()));
            simulate::run(&CampaignConfig::from_raw(&raw, simulate::DEFAULT_TOLERANCE)?)
        }
        Command::Gridcheck(a) => {
            let mut raw = a.common.raw()?;
            put(&mut raw, "h", a.h);
            put(&mut raw, "levels", a.levels);
            put(&mut raw, "tests", a.tests);
            put(&mut raw, "box", a.bbox);
            if !a.spec.is_empty() {
                raw.set("spec", a.spec.join(","));
            }
            if a.corrupt {
                raw.set("corrupt", true);
            }
            gridcheck::run(&CampaignConfig::from_raw(&raw, verify::DEFAULT_TOLERANCE)?)
        }
        Command::EllipticSelftest(a) => selftest::run(a.samples, a.seed, a.inject_fault, a.output.as_deref()),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(outcome) => outcome.code(),
        Err(e) => {
            eprintln!("error: {e}");
            error_code(&e)
        }
    }
}
