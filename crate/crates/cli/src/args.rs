use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Euler-Lagrange operators, invariance classification, representation
/// builders and boundary-value solves for one-dimensional variational problems.
///
/// Exit status: 0 on success, 2 when a tested property fails, 1 on errors.
/// Set VARLAG_THREADS to cap the number of worker threads.
#[derive(Debug, Parser)]
#[command(name = "varlag", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the built-in Lagrangians with their expected classification
    Catalog(CatalogArgs),
    /// Evaluate a Lagrangian at one jet point
    Eval(EvalArgs),
    /// Euler-Lagrange residual profile along a named curve
    Residual(ResidualArgs),
    /// Run every invariance test and emit the classification report
    Classify(ClassifyArgs),
    /// Compare the functional before and after reparametrization
    Invariance(InvarianceArgs),
    /// Construct a Lagrangian from representation pieces and classify it
    Build(BuildArgs),
    /// Solve the Euler-Lagrange boundary-value problem
    Solve(SolveArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
pub struct Input {
    /// Built-in Lagrangian id (see `varlag catalog`)
    #[arg(long, value_name = "ID", conflicts_with = "file", required_unless_present = "file")]
    pub catalog: Option<String>,
    /// Lagrangian in .lag format
    #[arg(long, value_name = "PATH")]
    pub file: Option<PathBuf>,
    /// Override a parameter, NAME=VALUE (repeatable)
    #[arg(long = "param", value_name = "NAME=VALUE", value_parser = parse_assignment)]
    pub params: Vec<(String, f64)>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write files into this directory instead of printing
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct CatalogArgs {
    /// Show a single entry
    #[arg(long, value_name = "ID")]
    pub id: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: Input,
    /// Curve parameter
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub s: f64,
    /// Position, comma separated
    #[arg(long, value_name = "LIST", value_delimiter = ',', allow_hyphen_values = true)]
    pub u: Vec<f64>,
    /// First derivative, comma separated
    #[arg(long, value_name = "LIST", value_delimiter = ',', allow_hyphen_values = true)]
    pub p: Vec<f64>,
    /// Second derivative, comma separated (second-order Lagrangians)
    #[arg(long, value_name = "LIST", value_delimiter = ',', allow_hyphen_values = true)]
    pub q: Option<Vec<f64>>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ResidualArgs {
    #[command(flatten)]
    pub input: Input,
    /// line, parabola, unit-circle, catenoid, sphere, cylinder or random:SEED
    #[arg(long, value_name = "NAME")]
    pub curve: String,
    /// Number of interior sample points
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// Random seed
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Random curves for the null, T and N tests
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    /// Random jets for each pointwise test
    #[arg(long, default_value_t = 200)]
    pub jets: usize,
    /// Curves for the integral invariance test
    #[arg(long, default_value_t = 10)]
    pub invariance_curves: usize,
    /// Diffeomorphisms per curve for the integral invariance test
    #[arg(long, default_value_t = 3)]
    pub diffeos: usize,
    /// Threshold of the pointwise tests (at least 1e-14)
    #[arg(long)]
    pub tau: Option<f64>,
    /// Threshold of the integral test (at least 1e-14)
    #[arg(long)]
    pub integral_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub tests: TestArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct InvarianceArgs {
    #[command(flatten)]
    pub input: Input,
    /// Compare on this curve only (see `residual --curve`)
    #[arg(long, value_name = "NAME")]
    pub curve: Option<String>,
    /// Amplitude a of w(t) = t + a sin(pi k t)/(pi k), |a| < 1
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true, requires = "curve")]
    pub a: f64,
    /// Frequency k of the diffeomorphism
    #[arg(long, default_value_t = 1, requires = "curve")]
    pub k: u32,
    /// Random seed
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Random curves when no curve is given
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Diffeomorphisms per random curve
    #[arg(long, default_value_t = 3)]
    pub diffeos: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// L = D_s Psi(s, u)
    Null,
    /// L = D_s Psi(s, u) + r f(u, t)
    FirstOrder,
    /// L = D_s Xi(s, u, r, t) + r f(u, t, w)
    SecondOrder,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Representation to build; inferred from the equations with --from
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    /// Read n, params and the Psi/Xi/f equations from a .lag-style file
    #[arg(long, value_name = "PATH", conflicts_with_all = ["psi", "xi", "f"])]
    pub from: Option<PathBuf>,
    /// Null part over s, u<k>
    #[arg(long, value_name = "EXPR", allow_hyphen_values = true)]
    pub psi: Option<String>,
    /// Null part over s, u<k>, r, t<k> (second order)
    #[arg(long, value_name = "EXPR", allow_hyphen_values = true)]
    pub xi: Option<String>,
    /// Invariant part over u<k>, t<k> and, for second order, w<k>;
    /// must be 2 pi periodic in the last angle
    #[arg(long, value_name = "EXPR", allow_hyphen_values = true)]
    pub f: Option<String>,
    /// Dimension
    #[arg(long)]
    pub n: Option<usize>,
    /// Parameter NAME=VALUE (repeatable)
    #[arg(long = "param", value_name = "NAME=VALUE", value_parser = parse_assignment)]
    pub params: Vec<(String, f64)>,
    /// Name of the built Lagrangian
    #[arg(long, default_value = "built")]
    pub name: String,
    #[command(flatten)]
    pub tests: TestArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: Input,
    /// End values START:END, each comma separated
    #[arg(long, value_name = "START:END", allow_hyphen_values = true)]
    pub bc: String,
    /// End slopes START:END for second-order Lagrangians
    #[arg(long, value_name = "START:END", allow_hyphen_values = true)]
    pub slopes: Option<String>,
    /// Grid points including both ends
    #[arg(long, default_value_t = 201)]
    pub m: usize,
    /// full, or graph:K to tie component K (one-based) to the parameter
    #[arg(long, default_value = "full")]
    pub gauge: String,
    /// Initial curve (see `residual --curve`); default is the linear interpolant
    #[arg(long, value_name = "NAME")]
    pub init: Option<String>,
    /// Convergence threshold on the scaled residual (at least 1e-14)
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("not a number: {t:?}")))
        .collect()
}

pub fn parse_assignment(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got {s:?}"))?;
    let v = v.trim().parse::<f64>().map_err(|_| format!("not a number: {v:?}"))?;
    Ok((k.trim().to_string(), v))
}

/// `a,b:c,d` into its two lists.
pub fn parse_pair(s: &str) -> Result<(Vec<f64>, Vec<f64>), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected START:END, got {s:?}"))?;
    Ok((parse_list(a)?, parse_list(b)?))
}
