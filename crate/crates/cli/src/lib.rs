//! Command-line front end for `contactflow-core`.
//!
//! [`run`] parses an argument vector, executes one subcommand and returns the
//! process exit code: 0 on success, 1 for usage and I/O errors, 2 for numeric
//! or domain failures and 3 when the check suite reports failing invariants.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use contactflow_core::ModelParams;

mod commands;
pub mod output;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Numeric(#[from] contactflow_core::Error),
    #[error("{0} check(s) failed")]
    Checks(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Checks(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "contactflow", version, about = "Contact Hamiltonian flows for the mean-field Ising model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Model parameters, either reduced (`--j0bar`, `--x`) or raw (`--beta`, `--j0`, `--field`).
#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// Reduced coupling beta * J0.
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["beta", "j0", "field"])]
    pub j0bar: Option<f64>,
    /// Reduced field beta * H.
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["beta", "j0", "field"])]
    pub x: Option<f64>,
    /// Inverse temperature (raw parameters).
    #[arg(long, allow_negative_numbers = true, requires = "j0")]
    pub beta: Option<f64>,
    /// Coupling constant (raw parameters).
    #[arg(long, allow_negative_numbers = true, requires = "beta")]
    pub j0: Option<f64>,
    /// External field (raw parameters).
    #[arg(long, allow_negative_numbers = true, requires = "beta")]
    pub field: Option<f64>,
}

impl ParamArgs {
    /// Resolves the coupling and, when `need_field`, the reduced field.
    pub fn resolve(&self, need_field: bool) -> Result<(ModelParams, Option<f64>), CliError> {
        let (params, x) = match (self.j0bar, self.beta, self.j0) {
            (Some(j), None, None) => (ModelParams::new(j)?, self.x),
            (None, Some(b), Some(j0)) => {
                let (p, x) = ModelParams::from_raw(b, j0, self.field.unwrap_or(0.0))?;
                (p, self.field.map(|_| x))
            }
            _ => return Err(CliError::Usage("give either --j0bar or --beta with --j0".into())),
        };
        if need_field && x.is_none() {
            return Err(CliError::Usage("a field is required: --x, or --field with raw parameters".into()));
        }
        Ok((params, x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlaneArg {
    Xz,
    Xy,
    Yz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PruneArg {
    None,
    Unstable,
    UnstableMetastable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Squared,
    Cubic,
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Quick,
    Full,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Equilibrium branches at one field, sorted by pseudo-free energy.
    Branches {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Samples the Legendre curve on a magnetization grid.
    Curve {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = -0.999, allow_negative_numbers = true)]
        ymin: f64,
        #[arg(long, default_value_t = 0.999, allow_negative_numbers = true)]
        ymax: f64,
        #[arg(long, default_value_t = 2001)]
        n: usize,
        #[arg(long, value_enum, default_value = "plus")]
        convention: ConventionArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Projects a curve file to a plane, optionally pruning branches.
    Project {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        plane: PlaneArg,
        #[arg(long, value_enum, default_value = "none")]
        prune: PruneArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Integrates one trajectory of a contact flow.
    Flow {
        #[arg(long, value_enum)]
        variant: VariantArg,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_negative_numbers = true)]
        z0: f64,
        /// Defaults to the slope of the branch nearest to `z0`.
        #[arg(long, allow_negative_numbers = true)]
        y0: Option<f64>,
        #[arg(long = "psi0-const", default_value_t = 1.0)]
        psi0_const: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long = "t-max", default_value_t = 200.0)]
        t_max: f64,
        /// Write every n-th state (the final state is always written).
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Quasi-static field sweep -x_max -> x_max -> -x_max.
    Sweep {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long = "x-max")]
        x_max: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Long-time limits over a grid of fields and initial offsets.
    Basin {
        #[arg(long, value_enum)]
        variant: VariantArg,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long = "x-grid", allow_hyphen_values = true)]
        x_grid: String,
        #[arg(long, allow_hyphen_values = true)]
        offsets: String,
        /// Branch the offsets are measured from.
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=3))]
        reference: u8,
        #[arg(long = "psi0-const", default_value_t = 1.0)]
        psi0_const: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long = "t-max", default_value_t = 200.0)]
        t_max: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Exact finite-size free energy against the saddle-point value.
    Audit {
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long, allow_negative_numbers = true)]
        j0: f64,
        #[arg(long, allow_negative_numbers = true)]
        field: f64,
        #[arg(long = "n-list")]
        n_list: String,
    },
    /// Samples the two-branch toy cusp.
    Toy {
        #[arg(long = "x-grid", allow_hyphen_values = true)]
        x_grid: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs the invariant check suite.
    Check {
        #[arg(long, value_enum, default_value = "quick")]
        level: LevelArg,
    },
}

/// Parses `argv` (program name first) and runs the subcommand against the process streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Like [`run`], with explicit output and diagnostic streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                return 1;
            }
            let _ = out.write_all(text.as_bytes());
            return 0;
        }
    };
    match commands::execute(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
