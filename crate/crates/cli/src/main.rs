mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fluctlab::ensembles::EnsembleDescriptor;
use fluctlab::frechet::VariationMode;

use config::{ContourSettings, Format, FunctionSpec, Settings};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or input; exit code 1.
    Validation(String),
    /// A computation failed; exit code 2.
    Numeric(String),
    Io(String),
}

impl CliError {
    pub fn field(name: &str, e: fluctlab::Error) -> Self {
        match CliError::from(e) {
            CliError::Validation(msg) => CliError::Validation(format!("field `{name}`: {msg}")),
            other => other,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 1,
            CliError::Numeric(_) => 2,
        }
    }
}

impl From<fluctlab::Error> for CliError {
    fn from(e: fluctlab::Error) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "{m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

/// Random matrix fluctuation experiments.
#[derive(Parser, Debug)]
#[command(name = "fluctlab", version)]
struct Cli {
    /// JSON experiment config; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for replica loops.
    #[arg(long, global = true, env = "FLUCTLAB_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct EnsembleArgs {
    /// `gue` or an inline JSON ensemble descriptor.
    #[arg(long)]
    ensemble: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    replicas: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct FunctionArgs {
    /// Test function: a name (`id`, `x3`, `sin`, `cos`, `gauss`, `exp`) or
    /// `poly:c0,c1,…`.
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    g: Option<String>,
}

#[derive(Args, Debug, Default)]
struct ContourArgs {
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    z_radius: Option<f64>,
    #[arg(long)]
    w_radius: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw matrices and dump their spectra.
    Sample {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        /// Include the matrix entries in JSON output.
        #[arg(long)]
        matrices: bool,
    },
    /// Monte Carlo covariance of two linear statistics.
    Covariance {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[command(flatten)]
        functions: FunctionArgs,
        /// Comma-separated list of sizes.
        #[arg(long, value_delimiter = ',')]
        n_values: Option<Vec<usize>>,
    },
    /// Second-order Cauchy transform: closed forms, series and Monte Carlo.
    G2 {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        /// Tabulate both closed forms over a grid of point pairs.
        #[arg(long)]
        grid: bool,
        #[arg(long)]
        grid_size: Option<usize>,
        /// `re,im`
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        z: Option<[f64; 2]>,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        w: Option<[f64; 2]>,
        /// Total degree of the series.
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Limiting covariance by contour integration, with the exact value for
    /// polynomials.
    Rho {
        #[command(flatten)]
        functions: FunctionArgs,
        #[command(flatten)]
        contour: ContourArgs,
    },
    /// Distribution of a centered linear statistic across sizes.
    Clt {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[command(flatten)]
        functions: FunctionArgs,
        #[arg(long, value_delimiter = ',')]
        n_values: Option<Vec<usize>>,
        /// Limiting variance; computed from `f` when absent.
        #[arg(long)]
        rho_target: Option<f64>,
    },
    /// Run the validation suite.
    Check {
        /// Comma-separated check ids.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<usize>>,
    },
    /// Fréchet integral and variation of a kernel mesh.
    Frechet {
        #[arg(long)]
        mesh: Option<PathBuf>,
        #[command(flatten)]
        functions: FunctionArgs,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Integrate the derivatives of `f` and `g`.
        #[arg(long)]
        kernel: bool,
    },
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Exact,
    UpperBound,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Sample { .. } => "sample",
            Command::Covariance { .. } => "covariance",
            Command::G2 { .. } => "g2",
            Command::Rho { .. } => "rho",
            Command::Clt { .. } => "clt",
            Command::Check { .. } => "check",
            Command::Frechet { .. } => "frechet",
        }
    }
}

fn parse_ensemble(text: &str) -> Result<EnsembleDescriptor, CliError> {
    let text = text.trim();
    if text == "gue" {
        return Ok(EnsembleDescriptor::Gue { n: 16, cutoff: None });
    }
    serde_json::from_str(text).map_err(|e| CliError::Validation(format!("--ensemble: {e}")))
}

fn flag(b: bool) -> Option<bool> {
    b.then_some(true)
}

fn parse_point(text: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = text.split(',').collect();
    let [re, im] = parts[..] else {
        return Err(format!("expected `re,im`, got {text:?}"));
    };
    let parse = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
    Ok([parse(re)?, parse(im)?])
}

impl EnsembleArgs {
    fn apply(self, s: &mut Settings) -> Result<(), CliError> {
        if let Some(e) = self.ensemble {
            s.ensemble = Some(parse_ensemble(&e)?);
        }
        s.n = self.n;
        s.replicas = self.replicas;
        Ok(())
    }
}

impl FunctionArgs {
    fn apply(self, s: &mut Settings) {
        s.f = self.f.map(FunctionSpec::Name);
        s.g = self.g.map(FunctionSpec::Name);
    }
}

/// Settings given on the command line.
fn flag_settings(cli: &mut Cli) -> Result<Settings, CliError> {
    let mut s = Settings {
        seed: cli.seed,
        out: cli.out.clone(),
        format: cli.format,
        ..Settings::default()
    };
    let command = std::mem::replace(&mut cli.command, Command::Check { only: None });
    match command {
        Command::Sample { ensemble, matrices } => {
            ensemble.apply(&mut s)?;
            s.matrices = flag(matrices);
        }
        Command::Covariance { ensemble, functions, n_values } => {
            ensemble.apply(&mut s)?;
            functions.apply(&mut s);
            s.n_values = n_values;
        }
        Command::G2 { ensemble, grid, grid_size, z, w, degree } => {
            ensemble.apply(&mut s)?;
            s.grid = flag(grid);
            s.grid_size = grid_size;
            s.z = z;
            s.w = w;
            s.degree = degree;
        }
        Command::Rho { functions, contour } => {
            functions.apply(&mut s);
            if contour.nodes.is_some() || contour.z_radius.is_some() || contour.w_radius.is_some() {
                s.contour = Some(ContourSettings {
                    nodes: contour.nodes,
                    z_radius: contour.z_radius,
                    w_radius: contour.w_radius,
                    enclosed: None,
                });
            }
        }
        Command::Clt { ensemble, functions, n_values, rho_target } => {
            ensemble.apply(&mut s)?;
            functions.apply(&mut s);
            s.n_values = n_values;
            s.rho_target = rho_target;
        }
        Command::Check { only } => s.only = only,
        Command::Frechet { mesh, functions, mode, kernel } => {
            s.mesh = mesh;
            functions.apply(&mut s);
            s.mode = mode.map(|m| match m {
                ModeArg::Exact => VariationMode::Exact,
                ModeArg::UpperBound => VariationMode::UpperBound,
            });
            s.kernel = flag(kernel);
        }
    }
    Ok(s)
}

fn run(mut cli: Cli) -> Result<bool, CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Validation("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    let command = cli.command.name();
    let file = match &cli.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    if let Some(c) = &file.command {
        if c != command {
            return Err(CliError::Validation(format!(
                "field `command`: config is for `{c}` but `{command}` was run"
            )));
        }
    }
    let mut settings = file.merge(flag_settings(&mut cli)?);
    settings.command = Some(command.to_string());
    settings.seed.get_or_insert(if command == "check" {
        fluctlab::suite::DEFAULT_SUITE_SEED
    } else {
        DEFAULT_SEED
    });
    let out = settings.out.take();
    let (report, ok) = match command {
        "sample" => (commands::sample(&settings)?, true),
        "covariance" => (commands::covariance(&settings)?, true),
        "g2" => (commands::g2(&settings)?, true),
        "rho" => (commands::rho(&settings)?, true),
        "clt" => (commands::clt(&settings)?, true),
        "check" => commands::check(&settings)?,
        "frechet" => (commands::frechet(&settings)?, true),
        _ => unreachable!("unknown command"),
    };
    let bytes = output::render(command, &settings, &report)?;
    output::emit(&bytes, out.as_deref())?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("fluctlab: some checks failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("fluctlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
