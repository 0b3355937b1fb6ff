//! Command-line front end: verification suites, pointwise evaluation, and
//! the built-in example catalogue.
//!
//! Exit codes: 0 when everything passes, 1 on a verification failure,
//! 2 on configuration or parse errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use legendrean::harness::{
    builtin, builtin_toml, eval_op, load_config, parse_point, run_suite, EvalRequest, Loaded,
    SuiteOptions, BUILTINS,
};

#[derive(Parser)]
#[command(
    name = "legctl",
    version,
    about = "Verify Legendrean contact structures and the induced connections numerically"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a verification suite over randomized sample points.
    Verify {
        #[command(flatten)]
        source: Source,
        /// Suite name (structure, reeb-upsilon, splitting, bracket-reeb,
        /// connections, tractor, bott, codiff-S, rho, bgg, all).
        #[arg(long, default_value = "all")]
        suite: String,
        /// Number of sample points.
        #[arg(long, default_value_t = 100)]
        points: usize,
        /// RNG seed for the point stream.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Jet truncation order (2 or 3).
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// Override every property tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Evaluate one operation at a point.
    Eval {
        #[command(flatten)]
        source: Source,
        /// Operation: reeb, upsilon, split, nablaQ, nablaE, tractor, S, P, D.
        #[arg(long)]
        op: String,
        /// Rescaling expression u (defaults to the first configured one).
        #[arg(long)]
        u: Option<String>,
        /// Q-section expression theta(rho) (defaults to the first configured one).
        #[arg(long)]
        rho: Option<String>,
        /// Evaluation point, e.g. "x=0.5,y=0.2,z=0.1".
        #[arg(long)]
        at: String,
        /// Jet truncation order.
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// List or show the built-in example structures.
    Examples {
        #[command(subcommand)]
        action: Option<ExamplesCmd>,
    },
}

#[derive(Args)]
#[group(required = false, multiple = false)]
struct Source {
    /// Path to a structure-definition file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Name of a built-in example.
    #[arg(long)]
    example: Option<String>,
}

#[derive(Subcommand)]
enum ExamplesCmd {
    /// List the built-in examples.
    List,
    /// Print the definition file of one example.
    Show { name: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn load(source: &Source) -> Result<Loaded, legendrean::Error> {
    match (&source.config, &source.example) {
        (Some(path), None) => load_config(path),
        (None, Some(name)) => builtin(name),
        (None, None) => Err(legendrean::Error::Config(
            "pass either --config FILE or --example NAME".into(),
        )),
        (Some(_), Some(_)) => Err(legendrean::Error::Config(
            "--config and --example are mutually exclusive".into(),
        )),
    }
}

fn run(cli: Cli) -> Result<u8, legendrean::Error> {
    match cli.cmd {
        Cmd::Verify {
            source,
            suite,
            points,
            seed,
            order,
            tol,
            format,
        } => {
            let loaded = load(&source)?;
            let opts = SuiteOptions {
                points,
                seed,
                order,
                tol_override: tol,
            };
            let report = run_suite(&loaded, &suite, &opts)?;
            match format {
                Format::Text => print!("{}", report.to_text()),
                Format::Json => println!("{}", report.to_json()),
            }
            Ok(if report.pass { 0 } else { 1 })
        }
        Cmd::Eval {
            source,
            op,
            u,
            rho,
            at,
            order,
            format,
        } => {
            let loaded = load(&source)?;
            let point = parse_point(&at, &loaded)?;
            let req = EvalRequest {
                op,
                point,
                u,
                rho,
                order,
            };
            let out = eval_op(&loaded, &req)?;
            match format {
                Format::Text => print!("{}", out.text),
                Format::Json => println!("{}", out.json),
            }
            Ok(0)
        }
        Cmd::Examples { action } => {
            match action.unwrap_or(ExamplesCmd::List) {
                ExamplesCmd::List => {
                    for b in BUILTINS {
                        println!("{:10}  {}", b.name, b.description);
                    }
                }
                ExamplesCmd::Show { name } => match builtin_toml(&name) {
                    Some(toml) => print!("{toml}"),
                    None => {
                        return Err(legendrean::Error::Config(format!(
                            "unknown example `{name}`"
                        )))
                    }
                },
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
