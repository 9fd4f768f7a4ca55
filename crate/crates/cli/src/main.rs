use clap::{Parser, Subcommand, ValueEnum};
use nlverify::counterexamples::{self as cx, Family};
use nlverify::suites::{self, Params, SUITES};
use nlverify::Error;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "nlverify", version, about = "Numerical checks for nonlocal antisymmetric problems")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a verification suite and write its report
    Run {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suite: String,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        s: f64,
        /// Comma-separated list
        #[arg(long, value_delimiter = ',', default_values_t = [0.02, 0.01, 0.005])]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        /// Overrides every check's tolerance
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1 << 18)]
        samples: usize,
        /// Output file (stdout when absent)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Describe what a check computes and how it is judged
    Explain { check_id: String },
    /// Tabulate a counterexample polynomial as CSV
    EmitCsv {
        #[arg(value_parser = ["harnack", "smp"])]
        family: String,
        #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.4, 0.6, 0.8])]
        eps: Vec<f64>,
        #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
        to: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Io(_) => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

fn write_out(out: Option<&PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(|e| Error::Io(e.to_string())),
    }
}

fn run(cmd: Cmd) -> Result<u8, (u8, String)> {
    let err = |e: Error| (exit_for(&e), e.to_string());
    match cmd {
        Cmd::Run { suite, n, s, eps, alpha, tol, seed, samples, out, format } => {
            let params = Params { n, s, eps, alpha, tol, seed, samples };
            let report = suites::run_suite(&suite, &params).map_err(err)?;
            let text = match format {
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv(),
            }
            .map_err(err)?;
            write_out(out.as_ref(), &text).map_err(err)?;
            let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.check_id.as_str()).collect();
            if failed.is_empty() {
                Ok(0)
            } else {
                eprintln!("{} of {} checks failed: {}", failed.len(), report.checks.len(), failed.join(", "));
                Ok(EXIT_FAIL)
            }
        }
        Cmd::Explain { check_id } => match suites::explain(&check_id) {
            Some(t) => {
                println!("{t}");
                Ok(0)
            }
            None => Err((EXIT_USAGE, format!("unknown check id {check_id:?}"))),
        },
        Cmd::EmitCsv { family, eps, from, to, step, out } => {
            let fam = Family::parse(&family).map_err(err)?;
            let grid = cx::uniform_grid(from, to, step).map_err(err)?;
            cx::emit_family_csv(fam, &eps, &grid, &out).map_err(err)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err((code, msg)) => {
            eprintln!("nlverify: {msg}");
            ExitCode::from(code)
        }
    }
}
