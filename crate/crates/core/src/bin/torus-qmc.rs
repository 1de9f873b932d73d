use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use torus_qmc::driver::{
    certificate_summary, cmd_certify, cmd_enumerate, cmd_eval, cmd_lattice, cmd_optimize, cmd_table, format_table,
    list_cells, parse_prefix, RunConfig,
};
use torus_qmc::lattice::{fibonacci_index, fibonacci_spec, LatticeSpec};
use torus_qmc::optimize::{DEFAULT_EPS, DEFAULT_MAX_ITER};
use torus_qmc::pointfile::write_text;
use torus_qmc::{Error, Gamma, ScalarMode};

const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_SOFTWARE: u8 = 70;
const EXIT_IO: u8 = 74;

/// Optimal two-dimensional cubature points on the torus.
#[derive(Parser)]
#[command(name = "torus-qmc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize the worst-case error over every cell.
    Optimize(Common),
    /// Prove a candidate point set optimal with exact lower bounds.
    Certify {
        #[command(flatten)]
        common: Common,
        /// Point file with the candidate.
        candidate: PathBuf,
    },
    /// Count (and optionally list) the cells of a search.
    Enumerate {
        #[arg(long)]
        n: usize,
        /// Print every cell, marking those that are not semi-canonical.
        #[arg(long)]
        list: bool,
    },
    /// Optimal cells and metrics for N = 1..n.
    Table(Common),
    /// Metrics of the points in a file.
    Eval {
        points: PathBuf,
        #[arg(long, default_value = "1")]
        gamma: String,
        #[arg(long)]
        exact: bool,
    },
    /// Write a rank-1 lattice as a point file.
    Lattice {
        #[arg(long)]
        n: usize,
        /// Generator; the Fibonacci generator is used when omitted and n is
        /// a Fibonacci number.
        #[arg(long)]
        g: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    n: usize,
    /// Kernel weight, a rational in [0, 6].
    #[arg(long, default_value = "1")]
    gamma: String,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    /// Interior offset for certification; chosen automatically when omitted.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    #[arg(long)]
    threads: Option<usize>,
    /// Evaluate reported metrics in exact rational arithmetic.
    #[arg(long)]
    exact: bool,
    /// Root directory for records and point files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Restrict the search to cells starting with this prefix, e.g. "0 2".
    #[arg(long)]
    shard_prefix: Option<String>,
    #[arg(long)]
    emit_plot_data: bool,
    /// Suppress progress output.
    #[arg(long)]
    quiet: bool,
}

impl Common {
    fn config(&self) -> Result<RunConfig, Error> {
        let mut cfg = RunConfig::new(self.n, Gamma::parse(&self.gamma)?);
        cfg.eps = self.eps;
        cfg.delta = self.delta;
        cfg.max_iter = self.max_iter;
        cfg.threads = self.threads;
        cfg.out = self.out.clone();
        cfg.mode = if self.exact { ScalarMode::Exact } else { ScalarMode::Float };
        cfg.shard_prefix = self.shard_prefix.as_deref().map(parse_prefix).transpose()?;
        cfg.emit_plot_data = self.emit_plot_data;
        cfg.progress = !self.quiet;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::GammaOutOfRange(_) | Error::InvalidGenerator { .. } | Error::TooLarge { .. } => {
            EXIT_USAGE
        }
        Error::Parse { .. } | Error::Validation(_) | Error::AmbiguousCell { .. } | Error::SizeMismatch(..) => EXIT_DATA,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_SOFTWARE,
    }
}

fn print_json(v: &impl serde::Serialize) {
    let text = serde_json::to_string_pretty(v).expect("serializable");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Optimize(c) => {
            let out = cmd_optimize(&c.config()?)?;
            print_json(&out.record);
            if !out.record.unsolved.is_empty() {
                eprintln!("unsolved cells: {}", out.record.unsolved.join(", "));
            }
            Ok(out.exit_code() as u8)
        }
        Command::Certify { common, candidate } => {
            let cert = cmd_certify(&common.config()?, &candidate)?;
            print_json(&certificate_summary(&cert));
            let unresolved = cert.unresolved();
            if !unresolved.is_empty() {
                eprintln!("unresolved cells: {}", unresolved.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", "));
            }
            Ok(cert.outcome().exit_code() as u8)
        }
        Command::Enumerate { n, list } => {
            if n == 0 {
                return Err(Error::Config("n must be positive".into()));
            }
            if list {
                let mut out = std::io::stdout().lock();
                for (sigma, semi) in list_cells(n) {
                    if writeln!(out, "{sigma}{}", if semi { "" } else { " *" }).is_err() {
                        return Ok(0);
                    }
                }
            }
            print_json(&cmd_enumerate(n));
            Ok(0)
        }
        Command::Table(c) => {
            let cfg = c.config()?;
            let rows = cmd_table(cfg.n, &cfg)?;
            eprint!("{}", format_table(&rows));
            print_json(&rows);
            Ok(0)
        }
        Command::Eval { points, gamma, exact } => {
            let mode = if exact { ScalarMode::Exact } else { ScalarMode::Float };
            print_json(&cmd_eval(&points, &Gamma::parse(&gamma)?, mode)?);
            Ok(0)
        }
        Command::Lattice { n, g, out } => {
            let spec = match g {
                Some(g) => LatticeSpec::new(n, g)?,
                None => fibonacci_index(n)
                    .and_then(fibonacci_spec)
                    .map_err(|_| Error::Config(format!("{n} is not a Fibonacci number; pass --g")))?,
            };
            let text = cmd_lattice(spec);
            match out {
                Some(path) => write_text(&path, &text)?,
                None => {
                    let _ = std::io::stdout().lock().write_all(text.as_bytes());
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}
