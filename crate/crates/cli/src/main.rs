use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use paracr_cli::{expr_check::check_expr, render_report, run_job, Format, JobConfig};

#[derive(Parser)]
#[command(name = "paracr", version, about = "Invariants and model checks for para-CR structures")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the job described by a TOML config file.
    Run {
        config: PathBuf,
        /// Overrides `job.seed`.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Overrides `job.out`; stdout when neither is given.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse an expression, print it and check its derivatives.
    CheckExpr { expr: String },
}

const CONFIG_ERROR: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { CONFIG_ERROR } else { 0 });
        }
    };
    match cli.cmd {
        Cmd::Run { config, seed, format, out } => run(config, seed, format, out),
        Cmd::CheckExpr { expr } => match check_expr(&expr) {
            Ok(c) => {
                print!("{}", c.text);
                ExitCode::from(if c.ok { 0 } else { 1 })
            }
            Err(err) => {
                eprintln!("error: {err}");
                eprintln!("  {expr}");
                eprintln!("  {}^", " ".repeat(err.offset()));
                ExitCode::from(CONFIG_ERROR)
            }
        },
    }
}

fn run(config: PathBuf, seed: Option<u64>, format: Format, out: Option<PathBuf>) -> ExitCode {
    let mut cfg = match JobConfig::load(&config) {
        Ok(c) => c,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    if seed.is_some() {
        cfg.job.seed = seed;
    }
    let out = out.or_else(|| cfg.job.out.clone());
    let report = match run_job(&cfg) {
        Ok(r) => r,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    let bytes = render_report(&report, format);
    let written = match &out {
        Some(path) => std::fs::write(path, &bytes).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout().write_all(&bytes).map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        eprintln!("error: {msg}");
        return ExitCode::from(CONFIG_ERROR);
    }
    ExitCode::from(report.exit_code() as u8)
}
