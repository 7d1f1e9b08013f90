//! Command-line front end: single-point exponents, sweeps, figure tables,
//! Monte Carlo runs and the validation report, emitted as CSV or JSON.

pub mod args;
pub mod commands;
pub mod error;
pub mod figures;
pub mod output;
pub mod validate;

use args::{Cli, Command, Format};
use clap::Parser;
use commands::{exponent_row, simulate_row, sweep_rows, Point, SimulateRequest, SweepSpec};
use error::{CliError, Result};
use output::{write_csv, write_json, Table};
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};

/// A finished table plus the number of failed validation checks in it.
struct Outcome {
    table: Table,
    failed: usize,
}

fn describe_args(args: &[OsString]) -> String {
    args.iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join(" ")
}

fn kv(key: &str, value: impl ToString) -> (String, String) {
    (key.to_string(), value.to_string())
}

fn opt<T: ToString>(value: &Option<T>) -> String {
    value.as_ref().map_or_else(|| "none".to_string(), ToString::to_string)
}

fn execute(command: &Command, mut meta: Vec<(String, String)>) -> Result<Outcome> {
    let rows = match command {
        Command::Exponent { mu, n0, delta, m } => {
            meta.extend([kv("mu", mu), kv("n0", n0), kv("delta", opt(delta)), kv("m", opt(m))]);
            vec![exponent_row(Point { mu: *mu, n0: *n0, delta: *delta, m: *m }, None)?]
        }
        Command::Figure { figure } => {
            meta.push(kv("figure", figure.name()));
            meta.extend(figures::figure_parameters(*figure));
            figures::figure_rows(*figure)?
        }
        Command::Simulate { receiver, mu, n0, m, delta, trials, seed, estimator, tilt } => {
            let request = SimulateRequest {
                receiver: *receiver,
                mu: *mu,
                n0: *n0,
                m: *m,
                delta: *delta,
                trials: *trials,
                seed: *seed,
                estimator: *estimator,
                tilt: *tilt,
            };
            meta.extend([
                kv("receiver", commands::receiver_name(*receiver)),
                kv("mu", mu),
                kv("n0", n0),
                kv("m", m),
                kv("delta", opt(delta)),
                kv("trials", trials),
                kv("seed", seed),
                kv("estimator", format!("{estimator:?}").to_lowercase()),
                kv("tilt", tilt),
            ]);
            vec![simulate_row(&request)?]
        }
        Command::Validate { level } => {
            meta.push(kv("level", format!("{level:?}").to_lowercase()));
            let checks = validate::run_checks(*level);
            let failed = checks.iter().filter(|c| !c.passed).count();
            let rows = checks.iter().map(validate::Check::row).collect();
            return Ok(Outcome { table: Table::new(meta, rows), failed });
        }
        Command::Sweep { variable, values, start, stop, count, scale, mu, n0, delta, m } => {
            let spec = match (values, start, stop, count) {
                (Some(v), ..) => SweepSpec::new(*variable, v.clone())?,
                (None, Some(a), Some(b), Some(n)) => SweepSpec::from_range(*variable, *a, *b, *n, *scale)?,
                _ => {
                    return Err(CliError::Invalid(
                        "give either --values or --start, --stop and --count".into(),
                    ))
                }
            };
            let needs = |present: bool, name: &str| {
                if present {
                    Ok(())
                } else {
                    Err(CliError::Invalid(format!("sweep needs --{name}")))
                }
            };
            needs(mu.is_some() || *variable == args::Variable::Mu, "mu")?;
            needs(n0.is_some() || *variable == args::Variable::N0, "n0")?;
            let base = Point {
                mu: mu.unwrap_or(spec.values[0]),
                n0: n0.unwrap_or(spec.values[0]),
                delta: *delta,
                m: *m,
            };
            meta.extend([
                kv("variable", format!("{variable:?}").to_lowercase()),
                kv("values", spec.values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")),
                kv("mu", opt(mu)),
                kv("n0", opt(n0)),
                kv("delta", opt(delta)),
                kv("m", opt(m)),
            ]);
            sweep_rows(&spec, base)?
        }
    };
    Ok(Outcome { table: Table::new(meta, rows), failed: 0 })
}

fn emit(table: &Table, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
    match format {
        Format::Csv => write_csv(table, out),
        Format::Json => write_json(table, out),
    }?;
    out.flush()
}

fn run_parsed(cli: &Cli, argv: &[OsString], stdout: &mut dyn Write) -> Result<()> {
    if cli.common.threads == Some(0) {
        return Err(CliError::Invalid("--threads must be at least 1".into()));
    }
    let meta = vec![
        kv("program", format!("qlimit {}", env!("CARGO_PKG_VERSION"))),
        kv("invocation", describe_args(argv)),
    ];
    let outcome = match cli.common.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Invalid(format!("cannot start {n} threads: {e}")))?
            .install(|| execute(&cli.command, meta))?,
        None => execute(&cli.command, meta)?,
    };
    outcome.table.check_finite()?;
    match &cli.common.out {
        Some(path) => {
            let io = |source| CliError::Io { path: path.clone(), source };
            let mut file = BufWriter::new(File::create(path).map_err(io)?);
            emit(&outcome.table, cli.common.format, &mut file).map_err(io)?;
        }
        None => emit(&outcome.table, cli.common.format, stdout).map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        })?,
    }
    if outcome.failed > 0 {
        return Err(CliError::ChecksFailed {
            failed: outcome.failed,
            total: outcome.table.rows.len(),
        });
    }
    Ok(())
}

/// Parses `argv`, runs the command and returns the process exit status.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    match run_parsed(&cli, &argv, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "qlimit: {e}");
            e.exit_code()
        }
    }
}
