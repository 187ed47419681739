//! `shu` — evaluate the incomplete Macdonald function from the command line.
//!
//! Exit status: 0 success, 1 usage or I/O error, 2 domain error,
//! 3 non-convergence, 4 verification failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use shu_core::figures::{format_value, generate, FigureSpec};
use shu_core::{
    asympt_large_t, evaluate, macdonald_k, run_verify, series_small_t, series_small_z, shu_oracle,
    validate, Evaluation, Field, GridChoice, ShuError, Tolerances,
};

const EXIT_USAGE: u8 = 1;
const EXIT_DOMAIN: u8 = 2;
const EXIT_NONCONVERGENCE: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser)]
#[command(name = "shu", version, about = "Incomplete Macdonald function S_nu(z, t)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate S_nu(z, t) at one point.
    Eval {
        #[arg(long, allow_negative_numbers = true)]
        nu: f64,
        #[arg(long, allow_negative_numbers = true)]
        z: f64,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
        /// Relative tolerance (absolute tolerance is then zero).
        #[arg(long, allow_negative_numbers = true)]
        tol: Option<f64>,
        /// Print one JSON object instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Evaluate the Macdonald function K_nu(z).
    Kfun {
        #[arg(long, allow_negative_numbers = true)]
        nu: f64,
        #[arg(long, allow_negative_numbers = true)]
        z: f64,
    },
    /// Write the CSV data of figure 1-6.
    Figure {
        #[arg(long)]
        id: u8,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        points: Option<usize>,
        /// Comma-separated orders.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        orders: Option<Vec<f64>>,
    },
    /// Run the identity and cross-check battery.
    Verify {
        #[arg(long, value_enum, default_value_t = GridArg::Default)]
        grid: GridArg,
        /// Print a JSON array with one record per check per point.
        #[arg(long)]
        json: bool,
        /// Stop after the first failing check.
        #[arg(long)]
        fail_fast: bool,
    },
    /// Tabulate S over a Cartesian product of parameters as CSV.
    Table {
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        nu_list: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        z_list: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        t_list: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        tol: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Auto,
    Oracle,
    SmallT,
    SmallZ,
    LargeT,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridArg {
    Default,
    Dense,
}

/// A failure with its exit status and message.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: format!("cannot write {}: {e}", path.display()),
        }
    }
}

fn flag_name(field: Field) -> &'static str {
    match field {
        Field::Order => "--nu",
        Field::Argument => "--z",
        Field::Endpoint => "--t",
        Field::Tolerance => "--tol",
        Field::FigureId => "--id",
        Field::Points => "--points",
        Field::GammaArgument | Field::BesselEndpoint | Field::DerivativeOrder => "(internal)",
    }
}

impl From<ShuError> for Failure {
    fn from(e: ShuError) -> Self {
        match e {
            ShuError::Domain { field, value, reason } => Failure {
                code: EXIT_DOMAIN,
                message: format!("{} = {value}: {reason}", flag_name(field)),
            },
            ShuError::Pole(_) => Failure {
                code: EXIT_DOMAIN,
                message: e.to_string(),
            },
            ShuError::NonConvergence { .. } | ShuError::Overflow | ShuError::StepTooCoarse { .. } => {
                Failure {
                    code: EXIT_NONCONVERGENCE,
                    message: e.to_string(),
                }
            }
        }
    }
}

fn tolerances(tol: Option<f64>) -> Result<Tolerances, Failure> {
    match tol {
        None => Ok(Tolerances::default()),
        Some(rel) => {
            if !(rel > 0.0) || !rel.is_finite() {
                return Err(ShuError::Domain {
                    field: Field::Tolerance,
                    value: rel,
                    reason: "must be finite and > 0",
                }
                .into());
            }
            Ok(Tolerances::relative(rel))
        }
    }
}

fn cmd_eval(nu: f64, z: f64, t: f64, method: Method, tol: Option<f64>, json: bool) -> Result<String, Failure> {
    let p = validate(nu, z, t)?;
    let tol = tolerances(tol)?;
    let ev: Evaluation = match method {
        Method::Auto => evaluate(&p, &tol)?.0,
        Method::Oracle => shu_oracle(&p, &tol)?,
        Method::SmallT => series_small_t(&p, &tol)?,
        Method::SmallZ => series_small_z(&p, &tol)?,
        Method::LargeT => asympt_large_t(&p, &tol)?,
    };
    if json {
        let obj = serde_json::json!({
            "value": ev.value,
            "error_estimate": ev.error_estimate,
            "method": ev.method.as_str(),
            "work": ev.work,
        });
        Ok(obj.to_string())
    } else {
        Ok(format!(
            "value={} error_estimate={} method={} work={}",
            format_value(ev.value),
            format_value(ev.error_estimate),
            ev.method,
            ev.work
        ))
    }
}

fn cmd_kfun(nu: f64, z: f64) -> Result<String, Failure> {
    // Reuse the parameter check for a clear message naming --z.
    validate(nu, z, 1.0)?;
    Ok(format_value(macdonald_k(nu, z)?))
}

fn cmd_figure(id: u8, out: PathBuf, points: Option<usize>, orders: Option<Vec<f64>>) -> Result<String, Failure> {
    let mut spec = FigureSpec::standard(id)?;
    if let Some(n) = points {
        spec = spec.with_points(n)?;
    }
    if let Some(o) = orders {
        spec = spec.with_orders(o).map_err(|e| {
            let mut f = Failure::from(e);
            f.message = f.message.replace("--nu", "--orders");
            f
        })?;
    }
    let data = generate(&spec);
    std::fs::write(&out, data.to_csv()).map_err(|e| Failure::io(&out, e))?;
    Ok(format!("wrote {} rows to {}", data.rows.len(), out.display()))
}

fn cmd_verify(grid: GridArg, json: bool, fail_fast: bool) -> Result<String, Failure> {
    let grid = match grid {
        GridArg::Default => GridChoice::Default,
        GridArg::Dense => GridChoice::Dense,
    };
    let report = run_verify(grid, fail_fast);
    let text = if json {
        serde_json::to_string_pretty(&report.records).expect("records serialize")
    } else {
        let mut s = String::new();
        for c in &report.summaries {
            let _ = writeln!(
                s,
                "{:4} {:<22} max_rel={:<10.3e} tol={:<8.1e} points={} failures={}",
                if c.passed() { "PASS" } else { "FAIL" },
                c.identity,
                c.max_relative_residual,
                c.tolerance,
                c.points,
                c.failures
            );
        }
        if report.stopped_early {
            s.push_str("stopped after the first failing check (--fail-fast)\n");
        }
        s.pop();
        s
    };
    if report.all_passed() {
        Ok(text)
    } else {
        // The report is printed in full before exiting non-zero.
        println!("{text}");
        Err(Failure {
            code: EXIT_VERIFY,
            message: "verification failed".to_string(),
        })
    }
}

fn error_kind(e: &ShuError) -> &'static str {
    match e {
        ShuError::Domain { .. } => "domain",
        ShuError::Pole(_) => "pole",
        ShuError::Overflow => "overflow",
        ShuError::NonConvergence { .. } => "nonconvergence",
        ShuError::StepTooCoarse { .. } => "step_too_coarse",
    }
}

fn cmd_table(nus: &[f64], zs: &[f64], ts: &[f64], out: PathBuf, tol: Option<f64>) -> Result<String, Failure> {
    let tol = tolerances(tol)?;
    let cells = shu_core::evaluate_grid(nus, zs, ts, &tol);
    let mut csv = String::from("nu,z,t,value,error_estimate,method\n");
    for c in &cells {
        let (value, err, method) = match &c.result {
            Ok(ev) => (format_value(ev.value), format_value(ev.error_estimate), ev.method.to_string()),
            Err(e) => (String::new(), String::new(), format!("error:{}", error_kind(e))),
        };
        let _ = writeln!(
            csv,
            "{},{},{},{value},{err},{method}",
            format_value(c.order),
            format_value(c.argument),
            format_value(c.endpoint)
        );
    }
    std::fs::write(&out, csv).map_err(|e| Failure::io(&out, e))?;
    Ok(format!("wrote {} rows to {}", cells.len(), out.display()))
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Eval { nu, z, t, method, tol, json } => cmd_eval(nu, z, t, method, tol, json),
        Command::Kfun { nu, z } => cmd_kfun(nu, z),
        Command::Figure { id, out, points, orders } => cmd_figure(id, out, points, orders),
        Command::Verify { grid, json, fail_fast } => cmd_verify(grid, json, fail_fast),
        Command::Table { nu_list, z_list, t_list, out, tol } => cmd_table(&nu_list, &z_list, &t_list, out, tol),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(text) => {
            println!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
