//! Command-line driver: configuration, subcommands, verification suites and
//! convergence studies on top of `tailwave-core`.

pub mod commands;
pub mod config;
pub mod convergence;
pub mod error;
pub mod output;
pub mod verify;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use tailwave_core::model::Kind;

use crate::commands::Observable;
use crate::config::RunConfig;
use crate::convergence::{Solver, OrderEstimate};
use crate::error::{CliError, CliResult, ExitStatus};
use crate::output::{summary_line, RunOutput};

#[derive(Debug, Parser)]
#[command(name = "tailwave", version, about = "Late-time tail solvers for inverse-square and charged wave equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Isp,
    Csf,
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Kind {
        match k {
            KindArg::Isp => Kind::Isp,
            KindArg::Csf => Kind::Csf,
        }
    }
}

#[derive(Debug, Clone, clap::Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub q: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub e: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ObservableArg {
    Radiation,
    Timelike,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SolverArg {
    Ads,
    Null,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the exponent table `ell,re_p,im_p,alpha`.
    Exponents {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 4)]
        lmax: usize,
    },
    /// Evolve Cauchy data from T = -1 in the compactified chart.
    EvolveAds {
        #[arg(long)]
        config: PathBuf,
    },
    /// Characteristic evolution, compactified or physical.
    EvolveNull {
        #[arg(long)]
        config: PathBuf,
    },
    /// Fit a power law to a series CSV and compare with the predicted exponent.
    Tails {
        #[arg(long)]
        input: PathBuf,
        /// `lo:hi`; defaults to the last decade of samples.
        #[arg(long)]
        window: Option<String>,
        #[arg(long, default_value_t = 0)]
        expect_ell: usize,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum)]
        observable: Option<ObservableArg>,
        /// Also write the report CSV here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a verification suite; exits with 3 if any check fails.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 20240611)]
        seed: u64,
    },
    /// Evolve the config for several couplings and modes in parallel.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated couplings: `a` for ISP, `q` for CSF.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long, default_value = "0")]
        ells: String,
    },
    /// Three-grid self-convergence study.
    Convergence {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        solver: SolverArg,
    },
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> CliResult<Vec<T>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::Argument(format!("{what} entry '{t}' is not valid")))
        })
        .collect()
}

/// Runs one command and returns the text to print on standard output.
pub fn execute(command: Command) -> CliResult<String> {
    match command {
        Command::Exponents { model, lmax } => {
            let params = commands::model_from_args(model.kind.into(), model.a, model.q, model.e)?;
            Ok(commands::exponents_csv(&params, lmax).trim_end().to_string())
        }
        Command::EvolveAds { config } => commands::evolve_ads_command(&RunConfig::load(&config)?),
        Command::EvolveNull { config } => commands::evolve_null_command(&RunConfig::load(&config)?),
        Command::Tails {
            input,
            window,
            expect_ell,
            model,
            observable,
            output,
        } => {
            let params = commands::model_from_args(model.kind.into(), model.a, model.q, model.e)?;
            let window = window.as_deref().map(commands::parse_window).transpose()?;
            let observable = observable.map(|o| match o {
                ObservableArg::Radiation => Observable::Radiation,
                ObservableArg::Timelike => Observable::Timelike,
            });
            let report = commands::tails_report(&input, window, &params, expect_ell, observable)?;
            let row = commands::tails_row(&report);
            if let Some(path) = output {
                tailwave_core::io::write_csv(&path, commands::TAILS_HEADER, std::slice::from_ref(&row))?;
            }
            Ok(format!(
                "{}\n{}\n{}",
                commands::TAILS_HEADER.join(","),
                row.join(","),
                commands::tails_text(&report)
            ))
        }
        Command::Verify { suite, seed } => {
            let suite: verify::Suite = suite.parse()?;
            let checks = verify::run_suite(suite, seed)?;
            let mut text = String::from("suite,check,value,threshold,status\n");
            for c in &checks {
                text.push_str(&format!(
                    "{},{},{},{},{}\n",
                    c.suite,
                    c.name.replace(',', ";"),
                    tailwave_core::io::format_float(c.value),
                    tailwave_core::io::format_float(c.threshold),
                    if c.pass { "PASS" } else { "FAIL" }
                ));
            }
            let failed = checks.iter().filter(|c| !c.pass).count();
            text.push_str(&summary_line(
                "verify",
                &[("checks", checks.len().to_string()), ("failed", failed.to_string())],
            ));
            if failed > 0 {
                println!("{text}");
                return Err(CliError::Assertion(format!("{failed} of {} checks failed", checks.len())));
            }
            Ok(text)
        }
        Command::Sweep { config, values, ells } => {
            let cfg = RunConfig::load(&config)?;
            let values: Vec<f64> = parse_list(&values, "value")?;
            let ells: Vec<usize> = parse_list(&ells, "ell")?;
            commands::sweep_command(&cfg, &values, &ells)
        }
        Command::Convergence { config, solver } => {
            let cfg = RunConfig::load(&config)?;
            let mut estimates: Vec<OrderEstimate> = Vec::new();
            if matches!(solver, SolverArg::Ads | SolverArg::Both) {
                estimates.extend(convergence::ads_orders(&cfg)?);
            }
            if matches!(solver, SolverArg::Null | SolverArg::Both) {
                estimates.extend(convergence::null_orders(&cfg)?);
            }
            let out = RunOutput::create(cfg.output_dir(), "convergence", &cfg.echo)?;
            out.csv(
                "convergence.csv",
                &["solver", "observable", "diff_coarse", "diff_fine", "order"],
                &convergence::rows(&estimates),
            )?;
            out.finish()?;
            let fields: Vec<(&str, String)> = estimates
                .iter()
                .filter(|e| e.observable == "field")
                .map(|e| (if e.solver == Solver::Ads { "ads_field_order" } else { "null_field_order" }, e.order_text()))
                .collect();
            Ok(summary_line("convergence", &fields))
        }
    }
}

/// Parses `argv` (including the program name), runs the command and returns the
/// process exit code: 0 success, 1 validation error, 2 numerical failure,
/// 3 failed verification.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { ExitStatus::Validation as i32 } else { ExitStatus::Success as i32 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(text) => {
            println!("{text}");
            ExitStatus::Success as i32
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_status() as i32
        }
    }
}
