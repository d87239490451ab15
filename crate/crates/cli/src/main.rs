//! `vexp`: norms, modulars, dual norms and the verification harness from the
//! command line.
//!
//! Exit codes: 0 success, 1 property failure, 2 config or I/O error,
//! 3 numerical failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use vexp_core::besov::{besov_norm, build_filter_pair_with, FilterOptions};
use vexp_core::exponents::{check_normability, ConditionTag};
use vexp_core::io::{read_grid_function, read_sequence, RunConfig};
use vexp_core::lebesgue::luxemburg_norm;
use vexp_core::mixed::{mixed_modular_p1, mixed_modular_p1a, mixed_norm_with, MixedOptions};
use vexp_core::verify::{self, Faults, VerifyConfig};
use vexp_core::{kothe_dual_norm, Error, Method};

#[derive(Parser)]
#[command(name = "vexp", version, about = "Variable-exponent Lebesgue, mixed and Besov norms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Luxemburg-type norm of the input.
    Norm {
        #[arg(value_enum)]
        space: Space,
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Mixed modular of a sequence by per-term infima or the closed form.
    Modular {
        #[arg(value_enum)]
        form: ModularForm,
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Kothe dual norm of a sequence.
    Dual {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "ascent")]
        method: MethodArg,
        #[command(flatten)]
        common: Common,
    },
    /// Run the randomised property suites and write a CSV report.
    Verify {
        /// Suite names, or `all`; overrides the config.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        suite: Option<Vec<String>>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
        /// Deliberate defects for mutation testing.
        #[arg(long, value_enum, hide = true)]
        inject: Vec<Fault>,
        #[command(flatten)]
        common: Common,
    },
    /// Filter-bank utilities.
    Filters {
        #[command(subcommand)]
        action: FiltersAction,
    },
}

#[derive(Subcommand)]
enum FiltersAction {
    /// Write the filter bank as CSV, one row per nonnegative frequency bin.
    Export {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Space {
    Lp,
    Mixed,
    Besov,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModularForm {
    P1,
    P1a,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Brute,
    Ascent,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fault {
    SkipFilterNormalization,
    BreakInfConvention,
}

/// Why a command did not succeed.
enum Failure {
    Properties(usize),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

#[derive(Serialize)]
struct NormReport {
    space: &'static str,
    value: f64,
    tolerance: f64,
    iterations: usize,
    condition_tag: Option<ConditionTag>,
}

fn load_config(common: &Common) -> Result<RunConfig, Error> {
    match &common.config {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default()),
    }
}

fn emit(common: &Common, text: &str) -> Result<(), Error> {
    match &common.out {
        Some(path) => write_file(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn emit_json(common: &Common, value: &impl Serialize) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(common, &text)
}

fn cmd_norm(space: Space, input: &Path, common: &Common) -> Result<(), Failure> {
    let cfg = load_config(common)?;
    let grid = cfg.grid()?;
    let p = cfg.p_field()?;
    let tol = cfg.tolerances.outer;
    let report = match space {
        Space::Lp => {
            let f = read_grid_function(input, grid)?;
            let r = luxemburg_norm(&p, &f, tol)?;
            NormReport {
                space: "lp",
                value: r.value,
                tolerance: r.tolerance,
                iterations: r.iterations,
                condition_tag: None,
            }
        }
        Space::Mixed => {
            let q = cfg.q_field()?;
            let f = read_sequence(input, grid, cfg.sequence_layout)?;
            let opts = MixedOptions {
                inner_tol: cfg.tolerances.inner,
                outer_tol: tol,
                ..MixedOptions::from_outer(tol)
            };
            let r = mixed_norm_with(&p, &q, &f, &opts)?;
            NormReport {
                space: "mixed",
                value: r.value,
                tolerance: r.tolerance,
                iterations: r.iterations,
                condition_tag: Some(check_normability(&p, &q)?.tag),
            }
        }
        Space::Besov => {
            let q = cfg.q_field()?;
            let s = cfg.s_field()?;
            let f = read_grid_function(input, grid)?;
            let filters = build_filter_pair_with(
                grid,
                FilterOptions {
                    shape: cfg.filter_shape,
                    normalize: true,
                },
            )?;
            let r = besov_norm(&f, &s, &p, &q, &filters, tol)?;
            NormReport {
                space: "besov",
                value: r.value,
                tolerance: r.tolerance,
                iterations: r.iterations,
                condition_tag: Some(check_normability(&p, &q)?.tag),
            }
        }
    };
    emit_json(common, &report)?;
    Ok(())
}

fn cmd_modular(form: ModularForm, input: &Path, common: &Common) -> Result<(), Failure> {
    let cfg = load_config(common)?;
    let grid = cfg.grid()?;
    let (p, q) = (cfg.p_field()?, cfg.q_field()?);
    let f = read_sequence(input, grid, cfg.sequence_layout)?;
    let tol = cfg.tolerances.inner;
    let report: Value = match form {
        ModularForm::P1 => {
            let b = mixed_modular_p1(&p, &q, &f, tol)?;
            json!({"form": "p1", "value": b.total, "per_term": b.per_term, "tolerance": tol})
        }
        ModularForm::P1a => {
            let v = mixed_modular_p1a(&p, &q, &f, tol)?;
            json!({"form": "p1a", "value": v, "per_term": Value::Null, "tolerance": tol})
        }
    };
    emit_json(common, &report)?;
    Ok(())
}

fn cmd_dual(input: &Path, method: MethodArg, common: &Common) -> Result<(), Failure> {
    let cfg = load_config(common)?;
    let grid = cfg.grid()?;
    let (p, q) = (cfg.p_field()?, cfg.q_field()?);
    let g = read_sequence(input, grid, cfg.sequence_layout)?;
    let method = match method {
        MethodArg::Brute => Method::Brute,
        MethodArg::Ascent => Method::Ascent,
    };
    let tol = cfg.tolerances.outer;
    let r = kothe_dual_norm(&p, &q, &g, method, tol)?;
    let report = json!({
        "space": "dual",
        "value": r.value,
        "tolerance": tol,
        "iterations": r.iterations,
        "condition_tag": check_normability(&p, &q)?.tag,
        "method": r.method,
        "starts": r.starts,
        "certificate_gap": r.certificate_gap,
    });
    emit_json(common, &report)?;
    Ok(())
}

fn cmd_verify(
    suite: Option<Vec<String>>,
    seed: Option<u64>,
    samples: Option<usize>,
    inject: &[Fault],
    common: &Common,
) -> Result<(), Failure> {
    let cfg = load_config(common)?;
    let mut faults = Faults::default();
    for f in inject {
        match f {
            Fault::SkipFilterNormalization => faults.skip_filter_normalization = true,
            Fault::BreakInfConvention => faults.break_inf_convention = true,
        }
    }
    let vcfg = VerifyConfig {
        grid: cfg.grid()?,
        seed: seed.unwrap_or(cfg.seed),
        samples: samples.unwrap_or(cfg.samples),
        tolerances: cfg.tolerances,
        suites: verify::parse_suites(&suite.unwrap_or(cfg.suite))?,
        faults,
    };
    let report = verify::run(&vcfg)?;
    emit(common, &report.to_csv())?;
    match report.failures() {
        0 => Ok(()),
        n => Err(Failure::Properties(n)),
    }
}

fn cmd_filters_export(common: &Common) -> Result<(), Failure> {
    let cfg = load_config(common)?;
    let filters = build_filter_pair_with(
        cfg.grid()?,
        FilterOptions {
            shape: cfg.filter_shape,
            normalize: true,
        },
    )?;
    let mut buf = Vec::new();
    filters.write_csv(&mut buf)?;
    emit(common, &String::from_utf8_lossy(&buf))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Norm { space, input, common } => cmd_norm(space, &input, &common),
        Command::Modular { form, input, common } => cmd_modular(form, &input, &common),
        Command::Dual { input, method, common } => cmd_dual(&input, method, &common),
        Command::Verify {
            suite,
            seed,
            samples,
            inject,
            common,
        } => cmd_verify(suite, seed, samples, &inject, &common),
        Command::Filters {
            action: FiltersAction::Export { common },
        } => cmd_filters_export(&common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Properties(n)) => {
            eprintln!("vexp: {n} property failure(s)");
            ExitCode::from(1)
        }
        Err(Failure::Core(e)) => {
            eprintln!("vexp: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
