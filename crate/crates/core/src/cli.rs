//! Command-line front end: `run`, `validate` and `dump-channels`.
//!
//! Exit codes: 0 success, 1 runtime failure or failed check, 2 usage or
//! configuration error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{
    check_alpha_heuristic, check_prop1, check_prop2_prop3, check_prop4_leakage, check_prop6_nspa,
    write_reports_csv, PropositionReport,
};
use crate::channel::{db_to_linear, ChannelDumpWriter};
use crate::error::Error;
use crate::harness::{run_sweep, trial_realization, write_results_csv, ExperimentConfig};

#[derive(Parser, Debug)]
#[command(name = "cbf", version, about = "Coordinated beamforming user-selection simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo sum-rate sweep; one CSV row per (K, rho, strategy).
    Run(RunArgs),
    /// Statistical checks of the effective-gain, leakage and NSP results.
    Validate(ValidateArgs),
    /// Raw channel coefficients of the first trials, for debugging.
    DumpChannels(DumpArgs),
}

#[derive(Args, Debug)]
struct NetworkArgs {
    /// `key = value` config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    b: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    net: NetworkArgs,
    /// Comma-separated SNR grid in dB.
    #[arg(long, allow_hyphen_values = true)]
    rho_db: Option<String>,
    /// Comma-separated pool sizes; overrides --k.
    #[arg(long)]
    k_grid: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// DZF or DVSINR.
    #[arg(long)]
    precoder: Option<String>,
    /// Comma-separated strategy names, or `all`.
    #[arg(long)]
    strategies: Option<String>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// 1, 2, 3, 4, 5, 6 or all.
    #[arg(long, default_value = "all")]
    prop: String,
    #[arg(long, default_value_t = 3)]
    nt: usize,
    #[arg(long, default_value_t = 3)]
    b: usize,
    #[arg(long, default_value_t = 20_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Comma-separated SNR grid in dB for the SNR-dependent checks.
    #[arg(long, allow_hyphen_values = true)]
    rho_db: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DumpArgs {
    #[command(flatten)]
    net: NetworkArgs,
    #[arg(long, default_value_t = 1)]
    trials: usize,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    fn report(self) -> i32 {
        match self {
            Failure::Usage(m) => {
                eprintln!("error: {m}");
                2
            }
            Failure::Runtime(m) => {
                eprintln!("error: {m}");
                1
            }
        }
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn runtime(e: Error) -> Failure {
    Failure::Runtime(e.to_string())
}

/// Entry point shared by the binary and the tests. `argv[0]` is the
/// program name.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Validate(args) => cmd_validate(args),
        Command::DumpChannels(args) => cmd_dump(args),
    };
    match result {
        Ok(code) => code,
        Err(f) => f.report(),
    }
}

fn load_config(net: &NetworkArgs, extra: &[(&str, Option<String>)]) -> Result<ExperimentConfig, Failure> {
    let mut text = match &net.config {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?,
        None => String::new(),
    };
    let scalars = [
        ("B", net.b.map(|v| v.to_string())),
        ("Nt", net.nt.map(|v| v.to_string())),
        ("K", net.k.map(|v| v.to_string())),
        ("seed", net.seed.map(|v| v.to_string())),
        ("workers", net.workers.map(|v| v.to_string())),
    ];
    for (key, value) in scalars.iter().chain(extra) {
        if let Some(v) = value {
            text.push_str(&format!("\n{key} = {v}"));
        }
    }
    let cfg = ExperimentConfig::parse(&text).map_err(usage)?;
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => write_file(path, bytes),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::Runtime(e.to_string())),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn cmd_run(args: RunArgs) -> Result<i32, Failure> {
    let cfg = load_config(
        &args.net,
        &[
            ("rho_db", args.rho_db.clone()),
            ("k_grid", args.k_grid.clone()),
            ("trials", args.trials.map(|v| v.to_string())),
            ("precoder", args.precoder.clone()),
            ("strategies", args.strategies.clone()),
        ],
    )?;
    let rows = run_sweep(&cfg).map_err(runtime)?;
    let mut buf = Vec::new();
    write_results_csv(&mut buf, &rows).map_err(runtime)?;
    emit(&args.net.out, &buf)?;
    Ok(0)
}

fn parse_db_grid(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Failure::Usage(format!("invalid rho value '{s}'")))
        })
        .collect()
}

fn default_grid_db(prop: &str) -> Vec<f64> {
    match prop {
        "4" => vec![0.0, 10.0, 20.0, 30.0, 40.0, 50.0],
        "5" => vec![-90.0, 0.0, 10.0, 20.0, 80.0],
        _ => vec![-90.0, -20.0, -10.0, 0.0, 10.0, 20.0, 30.0, 80.0],
    }
}

fn cmd_validate(args: ValidateArgs) -> Result<i32, Failure> {
    let props: Vec<&str> = match args.prop.as_str() {
        "all" => vec!["1", "2", "4", "5", "6"],
        p @ ("1" | "2" | "3" | "4" | "5" | "6") => vec![p],
        other => return Err(Failure::Usage(format!("unknown proposition '{other}'"))),
    };
    if args.nt < args.b {
        return Err(Failure::Usage(format!(
            "checks require Nt >= B (Nt = {}, B = {})",
            args.nt, args.b
        )));
    }
    if args.b < 2 || args.samples == 0 {
        return Err(Failure::Usage("need B >= 2 and at least one sample".into()));
    }
    let custom = args.rho_db.as_deref().map(parse_db_grid).transpose()?;

    let run = || -> Result<Vec<PropositionReport>, Error> {
        props
            .iter()
            .map(|&p| {
                let grid: Vec<f64> = custom
                    .clone()
                    .unwrap_or_else(|| default_grid_db(p))
                    .into_iter()
                    .map(db_to_linear)
                    .collect();
                let (nt, b, n, s) = (args.nt, args.b, args.samples, args.seed);
                match p {
                    "1" => check_prop1(nt, b, n, s),
                    "2" | "3" => check_prop2_prop3(nt, b, &grid, n, s),
                    "4" => check_prop4_leakage(nt, b, &grid, n, s),
                    "5" => check_alpha_heuristic(nt, b, &grid, n, s),
                    _ => check_prop6_nspa(nt, b, n, s),
                }
            })
            .collect()
    };
    let reports = match args.workers.filter(|&w| w > 0) {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Failure::Runtime(e.to_string()))?
            .install(run),
        None => run(),
    }
    .map_err(runtime)?;

    let mut buf = Vec::new();
    write_reports_csv(&mut buf, &reports).map_err(runtime)?;
    emit(&args.out, &buf)?;
    let mut all_passed = true;
    for r in &reports {
        eprintln!("{}: {}", r.proposition, if r.passed { "PASS" } else { "FAIL" });
        all_passed &= r.passed;
    }
    Ok(if all_passed { 0 } else { 1 })
}

fn cmd_dump(args: DumpArgs) -> Result<i32, Failure> {
    let cfg = load_config(&args.net, &[])?;
    let mut buf = Vec::new();
    let mut writer = ChannelDumpWriter::new(&mut buf).map_err(runtime)?;
    for t in 0..args.trials as u64 {
        let real = trial_realization(&cfg, cfg.users_per_bs, t).map_err(runtime)?;
        writer.write(t, &real).map_err(runtime)?;
    }
    writer.finish().map_err(runtime)?;
    emit(&args.net.out, &buf)?;
    Ok(0)
}
