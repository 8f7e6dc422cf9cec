use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use renyi_dpi_cli::config::{parse_config_file, parse_grid, PartialSweepConfig};
use renyi_dpi_cli::{audit, default_seed, falsify, propsuite, single, sweep, CliError, CliResult};

/// Alpha-z Renyi relative entropy toolkit: divergence evaluation, DPI gap
/// sweeps, saturation audits, property campaigns, and falsification search.
///
/// Exit codes: 0 success, 1 property failure, 2 I/O or parse error,
/// 3 invalid parameters. The RENYI_DPI_SEED environment variable supplies
/// the default seed.
#[derive(Parser)]
#[command(name = "renyi-dpi", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the alpha-z divergence of two matrix JSON files.
    Divergence(DivergenceArgs),
    /// Sweep DPI gaps over an (alpha, z) grid; writes CSV and summary JSON.
    GapSweep(GapSweepArgs),
    /// Audit saturation: gaps against condition residuals, as JSON.
    SaturationAudit(AuditArgs),
    /// Randomly search a non-monotone point for a DPI violation.
    Falsify(FalsifyArgs),
    /// Run every documented invariant as a seeded campaign.
    PropertySuite(PropertySuiteArgs),
}

#[derive(Args)]
struct DivergenceArgs {
    /// Density operator file ({"dim", "re", "im"} JSON schema).
    #[arg(long)]
    rho: PathBuf,
    /// Positive operator file (singular input opts into permissive mode).
    #[arg(long)]
    sigma: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    z: f64,
}

#[derive(Args)]
struct GapSweepArgs {
    /// Flat key-value config file; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated alpha grid.
    #[arg(long)]
    alpha_grid: Option<String>,
    /// Comma-separated z grid.
    #[arg(long)]
    z_grid: Option<String>,
    #[arg(long)]
    dim_a: Option<usize>,
    #[arg(long)]
    dim_b: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    /// partial_trace | random_cptp | unitary
    #[arg(long)]
    channel: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Full-rank regularization strength in [0, 1).
    #[arg(long)]
    eps: Option<f64>,
    /// CSV output path (summary JSON lands next to it).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    summary_out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct AuditArgs {
    /// tensor | random | product-sufficient
    #[arg(long)]
    mode: String,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    z: f64,
    /// Bipartite dimensions as AxB, e.g. 2x3.
    #[arg(long, default_value = "2x2")]
    dims: String,
    #[arg(long, default_value_t = 20)]
    trials: u64,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FalsifyArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    z: f64,
    /// Instance evaluations allowed.
    #[arg(long, default_value_t = 1000)]
    budget: u64,
    #[arg(long, default_value = "2x2")]
    dims: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PropertySuiteArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 24)]
    trials: u64,
    #[arg(long, default_value_t = 3)]
    dims_max: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_dims(s: &str) -> CliResult<(usize, usize)> {
    let parts: Vec<&str> = s.split(['x', 'X', ',']).map(str::trim).collect();
    if parts.len() != 2 {
        return Err(CliError::Parse(format!("dims must look like 2x3, got {s:?}")));
    }
    let a = parts[0]
        .parse()
        .map_err(|e| CliError::Parse(format!("bad dims {s:?}: {e}")))?;
    let b = parts[1]
        .parse()
        .map_err(|e| CliError::Parse(format!("bad dims {s:?}: {e}")))?;
    Ok((a, b))
}

fn emit(out: Option<&PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(CliError::from),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Divergence(args) => {
            let line = single::divergence_from_files(&args.rho, &args.sigma, args.alpha, args.z)?;
            println!("{line}");
            Ok(())
        }
        Command::GapSweep(args) => {
            let from_flags = PartialSweepConfig {
                alpha_grid: args.alpha_grid.as_deref().map(parse_grid).transpose()?,
                z_grid: args.z_grid.as_deref().map(parse_grid).transpose()?,
                dim_a: args.dim_a,
                dim_b: args.dim_b,
                trials_per_cell: args.trials,
                channel_kind: args.channel.as_deref().map(str::parse).transpose()?,
                seed: args.seed,
                regularization_eps: args.eps,
                output_path: args.out,
                summary_path: args.summary_out,
                workers: args.workers,
            };
            let from_file = match &args.config {
                Some(path) => parse_config_file(&std::fs::read_to_string(path)?)?,
                None => PartialSweepConfig::default(),
            };
            let config = from_flags.or(from_file).resolve(default_seed())?;
            let summary = sweep::run_and_write(&config)?;
            eprintln!(
                "wrote {} rows to {} ({} violations); summary at {}",
                summary.total_rows,
                config.output_path.display(),
                summary.total_violations,
                config.summary_path.display()
            );
            Ok(())
        }
        Command::SaturationAudit(args) => {
            let mode: audit::AuditMode = args.mode.parse()?;
            let dims = parse_dims(&args.dims)?;
            if matches!(mode, audit::AuditMode::Tensor | audit::AuditMode::Random)
                && !sweep::in_necessary_region(args.alpha, args.z)
            {
                return Err(CliError::InvalidParams(format!(
                    "necessary-condition audits need 1 < alpha <= 2 and alpha/2 <= z <= alpha; got ({}, {})",
                    args.alpha, args.z
                )));
            }
            let seed = args.seed.unwrap_or_else(default_seed);
            let output = audit::run_audit(mode, args.alpha, args.z, dims, args.trials, seed)?;
            emit(args.out.as_ref(), &serde_json::to_string_pretty(&output)?)
        }
        Command::Falsify(args) => {
            let dims = parse_dims(&args.dims)?;
            let seed = args.seed.unwrap_or_else(default_seed);
            let output = falsify::run_falsify(args.alpha, args.z, dims, args.budget, seed)?;
            emit(args.out.as_ref(), &serde_json::to_string_pretty(&output)?)
        }
        Command::PropertySuite(args) => {
            let seed = args.seed.unwrap_or_else(default_seed);
            let fault = propsuite::fault_from_env()?;
            let output = propsuite::run_suite(seed, args.trials, args.dims_max, fault)?;
            if let Some(warning) = &output.warning {
                eprintln!("warning: {warning}");
            }
            emit(args.out.as_ref(), &serde_json::to_string_pretty(&output)?)?;
            if !output.all_pass {
                return Err(CliError::PropertyFailure(
                    output.failing_names().join(", "),
                ));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
