//! Command-line surface of the RHA anti-jamming simulator.

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rha_sim::emit::{emit_results, rows_from_cells, render_csv, render_json, OutputFormat};
use rha_sim::experiment::{run_experiment, ErrorMode, Scheme, SweepAxis};
use rha_sim::{config, SimError};
use std::path::PathBuf;
use std::str::FromStr;

mod validate;

#[derive(Parser)]
#[command(
    name = "rha-sim",
    about = "Anti-jamming simulator for DMA-based reconfigurable heterogeneous arrays"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment sweep and write a metrics table.
    Simulate(SimulateArgs),
    /// Run the DoA/CSI estimator once and print the result as JSON.
    Estimate(EstimateArgs),
    /// Solve the robust beamformer for an estimation-result JSON document.
    Beamform(BeamformArgs),
    /// Run the quick invariant suite and print one line per check.
    Validate,
}

#[derive(Args)]
struct SimulateArgs {
    /// Flat key-value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    /// Base RNG seed (defaults to RHA_SIM_SEED or 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Sweep axis: jam_power_db, n, m, num_paths, rho_g, rho_theta,
    /// jam_power_with_estimation.
    #[arg(long)]
    sweep: Option<String>,
    /// Comma-separated sweep values.
    #[arg(long)]
    values: Option<String>,
    /// Comma-separated scheme names.
    #[arg(long)]
    schemes: Option<String>,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    /// Output format: csv or json.
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    threads: Option<usize>,
    /// Zero the wall-clock column for byte-reproducible outputs.
    #[arg(long)]
    deterministic_timing: bool,
    /// Also print the table to stdout.
    #[arg(long)]
    print: bool,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BeamformArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// EstimationResult JSON document.
    #[arg(long)]
    estimate: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Estimate(args) => estimate(args),
        Command::Beamform(args) => beamform(args),
        Command::Validate => validate::run(),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn load_map(path: &Option<PathBuf>) -> Result<std::collections::HashMap<String, String>, SimError> {
    match path {
        Some(p) => config::parse_file(p),
        None => Ok(Default::default()),
    }
}

fn simulate(args: SimulateArgs) -> Result<(), SimError> {
    let map = load_map(&args.config)?;
    let mut cfg = config::experiment_from_map(&map)?;
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(sweep) = &args.sweep {
        cfg.sweep = SweepAxis::from_str(sweep).map_err(SimError::Config)?;
        if cfg.sweep == SweepAxis::JamPowerWithEstimation {
            cfg.error_mode = ErrorMode::Estimated;
        }
    }
    if let Some(values) = &args.values {
        cfg.values = values
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| SimError::Config(format!("values: {e}")))?;
    }
    if let Some(schemes) = &args.schemes {
        cfg.schemes = schemes
            .split(',')
            .map(|x| Scheme::from_str(x.trim()))
            .collect::<Result<_, _>>()
            .map_err(SimError::Config)?;
    }
    if let Some(t) = args.threads {
        cfg.threads = t;
    }
    if args.deterministic_timing {
        cfg.deterministic_timing = true;
    }
    let format = OutputFormat::from_str(&args.format).map_err(SimError::Config)?;

    let cells = run_experiment(&cfg)?;
    let rows = rows_from_cells(&cfg, &cells);
    emit_results(&cfg, &rows, &args.out, format)?;
    if args.print {
        match format {
            OutputFormat::Csv => print!("{}", render_csv(&rows)),
            OutputFormat::Json => println!("{}", render_json(&cfg, &rows)?),
        }
    }
    eprintln!(
        "wrote {} rows ({} trials each) to {}",
        rows.len(),
        cfg.trials,
        args.out.display()
    );
    Ok(())
}

fn estimate(args: EstimateArgs) -> Result<(), SimError> {
    let map = load_map(&args.config)?;
    let sc = config::scenario_from_map(&map)?;
    let seed = args.seed.unwrap_or_else(env_seed);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let ch = rha_model::ChannelRealization::draw(&sc, &mut rng);
    let (est, diag) = rha_estimate::run_estimation(&sc, &ch, 0.1, &mut rng)?;
    let mut doc = est.to_json();
    doc["diagnostics"] = serde_json::json!({
        "detected_order": diag.detected_order,
        "truncated": diag.truncated,
        "ambiguous_paths": diag.ambiguous_paths,
        "csi_residual": diag.csi_residual,
        "true_doa_alice_deg": ch.doa_alice.iter().map(|t| t.to_degrees()).collect::<Vec<_>>(),
        "true_doa_jam_deg": ch.doa_jam.iter().map(|t| t.to_degrees()).collect::<Vec<_>>(),
    });
    write_json(&doc, &args.out)
}

fn beamform(args: BeamformArgs) -> Result<(), SimError> {
    let map = load_map(&args.config)?;
    let sc = config::scenario_from_map(&map)?;
    let text = std::fs::read_to_string(&args.estimate)
        .map_err(|e| SimError::Io(format!("{}: {e}", args.estimate.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| SimError::Io(e.to_string()))?;
    let est = rha_estimate::EstimationResult::from_json(&value).map_err(SimError::Config)?;
    let params = rha_robust::SolveParams {
        seed: args.seed.unwrap_or_else(env_seed),
        ..Default::default()
    };
    let sol = rha_robust::solve_robust(&sc, &est, &params)?;
    write_json(&sol.to_json(), &args.out)
}

fn env_seed() -> u64 {
    std::env::var("RHA_SIM_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0)
}

fn write_json(doc: &serde_json::Value, out: &Option<PathBuf>) -> Result<(), SimError> {
    let body = serde_json::to_string_pretty(doc).map_err(|e| SimError::Io(e.to_string()))?;
    match out {
        Some(p) => std::fs::write(p, body.as_bytes())
            .map_err(|e| SimError::Io(format!("{}: {e}", p.display()))),
        None => {
            println!("{body}");
            Ok(())
        }
    }
}
