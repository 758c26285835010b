//! Command-line front end: `stats`, `backtest`, `tailindex` and `simulate`.
//!
//! Exit codes: 0 on success, 1 on invalid input or arguments, 2 when a
//! computation fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tailrisk::engine::{
    descriptive_table, load_inputs, parse_config, parse_model_list, prices_from_returns, render_report, run_backtest,
    simulate_fuels, tail_index_table, write_dated_columns, write_prices, ReportBundle, RunConfig,
};
use tailrisk::garch::{simulate, simulation_start, GarchParams, GarchVariant};
use tailrisk::ingest::business_days;
use tailrisk::numerics::seed::derive_seed;
use tailrisk::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "tailrisk",
    version,
    about = "VaR/ES forecasting, backtesting and tail-index analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Run configuration (flat TOML key = value file).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Root seed; overrides the config.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Comma-separated models (HS, GARCH, EGARCH, GJR, EWQR, QR-COM); overrides the config.
    #[arg(long, global = true, value_name = "LIST")]
    models: Option<String>,
    /// Report format, csv or table; overrides the config.
    #[arg(long, global = true, value_name = "FORMAT")]
    format: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Descriptive statistics of every series (full, in-sample, out-of-sample).
    Stats,
    /// Rolling forecasts, the backtest battery and all report tables.
    Backtest,
    /// GARCH-implied versus empirical tail indices.
    Tailindex,
    /// Writes synthetic AR(1)-GARCH(1,1)-t price files and a matching config.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Returns per series.
    #[arg(long, default_value_t = 2500)]
    n: usize,
    /// Number of series.
    #[arg(long, default_value_t = 1)]
    series: usize,
    /// Fraction of each series used in-sample.
    #[arg(long, default_value_t = 0.7)]
    in_sample: f64,
    /// Also write coal, gas and CO2 price series for QR-COM.
    #[arg(long)]
    fuels: bool,
    #[arg(long, default_value_t = 0.0)]
    phi0: f64,
    #[arg(long, default_value_t = 0.1)]
    phi1: f64,
    #[arg(long, default_value_t = 4e-6)]
    omega0: f64,
    /// Variance persistence.
    #[arg(long, default_value_t = 0.90)]
    omega1: f64,
    /// Squared-residual coefficient.
    #[arg(long, default_value_t = 0.08)]
    omega2: f64,
    #[arg(long, default_value_t = 6.0)]
    nu: f64,
}

fn usage(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| usage("--config", "this command needs --config PATH"))?;
    let mut cfg = parse_config(path)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    if let Some(models) = &common.models {
        cfg.models = parse_model_list(models)?;
    }
    if let Some(f) = &common.format {
        cfg.formats = vec![f.parse()?];
    }
    Ok(cfg)
}

fn emit(bundle: &ReportBundle, cfg: &RunConfig) -> Result<()> {
    for &format in &cfg.formats {
        for path in render_report(bundle, format, &cfg.output_dir)? {
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn simulate_files(args: &SimulateArgs, seed: u64, dir: &Path) -> Result<()> {
    if args.series == 0 || args.n < 2 {
        return Err(usage("--n", "need at least one series of two or more returns"));
    }
    if !(args.in_sample > 0.0 && args.in_sample < 1.0) {
        return Err(usage("--in-sample", format!("{} is outside (0, 1)", args.in_sample)));
    }
    let params = GarchParams::garch(args.phi0, args.phi1, args.omega0, args.omega1, args.omega2, args.nu);
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    let mut inputs = Vec::new();
    for i in 0..args.series {
        let r = simulate(
            &params,
            GarchVariant::Garch,
            args.n,
            derive_seed(seed, "simulate", &[i as u64]),
        )?;
        let prices = prices_from_returns(r.values(), simulation_start(), 50.0)?;
        let name = format!("sim{}_m1.csv", i + 1);
        let path = dir.join(&name);
        write_prices(&prices, &path)?;
        println!("{}", path.display());
        inputs.push(format!("\"{name}\""));
    }
    let dates = business_days(simulation_start(), args.n + 1);
    let split = dates[((args.n as f64 * args.in_sample) as usize).clamp(1, args.n - 1)];
    let mut config = format!(
        "input = [{}]\nsplit_date = \"{split}\"\nseed = {seed}\n",
        inputs.join(", ")
    );
    if args.fuels {
        let fuels = simulate_fuels(
            &dates,
            &["coal", "gas", "co2"],
            derive_seed(seed, "simulate-fuels", &[]),
        );
        let path = dir.join("fuels.csv");
        write_dated_columns(&fuels, &path)?;
        println!("{}", path.display());
        config.push_str("fuel = \"fuels.csv\"\n");
    } else {
        config.push_str("models = [\"HS\", \"GARCH\", \"EGARCH\", \"GJR\", \"EWQR\"]\n");
    }
    let path = dir.join("run.toml");
    std::fs::write(&path, config).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    println!("{}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Stats => {
            let cfg = load_config(&cli.common)?;
            let (series, _) = load_inputs(&cfg)?;
            emit(
                &ReportBundle {
                    descriptive: descriptive_table(&series),
                    ..ReportBundle::default()
                },
                &cfg,
            )
        }
        Command::Backtest => {
            let cfg = load_config(&cli.common)?;
            let bundle = run_backtest(&cfg)?;
            for note in &bundle.notes {
                eprintln!("note: {note}");
            }
            emit(&bundle, &cfg)
        }
        Command::Tailindex => {
            let cfg = load_config(&cli.common)?;
            let (series, _) = load_inputs(&cfg)?;
            emit(
                &ReportBundle {
                    tail_index: tail_index_table(&series, &[]),
                    ..ReportBundle::default()
                },
                &cfg,
            )
        }
        Command::Simulate(args) => {
            let dir = cli.common.out.clone().unwrap_or_else(|| PathBuf::from("."));
            simulate_files(args, cli.common.seed.unwrap_or(tailrisk::engine::DEFAULT_SEED), &dir)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
