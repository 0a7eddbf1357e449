use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use gmrs::bench::{emit_curves, run_monte_carlo, McConfig};
use gmrs::domain::TestFunction;
use gmrs::explore::ExploreVariant;
use gmrs::gmrs::{run_test_function, write_history_csv};
use gmrs::{GmrsConfig, Mode, SurrogateKind};
use gmrs_service::Store;

#[derive(Parser)]
#[command(name = "gmrs", version, about = "Surrogate-based global optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimizes a test function and writes the iteration history as CSV.
    Run(RunArgs),
    /// Runs a Monte Carlo study and writes median/min/max curves as CSV.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to the `output` field of the study.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serves interactive preference sessions over HTTP.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Sessions are kept in memory only when absent.
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
}

/// Flags given on the command line override the `--config` file.
#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, default_value = "adjiman")]
    function: String,
    #[arg(long, help = "blackbox or preference")]
    mode: Option<Mode>,
    #[arg(long, help = "rbf or gp")]
    surrogate: Option<SurrogateKind>,
    #[arg(long, help = "idw, msrs or gpstd")]
    explore: Option<ExploreVariant>,
    #[arg(long)]
    n_init: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated trade-off weights, e.g. 0.95,0.7,0.35,0
    #[arg(long, value_delimiter = ',')]
    delta_cycle: Option<Vec<f64>>,
    /// JSON configuration used as the starting point.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

type BoxResult<T> = Result<T, Box<dyn std::error::Error>>;

fn output(path: Option<&PathBuf>) -> BoxResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(args: RunArgs) -> BoxResult<()> {
    let mut cfg: GmrsConfig = match &args.config {
        Some(p) => serde_json::from_reader(File::open(p)?)?,
        None => GmrsConfig::default(),
    };
    if let Some(m) = args.mode {
        cfg.mode = m;
    }
    if let Some(s) = args.surrogate {
        cfg.surrogate = s;
    }
    if let Some(e) = args.explore {
        cfg.explore.variant = e;
    }
    if let Some(n) = args.n_init {
        cfg.n_init = n;
    }
    if let Some(n) = args.n_max {
        cfg.n_max = n;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(d) = args.delta_cycle {
        cfg.acq.delta_cycle = d;
    }
    let func = TestFunction::by_name(&args.function)?;
    let result = run_test_function(cfg, &func)?;
    write_history_csv(&result.history, func.dim, output(args.out.as_ref())?)?;
    log::info!("best x = {:?}, f = {}", result.best_x, result.best_f_true);
    Ok(())
}

fn bench(config: PathBuf, out: Option<PathBuf>) -> BoxResult<()> {
    let study: McConfig = serde_json::from_reader(File::open(&config)?)?;
    let summary = run_monte_carlo(&study)?;
    let out = out.or_else(|| study.output.clone());
    emit_curves(&summary, output(out.as_ref())?)?;
    for arm in &summary.arms {
        log::info!("{}: {} failed runs", arm.label, arm.failures);
    }
    Ok(())
}

fn serve(addr: SocketAddr, data_dir: Option<PathBuf>) -> BoxResult<()> {
    let store = match data_dir {
        Some(d) => Store::open(d)?,
        None => Store::in_memory(),
    };
    tokio::runtime::Runtime::new()?.block_on(gmrs_service::serve(addr, Arc::new(store)))?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Bench { config, out } => bench(config, out),
        Command::Serve { addr, data_dir } => serve(addr, data_dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
