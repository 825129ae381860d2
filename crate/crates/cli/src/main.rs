use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::error;

use volblend::arch_family::{simulate_regimes, ModelParams, ModelSpec};
use volblend::pipeline::{exit_code, run_pipeline_from, validate_config, PipelineConfig, RunStage};
use volblend::{Error, Result};

#[derive(Parser)]
#[command(name = "volblend", version, about = "Blended ARCH-family volatility forecasts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the forecasting pipeline described by a config file.
    Run {
        config: PathBuf,
        /// `blend` reuses the cached model fits of an earlier full run.
        #[arg(long, value_enum, default_value_t = StageArg::All)]
        stage: StageArg,
    },
    /// Check a config file and list every problem found.
    Validate { config: PathBuf },
    /// Simulate a price path from an ARCH-family model.
    ///
    /// PARAMS lists α₀, the α's, the β's, the γ's and the innovation shape
    /// parameters, comma separated. Several regimes may be given separated by
    /// `;`; the process then cycles through them every --block-len steps.
    Simulate {
        /// Model label such as `GARCH-N(1,1)` or `GJR-t(1,1)`.
        model: String,
        params: String,
        #[arg(long)]
        out: PathBuf,
        /// Number of returns (the file holds one more price).
        #[arg(long, default_value_t = 600)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Steps per regime; defaults to the whole series.
        #[arg(long)]
        block_len: Option<usize>,
        #[arg(long, default_value_t = 100.0)]
        initial_price: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StageArg {
    All,
    Blend,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, stage } => run(config, stage),
        Command::Validate { config } => validate(config),
        Command::Simulate {
            model,
            params,
            out,
            n,
            seed,
            block_len,
            initial_price,
        } => report(simulate(&model, &params, out, n, seed, block_len, initial_price)),
    };
    ExitCode::from(code)
}

fn report(r: Result<()>) -> u8 {
    match r {
        Ok(()) => 0,
        Err(e) => {
            error!("{e}");
            exit_code(&e) as u8
        }
    }
}

fn run(config: PathBuf, stage: StageArg) -> u8 {
    let cfg = match PipelineConfig::load(&config) {
        Ok(c) => c,
        Err(e) => {
            error!("config stage failed: {e}");
            return exit_code(&e) as u8;
        }
    };
    let start = match stage {
        StageArg::All => RunStage::All,
        StageArg::Blend => RunStage::Blend,
    };
    match run_pipeline_from(&cfg, start) {
        Ok(out) => {
            print!("{}", out.report.scores_csv());
            0
        }
        Err(e) => {
            error!("{e}");
            e.exit_code() as u8
        }
    }
}

fn validate(config: PathBuf) -> u8 {
    let cfg = match PipelineConfig::load(&config) {
        Ok(c) => c,
        Err(e) => {
            error!("{e}");
            return exit_code(&e) as u8;
        }
    };
    let problems = validate_config(&cfg);
    for p in &problems {
        println!("{p}");
    }
    if problems.is_empty() {
        println!("{}: ok", config.display());
        0
    } else {
        2
    }
}

fn simulate(
    model: &str,
    params: &str,
    out: PathBuf,
    n: usize,
    seed: u64,
    block_len: Option<usize>,
    initial_price: f64,
) -> Result<()> {
    let spec: ModelSpec = model.parse()?;
    let regimes = params
        .split(';')
        .map(|group| {
            let values = group
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("parameter {v:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            ModelParams::from_values(&spec, &values)
        })
        .collect::<Result<Vec<_>>>()?;
    let returns = simulate_regimes(&spec, &regimes, block_len.unwrap_or(n.max(1)), n, seed)?;
    let prices = returns.to_prices(initial_price)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = std::fs::File::create(&out).map_err(|e| Error::io(&out, e))?;
    prices.write_csv(std::io::BufWriter::new(file))?;
    println!("wrote {} prices to {}", prices.len(), out.display());
    Ok(())
}
