//! Command-line front end: theory-only, simulation-only or paired sweeps,
//! plus presets reproducing the reference experiment settings.

use clap::{Args, Parser, Subcommand};
use corrlasso::config::{LambdaSpec, ProblemConfig, RunMode, Spacing};
use corrlasso::harness::run_sweep;
use corrlasso::report::{emit_csv, render_csv};

#[derive(Parser)]
#[command(
    name = "corrlasso",
    version,
    about = "LASSO asymptotics under correlated Gaussian designs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Saddle-point solve and metric predictions only.
    Theory(RunArgs),
    /// Monte Carlo simulation only.
    Simulate(RunArgs),
    /// Theory and simulation side by side (the default workflow).
    Compare(RunArgs),
    /// Preset configs for the reference experiments (1: MSE, 2: on-support,
    /// 3: off-support, 4: EER, 5: cosine similarity).
    Figure {
        /// Which preset, 1 through 5.
        number: u8,
        /// Trials per grid point (default 500).
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<String>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file; inline flags are rejected when this is given.
    #[arg(long)]
    config: Option<String>,

    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Exponential correlation parameter; omit for an identity model.
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long)]
    snr_db: Option<f64>,
    /// Single lambda value.
    #[arg(long)]
    lambda: Option<f64>,
    /// Lambda grid as start,stop,count.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    lambda_grid: Option<Vec<f64>>,
    /// Use log spacing for the lambda grid.
    #[arg(long)]
    log_spacing: bool,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    output: Option<String>,
}

impl RunArgs {
    fn into_config(self, mode: RunMode) -> Result<ProblemConfig, String> {
        let mut config = if let Some(path) = &self.config {
            if self.n.is_some() || self.delta.is_some() || self.kappa.is_some() {
                return Err("give either --config or inline flags, not both".into());
            }
            ProblemConfig::from_path(path).map_err(|e| e.to_string())?
        } else {
            let lambda = match (self.lambda, &self.lambda_grid) {
                (Some(v), None) => LambdaSpec::Single(v),
                (None, Some(g)) => LambdaSpec::Grid {
                    start: g[0],
                    stop: g[1],
                    count: g[2] as usize,
                    spacing: if self.log_spacing {
                        Spacing::Log
                    } else {
                        Spacing::Linear
                    },
                },
                _ => return Err("give exactly one of --lambda or --lambda-grid".into()),
            };
            ProblemConfig {
                n: self.n.ok_or("--n is required")?,
                delta: self.delta.ok_or("--delta is required")?,
                kappa: self.kappa.ok_or("--kappa is required")?,
                rho: self.rho,
                correlation: None,
                sigma2: self.sigma2,
                snr_db: self.snr_db,
                prior: None,
                lambda,
                xi: self.xi.unwrap_or(0.001),
                trials: self.trials.unwrap_or(500),
                base_seed: self.seed,
                mode,
                output_path: self.output.clone(),
            }
        };
        config.mode = mode;
        if let Some(xi) = self.xi {
            config.xi = xi;
        }
        if let Some(trials) = self.trials {
            config.trials = trials;
        }
        if let Some(output) = self.output {
            config.output_path = Some(output);
        }
        config.validate().map_err(|e| e.to_string())?;
        Ok(config)
    }
}

/// Shared settings behind all five reference experiments: delta = 0.7,
/// n = 400, rho = 0.7, kappa = 0.1, sigma2 = 0.01 (SNR = 10 dB), xi = 0.001.
fn figure_config(
    number: u8,
    trials: usize,
    seed: u64,
    output: Option<String>,
) -> Result<ProblemConfig, String> {
    if !(1..=5).contains(&number) {
        return Err(format!("figure number must be 1..=5, got {number}"));
    }
    Ok(ProblemConfig {
        n: 400,
        delta: 0.7,
        kappa: 0.1,
        rho: Some(0.7),
        correlation: None,
        sigma2: Some(0.01),
        snr_db: None,
        prior: None,
        lambda: LambdaSpec::Grid {
            start: 0.01,
            stop: 0.5,
            count: 15,
            spacing: Spacing::Linear,
        },
        xi: 0.001,
        trials,
        base_seed: seed,
        mode: RunMode::Both,
        output_path: output,
    })
}

fn run(config: &ProblemConfig) -> Result<(), String> {
    let points = run_sweep(config).map_err(|e| e.to_string())?;
    match &config.output_path {
        Some(path) => {
            emit_csv(config, &points, path).map_err(|e| e.to_string())?;
            eprintln!("wrote {} grid points to {path}", points.len());
        }
        None => {
            let text = render_csv(config, &points).map_err(|e| e.to_string())?;
            print!("{text}");
        }
    }
    let failures = points.iter().filter(|p| p.error.is_some()).count();
    if failures > 0 {
        return Err(format!("{failures} grid point(s) failed; see CSV comments"));
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Theory(args) => args.into_config(RunMode::Theory).and_then(|c| run(&c)),
        Command::Simulate(args) => args.into_config(RunMode::Empirical).and_then(|c| run(&c)),
        Command::Compare(args) => args.into_config(RunMode::Both).and_then(|c| run(&c)),
        Command::Figure {
            number,
            trials,
            seed,
            output,
        } => figure_config(number, trials.unwrap_or(500), seed, output).and_then(|c| run(&c)),
    };
    if let Err(msg) = result {
        eprintln!("error: {msg}");
        std::process::exit(1);
    }
}
