use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use pinching_core::{capacity_bound, single_antenna_closed_form, Scenario, SearchConfig};
use pinching_sim::config::ExperimentConfig;
use pinching_sim::output::{significant, write_all};
use pinching_sim::sweep::run_sweep;
use pinching_sim::users::generate_users;

#[derive(Parser)]
#[command(name = "pinching-sim", version, about = "Sum-rate sweeps for pinching-antenna uplink access")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo sweep and write results and summary CSVs.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Capacity bound of one random scenario.
    Bound {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        trial: usize,
        /// Optional config supplying the remaining parameters.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Parse and check a config, then print it with defaults filled in.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Per-key overrides of the config file; flag names match the keys.
#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    dx: Option<String>,
    #[arg(long)]
    dy: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long = "carrier_frequency", alias = "carrier-frequency")]
    carrier_frequency: Option<String>,
    #[arg(long = "n_eff", alias = "n-eff")]
    n_eff: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long = "noise_power_dbm", alias = "noise-power-dbm")]
    noise_power_dbm: Option<String>,
    #[arg(long = "power_budget_dbm", alias = "power-budget-dbm")]
    power_budget_dbm: Option<String>,
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long = "m_list", alias = "m-list")]
    m_list: Option<String>,
    #[arg(long = "n_list", alias = "n-list")]
    n_list: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    schemes: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long = "summary_out", alias = "summary-out")]
    summary_out: Option<String>,
    #[arg(long = "schedule_out", alias = "schedule-out")]
    schedule_out: Option<String>,
    #[arg(long)]
    timing: Option<String>,
}

impl Overrides {
    fn apply(&self, config: &mut ExperimentConfig) -> Result<()> {
        let pairs = [
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("k", &self.k),
            ("dx", &self.dx),
            ("dy", &self.dy),
            ("d", &self.d),
            ("carrier_frequency", &self.carrier_frequency),
            ("n_eff", &self.n_eff),
            ("delta", &self.delta),
            ("noise_power_dbm", &self.noise_power_dbm),
            ("power_budget_dbm", &self.power_budget_dbm),
            ("sweep", &self.sweep),
            ("m_list", &self.m_list),
            ("n_list", &self.n_list),
            ("n", &self.n),
            ("m", &self.m),
            ("schemes", &self.schemes),
            ("out", &self.out),
            ("summary_out", &self.summary_out),
            ("schedule_out", &self.schedule_out),
            ("timing", &self.timing),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                config.set(key, v).map_err(|e| anyhow::anyhow!("--{key}: {e}"))?;
            }
        }
        Ok(())
    }
}

fn simulate(config_path: &PathBuf, overrides: &Overrides) -> Result<()> {
    let mut config = ExperimentConfig::from_path(config_path)?;
    overrides.apply(&mut config)?;
    config.validate()?;
    let output = run_sweep(&config)?;
    let summary = write_all(&config, &output)?;
    for row in &summary {
        println!(
            "N={} M={} {:<6} mean {} bps/Hz (std {}, {} trials)",
            row.antennas,
            row.patterns,
            row.scheme,
            significant(row.mean),
            significant(row.std),
            row.trials
        );
    }
    eprintln!(
        "wrote {} rows to {} and summary to {}",
        output.rows.len(),
        config.out.display(),
        config.summary_path().display()
    );
    Ok(())
}

fn bound(k: usize, n: usize, seed: u64, trial: usize, config_path: Option<&PathBuf>) -> Result<()> {
    let mut config = match config_path {
        Some(p) => ExperimentConfig::from_path(p)?,
        None => ExperimentConfig::default(),
    };
    config.users = k;
    config.seed = seed;
    config.antennas = n;
    config.n_list = vec![n];
    config.validate()?;
    let users = generate_users(&config, trial);
    let scenario = Scenario::new(&config.scenario_params(n), users)?;
    let cfg = SearchConfig::for_scenario(&scenario);
    let solution = capacity_bound(&scenario, &cfg).context("computing the capacity bound")?;
    println!("bound_bps_hz = {}", significant(solution.bound()));
    if n == 1 {
        println!("closed_form_bps_hz = {}", significant(single_antenna_closed_form(&scenario)?));
    }
    println!("user,x_m,y_m,gain,slot_duration,slot_power_w");
    for (u, (p, slot)) in scenario
        .users()
        .iter()
        .zip(&solution.report.schedule.slots)
        .enumerate()
    {
        println!(
            "{u},{},{},{:e},{},{}",
            p.x, p.y, solution.gains[u], slot.duration, slot.powers[u]
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, overrides } => simulate(&config, &overrides),
        Command::Bound {
            k,
            n,
            seed,
            trial,
            config,
        } => bound(k, n, seed, trial, config.as_ref()),
        Command::ValidateConfig { config } => {
            let parsed = ExperimentConfig::from_path(&config)?;
            parsed.validate()?;
            print!("{}", parsed.describe());
            eprintln!("{}: ok", config.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
