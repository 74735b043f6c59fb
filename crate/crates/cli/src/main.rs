use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use fdsic::cancellation::Variant;
use fdsic::harness::{run_experiment, run_validation, write_validation_csv, Experiment, ExperimentReport, ScenarioConfig};

#[derive(Parser)]
#[command(name = "fdsic", version, about = "Full-duplex MIMO self-interference cancellation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic power budget versus transmit power for both structures.
    Budget(Common),
    /// Monte-Carlo SINR versus transmit power.
    SinrPtx(Common),
    /// Monte-Carlo SINR versus estimation sample size, with and without calibration.
    SinrN(Common),
    /// Impairment calibration suite.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// TOML scenario file; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte-Carlo trials per grid point.
    #[arg(long)]
    trials: Option<usize>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated canceller variants (ref-rx, linear, widely-linear, nonlinear).
    #[arg(long, value_delimiter = ',')]
    variants: Option<Vec<Variant>>,
}

impl Common {
    fn scenario(&self, experiment: Option<Experiment>) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(p) => ScenarioConfig::from_file(p).with_context(|| format!("loading {}", p.display()))?,
            None => ScenarioConfig::default(),
        };
        if let Some(e) = experiment {
            cfg.experiment = e;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.trials {
            cfg.n_trials = t;
        }
        if let Some(o) = &self.out {
            cfg.output = o.clone();
        }
        if let Some(v) = &self.variants {
            cfg.variants = v.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn experiment(common: &Common, kind: Experiment) -> Result<()> {
    let cfg = common.scenario(Some(kind))?;
    match run_experiment(&cfg)? {
        ExperimentReport::Budget { rows, path } => {
            println!("{:<12} {:>8} {:>9} {:>9} {:>9}", "structure", "p_tx", "p_n", "p_nl_rx", "sinr_db");
            for r in &rows {
                let b = &r.budget;
                println!(
                    "{:<12} {:>8.1} {:>9.2} {:>9.2} {:>9.2}",
                    r.structure.name(),
                    r.p_tx_dbm,
                    b.p_n_dbm,
                    b.p_nl_rx_dbm,
                    b.sinr_db
                );
            }
            println!("wrote {}", path.display());
        }
        ExperimentReport::Sinr { summary, path, summary_path, .. } => {
            println!("{:<14} {:>6} {:>7} {:>6} {:>9} {:>7}", "variant", "p_tx", "n_est", "calib", "mean_db", "std_db");
            for s in &summary {
                println!(
                    "{:<14} {:>6.1} {:>7} {:>6} {:>9.2} {:>7.2}",
                    s.variant.name(),
                    s.p_tx_dbm,
                    s.n_est,
                    s.calibrated,
                    s.mean_sinr_db,
                    s.std_sinr_db
                );
            }
            if let Some(s) = summary.first() {
                println!("ideal SINR {:.2} dB", s.ideal_sinr_db);
            }
            println!("wrote {} and {}", path.display(), summary_path.display());
        }
    }
    Ok(())
}

fn validate(common: &Common) -> Result<bool> {
    let cfg = common.scenario(None)?;
    let checks = run_validation(&cfg.transceiver, cfg.seed);
    for c in &checks {
        println!(
            "{} {:<20} measured {:>10.4} expected {:>10.4} (±{})",
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.expected,
            c.tolerance
        );
    }
    if let Some(p) = &common.out {
        let f = std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
        write_validation_csv(f, &checks)?;
    }
    Ok(checks.iter().all(|c| c.passed()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Budget(c) => experiment(c, Experiment::BudgetSweep).map(|_| true),
        Command::SinrPtx(c) => experiment(c, Experiment::SinrVsPtx).map(|_| true),
        Command::SinrN(c) => experiment(c, Experiment::SinrVsN).map(|_| true),
        Command::Validate(c) => validate(c),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
