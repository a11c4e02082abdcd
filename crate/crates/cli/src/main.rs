use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use mmcoexist_cli::{
    parse_config_text, run, run_with_threads, write_output, Experiment, RunConfig, THREADS_ENV,
};

/// Monte Carlo simulator for directional LBT/LBR spectrum sharing at mmWave.
#[derive(Debug, Parser)]
#[command(name = "mmcoexist", version)]
struct Args {
    /// fig4_sumrate_vs_k, fig5_meanrate_vs_k, fig6_sumrate_vs_txbw,
    /// fig7_sumrate_vs_rxbw, slots_overhead, callflow_demo or custom
    #[arg(long)]
    experiment: Option<String>,
    /// Flat key=value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    /// Comma-separated number of pairs
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    theta_tx_deg: Option<String>,
    #[arg(long)]
    theta_rx_deg: Option<String>,
    /// Repeatable; comma-separated lists are accepted too
    #[arg(long)]
    scheme: Vec<String>,
    #[arg(long, allow_hyphen_values = true)]
    threshold_omni_dbm: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    threshold_dir_dbm: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    mcot_ms: Option<String>,
    /// Any config key, e.g. `--set pathloss_exponent=2.5`
    #[arg(long = "set", value_name = "KEY=VALUE", allow_hyphen_values = true)]
    set: Vec<String>,
    /// Print the summary only
    #[arg(long, short)]
    quiet: bool,
}

impl Args {
    fn flag_entries(&self) -> Result<Vec<(String, String)>> {
        let mut out = Vec::new();
        let mut push = |key: &str, value: &Option<String>| {
            if let Some(v) = value {
                out.push((key.to_string(), v.clone()));
            }
        };
        push("experiment", &self.experiment);
        push("seed", &self.seed);
        push("trials", &self.trials);
        push("k", &self.k);
        push("theta_tx_deg", &self.theta_tx_deg);
        push("theta_rx_deg", &self.theta_rx_deg);
        push("threshold_omni_dbm", &self.threshold_omni_dbm);
        push("threshold_dir_dbm", &self.threshold_dir_dbm);
        push("mu", &self.mu);
        push("mcot_ms", &self.mcot_ms);
        if let Some(p) = &self.out {
            out.push(("out".into(), p.display().to_string()));
        }
        if !self.scheme.is_empty() {
            out.push(("scheme".into(), self.scheme.join(",")));
        }
        let set = parse_config_text(&self.set.join("\n")).context("in --set")?;
        out.extend(set);
        Ok(out)
    }
}

fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v.trim().parse().ok().filter(|&n| n > 0).with_context(|| {
                format!("{THREADS_ENV}: expected a positive integer, got `{v}`")
            })?;
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

fn main_inner() -> Result<()> {
    let args = Args::parse();
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            parse_config_text(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => Vec::new(),
    };
    let cfg = RunConfig::resolve(Experiment::Fig4SumRateVsK, &file, &args.flag_entries()?)?;
    let output = match threads_from_env()? {
        Some(n) => run_with_threads(&cfg, n)?,
        None => run(&cfg)?,
    };
    write_output(&cfg.output_path, &output)?;
    if !args.quiet {
        println!("{}: wrote {}", cfg.experiment, cfg.output_path.display());
    }
    println!("{}", output.summary);
    Ok(())
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
