//! Experiment driver behind the `mmcoexist` binary.

pub mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use mmcoexist::montecarlo::{run_sweep, to_csv, MetricsRecord};
use mmcoexist::slots::{demo_call_flow, numerology, unoccupied_fraction};

pub use config::{parse_config_text, ConfigError, Experiment, RunConfig};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "MMCOEXIST_THREADS";

pub const SLOTS_CSV_HEADER: &str = "mu,scs_khz,slot_length_us,mcot_ms,unoccupied_percent";

/// Rendered experiment output plus a short human-readable summary.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub contents: String,
    pub summary: String,
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    match cfg.experiment {
        Experiment::SlotsOverhead => slots_overhead(cfg),
        Experiment::CallFlowDemo => {
            let trace = demo_call_flow().to_string();
            let summary = format!("call flow: {} events", trace.lines().count());
            Ok(RunOutput {
                contents: trace,
                summary,
            })
        }
        _ => {
            let records = run_sweep(&cfg.sweep_config())?;
            Ok(RunOutput {
                contents: to_csv(&records),
                summary: sweep_summary(cfg.experiment, &records),
            })
        }
    }
}

/// Runs on a dedicated pool of `threads` workers.
pub fn run_with_threads(cfg: &RunConfig, threads: usize) -> Result<RunOutput> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building thread pool")?;
    pool.install(|| run(cfg))
}

pub fn write_output(path: &Path, out: &RunOutput) -> Result<()> {
    fs::write(path, &out.contents).with_context(|| format!("writing {}", path.display()))
}

fn slots_overhead(cfg: &RunConfig) -> Result<RunOutput> {
    let mut csv = String::from(SLOTS_CSV_HEADER);
    csv.push('\n');
    let mut summary = String::new();
    for &mu in &cfg.mu_values {
        let n = numerology(mu)?;
        let pct = unoccupied_fraction(mu, cfg.mcot_ms)?;
        writeln!(
            csv,
            "{mu},{},{},{},{pct:.3}",
            n.scs_khz, n.slot_length_us, cfg.mcot_ms
        )?;
        writeln!(
            summary,
            "mu={mu} ({} kHz): {pct:.3}% of a {} ms MCOT unoccupied",
            n.scs_khz, cfg.mcot_ms
        )?;
    }
    Ok(RunOutput {
        contents: csv,
        summary: summary.trim_end().to_string(),
    })
}

fn sweep_summary(experiment: Experiment, records: &[MetricsRecord]) -> String {
    let (label, metric): (&str, fn(&MetricsRecord) -> f64) = match experiment {
        Experiment::Fig5MeanRateVsK => ("mean rate of active pairs", |r| r.mean_rate_active_bps),
        _ => ("sum rate", |r| r.mean_sum_rate_bps),
    };
    let mut out = String::new();
    let mut schemes = Vec::new();
    for r in records {
        if !schemes.contains(&r.scheme) {
            schemes.push(r.scheme);
        }
    }
    for scheme in schemes {
        let rows: Vec<&MetricsRecord> = records.iter().filter(|r| r.scheme == scheme).collect();
        let best = rows.iter().max_by(|a, b| metric(a).total_cmp(&metric(b)));
        let worst = rows.iter().min_by(|a, b| metric(a).total_cmp(&metric(b)));
        if let (Some(best), Some(worst)) = (best, worst) {
            let _ = writeln!(
                out,
                "{:<18} {label}: best {:.2} Gbit/s at {}={}, worst {:.2} Gbit/s at {}={}",
                scheme.name(),
                metric(best) / 1e9,
                best.sweep_variable,
                best.sweep_value,
                metric(worst) / 1e9,
                worst.sweep_variable,
                worst.sweep_value,
            );
        }
    }
    out.trim_end().to_string()
}
