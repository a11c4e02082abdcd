//! Monte Carlo driver: repeated snapshots over random deployments, metric
//! aggregation and parameter sweeps.
//!
//! Trial `t` of every sweep point uses the deployment seed
//! `master_seed ^ t`, and every scheme is evaluated on the same deployment
//! and access order. Trials may run on any number of threads; per-trial
//! results are collected by index and reduced sequentially, so aggregates do
//! not depend on the thread count.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;

use crate::access::{
    access_order, run_snapshot_with_order, AccessScheme, SchemeKind, SnapshotResult, Thresholds,
};
use crate::deployment::{generate_deployment, trial_seed, ScenarioParams};
use crate::error::{Error, Result};
use crate::linkbudget::RateResult;

pub const CSV_HEADER: &str =
    "scheme,sweep_var,sweep_value,trials,mean_sum_rate_gbps,mean_rate_active_gbps,mean_active_count,stderr_sum_rate_gbps";

pub fn sum_rate(rates: &[RateResult]) -> f64 {
    rates.iter().map(|r| r.bits_per_second).sum()
}

/// Mean over the strictly positive rates; 0 when no pair transmits.
pub fn mean_rate_active(rates: &[RateResult]) -> f64 {
    let (sum, n) = rates
        .iter()
        .filter(|r| r.bits_per_second > 0.0)
        .fold((0.0, 0usize), |(s, n), r| (s + r.bits_per_second, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVariable {
    NumPairs,
    ThetaTxDeg,
    ThetaRxDeg,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::NumPairs => "k",
            SweepVariable::ThetaTxDeg => "theta_tx_deg",
            SweepVariable::ThetaRxDeg => "theta_rx_deg",
        }
    }

    /// Copy of `base` with this variable set to `value`.
    pub fn apply(self, base: &ScenarioParams, value: f64) -> Result<ScenarioParams> {
        let mut p = base.clone();
        match self {
            SweepVariable::NumPairs => {
                if !(value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64) {
                    return Err(Error::param(
                        "sweep_values",
                        format!("K must be a positive integer, got {value}"),
                    ));
                }
                p.num_pairs = value as usize;
            }
            SweepVariable::ThetaTxDeg => p.beams.tx_beamwidth_rad = degrees_to_beamwidth(value)?,
            SweepVariable::ThetaRxDeg => p.beams.rx_beamwidth_rad = degrees_to_beamwidth(value)?,
        }
        Ok(p)
    }
}

/// 360° maps to exactly 2π so that it selects the omnidirectional pattern.
pub fn degrees_to_beamwidth(deg: f64) -> Result<f64> {
    if !(deg > 0.0 && deg <= 360.0) {
        return Err(Error::param(
            "beamwidth",
            format!("must lie in (0, 360] degrees, got {deg}"),
        ));
    }
    Ok(if deg == 360.0 {
        std::f64::consts::TAU
    } else {
        deg.to_radians()
    })
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVariable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "k" | "K" => Ok(SweepVariable::NumPairs),
            "theta_tx_deg" => Ok(SweepVariable::ThetaTxDeg),
            "theta_rx_deg" => Ok(SweepVariable::ThetaRxDeg),
            _ => Err(Error::param(
                "sweep_var",
                format!("unknown sweep variable `{s}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub base: ScenarioParams,
    pub schemes: Vec<SchemeKind>,
    pub thresholds: Thresholds,
    pub trials: usize,
    pub sweep_variable: SweepVariable,
    pub sweep_values: Vec<f64>,
    pub master_seed: u64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::param("trials", "must be >= 1"));
        }
        if self.sweep_values.is_empty() {
            return Err(Error::param("sweep_values", "must not be empty"));
        }
        if self.schemes.is_empty() {
            return Err(Error::param("schemes", "must not be empty"));
        }
        if !(self.thresholds.omni_dbm.is_finite() && self.thresholds.dir_dbm.is_finite()) {
            return Err(Error::param("thresholds", "must be finite"));
        }
        for &v in &self.sweep_values {
            self.sweep_variable.apply(&self.base, v)?.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub scheme: SchemeKind,
    pub sweep_variable: SweepVariable,
    pub sweep_value: f64,
    pub trials: usize,
    pub mean_sum_rate_bps: f64,
    pub mean_rate_active_bps: f64,
    pub mean_active_count: f64,
    pub std_err_sum_rate: f64,
    pub std_err_rate_active: f64,
}

/// Per-scheme outcome of one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialMetrics {
    pub sum_rate_bps: f64,
    pub mean_rate_active_bps: f64,
    pub active_count: usize,
}

impl From<&SnapshotResult> for TrialMetrics {
    fn from(r: &SnapshotResult) -> Self {
        TrialMetrics {
            sum_rate_bps: sum_rate(&r.rates),
            mean_rate_active_bps: mean_rate_active(&r.rates),
            active_count: r.active_count(),
        }
    }
}

/// Runs every scheme on the deployment drawn from `seed`, sharing one access order.
pub fn run_trial(
    params: &ScenarioParams,
    schemes: &[SchemeKind],
    thresholds: Thresholds,
    seed: u64,
) -> Result<Vec<SnapshotResult>> {
    let scenario = generate_deployment(params, seed)?;
    let order = access_order(&scenario);
    schemes
        .iter()
        .map(|&k| run_snapshot_with_order(&scenario, &AccessScheme::new(k, thresholds), &order))
        .collect()
}

#[derive(Default)]
struct Moments {
    n: usize,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    fn std_err(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Trials of one sweep point, executed on the current rayon pool.
pub fn run_point(config: &SweepConfig, params: &ScenarioParams) -> Result<Vec<Vec<TrialMetrics>>> {
    (0..config.trials as u64)
        .into_par_iter()
        .map(|t| {
            let snaps = run_trial(
                params,
                &config.schemes,
                config.thresholds,
                trial_seed(config.master_seed, t),
            )?;
            Ok(snaps.iter().map(TrialMetrics::from).collect())
        })
        .collect()
}

/// One record per (sweep value, scheme), sweep values outermost.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<MetricsRecord>> {
    config.validate()?;
    let mut records = Vec::with_capacity(config.sweep_values.len() * config.schemes.len());
    for &value in &config.sweep_values {
        let params = config.sweep_variable.apply(&config.base, value)?;
        let per_trial = run_point(config, &params)?;
        for (s, &scheme) in config.schemes.iter().enumerate() {
            let mut sum = Moments::default();
            let mut active_rate = Moments::default();
            let mut count = Moments::default();
            for trial in &per_trial {
                let m = trial[s];
                sum.push(m.sum_rate_bps);
                active_rate.push(m.mean_rate_active_bps);
                count.push(m.active_count as f64);
            }
            records.push(MetricsRecord {
                scheme,
                sweep_variable: config.sweep_variable,
                sweep_value: value,
                trials: config.trials,
                mean_sum_rate_bps: sum.mean(),
                mean_rate_active_bps: active_rate.mean(),
                mean_active_count: count.mean(),
                std_err_sum_rate: sum.std_err(),
                std_err_rate_active: active_rate.std_err(),
            });
        }
    }
    Ok(records)
}

/// Formats `x` with `digits` significant digits, without exponent.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x);
    let magnitude = rounded.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{rounded:.decimals$}")
}

pub fn write_csv<W: Write>(mut out: W, records: &[MetricsRecord]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.scheme,
            r.sweep_variable,
            r.sweep_value,
            r.trials,
            format_significant(r.mean_sum_rate_bps / 1e9, 4),
            format_significant(r.mean_rate_active_bps / 1e9, 4),
            format_significant(r.mean_active_count, 4),
            format_significant(r.std_err_sum_rate / 1e9, 4),
        )?;
    }
    Ok(())
}

pub fn to_csv(records: &[MetricsRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, records).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV is ASCII")
}
