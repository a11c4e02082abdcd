//! Flat `key=value` run configuration.
//!
//! Values are resolved in three layers: experiment defaults, then the config
//! file, then command-line flags. List-valued keys (`k`, `theta_tx_deg`,
//! `theta_rx_deg`, `scheme`, `mu`) take comma-separated values.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use mmcoexist::access::{SchemeKind, Thresholds};
use mmcoexist::deployment::ScenarioParams;
use mmcoexist::montecarlo::{degrees_to_beamwidth, SweepConfig, SweepVariable};
use mmcoexist::slots::MCOT_60GHZ_MS;

pub const KNOWN_KEYS: &[&str] = &[
    "experiment",
    "out",
    "seed",
    "trials",
    "k",
    "theta_tx_deg",
    "theta_rx_deg",
    "scheme",
    "sweep_var",
    "threshold",
    "threshold_omni_dbm",
    "threshold_dir_dbm",
    "mu",
    "mcot_ms",
    "area_width_m",
    "area_height_m",
    "pair_distance_m",
    "carrier_freq_hz",
    "bandwidth_hz",
    "tx_power_dbm",
    "noise_psd_dbm_hz",
    "pathloss_exponent",
    "tx_mainlobe_gain_db",
    "rx_mainlobe_gain_db",
    "tx_sidelobe_gain",
    "rx_sidelobe_gain",
];

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    UnknownKey {
        key: String,
        suggestion: Option<&'static str>,
    },
    BadValue {
        key: String,
        value: String,
        expected: &'static str,
    },
    Syntax {
        line: usize,
        text: String,
    },
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::UnknownKey {
                key,
                suggestion: Some(s),
            } => {
                write!(f, "unknown key `{key}`; did you mean `{s}`?")
            }
            ConfigError::UnknownKey {
                key,
                suggestion: None,
            } => write!(f, "unknown key `{key}`"),
            ConfigError::BadValue {
                key,
                value,
                expected,
            } => {
                write!(f, "key `{key}`: expected {expected}, got `{value}`")
            }
            ConfigError::Syntax { line, text } => {
                write!(f, "config line {line}: expected `key=value`, got `{text}`")
            }
            ConfigError::Invalid(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Fig4SumRateVsK,
    Fig5MeanRateVsK,
    Fig6SumRateVsTxBw,
    Fig7SumRateVsRxBw,
    SlotsOverhead,
    CallFlowDemo,
    Custom,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Fig4SumRateVsK,
        Experiment::Fig5MeanRateVsK,
        Experiment::Fig6SumRateVsTxBw,
        Experiment::Fig7SumRateVsRxBw,
        Experiment::SlotsOverhead,
        Experiment::CallFlowDemo,
        Experiment::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig4SumRateVsK => "fig4_sumrate_vs_k",
            Experiment::Fig5MeanRateVsK => "fig5_meanrate_vs_k",
            Experiment::Fig6SumRateVsTxBw => "fig6_sumrate_vs_txbw",
            Experiment::Fig7SumRateVsRxBw => "fig7_sumrate_vs_rxbw",
            Experiment::SlotsOverhead => "slots_overhead",
            Experiment::CallFlowDemo => "callflow_demo",
            Experiment::Custom => "custom",
        }
    }

    pub fn is_sweep(self) -> bool {
        !matches!(self, Experiment::SlotsOverhead | Experiment::CallFlowDemo)
    }

    fn default_extension(self) -> &'static str {
        match self {
            Experiment::CallFlowDemo => "txt",
            _ => "csv",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| ConfigError::BadValue {
                key: "experiment".into(),
                value: s.into(),
                expected: "one of fig4_sumrate_vs_k, fig5_meanrate_vs_k, fig6_sumrate_vs_txbw, fig7_sumrate_vs_rxbw, slots_overhead, callflow_demo, custom",
            })
    }
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub params: ScenarioParams,
    pub schemes: Vec<SchemeKind>,
    pub thresholds: Thresholds,
    pub trials: usize,
    pub seed: u64,
    pub sweep_var: SweepVariable,
    pub k_values: Vec<f64>,
    pub theta_tx_deg: Vec<f64>,
    pub theta_rx_deg: Vec<f64>,
    pub mu_values: Vec<u32>,
    pub mcot_ms: f64,
    pub output_path: PathBuf,
}

pub const DEFAULT_TRIALS: usize = 1000;
pub const DEFAULT_SEED: u64 = 2018;

fn k_grid() -> Vec<f64> {
    (1..=10).map(|i| 5.0 * i as f64).collect()
}

impl RunConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let (sweep_var, k_values, theta_tx_deg, theta_rx_deg) = match experiment {
            Experiment::Fig6SumRateVsTxBw => (
                SweepVariable::ThetaTxDeg,
                vec![40.0],
                vec![15.0, 30.0, 45.0, 60.0, 90.0, 120.0, 180.0],
                vec![90.0],
            ),
            Experiment::Fig7SumRateVsRxBw => (
                SweepVariable::ThetaRxDeg,
                vec![40.0],
                vec![60.0],
                vec![30.0, 60.0, 90.0, 120.0, 180.0, 270.0, 360.0],
            ),
            _ => (SweepVariable::NumPairs, k_grid(), vec![60.0], vec![90.0]),
        };
        RunConfig {
            experiment,
            params: ScenarioParams::default(),
            schemes: SchemeKind::ALL.to_vec(),
            thresholds: Thresholds::default(),
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            sweep_var,
            k_values,
            theta_tx_deg,
            theta_rx_deg,
            mu_values: vec![3, 4],
            mcot_ms: MCOT_60GHZ_MS,
            output_path: PathBuf::from(format!(
                "{}.{}",
                experiment.name(),
                experiment.default_extension()
            )),
        }
    }

    /// Applies file entries, then flag entries, on top of the defaults of the
    /// experiment named by the last `experiment` entry (or `fallback`).
    pub fn resolve(
        fallback: Experiment,
        file: &[(String, String)],
        flags: &[(String, String)],
    ) -> Result<Self, ConfigError> {
        let entries: Vec<&(String, String)> = file.iter().chain(flags).collect();
        for (key, _) in &entries {
            check_key(key)?;
        }
        let experiment = match entries.iter().rev().find(|(k, _)| k == "experiment") {
            Some((_, v)) => v.trim().parse()?,
            None => fallback,
        };
        let mut cfg = RunConfig::defaults(experiment);
        let mut out_set = false;
        for (key, value) in entries {
            if key == "out" {
                out_set = true;
            }
            cfg.apply(key, value.trim())?;
        }
        if !out_set {
            cfg.output_path = RunConfig::defaults(experiment).output_path;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let p = &mut self.params;
        match key {
            "experiment" => {}
            "out" => self.output_path = PathBuf::from(value),
            "seed" => self.seed = parse(key, value, "an unsigned 64-bit integer")?,
            "trials" => self.trials = parse(key, value, "a positive integer")?,
            "k" => self.k_values = parse_list(key, value, "comma-separated positive integers")?,
            "theta_tx_deg" => self.theta_tx_deg = parse_list(key, value, "comma-separated degrees in (0, 360]")?,
            "theta_rx_deg" => self.theta_rx_deg = parse_list(key, value, "comma-separated degrees in (0, 360]")?,
            "scheme" => {
                self.schemes = parse_list(
                    key,
                    value,
                    "comma-separated scheme names (omni-lbt, dir-lbt, omni-lbt-omni-lbr, omni-lbt-dir-lbr, dir-lbt-omni-lbr, dir-lbt-dir-lbr)",
                )?
            }
            "sweep_var" => self.sweep_var = parse(key, value, "one of k, theta_tx_deg, theta_rx_deg")?,
            "threshold" => {
                let omni: f64 = parse(key, value, "a number in dBm")?;
                self.thresholds = Thresholds::normalized(omni, p.beams.tx_mainlobe_gain_db);
            }
            "threshold_omni_dbm" => self.thresholds.omni_dbm = parse(key, value, "a number in dBm")?,
            "threshold_dir_dbm" => self.thresholds.dir_dbm = parse(key, value, "a number in dBm")?,
            "mu" => self.mu_values = parse_list(key, value, "comma-separated integers in 0..=4")?,
            "mcot_ms" => self.mcot_ms = parse(key, value, "a positive number of milliseconds")?,
            "area_width_m" => p.area_width_m = parse(key, value, "a number in meters")?,
            "area_height_m" => p.area_height_m = parse(key, value, "a number in meters")?,
            "pair_distance_m" => p.pair_distance_m = parse(key, value, "a number in meters")?,
            "carrier_freq_hz" => p.carrier_freq_hz = parse(key, value, "a number in Hz")?,
            "bandwidth_hz" => p.bandwidth_hz = parse(key, value, "a number in Hz")?,
            "tx_power_dbm" => p.tx_power_dbm = parse(key, value, "a number in dBm")?,
            "noise_psd_dbm_hz" => p.noise_psd_dbm_hz = parse(key, value, "a number in dBm/Hz")?,
            "pathloss_exponent" => p.pathloss_exponent = parse(key, value, "a number >= 1")?,
            "tx_mainlobe_gain_db" => p.beams.tx_mainlobe_gain_db = parse(key, value, "a number in dB")?,
            "rx_mainlobe_gain_db" => p.beams.rx_mainlobe_gain_db = parse(key, value, "a number in dB")?,
            "tx_sidelobe_gain" => p.beams.tx_sidelobe_gain = parse(key, value, "a linear gain >= 0")?,
            "rx_sidelobe_gain" => p.beams.rx_sidelobe_gain = parse(key, value, "a linear gain >= 0")?,
            other => return check_key(other),
        }
        Ok(())
    }

    fn sweep_values(&self) -> &[f64] {
        match self.sweep_var {
            SweepVariable::NumPairs => &self.k_values,
            SweepVariable::ThetaTxDeg => &self.theta_tx_deg,
            SweepVariable::ThetaRxDeg => &self.theta_rx_deg,
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, value: String, expected: &'static str| ConfigError::BadValue {
            key: key.into(),
            value,
            expected,
        };
        if self.trials == 0 {
            return Err(bad("trials", "0".into(), "a positive integer"));
        }
        if !(self.mcot_ms.is_finite() && self.mcot_ms > 0.0) {
            return Err(bad(
                "mcot_ms",
                self.mcot_ms.to_string(),
                "a positive number of milliseconds",
            ));
        }
        if let Some(&mu) = self.mu_values.iter().find(|&&m| m > 4) {
            return Err(bad(
                "mu",
                mu.to_string(),
                "comma-separated integers in 0..=4",
            ));
        }
        if let Some(&k) = self
            .k_values
            .iter()
            .find(|&&k| !(k >= 1.0 && k.fract() == 0.0))
        {
            return Err(bad("k", k.to_string(), "comma-separated positive integers"));
        }
        for (key, list) in [
            ("theta_tx_deg", &self.theta_tx_deg),
            ("theta_rx_deg", &self.theta_rx_deg),
        ] {
            if let Some(&d) = list.iter().find(|&&d| degrees_to_beamwidth(d).is_err()) {
                return Err(bad(
                    key,
                    d.to_string(),
                    "comma-separated degrees in (0, 360]",
                ));
            }
        }
        if self.experiment.is_sweep() {
            for (var, key, list) in [
                (SweepVariable::NumPairs, "k", &self.k_values),
                (
                    SweepVariable::ThetaTxDeg,
                    "theta_tx_deg",
                    &self.theta_tx_deg,
                ),
                (
                    SweepVariable::ThetaRxDeg,
                    "theta_rx_deg",
                    &self.theta_rx_deg,
                ),
            ] {
                if list.is_empty() {
                    return Err(bad(key, String::new(), "at least one value"));
                }
                if var != self.sweep_var && list.len() != 1 {
                    return Err(ConfigError::Invalid(format!(
                        "key `{key}` must be a single value when sweeping `{}`",
                        self.sweep_var
                    )));
                }
            }
            if self.schemes.is_empty() {
                return Err(bad("scheme", String::new(), "at least one scheme"));
            }
            self.sweep_config()
                .validate()
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        Ok(())
    }

    /// Monte Carlo sweep described by this configuration.
    pub fn sweep_config(&self) -> SweepConfig {
        let mut base = self.params.clone();
        if let Some(&k) = self.k_values.first() {
            base.num_pairs = k as usize;
        }
        if let Some(Ok(bw)) = self.theta_tx_deg.first().map(|&d| degrees_to_beamwidth(d)) {
            base.beams.tx_beamwidth_rad = bw;
        }
        if let Some(Ok(bw)) = self.theta_rx_deg.first().map(|&d| degrees_to_beamwidth(d)) {
            base.beams.rx_beamwidth_rad = bw;
        }
        SweepConfig {
            base,
            schemes: self.schemes.clone(),
            thresholds: self.thresholds,
            trials: self.trials,
            sweep_variable: self.sweep_var,
            sweep_values: self.sweep_values().to_vec(),
            master_seed: self.seed,
        }
    }
}

fn check_key(key: &str) -> Result<(), ConfigError> {
    if KNOWN_KEYS.contains(&key) {
        return Ok(());
    }
    let suggestion = KNOWN_KEYS
        .iter()
        .map(|k| (strsim::levenshtein(key, k), *k))
        .filter(|(d, k)| *d <= 3.max(k.len() / 3))
        .min()
        .map(|(_, k)| k);
    Err(ConfigError::UnknownKey {
        key: key.to_string(),
        suggestion,
    })
}

fn parse<T: FromStr>(key: &str, value: &str, expected: &'static str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        key: key.into(),
        value: value.into(),
        expected,
    })
}

fn parse_list<T: FromStr>(
    key: &str,
    value: &str,
    expected: &'static str,
) -> Result<Vec<T>, ConfigError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s, expected))
        .collect()
}

/// Parses flat `key=value` text. Blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            text: raw.to_string(),
        })?;
        let key = key.trim().replace('-', "_");
        check_key(&key)?;
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}
