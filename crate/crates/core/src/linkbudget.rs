//! Pathloss, received power, interference and Shannon rate.
//!
//! Everything is in linear units (watts, linear gains); dBm only appears at
//! the edges.

use std::f64::consts::PI;

use crate::antenna::{total_gain_cone, BeamPattern};
use crate::deployment::Scenario;
use crate::error::{Error, Result};
use crate::units::{watts_to_dbm, SPEED_OF_LIGHT};

/// Linear power in watts, never negative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct LinkPower(f64);

impl LinkPower {
    pub const ZERO: LinkPower = LinkPower(0.0);

    pub fn from_watts(watts: f64) -> Result<Self> {
        if watts.is_nan() || watts < 0.0 {
            return Err(Error::Domain(format!("power must be >= 0 W, got {watts}")));
        }
        Ok(LinkPower(watts))
    }

    pub fn from_dbm(dbm: f64) -> Self {
        LinkPower(crate::units::dbm_to_watts(dbm))
    }

    pub fn watts(self) -> f64 {
        self.0
    }

    /// `None` for zero power.
    pub fn dbm(self) -> Option<f64> {
        (self.0 > 0.0).then(|| watts_to_dbm(self.0))
    }
}

impl std::ops::Add for LinkPower {
    type Output = LinkPower;
    fn add(self, rhs: LinkPower) -> LinkPower {
        LinkPower(self.0 + rhs.0)
    }
}

impl std::iter::Sum for LinkPower {
    fn sum<I: Iterator<Item = LinkPower>>(iter: I) -> LinkPower {
        LinkPower(iter.map(|p| p.0).sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RateResult {
    pub bits_per_second: f64,
    pub sinr_linear: f64,
    pub interference_watts: f64,
}

impl RateResult {
    pub const SILENT: RateResult = RateResult {
        bits_per_second: 0.0,
        sinr_linear: 0.0,
        interference_watts: 0.0,
    };
}

/// Free-space-like pathloss `(c / 4π f_c)^2 / d^α` as a linear attenuation.
pub fn pathloss(distance_m: f64, carrier_freq_hz: f64, alpha: f64) -> Result<f64> {
    if distance_m.is_nan() || distance_m <= 0.0 {
        return Err(Error::Domain(format!(
            "distance must be > 0, got {distance_m}"
        )));
    }
    if carrier_freq_hz.is_nan() || carrier_freq_hz <= 0.0 {
        return Err(Error::Domain(format!(
            "carrier frequency must be > 0, got {carrier_freq_hz}"
        )));
    }
    let k = SPEED_OF_LIGHT / (4.0 * PI * carrier_freq_hz);
    Ok(k * k / distance_m.powf(alpha))
}

pub fn received_power(tx_power_watts: f64, total_gain: f64, pathloss: f64) -> LinkPower {
    LinkPower(tx_power_watts * total_gain * pathloss)
}

/// Shannon rate `W log2(1 + S / (N_o W + I))`.
pub fn rate(
    signal: LinkPower,
    interference: LinkPower,
    bandwidth_hz: f64,
    noise_psd_w_hz: f64,
) -> RateResult {
    let noise = noise_psd_w_hz * bandwidth_hz;
    let sinr = signal.0 / (noise + interference.0);
    RateResult {
        bits_per_second: bandwidth_hz * sinr.ln_1p() / std::f64::consts::LN_2,
        sinr_linear: sinr,
        interference_watts: interference.0,
    }
}

/// Receive pattern an MT uses while receiving data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RxMode {
    /// The steered data beam (cone pattern from the scenario).
    Directional,
    /// Unit gain in every direction.
    Omni,
}

fn rx_pattern(scenario: &Scenario, k: usize, mode: RxMode) -> BeamPattern {
    match mode {
        RxMode::Directional => scenario.mt_pattern(k),
        RxMode::Omni => BeamPattern::omni(1.0),
    }
}

/// Power MT_k receives from BS_j when BS_j transmits, with MT_k listening through `rx`.
pub(crate) fn bs_to_mt_power(
    scenario: &Scenario,
    j: usize,
    k: usize,
    rx: &BeamPattern,
) -> LinkPower {
    let bs = scenario.bs[j].position;
    let mt = scenario.mt[k].position;
    let p = &scenario.params;
    let gain = total_gain_cone(
        &scenario.bs_pattern(j),
        rx,
        bs.bearing_to(mt),
        mt.bearing_to(bs),
        1.0,
    );
    if gain == 0.0 {
        return LinkPower::ZERO;
    }
    let pl = pathloss(bs.distance(mt), p.carrier_freq_hz, p.pathloss_exponent)
        .expect("BS and MT must not be co-located");
    received_power(p.tx_power_watts(), gain, pl)
}

/// Useful signal power at MT_k from its own BS.
pub fn signal_power(scenario: &Scenario, k: usize, mode: RxMode) -> Result<LinkPower> {
    scenario.pair_distance(k, k)?;
    Ok(bs_to_mt_power(
        scenario,
        k,
        k,
        &rx_pattern(scenario, k, mode),
    ))
}

/// Sum of received powers at MT_k from every BS in `active_set` other than BS_k.
pub fn interference_at(
    scenario: &Scenario,
    active_set: &[usize],
    k: usize,
    mode: RxMode,
) -> Result<LinkPower> {
    scenario.pair_distance(k, k)?;
    let rx = rx_pattern(scenario, k, mode);
    let mut total = LinkPower::ZERO;
    for &j in active_set {
        scenario.pair_distance(k, j)?;
        if j != k {
            total = total + bs_to_mt_power(scenario, j, k, &rx);
        }
    }
    Ok(total)
}

/// Shannon rate of pair `k` given the set of transmitting BSs.
pub fn link_rate(
    scenario: &Scenario,
    active_set: &[usize],
    k: usize,
    mode: RxMode,
) -> Result<RateResult> {
    let p = &scenario.params;
    let signal = signal_power(scenario, k, mode)?;
    let interference = interference_at(scenario, active_set, k, mode)?;
    let noise_psd = crate::units::dbm_to_watts(p.noise_psd_dbm_hz);
    Ok(rate(signal, interference, p.bandwidth_hz, noise_psd))
}
