//! Channel access: energy-detection carrier sense at the BS (LBT) and,
//! optionally, at the MT (LBR), plus the snapshot admission procedure.
//!
//! A snapshot visits the pairs in a random order. Each pair senses at its BS;
//! if the channel is busy it stays silent. Schemes with LBR then sense at the
//! MT, which listens while its own BS is silent waiting for the RtoRx. A pair
//! that passes every stage starts transmitting and remains active for the rest
//! of the snapshot. Silenced pairs do not retry.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::antenna::cone_gain;
use crate::deployment::Scenario;
use crate::error::{Error, Result};
use crate::linkbudget::{link_rate, pathloss, received_power, LinkPower, RateResult, RxMode};
use crate::units::dbm_to_watts;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SenseMode {
    Omni,
    Directional,
}

/// Energy-detection thresholds. The directional value is the omni value
/// raised by the mainlobe gain used for sensing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub omni_dbm: f64,
    pub dir_dbm: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            omni_dbm: -74.0,
            dir_dbm: -64.0,
        }
    }
}

impl Thresholds {
    /// Thresholds following the normalized convention: `dir = omni + mainlobe_gain_db`.
    pub fn normalized(omni_dbm: f64, mainlobe_gain_db: f64) -> Self {
        Thresholds {
            omni_dbm,
            dir_dbm: omni_dbm + mainlobe_gain_db,
        }
    }

    pub fn for_mode(&self, mode: SenseMode) -> f64 {
        match mode {
            SenseMode::Omni => self.omni_dbm,
            SenseMode::Directional => self.dir_dbm,
        }
    }
}

/// The six access procedures, in the order they are usually reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    OmniLbt,
    DirLbt,
    OmniLbtOmniLbr,
    OmniLbtDirLbr,
    DirLbtOmniLbr,
    DirLbtDirLbr,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 6] = [
        SchemeKind::OmniLbt,
        SchemeKind::DirLbt,
        SchemeKind::OmniLbtOmniLbr,
        SchemeKind::OmniLbtDirLbr,
        SchemeKind::DirLbtOmniLbr,
        SchemeKind::DirLbtDirLbr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::OmniLbt => "omni-lbt",
            SchemeKind::DirLbt => "dir-lbt",
            SchemeKind::OmniLbtOmniLbr => "omni-lbt-omni-lbr",
            SchemeKind::OmniLbtDirLbr => "omni-lbt-dir-lbr",
            SchemeKind::DirLbtOmniLbr => "dir-lbt-omni-lbr",
            SchemeKind::DirLbtDirLbr => "dir-lbt-dir-lbr",
        }
    }

    pub fn bs_sense(self) -> SenseMode {
        match self {
            SchemeKind::OmniLbt | SchemeKind::OmniLbtOmniLbr | SchemeKind::OmniLbtDirLbr => {
                SenseMode::Omni
            }
            _ => SenseMode::Directional,
        }
    }

    pub fn mt_sense(self) -> Option<SenseMode> {
        match self {
            SchemeKind::OmniLbt | SchemeKind::DirLbt => None,
            SchemeKind::OmniLbtOmniLbr | SchemeKind::DirLbtOmniLbr => Some(SenseMode::Omni),
            SchemeKind::OmniLbtDirLbr | SchemeKind::DirLbtDirLbr => Some(SenseMode::Directional),
        }
    }

    pub fn from_modes(bs: SenseMode, mt: Option<SenseMode>) -> SchemeKind {
        use SenseMode::*;
        match (bs, mt) {
            (Omni, None) => SchemeKind::OmniLbt,
            (Directional, None) => SchemeKind::DirLbt,
            (Omni, Some(Omni)) => SchemeKind::OmniLbtOmniLbr,
            (Omni, Some(Directional)) => SchemeKind::OmniLbtDirLbr,
            (Directional, Some(Omni)) => SchemeKind::DirLbtOmniLbr,
            (Directional, Some(Directional)) => SchemeKind::DirLbtDirLbr,
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownScheme(s.to_string()))
    }
}

/// An access procedure together with its sensing thresholds. LBT at the BS
/// is always present; LBR at the MT is optional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccessScheme {
    pub bs_sense: SenseMode,
    pub mt_sense: Option<SenseMode>,
    pub thresholds: Thresholds,
}

impl AccessScheme {
    pub fn new(kind: SchemeKind, thresholds: Thresholds) -> Self {
        AccessScheme {
            bs_sense: kind.bs_sense(),
            mt_sense: kind.mt_sense(),
            thresholds,
        }
    }

    pub fn kind(&self) -> SchemeKind {
        SchemeKind::from_modes(self.bs_sense, self.mt_sense)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelState {
    Idle,
    Busy,
}

/// Idle iff `sensed <= threshold`.
pub fn idle_decision(sensed: LinkPower, threshold_dbm: f64) -> ChannelState {
    if sensed.watts() <= dbm_to_watts(threshold_dbm) {
        ChannelState::Idle
    } else {
        ChannelState::Busy
    }
}

fn check_candidate(scenario: &Scenario, active_set: &[usize], idx: usize) -> Result<()> {
    scenario.pair_distance(idx, idx)?;
    if active_set.contains(&idx) {
        return Err(Error::Domain(format!("pair {idx} is already transmitting")));
    }
    for &i in active_set {
        scenario.pair_distance(i, i)?;
    }
    Ok(())
}

/// Energy BS_j detects from the active BSs. Omni sensing has unit gain;
/// directional sensing listens through BS_j's own Tx beam.
pub fn sense_at_bs(
    scenario: &Scenario,
    active_set: &[usize],
    j: usize,
    mode: SenseMode,
) -> Result<LinkPower> {
    check_candidate(scenario, active_set, j)?;
    let p = &scenario.params;
    let me = scenario.bs[j].position;
    let my_beam = scenario.bs_pattern(j);
    let mut total = LinkPower::ZERO;
    for &i in active_set {
        let other = scenario.bs[i].position;
        let tx_gain = cone_gain(&scenario.bs_pattern(i), other.bearing_to(me));
        let sense_gain = match mode {
            SenseMode::Omni => 1.0,
            SenseMode::Directional => cone_gain(&my_beam, me.bearing_to(other)),
        };
        let gain = tx_gain * sense_gain;
        if gain > 0.0 {
            let pl = pathloss(me.distance(other), p.carrier_freq_hz, p.pathloss_exponent)?;
            total = total + received_power(p.tx_power_watts(), gain, pl);
        }
    }
    Ok(total)
}

/// Energy MT_k detects from the active BSs while its own BS is silent.
/// Directional sensing uses MT_k's data Rx beam (steered at BS_k).
pub fn sense_at_mt(
    scenario: &Scenario,
    active_set: &[usize],
    k: usize,
    mode: SenseMode,
) -> Result<LinkPower> {
    check_candidate(scenario, active_set, k)?;
    let p = &scenario.params;
    let me = scenario.mt[k].position;
    let my_beam = scenario.mt_pattern(k);
    let mut total = LinkPower::ZERO;
    for &j in active_set {
        let bs = scenario.bs[j].position;
        let tx_gain = cone_gain(&scenario.bs_pattern(j), bs.bearing_to(me));
        let sense_gain = match mode {
            SenseMode::Omni => 1.0,
            SenseMode::Directional => cone_gain(&my_beam, me.bearing_to(bs)),
        };
        let gain = tx_gain * sense_gain;
        if gain > 0.0 {
            let pl = pathloss(me.distance(bs), p.carrier_freq_hz, p.pathloss_exponent)?;
            total = total + received_power(p.tx_power_watts(), gain, pl);
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotResult {
    pub scheme: SchemeKind,
    pub transmitting: Vec<bool>,
    /// LBT measurement of every pair, taken when its turn came.
    pub sensed_at_bs: Vec<LinkPower>,
    /// LBR measurement; `None` for pure-LBT schemes or pairs already silenced by LBT.
    pub sensed_at_mt: Vec<Option<LinkPower>>,
    pub rates: Vec<RateResult>,
    pub access_order: Vec<usize>,
}

impl SnapshotResult {
    /// Transmitting pairs in admission order.
    pub fn active_set(&self) -> Vec<usize> {
        self.access_order
            .iter()
            .copied()
            .filter(|&k| self.transmitting[k])
            .collect()
    }

    pub fn active_count(&self) -> usize {
        self.transmitting.iter().filter(|&&t| t).count()
    }
}

/// Random start order of a scenario: a uniform permutation drawn from a
/// stream of the scenario seed that is independent of the placement stream.
pub fn access_order(scenario: &Scenario) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..scenario.num_pairs()).collect();
    order.shuffle(&mut rng);
    order
}

pub fn run_snapshot(scenario: &Scenario, scheme: &AccessScheme) -> Result<SnapshotResult> {
    run_snapshot_with_order(scenario, scheme, &access_order(scenario))
}

/// Admission with an explicit visiting order (must be a permutation of `0..K`).
pub fn run_snapshot_with_order(
    scenario: &Scenario,
    scheme: &AccessScheme,
    order: &[usize],
) -> Result<SnapshotResult> {
    let k_total = scenario.num_pairs();
    let mut seen = vec![false; k_total];
    if order.len() != k_total {
        return Err(Error::DimensionMismatch {
            expected: k_total,
            actual: order.len(),
        });
    }
    for &k in order {
        if k >= k_total || std::mem::replace(&mut seen[k], true) {
            return Err(Error::Domain("access order is not a permutation".into()));
        }
    }

    let mut active: Vec<usize> = Vec::with_capacity(k_total);
    let mut transmitting = vec![false; k_total];
    let mut sensed_at_bs = vec![LinkPower::ZERO; k_total];
    let mut sensed_at_mt = vec![None; k_total];
    let th = &scheme.thresholds;

    for &k in order {
        let lbt = sense_at_bs(scenario, &active, k, scheme.bs_sense)?;
        sensed_at_bs[k] = lbt;
        if idle_decision(lbt, th.for_mode(scheme.bs_sense)) == ChannelState::Busy {
            continue;
        }
        if let Some(mode) = scheme.mt_sense {
            let lbr = sense_at_mt(scenario, &active, k, mode)?;
            sensed_at_mt[k] = Some(lbr);
            if idle_decision(lbr, th.for_mode(mode)) == ChannelState::Busy {
                continue;
            }
        }
        transmitting[k] = true;
        active.push(k);
    }

    let rates = (0..k_total)
        .map(|k| {
            if transmitting[k] {
                link_rate(scenario, &active, k, RxMode::Directional)
            } else {
                Ok(RateResult::SILENT)
            }
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SnapshotResult {
        scheme: scheme.kind(),
        transmitting,
        sensed_at_bs,
        sensed_at_mt,
        rates,
        access_order: order.to_vec(),
    })
}
