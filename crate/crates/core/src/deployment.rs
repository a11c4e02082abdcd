//! Random indoor deployments of BS-MT pairs.
//!
//! Each BS is dropped uniformly in the area rectangle and its MT is placed at
//! a fixed distance in a uniformly random direction. MTs are not constrained
//! to the rectangle. Both ends of a pair point their boresight at each other.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::antenna::BeamPattern;
use crate::error::{Error, Result};
use crate::units::{db_to_linear, wrap_2pi};

/// Maximum allowed deviation of a pair's BS-MT distance from `pair_distance_m`.
pub const PAIR_DISTANCE_TOL_M: f64 = 1e-9;

/// Cone-plus-circle beam parameters shared by every BS (tx) and every MT (rx).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamConfig {
    pub tx_beamwidth_rad: f64,
    pub tx_mainlobe_gain_db: f64,
    /// Linear; 0 means a perfect null outside the mainlobe.
    pub tx_sidelobe_gain: f64,
    pub rx_beamwidth_rad: f64,
    pub rx_mainlobe_gain_db: f64,
    pub rx_sidelobe_gain: f64,
}

impl Default for BeamConfig {
    fn default() -> Self {
        BeamConfig {
            tx_beamwidth_rad: 60f64.to_radians(),
            tx_mainlobe_gain_db: 10.0,
            tx_sidelobe_gain: 0.0,
            rx_beamwidth_rad: 90f64.to_radians(),
            rx_mainlobe_gain_db: 10.0,
            rx_sidelobe_gain: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub area_width_m: f64,
    pub area_height_m: f64,
    pub pair_distance_m: f64,
    pub carrier_freq_hz: f64,
    pub bandwidth_hz: f64,
    pub tx_power_dbm: f64,
    pub noise_psd_dbm_hz: f64,
    pub pathloss_exponent: f64,
    pub num_pairs: usize,
    pub beams: BeamConfig,
}

impl Default for ScenarioParams {
    /// Dense indoor setup: 10x10 m, 4 m links, 60 GHz, 1 GHz, 10 dBm, free-space exponent.
    fn default() -> Self {
        ScenarioParams {
            area_width_m: 10.0,
            area_height_m: 10.0,
            pair_distance_m: 4.0,
            carrier_freq_hz: 60e9,
            bandwidth_hz: 1e9,
            tx_power_dbm: 10.0,
            noise_psd_dbm_hz: -174.0,
            pathloss_exponent: 2.0,
            num_pairs: 40,
            beams: BeamConfig::default(),
        }
    }
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(
            field,
            format!("must be a finite value > 0, got {v}"),
        ))
    }
}

fn beamwidth(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 && v <= TAU + 1e-12 {
        Ok(())
    } else {
        Err(Error::param(field, format!("must lie in (0, 2π], got {v}")))
    }
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<()> {
        positive("area_width_m", self.area_width_m)?;
        positive("area_height_m", self.area_height_m)?;
        positive("pair_distance_m", self.pair_distance_m)?;
        positive("carrier_freq_hz", self.carrier_freq_hz)?;
        positive("bandwidth_hz", self.bandwidth_hz)?;
        if !self.tx_power_dbm.is_finite() {
            return Err(Error::param("tx_power_dbm", "must be finite"));
        }
        if !self.noise_psd_dbm_hz.is_finite() {
            return Err(Error::param("noise_psd_dbm_hz", "must be finite"));
        }
        if !(self.pathloss_exponent.is_finite() && self.pathloss_exponent >= 1.0) {
            return Err(Error::param(
                "pathloss_exponent",
                format!("must be >= 1, got {}", self.pathloss_exponent),
            ));
        }
        if self.num_pairs == 0 {
            return Err(Error::param(
                "num_pairs",
                "at least one BS-MT pair is required",
            ));
        }
        let b = &self.beams;
        beamwidth("tx_beamwidth_rad", b.tx_beamwidth_rad)?;
        beamwidth("rx_beamwidth_rad", b.rx_beamwidth_rad)?;
        let gains = [
            (
                "tx_mainlobe_gain_db",
                db_to_linear(b.tx_mainlobe_gain_db),
                "tx_sidelobe_gain",
                b.tx_sidelobe_gain,
            ),
            (
                "rx_mainlobe_gain_db",
                db_to_linear(b.rx_mainlobe_gain_db),
                "rx_sidelobe_gain",
                b.rx_sidelobe_gain,
            ),
        ];
        for (main_field, main, side_field, side) in gains {
            if !main.is_finite() {
                return Err(Error::param(main_field, "must be finite"));
            }
            if !(side.is_finite() && side >= 0.0) {
                return Err(Error::param(
                    side_field,
                    format!("must be >= 0, got {side}"),
                ));
            }
            if side > main {
                return Err(Error::param(
                    side_field,
                    "sidelobe gain exceeds mainlobe gain",
                ));
            }
        }
        Ok(())
    }

    pub fn tx_power_watts(&self) -> f64 {
        crate::units::dbm_to_watts(self.tx_power_dbm)
    }

    /// Noise floor N_o·W in watts.
    pub fn noise_watts(&self) -> f64 {
        crate::units::dbm_to_watts(self.noise_psd_dbm_hz) * self.bandwidth_hz
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }

    /// Angle of the vector from `self` towards `other`, in `[0, 2π)`.
    pub fn bearing_to(self, other: Point) -> f64 {
        wrap_2pi((other.y - self.y).atan2(other.x - self.x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodePlacement {
    pub position: Point,
    /// Radians in `[0, 2π)`.
    pub boresight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: ScenarioParams,
    pub bs: Vec<NodePlacement>,
    pub mt: Vec<NodePlacement>,
    pub seed: u64,
}

/// Seed of the independent substream used by trial `trial` of a run.
pub fn trial_seed(master_seed: u64, trial: u64) -> u64 {
    master_seed ^ trial
}

/// Draws a random deployment. Identical `(params, seed)` give bitwise-identical scenarios.
pub fn generate_deployment(params: &ScenarioParams, seed: u64) -> Result<Scenario> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = params.num_pairs;
    let mut bs = Vec::with_capacity(k);
    let mut mt = Vec::with_capacity(k);
    for _ in 0..k {
        let x = rng.gen::<f64>() * params.area_width_m;
        let y = rng.gen::<f64>() * params.area_height_m;
        let angle = rng.gen::<f64>() * TAU;
        let bs_pos = Point::new(x, y);
        let mt_pos = Point::new(
            x + params.pair_distance_m * angle.cos(),
            y + params.pair_distance_m * angle.sin(),
        );
        bs.push(NodePlacement {
            position: bs_pos,
            boresight: wrap_2pi(angle),
        });
        mt.push(NodePlacement {
            position: mt_pos,
            boresight: wrap_2pi(angle + std::f64::consts::PI),
        });
    }
    Ok(Scenario {
        params: params.clone(),
        bs,
        mt,
        seed,
    })
}

impl Scenario {
    /// Builds a scenario from explicit BS and MT positions, steering each pair at each other.
    ///
    /// `params.num_pairs` is overwritten with the number of pairs supplied.
    pub fn from_positions(
        mut params: ScenarioParams,
        bs: &[Point],
        mt: &[Point],
        seed: u64,
    ) -> Result<Scenario> {
        if bs.len() != mt.len() {
            return Err(Error::DimensionMismatch {
                expected: bs.len(),
                actual: mt.len(),
            });
        }
        params.num_pairs = bs.len();
        params.validate()?;
        let mut bs_nodes = Vec::with_capacity(bs.len());
        let mut mt_nodes = Vec::with_capacity(mt.len());
        for (k, (&b, &m)) in bs.iter().zip(mt).enumerate() {
            let d = b.distance(m);
            if (d - params.pair_distance_m).abs() > PAIR_DISTANCE_TOL_M {
                return Err(Error::param(
                    "pair_distance_m",
                    format!(
                        "pair {k} is {d} m apart, expected {}",
                        params.pair_distance_m
                    ),
                ));
            }
            bs_nodes.push(NodePlacement {
                position: b,
                boresight: b.bearing_to(m),
            });
            mt_nodes.push(NodePlacement {
                position: m,
                boresight: m.bearing_to(b),
            });
        }
        Ok(Scenario {
            params,
            bs: bs_nodes,
            mt: mt_nodes,
            seed,
        })
    }

    pub fn num_pairs(&self) -> usize {
        self.bs.len()
    }

    fn check(&self, index: usize) -> Result<()> {
        if index < self.num_pairs() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index,
                count: self.num_pairs(),
            })
        }
    }

    /// Distance between MT_k and BS_j.
    pub fn pair_distance(&self, k: usize, j: usize) -> Result<f64> {
        self.check(k)?;
        self.check(j)?;
        Ok(self.mt[k].position.distance(self.bs[j].position))
    }

    pub fn bs_distance(&self, i: usize, j: usize) -> Result<f64> {
        self.check(i)?;
        self.check(j)?;
        Ok(self.bs[i].position.distance(self.bs[j].position))
    }

    /// Transmit pattern of BS_j, steered at MT_j.
    pub fn bs_pattern(&self, j: usize) -> BeamPattern {
        let b = &self.params.beams;
        BeamPattern {
            beamwidth: b.tx_beamwidth_rad,
            mainlobe_gain: db_to_linear(b.tx_mainlobe_gain_db),
            sidelobe_gain: b.tx_sidelobe_gain,
            boresight: self.bs[j].boresight,
        }
    }

    /// Data receive pattern of MT_k, steered at BS_k.
    pub fn mt_pattern(&self, k: usize) -> BeamPattern {
        let b = &self.params.beams;
        BeamPattern {
            beamwidth: b.rx_beamwidth_rad,
            mainlobe_gain: db_to_linear(b.rx_mainlobe_gain_db),
            sidelobe_gain: b.rx_sidelobe_gain,
            boresight: self.mt[k].boresight,
        }
    }

    /// One node per line: `<role> <pair> <x> <y> <boresight>`, BSs first.
    pub fn to_record(&self) -> String {
        let mut out = String::new();
        for (role, nodes) in [("bs", &self.bs), ("mt", &self.mt)] {
            for (k, n) in nodes.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{role} {k} {:?} {:?} {:?}",
                    n.position.x, n.position.y, n.boresight
                );
            }
        }
        out
    }

    /// Parses the output of [`Scenario::to_record`] back into a scenario with `params`.
    pub fn from_record(params: ScenarioParams, seed: u64, text: &str) -> Result<Scenario> {
        let mut bs: Vec<Option<NodePlacement>> = Vec::new();
        let mut mt: Vec<Option<NodePlacement>> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let raw = raw.trim();
            if raw.is_empty() {
                continue;
            }
            let bad = |reason: &str| Error::Record {
                line,
                reason: reason.to_string(),
            };
            let fields: Vec<&str> = raw.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(bad("expected 5 fields"));
            }
            let pair: usize = fields[1].parse().map_err(|_| bad("invalid pair index"))?;
            let num = |i: usize| -> Result<f64> {
                fields[i].parse::<f64>().map_err(|_| bad("invalid number"))
            };
            let node = NodePlacement {
                position: Point::new(num(2)?, num(3)?),
                boresight: num(4)?,
            };
            let list = match fields[0] {
                "bs" => &mut bs,
                "mt" => &mut mt,
                _ => return Err(bad("role must be `bs` or `mt`")),
            };
            if list.len() <= pair {
                list.resize(pair + 1, None);
            }
            if list[pair].replace(node).is_some() {
                return Err(bad("duplicate node"));
            }
        }
        if bs.len() != mt.len() {
            return Err(Error::DimensionMismatch {
                expected: bs.len(),
                actual: mt.len(),
            });
        }
        let collect = |v: Vec<Option<NodePlacement>>| -> Result<Vec<NodePlacement>> {
            v.into_iter()
                .enumerate()
                .map(|(k, n)| {
                    n.ok_or(Error::Record {
                        line: 0,
                        reason: format!("missing node for pair {k}"),
                    })
                })
                .collect()
        };
        let bs = collect(bs)?;
        let mt = collect(mt)?;
        let mut params = params;
        params.num_pairs = bs.len();
        params.validate()?;
        Ok(Scenario {
            params,
            bs,
            mt,
            seed,
        })
    }
}
