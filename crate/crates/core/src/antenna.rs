//! Beamforming gains.
//!
//! Two models live here. The exact one builds a multipath channel matrix for
//! half-wavelength uniform linear arrays and evaluates `|r^H H w|^2` for given
//! transmit and receive beams. The cone-plus-circle model used by the
//! simulator replaces each array by a constant mainlobe gain inside a
//! beamwidth and a constant sidelobe gain everywhere else.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::units::wrap_pi;

/// Cone-plus-circle antenna pattern in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamPattern {
    /// Mainlobe width in radians, `0 < beamwidth <= 2π`.
    pub beamwidth: f64,
    /// Linear.
    pub mainlobe_gain: f64,
    /// Linear.
    pub sidelobe_gain: f64,
    pub boresight: f64,
}

impl BeamPattern {
    pub fn omni(gain: f64) -> Self {
        BeamPattern {
            beamwidth: TAU,
            mainlobe_gain: gain,
            sidelobe_gain: gain,
            boresight: 0.0,
        }
    }

    pub fn is_omni(&self) -> bool {
        self.beamwidth >= TAU
    }

    /// Gain towards `direction` (radians). An offset of exactly half the
    /// beamwidth is inside the mainlobe.
    pub fn gain_towards(&self, direction: f64) -> f64 {
        cone_gain(self, direction)
    }
}

pub fn cone_gain(pattern: &BeamPattern, direction: f64) -> f64 {
    if pattern.is_omni() {
        return pattern.mainlobe_gain;
    }
    let offset = wrap_pi(direction - pattern.boresight).abs();
    if offset <= pattern.beamwidth / 2.0 {
        pattern.mainlobe_gain
    } else {
        pattern.sidelobe_gain
    }
}

/// `los_gain_sq · G_tx(tx→rx) · G_rx(rx→tx)`.
pub fn total_gain_cone(
    tx: &BeamPattern,
    rx: &BeamPattern,
    tx_to_rx_direction: f64,
    rx_to_tx_direction: f64,
    los_gain_sq: f64,
) -> f64 {
    los_gain_sq * cone_gain(tx, tx_to_rx_direction) * cone_gain(rx, rx_to_tx_direction)
}

/// Unit-norm complex beam (or array response) vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamVector(Vec<Complex64>);

impl BeamVector {
    /// Scales `v` to unit norm.
    pub fn normalized(v: Vec<Complex64>) -> Result<Self> {
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if v.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::Domain(
                "beam vector must be non-zero and finite".into(),
            ));
        }
        Ok(BeamVector(v.into_iter().map(|c| c / norm).collect()))
    }

    /// Single-element receiver, i.e. an omnidirectional Rx beam.
    pub fn omni() -> Self {
        BeamVector(vec![Complex64::new(1.0, 0.0)])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Multiplies every element by `e^{iφ}`.
    pub fn rotated(&self, phase: f64) -> Self {
        let r = Complex64::from_polar(1.0, phase);
        BeamVector(self.0.iter().map(|c| c * r).collect())
    }
}

/// Half-wavelength ULA response: element `m` is `exp(-iπ m sin(angle)) / √n`.
pub fn ula_response(num_elements: usize, angle: f64) -> Result<BeamVector> {
    if num_elements == 0 {
        return Err(Error::Domain("array needs at least one element".into()));
    }
    let scale = 1.0 / (num_elements as f64).sqrt();
    let s = angle.sin();
    Ok(BeamVector(
        (0..num_elements)
            .map(|m| Complex64::from_polar(scale, -PI * m as f64 * s))
            .collect(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    pub gain: Complex64,
    /// Angle of departure, radians.
    pub aod: f64,
    /// Angle of arrival, radians.
    pub aoa: f64,
}

/// Paths between one BS (`tx_elements` antennas) and one MT (`rx_elements`).
/// The first path is the LOS path used for steering.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub paths: Vec<Path>,
    pub tx_elements: usize,
    pub rx_elements: usize,
}

impl PathSet {
    pub fn validate(&self) -> Result<()> {
        if self.paths.is_empty() {
            return Err(Error::Domain("path set needs at least one path".into()));
        }
        if self.tx_elements == 0 || self.rx_elements == 0 {
            return Err(Error::Domain("antenna counts must be >= 1".into()));
        }
        Ok(())
    }

    pub fn los(&self) -> &Path {
        &self.paths[0]
    }

    /// Beam-steered Tx/Rx pair aligned with the LOS path.
    pub fn steered_beams(&self) -> Result<(BeamVector, BeamVector)> {
        self.validate()?;
        let los = self.los();
        Ok((
            ula_response(self.tx_elements, los.aod)?,
            ula_response(self.rx_elements, los.aoa)?,
        ))
    }
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols + col]
    }

    fn add_scaled_outer(&mut self, scale: Complex64, col_vec: &[Complex64], row_vec: &[Complex64]) {
        for (r, a) in col_vec.iter().enumerate() {
            let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (cell, b) in row.iter_mut().zip(row_vec) {
                *cell += scale * a * b.conj();
            }
        }
    }
}

/// `H = sqrt(MN/L) · Σ_l β_l · e_rx(aoa_l) · e_tx(aod_l)^H`, an `N × M` matrix.
pub fn channel_matrix(paths: &PathSet) -> Result<ComplexMatrix> {
    paths.validate()?;
    let (m, n) = (paths.tx_elements, paths.rx_elements);
    let norm = ((m * n) as f64 / paths.paths.len() as f64).sqrt();
    let mut h = ComplexMatrix::zeros(n, m);
    for p in &paths.paths {
        let e_rx = ula_response(n, p.aoa)?;
        let e_tx = ula_response(m, p.aod)?;
        h.add_scaled_outer(p.gain * norm, e_rx.as_slice(), e_tx.as_slice());
    }
    Ok(h)
}

/// `|r^H H w|^2`.
pub fn total_gain_exact(r: &BeamVector, h: &ComplexMatrix, w: &BeamVector) -> Result<f64> {
    if r.len() != h.rows() {
        return Err(Error::DimensionMismatch {
            expected: h.rows(),
            actual: r.len(),
        });
    }
    if w.len() != h.cols() {
        return Err(Error::DimensionMismatch {
            expected: h.cols(),
            actual: w.len(),
        });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (row, rn) in r.as_slice().iter().enumerate() {
        let hw: Complex64 = (0..h.cols())
            .map(|col| h.get(row, col) * w.as_slice()[col])
            .sum();
        acc += rn.conj() * hw;
    }
    Ok(acc.norm_sqr())
}
