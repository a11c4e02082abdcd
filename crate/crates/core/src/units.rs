//! dB / linear conversions. Powers are carried in watts internally.

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[inline]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Returns `-inf` for zero power.
#[inline]
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Wraps an angle to `[0, 2π)`.
#[inline]
pub fn wrap_2pi(angle: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let a = angle.rem_euclid(tau);
    // rem_euclid can round up to exactly tau for tiny negative inputs
    if a >= tau {
        0.0
    } else {
        a
    }
}

/// Wraps an angle to `[-π, π]`.
#[inline]
pub fn wrap_pi(angle: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let a = (angle + PI).rem_euclid(TAU) - PI;
    if a < -PI {
        a + TAU
    } else {
        a
    }
}
