//! Decibel plumbing. All dB values are power dB: `ratio = 10^(dB/10)`,
//! including squeezing levels. Gain maps onto the squeeze parameter through
//! `G = cosh^2(r)`.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// What a dB number refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DbKind {
    PowerGain,
    SqueezingLevel,
    Loss,
}

/// A dB value tagged with its meaning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbValue {
    pub value_db: f64,
    pub kind: DbKind,
}

impl DbValue {
    pub fn new(value_db: f64, kind: DbKind) -> Self {
        Self { value_db, kind }
    }

    /// Linear power ratio `10^(dB/10)`.
    pub fn ratio(&self) -> f64 {
        db_to_ratio(self.value_db)
    }
}

pub fn db_to_ratio(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn ratio_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Squeeze parameter from a power gain in dB: `r = acosh(sqrt(10^(dB/10)))`.
pub fn gain_db_to_r(gain_db: f64) -> Result<f64> {
    if gain_db < 0.0 {
        return Err(CoreError::NegativeGainDb(gain_db));
    }
    Ok(db_to_ratio(gain_db).sqrt().acosh())
}

/// Power gain in dB from a squeeze parameter: `10 log10(cosh^2 r)`.
pub fn r_to_gain_db(r: f64) -> f64 {
    ratio_to_db(r.cosh().powi(2))
}

pub fn deg_to_rad(deg: f64) -> f64 {
    deg.to_radians()
}

pub fn rad_to_deg(rad: f64) -> f64 {
    rad.to_degrees()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_db_is_zero_squeeze() {
        assert_eq!(gain_db_to_r(0.0).unwrap(), 0.0);
    }

    #[test]
    fn four_db_squeeze_parameter() {
        assert_abs_diff_eq!(gain_db_to_r(4.0).unwrap(), 1.034_777_911_995_766, epsilon = 1e-12);
    }

    #[test]
    fn three_db_ratio() {
        assert_abs_diff_eq!(db_to_ratio(3.0), 1.995_262_314_968_88, epsilon = 1e-12);
    }

    #[test]
    fn round_trips() {
        for db in [0.0, 0.7, 3.0, 4.0, 11.5] {
            assert_abs_diff_eq!(ratio_to_db(db_to_ratio(db)), db, epsilon = 1e-12);
            let r = gain_db_to_r(db).unwrap();
            assert_abs_diff_eq!(r_to_gain_db(r), db, epsilon = 1e-10);
        }
    }

    #[test]
    fn negative_gain_is_rejected() {
        assert!(matches!(
            gain_db_to_r(-0.5),
            Err(CoreError::NegativeGainDb(_))
        ));
    }
}
