//! Entanglement and squeezing figures of merit for two-mode covariance
//! matrices: EPR (Duan) variances, Simon's partial-transpose criterion,
//! logarithmic negativity, entanglement of formation, purity and ebit rate.
//!
//! All formulas take 4x4 covariance matrices in the vacuum = 1/4 convention.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{CoreError, Result};

/// Discriminant clamp for the smallest partially-transposed symplectic
/// eigenvalue: tiny negatives from rounding are zeroed, anything worse is an
/// invalid covariance.
const NU_CLAMP: f64 = 1e-12;

/// Fractional asymmetry `|V11 - V33| / (V11 + V33)` above which the symmetric
/// entanglement-of-formation formula is not trusted.
const EOF_SYMMETRY_LIMIT: f64 = 0.05;

/// Standard-form parameters extracted from a two-mode covariance matrix:
/// `V11` (mode-a variance), `V33` (mode-b variance) and the rotation-invariant
/// cross amplitude `V13 = sqrt(V13~^2 + V14~^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardForm {
    pub v11: f64,
    pub v33: f64,
    pub v13: f64,
}

fn check_4x4(v: &DMatrix<f64>) -> Result<()> {
    if v.nrows() != 4 || v.ncols() != 4 {
        return Err(CoreError::InvalidCovariance(format!(
            "expected a 4x4 two-mode covariance, got {}x{}",
            v.nrows(),
            v.ncols()
        )));
    }
    Ok(())
}

/// Reduce a two-mode covariance matrix to standard form. Mode variances are
/// averaged over their quadratures and the cross block is collapsed to its
/// rotation-invariant amplitude, which is equivalent to applying the local
/// phase rotation that zeroes the X-component of the cross block.
pub fn standard_form(v: &DMatrix<f64>) -> Result<StandardForm> {
    check_4x4(v)?;
    let v11 = 0.5 * (v[(0, 0)] + v[(1, 1)]);
    let v33 = 0.5 * (v[(2, 2)] + v[(3, 3)]);
    let vz = 0.5 * (v[(0, 2)] - v[(1, 3)]);
    let vx = 0.5 * (v[(0, 3)] + v[(1, 2)]);
    Ok(StandardForm {
        v11,
        v33,
        v13: vz.hypot(vx),
    })
}

/// EPR variances `Delta-+ = 2 (V11 + V33 -+ 2 V13)`. Entanglement is
/// witnessed when `Delta- < 1` (Duan criterion).
pub fn duan_epr(v: &DMatrix<f64>) -> Result<(f64, f64)> {
    let sf = standard_form(v)?;
    Ok((
        2.0 * (sf.v11 + sf.v33 - 2.0 * sf.v13),
        2.0 * (sf.v11 + sf.v33 + 2.0 * sf.v13),
    ))
}

/// EPR variance in dB relative to the separability bound 1
/// (-5 dB means `Delta = 10^-0.5`).
pub fn duan_db(delta: f64) -> f64 {
    10.0 * delta.log10()
}

/// Both sides of Simon's inequality
/// `16 (V11 V33 - V13^2)^2 >= (V11 + V33) + 2 V13^2 - 1/16`.
pub fn simon_sides(v: &DMatrix<f64>) -> Result<(f64, f64)> {
    let sf = standard_form(v)?;
    let lhs = 16.0 * (sf.v11 * sf.v33 - sf.v13 * sf.v13).powi(2);
    let rhs = (sf.v11 + sf.v33) + 2.0 * sf.v13 * sf.v13 - 1.0 / 16.0;
    Ok((lhs, rhs))
}

/// Simon variable `Delta_S = lhs - rhs`; increasingly negative values indicate
/// stronger entanglement. Note the literal expression is negative even for
/// vacuum (-0.375), so only relative comparisons are meaningful; both sides of
/// the inequality are available through [`simon_sides`].
pub fn simon_criterion(v: &DMatrix<f64>) -> Result<f64> {
    let (lhs, rhs) = simon_sides(v)?;
    Ok(lhs - rhs)
}

/// Smallest symplectic eigenvalue of the partially transposed covariance:
/// `nu- = sqrt((Dt - sqrt(Dt^2 - 4 det V))/2)` with
/// `Dt = det Vaa + det Vbb - 2 det Vab`.
pub fn nu_minus(v: &DMatrix<f64>) -> Result<f64> {
    check_4x4(v)?;
    let det2 = |r: usize, c: usize| -> f64 {
        v[(r, c)] * v[(r + 1, c + 1)] - v[(r, c + 1)] * v[(r + 1, c)]
    };
    let dt = det2(0, 0) + det2(2, 2) - 2.0 * det2(0, 2);
    let det = v.determinant();
    let mut disc = dt * dt - 4.0 * det;
    if disc < 0.0 {
        if disc < -NU_CLAMP {
            return Err(CoreError::InvalidCovariance(format!(
                "negative discriminant {disc:.3e} in nu_minus"
            )));
        }
        disc = 0.0;
    }
    let mut inner = 0.5 * (dt - disc.sqrt());
    if inner < 0.0 {
        if inner < -NU_CLAMP {
            return Err(CoreError::InvalidCovariance(format!(
                "negative nu^2 = {inner:.3e}"
            )));
        }
        inner = 0.0;
    }
    Ok(inner.sqrt())
}

/// Logarithmic negativity `E_N = max(0, -log2(4 nu-))`.
pub fn log_negativity(v: &DMatrix<f64>) -> Result<f64> {
    let nu = nu_minus(v)?;
    Ok((-(4.0 * nu).log2()).max(0.0))
}

/// Binary-entropy-like function entering the entanglement of formation.
pub fn eof_h(nu_tilde: f64) -> Result<f64> {
    if nu_tilde <= 0.0 {
        return Err(CoreError::InvalidCovariance(format!(
            "nu~ = {nu_tilde} must be positive"
        )));
    }
    let plus = (1.0 + nu_tilde).powi(2) / (4.0 * nu_tilde);
    let minus = (1.0 - nu_tilde).powi(2) / (4.0 * nu_tilde);
    let x_log2_x = |x: f64| if x > 0.0 { x * x.log2() } else { 0.0 };
    Ok(x_log2_x(plus) - x_log2_x(minus))
}

/// Entanglement of formation for (near-)symmetric two-mode Gaussian states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Eof {
    Value(f64),
    /// The closed form assumes `V11 = V33`; outside a 5% asymmetry window the
    /// number would be silently wrong, so it is reported unavailable instead.
    AsymmetricUnavailable { v11: f64, v33: f64 },
}

impl Eof {
    pub fn value(&self) -> Option<f64> {
        match self {
            Eof::Value(x) => Some(*x),
            Eof::AsymmetricUnavailable { .. } => None,
        }
    }
}

/// `E_F = max(0, h(4 nu-))`, gated on `|V11 - V33| < 0.05 (V11 + V33)`.
pub fn entanglement_of_formation(v: &DMatrix<f64>) -> Result<Eof> {
    let sf = standard_form(v)?;
    if (sf.v11 - sf.v33).abs() >= EOF_SYMMETRY_LIMIT * (sf.v11 + sf.v33) {
        return Ok(Eof::AsymmetricUnavailable {
            v11: sf.v11,
            v33: sf.v33,
        });
    }
    let nu_tilde = 4.0 * nu_minus(v)?;
    Ok(Eof::Value(eof_h(nu_tilde)?.max(0.0)))
}

/// Purity `mu = 1 / (16 sqrt(det V))`, equal to 1 for pure states.
pub fn purity(v: &DMatrix<f64>) -> Result<f64> {
    check_4x4(v)?;
    let det = v.determinant();
    if det <= 0.0 {
        return Err(CoreError::InvalidCovariance(format!(
            "non-positive determinant {det:.3e} in purity"
        )));
    }
    Ok(1.0 / (16.0 * det.sqrt()))
}

/// Entanglement bit rate `R = B x E_F` in ebit/s.
pub fn ebit_rate(e_f: f64, bandwidth_hz: f64) -> f64 {
    e_f * bandwidth_hz
}

/// Full set of two-mode entanglement figures, with the JSON field names used
/// by the report files.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntanglementReport {
    pub delta_epr_minus: f64,
    pub delta_epr_plus: f64,
    pub delta_epr_minus_db: f64,
    pub delta_epr_plus_db: f64,
    pub delta_simon: f64,
    pub nu_minus: f64,
    pub e_n: f64,
    /// `None` when the covariance is too asymmetric for the symmetric closed
    /// form; `eof_note` then explains why.
    pub e_f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eof_note: Option<String>,
    pub purity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ebit_rate_hz: Option<f64>,
}

/// Evaluate every measure on one covariance matrix. `bandwidth_hz` enables the
/// ebit rate (requires an available `e_f`).
pub fn report(v: &DMatrix<f64>, bandwidth_hz: Option<f64>) -> Result<EntanglementReport> {
    let (dm, dp) = duan_epr(v)?;
    let nu = nu_minus(v)?;
    let e_n = log_negativity(v)?;
    let eof = entanglement_of_formation(v)?;
    let (e_f, eof_note) = match eof {
        Eof::Value(x) => (Some(x), None),
        Eof::AsymmetricUnavailable { v11, v33 } => (
            None,
            Some(format!(
                "entanglement of formation unavailable: V11 = {v11:.6} vs V33 = {v33:.6} exceeds the 5% symmetry window"
            )),
        ),
    };
    Ok(EntanglementReport {
        delta_epr_minus: dm,
        delta_epr_plus: dp,
        delta_epr_minus_db: duan_db(dm),
        delta_epr_plus_db: duan_db(dp),
        delta_simon: simon_criterion(v)?,
        nu_minus: nu,
        e_n,
        e_f,
        eof_note,
        purity: purity(v)?,
        ebit_rate_hz: match (e_f, bandwidth_hz) {
            (Some(f), Some(b)) => Some(ebit_rate(f, b)),
            _ => None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{two_mode_squeeze, GaussianMap, GaussianState};
    use approx::assert_abs_diff_eq;

    fn vacuum_cov() -> DMatrix<f64> {
        DMatrix::identity(4, 4) * 0.25
    }

    fn lossless_cov(r: f64) -> DMatrix<f64> {
        two_mode_squeeze(r, 0.0, (0, 1), 2)
            .unwrap()
            .apply(&GaussianState::vacuum(2))
            .unwrap()
            .cov()
            .clone()
    }

    #[test]
    fn vacuum_sits_on_the_separability_boundary() {
        let (dm, dp) = duan_epr(&vacuum_cov()).unwrap();
        assert_abs_diff_eq!(dm, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dp, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(nu_minus(&vacuum_cov()).unwrap(), 0.25, epsilon = 1e-15);
        assert_eq!(log_negativity(&vacuum_cov()).unwrap(), 0.0);
        assert_abs_diff_eq!(purity(&vacuum_cov()).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn duan_at_ln2_squeeze() {
        // Delta- = e^{-2r} = 1/4 exactly, i.e. -6.02 dB
        let (dm, _) = duan_epr(&lossless_cov(2f64.ln())).unwrap();
        assert_abs_diff_eq!(dm, 0.25, epsilon = 1e-13);
        assert_abs_diff_eq!(duan_db(dm), -6.020_599_913_279_624, epsilon = 1e-9);
    }

    #[test]
    fn duan_handles_raw_pump_phase() {
        // with phi_p != 0 the cross block rotates but the invariant amplitude
        // (and hence Delta-+) is unchanged
        let r = 0.8;
        for phi in [0.0, 0.7, 2.4] {
            let cov = two_mode_squeeze(r, phi, (0, 1), 2)
                .unwrap()
                .apply(&GaussianState::vacuum(2))
                .unwrap()
                .cov()
                .clone();
            let (dm, _) = duan_epr(&cov).unwrap();
            assert_abs_diff_eq!(dm, (-2.0 * r).exp(), epsilon = 1e-12);
        }
    }

    #[test]
    fn simon_vacuum_value_and_ordering() {
        // literal formula at vacuum: 1/16 - 1/2 + 1/16 = -0.375
        let ds_vac = simon_criterion(&vacuum_cov()).unwrap();
        assert_abs_diff_eq!(ds_vac, -0.375, epsilon = 1e-15);
        // entangled states sit strictly below the vacuum value
        let ds_sq = simon_criterion(&lossless_cov(2f64.ln())).unwrap();
        assert!(ds_sq < ds_vac);
        let (lhs, rhs) = simon_sides(&vacuum_cov()).unwrap();
        assert_abs_diff_eq!(lhs - rhs, ds_vac, epsilon = 1e-15);
    }

    #[test]
    fn log_negativity_lossless_four_db() {
        let r = crate::db::gain_db_to_r(4.0).unwrap();
        let e_n = log_negativity(&lossless_cov(r)).unwrap();
        assert_abs_diff_eq!(e_n, 2.0 * r / std::f64::consts::LN_2, epsilon = 1e-10);
        assert_abs_diff_eq!(e_n, 2.985_737_924_115_46, epsilon = 1e-9);
    }

    #[test]
    fn nu_minus_rejects_garbage() {
        let mut v = vacuum_cov();
        v[(0, 2)] = 5.0;
        v[(2, 0)] = 5.0;
        assert!(nu_minus(&v).is_err());
    }

    #[test]
    fn eof_h_values() {
        assert_abs_diff_eq!(eof_h(1.0).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eof_h(0.5).unwrap(), 0.566_165_626_622_601, epsilon = 1e-12);
        assert!(eof_h(0.0).is_err());
    }

    #[test]
    fn eof_asymmetric_is_unavailable() {
        // asymmetric-loss covariance: V11 != V33 well past the 5% window
        let v = crate::tmsq::lossy_tmsq_cov(1.0, 0.62, 1.0).unwrap();
        match entanglement_of_formation(&v).unwrap() {
            Eof::AsymmetricUnavailable { v11, v33 } => assert!((v11 - v33).abs() > 0.0),
            Eof::Value(_) => panic!("expected unavailable EOF"),
        }
        let rep = report(&v, Some(56e6)).unwrap();
        assert!(rep.e_f.is_none());
        assert!(rep.eof_note.is_some());
        assert!(rep.ebit_rate_hz.is_none());
    }

    #[test]
    fn purity_symmetric_loss_example() {
        // alpha = beta = 0.5, r = ln 2: mu = 1/(1 + 0.5 (17/8 - 1)) = 0.64
        let v = crate::tmsq::lossy_tmsq_cov(2f64.ln(), 0.5, 0.5).unwrap();
        assert_abs_diff_eq!(purity(&v).unwrap(), 0.64, epsilon = 1e-12);
    }

    #[test]
    fn purity_lossless_is_one_for_any_squeeze() {
        for r in [0.0, 0.5, 1.3, 2.2] {
            assert_abs_diff_eq!(purity(&lossless_cov(r)).unwrap(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn ebit_rate_products() {
        assert_abs_diff_eq!(ebit_rate(1.25, 56e6), 70e6, epsilon = 1e-3);
        assert_abs_diff_eq!(ebit_rate(0.21, 32e6), 6.72e6, epsilon = 1e-3);
        assert_eq!(ebit_rate(0.0, 56e6), 0.0);
    }

    #[test]
    fn report_serializes_fixed_field_names() {
        let rep = report(&lossless_cov(0.6), Some(56e6)).unwrap();
        let json = serde_json::to_value(&rep).unwrap();
        for key in [
            "delta_epr_minus_db",
            "e_n",
            "e_f",
            "purity",
            "nu_minus",
            "ebit_rate_hz",
        ] {
            assert!(json.get(key).is_some(), "missing field {key}");
        }
    }
}
