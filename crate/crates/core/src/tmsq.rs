//! Closed-form model of a single nondegenerate two-mode squeezer (Josephson
//! mixer): ideal and lossy covariance matrices, pump-phase sweeps of the EPR
//! variances, dynamical bandwidth, and the which-path eraser limit.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Working-point configuration of one Josephson mixer.
///
/// Linewidths are stored as `gamma/2pi` in Hz. Output-path power
/// transmissions `alpha_bar` (mode a) and `beta_bar` (mode b) model the
/// losses after the device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JmConfig {
    pub f_a_hz: f64,
    pub f_b_hz: f64,
    pub gain_db: f64,
    pub pump_phase_rad: f64,
    pub gamma_a_hz: f64,
    pub gamma_b_hz: f64,
    pub alpha_bar: f64,
    pub beta_bar: f64,
}

impl Default for JmConfig {
    /// JM1 working point: f_a = 7.231 GHz, f_b = 9.695 GHz, linewidths
    /// 103/78 MHz, 4 dB gain, no output loss.
    fn default() -> Self {
        Self {
            f_a_hz: 7.231e9,
            f_b_hz: 9.695e9,
            gain_db: 4.0,
            pump_phase_rad: 0.0,
            gamma_a_hz: 103e6,
            gamma_b_hz: 78e6,
            alpha_bar: 1.0,
            beta_bar: 1.0,
        }
    }
}

impl JmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.f_b_hz <= self.f_a_hz {
            return Err(CoreError::InvalidSweep(format!(
                "f_b ({}) must exceed f_a ({})",
                self.f_b_hz, self.f_a_hz
            )));
        }
        if self.gamma_a_hz <= 0.0 || self.gamma_b_hz <= 0.0 {
            return Err(CoreError::OutOfRange {
                name: "linewidth",
                value: self.gamma_a_hz.min(self.gamma_b_hz),
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        if self.gain_db < 0.0 {
            return Err(CoreError::NegativeGainDb(self.gain_db));
        }
        for (name, v) in [("alpha_bar", self.alpha_bar), ("beta_bar", self.beta_bar)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(CoreError::OutOfRange {
                    name,
                    value: v,
                    lo: 0.0,
                    hi: 1.0,
                });
            }
        }
        Ok(())
    }

    pub fn squeeze_parameter(&self) -> Result<f64> {
        crate::db::gain_db_to_r(self.gain_db)
    }
}

/// Ideal two-mode-squeezed vacuum covariance:
/// `1/4 [cosh 2r on the diagonal, +-sinh 2r on the x/p cross entries]`.
pub fn ideal_tmsq_cov(r: f64) -> DMatrix<f64> {
    let c = (2.0 * r).cosh() / 4.0;
    let s = (2.0 * r).sinh() / 4.0;
    let mut v = DMatrix::zeros(4, 4);
    for i in 0..4 {
        v[(i, i)] = c;
    }
    v[(0, 2)] = s;
    v[(2, 0)] = s;
    v[(1, 3)] = -s;
    v[(3, 1)] = -s;
    v
}

/// Two-mode-squeezed vacuum covariance after asymmetric output loss:
/// diagonals `(eta cosh 2r + (1 - eta))/4`, cross `sqrt(ab bb) sinh 2r / 4`.
pub fn lossy_tmsq_cov(r: f64, alpha_bar: f64, beta_bar: f64) -> Result<DMatrix<f64>> {
    for t in [alpha_bar, beta_bar] {
        if !(0.0..=1.0).contains(&t) {
            return Err(CoreError::InvalidTransmission(t));
        }
    }
    let c = (2.0 * r).cosh();
    let s = (2.0 * r).sinh();
    let da = (alpha_bar * c + (1.0 - alpha_bar)) / 4.0;
    let db = (beta_bar * c + (1.0 - beta_bar)) / 4.0;
    let cr = (alpha_bar * beta_bar).sqrt() * s / 4.0;
    let mut v = DMatrix::zeros(4, 4);
    v[(0, 0)] = da;
    v[(1, 1)] = da;
    v[(2, 2)] = db;
    v[(3, 3)] = db;
    v[(0, 2)] = cr;
    v[(2, 0)] = cr;
    v[(1, 3)] = -cr;
    v[(3, 1)] = -cr;
    Ok(v)
}

/// EPR variances versus analysis phase `phi` (measured relative to the pump
/// phase, so the squeezed minimum sits at `phi = 0 mod 2pi`):
/// `Var[x-](phi) = V11 + V33 - 2 V13 cos(phi)` and the orthogonal combination
/// with the opposite sign. At the extremes these reduce to the asymmetric-loss
/// closed forms.
pub fn epr_variance_vs_phase(
    r: f64,
    alpha_bar: f64,
    beta_bar: f64,
    phi: f64,
) -> Result<(f64, f64)> {
    let v = lossy_tmsq_cov(r, alpha_bar, beta_bar)?;
    let (v11, v33, v13) = (v[(0, 0)], v[(2, 2)], v[(0, 2)]);
    Ok((
        v11 + v33 - 2.0 * v13 * phi.cos(),
        v11 + v33 + 2.0 * v13 * phi.cos(),
    ))
}

/// Squeezing (minimum) of `Var[x-]` under asymmetric loss, direct scalar
/// evaluation of the closed form.
pub fn asy_loss_var_minus(r: f64, alpha_bar: f64, beta_bar: f64) -> f64 {
    let sum = (alpha_bar.sqrt() + beta_bar.sqrt()).powi(2);
    let diff = (alpha_bar.sqrt() - beta_bar.sqrt()).powi(2);
    0.5 * ((1.0 - 0.5 * (alpha_bar + beta_bar))
        + (-2.0 * r).exp() / 4.0 * sum
        + (2.0 * r).exp() / 4.0 * diff)
}

/// Antisqueezing (maximum) of `Var[x+]` under asymmetric loss.
pub fn asy_loss_var_plus(r: f64, alpha_bar: f64, beta_bar: f64) -> f64 {
    let sum = (alpha_bar.sqrt() + beta_bar.sqrt()).powi(2);
    let diff = (alpha_bar.sqrt() - beta_bar.sqrt()).powi(2);
    0.5 * ((1.0 - 0.5 * (alpha_bar + beta_bar))
        + (2.0 * r).exp() / 4.0 * sum
        + (-2.0 * r).exp() / 4.0 * diff)
}

/// Symmetric-loss closed form for the logarithmic negativity:
/// `E_N = -log2[e^{-2r} + alpha (1 - e^{-2r})]` with `alpha = 1 - alpha_bar`.
pub fn en_symmetric_loss(r: f64, alpha: f64) -> f64 {
    (-((-2.0 * r).exp() + alpha * (1.0 - (-2.0 * r).exp())).log2()).max(0.0)
}

/// Symmetric-loss closed form for the purity:
/// `mu = 1 / (1 + 2 alpha_bar alpha (cosh 2r - 1))`.
pub fn mu_symmetric_loss(r: f64, alpha: f64) -> f64 {
    1.0 / (1.0 + 2.0 * (1.0 - alpha) * alpha * ((2.0 * r).cosh() - 1.0))
}

/// Large-r asymmetric-loss approximation of the logarithmic negativity, in
/// terms of the mean loss `eps = (alpha + beta)/2` and asymmetry
/// `delta = (alpha - beta)/(alpha + beta)`.
pub fn en_asymmetric_loss_approx(r: f64, eps: f64, delta: f64) -> f64 {
    let e2 = (-2.0 * r).exp();
    -((e2 + eps * (1.0 - e2) + r.tanh() * eps * eps * delta * delta).log2())
}

/// Large-r asymmetric-loss approximation of the purity.
pub fn mu_asymmetric_loss_approx(r: f64, eps: f64, delta: f64) -> f64 {
    let main = 1.0 / (1.0 + 2.0 * (1.0 - eps) * eps * ((2.0 * r).cosh() - 1.0));
    let corr = (eps * delta / (2.0 * (1.0 - eps) * eps)).powi(2) * (-2.0 * r).exp();
    main - corr
}

/// Dynamical bandwidth `B = gamma_0 / sqrt(G)` in Hz, with
/// `gamma_0 = 2 ga gb / (ga + gb)` from the per-mode linewidths (`gamma/2pi`
/// values, Hz).
pub fn dynamical_bandwidth_hz(gamma_a_hz: f64, gamma_b_hz: f64, g_linear: f64) -> Result<f64> {
    if gamma_a_hz <= 0.0 || gamma_b_hz <= 0.0 {
        return Err(CoreError::OutOfRange {
            name: "linewidth",
            value: gamma_a_hz.min(gamma_b_hz),
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    if g_linear < 1.0 {
        return Err(CoreError::OutOfRange {
            name: "gain",
            value: g_linear,
            lo: 1.0,
            hi: f64::INFINITY,
        });
    }
    let gamma0 = 2.0 * gamma_a_hz * gamma_b_hz / (gamma_a_hz + gamma_b_hz);
    Ok(gamma0 / g_linear.sqrt())
}

/// Input-referred output quadratures of a phase-preserving amplifier used as
/// a which-path eraser:
/// `I~ = I_a + sqrt((G-1)/G) I_b`, `Q~ = Q_a - sqrt((G-1)/G) Q_b`.
/// As `G -> inf` only the symmetric combinations `(I_a + I_b, Q_a - Q_b)`
/// survive, erasing which-path information.
pub fn eraser_referred_quadratures(
    g_j: f64,
    input: (f64, f64, f64, f64),
) -> Result<(f64, f64)> {
    if g_j < 1.0 {
        return Err(CoreError::OutOfRange {
            name: "eraser gain",
            value: g_j,
            lo: 1.0,
            hi: f64::INFINITY,
        });
    }
    let (i_a, q_a, i_b, q_b) = input;
    let w = ((g_j - 1.0) / g_j).sqrt();
    Ok((i_a + w * i_b, q_a - w * q_b))
}
