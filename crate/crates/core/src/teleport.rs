//! Teleportation circuit for coherent microwave states built from two
//! nondegenerate two-mode squeezers.
//!
//! The circuit is modeled as a 3-path, 6-quadrature operator sequence
//! `T = C L2 S2 L1 S1` with added noise
//! `A = C L2 S2 A1 S2^T L2^T C^T + C A2 C^T`:
//!
//! * path 0 — Entangler mode b, sent to Bob through the directional coupler,
//! * path 1 — Entangler mode a, sent to Alice (the which-path eraser),
//! * path 2 — the input coherent state at Alice's port b; after amplification
//!   it becomes the analog feedforward displacing Bob's mode.
//!
//! Teleportation succeeds when the feedforward channel has unity transmission
//! `sqrt(beta_c (1-eps6)) cosh(r_A) = 1` and the pump phases interfere
//! destructively (`phi_E - phi_A` at odd multiples of pi).

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::gaussian::{directional_coupler, two_mode_squeeze, GaussianState};

/// Coherent drive: mean photon number and phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentInput {
    pub n_photons: f64,
    pub phase_rad: f64,
}

impl CoherentInput {
    pub fn vacuum() -> Self {
        Self {
            n_photons: 0.0,
            phase_rad: 0.0,
        }
    }

    pub fn mean(&self) -> Vector2<f64> {
        Vector2::new(
            self.n_photons.sqrt() * self.phase_rad.cos(),
            self.n_photons.sqrt() * self.phase_rad.sin(),
        )
    }
}

/// Full teleporter configuration.
///
/// `path_losses` are the power losses `eps_1..eps_6` of the loss stages `L1`
/// (entries 1-3, before Alice's squeezer) and `L2` (entries 4-6, after it).
/// The experiment's mapping is `eps1 = beta` (Entangler to Bob), `eps2 =
/// alpha` (Entangler to Alice), `eps6 = beta_f` (feedforward); `eps3..eps5`
/// are normally zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeleportConfig {
    pub r_e: f64,
    pub r_a: f64,
    pub phi_e: f64,
    pub phi_a: f64,
    pub path_losses: [f64; 6],
    pub beta_c: f64,
    pub n_th_a: f64,
    pub n_th_b: f64,
    pub input: CoherentInput,
}

impl Default for TeleportConfig {
    fn default() -> Self {
        Self {
            r_e: 0.0,
            r_a: 0.0,
            phi_e: 0.0,
            phi_a: std::f64::consts::PI,
            path_losses: [0.0; 6],
            beta_c: 0.1,
            n_th_a: 0.0,
            n_th_b: 0.0,
            input: CoherentInput::vacuum(),
        }
    }
}

impl TeleportConfig {
    pub fn validate(&self) -> Result<()> {
        for (i, &eps) in self.path_losses.iter().enumerate() {
            if !(0.0..=1.0).contains(&eps) {
                return Err(CoreError::OutOfRange {
                    name: match i {
                        0 => "eps1",
                        1 => "eps2",
                        2 => "eps3",
                        3 => "eps4",
                        4 => "eps5",
                        _ => "eps6",
                    },
                    value: eps,
                    lo: 0.0,
                    hi: 1.0,
                });
            }
        }
        if !(0.0..=1.0).contains(&self.beta_c) {
            return Err(CoreError::InvalidCoupling(self.beta_c));
        }
        if self.r_e < 0.0 {
            return Err(CoreError::NegativeSqueeze(self.r_e));
        }
        if self.r_a < 0.0 {
            return Err(CoreError::NegativeSqueeze(self.r_a));
        }
        for n in [self.n_th_a, self.n_th_b, self.input.n_photons] {
            if n < 0.0 {
                return Err(CoreError::NegativeOccupation(n));
            }
        }
        Ok(())
    }

    /// Feedforward transmission loss `1 - eps6`.
    pub fn beta_f_bar(&self) -> f64 {
        1.0 - self.path_losses[5]
    }

    /// `k = beta_c cosh^2(r_A)`: the coupler-referred gain of the classical
    /// channel, ignoring feedforward loss.
    pub fn k_coupler(&self) -> f64 {
        self.beta_c * self.r_a.cosh().powi(2)
    }

    /// `k = beta_c (1-eps6) cosh^2(r_A)`: the loss-aware effective
    /// feedforward gain; this is the quantity the unity condition fixes.
    pub fn k_feedforward(&self) -> f64 {
        self.beta_c * self.beta_f_bar() * self.r_a.cosh().powi(2)
    }

    pub fn is_unity_gain(&self) -> bool {
        (self.k_feedforward() - 1.0).abs() < 1e-9
    }

    /// Required `cosh(r_A)` for unity feedforward transmission.
    pub fn required_cosh_r_a(&self) -> f64 {
        1.0 / (self.beta_c * self.beta_f_bar()).sqrt()
    }

    /// Solve `sqrt(beta_c (1-eps6)) cosh(r_A) = 1` for `r_A`.
    pub fn with_unity_feedforward(mut self) -> Result<Self> {
        let product = self.beta_c * self.beta_f_bar();
        if product <= 0.0 {
            return Err(CoreError::UnityFeedforwardUnsatisfiable(f64::INFINITY));
        }
        self.r_a = self.required_cosh_r_a().acosh();
        Ok(self)
    }
}

/// Transfer matrix and added-noise matrix of the whole sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct TeleportSequence {
    pub transfer: DMatrix<f64>,
    pub added_noise: DMatrix<f64>,
}

fn loss_amplitude_matrix(eps: &[f64; 3]) -> DMatrix<f64> {
    let mut l = DMatrix::identity(6, 6);
    for (k, &e) in eps.iter().enumerate() {
        let t = (1.0 - e).sqrt();
        l[(2 * k, 2 * k)] = t;
        l[(2 * k + 1, 2 * k + 1)] = t;
    }
    l
}

/// Added-noise matrix of one loss stage: `(1 + 2 n_th) eps / 4` per
/// quadrature, with path occupations `(n_b, n_a, n_b)`.
fn loss_noise_matrix(eps: &[f64; 3], n_th_a: f64, n_th_b: f64) -> DMatrix<f64> {
    let occ = [n_th_b, n_th_a, n_th_b];
    let mut a = DMatrix::zeros(6, 6);
    for k in 0..3 {
        let val = (1.0 + 2.0 * occ[k]) * eps[k] / 4.0;
        a[(2 * k, 2 * k)] = val;
        a[(2 * k + 1, 2 * k + 1)] = val;
    }
    a
}

/// Input covariance of the three thermal/vacuum ports, `(b, a, b)` ordering.
fn input_cov(n_th_a: f64, n_th_b: f64) -> DMatrix<f64> {
    loss_noise_matrix(&[1.0, 1.0, 1.0], n_th_a, n_th_b)
}

/// Build the 6x6 transfer matrix `T = C L2 S2 L1 S1` and added-noise matrix
/// `A` for a configuration.
pub fn build_teleport_sequence(cfg: &TeleportConfig) -> Result<TeleportSequence> {
    cfg.validate()?;
    let s1 = two_mode_squeeze(cfg.r_e, cfg.phi_e, (0, 1), 3)?;
    let s2 = two_mode_squeeze(cfg.r_a, cfg.phi_a, (1, 2), 3)?;
    let coupler = directional_coupler(cfg.beta_c, (0, 2), 3)?;

    let eps1: [f64; 3] = cfg.path_losses[0..3].try_into().unwrap();
    let eps2: [f64; 3] = cfg.path_losses[3..6].try_into().unwrap();
    let l1 = loss_amplitude_matrix(&eps1);
    let l2 = loss_amplitude_matrix(&eps2);
    let a1 = loss_noise_matrix(&eps1, cfg.n_th_a, cfg.n_th_b);
    let a2 = loss_noise_matrix(&eps2, cfg.n_th_a, cfg.n_th_b);

    let c = coupler.matrix();
    let transfer = c * &l2 * s2.matrix() * &l1 * s1.matrix();
    let front = c * &l2 * s2.matrix();
    let added = &front * a1 * front.transpose() + c * a2 * c.transpose();
    Ok(TeleportSequence {
        transfer,
        added_noise: crate::gaussian::symmetrize(added),
    })
}

/// Input state vector `c0`: displacement on path 2 only.
fn input_vector(cfg: &TeleportConfig) -> DVector<f64> {
    let mut c0 = DVector::zeros(6);
    let mean = cfg.input.mean();
    c0[4] = mean[0];
    c0[5] = mean[1];
    c0
}

/// Result of running the circuit: the teleported single-mode state on path 0
/// and the reference input state on path 2 (after the first loss stage).
#[derive(Debug, Clone, PartialEq)]
pub struct TeleportOutput {
    pub teleported: GaussianState,
    pub input: GaussianState,
    pub full_mean: DVector<f64>,
    pub full_cov: DMatrix<f64>,
}

/// Run the full matrix pipeline: `c_tel = T c0`, `V_tel = T V0 T^T + A`.
pub fn teleported_state(cfg: &TeleportConfig) -> Result<TeleportOutput> {
    let seq = build_teleport_sequence(cfg)?;
    let v0 = input_cov(cfg.n_th_a, cfg.n_th_b);
    let c0 = input_vector(cfg);

    let full_mean = &seq.transfer * &c0;
    let full_cov = crate::gaussian::symmetrize(
        &seq.transfer * &v0 * seq.transfer.transpose() + &seq.added_noise,
    );

    // reference input: state on path 2 after S1 (which does not touch it) and
    // the first loss stage
    let s1 = two_mode_squeeze(cfg.r_e, cfg.phi_e, (0, 1), 3)?;
    let eps1: [f64; 3] = cfg.path_losses[0..3].try_into().unwrap();
    let l1 = loss_amplitude_matrix(&eps1);
    let in_chain = &l1 * s1.matrix();
    let c_in = &in_chain * &c0;
    let v_in = &in_chain * &v0 * in_chain.transpose()
        + loss_noise_matrix(&eps1, cfg.n_th_a, cfg.n_th_b);

    let pick = |mean: &DVector<f64>, cov: &DMatrix<f64>, path: usize| -> Result<GaussianState> {
        let m = DVector::from_column_slice(&[mean[2 * path], mean[2 * path + 1]]);
        let v = cov.view((2 * path, 2 * path), (2, 2)).into_owned();
        GaussianState::new(m, crate::gaussian::symmetrize(v))
    };

    Ok(TeleportOutput {
        teleported: pick(&full_mean, &full_cov, 0)?,
        input: pick(&c_in, &v_in, 2)?,
        full_mean,
        full_cov,
    })
}

/// Uhlmann fidelity between two single-mode Gaussian states:
/// `F = 1/2 exp[-b^T (V1+V2)^-1 b] / (sqrt(L + D) - sqrt(D))` with
/// `L = det(V1+V2)` and `D = 16 (det V1 - 1/16)(det V2 - 1/16)`, each factor
/// clamped at zero to absorb rounding on pure states.
pub fn gaussian_fidelity(state_in: &GaussianState, state_out: &GaussianState) -> Result<f64> {
    if state_in.n_modes() != 1 || state_out.n_modes() != 1 {
        return Err(CoreError::DimensionMismatch {
            op_modes: state_in.n_modes(),
            state_modes: state_out.n_modes(),
        });
    }
    let v1 = Matrix2::from_iterator(state_in.cov().iter().cloned());
    let v2 = Matrix2::from_iterator(state_out.cov().iter().cloned());
    let sum = v1 + v2;
    let lam = sum.determinant();
    if lam <= 0.0 {
        return Err(CoreError::DegenerateState(lam));
    }
    let inv = sum.try_inverse().ok_or(CoreError::DegenerateState(lam))?;
    let b = Vector2::new(
        state_in.mean()[0] - state_out.mean()[0],
        state_in.mean()[1] - state_out.mean()[1],
    );
    let quad = (b.transpose() * inv * b)[(0, 0)];
    // pure states have det V = 1/16 exactly; rounding puts the excess on
    // either side of zero and sqrt(Delta) would amplify +1e-17 into 1e-8, so
    // clamp each factor through a small dead zone
    let excess = |v: &Matrix2<f64>| -> f64 {
        let d = v.determinant() - 1.0 / 16.0;
        if d < 1e-12 {
            0.0
        } else {
            d
        }
    };
    let delta = 16.0 * excess(&v1) * excess(&v2);
    let f = 0.5 * (-quad).exp() / ((lam + delta).sqrt() - delta.sqrt());
    Ok(f.min(1.0))
}

/// Fidelity between the circuit input and the teleported output.
pub fn teleport_fidelity(cfg: &TeleportConfig) -> Result<f64> {
    let out = teleported_state(cfg)?;
    gaussian_fidelity(&out.input, &out.teleported)
}

/// Closed-form lossless fidelities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormFidelities {
    /// `1/(e^{-2 r_E} + 1)` — unity feedforward, vanishing coupling.
    pub f_q_lossless: f64,
    /// Classical bound 1/2 (unity feedforward, independent of the input).
    pub f_c_lossless: f64,
    /// Exact lossless fidelity at finite `k = beta_c cosh^2 r_A`.
    pub f_q_nonunity: f64,
    /// Classical (`r_E = 0`) fidelity at finite `k`, small-coupling form.
    pub f_c_nonunity: f64,
    pub k: f64,
    /// Small-coupling / large-eraser-gain validity flags for the nonunity
    /// closed forms.
    pub beta_c_is_small: bool,
    pub g_a_is_large: bool,
}

/// Exact lossless `C(r_E, k) = sqrt(det(V_in + V_tel))` at finite coupling.
pub fn c_of_r_k(r_e: f64, k: f64, beta_c: f64) -> f64 {
    let c2 = (2.0 * r_e).cosh();
    let s2 = (2.0 * r_e).sinh();
    0.25 * (1.0 + k + (1.0 - 2.0 * beta_c + k) * c2
        - 2.0 * (k - k * beta_c - beta_c + beta_c * beta_c).sqrt() * s2)
}

/// Closed-form fidelities for a configuration (lossless formulas; the path
/// losses in `cfg` are ignored here).
pub fn closed_form_fidelities(cfg: &TeleportConfig) -> ClosedFormFidelities {
    let k = cfg.k_coupler();
    let n_s = cfg.input.n_photons;
    let c = c_of_r_k(cfg.r_e, k, cfg.beta_c);
    let b_k = (k.sqrt() - 1.0).powi(2);
    ClosedFormFidelities {
        f_q_lossless: 1.0 / ((-2.0 * cfg.r_e).exp() + 1.0),
        f_c_lossless: 0.5,
        f_q_nonunity: (-n_s * b_k / c).exp() / (2.0 * c),
        f_c_nonunity: (-n_s * 2.0 * b_k / (1.0 + k)).exp() / (1.0 + k),
        k,
        beta_c_is_small: cfg.beta_c < 0.05,
        g_a_is_large: cfg.r_a.cosh().powi(2) > 10.0,
    }
}

/// Bob's output noise (symmetrized photon-number variance, vacuum = 1/2)
/// versus the Entangler-Alice pump-phase difference.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseCurve {
    pub phi_ea: Vec<f64>,
    pub photons: Vec<f64>,
    /// Whether the unity-feedforward assumption behind the closed form holds
    /// for this configuration.
    pub unity_feedforward_satisfied: bool,
}

/// Bob noise at one phase point. `alpha_bar`/`beta_bar` are the entangled-path
/// transmissions `1 - eps2` and `1 - eps1`.
pub fn bob_noise_photons(cfg: &TeleportConfig, phi_ea: f64) -> f64 {
    let alpha_bar = 1.0 - cfg.path_losses[1];
    let beta_bar = 1.0 - cfg.path_losses[0];
    let va = (1.0 + 2.0 * cfg.n_th_a) / 2.0;
    let vb = (1.0 + 2.0 * cfg.n_th_b) / 2.0;
    let ch2 = cfg.r_e.cosh().powi(2);
    let sh2 = cfg.r_e.sinh().powi(2);
    let cross = (alpha_bar * beta_bar).sqrt() * (2.0 * cfg.r_e).sinh() * phi_ea.cos();
    vb + (alpha_bar * ch2 + beta_bar * sh2 + cross) * va
        + (alpha_bar * sh2 + beta_bar * ch2 + cross) * vb
        + (1.0 - alpha_bar) * va
        + (1.0 - beta_bar) * vb
}

/// Sweep Bob's noise over a `phi_EA` grid. Minima land on odd multiples of
/// pi; for `alpha_bar = 1` and large `r_E` the minimum approaches the input
/// vacuum (1/2).
pub fn bob_noise_vs_pump_phase(cfg: &TeleportConfig, phi_ea_grid: &[f64]) -> Result<NoiseCurve> {
    cfg.validate()?;
    Ok(NoiseCurve {
        phi_ea: phi_ea_grid.to_vec(),
        photons: phi_ea_grid
            .iter()
            .map(|&phi| bob_noise_photons(cfg, phi))
            .collect(),
        unity_feedforward_satisfied: cfg.is_unity_gain(),
    })
}
