//! Three-mixer entanglement-swapping model: two entanglers feed halves of
//! their outputs to a which-path eraser (Claire) whose amplified output,
//! attenuated back to unity transmission, displaces the remote mode at Alice.
//! The result is entanglement between Alice and Bob, who never interacted.
//!
//! The closed-form Alice-Bob covariance assumes unity feedforward
//! transmission `sqrt(beta_c alpha_f_bar) cosh(r_3) = 1` together with the
//! large-gain limit of the eraser, with pump phases `phi_1 = phi_2 = 0`,
//! `phi_3 = pi`. An independent multimode construction of the same circuit
//! lives in the test suite.

use nalgebra::{DMatrix, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::measures::{self, EntanglementReport};
use crate::teleport::CoherentInput;

/// Configuration of the swapping chain.
///
/// Loss naming follows the circuit: `alpha_1_bar` Entangler-1 mode a to the
/// coupler at Alice, `beta_1_bar` Entangler-1 mode b to Claire, `alpha_2_bar`
/// Entangler-2 mode a to Claire, `beta_2_bar` Entangler-2 mode b to Bob,
/// `alpha_f_bar` Claire's output to the coupler, `beta_c` the coupler power
/// coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapConfig {
    pub r_1: f64,
    pub r_2: f64,
    /// Claire's gain when unity feedforward is not enforced (dB).
    pub claire_gain_db: f64,
    pub enforce_unity_feedforward: bool,
    pub phi_1: f64,
    pub phi_2: f64,
    pub phi_3: f64,
    pub alpha_1_bar: f64,
    pub alpha_2_bar: f64,
    pub beta_1_bar: f64,
    pub beta_2_bar: f64,
    pub alpha_f_bar: f64,
    pub beta_c: f64,
    pub coherent_input: Option<CoherentInput>,
}

impl Default for SwapConfig {
    fn default() -> Self {
        Self {
            r_1: 0.0,
            r_2: 0.0,
            claire_gain_db: 10.7,
            enforce_unity_feedforward: true,
            phi_1: 0.0,
            phi_2: 0.0,
            phi_3: std::f64::consts::PI,
            alpha_1_bar: 1.0,
            alpha_2_bar: 1.0,
            beta_1_bar: 1.0,
            beta_2_bar: 1.0,
            alpha_f_bar: 1.0,
            beta_c: 0.1,
            coherent_input: None,
        }
    }
}

impl SwapConfig {
    /// Loss set of the entanglement-swapping experiment figure.
    pub fn with_experiment_losses() -> Self {
        Self {
            alpha_1_bar: 0.9,
            alpha_2_bar: 0.72,
            beta_1_bar: 0.62,
            beta_2_bar: 0.97,
            alpha_f_bar: 0.85,
            beta_c: 0.1,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha_1_bar", self.alpha_1_bar),
            ("alpha_2_bar", self.alpha_2_bar),
            ("beta_1_bar", self.beta_1_bar),
            ("beta_2_bar", self.beta_2_bar),
            ("alpha_f_bar", self.alpha_f_bar),
            ("beta_c", self.beta_c),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(CoreError::OutOfRange {
                    name,
                    value: v,
                    lo: 0.0,
                    hi: 1.0,
                });
            }
        }
        if self.r_1 < 0.0 {
            return Err(CoreError::NegativeSqueeze(self.r_1));
        }
        if self.r_2 < 0.0 {
            return Err(CoreError::NegativeSqueeze(self.r_2));
        }
        Ok(())
    }

    /// `cosh(r_3)` required for unity feedforward transmission.
    pub fn required_claire_cosh(&self) -> f64 {
        1.0 / (self.beta_c * self.alpha_f_bar).sqrt()
    }

    /// Claire squeeze parameter: solved from the unity condition when
    /// enforced, otherwise taken from `claire_gain_db`.
    pub fn claire_r(&self) -> Result<f64> {
        if self.enforce_unity_feedforward {
            let product = self.beta_c * self.alpha_f_bar;
            if product <= 0.0 {
                return Err(CoreError::UnityFeedforwardUnsatisfiable(
                    self.required_claire_cosh(),
                ));
            }
            Ok(self.required_claire_cosh().acosh())
        } else {
            crate::db::gain_db_to_r(self.claire_gain_db)
        }
    }
}

/// Closed-form 4x4 Alice-Bob covariance over `(x_A, p_A, x_B, p_B)`:
///
/// ```text
/// V11 = a2b cosh(2 r2)/4 + (b1b + bcb a1b) cosh(2 r1)/4
///       - sqrt(bcb a1b b1b) sinh(2 r1)/2
///       + (a2 + b1 + bc af + bcb a1)/4
/// V33 = b2b cosh(2 r2)/4 + b2/4
/// V13 = sqrt(b2b a2b) sinh(2 r2)/4 = -V24
/// ```
pub fn swap_covariance(cfg: &SwapConfig) -> Result<DMatrix<f64>> {
    cfg.validate()?;
    if cfg.enforce_unity_feedforward {
        // surfaces the required Claire working point early
        cfg.claire_r()?;
    }
    let bcb = 1.0 - cfg.beta_c;
    let c1 = (2.0 * cfg.r_1).cosh();
    let s1 = (2.0 * cfg.r_1).sinh();
    let c2 = (2.0 * cfg.r_2).cosh();
    let s2 = (2.0 * cfg.r_2).sinh();

    let bath = (1.0 - cfg.alpha_2_bar)
        + (1.0 - cfg.beta_1_bar)
        + cfg.beta_c * (1.0 - cfg.alpha_f_bar)
        + bcb * (1.0 - cfg.alpha_1_bar);
    let v11 = cfg.alpha_2_bar * c2 / 4.0 + (cfg.beta_1_bar + bcb * cfg.alpha_1_bar) * c1 / 4.0
        - (bcb * cfg.alpha_1_bar * cfg.beta_1_bar).sqrt() * s1 / 2.0
        + bath / 4.0;
    let v33 = cfg.beta_2_bar * c2 / 4.0 + (1.0 - cfg.beta_2_bar) / 4.0;
    let v13 = (cfg.beta_2_bar * cfg.alpha_2_bar).sqrt() * s2 / 4.0;

    let mut v = DMatrix::zeros(4, 4);
    v[(0, 0)] = v11;
    v[(1, 1)] = v11;
    v[(2, 2)] = v33;
    v[(3, 3)] = v33;
    v[(0, 2)] = v13;
    v[(2, 0)] = v13;
    v[(1, 3)] = -v13;
    v[(3, 1)] = -v13;
    Ok(v)
}

/// Lossless swap EPR variances: `Delta- = e^{-2 r2} + e^{-2 r1}`,
/// `Delta+ = e^{2 r2} + e^{-2 r1}`. With `r1 = 0`, `Delta- > 1` for every
/// `r2`: classical teleportation of half a pair cannot swap entanglement.
pub fn swap_duan_lossless(r_1: f64, r_2: f64) -> (f64, f64) {
    (
        (-2.0 * r_2).exp() + (-2.0 * r_1).exp(),
        (2.0 * r_2).exp() + (-2.0 * r_1).exp(),
    )
}

/// One point of a gain sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwapReportPoint {
    pub g2_db: f64,
    #[serde(flatten)]
    pub report: EntanglementReport,
}

/// Evaluate the full figure-of-merit set along an Entangler-2 gain grid.
pub fn swap_report_vs_gain(cfg: &SwapConfig, g2_grid_db: &[f64]) -> Result<Vec<SwapReportPoint>> {
    let mut out = Vec::with_capacity(g2_grid_db.len());
    for &g2_db in g2_grid_db {
        let mut point_cfg = cfg.clone();
        point_cfg.r_2 = crate::db::gain_db_to_r(g2_db)?;
        let v = swap_covariance(&point_cfg)?;
        out.push(SwapReportPoint {
            g2_db,
            report: measures::report(&v, None)?,
        });
    }
    Ok(out)
}

/// Mean quadratures at Alice and Bob for a coherent drive on Entangler-2
/// port b. Means propagate through the transmission part of the chain only:
/// Bob sees the phase-preserving amplified reflection
/// `sqrt(b2b) cosh(r2) c_in`, Alice the teleported conjugate
/// `sqrt(a2b) sinh(r2) Z R(phi_2) c_in`.
pub fn swap_coherent_means(cfg: &SwapConfig) -> Result<(Vector2<f64>, Vector2<f64>)> {
    cfg.validate()?;
    let input = cfg.coherent_input.unwrap_or(CoherentInput {
        n_photons: 0.0,
        phase_rad: 0.0,
    });
    let c_in = input.mean();
    let zr = crate::gaussian::z_block() * crate::gaussian::rotation_block(cfg.phi_2);
    let zr_c = Vector2::new(
        zr[(0, 0)] * c_in[0] + zr[(0, 1)] * c_in[1],
        zr[(1, 0)] * c_in[0] + zr[(1, 1)] * c_in[1],
    );
    let alice = zr_c * cfg.alpha_2_bar.sqrt() * cfg.r_2.sinh();
    let bob = c_in * cfg.beta_2_bar.sqrt() * cfg.r_2.cosh();
    Ok((alice, bob))
}

/// `Var[x-]` and `Var[x+]` versus the Entangler-2 pump phase, in the figure
/// convention where the squeezed minimum of `Var[x-]` sits at 180 degrees.
pub fn swap_phase_sweep(cfg: &SwapConfig, phi_2_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    let v = swap_covariance(cfg)?;
    let (v11, v33, v13) = (v[(0, 0)], v[(2, 2)], v[(0, 2)]);
    Ok(phi_2_grid
        .iter()
        .map(|&phi| {
            (
                v11 + v33 + 2.0 * v13 * phi.cos(),
                v11 + v33 - 2.0 * v13 * phi.cos(),
            )
        })
        .collect())
}

/// Entangler-2 gains (dB) at which `Delta-` crosses the separability bound 1,
/// for the lossless formula and for the configured lossy model. Returns
/// `None` when no crossing exists below `g2_max_db`.
pub fn duan_thresholds(cfg: &SwapConfig, g2_max_db: f64) -> Result<(Option<f64>, Option<f64>)> {
    let lossless = |r2: f64| swap_duan_lossless(cfg.r_1, r2).0 - 1.0;
    let lossy = |r2: f64| -> Result<f64> {
        let mut c = cfg.clone();
        c.r_2 = r2;
        let v = swap_covariance(&c)?;
        Ok(measures::duan_epr(&v)?.0 - 1.0)
    };
    let r_max = crate::db::gain_db_to_r(g2_max_db)?;
    let solve = |f: &dyn Fn(f64) -> Result<f64>| -> Result<Option<f64>> {
        let mut lo = 0.0f64;
        let mut hi = r_max;
        if f(lo)? <= 0.0 || f(hi)? > 0.0 {
            return Ok(None);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Some(crate::db::r_to_gain_db(0.5 * (lo + hi))))
    };
    let lossless_db = solve(&|r| Ok(lossless(r)))?;
    let lossy_db = solve(&|r| lossy(r))?;
    Ok((lossless_db, lossy_db))
}
