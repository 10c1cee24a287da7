//! Output-chain calibration: noise-power models versus bath temperature and
//! versus squeezer gain, SNR improvement, nonlinear least-squares extraction
//! of `(G_sys, N_sys)`, and intermediate-loss estimation from in-series
//! measurements.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::{HBAR, KB};

/// Independent variable of a noise sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    TemperatureK,
    JmGainLinear,
}

/// Measured noise power versus temperature or squeezer gain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSweep {
    pub kind: SweepKind,
    /// `(x, measured power in W)` pairs, strictly increasing in x.
    pub points: Vec<(f64, f64)>,
    pub omega_rad_s: f64,
    pub bw_hz: f64,
}

impl NoiseSweep {
    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 4 {
            return Err(CoreError::InvalidSweep(format!(
                "need at least 4 points for a 2-parameter fit, got {}",
                self.points.len()
            )));
        }
        for w in self.points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(CoreError::InvalidSweep(format!(
                    "x values must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        for &(x, y) in &self.points {
            if !x.is_finite() || !y.is_finite() || y <= 0.0 {
                return Err(CoreError::InvalidSweep(format!(
                    "bad point ({x}, {y}): powers must be positive and finite"
                )));
            }
            match self.kind {
                SweepKind::TemperatureK if x < 0.0 => {
                    return Err(CoreError::InvalidSweep(format!("negative temperature {x}")))
                }
                SweepKind::JmGainLinear if x < 1.0 => {
                    return Err(CoreError::InvalidSweep(format!("gain {x} below 1")))
                }
                _ => {}
            }
        }
        if self.omega_rad_s <= 0.0 || self.bw_hz <= 0.0 {
            return Err(CoreError::InvalidSweep(
                "omega and bandwidth must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Thermal photon occupation `1/2 coth(hbar w / 2 k T)`; the `T -> 0` limit
/// is 1/2 (zero-point fluctuations).
pub fn photon_occupation(t_k: f64, omega_rad_s: f64) -> f64 {
    if t_k <= 0.0 {
        return 0.5;
    }
    let x = HBAR * omega_rad_s / (2.0 * KB * t_k);
    0.5 / x.tanh()
}

fn p0(g_sys: f64, omega_rad_s: f64, bw_hz: f64) -> f64 {
    g_sys * bw_hz * HBAR * omega_rad_s
}

/// Output noise power (W) with the squeezer off and the termination at
/// temperature `T`:
/// `P = G_sys BW hbar w (1/2 coth(hbar w / 2 k T) + N_sys)`.
pub fn noise_model_vs_t(t_k: f64, g_sys: f64, n_sys: f64, omega_rad_s: f64, bw_hz: f64) -> f64 {
    p0(g_sys, omega_rad_s, bw_hz) * (photon_occupation(t_k, omega_rad_s) + n_sys)
}

/// Output noise power (W) with a cold termination and the squeezer at gain
/// `G_J`: `P = G_sys BW hbar w (G_J/2 + (G_J - 1)/2 + N_sys)`.
pub fn noise_model_vs_g(g_j: f64, g_sys: f64, n_sys: f64, omega_rad_s: f64, bw_hz: f64) -> f64 {
    p0(g_sys, omega_rad_s, bw_hz) * (0.5 * g_j + 0.5 * (g_j - 1.0) + n_sys)
}

/// Signal-to-noise-ratio improvement provided by the squeezer:
/// `G_J / G_N = (T_sys + T_Q) / (T_sys/G_J + T_Q (1 + (G_J - 1)/G_J))`,
/// saturating at `(T_sys + T_Q)/(2 T_Q)` for large gain.
pub fn snr_improvement(g_j: f64, t_sys_k: f64, omega_rad_s: f64) -> Result<f64> {
    if g_j < 1.0 {
        return Err(CoreError::OutOfRange {
            name: "g_j",
            value: g_j,
            lo: 1.0,
            hi: f64::INFINITY,
        });
    }
    let t_q = HBAR * omega_rad_s / (2.0 * KB);
    Ok((t_sys_k + t_q) / (t_sys_k / g_j + t_q * (1.0 + (g_j - 1.0) / g_j)))
}

/// Fitted output-chain parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub g_sys: f64,
    pub n_sys: f64,
    /// `T_sys = N_sys hbar w / k_B`.
    pub t_sys_k: f64,
    /// Covariance of `(G_sys, N_sys)` from the Jacobian at the optimum.
    pub covariance: [[f64; 2]; 2],
    /// Norm of the log-power residual vector at the optimum.
    pub residual_norm: f64,
    pub iterations: usize,
}

fn model_log_power(sweep: &NoiseSweep, theta: &[f64; 2]) -> Vec<f64> {
    let g_sys = theta[0].exp();
    let n_sys = theta[1].exp() - 0.5;
    sweep
        .points
        .iter()
        .map(|&(x, _)| {
            let p = match sweep.kind {
                SweepKind::TemperatureK => {
                    noise_model_vs_t(x, g_sys, n_sys, sweep.omega_rad_s, sweep.bw_hz)
                }
                SweepKind::JmGainLinear => {
                    noise_model_vs_g(x, g_sys, n_sys, sweep.omega_rad_s, sweep.bw_hz)
                }
            };
            p.ln()
        })
        .collect()
}

fn residuals(sweep: &NoiseSweep, theta: &[f64; 2]) -> Vec<f64> {
    model_log_power(sweep, theta)
        .iter()
        .zip(sweep.points.iter())
        .map(|(m, &(_, y))| m - y.ln())
        .collect()
}

fn initial_guess(sweep: &NoiseSweep) -> [f64; 2] {
    // linear regression of power against the photon-number abscissa:
    // P = P0 * (u(x) + N - 1/2-ish), with u = occupation or gain term
    let u: Vec<f64> = sweep
        .points
        .iter()
        .map(|&(x, _)| match sweep.kind {
            SweepKind::TemperatureK => photon_occupation(x, sweep.omega_rad_s),
            SweepKind::JmGainLinear => x - 0.5,
        })
        .collect();
    let n = u.len() as f64;
    let mean_u = u.iter().sum::<f64>() / n;
    let mean_y = sweep.points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (uk, &(_, y)) in u.iter().zip(sweep.points.iter()) {
        sxx += (uk - mean_u).powi(2);
        sxy += (uk - mean_u) * (y - mean_y);
    }
    let slope = if sxx > 0.0 && sxy > 0.0 { sxy / sxx } else { mean_y };
    let intercept_photons = (mean_y / slope - mean_u).max(0.0);
    let g0 = (slope / (sweep.bw_hz * HBAR * sweep.omega_rad_s)).max(1e-6);
    let u0 = match sweep.kind {
        // P/P0 at x: occ + N  ->  N + 1/2 = P/P0 - occ + 1/2
        SweepKind::TemperatureK => intercept_photons + 0.5,
        SweepKind::JmGainLinear => intercept_photons + 0.5,
    };
    [g0.ln(), u0.max(0.51).ln()]
}

/// Extract `(G_sys, N_sys)` from a noise sweep by damped Gauss-Newton on
/// log-power residuals with a log parameterization enforcing positivity.
pub fn fit_chain(sweep: &NoiseSweep) -> Result<FitResult> {
    sweep.validate()?;
    let m = sweep.points.len();
    let mut theta = initial_guess(sweep);
    let mut r = residuals(sweep, &theta);
    let mut cost: f64 = r.iter().map(|v| v * v).sum();
    let mut lambda = 1e-3;
    let mut iterations = 0;

    let jacobian = |theta: &[f64; 2]| -> [Vec<f64>; 2] {
        let mut cols: [Vec<f64>; 2] = [vec![0.0; m], vec![0.0; m]];
        for p in 0..2 {
            let step = 1e-6 * theta[p].abs().max(1e-3);
            let mut plus = *theta;
            plus[p] += step;
            let mut minus = *theta;
            minus[p] -= step;
            let rp = residuals(sweep, &plus);
            let rm = residuals(sweep, &minus);
            for i in 0..m {
                cols[p][i] = (rp[i] - rm[i]) / (2.0 * step);
            }
        }
        cols
    };

    let mut jtj;
    for _ in 0..200 {
        iterations += 1;
        let j = jacobian(&theta);
        jtj = [[0.0; 2]; 2];
        let mut jtr = [0.0f64; 2];
        for i in 0..m {
            for a in 0..2 {
                jtr[a] += j[a][i] * r[i];
                for b in 0..2 {
                    jtj[a][b] += j[a][i] * j[b][i];
                }
            }
        }
        // damped solve; retry with heavier damping on cost increase
        let mut improved = false;
        for _ in 0..16 {
            let a00 = jtj[0][0] * (1.0 + lambda);
            let a11 = jtj[1][1] * (1.0 + lambda);
            let a01 = jtj[0][1];
            let det = a00 * a11 - a01 * a01;
            if det.abs() < 1e-300 {
                break;
            }
            let dx = [
                -(a11 * jtr[0] - a01 * jtr[1]) / det,
                -(a00 * jtr[1] - a01 * jtr[0]) / det,
            ];
            let candidate = [theta[0] + dx[0], theta[1] + dx[1]];
            let rc = residuals(sweep, &candidate);
            let cc: f64 = rc.iter().map(|v| v * v).sum();
            if cc.is_finite() && cc <= cost {
                let delta = (dx[0] * dx[0] + dx[1] * dx[1]).sqrt();
                let gain = cost - cc;
                theta = candidate;
                r = rc;
                cost = cc;
                lambda = (lambda / 3.0).max(1e-12);
                improved = true;
                if delta < 1e-12 || gain < 1e-15 * cost.max(1e-30) {
                    return finish(sweep, &theta, cost, &jtj, iterations);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // damping saturated: no step lowers the cost, so this is the
            // minimum (the gradient is numerically flat)
            return finish(sweep, &theta, cost, &jtj, iterations);
        }
    }
    Err(CoreError::FitDiverged {
        iterations,
        residual: cost.sqrt(),
    })
}

fn finish(
    sweep: &NoiseSweep,
    theta: &[f64; 2],
    cost: f64,
    jtj: &[[f64; 2]; 2],
    iterations: usize,
) -> Result<FitResult> {
    let m = sweep.points.len();
    let g_sys = theta[0].exp();
    let u = theta[1].exp();
    let n_sys = (u - 0.5).max(0.0);
    let dof = (m.saturating_sub(2)).max(1) as f64;
    let sigma2 = cost / dof;
    let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[0][1];
    let cov_theta = if det.abs() > 1e-300 {
        [
            [jtj[1][1] / det * sigma2, -jtj[0][1] / det * sigma2],
            [-jtj[0][1] / det * sigma2, jtj[0][0] / det * sigma2],
        ]
    } else {
        [[f64::NAN; 2]; 2]
    };
    // delta method back to (G_sys, N_sys): d g/d theta0 = g, d n/d theta1 = u
    let covariance = [
        [cov_theta[0][0] * g_sys * g_sys, cov_theta[0][1] * g_sys * u],
        [cov_theta[1][0] * g_sys * u, cov_theta[1][1] * u * u],
    ];
    Ok(FitResult {
        g_sys,
        n_sys,
        t_sys_k: n_sys * HBAR * sweep.omega_rad_s / KB,
        covariance,
        residual_norm: cost.sqrt(),
        iterations,
    })
}

/// Intermediate loss between two in-series squeezer stages sharing one
/// output line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesLoss {
    /// `eta = G_sys_bottom / G_sys_top`.
    pub eta_linear: f64,
    pub loss_db: f64,
    /// Bottom-referenced added noise `N_top/eta + (1 - eta)/(2 eta)`,
    /// present when the top-referenced noise was supplied.
    pub n_sys_bottom: Option<f64>,
    /// True when a ratio slightly above 1 was clamped back to 1.
    pub clamped: bool,
}

/// Estimate the loss between the output reference planes of two in-series
/// stages from their separately fitted system gains.
pub fn intermediate_loss_from_series(
    g_sys_top: f64,
    g_sys_bottom: f64,
    n_sys_top: Option<f64>,
) -> Result<SeriesLoss> {
    if g_sys_top <= 0.0 || g_sys_bottom <= 0.0 {
        return Err(CoreError::OutOfRange {
            name: "g_sys",
            value: g_sys_top.min(g_sys_bottom),
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let raw = g_sys_bottom / g_sys_top;
    if raw > 1.05 {
        return Err(CoreError::InconsistentCalibration(raw));
    }
    let clamped = raw > 1.0;
    let eta = raw.min(1.0);
    Ok(SeriesLoss {
        eta_linear: eta,
        loss_db: 10.0 * eta.log10(),
        n_sys_bottom: n_sys_top.map(|n| n / eta + (1.0 - eta) / (2.0 * eta)),
        clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};

    const OMEGA_A: f64 = 2.0 * std::f64::consts::PI * 7.231e9;
    const OMEGA_B: f64 = 2.0 * std::f64::consts::PI * 9.707e9;

    #[test]
    fn zero_temperature_limit() {
        // N_ph(T -> 0) = 1/2 + N_sys = 17.1 for N_sys = 16.6
        let p = noise_model_vs_t(0.0, 1.0, 16.6, OMEGA_A, 1.0);
        let photons = p / (HBAR * OMEGA_A);
        assert_abs_diff_eq!(photons, 17.1, epsilon = 1e-12);
    }

    #[test]
    fn quantum_limit_holds_at_millikelvin() {
        // hbar w / 2 k T ~ 3.34 at 7.23 GHz and 52 mK: occupation ~ 1/2
        let x = HBAR * OMEGA_A / (2.0 * KB * 0.052);
        assert_abs_diff_eq!(x, 3.34, epsilon = 0.01);
        let occ = photon_occupation(0.052, OMEGA_A);
        assert_abs_diff_eq!(occ, 0.5 / x.tanh(), epsilon = 1e-15);
        assert!((occ - 0.5).abs() < 2e-3);
    }

    #[test]
    fn high_temperature_asymptote_is_rayleigh_jeans() {
        // coth(x) -> 1/x: occupation approaches k T / (hbar w)
        let t = 50.0;
        let occ = photon_occupation(t, OMEGA_A);
        let rj = KB * t / (HBAR * OMEGA_A);
        assert_relative_eq!(occ, rj, max_relative = 1e-5);
    }

    #[test]
    fn gain_model_values() {
        // G_J = 1 matches the T -> 0 off model exactly
        let a = noise_model_vs_g(1.0, 3.5e6, 13.2, OMEGA_A, 1e6);
        let b = noise_model_vs_t(0.0, 3.5e6, 13.2, OMEGA_A, 1e6);
        assert_eq!(a, b);
        // G_J = 10: 9.5 + N photons
        let p = noise_model_vs_g(10.0, 1.0, 4.0, OMEGA_A, 1.0);
        assert_abs_diff_eq!(p / (HBAR * OMEGA_A), 13.5, epsilon = 1e-12);
        // Table-parameterized absolute power is finite and sensible
        let p = noise_model_vs_g(10.0, 1.3e7, 18.9, OMEGA_B, 1e6);
        assert!(p.is_finite() && p > 0.0);
    }

    #[test]
    fn snr_improvement_limits() {
        assert_abs_diff_eq!(snr_improvement(1.0, 5.8, OMEGA_A).unwrap(), 1.0, epsilon = 1e-12);
        // large gain: (T_sys + T_Q)/(2 T_Q) = (2 N + 1)/2 = 17.1 at N = 16.6
        let t_sys = 16.6 * HBAR * OMEGA_A / KB;
        let limit = snr_improvement(1e12, t_sys, OMEGA_A).unwrap();
        assert_abs_diff_eq!(limit, 17.1, epsilon = 1e-6);
        // monotone saturation shape
        let mid = snr_improvement(10.0, t_sys, OMEGA_A).unwrap();
        assert!(mid > 1.0 && mid < limit);
        assert!(snr_improvement(0.5, t_sys, OMEGA_A).is_err());
    }

    fn synth_sweep(kind: SweepKind, g_sys: f64, n_sys: f64, noise_frac: f64, seed: u64) -> NoiseSweep {
        synth_sweep_range(kind, g_sys, n_sys, noise_frac, seed, OMEGA_A, (0.05, 0.3))
    }

    fn synth_sweep_range(
        kind: SweepKind,
        g_sys: f64,
        n_sys: f64,
        noise_frac: f64,
        seed: u64,
        omega: f64,
        t_range: (f64, f64),
    ) -> NoiseSweep {
        let bw = 1e6;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let points = (0..20)
            .map(|i| {
                let (x, p) = match kind {
                    SweepKind::JmGainLinear => {
                        let x = 1.0 + i as f64 * 0.5;
                        (x, noise_model_vs_g(x, g_sys, n_sys, omega, bw))
                    }
                    SweepKind::TemperatureK => {
                        let x = t_range.0 + i as f64 * ((t_range.1 - t_range.0) / 19.0);
                        (x, noise_model_vs_t(x, g_sys, n_sys, omega, bw))
                    }
                };
                let mult = 1.0 + noise_frac * (rng.gen::<f64>() * 2.0 - 1.0);
                (x, p * mult)
            })
            .collect();
        NoiseSweep {
            kind,
            points,
            omega_rad_s: omega,
            bw_hz: bw,
        }
    }

    #[test]
    fn noiseless_fit_recovers_exactly() {
        for kind in [SweepKind::JmGainLinear, SweepKind::TemperatureK] {
            let sweep = synth_sweep(kind, 3.5e6, 13.2, 0.0, 0);
            let fit = fit_chain(&sweep).unwrap();
            assert_relative_eq!(fit.g_sys, 3.5e6, max_relative = 1e-6);
            assert_relative_eq!(fit.n_sys, 13.2, max_relative = 1e-6);
            assert!(fit.residual_norm < 1e-8);
        }
    }

    #[test]
    fn noisy_fit_recovers_within_ten_percent() {
        let sweep = synth_sweep(SweepKind::JmGainLinear, 3.5e6, 13.2, 0.05, 17);
        let fit = fit_chain(&sweep).unwrap();
        assert_relative_eq!(fit.g_sys, 3.5e6, max_relative = 0.10);
        assert_relative_eq!(fit.n_sys, 13.2, max_relative = 0.10);
        // T_sys follows the fitted noise
        assert_relative_eq!(
            fit.t_sys_k,
            fit.n_sys * HBAR * OMEGA_A / KB,
            max_relative = 1e-12
        );
    }

    #[test]
    fn temperature_fit_with_table_parameters() {
        // Over 50-300 mK the occupation only moves the total photon number by
        // ~1.4% against N_sys ~ 19, so the gain is identifiable there only at
        // instrument-level (0.3%) noise; at 5% noise a wider 50 mK - 2 K
        // sweep is needed. Both configurations must recover within 10%.
        let narrow = synth_sweep_range(
            SweepKind::TemperatureK,
            1.3e7,
            18.9,
            0.003,
            5,
            OMEGA_B,
            (0.05, 0.3),
        );
        let fit = fit_chain(&narrow).unwrap();
        assert_relative_eq!(fit.g_sys, 1.3e7, max_relative = 0.10);
        assert_relative_eq!(fit.n_sys, 18.9, max_relative = 0.10);

        let wide = synth_sweep_range(
            SweepKind::TemperatureK,
            1.3e7,
            18.9,
            0.05,
            5,
            OMEGA_B,
            (0.05, 2.0),
        );
        let fit = fit_chain(&wide).unwrap();
        assert_relative_eq!(fit.g_sys, 1.3e7, max_relative = 0.10);
        assert_relative_eq!(fit.n_sys, 18.9, max_relative = 0.10);
    }

    #[test]
    fn fit_is_scale_equivariant() {
        let base = synth_sweep(SweepKind::JmGainLinear, 2.0e6, 9.0, 0.03, 3);
        let fit0 = fit_chain(&base).unwrap();
        let mut scaled = base.clone();
        for p in scaled.points.iter_mut() {
            p.1 *= 250.0;
        }
        let fit1 = fit_chain(&scaled).unwrap();
        assert_relative_eq!(fit1.g_sys, 250.0 * fit0.g_sys, max_relative = 1e-8);
        assert_relative_eq!(fit1.n_sys, fit0.n_sys, max_relative = 1e-8);
    }

    #[test]
    fn sweep_validation_errors() {
        let mut sweep = synth_sweep(SweepKind::JmGainLinear, 1e6, 5.0, 0.0, 0);
        sweep.points.truncate(3);
        assert!(matches!(
            fit_chain(&sweep),
            Err(CoreError::InvalidSweep(_))
        ));
        let mut sweep = synth_sweep(SweepKind::JmGainLinear, 1e6, 5.0, 0.0, 0);
        sweep.points[3].0 = sweep.points[2].0; // degenerate design
        assert!(matches!(fit_chain(&sweep), Err(CoreError::InvalidSweep(_))));
    }

    #[test]
    fn intermediate_loss_examples() {
        // 7.3e6 over 4.5e6: -2.1 dB
        let loss = intermediate_loss_from_series(7.3e6, 4.5e6, Some(10.0)).unwrap();
        assert_abs_diff_eq!(loss.eta_linear, 0.616_438_356_164_38, epsilon = 1e-10);
        assert_abs_diff_eq!(loss.loss_db, -2.101, epsilon = 5e-3);
        let n_m = loss.n_sys_bottom.unwrap();
        assert_abs_diff_eq!(
            n_m,
            10.0 / loss.eta_linear + (1.0 - loss.eta_linear) / (2.0 * loss.eta_linear),
            epsilon = 1e-12
        );

        // feedforward estimate: 8.2e5/2.1e7 -> -14.08 dB; less the 10 dB
        // coupler leaves beta_f_bar ~ 0.4
        let loss = intermediate_loss_from_series(2.1e7, 8.2e5, None).unwrap();
        assert_abs_diff_eq!(loss.loss_db, -14.084, epsilon = 5e-3);
        let beta_f_bar = crate::db::db_to_ratio(loss.loss_db + 10.0);
        assert_abs_diff_eq!(beta_f_bar, 0.39, epsilon = 0.01);

        // equal gains: 0 dB, not clamped
        let loss = intermediate_loss_from_series(5e6, 5e6, None).unwrap();
        assert_eq!(loss.loss_db, 0.0);
        assert!(!loss.clamped);

        // small excess tolerated with clamping, large excess rejected
        assert!(intermediate_loss_from_series(5e6, 5.2e6, None).unwrap().clamped);
        assert!(matches!(
            intermediate_loss_from_series(5e6, 6e6, None),
            Err(CoreError::InconsistentCalibration(_))
        ));
    }
}
