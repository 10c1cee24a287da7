//! Seeded Monte-Carlo heterodyne measurement simulation.
//!
//! The forward model draws room-temperature quadrature records for a two-mode
//! Gaussian state through an output chain with gain `G_sys` and added noise
//! `N_sys`, converts them to raw volts and refers them back to the device
//! plane, so recorded samples carry covariance `V + V_th` with
//! `V_th = diag((1 + 2 N_sys)/4)`. Pump-on/off record pairs reconstruct the
//! device covariance via `V = V_on - V_off + I/4`, with the per-entry
//! sampling variance of the estimator and worst-case error bars.
//!
//! Sampling is chunked with per-chunk ChaCha substreams derived from the
//! master seed, so results are bit-identical regardless of thread count.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::gaussian::GaussianState;
use crate::measures::{self, EntanglementReport};
use crate::HBAR;

const CHUNK: usize = 8192;

/// Measurement output chain for one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputChain {
    /// Total linear power gain of the chain (~1e6).
    pub g_sys: f64,
    /// Input-referred added noise photons.
    pub n_sys: f64,
    /// Mode angular frequency, rad/s.
    pub omega_rad_s: f64,
    /// Integration time per shot, s.
    pub t_int_s: f64,
    /// Load resistance, ohms (50 in practice).
    pub r_load_ohm: f64,
}

impl OutputChain {
    pub fn new(g_sys: f64, n_sys: f64, f_hz: f64, t_int_s: f64) -> Self {
        Self {
            g_sys,
            n_sys,
            omega_rad_s: 2.0 * std::f64::consts::PI * f_hz,
            t_int_s,
            r_load_ohm: 50.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("g_sys", self.g_sys),
            ("omega", self.omega_rad_s),
            ("t_int", self.t_int_s),
            ("r_load", self.r_load_ohm),
        ] {
            if v <= 0.0 {
                return Err(CoreError::OutOfRange {
                    name,
                    value: v,
                    lo: 0.0,
                    hi: f64::INFINITY,
                });
            }
        }
        if self.n_sys < 0.0 {
            return Err(CoreError::NegativeOccupation(self.n_sys));
        }
        Ok(())
    }

    /// Volts-to-dimensionless conversion factor `gamma = T_int / (R hbar w)`.
    pub fn conversion_factor(&self) -> f64 {
        self.t_int_s / (self.r_load_ohm * HBAR * self.omega_rad_s)
    }
}

/// N samples of `(x1, p1, x2, p2)` referred to the device plane, plus the
/// calibration metadata they were taken with.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRecord {
    pub samples: Vec<[f64; 4]>,
    pub seed: u64,
    pub chains: [OutputChain; 2],
}

impl QuadratureRecord {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Thermal covariance added by the output chains: `N_sys/2` per quadrature.
///
/// `N_sys` is the total input-referred added noise in photons including the
/// amplifier's half-photon quantum limit, so a pump-off vacuum record carries
/// total per-quadrature variance `1/4 + N_sys/2 = (1 + 2 N_sys)/4`.
pub fn thermal_cov(chains: &[OutputChain; 2]) -> DMatrix<f64> {
    let mut v = DMatrix::zeros(4, 4);
    for k in 0..2 {
        let val = chains[k].n_sys / 2.0;
        v[(2 * k, 2 * k)] = val;
        v[(2 * k + 1, 2 * k + 1)] = val;
    }
    v
}

/// Deterministic substream: mixes `(seed, label, chunk)` into a 32-byte
/// ChaCha8 key with splitmix64 steps.
fn substream(seed: u64, label: u64, chunk: u64) -> ChaCha8Rng {
    let mut state = seed ^ label.rotate_left(17) ^ chunk.rotate_left(41);
    let mut next = || {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    };
    let mut key = [0u8; 32];
    for w in 0..4 {
        key[8 * w..8 * w + 8].copy_from_slice(&next().to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Symmetric square-root factor of a covariance matrix, clamping eigenvalues
/// in `[-1e-10, 0)` to zero.
fn cov_sqrt(total: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = total.clone().symmetric_eigen();
    let mut scaled = eig.eigenvectors.clone();
    for (c, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda < -1e-10 {
            return Err(CoreError::NotPositiveSemidefinite(lambda));
        }
        let s = lambda.max(0.0).sqrt();
        for r in 0..scaled.nrows() {
            scaled[(r, c)] *= s;
        }
    }
    Ok(scaled)
}

/// Draw heterodyne records for a two-mode state through the output chains.
///
/// Dimensionless room-temperature samples carry mean `sqrt(G_sys) * mean` and
/// covariance `G_sys (V + V_th)`; they are converted to raw volts and then
/// referred back, so the recorded samples have covariance `V + V_th`. The
/// volt round trip cancels algebraically but is evaluated explicitly so that
/// a miscalibrated referral (`refer_raw_volts` with different chain
/// parameters) can be injected as a fault mode.
pub fn sample_records(
    state: &GaussianState,
    chains: &[OutputChain; 2],
    n: usize,
    seed: u64,
) -> Result<QuadratureRecord> {
    let raw = sample_raw_volts(state, chains, n, seed)?;
    Ok(QuadratureRecord {
        samples: refer_raw_volts(&raw, chains),
        seed,
        chains: *chains,
    })
}

/// Forward model only: raw-volt samples at the room-temperature plane.
pub fn sample_raw_volts(
    state: &GaussianState,
    chains: &[OutputChain; 2],
    n: usize,
    seed: u64,
) -> Result<Vec<[f64; 4]>> {
    if state.n_modes() != 2 {
        return Err(CoreError::DimensionMismatch {
            op_modes: 2,
            state_modes: state.n_modes(),
        });
    }
    if n < 2 {
        return Err(CoreError::RecordMismatch(format!(
            "need at least 2 samples, got {n}"
        )));
    }
    chains[0].validate()?;
    chains[1].validate()?;

    let total = state.cov() + thermal_cov(chains);
    let factor = cov_sqrt(&total)?;
    let mean = state.mean().clone();
    // per-quadrature volt scale: sqrt(G)/sqrt(gamma)
    let volt_scale = [
        (chains[0].g_sys / chains[0].conversion_factor()).sqrt(),
        (chains[1].g_sys / chains[1].conversion_factor()).sqrt(),
    ];

    let n_chunks = n.div_ceil(CHUNK);
    let blocks: Vec<Vec<[f64; 4]>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(seed, 0x5157_4144, c as u64);
            let count = CHUNK.min(n - c * CHUNK);
            let mut block = Vec::with_capacity(count);
            let mut xi = DVector::zeros(4);
            for _ in 0..count {
                for k in 0..4 {
                    xi[k] = StandardNormal.sample(&mut rng);
                }
                let s = &mean + &factor * &xi;
                block.push([
                    s[0] * volt_scale[0],
                    s[1] * volt_scale[0],
                    s[2] * volt_scale[1],
                    s[3] * volt_scale[1],
                ]);
            }
            block
        })
        .collect();
    Ok(blocks.into_iter().flatten().collect())
}

/// Refer raw-volt samples back to the device plane:
/// `X = sqrt(gamma) V_raw`, then `x = X / sqrt(G_sys)`.
pub fn refer_raw_volts(raw: &[[f64; 4]], chains: &[OutputChain; 2]) -> Vec<[f64; 4]> {
    let scale = [
        (chains[0].conversion_factor() / chains[0].g_sys).sqrt(),
        (chains[1].conversion_factor() / chains[1].g_sys).sqrt(),
    ];
    raw.iter()
        .map(|s| {
            [
                s[0] * scale[0],
                s[1] * scale[0],
                s[2] * scale[1],
                s[3] * scale[1],
            ]
        })
        .collect()
}

/// Sample mean of a record.
pub fn sample_mean(record: &QuadratureRecord) -> [f64; 4] {
    let mut m = [0.0; 4];
    for s in &record.samples {
        for k in 0..4 {
            m[k] += s[k];
        }
    }
    let n = record.len() as f64;
    m.map(|v| v / n)
}

/// Unbiased (N-1) sample covariance of a record.
pub fn sample_covariance(record: &QuadratureRecord) -> DMatrix<f64> {
    let m = sample_mean(record);
    let mut cov = DMatrix::zeros(4, 4);
    for s in &record.samples {
        for i in 0..4 {
            for j in i..4 {
                cov[(i, j)] += (s[i] - m[i]) * (s[j] - m[j]);
            }
        }
    }
    let denom = (record.len() - 1) as f64;
    for i in 0..4 {
        for j in i..4 {
            cov[(i, j)] /= denom;
            cov[(j, i)] = cov[(i, j)];
        }
    }
    cov
}

/// Per-entry sampling variance of a covariance estimate from N samples:
/// `Var(V_ii) = 2 V_ii^2/(N-1)`,
/// `Var(V_ij) = (1 + rho^2) V_ii V_jj/(N-1) = (V_ii V_jj + V_ij^2)/(N-1)`.
pub fn covariance_stat_var(cov: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    let denom = (n - 1) as f64;
    let mut out = DMatrix::zeros(4, 4);
    for i in 0..4 {
        for j in 0..4 {
            out[(i, j)] = if i == j {
                2.0 * cov[(i, i)] * cov[(i, i)] / denom
            } else {
                (cov[(i, i)] * cov[(j, j)] + cov[(i, j)] * cov[(i, j)]) / denom
            };
        }
    }
    out
}

/// Reconstructed covariance with statistical error model.
#[derive(Debug, Clone, PartialEq)]
pub struct CovEstimate {
    /// `V_hat = Cov(on) - Cov(off) + I/4`.
    pub v_hat: DMatrix<f64>,
    /// Per-entry sampling variance of `V_hat` (on and off contributions add).
    pub stat_var: DMatrix<f64>,
    /// `V_hat -/+ 1 sigma` entrywise.
    pub worst_case_lo: DMatrix<f64>,
    pub worst_case_hi: DMatrix<f64>,
    pub n: usize,
}

fn chains_match(a: &OutputChain, b: &OutputChain) -> bool {
    a == b
}

/// Reconstruct the device covariance from pump-on and pump-off records.
pub fn reconstruct_cov(on: &QuadratureRecord, off: &QuadratureRecord) -> Result<CovEstimate> {
    if on.len() != off.len() {
        return Err(CoreError::RecordMismatch(format!(
            "sample counts differ: {} vs {}",
            on.len(),
            off.len()
        )));
    }
    if !chains_match(&on.chains[0], &off.chains[0]) || !chains_match(&on.chains[1], &off.chains[1])
    {
        return Err(CoreError::RecordMismatch(
            "output chains differ between records".into(),
        ));
    }
    let cov_on = sample_covariance(on);
    let cov_off = sample_covariance(off);
    let v_hat = &cov_on - &cov_off + DMatrix::identity(4, 4) * 0.25;
    let stat_var = covariance_stat_var(&cov_on, on.len()) + covariance_stat_var(&cov_off, off.len());
    let sigma = stat_var.map(f64::sqrt);
    Ok(CovEstimate {
        worst_case_lo: &v_hat - &sigma,
        worst_case_hi: &v_hat + &sigma,
        v_hat,
        stat_var,
        n: on.len(),
    })
}

/// 2D probability-density histogram of one quadrature pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram2d {
    pub bins: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    /// Row-major `bins x bins`, `density[iy * bins + ix]`.
    pub density: Vec<f64>,
}

impl Histogram2d {
    pub fn bin_area(&self) -> f64 {
        let dx = (self.x_range.1 - self.x_range.0) / self.bins as f64;
        let dy = (self.y_range.1 - self.y_range.0) / self.bins as f64;
        dx * dy
    }
}

/// Histogram the `(quad_pair.0, quad_pair.1)` columns of a record, normalized
/// to probability density over the full sample count.
pub fn histogram2d(
    record: &QuadratureRecord,
    quad_pair: (usize, usize),
    bins: usize,
    x_range: (f64, f64),
    y_range: (f64, f64),
) -> Result<Histogram2d> {
    if bins < 8 {
        return Err(CoreError::TooFewBins(bins));
    }
    if !(x_range.1 > x_range.0) || !(y_range.1 > y_range.0) {
        return Err(CoreError::EmptyRange);
    }
    let (qx, qy) = quad_pair;
    if qx >= 4 || qy >= 4 {
        return Err(CoreError::RecordMismatch(format!(
            "quadrature index out of range: ({qx}, {qy})"
        )));
    }
    let mut counts = vec![0u64; bins * bins];
    let dx = (x_range.1 - x_range.0) / bins as f64;
    let dy = (y_range.1 - y_range.0) / bins as f64;
    for s in &record.samples {
        let ix = ((s[qx] - x_range.0) / dx).floor();
        let iy = ((s[qy] - y_range.0) / dy).floor();
        if ix >= 0.0 && iy >= 0.0 && (ix as usize) < bins && (iy as usize) < bins {
            counts[iy as usize * bins + ix as usize] += 1;
        }
    }
    let norm = record.len() as f64 * dx * dy;
    Ok(Histogram2d {
        bins,
        x_range,
        y_range,
        density: counts.into_iter().map(|c| c as f64 / norm).collect(),
    })
}

/// Signed difference of two density histograms over the same grid (pump on
/// minus pump off). Integrates to ~0 when both records have equal counts.
pub fn histogram_difference(
    on: &QuadratureRecord,
    off: &QuadratureRecord,
    quad_pair: (usize, usize),
    bins: usize,
    x_range: (f64, f64),
    y_range: (f64, f64),
) -> Result<Histogram2d> {
    let h_on = histogram2d(on, quad_pair, bins, x_range, y_range)?;
    let h_off = histogram2d(off, quad_pair, bins, x_range, y_range)?;
    Ok(Histogram2d {
        bins,
        x_range,
        y_range,
        density: h_on
            .density
            .iter()
            .zip(h_off.density.iter())
            .map(|(a, b)| a - b)
            .collect(),
    })
}

/// Envelope of one scalar measure over the worst-case corners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bound {
    pub lo: f64,
    pub hi: f64,
}

impl Bound {
    fn of(values: &[f64]) -> Option<Bound> {
        if values.is_empty() {
            return None;
        }
        Some(Bound {
            lo: values.iter().cloned().fold(f64::INFINITY, f64::min),
            hi: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

/// Entanglement report with worst-case error bars.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCaseReport {
    pub point: EntanglementReport,
    pub delta_epr_minus_db: Bound,
    pub e_n: Bound,
    pub e_f: Option<Bound>,
    pub purity: Bound,
    pub delta_simon: Bound,
    /// Corners where a measure could not be evaluated (unphysical matrix).
    pub corners_skipped: usize,
    pub corners_evaluated: usize,
}

/// Worst-case error propagation: every measure is recomputed at each corner
/// of `{V_hat +- 1 sigma per unique entry} x {vacuum level scaled by
/// 1 -+ fraction}` and the min/max envelope is reported.
pub fn worst_case_report(
    estimate: &CovEstimate,
    vacuum_calibration_uncertainty: f64,
) -> Result<WorstCaseReport> {
    if !(0.0..=0.5).contains(&vacuum_calibration_uncertainty) {
        return Err(CoreError::OutOfRange {
            name: "vacuum_calibration_uncertainty",
            value: vacuum_calibration_uncertainty,
            lo: 0.0,
            hi: 0.5,
        });
    }
    let point = measures::report(&estimate.v_hat, None)?;
    let sigma = estimate.stat_var.map(f64::sqrt);

    // unique entries of the symmetric 4x4: 10 signs
    let entries: Vec<(usize, usize)> = (0..4)
        .flat_map(|i| (i..4).map(move |j| (i, j)))
        .collect();
    let vacuum_scales = if vacuum_calibration_uncertainty == 0.0 {
        vec![1.0]
    } else {
        vec![
            1.0 - vacuum_calibration_uncertainty,
            1.0 + vacuum_calibration_uncertainty,
        ]
    };

    let mut duan_db_vals = vec![point.delta_epr_minus_db];
    let mut en_vals = vec![point.e_n];
    let mut ef_vals: Vec<f64> = point.e_f.into_iter().collect();
    let mut mu_vals = vec![point.purity];
    let mut simon_vals = vec![point.delta_simon];
    let mut skipped = 0usize;
    let mut evaluated = 0usize;

    for signs in 0..(1u32 << entries.len()) {
        let mut v = estimate.v_hat.clone();
        for (bit, &(i, j)) in entries.iter().enumerate() {
            let s = if signs >> bit & 1 == 1 { 1.0 } else { -1.0 };
            v[(i, j)] += s * sigma[(i, j)];
            if i != j {
                v[(j, i)] = v[(i, j)];
            }
        }
        for &scale in &vacuum_scales {
            let mut vc = v.clone();
            for d in 0..4 {
                vc[(d, d)] += (scale - 1.0) * 0.25;
            }
            evaluated += 1;
            match measures::report(&vc, None) {
                Ok(rep) => {
                    duan_db_vals.push(rep.delta_epr_minus_db);
                    en_vals.push(rep.e_n);
                    if let Some(ef) = rep.e_f {
                        ef_vals.push(ef);
                    }
                    mu_vals.push(rep.purity);
                    simon_vals.push(rep.delta_simon);
                }
                Err(_) => skipped += 1,
            }
        }
    }

    Ok(WorstCaseReport {
        point,
        delta_epr_minus_db: Bound::of(&duan_db_vals).unwrap(),
        e_n: Bound::of(&en_vals).unwrap(),
        e_f: Bound::of(&ef_vals),
        purity: Bound::of(&mu_vals).unwrap(),
        delta_simon: Bound::of(&simon_vals).unwrap(),
        corners_skipped: skipped,
        corners_evaluated: evaluated,
    })
}
