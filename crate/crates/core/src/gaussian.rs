//! Phase-space calculus for multimode Gaussian states.
//!
//! States are `(mean, cov)` pairs over interleaved quadratures
//! `(x1, p1, x2, p2, ...)` with vacuum variance 1/4. Symplectic operators act
//! as `cov -> S cov S^T`; lossy channels as `cov -> X cov X^T + Y`.

use nalgebra::{DMatrix, DVector};

use crate::error::{CoreError, Result};

/// Vacuum variance per quadrature under the `[x, p] = i/2` convention.
pub const VACUUM_VARIANCE: f64 = 0.25;

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
const SYMPLECTIC_TOL: f64 = 1e-10;

/// Symplectic form: block diagonal of `[[0, 1], [-1, 0]]` per mode.
pub fn omega(n_modes: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        m[(2 * k, 2 * k + 1)] = 1.0;
        m[(2 * k + 1, 2 * k)] = -1.0;
    }
    m
}

/// 2x2 rotation block `R(phi) = [[cos, sin], [-sin, cos]]`.
pub fn rotation_block(phi: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[phi.cos(), phi.sin(), -phi.sin(), phi.cos()])
}

/// 2x2 parity block `Z = diag(1, -1)`.
pub fn z_block() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

fn check_mode(index: usize, n_modes: usize) -> Result<()> {
    if index >= n_modes {
        return Err(CoreError::ModeOutOfRange { index, n_modes });
    }
    Ok(())
}

/// A multimode Gaussian state: mean quadrature vector plus covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    n_modes: usize,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// Vacuum on `n_modes` modes: zero mean, `cov = I/4`.
    pub fn vacuum(n_modes: usize) -> Self {
        Self {
            n_modes,
            mean: DVector::zeros(2 * n_modes),
            cov: DMatrix::identity(2 * n_modes, 2 * n_modes) * VACUUM_VARIANCE,
        }
    }

    /// Build a state from raw mean and covariance, validating symmetry (1e-12)
    /// and positive semidefiniteness (eigenvalues >= -1e-10).
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != cov.ncols() || cov.nrows() % 2 != 0 || cov.nrows() != mean.len() {
            return Err(CoreError::InvalidCovariance(format!(
                "shape {}x{} with mean length {}",
                cov.nrows(),
                cov.ncols(),
                mean.len()
            )));
        }
        let scale = cov.abs().max().max(1.0);
        let asym = (&cov - cov.transpose()).abs().max();
        if asym > SYMMETRY_TOL * scale {
            return Err(CoreError::NotSymmetric(asym));
        }
        let eig = cov.clone().symmetric_eigenvalues();
        let min_eig = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -PSD_TOL * scale {
            return Err(CoreError::NotPositiveSemidefinite(min_eig));
        }
        Ok(Self {
            n_modes: cov.nrows() / 2,
            mean,
            cov,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Symplectic eigenvalues of the covariance matrix (moduli of the
    /// eigenvalues of `Omega V`, one per mode, descending).
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        symplectic_eigenvalues(&self.cov)
    }

    /// Heisenberg validity predicate `V + (i/4) Omega >= 0`, i.e. every
    /// symplectic eigenvalue is at least 1/4. Not enforced at construction:
    /// covariance matrices reconstructed from measured data may violate it.
    pub fn is_physical(&self, tol: f64) -> bool {
        self.symplectic_eigenvalues()
            .iter()
            .all(|nu| *nu >= VACUUM_VARIANCE - tol)
    }

    /// Gaussian marginal on a subset of modes (rows/columns are simply kept).
    pub fn keep_modes(&self, modes: &[usize]) -> Result<Self> {
        for &m in modes {
            check_mode(m, self.n_modes)?;
        }
        let idx: Vec<usize> = modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        let mean = DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.mean[i]));
        let mut cov = DMatrix::zeros(idx.len(), idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                cov[(a, b)] = self.cov[(i, j)];
            }
        }
        GaussianState::new(mean, cov)
    }
}

/// Anything that maps Gaussian states to Gaussian states.
pub trait GaussianMap {
    fn apply(&self, state: &GaussianState) -> Result<GaussianState>;
}

/// A real `2n x 2n` matrix satisfying `S Omega S^T = Omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticOp {
    matrix: DMatrix<f64>,
}

impl SymplecticOp {
    /// Wrap a matrix, verifying symplecticity. The tolerance scales with the
    /// squared matrix norm so that extreme squeezers (cosh r ~ 1e6), whose
    /// `cosh^2 - sinh^2 = 1` cancellation carries ulp-level error, still
    /// validate; moderate matrices are held to 1e-10.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() % 2 != 0 {
            return Err(CoreError::InvalidCovariance(format!(
                "operator shape {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let n = matrix.nrows() / 2;
        let om = omega(n);
        let dev = (&matrix * &om * matrix.transpose() - &om).abs().max();
        let scale = matrix.abs().max();
        if dev > SYMPLECTIC_TOL * (scale * scale).max(1.0) {
            return Err(CoreError::NotSymplectic(dev));
        }
        Ok(Self { matrix })
    }

    pub fn identity(n_modes: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// `compose(B, A)` acts as "A first, then B".
    pub fn compose(later: &SymplecticOp, earlier: &SymplecticOp) -> Result<SymplecticOp> {
        if later.n_modes() != earlier.n_modes() {
            return Err(CoreError::DimensionMismatch {
                op_modes: later.n_modes(),
                state_modes: earlier.n_modes(),
            });
        }
        SymplecticOp::new(&later.matrix * &earlier.matrix)
    }
}

impl GaussianMap for SymplecticOp {
    fn apply(&self, state: &GaussianState) -> Result<GaussianState> {
        if self.n_modes() != state.n_modes() {
            return Err(CoreError::DimensionMismatch {
                op_modes: self.n_modes(),
                state_modes: state.n_modes(),
            });
        }
        let mean = &self.matrix * state.mean();
        let cov = &self.matrix * state.cov() * self.matrix.transpose();
        GaussianState::new(mean, symmetrize(cov))
    }
}

/// Gaussian channel pair `(X, Y)`: `mean -> X mean`, `cov -> X cov X^T + Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossyChannel {
    x: DMatrix<f64>,
    y: DMatrix<f64>,
    transmissions: Vec<f64>,
}

impl LossyChannel {
    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    /// Per-mode power transmissions this channel was built from.
    pub fn transmissions(&self) -> &[f64] {
        &self.transmissions
    }

    pub fn n_modes(&self) -> usize {
        self.x.nrows() / 2
    }
}

impl GaussianMap for LossyChannel {
    fn apply(&self, state: &GaussianState) -> Result<GaussianState> {
        if self.n_modes() != state.n_modes() {
            return Err(CoreError::DimensionMismatch {
                op_modes: self.n_modes(),
                state_modes: state.n_modes(),
            });
        }
        let mean = &self.x * state.mean();
        let cov = &self.x * state.cov() * self.x.transpose() + &self.y;
        GaussianState::new(mean, symmetrize(cov))
    }
}

/// Force exact symmetry: `(M + M^T)/2`. Applied after every map to suppress
/// floating-point drift.
pub fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

/// Two-mode squeezer acting on `modes = (a, b)` of an `n_modes` register.
///
/// Diagonal blocks `cosh(r) I2` on the target modes, cross blocks
/// `sinh(r) Z R(phi_p)`, identity elsewhere. `r >= 0`; the pump phase absorbs
/// the sign.
pub fn two_mode_squeeze(
    r: f64,
    phi_p: f64,
    modes: (usize, usize),
    n_modes: usize,
) -> Result<SymplecticOp> {
    if !r.is_finite() {
        return Err(CoreError::InvalidCovariance(format!("non-finite r = {r}")));
    }
    if r < 0.0 {
        return Err(CoreError::NegativeSqueeze(r));
    }
    let (a, b) = modes;
    if a == b {
        return Err(CoreError::DegenerateSqueeze);
    }
    check_mode(a, n_modes)?;
    check_mode(b, n_modes)?;

    let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
    let ch = r.cosh();
    let cross = z_block() * rotation_block(phi_p) * r.sinh();
    for q in 0..2 {
        m[(2 * a + q, 2 * a + q)] = ch;
        m[(2 * b + q, 2 * b + q)] = ch;
        for w in 0..2 {
            m[(2 * a + q, 2 * b + w)] = cross[(q, w)];
            m[(2 * b + q, 2 * a + w)] = cross[(q, w)];
        }
    }
    SymplecticOp::new(m)
}

/// Local phase rotation `R(phi)` on one mode, identity elsewhere.
pub fn phase_rotation(phi: f64, mode: usize, n_modes: usize) -> Result<SymplecticOp> {
    check_mode(mode, n_modes)?;
    let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
    let r = rotation_block(phi);
    for q in 0..2 {
        for w in 0..2 {
            m[(2 * mode + q, 2 * mode + w)] = r[(q, w)];
        }
    }
    SymplecticOp::new(m)
}

/// Directional coupler with power coupling `beta_c` between two paths:
/// `path1' = sqrt(1-b) path1 + sqrt(b) path2`,
/// `path2' = -sqrt(b) path1 + sqrt(1-b) path2`. Orthogonal, `C C^T = I`.
pub fn directional_coupler(
    beta_c: f64,
    paths: (usize, usize),
    n_modes: usize,
) -> Result<SymplecticOp> {
    if !(0.0..=1.0).contains(&beta_c) {
        return Err(CoreError::InvalidCoupling(beta_c));
    }
    let (a, b) = paths;
    if a == b {
        return Err(CoreError::DegenerateSqueeze);
    }
    check_mode(a, n_modes)?;
    check_mode(b, n_modes)?;
    let t = (1.0 - beta_c).sqrt();
    let c = beta_c.sqrt();
    let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
    for q in 0..2 {
        m[(2 * a + q, 2 * a + q)] = t;
        m[(2 * b + q, 2 * b + q)] = t;
        m[(2 * a + q, 2 * b + q)] = c;
        m[(2 * b + q, 2 * a + q)] = -c;
    }
    SymplecticOp::new(m)
}

/// Pure-loss (beamsplitter) channel with per-mode power transmission `eta`
/// against baths of occupation `n_th`:
/// `X = diag(sqrt(eta))`, `Y = diag((1 - eta)(1 + 2 n_th)/4)` per quadrature
/// pair.
pub fn pure_loss_channel(transmissions: &[f64], bath_occupations: &[f64]) -> Result<LossyChannel> {
    if transmissions.len() != bath_occupations.len() {
        return Err(CoreError::DimensionMismatch {
            op_modes: transmissions.len(),
            state_modes: bath_occupations.len(),
        });
    }
    for &eta in transmissions {
        if !(0.0..=1.0).contains(&eta) {
            return Err(CoreError::InvalidTransmission(eta));
        }
    }
    for &n in bath_occupations {
        if n < 0.0 {
            return Err(CoreError::NegativeOccupation(n));
        }
    }
    let n = transmissions.len();
    let mut x = DMatrix::zeros(2 * n, 2 * n);
    let mut y = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        let eta = transmissions[k];
        let noise = (1.0 - eta) * (1.0 + 2.0 * bath_occupations[k]) * VACUUM_VARIANCE;
        for q in 0..2 {
            x[(2 * k + q, 2 * k + q)] = eta.sqrt();
            y[(2 * k + q, 2 * k + q)] = noise;
        }
    }
    Ok(LossyChannel {
        x,
        y,
        transmissions: transmissions.to_vec(),
    })
}

/// Wigner density `W(xi) = exp(-1/2 d V^-1 d) / ((2 pi)^n sqrt(det V))` at a
/// phase-space point, with `d = xi - mean`. For two modes the prefactor is the
/// familiar `1/(4 pi^2 sqrt(det V))`.
pub fn wigner_density(state: &GaussianState, point: &[f64]) -> Result<f64> {
    let dim = 2 * state.n_modes();
    if point.len() != dim {
        return Err(CoreError::DimensionMismatch {
            op_modes: point.len() / 2,
            state_modes: state.n_modes(),
        });
    }
    let lu = state.cov().clone().lu();
    let det = lu.determinant();
    if !(det > 1e-300) {
        return Err(CoreError::DegenerateState(det));
    }
    let d = DVector::from_iterator(dim, point.iter().zip(state.mean().iter()).map(|(p, m)| p - m));
    let solved = lu
        .solve(&d)
        .ok_or(CoreError::DegenerateState(det))?;
    let quad = d.dot(&solved);
    let norm = (2.0 * std::f64::consts::PI).powi(state.n_modes() as i32) * det.sqrt();
    Ok((-0.5 * quad).exp() / norm)
}

/// Symplectic eigenvalues of a covariance matrix, descending.
pub fn symplectic_eigenvalues(cov: &DMatrix<f64>) -> Vec<f64> {
    let n = cov.nrows() / 2;
    let m = omega(n) * cov;
    let eig = m.complex_eigenvalues();
    let mut nus: Vec<f64> = eig.iter().map(|c| c.im.abs()).collect();
    nus.sort_by(|a, b| b.partial_cmp(a).unwrap());
    // eigenvalues come in +/- i nu pairs; keep one per mode
    nus.into_iter().step_by(2).collect()
}
