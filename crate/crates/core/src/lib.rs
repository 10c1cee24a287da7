//! Deterministic Gaussian-state engine for continuous-variable microwave
//! quantum networks.
//!
//! The crate models nondegenerate two-mode squeezers (Josephson-mixer style
//! entanglers), Gaussian loss channels, teleportation and entanglement-swapping
//! circuits, heterodyne measurement records with output-chain calibration, and
//! every entanglement figure of merit used to characterize such experiments.
//!
//! # Units convention
//!
//! Quadratures are dimensionless with `[x, p] = i/2`, so the **vacuum variance
//! is 1/4 per quadrature** and the vacuum covariance matrix is `I/4`. Many
//! other libraries use vacuum = 1/2; rescale at the boundary if you mix them.
//! Quadratures are interleaved as `(x1, p1, x2, p2, ...)`. Angles are radians
//! internally; dB always means power dB (`ratio = 10^(dB/10)`), including
//! squeezing levels. A squeezer with parameter `r` has power gain
//! `G = cosh^2(r)`.

pub mod calibrate;
pub mod db;
pub mod entswap;
pub mod error;
pub mod gaussian;
pub mod measure_sim;
pub mod measures;
pub mod teleport;
pub mod tmsq;

pub use error::{CoreError, Result};
pub use gaussian::{GaussianState, GaussianMap, LossyChannel, SymplecticOp};

/// Reduced Planck constant, J*s (exact SI).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (exact SI).
pub const KB: f64 = 1.380_649e-23;
