//! Joint beamforming and fronthaul-quantization design.
//!
//! The sensing-SINR maximization is a linear-fractional program over the
//! relaxed covariances `V_k = w_k w_k^H` and the quantization variances.
//! [`transform`] applies the Charnes-Cooper change of variables, [`surrogate`]
//! builds the first-order bounds of the difference-of-concave constraints,
//! [`subproblem`] solves one convexified step, and [`mm`] runs the outer
//! minorization-maximization loop before [`rank_one`] recovers beamformers.

pub mod init;
pub mod mm;
pub mod rank_one;
pub mod subproblem;
pub mod surrogate;
pub mod transform;

use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};
use crate::linalg::{diag_block, identity, real_trace, row_block, CMat};
use crate::model::NoiseLevels;
use crate::scenario::ChannelSet;

pub use init::initialize_feasible;
pub use mm::{mm_optimize, MmOutcome, MmTrace};
pub use rank_one::{extract_rank_one, recover_design, RankOneReport, RecoveryReport};
pub use subproblem::{solve_subproblem, SubproblemSolution};
pub use surrogate::{
    fronthaul_rx_surrogate, fronthaul_tx_surrogate, logdet_tangent, secrecy_surrogate,
    transformed_rate_rx, transformed_rate_tx, transformed_secrecy,
};
pub use transform::{from_transformed, to_transformed, xi_denominator, RelaxedDesign};

/// Smallest admissible argument of any logarithm inside the MM loop.
pub const LOG_FLOOR: f64 = 1e-12;

/// Charnes-Cooper variables `(Γ, Ω^TX, Ω^RX, z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedPoint {
    pub n_antennas: usize,
    pub gamma: Vec<CMat>,
    /// `Ω_i^TX = omega_tx[i] · I`.
    pub omega_tx: Vec<f64>,
    pub omega_rx: Vec<f64>,
    pub z: f64,
}

impl TransformedPoint {
    pub fn n_users(&self) -> usize {
        self.gamma.len()
    }

    pub fn n_tx(&self) -> usize {
        self.omega_tx.len()
    }

    pub fn n_rx(&self) -> usize {
        self.omega_rx.len()
    }

    pub fn dim(&self) -> usize {
        self.n_antennas * self.n_tx()
    }

    pub fn gamma_sum(&self) -> CMat {
        let n = self.dim();
        self.gamma.iter().fold(CMat::zeros(n, n), |acc, g| acc + g)
    }

    pub fn omega_tx_matrix(&self) -> CMat {
        let n = self.n_antennas;
        let mut m = CMat::zeros(self.dim(), self.dim());
        for (i, &w) in self.omega_tx.iter().enumerate() {
            for a in 0..n {
                m[(i * n + a, i * n + a)] = w.into();
            }
        }
        m
    }

    /// `Σ_k Γ_k + Ω^TX`.
    pub fn tx_covariance(&self) -> CMat {
        self.gamma_sum() + self.omega_tx_matrix()
    }

    /// `Σ_{k'≠k} Γ_k' + Ω^TX`.
    pub fn interference_covariance(&self, k: usize) -> CMat {
        self.tx_covariance() - &self.gamma[k]
    }

    /// `Γ_i + Ω_i^TX` where `Γ_i` is the i-th diagonal block of `Σ_k Γ_k`.
    pub fn tx_block(&self, i: usize) -> CMat {
        let n = self.n_antennas;
        diag_block(&self.gamma_sum(), i, n) + identity(n).scale(self.omega_tx[i])
    }

    /// `tr(G (ΣΓ + Ω^TX) G^H)`.
    pub fn objective(&self, ch: &ChannelSet) -> f64 {
        real_trace(&(&ch.g_sense * self.tx_covariance() * ch.g_sense.adjoint()))
    }

    /// Left-hand side of the normalization equality (equals 1 when feasible).
    pub fn normalization(&self, ch: &ChannelSet, noise: &NoiseLevels) -> f64 {
        let n = self.n_antennas as f64;
        let clutter = real_trace(&(&ch.c_clutter * self.tx_covariance() * ch.c_clutter.adjoint()));
        let awgn: f64 = noise.rx.iter().map(|v| n * v).sum();
        let quant: f64 = self.omega_rx.iter().map(|w| n * w).sum();
        clutter + self.z * awgn + quant
    }

    /// Transmit power constraint value `tr(Γ_i + Ω_i) − z P`.
    pub fn power_residual(&self, i: usize, power: f64) -> f64 {
        real_trace(&self.tx_block(i)) - self.z * power
    }

    /// `a(Θ)` for Rx-RRH `j`.
    pub fn rx_argument(&self, ch: &ChannelSet, noise: &NoiseLevels, j: usize) -> CMat {
        let n = self.n_antennas;
        let b = row_block(&ch.g_sense, j, n) + row_block(&ch.c_clutter, j, n);
        &b * self.tx_covariance() * b.adjoint()
            + identity(n).scale(self.z * noise.rx[j] + self.omega_rx[j])
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n_antennas: self.n_antennas,
            gamma: self.gamma.iter().map(|g| g.scale(c)).collect(),
            omega_tx: self.omega_tx.iter().map(|w| w * c).collect(),
            omega_rx: self.omega_rx.iter().map(|w| w * c).collect(),
            z: self.z * c,
        }
    }

    /// Euclidean distance over all real coordinates of `(Γ, Ω^TX, Ω^RX, z)`.
    pub fn distance(&self, other: &Self) -> f64 {
        let gamma: f64 = self
            .gamma
            .iter()
            .zip(&other.gamma)
            .map(|(a, b)| (a - b).norm_squared())
            .sum();
        let scalars: f64 = self
            .omega_tx
            .iter()
            .zip(&other.omega_tx)
            .chain(self.omega_rx.iter().zip(&other.omega_rx))
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        (gamma + scalars + (self.z - other.z).powi(2)).sqrt()
    }
}

/// Outer-loop and subproblem controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MmSettings {
    /// Stop when `‖Θ^(n) − Θ^(n−1)‖ ≤ epsilon`.
    pub epsilon: f64,
    pub max_iters: usize,
    pub solver_tol: f64,
    /// `λ₂/λ₁` below which a relaxed covariance counts as rank one.
    pub rank_tol: f64,
}

impl Default for MmSettings {
    fn default() -> Self {
        Self { epsilon: 1e-4, max_iters: 100, solver_tol: 1e-7, rank_tol: 1e-3 }
    }
}

impl MmSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.solver_tol > 0.0 && self.rank_tol > 0.0 && self.max_iters >= 1) {
            return Err(IsacError::InvalidConfig(format!("invalid MM settings {self:?}")));
        }
        Ok(())
    }
}
