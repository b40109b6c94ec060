//! Charnes-Cooper change of variables between `(V, Q^TX, Q^RX)` and `Θ`.

use crate::error::{IsacError, Result};
use crate::linalg::{real_trace, CMat};
use crate::model::NoiseLevels;
use crate::scenario::ChannelSet;

use super::TransformedPoint;

/// Relaxed design: covariances `V_k` in place of `w_k w_k^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedDesign {
    pub n_antennas: usize,
    pub v: Vec<CMat>,
    pub q_tx: Vec<f64>,
    pub q_rx: Vec<f64>,
}

impl RelaxedDesign {
    fn transmit_covariance(&self) -> CMat {
        let n = self.n_antennas;
        let dim = n * self.q_tx.len();
        let mut s = self.v.iter().fold(CMat::zeros(dim, dim), |acc, v| acc + v);
        for (i, &q) in self.q_tx.iter().enumerate() {
            for a in 0..n {
                s[(i * n + a, i * n + a)] += q;
            }
        }
        s
    }
}

/// Sensing-SINR denominator `tr(C(ΣV + Q^TX)C^H) + Σ_j N_A σ²_y,j + Σ_j N_A σ²_RX,j`.
pub fn xi_denominator(design: &RelaxedDesign, ch: &ChannelSet, noise: &NoiseLevels) -> f64 {
    let n = design.n_antennas as f64;
    let s = design.transmit_covariance();
    let clutter = real_trace(&(&ch.c_clutter * s * ch.c_clutter.adjoint()));
    let awgn: f64 = noise.rx.iter().map(|v| n * v).sum();
    let quant: f64 = design.q_rx.iter().map(|v| n * v).sum();
    clutter + awgn + quant
}

pub fn to_transformed(design: &RelaxedDesign, ch: &ChannelSet, noise: &NoiseLevels) -> Result<TransformedPoint> {
    let xi = xi_denominator(design, ch, noise);
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(IsacError::DegenerateScale(1.0 / xi));
    }
    let z = 1.0 / xi;
    Ok(TransformedPoint {
        n_antennas: design.n_antennas,
        gamma: design.v.iter().map(|v| v.scale(z)).collect(),
        omega_tx: design.q_tx.iter().map(|q| q * z).collect(),
        omega_rx: design.q_rx.iter().map(|q| q * z).collect(),
        z,
    })
}

pub fn from_transformed(theta: &TransformedPoint) -> Result<RelaxedDesign> {
    if !(theta.z > 0.0 && theta.z.is_finite()) {
        return Err(IsacError::DegenerateScale(theta.z));
    }
    let inv = 1.0 / theta.z;
    Ok(RelaxedDesign {
        n_antennas: theta.n_antennas,
        v: theta.gamma.iter().map(|g| g.scale(inv)).collect(),
        q_tx: theta.omega_tx.iter().map(|w| w * inv).collect(),
        q_rx: theta.omega_rx.iter().map(|w| w * inv).collect(),
    })
}
