//! Reference transmit designs for comparison with the optimizer.

use rand::Rng;

use crate::error::{IsacError, Result};
use crate::linalg::{complex_gaussian, CMat};
use crate::model::{fronthaul_rate_rx, fronthaul_rate_tx, smallest_variance_within, Budgets, DesignPoint, NoiseLevels};
use crate::optimizer::{mm_optimize, MmOutcome, MmSettings};
use crate::scenario::ChannelSet;

pub const QUANT_FLOOR: f64 = 1e-6;
const RX_CEILING: f64 = 1e6;
const BISECTION_STEPS: usize = 60;

/// Sets Tx-RRH `i` to full power with quantization variance `q`, keeping the beam direction.
fn fill_power(design: &mut DesignPoint, direction: &CMat, i: usize, q: f64, power: f64) {
    let n = design.n_antennas;
    let dir = direction.rows(i * n, n);
    let norm2 = dir.norm_squared();
    let scale = if norm2 > 0.0 { ((power - n as f64 * q).max(0.0) / norm2).sqrt() } else { 0.0 };
    design.beam.rows_mut(i * n, n).copy_from(&dir.scale(scale));
    design.q_tx[i] = q;
}

/// Channel-agnostic beamformers at full power, with the smallest quantization
/// variances meeting both fronthaul caps. Secrecy is not enforced.
pub fn random_beamforming_design<R: Rng + ?Sized>(
    ch: &ChannelSet,
    budgets: &Budgets,
    noise: &NoiseLevels,
    rng: &mut R,
) -> Result<DesignPoint> {
    budgets.validate()?;
    let n = ch.n_antennas;
    let direction = CMat::from_fn(n * ch.n_tx, ch.n_users(), |_, _| complex_gaussian(rng, 1.0));
    let mut design = DesignPoint::new(n, direction.clone(), vec![QUANT_FLOOR; ch.n_tx], vec![QUANT_FLOOR; ch.n_rx])?;

    let q_max = budgets.power / n as f64;
    if QUANT_FLOOR >= q_max {
        return Err(IsacError::InvalidConfig(format!(
            "power budget {} leaves no room above the quantization floor",
            budgets.power
        )));
    }
    for i in 0..ch.n_tx {
        let rate_at = |q: f64| {
            let mut trial = design.clone();
            fill_power(&mut trial, &direction, i, q, budgets.power);
            fronthaul_rate_tx(&trial, i)
        };
        // At q = P / N_A the beam vanishes and the rate is zero.
        let q = smallest_variance_within(rate_at, budgets.cap_tx, QUANT_FLOOR, q_max, BISECTION_STEPS)?;
        fill_power(&mut design, &direction, i, q, budgets.power);
    }
    for j in 0..ch.n_rx {
        let rate_at = |q: f64| {
            let mut trial = design.clone();
            trial.q_rx[j] = q;
            fronthaul_rate_rx(&trial, ch, noise, j)
        };
        design.q_rx[j] = smallest_variance_within(rate_at, budgets.cap_rx, QUANT_FLOOR, RX_CEILING, BISECTION_STEPS)?;
    }
    Ok(design)
}

/// Transmit design for the distributed-sensing baseline: the optimized design,
/// evaluated with local uncompressed detection and majority fusion.
pub fn distributed_sensing_design<R: Rng + ?Sized>(
    ch: &ChannelSet,
    budgets: &Budgets,
    noise: &NoiseLevels,
    settings: &MmSettings,
    rng: &mut R,
) -> Result<DesignPoint> {
    let MmOutcome { design, .. } = mm_optimize(ch, budgets, noise, settings, rng)?;
    Ok(design)
}
