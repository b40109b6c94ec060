//! Beamformer recovery from the relaxed covariances.

use rand::Rng;
use serde::Serialize;

use crate::error::{IsacError, Result};
use crate::linalg::{complex_gaussian_vec, hermitian_eigen, psd_sqrt_factor, CMat, CVec};
use crate::model::{check_feasibility, sensing_sinr, Budgets, DesignPoint, FeasibilityReport, NoiseLevels};
use crate::scenario::ChannelSet;

use super::transform::from_transformed;
use super::{MmSettings, TransformedPoint};

/// Relative slack used to decide whether a recovered design needs rescaling.
pub const RECOVERY_TOL: f64 = 1e-6;
const RANDOMIZATION_SAMPLES: usize = 100;
const ZETA_STEPS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankOneReport {
    pub lambda1: f64,
    pub lambda2: f64,
    /// `λ₂/λ₁`, zero for a zero matrix.
    pub ratio: f64,
    pub zeta: f64,
}

/// Dominant eigen-direction `√λ₁ u₁` of a PSD matrix (before any `ζ` scaling).
pub fn extract_rank_one(v: &CMat) -> (CVec, RankOneReport) {
    let (values, vectors) = hermitian_eigen(v);
    let lambda1 = values.first().copied().unwrap_or(0.0).max(0.0);
    let lambda2 = values.get(1).copied().unwrap_or(0.0).max(0.0);
    let ratio = if lambda1 > 0.0 { lambda2 / lambda1 } else { 0.0 };
    let w = if lambda1 > 0.0 {
        vectors[0].scale(lambda1.sqrt())
    } else {
        CVec::zeros(v.nrows())
    };
    (w, RankOneReport { lambda1, lambda2, ratio, zeta: 1.0 })
}

#[derive(Debug, Clone, Serialize)]
pub struct RecoveryReport {
    pub per_user: Vec<RankOneReport>,
    pub all_rank_one: bool,
    pub randomized: bool,
}

fn design_from(beams: &[CVec], q_tx: &[f64], q_rx: &[f64], n_antennas: usize) -> Result<DesignPoint> {
    let dim = beams[0].len();
    let mut beam = CMat::zeros(dim, beams.len());
    for (k, w) in beams.iter().enumerate() {
        beam.set_column(k, w);
    }
    DesignPoint::new(n_antennas, beam, q_tx.to_vec(), q_rx.to_vec())
}

fn transmit_side_ok(report: &FeasibilityReport) -> bool {
    report.checks.iter().filter(|c| c.name != "secrecy").all(|c| c.pass)
}

/// Largest common `ζ ∈ (0, 1]` restoring the power and fronthaul constraints.
fn restore_transmit_side(
    design: &DesignPoint,
    ch: &ChannelSet,
    noise: &NoiseLevels,
    budgets: &Budgets,
) -> Result<(DesignPoint, f64)> {
    let at = |zeta: f64| -> Result<(DesignPoint, bool)> {
        let d = DesignPoint { beam: design.beam.scale(zeta), ..design.clone() };
        let ok = transmit_side_ok(&check_feasibility(&d, ch, noise, budgets, RECOVERY_TOL)?);
        Ok((d, ok))
    };
    let (d, ok) = at(1.0)?;
    if ok {
        return Ok((d, 1.0));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..ZETA_STEPS {
        let mid = 0.5 * (lo + hi);
        if at(mid)?.1 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((at(lo)?.0, lo))
}

/// Recover a rank-one design from a transformed point: dominant eigenvectors,
/// common `ζ` rescaling, and Gaussian randomization if secrecy is lost.
pub fn recover_design<R: Rng + ?Sized>(
    theta: &TransformedPoint,
    ch: &ChannelSet,
    budgets: &Budgets,
    noise: &NoiseLevels,
    settings: &MmSettings,
    rng: &mut R,
) -> Result<(DesignPoint, RecoveryReport)> {
    let relaxed = from_transformed(theta)?;
    let extracted: Vec<(CVec, RankOneReport)> = relaxed.v.iter().map(extract_rank_one).collect();
    let beams: Vec<CVec> = extracted.iter().map(|(w, _)| w.clone()).collect();
    let mut per_user: Vec<RankOneReport> = extracted.iter().map(|(_, r)| *r).collect();
    let all_rank_one = per_user.iter().all(|r| r.ratio <= settings.rank_tol);

    let design = design_from(&beams, &relaxed.q_tx, &relaxed.q_rx, relaxed.n_antennas)?;
    let (design, zeta) = restore_transmit_side(&design, ch, noise, budgets)?;
    per_user.iter_mut().for_each(|r| r.zeta = zeta);
    if check_feasibility(&design, ch, noise, budgets, RECOVERY_TOL)?.all_pass() {
        return Ok((design, RecoveryReport { per_user, all_rank_one, randomized: false }));
    }

    let factors: Vec<CMat> = relaxed.v.iter().map(psd_sqrt_factor).collect();
    let mut best: Option<(f64, DesignPoint, f64)> = None;
    for _ in 0..RANDOMIZATION_SAMPLES {
        let beams: Vec<CVec> = factors
            .iter()
            .map(|f| f * complex_gaussian_vec(rng, f.ncols(), 1.0))
            .collect();
        let candidate = design_from(&beams, &relaxed.q_tx, &relaxed.q_rx, relaxed.n_antennas)?;
        let (candidate, zeta) = restore_transmit_side(&candidate, ch, noise, budgets)?;
        if !check_feasibility(&candidate, ch, noise, budgets, RECOVERY_TOL)?.all_pass() {
            continue;
        }
        let score = sensing_sinr(&candidate, ch, noise);
        if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
            best = Some((score, candidate, zeta));
        }
    }
    match best {
        Some((_, design, zeta)) => {
            per_user.iter_mut().for_each(|r| r.zeta = zeta);
            Ok((design, RecoveryReport { per_user, all_rank_one, randomized: true }))
        }
        None => Err(IsacError::RankOneRejected(format!(
            "secrecy floor {} not met by the dominant eigenvectors or {RANDOMIZATION_SAMPLES} randomizations",
            budgets.secrecy_floor
        ))),
    }
}
