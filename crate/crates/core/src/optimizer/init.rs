//! Strictly feasible starting point for the MM loop.
//!
//! Beamformers are steered inside the null space of the Eve channel, so the
//! leakage SINR is exactly zero and the secrecy rate reduces to the weakest
//! user rate. Maximum-ratio and zero-forcing directions (the latter also null
//! inter-user interference) are combined with a grid of per-user power shares,
//! and the start with the largest secrecy margin is kept. When Eve cannot be
//! nulled at all, unprojected maximum-ratio directions are used. The common scale and the
//! quantization variances are then pushed to the largest power that keeps
//! every fronthaul and power constraint strictly slack.

use crate::error::{IsacError, Result};
use crate::linalg::{outer, CMat, CVec};
use crate::model::{
    fronthaul_rate_rx, fronthaul_rate_tx, secrecy_margins, smallest_variance_within, Budgets, DesignPoint,
    NoiseLevels,
};
use crate::scenario::ChannelSet;

use super::transform::{to_transformed, RelaxedDesign};
use super::TransformedPoint;

/// Fraction of each budget left unused so the start is strictly interior.
const SLACK: f64 = 0.01;
const VAR_LO: f64 = 1e-12;
const VAR_HI: f64 = 1e12;
const BISECTION_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Steering {
    MaxRatio,
    ZeroForcing,
    /// Maximum ratio without the Eve projection, for arrays too small to null Eve.
    Unprojected,
}

/// Removes the components of `x` along an orthonormalized `span`.
fn project_out(x: &CVec, span: &[&CVec]) -> CVec {
    let mut basis: Vec<CVec> = Vec::new();
    for v in span {
        let mut u = (*v).clone();
        for b in &basis {
            u -= b * b.dotc(&u);
        }
        let norm = u.norm();
        if norm > 1e-12 * v.norm().max(1e-300) {
            basis.push(u.unscale(norm));
        }
    }
    let mut out = x.clone();
    for b in &basis {
        out -= b * b.dotc(&out);
    }
    out
}

fn directions(ch: &ChannelSet, steering: Steering) -> Option<CMat> {
    let k_users = ch.n_users();
    let mut beam = CMat::zeros(ch.tx_dim(), k_users);
    for k in 0..k_users {
        let mut span = if steering == Steering::Unprojected { vec![] } else { vec![&ch.h_eve] };
        if steering == Steering::ZeroForcing {
            span.extend(ch.h_users.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, h)| h));
        }
        let u = project_out(&ch.h_users[k], &span);
        let norm = u.norm();
        if norm <= 1e-9 * ch.h_users[k].norm() {
            return None;
        }
        beam.set_column(k, &u.unscale(norm * (k_users as f64).sqrt()));
    }
    Some(beam)
}

/// Scale a unit-power direction set to the largest strictly feasible power.
fn scaled_design(unit: &CMat, ch: &ChannelSet, budgets: &Budgets, noise: &NoiseLevels) -> Result<DesignPoint> {
    let n = ch.n_antennas;
    let cap_tx = budgets.cap_tx * (1.0 - SLACK);
    let cap_rx = budgets.cap_rx * (1.0 - SLACK);
    let mut unit_var = Vec::with_capacity(ch.n_tx);
    for i in 0..ch.n_tx {
        let block = unit.rows(i * n, n).into_owned();
        let var = smallest_variance_within(
            |v| {
                let d = DesignPoint::new(n, block.clone(), vec![v], vec![1.0])?;
                fronthaul_rate_tx(&d, 0)
            },
            cap_tx,
            VAR_LO,
            VAR_HI,
            BISECTION_STEPS,
        )?;
        unit_var.push(var);
    }
    // Tx rate is invariant under (√c W_i, c σ²), so power scales linearly in c.
    let scale_sq = (0..ch.n_tx)
        .map(|i| {
            let block_power = unit.rows(i * n, n).norm_squared() + n as f64 * unit_var[i];
            budgets.power * (1.0 - SLACK) / block_power
        })
        .fold(f64::INFINITY, f64::min);
    let beam = unit.scale(scale_sq.sqrt());
    let q_tx: Vec<f64> = unit_var.iter().map(|v| v * scale_sq).collect();
    let mut design = DesignPoint::new(n, beam, q_tx, vec![1.0; ch.n_rx])?;
    for j in 0..ch.n_rx {
        let mut probe = design.clone();
        design.q_rx[j] = smallest_variance_within(
            |v| {
                probe.q_rx[j] = v;
                fronthaul_rate_rx(&probe, ch, noise, j)
            },
            cap_rx,
            VAR_LO,
            VAR_HI,
            BISECTION_STEPS,
        )?;
    }
    Ok(design)
}

/// Per-user power shares: the equal split first, then a simplex grid for small `K`.
fn power_splits(n_users: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![1.0 / n_users as f64; n_users]];
    let steps = match n_users {
        2 => 20,
        3 => 10,
        _ => return out,
    };
    let mut push = |shares: Vec<usize>| {
        if shares.iter().all(|&s| s > 0) {
            out.push(shares.iter().map(|&s| s as f64 / steps as f64).collect());
        }
    };
    for a in 1..steps {
        if n_users == 2 {
            push(vec![a, steps - a]);
        } else {
            for b in 1..steps - a {
                push(vec![a, b, steps - a - b]);
            }
        }
    }
    out
}

/// Returns the strictly feasible rank-one start with the largest secrecy margin.
pub fn initial_design(ch: &ChannelSet, budgets: &Budgets, noise: &NoiseLevels) -> Result<DesignPoint> {
    budgets.validate()?;
    let k_users = ch.n_users();
    let mut best: Option<(f64, DesignPoint)> = None;
    for steering in [Steering::MaxRatio, Steering::ZeroForcing, Steering::Unprojected] {
        let Some(unit) = directions(ch, steering) else { continue };
        if steering == Steering::Unprojected && best.is_some() {
            break;
        }
        for shares in power_splits(k_users) {
            let mut weighted = unit.clone();
            for (k, share) in shares.iter().enumerate() {
                weighted.column_mut(k).scale_mut((share * k_users as f64).sqrt());
            }
            let design = scaled_design(&weighted, ch, budgets, noise)?;
            let margin = secrecy_margins(&design, ch, noise).into_iter().fold(f64::INFINITY, f64::min);
            if best.as_ref().is_none_or(|(m, _)| margin > *m) {
                best = Some((margin, design));
            }
        }
    }
    match best {
        Some((margin, design)) if margin > budgets.secrecy_floor => Ok(design),
        other => Err(IsacError::Infeasible {
            constraint: "secrecy",
            detail: format!(
                "best start reaches {:.4} bits, floor is {} bits",
                other.map_or(f64::NEG_INFINITY, |(m, _)| m),
                budgets.secrecy_floor
            ),
        }),
    }
}

/// Strictly feasible `Θ^(0)` for the transformed problem.
pub fn initialize_feasible(ch: &ChannelSet, budgets: &Budgets, noise: &NoiseLevels) -> Result<TransformedPoint> {
    let design = initial_design(ch, budgets, noise)?;
    let relaxed = RelaxedDesign {
        n_antennas: design.n_antennas,
        v: (0..design.n_users()).map(|k| outer(&design.w(k))).collect(),
        q_tx: design.q_tx,
        q_rx: design.q_rx,
    };
    to_transformed(&relaxed, ch, noise)
}
