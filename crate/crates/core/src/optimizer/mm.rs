//! Minorization-maximization outer loop.

use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::error::{IsacError, Result};
use crate::model::{Budgets, DesignPoint, NoiseLevels};
use crate::scenario::ChannelSet;

use super::init::initialize_feasible;
use super::rank_one::{recover_design, RecoveryReport};
use super::subproblem::solve_subproblem;
use super::surrogate::{transformed_rate_rx, transformed_rate_tx, transformed_secrecy};
use super::{MmSettings, TransformedPoint};

#[derive(Debug, Clone, Default, Serialize)]
pub struct MmTrace {
    /// `tr(G(ΣΓ+Ω^TX)G^H)` at `Θ^(0), Θ^(1), ...`.
    pub objectives: Vec<f64>,
    /// Largest constraint violation of the transformed problem at each iterate.
    pub residuals: Vec<f64>,
    /// `‖Θ^(n) − Θ^(n−1)‖` for `n ≥ 1`.
    pub step_norms: Vec<f64>,
    pub statuses: Vec<String>,
    pub wall_time_s: Vec<f64>,
    pub converged: bool,
}

impl MmTrace {
    pub fn iterations(&self) -> usize {
        self.step_norms.len()
    }

    /// Whether the objective never fell by more than `rel` (relative) between iterates.
    pub fn is_monotone(&self, rel: f64) -> bool {
        self.objectives
            .windows(2)
            .all(|w| w[1] >= w[0] - rel * w[0].abs().max(f64::MIN_POSITIVE))
    }
}

#[derive(Debug, Clone)]
pub struct MmOutcome {
    pub design: DesignPoint,
    pub theta: TransformedPoint,
    pub trace: MmTrace,
    pub recovery: RecoveryReport,
}

/// Largest violation of the exact transformed constraints at `theta`.
pub fn transformed_residual(theta: &TransformedPoint, ch: &ChannelSet, budgets: &Budgets, noise: &NoiseLevels) -> Result<f64> {
    let mut worst = (theta.normalization(ch, noise) - 1.0).abs();
    for k in 0..theta.n_users() {
        worst = worst.max(budgets.secrecy_floor - transformed_secrecy(theta, ch, noise, k)?);
    }
    for i in 0..theta.n_tx() {
        worst = worst.max(transformed_rate_tx(theta, i)? - budgets.cap_tx);
        worst = worst.max(theta.power_residual(i, budgets.power));
    }
    for j in 0..theta.n_rx() {
        worst = worst.max(transformed_rate_rx(theta, ch, noise, j)? - budgets.cap_rx);
    }
    Ok(worst.max(0.0))
}

/// Runs the MM iteration from a strictly feasible start and recovers a rank-one design.
pub fn mm_optimize<R: Rng + ?Sized>(
    ch: &ChannelSet,
    budgets: &Budgets,
    noise: &NoiseLevels,
    settings: &MmSettings,
    rng: &mut R,
) -> Result<MmOutcome> {
    settings.validate()?;
    let start = Instant::now();
    let mut theta = initialize_feasible(ch, budgets, noise)?;
    let mut trace = MmTrace::default();
    trace.objectives.push(theta.objective(ch));
    trace.residuals.push(transformed_residual(&theta, ch, budgets, noise)?);
    trace.statuses.push("initial".into());
    trace.wall_time_s.push(start.elapsed().as_secs_f64());

    if ch.g_sense.norm() == 0.0 {
        // Zero objective everywhere: the feasible start is already optimal.
        trace.objectives.push(0.0);
        trace.residuals.push(trace.residuals[0]);
        trace.step_norms.push(0.0);
        trace.statuses.push("zero objective".into());
        trace.wall_time_s.push(start.elapsed().as_secs_f64());
        trace.converged = true;
    } else {
        for iteration in 1..=settings.max_iters {
            let solution = solve_subproblem(&theta, ch, budgets, noise, settings)?;
            let previous = *trace.objectives.last().unwrap();
            let slack = 10.0 * settings.solver_tol * previous.abs().max(1.0);
            if solution.objective < previous - slack {
                return Err(IsacError::NonMonotone { iteration, previous, current: solution.objective });
            }
            if solution.objective <= previous + slack {
                // No gain beyond solver accuracy: the anchor is a fixed point of its own surrogate.
                trace.objectives.push(previous);
                trace.residuals.push(*trace.residuals.last().unwrap());
                trace.step_norms.push(0.0);
                trace.statuses.push("fixed point".into());
                trace.wall_time_s.push(start.elapsed().as_secs_f64());
                trace.converged = true;
                break;
            }
            let step = solution.theta.distance(&theta);
            theta = solution.theta;
            trace.objectives.push(solution.objective);
            trace.residuals.push(transformed_residual(&theta, ch, budgets, noise)?);
            trace.step_norms.push(step);
            trace.statuses.push(solution.status);
            trace.wall_time_s.push(start.elapsed().as_secs_f64());
            if step <= settings.epsilon {
                trace.converged = true;
                break;
            }
        }
    }

    let (design, recovery) = recover_design(&theta, ch, budgets, noise, settings, rng)?;
    Ok(MmOutcome { design, theta, trace, recovery })
}
