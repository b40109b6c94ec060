//! One convexified MM step, assembled as a conic program for Clarabel.
//!
//! Each Hermitian `Γ_k` is parametrized by the real and imaginary parts of
//! its upper triangle, and `Γ_k ⪰ 0` is imposed through the real embedding
//! `[[Re Γ, −Im Γ], [Im Γ, Re Γ]] ⪰ 0`. Every `log(affine)` that must stay
//! concave gets an epigraph variable `t ≤ ln(affine)` in an exponential cone;
//! everything else is linear in the decision vector.

use std::collections::BTreeMap;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
    SupportedConeT::{ExponentialConeT, NonnegativeConeT, PSDTriangleConeT, ZeroConeT},
};
use num_complex::Complex64;

use crate::error::{IsacError, Result};
use crate::linalg::{inverse_hpd, log2_det_hpd, outer, project_psd, row_block, CMat, CVec, LN_2};
use crate::model::{Budgets, NoiseLevels};
use crate::scenario::ChannelSet;

use super::surrogate::{floored_log2, SecrecyArgs};
use super::{MmSettings, TransformedPoint};

/// Affine function of `Θ`: `Σ_k Re tr(M_k Γ_k) + ω_tx·a + ω_rx·b + z·c + d`.
#[derive(Debug, Clone)]
pub(crate) struct AffineForm {
    pub gamma: Vec<Option<CMat>>,
    pub omega_tx: Vec<f64>,
    pub omega_rx: Vec<f64>,
    pub z: f64,
    pub constant: f64,
}

impl AffineForm {
    pub fn zero(n_users: usize, n_tx: usize, n_rx: usize) -> Self {
        Self {
            gamma: vec![None; n_users],
            omega_tx: vec![0.0; n_tx],
            omega_rx: vec![0.0; n_rx],
            z: 0.0,
            constant: 0.0,
        }
    }

    fn add_gamma(&mut self, k: usize, m: &CMat) {
        match &mut self.gamma[k] {
            Some(existing) => *existing += m,
            slot => *slot = Some(m.clone()),
        }
    }

    /// Adds `Re tr(M (Σ_{k∈users} Γ_k + Ω^TX))`.
    fn add_covariance_term(&mut self, m: &CMat, users: impl Iterator<Item = usize>, n_antennas: usize) {
        for k in users {
            self.add_gamma(k, m);
        }
        for i in 0..self.omega_tx.len() {
            let mut diag = 0.0;
            for a in 0..n_antennas {
                diag += m[(i * n_antennas + a, i * n_antennas + a)].re;
            }
            self.omega_tx[i] += diag;
        }
    }

    pub fn scaled(mut self, c: f64) -> Self {
        for g in self.gamma.iter_mut().flatten() {
            *g = g.scale(c);
        }
        self.omega_tx.iter_mut().for_each(|v| *v *= c);
        self.omega_rx.iter_mut().for_each(|v| *v *= c);
        self.z *= c;
        self.constant *= c;
        self
    }

    pub fn plus(mut self, other: &AffineForm) -> Self {
        for (k, g) in other.gamma.iter().enumerate() {
            if let Some(g) = g {
                self.add_gamma(k, g);
            }
        }
        for (a, b) in self.omega_tx.iter_mut().zip(&other.omega_tx) {
            *a += b;
        }
        for (a, b) in self.omega_rx.iter_mut().zip(&other.omega_rx) {
            *a += b;
        }
        self.z += other.z;
        self.constant += other.constant;
        self
    }

    #[cfg(test)]
    pub fn eval(&self, theta: &TransformedPoint) -> f64 {
        let gamma: f64 = self
            .gamma
            .iter()
            .zip(&theta.gamma)
            .filter_map(|(m, g)| m.as_ref().map(|m| (m * g).trace().re))
            .sum();
        let omega: f64 = self
            .omega_tx
            .iter()
            .zip(&theta.omega_tx)
            .chain(self.omega_rx.iter().zip(&theta.omega_rx))
            .map(|(a, b)| a * b)
            .sum();
        gamma + omega + self.z * theta.z + self.constant
    }
}

/// `h^H(Σ_{k∈users} Γ_k + Ω^TX)h + z·noise`.
fn quadratic_form(h: &CVec, users: &[usize], noise: f64, shape: (usize, usize, usize), n_antennas: usize) -> AffineForm {
    let mut f = AffineForm::zero(shape.0, shape.1, shape.2);
    f.add_covariance_term(&outer(h), users.iter().copied(), n_antennas);
    f.z = noise;
    f
}

/// Linear forms of every constraint and the objective, built from channel data and the anchor.
pub(crate) struct SubproblemForms {
    pub objective: AffineForm,
    pub normalization: AffineForm,
    /// Per user: (`A_k`, `E_k`, linearized part `B_k/B_k⁰ + D/D⁰` plus constants), all in bits.
    pub secrecy: Vec<SecrecyForms>,
    /// Per Tx-RRH: tangent part of the Tx rate bound (bits), excluding `−N_A log₂ ω_i`.
    pub tx_tangent: Vec<AffineForm>,
    pub rx_tangent: Vec<AffineForm>,
    /// Per Tx-RRH: `z P − tr(Γ_i + Ω_i)` (must be ≥ 0).
    pub power_slack: Vec<AffineForm>,
}

pub(crate) struct SecrecyForms {
    pub user_total: AffineForm,
    pub eve_interference: AffineForm,
    /// `log₂B⁰ + log₂D⁰ + (B/B⁰ − 1)/ln2 + (D/D⁰ − 1)/ln2`.
    pub linearized: AffineForm,
}

impl SubproblemForms {
    pub fn build(anchor: &TransformedPoint, ch: &ChannelSet, budgets: &Budgets, noise: &NoiseLevels) -> Result<Self> {
        let n = anchor.n_antennas;
        let (n_users, n_tx, n_rx) = (anchor.n_users(), anchor.n_tx(), anchor.n_rx());
        let shape = (n_users, n_tx, n_rx);
        let all: Vec<usize> = (0..n_users).collect();

        let mut objective = AffineForm::zero(n_users, n_tx, n_rx);
        objective.add_covariance_term(&(ch.g_sense.adjoint() * &ch.g_sense), all.iter().copied(), n);

        let mut normalization = AffineForm::zero(n_users, n_tx, n_rx);
        normalization.add_covariance_term(&(ch.c_clutter.adjoint() * &ch.c_clutter), all.iter().copied(), n);
        normalization.z = noise.rx.iter().map(|v| n as f64 * v).sum();
        normalization.omega_rx = vec![n as f64; n_rx];

        let mut secrecy = Vec::with_capacity(n_users);
        for k in 0..n_users {
            let others: Vec<usize> = all.iter().copied().filter(|&j| j != k).collect();
            let a0 = SecrecyArgs::at(anchor, ch, noise, k);
            let hk = &ch.h_users[k];
            let he = &ch.h_eve;
            let user_interference = quadratic_form(hk, &others, noise.user, shape, n);
            let eve_total = quadratic_form(he, &all, noise.eve, shape, n);
            let mut linearized = user_interference
                .scaled(1.0 / (a0.user_interference * LN_2))
                .plus(&eve_total.scaled(1.0 / (a0.eve_total * LN_2)));
            linearized.constant += floored_log2(a0.user_interference, "anchor user interference")?
                + floored_log2(a0.eve_total, "anchor eve total")?
                - 2.0 / LN_2;
            secrecy.push(SecrecyForms {
                user_total: quadratic_form(hk, &all, noise.user, shape, n),
                eve_interference: quadratic_form(he, &others, noise.eve, shape, n),
                linearized,
            });
        }

        let dim = anchor.dim();
        let mut tx_tangent = Vec::with_capacity(n_tx);
        let mut power_slack = Vec::with_capacity(n_tx);
        for i in 0..n_tx {
            let x1 = anchor.tx_block(i);
            let inv = inverse_hpd(&x1)?;
            let mut embedded = CMat::zeros(dim, dim);
            embedded.view_mut((i * n, i * n), (n, n)).copy_from(&inv);
            let mut f = AffineForm::zero(n_users, n_tx, n_rx);
            f.add_covariance_term(&embedded, all.iter().copied(), n);
            let mut f = f.scaled(1.0 / LN_2);
            f.constant = log2_det_hpd(&x1)? - n as f64 / LN_2;
            tx_tangent.push(f);

            let mut selector = CMat::zeros(dim, dim);
            for a in 0..n {
                selector[(i * n + a, i * n + a)] = Complex64::new(1.0, 0.0);
            }
            let mut p = AffineForm::zero(n_users, n_tx, n_rx);
            p.add_covariance_term(&selector, all.iter().copied(), n);
            let mut p = p.scaled(-1.0);
            p.z = budgets.power;
            power_slack.push(p);
        }

        let mut rx_tangent = Vec::with_capacity(n_rx);
        for j in 0..n_rx {
            let x1 = anchor.rx_argument(ch, noise, j);
            let inv = inverse_hpd(&x1)?;
            let b = row_block(&ch.g_sense, j, n) + row_block(&ch.c_clutter, j, n);
            let mut f = AffineForm::zero(n_users, n_tx, n_rx);
            f.add_covariance_term(&(b.adjoint() * &inv * &b), all.iter().copied(), n);
            let tr_inv = inv.trace().re;
            f.z = noise.rx[j] * tr_inv;
            f.omega_rx[j] = tr_inv;
            let mut f = f.scaled(1.0 / LN_2);
            f.constant = log2_det_hpd(&x1)? - n as f64 / LN_2;
            rx_tangent.push(f);
        }

        Ok(Self { objective, normalization, secrecy, tx_tangent, rx_tangent, power_slack })
    }
}

/// Positions of every scalar unknown inside Clarabel's decision vector.
struct Layout {
    n_users: usize,
    n_tx: usize,
    n_rx: usize,
    dim: usize,
}

impl Layout {
    fn gamma_len(&self) -> usize {
        self.dim * self.dim
    }
    fn gamma_start(&self, k: usize) -> usize {
        k * self.gamma_len()
    }
    fn omega_tx(&self, i: usize) -> usize {
        self.n_users * self.gamma_len() + i
    }
    fn omega_rx(&self, j: usize) -> usize {
        self.omega_tx(self.n_tx) + j
    }
    fn z(&self) -> usize {
        self.omega_rx(self.n_rx)
    }
    fn log_user_total(&self, k: usize) -> usize {
        self.z() + 1 + k
    }
    fn log_eve_interference(&self, k: usize) -> usize {
        self.z() + 1 + self.n_users + k
    }
    fn log_omega_tx(&self, i: usize) -> usize {
        self.z() + 1 + 2 * self.n_users + i
    }
    fn log_omega_rx(&self, j: usize) -> usize {
        self.log_omega_tx(self.n_tx) + j
    }
    fn n_vars(&self) -> usize {
        self.log_omega_rx(self.n_rx)
    }

    /// Index of `Re Γ_ab` and, off the diagonal, `Im Γ_ab` (for `a < b`) within one Γ block.
    fn herm(&self, a: usize, b: usize) -> (usize, Option<usize>) {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let n = self.dim;
        if a == b {
            (a, None)
        } else {
            // Off-diagonal pairs are numbered row-major over the strict upper triangle.
            let pair = a * n - a * (a + 1) / 2 + (b - a - 1);
            let offdiag = n * (n - 1) / 2;
            (n + pair, Some(n + offdiag + pair))
        }
    }

    /// Sparse coefficients of `form` over the decision vector.
    fn row(&self, form: &AffineForm) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for (k, m) in form.gamma.iter().enumerate() {
            let Some(m) = m else { continue };
            let base = self.gamma_start(k);
            for a in 0..self.dim {
                out.push((base + a, m[(a, a)].re));
                for b in (a + 1)..self.dim {
                    let (re, im) = self.herm(a, b);
                    out.push((base + re, m[(b, a)].re + m[(a, b)].re));
                    out.push((base + im.unwrap(), m[(a, b)].im - m[(b, a)].im));
                }
            }
        }
        for (i, &c) in form.omega_tx.iter().enumerate() {
            out.push((self.omega_tx(i), c));
        }
        for (j, &c) in form.omega_rx.iter().enumerate() {
            out.push((self.omega_rx(j), c));
        }
        out.push((self.z(), form.z));
        out.retain(|&(_, v)| v != 0.0);
        out
    }

    fn unpack(&self, x: &[f64], n_antennas: usize) -> TransformedPoint {
        let n = self.dim;
        let gamma = (0..self.n_users)
            .map(|k| {
                let base = self.gamma_start(k);
                CMat::from_fn(n, n, |a, b| {
                    let (re, im) = self.herm(a, b);
                    let im = im.map_or(0.0, |idx| x[base + idx]);
                    let sign = if a <= b { 1.0 } else { -1.0 };
                    Complex64::new(x[base + re], sign * im)
                })
            })
            .collect();
        TransformedPoint {
            n_antennas,
            gamma,
            omega_tx: (0..self.n_tx).map(|i| x[self.omega_tx(i)]).collect(),
            omega_rx: (0..self.n_rx).map(|j| x[self.omega_rx(j)]).collect(),
            z: x[self.z()],
        }
    }
}

/// Accumulates `A x + s = b` rows cone by cone.
struct ConeProgram {
    entries: BTreeMap<(usize, usize), f64>,
    b: Vec<f64>,
    cones: Vec<SupportedConeT<f64>>,
}

impl ConeProgram {
    fn new() -> Self {
        Self { entries: BTreeMap::new(), b: Vec::new(), cones: Vec::new() }
    }

    /// Appends one slack row `s = Σ coeffs·x + constant`.
    fn push_row(&mut self, coeffs: &[(usize, f64)], constant: f64) {
        let row = self.b.len();
        for &(col, v) in coeffs {
            *self.entries.entry((row, col)).or_insert(0.0) -= v;
        }
        self.b.push(constant);
    }

    fn matrix(&self, n_vars: usize) -> CscMatrix<f64> {
        let mut rows = Vec::with_capacity(self.entries.len());
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut vals = Vec::with_capacity(self.entries.len());
        for (&(r, c), &v) in &self.entries {
            if v != 0.0 {
                rows.push(r);
                cols.push(c);
                vals.push(v);
            }
        }
        CscMatrix::new_from_triplets(self.b.len(), n_vars, rows, cols, vals)
    }
}

#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    pub theta: TransformedPoint,
    pub objective: f64,
    pub status: String,
    pub iterations: u32,
    /// Normalization residual of the raw solver output before polishing.
    pub raw_normalization_residual: f64,
}

/// Maximize `tr(G(ΣΓ+Ω^TX)G^H)` over the surrogate-feasible set built at `anchor`.
pub fn solve_subproblem(
    anchor: &TransformedPoint,
    ch: &ChannelSet,
    budgets: &Budgets,
    noise: &NoiseLevels,
    settings: &MmSettings,
) -> Result<SubproblemSolution> {
    let forms = SubproblemForms::build(anchor, ch, budgets, noise)?;
    let layout = Layout { n_users: anchor.n_users(), n_tx: anchor.n_tx(), n_rx: anchor.n_rx(), dim: anchor.dim() };
    let n = anchor.n_antennas as f64;
    let mut prog = ConeProgram::new();

    prog.push_row(&layout.row(&forms.normalization), -1.0);
    prog.cones.push(ZeroConeT(1));

    let mut nonneg = 0;
    for (k, s) in forms.secrecy.iter().enumerate() {
        let mut coeffs = vec![
            (layout.log_user_total(k), 1.0 / LN_2),
            (layout.log_eve_interference(k), 1.0 / LN_2),
        ];
        coeffs.extend(layout.row(&s.linearized).into_iter().map(|(c, v)| (c, -v)));
        prog.push_row(&coeffs, -s.linearized.constant - budgets.secrecy_floor);
        nonneg += 1;
    }
    for (i, f) in forms.tx_tangent.iter().enumerate() {
        let mut coeffs: Vec<_> = layout.row(f).into_iter().map(|(c, v)| (c, -v)).collect();
        coeffs.push((layout.log_omega_tx(i), n / LN_2));
        prog.push_row(&coeffs, budgets.cap_tx - f.constant);
        nonneg += 1;
    }
    for (j, f) in forms.rx_tangent.iter().enumerate() {
        let mut coeffs: Vec<_> = layout.row(f).into_iter().map(|(c, v)| (c, -v)).collect();
        coeffs.push((layout.log_omega_rx(j), n / LN_2));
        prog.push_row(&coeffs, budgets.cap_rx - f.constant);
        nonneg += 1;
    }
    for p in &forms.power_slack {
        prog.push_row(&layout.row(p), p.constant);
        nonneg += 1;
    }
    prog.push_row(&[(layout.z(), 1.0)], 0.0);
    nonneg += 1;
    prog.cones.push(NonnegativeConeT(nonneg));

    let exp_cone = |prog: &mut ConeProgram, log_var: usize, arg: Vec<(usize, f64)>, constant: f64| {
        prog.push_row(&[(log_var, 1.0)], 0.0);
        prog.push_row(&[], 1.0);
        prog.push_row(&arg, constant);
        prog.cones.push(ExponentialConeT());
    };
    for (k, s) in forms.secrecy.iter().enumerate() {
        exp_cone(&mut prog, layout.log_user_total(k), layout.row(&s.user_total), s.user_total.constant);
        exp_cone(&mut prog, layout.log_eve_interference(k), layout.row(&s.eve_interference), s.eve_interference.constant);
    }
    for i in 0..layout.n_tx {
        exp_cone(&mut prog, layout.log_omega_tx(i), vec![(layout.omega_tx(i), 1.0)], 0.0);
    }
    for j in 0..layout.n_rx {
        exp_cone(&mut prog, layout.log_omega_rx(j), vec![(layout.omega_rx(j), 1.0)], 0.0);
    }

    // Real embedding of each Γ_k, vectorized as Clarabel's scaled upper triangle (column-major).
    let dim = layout.dim;
    let sqrt2 = std::f64::consts::SQRT_2;
    for k in 0..layout.n_users {
        let base = layout.gamma_start(k);
        for col in 0..2 * dim {
            for row in 0..=col {
                let scale = if row == col { 1.0 } else { sqrt2 };
                let (ra, rb) = (row % dim, col % dim);
                let (re, im) = layout.herm(ra, rb);
                let upper = ra <= rb;
                let entry: Vec<(usize, f64)> = match (row < dim, col < dim) {
                    (true, true) | (false, false) => vec![(base + re, scale)],
                    // top-right block is −Im Γ
                    (true, false) => im
                        .map(|idx| vec![(base + idx, if upper { -scale } else { scale })])
                        .unwrap_or_default(),
                    (false, true) => unreachable!("upper triangle only"),
                };
                prog.push_row(&entry, 0.0);
            }
        }
        prog.cones.push(PSDTriangleConeT(2 * dim));
    }

    let n_vars = layout.n_vars();
    let mut q = vec![0.0; n_vars];
    for (c, v) in layout.row(&forms.objective) {
        q[c] -= v;
    }
    let p = CscMatrix::zeros((n_vars, n_vars));
    let a = prog.matrix(n_vars);
    let solver_settings = DefaultSettings {
        verbose: false,
        max_iter: 200,
        tol_gap_abs: settings.solver_tol,
        tol_gap_rel: settings.solver_tol,
        tol_feas: settings.solver_tol.min(1e-8),
        ..DefaultSettings::default()
    };
    let mut solver = DefaultSolver::new(&p, &q, &a, &prog.b, &prog.cones, solver_settings)
        .map_err(|e| IsacError::Solver(format!("setup: {e:?}")))?;
    solver.solve();
    let status = solver.solution.status;
    match status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {}
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            return Err(IsacError::Infeasible {
                constraint: "surrogate subproblem",
                detail: format!("{status:?}"),
            })
        }
        other => return Err(IsacError::Solver(format!("{other:?}"))),
    }

    let raw = layout.unpack(&solver.solution.x, anchor.n_antennas);
    let raw_normalization_residual = (raw.normalization(ch, noise) - 1.0).abs();
    let theta = polish(raw, ch, noise)?;
    Ok(SubproblemSolution {
        objective: theta.objective(ch),
        theta,
        status: format!("{status:?}"),
        iterations: solver.solution.iterations,
        raw_normalization_residual,
    })
}

/// Clip tiny negative eigenvalues and rescale onto the normalization equality.
/// Every constraint of the transformed problem is homogeneous, so the rescaling
/// moves the point along a ray of equally feasible points.
pub(crate) fn polish(mut theta: TransformedPoint, ch: &ChannelSet, noise: &NoiseLevels) -> Result<TransformedPoint> {
    for g in theta.gamma.iter_mut() {
        *g = project_psd(g);
    }
    let lhs = theta.normalization(ch, noise);
    if !(lhs > 0.0 && lhs.is_finite() && theta.z > 0.0) {
        return Err(IsacError::DegenerateScale(theta.z));
    }
    Ok(theta.scaled(1.0 / lhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::complex_gaussian;
    use crate::optimizer::surrogate::{fronthaul_rx_surrogate, fronthaul_tx_surrogate, secrecy_surrogate};
    use crate::scenario::{draw_channels, tests::small_config};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_theta(rng: &mut ChaCha8Rng) -> TransformedPoint {
        TransformedPoint {
            n_antennas: 2,
            gamma: (0..2)
                .map(|_| {
                    let a = CMat::from_fn(4, 2, |_, _| complex_gaussian(rng, 1.0));
                    &a * a.adjoint()
                })
                .collect(),
            omega_tx: (0..2).map(|_| rng.random_range(0.01..0.5)).collect(),
            omega_rx: (0..2).map(|_| rng.random_range(0.01..0.5)).collect(),
            z: rng.random_range(0.5..2.0),
        }
    }

    #[test]
    fn herm_layout_is_a_bijection() {
        let layout = Layout { n_users: 1, n_tx: 1, n_rx: 1, dim: 4 };
        let mut seen = std::collections::BTreeSet::new();
        for a in 0..4 {
            for b in a..4 {
                let (re, im) = layout.herm(a, b);
                assert!(seen.insert(re));
                if let Some(im) = im {
                    assert!(seen.insert(im));
                }
            }
        }
        assert_eq!(seen.len(), 16);
        assert_eq!(*seen.iter().max().unwrap(), 15);
    }

    #[test]
    fn row_coefficients_reproduce_affine_eval() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let theta = random_theta(&mut rng);
        let layout = Layout { n_users: 2, n_tx: 2, n_rx: 2, dim: 4 };
        let mut x = vec![0.0; layout.n_vars()];
        for k in 0..2 {
            for a in 0..4 {
                for b in a..4 {
                    let (re, im) = layout.herm(a, b);
                    x[layout.gamma_start(k) + re] = theta.gamma[k][(a, b)].re;
                    if let Some(im) = im {
                        x[layout.gamma_start(k) + im] = theta.gamma[k][(a, b)].im;
                    }
                }
            }
        }
        for i in 0..2 {
            x[layout.omega_tx(i)] = theta.omega_tx[i];
            x[layout.omega_rx(i)] = theta.omega_rx[i];
        }
        x[layout.z()] = theta.z;
        let unpacked = layout.unpack(&x, 2);
        for (a, b) in unpacked.gamma.iter().zip(&theta.gamma) {
            assert!((a - b).norm() < 1e-12);
        }

        let m = CMat::from_fn(4, 4, |_, _| complex_gaussian(&mut rng, 1.0));
        let mut form = AffineForm::zero(2, 2, 2);
        form.gamma[1] = Some(m.clone());
        form.omega_tx = vec![0.3, -0.2];
        form.omega_rx = vec![1.1, 0.4];
        form.z = 2.5;
        let via_row: f64 = layout.row(&form).iter().map(|&(c, v)| v * x[c]).sum();
        assert!((via_row - form.eval(&theta)).abs() < 1e-10);
    }

    #[test]
    fn forms_agree_with_direct_surrogates() {
        let cfg = small_config();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ch = draw_channels(&cfg, &mut rng).unwrap();
        let noise = NoiseLevels::from_config(&cfg);
        let budgets = Budgets::from_config(&cfg);
        let anchor = random_theta(&mut rng);
        let theta = random_theta(&mut rng);
        let forms = SubproblemForms::build(&anchor, &ch, &budgets, &noise).unwrap();
        assert!((forms.objective.eval(&theta) - theta.objective(&ch)).abs() < 1e-10);
        assert!((forms.normalization.eval(&theta) - theta.normalization(&ch, &noise)).abs() < 1e-10);
        for k in 0..2 {
            let s = &forms.secrecy[k];
            let via_forms =
                s.user_total.eval(&theta).log2() + s.eve_interference.eval(&theta).log2() - s.linearized.eval(&theta);
            let direct = secrecy_surrogate(&theta, &anchor, &ch, &noise, k).unwrap();
            assert!((via_forms - direct).abs() < 1e-9, "{via_forms} vs {direct}");
        }
        for i in 0..2 {
            let via = forms.tx_tangent[i].eval(&theta) - 2.0 * theta.omega_tx[i].log2();
            assert!((via - fronthaul_tx_surrogate(&theta, &anchor, i).unwrap()).abs() < 1e-9);
            let via = forms.rx_tangent[i].eval(&theta) - 2.0 * theta.omega_rx[i].log2();
            assert!((via - fronthaul_rx_surrogate(&theta, &anchor, &ch, &noise, i).unwrap()).abs() < 1e-9);
            let power = forms.power_slack[i].eval(&theta);
            assert!((power + theta.power_residual(i, budgets.power)).abs() < 1e-10);
        }
    }
}
