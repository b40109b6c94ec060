//! Closed-form evaluators for power, SINRs, secrecy and fronthaul rates.
//!
//! Rates are in bits per symbol. Quantization noise covariances are scaled
//! identities, one scalar per RRH.

use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};
use crate::linalg::{identity, log2_det_hpd, real_trace, row_block, CMat, CVec};
use crate::scenario::{ChannelSet, ScenarioConfig};

/// Beamformers plus transmit/receive quantization variances.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignPoint {
    pub n_antennas: usize,
    /// Stacked `W`; column `k` is `w_k`, rows split into per-Tx-RRH blocks.
    pub beam: CMat,
    pub q_tx: Vec<f64>,
    pub q_rx: Vec<f64>,
}

impl DesignPoint {
    pub fn new(n_antennas: usize, beam: CMat, q_tx: Vec<f64>, q_rx: Vec<f64>) -> Result<Self> {
        if beam.nrows() != n_antennas * q_tx.len() {
            return Err(IsacError::Dimension(format!(
                "beam has {} rows, expected {}",
                beam.nrows(),
                n_antennas * q_tx.len()
            )));
        }
        Ok(Self { n_antennas, beam, q_tx, q_rx })
    }

    pub fn n_tx(&self) -> usize {
        self.q_tx.len()
    }

    pub fn n_rx(&self) -> usize {
        self.q_rx.len()
    }

    pub fn n_users(&self) -> usize {
        self.beam.ncols()
    }

    pub fn w(&self, k: usize) -> CVec {
        self.beam.column(k).into_owned()
    }

    /// `W_i`, the rows of Tx-RRH `i`.
    pub fn tx_block(&self, i: usize) -> Result<CMat> {
        check_index("tx rrh", i, self.n_tx())?;
        Ok(row_block(&self.beam, i, self.n_antennas))
    }

    /// Block-diagonal `Q^TX`.
    pub fn q_tx_matrix(&self) -> CMat {
        let n = self.n_antennas;
        let mut q = CMat::zeros(n * self.n_tx(), n * self.n_tx());
        for (i, &s) in self.q_tx.iter().enumerate() {
            for a in 0..n {
                q[(i * n + a, i * n + a)] = s.into();
            }
        }
        q
    }

    /// `W W^H + Q^TX`, the covariance of the transmitted signal.
    pub fn transmit_covariance(&self) -> CMat {
        &self.beam * self.beam.adjoint() + self.q_tx_matrix()
    }
}

/// Noise variances: users, Eve, and one AWGN variance per Rx-RRH.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseLevels {
    pub user: f64,
    pub eve: f64,
    pub rx: Vec<f64>,
}

impl NoiseLevels {
    pub fn from_config(config: &ScenarioConfig) -> Self {
        Self {
            user: config.var_noise_user,
            eve: config.var_noise_eve,
            rx: vec![config.var_noise_rx; config.n_rx],
        }
    }
}

/// Constraint right-hand sides; equal across RRH indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    pub power: f64,
    pub cap_tx: f64,
    pub cap_rx: f64,
    pub secrecy_floor: f64,
}

impl Budgets {
    pub fn from_config(config: &ScenarioConfig) -> Self {
        Self {
            power: config.power_budget,
            cap_tx: config.cap_tx,
            cap_rx: config.cap_rx,
            secrecy_floor: config.secrecy_floor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.power > 0.0 && self.cap_tx > 0.0 && self.cap_rx > 0.0 && self.secrecy_floor >= 0.0)
        {
            return Err(IsacError::InvalidConfig(format!("invalid budgets {self:?}")));
        }
        Ok(())
    }
}

fn check_index(what: &'static str, index: usize, len: usize) -> Result<()> {
    if index >= len {
        return Err(IsacError::IndexOutOfRange { what, index, len });
    }
    Ok(())
}

pub fn transmit_power(design: &DesignPoint, i: usize) -> Result<f64> {
    let w = design.tx_block(i)?;
    Ok(w.norm_squared() + design.n_antennas as f64 * design.q_tx[i])
}

/// `h^H Q^TX h` for block-diagonal scaled-identity `Q^TX`.
fn quantization_leak(design: &DesignPoint, h: &CVec) -> f64 {
    let n = design.n_antennas;
    design
        .q_tx
        .iter()
        .enumerate()
        .map(|(i, &s)| s * h.rows(i * n, n).norm_squared())
        .sum()
}

fn sinr_at(design: &DesignPoint, h: &CVec, noise: f64, k: usize) -> f64 {
    let gains: Vec<f64> = (0..design.n_users())
        .map(|j| h.dotc(&design.beam.column(j)).norm_sqr())
        .collect();
    let interference: f64 = gains
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .map(|(_, g)| g)
        .sum();
    gains[k] / (interference + quantization_leak(design, h) + noise)
}

pub fn user_sinr(design: &DesignPoint, ch: &ChannelSet, noise: &NoiseLevels, k: usize) -> Result<f64> {
    check_index("user", k, design.n_users())?;
    Ok(sinr_at(design, &ch.h_users[k], noise.user, k))
}

/// SINR at Eve when eavesdropping on user `k`.
pub fn eve_sinr(design: &DesignPoint, ch: &ChannelSet, noise: &NoiseLevels, k: usize) -> Result<f64> {
    check_index("user", k, design.n_users())?;
    Ok(sinr_at(design, &ch.h_eve, noise.eve, k))
}

/// Per-user secrecy difference `log2(1+γ_k) − log2(1+γ_E,k)` without the floor.
pub fn secrecy_margins(design: &DesignPoint, ch: &ChannelSet, noise: &NoiseLevels) -> Vec<f64> {
    (0..design.n_users())
        .map(|k| {
            let gu = sinr_at(design, &ch.h_users[k], noise.user, k);
            let ge = sinr_at(design, &ch.h_eve, noise.eve, k);
            (1.0 + gu).log2() - (1.0 + ge).log2()
        })
        .collect()
}

/// Worst-case secrecy rate: `[min_k (log2(1+γ_k) − log2(1+γ_E,k))]^+`.
pub fn secrecy_rate(design: &DesignPoint, ch: &ChannelSet, noise: &NoiseLevels) -> f64 {
    secrecy_margins(design, ch, noise)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
        .max(0.0)
}

/// Numerator and denominator of the sensing SINR.
pub fn sensing_terms(design: &DesignPoint, ch: &ChannelSet, noise: &NoiseLevels) -> (f64, f64) {
    let s = design.transmit_covariance();
    let n = design.n_antennas as f64;
    let target = real_trace(&(&ch.g_sense * &s * ch.g_sense.adjoint()));
    let clutter = real_trace(&(&ch.c_clutter * &s * ch.c_clutter.adjoint()));
    let awgn: f64 = noise.rx.iter().map(|v| n * v).sum();
    let quant: f64 = design.q_rx.iter().map(|v| n * v).sum();
    (target, clutter + awgn + quant)
}

pub fn sensing_sinr(design: &DesignPoint, ch: &ChannelSet, noise: &NoiseLevels) -> f64 {
    let (num, den) = sensing_terms(design, ch, noise);
    num / den
}

pub fn fronthaul_rate_tx(design: &DesignPoint, i: usize) -> Result<f64> {
    let w = design.tx_block(i)?;
    let q = design.q_tx[i];
    if !(q > 0.0) {
        return Err(IsacError::NonPositiveQuantization { what: "tx rrh", index: i, value: q });
    }
    let n = design.n_antennas;
    let cov = &w * w.adjoint() + identity(n).scale(q);
    Ok((log2_det_hpd(&cov)? - n as f64 * q.log2()).max(0.0))
}

/// `E[r_j r_j^H]`, the received covariance at Rx-RRH `j` before compression.
pub fn rx_covariance(design: &DesignPoint, ch: &ChannelSet, noise: &NoiseLevels, j: usize) -> Result<CMat> {
    check_index("rx rrh", j, design.n_rx())?;
    let n = design.n_antennas;
    let b = row_block(&ch.g_sense, j, n) + row_block(&ch.c_clutter, j, n);
    let s = design.transmit_covariance();
    Ok(&b * s * b.adjoint() + identity(n).scale(noise.rx[j]))
}

pub fn fronthaul_rate_rx(design: &DesignPoint, ch: &ChannelSet, noise: &NoiseLevels, j: usize) -> Result<f64> {
    let cov = rx_covariance(design, ch, noise, j)?;
    let q = design.q_rx[j];
    if !(q > 0.0) {
        return Err(IsacError::NonPositiveQuantization { what: "rx rrh", index: j, value: q });
    }
    let n = design.n_antennas;
    let arg = cov + identity(n).scale(q);
    Ok((log2_det_hpd(&arg)? - n as f64 * q.log2()).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bound {
    AtLeast,
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintCheck {
    /// `secrecy`, `fronthaul_tx`, `fronthaul_rx` or `power`.
    pub name: &'static str,
    pub index: Option<usize>,
    pub value: f64,
    pub bound: f64,
    pub kind: Bound,
    pub pass: bool,
}

impl ConstraintCheck {
    fn new(name: &'static str, index: Option<usize>, value: f64, bound: f64, kind: Bound, tol: f64) -> Self {
        let slack = tol * bound.abs().max(1.0);
        let pass = match kind {
            Bound::AtLeast => value >= bound - slack,
            Bound::AtMost => value <= bound + slack,
        };
        Self { name, index, value, bound, kind, pass }
    }

    /// Signed violation; positive means the bound is exceeded.
    pub fn violation(&self) -> f64 {
        match self.kind {
            Bound::AtLeast => self.bound - self.value,
            Bound::AtMost => self.value - self.bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub checks: Vec<ConstraintCheck>,
}

impl FeasibilityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConstraintCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn get(&self, name: &str, index: Option<usize>) -> Option<&ConstraintCheck> {
        self.checks.iter().find(|c| c.name == name && c.index == index)
    }
}

/// Evaluate the secrecy, fronthaul and power constraints at relative slack `tol`.
pub fn check_feasibility(
    design: &DesignPoint,
    ch: &ChannelSet,
    noise: &NoiseLevels,
    budgets: &Budgets,
    tol: f64,
) -> Result<FeasibilityReport> {
    let mut checks = vec![ConstraintCheck::new(
        "secrecy",
        None,
        secrecy_rate(design, ch, noise),
        budgets.secrecy_floor,
        Bound::AtLeast,
        tol,
    )];
    for i in 0..design.n_tx() {
        checks.push(ConstraintCheck::new(
            "fronthaul_tx",
            Some(i),
            fronthaul_rate_tx(design, i)?,
            budgets.cap_tx,
            Bound::AtMost,
            tol,
        ));
    }
    for j in 0..design.n_rx() {
        checks.push(ConstraintCheck::new(
            "fronthaul_rx",
            Some(j),
            fronthaul_rate_rx(design, ch, noise, j)?,
            budgets.cap_rx,
            Bound::AtMost,
            tol,
        ));
    }
    for i in 0..design.n_tx() {
        checks.push(ConstraintCheck::new(
            "power",
            Some(i),
            transmit_power(design, i)?,
            budgets.power,
            Bound::AtMost,
            tol,
        ));
    }
    Ok(FeasibilityReport { checks })
}

/// Smallest variance in `[lo, hi]` (geometric bisection) whose rate is at most `cap`,
/// for a rate that decreases in the variance. Returns the feasible end of the bracket.
pub fn smallest_variance_within(
    mut rate: impl FnMut(f64) -> Result<f64>,
    cap: f64,
    lo: f64,
    hi: f64,
    iters: usize,
) -> Result<f64> {
    if rate(lo)? <= cap {
        return Ok(lo);
    }
    if rate(hi)? > cap {
        return Err(IsacError::Infeasible {
            constraint: "fronthaul",
            detail: format!("rate exceeds {cap} even at variance {hi}"),
        });
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..iters {
        let mid = (lo * hi).sqrt();
        if rate(mid)? <= cap {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::complex_gaussian;
    use crate::scenario::{draw_channels, tests::small_config};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_design(rng: &mut ChaCha8Rng, n_a: usize, n_t: usize, n_r: usize, k: usize) -> DesignPoint {
        let beam = CMat::from_fn(n_a * n_t, k, |_, _| complex_gaussian(rng, 1.0));
        DesignPoint::new(n_a, beam, vec![0.05; n_t], vec![0.02; n_r]).unwrap()
    }

    fn setup(seed: u64) -> (DesignPoint, ChannelSet, NoiseLevels) {
        let cfg = small_config();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = draw_channels(&cfg, &mut rng).unwrap();
        let d = random_design(&mut rng, 2, 2, 2, 2);
        (d, ch, NoiseLevels::from_config(&cfg))
    }

    #[test]
    fn power_of_pure_quantization() {
        let d = DesignPoint::new(3, CMat::zeros(3, 1), vec![0.1], vec![1.0]).unwrap();
        assert!((transmit_power(&d, 0).unwrap() - 0.3).abs() < 1e-15);
        assert!(transmit_power(&d, 1).is_err());
    }

    #[test]
    fn power_of_unit_column() {
        let mut beam = CMat::zeros(2, 1);
        beam[(0, 0)] = Complex64::new(0.6, 0.0);
        beam[(1, 0)] = Complex64::new(0.0, 0.8);
        let d = DesignPoint::new(2, beam, vec![1e-15], vec![1.0]).unwrap();
        assert!((transmit_power(&d, 0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sinr_zero_beam() {
        let (mut d, ch, noise) = setup(1);
        d.beam.set_column(0, &CVec::zeros(4));
        assert_eq!(user_sinr(&d, &ch, &noise, 0).unwrap(), 0.0);
        assert_eq!(eve_sinr(&d, &ch, &noise, 0).unwrap(), 0.0);
    }

    #[test]
    fn single_user_sinr_reduces_to_gain() {
        let (_, mut ch, _) = setup(2);
        ch.h_users.truncate(1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let beam = CMat::from_fn(4, 1, |_, _| complex_gaussian(&mut rng, 1.0));
        let d = DesignPoint::new(2, beam.clone(), vec![1e-14; 2], vec![1.0; 2]).unwrap();
        let noise = NoiseLevels { user: 1.0, eve: 1.0, rx: vec![0.1; 2] };
        let gain = ch.h_users[0].dotc(&beam.column(0)).norm_sqr();
        assert!((user_sinr(&d, &ch, &noise, 0).unwrap() - gain).abs() < 1e-10 * gain.max(1.0));
    }

    #[test]
    fn eve_sinr_vanishes_for_zero_or_orthogonal_channel() {
        let (mut d, mut ch, noise) = setup(3);
        let he = ch.h_eve.clone();
        let w = d.w(1);
        let proj = &w - he.scale(1.0) * (he.dotc(&w) / he.norm_squared());
        d.beam.set_column(1, &proj);
        assert!(eve_sinr(&d, &ch, &noise, 1).unwrap() < 1e-25);
        ch.h_eve = CVec::zeros(4);
        assert_eq!(eve_sinr(&d, &ch, &noise, 0).unwrap(), 0.0);
    }

    #[test]
    fn secrecy_without_eve_is_min_user_rate() {
        let (d, mut ch, noise) = setup(4);
        ch.h_eve = CVec::zeros(4);
        let expected = (0..2)
            .map(|k| (1.0 + user_sinr(&d, &ch, &noise, k).unwrap()).log2())
            .fold(f64::INFINITY, f64::min);
        assert!((secrecy_rate(&d, &ch, &noise) - expected).abs() < 1e-12);
    }

    #[test]
    fn secrecy_floors_at_zero_when_eve_matches_user() {
        let (d, mut ch, _) = setup(5);
        let noise = NoiseLevels { user: 0.1, eve: 0.1, rx: vec![0.1; 2] };
        let k = (0..2)
            .min_by(|&a, &b| {
                let ra = user_sinr(&d, &ch, &noise, a).unwrap();
                let rb = user_sinr(&d, &ch, &noise, b).unwrap();
                ra.total_cmp(&rb)
            })
            .unwrap();
        ch.h_eve = ch.h_users[k].clone();
        assert_eq!(secrecy_rate(&d, &ch, &noise), 0.0);
    }

    #[test]
    fn sensing_sinr_trivial_cases() {
        let (mut d, mut ch, noise) = setup(6);
        let saved = d.clone();
        d.beam.fill(Complex64::new(0.0, 0.0));
        d.q_tx = vec![1e-300; 2];
        assert!(sensing_sinr(&d, &ch, &noise) < 1e-290);

        let d = DesignPoint { q_rx: vec![1e-300; 2], ..saved };
        ch.c_clutter = ch.g_sense.clone();
        let quiet = NoiseLevels { rx: vec![0.0; 2], ..noise };
        assert!((sensing_sinr(&d, &ch, &quiet) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sensing_sinr_decreases_in_rx_quantization() {
        let (mut d, ch, noise) = setup(7);
        let mut last = f64::INFINITY;
        for q in [0.01, 0.1, 1.0, 10.0] {
            d.q_rx[1] = q;
            let s = sensing_sinr(&d, &ch, &noise);
            assert!(s < last);
            last = s;
        }
    }

    #[test]
    fn fronthaul_tx_trivial_cases() {
        let d = DesignPoint::new(2, CMat::zeros(2, 2), vec![0.3], vec![1.0]).unwrap();
        assert!(fronthaul_rate_tx(&d, 0).unwrap().abs() < 1e-12);
        let mut beam = CMat::zeros(1, 1);
        beam[(0, 0)] = Complex64::new(0.0, 1.0);
        let d = DesignPoint::new(1, beam, vec![1.0], vec![1.0]).unwrap();
        assert!((fronthaul_rate_tx(&d, 0).unwrap() - 1.0).abs() < 1e-12);
        let d = DesignPoint { q_tx: vec![0.0], ..d };
        assert!(matches!(
            fronthaul_rate_tx(&d, 0),
            Err(IsacError::NonPositiveQuantization { .. })
        ));
    }

    #[test]
    fn fronthaul_tx_joint_scale_invariance() {
        let (d, _, _) = setup(8);
        let c: f64 = 3.7;
        let scaled = DesignPoint {
            beam: d.beam.scale(c.sqrt()),
            q_tx: d.q_tx.iter().map(|q| q * c).collect(),
            ..d.clone()
        };
        for i in 0..2 {
            let a = fronthaul_rate_tx(&d, i).unwrap();
            let b = fronthaul_rate_tx(&scaled, i).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn fronthaul_rx_without_channels() {
        let (d, mut ch, noise) = setup(9);
        ch.g_sense.fill(Complex64::new(0.0, 0.0));
        ch.c_clutter.fill(Complex64::new(0.0, 0.0));
        let expected = 2.0 * ((0.1 + d.q_rx[0]) / d.q_rx[0]).log2();
        assert!((fronthaul_rate_rx(&d, &ch, &noise, 0).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn fronthaul_rx_decreases_to_zero() {
        let (mut d, ch, noise) = setup(10);
        let mut last = f64::INFINITY;
        for q in [1.0, 10.0, 100.0] {
            d.q_rx[0] = q;
            let r = fronthaul_rate_rx(&d, &ch, &noise, 0).unwrap();
            assert!(r < last && r >= 0.0);
            last = r;
        }
        d.q_rx[0] = 1e12;
        assert!(fronthaul_rate_rx(&d, &ch, &noise, 0).unwrap() < 1e-9);
        d.q_rx[0] = -1.0;
        assert!(fronthaul_rate_rx(&d, &ch, &noise, 0).is_err());
    }

    #[test]
    fn feasibility_examples() {
        let (_, ch, noise) = setup(11);
        let d = DesignPoint::new(2, CMat::zeros(4, 2), vec![1e-9; 2], vec![1.0; 2]).unwrap();
        let budgets = Budgets { power: 5.0, cap_tx: 4.0, cap_rx: 4.0, secrecy_floor: 0.0 };
        let report = check_feasibility(&d, &ch, &noise, &budgets, 0.0).unwrap();
        assert!(report.all_pass(), "{report:?}");
        assert_eq!(report.checks.len(), 1 + 2 + 2 + 2);

        let (d, ch, noise) = setup(12);
        let tiny = Budgets { power: 1e-12, ..budgets };
        let report = check_feasibility(&d, &ch, &noise, &tiny, 1e-6).unwrap();
        assert!(!report.get("power", Some(0)).unwrap().pass);
        assert!(!report.get("power", Some(1)).unwrap().pass);
    }

    proptest! {
        #[test]
        fn rates_are_nonnegative(seed in 0u64..1000, qt in 1e-4f64..10.0, qr in 1e-4f64..10.0) {
            let (mut d, ch, noise) = setup(seed);
            d.q_tx = vec![qt; 2];
            d.q_rx = vec![qr; 2];
            prop_assert!(secrecy_rate(&d, &ch, &noise) >= 0.0);
            for i in 0..2 {
                prop_assert!(fronthaul_rate_tx(&d, i).unwrap() >= 0.0);
                prop_assert!(fronthaul_rate_rx(&d, &ch, &noise, i).unwrap() >= 0.0);
            }
        }
    }
}
