//! Likelihood-ratio detection of the target at the central unit.
//!
//! Under both hypotheses the (compressed) sensing observation is a zero-mean
//! complex Gaussian vector; only the covariance differs, by the target
//! scattering term. The Neyman-Pearson statistic is therefore the quadratic
//! log-likelihood ratio. ROC curves are estimated by simulating the transmit,
//! scattering, clutter, noise and quantization paths symbol by symbol.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};
use crate::linalg::{complex_gaussian_vec, identity, inverse_hpd, ln_det_hpd, quad_form, row_block, CMat, CVec};
use crate::model::{DesignPoint, NoiseLevels};
use crate::scenario::ChannelSet;

/// Which observation the covariance pair describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SensingMode {
    /// All Rx-RRHs stacked, after fronthaul compression.
    Centralized,
    /// Rx-RRH `j` alone, after fronthaul compression.
    Local(usize),
}

/// How the ROC is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RocMode {
    Centralized,
    Local(usize),
    /// Uncompressed local LLR tests at every Rx-RRH fused by majority vote.
    Distributed,
}

/// Covariances of the observation without (`sigma0`) and with (`sigma1`) the target.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisPair {
    pub sigma0: CMat,
    pub sigma1: CMat,
}

fn covariance_pair(
    design: &DesignPoint,
    ch: &ChannelSet,
    noise: &NoiseLevels,
    rx: Option<usize>,
    compressed: bool,
) -> Result<HypothesisPair> {
    let n = design.n_antennas;
    let (g, c, rx_indices): (CMat, CMat, Vec<usize>) = match rx {
        None => (ch.g_sense.clone(), ch.c_clutter.clone(), (0..ch.n_rx).collect()),
        Some(j) => {
            if j >= ch.n_rx {
                return Err(IsacError::IndexOutOfRange { what: "rx rrh", index: j, len: ch.n_rx });
            }
            (row_block(&ch.g_sense, j, n), row_block(&ch.c_clutter, j, n), vec![j])
        }
    };
    let s = design.transmit_covariance();
    let mut floor = CMat::zeros(n * rx_indices.len(), n * rx_indices.len());
    for (block, &j) in rx_indices.iter().enumerate() {
        let var = noise.rx[j] + if compressed { design.q_rx[j] } else { 0.0 };
        floor.view_mut((block * n, block * n), (n, n)).copy_from(&identity(n).scale(var));
    }
    let with_target = &g + &c;
    Ok(HypothesisPair {
        sigma0: &c * &s * c.adjoint() + &floor,
        sigma1: &with_target * &s * with_target.adjoint() + floor,
    })
}

pub fn hypothesis_covariances(
    design: &DesignPoint,
    ch: &ChannelSet,
    noise: &NoiseLevels,
    mode: SensingMode,
) -> Result<HypothesisPair> {
    match mode {
        SensingMode::Centralized => covariance_pair(design, ch, noise, None, true),
        SensingMode::Local(j) => covariance_pair(design, ch, noise, Some(j), true),
    }
}

/// Precomputed quadratic LLR `Σ_m r_m^H(Σ0⁻¹ − Σ1⁻¹)r_m + M(ln det Σ0 − ln det Σ1)`.
#[derive(Debug, Clone)]
pub struct LlrDetector {
    weight: CMat,
    offset: f64,
}

impl LlrDetector {
    pub fn new(hyp: &HypothesisPair) -> Result<Self> {
        let weight = inverse_hpd(&hyp.sigma0)? - inverse_hpd(&hyp.sigma1)?;
        let offset = ln_det_hpd(&hyp.sigma0)? - ln_det_hpd(&hyp.sigma1)?;
        Ok(Self { weight, offset })
    }

    pub fn sample(&self, r: &CVec) -> f64 {
        quad_form(r, &self.weight) + self.offset
    }

    pub fn statistic(&self, samples: &[CVec]) -> f64 {
        samples.iter().map(|r| self.sample(r)).sum()
    }
}

pub fn llr_statistic(samples: &[CVec], hyp: &HypothesisPair) -> Result<f64> {
    Ok(LlrDetector::new(hyp)?.statistic(samples))
}

/// Empirical ROC: `(p_fa, p_de)` pairs sorted by `p_fa`, from `(0,0)` to `(1,1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
    pub n_h0: usize,
    pub n_h1: usize,
}

impl RocCurve {
    /// Threshold sweep over pooled statistics; decide "target" when the statistic exceeds the threshold.
    pub fn from_statistics(h0: &[f64], h1: &[f64]) -> Self {
        let mut pooled: Vec<(f64, bool)> =
            h0.iter().map(|&s| (s, false)).chain(h1.iter().map(|&s| (s, true))).collect();
        pooled.sort_by(|a, b| b.0.total_cmp(&a.0));
        let (n0, n1) = (h0.len().max(1) as f64, h1.len().max(1) as f64);
        let mut points = vec![(0.0, 0.0)];
        let (mut fa, mut de) = (0usize, 0usize);
        let mut idx = 0;
        while idx < pooled.len() {
            let value = pooled[idx].0;
            while idx < pooled.len() && pooled[idx].0 == value {
                if pooled[idx].1 {
                    de += 1;
                } else {
                    fa += 1;
                }
                idx += 1;
            }
            points.push((fa as f64 / n0, de as f64 / n1));
        }
        if points.last() != Some(&(1.0, 1.0)) {
            points.push((1.0, 1.0));
        }
        Self { points, n_h0: h0.len(), n_h1: h1.len() }
    }

    pub fn is_monotone(&self) -> bool {
        self.points.windows(2).all(|w| w[1].0 >= w[0].0 && w[1].1 >= w[0].1)
    }
}

/// Linearly interpolated detection probability at `target_fa`.
pub fn detection_at_fa(roc: &RocCurve, target_fa: f64) -> Result<f64> {
    if roc.points.is_empty() {
        return Err(IsacError::Experiment("empty ROC curve".into()));
    }
    if !(target_fa > 0.0 && target_fa < 1.0) {
        return Err(IsacError::Experiment(format!("false-alarm target {target_fa} outside (0, 1)")));
    }
    let exact = roc
        .points
        .iter()
        .filter(|p| p.0 == target_fa)
        .map(|p| p.1)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    if let Some(v) = exact {
        return Ok(v);
    }
    for w in roc.points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.0 < target_fa && target_fa < b.0 {
            return Ok(a.1 + (b.1 - a.1) * (target_fa - a.0) / (b.0 - a.0));
        }
    }
    // Curves that do not span the target: clamp to the nearest end.
    let last = roc.points[roc.points.len() - 1];
    Ok(if target_fa > last.0 { last.1 } else { roc.points[0].1 })
}

/// Sensing accuracy score `(P_de + P_fa) / 2`.
pub fn sensing_accuracy(p_de: f64, p_fa: f64) -> f64 {
    (p_de + p_fa) / 2.0
}

/// Majority vote: detect when at least `⌈N_R/2⌉` local statistics exceed their thresholds.
pub fn distributed_decision(local_llrs: &[f64], thresholds: &[f64]) -> bool {
    assert_eq!(local_llrs.len(), thresholds.len(), "one threshold per local statistic");
    let votes = local_llrs.iter().zip(thresholds).filter(|(l, t)| l > t).count();
    votes >= local_llrs.len().div_ceil(2)
}

/// Symbol-level simulator of the sensing signal path for one design and channel.
pub struct SignalSimulator<'a> {
    design: &'a DesignPoint,
    noise: &'a NoiseLevels,
    with_target: CMat,
    clutter_only: CMat,
    n_antennas: usize,
}

/// One received symbol: `r` before and `r̃` after Rx fronthaul compression.
pub struct SensingSymbol {
    pub raw: CVec,
    pub compressed: CVec,
}

impl<'a> SignalSimulator<'a> {
    pub fn new(design: &'a DesignPoint, ch: &ChannelSet, noise: &'a NoiseLevels) -> Self {
        Self {
            design,
            noise,
            with_target: &ch.g_sense + &ch.c_clutter,
            clutter_only: ch.c_clutter.clone(),
            n_antennas: design.n_antennas,
        }
    }

    /// `x = W s + q^TX`.
    pub fn transmit<R: Rng + ?Sized>(&self, rng: &mut R) -> CVec {
        let s = complex_gaussian_vec(rng, self.design.n_users(), 1.0);
        let mut x = &self.design.beam * s;
        let n = self.n_antennas;
        for (i, &q) in self.design.q_tx.iter().enumerate() {
            let qn = complex_gaussian_vec(rng, n, q);
            let mut block = x.rows_mut(i * n, n);
            block += qn;
        }
        x
    }

    pub fn receive<R: Rng + ?Sized>(&self, rng: &mut R, target: bool) -> SensingSymbol {
        let x = self.transmit(rng);
        let b = if target { &self.with_target } else { &self.clutter_only };
        let mut raw = b * x;
        let n = self.n_antennas;
        let mut compressed = CVec::zeros(raw.len());
        for j in 0..self.noise.rx.len() {
            let awgn = complex_gaussian_vec(rng, n, self.noise.rx[j]);
            let quant = complex_gaussian_vec(rng, n, self.design.q_rx[j]);
            let mut rj = raw.rows_mut(j * n, n);
            rj += awgn;
            let r_tilde = rj.into_owned() + quant;
            compressed.rows_mut(j * n, n).copy_from(&r_tilde);
        }
        SensingSymbol { raw, compressed }
    }
}

fn trial_rng(base: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(stream);
    rng
}

/// Monte Carlo ROC with `n_trials` trials per hypothesis of `n_symbols` symbols each.
pub fn simulate_roc<R: Rng + ?Sized>(
    design: &DesignPoint,
    ch: &ChannelSet,
    noise: &NoiseLevels,
    mode: RocMode,
    n_trials: usize,
    n_symbols: usize,
    rng: &mut R,
) -> Result<RocCurve> {
    if n_trials == 0 || n_symbols == 0 {
        return Err(IsacError::Experiment("n_trials and n_symbols must be >= 1".into()));
    }
    let base = rng.next_u64();
    let sim = SignalSimulator::new(design, ch, noise);
    let n = design.n_antennas;

    match mode {
        RocMode::Centralized | RocMode::Local(_) => {
            let (detector, rows) = match mode {
                RocMode::Centralized => (
                    LlrDetector::new(&hypothesis_covariances(design, ch, noise, SensingMode::Centralized)?)?,
                    None,
                ),
                RocMode::Local(j) => (
                    LlrDetector::new(&hypothesis_covariances(design, ch, noise, SensingMode::Local(j))?)?,
                    Some(j),
                ),
                RocMode::Distributed => unreachable!(),
            };
            let run = |target: bool, t: usize| -> f64 {
                let mut rng = trial_rng(base, 2 * t as u64 + target as u64);
                (0..n_symbols)
                    .map(|_| {
                        let sym = sim.receive(&mut rng, target).compressed;
                        match rows {
                            None => detector.sample(&sym),
                            Some(j) => detector.sample(&sym.rows(j * n, n).into_owned()),
                        }
                    })
                    .sum()
            };
            let h0: Vec<f64> = (0..n_trials).into_par_iter().map(|t| run(false, t)).collect();
            let h1: Vec<f64> = (0..n_trials).into_par_iter().map(|t| run(true, t)).collect();
            Ok(RocCurve::from_statistics(&h0, &h1))
        }
        RocMode::Distributed => {
            let detectors = (0..ch.n_rx)
                .map(|j| LlrDetector::new(&covariance_pair(design, ch, noise, Some(j), false)?))
                .collect::<Result<Vec<_>>>()?;
            let run = |target: bool, t: usize| -> Vec<f64> {
                let mut rng = trial_rng(base, 2 * t as u64 + target as u64);
                let mut stats = vec![0.0; detectors.len()];
                for _ in 0..n_symbols {
                    let sym = sim.receive(&mut rng, target).raw;
                    for (j, d) in detectors.iter().enumerate() {
                        stats[j] += d.sample(&sym.rows(j * n, n).into_owned());
                    }
                }
                stats
            };
            let h0: Vec<Vec<f64>> = (0..n_trials).into_par_iter().map(|t| run(false, t)).collect();
            let h1: Vec<Vec<f64>> = (0..n_trials).into_par_iter().map(|t| run(true, t)).collect();
            Ok(fused_roc(&h0, &h1, ch.n_rx))
        }
    }
}

/// Sweeps a common local false-alarm level; local thresholds are empirical H0 quantiles.
fn fused_roc(h0: &[Vec<f64>], h1: &[Vec<f64>], n_rx: usize) -> RocCurve {
    let n0 = h0.len();
    let sorted: Vec<Vec<f64>> = (0..n_rx)
        .map(|j| {
            let mut col: Vec<f64> = h0.iter().map(|s| s[j]).collect();
            col.sort_by(|a, b| b.total_cmp(a));
            col
        })
        .collect();
    let levels = n0.min(1000);
    let mut points = vec![(0.0, 0.0)];
    for l in 0..=levels {
        let exceed = (l * n0).div_ceil(levels.max(1));
        let thresholds: Vec<f64> = sorted
            .iter()
            .map(|col| if exceed == 0 { f64::INFINITY } else if exceed >= n0 { f64::NEG_INFINITY } else { col[exceed] })
            .collect();
        let rate = |set: &[Vec<f64>]| {
            set.iter().filter(|s| distributed_decision(s, &thresholds)).count() as f64 / set.len() as f64
        };
        points.push((rate(h0), rate(h1)));
    }
    points.push((1.0, 1.0));
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    points.dedup();
    RocCurve { points, n_h0: n0, n_h1: h1.len() }
}
