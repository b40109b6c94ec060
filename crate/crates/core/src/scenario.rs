//! Geometry-driven channel generation.
//!
//! Arrays are uniform linear arrays whose broadside faces the global +y axis;
//! angles are measured from broadside toward +x. Communication channels are
//! Rician with a line-of-sight steering vector toward the receiver, target
//! scattering blocks are rank-one bistatic outer products and clutter blocks
//! have i.i.d. complex Gaussian entries.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};
use crate::linalg::{complex_gaussian, complex_gaussian_vec, CMat, CVec};

pub type Point = [f64; 2];

/// Axis-aligned square region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub center: Point,
    pub side: f64,
}

impl Region {
    pub fn point(center: Point) -> Self {
        Self { center, side: 0.0 }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let half = self.side / 2.0;
        let mut coord = |c: f64| {
            let u: f64 = rng.random();
            c - half + u * self.side
        };
        [coord(self.center[0]), coord(self.center[1])]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_users: usize,
    pub n_antennas: usize,
    pub tx_positions: Vec<Point>,
    pub rx_positions: Vec<Point>,
    pub user_regions: Vec<Region>,
    pub eve_region: Region,
    /// LOS-to-NLOS power ratio; `inf` means line-of-sight only.
    pub rician_factor: f64,
    pub var_scatter: f64,
    pub var_clutter: f64,
    pub var_noise_user: f64,
    pub var_noise_eve: f64,
    pub var_noise_rx: f64,
    pub power_budget: f64,
    pub cap_tx: f64,
    pub cap_rx: f64,
    pub secrecy_floor: f64,
    pub n_symbols: usize,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(IsacError::InvalidConfig(msg));
        for (name, v) in [
            ("n_tx", self.n_tx),
            ("n_rx", self.n_rx),
            ("n_users", self.n_users),
            ("n_antennas", self.n_antennas),
            ("n_symbols", self.n_symbols),
        ] {
            if v < 1 {
                return bad(format!("{name} must be >= 1"));
            }
        }
        if self.tx_positions.len() != self.n_tx {
            return bad(format!(
                "tx_positions has {} entries, n_tx = {}",
                self.tx_positions.len(),
                self.n_tx
            ));
        }
        if self.rx_positions.len() != self.n_rx {
            return bad(format!(
                "rx_positions has {} entries, n_rx = {}",
                self.rx_positions.len(),
                self.n_rx
            ));
        }
        if self.user_regions.len() != self.n_users {
            return bad(format!(
                "user_regions has {} entries, n_users = {}",
                self.user_regions.len(),
                self.n_users
            ));
        }
        for region in self.user_regions.iter().chain(std::iter::once(&self.eve_region)) {
            if !(region.side >= 0.0) || region.center.iter().any(|c| !c.is_finite()) {
                return bad(format!("invalid region {region:?}"));
            }
        }
        for (name, v) in [
            ("var_noise_user", self.var_noise_user),
            ("var_noise_eve", self.var_noise_eve),
            ("var_noise_rx", self.var_noise_rx),
            ("power_budget", self.power_budget),
            ("cap_tx", self.cap_tx),
            ("cap_rx", self.cap_rx),
        ] {
            if !(v > 0.0) {
                return bad(format!("{name} must be > 0, got {v}"));
            }
        }
        for (name, v) in [
            ("var_scatter", self.var_scatter),
            ("var_clutter", self.var_clutter),
            ("rician_factor", self.rician_factor),
            ("secrecy_floor", self.secrecy_floor),
        ] {
            if !(v >= 0.0) {
                return bad(format!("{name} must be >= 0, got {v}"));
            }
        }
        Ok(())
    }

    /// Total transmit antennas `n_tx * n_antennas`.
    pub fn tx_dim(&self) -> usize {
        self.n_tx * self.n_antennas
    }

    pub fn rx_dim(&self) -> usize {
        self.n_rx * self.n_antennas
    }
}

/// One realization of every channel in the scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub n_antennas: usize,
    pub n_tx: usize,
    pub n_rx: usize,
    /// Stacked `h_k`, one per user, length `n_tx * n_antennas`.
    pub h_users: Vec<CVec>,
    pub h_eve: CVec,
    /// Block matrix `G` (`n_rx*n_antennas` x `n_tx*n_antennas`).
    pub g_sense: CMat,
    pub c_clutter: CMat,
    /// Departure angle from each Tx-RRH toward the target.
    pub aod: Vec<f64>,
    /// Arrival angle at each Rx-RRH from the target.
    pub aoa: Vec<f64>,
    pub user_positions: Vec<Point>,
    pub eve_position: Point,
}

impl ChannelSet {
    pub fn n_users(&self) -> usize {
        self.h_users.len()
    }

    pub fn tx_dim(&self) -> usize {
        self.n_tx * self.n_antennas
    }

    pub fn rx_dim(&self) -> usize {
        self.n_rx * self.n_antennas
    }

    /// Block `G_{j,i}`.
    pub fn g_block(&self, j: usize, i: usize) -> CMat {
        let n = self.n_antennas;
        self.g_sense.view((j * n, i * n), (n, n)).into_owned()
    }

    /// Copy with the scattering matrix scaled by `factor` (variance scales by `factor²`).
    pub fn with_scaled_scatter(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.g_sense = out.g_sense.scale(factor);
        out
    }
}

/// ULA response `[1, e^{-jπ sinθ}, ..., e^{-jπ(N-1) sinθ}]`.
pub fn steering_vector(theta: f64, n_antennas: usize) -> CVec {
    let phase = -PI * theta.sin();
    CVec::from_fn(n_antennas, |m, _| Complex64::from_polar(1.0, phase * m as f64))
}

/// Angle of `to` seen from `from`, measured from +y toward +x, in (-π, π].
pub fn angle_between(from: Point, to: Point) -> Result<f64> {
    let dx = to[0] - from[0];
    let dy = to[1] - from[1];
    if dx == 0.0 && dy == 0.0 {
        return Err(IsacError::DegenerateGeometry(format!(
            "coincident points {from:?}"
        )));
    }
    let theta = dx.atan2(dy);
    Ok(if theta <= -PI { PI } else { theta })
}

fn rician_weights(rician_factor: f64) -> (f64, f64) {
    if rician_factor.is_infinite() {
        (1.0, 0.0)
    } else {
        (
            (rician_factor / (rician_factor + 1.0)).sqrt(),
            (1.0 / (rician_factor + 1.0)).sqrt(),
        )
    }
}

fn rician_channel<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    to: Point,
    rng: &mut R,
) -> Result<CVec> {
    let n = config.n_antennas;
    let (w_los, w_nlos) = rician_weights(config.rician_factor);
    let mut h = CVec::zeros(config.tx_dim());
    for (i, &tx) in config.tx_positions.iter().enumerate() {
        let los = steering_vector(angle_between(tx, to)?, n);
        let nlos = complex_gaussian_vec(rng, n, 1.0);
        h.rows_mut(i * n, n)
            .copy_from(&(los.scale(w_los) + nlos.scale(w_nlos)));
    }
    Ok(h)
}

/// Draw one channel realization. Positions are sampled first (Eve, then users),
/// followed by user channels, the Eve channel, scattering gains and clutter.
pub fn draw_channels<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<ChannelSet> {
    config.validate()?;
    let n = config.n_antennas;
    let eve_position = config.eve_region.sample(rng);
    let user_positions: Vec<Point> = config.user_regions.iter().map(|r| r.sample(rng)).collect();

    let h_users = user_positions
        .iter()
        .map(|&p| rician_channel(config, p, rng))
        .collect::<Result<Vec<_>>>()?;
    let h_eve = rician_channel(config, eve_position, rng)?;

    let aod = config
        .tx_positions
        .iter()
        .map(|&tx| angle_between(tx, eve_position))
        .collect::<Result<Vec<_>>>()?;
    let aoa = config
        .rx_positions
        .iter()
        .map(|&rx| angle_between(rx, eve_position))
        .collect::<Result<Vec<_>>>()?;

    let mut g_sense = CMat::zeros(config.rx_dim(), config.tx_dim());
    for (j, &theta_rx) in aoa.iter().enumerate() {
        let a_rx = steering_vector(theta_rx, n);
        for (i, &theta_tx) in aod.iter().enumerate() {
            let alpha = complex_gaussian(rng, config.var_scatter);
            let a_tx = steering_vector(theta_tx, n);
            let block = (&a_rx * a_tx.transpose()) * alpha;
            g_sense.view_mut((j * n, i * n), (n, n)).copy_from(&block);
        }
    }

    let c_clutter = CMat::from_fn(config.rx_dim(), config.tx_dim(), |_, _| {
        complex_gaussian(rng, config.var_clutter)
    });

    Ok(ChannelSet {
        n_antennas: n,
        n_tx: config.n_tx,
        n_rx: config.n_rx,
        h_users,
        h_eve,
        g_sense,
        c_clutter,
        aod,
        aoa,
        user_positions,
        eve_position,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn small_config() -> ScenarioConfig {
        ScenarioConfig {
            n_tx: 2,
            n_rx: 2,
            n_users: 2,
            n_antennas: 2,
            tx_positions: vec![[0.0, 500.0], [500.0, 500.0]],
            rx_positions: vec![[0.0, 250.0], [500.0, 250.0]],
            user_regions: vec![
                Region { center: [200.0, 200.0], side: 30.0 },
                Region { center: [300.0, 300.0], side: 30.0 },
            ],
            eve_region: Region { center: [250.0, 250.0], side: 30.0 },
            rician_factor: 5.0,
            var_scatter: 1e-3,
            var_clutter: 1e-3,
            var_noise_user: 0.1,
            var_noise_eve: 0.1,
            var_noise_rx: 0.1,
            power_budget: 5.0,
            cap_tx: 4.0,
            cap_rx: 4.0,
            secrecy_floor: 0.5,
            n_symbols: 30,
            seed: 1,
        }
    }

    #[test]
    fn steering_examples() {
        let v = steering_vector(0.0, 4);
        assert!(v.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
        let v = steering_vector(PI / 2.0, 2);
        assert!((v[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((v[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        assert_eq!(steering_vector(1.234, 1).len(), 1);
        assert_eq!(steering_vector(1.234, 1)[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn angle_examples() {
        assert!((angle_between([0.0, 0.0], [1.0, 0.0]).unwrap() - PI / 2.0).abs() < 1e-15);
        assert_eq!(angle_between([0.0, 0.0], [0.0, 1.0]).unwrap(), 0.0);
        assert!((angle_between([0.0, 0.0], [-1.0, 0.0]).unwrap() + PI / 2.0).abs() < 1e-15);
        assert_eq!(angle_between([0.0, 0.0], [0.0, -1.0]).unwrap(), PI);
        assert_eq!(angle_between([0.0, 0.0], [-0.0, -1.0]).unwrap(), PI);
        assert!(matches!(
            angle_between([1.0, 2.0], [1.0, 2.0]),
            Err(IsacError::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn large_rician_factor_gives_los() {
        let mut cfg = small_config();
        cfg.rician_factor = 1e6;
        let ch = draw_channels(&cfg, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        for (k, h) in ch.h_users.iter().enumerate() {
            for i in 0..cfg.n_tx {
                let theta = angle_between(cfg.tx_positions[i], ch.user_positions[k]).unwrap();
                let los = steering_vector(theta, cfg.n_antennas);
                let block = h.rows(i * cfg.n_antennas, cfg.n_antennas);
                let dev = block - los;
                // NLOS weight is ~1e-3, so entries deviate by ~1e-3 times a unit Gaussian.
                assert!(dev.camax() <= 5e-3);
                assert!(dev.norm() / (cfg.n_antennas as f64).sqrt() <= 2e-3);
            }
        }
    }

    #[test]
    fn zero_scatter_gives_zero_g() {
        let mut cfg = small_config();
        cfg.var_scatter = 0.0;
        let ch = draw_channels(&cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(ch.g_sense.norm(), 0.0);
    }

    #[test]
    fn g_blocks_are_rank_one_outer_products() {
        let cfg = small_config();
        let ch = draw_channels(&cfg, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        for j in 0..cfg.n_rx {
            for i in 0..cfg.n_tx {
                let b = ch.g_block(j, i);
                let alpha = b[(0, 0)];
                assert!((b.norm() - alpha.norm() * cfg.n_antennas as f64).abs() < 1e-12);
                let sv = b.singular_values();
                assert!(sv[1] <= 1e-12 * sv[0].max(1e-300));
            }
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let cfg = small_config();
        let a = draw_channels(&cfg, &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
        let b = draw_channels(&cfg, &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn positions_inside_regions() {
        let cfg = small_config();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let ch = draw_channels(&cfg, &mut rng).unwrap();
            for (p, r) in ch.user_positions.iter().zip(&cfg.user_regions) {
                assert!((p[0] - r.center[0]).abs() <= r.side / 2.0);
                assert!((p[1] - r.center[1]).abs() <= r.side / 2.0);
            }
        }
    }

    #[test]
    fn user_channel_power_is_unit_on_average() {
        let cfg = small_config();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws = 100_000 / (cfg.n_users * cfg.tx_dim()) + 1;
        let mut sum = 0.0;
        let mut count = 0usize;
        for _ in 0..draws {
            let ch = draw_channels(&cfg, &mut rng).unwrap();
            for h in &ch.h_users {
                sum += h.iter().map(|z| z.norm_sqr()).sum::<f64>();
                count += h.len();
            }
        }
        let mean = sum / count as f64;
        assert!(count >= 100_000);
        assert!((mean - 1.0).abs() < 0.02, "mean |h|^2 = {mean}");
    }

    #[test]
    fn clutter_variance_matches() {
        let cfg = small_config();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut sum = 0.0;
        let mut count = 0usize;
        while count < 20_000 {
            let ch = draw_channels(&cfg, &mut rng).unwrap();
            sum += ch.c_clutter.iter().map(|z| z.norm_sqr()).sum::<f64>();
            count += ch.c_clutter.len();
        }
        let var = sum / count as f64;
        assert!((var / cfg.var_clutter - 1.0).abs() < 0.05, "clutter var {var}");
    }

    #[test]
    fn validation_rejects_bad_counts() {
        let mut cfg = small_config();
        cfg.n_users = 3;
        assert!(cfg.validate().is_err());
        let mut cfg = small_config();
        cfg.var_noise_rx = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = small_config();
        cfg.rician_factor = f64::INFINITY;
        assert!(cfg.validate().is_ok());
    }
}
