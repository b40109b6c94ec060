#![allow(dead_code)]

use isac_core::harness::Preset;
use isac_core::linalg::{complex_gaussian, identity, CMat};
use isac_core::model::{Budgets, NoiseLevels};
use isac_core::optimizer::TransformedPoint;
use isac_core::scenario::{draw_channels, ChannelSet, Region, ScenarioConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Accuracy-preset dimensions: N_A = 2, P = 5, N_T = N_R = K = 2.
pub fn fig3_config() -> ScenarioConfig {
    Preset::AccuracyVsCaprx.base_config()
}

pub fn scalar_config() -> ScenarioConfig {
    ScenarioConfig {
        n_tx: 1,
        n_rx: 1,
        n_users: 1,
        n_antennas: 1,
        tx_positions: vec![[0.0, 500.0]],
        rx_positions: vec![[0.0, 250.0]],
        user_regions: vec![Region::point([200.0, 200.0])],
        eve_region: Region::point([250.0, 250.0]),
        rician_factor: 5.0,
        var_scatter: 1e-3,
        var_clutter: 1e-3,
        var_noise_user: 0.1,
        var_noise_eve: 0.1,
        var_noise_rx: 0.1,
        power_budget: 5.0,
        cap_tx: 4.0,
        cap_rx: 2.0,
        secrecy_floor: 0.2,
        n_symbols: 30,
        seed: 0,
    }
}

pub struct Instance {
    pub config: ScenarioConfig,
    pub ch: ChannelSet,
    pub budgets: Budgets,
    pub noise: NoiseLevels,
}

pub fn instance(config: &ScenarioConfig, seed: u64) -> Instance {
    let ch = draw_channels(config, &mut rng(seed)).unwrap();
    Instance { config: config.clone(), ch, budgets: Budgets::from_config(config), noise: NoiseLevels::from_config(config) }
}

pub fn random_psd<R: Rng>(rng: &mut R, n: usize, rank: usize) -> CMat {
    let a = CMat::from_fn(n, rank, |_, _| complex_gaussian(rng, 1.0));
    &a * a.adjoint()
}

/// Random point with positive log arguments, rescaled onto the normalization equality.
pub fn random_transformed<R: Rng>(rng: &mut R, inst: &Instance) -> TransformedPoint {
    let n = inst.ch.n_antennas;
    let dim = n * inst.ch.n_tx;
    let gamma = (0..inst.ch.n_users())
        .map(|_| {
            let rank = 1 + rng.random_range(0..dim);
            random_psd(rng, dim, rank)
        })
        .collect();
    let theta = TransformedPoint {
        n_antennas: n,
        gamma,
        omega_tx: (0..inst.ch.n_tx).map(|_| rng.random_range(0.05..2.0)).collect(),
        omega_rx: (0..inst.ch.n_rx).map(|_| rng.random_range(0.05..2.0)).collect(),
        z: rng.random_range(0.2..2.0),
    };
    let lhs = theta.normalization(&inst.ch, &inst.noise);
    theta.scaled(1.0 / lhs)
}

/// Multiplicative perturbation of every component, keeping PSD and positivity.
pub fn perturb<R: Rng>(rng: &mut R, theta: &TransformedPoint, size: f64) -> TransformedPoint {
    let dim = theta.dim();
    let gamma = theta
        .gamma
        .iter()
        .map(|g| {
            let a = identity(dim) + CMat::from_fn(dim, dim, |_, _| complex_gaussian(rng, size * size));
            &a * g * a.adjoint() + random_psd(rng, dim, 1).scale(size * g.trace().re / dim as f64)
        })
        .collect();
    let mut factor = |v: f64| v * (size * rng.random_range(-1.0..1.0f64)).exp();
    TransformedPoint {
        n_antennas: theta.n_antennas,
        gamma,
        omega_tx: theta.omega_tx.iter().map(|&w| factor(w)).collect(),
        omega_rx: theta.omega_rx.iter().map(|&w| factor(w)).collect(),
        z: factor(theta.z),
    }
}
