//! First-order bounds used by each MM step.
//!
//! The secrecy constraint is `log A_k − log B_k − log D + log E_k` with all
//! four arguments affine in `Θ`; linearizing the two negated logs at the
//! anchor gives a concave lower bound. Both fronthaul rates are
//! `logdet(affine) − N_A log ω`, and linearizing the logdet gives a convex
//! upper bound.

use crate::error::{IsacError, Result};
use crate::linalg::{inverse_hpd, log2_det_hpd, quad_form, real_trace, CMat, LN_2};
use crate::model::NoiseLevels;
use crate::scenario::ChannelSet;

use super::{TransformedPoint, LOG_FLOOR};

/// `g(X₁, X₂) = log₂det X₁ + tr(X₁⁻¹(X₂ − X₁)) / ln 2`.
pub fn logdet_tangent(x1: &CMat, x2: &CMat) -> Result<f64> {
    if x1.shape() != x2.shape() {
        return Err(IsacError::Dimension(format!(
            "tangent shapes {:?} vs {:?}",
            x1.shape(),
            x2.shape()
        )));
    }
    let inv = inverse_hpd(x1)?;
    Ok(log2_det_hpd(x1)? + real_trace(&(inv * (x2 - x1))) / LN_2)
}

pub(crate) fn floored_log2(value: f64, context: &str) -> Result<f64> {
    if !(value >= LOG_FLOOR) {
        return Err(IsacError::LogFloor { context: context.to_string(), value });
    }
    Ok(value.log2())
}

/// The four affine arguments of the transformed secrecy expression for user `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SecrecyArgs {
    /// `h_k^H(ΣΓ+Ω)h_k + zσ²_k`
    pub user_total: f64,
    /// `h_k^H(Σ_{k'≠k}Γ+Ω)h_k + zσ²_k`
    pub user_interference: f64,
    /// `h_E^H(ΣΓ+Ω)h_E + zσ²_E`
    pub eve_total: f64,
    /// `h_E^H(Σ_{k'≠k}Γ+Ω)h_E + zσ²_E`
    pub eve_interference: f64,
}

impl SecrecyArgs {
    pub(crate) fn at(theta: &TransformedPoint, ch: &ChannelSet, noise: &NoiseLevels, k: usize) -> Self {
        let total = theta.tx_covariance();
        let interference = &total - &theta.gamma[k];
        let hk = &ch.h_users[k];
        let he = &ch.h_eve;
        Self {
            user_total: quad_form(hk, &total) + theta.z * noise.user,
            user_interference: quad_form(hk, &interference) + theta.z * noise.user,
            eve_total: quad_form(he, &total) + theta.z * noise.eve,
            eve_interference: quad_form(he, &interference) + theta.z * noise.eve,
        }
    }
}

/// Exact `R̃_Sec,k(Θ)` (no positive-part floor).
pub fn transformed_secrecy(theta: &TransformedPoint, ch: &ChannelSet, noise: &NoiseLevels, k: usize) -> Result<f64> {
    let s = SecrecyArgs::at(theta, ch, noise, k);
    Ok(floored_log2(s.user_total, "user total")? - floored_log2(s.user_interference, "user interference")?
        - floored_log2(s.eve_total, "eve total")?
        + floored_log2(s.eve_interference, "eve interference")?)
}

/// Concave lower bound `Ř_Sec,k(Θ | anchor)`.
pub fn secrecy_surrogate(
    theta: &TransformedPoint,
    anchor: &TransformedPoint,
    ch: &ChannelSet,
    noise: &NoiseLevels,
    k: usize,
) -> Result<f64> {
    let s = SecrecyArgs::at(theta, ch, noise, k);
    let a = SecrecyArgs::at(anchor, ch, noise, k);
    let linearized = floored_log2(a.user_interference, "anchor user interference")?
        + floored_log2(a.eve_total, "anchor eve total")?
        + (s.user_interference / a.user_interference - 1.0) / LN_2
        + (s.eve_total / a.eve_total - 1.0) / LN_2;
    Ok(floored_log2(s.user_total, "user total")? + floored_log2(s.eve_interference, "eve interference")?
        - linearized)
}

fn log2_omega(n_antennas: usize, omega: f64, context: &str) -> Result<f64> {
    Ok(n_antennas as f64 * floored_log2(omega, context)?)
}

/// Exact transformed Tx fronthaul rate `log₂det(Γ_i + Ω_i) − log₂det Ω_i`.
pub fn transformed_rate_tx(theta: &TransformedPoint, i: usize) -> Result<f64> {
    Ok(log2_det_hpd(&theta.tx_block(i))? - log2_omega(theta.n_antennas, theta.omega_tx[i], "omega_tx")?)
}

/// Exact transformed Rx fronthaul rate `log₂det a(Θ) − log₂det Ω_j`.
pub fn transformed_rate_rx(theta: &TransformedPoint, ch: &ChannelSet, noise: &NoiseLevels, j: usize) -> Result<f64> {
    Ok(log2_det_hpd(&theta.rx_argument(ch, noise, j))?
        - log2_omega(theta.n_antennas, theta.omega_rx[j], "omega_rx")?)
}

/// Convex upper bound on the Tx fronthaul rate of RRH `i`.
pub fn fronthaul_tx_surrogate(theta: &TransformedPoint, anchor: &TransformedPoint, i: usize) -> Result<f64> {
    Ok(logdet_tangent(&anchor.tx_block(i), &theta.tx_block(i))?
        - log2_omega(theta.n_antennas, theta.omega_tx[i], "omega_tx")?)
}

/// Convex upper bound on the Rx fronthaul rate of RRH `j`.
pub fn fronthaul_rx_surrogate(
    theta: &TransformedPoint,
    anchor: &TransformedPoint,
    ch: &ChannelSet,
    noise: &NoiseLevels,
    j: usize,
) -> Result<f64> {
    Ok(
        logdet_tangent(&anchor.rx_argument(ch, noise, j), &theta.rx_argument(ch, noise, j))?
            - log2_omega(theta.n_antennas, theta.omega_rx[j], "omega_rx")?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complex_gaussian, identity, CVec};
    use crate::scenario::{draw_channels, tests::small_config};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag(values: &[f64]) -> CMat {
        CMat::from_diagonal(&CVec::from_iterator(values.len(), values.iter().map(|&v| Complex64::new(v, 0.0))))
    }

    fn random_pd(rng: &mut ChaCha8Rng, n: usize) -> CMat {
        let a = CMat::from_fn(n, n, |_, _| complex_gaussian(rng, 1.0));
        &a * a.adjoint() + identity(n).scale(0.1)
    }

    fn random_theta(rng: &mut ChaCha8Rng) -> TransformedPoint {
        TransformedPoint {
            n_antennas: 2,
            gamma: (0..2)
                .map(|_| {
                    let a = CMat::from_fn(4, 1, |_, _| complex_gaussian(rng, 1.0));
                    &a * a.adjoint()
                })
                .collect(),
            omega_tx: (0..2).map(|_| rng.random_range(0.01..0.5)).collect(),
            omega_rx: (0..2).map(|_| rng.random_range(0.01..0.5)).collect(),
            z: rng.random_range(0.5..2.0),
        }
    }

    #[test]
    fn tangent_examples() {
        let x = diag(&[2.0, 3.0]);
        assert!((logdet_tangent(&x, &x).unwrap() - 6f64.log2()).abs() < 1e-12);
        let g = logdet_tangent(&diag(&[1.0]), &diag(&[2.0])).unwrap();
        assert!((g - 1.0 / LN_2).abs() < 1e-12);
        assert!(g >= 1.0);
        assert!(logdet_tangent(&diag(&[0.0, 1.0]), &diag(&[1.0, 1.0])).is_err());
        assert!(logdet_tangent(&diag(&[1.0]), &diag(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn tangent_overestimates_logdet() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let n = rng.random_range(1..5);
            let x1 = random_pd(&mut rng, n);
            let x2 = random_pd(&mut rng, n);
            let exact = log2_det_hpd(&x2).unwrap();
            assert!(logdet_tangent(&x1, &x2).unwrap() >= exact - 1e-9 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn secrecy_surrogate_reduces_without_eve() {
        let cfg = small_config();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut ch = draw_channels(&cfg, &mut rng).unwrap();
        ch.h_eve = CVec::zeros(4);
        let noise = NoiseLevels::from_config(&cfg);
        let anchor = random_theta(&mut rng);
        let theta = random_theta(&mut rng);
        for k in 0..2 {
            // With h_E = 0 the Eve arguments are zσ²_E; hand-reduced form:
            let hk = &ch.h_users[k];
            let a = quad_form(hk, &theta.tx_covariance()) + theta.z * noise.user;
            let b = quad_form(hk, &theta.interference_covariance(k)) + theta.z * noise.user;
            let b0 = quad_form(hk, &anchor.interference_covariance(k)) + anchor.z * noise.user;
            let e = theta.z * noise.eve;
            let e0 = anchor.z * noise.eve;
            let expected = a.log2() - (b0.log2() + (b / b0 - 1.0) / LN_2) + e.log2() - (e0.log2() + (e / e0 - 1.0) / LN_2);
            let got = secrecy_surrogate(&theta, &anchor, &ch, &noise, k).unwrap();
            assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
        }
    }

    #[test]
    fn fronthaul_tx_surrogate_without_beams_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut theta = random_theta(&mut rng);
        for g in theta.gamma.iter_mut() {
            g.fill(Complex64::new(0.0, 0.0));
        }
        for i in 0..2 {
            assert!(fronthaul_tx_surrogate(&theta, &theta, i).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn fronthaul_rx_surrogate_without_channels_is_scalar_tangent() {
        let cfg = small_config();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut ch = draw_channels(&cfg, &mut rng).unwrap();
        ch.g_sense.fill(Complex64::new(0.0, 0.0));
        ch.c_clutter.fill(Complex64::new(0.0, 0.0));
        let noise = NoiseLevels::from_config(&cfg);
        let anchor = random_theta(&mut rng);
        let theta = random_theta(&mut rng);
        for j in 0..2 {
            let x0 = anchor.z * noise.rx[j] + anchor.omega_rx[j];
            let x = theta.z * noise.rx[j] + theta.omega_rx[j];
            let expected = 2.0 * (x0.log2() + (x / x0 - 1.0) / LN_2) - 2.0 * theta.omega_rx[j].log2();
            let got = fronthaul_rx_surrogate(&theta, &anchor, &ch, &noise, j).unwrap();
            assert!((got - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn log_floor_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut theta = random_theta(&mut rng);
        theta.omega_tx[0] = 0.0;
        assert!(matches!(
            fronthaul_tx_surrogate(&theta, &theta.clone(), 0),
            Err(IsacError::LogFloor { .. }) | Err(IsacError::Singular(_))
        ));
    }
}
