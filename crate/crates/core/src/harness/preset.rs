use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::IsacError;
use crate::scenario::{Region, ScenarioConfig};

/// Radius of the circle the user walks along in the user-angle sweep.
pub const USER_RADIUS: f64 = 400.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    RocSweep,
    AccuracyVsCaprx,
    SinrVsUserAngle,
    Custom,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::RocSweep, Preset::AccuracyVsCaprx, Preset::SinrVsUserAngle, Preset::Custom];

    pub fn name(self) -> &'static str {
        match self {
            Preset::RocSweep => "roc_sweep",
            Preset::AccuracyVsCaprx => "accuracy_vs_caprx",
            Preset::SinrVsUserAngle => "sinr_vs_user_angle",
            Preset::Custom => "custom",
        }
    }

    /// Scenario defaults for the preset.
    pub fn base_config(self) -> ScenarioConfig {
        let mut cfg = common_config();
        match self {
            Preset::RocSweep => {
                cfg.n_antennas = 3;
                cfg.power_budget = 6.0;
                cfg.cap_tx = 8.0;
                cfg.cap_rx = 8.0;
            }
            Preset::AccuracyVsCaprx | Preset::Custom => {}
            Preset::SinrVsUserAngle => {
                cfg.n_antennas = 6;
                cfg.n_rx = 1;
                cfg.rx_positions = vec![[250.0, 0.0]];
                cfg.n_users = 1;
                cfg.user_regions = vec![user_on_circle(cfg.eve_region.center, 0.0)];
                cfg.eve_region = Region::point(cfg.eve_region.center);
                cfg.rician_factor = f64::INFINITY;
                cfg.cap_tx = 8.0;
                cfg.cap_rx = 8.0;
            }
        }
        cfg
    }

    /// Channel draws per sweep value. Line-of-sight channels vary only through
    /// clutter and target scattering, so the angle sweep uses fewer draws.
    pub fn default_draws(self) -> usize {
        match self {
            Preset::SinrVsUserAngle => 5,
            _ => 20,
        }
    }

    /// Default sweep variable and values.
    pub fn default_sweep(self) -> Sweep {
        match self {
            Preset::RocSweep => Sweep::new("secrecy_floor", vec![0.5, 2.0]),
            Preset::AccuracyVsCaprx => Sweep::new("cap_rx", vec![1.0, 2.0, 3.0, 4.0, 5.0]),
            Preset::SinrVsUserAngle => Sweep::new("user_angle_deg", (0..24).map(|a| a as f64 * 15.0).collect()),
            Preset::Custom => Sweep::new("secrecy_floor", vec![0.5]),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = IsacError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let valid: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
            IsacError::InvalidConfig(format!("unknown preset {s:?}; valid presets: {}", valid.join(", ")))
        })
    }
}

/// One scalar configuration knob and the values it takes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub name: String,
    pub values: Vec<f64>,
}

impl Sweep {
    pub fn new(name: &str, values: Vec<f64>) -> Self {
        Self { name: name.to_string(), values }
    }

    pub const VARIABLES: [&'static str; 9] = [
        "secrecy_floor",
        "cap_tx",
        "cap_rx",
        "power_budget",
        "var_scatter",
        "var_clutter",
        "var_noise_rx",
        "rician_factor",
        "user_angle_deg",
    ];

    /// Returns `base` with the sweep variable set to `value`.
    pub fn apply(&self, base: &ScenarioConfig, value: f64) -> Result<ScenarioConfig, IsacError> {
        let mut cfg = base.clone();
        match self.name.as_str() {
            "secrecy_floor" => cfg.secrecy_floor = value,
            "cap_tx" => cfg.cap_tx = value,
            "cap_rx" => cfg.cap_rx = value,
            "power_budget" => cfg.power_budget = value,
            "var_scatter" => cfg.var_scatter = value,
            "var_clutter" => cfg.var_clutter = value,
            "var_noise_rx" => cfg.var_noise_rx = value,
            "rician_factor" => cfg.rician_factor = value,
            "user_angle_deg" => {
                let k = cfg.n_users as f64;
                cfg.user_regions = (0..cfg.n_users)
                    .map(|u| user_on_circle(cfg.eve_region.center, value + 360.0 * u as f64 / k))
                    .collect();
            }
            other => {
                return Err(IsacError::InvalidConfig(format!(
                    "unknown sweep variable {other:?}; valid: {}",
                    Self::VARIABLES.join(", ")
                )))
            }
        }
        Ok(cfg)
    }
}

/// A user pinned on the circle around `center`, angle in degrees counterclockwise from +x.
pub fn user_on_circle(center: [f64; 2], angle_deg: f64) -> Region {
    let (s, c) = angle_deg.to_radians().sin_cos();
    Region::point([center[0] + USER_RADIUS * c, center[1] + USER_RADIUS * s])
}

fn common_config() -> ScenarioConfig {
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
        cap_tx: 8.0,
        cap_rx: 4.0,
        secrecy_floor: 0.5,
        n_symbols: 30,
        seed: 0,
    }
}
