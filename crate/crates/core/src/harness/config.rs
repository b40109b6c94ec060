//! TOML overlay onto a preset's scenario.
//!
//! Top-level keys are `ScenarioConfig` field names; an optional `[sweep]`
//! table replaces the preset's sweep. Anything else is rejected.

use std::path::Path;

use crate::error::{IsacError, Result};
use crate::scenario::ScenarioConfig;

use super::preset::Sweep;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigOverlay {
    pub scenario: ScenarioConfig,
    pub sweep: Option<Sweep>,
}

pub fn overlay_str(base: &ScenarioConfig, text: &str) -> Result<ConfigOverlay> {
    let mut table: toml::Table = text.parse()?;
    let sweep = match table.remove("sweep") {
        Some(value) => Some(value.try_into::<Sweep>()?),
        None => None,
    };
    let mut merged = toml::Table::try_from(base).map_err(|e| IsacError::InvalidConfig(e.to_string()))?;
    for (key, value) in table {
        if !merged.contains_key(&key) {
            return Err(IsacError::InvalidConfig(format!("unknown config key {key:?}")));
        }
        merged.insert(key, value);
    }
    let scenario: ScenarioConfig = toml::Value::Table(merged).try_into()?;
    scenario.validate()?;
    Ok(ConfigOverlay { scenario, sweep })
}

pub fn overlay_file(base: &ScenarioConfig, path: &Path) -> Result<ConfigOverlay> {
    overlay_str(base, &std::fs::read_to_string(path)?)
}
