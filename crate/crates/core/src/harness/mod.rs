//! Experiment presets, Monte Carlo orchestration over channel draws, and
//! CSV/JSON/SVG output.
//!
//! Every draw gets its own seed derived from the experiment seed and the draw
//! index only, so all sweep values of a draw share the same channel realization
//! and the same detection randomness.

mod config;
mod plot;
mod preset;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::random_beamforming_design;
use crate::detection::{detection_at_fa, sensing_accuracy, simulate_roc, RocCurve, RocMode};
use crate::error::{IsacError, Result};
use crate::model::{sensing_sinr, Budgets, DesignPoint, NoiseLevels};
use crate::optimizer::{mm_optimize, MmSettings};
use crate::scenario::{draw_channels, ScenarioConfig};

pub use config::{overlay_file, overlay_str, ConfigOverlay};
pub use plot::{emit_plot, render_plot, PlotKind};
pub use preset::{user_on_circle, Preset, Sweep, USER_RADIUS};

/// False-alarm level at which detection and accuracy are reported.
pub const REFERENCE_FA: f64 = 0.1;
pub const ROC_GRID_POINTS: usize = 101;
pub const CSV_HEADER: &str = "preset,sweep_name,sweep_value,draw,seed,status,metric_name,metric_x,metric_y";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub preset: Preset,
    pub base: ScenarioConfig,
    pub sweep: Sweep,
    pub n_draws: usize,
    pub n_trials: usize,
    pub out_dir: PathBuf,
    pub settings: MmSettings,
}

impl ExperimentSpec {
    /// Preset defaults: 5000 detection trials per hypothesis, draws per preset.
    pub fn from_preset(preset: Preset, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            preset,
            base: preset.base_config(),
            sweep: preset.default_sweep(),
            n_draws: preset.default_draws(),
            n_trials: 5000,
            out_dir: out_dir.into(),
            settings: MmSettings::default(),
        }
    }

    pub fn with_overlay(mut self, overlay: ConfigOverlay) -> Self {
        self.base = overlay.scenario;
        if let Some(sweep) = overlay.sweep {
            self.sweep = sweep;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweep.values.is_empty() {
            return Err(IsacError::InvalidConfig("sweep values must be non-empty".into()));
        }
        if self.n_draws == 0 || self.n_trials == 0 {
            return Err(IsacError::InvalidConfig("draws and trials must be >= 1".into()));
        }
        self.settings.validate()?;
        for &v in &self.sweep.values {
            self.sweep.apply(&self.base, v)?.validate()?;
        }
        Ok(())
    }
}

/// One line of `results.csv`. `metric_y` is empty for rows that did not produce a value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub preset: String,
    pub sweep_name: String,
    pub sweep_value: f64,
    pub draw: usize,
    pub seed: u64,
    pub status: String,
    pub metric_name: String,
    pub metric_x: f64,
    pub metric_y: Option<f64>,
}

impl ResultRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub sweep_value: f64,
    pub metric_name: String,
    pub n_ok: usize,
    pub n_failed: usize,
    /// Mean over successful draws: `p_de` at the reference false-alarm level for ROC
    /// metrics, `metric_y` otherwise.
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub preset: String,
    pub sweep_name: String,
    pub seed: u64,
    pub n_draws: usize,
    pub n_trials: usize,
    pub n_rows: usize,
    pub statuses: BTreeMap<String, usize>,
    pub groups: Vec<GroupSummary>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub rows: Vec<ResultRow>,
    pub summary: Summary,
}

/// Seed of draw `draw`, independent of the sweep value.
pub fn draw_seed(seed: u64, draw: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw as u64);
    rng.next_u64()
}

fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const STREAM_CHANNEL: u64 = 0;
const STREAM_OPTIMIZER: u64 = 1;
const STREAM_RANDOM_BEAM: u64 = 2;
const STREAM_DETECT_PROPOSED: u64 = 3;
const STREAM_DETECT_DISTRIBUTED: u64 = 4;
const STREAM_DETECT_RANDOM: u64 = 5;

pub fn status_of(err: &IsacError) -> &'static str {
    match err {
        IsacError::Infeasible { .. } => "infeasible",
        IsacError::RankOneRejected(_) => "rank_one_rejected",
        _ => "error",
    }
}

/// Same status class as `err`, for reporting one failure in several rows.
fn echo(err: &IsacError) -> IsacError {
    match err {
        IsacError::Infeasible { constraint, .. } => IsacError::Infeasible { constraint, detail: err.to_string() },
        IsacError::RankOneRejected(detail) => IsacError::RankOneRejected(detail.clone()),
        _ => IsacError::Experiment(err.to_string()),
    }
}

/// `p_de` on the uniform `p_fa` grid `0, 0.01, …, 1`.
pub fn roc_on_grid(roc: &RocCurve) -> Result<Vec<(f64, f64)>> {
    (0..ROC_GRID_POINTS)
        .map(|i| {
            let fa = i as f64 / (ROC_GRID_POINTS - 1) as f64;
            let de = if i == 0 {
                roc.points.iter().filter(|p| p.0 == 0.0).map(|p| p.1).fold(0.0, f64::max)
            } else if i == ROC_GRID_POINTS - 1 {
                1.0
            } else {
                detection_at_fa(roc, fa)?
            };
            Ok((fa, de))
        })
        .collect()
}

struct DrawContext<'a> {
    spec: &'a ExperimentSpec,
    sweep_value: f64,
    draw: usize,
    seed: u64,
}

impl DrawContext<'_> {
    fn row(&self, status: &str, metric: &str, x: f64, y: Option<f64>) -> ResultRow {
        ResultRow {
            preset: self.spec.preset.name().to_string(),
            sweep_name: self.spec.sweep.name.clone(),
            sweep_value: self.sweep_value,
            draw: self.draw,
            seed: self.seed,
            status: status.to_string(),
            metric_name: metric.to_string(),
            metric_x: x,
            metric_y: y,
        }
    }

    fn roc_rows(&self, metric: &str, roc: Result<RocCurve>) -> Vec<ResultRow> {
        match roc.and_then(|r| roc_on_grid(&r)) {
            Ok(grid) => grid.into_iter().map(|(x, y)| self.row("ok", metric, x, Some(y))).collect(),
            Err(e) => (0..ROC_GRID_POINTS)
                .map(|i| self.row(status_of(&e), metric, i as f64 / (ROC_GRID_POINTS - 1) as f64, None))
                .collect(),
        }
    }

    fn accuracy_row(&self, metric: &str, roc: Result<RocCurve>) -> ResultRow {
        match roc.and_then(|r| detection_at_fa(&r, REFERENCE_FA)) {
            Ok(p_de) => self.row("ok", metric, REFERENCE_FA, Some(sensing_accuracy(p_de, REFERENCE_FA))),
            Err(e) => self.row(status_of(&e), metric, REFERENCE_FA, None),
        }
    }
}

fn run_draw(spec: &ExperimentSpec, sweep_value: f64, draw: usize) -> Result<Vec<ResultRow>> {
    let cfg = spec.sweep.apply(&spec.base, sweep_value)?;
    let seed = draw_seed(spec.base.seed, draw);
    let ctx = DrawContext { spec, sweep_value, draw, seed };
    let ch = draw_channels(&cfg, &mut substream(seed, STREAM_CHANNEL))?;
    let budgets = Budgets::from_config(&cfg);
    let noise = NoiseLevels::from_config(&cfg);
    let proposed = mm_optimize(&ch, &budgets, &noise, &spec.settings, &mut substream(seed, STREAM_OPTIMIZER))
        .map(|outcome| outcome.design);
    let roc = |design: &Result<DesignPoint>, mode: RocMode, stream: u64| -> Result<RocCurve> {
        let design = design.as_ref().map_err(echo)?;
        simulate_roc(design, &ch, &noise, mode, spec.n_trials, cfg.n_symbols, &mut substream(seed, stream))
    };

    Ok(match spec.preset {
        Preset::RocSweep | Preset::Custom => {
            ctx.roc_rows("roc_centralized", roc(&proposed, RocMode::Centralized, STREAM_DETECT_PROPOSED))
        }
        Preset::AccuracyVsCaprx => {
            let random = random_beamforming_design(&ch, &budgets, &noise, &mut substream(seed, STREAM_RANDOM_BEAM));
            vec![
                ctx.accuracy_row(
                    "accuracy_proposed",
                    roc(&proposed, RocMode::Centralized, STREAM_DETECT_PROPOSED),
                ),
                // The distributed baseline keeps the optimized transmit design and changes only the fusion.
                ctx.accuracy_row(
                    "accuracy_distributed",
                    roc(&proposed, RocMode::Distributed, STREAM_DETECT_DISTRIBUTED),
                ),
                ctx.accuracy_row("accuracy_random", roc(&random, RocMode::Centralized, STREAM_DETECT_RANDOM)),
            ]
        }
        Preset::SinrVsUserAngle => vec![match &proposed {
            Ok(design) => ctx.row("ok", "sensing_sinr", sweep_value, Some(sensing_sinr(design, &ch, &noise))),
            Err(e) => ctx.row(status_of(e), "sensing_sinr", sweep_value, None),
        }],
    })
}

fn summarize(spec: &ExperimentSpec, rows: &[ResultRow]) -> Summary {
    let mut statuses = BTreeMap::new();
    for r in rows {
        *statuses.entry(r.status.clone()).or_insert(0) += 1;
    }
    let mut groups: Vec<GroupSummary> = Vec::new();
    for &value in &spec.sweep.values {
        let in_value: Vec<&ResultRow> = rows.iter().filter(|r| r.sweep_value == value).collect();
        let mut metrics: Vec<&str> = Vec::new();
        for r in &in_value {
            if !metrics.contains(&r.metric_name.as_str()) {
                metrics.push(&r.metric_name);
            }
        }
        for metric in metrics {
            let selected: Vec<&&ResultRow> = in_value
                .iter()
                .filter(|r| r.metric_name == metric)
                .filter(|r| !metric.starts_with("roc") || (r.metric_x - REFERENCE_FA).abs() < 1e-12)
                .collect();
            let ok: Vec<f64> = selected.iter().filter(|r| r.is_ok()).filter_map(|r| r.metric_y).collect();
            groups.push(GroupSummary {
                sweep_value: value,
                metric_name: metric.to_string(),
                n_ok: ok.len(),
                n_failed: selected.len() - ok.len(),
                mean: (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64),
            });
        }
    }
    Summary {
        preset: spec.preset.name().to_string(),
        sweep_name: spec.sweep.name.clone(),
        seed: spec.base.seed,
        n_draws: spec.n_draws,
        n_trials: spec.n_trials,
        n_rows: rows.len(),
        statuses,
        groups,
    }
}

/// Runs every (sweep value, draw) pair, without touching the filesystem.
pub fn run_rows(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    spec.validate()?;
    let jobs: Vec<(usize, f64, usize)> = spec
        .sweep
        .values
        .iter()
        .enumerate()
        .flat_map(|(i, &v)| (0..spec.n_draws).map(move |d| (i, v, d)))
        .collect();
    let results: Vec<Result<Vec<ResultRow>>> =
        jobs.par_iter().map(|&(_, value, draw)| run_draw(spec, value, draw)).collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    if !rows.iter().any(ResultRow::is_ok) {
        let first = rows.first().map(|r| r.status.clone()).unwrap_or_default();
        return Err(IsacError::Experiment(format!("every draw failed (first status: {first})")));
    }
    let summary = summarize(spec, &rows);
    Ok(ExperimentOutcome { rows, summary })
}

pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for r in rows {
        writer.serialize(r)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<&str> = reader.headers()?.iter().collect();
    if header.join(",") != CSV_HEADER {
        return Err(IsacError::Experiment(format!("unexpected CSV header {:?}", header.join(","))));
    }
    Ok(reader.deserialize().collect::<std::result::Result<Vec<ResultRow>, _>>()?)
}

pub fn plot_kind(preset: Preset) -> PlotKind {
    match preset {
        Preset::RocSweep | Preset::Custom => PlotKind::Roc,
        Preset::AccuracyVsCaprx => PlotKind::Accuracy,
        Preset::SinrVsUserAngle => PlotKind::Sinr,
    }
}

/// Runs the experiment and writes `results.csv`, `summary.json` and `plot.svg` into the output directory.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    spec.validate()?;
    fs::create_dir_all(&spec.out_dir)?;
    let outcome = run_rows(spec)?;
    let csv_path = spec.out_dir.join("results.csv");
    write_csv(&outcome.rows, &csv_path)?;
    fs::write(spec.out_dir.join("summary.json"), serde_json::to_string_pretty(&outcome.summary)? + "\n")?;
    fs::write(spec.out_dir.join("plot.svg"), render_plot(&outcome.rows, plot_kind(spec.preset))?)?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(preset: Preset, dir: &Path) -> ExperimentSpec {
        let mut spec = ExperimentSpec::from_preset(preset, dir);
        spec.n_draws = 2;
        spec.n_trials = 50;
        spec.sweep.values.truncate(2);
        spec
    }

    #[test]
    fn draw_seed_ignores_sweep_value() {
        assert_eq!(draw_seed(5, 3), draw_seed(5, 3));
        assert_ne!(draw_seed(5, 3), draw_seed(5, 4));
        assert_ne!(draw_seed(5, 3), draw_seed(6, 3));
    }

    #[test]
    fn roc_grid_endpoints() {
        let roc = RocCurve { points: vec![(0.0, 0.0), (0.0, 0.3), (1.0, 1.0)], n_h0: 1, n_h1: 1 };
        let grid = roc_on_grid(&roc).unwrap();
        assert_eq!(grid.len(), ROC_GRID_POINTS);
        assert_eq!(grid[0], (0.0, 0.3));
        assert_eq!(grid[100], (1.0, 1.0));
        assert!((grid[50].1 - 0.65).abs() < 1e-12);
    }

    #[test]
    fn spec_validation() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = tiny(Preset::RocSweep, dir.path());
        spec.sweep.values.clear();
        assert!(spec.validate().is_err());
        let mut spec = tiny(Preset::RocSweep, dir.path());
        spec.n_draws = 0;
        assert!(spec.validate().is_err());
        let mut spec = tiny(Preset::RocSweep, dir.path());
        spec.sweep.name = "nope".into();
        assert!(spec.validate().is_err());
    }

    #[test]
    fn row_count_covers_every_draw_and_grid_point() {
        let dir = tempfile::tempdir().unwrap();
        let spec = tiny(Preset::RocSweep, dir.path());
        let out = run_experiment(&spec).unwrap();
        assert_eq!(out.rows.len(), 2 * 2 * ROC_GRID_POINTS);
        let back = read_csv(&dir.path().join("results.csv")).unwrap();
        assert_eq!(back, out.rows);
        let first = fs::read_to_string(dir.path().join("results.csv")).unwrap();
        assert!(first.starts_with(CSV_HEADER));
        assert!(dir.path().join("summary.json").exists());
        assert!(dir.path().join("plot.svg").exists());
    }

    #[test]
    fn accuracy_rows_per_scheme() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_rows(&tiny(Preset::AccuracyVsCaprx, dir.path())).unwrap();
        assert_eq!(out.rows.len(), 2 * 2 * 3);
        let names: std::collections::BTreeSet<&str> = out.rows.iter().map(|r| r.metric_name.as_str()).collect();
        assert_eq!(names.len(), 3);
    }

    #[test]
    fn infeasible_draws_are_kept() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = tiny(Preset::RocSweep, dir.path());
        spec.sweep.values = vec![0.5, 1e3];
        let out = run_rows(&spec).unwrap();
        assert_eq!(out.rows.len(), 2 * 2 * ROC_GRID_POINTS);
        assert!(out.rows.iter().filter(|r| r.sweep_value == 1e3).all(|r| r.status == "infeasible" && r.metric_y.is_none()));
        spec.sweep.values = vec![1e3];
        assert!(run_rows(&spec).is_err());
    }
}
