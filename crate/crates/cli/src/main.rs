use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use isac_core::harness::{emit_plot, overlay_file, run_experiment, ExperimentSpec, PlotKind, Preset, Sweep};

#[derive(Parser)]
#[command(name = "isac", version, about = "Secure cell-free ISAC beamforming and fronthaul design experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset experiment and write results.csv, summary.json and plot.svg.
    Run {
        #[arg(long)]
        preset: String,
        /// TOML overlay with scenario field names and an optional [sweep] table.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        draws: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        /// Override the sweep, e.g. `cap_rx=1,2,3`.
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Render an SVG plot from a results CSV.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        kind: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_sweep(text: &str) -> Result<Sweep, String> {
    let (name, values) = text.split_once('=').ok_or("sweep must look like name=v1,v2,...")?;
    let values = values
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("bad sweep value {v:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Sweep::new(name.trim(), values))
}

fn run(command: Command) -> Result<(), String> {
    match command {
        Command::Run { preset, config, seed, out, draws, trials, sweep } => {
            let preset: Preset = preset.parse().map_err(|e| format!("{e}"))?;
            let mut spec = ExperimentSpec::from_preset(preset, out);
            if let Some(path) = config {
                let overlay = overlay_file(&spec.base, &path).map_err(|e| format!("{}: {e}", path.display()))?;
                spec = spec.with_overlay(overlay);
            }
            if let Some(seed) = seed {
                spec.base.seed = seed;
            }
            if let Some(draws) = draws {
                spec.n_draws = draws;
            }
            if let Some(trials) = trials {
                spec.n_trials = trials;
            }
            if let Some(sweep) = sweep {
                spec.sweep = parse_sweep(&sweep)?;
            }
            let outcome = run_experiment(&spec).map_err(|e| e.to_string())?;
            let mut stdout = std::io::stdout().lock();
            for g in &outcome.summary.groups {
                let mean = g.mean.map_or("-".to_string(), |m| format!("{m:.4}"));
                let _ = writeln!(
                    stdout,
                    "{}={} {}: mean {mean} ({} ok, {} failed)",
                    spec.sweep.name, g.sweep_value, g.metric_name, g.n_ok, g.n_failed
                );
            }
            let _ = writeln!(stdout, "wrote {}", spec.out_dir.display());
            Ok(())
        }
        Command::Plot { csv, kind, out } => {
            let kind: PlotKind = kind.parse().map_err(|e| format!("{e}"))?;
            emit_plot(&csv, kind, &out).map_err(|e| e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
