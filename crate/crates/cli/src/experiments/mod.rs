//! One module per subcommand. Each writes its artifacts and returns what the
//! manifest needs.

mod growth;
mod montecarlo;
mod noise;
mod reversibility;
mod spectrum;

use std::time::Instant;

use anyhow::Context;

use crate::config::{Command, RunConfig};
use crate::manifest::{ArtifactWriter, GateSummary, Manifest, QubitCounts, MANIFEST_FILE};

pub use growth::GrowthReport;
pub use montecarlo::MonteCarloReport;
pub use noise::NoiseReport;
pub use reversibility::ReversibilityReport;
pub use spectrum::SpectrumReport;

/// What an experiment hands back besides its files.
pub struct Outcome {
    pub gates: GateSummary,
    /// Human-readable summary lines.
    pub lines: Vec<String>,
    /// Set when the experiment ran but its result is unusable.
    pub failure: Option<String>,
}

pub struct Finished {
    pub manifest: Manifest,
    pub lines: Vec<String>,
}

/// Validates, runs and records one experiment. Artifacts and the manifest are
/// written even when the experiment reports a failure.
pub fn run(command: Command, cfg: RunConfig) -> anyhow::Result<Finished> {
    cfg.validate(command)?;
    let cfg = cfg.resolved();
    let start = Instant::now();
    let mut w = ArtifactWriter::create(&cfg.out)
        .with_context(|| format!("creating output directory {}", cfg.out.display()))?;
    let outcome = match command {
        Command::Spectrum => spectrum::run(&cfg, &mut w),
        Command::Reversibility => reversibility::run(&cfg, &mut w),
        Command::Noise => noise::run(&cfg, &mut w),
        Command::Growth => growth::run(&cfg, &mut w),
        Command::Montecarlo => montecarlo::run(&cfg, &mut w),
    }?;
    let out_dir = w.dir().to_path_buf();
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command,
        config: cfg.clone(),
        gates: outcome.gates,
        qubits: QubitCounts::for_nq(cfg.nq()),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        artifacts: w.into_artifacts(),
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(out_dir.join(MANIFEST_FILE), text)?;
    if let Some(msg) = outcome.failure {
        anyhow::bail!("{} failed: {msg}", command.name());
    }
    Ok(Finished {
        manifest,
        lines: outcome.lines,
    })
}

/// Least-squares slope of `y` against `x`.
pub(crate) fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub(crate) fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
