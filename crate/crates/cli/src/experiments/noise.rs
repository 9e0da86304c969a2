use liouville_qc::circuits::{gate_count, qft2d};
use liouville_qc::qsim::{fidelity, NoiseConfig};
use liouville_qc::spectral::{coarse, peaks};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{mean, slope, Outcome};
use crate::config::RunConfig;
use crate::manifest::{ArtifactWriter, GateSummary};
use crate::pipeline::{run_pipeline, step_circuit, sub_seed, Transformed};

const SWEEP_TAG: u64 = 2;
/// Multiples of the configured noise level used by the infidelity sweep.
pub const SWEEP_FACTORS: [f64; 3] = [0.5, 1.0, 2.0];
/// Peak level of the robustness comparison: peaks with `p > 10^{-2}`.
pub const ROBUST_DECADE: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub fidelity: f64,
    /// `matches[d]`: noisy and noiseless peak sets agree above `10^{-(d+1)}`.
    pub matches: Vec<bool>,
    pub coarse_max_abs_diff: f64,
    /// Largest relative weight change among noiseless peaks above the robust level.
    pub max_relative_peak_shift: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub mean_infidelity: f64,
    pub infidelities: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseReport {
    pub nq: u32,
    pub t: usize,
    pub epsilon: f64,
    pub seeds: Vec<SeedResult>,
    /// Seeds whose peak sets match above `10^{-(ROBUST_DECADE+1)}`.
    pub robust_matches: usize,
    /// Noiseless peaks within 10% of the robust cutoff.
    pub near_cutoff_peaks: usize,
    pub sweep: Vec<SweepPoint>,
    /// Ratios of consecutive mean infidelities (ideal 4 for doubling ε).
    pub sweep_ratios: Vec<f64>,
    /// Log-log slope of mean infidelity against ε (ideal 2).
    pub sweep_exponent: Option<f64>,
}

pub(super) fn run(cfg: &RunConfig, w: &mut ArtifactWriter) -> anyhow::Result<Outcome> {
    let lattice = cfg.lattice();
    let step = step_circuit(cfg)?.expect("noise runs in circuit mode");
    let run_seed = |eps: f64, seed: u64| -> liouville_qc::Result<Transformed> {
        let mut n = NoiseConfig::new(eps, seed).source();
        Ok(run_pipeline(cfg, Some(&step), Some(&mut n))?.0)
    };
    let (clean, executed) = run_pipeline(cfg, Some(&step), None)?;
    let robust = peaks(&clean.spectrum, ROBUST_DECADE);
    let clean_coarse = coarse(&clean.spectrum, cfg.nf)?;
    let clean_peaks: Vec<_> = (0..=cfg.min_decade)
        .map(|d| peaks(&clean.spectrum, d))
        .collect();

    let seeds = (0..cfg.seeds as u64)
        .into_par_iter()
        .map(|k| -> anyhow::Result<SeedResult> {
            let seed = cfg.seed.wrapping_add(k);
            let noisy = run_seed(cfg.noise, seed)?;
            let matches = clean_peaks
                .iter()
                .enumerate()
                .map(|(d, p)| p.same_bins(&peaks(&noisy.spectrum, d as u32)))
                .collect();
            let shift = robust
                .entries
                .iter()
                .map(|p| {
                    let k = lattice_k(lattice, p.kx, p.ky);
                    (noisy.spectrum.prob(k) - p.p).abs() / p.p
                })
                .fold(0.0, f64::max);
            Ok(SeedResult {
                seed,
                fidelity: fidelity(&clean.state, &noisy.state)?,
                matches,
                coarse_max_abs_diff: coarse(&noisy.spectrum, cfg.nf)?.max_abs_diff(&clean_coarse),
                max_relative_peak_shift: shift,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let sweep_base = sub_seed(cfg.seed, SWEEP_TAG);
    let sweep = SWEEP_FACTORS
        .iter()
        .map(|f| -> anyhow::Result<SweepPoint> {
            let eps = cfg.noise * f;
            let infidelities = (0..cfg.sweep_seeds as u64)
                .into_par_iter()
                .map(|k| -> anyhow::Result<f64> {
                    let noisy = run_seed(eps, sweep_base.wrapping_add(k))?;
                    Ok(1.0 - fidelity(&clean.state, &noisy.state)?)
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            Ok(SweepPoint {
                epsilon: eps,
                mean_infidelity: mean(&infidelities),
                infidelities,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let sweep_ratios = sweep
        .windows(2)
        .map(|p| p[1].mean_infidelity / p[0].mean_infidelity)
        .collect();
    let log_points: Vec<_> = sweep
        .iter()
        .filter(|p| p.epsilon > 0.0 && p.mean_infidelity > 0.0)
        .map(|p| (p.epsilon.ln(), p.mean_infidelity.ln()))
        .collect();

    let cutoff = 10f64.powi(-(ROBUST_DECADE as i32) - 1);
    let report = NoiseReport {
        nq: lattice.nq(),
        t: cfg.t,
        epsilon: cfg.noise,
        robust_matches: seeds
            .iter()
            .filter(|s| s.matches[ROBUST_DECADE as usize])
            .count(),
        near_cutoff_peaks: robust.entries.iter().filter(|p| p.p < 1.1 * cutoff).count(),
        seeds,
        sweep,
        sweep_ratios,
        sweep_exponent: slope(&log_points),
    };
    w.write_json("noise.json", &report)?;

    let mut lines = vec![format!(
        "nq={} t={} eps={}: peak sets above 1e-{} match for {}/{} seeds",
        report.nq,
        report.t,
        report.epsilon,
        ROBUST_DECADE + 1,
        report.robust_matches,
        report.seeds.len()
    )];
    for s in &report.seeds {
        lines.push(format!(
            "  seed {}: fidelity {:.6}, max peak shift {:.2}%, coarse diff {:.2e}",
            s.seed,
            s.fidelity,
            100.0 * s.max_relative_peak_shift,
            s.coarse_max_abs_diff
        ));
    }
    if report.near_cutoff_peaks > 0 {
        lines.push(format!(
            "  {} noiseless peaks lie within 10% of the cutoff",
            report.near_cutoff_peaks
        ));
    }
    for p in &report.sweep {
        lines.push(format!(
            "eps={:.4}: mean infidelity {:.4e}",
            p.epsilon, p.mean_infidelity
        ));
    }
    if let Some(e) = report.sweep_exponent {
        lines.push(format!("infidelity exponent {e:.3}"));
    }
    Ok(Outcome {
        gates: GateSummary {
            map_step: Some(gate_count(&step)),
            qft2d: gate_count(&qft2d(lattice)),
            executed,
        },
        lines,
        failure: None,
    })
}

fn lattice_k(l: liouville_qc::LatticeSpec, kx: i64, ky: i64) -> liouville_qc::WaveVector {
    liouville_qc::WaveVector::new(l.stored(kx), l.stored(ky))
}
