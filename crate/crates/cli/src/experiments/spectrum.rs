use liouville_qc::circuits::{gate_count, qft2d};
use liouville_qc::liouville::{make_patch_density, pushforward_steps};
use liouville_qc::qsim::{sample, NoiseConfig};
use liouville_qc::spectral::{coarse, coarse_from_samples, dft_oracle, peaks, relabel_samples};
use liouville_qc::{Direction, Peak};
use serde::{Deserialize, Serialize};

use super::Outcome;
use crate::config::RunConfig;
use crate::manifest::{ArtifactWriter, GateSummary};
use crate::pipeline::{run_pipeline, step_circuit, sub_seed};

const SAMPLE_TAG: u64 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub nq: u32,
    pub t: usize,
    pub noisy: bool,
    pub total_probability: f64,
    /// Largest `|b_quantum − b_classical|` against the exact lattice DFT.
    pub oracle_max_abs_diff: f64,
    pub peak_count: usize,
    pub top_peaks: Vec<Peak>,
    pub samples: usize,
    /// Largest cell difference between sampled and exact coarse images.
    pub coarse_sample_max_abs_diff: Option<f64>,
}

pub(super) fn run(cfg: &RunConfig, w: &mut ArtifactWriter) -> anyhow::Result<Outcome> {
    let lattice = cfg.lattice();
    let step = step_circuit(cfg)?;
    let noisy = step.is_some() && cfg.noise > 0.0;
    let mut noise = noisy.then(|| NoiseConfig::new(cfg.noise, cfg.seed).source());
    let (tr, executed) = run_pipeline(cfg, step.as_ref(), noise.as_mut())?;

    let d0 = make_patch_density(lattice, cfg.patch())?;
    let exact = dft_oracle(&pushforward_steps(
        &d0,
        &cfg.map_spec(),
        Direction::Forward,
        cfg.t,
    )?);
    let peak_set = peaks(&tr.spectrum, cfg.min_decade);
    let image = coarse(&tr.spectrum, cfg.nf)?;

    w.write_with("spectrum.csv", |b| tr.spectrum.write_csv(b))?;
    w.write("peaks.json", peak_set.to_json().as_bytes())?;
    w.write_with("coarse.pgm", |b| image.write_pgm(b))?;
    w.write_with("coarse.csv", |b| image.write_csv(b))?;

    let mut coarse_diff = None;
    if cfg.samples > 0 {
        let raw = sample(&tr.state, cfg.samples, sub_seed(cfg.seed, SAMPLE_TAG))?;
        let labelled = relabel_samples(&raw, &tr.qft);
        let sampled = coarse_from_samples(&labelled, lattice, cfg.nf)?;
        coarse_diff = Some(sampled.max_abs_diff(&image));
        w.write_with("coarse_samples.pgm", |b| sampled.write_pgm(b))?;
        w.write_with("coarse_samples.csv", |b| sampled.write_csv(b))?;
    }
    if let Some(c) = &step {
        w.write("circuit.txt", c.to_text().as_bytes())?;
        w.write("qft2d.txt", tr.qft.to_text().as_bytes())?;
    }

    let report = SpectrumReport {
        nq: lattice.nq(),
        t: cfg.t,
        noisy,
        total_probability: tr.spectrum.norm_sqr(),
        oracle_max_abs_diff: tr.spectrum.max_abs_diff(&exact),
        peak_count: peak_set.len(),
        top_peaks: peak_set.entries.iter().take(10).copied().collect(),
        samples: cfg.samples,
        coarse_sample_max_abs_diff: coarse_diff,
    };
    w.write_json("spectrum.json", &report)?;

    let mut lines = vec![
        format!("nq={} t={} noisy={}", report.nq, report.t, report.noisy),
        format!(
            "peaks above 1e-{}: {}",
            cfg.min_decade + 1,
            report.peak_count
        ),
        format!("max |b - b_exact| = {:.3e}", report.oracle_max_abs_diff),
    ];
    for p in report.top_peaks.iter().take(5) {
        lines.push(format!(
            "  k=({:>5},{:>5}) p={:.6} decade {}",
            p.kx, p.ky, p.p, p.decade
        ));
    }
    if let Some(d) = coarse_diff {
        lines.push(format!("sampled coarse image max diff = {d:.4}"));
    }
    Ok(Outcome {
        gates: GateSummary {
            map_step: step.as_ref().map(gate_count),
            qft2d: gate_count(&qft2d(lattice)),
            executed,
        },
        lines,
        failure: None,
    })
}
