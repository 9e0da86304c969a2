use liouville_qc::circuits::{gate_count, qft2d};
use liouville_qc::maps::ks_entropy_cat;
use liouville_qc::qsim::NoiseConfig;
use liouville_qc::spectral::{growth_fit, mean_log_k, saturation_level};
use liouville_qc::GateCounts;
use serde::{Deserialize, Serialize};

use super::Outcome;
use crate::config::RunConfig;
use crate::manifest::{ArtifactWriter, GateSummary};
use crate::pipeline::{evolve, fourier, initial_state, step_circuit};

/// Steps before this one are dominated by the patch's own edge harmonics.
pub const FIT_START: usize = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthPoint {
    pub t: usize,
    pub mean_log_k: f64,
    pub in_window: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthReport {
    pub nq: u32,
    pub saturation_level: f64,
    pub series: Vec<GrowthPoint>,
    pub window_too_small: bool,
    pub slope: Option<f64>,
    pub ks_entropy: f64,
    pub relative_error: Option<f64>,
}

pub(super) fn run(cfg: &RunConfig, w: &mut ArtifactWriter) -> anyhow::Result<Outcome> {
    let lattice = cfg.lattice();
    let step = step_circuit(cfg)?;
    let mut noise =
        (step.is_some() && cfg.noise > 0.0).then(|| NoiseConfig::new(cfg.noise, cfg.seed).source());
    let cap = saturation_level(lattice);

    let mut s = initial_state(cfg)?;
    let mut executed = GateCounts::default();
    let mut series = Vec::with_capacity(cfg.t + 1);
    let mut saturated = false;
    for t in 0..=cfg.t {
        if t > 0 {
            let (next, c) = evolve(cfg, step.as_ref(), &s, 1, noise.as_mut())?;
            s = next;
            executed = executed + c;
        }
        let qft_noise = if step.is_some() { noise.as_mut() } else { None };
        let tr = fourier(&s, qft_noise)?;
        executed = executed + gate_count(&tr.qft);
        let m = mean_log_k(&tr.spectrum)?;
        saturated |= m >= cap;
        series.push(GrowthPoint {
            t,
            mean_log_k: m,
            in_window: t >= FIT_START && !saturated,
        });
    }

    let window: Vec<(f64, f64)> = series
        .iter()
        .filter(|p| p.in_window)
        .map(|p| (p.t as f64, p.mean_log_k))
        .collect();
    let fit = growth_fit(&window);
    let h = ks_entropy_cat();
    let slope = fit.as_ref().ok().copied();
    let report = GrowthReport {
        nq: lattice.nq(),
        saturation_level: cap,
        window_too_small: fit.is_err(),
        slope,
        ks_entropy: h,
        relative_error: slope.map(|s| (s - h).abs() / h),
        series,
    };
    w.write_json("growth.json", &report)?;
    w.write_with("growth.csv", |b| {
        use std::io::Write;
        writeln!(b, "t,mean_log_k,in_window")?;
        for p in &report.series {
            writeln!(b, "{},{:.12},{}", p.t, p.mean_log_k, p.in_window)?;
        }
        Ok(())
    })?;

    let mut lines: Vec<String> = report
        .series
        .iter()
        .map(|p| {
            format!(
                "t={:>2} <ln|k|> = {:.4}{}",
                p.t,
                p.mean_log_k,
                if p.in_window { "" } else { "  (excluded)" }
            )
        })
        .collect();
    let failure = match &fit {
        Ok(s) => {
            lines.push(format!(
                "slope {s:.4} vs entropy {h:.4} ({:.1}% off)",
                100.0 * (s - h).abs() / h
            ));
            None
        }
        Err(e) => Some(format!(
            "growth window too small ({} points below saturation {cap:.3}): {e}",
            window.len()
        )),
    };
    Ok(Outcome {
        gates: GateSummary {
            map_step: step.as_ref().map(gate_count),
            qft2d: gate_count(&qft2d(lattice)),
            executed,
        },
        lines,
        failure,
    })
}
