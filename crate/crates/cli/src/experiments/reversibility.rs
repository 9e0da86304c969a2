use liouville_qc::circuits::{gate_count, inverse_circuit, map_circuit, qft2d};
use liouville_qc::liouville::{float_orbit_roundtrip, make_patch_density, pushforward_steps};
use liouville_qc::maps::ks_entropy_cat;
use liouville_qc::qsim::{apply_circuit, apply_permutation_steps, fidelity, NoiseConfig};
use liouville_qc::{Direction, MapKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{mean, median, slope, Outcome};
use crate::config::RunConfig;
use crate::manifest::{ArtifactWriter, GateSummary};
use crate::pipeline::{initial_state, sub_seed};

const POINTS_TAG: u64 = 3;
pub const CLASSICAL_POINTS: usize = 100;
pub const CLASSICAL_T_MAX: usize = 30;
/// Median-error band treated as clean exponential growth in the slope fit.
const GROWTH_BAND: (f64, f64) = (1e-13, 1e-2);

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PermutationCheck {
    /// Amplitudes identical bit for bit after `t` steps forward and back.
    pub state_bit_exact: bool,
    pub density_bit_exact: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircuitCheck {
    pub epsilon: f64,
    pub fidelities: Vec<f64>,
    pub mean_fidelity: f64,
    pub min_fidelity: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassicalStep {
    pub t: usize,
    pub median_error: f64,
    pub max_error: f64,
    /// Round trips with error below 1e-6.
    pub recovered: usize,
    /// Round trips with error above 0.1.
    pub lost: usize,
    /// Largest error with no turnaround perturbation.
    pub unperturbed_max_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReversibilityReport {
    pub nq: u32,
    pub t: usize,
    pub permutation: PermutationCheck,
    pub circuit: Vec<CircuitCheck>,
    pub classical_eps: f64,
    pub classical: Vec<ClassicalStep>,
    /// Fitted growth rate of `ln(median error)` per step.
    pub classical_error_rate: Option<f64>,
    pub ks_entropy: f64,
}

pub(super) fn run(cfg: &RunConfig, w: &mut ArtifactWriter) -> anyhow::Result<Outcome> {
    let lattice = cfg.lattice();
    let m = cfg.map_spec();
    let s0 = initial_state(cfg)?;

    let there = apply_permutation_steps(&s0, &m, Direction::Forward, cfg.t)?;
    let back = apply_permutation_steps(&there, &m, Direction::Backward, cfg.t)?;
    let d0 = make_patch_density(lattice, cfg.patch())?;
    let d_back = pushforward_steps(
        &pushforward_steps(&d0, &m, Direction::Forward, cfg.t)?,
        &m,
        Direction::Backward,
        cfg.t,
    )?;
    let permutation = PermutationCheck {
        state_bit_exact: back.amplitudes() == s0.amplitudes(),
        density_bit_exact: d_back.values() == d0.values(),
    };

    let step = map_circuit(&m)?;
    let round_trip = {
        let mut c = step.repeated(cfg.t);
        c.append(&inverse_circuit(&step).repeated(cfg.t))?;
        c
    };
    let mut levels = vec![0.0];
    if cfg.noise > 0.0 {
        levels.push(cfg.noise);
    }
    let circuit = levels
        .iter()
        .map(|&eps| -> anyhow::Result<CircuitCheck> {
            let seeds = if eps == 0.0 { 1 } else { cfg.seeds as u64 };
            let fidelities = (0..seeds)
                .into_par_iter()
                .map(|k| -> anyhow::Result<f64> {
                    let mut s = s0.clone();
                    let mut n = NoiseConfig::new(eps, cfg.seed.wrapping_add(k)).source();
                    let noise = (eps > 0.0).then_some(&mut n);
                    apply_circuit(&mut s, &round_trip, noise)?;
                    Ok(fidelity(&s0, &s)?)
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            Ok(CircuitCheck {
                epsilon: eps,
                mean_fidelity: mean(&fidelities),
                min_fidelity: fidelities.iter().copied().fold(f64::INFINITY, f64::min),
                fidelities,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let classical = classical_sweep(m.kind, cfg.classical_eps, sub_seed(cfg.seed, POINTS_TAG));
    let growth: Vec<_> = classical
        .iter()
        .filter(|s| s.median_error > GROWTH_BAND.0 && s.median_error < GROWTH_BAND.1)
        .map(|s| (s.t as f64, s.median_error.ln()))
        .collect();
    let report = ReversibilityReport {
        nq: lattice.nq(),
        t: cfg.t,
        permutation,
        circuit,
        classical_eps: cfg.classical_eps,
        classical_error_rate: if growth.len() >= 3 {
            slope(&growth)
        } else {
            None
        },
        classical,
        ks_entropy: ks_entropy_cat(),
    };
    w.write_json("reversibility.json", &report)?;
    w.write_with("classical_roundtrip.csv", |b| {
        use std::io::Write;
        writeln!(
            b,
            "t,median_error,max_error,recovered,lost,unperturbed_max_error"
        )?;
        for s in &report.classical {
            writeln!(
                b,
                "{},{:e},{:e},{},{},{:e}",
                s.t, s.median_error, s.max_error, s.recovered, s.lost, s.unperturbed_max_error
            )?;
        }
        Ok(())
    })?;

    let mut lines = vec![format!(
        "permutation round trip (t={}): state bit-exact {}, density bit-exact {}",
        cfg.t, report.permutation.state_bit_exact, report.permutation.density_bit_exact
    )];
    for c in &report.circuit {
        lines.push(format!(
            "circuit round trip eps={}: mean fidelity {:.8}, min {:.8}",
            c.epsilon, c.mean_fidelity, c.min_fidelity
        ));
    }
    for s in report.classical.iter().filter(|s| s.t % 5 == 0) {
        lines.push(format!(
            "classical t={:>2}: median error {:.3e}, {}/{} recovered, {}/{} lost",
            s.t, s.median_error, s.recovered, CLASSICAL_POINTS, s.lost, CLASSICAL_POINTS
        ));
    }
    if let Some(r) = report.classical_error_rate {
        lines.push(format!(
            "error growth rate {r:.4} per step (entropy {:.4})",
            report.ks_entropy
        ));
    }
    let permutation_ok = report.permutation.state_bit_exact && report.permutation.density_bit_exact;
    Ok(Outcome {
        gates: GateSummary {
            map_step: Some(gate_count(&step)),
            qft2d: gate_count(&qft2d(lattice)),
            executed: gate_count(&round_trip)
                .scaled(report.circuit.iter().map(|c| c.fidelities.len()).sum()),
        },
        lines,
        failure: (!permutation_ok).then(|| "lattice permutation round trip is not exact".into()),
    })
}

fn classical_sweep(kind: MapKind, eps: f64, seed: u64) -> Vec<ClassicalStep> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<(f64, f64)> = (0..CLASSICAL_POINTS)
        .map(|_| (rng.gen(), rng.gen()))
        .collect();
    (0..=CLASSICAL_T_MAX)
        .map(|t| {
            let errs: Vec<f64> = points
                .iter()
                .map(|&(x, y)| float_orbit_roundtrip(x, y, kind, t, eps).roundtrip_error)
                .collect();
            let unperturbed = points
                .iter()
                .map(|&(x, y)| float_orbit_roundtrip(x, y, kind, t, 0.0).roundtrip_error)
                .fold(0.0, f64::max);
            ClassicalStep {
                t,
                median_error: median(&errs),
                max_error: errs.iter().copied().fold(0.0, f64::max),
                recovered: errs.iter().filter(|&&e| e < 1e-6).count(),
                lost: errs.iter().filter(|&&e| e > 0.1).count(),
                unperturbed_max_error: unperturbed,
            }
        })
        .collect()
}
