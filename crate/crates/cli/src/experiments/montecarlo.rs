use liouville_qc::circuits::{gate_count, qft2d};
use liouville_qc::liouville::{
    l1_distance, make_patch_density, mc_density, pushforward_steps, McSampling,
};
use liouville_qc::qsim::{encode, sample};
use liouville_qc::spectral::{dft_amplitudes, relabel_samples};
use liouville_qc::{Direction, LatticeSpec, Spectrum, WaveVector};
use serde::{Deserialize, Serialize};

use super::Outcome;
use crate::config::RunConfig;
use crate::manifest::{ArtifactWriter, GateSummary};
use crate::pipeline::{fourier, sub_seed};

const CLASSICAL_TAG: u64 = 4;
const QUANTUM_TAG: u64 = 5;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CostRow {
    pub samples: usize,
    /// `|b(k*)|²` from the DFT of an orbit histogram.
    pub classical_estimate: f64,
    pub classical_abs_error: f64,
    /// Frequency of `k*` among post-QFT measurements.
    pub quantum_estimate: f64,
    pub quantum_abs_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub nq: u32,
    pub t: usize,
    pub orbits: usize,
    pub sampling: McSampling,
    /// L1 distance of the configured orbit histogram to the exact pushforward.
    pub l1: f64,
    pub l1_cell: f64,
    pub l1_node: f64,
    /// Centered harmonic whose weight both estimators target.
    pub target_k: (i64, i64),
    pub target_p: f64,
    pub cost: Vec<CostRow>,
}

pub(super) fn run(cfg: &RunConfig, w: &mut ArtifactWriter) -> anyhow::Result<Outcome> {
    let lattice = cfg.lattice();
    let m = cfg.map_spec();
    let patch = cfg.patch();
    let d0 = make_patch_density(lattice, patch)?;
    let exact = pushforward_steps(&d0, &m, Direction::Forward, cfg.t)?;
    let l1_of = |s: McSampling| -> liouville_qc::Result<f64> {
        l1_distance(
            &mc_density(&m, patch, cfg.t, cfg.orbits, cfg.seed, s)?,
            &exact,
        )
    };
    let l1_cell = l1_of(McSampling::Cell)?;
    let l1_node = l1_of(McSampling::Node)?;
    let sampling: McSampling = cfg.mc_sampling.into();

    let exact_sp = dft_amplitudes(
        lattice,
        &exact.values().iter().map(|&v| v.into()).collect::<Vec<_>>(),
    );
    let k_star = target_harmonic(&exact_sp);
    let p_true = exact_sp.prob(k_star);
    let tr = fourier(&encode(&exact)?, None)?;
    let mut cost = Vec::new();
    for budget in budgets(cfg.orbits) {
        let hist = mc_density(
            &m,
            patch,
            cfg.t,
            budget,
            sub_seed(cfg.seed, CLASSICAL_TAG),
            McSampling::Node,
        )?;
        let amps: Vec<_> = hist.values().iter().map(|&v| v.into()).collect();
        let classical = dft_amplitudes(lattice, &amps).prob(k_star);
        let raw = sample(&tr.state, budget, sub_seed(cfg.seed, QUANTUM_TAG))?;
        let hits = relabel_samples(&raw, &tr.qft)
            .outcomes
            .iter()
            .filter(|&&(kx, ky)| kx == k_star.kx && ky == k_star.ky)
            .count();
        let quantum = hits as f64 / budget as f64;
        cost.push(CostRow {
            samples: budget,
            classical_estimate: classical,
            classical_abs_error: (classical - p_true).abs(),
            quantum_estimate: quantum,
            quantum_abs_error: (quantum - p_true).abs(),
        });
    }

    let report = MonteCarloReport {
        nq: lattice.nq(),
        t: cfg.t,
        orbits: cfg.orbits,
        sampling,
        l1: match sampling {
            McSampling::Cell => l1_cell,
            McSampling::Node => l1_node,
        },
        l1_cell,
        l1_node,
        target_k: k_star.centered(lattice),
        target_p: p_true,
        cost,
    };
    w.write_json("montecarlo.json", &report)?;

    let mut lines = vec![
        format!(
            "nq={} t={} orbits={}: L1 node {:.4}, cell {:.4}",
            report.nq, report.t, report.orbits, report.l1_node, report.l1_cell
        ),
        format!(
            "target k=({}, {}) with p = {:.4e}",
            report.target_k.0, report.target_k.1, report.target_p
        ),
        format!("{:>9} {:>12} {:>12}", "samples", "classical", "quantum"),
    ];
    for r in &report.cost {
        lines.push(format!(
            "{:>9} {:>12.3e} {:>12.3e}",
            r.samples, r.classical_abs_error, r.quantum_abs_error
        ));
    }
    Ok(Outcome {
        gates: GateSummary {
            map_step: None,
            qft2d: gate_count(&qft2d(lattice)),
            executed: gate_count(&tr.qft),
        },
        lines,
        failure: None,
    })
}

/// Strongest harmonic with `max(|kx|, |ky|) ≥ N/4`, else the strongest `k ≠ 0`.
fn target_harmonic(sp: &Spectrum) -> WaveVector {
    let l: LatticeSpec = sp.lattice();
    let nq = l.nq();
    let mask = l.side() - 1;
    let quarter = (l.side() / 4) as i64;
    let best = |high_only: bool| {
        sp.coeffs()
            .iter()
            .enumerate()
            .skip(1)
            .map(|(idx, c)| (WaveVector::new(idx >> nq, idx & mask), c.norm_sqr()))
            .filter(|(k, p)| {
                let (x, y) = k.centered(l);
                *p > 0.0 && (!high_only || x.abs().max(y.abs()) >= quarter)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(k, _)| k)
    };
    best(true)
        .or_else(|| best(false))
        .unwrap_or(WaveVector::new(0, 0))
}

/// Powers of ten from 100 up to `orbits`, ending at `orbits` itself.
fn budgets(orbits: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut b = 100;
    while b < orbits {
        out.push(b);
        b *= 10;
    }
    out.push(orbits);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_ladder() {
        assert_eq!(budgets(50), vec![50]);
        assert_eq!(budgets(1000), vec![100, 1000]);
        assert_eq!(budgets(2500), vec![100, 1000, 2500]);
    }
}
