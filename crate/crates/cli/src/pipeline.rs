//! Shared evolve-then-transform steps used by every experiment.

use liouville_qc::circuits::{gate_count, map_circuit, qft2d};
use liouville_qc::liouville::make_patch_density;
use liouville_qc::qsim::{apply_circuit, apply_permutation_steps, encode, GateNoise};
use liouville_qc::spectral::spectrum_of_state;
use liouville_qc::{Circuit, Direction, GateCounts, Spectrum, StateVector};

use crate::config::{Mode, RunConfig};

/// Derives an independent seed for a named sub-task.
pub fn sub_seed(seed: u64, tag: u64) -> u64 {
    seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn initial_state(cfg: &RunConfig) -> liouville_qc::Result<StateVector> {
    encode(&make_patch_density(cfg.lattice(), cfg.patch())?)
}

/// One map step as a circuit, or `None` in permutation mode.
pub fn step_circuit(cfg: &RunConfig) -> liouville_qc::Result<Option<Circuit>> {
    match cfg.mode {
        Mode::Perm => Ok(None),
        Mode::Circuit => map_circuit(&cfg.map_spec()).map(Some),
    }
}

/// Advances `s` by `t` forward steps. Noise applies to gate-level runs only.
pub fn evolve(
    cfg: &RunConfig,
    step: Option<&Circuit>,
    s: &StateVector,
    t: usize,
    noise: Option<&mut GateNoise>,
) -> liouville_qc::Result<(StateVector, GateCounts)> {
    match step {
        None => Ok((
            apply_permutation_steps(s, &cfg.map_spec(), Direction::Forward, t)?,
            GateCounts::default(),
        )),
        Some(c) => {
            let mut out = s.clone();
            let mut noise = noise;
            for _ in 0..t {
                apply_circuit(&mut out, c, noise.as_deref_mut())?;
            }
            Ok((out, gate_count(c).scaled(t)))
        }
    }
}

/// Post-QFT state and its harmonic-indexed spectrum.
pub struct Transformed {
    pub state: StateVector,
    pub spectrum: Spectrum,
    pub qft: Circuit,
}

pub fn fourier(
    s: &StateVector,
    noise: Option<&mut GateNoise>,
) -> liouville_qc::Result<Transformed> {
    let qft = qft2d(s.lattice());
    let mut state = s.clone();
    apply_circuit(&mut state, &qft, noise)?;
    let spectrum = spectrum_of_state(&state, &qft);
    Ok(Transformed {
        state,
        spectrum,
        qft,
    })
}

/// Patch state evolved `cfg.t` steps and transformed, with `noise` shared by
/// the map steps and the QFT in circuit mode.
pub fn run_pipeline(
    cfg: &RunConfig,
    step: Option<&Circuit>,
    mut noise: Option<&mut GateNoise>,
) -> liouville_qc::Result<(Transformed, GateCounts)> {
    let s0 = initial_state(cfg)?;
    let (s, executed) = evolve(cfg, step, &s0, cfg.t, noise.as_deref_mut())?;
    let qft_noise = if step.is_some() { noise } else { None };
    let tr = fourier(&s, qft_noise)?;
    let total = executed + gate_count(&tr.qft);
    Ok((tr, total))
}
