//! Quantum-register simulation of Liouville densities for the Arnold cat map
//! and its quadratically perturbed variant.
//!
//! The crate is organised bottom-up:
//!
//! * [`maps`]: exact lattice bijections, their inverses and the cat map's
//!   transport law in Fourier space.
//! * [`liouville`]: classical densities on the lattice, exact pushforward,
//!   Monte-Carlo orbit histograms and double-precision round trips.
//! * [`qsim`]: two-register state vectors, elementary gates with angle
//!   noise, permutations, fidelity and measurement sampling.
//! * [`circuits`]: QFT, phase-frame adders and full map circuits built from
//!   `H`, `Phase`, `CPhase` and `CCPhase` gates.
//! * [`spectral`]: exact spectra, the DFT oracle, peak binning, coarse
//!   images and harmonic-growth statistics.

pub mod circuits;
pub mod liouville;
pub mod maps;
pub mod qsim;
pub mod spectral;

use thiserror::Error;

pub use circuits::{Circuit, Gate, GateCounts, GateKind, Register};
pub use liouville::{DensityGrid, OrbitResult, PatchSpec};
pub use maps::{Direction, LatticeSpec, MapKind, MapSpec, PhasePoint, QuadMode, WaveVector};
pub use qsim::{NoiseConfig, SampleSet, StateVector};
pub use spectral::{CoarseImage, Peak, PeakSet, Spectrum};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("register width {0} outside 1..=16")]
    InvalidLattice(u32),
    #[error("patch {0:?} is empty")]
    EmptyPatch(PatchSpec),
    #[error("patch {patch:?} does not fit in a {side}x{side} lattice")]
    PatchOutOfRange { patch: PatchSpec, side: usize },
    #[error("values are not L2-normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("lattice mismatch: nq {0} vs {1}")]
    LatticeMismatch(u32, u32),
    #[error("state dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("qubit index {index} out of range for {nqubits} qubits")]
    QubitOutOfRange { index: usize, nqubits: usize },
    #[error("gate acts twice on qubit {0}")]
    RepeatedQubit(usize),
    #[error("multiplier {multiplier} outside [0, {side})")]
    InvalidMultiplier { multiplier: u64, side: usize },
    #[error("quadratic mode {0:?} has no phase-arithmetic circuit")]
    UnsupportedQuadMode(QuadMode),
    #[error("coarse width nf={nf} outside 1..={nq}")]
    InvalidCoarseWidth { nf: u32, nq: u32 },
    #[error("all spectral weight sits at k = 0")]
    NoNonzeroHarmonics,
    #[error("growth fit needs at least 3 points, got {0}")]
    InsufficientPoints(usize),
    #[error("sample count must be at least 1")]
    NoSamples,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
