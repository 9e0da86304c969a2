//! Two-register state-vector simulator.
//!
//! Amplitudes are stored row-major with the x register in the high bits:
//! `amplitudes[i·N + j]` is the coefficient of `|x_i⟩|y_j⟩`. Qubit `q` is bit
//! `q` of that index, so the y register occupies qubits `0..nq` and the x
//! register qubits `nq..2nq`. Only the two data registers are materialized.

use std::io::{self, Read, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::{Circuit, Gate};
use crate::liouville::{DensityGrid, NORM_TOLERANCE};
use crate::maps::{Direction, LatticeSpec, MapSpec};
use crate::{Error, Result};

/// Work per rayon task; below this kernels run serially.
const PAR_MIN_LEN: usize = 1 << 12;

const DUMP_MAGIC: &[u8; 4] = b"LQSV";

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    lattice: LatticeSpec,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩|0…0⟩`.
    pub fn zero(lattice: LatticeSpec) -> Self {
        Self::basis(lattice, 0, 0)
    }

    /// Computational basis state `|i⟩|j⟩`.
    pub fn basis(lattice: LatticeSpec, i: usize, j: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); lattice.cells()];
        amplitudes[(i << lattice.nq()) | j] = Complex64::new(1.0, 0.0);
        Self {
            lattice,
            amplitudes,
        }
    }

    pub fn from_amplitudes(lattice: LatticeSpec, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != lattice.cells() {
            return Err(Error::DimensionMismatch(amplitudes.len(), lattice.cells()));
        }
        let s = Self {
            lattice,
            amplitudes,
        };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(s)
    }

    /// Haar-like random state: independent Gaussian components, normalized.
    pub fn random(lattice: LatticeSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gauss = move || {
            // Box-Muller
            let u1: f64 = 1.0 - rng.gen::<f64>();
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        };
        let mut amplitudes: Vec<Complex64> = (0..lattice.cells())
            .map(|_| Complex64::new(gauss(), gauss()))
            .collect();
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self {
            lattice,
            amplitudes,
        }
    }

    pub fn lattice(&self) -> LatticeSpec {
        self.lattice
    }

    /// Qubits per register.
    pub fn nq(&self) -> u32 {
        self.lattice.nq()
    }

    pub fn nqubits(&self) -> usize {
        2 * self.lattice.nq() as usize
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, i: usize, j: usize) -> Complex64 {
        self.amplitudes[(i << self.lattice.nq()) | j]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Writes `index,re,im` lines, one per amplitude, in index order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "index,re,im")?;
        for (k, a) in self.amplitudes.iter().enumerate() {
            writeln!(w, "{k},{},{}", a.re, a.im)?;
        }
        Ok(())
    }

    /// Binary dump: `LQSV`, `nq` as little-endian u32, then `(re, im)` f64
    /// little-endian pairs in index order.
    pub fn write_binary<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&self.lattice.nq().to_le_bytes())?;
        for a in &self.amplitudes {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> io::Result<Self> {
        let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != DUMP_MAGIC {
            return Err(bad("bad state dump magic"));
        }
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        let lattice =
            LatticeSpec::new(u32::from_le_bytes(word)).map_err(|e| bad(&e.to_string()))?;
        let mut buf = [0u8; 8];
        let mut amplitudes = Vec::with_capacity(lattice.cells());
        for _ in 0..lattice.cells() {
            r.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf);
            r.read_exact(&mut buf)?;
            amplitudes.push(Complex64::new(re, f64::from_le_bytes(buf)));
        }
        Ok(Self {
            lattice,
            amplitudes,
        })
    }
}

/// Per-gate angle noise: every angle gets `δ ~ U[−ε, ε]`, drawn per application.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub epsilon: f64,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn new(epsilon: f64, seed: u64) -> Self {
        assert!(epsilon >= 0.0, "noise amplitude must be nonnegative");
        Self { epsilon, seed }
    }

    /// Fresh noise stream for one run.
    pub fn source(&self) -> GateNoise {
        GateNoise {
            epsilon: self.epsilon,
            rng: ChaCha8Rng::seed_from_u64(self.seed),
        }
    }
}

/// Stateful random source consumed gate by gate.
#[derive(Debug, Clone)]
pub struct GateNoise {
    epsilon: f64,
    rng: ChaCha8Rng,
}

impl GateNoise {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn draw(&mut self) -> f64 {
        self.epsilon * (2.0 * self.rng.gen::<f64>() - 1.0)
    }
}

/// Dense amplitude encoding of a density grid.
pub fn encode(d: &DensityGrid) -> Result<StateVector> {
    let norm = d.norm_sqr();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized(norm));
    }
    Ok(StateVector {
        lattice: d.lattice(),
        amplitudes: d.values().iter().map(|&v| Complex64::new(v, 0.0)).collect(),
    })
}

/// Moduli of the amplitudes as a density grid.
pub fn decode(s: &StateVector) -> DensityGrid {
    DensityGrid::from_moduli(s.lattice, s.amplitudes.iter().map(|a| a.norm()).collect())
}

fn check_qubits(g: &Gate, nqubits: usize) -> Result<()> {
    let qs = g.qubits();
    for (k, &q) in qs.iter().enumerate() {
        if q >= nqubits {
            return Err(Error::QubitOutOfRange { index: q, nqubits });
        }
        if qs[..k].contains(&q) {
            return Err(Error::RepeatedQubit(q));
        }
    }
    Ok(())
}

/// Applies one gate in place. With `noise`, angles are shifted by a fresh
/// draw and `H` becomes `Ry(δ)·H`.
pub fn apply_gate(s: &mut StateVector, g: &Gate, noise: Option<&mut GateNoise>) -> Result<()> {
    check_qubits(g, s.nqubits())?;
    let delta = noise.map(GateNoise::draw);
    match *g {
        Gate::H(q) => apply_rotated_hadamard(&mut s.amplitudes, q, delta.unwrap_or(0.0)),
        Gate::Phase { target, theta } => {
            apply_diagonal(&mut s.amplitudes, 1 << target, theta + delta.unwrap_or(0.0))
        }
        Gate::CPhase {
            control,
            target,
            theta,
        } => apply_diagonal(
            &mut s.amplitudes,
            (1 << control) | (1 << target),
            theta + delta.unwrap_or(0.0),
        ),
        Gate::CCPhase {
            controls,
            target,
            theta,
        } => apply_diagonal(
            &mut s.amplitudes,
            (1 << controls[0]) | (1 << controls[1]) | (1 << target),
            theta + delta.unwrap_or(0.0),
        ),
    }
    Ok(())
}

/// Runs every gate of `c` in order, then nothing else: bit-reversal metadata
/// is left to the reader of the state.
pub fn apply_circuit(
    s: &mut StateVector,
    c: &Circuit,
    mut noise: Option<&mut GateNoise>,
) -> Result<()> {
    if c.nqubits() != s.nqubits() {
        return Err(Error::DimensionMismatch(c.nqubits(), s.nqubits()));
    }
    for g in c.gates() {
        apply_gate(s, g, noise.as_deref_mut())?;
    }
    Ok(())
}

/// Multiplies every amplitude whose index contains all bits of `mask` by `e^{iθ}`.
fn apply_diagonal(amps: &mut [Complex64], mask: usize, theta: f64) {
    let phase = Complex64::from_polar(1.0, theta);
    amps.par_iter_mut()
        .with_min_len(PAR_MIN_LEN)
        .enumerate()
        .for_each(|(k, a)| {
            if k & mask == mask {
                *a *= phase;
            }
        });
}

/// `Ry(δ)·H` on qubit `q`; `δ = 0` is the plain Hadamard.
fn apply_rotated_hadamard(amps: &mut [Complex64], q: usize, delta: f64) {
    let (s, c) = (0.5 * delta).sin_cos();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    // Ry(δ)·H = 1/√2 [[c − s, c + s], [c + s, s − c]]
    let m = [[r * (c - s), r * (c + s)], [r * (c + s), r * (s - c)]];
    let pair = move |lo: &mut Complex64, hi: &mut Complex64| {
        let (a, b) = (*lo, *hi);
        *lo = a * m[0][0] + b * m[0][1];
        *hi = a * m[1][0] + b * m[1][1];
    };
    let half = 1usize << q;
    if half >= PAR_MIN_LEN {
        for block in amps.chunks_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            lo.par_iter_mut()
                .zip(hi.par_iter_mut())
                .with_min_len(PAR_MIN_LEN)
                .for_each(|(a, b)| pair(a, b));
        }
    } else {
        amps.par_chunks_mut(2 * half)
            .with_min_len((PAR_MIN_LEN / (2 * half)).max(1))
            .for_each(|block| {
                let (lo, hi) = block.split_at_mut(half);
                lo.iter_mut()
                    .zip(hi.iter_mut())
                    .for_each(|(a, b)| pair(a, b));
            });
    }
}

/// Re-indexes amplitudes by the lattice bijection: `out[T(i,j)] = in[(i,j)]`.
pub fn apply_permutation(
    s: &StateVector,
    m: &MapSpec,
    direction: Direction,
) -> Result<StateVector> {
    apply_permutation_steps(s, m, direction, 1)
}

pub fn apply_permutation_steps(
    s: &StateVector,
    m: &MapSpec,
    direction: Direction,
    steps: usize,
) -> Result<StateVector> {
    if s.lattice != m.lattice {
        return Err(Error::LatticeMismatch(s.lattice.nq(), m.lattice.nq()));
    }
    let table = m.index_table(direction);
    let mut cur = s.amplitudes.clone();
    let mut next = vec![Complex64::new(0.0, 0.0); cur.len()];
    for _ in 0..steps {
        for (src, &dst) in table.iter().enumerate() {
            next[dst] = cur[src];
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(StateVector {
        lattice: s.lattice,
        amplitudes: cur,
    })
}

/// `⟨a|b⟩`, summed serially in index order.
pub fn inner(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    if a.amplitudes.len() != b.amplitudes.len() {
        return Err(Error::DimensionMismatch(
            a.amplitudes.len(),
            b.amplitudes.len(),
        ));
    }
    Ok(a.amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(inner(a, b)?.norm_sqr().min(1.0))
}

/// Measurement outcomes of both registers in the computational basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSet {
    pub nq: u32,
    pub outcomes: Vec<(usize, usize)>,
    pub seed: u64,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }
}

/// Draws `m` independent outcomes `(i, j)` with probability `|a_ij|²`.
pub fn sample(s: &StateVector, m: usize, seed: u64) -> Result<SampleSet> {
    if m == 0 {
        return Err(Error::NoSamples);
    }
    let mut cumulative = Vec::with_capacity(s.amplitudes.len());
    let mut acc = 0.0;
    for a in &s.amplitudes {
        acc += a.norm_sqr();
        cumulative.push(acc);
    }
    let total = acc;
    let last_nonzero = s
        .amplitudes
        .iter()
        .rposition(|a| a.norm_sqr() > 0.0)
        .unwrap_or(0);
    let nq = s.lattice.nq();
    let mask = s.lattice.mask();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outcomes = (0..m)
        .map(|_| {
            let u = rng.gen::<f64>() * total;
            let k = cumulative.partition_point(|&c| c <= u).min(last_nonzero);
            (k >> nq, k & mask)
        })
        .collect();
    Ok(SampleSet { nq, outcomes, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::make_patch_density;
    use crate::maps::{MapKind, QuadMode};
    use crate::PatchSpec;

    fn lat(nq: u32) -> LatticeSpec {
        LatticeSpec::new(nq).unwrap()
    }

    const R: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn encode_examples() {
        let s = encode(&DensityGrid::delta(lat(2), 0, 0)).unwrap();
        assert_eq!(s.amplitudes()[0], Complex64::new(1.0, 0.0));

        let s = encode(&DensityGrid::uniform(lat(1))).unwrap();
        assert!(s
            .amplitudes()
            .iter()
            .all(|a| *a == Complex64::new(0.5, 0.0)));

        let s = encode(&DensityGrid::delta(lat(3), 5, 2)).unwrap();
        assert_eq!(s.amplitudes()[8 * 5 + 2], Complex64::new(1.0, 0.0));
        assert_eq!(s.amplitude(5, 2), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn encode_rejects_unnormalized() {
        let d = DensityGrid::from_moduli(lat(1), vec![1.0, 1.0, 0.0, 0.0]);
        assert!(matches!(encode(&d), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn decode_restores_moduli() {
        for d in [
            DensityGrid::delta(lat(2), 0, 0),
            DensityGrid::uniform(lat(1)),
            DensityGrid::delta(lat(3), 5, 2),
            make_patch_density(lat(3), PatchSpec::new(1, 1, 3, 5)).unwrap(),
        ] {
            assert_eq!(decode(&encode(&d).unwrap()), d);
        }
    }

    #[test]
    fn hadamard_on_zero() {
        let mut s = StateVector::zero(lat(2));
        apply_gate(&mut s, &Gate::H(0), None).unwrap();
        assert!((s.amplitudes()[0].re - R).abs() < 1e-15);
        assert!((s.amplitudes()[1].re - R).abs() < 1e-15);
        assert!(s.amplitudes()[2..].iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn cphase_pi_flips_sign_of_11() {
        let mut s = StateVector::basis(lat(1), 1, 1);
        let g = Gate::CPhase {
            control: 0,
            target: 1,
            theta: std::f64::consts::PI,
        };
        apply_gate(&mut s, &g, None).unwrap();
        assert!((s.amplitudes()[3] - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn gate_qubit_checks() {
        let mut s = StateVector::zero(lat(1));
        assert_eq!(
            apply_gate(&mut s, &Gate::H(2), None),
            Err(Error::QubitOutOfRange {
                index: 2,
                nqubits: 2
            })
        );
        let g = Gate::CPhase {
            control: 1,
            target: 1,
            theta: 0.3,
        };
        assert_eq!(apply_gate(&mut s, &g, None), Err(Error::RepeatedQubit(1)));
    }

    /// Matrix of a gate on `nqubits` qubits, one column per basis state. Every
    /// column sees the same noise draw.
    fn gate_matrix(g: &Gate, nqubits: usize, noise: Option<&GateNoise>) -> Vec<Vec<Complex64>> {
        let l = lat(nqubits as u32 / 2);
        (0..l.cells())
            .map(|k| {
                let mut s = StateVector::basis(l, k >> l.nq(), k & l.mask());
                let mut n = noise.cloned();
                apply_gate(&mut s, g, n.as_mut()).unwrap();
                s.amplitudes().to_vec()
            })
            .collect()
    }

    /// Largest singular value by power iteration on `A†A`.
    fn operator_norm(cols: &[Vec<Complex64>]) -> f64 {
        let dim = cols.len();
        let mut v = vec![Complex64::new(1.0, 0.3); dim];
        let mut sigma = 0.0;
        for _ in 0..200 {
            let av: Vec<Complex64> = (0..dim)
                .map(|r| (0..dim).map(|c| cols[c][r] * v[c]).sum())
                .collect();
            let ahav: Vec<Complex64> = (0..dim)
                .map(|c| (0..dim).map(|r| cols[c][r].conj() * av[r]).sum())
                .collect();
            let n = ahav.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if n == 0.0 {
                return 0.0;
            }
            sigma = n.sqrt();
            v = ahav.iter().map(|x| x / n).collect();
        }
        sigma
    }

    #[test]
    fn noisy_gate_deviation_bounded_by_epsilon() {
        let eps = 0.01;
        let gates = [
            Gate::H(1),
            Gate::Phase {
                target: 0,
                theta: 0.7,
            },
            Gate::CPhase {
                control: 0,
                target: 3,
                theta: -1.1,
            },
            Gate::CCPhase {
                controls: [0, 2],
                target: 1,
                theta: 2.5,
            },
        ];
        for g in &gates {
            let exact = gate_matrix(g, 4, None);
            for seed in 0..100 {
                let noise = NoiseConfig::new(eps, seed).source();
                let noisy = gate_matrix(g, 4, Some(&noise));
                let diff: Vec<Vec<Complex64>> = exact
                    .iter()
                    .zip(&noisy)
                    .map(|(a, b)| a.iter().zip(b).map(|(x, y)| y - x).collect())
                    .collect();
                let norm = operator_norm(&diff);
                assert!(norm <= eps + 1e-12, "{g:?} seed {seed}: {norm}");
            }
        }
    }

    #[test]
    fn noise_is_reproducible_and_norm_preserving() {
        let l = lat(3);
        let gates: Vec<Gate> = (0..6)
            .flat_map(|q| {
                [
                    Gate::H(q),
                    Gate::CPhase {
                        control: q,
                        target: (q + 1) % 6,
                        theta: 0.4,
                    },
                ]
            })
            .collect();
        let run = |seed| {
            let mut s = StateVector::random(l, 4);
            let mut noise = NoiseConfig::new(0.05, seed).source();
            for _ in 0..50 {
                for g in &gates {
                    apply_gate(&mut s, g, Some(&mut noise)).unwrap();
                }
            }
            s
        };
        let a = run(1);
        assert_eq!(a, run(1));
        assert_ne!(a, run(2));
        assert!((a.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn norm_drift_over_ten_thousand_gates() {
        let l = lat(3);
        let mut s = StateVector::random(l, 11);
        let mut noise = NoiseConfig::new(0.01, 3).source();
        for k in 0..10_000usize {
            let q = k % 6;
            let g = match k % 4 {
                0 => Gate::H(q),
                1 => Gate::Phase {
                    target: q,
                    theta: 0.1 * k as f64,
                },
                2 => Gate::CPhase {
                    control: q,
                    target: (q + 2) % 6,
                    theta: 1.3,
                },
                _ => Gate::CCPhase {
                    controls: [q, (q + 1) % 6],
                    target: (q + 3) % 6,
                    theta: -0.8,
                },
            };
            let before = s.norm_sqr();
            apply_gate(&mut s, &g, Some(&mut noise)).unwrap();
            assert!((s.norm_sqr() - before).abs() < 1e-10);
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn large_register_hadamard_matches_small_block_path() {
        // qubit 13 takes the chunked parallel branch, qubit 2 the other one
        let l = lat(7);
        for q in [2, 13] {
            let mut s = StateVector::random(l, 5);
            let orig = s.clone();
            apply_gate(&mut s, &Gate::H(q), None).unwrap();
            let half = 1 << q;
            for k in 0..l.cells() {
                let expected = if k & half == 0 {
                    (orig.amplitudes()[k] + orig.amplitudes()[k | half]) * R
                } else {
                    (orig.amplitudes()[k ^ half] - orig.amplitudes()[k]) * R
                };
                assert!((s.amplitudes()[k] - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn permutation_examples() {
        let l = lat(3);
        let cat = MapSpec::cat(l);
        let u = encode(&DensityGrid::uniform(l)).unwrap();
        assert_eq!(apply_permutation(&u, &cat, Direction::Forward).unwrap(), u);

        let d = StateVector::basis(l, 1, 0);
        let out = apply_permutation(&d, &cat, Direction::Forward).unwrap();
        assert_eq!(out, StateVector::basis(l, 2, 1));

        for m in [
            cat,
            MapSpec::perturbed(l, QuadMode::ModN),
            MapSpec::perturbed(l, QuadMode::FloorDiv),
        ] {
            let s = StateVector::random(l, 8);
            let f = apply_permutation_steps(&s, &m, Direction::Forward, 7).unwrap();
            let b = apply_permutation_steps(&f, &m, Direction::Backward, 7).unwrap();
            assert_eq!(b, s);
            let key = |v: &StateVector| {
                let mut a: Vec<(u64, u64)> = v
                    .amplitudes()
                    .iter()
                    .map(|c| (c.re.to_bits(), c.im.to_bits()))
                    .collect();
                a.sort();
                a
            };
            assert_eq!(key(&f), key(&s));
        }
        assert_eq!(MapKind::Cat, cat.kind);
    }

    #[test]
    fn fidelity_examples() {
        let l = lat(1);
        let s = StateVector::random(l, 2);
        assert!((fidelity(&s, &s).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(
            fidelity(&StateVector::basis(l, 0, 0), &StateVector::basis(l, 1, 0)).unwrap(),
            0.0
        );
        let plus = StateVector::from_amplitudes(
            l,
            vec![
                Complex64::new(R, 0.0),
                Complex64::new(R, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        assert!((fidelity(&plus, &StateVector::zero(l)).unwrap() - 0.5).abs() < 1e-15);
        assert!(fidelity(&s, &StateVector::zero(lat(2))).is_err());
    }

    #[test]
    fn sample_delta_state() {
        let s = StateVector::basis(lat(3), 3, 5);
        let set = sample(&s, 1000, 4).unwrap();
        assert_eq!(set.len(), 1000);
        assert!(set.outcomes.iter().all(|&o| o == (3, 5)));
        assert_eq!(sample(&s, 0, 4), Err(Error::NoSamples));
    }

    #[test]
    fn sample_uniform_within_binomial_band() {
        let s = encode(&DensityGrid::uniform(lat(1))).unwrap();
        let m = 100_000;
        let set = sample(&s, m, 17).unwrap();
        let mut counts = [0usize; 4];
        for (i, j) in set.outcomes {
            counts[2 * i + j] += 1;
        }
        let sigma = (m as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!(
                (c as f64 - m as f64 / 4.0).abs() < 4.0 * sigma,
                "{counts:?}"
            );
        }
    }

    #[test]
    fn sample_frequencies_converge() {
        let l = lat(2);
        let s = StateVector::random(l, 21);
        let m = 1_000_000;
        let set = sample(&s, m, 5).unwrap();
        let mut freq = vec![0.0; l.cells()];
        for (i, j) in &set.outcomes {
            freq[(i << 2) | j] += 1.0 / m as f64;
        }
        let worst = freq
            .iter()
            .zip(s.probabilities())
            .map(|(f, p)| (f - p).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 4.0 / (m as f64).sqrt(), "{worst}");
        assert_eq!(set, sample(&s, m, 5).unwrap());
    }

    #[test]
    fn binary_dump_roundtrip() {
        let s = StateVector::random(lat(2), 3);
        let mut buf = Vec::new();
        s.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 16 * 16);
        assert_eq!(StateVector::read_binary(&buf[..]).unwrap(), s);
        let mut csv = Vec::new();
        s.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 17);
        assert!(text.starts_with("index,re,im\n0,"));
    }
}
