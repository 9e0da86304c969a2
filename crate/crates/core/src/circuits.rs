//! Gate-level programs over the two data registers.
//!
//! The gate alphabet is `H`, `Phase`, `CPhase` and `CCPhase`. Modular
//! arithmetic is done in the Fourier frame of the target register (controlled
//! phases between a QFT and its inverse), so no work qubits are needed.
//!
//! The QFT is emitted without the final swap network: after `qft_register`
//! the stored bit `m` of the register holds bit `nq − 1 − m` of the harmonic.
//! Circuits carry that as per-register bit-reversal metadata.

use std::f64::consts::{PI, TAU};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::maps::{LatticeSpec, MapKind, MapSpec, QuadMode};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Register {
    X,
    Y,
}

impl Register {
    /// Global qubit index of bit `b` of this register.
    #[inline]
    pub fn qubit(self, spec: LatticeSpec, b: u32) -> usize {
        match self {
            Register::Y => b as usize,
            Register::X => (spec.nq() + b) as usize,
        }
    }

    fn slot(self) -> usize {
        match self {
            Register::X => 0,
            Register::Y => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H,
    Phase,
    CPhase,
    CCPhase,
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateKind::H => "H",
            GateKind::Phase => "Phase",
            GateKind::CPhase => "CPhase",
            GateKind::CCPhase => "CCPhase",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    /// `diag(1, e^{iθ})`.
    Phase {
        target: usize,
        theta: f64,
    },
    /// Phase `e^{iθ}` on `|11⟩`; symmetric in its two qubits.
    CPhase {
        control: usize,
        target: usize,
        theta: f64,
    },
    /// Phase `e^{iθ}` on `|111⟩`.
    CCPhase {
        controls: [usize; 2],
        target: usize,
        theta: f64,
    },
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::H(_) => GateKind::H,
            Gate::Phase { .. } => GateKind::Phase,
            Gate::CPhase { .. } => GateKind::CPhase,
            Gate::CCPhase { .. } => GateKind::CCPhase,
        }
    }

    /// Controls first, then target.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) => vec![q],
            Gate::Phase { target, .. } => vec![target],
            Gate::CPhase {
                control, target, ..
            } => vec![control, target],
            Gate::CCPhase {
                controls, target, ..
            } => vec![controls[0], controls[1], target],
        }
    }

    pub fn theta(&self) -> Option<f64> {
        match *self {
            Gate::H(_) => None,
            Gate::Phase { theta, .. }
            | Gate::CPhase { theta, .. }
            | Gate::CCPhase { theta, .. } => Some(theta),
        }
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::H(q) => Gate::H(q),
            Gate::Phase { target, theta } => Gate::Phase {
                target,
                theta: -theta,
            },
            Gate::CPhase {
                control,
                target,
                theta,
            } => Gate::CPhase {
                control,
                target,
                theta: -theta,
            },
            Gate::CCPhase {
                controls,
                target,
                theta,
            } => Gate::CCPhase {
                controls,
                target,
                theta: -theta,
            },
        }
    }
}

impl fmt::Display for Gate {
    /// `KIND q0[,q1[,q2]][,theta]`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let qs = self.qubits();
        write!(f, "{} {}", self.kind(), qs[0])?;
        for q in &qs[1..] {
            write!(f, ",{q}")?;
        }
        if let Some(theta) = self.theta() {
            write!(f, ",{theta:?}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Gate {
    type Err = String;

    fn from_str(line: &str) -> std::result::Result<Self, String> {
        let (kind, args) = line
            .trim()
            .split_once(' ')
            .ok_or_else(|| format!("malformed gate line `{line}`"))?;
        let fields: Vec<&str> = args.split(',').map(str::trim).collect();
        let q = |k: usize| -> std::result::Result<usize, String> {
            fields
                .get(k)
                .ok_or_else(|| format!("missing qubit in `{line}`"))?
                .parse()
                .map_err(|e| format!("{e} in `{line}`"))
        };
        let theta = |k: usize| -> std::result::Result<f64, String> {
            fields
                .get(k)
                .ok_or_else(|| format!("missing angle in `{line}`"))?
                .parse()
                .map_err(|e| format!("{e} in `{line}`"))
        };
        let (gate, arity) = match kind {
            "H" => (Gate::H(q(0)?), 1),
            "Phase" => (
                Gate::Phase {
                    target: q(0)?,
                    theta: theta(1)?,
                },
                2,
            ),
            "CPhase" => (
                Gate::CPhase {
                    control: q(0)?,
                    target: q(1)?,
                    theta: theta(2)?,
                },
                3,
            ),
            "CCPhase" => (
                Gate::CCPhase {
                    controls: [q(0)?, q(1)?],
                    target: q(2)?,
                    theta: theta(3)?,
                },
                4,
            ),
            other => return Err(format!("unknown gate kind `{other}`")),
        };
        if fields.len() != arity {
            return Err(format!("wrong field count in `{line}`"));
        }
        Ok(gate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    nqubits: usize,
    gates: Vec<Gate>,
    label: String,
    /// Output bit order of the x and y registers relative to the logical index.
    bit_reversed: [bool; 2],
}

impl Circuit {
    pub fn new(spec: LatticeSpec, label: impl Into<String>) -> Self {
        Self {
            nqubits: 2 * spec.nq() as usize,
            gates: Vec::new(),
            label: label.into(),
            bit_reversed: [false; 2],
        }
    }

    pub fn nqubits(&self) -> usize {
        self.nqubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Whether the stored index of `r` is bit-reversed after this circuit.
    pub fn bit_reversed(&self, r: Register) -> bool {
        self.bit_reversed[r.slot()]
    }

    pub fn push(&mut self, g: Gate) -> Result<()> {
        let qs = g.qubits();
        for (k, &q) in qs.iter().enumerate() {
            if q >= self.nqubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    nqubits: self.nqubits,
                });
            }
            if qs[..k].contains(&q) {
                return Err(Error::RepeatedQubit(q));
            }
        }
        self.gates.push(g);
        Ok(())
    }

    /// Appends `other`; bit-reversal flags compose by parity.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.nqubits != self.nqubits {
            return Err(Error::DimensionMismatch(self.nqubits, other.nqubits));
        }
        self.gates.extend_from_slice(&other.gates);
        self.bit_reversed[0] ^= other.bit_reversed[0];
        self.bit_reversed[1] ^= other.bit_reversed[1];
        Ok(())
    }

    /// Circuit repeated `times` times.
    pub fn repeated(&self, times: usize) -> Circuit {
        let mut out = Circuit {
            nqubits: self.nqubits,
            gates: Vec::with_capacity(self.gates.len() * times),
            label: format!("{} x{times}", self.label),
            bit_reversed: [false; 2],
        };
        for _ in 0..times {
            out.append(self).expect("same width");
        }
        out
    }

    /// Text dump: `#`-prefixed metadata lines, then one gate per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# label: {}", self.label);
        let _ = writeln!(out, "# qubits: {}", self.nqubits);
        let _ = writeln!(
            out,
            "# bit-reversed: x={} y={}",
            self.bit_reversed[0], self.bit_reversed[1]
        );
        for g in &self.gates {
            let _ = writeln!(out, "{g}");
        }
        out
    }

    pub fn from_text(text: &str) -> std::result::Result<Circuit, String> {
        let mut label = String::new();
        let mut nqubits = None;
        let mut bit_reversed = [false; 2];
        let mut gates = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(meta) = line.strip_prefix('#') {
                let meta = meta.trim();
                if let Some(v) = meta.strip_prefix("label:") {
                    label = v.trim().to_string();
                } else if let Some(v) = meta.strip_prefix("qubits:") {
                    nqubits = Some(v.trim().parse::<usize>().map_err(|e| e.to_string())?);
                } else if let Some(v) = meta.strip_prefix("bit-reversed:") {
                    for part in v.split_whitespace() {
                        match part {
                            "x=true" => bit_reversed[0] = true,
                            "y=true" => bit_reversed[1] = true,
                            "x=false" | "y=false" => {}
                            other => return Err(format!("bad bit-reversal flag `{other}`")),
                        }
                    }
                }
                continue;
            }
            gates.push(line.parse::<Gate>()?);
        }
        let nqubits = nqubits.ok_or("missing `# qubits:` line")?;
        let mut c = Circuit {
            nqubits,
            gates: Vec::new(),
            label,
            bit_reversed,
        };
        for g in gates {
            c.push(g).map_err(|e| e.to_string())?;
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCounts {
    pub h: usize,
    pub phase: usize,
    pub cphase: usize,
    pub ccphase: usize,
}

impl GateCounts {
    pub fn total(&self) -> usize {
        self.h + self.phase + self.cphase + self.ccphase
    }

    /// Counts for `times` back-to-back repetitions.
    pub fn scaled(&self, times: usize) -> GateCounts {
        GateCounts {
            h: self.h * times,
            phase: self.phase * times,
            cphase: self.cphase * times,
            ccphase: self.ccphase * times,
        }
    }
}

impl std::ops::Add for GateCounts {
    type Output = GateCounts;

    fn add(self, o: GateCounts) -> GateCounts {
        GateCounts {
            h: self.h + o.h,
            phase: self.phase + o.phase,
            cphase: self.cphase + o.cphase,
            ccphase: self.ccphase + o.ccphase,
        }
    }
}

pub fn gate_count(c: &Circuit) -> GateCounts {
    let mut n = GateCounts::default();
    for g in &c.gates {
        match g.kind() {
            GateKind::H => n.h += 1,
            GateKind::Phase => n.phase += 1,
            GateKind::CPhase => n.cphase += 1,
            GateKind::CCPhase => n.ccphase += 1,
        }
    }
    n
}

/// Reverses the gate order and negates every angle.
pub fn inverse_circuit(c: &Circuit) -> Circuit {
    Circuit {
        nqubits: c.nqubits,
        gates: c.gates.iter().rev().map(Gate::inverse).collect(),
        label: format!("inverse({})", c.label),
        bit_reversed: c.bit_reversed,
    }
}

/// QFT on one register, without the output swaps.
pub fn qft_register(spec: LatticeSpec, register: Register) -> Circuit {
    let n = spec.nq();
    let mut c = Circuit::new(
        spec,
        format!("qft {register:?} nq={n} (bit-reversed output)"),
    );
    for m in (0..n).rev() {
        let target = register.qubit(spec, m);
        c.gates.push(Gate::H(target));
        for l in (0..m).rev() {
            c.gates.push(Gate::CPhase {
                control: register.qubit(spec, l),
                target,
                theta: PI / f64::from(1u32 << (m - l).min(31)),
            });
        }
    }
    c.bit_reversed[register.slot()] = true;
    c
}

/// QFT of the x register followed by QFT of the y register.
pub fn qft2d(spec: LatticeSpec) -> Circuit {
    let mut c = qft_register(spec, Register::X);
    c.append(&qft_register(spec, Register::Y))
        .expect("same width");
    c.label = format!("qft2d nq={} (bit-reversed output x,y)", spec.nq());
    c
}

/// What a phase adder adds into its target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AddSource {
    /// A classical constant.
    Constant(u64),
    /// The value held in a register.
    Register(Register),
    /// The square of the value held in a register.
    Squared(Register),
}

/// Canonical phase `2π·a/N` for an integer residue, folded into `(−π, π]`;
/// `None` when the residue vanishes.
fn residue_angle(value: u128, spec: LatticeSpec) -> Option<f64> {
    let n = spec.side() as u128;
    let a = value % n;
    if a == 0 {
        return None;
    }
    let signed = if a > n / 2 {
        a as f64 - n as f64
    } else {
        a as f64
    };
    Some(TAU * signed / n as f64)
}

/// Controlled phases that, between `qft_register(target)` and its inverse,
/// realize `target ← target + multiplier·source (mod N)`.
pub fn phase_adder(
    spec: LatticeSpec,
    source: AddSource,
    target: Register,
    multiplier: u64,
) -> Result<Circuit> {
    let n = spec.nq();
    if multiplier >= spec.side() as u64 {
        return Err(Error::InvalidMultiplier {
            multiplier,
            side: spec.side(),
        });
    }
    if matches!(source, AddSource::Register(r) | AddSource::Squared(r) if r == target) {
        return Err(Error::RepeatedQubit(target.qubit(spec, 0)));
    }
    let mult = u128::from(multiplier);
    let mut c = Circuit::new(
        spec,
        format!("phase-add {source:?} x{multiplier} -> {target:?}"),
    );
    // stored bit m of the target carries harmonic bit r = nq − 1 − m
    for m in 0..n {
        let r = n - 1 - m;
        let tq = target.qubit(spec, m);
        match source {
            AddSource::Constant(value) => {
                if let Some(theta) = residue_angle((mult * u128::from(value)) << r, spec) {
                    c.push(Gate::Phase { target: tq, theta })?;
                }
            }
            AddSource::Register(src) => {
                for s in 0..n - r {
                    if let Some(theta) = residue_angle(mult << (s + r), spec) {
                        c.push(Gate::CPhase {
                            control: src.qubit(spec, s),
                            target: tq,
                            theta,
                        })?;
                    }
                }
            }
            AddSource::Squared(src) => {
                // i² = Σ_s i_s 4^s + Σ_{s<u} 2·i_s·i_u·2^{s+u}
                for s in 0..n {
                    if 2 * s + r < n {
                        if let Some(theta) = residue_angle(mult << (2 * s + r), spec) {
                            c.push(Gate::CPhase {
                                control: src.qubit(spec, s),
                                target: tq,
                                theta,
                            })?;
                        }
                    }
                    for u in s + 1..n {
                        if s + u + 1 + r >= n {
                            break;
                        }
                        if let Some(theta) = residue_angle(mult << (s + u + 1 + r), spec) {
                            c.push(Gate::CCPhase {
                                controls: [src.qubit(spec, s), src.qubit(spec, u)],
                                target: tq,
                                theta,
                            })?;
                        }
                    }
                }
            }
        }
    }
    Ok(c)
}

/// Wraps phase blocks in the QFT frame of `target`.
fn in_fourier_frame(
    spec: LatticeSpec,
    target: Register,
    blocks: &[Circuit],
    label: String,
) -> Circuit {
    let qft = qft_register(spec, target);
    let mut c = Circuit::new(spec, label);
    c.append(&qft).expect("same width");
    for b in blocks {
        c.append(b).expect("same width");
    }
    c.append(&inverse_circuit(&qft)).expect("same width");
    c
}

/// `target ← target + multiplier·source (mod N)` including the QFT pair.
pub fn modular_add(
    spec: LatticeSpec,
    source: AddSource,
    target: Register,
    multiplier: u64,
) -> Result<Circuit> {
    let adder = phase_adder(spec, source, target, multiplier)?;
    let label = adder.label.clone();
    Ok(in_fourier_frame(spec, target, &[adder], label))
}

/// One cat-map step: `y ← y + x`, then `x ← x + y`.
pub fn cat_circuit(spec: LatticeSpec) -> Circuit {
    let mut c = Circuit::new(spec, format!("cat nq={}", spec.nq()));
    let shear_y =
        modular_add(spec, AddSource::Register(Register::X), Register::Y, 1).expect("valid adder");
    let shear_x =
        modular_add(spec, AddSource::Register(Register::Y), Register::X, 1).expect("valid adder");
    c.append(&shear_y).expect("same width");
    c.append(&shear_x).expect("same width");
    c
}

/// One perturbed-map step: `y ← y + x + (x² mod N)`, then `x ← x + y`.
pub fn perturbed_circuit(spec: LatticeSpec, quad_mode: QuadMode) -> Result<Circuit> {
    if quad_mode != QuadMode::ModN {
        return Err(Error::UnsupportedQuadMode(quad_mode));
    }
    let linear = phase_adder(spec, AddSource::Register(Register::X), Register::Y, 1)?;
    let square = phase_adder(spec, AddSource::Squared(Register::X), Register::Y, 1)?;
    let shear_y = in_fourier_frame(spec, Register::Y, &[linear, square], "y += x + x^2".into());
    let shear_x = modular_add(spec, AddSource::Register(Register::Y), Register::X, 1)?;
    let mut c = Circuit::new(spec, format!("perturbed-cat modN nq={}", spec.nq()));
    c.append(&shear_y)?;
    c.append(&shear_x)?;
    Ok(c)
}

/// Forward circuit of one step of `m`.
pub fn map_circuit(m: &MapSpec) -> Result<Circuit> {
    match m.kind {
        MapKind::Cat => Ok(cat_circuit(m.lattice)),
        MapKind::PerturbedCat => perturbed_circuit(m.lattice, m.quad_mode),
    }
}
