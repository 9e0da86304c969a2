//! Exact lattice arithmetic for the discretized cat and perturbed cat maps.
//!
//! The torus `[0,1)²` is sampled on an `N × N` grid with `N = 2^nq`; a point
//! `(i, j)` stands for `(x, y) = (i/N, j/N)`. Every map here is a bijection of
//! that grid, so densities can be moved around by pure re-indexing.

use serde::{Deserialize, Serialize};

use crate::Error;

/// Largest register width handled by the simulator.
pub const MAX_NQ: u32 = 16;

/// Side of the discretized torus, `N = 2^nq`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    nq: u32,
}

impl LatticeSpec {
    pub fn new(nq: u32) -> Result<Self, Error> {
        if nq == 0 || nq > MAX_NQ {
            return Err(Error::InvalidLattice(nq));
        }
        Ok(Self { nq })
    }

    /// Qubits per register.
    #[inline]
    pub fn nq(&self) -> u32 {
        self.nq
    }

    /// Lattice side `N`.
    #[inline]
    pub fn side(&self) -> usize {
        1 << self.nq
    }

    #[inline]
    pub(crate) fn mask(&self) -> usize {
        self.side() - 1
    }

    /// Number of lattice cells, `N²`.
    #[inline]
    pub fn cells(&self) -> usize {
        1 << (2 * self.nq)
    }

    pub fn contains(&self, p: PhasePoint) -> bool {
        p.i < self.side() && p.j < self.side()
    }

    /// Folds a stored harmonic in `[0, N)` to the centered range `(-N/2, N/2]`.
    #[inline]
    pub fn centered(&self, k: usize) -> i64 {
        let n = self.side() as i64;
        let k = k as i64;
        if k > n / 2 {
            k - n
        } else {
            k
        }
    }

    /// Inverse of [`LatticeSpec::centered`]; accepts any integer.
    #[inline]
    pub fn stored(&self, k: i64) -> usize {
        k.rem_euclid(self.side() as i64) as usize
    }
}

/// A lattice point; `i` indexes x (first register), `j` indexes y (second).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PhasePoint {
    pub i: usize,
    pub j: usize,
}

impl PhasePoint {
    pub const fn new(i: usize, j: usize) -> Self {
        Self { i, j }
    }
}

/// Fourier harmonic `(kx, ky)` in stored convention `[0, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WaveVector {
    pub kx: usize,
    pub ky: usize,
}

impl WaveVector {
    pub const fn new(kx: usize, ky: usize) -> Self {
        Self { kx, ky }
    }

    /// Centered components in `(-N/2, N/2]`.
    pub fn centered(&self, spec: LatticeSpec) -> (i64, i64) {
        (spec.centered(self.kx), spec.centered(self.ky))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    Cat,
    PerturbedCat,
}

/// Lattice discretization of the `x²` term of the perturbed map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadMode {
    /// `q(i) = i² mod N`, realizable by modular multiplication.
    #[default]
    ModN,
    /// `q(i) = ⌊i²/N⌋ mod N`, closer to the continuum map.
    FloorDiv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MapSpec {
    pub kind: MapKind,
    /// Ignored for [`MapKind::Cat`].
    pub quad_mode: QuadMode,
    pub lattice: LatticeSpec,
}

impl MapSpec {
    pub fn cat(lattice: LatticeSpec) -> Self {
        Self {
            kind: MapKind::Cat,
            quad_mode: QuadMode::ModN,
            lattice,
        }
    }

    pub fn perturbed(lattice: LatticeSpec, quad_mode: QuadMode) -> Self {
        Self {
            kind: MapKind::PerturbedCat,
            quad_mode,
            lattice,
        }
    }

    /// Applies the map (or its inverse) to one lattice point.
    pub fn apply(&self, p: PhasePoint, direction: Direction) -> PhasePoint {
        match (self.kind, direction) {
            (MapKind::Cat, Direction::Forward) => cat_forward(p, self.lattice),
            (MapKind::Cat, Direction::Backward) => cat_inverse(p, self.lattice),
            (MapKind::PerturbedCat, Direction::Forward) => perturbed_step(p, self, false),
            (MapKind::PerturbedCat, Direction::Backward) => perturbed_step(p, self, true),
        }
    }

    /// Destination index table: `table[i·N + j]` is the flat index of the image
    /// of `(i, j)`.
    pub fn index_table(&self, direction: Direction) -> Vec<usize> {
        let n = self.lattice.side();
        let nq = self.lattice.nq();
        (0..self.lattice.cells())
            .map(|idx| {
                let q = self.apply(PhasePoint::new(idx >> nq, idx & (n - 1)), direction);
                (q.i << nq) | q.j
            })
            .collect()
    }
}

/// Quadratic shift `q(i)` of the perturbed map.
pub fn quad_shift(i: usize, mode: QuadMode, spec: LatticeSpec) -> usize {
    let sq = (i as u64) * (i as u64);
    let q = match mode {
        QuadMode::ModN => sq,
        QuadMode::FloorDiv => sq >> spec.nq(),
    };
    (q as usize) & spec.mask()
}

/// `ȳ = y + x`, `x̄ = x + ȳ` (mod N).
pub fn cat_forward(p: PhasePoint, spec: LatticeSpec) -> PhasePoint {
    let m = spec.mask();
    let j = (p.j + p.i) & m;
    let i = (p.i + j) & m;
    PhasePoint { i, j }
}

pub fn cat_inverse(p: PhasePoint, spec: LatticeSpec) -> PhasePoint {
    let n = spec.side();
    let m = spec.mask();
    let i = (p.i + n - p.j) & m;
    let j = (p.j + n - i) & m;
    PhasePoint { i, j }
}

/// `ȳ = y + x + q(x)`, `x̄ = x + ȳ` (mod N).
///
/// Panics if `m` is not a perturbed map.
pub fn perturbed_forward(p: PhasePoint, m: &MapSpec) -> PhasePoint {
    assert_eq!(
        m.kind,
        MapKind::PerturbedCat,
        "perturbed_forward needs a perturbed map"
    );
    perturbed_step(p, m, false)
}

pub fn perturbed_inverse(p: PhasePoint, m: &MapSpec) -> PhasePoint {
    assert_eq!(
        m.kind,
        MapKind::PerturbedCat,
        "perturbed_inverse needs a perturbed map"
    );
    perturbed_step(p, m, true)
}

fn perturbed_step(p: PhasePoint, m: &MapSpec, inverse: bool) -> PhasePoint {
    let spec = m.lattice;
    let n = spec.side();
    let mask = spec.mask();
    if inverse {
        let i = (p.i + n - p.j) & mask;
        let q = quad_shift(i, m.quad_mode, spec);
        let j = (p.j + 2 * n - i - q) & mask;
        PhasePoint { i, j }
    } else {
        let q = quad_shift(p.i, m.quad_mode, spec);
        let j = (p.j + p.i + q) & mask;
        let i = (p.i + j) & mask;
        PhasePoint { i, j }
    }
}

/// Transport of a harmonic under one cat-map step: `k̄x = kx − ky`, `k̄y = 2ky − kx`.
pub fn kspace_cat_forward(k: WaveVector, spec: LatticeSpec) -> WaveVector {
    let n = spec.side();
    let m = spec.mask();
    WaveVector {
        kx: (k.kx + n - k.ky) & m,
        ky: (2 * k.ky + n - k.kx) & m,
    }
}

/// `kx = 2k̄x + k̄y`, `ky = k̄x + k̄y`.
pub fn kspace_cat_inverse(k: WaveVector, spec: LatticeSpec) -> WaveVector {
    let m = spec.mask();
    WaveVector {
        kx: (2 * k.kx + k.ky) & m,
        ky: (k.kx + k.ky) & m,
    }
}

/// Kolmogorov-Sinai entropy of the cat map, `ln((3+√5)/2)`.
pub fn ks_entropy_cat() -> f64 {
    ((3.0 + 5f64.sqrt()) / 2.0).ln()
}
