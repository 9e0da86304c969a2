//! Classical Liouville densities on the torus lattice.
//!
//! A [`DensityGrid`] stores the amplitude field `a_ij ≥ 0` with `Σ a² = 1`;
//! probabilities are always the squares. Lattice maps move densities by exact
//! re-indexing, while [`mc_density`] and [`float_orbit_roundtrip`] iterate the
//! continuum maps in double precision.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::maps::{Direction, LatticeSpec, MapKind, MapSpec};
use crate::{Error, Result};

/// Tolerance on `Σ a²` for a grid to count as normalized.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Orbits per independent RNG stream in [`mc_density`].
const ORBITS_PER_STREAM: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PatchSpec {
    pub i0: usize,
    pub j0: usize,
    pub w: usize,
    pub h: usize,
}

impl PatchSpec {
    pub const fn new(i0: usize, j0: usize, w: usize, h: usize) -> Self {
        Self { i0, j0, w, h }
    }

    /// The quarter-side square at the origin.
    pub fn default_for(spec: LatticeSpec) -> Self {
        let q = (spec.side() / 4).max(1);
        Self::new(0, 0, q, q)
    }

    pub fn full(spec: LatticeSpec) -> Self {
        Self::new(0, 0, spec.side(), spec.side())
    }

    pub fn validate(&self, spec: LatticeSpec) -> Result<()> {
        if self.w == 0 || self.h == 0 {
            return Err(Error::EmptyPatch(*self));
        }
        let n = spec.side();
        if self.i0 + self.w > n || self.j0 + self.h > n {
            return Err(Error::PatchOutOfRange {
                patch: *self,
                side: n,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    lattice: LatticeSpec,
    values: Vec<f64>,
}

impl DensityGrid {
    /// Wraps raw row-major values (`values[i·N + j]`), checking sign and norm.
    pub fn from_values(lattice: LatticeSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.cells() {
            return Err(Error::DimensionMismatch(values.len(), lattice.cells()));
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>();
        if values.iter().any(|v| v.is_nan() || *v < 0.0) || (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { lattice, values })
    }

    /// Scales nonnegative weights to unit L2 norm.
    pub fn normalized(lattice: LatticeSpec, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.cells() {
            return Err(Error::DimensionMismatch(values.len(), lattice.cells()));
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm.is_nan() || norm <= 0.0 || values.iter().any(|v| *v < 0.0) {
            return Err(Error::NotNormalized(norm * norm));
        }
        values.iter_mut().for_each(|v| *v /= norm);
        Ok(Self { lattice, values })
    }

    /// Single occupied cell.
    pub fn delta(lattice: LatticeSpec, i: usize, j: usize) -> Self {
        let mut values = vec![0.0; lattice.cells()];
        values[(i << lattice.nq()) | j] = 1.0;
        Self { lattice, values }
    }

    pub fn uniform(lattice: LatticeSpec) -> Self {
        let v = 1.0 / lattice.side() as f64;
        Self {
            lattice,
            values: vec![v; lattice.cells()],
        }
    }

    /// Builds a grid from amplitude moduli without re-checking the norm.
    pub(crate) fn from_moduli(lattice: LatticeSpec, values: Vec<f64>) -> Self {
        Self { lattice, values }
    }

    pub fn lattice(&self) -> LatticeSpec {
        self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i << self.lattice.nq()) | j]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// Probability form `a²`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.values.iter().map(|v| v * v).collect()
    }
}

/// Uniform amplitude on the patch cells, zero elsewhere.
pub fn make_patch_density(spec: LatticeSpec, patch: PatchSpec) -> Result<DensityGrid> {
    patch.validate(spec)?;
    let v = 1.0 / ((patch.w * patch.h) as f64).sqrt();
    let mut values = vec![0.0; spec.cells()];
    for i in patch.i0..patch.i0 + patch.w {
        for j in patch.j0..patch.j0 + patch.h {
            values[(i << spec.nq()) | j] = v;
        }
    }
    Ok(DensityGrid {
        lattice: spec,
        values,
    })
}

/// Exact rearrangement `out[T(i,j)] = d[(i,j)]` under one lattice map step.
pub fn pushforward(d: &DensityGrid, m: &MapSpec, direction: Direction) -> Result<DensityGrid> {
    if d.lattice != m.lattice {
        return Err(Error::LatticeMismatch(d.lattice.nq(), m.lattice.nq()));
    }
    let table = m.index_table(direction);
    Ok(permute_values(d, &table))
}

/// Applies `steps` map iterations reusing one index table.
pub fn pushforward_steps(
    d: &DensityGrid,
    m: &MapSpec,
    direction: Direction,
    steps: usize,
) -> Result<DensityGrid> {
    if d.lattice != m.lattice {
        return Err(Error::LatticeMismatch(d.lattice.nq(), m.lattice.nq()));
    }
    let table = m.index_table(direction);
    let mut out = d.clone();
    for _ in 0..steps {
        out = permute_values(&out, &table);
    }
    Ok(out)
}

fn permute_values(d: &DensityGrid, table: &[usize]) -> DensityGrid {
    let mut values = vec![0.0; d.values.len()];
    for (src, &dst) in table.iter().enumerate() {
        values[dst] = d.values[src];
    }
    DensityGrid {
        lattice: d.lattice,
        values,
    }
}

/// Σ |a²_ij − b²_ij|, the L1 distance between probability forms.
pub fn l1_distance(a: &DensityGrid, b: &DensityGrid) -> Result<f64> {
    if a.lattice != b.lattice {
        return Err(Error::LatticeMismatch(a.lattice.nq(), b.lattice.nq()));
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x * x - y * y).abs())
        .sum())
}

// ---------------------------------------------------------------------------
// Continuum dynamics
// ---------------------------------------------------------------------------

#[inline]
fn frac(v: f64) -> f64 {
    let r = v.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// One step of the continuum map on `[0,1)²`.
#[inline]
pub fn continuum_forward(kind: MapKind, x: f64, y: f64) -> (f64, f64) {
    let y1 = match kind {
        MapKind::Cat => frac(y + x),
        MapKind::PerturbedCat => frac(y + x + x * x),
    };
    (frac(x + y1), y1)
}

#[inline]
pub fn continuum_inverse(kind: MapKind, x1: f64, y1: f64) -> (f64, f64) {
    let x = frac(x1 - y1);
    let y = match kind {
        MapKind::Cat => frac(y1 - x),
        MapKind::PerturbedCat => frac(y1 - x - x * x),
    };
    (x, y)
}

/// Shortest distance on the unit torus, in `[0, √2/2]`.
pub fn torus_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let fold = |d: f64| {
        let d = d.abs().rem_euclid(1.0);
        d.min(1.0 - d)
    };
    fold(a.0 - b.0).hypot(fold(a.1 - b.1))
}

/// How Monte-Carlo initial conditions are placed inside the patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McSampling {
    /// Uniform over the continuous area covered by the patch cells.
    #[default]
    Cell,
    /// Uniform over the patch's lattice nodes `(i/N, j/N)`.
    Node,
}

/// Histogram of `n_orbits` continuum orbits started in `patch` and iterated
/// `t` times, returned L2-normalized (so its squares are the empirical cell
/// frequencies).
///
/// Orbits are split into fixed-size blocks, each with its own ChaCha stream,
/// so the result is independent of the thread count.
pub fn mc_density(
    m: &MapSpec,
    patch: PatchSpec,
    t: usize,
    n_orbits: usize,
    seed: u64,
    sampling: McSampling,
) -> Result<DensityGrid> {
    if n_orbits == 0 {
        return Err(Error::NoSamples);
    }
    let spec = m.lattice;
    patch.validate(spec)?;
    let counts = mc_counts(m.kind, spec, patch, t, n_orbits, seed, sampling);
    let values = counts
        .iter()
        .map(|&c| (c as f64 / n_orbits as f64).sqrt())
        .collect();
    Ok(DensityGrid {
        lattice: spec,
        values,
    })
}

fn mc_counts(
    kind: MapKind,
    spec: LatticeSpec,
    patch: PatchSpec,
    t: usize,
    n_orbits: usize,
    seed: u64,
    sampling: McSampling,
) -> Vec<u64> {
    let n = spec.side();
    let nf = n as f64;
    let blocks = n_orbits.div_ceil(ORBITS_PER_STREAM);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let mut counts = vec![0u64; spec.cells()];
            let start = b * ORBITS_PER_STREAM;
            let end = (start + ORBITS_PER_STREAM).min(n_orbits);
            for _ in start..end {
                let (mut x, mut y) = match sampling {
                    McSampling::Cell => (
                        (patch.i0 as f64 + patch.w as f64 * rng.gen::<f64>()) / nf,
                        (patch.j0 as f64 + patch.h as f64 * rng.gen::<f64>()) / nf,
                    ),
                    McSampling::Node => (
                        (patch.i0 + rng.gen_range(0..patch.w)) as f64 / nf,
                        (patch.j0 + rng.gen_range(0..patch.h)) as f64 / nf,
                    ),
                };
                for _ in 0..t {
                    (x, y) = continuum_forward(kind, x, y);
                }
                let i = ((x * nf) as usize).min(n - 1);
                let j = ((y * nf) as usize).min(n - 1);
                counts[(i << spec.nq()) | j] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; spec.cells()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitResult {
    /// Point reached after the forward/backward round trip.
    pub x: f64,
    pub y: f64,
    pub t: usize,
    pub roundtrip_error: f64,
}

/// Iterates `t` steps forward, scales both coordinates by
/// `1 + rel_perturbation`, iterates `t` exact inverse steps and measures the
/// torus distance to the start.
pub fn float_orbit_roundtrip(
    x0: f64,
    y0: f64,
    kind: MapKind,
    t: usize,
    rel_perturbation: f64,
) -> OrbitResult {
    let (mut x, mut y) = (x0, y0);
    for _ in 0..t {
        (x, y) = continuum_forward(kind, x, y);
    }
    x = frac(x * (1.0 + rel_perturbation));
    y = frac(y * (1.0 + rel_perturbation));
    for _ in 0..t {
        (x, y) = continuum_inverse(kind, x, y);
    }
    OrbitResult {
        x,
        y,
        t,
        roundtrip_error: torus_distance((x, y), (x0, y0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::QuadMode;

    fn lat(nq: u32) -> LatticeSpec {
        LatticeSpec::new(nq).unwrap()
    }

    #[test]
    fn patch_examples() {
        let d = make_patch_density(lat(2), PatchSpec::new(0, 0, 1, 1)).unwrap();
        assert_eq!(d.get(0, 0), 1.0);
        assert_eq!(d.values().iter().filter(|v| **v != 0.0).count(), 1);

        let d = make_patch_density(lat(2), PatchSpec::new(0, 0, 4, 4)).unwrap();
        assert!(d.values().iter().all(|v| *v == 0.25));

        let d = make_patch_density(lat(3), PatchSpec::new(0, 0, 2, 2)).unwrap();
        let nz: Vec<_> = d.values().iter().copied().filter(|v| *v != 0.0).collect();
        assert_eq!(nz, vec![0.5; 4]);
        assert!((d.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn patch_rejections() {
        assert!(matches!(
            make_patch_density(lat(2), PatchSpec::new(0, 0, 0, 3)),
            Err(Error::EmptyPatch(_))
        ));
        assert!(matches!(
            make_patch_density(lat(2), PatchSpec::new(3, 0, 2, 1)),
            Err(Error::PatchOutOfRange { .. })
        ));
    }

    #[test]
    fn from_values_checks_norm() {
        assert!(DensityGrid::from_values(lat(1), vec![1.0, 1.0, 0.0, 0.0]).is_err());
        assert!(DensityGrid::from_values(lat(1), vec![1.0, 0.0, 0.0]).is_err());
        assert!(DensityGrid::from_values(lat(1), vec![0.5; 4]).is_ok());
        let d = DensityGrid::normalized(lat(1), vec![3.0, 4.0, 0.0, 0.0]).unwrap();
        assert_eq!(d.values(), &[0.6, 0.8, 0.0, 0.0]);
    }

    #[test]
    fn pushforward_examples() {
        let l = lat(3);
        let cat = MapSpec::cat(l);
        let u = DensityGrid::uniform(l);
        assert_eq!(pushforward(&u, &cat, Direction::Forward).unwrap(), u);
        let pm = MapSpec::perturbed(l, QuadMode::FloorDiv);
        assert_eq!(pushforward(&u, &pm, Direction::Backward).unwrap(), u);

        let d = DensityGrid::delta(l, 1, 0);
        let out = pushforward(&d, &cat, Direction::Forward).unwrap();
        assert_eq!(out, DensityGrid::delta(l, 2, 1));

        let p = make_patch_density(l, PatchSpec::new(1, 2, 3, 2)).unwrap();
        let fwd = pushforward_steps(&p, &cat, Direction::Forward, 3).unwrap();
        let back = pushforward_steps(&fwd, &cat, Direction::Backward, 3).unwrap();
        assert_eq!(back, p);
        let sorted = |d: &DensityGrid| {
            let mut v = d.values().to_vec();
            v.sort_by(f64::total_cmp);
            v
        };
        assert_eq!(sorted(&fwd), sorted(&p));
    }

    #[test]
    fn pushforward_rejects_other_lattice() {
        let d = DensityGrid::uniform(lat(2));
        assert!(matches!(
            pushforward(&d, &MapSpec::cat(lat(3)), Direction::Forward),
            Err(Error::LatticeMismatch(2, 3))
        ));
    }

    #[test]
    fn l1_examples() {
        let l = lat(1);
        let d = DensityGrid::delta(l, 0, 0);
        assert_eq!(l1_distance(&d, &d).unwrap(), 0.0);
        assert_eq!(l1_distance(&d, &DensityGrid::delta(l, 1, 1)).unwrap(), 2.0);
        let u = DensityGrid::uniform(l);
        assert!((l1_distance(&u, &d).unwrap() - 1.5).abs() < 1e-15);
        assert!(l1_distance(&u, &DensityGrid::uniform(lat(2))).is_err());
    }

    #[test]
    fn continuum_inverse_undoes_forward() {
        for kind in [MapKind::Cat, MapKind::PerturbedCat] {
            let (x, y) = continuum_forward(kind, 0.3, 0.4);
            let (x0, y0) = continuum_inverse(kind, x, y);
            assert!(torus_distance((x0, y0), (0.3, 0.4)) < 1e-15);
        }
        // the continuum cat map agrees with the lattice map on dyadic nodes
        let l = lat(5);
        for (i, j) in [(1, 0), (7, 30), (31, 31)] {
            let p = crate::maps::cat_forward(crate::PhasePoint::new(i, j), l);
            let (x, y) = continuum_forward(MapKind::Cat, i as f64 / 32.0, j as f64 / 32.0);
            assert_eq!((x * 32.0, y * 32.0), (p.i as f64, p.j as f64));
        }
    }

    #[test]
    fn torus_distance_range() {
        assert_eq!(torus_distance((0.1, 0.1), (0.1, 0.1)), 0.0);
        assert!((torus_distance((0.05, 0.0), (0.95, 0.0)) - 0.1).abs() < 1e-12);
        assert!((torus_distance((0.0, 0.0), (0.5, 0.5)) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn mc_single_cell_patch_at_t0() {
        let l = lat(3);
        let m = MapSpec::cat(l);
        let d = mc_density(&m, PatchSpec::new(2, 5, 1, 1), 0, 1000, 1, McSampling::Cell).unwrap();
        assert_eq!(d, DensityGrid::delta(l, 2, 5));
    }

    #[test]
    fn mc_rejects_zero_orbits() {
        let m = MapSpec::cat(lat(2));
        assert_eq!(
            mc_density(&m, PatchSpec::new(0, 0, 1, 1), 0, 0, 1, McSampling::Cell),
            Err(Error::NoSamples)
        );
    }

    #[test]
    fn mc_is_deterministic() {
        let m = MapSpec::perturbed(lat(4), QuadMode::ModN);
        let p = PatchSpec::default_for(m.lattice);
        let a = mc_density(&m, p, 3, 50_000, 9, McSampling::Cell).unwrap();
        let b = mc_density(&m, p, 3, 50_000, 9, McSampling::Cell).unwrap();
        assert_eq!(a, b);
        let c = mc_density(&m, p, 3, 50_000, 10, McSampling::Cell).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn orbit_roundtrip_without_dynamics() {
        for eps in [0.0, 1e-8, 1e-3] {
            let r = float_orbit_roundtrip(0.3, 0.4, MapKind::Cat, 0, eps);
            let expected = eps * 0.3f64.hypot(0.4);
            assert!((r.roundtrip_error - expected).abs() < 1e-15);
            assert!(r.roundtrip_error <= 2.0 * eps);
        }
    }
}
