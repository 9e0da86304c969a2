//! Fourier-side observables of lattice densities.
//!
//! The transform convention is `b(kx,ky) = (1/N) Σ_ij exp(+2πi(kx·i + ky·j)/N)·a_ij`,
//! unitary on `N × N` grids. Harmonics are stored in `[0, N)` and reported
//! centered in `(−N/2, N/2]`.

use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::io::{self, Write};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::circuits::{Circuit, Register};
use crate::liouville::DensityGrid;
use crate::maps::{LatticeSpec, WaveVector};
use crate::qsim::{SampleSet, StateVector};
use crate::{Error, Result};

/// Largest side for which [`dft_oracle`] evaluates the double sum directly.
pub const NAIVE_DFT_MAX_SIDE: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    lattice: LatticeSpec,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn lattice(&self) -> LatticeSpec {
        self.lattice
    }

    /// Coefficients, `coeffs[kx·N + ky]` in stored convention.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: WaveVector) -> Complex64 {
        self.coeffs[(k.kx << self.lattice.nq()) | k.ky]
    }

    /// `|b(k)|²`.
    pub fn prob(&self, k: WaveVector) -> f64 {
        self.coeff(k).norm_sqr()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest entrywise modulus of the difference.
    pub fn max_abs_diff(&self, other: &Spectrum) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Moves every coefficient to `f(k)`; `f` must be a bijection.
    pub fn transported(&self, f: impl Fn(WaveVector, LatticeSpec) -> WaveVector) -> Spectrum {
        let nq = self.lattice.nq();
        let mask = self.lattice.side() - 1;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.coeffs.len()];
        for (idx, c) in self.coeffs.iter().enumerate() {
            let k = f(WaveVector::new(idx >> nq, idx & mask), self.lattice);
            coeffs[(k.kx << nq) | k.ky] = *c;
        }
        Spectrum {
            lattice: self.lattice,
            coeffs,
        }
    }

    /// `kx_centered,ky_centered,re,im,p`, stored order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let nq = self.lattice.nq();
        let mask = self.lattice.side() - 1;
        writeln!(w, "kx_centered,ky_centered,re,im,p")?;
        for (idx, c) in self.coeffs.iter().enumerate() {
            let (kx, ky) = WaveVector::new(idx >> nq, idx & mask).centered(self.lattice);
            writeln!(w, "{kx},{ky},{},{},{}", c.re, c.im, c.norm_sqr())?;
        }
        Ok(())
    }
}

/// Direct transform of a density grid; independent of any circuit.
pub fn dft_oracle(d: &DensityGrid) -> Spectrum {
    let amps: Vec<Complex64> = d.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    dft_amplitudes(d.lattice(), &amps)
}

/// Transform of arbitrary complex amplitudes, naive up to
/// [`NAIVE_DFT_MAX_SIDE`] and row-column FFT beyond.
pub fn dft_amplitudes(lattice: LatticeSpec, amps: &[Complex64]) -> Spectrum {
    if lattice.side() <= NAIVE_DFT_MAX_SIDE {
        dft_naive(lattice, amps)
    } else {
        dft_fast(lattice, amps)
    }
}

/// Double sum over all cells with a twiddle table.
pub fn dft_naive(lattice: LatticeSpec, amps: &[Complex64]) -> Spectrum {
    let n = lattice.side();
    assert_eq!(amps.len(), n * n);
    let twiddle: Vec<Complex64> = (0..n)
        .map(|m| Complex64::from_polar(1.0, TAU * m as f64 / n as f64))
        .collect();
    let scale = 1.0 / n as f64;
    let mut coeffs = Vec::with_capacity(n * n);
    for kx in 0..n {
        for ky in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n {
                let row = &amps[i * n..(i + 1) * n];
                let base = kx * i;
                for (j, a) in row.iter().enumerate() {
                    acc += twiddle[(base + ky * j) % n] * a;
                }
            }
            coeffs.push(acc * scale);
        }
    }
    Spectrum { lattice, coeffs }
}

/// Row-column transform using rustfft's unnormalized inverse (`e^{+2πi}`).
pub fn dft_fast(lattice: LatticeSpec, amps: &[Complex64]) -> Spectrum {
    let n = lattice.side();
    assert_eq!(amps.len(), n * n);
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(n);
    let mut data = amps.to_vec();
    // rows: transform over j for every i
    fft.process(&mut data);
    // columns: transpose, transform over i, transpose back
    let mut t = transpose(&data, n);
    fft.process(&mut t);
    let mut coeffs = transpose(&t, n);
    let scale = 1.0 / n as f64;
    coeffs.iter_mut().for_each(|c| *c *= scale);
    Spectrum { lattice, coeffs }
}

fn transpose(a: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j];
        }
    }
    out
}

#[inline]
fn reverse_bits(v: usize, bits: u32) -> usize {
    v.reverse_bits() >> (usize::BITS - bits)
}

/// Maps a stored register value to its harmonic, undoing bit reversal.
fn register_to_k(v: usize, reversed: bool, nq: u32) -> usize {
    if reversed {
        reverse_bits(v, nq)
    } else {
        v
    }
}

/// Reads a post-QFT state into the `(kx, ky)` grid, honoring the circuit's
/// bit-reversal metadata.
pub fn spectrum_of_state(s: &StateVector, qft: &Circuit) -> Spectrum {
    let lattice = s.lattice();
    let nq = lattice.nq();
    let mask = lattice.side() - 1;
    let (rx, ry) = (qft.bit_reversed(Register::X), qft.bit_reversed(Register::Y));
    let mut coeffs = vec![Complex64::new(0.0, 0.0); lattice.cells()];
    for (idx, a) in s.amplitudes().iter().enumerate() {
        let kx = register_to_k(idx >> nq, rx, nq);
        let ky = register_to_k(idx & mask, ry, nq);
        coeffs[(kx << nq) | ky] = *a;
    }
    Spectrum { lattice, coeffs }
}

/// Converts raw post-QFT measurement outcomes to harmonics.
pub fn relabel_samples(samples: &SampleSet, qft: &Circuit) -> SampleSet {
    let nq = samples.nq;
    let (rx, ry) = (qft.bit_reversed(Register::X), qft.bit_reversed(Register::Y));
    SampleSet {
        nq,
        outcomes: samples
            .outcomes
            .iter()
            .map(|&(x, y)| (register_to_k(x, rx, nq), register_to_k(y, ry, nq)))
            .collect(),
        seed: samples.seed,
    }
}

// ---------------------------------------------------------------------------
// Peaks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Centered harmonics.
    pub kx: i64,
    pub ky: i64,
    pub p: f64,
    /// `d` with `10^{−d−1} < p ≤ 10^{−d}`.
    pub decade: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakSet {
    pub min_decade: u32,
    pub cutoff: f64,
    pub entries: Vec<Peak>,
}

impl PeakSet {
    /// `(kx, ky, decade)` triples, ignoring the exact weights.
    pub fn binned(&self) -> BTreeSet<(i64, i64, u32)> {
        self.entries
            .iter()
            .map(|p| (p.kx, p.ky, p.decade))
            .collect()
    }

    pub fn same_bins(&self, other: &PeakSet) -> bool {
        self.binned() == other.binned()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("peak sets serialize")
    }
}

/// Decade index of a probability in `(0, 1]`.
pub fn decade_of(p: f64) -> u32 {
    debug_assert!(p > 0.0);
    let mut d = (-p.log10()).floor().max(0.0) as i32;
    while d > 0 && p > 10f64.powi(-d) {
        d -= 1;
    }
    while p <= 10f64.powi(-d - 1) {
        d += 1;
    }
    d as u32
}

/// All cells with `|b|² > 10^{−(min_decade+1)}`, strongest first.
pub fn peaks(sp: &Spectrum, min_decade: u32) -> PeakSet {
    let cutoff = 10f64.powi(-(min_decade as i32) - 1);
    let nq = sp.lattice.nq();
    let mask = sp.lattice.side() - 1;
    let mut entries: Vec<(usize, Peak)> = sp
        .coeffs
        .iter()
        .enumerate()
        .filter_map(|(idx, c)| {
            let p = c.norm_sqr();
            (p > cutoff).then(|| {
                let (kx, ky) = WaveVector::new(idx >> nq, idx & mask).centered(sp.lattice);
                (
                    idx,
                    Peak {
                        kx,
                        ky,
                        p,
                        decade: decade_of(p),
                    },
                )
            })
        })
        .collect();
    entries.sort_by(|a, b| b.1.p.total_cmp(&a.1.p).then(a.0.cmp(&b.0)));
    PeakSet {
        min_decade,
        cutoff,
        entries: entries.into_iter().map(|(_, p)| p).collect(),
    }
}

// ---------------------------------------------------------------------------
// Coarse images
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseImage {
    pub nf: u32,
    /// `cells[u·2^nf + v]`, `u` from kx and `v` from ky.
    pub cells: Vec<f64>,
}

impl CoarseImage {
    pub fn side(&self) -> usize {
        1 << self.nf
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.cells[(u << self.nf) | v]
    }

    pub fn total(&self) -> f64 {
        self.cells.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &CoarseImage) -> f64 {
        self.cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Merges 2×2 blocks into the `nf − 1` image.
    pub fn aggregate(&self) -> Option<CoarseImage> {
        if self.nf <= 1 {
            return None;
        }
        let nf = self.nf - 1;
        let mut cells = vec![0.0; 1 << (2 * nf)];
        for (idx, c) in self.cells.iter().enumerate() {
            let (u, v) = (idx >> self.nf, idx & (self.side() - 1));
            cells[((u >> 1) << nf) | (v >> 1)] += c;
        }
        Some(CoarseImage { nf, cells })
    }

    /// Binary PGM (P5, maxval 255), rows indexed by `u`, scaled to the
    /// largest cell.
    pub fn write_pgm<W: Write>(&self, mut w: W) -> io::Result<()> {
        let side = self.side();
        write!(w, "P5\n{side} {side}\n255\n")?;
        let max = self.cells.iter().copied().fold(0.0, f64::max);
        let bytes: Vec<u8> = self
            .cells
            .iter()
            .map(|&c| {
                if max > 0.0 {
                    (255.0 * c / max).round().clamp(0.0, 255.0) as u8
                } else {
                    0
                }
            })
            .collect();
        w.write_all(&bytes)
    }

    /// `u,v,weight` lines.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "u,v,weight")?;
        for (idx, c) in self.cells.iter().enumerate() {
            writeln!(w, "{},{},{c}", idx >> self.nf, idx & (self.side() - 1))?;
        }
        Ok(())
    }
}

fn check_nf(lattice: LatticeSpec, nf: u32) -> Result<()> {
    if nf == 0 || nf > lattice.nq() {
        return Err(Error::InvalidCoarseWidth {
            nf,
            nq: lattice.nq(),
        });
    }
    Ok(())
}

/// Marginal of `|b|²` on the leading `nf` bits of kx and ky.
pub fn coarse(sp: &Spectrum, nf: u32) -> Result<CoarseImage> {
    check_nf(sp.lattice, nf)?;
    let nq = sp.lattice.nq();
    let drop = nq - nf;
    let mask = sp.lattice.side() - 1;
    let mut cells = vec![0.0; 1 << (2 * nf)];
    for (idx, c) in sp.coeffs.iter().enumerate() {
        let (kx, ky) = (idx >> nq, idx & mask);
        cells[((kx >> drop) << nf) | (ky >> drop)] += c.norm_sqr();
    }
    Ok(CoarseImage { nf, cells })
}

/// Empirical coarse image from harmonic-labelled samples.
pub fn coarse_from_samples(samples: &SampleSet, spec: LatticeSpec, nf: u32) -> Result<CoarseImage> {
    check_nf(spec, nf)?;
    if samples.is_empty() {
        return Err(Error::NoSamples);
    }
    if samples.nq != spec.nq() {
        return Err(Error::LatticeMismatch(samples.nq, spec.nq()));
    }
    let drop = spec.nq() - nf;
    let mut counts = vec![0u64; 1 << (2 * nf)];
    for &(kx, ky) in &samples.outcomes {
        counts[((kx >> drop) << nf) | (ky >> drop)] += 1;
    }
    let m = samples.len() as f64;
    Ok(CoarseImage {
        nf,
        cells: counts.into_iter().map(|c| c as f64 / m).collect(),
    })
}

// ---------------------------------------------------------------------------
// Harmonic growth
// ---------------------------------------------------------------------------

/// Weighted mean of `ln|k|` over `k ≠ 0`, centered convention.
pub fn mean_log_k(sp: &Spectrum) -> Result<f64> {
    let nq = sp.lattice.nq();
    let mask = sp.lattice.side() - 1;
    let (mut weight, mut acc) = (0.0, 0.0);
    for (idx, c) in sp.coeffs.iter().enumerate().skip(1) {
        let p = c.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let (kx, ky) = WaveVector::new(idx >> nq, idx & mask).centered(sp.lattice);
        weight += p;
        acc += p * ((kx * kx + ky * ky) as f64).sqrt().ln();
    }
    // rounding residue of an exact k = 0 delta stays far below this
    if weight < 1e-20 {
        return Err(Error::NoNonzeroHarmonics);
    }
    Ok(acc / weight)
}

/// Saturation level for growth fits, `ln(N/4)`.
pub fn saturation_level(lattice: LatticeSpec) -> f64 {
    (lattice.side() as f64 / 4.0).ln()
}

/// Points of `(t, mean_log_k)` below the saturation level.
pub fn presaturation(series: &[(f64, f64)], lattice: LatticeSpec) -> Vec<(f64, f64)> {
    let cap = saturation_level(lattice);
    series.iter().copied().filter(|&(_, m)| m < cap).collect()
}

/// Least-squares slope of `mean_log_k` against `t`.
pub fn growth_fit(series: &[(f64, f64)]) -> Result<f64> {
    if series.len() < 3 {
        return Err(Error::InsufficientPoints(series.len()));
    }
    let n = series.len() as f64;
    let mt = series.iter().map(|p| p.0).sum::<f64>() / n;
    let mv = series.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = series.iter().map(|p| (p.0 - mt) * (p.1 - mv)).sum();
    let sxx: f64 = series.iter().map(|p| (p.0 - mt).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::{make_patch_density, pushforward, PatchSpec};
    use crate::maps::{kspace_cat_forward, Direction, MapSpec};

    fn lat(nq: u32) -> LatticeSpec {
        LatticeSpec::new(nq).unwrap()
    }

    /// Spectrum with all weight on the listed stored harmonics.
    fn spectrum_with(lattice: LatticeSpec, cells: &[((i64, i64), f64)]) -> Spectrum {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); lattice.cells()];
        for &((kx, ky), p) in cells {
            coeffs[(lattice.stored(kx) << lattice.nq()) | lattice.stored(ky)] =
                Complex64::new(p.sqrt(), 0.0);
        }
        Spectrum { lattice, coeffs }
    }

    #[test]
    fn dft_examples() {
        let l = lat(3);
        let sp = dft_oracle(&DensityGrid::uniform(l));
        assert!((sp.coeffs()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(sp.coeffs()[1..].iter().all(|c| c.norm() < 1e-14));

        let sp = dft_oracle(&DensityGrid::delta(l, 0, 0));
        assert!(sp
            .probabilities()
            .iter()
            .all(|p| (p - 1.0 / 64.0).abs() < 1e-15));

        let l = lat(2);
        let sp = dft_oracle(&DensityGrid::delta(l, 1, 0));
        for kx in 0..4 {
            for ky in 0..4 {
                let c = sp.coeff(WaveVector::new(kx, ky));
                let expected = Complex64::from_polar(0.25, TAU * kx as f64 / 4.0);
                assert!((c - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn fast_transform_matches_naive() {
        for nq in 1..=6 {
            let l = lat(nq);
            let s = StateVector::random(l, nq as u64);
            let a = dft_naive(l, s.amplitudes());
            let b = dft_fast(l, s.amplitudes());
            assert!(a.max_abs_diff(&b) <= 1e-12, "nq={nq}");
        }
    }

    #[test]
    fn parseval() {
        let l = lat(7);
        let d = make_patch_density(l, PatchSpec::new(3, 9, 20, 11)).unwrap();
        assert!((dft_oracle(&d).norm_sqr() - d.norm_sqr()).abs() < 1e-10);
    }

    #[test]
    fn transport_law_on_small_lattice() {
        let l = lat(5);
        let d = make_patch_density(l, PatchSpec::new(2, 3, 7, 5)).unwrap();
        let moved = dft_oracle(&pushforward(&d, &MapSpec::cat(l), Direction::Forward).unwrap());
        let transported = dft_oracle(&d).transported(kspace_cat_forward);
        assert!(moved.max_abs_diff(&transported) <= 1e-12);
    }

    #[test]
    fn decade_boundaries() {
        assert_eq!(decade_of(1.0), 0);
        assert_eq!(decade_of(0.5), 0);
        assert_eq!(decade_of(0.1), 1);
        assert_eq!(decade_of(0.100001), 0);
        assert_eq!(decade_of(0.01), 2);
        assert_eq!(decade_of(0.0099), 2);
        assert_eq!(decade_of(0.001), 3);
    }

    #[test]
    fn peak_examples() {
        let l = lat(4);
        let delta = spectrum_with(l, &[((3, -2), 1.0)]);
        let ps = peaks(&delta, 3);
        assert_eq!(ps.len(), 1);
        assert_eq!(
            ps.entries[0],
            Peak {
                kx: 3,
                ky: -2,
                p: 1.0,
                decade: 0
            }
        );

        let uniform = dft_oracle(&DensityGrid::delta(l, 0, 0));
        assert!(peaks(&uniform, 1).is_empty());
        assert_eq!(peaks(&uniform, 2).len(), 256);

        let mixed = spectrum_with(
            l,
            &[((0, 0), 0.6), ((1, 0), 0.3), ((0, 5), 0.05), ((2, 2), 0.05)],
        );
        let ps = peaks(&mixed, 1);
        assert_eq!(ps.len(), 4);
        assert!((ps.entries[0].p - 0.6).abs() < 1e-15);
        assert_eq!(ps.entries[1].decade, 0);
        assert_eq!(ps.entries[2].decade, 1);
        assert_eq!(ps.entries[2].kx, 0, "ties keep stored order");
        assert_eq!(peaks(&mixed, 0).len(), 2);
    }

    #[test]
    fn coarse_examples() {
        let l = lat(3);
        let sp = dft_oracle(&make_patch_density(l, PatchSpec::new(1, 2, 3, 3)).unwrap());
        let full = coarse(&sp, 3).unwrap();
        assert_eq!(full.cells, sp.probabilities());

        let uniform = dft_oracle(&DensityGrid::delta(l, 0, 0));
        let c = coarse(&uniform, 2).unwrap();
        assert!(c.cells.iter().all(|v| (v - 1.0 / 16.0).abs() < 1e-14));

        let delta = spectrum_with(l, &[((0, 0), 1.0)]);
        let c = coarse(&delta, 1).unwrap();
        assert_eq!(c.get(0, 0), 1.0);

        assert!(coarse(&sp, 0).is_err());
        assert!(coarse(&sp, 4).is_err());
    }

    #[test]
    fn coarse_refinement_aggregates_exactly() {
        let l = lat(6);
        let sp = dft_oracle(&make_patch_density(l, PatchSpec::default_for(l)).unwrap());
        for nf in 2..=6 {
            let fine = coarse(&sp, nf).unwrap();
            let agg = fine.aggregate().unwrap();
            assert!(agg.max_abs_diff(&coarse(&sp, nf - 1).unwrap()) < 1e-14);
            assert!((fine.total() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn coarse_from_identical_samples() {
        let l = lat(3);
        let s = SampleSet {
            nq: 3,
            outcomes: vec![(5, 2); 10],
            seed: 0,
        };
        let c = coarse_from_samples(&s, l, 2).unwrap();
        assert_eq!(c.get(2, 1), 1.0);
        assert_eq!(c.total(), 1.0);
    }

    #[test]
    fn pgm_and_csv_layout() {
        let img = CoarseImage {
            nf: 1,
            cells: vec![0.5, 0.25, 0.0, 0.25],
        };
        let mut buf = Vec::new();
        img.write_pgm(&mut buf).unwrap();
        assert_eq!(&buf[..11], b"P5\n2 2\n255\n");
        assert_eq!(&buf[11..], &[255, 128, 0, 128]);
        let mut csv = Vec::new();
        img.write_csv(&mut csv).unwrap();
        assert_eq!(
            String::from_utf8(csv).unwrap(),
            "u,v,weight\n0,0,0.5\n0,1,0.25\n1,0,0\n1,1,0.25\n"
        );
    }

    #[test]
    fn spectrum_csv_is_centered() {
        let l = lat(1);
        let sp = spectrum_with(l, &[((1, 0), 1.0)]);
        let mut buf = Vec::new();
        sp.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "kx_centered,ky_centered,re,im,p"
        );
        assert!(text.contains("\n1,0,1,0,1\n"));
        let l = lat(3);
        let sp = spectrum_with(l, &[((-1, 4), 1.0)]);
        let mut buf = Vec::new();
        sp.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().contains("\n-1,4,1,0,1\n"));
    }

    #[test]
    fn mean_log_k_examples() {
        let l = lat(5);
        assert_eq!(
            mean_log_k(&spectrum_with(l, &[((1, 0), 1.0)])).unwrap(),
            0.0
        );
        let m = mean_log_k(&spectrum_with(l, &[((5, -8), 1.0)])).unwrap();
        assert!((m - 89f64.sqrt().ln()).abs() < 1e-14);
        assert!((m - 2.244).abs() < 1e-3);
        let m = mean_log_k(&spectrum_with(l, &[((1, 0), 0.5), ((2, 0), 0.5)])).unwrap();
        assert!((m - 0.3466).abs() < 1e-4);
        // k = 0 is excluded from both sums
        let m = mean_log_k(&spectrum_with(l, &[((0, 0), 0.9), ((2, 0), 0.1)])).unwrap();
        assert!((m - 2f64.ln()).abs() < 1e-14);
        assert_eq!(
            mean_log_k(&spectrum_with(l, &[((0, 0), 1.0)])),
            Err(Error::NoNonzeroHarmonics)
        );
    }

    #[test]
    fn growth_fit_examples() {
        let line: Vec<_> = (0..6)
            .map(|t| (t as f64, 0.3 + 0.9624 * t as f64))
            .collect();
        assert!((growth_fit(&line).unwrap() - 0.9624).abs() < 1e-12);
        let flat: Vec<_> = (0..4).map(|t| (t as f64, 1.7)).collect();
        assert_eq!(growth_fit(&flat).unwrap(), 0.0);
        assert_eq!(growth_fit(&line[..2]), Err(Error::InsufficientPoints(2)));
        let l = lat(4);
        let series = [(0.0, 0.5), (1.0, 1.2), (2.0, 1.5)];
        assert_eq!(presaturation(&series, l), vec![(0.0, 0.5), (1.0, 1.2)]);
    }

    #[test]
    fn kspace_delta_sequence() {
        // (1,0) → (1,−1) → (2,−3) → (5,−8)
        let l = lat(6);
        let mut sp = spectrum_with(l, &[((1, 0), 1.0)]);
        let mut logs = vec![mean_log_k(&sp).unwrap()];
        for _ in 0..3 {
            sp = sp.transported(kspace_cat_forward);
            logs.push(mean_log_k(&sp).unwrap());
        }
        let expected = [0.0, 2f64.sqrt().ln(), 13f64.sqrt().ln(), 89f64.sqrt().ln()];
        for (a, b) in logs.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((logs[1] - 0.347).abs() < 1e-3 && (logs[2] - 1.282).abs() < 1e-3);
    }
}
