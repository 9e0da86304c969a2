use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use liouville_qc::PatchSpec;
use liouville_qc_cli::config::{MapArg, Mode, QuadArg, SamplingArg};
use liouville_qc_cli::manifest::{sha256_hex, MANIFEST_FILE};
use liouville_qc_cli::{run, Command, Manifest, RunConfig};

#[derive(Parser)]
#[command(
    name = "lqc",
    version,
    about = "Quantum spectra of cat-map Liouville densities"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Evolve a patch density and write its Fourier spectrum, peaks and coarse images.
    Spectrum(Flags),
    /// Forward/backward round trips: lattice permutation, noisy circuits, float orbits.
    Reversibility(Flags),
    /// Compare noisy and noiseless spectra and sweep the noise level.
    Noise(Flags),
    /// Track the growth of the mean log-harmonic against the entropy.
    Growth(Flags),
    /// Compare orbit histograms with the exact pushforward and sampling costs.
    Montecarlo(Flags),
    /// Re-run the experiment recorded in a manifest and compare artifact hashes.
    Replay {
        manifest: PathBuf,
        /// Output directory for the re-run (defaults to `<out>/replay`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Flags {
    #[arg(long, value_enum)]
    map: Option<MapArg>,
    #[arg(long, value_enum)]
    quad: Option<QuadArg>,
    /// Qubits per register (default 10 in perm mode, 7 in circuit mode).
    #[arg(long)]
    nq: Option<u32>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Per-gate angle noise amplitude in radians.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Initial patch as `i0,j0,w,h`.
    #[arg(long, value_parser = parse_patch)]
    patch: Option<PatchSpec>,
    /// Coarse-image bits per axis.
    #[arg(long)]
    nf: Option<u32>,
    /// Measurement shots (0 disables sampling).
    #[arg(long)]
    samples: Option<usize>,
    /// Keep peaks with probability above 10^-(d+1).
    #[arg(long)]
    min_decade: Option<u32>,
    /// Noise seeds compared against the noiseless run.
    #[arg(long)]
    seeds: Option<usize>,
    /// Seeds per point of the infidelity sweep.
    #[arg(long)]
    sweep_seeds: Option<usize>,
    /// Monte-Carlo orbits.
    #[arg(long)]
    orbits: Option<usize>,
    #[arg(long, value_enum)]
    mc_sampling: Option<SamplingArg>,
    /// Relative turnaround perturbation of float round trips.
    #[arg(long)]
    classical_eps: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config or manifest; its fields override flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_patch(s: &str) -> Result<PatchSpec, String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [i0, j0, w, h] => Ok(PatchSpec::new(i0, j0, w, h)),
        _ => Err(format!("expected i0,j0,w,h, got {} values", v.len())),
    }
}

impl Flags {
    fn into_config(self) -> anyhow::Result<RunConfig> {
        let d = RunConfig::default();
        let cfg = RunConfig {
            map: self.map.unwrap_or(d.map),
            quad: self.quad.unwrap_or(d.quad),
            nq: self.nq,
            t: self.t.unwrap_or(d.t),
            mode: self.mode.unwrap_or(d.mode),
            noise: self.noise.unwrap_or(d.noise),
            seed: self.seed.unwrap_or(d.seed),
            patch: self.patch,
            nf: self.nf.unwrap_or(d.nf),
            samples: self.samples.unwrap_or(d.samples),
            min_decade: self.min_decade.unwrap_or(d.min_decade),
            seeds: self.seeds.unwrap_or(d.seeds),
            sweep_seeds: self.sweep_seeds.unwrap_or(d.sweep_seeds),
            orbits: self.orbits.unwrap_or(d.orbits),
            mc_sampling: self.mc_sampling.unwrap_or(d.mc_sampling),
            classical_eps: self.classical_eps.unwrap_or(d.classical_eps),
            out: self.out.unwrap_or(d.out),
        };
        Ok(match &self.config {
            Some(path) => cfg.overlay_file(path)?,
            None => cfg,
        })
    }
}

fn execute(command: Command, cfg: RunConfig) -> anyhow::Result<()> {
    let done = run(command, cfg)?;
    let mut out = std::io::stdout().lock();
    for line in &done.lines {
        writeln!(out, "{line}")?;
    }
    writeln!(
        out,
        "wrote {} artifacts and {} to {}",
        done.manifest.artifacts.len(),
        MANIFEST_FILE,
        done.manifest.config.out.display()
    )?;
    Ok(())
}

fn replay(path: PathBuf, out: Option<PathBuf>) -> anyhow::Result<()> {
    let recorded = Manifest::load(&path).with_context(|| format!("reading {}", path.display()))?;
    let mut cfg = recorded.config.clone();
    cfg.out = out.unwrap_or_else(|| recorded.config.out.join("replay"));
    let done = run(recorded.command, cfg)?;
    let mut mismatches = 0;
    for a in &recorded.artifacts {
        let fresh = std::fs::read(done.manifest.config.out.join(&a.path))
            .map(|b| sha256_hex(&b))
            .unwrap_or_default();
        let ok = fresh == a.sha256;
        mismatches += usize::from(!ok);
        println!("{} {}", if ok { "same" } else { "DIFF" }, a.path);
    }
    anyhow::ensure!(
        mismatches == 0,
        "{mismatches} artifacts differ from the manifest"
    );
    println!("all {} artifacts reproduced", recorded.artifacts.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Sub::Spectrum(f) => f.into_config().and_then(|c| execute(Command::Spectrum, c)),
        Sub::Reversibility(f) => f
            .into_config()
            .and_then(|c| execute(Command::Reversibility, c)),
        Sub::Noise(f) => f.into_config().and_then(|c| execute(Command::Noise, c)),
        Sub::Growth(f) => f.into_config().and_then(|c| execute(Command::Growth, c)),
        Sub::Montecarlo(f) => f
            .into_config()
            .and_then(|c| execute(Command::Montecarlo, c)),
        Sub::Replay { manifest, out } => replay(manifest, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
