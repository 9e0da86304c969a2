use std::path::{Path, PathBuf};

use liouville_qc::liouville::McSampling;
use liouville_qc::{LatticeSpec, MapSpec, PatchSpec, QuadMode};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Largest register width the state-vector commands will allocate (2^26 amplitudes).
pub const MAX_STATE_NQ: u32 = 13;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MapArg {
    Cat,
    Pcat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum QuadArg {
    Modn,
    Floor,
}

impl From<QuadArg> for QuadMode {
    fn from(q: QuadArg) -> Self {
        match q {
            QuadArg::Modn => QuadMode::ModN,
            QuadArg::Floor => QuadMode::FloorDiv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Exact lattice permutation of amplitudes.
    Perm,
    /// Gate-level map circuits.
    Circuit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SamplingArg {
    Cell,
    Node,
}

impl From<SamplingArg> for McSampling {
    fn from(s: SamplingArg) -> Self {
        match s {
            SamplingArg::Cell => McSampling::Cell,
            SamplingArg::Node => McSampling::Node,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Spectrum,
    Reversibility,
    Noise,
    Growth,
    Montecarlo,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Reversibility => "reversibility",
            Command::Noise => "noise",
            Command::Growth => "growth",
            Command::Montecarlo => "montecarlo",
        }
    }
}

/// Every parameter of one experiment. Serialized verbatim into manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub map: MapArg,
    pub quad: QuadArg,
    /// Defaults to 10 in permutation mode and 7 in circuit mode.
    pub nq: Option<u32>,
    pub t: usize,
    pub mode: Mode,
    /// Per-gate angle-noise amplitude (radians).
    pub noise: f64,
    pub seed: u64,
    /// Defaults to `(0, 0, N/4, N/4)`.
    pub patch: Option<PatchSpec>,
    pub nf: u32,
    pub samples: usize,
    pub min_decade: u32,
    /// Noise seeds compared against the noiseless run.
    pub seeds: usize,
    /// Seeds per point of the infidelity-vs-ε sweep.
    pub sweep_seeds: usize,
    pub orbits: usize,
    pub mc_sampling: SamplingArg,
    /// Turnaround perturbation of the classical round trips.
    pub classical_eps: f64,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            map: MapArg::Cat,
            quad: QuadArg::Modn,
            nq: None,
            t: 5,
            mode: Mode::Perm,
            noise: 0.01,
            seed: 1,
            patch: None,
            nf: 4,
            samples: 100_000,
            min_decade: 3,
            seeds: 5,
            sweep_seeds: 20,
            orbits: 1_000_000,
            mc_sampling: SamplingArg::Node,
            classical_eps: 1e-8,
            out: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn nq(&self) -> u32 {
        self.nq.unwrap_or(match self.mode {
            Mode::Perm => 10,
            Mode::Circuit => 7,
        })
    }

    pub fn lattice(&self) -> LatticeSpec {
        LatticeSpec::new(self.nq()).expect("validated lattice")
    }

    pub fn map_spec(&self) -> MapSpec {
        let l = self.lattice();
        match self.map {
            MapArg::Cat => MapSpec::cat(l),
            MapArg::Pcat => MapSpec::perturbed(l, self.quad.into()),
        }
    }

    pub fn patch(&self) -> PatchSpec {
        self.patch
            .unwrap_or_else(|| PatchSpec::default_for(self.lattice()))
    }

    /// Fills in mode-dependent defaults so the config reproduces exactly.
    pub fn resolved(mut self) -> Self {
        self.nq = Some(self.nq());
        self.patch = Some(self.patch());
        self
    }

    /// Overlays a JSON object (a config or a manifest holding one under
    /// `config`) on top of this config.
    pub fn overlay_json(self, overlay: &Value) -> Result<Self, serde_json::Error> {
        let overlay = overlay.get("config").unwrap_or(overlay);
        let mut base = serde_json::to_value(&self)?;
        if let (Value::Object(base), Value::Object(over)) = (&mut base, overlay) {
            for (k, v) in over {
                base.insert(k.clone(), v.clone());
            }
        }
        serde_json::from_value(base)
    }

    pub fn overlay_file(self, path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let value: Value = serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        self.overlay_json(&value)
            .map_err(|source| ConfigError::Parse {
                path: path.to_path_buf(),
                source,
            })
    }

    pub fn validate(&self, command: Command) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        let nq = self.nq();
        if LatticeSpec::new(nq).is_err() {
            return bad(format!("--nq {nq} outside 1..=16"));
        }
        if nq > MAX_STATE_NQ {
            return bad(format!(
                "--nq {nq} exceeds the state-vector limit {MAX_STATE_NQ}"
            ));
        }
        if let Err(e) = self.patch().validate(self.lattice()) {
            return bad(e.to_string());
        }
        if self.nf == 0 || self.nf > nq {
            return bad(format!("--nf {} must lie in 1..={nq}", self.nf));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return bad(format!(
                "--noise {} must be a finite nonnegative angle",
                self.noise
            ));
        }
        if !(self.classical_eps >= 0.0 && self.classical_eps.is_finite()) {
            return bad(format!(
                "classical_eps {} must be finite and nonnegative",
                self.classical_eps
            ));
        }
        let circuit_needed = self.mode == Mode::Circuit
            || matches!(command, Command::Noise | Command::Reversibility);
        if circuit_needed && self.map == MapArg::Pcat && self.quad == QuadArg::Floor {
            return bad(
                "the floor discretization has no gate-level circuit; use --quad modn".into(),
            );
        }
        match command {
            Command::Noise if self.mode != Mode::Circuit => {
                return bad(
                    "the noise experiment runs gate-level circuits; pass --mode circuit".into(),
                )
            }
            Command::Noise if self.seeds == 0 || self.sweep_seeds == 0 => {
                return bad("noise seed counts must be at least 1".into())
            }
            Command::Reversibility if self.seeds == 0 => {
                return bad("--seeds must be at least 1".into())
            }
            Command::Growth if self.map != MapArg::Cat => {
                return bad(
                    "the growth experiment compares against the cat-map entropy; use --map cat"
                        .into(),
                )
            }
            Command::Montecarlo if self.orbits == 0 => {
                return bad("--orbits must be at least 1".into())
            }
            _ => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_mode() {
        let c = RunConfig::default();
        assert_eq!(c.nq(), 10);
        let c = RunConfig {
            mode: Mode::Circuit,
            ..RunConfig::default()
        };
        assert_eq!(c.nq(), 7);
        assert_eq!(c.patch(), PatchSpec::new(0, 0, 32, 32));
        let r = c.clone().resolved();
        assert_eq!(r.nq, Some(7));
        assert_eq!(r.patch, Some(PatchSpec::new(0, 0, 32, 32)));
    }

    #[test]
    fn overlay_overrides_and_accepts_manifests() {
        let c = RunConfig::default();
        let over: Value = serde_json::json!({"nq": 6, "map": "pcat"});
        let d = c.clone().overlay_json(&over).unwrap();
        assert_eq!((d.nq, d.map, d.t), (Some(6), MapArg::Pcat, 5));
        let manifest = serde_json::json!({"command": "spectrum", "config": {"t": 9}});
        assert_eq!(c.clone().overlay_json(&manifest).unwrap().t, 9);
        assert!(c.overlay_json(&serde_json::json!({"bogus": 1})).is_err());
    }

    #[test]
    fn validation_messages() {
        let ok = RunConfig::default();
        assert!(ok.validate(Command::Spectrum).is_ok());
        let floor_circuit = RunConfig {
            map: MapArg::Pcat,
            quad: QuadArg::Floor,
            mode: Mode::Circuit,
            ..RunConfig::default()
        };
        assert!(floor_circuit.validate(Command::Spectrum).is_err());
        let noise_perm = RunConfig::default();
        assert!(noise_perm.validate(Command::Noise).is_err());
        let growth_pcat = RunConfig {
            map: MapArg::Pcat,
            ..RunConfig::default()
        };
        assert!(growth_pcat.validate(Command::Growth).is_err());
        let big_nf = RunConfig {
            nq: Some(3),
            nf: 4,
            ..RunConfig::default()
        };
        assert!(big_nf.validate(Command::Spectrum).is_err());
        let bad_patch = RunConfig {
            nq: Some(3),
            nf: 2,
            patch: Some(PatchSpec::new(6, 0, 4, 1)),
            ..RunConfig::default()
        };
        assert!(bad_patch.validate(Command::Spectrum).is_err());
        let neg = RunConfig {
            noise: -0.1,
            ..RunConfig::default()
        };
        assert!(neg.validate(Command::Spectrum).is_err());
    }
}
