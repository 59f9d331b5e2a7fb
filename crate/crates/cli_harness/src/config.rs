use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub d: usize,
    pub n: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { d: 2, n: 32 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IndexSpec {
    pub s: f64,
    pub theta: f64,
    pub sigma: f64,
    pub p: usize,
}

impl Default for IndexSpec {
    fn default() -> Self {
        IndexSpec {
            s: 4.0,
            theta: 2.5,
            sigma: 2.5,
            p: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorSpec {
    #[default]
    Zero,
    /// Σ cᵢ∂ᵢ(I−Δ)^α with constant coefficients.
    Transport { coeffs: Vec<f64>, alpha: f64 },
    Riesz { c: Vec<f64>, varsigma: f64 },
    /// (I−Δ)^{s/2}; not skew.
    Bessel { s: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LawSpec {
    pub name: String,
    pub params: Vec<f64>,
}

impl Default for LawSpec {
    fn default() -> Self {
        LawSpec {
            name: "gamma".into(),
            params: vec![1.0, 3.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LevySpec {
    #[default]
    None,
    TwoPoint { l0: f64, rate: f64 },
    Stable { a: f64, c: f64, eps: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DniProfile {
    /// V = identity, h̃(u) = g·u, damping `gamma`.
    #[default]
    Identity,
    /// V = log(1+x), h̃ scaled by the Lipschitz norm, damping from the chain.
    LogDamped,
    /// Nonlinearity off, additive forcing g·(sin x₂, 0, …), damping `gamma`.
    LinearAdditive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DniSection {
    pub profile: DniProfile,
    pub gamma: f64,
    pub g: f64,
    pub a_target: f64,
    pub excess: f64,
    pub nl_samples: usize,
    pub nonlinear: bool,
}

impl Default for DniSection {
    fn default() -> Self {
        DniSection {
            profile: DniProfile::Identity,
            gamma: 0.1,
            g: 0.3,
            a_target: 0.5,
            excess: 1.0,
            nl_samples: 50,
            nonlinear: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialProfile {
    /// Incompressible: stream-function combination of three modes.
    #[default]
    Smooth,
    TaylorGreen,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IncompressibleSection {
    pub initial: InitialProfile,
    pub amplitude: f64,
    /// Adds an L² conservation check (per unit time) to the run.
    pub conserve_energy: bool,
}

impl Default for IncompressibleSection {
    fn default() -> Self {
        IncompressibleSection {
            initial: InitialProfile::Smooth,
            amplitude: 0.5,
            conserve_energy: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompressibleSection {
    /// Cut-off radius; `inf` disables the cut-off.
    pub radius: f64,
    /// Mollification level; 0 means the grid size.
    pub mollify: usize,
    /// Linear Itô forcing z = g·u.
    pub ito_g: f64,
    pub density_mean: f64,
    pub density_amp: f64,
    pub velocity_amp: f64,
    /// Strong self-convergence study with this many levels; 0 skips it.
    pub convergence_levels: usize,
}

impl Default for CompressibleSection {
    fn default() -> Self {
        CompressibleSection {
            radius: f64::INFINITY,
            mollify: 0,
            ito_g: 0.0,
            density_mean: 2.0,
            density_amp: 0.2,
            velocity_amp: 0.1,
            convergence_levels: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ErgodicSection {
    /// Occupation horizons; stabilization compares consecutive pairs.
    pub horizons: Vec<f64>,
    pub r_grid: Vec<f64>,
    /// Checks the per-mode variance against the stationary value.
    pub stationary_check: bool,
    /// Requires strictly decreasing stabilization distances.
    pub stabilization_check: bool,
}

impl Default for ErgodicSection {
    fn default() -> Self {
        ErgodicSection {
            horizons: vec![25.0, 50.0, 100.0, 200.0],
            r_grid: (0..12).map(|k| 10f64.powf(-2.0 + 0.5 * k as f64)).collect(),
            stationary_check: false,
            stabilization_check: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub subcommand: String,
    pub seed: u64,
    pub paths: usize,
    pub output_dir: PathBuf,
    pub dt: f64,
    pub t_final: f64,
    pub sample_every: usize,
    pub grid: GridSpec,
    pub indices: IndexSpec,
    pub q1: OperatorSpec,
    pub q2: OperatorSpec,
    pub law: LawSpec,
    pub levy: LevySpec,
    pub dni: DniSection,
    pub incompressible: IncompressibleSection,
    pub compressible: CompressibleSection,
    pub ergodic: ErgodicSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            subcommand: String::new(),
            seed: 1,
            paths: 8,
            output_dir: PathBuf::from("results"),
            dt: 1e-2,
            t_final: 1.0,
            sample_every: 10,
            grid: GridSpec::default(),
            indices: IndexSpec::default(),
            q1: OperatorSpec::Zero,
            q2: OperatorSpec::Zero,
            law: LawSpec::default(),
            levy: LevySpec::None,
            dni: DniSection::default(),
            incompressible: IncompressibleSection::default(),
            compressible: CompressibleSection::default(),
            ergodic: ErgodicSection::default(),
        }
    }
}

pub const ECHO_NAME: &str = "config.toml";

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if !(1..=3).contains(&self.grid.d) || self.grid.n < 4 || self.grid.n % 2 == 1 {
            return bad(format!("grid d={} n={} (need d in 1..=3, even n >= 4)", self.grid.d, self.grid.n));
        }
        if !(self.dt > 0.0) || !(self.t_final >= 0.0) || self.sample_every == 0 || self.paths == 0 {
            return bad("dt, t_final, sample_every and paths must be positive".into());
        }
        for (name, q) in [("q1", &self.q1), ("q2", &self.q2)] {
            match q {
                OperatorSpec::Transport { coeffs, .. } | OperatorSpec::Riesz { c: coeffs, .. }
                    if coeffs.len() != self.grid.d =>
                {
                    return bad(format!("{name} needs {} coefficients, got {}", self.grid.d, coeffs.len()));
                }
                _ => {}
            }
        }
        if !matches!(self.q2, OperatorSpec::Zero) && matches!(self.levy, LevySpec::None) {
            return bad("q2 is set but levy is none".into());
        }
        Ok(())
    }

    /// Resolved config with a header describing the seeding scheme.
    pub fn echo(&self) -> Result<String, HarnessError> {
        let body = toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(format!(
            "# resolved configuration\n# path p draws from ChaCha8 keyed by seed = {} on stream p\n{body}",
            self.seed
        ))
    }
}
