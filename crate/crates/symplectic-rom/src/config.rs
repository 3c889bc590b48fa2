//! Experiment configuration: a TOML file with nested sections. Unknown keys
//! are rejected so typos cannot silently change an experiment.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrators::{IntegratorSpec, NewtonParams, Scheme};
use crate::models::{
    build_linear_wave, build_sine_gordon, BoundaryCondition, GridSpec, WaveSystem,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    LinearWave,
    SineGordon,
    /// Custom systems are assembled through the library API; the CLI rejects
    /// this kind with a config error.
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    Periodic,
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum ReductionMethod {
    Pod,
    Cotangent,
    ComplexSvd,
    Nlp,
    Deim,
    Sdeim,
}

impl ReductionMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            ReductionMethod::Pod => "pod",
            ReductionMethod::Cotangent => "cotangent",
            ReductionMethod::ComplexSvd => "complex_svd",
            ReductionMethod::Nlp => "nlp",
            ReductionMethod::Deim => "deim",
            ReductionMethod::Sdeim => "sdeim",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    SymplecticEulerQp,
    SymplecticEulerPq,
    ImplicitMidpoint,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub length: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    /// Wave speed (linear wave; sine-Gordon fixes c = 1).
    #[serde(default = "default_c")]
    pub c: f64,
    /// Kink speed |v| < 1 (sine-Gordon).
    #[serde(default = "default_v")]
    pub v: f64,
    /// Kink center at t = 0 (sine-Gordon).
    #[serde(default = "default_x0")]
    pub x0: f64,
    pub boundary: BoundaryKind,
    /// Dirichlet boundary values; default to the kink values (0, 2π).
    #[serde(default)]
    pub dirichlet_left: Option<f64>,
    #[serde(default)]
    pub dirichlet_right: Option<f64>,
}

fn default_c() -> f64 {
    1.0
}
fn default_v() -> f64 {
    0.2
}
fn default_x0() -> f64 {
    10.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationSection {
    pub scheme: SchemeKind,
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_newton_iters")]
    pub newton_max_iters: usize,
}

fn default_newton_tol() -> f64 {
    1e-12
}
fn default_newton_iters() -> usize {
    50
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotSection {
    /// Record every `stride` steps (the snapshot interval is stride·dt).
    pub stride: usize,
    /// Momentum weighting coefficient γ for basis construction.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

fn default_gamma() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReductionSection {
    pub methods: Vec<ReductionMethod>,
    /// Mode counts: POD width k, symplectic widths 2k.
    pub k: Vec<usize>,
    /// Cotangent-lift width for NLP refinement.
    #[serde(default = "default_nlp_r")]
    pub nlp_r: usize,
    /// DEIM interpolation count; 0 means the default (m = k for DEIM; SDEIM
    /// always uses m = 2k).
    #[serde(default)]
    pub deim_m: usize,
}

fn default_nlp_r() -> usize {
    100
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: String,
    #[serde(default)]
    pub emit_svg: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub grid: GridSection,
    pub physics: PhysicsSection,
    pub integration: IntegrationSection,
    pub snapshots: SnapshotSection,
    pub reduction: ReductionSection,
    pub outputs: OutputSection,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.model.kind == ModelKind::Custom {
            return Err(Error::Config(
                "model kind 'custom' is assembled through the library API, not the CLI".into(),
            ));
        }
        GridSpec::new(self.grid.n, self.grid.length).map_err(|e| Error::Config(e.to_string()))?;
        if !(self.integration.dt > 0.0) {
            return Err(Error::Config("integration.dt must be positive".into()));
        }
        if self.integration.t_final < 0.0 {
            return Err(Error::Config(
                "integration.t_final must be nonnegative".into(),
            ));
        }
        crate::integrators::step_count(self.integration.t_final, self.integration.dt)
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.snapshots.stride == 0 {
            return Err(Error::Config("snapshots.stride must be at least 1".into()));
        }
        if !(self.snapshots.gamma > 0.0) {
            return Err(Error::Config("snapshots.gamma must be positive".into()));
        }
        if self.reduction.k.iter().any(|&k| k == 0) {
            return Err(Error::Config("reduction.k entries must be positive".into()));
        }
        if self.model.kind == ModelKind::SineGordon && !(self.physics.v.abs() < 1.0) {
            return Err(Error::Config("sine-Gordon kink speed needs |v| < 1".into()));
        }
        if self.reduction.methods.contains(&ReductionMethod::Nlp) {
            let r = self.reduction.nlp_r;
            if self.reduction.k.iter().any(|&k| k > r) {
                return Err(Error::Config(format!(
                    "nlp refinement needs k <= nlp_r = {r} for every k in the sweep"
                )));
            }
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec::new(self.grid.n, self.grid.length).expect("validated")
    }

    pub fn boundary_condition(&self) -> BoundaryCondition {
        match self.physics.boundary {
            BoundaryKind::Periodic => BoundaryCondition::Periodic,
            BoundaryKind::Neumann => BoundaryCondition::Neumann,
            BoundaryKind::Dirichlet => BoundaryCondition::Dirichlet {
                left: self.physics.dirichlet_left.unwrap_or(0.0),
                right: self
                    .physics
                    .dirichlet_right
                    .unwrap_or(2.0 * std::f64::consts::PI),
            },
        }
    }

    pub fn build_system(&self) -> Result<Arc<WaveSystem>> {
        let grid = self.grid_spec();
        let bc = self.boundary_condition();
        let system = match self.model.kind {
            ModelKind::LinearWave => build_linear_wave(grid, self.physics.c, bc)?,
            ModelKind::SineGordon => build_sine_gordon(grid, bc)?,
            ModelKind::Custom => {
                return Err(Error::Config(
                    "custom models are not CLI-constructible".into(),
                ))
            }
        };
        Ok(Arc::new(system))
    }

    pub fn integrator_spec(&self) -> IntegratorSpec {
        let scheme = match self.integration.scheme {
            SchemeKind::SymplecticEulerQp => Scheme::SymplecticEulerQp,
            SchemeKind::SymplecticEulerPq => Scheme::SymplecticEulerPq,
            SchemeKind::ImplicitMidpoint => Scheme::ImplicitMidpoint,
        };
        IntegratorSpec {
            scheme,
            dt: self.integration.dt,
            newton: NewtonParams {
                tol: self.integration.newton_tol,
                max_iters: self.integration.newton_max_iters,
            },
        }
    }

    pub fn steps(&self) -> usize {
        crate::integrators::step_count(self.integration.t_final, self.integration.dt)
            .expect("validated")
    }

    /// Initial state per model: the spline bump for the linear wave, the
    /// kink for sine-Gordon.
    pub fn initial_state(&self, system: &WaveSystem) -> Result<nalgebra::DVector<f64>> {
        match self.model.kind {
            ModelKind::LinearWave => Ok(crate::models::spline_bump_initial(system.grid())),
            ModelKind::SineGordon => {
                crate::models::kink_state(system.grid(), 0.0, self.physics.v, self.physics.x0)
            }
            ModelKind::Custom => Err(Error::Config(
                "custom models are not CLI-constructible".into(),
            )),
        }
    }

    /// The linear-wave benchmark parameter set.
    pub fn linear_wave_benchmark() -> Self {
        ExperimentConfig {
            model: ModelSection {
                kind: ModelKind::LinearWave,
            },
            grid: GridSection {
                n: 500,
                length: 1.0,
            },
            physics: PhysicsSection {
                c: 0.1,
                v: 0.0,
                x0: 0.0,
                boundary: BoundaryKind::Periodic,
                dirichlet_left: None,
                dirichlet_right: None,
            },
            integration: IntegrationSection {
                scheme: SchemeKind::ImplicitMidpoint,
                dt: 0.01,
                t_final: 50.0,
                newton_tol: 1e-12,
                newton_max_iters: 50,
            },
            snapshots: SnapshotSection {
                stride: 50,
                gamma: 0.01,
            },
            reduction: ReductionSection {
                methods: vec![
                    ReductionMethod::Pod,
                    ReductionMethod::Cotangent,
                    ReductionMethod::ComplexSvd,
                ],
                k: (1..=8).map(|i| 10 * i).collect(),
                nlp_r: 100,
                deim_m: 0,
            },
            outputs: OutputSection {
                directory: "out/linear_wave".into(),
                emit_svg: false,
            },
            seed: 7,
        }
    }

    /// The sine-Gordon kink benchmark parameter set.
    pub fn sine_gordon_benchmark() -> Self {
        ExperimentConfig {
            model: ModelSection {
                kind: ModelKind::SineGordon,
            },
            grid: GridSection {
                n: 2000,
                length: 50.0,
            },
            physics: PhysicsSection {
                c: 1.0,
                v: 0.2,
                x0: 10.0,
                boundary: BoundaryKind::Dirichlet,
                dirichlet_left: Some(0.0),
                dirichlet_right: Some(2.0 * std::f64::consts::PI),
            },
            integration: IntegrationSection {
                scheme: SchemeKind::ImplicitMidpoint,
                dt: 0.0125,
                t_final: 150.0,
                newton_tol: 1e-12,
                newton_max_iters: 50,
            },
            snapshots: SnapshotSection {
                stride: 10,
                gamma: 1.0,
            },
            reduction: ReductionSection {
                methods: vec![
                    ReductionMethod::Pod,
                    ReductionMethod::Deim,
                    ReductionMethod::Sdeim,
                ],
                k: (2..=10).map(|i| 20 * i).collect(),
                nlp_r: 100,
                deim_m: 0,
            },
            outputs: OutputSection {
                directory: "out/sine_gordon".into(),
                emit_svg: false,
            },
            seed: 7,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        ExperimentConfig::linear_wave_benchmark().validate().unwrap();
        ExperimentConfig::sine_gordon_benchmark().validate().unwrap();
    }

    #[test]
    fn toml_round_trip() {
        let config = ExperimentConfig::linear_wave_benchmark();
        let text = config.to_toml_string().unwrap();
        let back = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(back.grid.n, 500);
        assert_eq!(back.snapshots.stride, 50);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let config = ExperimentConfig::linear_wave_benchmark();
        let mut text = config.to_toml_string().unwrap();
        text.push_str("\n[grid2]\nn = 4\n");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
        let typo = text.replace(
            "[snapshots]\nstride = 50",
            "[snapshots]\nstride = 50\nstrid = 2",
        );
        assert!(ExperimentConfig::from_toml_str(&typo).is_err());
    }

    #[test]
    fn custom_kind_is_a_config_error() {
        let mut config = ExperimentConfig::linear_wave_benchmark();
        config.model.kind = ModelKind::Custom;
        match config.validate() {
            Err(Error::Config(_)) => {}
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn timestep_must_divide_final_time() {
        let mut config = ExperimentConfig::linear_wave_benchmark();
        config.integration.t_final = 50.003;
        assert!(config.validate().is_err());
    }

    #[test]
    fn snapshot_counts_match_benchmark_sampling() {
        let lw = ExperimentConfig::linear_wave_benchmark();
        assert_eq!(lw.steps(), 5000);
        assert_eq!(lw.steps() / lw.snapshots.stride + 1, 101);
        let sg = ExperimentConfig::sine_gordon_benchmark();
        assert_eq!(sg.steps(), 12000);
        assert_eq!(sg.steps() / sg.snapshots.stride + 1, 1201);
    }
}
