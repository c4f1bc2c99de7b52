//! Benchmark configurations and their TOML form.

use serde::{Deserialize, Serialize};

use crate::context::{IterationControl, SplitKind};
use crate::error::{Error, Result};
use crate::grid::{BoundarySpec, BoundaryState, Grid1D};
use crate::integrator::{TimeControl, TimeScheme};
use crate::physics::{CoefficientModel, PhysicalParams, PulseShape, SourceSpec, SourceTarget};
use crate::spatial::ReconstructionMode;

pub const BUILTIN_NAMES: [&str; 5] = ["ap_test", "homog_1", "homog_2", "marshak_nocond", "marshak_cond"];

/// Equilibrium initial temperature `T(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialProfile {
    Uniform {
        t: f64,
    },
    /// `mean + amplitude * sin(wavenumber * pi * x)`.
    Sine {
        mean: f64,
        amplitude: f64,
        wavenumber: f64,
    },
}

impl InitialProfile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            InitialProfile::Uniform { t } => t,
            InitialProfile::Sine {
                mean,
                amplitude,
                wavenumber,
            } => mean + amplitude * (wavenumber * std::f64::consts::PI * x).sin(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[default]
    Pn,
    Sn,
    DiffusionRef,
    NaiveSplit,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Pn => "pn",
            SolverKind::Sn => "sn",
            SolverKind::DiffusionRef => "diffusion_ref",
            SolverKind::NaiveSplit => "naive_split",
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pn" => Ok(SolverKind::Pn),
            "sn" => Ok(SolverKind::Sn),
            "diffusion_ref" => Ok(SolverKind::DiffusionRef),
            "naive_split" => Ok(SolverKind::NaiveSplit),
            _ => Err(Error::Config(format!(
                "unknown solver '{s}', expected one of pn, sn, diffusion_ref, naive_split"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default = "default_precision")]
    pub precision: usize,
    /// Emit `psi_0..psi_M` columns in profiles.
    #[serde(default = "default_true")]
    pub moments: bool,
}

fn default_precision() -> usize {
    17
}

fn default_true() -> bool {
    true
}

fn default_directions() -> usize {
    8
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: None,
            precision: default_precision(),
            moments: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub grid: Grid1D,
    pub time: TimeControl,
    pub boundary: BoundarySpec,
    pub physics: PhysicalParams,
    pub initial: InitialProfile,
    /// Highest moment order `M`.
    pub moments: usize,
    #[serde(default)]
    pub reconstruction: ReconstructionMode,
    #[serde(default)]
    pub solver: SolverKind,
    #[serde(default)]
    pub scheme: TimeScheme,
    #[serde(default)]
    pub iteration: IterationControl,
    /// Gauss-Legendre directions of the discrete-ordinates solver.
    #[serde(default = "default_directions")]
    pub directions: usize,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.time.validate()?;
        self.boundary.validate()?;
        self.physics.validate()?;
        self.iteration.validate()?;
        if self.moments < 1 {
            return Err(Error::Config("moments (M) must be at least 1".into()));
        }
        if self.directions < 2 || !self.directions.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "directions must be even and at least 2, got {}",
                self.directions
            )));
        }
        if !(1..=17).contains(&self.output.precision) {
            return Err(Error::Config("output precision must be 1..=17 digits".into()));
        }
        if self.solver == SolverKind::DiffusionRef && !self.physics.sources.is_empty() {
            return Err(Error::Config("diffusion_ref does not support sources".into()));
        }
        let grid = self.grid;
        for j in 0..grid.n {
            let t = self.initial.eval(grid.center(j));
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!(
                    "initial temperature {t} at x = {} is not positive",
                    grid.center(j)
                )));
            }
        }
        Ok(())
    }

    pub fn split(&self) -> SplitKind {
        match self.solver {
            SolverKind::NaiveSplit => SplitKind::Naive,
            _ => SplitKind::AsymptoticPreserving,
        }
    }

    /// Nominal time step.
    pub fn dt(&self) -> f64 {
        let dx = (self.grid.x_max - self.grid.x_min) / self.grid.n as f64;
        self.time.step(dx, self.physics.c)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Replaces the coupling model by the constant `kappa`.
    pub fn set_kappa(&mut self, kappa: f64) {
        self.physics.kappa = CoefficientModel::constant(kappa);
    }
}

fn pulse(target: SourceTarget) -> SourceSpec {
    SourceSpec {
        target,
        amplitude: 25.06628,
        t_w: 1.0,
        t_c: 1.0,
        rho_bar: 3.0,
        shape: PulseShape::Gaussian,
    }
}

fn homogeneous(name: &str, physics: PhysicalParams) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        grid: Grid1D {
            x_min: 0.0,
            x_max: 1.0,
            n: Grid1D::MIN_CELLS,
        },
        time: TimeControl {
            cfl: 0.1,
            dt: Some(0.0025),
            t_end: 20.0,
            snapshots: vec![],
        },
        boundary: BoundarySpec::Periodic,
        physics,
        initial: InitialProfile::Uniform { t: 2.52487e-5 },
        moments: 7,
        reconstruction: ReconstructionMode::Constant,
        solver: SolverKind::Pn,
        scheme: TimeScheme::BackwardEuler,
        iteration: IterationControl::default(),
        directions: 8,
        output: OutputSpec::default(),
    }
}

fn marshak(name: &str, physics: PhysicalParams, t_end: f64, snapshots: Vec<f64>) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        grid: Grid1D {
            x_min: 0.0,
            x_max: 0.5,
            n: 200,
        },
        time: TimeControl {
            cfl: 0.8,
            dt: None,
            t_end,
            snapshots,
        },
        boundary: BoundarySpec::Inflow {
            left: BoundaryState::equilibrium(1.0),
            right: BoundaryState::equilibrium(1e-6),
        },
        physics,
        initial: InitialProfile::Uniform { t: 1e-6 },
        moments: 7,
        reconstruction: ReconstructionMode::LinearMinmod,
        solver: SolverKind::Pn,
        scheme: TimeScheme::BackwardEuler,
        iteration: IterationControl::default(),
        directions: 8,
        output: OutputSpec::default(),
    }
}

/// Published benchmark parameter sets.
pub fn builtin(name: &str) -> Result<ScenarioConfig> {
    let cfg = match name {
        "ap_test" => ScenarioConfig {
            name: name.into(),
            grid: Grid1D {
                x_min: 0.0,
                x_max: 2.0,
                n: 200,
            },
            time: TimeControl {
                cfl: 0.1,
                dt: None,
                t_end: 0.1,
                snapshots: vec![],
            },
            boundary: BoundarySpec::Periodic,
            physics: PhysicalParams {
                epsilon: 1.0,
                c: 1.0,
                a: 1.0,
                kappa: CoefficientModel::constant(1.0),
                cve: CoefficientModel::constant(0.1),
                cvi: CoefficientModel::constant(0.2),
                ke: 0.01,
                ki: 0.02,
                opacity: CoefficientModel::constant(10.0),
                sources: vec![],
            },
            initial: InitialProfile::Sine {
                mean: 0.75,
                amplitude: 0.25,
                wavenumber: 1.0,
            },
            moments: 7,
            reconstruction: ReconstructionMode::Constant,
            solver: SolverKind::Pn,
            scheme: TimeScheme::BackwardEuler,
            iteration: IterationControl::default(),
            directions: 8,
            output: OutputSpec::default(),
        },
        "homog_1" => {
            let (c, rho_bar, tau) = (29.979, 3.0, 0.1);
            let cve = 0.1 * rho_bar;
            homogeneous(
                name,
                PhysicalParams {
                    epsilon: 1.0,
                    c,
                    a: 0.01372,
                    kappa: CoefficientModel::constant(cve / (c * tau)),
                    cve: CoefficientModel::constant(cve),
                    cvi: CoefficientModel::constant(0.05 * rho_bar),
                    ke: 0.0,
                    ki: 0.0,
                    opacity: CoefficientModel::power_law(0.5, -2.0),
                    sources: vec![pulse(SourceTarget::Ion)],
                },
            )
        }
        "homog_2" => homogeneous(
            name,
            PhysicalParams {
                epsilon: 1.0,
                c: 29.979,
                a: 0.01372,
                kappa: CoefficientModel::power_law(0.01379, -0.5),
                cve: CoefficientModel::power_law(0.3, 1.0),
                cvi: CoefficientModel::constant(0.15),
                ke: 0.0,
                ki: 0.0,
                opacity: CoefficientModel::power_law(0.5, -2.0),
                sources: vec![pulse(SourceTarget::Radiation)],
            },
        ),
        "marshak_nocond" => marshak(
            name,
            PhysicalParams {
                epsilon: 1.0,
                c: 299.79,
                a: 0.01372,
                kappa: CoefficientModel::constant(1.0),
                cve: CoefficientModel::constant(0.03),
                cvi: CoefficientModel::constant(0.27),
                ke: 0.0,
                ki: 0.0,
                opacity: CoefficientModel::power_law(300.0, -3.0),
                sources: vec![],
            },
            0.74,
            vec![0.074, 0.37, 0.74],
        ),
        "marshak_cond" => marshak(
            name,
            PhysicalParams {
                epsilon: 1.0,
                c: 29.979,
                a: 0.01372,
                kappa: CoefficientModel::constant(1.0),
                cve: CoefficientModel::constant(0.3),
                cvi: CoefficientModel::constant(0.27),
                ke: 1.0,
                ki: 0.1,
                opacity: CoefficientModel::power_law(300.0, -3.0),
                sources: vec![],
            },
            0.1,
            vec![0.01, 0.05, 0.1],
        ),
        _ => {
            return Err(Error::Config(format!(
                "unknown scenario '{name}', expected one of {}",
                BUILTIN_NAMES.join(", ")
            )))
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_examples() {
        assert_eq!(builtin("marshak_nocond").unwrap().physics.c, 299.79);
        let h = builtin("homog_1").unwrap();
        let k = h.physics.kappa.eval(0.0, 1.0);
        assert!((k - 0.3 / (29.979 * 0.1)).abs() < 1e-15);
        assert!(!h.physics.kappa.is_temperature_dependent());
        let ap = builtin("ap_test").unwrap();
        assert!((ap.initial.eval(0.5) - 1.0).abs() < 1e-15);
        assert_eq!(ap.moments, 7);
        let h2 = builtin("homog_2").unwrap();
        assert!((h2.physics.cve.eval(0.0, 2.0) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn unknown_builtin_lists_names() {
        let msg = builtin("marshak").unwrap_err().to_string();
        for n in BUILTIN_NAMES {
            assert!(msg.contains(n));
        }
    }

    #[test]
    fn toml_round_trip() {
        for name in BUILTIN_NAMES {
            let cfg = builtin(name).unwrap();
            let text = cfg.to_toml().unwrap();
            assert_eq!(ScenarioConfig::from_toml(&text).unwrap(), cfg, "{name}");
        }
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let text = builtin("ap_test").unwrap().to_toml().unwrap();
        assert!(ScenarioConfig::from_toml(&text.replace("moments = 7", "moments = 7\nbogus = 1")).is_err());
        let mut cfg = builtin("marshak_cond").unwrap();
        cfg.initial = InitialProfile::Uniform { t: -1.0 };
        assert!(cfg.validate().is_err());
        let mut cfg = builtin("ap_test").unwrap();
        cfg.directions = 3;
        assert!(cfg.validate().is_err());
        let inflow_missing = text.replace("kind = \"periodic\"", "kind = \"inflow\"");
        assert!(ScenarioConfig::from_toml(&inflow_missing).is_err());
        assert!("pm".parse::<SolverKind>().is_err());
        assert_eq!(
            "naive_split".parse::<SolverKind>().unwrap(),
            SolverKind::NaiveSplit
        );
    }
}
