//! JSON run configuration.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use westervelt_core::{
    assemble_coefficient, CoefficientField, DecayObservable, Domain, Field, FitMethod, Grid, Model,
    NormSpec, PhysicalParams, Scheme, SchemeConfig, StateVector,
};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub params: ParamsConfig,
    pub domain: Domain,
    pub grid: GridConfig,
    pub initial: InitialConfig,
    pub scheme: SchemeSection,
    pub norm: NormConfig,
    pub fit: FitConfig,
    pub spectrum: SpectrumConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
    /// Seed for randomized right-hand sides.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ParamsConfig::default(),
            domain: Domain::Interval { length: PI },
            grid: GridConfig::default(),
            initial: InitialConfig::default(),
            scheme: SchemeSection::default(),
            norm: NormConfig::default(),
            fit: FitConfig::default(),
            spectrum: SpectrumConfig::default(),
            sweep: SweepConfig::default(),
            output: OutputConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    pub c: f64,
    pub b: f64,
    pub k: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        ParamsConfig {
            c: 1.0,
            b: 1.0,
            k: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Interior points per axis.
    pub n_per_axis: Vec<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n_per_axis: vec![100],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    /// `u₀ = u0_amplitude·φ`, `u₁ = u1_amplitude·φ` with the sine mode
    /// `φ = Π sin(j_i π x_i / L_i)`.
    Mode {
        #[serde(default = "first_mode")]
        mode: Vec<usize>,
        #[serde(default)]
        u0_amplitude: f64,
        #[serde(default)]
        u1_amplitude: f64,
    },
    /// Nodal values read from a JSON file `{"u0": [...], "u1": [...]}`;
    /// relative paths resolve against the config file.
    File { path: PathBuf },
}

fn first_mode() -> Vec<usize> {
    vec![1]
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig::Mode {
            mode: first_mode(),
            u0_amplitude: 1e-3,
            u1_amplitude: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodalFile {
    pub u0: Vec<f64>,
    #[serde(default)]
    pub u1: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeSection {
    pub kind: Scheme,
    pub model: Model,
    /// `min(1e-3, 0.1/λ₀)` when absent.
    pub dt: Option<f64>,
    pub t_end: f64,
    pub linear_solve_tol: f64,
    /// `0.9/(2k)` when absent.
    pub parabolicity_margin: Option<f64>,
    pub record_every: usize,
}

impl Default for SchemeSection {
    fn default() -> Self {
        SchemeSection {
            kind: Scheme::SemiImplicitEuler,
            model: Model::Quasilinear,
            dt: None,
            t_end: 20.0,
            linear_solve_tol: 1e-10,
            parabolicity_margin: None,
            record_every: 10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormConfig {
    pub p: f64,
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig { p: 2.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    /// Combined `p`-norm when absent.
    pub observable: Option<DecayObservable>,
    pub window_fraction: f64,
    /// Chosen from the regime of the first discrete mode when absent.
    pub method: Option<FitMethod>,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            observable: None,
            window_fraction: 0.5,
            method: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientConfig {
    /// `a ≡ value`.
    Uniform {
        #[serde(default = "one")]
        value: f64,
    },
    /// `a = 1/(1 − 2k u₀)` from the initial displacement.
    Initial,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub n_modes: usize,
    pub coefficient: CoefficientConfig,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            n_modes: 10,
            coefficient: CoefficientConfig::Uniform { value: 1.0 },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Amplitudes of `u₀`, each replacing the configured one.
    pub amplitudes: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            amplitudes: vec![1e-3, 1e-2, 1e-1, 0.3, 0.45, 0.6],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Overridden by `--out`.
    pub dir: Option<PathBuf>,
    pub spectrum: String,
    pub resolvent: String,
    pub trajectory: String,
    pub summary: String,
    pub decay: String,
    pub sweep: String,
    pub sweep_report: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: None,
            spectrum: "spectrum.json".into(),
            resolvent: "resolvent.json".into(),
            trajectory: "trajectory.csv".into(),
            summary: "summary.json".into(),
            decay: "decay.json".into(),
            sweep: "sweep.csv".into(),
            sweep_report: "sweep.json".into(),
        }
    }
}

/// A validated configuration together with everything derived from it.
#[derive(Clone, Debug)]
pub struct Setup {
    pub config: RunConfig,
    pub params: PhysicalParams,
    pub grid: Grid,
    pub v0: StateVector,
    /// The `u₀` scale that sweep amplitudes replace.
    pub reference_amplitude: f64,
}

impl RunConfig {
    /// Parses JSON, naming the offending field on failure.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("field `{path}`: {}", e.into_inner()))
        })
    }

    pub fn load(path: &Path) -> Result<(Self, String), CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Ok((Self::from_json(&text)?, text))
    }

    pub fn physical_params(&self) -> Result<PhysicalParams, CliError> {
        let p = self.params;
        PhysicalParams::new(p.c, p.b, p.k).map_err(CliError::from)
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        Grid::new(self.domain, &self.grid.n_per_axis).map_err(CliError::from)
    }

    pub fn scheme_config(
        &self,
        params: &PhysicalParams,
        lambda0: f64,
    ) -> Result<SchemeConfig, CliError> {
        let s = &self.scheme;
        let mut cfg = SchemeConfig::new(
            params,
            s.dt.unwrap_or(SchemeConfig::default_dt(lambda0)),
            s.t_end,
        )
        .with_scheme(s.kind)
        .with_model(s.model);
        cfg.linear_solve_tol = s.linear_solve_tol;
        if let Some(m) = s.parabolicity_margin {
            cfg.parabolicity_margin = m;
        }
        cfg.record_every = s.record_every;
        cfg.norm_p = self.norm.p;
        cfg.validate(params)?;
        Ok(cfg)
    }

    /// Fit observable, defaulting to the combined norm with the configured `p`.
    pub fn observable(&self) -> Result<DecayObservable, CliError> {
        let obs = self
            .fit
            .observable
            .unwrap_or(DecayObservable::Combined { p: self.norm.p });
        let p = match obs {
            DecayObservable::U { spec } | DecayObservable::Ut { spec } => spec.p,
            DecayObservable::Combined { p } => p,
        };
        NormSpec::new(p, westervelt_core::NormKind::Lp)?;
        Ok(obs)
    }

    /// Validates every section and builds the grid and initial state.
    /// `base` is the directory relative file paths resolve against.
    pub fn setup(&self, base: &Path) -> Result<Setup, CliError> {
        let params = self.physical_params()?;
        let grid = self.grid()?;
        NormSpec::new(self.norm.p, westervelt_core::NormKind::Lp)?;
        if let Some(m) = self.scheme.parabolicity_margin {
            if !(m > 0.0 && m < params.parabolicity_bound()) {
                return Err(CliError::Config(format!(
                    "field `scheme.parabolicity_margin`: {m} must lie in (0, 1/(2k)) = (0, {})",
                    params.parabolicity_bound()
                )));
            }
        }
        if !(self.fit.window_fraction > 0.0 && self.fit.window_fraction <= 1.0) {
            return Err(CliError::Config(
                "field `fit.window_fraction`: must lie in (0, 1]".into(),
            ));
        }
        self.observable()?;
        let (v0, reference_amplitude) = self.initial_state(&grid, base)?;
        Ok(Setup {
            config: self.clone(),
            params,
            grid,
            v0,
            reference_amplitude,
        })
    }

    fn initial_state(&self, grid: &Grid, base: &Path) -> Result<(StateVector, f64), CliError> {
        match &self.initial {
            InitialConfig::Mode {
                mode,
                u0_amplitude,
                u1_amplitude,
            } => {
                if mode.len() != grid.dim() || mode.contains(&0) {
                    return Err(CliError::Config(format!(
                        "field `initial.mode`: expected {} positive indices",
                        grid.dim()
                    )));
                }
                let lengths = grid.domain().lengths();
                let phi = grid.sample(|x, y| {
                    let sx = (mode[0] as f64 * PI * x / lengths[0]).sin();
                    if mode.len() == 2 {
                        sx * (mode[1] as f64 * PI * y / lengths[1]).sin()
                    } else {
                        sx
                    }
                });
                let v0 = StateVector::new(phi.scaled(*u0_amplitude), phi.scaled(*u1_amplitude))?;
                Ok((v0, *u0_amplitude))
            }
            InitialConfig::File { path } => {
                let path = if path.is_absolute() {
                    path.clone()
                } else {
                    base.join(path)
                };
                let text = fs::read_to_string(&path).map_err(|e| {
                    CliError::Config(format!(
                        "field `initial.path`: cannot read {}: {e}",
                        path.display()
                    ))
                })?;
                let de = &mut serde_json::Deserializer::from_str(&text);
                let nodal: NodalFile = serde_path_to_error::deserialize(de).map_err(|e| {
                    CliError::Config(format!(
                        "{}: field `{}`: {}",
                        path.display(),
                        e.path(),
                        e.inner()
                    ))
                })?;
                let u1 = nodal.u1.unwrap_or_else(|| vec![0.0; nodal.u0.len()]);
                for (name, v) in [("u0", &nodal.u0), ("u1", &u1)] {
                    if v.len() != grid.len() {
                        return Err(CliError::Config(format!(
                            "{}: `{name}` has {} values, the grid has {}",
                            path.display(),
                            v.len(),
                            grid.len()
                        )));
                    }
                }
                let v0 = StateVector::new(Field::from_vec(nodal.u0), Field::from_vec(u1))?;
                let scale = v0.v1.max_abs().1;
                Ok((v0, scale))
            }
        }
    }
}

impl Setup {
    /// Coefficient used for the spectrum and resolvent subcommands.
    pub fn coefficient(&self) -> Result<CoefficientField, CliError> {
        match self.config.spectrum.coefficient {
            CoefficientConfig::Uniform { value } => {
                Ok(CoefficientField::uniform(self.grid.len(), value)?)
            }
            CoefficientConfig::Initial => {
                let margin = self
                    .config
                    .scheme
                    .parabolicity_margin
                    .unwrap_or(0.9 * self.params.parabolicity_bound());
                Ok(assemble_coefficient(&self.v0.v1, &self.params, margin)?)
            }
        }
    }

    /// Initial state rescaled so that its `u₀` scale is 1.
    pub fn sweep_shape(&self) -> Result<StateVector, CliError> {
        if self.reference_amplitude == 0.0 {
            return Err(CliError::Config(
                "field `initial`: a sweep needs non-zero initial displacement to scale".into(),
            ));
        }
        Ok(self.v0.scaled(1.0 / self.reference_amplitude))
    }
}
