//! Subcommand implementations.

use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use westervelt_core::grid::LAMBDA1_TOL;
use westervelt_core::operators::RESOLVENT_RESIDUAL_TOL;
use westervelt_core::{
    analytic_eigenpairs, block_spectrum, build_dirichlet_laplacian, fit_decay_rate, lambda1,
    lambda_pair, simulate, spectral_bound, sweep_row, validate_amplitudes, BlockOperator,
    Complex64, DecayFit, DecayObservable, Field, FitMethod, FitSettings, Model, Resolvent, Scheme,
    SchemeConfig, SparseOperator, SpectralReport, StateVector, SweepReport, SweepRow, Termination,
    Trajectory,
};

use crate::config::{CoefficientConfig, RunConfig, Setup};
use crate::error::CliError;
use crate::output::{sha256_hex, sweep_csv, to_json, trajectory_csv, write_report};

/// Everything a subcommand needs besides its own arguments.
pub struct Context {
    pub setup: Setup,
    pub lap: SparseOperator,
    pub config_sha256: String,
    pub out_dir: PathBuf,
}

impl Context {
    /// Loads and validates a config file; `out` overrides `output.dir`.
    pub fn load(config: &Path, out: Option<&Path>) -> Result<Self, CliError> {
        let (cfg, text) = RunConfig::load(config)?;
        let base = config.parent().unwrap_or(Path::new("."));
        Self::from_config(cfg, &text, base, out)
    }

    pub fn from_config(
        cfg: RunConfig,
        text: &str,
        base: &Path,
        out: Option<&Path>,
    ) -> Result<Self, CliError> {
        if cfg.norm.p == 1.5 {
            warn!("p = 3/2: the trace surrogate is used unchanged; the continuous trace space differs at this exponent");
        }
        let setup = cfg.setup(base)?;
        let lap = build_dirichlet_laplacian(&setup.grid);
        let out_dir = match (out, &cfg.output.dir) {
            (Some(o), _) => o.to_path_buf(),
            (None, Some(d)) if d.is_absolute() => d.clone(),
            (None, Some(d)) => base.join(d),
            (None, None) => PathBuf::from("."),
        };
        Ok(Context {
            setup,
            lap,
            config_sha256: sha256_hex(text),
            out_dir,
        })
    }

    fn config(&self) -> &RunConfig {
        &self.setup.config
    }

    fn write(&self, name: &str, contents: &str, command: &str) -> Result<PathBuf, CliError> {
        let path = self.out_dir.join(name);
        write_report(&path, contents, command, &self.config_sha256)?;
        info!("wrote {}", path.display());
        Ok(path)
    }

    /// `λ₁(L)` and `λ₀` of the linearization at rest (`a ≡ 1`).
    fn rest_spectrum(&self) -> Result<(f64, f64), CliError> {
        let l1 = lambda1(&self.lap, None, LAMBDA1_TOL)?;
        Ok((l1, spectral_bound(l1, &self.setup.params)))
    }

    fn scheme_config(&self) -> Result<SchemeConfig, CliError> {
        let (_, l0) = self.rest_spectrum()?;
        self.config().scheme_config(&self.setup.params, l0)
    }

    fn fit_settings(&self) -> Result<FitSettings, CliError> {
        let fit = &self.config().fit;
        let method = match fit.method {
            Some(m) => m,
            None => {
                let (l1, _) = self.rest_spectrum()?;
                FitMethod::for_regime(lambda_pair(l1, &self.setup.params).regime)
            }
        };
        Ok(FitSettings {
            observable: self.config().observable()?,
            window_fraction: fit.window_fraction,
            method,
        })
    }
}

pub fn spectrum(ctx: &Context) -> Result<SpectralReport, CliError> {
    let coeff = ctx.setup.coefficient()?;
    let mut report = block_spectrum(
        &coeff,
        &ctx.lap,
        &ctx.setup.params,
        ctx.config().spectrum.n_modes,
    )?;
    if let CoefficientConfig::Uniform { value } = ctx.config().spectrum.coefficient {
        let continuum = analytic_eigenpairs(&ctx.setup.grid, 1)?[0].eigenvalue;
        report.lambda1_a_continuum = Some(value * continuum);
    }
    ctx.write(&ctx.config().output.spectrum, &to_json(&report), "spectrum")?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventReport {
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub n: usize,
    pub seed: u64,
    /// `‖(λ − 𝒜_h)v − f‖ / ‖f‖`.
    pub relative_residual: f64,
    pub tolerance: f64,
    /// See [`Resolvent::conditioning`].
    pub conditioning: f64,
    pub solution_norm: f64,
}

/// Seeded right-hand side with entries uniform in the unit square.
pub fn random_rhs(n: usize, seed: u64) -> StateVector<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> Field<Complex64> {
        Field::from_vec(
            (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        )
    };
    let v1 = draw();
    let v2 = draw();
    StateVector { v1, v2 }
}

pub fn resolvent(ctx: &Context, lambda: Complex64) -> Result<ResolventReport, CliError> {
    let coeff = ctx.setup.coefficient()?;
    let op = BlockOperator::new(&ctx.lap, &coeff, ctx.setup.params)?;
    let res = Resolvent::new(lambda, op)?;
    let rhs = random_rhs(ctx.setup.grid.len(), ctx.config().seed);
    let v = res.apply(&rhs)?;
    let norm = |f: &Field<Complex64>| f.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let report = ResolventReport {
        lambda_re: lambda.re,
        lambda_im: lambda.im,
        n: ctx.setup.grid.len(),
        seed: ctx.config().seed,
        relative_residual: res.relative_residual(&v, &rhs)?,
        tolerance: RESOLVENT_RESIDUAL_TOL,
        conditioning: res.conditioning(),
        solution_norm: (norm(&v.v1) + norm(&v.v2)).sqrt(),
    };
    ctx.write(
        &ctx.config().output.resolvent,
        &to_json(&report),
        "resolvent",
    )?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub termination: Termination,
    pub scheme: Scheme,
    pub model: Model,
    pub dt: f64,
    pub t_end: f64,
    pub t_final: f64,
    pub samples: usize,
    pub parabolicity_margin: f64,
    pub max_abs_u: f64,
    pub min_coeff_a: f64,
    pub lambda0: f64,
    pub config_sha256: String,
}

fn run(ctx: &Context) -> Result<(Trajectory, SchemeConfig, f64, f64), CliError> {
    let cfg = ctx.scheme_config()?;
    let (l1, l0) = ctx.rest_spectrum()?;
    info!("simulating {} steps of dt = {}", cfg.n_steps(), cfg.dt);
    let traj = simulate(
        &ctx.setup.v0,
        &cfg,
        &ctx.setup.grid,
        &ctx.lap,
        &ctx.setup.params,
    )?;
    Ok((traj, cfg, l1, l0))
}

fn violation(traj: &Trajectory) -> Option<CliError> {
    match traj.status {
        Termination::ParabolicityViolation { t, node, value } => {
            Some(CliError::Parabolicity { t, node, value })
        }
        Termination::Completed => None,
    }
}

/// Writes the trajectory CSV and summary; a violation is reported as an
/// error after both files are written.
pub fn simulate_cmd(ctx: &Context) -> Result<(Trajectory, SimulationSummary), CliError> {
    let (traj, cfg, _, l0) = run(ctx)?;
    let summary = SimulationSummary {
        termination: traj.status,
        scheme: cfg.scheme,
        model: cfg.model,
        dt: cfg.dt,
        t_end: cfg.t_end,
        t_final: traj.times.last().copied().unwrap_or(0.0),
        samples: traj.times.len(),
        parabolicity_margin: cfg.parabolicity_margin,
        max_abs_u: traj.records.iter().map(|r| r.max_abs_u).fold(0.0, f64::max),
        min_coeff_a: traj
            .records
            .iter()
            .map(|r| r.min_coeff_a)
            .fold(f64::INFINITY, f64::min),
        lambda0: l0,
        config_sha256: ctx.config_sha256.clone(),
    };
    ctx.write(
        &ctx.config().output.trajectory,
        &trajectory_csv(&traj.records),
        "simulate",
    )?;
    ctx.write(&ctx.config().output.summary, &to_json(&summary), "simulate")?;
    match violation(&traj) {
        Some(e) => Err(e),
        None => Ok((traj, summary)),
    }
}

/// Rates the fitted one is compared with.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReferences {
    /// `Re λ₋(a₁ʰ)`, the slowest linearized modal rate.
    pub re_lambda_minus_a1: f64,
    /// `min{(b/2)λ₁, c²/b}` from the discrete `λ₁`.
    pub lambda0: f64,
    #[serde(rename = "lambda1_A")]
    pub lambda1_a: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub termination: Termination,
    pub observable: DecayObservable,
    /// Absent when the run left the parabolic regime.
    pub fit: Option<DecayFit>,
    pub references: DecayReferences,
    pub config_sha256: String,
}

pub fn decay(ctx: &Context) -> Result<DecayReport, CliError> {
    let (traj, _, l1, l0) = run(ctx)?;
    let settings = ctx.fit_settings()?;
    let fit = match traj.status {
        Termination::Completed => Some(fit_decay_rate(
            &traj,
            &settings.observable,
            &ctx.setup.grid,
            &ctx.lap,
            settings.window_fraction,
            settings.method,
        )?),
        Termination::ParabolicityViolation { .. } => None,
    };
    let report = DecayReport {
        termination: traj.status,
        observable: settings.observable,
        fit,
        references: DecayReferences {
            re_lambda_minus_a1: lambda_pair(l1, &ctx.setup.params).re_minus,
            lambda0: l0,
            lambda1_a: l1,
        },
        config_sha256: ctx.config_sha256.clone(),
    };
    ctx.write(&ctx.config().output.decay, &to_json(&report), "decay")?;
    match violation(&traj) {
        Some(e) => Err(e),
        None => Ok(report),
    }
}

/// Runs the sweep rows on up to `jobs` threads; rows keep amplitude order.
pub fn sweep(ctx: &Context, jobs: Option<NonZeroUsize>) -> Result<SweepReport, CliError> {
    let amplitudes = &ctx.config().sweep.amplitudes;
    validate_amplitudes(amplitudes)?;
    let shape = ctx.setup.sweep_shape()?;
    let cfg = ctx.scheme_config()?;
    let fit = ctx.fit_settings()?;
    let jobs = jobs
        .or_else(|| thread::available_parallelism().ok())
        .map_or(1, NonZeroUsize::get)
        .min(amplitudes.len());
    info!("sweeping {} amplitudes on {jobs} threads", amplitudes.len());

    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<SweepRow, westervelt_core::Error>>>> =
        Mutex::new(vec![None; amplitudes.len()]);
    thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&a) = amplitudes.get(i) else { break };
                let row = sweep_row(
                    &shape,
                    a,
                    &cfg,
                    &ctx.setup.grid,
                    &ctx.lap,
                    &ctx.setup.params,
                    &fit,
                );
                slots
                    .lock()
                    .expect("no worker panics while holding the lock")[i] = Some(row);
            });
        }
    });
    let rows = slots
        .into_inner()
        .expect("workers have finished")
        .into_iter()
        .map(|r| r.expect("every slot is filled").map_err(CliError::from))
        .collect::<Result<Vec<_>, _>>()?;
    let report = SweepReport::from_rows(rows);
    ctx.write(
        &ctx.config().output.sweep,
        &sweep_csv(&report.rows),
        "sweep",
    )?;
    ctx.write(
        &ctx.config().output.sweep_report,
        &to_json(&report),
        "sweep",
    )?;
    Ok(report)
}
