//! Discrete norm surrogates, exponential decay-rate fits, time-step
//! convergence studies and amplitude sweeps.
//!
//! Norms on a grid with cell volume `|h| = ∏ h_d`:
//!
//! ```text
//! ‖u‖_p         = (Σ_x |h| |u(x)|^p)^{1/p}
//! W2 surrogate  = ‖u‖_p + ‖Δ_h u‖_p
//! trace surr.   = ‖w‖_p + ‖∇_h w‖_p,   ‖∇_h w‖_p = (Σ_d Σ_edges |h| |D_d w|^p)^{1/p}
//! ```
//!
//! where `D_d` are forward differences over every grid edge along axis `d`,
//! boundary edges included (zero boundary values).

use alloc::vec::Vec;
// Float math without std; redundant once std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::evolution::{
    modal_coefficients, modal_exact_solution, simulate, Model, Scheme, SchemeConfig, StateVector,
    Termination, Trajectory,
};
use crate::grid::{rayleigh_quotient, Field, Grid, SparseOperator};
use crate::operators::{PhysicalParams, Regime};
use crate::{Error, Result};

/// Minimum samples in a fit window.
pub const MIN_FIT_SAMPLES: usize = 10;
/// Minimum peaks for the envelope fit.
pub const MIN_PEAKS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum NormKind {
    Lp,
    W2Surrogate,
    TraceSurrogate,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormSpec {
    pub p: f64,
    pub kind: NormKind,
}

impl NormSpec {
    pub fn new(p: f64, kind: NormKind) -> Result<Self> {
        if !(1.0..=8.0).contains(&p) {
            return Err(Error::InvalidConfig("norm exponent p must lie in [1, 8]"));
        }
        Ok(NormSpec { p, kind })
    }

    /// `p = 3/2` is accepted, but the continuous trace space it stands in for
    /// has a different characterization there.
    pub fn is_exceptional_trace_exponent(&self) -> bool {
        self.kind == NormKind::TraceSurrogate && self.p == 1.5
    }
}

fn lp_sum(values: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p == 2.0 {
        values.map(|v| v * v).sum()
    } else {
        values.map(|v| v.abs().powf(p)).sum()
    }
}

fn root(sum: f64, weight: f64, p: f64) -> f64 {
    let s = weight * sum;
    if p == 2.0 {
        s.sqrt()
    } else {
        s.powf(1.0 / p)
    }
}

/// Forward differences of `u` along every axis, boundary edges included.
fn edge_differences(u: &[f64], grid: &Grid) -> Vec<f64> {
    let n = grid.n_per_axis();
    let h = grid.h_per_axis();
    let nx = n[0];
    let ny = if grid.dim() > 1 { n[1] } else { 1 };
    let at = |i: isize, j: isize| -> f64 {
        if i < 0 || j < 0 || i >= nx as isize || j >= ny as isize {
            0.0
        } else {
            u[i as usize + nx * j as usize]
        }
    };
    let mut d = Vec::with_capacity((nx + 1) * ny + (ny + 1) * nx);
    for j in 0..ny as isize {
        for i in -1..nx as isize {
            d.push((at(i + 1, j) - at(i, j)) / h[0]);
        }
    }
    if grid.dim() > 1 {
        for i in 0..nx as isize {
            for j in -1..ny as isize {
                d.push((at(i, j + 1) - at(i, j)) / h[1]);
            }
        }
    }
    d
}

/// Discrete norm of `u` per `spec`.
pub fn discrete_norm(u: &[f64], spec: &NormSpec, grid: &Grid, lap: &SparseOperator) -> f64 {
    debug_assert_eq!(u.len(), grid.len());
    let w = grid.cell_volume();
    let p = spec.p;
    let base = root(lp_sum(u.iter().copied(), p), w, p);
    match spec.kind {
        NormKind::Lp => base,
        NormKind::W2Surrogate => {
            let lu = lap.apply(u);
            base + root(lp_sum(lu.into_iter(), p), w, p)
        }
        NormKind::TraceSurrogate => {
            let d = edge_differences(u, grid);
            base + root(lp_sum(d.into_iter(), p), w, p)
        }
    }
}

/// Scalar quantity whose decay is fitted.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "of", rename_all = "snake_case"))]
pub enum DecayObservable {
    /// A norm of `u`.
    U { spec: NormSpec },
    /// A norm of `u_t`.
    Ut { spec: NormSpec },
    /// `‖u‖_{W2 surrogate} + ‖u_t‖_{trace surrogate}`.
    Combined { p: f64 },
}

impl DecayObservable {
    pub fn evaluate(&self, v: &StateVector, grid: &Grid, lap: &SparseOperator) -> f64 {
        match *self {
            DecayObservable::U { spec } => discrete_norm(&v.v1, &spec, grid, lap),
            DecayObservable::Ut { spec } => discrete_norm(&v.v2, &spec, grid, lap),
            DecayObservable::Combined { p } => {
                discrete_norm(
                    &v.v1,
                    &NormSpec {
                        p,
                        kind: NormKind::W2Surrogate,
                    },
                    grid,
                    lap,
                ) + discrete_norm(
                    &v.v2,
                    &NormSpec {
                        p,
                        kind: NormKind::TraceSurrogate,
                    },
                    grid,
                    lap,
                )
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FitMethod {
    /// Least squares on `(t, ln n(t))` over every sample in the window.
    RawLog,
    /// Least squares through the upper envelope of the local maxima.
    PeakEnvelope,
}

impl FitMethod {
    /// Oscillating norms (complex-pair dominant mode) need the envelope fit.
    pub fn for_regime(regime: Regime) -> Self {
        match regime {
            Regime::ComplexPair => FitMethod::PeakEnvelope,
            Regime::RealPair | Regime::DoubleRoot => FitMethod::RawLog,
        }
    }
}

/// `n(t) ≈ exp(intercept − omega_hat·t)` on `[t_a, t_b]`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecayFit {
    pub omega_hat: f64,
    pub intercept: f64,
    pub t_a: f64,
    pub t_b: f64,
    /// RMS of the log residuals of the fitted points.
    pub residual_rms: f64,
    pub method: FitMethod,
    /// Points entering the regression.
    pub n_points: usize,
}

fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sty, mut stt) = (0.0, 0.0);
    for &(t, y) in pts {
        sty += (t - tm) * (y - ym);
        stt += (t - tm) * (t - tm);
    }
    let slope = sty / stt;
    let intercept = ym - slope * tm;
    let rms = (pts
        .iter()
        .map(|&(t, y)| {
            let r = y - (intercept + slope * t);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, intercept, rms)
}

/// Local maxima of `(t, ln n)` refined by a parabola through each maximum
/// and its neighbours.
fn log_peaks(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut peaks = Vec::new();
    for w in pts.windows(3) {
        let ((t0, y0), (t1, y1), (t2, y2)) = (w[0], w[1], w[2]);
        if y1 > y0 && y1 >= y2 {
            let curv = y0 - 2.0 * y1 + y2;
            let dt = 0.5 * (t2 - t0);
            if curv < 0.0 {
                let off = 0.5 * (y0 - y2) / curv;
                peaks.push((t1 + off * dt, y1 - 0.25 * (y0 - y2) * off));
            } else {
                peaks.push((t1, y1));
            }
        }
    }
    peaks
}

/// Peaks lying more than this far (in `ln n`) below the line through their
/// neighbours belong to a secondary family of maxima.
const SECONDARY_PEAK_GAP: f64 = 0.05;

/// Repeatedly removes the peak with the largest gap below the line through its
/// two neighbours (the two inner neighbours for end points), while that gap
/// exceeds [`SECONDARY_PEAK_GAP`] and more than [`MIN_PEAKS`] peaks remain.
fn drop_secondary_peaks(mut peaks: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let line = |a: (f64, f64), b: (f64, f64), t: f64| a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0);
    while peaks.len() > MIN_PEAKS {
        let n = peaks.len();
        let (worst, gap) = (0..n)
            .map(|i| {
                let (a, b) = match i {
                    0 => (peaks[1], peaks[2]),
                    i if i == n - 1 => (peaks[n - 3], peaks[n - 2]),
                    i => (peaks[i - 1], peaks[i + 1]),
                };
                (i, line(a, b, peaks[i].0) - peaks[i].1)
            })
            .fold((0, f64::NEG_INFINITY), |m, x| if x.1 > m.1 { x } else { m });
        if gap <= SECONDARY_PEAK_GAP {
            break;
        }
        peaks.remove(worst);
    }
    peaks
}

/// Fits `n(t) ≈ C e^{−ωt}` over the final `window_fraction` of `(times, norms)`.
pub fn fit_series(
    times: &[f64],
    norms: &[f64],
    window_fraction: f64,
    method: FitMethod,
) -> Result<DecayFit> {
    if times.len() != norms.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            found: norms.len(),
        });
    }
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::InvalidConfig("window fraction must lie in (0, 1]"));
    }
    let (Some(&first), Some(&last)) = (times.first(), times.last()) else {
        return Err(Error::DegenerateFit("empty series"));
    };
    let start = last - window_fraction * (last - first);
    let window: Vec<(f64, f64)> = times
        .iter()
        .zip(norms)
        .filter(|(t, _)| **t >= start - 1e-12 * last.abs().max(1.0))
        .map(|(&t, &n)| (t, n))
        .collect();
    if window.len() < MIN_FIT_SAMPLES {
        return Err(Error::DegenerateFit(
            "fewer than 10 samples in the fit window",
        ));
    }
    if window.iter().any(|&(_, n)| !(n > 0.0 && n.is_finite())) {
        return Err(Error::DegenerateFit(
            "norm vanished or is not finite in the fit window",
        ));
    }
    let logs: Vec<(f64, f64)> = window.iter().map(|&(t, n)| (t, n.ln())).collect();
    let pts = match method {
        FitMethod::RawLog => logs,
        FitMethod::PeakEnvelope => {
            let peaks = log_peaks(&logs);
            if peaks.len() < MIN_PEAKS {
                return Err(Error::DegenerateFit("fewer than 3 peaks in the fit window"));
            }
            drop_secondary_peaks(peaks)
        }
    };
    let (slope, intercept, residual_rms) = least_squares(&pts);
    if !slope.is_finite() {
        return Err(Error::DegenerateFit("fit window has zero length"));
    }
    Ok(DecayFit {
        omega_hat: -slope,
        intercept,
        t_a: window[0].0,
        t_b: window[window.len() - 1].0,
        residual_rms,
        method,
        n_points: pts.len(),
    })
}

/// Decay rate of `observable` along a trajectory.
pub fn fit_decay_rate(
    traj: &Trajectory,
    observable: &DecayObservable,
    grid: &Grid,
    lap: &SparseOperator,
    window_fraction: f64,
    method: FitMethod,
) -> Result<DecayFit> {
    let norms: Vec<f64> = traj
        .states
        .iter()
        .map(|v| observable.evaluate(v, grid, lap))
        .collect();
    fit_series(&traj.times, &norms, window_fraction, method)
}

/// Single-mode run whose time-discretization error is measured.
#[derive(Clone, Debug)]
pub struct ConvergenceScenario<'a> {
    pub grid: &'a Grid,
    pub lap: &'a SparseOperator,
    pub params: PhysicalParams,
    pub scheme: Scheme,
    pub model: Model,
    /// Spatial shape `φ`; for the linear model it must be an eigenvector of the Laplacian.
    pub shape: Field,
    /// Initial data `u(0) = y0·φ`, `u_t(0) = y1·φ`.
    pub y0: f64,
    pub y1: f64,
    pub t_end: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvergenceRow {
    pub dt: f64,
    /// `max(‖u − u_ref‖_∞, ‖u_t − u_t,ref‖_∞)` at `t_end`.
    pub error: f64,
    /// `log(e_{i−1}/e_i) / log(dt_{i−1}/dt_i)`; `None` on the first row and
    /// whenever consecutive step sizes coincide.
    pub observed_order: Option<f64>,
}

impl ConvergenceScenario<'_> {
    fn run(&self, dt: f64) -> Result<StateVector> {
        let mut cfg = SchemeConfig::new(&self.params, dt, self.t_end)
            .with_scheme(self.scheme)
            .with_model(self.model);
        let steps = cfg.n_steps();
        if ((steps as f64) * dt - self.t_end).abs() > 1e-9 * self.t_end {
            return Err(Error::InvalidConfig(
                "t_end must be an integer multiple of every dt",
            ));
        }
        cfg.record_every = steps.max(1);
        let v0 = StateVector::new(self.shape.scaled(self.y0), self.shape.scaled(self.y1))?;
        let traj = simulate(&v0, &cfg, self.grid, self.lap, &self.params)?;
        if !traj.is_completed() {
            return Err(Error::InvalidConfig(
                "convergence run left the parabolic regime",
            ));
        }
        Ok(traj
            .states
            .last()
            .cloned()
            .expect("final sample is always recorded"))
    }

    fn reference(&self, dt_min: f64) -> Result<StateVector> {
        match self.model {
            Model::Linear => {
                let aj = rayleigh_quotient(self.lap, &self.shape);
                let (al, be) = modal_coefficients(aj, &self.params, self.y0, self.y1);
                let (y, yd) = modal_exact_solution(aj, &self.params, al, be, self.t_end);
                StateVector::new(self.shape.scaled(y), self.shape.scaled(yd))
            }
            Model::Quasilinear => {
                // Richardson extrapolation with the nominal order of the scheme (ratio 2^order)
                let ratio = match self.scheme {
                    Scheme::SemiImplicitEuler => 2.0,
                    Scheme::ImexTrapezoid => 4.0,
                };
                let coarse = self.run(dt_min / 4.0)?;
                let fine = self.run(dt_min / 8.0)?;
                let mix = |c: &Field, f: &Field| {
                    Field::from_vec(
                        c.iter()
                            .zip(f.iter())
                            .map(|(c, f)| (ratio * f - c) / (ratio - 1.0))
                            .collect(),
                    )
                };
                StateVector::new(mix(&coarse.v1, &fine.v1), mix(&coarse.v2, &fine.v2))
            }
        }
    }
}

/// Errors at `t_end` for each step size, against the modal exact solution
/// (linear model) or a Richardson-extrapolated pair of runs at 1/4 and 1/8 of
/// the smallest step (quasilinear).
pub fn convergence_study(
    scenario: &ConvergenceScenario<'_>,
    dt_list: &[f64],
) -> Result<Vec<ConvergenceRow>> {
    if dt_list.len() < 3 {
        return Err(Error::InvalidConfig(
            "a convergence study needs at least 3 step sizes",
        ));
    }
    if dt_list.windows(2).any(|w| w[1] > w[0]) || dt_list.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::InvalidConfig(
            "step sizes must be positive and non-increasing",
        ));
    }
    let dt_min = dt_list[dt_list.len() - 1];
    let reference = scenario.reference(dt_min)?;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(dt_list.len());
    for &dt in dt_list {
        let v = scenario.run(dt)?;
        let error =
            v.v1.iter()
                .zip(reference.v1.iter())
                .chain(v.v2.iter().zip(reference.v2.iter()))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
        let observed_order = rows.last().and_then(|prev| {
            (prev.dt != dt && error > 0.0 && prev.error > 0.0)
                .then(|| (prev.error / error).ln() / (prev.dt / dt).ln())
        });
        rows.push(ConvergenceRow {
            dt,
            error,
            observed_order,
        });
    }
    Ok(rows)
}

/// How sweep rows are fitted.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitSettings {
    pub observable: DecayObservable,
    pub window_fraction: f64,
    pub method: FitMethod,
}

impl FitSettings {
    /// Combined `p = 2` norm over the final half of the run.
    pub fn new(method: FitMethod) -> Self {
        FitSettings {
            observable: DecayObservable::Combined { p: 2.0 },
            window_fraction: 0.5,
            method,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SweepStatus {
    Completed,
    ParabolicityViolation,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepRow {
    pub amplitude: f64,
    pub status: SweepStatus,
    /// `None` when the run violated parabolicity or the fit was skipped.
    pub omega_hat: Option<f64>,
    pub residual_rms: Option<f64>,
    pub violation_time: Option<f64>,
}

impl SweepRow {
    pub fn is_decaying(&self) -> bool {
        self.status == SweepStatus::Completed && self.omega_hat.is_some_and(|w| w > 0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub largest_decaying: Option<f64>,
    pub smallest_violating: Option<f64>,
}

impl SweepReport {
    pub fn from_rows(rows: Vec<SweepRow>) -> Self {
        let largest_decaying = rows
            .iter()
            .filter(|r| r.is_decaying())
            .map(|r| r.amplitude)
            .fold(None, |m: Option<f64>, a| Some(m.map_or(a, |m| m.max(a))));
        let smallest_violating = rows
            .iter()
            .filter(|r| r.status == SweepStatus::ParabolicityViolation)
            .map(|r| r.amplitude)
            .fold(None, |m: Option<f64>, a| Some(m.map_or(a, |m| m.min(a))));
        SweepReport {
            rows,
            largest_decaying,
            smallest_violating,
        }
    }
}

/// Checks that sweep amplitudes are non-negative and strictly increasing.
pub fn validate_amplitudes(amplitudes: &[f64]) -> Result<()> {
    if amplitudes.is_empty() {
        return Err(Error::InvalidConfig("amplitude list is empty"));
    }
    if amplitudes.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(Error::InvalidConfig(
            "amplitudes must be finite and non-negative",
        ));
    }
    if amplitudes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig(
            "amplitudes must be strictly increasing",
        ));
    }
    Ok(())
}

/// One simulate-and-fit row of a [`stability_sweep`].
#[allow(clippy::too_many_arguments)]
pub fn sweep_row(
    shape: &StateVector,
    amplitude: f64,
    cfg: &SchemeConfig,
    grid: &Grid,
    lap: &SparseOperator,
    params: &PhysicalParams,
    fit: &FitSettings,
) -> Result<SweepRow> {
    let v0 = shape.scaled(amplitude);
    let traj = simulate(&v0, cfg, grid, lap, params)?;
    Ok(match traj.status {
        Termination::ParabolicityViolation { t, .. } => SweepRow {
            amplitude,
            status: SweepStatus::ParabolicityViolation,
            omega_hat: None,
            residual_rms: None,
            violation_time: Some(t),
        },
        Termination::Completed => {
            let fitted = if amplitude == 0.0 {
                None
            } else {
                fit_decay_rate(
                    &traj,
                    &fit.observable,
                    grid,
                    lap,
                    fit.window_fraction,
                    fit.method,
                )
                .ok()
            };
            SweepRow {
                amplitude,
                status: SweepStatus::Completed,
                omega_hat: fitted.map(|f| f.omega_hat),
                residual_rms: fitted.map(|f| f.residual_rms),
                violation_time: None,
            }
        }
    })
}

/// Simulates `amplitude·shape` for each amplitude and fits the decay rate of
/// completed runs.
pub fn stability_sweep(
    shape: &StateVector,
    amplitudes: &[f64],
    cfg: &SchemeConfig,
    grid: &Grid,
    lap: &SparseOperator,
    params: &PhysicalParams,
    fit: &FitSettings,
) -> Result<SweepReport> {
    validate_amplitudes(amplitudes)?;
    let rows = amplitudes
        .iter()
        .map(|&a| sweep_row(shape, a, cfg, grid, lap, params, fit))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport::from_rows(rows))
}
