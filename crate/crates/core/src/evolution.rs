//! Time integration of `v_t + 𝒜(v)v = F(v)` with the coefficient frozen at a
//! known state each step, and the parabolicity monitor `sup |v₁| ≤ m < 1/(2k)`.
//!
//! Both schemes eliminate `v₁` through the exact first block row, so each
//! step is a single `N`-dimensional banded solve with `I + s·A_n`.

use alloc::vec;
use alloc::vec::Vec;
// Float math without std; redundant once std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::analysis::{discrete_norm, NormKind, NormSpec};
use crate::grid::{Field, Grid, SparseOperator};
use crate::linalg::Scalar;
use crate::operators::{
    apply_a, assemble_coefficient, lambda_pair, CoefficientField, PhysicalParams, Regime,
};
use crate::{Error, Result};

/// The pair `v = (v₁, v₂) = (u, u_t)`.
#[derive(Clone, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StateVector<T = f64> {
    pub v1: Field<T>,
    pub v2: Field<T>,
}

impl<T: Scalar> StateVector<T> {
    pub fn new(v1: Field<T>, v2: Field<T>) -> Result<Self> {
        if v1.len() != v2.len() {
            return Err(Error::DimensionMismatch {
                expected: v1.len(),
                found: v2.len(),
            });
        }
        Ok(StateVector { v1, v2 })
    }

    pub fn zeros(n: usize) -> Self {
        StateVector {
            v1: Field::zeros(n),
            v2: Field::zeros(n),
        }
    }

    pub fn len(&self) -> usize {
        self.v1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v1.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Self {
        StateVector {
            v1: self.v1.scaled(s),
            v2: self.v2.scaled(s),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Scheme {
    /// Backward Euler in `𝒜(v_n)`, explicit `F(v_n)`. First order.
    #[default]
    SemiImplicitEuler,
    /// Trapezoidal rule in `𝒜(v*)`, explicit `F(v*)` at the extrapolated
    /// midpoint `v* = (3v_n − v_{n−1})/2`. Second order.
    ImexTrapezoid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Model {
    /// Full Westervelt system with `a = 1/(1 − 2kv₁)` and `F(v)`.
    #[default]
    Quasilinear,
    /// Linear damped wave equation: `a ≡ 1`, `F ≡ 0`.
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SchemeConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub model: Model,
    /// Normwise backward error accepted from each linear solve.
    pub linear_solve_tol: f64,
    /// Parabolicity margin `m ∈ (0, 1/(2k))`.
    pub parabolicity_margin: f64,
    /// Steps between trajectory samples.
    pub record_every: usize,
    /// Exponent of the monitored discrete norms.
    pub norm_p: f64,
}

impl SchemeConfig {
    /// Defaults: margin `0.9/(2k)`, samples every 10 steps, `p = 2`.
    pub fn new(params: &PhysicalParams, dt: f64, t_end: f64) -> Self {
        SchemeConfig {
            dt,
            t_end,
            scheme: Scheme::SemiImplicitEuler,
            model: Model::Quasilinear,
            linear_solve_tol: 1e-10,
            parabolicity_margin: 0.9 * params.parabolicity_bound(),
            record_every: 10,
            norm_p: 2.0,
        }
    }

    /// `min(1e-3, 0.1/λ₀)`.
    pub fn default_dt(lambda0: f64) -> f64 {
        (0.1 / lambda0).min(1e-3)
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_model(mut self, model: Model) -> Self {
        self.model = model;
        self
    }

    pub fn validate(&self, params: &PhysicalParams) -> Result<()> {
        params.validate()?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidConfig("dt must be positive"));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::InvalidConfig("t_end must be positive"));
        }
        let m = self.parabolicity_margin;
        if !(m > 0.0 && m < params.parabolicity_bound()) {
            return Err(Error::InvalidConfig(
                "parabolicity margin must lie in (0, 1/(2k))",
            ));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidConfig("record_every must be at least 1"));
        }
        if !(self.linear_solve_tol > 0.0) {
            return Err(Error::InvalidConfig("linear_solve_tol must be positive"));
        }
        if !(1.0..=8.0).contains(&self.norm_p) {
            return Err(Error::InvalidConfig("norm exponent p must lie in [1, 8]"));
        }
        Ok(())
    }

    /// Number of steps to reach `t_end`.
    pub fn n_steps(&self) -> usize {
        let r = self.t_end / self.dt;
        let n = r.round();
        if (r - n).abs() <= 1e-9 * r.max(1.0) {
            n as usize
        } else {
            r.ceil() as usize
        }
    }
}

/// `F(v) = (0, 2v₂²/(1 − 2kv₁))`.
pub fn rhs_f(v: &StateVector, params: &PhysicalParams) -> Result<StateVector> {
    let bound = params.parabolicity_bound();
    let (node, value) = v.v1.max_abs();
    if !(value < bound) {
        return Err(Error::ParabolicityViolation {
            node,
            value,
            margin: bound,
        });
    }
    let f2 =
        v.v1.iter()
            .zip(v.v2.iter())
            .map(|(&u, &w)| 2.0 * w * w / (1.0 - 2.0 * params.k * u))
            .collect();
    Ok(StateVector {
        v1: Field::zeros(v.len()),
        v2: Field::from_vec(f2),
    })
}

/// Frozen coefficient and explicit forcing evaluated at `state`.
fn frozen(
    state: &StateVector,
    params: &PhysicalParams,
    cfg: &SchemeConfig,
) -> Result<(CoefficientField, Vec<f64>)> {
    match cfg.model {
        Model::Linear => Ok((
            CoefficientField::uniform(state.len(), 1.0)?,
            vec![0.0; state.len()],
        )),
        Model::Quasilinear => {
            let a = assemble_coefficient(&state.v1, params, cfg.parabolicity_margin)?;
            let f = rhs_f(state, params)?;
            Ok((a, f.v2.into_vec()))
        }
    }
}

/// Solves `(I + s·diag(a)·L) x = rhs`, checking the normwise backward error.
fn solve_shifted(
    lap: &SparseOperator,
    coeff: &CoefficientField,
    s: f64,
    rhs: Vec<f64>,
    tol: f64,
) -> Result<Vec<f64>> {
    let n = lap.dim();
    let rows: Vec<f64> = coeff.values().iter().map(|a| s * a).collect();
    let band = lap.to_band(&vec![1.0; n], &rows);
    let norm = band.norm_inf();
    let lu = band.factor()?;
    let x = lu.solve(&rhs);
    let ax = apply_a(coeff, lap, &x)?;
    let (mut r, mut xn, mut bn) = (0.0_f64, 0.0_f64, 0.0_f64);
    for i in 0..n {
        r = r.max((x[i] + s * ax[i] - rhs[i]).abs());
        xn = xn.max(x[i].abs());
        bn = bn.max(rhs[i].abs());
    }
    let denom = norm * xn + bn;
    if denom > 0.0 && !(r / denom <= tol) {
        return Err(Error::SingularMatrix { column: n });
    }
    Ok(x)
}

fn check_state(v: &StateVector, lap: &SparseOperator) -> Result<()> {
    for len in [v.v1.len(), v.v2.len()] {
        if len != lap.dim() {
            return Err(Error::DimensionMismatch {
                expected: lap.dim(),
                found: len,
            });
        }
    }
    Ok(())
}

fn semi_implicit(
    v: &StateVector,
    lap: &SparseOperator,
    params: &PhysicalParams,
    cfg: &SchemeConfig,
) -> Result<StateVector> {
    let (dt, c2, b) = (cfg.dt, params.c * params.c, params.b);
    let (a, f2) = frozen(v, params, cfg)?;
    // v₁' = v₁ + dt v₂',  (I + (dt b + dt² c²) A) v₂' = v₂ + dt F₂ − dt c² A v₁
    let av1 = apply_a(&a, lap, &v.v1)?;
    let rhs: Vec<f64> = (0..v.len())
        .map(|i| v.v2[i] + dt * f2[i] - dt * c2 * av1[i])
        .collect();
    let v2 = solve_shifted(lap, &a, dt * b + dt * dt * c2, rhs, cfg.linear_solve_tol)?;
    let v1 = v.v1.iter().zip(&v2).map(|(&u, &w)| u + dt * w).collect();
    Ok(StateVector {
        v1: Field::from_vec(v1),
        v2: Field::from_vec(v2),
    })
}

fn trapezoid(
    v: &StateVector,
    prev: Option<&StateVector>,
    lap: &SparseOperator,
    params: &PhysicalParams,
    cfg: &SchemeConfig,
) -> Result<StateVector> {
    let (dt, c2, b) = (cfg.dt, params.c * params.c, params.b);
    let (a, f2) = match prev {
        Some(p) => {
            let mid = StateVector {
                v1: extrapolate(&v.v1, &p.v1),
                v2: extrapolate(&v.v2, &p.v2),
            };
            frozen(&mid, params, cfg)?
        }
        None => frozen(v, params, cfg)?,
    };
    // v₁' = v₁ + dt/2 (v₂ + v₂'),
    // (I + s A) v₂' = v₂ − dt c² A v₁ − s A v₂ + dt F₂,  s = dt b/2 + dt² c²/4
    let s = 0.5 * dt * b + 0.25 * dt * dt * c2;
    let av1 = apply_a(&a, lap, &v.v1)?;
    let av2 = apply_a(&a, lap, &v.v2)?;
    let rhs: Vec<f64> = (0..v.len())
        .map(|i| v.v2[i] - dt * c2 * av1[i] - s * av2[i] + dt * f2[i])
        .collect();
    let v2 = solve_shifted(lap, &a, s, rhs, cfg.linear_solve_tol)?;
    let v1 = (0..v.len())
        .map(|i| v.v1[i] + 0.5 * dt * (v.v2[i] + v2[i]))
        .collect();
    Ok(StateVector {
        v1: Field::from_vec(v1),
        v2: Field::from_vec(v2),
    })
}

fn extrapolate(now: &[f64], before: &[f64]) -> Field {
    Field::from_vec(
        now.iter()
            .zip(before)
            .map(|(&x, &y)| 1.5 * x - 0.5 * y)
            .collect(),
    )
}

fn check_updated(v: &StateVector, params: &PhysicalParams, cfg: &SchemeConfig) -> Result<()> {
    if cfg.model == Model::Quasilinear {
        let (node, value) = v.v1.max_abs();
        if !(value <= cfg.parabolicity_margin) {
            return Err(Error::ParabolicityViolation {
                node,
                value,
                margin: cfg.parabolicity_margin,
            });
        }
    }
    let _ = params;
    Ok(())
}

/// One semi-implicit Euler step `(I + dt 𝒜(v_n)) v_{n+1} = v_n + dt F(v_n)`.
pub fn step_semi_implicit(
    v_n: &StateVector,
    lap: &SparseOperator,
    params: &PhysicalParams,
    cfg: &SchemeConfig,
) -> Result<StateVector> {
    check_state(v_n, lap)?;
    let next = semi_implicit(v_n, lap, params, cfg)?;
    check_updated(&next, params, cfg)?;
    Ok(next)
}

/// One IMEX trapezoid step. `v_prev` enables the midpoint extrapolation;
/// without it coefficient and forcing are frozen at `v_n`.
pub fn step_imex_trapezoid(
    v_n: &StateVector,
    v_prev: Option<&StateVector>,
    lap: &SparseOperator,
    params: &PhysicalParams,
    cfg: &SchemeConfig,
) -> Result<StateVector> {
    check_state(v_n, lap)?;
    let next = trapezoid(v_n, v_prev, lap, params, cfg)?;
    check_updated(&next, params, cfg)?;
    Ok(next)
}

/// Monitored quantities at a sample time.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormRecord {
    pub t: f64,
    /// `‖u‖_p + ‖Δ_h u‖_p`
    #[cfg_attr(feature = "serde", serde(rename = "norm_u_W2"))]
    pub norm_u_w2: f64,
    /// `‖u_t‖_p + ‖∇_h u_t‖_p`
    pub norm_ut_trace: f64,
    pub max_abs_u: f64,
    /// `min_x 1/(1 − 2ku)`; 1 for the linear model.
    pub min_coeff_a: f64,
}

impl NormRecord {
    pub fn measure(
        t: f64,
        v: &StateVector,
        grid: &Grid,
        lap: &SparseOperator,
        params: &PhysicalParams,
        cfg: &SchemeConfig,
    ) -> Self {
        let w2 = NormSpec {
            p: cfg.norm_p,
            kind: NormKind::W2Surrogate,
        };
        let tr = NormSpec {
            p: cfg.norm_p,
            kind: NormKind::TraceSurrogate,
        };
        let min_coeff_a = match cfg.model {
            Model::Linear => 1.0,
            Model::Quasilinear => {
                v.v1.iter()
                    .map(|&u| 1.0 / (1.0 - 2.0 * params.k * u))
                    .fold(f64::INFINITY, f64::min)
            }
        };
        NormRecord {
            t,
            norm_u_w2: discrete_norm(&v.v1, &w2, grid, lap),
            norm_ut_trace: discrete_norm(&v.v2, &tr, grid, lap),
            max_abs_u: v.v1.max_abs().1,
            min_coeff_a,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "status", rename_all = "snake_case"))]
pub enum Termination {
    Completed,
    /// `sup |v₁|` exceeded the margin at time `t`.
    ParabolicityViolation {
        t: f64,
        node: usize,
        value: f64,
    },
}

/// Sampled run of [`simulate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub records: Vec<NormRecord>,
    pub status: Termination,
}

impl Trajectory {
    pub fn is_completed(&self) -> bool {
        self.status == Termination::Completed
    }

    pub fn final_state(&self) -> Option<&StateVector> {
        self.states.last()
    }
}

/// Integrates from `v0` to `cfg.t_end`, sampling every `cfg.record_every`
/// steps (and always the last step). A parabolicity violation ends the run:
/// the offending state is recorded and the status says when it happened.
pub fn simulate(
    v0: &StateVector,
    cfg: &SchemeConfig,
    grid: &Grid,
    lap: &SparseOperator,
    params: &PhysicalParams,
) -> Result<Trajectory> {
    cfg.validate(params)?;
    grid.check_len(lap.dim())?;
    check_state(v0, lap)?;

    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        records: Vec::new(),
        status: Termination::Completed,
    };
    let record = |traj: &mut Trajectory, t: f64, v: &StateVector| {
        traj.times.push(t);
        traj.records
            .push(NormRecord::measure(t, v, grid, lap, params, cfg));
        traj.states.push(v.clone());
    };
    let violation = |v: &StateVector| -> Option<(usize, f64)> {
        let (node, value) = v.v1.max_abs();
        (cfg.model == Model::Quasilinear && !(value <= cfg.parabolicity_margin))
            .then_some((node, value))
    };

    record(&mut traj, 0.0, v0);
    if let Some((node, value)) = violation(v0) {
        traj.status = Termination::ParabolicityViolation {
            t: 0.0,
            node,
            value,
        };
        return Ok(traj);
    }

    let n_steps = cfg.n_steps();
    let mut prev: Option<StateVector> = None;
    let mut v = v0.clone();
    for step in 1..=n_steps {
        let next = match cfg.scheme {
            Scheme::SemiImplicitEuler => semi_implicit(&v, lap, params, cfg),
            Scheme::ImexTrapezoid => trapezoid(&v, prev.as_ref(), lap, params, cfg),
        };
        let t = step as f64 * cfg.dt;
        let next = match next {
            Ok(next) => next,
            Err(Error::ParabolicityViolation { node, value, .. }) => {
                // only reachable through the trapezoid's extrapolated state
                traj.status = Termination::ParabolicityViolation { t, node, value };
                return Ok(traj);
            }
            Err(e) => return Err(e),
        };
        if let Some((node, value)) = violation(&next) {
            record(&mut traj, t, &next);
            traj.status = Termination::ParabolicityViolation { t, node, value };
            return Ok(traj);
        }
        if step % cfg.record_every == 0 || step == n_steps {
            record(&mut traj, t, &next);
        }
        prev = Some(core::mem::replace(&mut v, next));
    }
    Ok(traj)
}

/// Exact solution `(y, ẏ)` of the linear modal equation
/// `ÿ + b a_j ẏ + c² a_j y = 0`, with roots `λ± = lambda_pair(a_j)`:
///
/// * real pair: `y = α e^{−λ₊t} + β e^{−λ₋t}`
/// * complex pair `σ ± iω`: `y = e^{−σt}(α cos ωt + β sin ωt)`
/// * double root `λ`: `y = (α + βt) e^{−λt}`
///
/// Use [`modal_coefficients`] to obtain `(α, β)` from initial data.
pub fn modal_exact_solution(
    a_j: f64,
    params: &PhysicalParams,
    alpha: f64,
    beta: f64,
    t: f64,
) -> (f64, f64) {
    let pair = lambda_pair(a_j, params);
    match pair.regime {
        Regime::RealPair => {
            let (lp, lm) = (pair.re_plus, pair.re_minus);
            let (ep, em) = ((-lp * t).exp(), (-lm * t).exp());
            (alpha * ep + beta * em, -lp * alpha * ep - lm * beta * em)
        }
        Regime::ComplexPair => {
            let (s, w) = (pair.re_plus, pair.im_plus);
            let e = (-s * t).exp();
            let (sn, cs) = (w * t).sin_cos();
            (
                e * (alpha * cs + beta * sn),
                e * ((w * beta - s * alpha) * cs - (s * beta + w * alpha) * sn),
            )
        }
        Regime::DoubleRoot => {
            let l = pair.re_plus;
            let e = (-l * t).exp();
            ((alpha + beta * t) * e, (beta - l * (alpha + beta * t)) * e)
        }
    }
}

/// `(α, β)` of [`modal_exact_solution`] matching `y(0) = y0`, `ẏ(0) = y1`.
pub fn modal_coefficients(a_j: f64, params: &PhysicalParams, y0: f64, y1: f64) -> (f64, f64) {
    let pair = lambda_pair(a_j, params);
    match pair.regime {
        Regime::RealPair => {
            let (lp, lm) = (pair.re_plus, pair.re_minus);
            let d = lp - lm;
            (-(y1 + lm * y0) / d, (y1 + lp * y0) / d)
        }
        Regime::ComplexPair => (y0, (y1 + pair.re_plus * y0) / pair.im_plus),
        Regime::DoubleRoot => (y0, y1 + pair.re_plus * y0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{analytic_eigenpairs, build_dirichlet_laplacian, rayleigh_quotient};
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn unit() -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0, 1.0).unwrap()
    }

    fn constant_state(n: usize, u: f64, ut: f64) -> StateVector {
        StateVector::new(Field::from_vec(vec![u; n]), Field::from_vec(vec![ut; n])).unwrap()
    }

    #[test]
    fn forcing_values() {
        let p = unit();
        let f = rhs_f(&constant_state(3, 0.3, 0.0), &p).unwrap();
        assert!(f.v1.iter().chain(f.v2.iter()).all(|&x| x == 0.0));
        let f = rhs_f(&constant_state(3, 0.0, 3.0), &p).unwrap();
        assert!(f.v2.iter().all(|&x| x == 18.0));
        let f = rhs_f(&constant_state(3, 0.25, 1.0), &p).unwrap();
        assert!(f.v2.iter().all(|&x| x == 4.0));
        assert!(matches!(
            rhs_f(&constant_state(3, 0.5, 1.0), &p),
            Err(Error::ParabolicityViolation { .. })
        ));
    }

    #[test]
    fn zero_is_a_fixed_point_of_both_steppers() {
        let g = Grid::interval(PI, 16).unwrap();
        let l = build_dirichlet_laplacian(&g);
        let p = unit();
        let cfg = SchemeConfig::new(&p, 1e-2, 1.0);
        let z = StateVector::zeros(16);
        assert_eq!(step_semi_implicit(&z, &l, &p, &cfg).unwrap(), z);
        assert_eq!(step_imex_trapezoid(&z, Some(&z), &l, &p, &cfg).unwrap(), z);
    }

    #[test]
    fn one_linear_step_is_modal_backward_euler() {
        let g = Grid::interval(PI, 32).unwrap();
        let l = build_dirichlet_laplacian(&g);
        let p = PhysicalParams::new(1.5, 0.7, 1.0).unwrap();
        let cfg = SchemeConfig::new(&p, 0.05, 1.0).with_model(Model::Linear);
        let phi = analytic_eigenpairs(&g, 3).unwrap().remove(2).field;
        let aj = rayleigh_quotient(&l, &phi);
        let (y0, y1) = (0.8, -0.3);
        let v = StateVector::new(phi.scaled(y0), phi.scaled(y1)).unwrap();
        let next = step_semi_implicit(&v, &l, &p, &cfg).unwrap();

        // 2×2 backward Euler: (I + dt M) y' = y, M = [[0, −1], [c² a, b a]]
        let dt = cfg.dt;
        let m = [[1.0, -dt], [dt * p.c * p.c * aj, 1.0 + dt * p.b * aj]];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let z0 = (m[1][1] * y0 - m[0][1] * y1) / det;
        let z1 = (-m[1][0] * y0 + m[0][0] * y1) / det;
        for i in 0..g.len() {
            assert_relative_eq!(next.v1[i], z0 * phi[i], epsilon = 1e-12);
            assert_relative_eq!(next.v2[i], z1 * phi[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn semi_implicit_local_error_is_second_order() {
        let g = Grid::interval(PI, 24).unwrap();
        let l = build_dirichlet_laplacian(&g);
        let p = unit();
        let phi = analytic_eigenpairs(&g, 1).unwrap().remove(0).field;
        let aj = rayleigh_quotient(&l, &phi);
        let v = StateVector::new(phi.clone(), Field::zeros(g.len())).unwrap();
        let (al, be) = modal_coefficients(aj, &p, 1.0, 0.0);
        let local = |dt: f64| {
            let cfg = SchemeConfig::new(&p, dt, 1.0).with_model(Model::Linear);
            let next = step_semi_implicit(&v, &l, &p, &cfg).unwrap();
            let (y, _) = modal_exact_solution(aj, &p, al, be, dt);
            let k = g.len() / 2;
            (next.v1[k] / phi[k] - y).abs()
        };
        let ratio = local(0.02) / local(0.01);
        assert!((3.6..=4.4).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn modal_solution_regimes() {
        let p = unit();
        // t = 0 returns the combination defined by each parametrization
        assert_eq!(modal_exact_solution(100.0, &p, 0.3, 0.4, 0.0).0, 0.7);
        assert_eq!(modal_exact_solution(1.0, &p, 0.3, 0.4, 0.0).0, 0.3);
        // double root a = 4: (α + βt) e^{−2t}
        for t in [0.0, 0.5, 2.0] {
            let (y, _) = modal_exact_solution(4.0, &p, 0.3, 0.4, t);
            assert_relative_eq!(y, (0.3 + 0.4 * t) * (-2.0 * t).exp(), epsilon = 1e-15);
        }
        // envelope e^{−t/2} for a = 1
        let (al, be) = modal_coefficients(1.0, &p, 1.0, 0.0);
        let amp = (al * al + be * be).sqrt();
        for t in [1.0, 3.0, 7.0, 12.0] {
            let (y, _) = modal_exact_solution(1.0, &p, al, be, t);
            assert!(y.abs() <= amp * (-0.5 * t).exp() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn modal_solution_solves_the_ode() {
        let p = PhysicalParams::new(1.0, 0.5, 1.0).unwrap();
        // complex, double (a = 4c²/b²) and real regimes
        for a in [0.5, 16.0, 200.0] {
            let (al, be) = modal_coefficients(a, &p, 0.7, -1.1);
            let (y0, y1) = modal_exact_solution(a, &p, al, be, 0.0);
            assert_relative_eq!(y0, 0.7, epsilon = 1e-12);
            assert_relative_eq!(y1, -1.1, epsilon = 1e-12);
            // ÿ by centered differences of ẏ
            let (t, h) = (0.8, 1e-5);
            let (y, yd) = modal_exact_solution(a, &p, al, be, t);
            let ydd = (modal_exact_solution(a, &p, al, be, t + h).1
                - modal_exact_solution(a, &p, al, be, t - h).1)
                / (2.0 * h);
            let res = ydd + p.b * a * yd + p.c * p.c * a * y;
            assert!(res.abs() < 1e-5 * (1.0 + a), "a = {a}: residual {res}");
        }
    }

    #[test]
    fn over_amplitude_start_is_flagged_at_time_zero() {
        let g = Grid::interval(PI, 21).unwrap();
        let l = build_dirichlet_laplacian(&g);
        let p = unit();
        let cfg = SchemeConfig::new(&p, 1e-3, 1.0);
        let phi = analytic_eigenpairs(&g, 1).unwrap().remove(0).field;
        let v0 = StateVector::new(phi.scaled(0.6), Field::zeros(g.len())).unwrap();
        let traj = simulate(&v0, &cfg, &g, &l, &p).unwrap();
        assert!(matches!(
            traj.status,
            Termination::ParabolicityViolation { t, .. } if t == 0.0
        ));
        assert_eq!(traj.times, vec![0.0]);
    }

    #[test]
    fn sampling_schedule() {
        let g = Grid::interval(PI, 8).unwrap();
        let l = build_dirichlet_laplacian(&g);
        let p = unit();
        let mut cfg = SchemeConfig::new(&p, 0.1, 2.05);
        cfg.record_every = 5;
        let traj = simulate(&StateVector::zeros(8), &cfg, &g, &l, &p).unwrap();
        // 21 steps: samples at 0, 5, 10, 15, 20 and 21
        assert_eq!(traj.times.len(), 6);
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
        assert_relative_eq!(*traj.times.last().unwrap(), 2.1, epsilon = 1e-12);
    }

    #[test]
    fn config_validation() {
        let p = unit();
        let mut cfg = SchemeConfig::new(&p, 1e-3, 1.0);
        assert!(cfg.validate(&p).is_ok());
        cfg.parabolicity_margin = 0.5;
        assert!(cfg.validate(&p).is_err());
        let cfg = SchemeConfig::new(&p, 0.0, 1.0);
        assert!(cfg.validate(&p).is_err());
        assert_eq!(SchemeConfig::default_dt(0.5), 1e-3);
        assert_eq!(SchemeConfig::default_dt(1000.0), 1e-4);
    }
}
