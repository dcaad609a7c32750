//! Numerical core for the Westervelt equation
//!
//! ```text
//! u_tt − c²Δu − bΔu_t = k (u²)_tt   in Ω,   u = 0 on ∂Ω
//! ```
//!
//! rewritten as the quasilinear first-order system `v_t + 𝒜(v) v = F(v)` for
//! `v = (u, u_t)`, with
//!
//! ```text
//!        ⎡  0     −I  ⎤                       ⎡        0        ⎤
//! 𝒜(v) = ⎣ c²A    bA  ⎦ ,  A = −a(x) Δ_D,  F(v) = ⎣ 2v₂²/(1 − 2kv₁) ⎦ ,  a = 1/(1 − 2kv₁).
//! ```
//!
//! The crate is `no_std` (it needs `alloc`). File formats, configuration and the
//! command line live in the `westervelt` crate.
//!
//! Modules:
//!
//! * [`grid`] -- domains, uniform grids, fields and the Dirichlet Laplacian
//! * [`operators`] -- coefficient operator, block operator, resolvent and spectral bound
//! * [`evolution`] -- time stepping with parabolicity monitoring
//! * [`analysis`] -- discrete norms, decay-rate fits, convergence and stability studies
//! * [`linalg`] -- banded LU and symmetric eigenvalue routines used by the above
#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
mod error;
pub mod evolution;
pub mod grid;
pub mod linalg;
pub mod operators;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use analysis::{
    convergence_study, discrete_norm, fit_decay_rate, fit_series, stability_sweep, sweep_row,
    validate_amplitudes, ConvergenceRow, ConvergenceScenario, DecayFit, DecayObservable, FitMethod,
    FitSettings, NormKind, NormSpec, SweepReport, SweepRow, SweepStatus,
};
pub use evolution::{
    modal_coefficients, modal_exact_solution, rhs_f, simulate, step_imex_trapezoid,
    step_semi_implicit, Model, NormRecord, Scheme, SchemeConfig, StateVector, Termination,
    Trajectory,
};
pub use grid::{
    analytic_eigenpairs, build_dirichlet_laplacian, lambda1, rayleigh_quotient,
    weighted_eigenvalues, Domain, Eigenpair, Field, Grid, SparseOperator,
};
pub use operators::{
    apply_a, apply_block, assemble_coefficient, block_spectrum, coefficient_spectrum,
    distance_to_spectrum, in_resolvent_set, lambda_pair, mu, resolvent_apply, spectral_bound,
    BlockOperator, CoefficientField, ModePair, PhysicalParams, Regime, Resolvent, SpectralReport,
};
