//! Coefficient operator `A = −a(x)Δ_h`, the block operator
//!
//! ```text
//!     ⎡  0    −I ⎤
//! 𝒜 = ⎣ c²A   bA ⎦
//! ```
//!
//! its resolvent, and the spectral bound `λ₀ = min{(b/2)λ₁(A), c²/b}`.
//!
//! Every `λ ∈ σ(𝒜)` solves `μ(λ) = λ²/(λb − c²) ∈ σ(A)`, i.e. for an
//! eigenvalue `a` of `A` the pair `ab/2 ± √(a²b²/4 − ac²)`. This holds exactly
//! for the discrete operators, with or without a constant coefficient, since
//! `A_h` is diagonalizable with real positive spectrum.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
// Float math without std; redundant once std is linked.
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use crate::evolution::StateVector;
use crate::grid::{lambda1, weighted_eigenvalues, Field, SparseOperator, LAMBDA1_TOL};
use crate::linalg::{norm2, BandLu, Scalar};
use crate::{Error, Result};

/// Relative tolerance of the excluded point `λb = c²`: `|λb − c²| < MU_TOL·(1 + |λ|)`.
pub const MU_TOL: f64 = 1e-12;
/// Relative residual accepted from [`resolvent_apply`].
pub const RESOLVENT_RESIDUAL_TOL: f64 = 1e-10;
/// `λ` is treated as a spectral point of `𝒜_h` when the estimated smallest
/// eigenvalue modulus of `M(λ) = −λ²I + (λb − c²)A_h` is below
/// `RESOLVENT_SINGULAR_TOL · (‖M‖ + |λ|·‖∂M/∂λ‖)`, i.e. when a relative change
/// of `λ` of about this size could make `M` singular.
pub const RESOLVENT_SINGULAR_TOL: f64 = 1e-13;
/// Tolerance used when matching spectra.
pub const SPECTRUM_TOL: f64 = 1e-8;

/// Coefficients of `u_tt − c²Δu − bΔu_t = k(u²)_tt`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhysicalParams {
    /// Sound speed.
    pub c: f64,
    /// Diffusivity of sound.
    pub b: f64,
    /// Parameter of nonlinearity.
    pub k: f64,
}

impl PhysicalParams {
    pub fn new(c: f64, b: f64, k: f64) -> Result<Self> {
        let p = PhysicalParams { c, b, k };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(self.c) {
            return Err(Error::InvalidParams("c must be positive"));
        }
        if !ok(self.b) {
            return Err(Error::InvalidParams("b must be positive"));
        }
        if !ok(self.k) {
            return Err(Error::InvalidParams("k must be positive"));
        }
        Ok(())
    }

    /// `1/(2k)`, the amplitude at which the equation degenerates.
    pub fn parabolicity_bound(&self) -> f64 {
        0.5 / self.k
    }
}

/// Nodal coefficient `a(x) = 1/(1 − 2k u(x))` with its recorded lower bound.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientField {
    a: Field,
    a0: f64,
}

impl CoefficientField {
    /// `a ≡ value`.
    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        Self::from_values(vec![value; n])
    }

    pub fn from_values(a: Vec<f64>) -> Result<Self> {
        let mut a0 = f64::INFINITY;
        for (node, &value) in a.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositiveCoefficient { node, value });
            }
            a0 = a0.min(value);
        }
        Ok(CoefficientField {
            a: Field::from_vec(a),
            a0,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.a
    }

    /// `min_x a(x)`.
    pub fn lower_bound(&self) -> f64 {
        self.a0
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// True when every node carries the same value.
    pub fn is_constant(&self) -> bool {
        self.a.windows(2).all(|w| w[0] == w[1])
    }
}

/// `a = 1/(1 − 2k u)`, accepted only while `sup |u| ≤ margin`.
pub fn assemble_coefficient(
    u: &[f64],
    params: &PhysicalParams,
    margin: f64,
) -> Result<CoefficientField> {
    let (node, value) = Field::from_vec(u.to_vec()).max_abs();
    if !(value <= margin) {
        return Err(Error::ParabolicityViolation {
            node,
            value,
            margin,
        });
    }
    let a = u
        .iter()
        .map(|&x| 1.0 / (1.0 - 2.0 * params.k * x))
        .collect();
    CoefficientField::from_values(a)
}

/// `a(x)·(−Δ_h u)`.
pub fn apply_a<T: Scalar>(
    coeff: &CoefficientField,
    lap: &SparseOperator,
    u: &[T],
) -> Result<Field<T>> {
    check_dims(lap.dim(), coeff.len())?;
    check_dims(lap.dim(), u.len())?;
    let mut y = lap.apply(u);
    for (y, &a) in y.iter_mut().zip(coeff.values()) {
        *y = y.scale(a);
    }
    Ok(Field::from_vec(y))
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Discrete `𝒜 = [[0, −I], [c²A, bA]]` with frozen coefficient.
#[derive(Clone, Copy, Debug)]
pub struct BlockOperator<'a> {
    pub lap: &'a SparseOperator,
    pub coeff: &'a CoefficientField,
    pub params: PhysicalParams,
}

impl<'a> BlockOperator<'a> {
    pub fn new(
        lap: &'a SparseOperator,
        coeff: &'a CoefficientField,
        params: PhysicalParams,
    ) -> Result<Self> {
        check_dims(lap.dim(), coeff.len())?;
        Ok(BlockOperator { lap, coeff, params })
    }

    /// Size `N` of each block.
    pub fn block_dim(&self) -> usize {
        self.lap.dim()
    }

    pub fn apply<T: Scalar>(&self, v: &StateVector<T>) -> Result<StateVector<T>> {
        apply_block(self, v)
    }

    /// Row-major dense `2N × 2N` copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.block_dim();
        let m = 2 * n;
        let mut d = vec![0.0; m * m];
        let (c2, b) = (self.params.c * self.params.c, self.params.b);
        for i in 0..n {
            d[i * m + n + i] = -1.0;
            let a = self.coeff.values()[i];
            let (cols, vals) = self.lap.row(i);
            for (&j, &l) in cols.iter().zip(vals) {
                d[(n + i) * m + j] = c2 * a * l;
                d[(n + i) * m + n + j] = b * a * l;
            }
        }
        d
    }
}

/// `(w₁, w₂) = (−v₂, c²A v₁ + bA v₂)`.
pub fn apply_block<T: Scalar>(
    op: &BlockOperator<'_>,
    v: &StateVector<T>,
) -> Result<StateVector<T>> {
    let n = op.block_dim();
    check_dims(n, v.v1.len())?;
    check_dims(n, v.v2.len())?;
    let (c2, b) = (op.params.c * op.params.c, op.params.b);
    let combo: Vec<T> =
        v.v1.iter()
            .zip(v.v2.iter())
            .map(|(&x, &y)| x.scale(c2) + y.scale(b))
            .collect();
    let w2 = apply_a(op.coeff, op.lap, &combo)?;
    let w1 = Field::from_vec(v.v2.iter().map(|&y| -y).collect());
    Ok(StateVector { v1: w1, v2: w2 })
}

/// `μ(λ) = λ²/(λb − c²)`.
pub fn mu(lambda: Complex64, params: &PhysicalParams) -> Result<Complex64> {
    let den = lambda * params.b - params.c * params.c;
    if den.norm() < MU_TOL * (1.0 + lambda.norm()) {
        return Err(Error::SingularMu {
            re: lambda.re,
            im: lambda.im,
        });
    }
    Ok(lambda * lambda / den)
}

/// Sign of the discriminant `a²b²/4 − ac²` of `λ² − abλ + ac² = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Regime {
    ComplexPair,
    RealPair,
    DoubleRoot,
}

/// The two eigenvalues of `𝒜` belonging to an eigenvalue `a_j` of `A`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModePair {
    pub a_j: f64,
    pub re_plus: f64,
    pub im_plus: f64,
    pub re_minus: f64,
    pub im_minus: f64,
    pub regime: Regime,
}

impl ModePair {
    pub fn plus(&self) -> Complex64 {
        Complex64::new(self.re_plus, self.im_plus)
    }

    pub fn minus(&self) -> Complex64 {
        Complex64::new(self.re_minus, self.im_minus)
    }

    pub fn min_re(&self) -> f64 {
        self.re_plus.min(self.re_minus)
    }
}

/// Roots `ab/2 ± √(a²b²/4 − ac²)` of `μ(λ) = a`.
///
/// In the real regime the smaller root is formed as `ac²/λ₊` to avoid
/// cancellation. A vanishing discriminant returns the double root twice.
pub fn lambda_pair(a: f64, params: &PhysicalParams) -> ModePair {
    let (b, c2) = (params.b, params.c * params.c);
    let half = 0.5 * a * b;
    let disc = half * half - a * c2;
    let scale = (half * half).max(a * c2);
    if disc.abs() <= 4.0 * f64::EPSILON * scale {
        return ModePair {
            a_j: a,
            re_plus: half,
            im_plus: 0.0,
            re_minus: half,
            im_minus: 0.0,
            regime: Regime::DoubleRoot,
        };
    }
    if disc < 0.0 {
        let w = (-disc).sqrt();
        ModePair {
            a_j: a,
            re_plus: half,
            im_plus: w,
            re_minus: half,
            im_minus: -w,
            regime: Regime::ComplexPair,
        }
    } else {
        let plus = half + disc.sqrt();
        ModePair {
            a_j: a,
            re_plus: plus,
            im_plus: 0.0,
            re_minus: a * c2 / plus,
            im_minus: 0.0,
            regime: Regime::RealPair,
        }
    }
}

/// `λ₀ = min{(b/2)λ₁(A), c²/b}`.
pub fn spectral_bound(lambda1_a: f64, params: &PhysicalParams) -> f64 {
    debug_assert!(lambda1_a > 0.0);
    (0.5 * params.b * lambda1_a).min(params.c * params.c / params.b)
}

/// `|λb − c²| > tol` and `dist(μ(λ), σ(A)) > tol`; `spectrum_a` sorted ascending.
pub fn in_resolvent_set(
    lambda: Complex64,
    spectrum_a: &[f64],
    params: &PhysicalParams,
    tol: f64,
) -> bool {
    let den = lambda * params.b - params.c * params.c;
    if den.norm() <= tol {
        return false;
    }
    let m = lambda * lambda / den;
    distance_to_spectrum(m, spectrum_a) > tol
}

/// Distance from `z` to a sorted set of reals.
pub fn distance_to_spectrum(z: Complex64, spectrum: &[f64]) -> f64 {
    let k = spectrum.partition_point(|&s| s < z.re);
    [k.checked_sub(1), Some(k)]
        .into_iter()
        .flatten()
        .filter_map(|i| spectrum.get(i))
        .map(|&s| (z - s).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Factorized `(λ − 𝒜_h)^{-1}` using `R_λ = (−λ²I + (λb − c²)A)^{-1}`:
///
/// ```text
///                ⎡ −R_λ(λ − bA)          R_λ  ⎤
/// (λ − 𝒜)^{-1} = ⎣ I + λR_λ(λ − bA)    −λR_λ  ⎦
/// ```
pub struct Resolvent<'a> {
    lambda: Complex64,
    op: BlockOperator<'a>,
    r_lambda: BandLu<Complex64>,
    conditioning: f64,
}

impl<'a> Resolvent<'a> {
    pub fn new(lambda: Complex64, op: BlockOperator<'a>) -> Result<Self> {
        let params = op.params;
        mu(lambda, &params)?;
        let n = op.block_dim();
        let scale = lambda * params.b - params.c * params.c;
        let shift = vec![-lambda * lambda; n];
        let rows: Vec<Complex64> = op.coeff.values().iter().map(|&a| scale * a).collect();
        let band = op.lap.to_band(&shift, &rows);
        let a_norm = op
            .coeff
            .values()
            .iter()
            .enumerate()
            .map(|(i, &a)| a * op.lap.row(i).1.iter().map(|l| l.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let lam = lambda.norm();
        let norm = band.norm_inf() + lam * (2.0 * lam + params.b * a_norm);
        let singular = |conditioning: f64| Error::SingularResolvent {
            re: lambda.re,
            im: lambda.im,
            residual: f64::INFINITY,
            conditioning,
        };
        let r_lambda = band.factor().map_err(|_| singular(0.0))?;
        let conditioning = smallest_eigenvalue_estimate(&r_lambda) / norm;
        if !(conditioning >= RESOLVENT_SINGULAR_TOL) {
            return Err(singular(conditioning));
        }
        Ok(Resolvent {
            lambda,
            op,
            r_lambda,
            conditioning,
        })
    }

    /// Estimated `min |eig(M)| / (‖M‖_∞ + |λ|·‖∂M/∂λ‖_∞)`, see [`RESOLVENT_SINGULAR_TOL`].
    pub fn conditioning(&self) -> f64 {
        self.conditioning
    }

    /// Solves `(λ − 𝒜_h) v = rhs` with two `N`-dimensional solves and checks
    /// the residual.
    pub fn apply(&self, rhs: &StateVector<Complex64>) -> Result<StateVector<Complex64>> {
        let n = self.op.block_dim();
        check_dims(n, rhs.v1.len())?;
        check_dims(n, rhs.v2.len())?;
        let lambda = self.lambda;
        let b = self.op.params.b;
        // (λ − bA) f₁
        let af1 = apply_a(self.op.coeff, self.op.lap, &rhs.v1)?;
        let mut g: Vec<Complex64> = rhs
            .v1
            .iter()
            .zip(af1.iter())
            .map(|(&f, &af)| lambda * f - af * b)
            .collect();
        self.r_lambda.solve_in_place(&mut g);
        let h = self.r_lambda.solve(&rhs.v2);
        let v1: Vec<Complex64> = g.iter().zip(&h).map(|(&g, &h)| h - g).collect();
        let v2: Vec<Complex64> = rhs
            .v1
            .iter()
            .zip(g.iter().zip(&h))
            .map(|(&f, (&g, &h))| f + lambda * g - lambda * h)
            .collect();
        let v = StateVector {
            v1: Field::from_vec(v1),
            v2: Field::from_vec(v2),
        };
        let residual = self.relative_residual(&v, rhs)?;
        if !(residual <= RESOLVENT_RESIDUAL_TOL) {
            return Err(Error::SingularResolvent {
                re: lambda.re,
                im: lambda.im,
                residual,
                conditioning: self.conditioning,
            });
        }
        Ok(v)
    }

    /// `‖(λ − 𝒜_h)v − rhs‖ / ‖rhs‖` (absolute when `rhs = 0`).
    pub fn relative_residual(
        &self,
        v: &StateVector<Complex64>,
        rhs: &StateVector<Complex64>,
    ) -> Result<f64> {
        let av = apply_block(&self.op, v)?;
        let mut r = Vec::with_capacity(2 * self.op.block_dim());
        for (i, (&x, &ax)) in v.v1.iter().zip(av.v1.iter()).enumerate() {
            r.push(self.lambda * x - ax - rhs.v1[i]);
        }
        for (i, (&x, &ax)) in v.v2.iter().zip(av.v2.iter()).enumerate() {
            r.push(self.lambda * x - ax - rhs.v2[i]);
        }
        let rhs_norm = norm2(&rhs.v1).hypot(norm2(&rhs.v2));
        let r_norm = norm2(&r);
        Ok(if rhs_norm > 0.0 {
            r_norm / rhs_norm
        } else {
            r_norm
        })
    }
}

/// Lower estimate of the smallest eigenvalue modulus of the factorized
/// matrix: a few steps of inverse iteration from a fixed start vector.
fn smallest_eigenvalue_estimate(lu: &BandLu<Complex64>) -> f64 {
    let n = lu.dim();
    let mut x: Vec<Complex64> = (0..n)
        .map(|i| {
            let t = (i + 1) as f64;
            Complex64::new((0.7 * t).sin() + 0.3, (1.3 * t).cos())
        })
        .collect();
    let mut growth = 0.0_f64;
    for _ in 0..4 {
        let xn = norm2(&x);
        lu.solve_in_place(&mut x);
        let yn = norm2(&x);
        if !yn.is_finite() {
            return 0.0;
        }
        growth = growth.max(yn / xn);
        let s = 1.0 / yn;
        x.iter_mut().for_each(|v| *v = v.scale(s));
    }
    1.0 / growth
}

/// Solves `(λ − 𝒜_h) v = rhs` via the `R_λ` block formula.
pub fn resolvent_apply(
    lambda: Complex64,
    coeff: &CoefficientField,
    lap: &SparseOperator,
    params: &PhysicalParams,
    rhs: &StateVector<Complex64>,
) -> Result<StateVector<Complex64>> {
    if rhs.v1.iter().chain(rhs.v2.iter()).all(|z| z.is_zero()) {
        check_dims(lap.dim(), rhs.v1.len())?;
        check_dims(lap.dim(), rhs.v2.len())?;
        mu(lambda, params)?;
        return Ok(rhs.clone());
    }
    let op = BlockOperator::new(lap, coeff, *params)?;
    Resolvent::new(lambda, op)?.apply(rhs)
}

/// Spectral summary of `𝒜_h` for a frozen coefficient.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectralReport {
    /// Smallest eigenvalue of `A_h` (inverse iteration).
    #[cfg_attr(feature = "serde", serde(rename = "lambda1_A"))]
    pub lambda1_a: f64,
    /// Continuum `λ₁(A)` for comparison, when known.
    #[cfg_attr(
        feature = "serde",
        serde(
            rename = "lambda1_A_continuum",
            default,
            skip_serializing_if = "Option::is_none"
        )
    )]
    pub lambda1_a_continuum: Option<f64>,
    pub lambda0: f64,
    /// Pairs for the smallest eigenvalues `a_j` of `A_h`.
    pub modes: Vec<ModePair>,
    /// `sup Re σ(−𝒜_h)`, over the whole discrete spectrum.
    pub spectral_abscissa: f64,
}

impl SpectralReport {
    /// Every eigenvalue of `𝒜_h` listed in the report.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.modes
            .iter()
            .flat_map(|m| [m.plus(), m.minus()])
            .collect()
    }
}

/// Eigenvalues `a_j` of `A_h = diag(a)·L`, the spectral bound and the pairs
/// `lambda_pair(a_j)` for the `n_modes` smallest `a_j`.
pub fn block_spectrum(
    coeff: &CoefficientField,
    lap: &SparseOperator,
    params: &PhysicalParams,
    n_modes: usize,
) -> Result<SpectralReport> {
    let n = lap.dim();
    check_dims(n, coeff.len())?;
    if n_modes > n {
        return Err(Error::TooManyModes {
            requested: n_modes,
            cap: n,
        });
    }
    let spectrum = weighted_eigenvalues(lap, coeff.values())?;
    let lambda1_a = lambda1(lap, Some(coeff.values()), LAMBDA1_TOL)?;
    let lambda0 = spectral_bound(lambda1_a, params);
    let all: Vec<ModePair> = spectrum.iter().map(|&a| lambda_pair(a, params)).collect();
    let min_re = all
        .iter()
        .map(ModePair::min_re)
        .fold(f64::INFINITY, f64::min);
    Ok(SpectralReport {
        lambda1_a,
        lambda1_a_continuum: None,
        lambda0,
        modes: all[..n_modes].to_vec(),
        spectral_abscissa: -min_re,
    })
}

/// All eigenvalues `a_j` of `A_h`, ascending.
pub fn coefficient_spectrum(coeff: &CoefficientField, lap: &SparseOperator) -> Result<Vec<f64>> {
    weighted_eigenvalues(lap, coeff.values())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{analytic_eigenpairs, build_dirichlet_laplacian, rayleigh_quotient, Grid};
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn unit() -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn coefficient_from_state() {
        let p = unit();
        let a = assemble_coefficient(&[0.0; 4], &p, 0.45).unwrap();
        assert!(a.values().iter().all(|&x| x == 1.0));
        let a = assemble_coefficient(&[0.25; 4], &p, 0.45).unwrap();
        assert!(a.values().iter().all(|&x| x == 2.0));
        assert_eq!(a.lower_bound(), 2.0);
        let err = assemble_coefficient(&[0.1, -0.6, 0.2], &p, 0.45).unwrap_err();
        assert_eq!(
            err,
            Error::ParabolicityViolation {
                node: 1,
                value: 0.6,
                margin: 0.45
            }
        );
    }

    #[test]
    fn params_must_be_positive() {
        assert!(PhysicalParams::new(0.0, 1.0, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, -1.0, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn apply_a_on_first_mode_and_scaling() {
        let g = Grid::interval(PI, 200).unwrap();
        let l = build_dirichlet_laplacian(&g);
        let phi = &analytic_eigenpairs(&g, 1).unwrap()[0].field;
        let one = CoefficientField::uniform(g.len(), 1.0).unwrap();
        let two = CoefficientField::uniform(g.len(), 2.0).unwrap();
        let au = apply_a(&one, &l, phi).unwrap();
        let h = g.h_per_axis()[0];
        for (x, y) in phi.iter().zip(au.iter()) {
            assert!((y - x).abs() <= h * h, "{y} vs {x}");
        }
        let au2 = apply_a(&two, &l, phi).unwrap();
        for (a, b) in au.iter().zip(au2.iter()) {
            assert_eq!(2.0 * a, *b);
        }
        let zero = apply_a(&one, &l, &vec![0.0; g.len()]).unwrap();
        assert!(zero.iter().all(|&x| x == 0.0));
        assert!(apply_a(&one, &l, &[0.0; 3]).is_err());
    }

    #[test]
    fn block_action_on_eigenmodes() {
        let g = Grid::interval(PI, 100).unwrap();
        let l = build_dirichlet_laplacian(&g);
        let a = CoefficientField::uniform(g.len(), 1.0).unwrap();
        let p = PhysicalParams::new(2.0, 0.5, 1.0).unwrap();
        let op = BlockOperator::new(&l, &a, p).unwrap();
        let phi = analytic_eigenpairs(&g, 2).unwrap().remove(1).field;
        let aj = rayleigh_quotient(&l, &phi);
        let z = Field::zeros(g.len());

        let w = op
            .apply(&StateVector::new(phi.clone(), z.clone()).unwrap())
            .unwrap();
        assert!(w.v1.iter().all(|&x| x == 0.0));
        for (x, y) in phi.iter().zip(w.v2.iter()) {
            assert_relative_eq!(*y, 4.0 * aj * x, epsilon = 1e-9);
        }
        let w = op
            .apply(&StateVector::new(z.clone(), phi.clone()).unwrap())
            .unwrap();
        for ((x, y1), y2) in phi.iter().zip(w.v1.iter()).zip(w.v2.iter()) {
            assert_eq!(*y1, -x);
            assert_relative_eq!(*y2, 0.5 * aj * x, epsilon = 1e-9);
        }
        let w = op.apply(&StateVector::<f64>::zeros(g.len())).unwrap();
        assert!(w.v1.iter().chain(w.v2.iter()).all(|&x| x == 0.0));
    }

    #[test]
    fn mu_values_and_singular_point() {
        let p = unit();
        assert_relative_eq!(mu(Complex64::new(2.0, 0.0), &p).unwrap().re, 4.0);
        assert_eq!(
            mu(Complex64::new(0.0, 0.0), &p).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        assert_eq!(
            mu(Complex64::new(1.0, 0.0), &p),
            Err(Error::SingularMu { re: 1.0, im: 0.0 })
        );
    }

    #[test]
    fn lambda_pair_regimes() {
        let p = unit();
        let d = lambda_pair(4.0, &p);
        assert_eq!(d.regime, Regime::DoubleRoot);
        assert_eq!((d.re_plus, d.re_minus), (2.0, 2.0));

        let c = lambda_pair(1.0, &p);
        assert_eq!(c.regime, Regime::ComplexPair);
        assert_relative_eq!(c.re_plus, 0.5);
        assert_relative_eq!(c.im_plus, 3f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_eq!(c.minus(), c.plus().conj());

        let r = lambda_pair(100.0, &p);
        assert_eq!(r.regime, Regime::RealPair);
        // quadratic formula oracle
        let small = 50.0 - (2500.0_f64 - 100.0).sqrt();
        assert_relative_eq!(r.re_minus, small, max_relative = 1e-12);
        assert!(r.re_minus > 1.0 && r.re_minus < 2.0);
    }

    #[test]
    fn spectral_bound_branches() {
        let p = unit();
        assert_eq!(spectral_bound(1.0, &p), 0.5);
        assert_eq!(spectral_bound(4.0, &p), 1.0);
        // b → tb and c → tc scale both branches by t.
        let t = 3.0;
        let q = PhysicalParams::new(t, t, 1.0).unwrap();
        for l1 in [0.3, 1.0, 4.0, 10.0] {
            assert_relative_eq!(
                spectral_bound(l1, &q),
                t * spectral_bound(l1, &p),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn resolvent_set_membership() {
        let p = unit();
        let spec = [1.0, 4.0, 9.0];
        assert!(in_resolvent_set(Complex64::new(-1.0, 0.0), &spec, &p, 1e-8));
        assert!(!in_resolvent_set(
            lambda_pair(1.0, &p).plus(),
            &spec,
            &p,
            1e-8
        ));
        assert!(!in_resolvent_set(Complex64::new(1.0, 0.0), &spec, &p, 1e-8));
        assert_eq!(distance_to_spectrum(Complex64::new(5.0, 0.0), &spec), 1.0);
        assert_eq!(distance_to_spectrum(Complex64::new(20.0, 0.0), &spec), 11.0);
    }

    #[test]
    fn resolvent_of_zero_rhs_is_zero() {
        let g = Grid::interval(PI, 20).unwrap();
        let l = build_dirichlet_laplacian(&g);
        let a = CoefficientField::uniform(g.len(), 1.0).unwrap();
        let z = StateVector::<Complex64>::zeros(g.len());
        let v = resolvent_apply(Complex64::new(-1.0, 0.0), &a, &l, &unit(), &z).unwrap();
        assert_eq!(v, z);
    }

    #[test]
    fn resolvent_rejects_spectral_points() {
        let g = Grid::interval(PI, 30).unwrap();
        let l = build_dirichlet_laplacian(&g);
        let a = CoefficientField::uniform(g.len(), 1.0).unwrap();
        let p = unit();
        let spec = coefficient_spectrum(&a, &l).unwrap();
        let rhs = StateVector::new(
            Field::from_vec(vec![Complex64::new(1.0, 0.0); g.len()]),
            Field::from_vec(vec![Complex64::new(0.0, 1.0); g.len()]),
        )
        .unwrap();
        for &aj in spec.iter().step_by(7) {
            let pair = lambda_pair(aj, &p);
            for lam in [pair.plus(), pair.minus()] {
                let err = resolvent_apply(lam, &a, &l, &p, &rhs).unwrap_err();
                assert!(
                    matches!(err, Error::SingularResolvent { .. }),
                    "{lam}: {err:?}"
                );
            }
        }
        assert!(matches!(
            resolvent_apply(Complex64::new(1.0, 0.0), &a, &l, &p, &rhs),
            Err(Error::SingularMu { .. })
        ));
    }

    #[test]
    fn block_spectrum_regime_flags() {
        let g = Grid::interval(PI, 40).unwrap();
        let l = build_dirichlet_laplacian(&g);
        let a = CoefficientField::uniform(g.len(), 1.0).unwrap();
        let r = block_spectrum(&a, &l, &unit(), 40).unwrap();
        for m in &r.modes {
            let expected = if m.a_j <= 4.0 {
                Regime::ComplexPair
            } else {
                Regime::RealPair
            };
            assert_eq!(m.regime, expected, "a_j = {}", m.a_j);
            assert!(m.min_re() >= r.lambda0 - 1e-12);
        }
        assert_relative_eq!(r.lambda0, 0.5 * r.lambda1_a);
        assert!(block_spectrum(&a, &l, &unit(), 41).is_err());
    }
}
