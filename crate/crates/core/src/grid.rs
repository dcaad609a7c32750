//! Domains, uniform interior-node grids, grid fields and the discrete
//! Dirichlet Laplacian.
//!
//! Only interior nodes are stored; the homogeneous Dirichlet value at the
//! boundary is implied. Nodes are numbered with x fastest: `m = i + nx·j`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Deref, DerefMut};
// Float math without std; redundant once std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::{BandMatrix, Scalar};
use crate::{Error, Result};

/// Iteration cap for [`lambda1`].
pub const LAMBDA1_MAX_ITER: usize = 10_000;
/// Default relative tolerance for [`lambda1`].
pub const LAMBDA1_TOL: f64 = 1e-10;

/// Interval `(0, L)` or rectangle `(0, Lx) × (0, Ly)`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Domain {
    Interval { length: f64 },
    Rectangle { lx: f64, ly: f64 },
}

impl Domain {
    pub fn interval(length: f64) -> Result<Self> {
        let d = Domain::Interval { length };
        d.validate()?;
        Ok(d)
    }

    pub fn rectangle(lx: f64, ly: f64) -> Result<Self> {
        let d = Domain::Rectangle { lx, ly };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lengths().iter().all(|l| l.is_finite() && *l > 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidDomain(
                "lengths must be finite and strictly positive",
            ))
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Rectangle { .. } => 2,
        }
    }

    pub fn lengths(&self) -> Vec<f64> {
        match *self {
            Domain::Interval { length } => vec![length],
            Domain::Rectangle { lx, ly } => vec![lx, ly],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    domain: Domain,
    n: Vec<usize>,
    h: Vec<f64>,
}

impl Grid {
    /// Uniform grid with `n_per_axis[d]` interior points on axis `d`
    /// (spacing `L/(n + 1)`).
    pub fn new(domain: Domain, n_per_axis: &[usize]) -> Result<Self> {
        domain.validate()?;
        if n_per_axis.len() != domain.dim() {
            return Err(Error::InvalidGrid("one point count per axis is required"));
        }
        if n_per_axis.iter().any(|&n| n < 2) {
            return Err(Error::InvalidGrid("at least 2 interior points per axis"));
        }
        let h = domain
            .lengths()
            .iter()
            .zip(n_per_axis)
            .map(|(l, &n)| l / (n + 1) as f64)
            .collect();
        Ok(Grid {
            domain,
            n: n_per_axis.to_vec(),
            h,
        })
    }

    pub fn interval(length: f64, n: usize) -> Result<Self> {
        Grid::new(Domain::interval(length)?, &[n])
    }

    pub fn rectangle(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self> {
        Grid::new(Domain::rectangle(lx, ly)?, &[nx, ny])
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.n.len()
    }

    pub fn n_per_axis(&self) -> &[usize] {
        &self.n
    }

    pub fn h_per_axis(&self) -> &[f64] {
        &self.h
    }

    /// Number of interior nodes.
    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell measure `∏ h_d`, the quadrature weight of a node.
    pub fn cell_volume(&self) -> f64 {
        self.h.iter().product()
    }

    /// Coordinates of interior node `m`.
    pub fn coords(&self, m: usize) -> [f64; 2] {
        let nx = self.n[0];
        let (i, j) = (m % nx, m / nx);
        let x = (i + 1) as f64 * self.h[0];
        let y = if self.dim() > 1 {
            (j + 1) as f64 * self.h[1]
        } else {
            0.0
        };
        [x, y]
    }

    /// Samples `f(x, y)` at every interior node (`y = 0` on an interval).
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Field {
        Field::from_vec(
            (0..self.len())
                .map(|m| {
                    let [x, y] = self.coords(m);
                    f(x, y)
                })
                .collect(),
        )
    }

    pub fn check_len(&self, found: usize) -> Result<()> {
        if found == self.len() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.len(),
                found,
            })
        }
    }
}

/// Nodal values on the interior nodes of a grid.
#[derive(Clone, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct Field<T = f64>(Vec<T>);

impl<T: Scalar> Field<T> {
    pub fn zeros(n: usize) -> Self {
        Field(vec![T::zero(); n])
    }

    pub fn from_vec(values: Vec<T>) -> Self {
        Field(values)
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }

    pub fn scaled(&self, s: f64) -> Self {
        Field(self.0.iter().map(|v| v.scale(s)).collect())
    }

    /// `max_x |u(x)|` together with the node where it is attained.
    pub fn max_abs(&self) -> (usize, f64) {
        self.0
            .iter()
            .enumerate()
            .fold((0, 0.0), |(bi, bv), (i, v)| {
                let m = v.modulus();
                if m > bv || m.is_nan() {
                    (i, m)
                } else {
                    (bi, bv)
                }
            })
    }
}

impl Field<f64> {
    pub fn to_complex(&self) -> Field<crate::Complex64> {
        Field(
            self.0
                .iter()
                .map(|&v| crate::Complex64::new(v, 0.0))
                .collect(),
        )
    }
}

impl<T> Deref for Field<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> DerefMut for Field<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.0
    }
}

impl<T> From<Vec<T>> for Field<T> {
    fn from(v: Vec<T>) -> Self {
        Field(v)
    }
}

/// Square real sparse matrix in CSR layout.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    symmetric: bool,
    bandwidth: usize,
}

impl SparseOperator {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(&(i, j, _)) = triplets.iter().find(|(i, j, _)| *i >= n || *j >= n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: i.max(j) + 1,
            });
        }
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            cols.push(j);
            vals.push(v);
            row_ptr[i + 1] += 1;
            last = Some((i, j));
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut op = SparseOperator {
            n,
            row_ptr,
            cols,
            vals,
            symmetric: false,
            bandwidth: 0,
        };
        op.bandwidth = (0..n)
            .flat_map(|i| op.row(i).0.iter().map(move |&j| i.abs_diff(j)))
            .max()
            .unwrap_or(0);
        op.symmetric = op.check_symmetric();
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Symmetry flag computed at construction (entrywise transpose check).
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Largest `|i − j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        c.binary_search(&j).map(|k| v[k]).unwrap_or(0.0)
    }

    fn check_symmetric(&self) -> bool {
        (0..self.n).all(|i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).all(|(&j, &x)| self.get(j, i) == x)
        })
    }

    /// `y = L x`.
    pub fn apply<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (&j, &a)| acc + x[j].scale(a))
            })
            .collect()
    }

    /// Band matrix `M = diag(shift) + diag(row_scale)·L`.
    pub fn to_band<T: Scalar>(&self, shift: &[T], row_scale: &[T]) -> BandMatrix<T> {
        let bw = self.bandwidth;
        let mut m = BandMatrix::zeros(self.n, bw, bw);
        for i in 0..self.n {
            m.add(i, i, shift[i]);
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                m.add(i, j, row_scale[i].scale(a));
            }
        }
        m
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                d[i * self.n + j] = a;
            }
        }
        d
    }
}

/// Positive discrete operator `−Δ_h` with homogeneous Dirichlet conditions:
/// 3-point stencil on an interval, 5-point stencil on a rectangle.
pub fn build_dirichlet_laplacian(grid: &Grid) -> SparseOperator {
    let n = grid.len();
    let nx = grid.n[0];
    let ny = if grid.dim() > 1 { grid.n[1] } else { 1 };
    let cx = 1.0 / (grid.h[0] * grid.h[0]);
    let cy = if grid.dim() > 1 {
        1.0 / (grid.h[1] * grid.h[1])
    } else {
        0.0
    };
    let mut t = Vec::with_capacity(5 * n);
    for j in 0..ny {
        for i in 0..nx {
            let m = i + nx * j;
            t.push((m, m, 2.0 * cx + 2.0 * cy));
            if i > 0 {
                t.push((m, m - 1, -cx));
            }
            if i + 1 < nx {
                t.push((m, m + 1, -cx));
            }
            if grid.dim() > 1 {
                if j > 0 {
                    t.push((m, m - nx, -cy));
                }
                if j + 1 < ny {
                    t.push((m, m + nx, -cy));
                }
            }
        }
    }
    SparseOperator::from_triplets(n, t).expect("stencil indices are in range")
}

/// Continuum Dirichlet eigenpair of `−Δ` sampled on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigenpair {
    pub eigenvalue: f64,
    /// Mode indices `(j)` or `(jx, jy)`, starting at 1.
    pub mode: Vec<usize>,
    /// `∏ sin(j_d π x_d / L_d)` at the interior nodes.
    pub field: Field,
}

/// The `count` smallest continuum eigenvalues of `−Δ_D` on the grid's domain,
/// `Σ_d (j_d π / L_d)²`, with their sine eigenfunctions sampled on the grid.
///
/// At most `grid.len()` pairs can be requested; beyond that the sampled
/// modes alias.
pub fn analytic_eigenpairs(grid: &Grid, count: usize) -> Result<Vec<Eigenpair>> {
    if count == 0 {
        return Err(Error::InvalidConfig("eigenpair count must be at least 1"));
    }
    if count > grid.len() {
        return Err(Error::TooManyModes {
            requested: count,
            cap: grid.len(),
        });
    }
    let lengths = grid.domain.lengths();
    let wave = |j: usize, l: f64| {
        let k = j as f64 * PI / l;
        k * k
    };
    let mut modes: Vec<(f64, Vec<usize>)> = match grid.dim() {
        1 => (1..=count)
            .map(|j| (wave(j, lengths[0]), vec![j]))
            .collect(),
        _ => {
            let jx_max = count.min(grid.n[0]);
            let jy_max = count.min(grid.n[1]);
            let mut v = Vec::with_capacity(jx_max * jy_max);
            for jy in 1..=jy_max {
                for jx in 1..=jx_max {
                    v.push((wave(jx, lengths[0]) + wave(jy, lengths[1]), vec![jx, jy]));
                }
            }
            v
        }
    };
    modes.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    modes.truncate(count);
    Ok(modes
        .into_iter()
        .map(|(eigenvalue, mode)| {
            let kx = mode[0] as f64 * PI / lengths[0];
            let ky = mode.get(1).map(|&j| j as f64 * PI / lengths[1]);
            let field = grid.sample(|x, y| match ky {
                Some(ky) => (kx * x).sin() * (ky * y).sin(),
                None => (kx * x).sin(),
            });
            Eigenpair {
                eigenvalue,
                mode,
                field,
            }
        })
        .collect())
}

/// `uᵀ L u / uᵀ u`.
pub fn rayleigh_quotient(op: &SparseOperator, u: &[f64]) -> f64 {
    let lu = op.apply(u);
    let num: f64 = u.iter().zip(&lu).map(|(a, b)| a * b).sum();
    let den: f64 = u.iter().map(|a| a * a).sum();
    num / den
}

/// Smallest eigenvalue of `a(x)·L` (`a ≡ 1` when `coeff` is `None`) by
/// inverse power iteration.
///
/// `a·L` is self-adjoint in the weighted inner product `⟨u, v⟩_{1/a}`, so the
/// Rayleigh quotient `uᵀLu / uᵀ(u/a)` is used as the eigenvalue estimate.
/// Iteration stops once successive estimates agree to relative `tol`.
/// A constant `a ≡ s` returns `s` times the result for `a ≡ 1`.
pub fn lambda1(op: &SparseOperator, coeff: Option<&[f64]>, tol: f64) -> Result<f64> {
    let n = op.dim();
    let weight: Vec<f64> = match coeff {
        Some(a) => {
            if a.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: a.len(),
                });
            }
            if let Some((node, &value)) = a
                .iter()
                .enumerate()
                .find(|(_, v)| !(v.is_finite() && **v > 0.0))
            {
                return Err(Error::NonPositiveCoefficient { node, value });
            }
            // a constant coefficient scales the spectrum exactly
            if a.windows(2).all(|w| w[0] == w[1]) && a.first().is_some_and(|&s| s != 1.0) {
                return Ok(a[0] * lambda1(op, None, tol)?);
            }
            a.iter().map(|v| 1.0 / v).collect()
        }
        None => vec![1.0; n],
    };
    let lu = op.to_band(&vec![0.0; n], &vec![1.0; n]).factor()?;

    let weighted_norm = |x: &[f64]| -> f64 {
        x.iter()
            .zip(&weight)
            .map(|(v, w)| v * v * w)
            .sum::<f64>()
            .sqrt()
    };
    let mut x = vec![1.0; n];
    let s = weighted_norm(&x);
    x.iter_mut().for_each(|v| *v /= s);
    let mut theta = f64::INFINITY;
    for _ in 0..LAMBDA1_MAX_ITER {
        // (a L)^{-1} x = L^{-1} (x / a)
        let mut y: Vec<f64> = x.iter().zip(&weight).map(|(v, w)| v * w).collect();
        lu.solve_in_place(&mut y);
        let s = weighted_norm(&y);
        y.iter_mut().for_each(|v| *v /= s);
        let ly = op.apply(&y);
        let next = y.iter().zip(&ly).map(|(a, b)| a * b).sum::<f64>();
        x = y;
        if (next - theta).abs() <= tol * next.abs() {
            return Ok(next);
        }
        theta = next;
    }
    Err(Error::NoConvergence {
        iterations: LAMBDA1_MAX_ITER,
    })
}

/// All eigenvalues of `a(x)·L` for symmetric `L`, ascending.
///
/// Computed from the symmetric similarity transform `√a L √a`.
pub fn weighted_eigenvalues(op: &SparseOperator, coeff: &[f64]) -> Result<Vec<f64>> {
    let n = op.dim();
    if coeff.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: coeff.len(),
        });
    }
    let root: Vec<f64> = coeff.iter().map(|a| a.sqrt()).collect();
    if op.bandwidth() <= 1 {
        let diag: Vec<f64> = (0..n).map(|i| coeff[i] * op.get(i, i)).collect();
        let off: Vec<f64> = (0..n.saturating_sub(1))
            .map(|i| root[i] * op.get(i + 1, i) * root[i + 1])
            .collect();
        return crate::linalg::symmetric_tridiagonal_eigenvalues(&diag, &off);
    }
    let mut dense = vec![0.0; n * n];
    for i in 0..n {
        let (c, v) = op.row(i);
        for (&j, &a) in c.iter().zip(v) {
            dense[i * n + j] = root[i] * a * root[j];
        }
    }
    crate::linalg::symmetric_eigenvalues(dense, n)
}
