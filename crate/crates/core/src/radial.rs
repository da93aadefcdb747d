//! Radial grids, the radial Laplacian, the resolvent `(-Δ + V)^{-1}` and
//! quadrature over `R^n` for radial integrands.
//!
//! The discrete operator is a conservative finite-volume stencil: node `i`
//! owns the shell `[r_i - h/2, r_i + h/2]` (clipped at 0 and `R`) with volume
//! `W_i = ∫ r^{n-1} dr`, and the flux through the shell face at
//! `r_{i+1/2}` is `r_{i+1/2}^{n-1} (f_{i+1} - f_i) / h`. In the interior this is
//! the usual second-order central approximation of `f'' + (n-1)/r f'`; at the
//! origin it reduces to `2n (f_1 - f_0) / h^2`, i.e. `n f''(0)` with a
//! symmetric ghost node. The outer face carries the decay-matched Robin
//! closure `w' + sqrt(V) w = 0`.
//!
//! Because the stencil is symmetric with respect to the shell volumes,
//! `Σ W_i (A u)_i v_i` equals the discrete Dirichlet form exactly. The energy
//! functionals rely on this through [`RadialOperator::integrate`].

use std::f64::consts::PI;
use std::ops::{Deref, DerefMut};

use thiserror::Error;

use crate::linalg::Tridiagonal;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RadialError {
    #[error("radial grid needs m >= 3 nodes and R > 0 (got m={nodes}, R={radius})")]
    BadGrid { nodes: usize, radius: f64 },
    #[error("field has {got} values, grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
    #[error("resolvent system is singular")]
    SingularSystem,
}

/// Uniform grid `r_i = i h` on `[0, R]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    n: usize,
    radius: f64,
    nodes: usize,
}

impl RadialGrid {
    pub fn new(n: usize, radius: f64, nodes: usize) -> Result<Self, RadialError> {
        if nodes < 3 || !(radius > 0.0) || !radius.is_finite() {
            return Err(RadialError::BadGrid { nodes, radius });
        }
        Ok(Self { n, radius, nodes })
    }

    /// R=20, m=4001 for n=1; R=15, m=3001 otherwise.
    pub fn default_for(n: usize) -> Self {
        if n == 1 {
            Self::new(1, 20.0, 4001).unwrap()
        } else {
            Self::new(n, 15.0, 3001).unwrap()
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.nodes
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.radius / (self.nodes - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.nodes {
            self.radius
        } else {
            i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nodes).map(|i| self.node(i))
    }

    /// Same node count on `[0, R / factor]`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.n, self.radius / factor, self.nodes).unwrap()
    }

    /// Grid with half the spacing on the same interval.
    pub fn refined(&self) -> Self {
        Self::new(self.n, self.radius, 2 * self.nodes - 1).unwrap()
    }

    /// Surface area of the unit sphere in `R^n`: 2, 2π, 4π, ...
    pub fn sphere_area(&self) -> f64 {
        sphere_area(self.n)
    }
}

pub fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        // 2 π^{n/2} / Γ(n/2) via the recurrence σ_{n+1} = 2π σ_{n-1} / (n-1)
        _ => 2.0 * PI * sphere_area(n - 2) / (n as f64 - 2.0),
    }
}

/// Nodal values of a radial function.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RadialField(pub Vec<f64>);

impl Deref for RadialField {
    type Target = Vec<f64>;
    fn deref(&self) -> &Vec<f64> {
        &self.0
    }
}

impl DerefMut for RadialField {
    fn deref_mut(&mut self) -> &mut Vec<f64> {
        &mut self.0
    }
}

impl From<Vec<f64>> for RadialField {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl FromIterator<f64> for RadialField {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl RadialField {
    pub fn zeros(grid: &RadialGrid) -> Self {
        Self(vec![0.0; grid.len()])
    }

    pub fn from_fn(grid: &RadialGrid, f: impl Fn(f64) -> f64) -> Self {
        grid.nodes().map(f).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        self.iter().map(|x| f(*x)).collect()
    }

    /// Local cubic interpolation at `r >= 0`. The field is continued evenly
    /// through the origin and beyond `R` by the tail `f(R) e^{-rate (r-R)} (R/r)^{(n-1)/2}`.
    pub fn sample_at(&self, grid: &RadialGrid, r: f64, tail_rate: f64) -> f64 {
        let r = r.abs();
        let last = grid.len() - 1;
        let big_r = grid.radius();
        if r >= big_r {
            let algebraic = (big_r / r).powf(0.5 * (grid.n() as f64 - 1.0));
            return self[last] * (-tail_rate * (r - big_r)).exp() * algebraic;
        }
        let h = grid.spacing();
        let s = r / h;
        let base = (s.floor() as isize).clamp(0, last as isize - 1);
        // four-point stencil base-1..base+2, reflected at the origin, shifted inward at R
        let mut start = base - 1;
        if start + 3 > last as isize {
            start = last as isize - 3;
        }
        let value_at = |j: isize| -> f64 { self[j.unsigned_abs()] };
        let t = s - start as f64;
        let mut acc = 0.0;
        for a in 0..4 {
            let mut w = 1.0;
            for b in 0..4 {
                if a != b {
                    w *= (t - b as f64) / (a as f64 - b as f64);
                }
            }
            acc += w * value_at(start + a);
        }
        acc
    }

    /// Resamples onto `target` via [`RadialField::sample_at`].
    pub fn resample(&self, from: &RadialGrid, target: &RadialGrid, tail_rate: f64) -> Self {
        target
            .nodes()
            .map(|r| self.sample_at(from, r, tail_rate))
            .collect()
    }
}

/// Conservative radial operator on a grid, for a possibly non-integer
/// dimension `dim` (used only as a continuation parameter).
#[derive(Debug, Clone)]
pub struct RadialOperator {
    grid: RadialGrid,
    /// Face coefficients `r_{i+1/2}^{dim-1} / h`, one per edge.
    face: Vec<f64>,
    /// Shell volumes `W_i`.
    volume: Vec<f64>,
    /// `R^{dim-1}`.
    outer: f64,
}

impl RadialOperator {
    pub fn new(grid: &RadialGrid) -> Self {
        Self::with_dimension(grid, grid.n() as f64)
    }

    pub fn with_dimension(grid: &RadialGrid, dim: f64) -> Self {
        let h = grid.spacing();
        let m = grid.len();
        let face = (0..m - 1)
            .map(|i| ((i as f64 + 0.5) * h).powf(dim - 1.0) / h)
            .collect();
        let volume = (0..m)
            .map(|i| {
                let r = grid.node(i);
                let a = (r - 0.5 * h).max(0.0);
                let b = (r + 0.5 * h).min(grid.radius());
                (b.powf(dim) - a.powf(dim)) / dim
            })
            .collect();
        Self {
            grid: *grid,
            face,
            volume,
            outer: grid.radius().powf(dim - 1.0),
        }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volume
    }

    /// Stiffness + `mass` times the shell volumes + Robin face term.
    /// Row `i` of the result divided by `W_i` is `(-Δ + mass) f` at node `i`.
    pub fn matrix(&self, mass: f64) -> Tridiagonal {
        let m = self.grid.len();
        let mut t = Tridiagonal::zeros(m);
        for i in 0..m {
            if i > 0 {
                t.lower[i] = -self.face[i - 1];
                t.diag[i] += self.face[i - 1];
            }
            if i + 1 < m {
                t.upper[i] = -self.face[i];
                t.diag[i] += self.face[i];
            }
            t.diag[i] += mass * self.volume[i];
        }
        t.diag[m - 1] += mass.sqrt() * self.outer;
        t
    }

    /// `(-Δ + mass) f` nodewise, with the Robin closure at `R`.
    pub fn apply(&self, f: &[f64], mass: f64) -> Vec<f64> {
        self.matrix(mass)
            .apply(f)
            .into_iter()
            .zip(&self.volume)
            .map(|(a, w)| a / w)
            .collect()
    }

    /// `(-Δ + mass)^{-1} rhs`.
    pub fn resolve(&self, rhs: &[f64], mass: f64) -> Result<Vec<f64>, RadialError> {
        let b: Vec<f64> = rhs.iter().zip(&self.volume).map(|(r, w)| r * w).collect();
        self.matrix(mass).solve(&b).ok_or(RadialError::SingularSystem)
    }

    /// `σ_{n-1} Σ W_i f_i`: the quadrature matched to the operator.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.grid.sphere_area() * f.iter().zip(&self.volume).map(|(a, w)| a * w).sum::<f64>()
    }

    /// Discrete `∫ ∇u·∇v + mass·u v` including the exterior tail carried by the
    /// Robin face, so that `form(u, v) = integrate((-Δ+mass)u · v)` exactly.
    pub fn bilinear(&self, u: &[f64], v: &[f64], mass: f64) -> f64 {
        let m = self.grid.len();
        let mut gradient = 0.0;
        for i in 0..m - 1 {
            gradient += self.face[i] * (u[i + 1] - u[i]) * (v[i + 1] - v[i]);
        }
        let mut zeroth = 0.0;
        for i in 0..m {
            zeroth += self.volume[i] * u[i] * v[i];
        }
        let tail = mass.sqrt() * self.outer * u[m - 1] * v[m - 1];
        self.grid.sphere_area() * (gradient + mass * zeroth + tail)
    }
}

/// Second-order radial Laplacian `f'' + (n-1)/r f'`; at `R` one-sided
/// differences are used so constants map to zero.
pub fn radial_laplacian(f: &RadialField, grid: &RadialGrid) -> Result<RadialField, RadialError> {
    check_len(f, grid)?;
    let op = RadialOperator::new(grid);
    let stiff = op.matrix(0.0);
    let m = grid.len();
    let mut out: Vec<f64> = (0..m)
        .map(|i| {
            let mut s = stiff.diag[i] * f[i];
            if i > 0 {
                s += stiff.lower[i] * f[i - 1];
            }
            if i + 1 < m {
                s += stiff.upper[i] * f[i + 1];
            }
            -s / op.volume[i]
        })
        .collect();
    let h = grid.spacing();
    let k = m - 1;
    let r = grid.radius();
    if m >= 4 {
        let d2 = (2.0 * f[k] - 5.0 * f[k - 1] + 4.0 * f[k - 2] - f[k - 3]) / (h * h);
        let d1 = (3.0 * f[k] - 4.0 * f[k - 1] + f[k - 2]) / (2.0 * h);
        out[k] = d2 + (grid.n() as f64 - 1.0) / r * d1;
    } else {
        let d2 = (f[k] - 2.0 * f[k - 1] + f[k - 2]) / (h * h);
        let d1 = (f[k] - f[k - 2]) / (2.0 * h);
        out[k] = d2 + (grid.n() as f64 - 1.0) / r * d1;
    }
    Ok(RadialField(out))
}

/// Solution of the resolvent problem with its normalized residual.
#[derive(Debug, Clone)]
pub struct HelmholtzSolution {
    pub field: RadialField,
    /// `|A w - W rhs|_∞ / (|A|_∞ |w|_∞ + |W rhs|_∞)`.
    pub residual: f64,
}

/// Solves `(-Δ + Id) w = rhs` with `w'(0) = 0` and `w'(R) + w(R) = 0`.
pub fn helmholtz_solve(rhs: &RadialField, grid: &RadialGrid) -> Result<HelmholtzSolution, RadialError> {
    check_len(rhs, grid)?;
    let op = RadialOperator::new(grid);
    let a = op.matrix(1.0);
    let b: Vec<f64> = rhs.iter().zip(&op.volume).map(|(r, w)| r * w).collect();
    let w = a.solve(&b).ok_or(RadialError::SingularSystem)?;
    let aw = a.apply(&w);
    let defect = aw.iter().zip(&b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    let norm_a = (0..a.len())
        .map(|i| a.diag[i].abs() + a.lower[i].abs() + a.upper[i].abs())
        .fold(0.0_f64, f64::max);
    let norm_w = w.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let norm_b = b.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let denom = norm_a * norm_w + norm_b;
    Ok(HelmholtzSolution {
        field: RadialField(w),
        residual: if denom > 0.0 { defect / denom } else { 0.0 },
    })
}

/// Result of [`quad_radial`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// `|f(R)|` exceeded `1e-8 max|f|`.
    pub tail_not_decayed: bool,
}

/// `σ_{n-1} ∫_0^R f(r) r^{n-1} dr` by composite Simpson (3/8 rule on the last
/// three intervals when the interval count is odd).
pub fn quad_radial(f: &RadialField, grid: &RadialGrid) -> Result<Quadrature, RadialError> {
    check_len(f, grid)?;
    let m = grid.len();
    let h = grid.spacing();
    let pow = grid.n() as f64 - 1.0;
    let g: Vec<f64> = grid
        .nodes()
        .zip(f.iter())
        .map(|(r, v)| if pow == 0.0 { *v } else { v * r.powf(pow) })
        .collect();
    let intervals = m - 1;
    let simpson_end = if intervals.is_multiple_of(2) { intervals } else { intervals - 3 };
    let mut sum = 0.0;
    let mut i = 0;
    while i < simpson_end {
        sum += h / 3.0 * (g[i] + 4.0 * g[i + 1] + g[i + 2]);
        i += 2;
    }
    if simpson_end < intervals {
        let j = simpson_end;
        sum += 3.0 * h / 8.0 * (g[j] + 3.0 * g[j + 1] + 3.0 * g[j + 2] + g[j + 3]);
    }
    let peak = f.max_abs();
    Ok(Quadrature {
        value: grid.sphere_area() * sum,
        tail_not_decayed: f[m - 1].abs() > 1e-8 * peak,
    })
}

fn check_len(f: &RadialField, grid: &RadialGrid) -> Result<(), RadialError> {
    if f.len() != grid.len() {
        return Err(RadialError::LengthMismatch {
            expected: grid.len(),
            got: f.len(),
        });
    }
    Ok(())
}
