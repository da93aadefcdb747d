//! Radial ground states of the frozen-coefficient system
//!
//! ```text
//! -Δu + V u = K |v|^{q-1} v,   -Δv + V v = Q |u|^{p-1} u   in R^n
//! ```
//!
//! solved by damped Newton on the conservative radial discretization of
//! [`crate::radial`]. The canonical problem has `K = Q = V = 1`; every other
//! constant-coefficient problem is an exact rescaling of it.

use thiserror::Error;

use crate::dual;
use crate::linalg::{BlockTridiagonal, Tridiagonal};
use crate::model::{validate_params, ModelError, ProblemParams};
use crate::newton::{self, NewtonError, NewtonOptions, NewtonSystem};
use crate::radial::{RadialField, RadialGrid, RadialOperator};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GroundStateError {
    #[error("groundstate::{op}({params}): {source}")]
    Newton {
        op: &'static str,
        params: String,
        #[source]
        source: NewtonError,
    },
    #[error("groundstate::{op}({params}): converged to a trivial or sign-changing solution ({detail})")]
    PositivityLost {
        op: &'static str,
        params: String,
        detail: String,
    },
    #[error("groundstate::{op}: invalid exponents: {source}")]
    Model {
        op: &'static str,
        #[source]
        source: ModelError,
    },
    #[error("groundstate::rescale_to_local: coefficients must be positive (K={k}, Q={q}, V={v})")]
    NonpositiveCoefficient { k: f64, q: f64, v: f64 },
    #[error("groundstate::estimate_decay_rate: window [{lo}, {hi}] reaches the floating-point floor of the tail")]
    WindowTooNoisy { lo: f64, hi: f64 },
    #[error("groundstate::estimate_decay_rate: window [{lo}, {hi}] must lie inside (0, {radius}) and hold at least 3 nodes")]
    BadWindow { lo: f64, hi: f64, radius: f64 },
}

type Result<T> = std::result::Result<T, GroundStateError>;

/// Frozen coefficients `(K(z), Q(z), V(z))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub k: f64,
    pub q: f64,
    pub v: f64,
}

impl Coefficients {
    pub const UNIT: Coefficients = Coefficients {
        k: 1.0,
        q: 1.0,
        v: 1.0,
    };

    pub fn new(k: f64, q: f64, v: f64) -> Self {
        Self { k, q, v }
    }

    pub fn is_positive(&self) -> bool {
        self.k > 0.0 && self.q > 0.0 && self.v > 0.0
    }
}

/// Sign-preserving power `|s|^{e-1} s`.
pub fn spow(s: f64, e: f64) -> f64 {
    s.abs().powf(e - 1.0) * s
}

/// Sampled radial pair `(u, v)` on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfilePair {
    pub u: RadialField,
    pub v: RadialField,
    pub grid: RadialGrid,
}

impl RadialProfilePair {
    pub fn new(u: RadialField, v: RadialField, grid: RadialGrid) -> Self {
        assert_eq!(u.len(), grid.len());
        assert_eq!(v.len(), grid.len());
        Self { u, v, grid }
    }

    pub fn swapped(&self) -> Self {
        Self::new(self.v.clone(), self.u.clone(), self.grid)
    }

    pub fn scaled(&self, su: f64, sv: f64) -> Self {
        Self::new(self.u.map(|x| su * x), self.v.map(|x| sv * x), self.grid)
    }

    fn interleave(&self) -> Vec<f64> {
        self.u.iter().zip(self.v.iter()).flat_map(|(a, b)| [*a, *b]).collect()
    }

    fn from_interleaved(x: &[f64], grid: RadialGrid) -> Self {
        let u = x.iter().step_by(2).copied().collect();
        let v = x.iter().skip(1).step_by(2).copied().collect();
        Self::new(u, v, grid)
    }

    /// Both tails at `R` are below `1e-8` of their peaks.
    pub fn tail_decayed(&self) -> bool {
        let last = self.grid.len() - 1;
        self.u[last].abs() <= 1e-8 * self.u.max_abs() && self.v[last].abs() <= 1e-8 * self.v.max_abs()
    }

    /// Positive on `[0, R)`, non-increasing (up to `1e-12` of the peak) and
    /// with tail values below `1e-6` of the peak.
    pub fn check_shape(&self) -> std::result::Result<(), String> {
        for (name, f) in [("u", &self.u), ("v", &self.v)] {
            let peak = f[0];
            if !(peak > 0.0) || !f.is_finite() {
                return Err(format!("{name}(0) = {peak}"));
            }
            let last = f.len() - 1;
            if let Some(i) = f[..last].iter().position(|x| *x <= 0.0) {
                return Err(format!("{name} is nonpositive at r = {}", self.grid.node(i)));
            }
            if let Some(i) = (0..last).find(|&i| f[i + 1] - f[i] > 1e-12 * peak) {
                return Err(format!("{name} increases at r = {}", self.grid.node(i)));
            }
            if f[last].abs() > 1e-6 * peak {
                return Err(format!("{name}(R)/{name}(0) = {:.2e}", f[last] / peak));
            }
        }
        Ok(())
    }

    /// Resamples onto another grid; `tail_rate` continues the profile beyond `R`.
    pub fn resample(&self, target: &RadialGrid, tail_rate: f64) -> Self {
        Self::new(
            self.u.resample(&self.grid, target, tail_rate),
            self.v.resample(&self.grid, target, tail_rate),
            *target,
        )
    }
}

/// Canonical solution with its energy constant and decay rate.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateRecord {
    pub params: ProblemParams,
    pub profile: RadialProfilePair,
    pub peak_u: f64,
    pub peak_v: f64,
    /// Branch energy `f(u, v)` with `K = Q = V = 1`.
    pub gamma: f64,
    /// Fitted exponential decay rate of the tail.
    pub theta: f64,
    pub newton_residual: f64,
    pub newton_iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub newton: NewtonOptions,
    /// Continuation steps per unit of exponent distance.
    pub steps_per_unit: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            newton: NewtonOptions::default(),
            steps_per_unit: 10.0,
        }
    }
}

// ---------------------------------------------------------------------------
// Discrete systems

struct ScalarSystem {
    op: RadialOperator,
    matrix: Tridiagonal,
    p: f64,
}

impl ScalarSystem {
    fn new(grid: &RadialGrid, dim: f64, p: f64) -> Self {
        let op = RadialOperator::with_dimension(grid, dim);
        let matrix = op.matrix(1.0);
        Self { op, matrix, p }
    }
}

impl NewtonSystem for ScalarSystem {
    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let au = self.matrix.apply(x);
        au.iter()
            .zip(self.op.volumes())
            .zip(x)
            .map(|((a, w), u)| a / w - spow(*u, self.p))
            .collect()
    }

    fn direction(&self, x: &[f64], f: &[f64]) -> Option<Vec<f64>> {
        let w = self.op.volumes();
        let mut j = Tridiagonal::zeros(x.len());
        for i in 0..x.len() {
            j.lower[i] = self.matrix.lower[i] / w[i];
            j.upper[i] = self.matrix.upper[i] / w[i];
            j.diag[i] = self.matrix.diag[i] / w[i] - self.p * x[i].abs().powf(self.p - 1.0);
        }
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        j.solve(&rhs)
    }

    fn scale(&self, x: &[f64]) -> f64 {
        x.iter().fold(0.0_f64, |m, u| m.max(u.abs().powf(self.p)))
    }
}

/// Coupled radial system with unknowns interleaved as `(u_0, v_0, u_1, ...)`.
pub(crate) struct CoupledSystem {
    op: RadialOperator,
    matrix: Tridiagonal,
    p: f64,
    q: f64,
    coeffs: Coefficients,
}

impl CoupledSystem {
    pub(crate) fn new(grid: &RadialGrid, dim: f64, p: f64, q: f64, coeffs: Coefficients) -> Self {
        let op = RadialOperator::with_dimension(grid, dim);
        let matrix = op.matrix(coeffs.v);
        Self {
            op,
            matrix,
            p,
            q,
            coeffs,
        }
    }
}

impl NewtonSystem for CoupledSystem {
    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let m = x.len() / 2;
        let w = self.op.volumes();
        let t = &self.matrix;
        let mut f = vec![0.0; x.len()];
        for i in 0..m {
            for c in 0..2 {
                let mut s = t.diag[i] * x[2 * i + c];
                if i > 0 {
                    s += t.lower[i] * x[2 * (i - 1) + c];
                }
                if i + 1 < m {
                    s += t.upper[i] * x[2 * (i + 1) + c];
                }
                f[2 * i + c] = s / w[i];
            }
            f[2 * i] -= self.coeffs.k * spow(x[2 * i + 1], self.q);
            f[2 * i + 1] -= self.coeffs.q * spow(x[2 * i], self.p);
        }
        f
    }

    fn direction(&self, x: &[f64], f: &[f64]) -> Option<Vec<f64>> {
        let m = x.len() / 2;
        let w = self.op.volumes();
        let t = &self.matrix;
        let mut j = BlockTridiagonal::zeros(m);
        for i in 0..m {
            let d = t.diag[i] / w[i];
            let du = self.coeffs.q * self.p * x[2 * i].abs().powf(self.p - 1.0);
            let dv = self.coeffs.k * self.q * x[2 * i + 1].abs().powf(self.q - 1.0);
            j.diag[i] = [[d, -dv], [-du, d]];
            let l = t.lower[i] / w[i];
            let u = t.upper[i] / w[i];
            j.lower[i] = [[l, 0.0], [0.0, l]];
            j.upper[i] = [[u, 0.0], [0.0, u]];
        }
        let rhs: Vec<[f64; 2]> = (0..m).map(|i| [-f[2 * i], -f[2 * i + 1]]).collect();
        let sol = j.solve(&rhs)?;
        Some(sol.into_iter().flatten().collect())
    }

    fn scale(&self, x: &[f64]) -> f64 {
        let m = x.len() / 2;
        (0..m).fold(0.0_f64, |acc, i| {
            acc.max((self.coeffs.k * x[2 * i + 1].abs().powf(self.q)).abs())
                .max((self.coeffs.q * x[2 * i].abs().powf(self.p)).abs())
        })
    }
}

/// `max |F| / max(1, max source)` of the frozen-coefficient system on the pair's grid.
pub fn local_residual(pair: &RadialProfilePair, coeffs: Coefficients, params: &ProblemParams) -> f64 {
    let sys = CoupledSystem::new(&pair.grid, pair.grid.n() as f64, params.p(), params.q(), coeffs);
    let x = pair.interleave();
    let f = sys.residual(&x);
    f.iter().fold(0.0_f64, |m, v| m.max(v.abs())) / sys.scale(&x).max(1.0)
}

fn describe(params: &ProblemParams) -> String {
    format!("n={}, p={}, q={}", params.n(), params.p(), params.q())
}

/// `((p+1)/2)^{1/(p-1)} sech^{2/(p-1)}((p-1) r / 2)`, the exact solution for n = 1.
pub fn sech_profile(p: f64, r: f64) -> f64 {
    let amplitude = (0.5 * (p + 1.0)).powf(1.0 / (p - 1.0));
    let s = 1.0 / (0.5 * (p - 1.0) * r).cosh();
    amplitude * s.powf(2.0 / (p - 1.0))
}

fn positive_decreasing(f: &[f64]) -> bool {
    let last = f.len() - 1;
    f[0] > 1e-6 && f[..last].iter().all(|x| *x > 0.0)
}

/// Positive radial solution of `-Δu + u = u^p` on `grid`.
///
/// Newton starts from the one-dimensional closed form. If that fails in
/// higher dimension the solve is continued in the dimension parameter from 1.
pub fn scalar_ground_state(p: f64, grid: &RadialGrid, opts: &NewtonOptions) -> Result<RadialField> {
    let params = validate_params(grid.n(), p, p).map_err(|source| GroundStateError::Model {
        op: "scalar_ground_state",
        source,
    })?;
    let guess: Vec<f64> = grid.nodes().map(|r| sech_profile(p, r)).collect();
    let n = grid.n() as f64;
    let direct = newton::solve(&ScalarSystem::new(grid, n, p), guess.clone(), opts);
    if let Ok(out) = &direct {
        if positive_decreasing(&out.x) {
            return Ok(RadialField(out.x.clone()));
        }
    }
    let mut x = guess;
    let mut dim = 1.0;
    let mut step = 0.25;
    while dim < n {
        let next = (dim + step).min(n);
        match newton::solve(&ScalarSystem::new(grid, next, p), x.clone(), opts) {
            Ok(out) if positive_decreasing(&out.x) => {
                x = out.x;
                dim = next;
            }
            failed => {
                step *= 0.5;
                if step < 1e-3 {
                    return Err(match failed {
                        Err(source) => GroundStateError::Newton {
                            op: "scalar_ground_state",
                            params: format!("{} (dimension continuation at {next})", describe(&params)),
                            source,
                        },
                        Ok(_) => GroundStateError::PositivityLost {
                            op: "scalar_ground_state",
                            params: describe(&params),
                            detail: format!("dimension continuation at {next}"),
                        },
                    });
                }
            }
        }
    }
    if dim == 1.0 {
        // n == 1 and the direct solve failed
        return match direct {
            Err(source) => Err(GroundStateError::Newton {
                op: "scalar_ground_state",
                params: describe(&params),
                source,
            }),
            Ok(_) => Err(GroundStateError::PositivityLost {
                op: "scalar_ground_state",
                params: describe(&params),
                detail: "non-positive profile".into(),
            }),
        };
    }
    Ok(RadialField(x))
}

/// Newton solve of the frozen system from `guess`, returning the raw iterate.
pub(crate) fn solve_frozen(
    params: &ProblemParams,
    coeffs: Coefficients,
    guess: &RadialProfilePair,
    opts: &NewtonOptions,
    op: &'static str,
) -> Result<(RadialProfilePair, f64, usize)> {
    let sys = CoupledSystem::new(&guess.grid, guess.grid.n() as f64, params.p(), params.q(), coeffs);
    let out = newton::solve(&sys, guess.interleave(), opts).map_err(|source| GroundStateError::Newton {
        op,
        params: format!("{}, K={}, Q={}, V={}", describe(params), coeffs.k, coeffs.q, coeffs.v),
        source,
    })?;
    let pair = RadialProfilePair::from_interleaved(&out.x, guess.grid);
    pair.check_shape().map_err(|detail| GroundStateError::PositivityLost {
        op,
        params: describe(params),
        detail,
    })?;
    Ok((pair, out.residual, out.iterations))
}

fn finish_record(
    params: ProblemParams,
    profile: RadialProfilePair,
    residual: f64,
    iterations: usize,
) -> Result<GroundStateRecord> {
    let gamma = dual::direct_energy(&profile, Coefficients::UNIT, &params);
    let r = profile.grid.radius();
    let theta = decay_rate_corrected(&profile, (r / 3.0, 2.0 * r / 3.0))?;
    Ok(GroundStateRecord {
        params,
        peak_u: profile.u[0],
        peak_v: profile.v[0],
        profile,
        gamma,
        theta,
        newton_residual: residual,
        newton_iterations: iterations,
    })
}

/// Solves the coupled system from an explicit initial pair (no continuation).
pub fn solve_canonical_from(
    params: &ProblemParams,
    guess: &RadialProfilePair,
    opts: &NewtonOptions,
) -> Result<GroundStateRecord> {
    let (pair, res, its) = solve_frozen(params, Coefficients::UNIT, guess, opts, "solve_canonical")?;
    finish_record(*params, pair, res, its)
}

/// Canonical ground state (`K = Q = V = 1`).
///
/// On the diagonal `p = q` the scalar solution seeds Newton; otherwise the
/// branch is continued from the diagonal point with the same hyperbola sum
/// `1/(p+1) + 1/(q+1)`.
pub fn solve_canonical(
    params: &ProblemParams,
    grid: &RadialGrid,
    opts: &SolveOptions,
) -> Result<GroundStateRecord> {
    assert_eq!(grid.n(), params.n(), "grid and problem dimension differ");
    let (p, q) = (params.p(), params.q());
    if p == q {
        let w = scalar_ground_state(p, grid, &opts.newton)?;
        let guess = RadialProfilePair::new(w.clone(), w, *grid);
        return solve_canonical_from(params, &guess, &opts.newton);
    }
    let sum = 1.0 / (p + 1.0) + 1.0 / (q + 1.0);
    let diagonal = 2.0 / sum - 1.0;
    let seed_params = validate_params(params.n(), diagonal, diagonal).map_err(|source| {
        GroundStateError::Model {
            op: "solve_canonical",
            source,
        }
    })?;
    let seed = solve_canonical(&seed_params, grid, opts)?;
    let dist = ((p - diagonal).powi(2) + (q - diagonal).powi(2)).sqrt();
    let steps = (opts.steps_per_unit * dist).ceil().max(1.0) as usize;
    continue_in_exponents(&seed, (p, q), steps, &opts.newton)
}

/// Follows the branch of `seed` along the straight line to `target` in the
/// `(p, q)` plane, halving the step on divergence.
pub fn continue_in_exponents(
    seed: &GroundStateRecord,
    target: (f64, f64),
    steps: usize,
    opts: &NewtonOptions,
) -> Result<GroundStateRecord> {
    let n = seed.params.n();
    let (p0, q0) = (seed.params.p(), seed.params.q());
    if (p0, q0) == target {
        return Ok(seed.clone());
    }
    let steps = steps.max(1);
    let at = |s: f64| (p0 + s * (target.0 - p0), q0 + s * (target.1 - q0));
    // validate the whole path before solving anything
    let check_points = (steps * 8).max(64);
    for k in 0..=check_points {
        let (p, q) = at(k as f64 / check_points as f64);
        validate_params(n, p, q).map_err(|source| GroundStateError::Model {
            op: "continue_in_exponents",
            source,
        })?;
    }
    let mut s = 0.0;
    let mut ds = 1.0 / steps as f64;
    let min_ds = ds / 1024.0;
    let mut current = seed.profile.clone();
    let mut last = (seed.newton_residual, seed.newton_iterations);
    while s < 1.0 {
        let next = (s + ds).min(1.0);
        let (p, q) = if next >= 1.0 { target } else { at(next) };
        let params = validate_params(n, p, q).map_err(|source| GroundStateError::Model {
            op: "continue_in_exponents",
            source,
        })?;
        match solve_frozen(&params, Coefficients::UNIT, &current, opts, "continue_in_exponents") {
            Ok((pair, res, its)) => {
                current = pair;
                last = (res, its);
                s = next;
            }
            Err(err) => {
                ds *= 0.5;
                if ds < min_ds {
                    return Err(err);
                }
            }
        }
    }
    let params = validate_params(n, target.0, target.1).map_err(|source| GroundStateError::Model {
        op: "continue_in_exponents",
        source,
    })?;
    finish_record(params, current, last.0, last.1)
}

/// Scale factors `(ϖ₁, ϖ₂, μ)` mapping the canonical pair to the frozen
/// system with coefficients `c`.
pub fn rescaling_factors(params: &ProblemParams, c: Coefficients) -> (f64, f64, f64) {
    let (p, q) = (params.p(), params.q());
    let d = p * q - 1.0;
    let w1 = c.v.powf((q + 1.0) / d) / (c.q.powf(q / d) * c.k.powf(1.0 / d));
    let w2 = c.v.powf((p + 1.0) / d) / (c.q.powf(1.0 / d) * c.k.powf(p / d));
    (w1, w2, c.v.sqrt())
}

/// `u(x) = ϖ₁ ξ(μx)`, `v(x) = ϖ₂ ζ(μx)` sampled on the canonical grid.
pub fn rescale_to_local(canonical: &GroundStateRecord, kz: f64, qz: f64, vz: f64) -> Result<RadialProfilePair> {
    let c = Coefficients::new(kz, qz, vz);
    if !(c.is_positive() && kz.is_finite() && qz.is_finite() && vz.is_finite()) {
        return Err(GroundStateError::NonpositiveCoefficient { k: kz, q: qz, v: vz });
    }
    let (w1, w2, mu) = rescaling_factors(&canonical.params, c);
    let grid = canonical.profile.grid;
    if mu == 1.0 {
        return Ok(canonical.profile.scaled(w1, w2));
    }
    let sample = |f: &RadialField, w: f64| -> RadialField {
        grid.nodes().map(|r| w * f.sample_at(&grid, mu * r, 1.0)).collect()
    };
    Ok(RadialProfilePair::new(
        sample(&canonical.profile.u, w1),
        sample(&canonical.profile.v, w2),
        grid,
    ))
}

/// The same rescaling without interpolation: the canonical nodal values on
/// the grid `r_i / μ`.
pub fn rescale_on_scaled_grid(canonical: &GroundStateRecord, c: Coefficients) -> Result<RadialProfilePair> {
    if !c.is_positive() {
        return Err(GroundStateError::NonpositiveCoefficient { k: c.k, q: c.q, v: c.v });
    }
    let (w1, w2, mu) = rescaling_factors(&canonical.params, c);
    let scaled = canonical.profile.scaled(w1, w2);
    Ok(RadialProfilePair::new(scaled.u, scaled.v, canonical.profile.grid.scaled(mu)))
}

fn window_nodes(profile: &RadialProfilePair, window: (f64, f64)) -> Result<Vec<usize>> {
    let (lo, hi) = window;
    let radius = profile.grid.radius();
    if !(lo > 0.0 && hi > lo && hi < radius) {
        return Err(GroundStateError::BadWindow { lo, hi, radius });
    }
    let idx: Vec<usize> = (0..profile.grid.len())
        .filter(|&i| {
            let r = profile.grid.node(i);
            r >= lo && r <= hi
        })
        .collect();
    if idx.len() < 3 {
        return Err(GroundStateError::BadWindow { lo, hi, radius });
    }
    Ok(idx)
}

fn fit_decay(profile: &RadialProfilePair, window: (f64, f64), algebraic: f64) -> Result<f64> {
    let idx = window_nodes(profile, window)?;
    let peak = profile.u[0].abs() + profile.v[0].abs();
    let floor = 100.0 * f64::EPSILON * peak;
    let mut xs = Vec::with_capacity(idx.len());
    let mut ys = Vec::with_capacity(idx.len());
    for i in idx {
        let r = profile.grid.node(i);
        let s = profile.u[i] + profile.v[i];
        if !(s > floor) {
            return Err(GroundStateError::WindowTooNoisy {
                lo: window.0,
                hi: window.1,
            });
        }
        xs.push(r);
        ys.push(-(s * r.powf(algebraic)).ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Least-squares slope of `-log(u + v)` over `window`.
pub fn estimate_decay_rate(profile: &RadialProfilePair, window: (f64, f64)) -> Result<f64> {
    fit_decay(profile, window, 0.0)
}

/// Slope of `-log(r^{(n-1)/2} (u + v))`, removing the algebraic prefactor of
/// radial decay in `n >= 2`.
pub fn decay_rate_corrected(profile: &RadialProfilePair, window: (f64, f64)) -> Result<f64> {
    fit_decay(profile, window, 0.5 * (profile.grid.n() as f64 - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic(n: usize) -> ProblemParams {
        validate_params(n, 3.0, 3.0).unwrap()
    }

    #[test]
    fn spow_preserves_sign() {
        assert_eq!(spow(-2.0, 3.0), -8.0);
        assert_eq!(spow(2.0, 2.0), 4.0);
        assert_eq!(spow(-2.0, 2.0), -4.0);
        assert_eq!(spow(0.0, 2.5), 0.0);
    }

    #[test]
    fn closed_form_profiles() {
        assert!((sech_profile(3.0, 0.0) - 2f64.sqrt()).abs() < 1e-15);
        assert!((sech_profile(2.0, 0.0) - 1.5).abs() < 1e-15);
        let r = 0.7;
        assert!((sech_profile(2.0, r) - 1.5 / (r / 2.0).cosh().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn scalar_soliton_n1_p3() {
        let grid = RadialGrid::default_for(1);
        let u = scalar_ground_state(3.0, &grid, &NewtonOptions::default()).unwrap();
        assert!((u[0] - 2f64.sqrt()).abs() < 1e-5, "u(0) = {}", u[0]);
        for (i, r) in grid.nodes().enumerate() {
            assert!((u[i] - 2f64.sqrt() / r.cosh()).abs() < 1e-5);
        }
    }

    #[test]
    fn scalar_soliton_n1_p2() {
        let grid = RadialGrid::default_for(1);
        let u = scalar_ground_state(2.0, &grid, &NewtonOptions::default()).unwrap();
        assert!((u[0] - 1.5).abs() < 1e-5, "u(0) = {}", u[0]);
    }

    #[test]
    fn trivial_guess_is_rejected() {
        let grid = RadialGrid::new(1, 20.0, 801).unwrap();
        let zero = RadialField::zeros(&grid);
        let guess = RadialProfilePair::new(zero.clone(), zero, grid);
        let err = solve_canonical_from(&cubic(1), &guess, &NewtonOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            GroundStateError::PositivityLost { .. } | GroundStateError::Newton { .. }
        ));
    }

    #[test]
    fn continuation_to_own_exponents_is_identity() {
        let grid = RadialGrid::new(1, 20.0, 801).unwrap();
        let rec = solve_canonical(&cubic(1), &grid, &SolveOptions::default()).unwrap();
        let same = continue_in_exponents(&rec, (3.0, 3.0), 5, &NewtonOptions::default()).unwrap();
        assert_eq!(same, rec);
    }

    #[test]
    fn continuation_across_hyperbola_is_rejected_before_solving() {
        // the seed is never touched by a solve, so a dummy profile suffices
        let grid = RadialGrid::new(3, 15.0, 31).unwrap();
        let ones = RadialField::from_fn(&grid, |r| (-r).exp());
        let seed = GroundStateRecord {
            params: cubic(3),
            profile: RadialProfilePair::new(ones.clone(), ones, grid),
            peak_u: 1.0,
            peak_v: 1.0,
            gamma: 1.0,
            theta: 1.0,
            newton_residual: 0.0,
            newton_iterations: 0,
        };
        let err = continue_in_exponents(&seed, (5.0, 5.0), 5, &NewtonOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            GroundStateError::Model {
                source: ModelError::SupercriticalPair { .. },
                ..
            }
        ));
    }

    #[test]
    fn rescaling_factors_for_cubic_pair() {
        let (w1, w2, mu) = rescaling_factors(&cubic(1), Coefficients::new(2.0, 0.5, 1.0));
        assert!((w1 - 0.5f64.powf(-3.0 / 8.0) * 2f64.powf(-1.0 / 8.0)).abs() < 1e-14);
        assert!((w2 - 0.5f64.powf(-1.0 / 8.0) * 2f64.powf(-3.0 / 8.0)).abs() < 1e-14);
        assert_eq!(mu, 1.0);
    }

    #[test]
    fn rescale_rejects_nonpositive_coefficients() {
        let grid = RadialGrid::new(1, 20.0, 801).unwrap();
        let rec = solve_canonical(&cubic(1), &grid, &SolveOptions::default()).unwrap();
        assert!(matches!(
            rescale_to_local(&rec, 0.0, 1.0, 1.0),
            Err(GroundStateError::NonpositiveCoefficient { .. })
        ));
        assert_eq!(rescale_to_local(&rec, 1.0, 1.0, 1.0).unwrap(), rec.profile);
    }

    #[test]
    fn decay_rate_of_manufactured_profile() {
        let grid = RadialGrid::new(1, 20.0, 2001).unwrap();
        let e = RadialField::from_fn(&grid, |r| (-2.0 * r).exp());
        let pair = RadialProfilePair::new(e.clone(), e, grid);
        let theta = estimate_decay_rate(&pair, (2.0, 8.0)).unwrap();
        assert!((theta - 2.0).abs() < 1e-3);
        let e = RadialField::from_fn(&grid, |r| (-40.0 * r).exp());
        let pair = RadialProfilePair::new(e.clone(), e, grid);
        assert!(matches!(
            estimate_decay_rate(&pair, (5.0, 10.0)),
            Err(GroundStateError::WindowTooNoisy { .. })
        ));
        assert!(matches!(
            estimate_decay_rate(&pair, (5.0, 25.0)),
            Err(GroundStateError::BadWindow { .. })
        ));
    }
}
