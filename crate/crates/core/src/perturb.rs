//! The singularly perturbed system on `[-L, L]` (n = 1):
//!
//! ```text
//! -ε² u'' + V u = K |v|^{q-1} v,   -ε² v'' + V v = Q |u|^{p-1} u,   u(±L) = v(±L) = 0
//! ```
//!
//! solved by damped Newton for a descending ladder of `ε`, with peak
//! tracking, rescaled energies and the Pucci–Serrin diagnostic.

use thiserror::Error;

use crate::groundstate::{self, spow, Coefficients, GroundStateRecord};
use crate::landscape::{self, CandidateReport, LandscapeError};
use crate::linalg::BlockTridiagonal;
use crate::model::{ModelError, PotentialTriple, ProblemParams};
use crate::newton::{self, NewtonError, NewtonOptions, NewtonSystem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerturbError {
    #[error("perturb::{op}: the perturbed solver is one-dimensional (got n={n})")]
    NotOneDimensional { op: &'static str, n: usize },
    #[error("perturb::{op}: epsilon must be positive and finite (got {epsilon})")]
    BadEpsilon { op: &'static str, epsilon: f64 },
    #[error("perturb::epsilon_sweep: epsilons must be strictly decreasing ({prev} then {next})")]
    NotDescending { prev: f64, next: f64 },
    #[error("perturb::epsilon_sweep: empty epsilon ladder")]
    EmptyLadder,
    #[error("perturb::solve_perturbed(eps={epsilon}): {source}")]
    Newton {
        epsilon: f64,
        #[source]
        source: NewtonError,
    },
    #[error("perturb::solve_perturbed(eps={epsilon}): spike lost ({detail})")]
    SpikeLost { epsilon: f64, detail: String },
    #[error("perturb::{op}: {source}")]
    Model {
        op: &'static str,
        #[source]
        source: ModelError,
    },
    #[error("perturb::{op}: {source}")]
    Landscape {
        op: &'static str,
        #[source]
        source: LandscapeError,
    },
    #[error("perturb::grid: need L > 0 and at least 4 intervals (got L={half_width}, {intervals})")]
    BadGrid { half_width: f64, intervals: usize },
}

type Result<T> = std::result::Result<T, PerturbError>;

/// Uniform mesh on `[-L, L]` with an even number of intervals, so `x = 0` is a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1d {
    half_width: f64,
    intervals: usize,
}

impl Grid1d {
    pub fn new(half_width: f64, intervals: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) || intervals < 4 {
            return Err(PerturbError::BadGrid {
                half_width,
                intervals,
            });
        }
        Ok(Self {
            half_width,
            intervals: intervals + intervals % 2,
        })
    }

    /// Finest mesh needed for a sweep: spacing at most `eps_min / per_eps`.
    pub fn for_sweep(half_width: f64, eps_min: f64, per_eps: f64) -> Result<Self> {
        let intervals = (2.0 * half_width * per_eps / eps_min).ceil() as usize;
        Self::new(half_width, intervals)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.intervals as f64
    }

    /// Number of nodes including both ends.
    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.intervals {
            self.half_width
        } else {
            -self.half_width + i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.node(i))
    }

    /// Cubic interpolation of nodal values; zero outside `[-L, L]`.
    pub fn sample(&self, f: &[f64], x: f64) -> f64 {
        if x.abs() > self.half_width {
            return 0.0;
        }
        let h = self.spacing();
        let s = (x + self.half_width) / h;
        let last = self.intervals as isize;
        let start = (s.floor() as isize - 1).clamp(0, last - 3);
        let t = s - start as f64;
        let mut acc = 0.0;
        for a in 0..4 {
            let mut w = 1.0;
            for b in 0..4 {
                if a != b {
                    w *= (t - b as f64) / (a as f64 - b as f64);
                }
            }
            acc += w * f[(start + a) as usize];
        }
        acc
    }
}

/// One converged solve at a fixed `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonRun {
    pub epsilon: f64,
    pub grid: Grid1d,
    /// Nodal values including the two zero boundary nodes.
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub peak_u: f64,
    pub peak_v: f64,
    /// `ε^{-1} f_ε(u, v)`.
    pub rescaled_energy: f64,
    pub ps_residual: f64,
    /// Size of the individual terms of the Pucci–Serrin integral.
    pub ps_scale: f64,
    pub newton_residual: f64,
    pub newton_iterations: usize,
}

impl EpsilonRun {
    pub fn ps_relative(&self) -> f64 {
        if self.ps_scale > 0.0 {
            self.ps_residual.abs() / self.ps_scale
        } else {
            self.ps_residual.abs()
        }
    }
}

struct PerturbedSystem {
    eps2_h2: f64,
    p: f64,
    q: f64,
    k: Vec<f64>,
    qc: Vec<f64>,
    v: Vec<f64>,
}

impl PerturbedSystem {
    fn new(epsilon: f64, grid: &Grid1d, potentials: &PotentialTriple, params: &ProblemParams) -> Result<Self> {
        let interior: Vec<f64> = (1..grid.intervals).map(|i| grid.node(i)).collect();
        let mut k = Vec::with_capacity(interior.len());
        let mut qc = Vec::with_capacity(interior.len());
        let mut v = Vec::with_capacity(interior.len());
        for x in interior {
            let s = potentials.sample(&[x]).map_err(|source| PerturbError::Model {
                op: "solve_perturbed",
                source,
            })?;
            k.push(s.k);
            qc.push(s.q);
            v.push(s.v);
        }
        let h = grid.spacing();
        Ok(Self {
            eps2_h2: epsilon * epsilon / (h * h),
            p: params.p(),
            q: params.q(),
            k,
            qc,
            v,
        })
    }
}

impl NewtonSystem for PerturbedSystem {
    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let m = x.len() / 2;
        let mut f = vec![0.0; x.len()];
        for i in 0..m {
            for c in 0..2 {
                let left = if i > 0 { x[2 * (i - 1) + c] } else { 0.0 };
                let right = if i + 1 < m { x[2 * (i + 1) + c] } else { 0.0 };
                let mid = x[2 * i + c];
                f[2 * i + c] = self.eps2_h2 * (2.0 * mid - left - right) + self.v[i] * mid;
            }
            f[2 * i] -= self.k[i] * spow(x[2 * i + 1], self.q);
            f[2 * i + 1] -= self.qc[i] * spow(x[2 * i], self.p);
        }
        f
    }

    fn direction(&self, x: &[f64], f: &[f64]) -> Option<Vec<f64>> {
        let m = x.len() / 2;
        let mut j = BlockTridiagonal::zeros(m);
        let off = -self.eps2_h2;
        for i in 0..m {
            let d = 2.0 * self.eps2_h2 + self.v[i];
            let du = self.qc[i] * self.p * x[2 * i].abs().powf(self.p - 1.0);
            let dv = self.k[i] * self.q * x[2 * i + 1].abs().powf(self.q - 1.0);
            j.diag[i] = [[d, -dv], [-du, d]];
            j.lower[i] = [[off, 0.0], [0.0, off]];
            j.upper[i] = [[off, 0.0], [0.0, off]];
        }
        let rhs: Vec<[f64; 2]> = (0..m).map(|i| [-f[2 * i], -f[2 * i + 1]]).collect();
        Some(j.solve(&rhs)?.into_iter().flatten().collect())
    }

    fn scale(&self, x: &[f64]) -> f64 {
        let m = x.len() / 2;
        (0..m).fold(0.0_f64, |acc, i| {
            acc.max(self.k[i] * x[2 * i + 1].abs().powf(self.q))
                .max(self.qc[i] * x[2 * i].abs().powf(self.p))
        })
    }
}

/// Location of the maximum by a parabola through the discrete maximum and
/// its two neighbours.
pub fn interpolated_peak(grid: &Grid1d, f: &[f64]) -> f64 {
    let i = (0..f.len()).fold(0, |best, j| if f[j] > f[best] { j } else { best });
    if i == 0 || i + 1 >= f.len() {
        return grid.node(i);
    }
    let (a, b, c) = (f[i - 1], f[i], f[i + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom < 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    grid.node(i) + shift * grid.spacing()
}

fn unimodal(f: &[f64]) -> bool {
    let peak = f.iter().fold(0.0_f64, |m, x| m.max(*x));
    let tol = 1e-12 * peak;
    let i = (0..f.len()).fold(0, |best, j| if f[j] > f[best] { j } else { best });
    f[..=i].windows(2).all(|w| w[1] >= w[0] - tol) && f[i..].windows(2).all(|w| w[1] <= w[0] + tol)
}

/// `ε^{-1} f_ε` by the trapezoid rule matched to the three-point stencil.
fn rescaled_energy(epsilon: f64, grid: &Grid1d, u: &[f64], v: &[f64], sys: &PerturbedSystem) -> f64 {
    let h = grid.spacing();
    let mut gradient = 0.0;
    for i in 0..u.len() - 1 {
        gradient += (u[i + 1] - u[i]) * (v[i + 1] - v[i]);
    }
    let mut rest = 0.0;
    for i in 1..u.len() - 1 {
        let j = i - 1;
        rest += sys.v[j] * u[i] * v[i]
            - sys.k[j] * v[i].abs().powf(sys.q + 1.0) / (sys.q + 1.0)
            - sys.qc[j] * u[i].abs().powf(sys.p + 1.0) / (sys.p + 1.0);
    }
    (epsilon * epsilon * gradient / h + h * rest) / epsilon
}

/// `∫ [-K' v^{q+1}/(q+1) - Q' u^{p+1}/(p+1) + V' u v] dx` and the scale
/// `ε (sup|K'| v_max^{q+1} + sup|Q'| u_max^{p+1} + sup|V'| u_max v_max)`.
pub fn pucci_serrin_residual(run: &EpsilonRun, potentials: &PotentialTriple, params: &ProblemParams) -> Result<(f64, f64)> {
    ps_integral(run.epsilon, &run.grid, &run.u, &run.v, potentials, params)
}

fn ps_integral(
    epsilon: f64,
    grid: &Grid1d,
    u: &[f64],
    v: &[f64],
    potentials: &PotentialTriple,
    params: &ProblemParams,
) -> Result<(f64, f64)> {
    let (p, q) = (params.p(), params.q());
    let h = grid.spacing();
    let mut sum = 0.0;
    let (mut dk, mut dq, mut dv) = (0.0_f64, 0.0_f64, 0.0_f64);
    for i in 1..grid.intervals() {
        let s = potentials.sample(&[grid.node(i)]).map_err(|source| PerturbError::Model {
            op: "pucci_serrin_residual",
            source,
        })?;
        let (gk, gq, gv) = (s.grad_k[0], s.grad_q[0], s.grad_v[0]);
        dk = dk.max(gk.abs());
        dq = dq.max(gq.abs());
        dv = dv.max(gv.abs());
        sum += -gk * v[i].abs().powf(q + 1.0) / (q + 1.0) - gq * u[i].abs().powf(p + 1.0) / (p + 1.0)
            + gv * u[i] * v[i];
    }
    let um = u.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let vm = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let scale = epsilon * (dk * vm.powf(q + 1.0) + dq * um.powf(p + 1.0) + dv * um * vm);
    Ok((h * sum, scale))
}

fn check_inputs(op: &'static str, epsilon: f64, potentials: &PotentialTriple, params: &ProblemParams) -> Result<()> {
    if params.n() != 1 || potentials.dim() != 1 {
        return Err(PerturbError::NotOneDimensional {
            op,
            n: params.n().max(potentials.dim()),
        });
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(PerturbError::BadEpsilon { op, epsilon });
    }
    Ok(())
}

/// Damped Newton solve at one `ε` from `init` (nodal values including the
/// boundary nodes, which are ignored).
pub fn solve_perturbed(
    epsilon: f64,
    potentials: &PotentialTriple,
    params: &ProblemParams,
    grid: &Grid1d,
    init: (&[f64], &[f64]),
    opts: &NewtonOptions,
) -> Result<EpsilonRun> {
    check_inputs("solve_perturbed", epsilon, potentials, params)?;
    let (u0, v0) = init;
    assert_eq!(u0.len(), grid.len());
    assert_eq!(v0.len(), grid.len());
    let lost = |detail: String| PerturbError::SpikeLost { epsilon, detail };
    if !u0.iter().chain(v0).any(|x| *x > 0.0) {
        return Err(lost("initial guess has no positive part".into()));
    }
    let x0: Vec<f64> = (1..grid.intervals()).flat_map(|i| [u0[i], v0[i]]).collect();
    let first = newton_at(epsilon, &x0, potentials, params, grid, opts);
    let Err(err) = first else { return first };
    // a wider spike has a larger basin: solve at 1.5^k ε and continue back down
    for k in 1..=4 {
        let mut x = x0.clone();
        let mut ok = true;
        for j in (0..=k).rev() {
            let e = epsilon * 1.5f64.powi(j);
            match newton_at(e, &x, potentials, params, grid, opts) {
                Ok(run) => {
                    if j == 0 {
                        return Ok(run);
                    }
                    x = (1..grid.intervals()).flat_map(|i| [run.u[i], run.v[i]]).collect();
                }
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
    }
    Err(err)
}

fn newton_at(
    epsilon: f64,
    x0: &[f64],
    potentials: &PotentialTriple,
    params: &ProblemParams,
    grid: &Grid1d,
    opts: &NewtonOptions,
) -> Result<EpsilonRun> {
    let sys = PerturbedSystem::new(epsilon, grid, potentials, params)?;
    let out = newton::solve(&sys, x0.to_vec(), opts).map_err(|source| PerturbError::Newton { epsilon, source })?;
    finish_run(epsilon, grid, &sys, &out.x, out.residual, out.iterations, potentials, params, true)
}

#[allow(clippy::too_many_arguments)]
fn finish_run(
    epsilon: f64,
    grid: &Grid1d,
    sys: &PerturbedSystem,
    x: &[f64],
    residual: f64,
    iterations: usize,
    potentials: &PotentialTriple,
    params: &ProblemParams,
    strict: bool,
) -> Result<EpsilonRun> {
    let lost = |detail: String| PerturbError::SpikeLost { epsilon, detail };
    let mut u = vec![0.0; grid.len()];
    let mut v = vec![0.0; grid.len()];
    for i in 1..grid.intervals() {
        u[i] = x[2 * (i - 1)];
        v[i] = x[2 * (i - 1) + 1];
    }
    if strict {
        for (name, f) in [("u", &u), ("v", &v)] {
            let peak = f.iter().fold(0.0_f64, |m, x| m.max(*x));
            if !(peak > 1e-6) {
                return Err(lost(format!("{name} is trivial (max {peak:.3e})")));
            }
            let inner = &f[1..f.len() - 1];
            if inner.iter().any(|x| *x <= 0.0) {
                return Err(lost(format!("{name} is not positive in the interior")));
            }
            if !unimodal(f) {
                return Err(lost(format!("{name} has more than one interior maximum")));
            }
            let edge = inner[0].max(inner[inner.len() - 1]);
            if edge > 1e-8 * peak {
                return Err(lost(format!("{name} reaches the boundary ({:.2e} of peak)", edge / peak)));
            }
        }
    }
    let (ps_residual, ps_scale) = ps_integral(epsilon, grid, &u, &v, potentials, params)?;
    Ok(EpsilonRun {
        epsilon,
        grid: *grid,
        peak_u: interpolated_peak(grid, &u),
        peak_v: interpolated_peak(grid, &v),
        rescaled_energy: rescaled_energy(epsilon, grid, &u, &v, sys),
        ps_residual,
        ps_scale,
        newton_residual: residual,
        newton_iterations: iterations,
        u,
        v,
    })
}

/// A single full Newton step from `init`, returned without shape checks.
/// Used to contrast diagnostics of unconverged iterates.
pub fn one_newton_step(
    epsilon: f64,
    potentials: &PotentialTriple,
    params: &ProblemParams,
    grid: &Grid1d,
    init: (&[f64], &[f64]),
) -> Result<EpsilonRun> {
    check_inputs("one_newton_step", epsilon, potentials, params)?;
    let sys = PerturbedSystem::new(epsilon, grid, potentials, params)?;
    let x0: Vec<f64> = (1..grid.intervals()).flat_map(|i| [init.0[i], init.1[i]]).collect();
    let f = sys.residual(&x0);
    let d = sys.direction(&x0, &f).ok_or_else(|| PerturbError::SpikeLost {
        epsilon,
        detail: "singular Jacobian".into(),
    })?;
    let x: Vec<f64> = x0.iter().zip(&d).map(|(a, b)| a + b).collect();
    let f = sys.residual(&x);
    let res = f.iter().fold(0.0_f64, |m, v| m.max(v.abs())) / sys.scale(&x).max(1.0);
    finish_run(epsilon, grid, &sys, &x, res, 1, potentials, params, false)
}

/// Canonical spike centred at `x0`, rescaled to the coefficients there:
/// `u(x) = ϖ₁ ξ(μ|x - x0|/ε)`.
pub fn spike_guess(
    canonical: &GroundStateRecord,
    potentials: &PotentialTriple,
    x0: f64,
    epsilon: f64,
    grid: &Grid1d,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let s = potentials.sample(&[x0]).map_err(|source| PerturbError::Model {
        op: "spike_guess",
        source,
    })?;
    let (w1, w2, mu) = groundstate::rescaling_factors(&canonical.params, Coefficients::new(s.k, s.q, s.v));
    let g = canonical.profile.grid;
    let last = grid.intervals();
    let make = |f: &crate::radial::RadialField, w: f64| -> Vec<f64> {
        (0..grid.len())
            .map(|i| {
                if i == 0 || i == last {
                    0.0
                } else {
                    w * f.sample_at(&g, mu * (grid.node(i) - x0).abs() / epsilon, canonical.theta)
                }
            })
            .collect()
    };
    Ok((make(&canonical.profile.u, w1), make(&canonical.profile.v, w2)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpikeTrace {
    pub runs: Vec<EpsilonRun>,
    pub start: f64,
    /// All three potentials are constant, so the peak position is arbitrary.
    pub degenerate: bool,
    /// `max_{|x|<=10} |u(peak+εx)/u(peak) - ξ(x)/ξ(0)|` per run.
    pub profile_defect: Vec<f64>,
    /// `max_{|x|<=10} u(peak+εx)/u(peak) · e^{Θ|x|}` per run.
    pub envelope: Vec<f64>,
    /// The same envelope constant for the canonical profile.
    pub canonical_envelope: f64,
}

impl SpikeTrace {
    /// Every rescaled profile stays below twice the canonical exponential envelope.
    pub fn uniform_decay(&self) -> bool {
        self.envelope.iter().all(|e| *e <= 2.0 * self.canonical_envelope)
    }

    /// Change of the `u` peak between consecutive runs.
    pub fn peak_drift(&self) -> Vec<f64> {
        self.runs.windows(2).map(|w| (w[1].peak_u - w[0].peak_u).abs()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub half_width: f64,
    /// Mesh nodes per unit `ε_min`.
    pub nodes_per_eps: f64,
    pub newton: NewtonOptions,
    /// Maximum number of intermediate `ε` inserted when a warm start fails.
    pub max_bisections: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            half_width: 8.0,
            nodes_per_eps: 50.0,
            newton: NewtonOptions::default(),
            max_bisections: 6,
        }
    }
}

fn window_stats(run: &EpsilonRun, canonical: &GroundStateRecord) -> (f64, f64) {
    let cu = &canonical.profile.u;
    let cg = canonical.profile.grid;
    let peak_val = run.grid.sample(&run.u, run.peak_u);
    let mut defect = 0.0_f64;
    let mut envelope = 0.0_f64;
    for k in -1000..=1000 {
        let x = k as f64 * 0.01;
        let rescaled = run.grid.sample(&run.u, run.peak_u + run.epsilon * x) / peak_val;
        let reference = cu.sample_at(&cg, x.abs(), canonical.theta) / cu[0];
        defect = defect.max((rescaled - reference).abs());
        envelope = envelope.max(rescaled * (canonical.theta * x.abs()).exp());
    }
    (defect, envelope)
}

fn canonical_envelope(canonical: &GroundStateRecord) -> f64 {
    let cu = &canonical.profile.u;
    let cg = canonical.profile.grid;
    (0..=1000)
        .map(|k| {
            let x = k as f64 * 0.01;
            cu.sample_at(&cg, x, canonical.theta) / cu[0] * (canonical.theta * x).exp()
        })
        .fold(0.0, f64::max)
}

/// Continuation down a strictly decreasing `ε` ladder, starting from a
/// canonical spike at `start`. A failed warm start is retried through
/// geometric intermediate values of `ε`, which are not recorded.
pub fn epsilon_sweep(
    epsilons: &[f64],
    potentials: &PotentialTriple,
    canonical: &GroundStateRecord,
    start: f64,
    opts: &SweepOptions,
) -> Result<SpikeTrace> {
    let params = canonical.params;
    let first = *epsilons.first().ok_or(PerturbError::EmptyLadder)?;
    for w in epsilons.windows(2) {
        if !(w[1] < w[0]) {
            return Err(PerturbError::NotDescending { prev: w[0], next: w[1] });
        }
    }
    for &e in epsilons {
        check_inputs("epsilon_sweep", e, potentials, &params)?;
    }
    let eps_min = *epsilons.last().unwrap();
    let grid = Grid1d::for_sweep(opts.half_width, eps_min, opts.nodes_per_eps)?;
    let (u0, v0) = spike_guess(canonical, potentials, start, first, &grid)?;
    let mut runs: Vec<EpsilonRun> = Vec::with_capacity(epsilons.len());
    let mut current = (u0, v0);
    let mut current_eps = first;
    for &target in epsilons {
        let run = descend(current_eps, target, &current, potentials, &params, &grid, opts, opts.max_bisections)?;
        current = (run.u.clone(), run.v.clone());
        current_eps = target;
        runs.push(run);
    }
    let (profile_defect, envelope): (Vec<f64>, Vec<f64>) = runs.iter().map(|r| window_stats(r, canonical)).unzip();
    Ok(SpikeTrace {
        runs,
        start,
        degenerate: potentials.is_constant(),
        profile_defect,
        envelope,
        canonical_envelope: canonical_envelope(canonical),
    })
}

#[allow(clippy::too_many_arguments)]
fn descend(
    from: f64,
    to: f64,
    init: &(Vec<f64>, Vec<f64>),
    potentials: &PotentialTriple,
    params: &ProblemParams,
    grid: &Grid1d,
    opts: &SweepOptions,
    depth: usize,
) -> Result<EpsilonRun> {
    match solve_perturbed(to, potentials, params, grid, (&init.0, &init.1), &opts.newton) {
        Ok(run) => Ok(run),
        Err(err) if depth == 0 || from <= to => Err(err),
        Err(_) => {
            let mid = (from * to).sqrt();
            let half = descend(from, mid, init, potentials, params, grid, opts, depth - 1)?;
            descend(mid, to, &(half.u, half.v), potentials, params, grid, opts, depth - 1)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Degenerate,
    Inconclusive,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Degenerate => "DEGENERATE",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportThresholds {
    pub peak_distance: f64,
    /// Relative gap `|ε^{-1}f_ε - Σ| / Σ`.
    pub energy_gap: f64,
    /// Allowed relative increase between consecutive runs.
    pub jitter: f64,
    /// Values below this are treated as converged noise in the trend checks.
    pub floor: f64,
}

impl Default for ReportThresholds {
    fn default() -> Self {
        Self {
            peak_distance: 0.05,
            energy_gap: 0.01,
            jitter: 0.10,
            floor: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub epsilon: f64,
    pub peak: f64,
    pub candidate: Option<f64>,
    pub distance: f64,
    pub energy_gap: f64,
    pub ps_residual: f64,
    pub ps_relative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport {
    pub rows: Vec<ReportRow>,
    /// Log-log slope of the peak distance in `ε`, when at least two distances exceed the floor.
    pub distance_order: Option<f64>,
    pub distance_monotone: bool,
    pub energy_monotone: bool,
    pub verdict: Verdict,
    pub thresholds: ReportThresholds,
}

fn monotone(values: &[f64], t: &ReportThresholds) -> bool {
    values
        .windows(2)
        .all(|w| w[1] <= (1.0 + t.jitter) * w[0] + t.floor)
}

/// Compares a sweep against the landscape: nearest candidate per run, energy
/// gap to `Σ` there, trend checks and the verdict.
pub fn concentration_report(
    trace: &SpikeTrace,
    candidates: &CandidateReport,
    potentials: &PotentialTriple,
    canonical: &GroundStateRecord,
    thresholds: &ReportThresholds,
) -> Result<ConcentrationReport> {
    let mut rows = Vec::with_capacity(trace.runs.len());
    for run in &trace.runs {
        let nearest = candidates
            .candidates
            .iter()
            .map(|c| c.z[0])
            .min_by(|a, b| (a - run.peak_u).abs().total_cmp(&(b - run.peak_u).abs()));
        let (distance, energy_gap) = match nearest {
            Some(c) => {
                let sigma = landscape::sigma_at(&[c], potentials, canonical)
                    .map_err(|source| PerturbError::Landscape {
                        op: "concentration_report",
                        source,
                    })?
                    .sigma;
                ((run.peak_u - c).abs(), (run.rescaled_energy - sigma).abs() / sigma)
            }
            None => (f64::NAN, f64::NAN),
        };
        rows.push(ReportRow {
            epsilon: run.epsilon,
            peak: run.peak_u,
            candidate: nearest,
            distance,
            energy_gap,
            ps_residual: run.ps_residual,
            ps_relative: run.ps_relative(),
        });
    }
    let distances: Vec<f64> = rows.iter().map(|r| r.distance).collect();
    let gaps: Vec<f64> = rows.iter().map(|r| r.energy_gap).collect();
    let fit: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.distance > thresholds.floor)
        .map(|r| (r.epsilon.ln(), r.distance.ln()))
        .collect();
    let distance_order = (fit.len() >= 2).then(|| {
        let n = fit.len() as f64;
        let mx = fit.iter().map(|p| p.0).sum::<f64>() / n;
        let my = fit.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = fit.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = fit.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        sxy / sxx
    });
    let distance_monotone = monotone(&distances, thresholds);
    let energy_monotone = monotone(&gaps, thresholds);
    let verdict = if candidates.degenerate || trace.degenerate {
        Verdict::Degenerate
    } else if rows.len() < 2 || candidates.candidates.is_empty() {
        Verdict::Inconclusive
    } else {
        let last = rows.last().unwrap();
        if distance_monotone
            && energy_monotone
            && last.distance <= thresholds.peak_distance
            && last.energy_gap <= thresholds.energy_gap
        {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    };
    Ok(ConcentrationReport {
        rows,
        distance_order,
        distance_monotone,
        energy_monotone,
        verdict,
        thresholds: *thresholds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_has_node_at_origin() {
        let g = Grid1d::new(8.0, 101).unwrap();
        assert_eq!(g.intervals(), 102);
        assert_eq!(g.node(51), 0.0);
        assert_eq!(g.node(g.len() - 1), 8.0);
        let g = Grid1d::for_sweep(8.0, 0.05, 20.0).unwrap();
        assert!(g.spacing() <= 0.05 / 20.0 + 1e-15);
    }

    #[test]
    fn parabolic_peak_is_exact_for_parabolas() {
        let g = Grid1d::new(1.0, 20).unwrap();
        let f: Vec<f64> = g.nodes().map(|x| 1.0 - (x - 0.033).powi(2)).collect();
        assert!((interpolated_peak(&g, &f) - 0.033).abs() < 1e-12);
    }

    #[test]
    fn cubic_sampling_reproduces_cubics() {
        let g = Grid1d::new(2.0, 40).unwrap();
        let f: Vec<f64> = g.nodes().map(|x| x * x * x - x).collect();
        for x in [-1.97, -0.31, 0.0, 1.234, 1.999] {
            assert!((g.sample(&f, x) - (x * x * x - x)).abs() < 1e-12);
        }
        assert_eq!(g.sample(&f, 2.5), 0.0);
    }

    #[test]
    fn trend_check_allows_jitter() {
        let t = ReportThresholds::default();
        assert!(monotone(&[1.0, 0.5, 0.54, 0.2], &t));
        assert!(!monotone(&[1.0, 0.5, 0.6], &t));
        assert!(monotone(&[1e-12, 5e-10, 0.0], &t));
    }
}
