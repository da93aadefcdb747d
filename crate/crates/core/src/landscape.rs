//! The ground-energy landscape `Σ(z) = Γ V^{θV} / (Q^{θQ} K^{θK})`, its
//! branch derivative, spike candidates and one-dimensional Clarke hulls.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::dual::{self, DualError};
use crate::groundstate::{self, Coefficients, GroundStateError, GroundStateRecord, RadialProfilePair};
use crate::model::{ModelError, PotentialTriple, ProblemParams, SearchBox};
use crate::newton::NewtonOptions;
use crate::radial::{RadialField, RadialOperator};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LandscapeError {
    #[error("landscape::{op}: {source}")]
    Model {
        op: &'static str,
        #[source]
        source: ModelError,
    },
    #[error("landscape::{op}: {source}")]
    GroundState {
        op: &'static str,
        #[source]
        source: GroundStateError,
    },
    #[error("landscape::{op}: {source}")]
    Dual {
        op: &'static str,
        #[source]
        source: DualError,
    },
    #[error("landscape::gamma_pm: solution {index} has energy {energy} but m = {m}")]
    EnergyMismatch { index: usize, energy: f64, m: f64 },
    #[error("landscape::find_spike_candidates: none of {starts} starts converged ({diagnostics})")]
    NoConvergedRoots { starts: usize, diagnostics: String },
    #[error("landscape::find_spike_candidates: potentials are not C^1 at {point:?}")]
    Nonsmooth { point: Vec<f64> },
    #[error("landscape::clarke_hull_1d: sample spacing {spacing} exceeds window/10 = {limit} (window {window})")]
    WindowTooCoarse { spacing: f64, limit: f64, window: f64 },
    #[error("landscape::{op}: expected {expected} coordinates, got {got}")]
    Dimension {
        op: &'static str,
        expected: usize,
        got: usize,
    },
}

type Result<T> = std::result::Result<T, LandscapeError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaMethod {
    Scaling,
    Direct,
}

impl SigmaMethod {
    pub fn tag(self) -> &'static str {
        match self {
            SigmaMethod::Scaling => "scaling",
            SigmaMethod::Direct => "direct",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaSample {
    pub z: Vec<f64>,
    pub sigma: f64,
    pub grad_sigma: Vec<f64>,
    pub method: SigmaMethod,
}

fn model_err(op: &'static str) -> impl Fn(ModelError) -> LandscapeError {
    move |source| LandscapeError::Model { op, source }
}

fn check_dim(op: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(LandscapeError::Dimension { op, expected, got })
    }
}

/// Scaling-law value and gradient of `Σ` at `z`.
pub fn sigma_at(z: &[f64], potentials: &PotentialTriple, canonical: &GroundStateRecord) -> Result<SigmaSample> {
    check_dim("sigma_at", potentials.dim(), z.len())?;
    let pr = &canonical.params;
    let s = potentials.sample(z).map_err(model_err("sigma_at"))?;
    let (tk, tq, tv) = (pr.theta_k(), pr.theta_q(), pr.theta_v());
    let sigma = canonical.gamma * s.v.powf(tv) / (s.q.powf(tq) * s.k.powf(tk));
    let grad_sigma = (0..z.len())
        .map(|i| sigma * (tv * s.grad_v[i] / s.v - tq * s.grad_q[i] / s.q - tk * s.grad_k[i] / s.k))
        .collect();
    Ok(SigmaSample {
        z: z.to_vec(),
        sigma,
        grad_sigma,
        method: SigmaMethod::Scaling,
    })
}

/// Frozen-coefficient solution at `z`, on the canonical grid scaled by `1/√V(z)`.
pub fn local_solution(
    z: &[f64],
    potentials: &PotentialTriple,
    canonical: &GroundStateRecord,
    opts: &NewtonOptions,
) -> Result<(RadialProfilePair, Coefficients)> {
    check_dim("sigma_direct", potentials.dim(), z.len())?;
    let s = potentials.sample(z).map_err(model_err("sigma_direct"))?;
    let c = Coefficients::new(s.k, s.q, s.v);
    let ge = |source| LandscapeError::GroundState {
        op: "sigma_direct",
        source,
    };
    let (w1, w2, mu) = groundstate::rescaling_factors(&canonical.params, c);
    let grid = canonical.profile.grid.scaled(mu);
    // warm start: the canonical profile sampled at μ r with the local amplitudes
    let guess = if mu == 1.0 {
        groundstate::rescale_to_local(canonical, s.k, s.q, s.v).map_err(ge)?
    } else {
        let base = canonical.profile.grid;
        let pick = |f: &RadialField, w: f64| -> RadialField {
            grid.nodes().map(|r| w * f.sample_at(&base, mu * r, 1.0)).collect()
        };
        RadialProfilePair::new(pick(&canonical.profile.u, w1), pick(&canonical.profile.v, w2), grid)
    };
    let (pair, _, _) =
        groundstate::solve_frozen(&canonical.params, c, &guess, opts, "sigma_direct").map_err(ge)?;
    Ok((pair, c))
}

/// `Σ(z)` from a full Newton solve of the frozen system; the gradient is the
/// branch derivative formula evaluated on that solution.
pub fn sigma_direct(
    z: &[f64],
    potentials: &PotentialTriple,
    canonical: &GroundStateRecord,
    opts: &NewtonOptions,
) -> Result<SigmaSample> {
    let (pair, c) = local_solution(z, potentials, canonical, opts)?;
    let sigma = dual::direct_energy(&pair, c, &canonical.params);
    let grad = grad_sigma_formula(z, &pair, potentials, &canonical.params)?;
    Ok(SigmaSample {
        z: z.to_vec(),
        sigma,
        grad_sigma: grad.from_left,
        method: SigmaMethod::Direct,
    })
}

/// Left and right directional derivatives of `Σ` along the coordinate axes.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchDerivative {
    pub from_left: Vec<f64>,
    pub from_right: Vec<f64>,
    /// Both slots come from one computed solution, so they coincide; a second
    /// solution branch with the same energy would split them.
    pub singleton_branch: bool,
}

impl BranchDerivative {
    pub fn norm(&self) -> f64 {
        self.from_left.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Integrals entering the derivative formula for one solution:
/// `∫|η₁|^{(p+1)/p}/Q^{(p+1)/p}`, `∫|η₂|^{(q+1)/q}/K^{(q+1)/q}` and `∫uv`.
fn branch_integrals(pair: &RadialProfilePair, c: Coefficients, params: &ProblemParams) -> [f64; 3] {
    let (p, q) = (params.p(), params.q());
    let eta = dual::dual_transform(pair, c, params);
    let op = RadialOperator::new(&pair.grid);
    let a: Vec<f64> = eta
        .eta1
        .iter()
        .map(|e| (e.abs() / c.q).powf((p + 1.0) / p))
        .collect();
    let b: Vec<f64> = eta
        .eta2
        .iter()
        .map(|e| (e.abs() / c.k).powf((q + 1.0) / q))
        .collect();
    let uv: Vec<f64> = pair.u.iter().zip(pair.v.iter()).map(|(u, v)| u * v).collect();
    [op.integrate(&a), op.integrate(&b), op.integrate(&uv)]
}

fn bracket(
    ints: [f64; 3],
    s: &crate::model::PotentialSample,
    params: &ProblemParams,
    w: &[f64],
) -> f64 {
    let (p, q) = (params.p(), params.q());
    (0..w.len())
        .map(|i| {
            w[i] * (-s.grad_q[i] * ints[0] / (p + 1.0) - s.grad_k[i] * ints[1] / (q + 1.0)
                + s.grad_v[i] * ints[2])
        })
        .sum()
}

/// Derivative of the branch energy from a local solution at `z`. The `V`
/// component `∂V ∫uv` vanishes when `V` is constant.
pub fn grad_sigma_formula(
    z: &[f64],
    local: &RadialProfilePair,
    potentials: &PotentialTriple,
    params: &ProblemParams,
) -> Result<BranchDerivative> {
    check_dim("grad_sigma_formula", potentials.dim(), z.len())?;
    let s = potentials.sample(z).map_err(model_err("grad_sigma_formula"))?;
    let c = Coefficients::new(s.k, s.q, s.v);
    let ints = branch_integrals(local, c, params);
    let n = z.len();
    let grad: Vec<f64> = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            bracket(ints, &s, params, &e)
        })
        .collect();
    Ok(BranchDerivative {
        from_left: grad.clone(),
        from_right: grad,
        singleton_branch: true,
    })
}

/// `(Γ⁻(w), Γ⁺(w))`: supremum and negated infimum of the derivative bracket
/// over the supplied solutions of energy `m`.
pub fn gamma_pm(
    z: &[f64],
    m: f64,
    solutions: &[RadialProfilePair],
    w: &[f64],
    potentials: &PotentialTriple,
    params: &ProblemParams,
) -> Result<(f64, f64)> {
    check_dim("gamma_pm", potentials.dim(), z.len())?;
    check_dim("gamma_pm", z.len(), w.len())?;
    let s = potentials.sample(z).map_err(model_err("gamma_pm"))?;
    let c = Coefficients::new(s.k, s.q, s.v);
    let mut sup = f64::NEG_INFINITY;
    let mut inf = f64::INFINITY;
    for (index, pair) in solutions.iter().enumerate() {
        let energy = dual::direct_energy(pair, c, params);
        if (energy - m).abs() > 1e-6 * m.abs() {
            return Err(LandscapeError::EnergyMismatch { index, energy, m });
        }
        let b = bracket(branch_integrals(pair, c, params), &s, params, w);
        sup = sup.max(b);
        inf = inf.min(b);
    }
    if solutions.is_empty() {
        return Ok((0.0, 0.0));
    }
    // keep the sign of zero canonical
    Ok((sup + 0.0, -inf + 0.0))
}

/// `0 ∈ ∂Γ⁻(0) ∩ ∂Γ⁺(0)`. Both functionals are sublinear, so membership is
/// equivalent to `Γ^±(w) >= 0` for every direction; `±e_i` and `±(e_i ± e_j)`
/// are checked.
pub fn in_critical_set(
    z: &[f64],
    m: f64,
    solutions: &[RadialProfilePair],
    potentials: &PotentialTriple,
    params: &ProblemParams,
    tol: f64,
) -> Result<bool> {
    let n = z.len();
    let mut dirs = Vec::new();
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = sign;
            dirs.push(e);
            for j in i + 1..n {
                for sj in [1.0, -1.0] {
                    let mut e = vec![0.0; n];
                    e[i] = sign;
                    e[j] = sj;
                    dirs.push(e);
                }
            }
        }
    }
    for w in dirs {
        let (minus, plus) = gamma_pm(z, m, solutions, &w, potentials, params)?;
        if minus < -tol || plus < -tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `Σ` at a set of points with the landscape constants.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaLandscape {
    pub samples: Vec<SigmaSample>,
    pub gamma: f64,
    pub theta_k: f64,
    pub theta_q: f64,
    pub theta_v: f64,
    pub params: ProblemParams,
}

impl SigmaLandscape {
    /// Evaluates `sigma_at` over `points` in parallel; sample order follows `points`.
    pub fn build(
        points: &[Vec<f64>],
        potentials: &PotentialTriple,
        canonical: &GroundStateRecord,
    ) -> Result<Self> {
        let samples = points
            .par_iter()
            .map(|z| sigma_at(z, potentials, canonical))
            .collect::<Result<Vec<_>>>()?;
        let p = canonical.params;
        Ok(Self {
            samples,
            gamma: canonical.gamma,
            theta_k: p.theta_k(),
            theta_q: p.theta_q(),
            theta_v: p.theta_v(),
            params: p,
        })
    }

    /// Stored exponents agree with those recomputed from the parameters.
    pub fn exponents_consistent(&self) -> bool {
        self.theta_k == self.params.theta_k()
            && self.theta_q == self.params.theta_q()
            && self.theta_v == self.params.theta_v()
    }
}

/// `log G = θQ log Q + θK log K - θV log V`; `Σ = Γ / G`.
pub fn log_locator(z: &[f64], potentials: &PotentialTriple, params: &ProblemParams) -> Result<f64> {
    let s = potentials.sample(z).map_err(model_err("find_spike_candidates"))?;
    Ok(params.theta_q() * s.q.ln() + params.theta_k() * s.k.ln() - params.theta_v() * s.v.ln())
}

fn grad_log_locator(
    z: &[f64],
    potentials: &PotentialTriple,
    params: &ProblemParams,
) -> Result<(Vec<f64>, bool)> {
    let s = potentials.sample(z).map_err(model_err("find_spike_candidates"))?;
    let g = (0..z.len())
        .map(|i| {
            params.theta_q() * s.grad_q[i] / s.q + params.theta_k() * s.grad_k[i] / s.k
                - params.theta_v() * s.grad_v[i] / s.v
        })
        .collect();
    Ok((g, s.nonsmooth))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalKind {
    /// Maximum of `G`.
    MinimumOfSigma,
    /// Minimum of `G`.
    MaximumOfSigma,
    Saddle,
    Degenerate,
}

impl CriticalKind {
    pub fn label(self) -> &'static str {
        match self {
            CriticalKind::MinimumOfSigma => "min",
            CriticalKind::MaximumOfSigma => "max",
            CriticalKind::Saddle => "saddle",
            CriticalKind::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpikeCandidate {
    pub z: Vec<f64>,
    pub kind: CriticalKind,
    pub grad_log_g: f64,
    pub g_value: f64,
}

impl SpikeCandidate {
    /// `|∇Σ| = Γ |∇log G| / G`.
    pub fn sigma_grad_norm(&self, gamma: f64) -> f64 {
        gamma * self.grad_log_g / self.g_value
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateReport {
    pub candidates: Vec<SpikeCandidate>,
    /// `Σ` is constant on the box; every point is critical.
    pub degenerate: bool,
    pub starts: usize,
    pub converged: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateOptions {
    pub multistarts: usize,
    pub seed: u64,
    pub dedup_tol: f64,
    pub hessian_step: f64,
    pub max_iter: usize,
}

impl Default for CandidateOptions {
    fn default() -> Self {
        Self {
            multistarts: 32,
            seed: 0x5eed,
            dedup_tol: 1e-6,
            hessian_step: 1e-3,
            max_iter: 100,
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Gaussian elimination with partial pivoting for the small Newton systems.
fn solve_small(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

fn positive_definite(h: &[Vec<f64>], tol: f64) -> bool {
    let n = h.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = h[i][i] - s;
                if d <= tol {
                    return false;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (h[i][j] - s) / l[j][j];
            }
        }
    }
    true
}

/// Centered second differences of `log G`.
fn hessian_log_locator(
    z: &[f64],
    potentials: &PotentialTriple,
    params: &ProblemParams,
    h: f64,
) -> Result<Vec<Vec<f64>>> {
    let n = z.len();
    let f = |dz: &[(usize, f64)]| -> Result<f64> {
        let mut x = z.to_vec();
        for (i, d) in dz {
            x[*i] += d;
        }
        log_locator(&x, potentials, params)
    };
    let f0 = f(&[])?;
    let mut hess = vec![vec![0.0; n]; n];
    for i in 0..n {
        hess[i][i] = (f(&[(i, h)])? - 2.0 * f0 + f(&[(i, -h)])?) / (h * h);
        for j in 0..i {
            let v = (f(&[(i, h), (j, h)])? - f(&[(i, h), (j, -h)])? - f(&[(i, -h), (j, h)])?
                + f(&[(i, -h), (j, -h)])?)
                / (4.0 * h * h);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    Ok(hess)
}

fn classify(hess: &[Vec<f64>]) -> CriticalKind {
    let scale = hess
        .iter()
        .flatten()
        .fold(0.0_f64, |m, x| m.max(x.abs()))
        .max(f64::MIN_POSITIVE);
    let tol = 1e-8 * scale;
    let neg: Vec<Vec<f64>> = hess.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
    if scale <= f64::MIN_POSITIVE {
        CriticalKind::Degenerate
    } else if positive_definite(&neg, tol) {
        CriticalKind::MinimumOfSigma
    } else if positive_definite(hess, tol) {
        CriticalKind::MaximumOfSigma
    } else {
        // indefinite or singular: a 2x2-minor-free check for near-singularity
        let n = hess.len();
        let det = match n {
            1 => hess[0][0],
            2 => hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0],
            _ => {
                hess[0][0] * (hess[1][1] * hess[2][2] - hess[1][2] * hess[2][1])
                    - hess[0][1] * (hess[1][0] * hess[2][2] - hess[1][2] * hess[2][0])
                    + hess[0][2] * (hess[1][0] * hess[2][1] - hess[1][1] * hess[2][0])
            }
        };
        if det.abs() <= 1e-8 * scale.powi(n as i32) {
            CriticalKind::Degenerate
        } else {
            CriticalKind::Saddle
        }
    }
}

/// Critical points of `Σ` in `region`, found by damped Newton on `∇log G = 0`
/// from seeded random starts.
pub fn find_spike_candidates(
    potentials: &PotentialTriple,
    region: &SearchBox,
    params: &ProblemParams,
    opts: &CandidateOptions,
) -> Result<CandidateReport> {
    let n = region.dim();
    check_dim("find_spike_candidates", potentials.dim(), n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let starts: Vec<Vec<f64>> = (0..opts.multistarts)
        .map(|_| {
            (0..n)
                .map(|i| rng.random_range(region.lo[i]..=region.hi[i]))
                .collect()
        })
        .collect();
    let mut scale = 0.0_f64;
    for z in &starts {
        let (g, nonsmooth) = grad_log_locator(z, potentials, params)?;
        if nonsmooth {
            return Err(LandscapeError::Nonsmooth { point: z.clone() });
        }
        scale = scale.max(norm(&g));
    }
    if potentials.is_constant() || scale == 0.0 {
        return Ok(CandidateReport {
            candidates: Vec::new(),
            degenerate: true,
            starts: starts.len(),
            converged: starts.len(),
        });
    }
    let tol = 1e-11 * scale;
    let mut roots: Vec<Vec<f64>> = Vec::new();
    let mut converged = 0;
    let mut diagnostics = Vec::new();
    for z0 in &starts {
        match newton_on_locator(z0, potentials, params, region, tol, opts.max_iter) {
            Ok(z) => {
                converged += 1;
                if !roots.iter().any(|r| norm(&sub(r, &z)) <= opts.dedup_tol) {
                    roots.push(z);
                }
            }
            Err(reason) => diagnostics.push(reason),
        }
    }
    if roots.is_empty() {
        diagnostics.sort();
        diagnostics.dedup();
        return Err(LandscapeError::NoConvergedRoots {
            starts: starts.len(),
            diagnostics: diagnostics.join("; "),
        });
    }
    roots.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut candidates = Vec::with_capacity(roots.len());
    for z in roots {
        let (g, _) = grad_log_locator(&z, potentials, params)?;
        let hess = hessian_log_locator(&z, potentials, params, opts.hessian_step)?;
        candidates.push(SpikeCandidate {
            kind: classify(&hess),
            grad_log_g: norm(&g),
            g_value: log_locator(&z, potentials, params)?.exp(),
            z,
        });
    }
    Ok(CandidateReport {
        candidates,
        degenerate: false,
        starts: starts.len(),
        converged,
    })
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn newton_on_locator(
    z0: &[f64],
    potentials: &PotentialTriple,
    params: &ProblemParams,
    region: &SearchBox,
    tol: f64,
    max_iter: usize,
) -> std::result::Result<Vec<f64>, String> {
    let n = z0.len();
    let grad = |z: &[f64]| grad_log_locator(z, potentials, params).map(|x| x.0).map_err(|e| e.to_string());
    let mut z = z0.to_vec();
    let mut g = grad(&z)?;
    for _ in 0..max_iter {
        if norm(&g) <= tol {
            return Ok(z);
        }
        let mut jac = vec![vec![0.0; n]; n];
        for j in 0..n {
            let h = 1e-6 * (1.0 + z[j].abs());
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[j] += h;
            zm[j] -= h;
            let (gp, gm) = (grad(&zp)?, grad(&zm)?);
            for i in 0..n {
                jac[i][j] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        let d = solve_small(jac, g.iter().map(|x| -x).collect()).ok_or("singular Hessian")?;
        let g0 = norm(&g);
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = z.iter().zip(&d).map(|(a, b)| a + lambda * b).collect();
            if let Ok(gt) = grad(&trial) {
                if region.contains(&trial) && norm(&gt) <= (1.0 - 1e-4 * lambda) * g0 {
                    z = trial;
                    g = gt;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return Err("line search left the box or stalled".into());
            }
        }
    }
    if norm(&g) <= tol {
        Ok(z)
    } else {
        Err("iteration limit".into())
    }
}

/// One-dimensional Clarke hull estimate `[lo, hi]` at `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClarkeHull {
    pub lo: f64,
    pub hi: f64,
}

impl ClarkeHull {
    pub fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && 0.0 <= self.hi
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        self.lo <= lo && hi <= self.hi
    }
}

fn interpolate(samples: &[(f64, f64)], z: f64) -> f64 {
    let k = samples.partition_point(|(x, _)| *x < z);
    if k < samples.len() && samples[k].0 == z {
        return samples[k].1;
    }
    let k = k.clamp(1, samples.len() - 1);
    let (x0, y0) = samples[k - 1];
    let (x1, y1) = samples[k];
    y0 + (y1 - y0) * (z - x0) / (x1 - x0)
}

/// Convex hull of the one-sided difference quotients of `Σ` at `z` over
/// offsets in `(0, window]`. `samples` are `(z, Σ)` pairs sorted by `z`.
pub fn clarke_hull_1d(z: f64, samples: &[(f64, f64)], window: f64) -> Result<ClarkeHull> {
    let near: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|(x, _)| (x - z).abs() <= window * (1.0 + 1e-12))
        .collect();
    let spacing = near
        .windows(2)
        .map(|w| w[1].0 - w[0].0)
        .fold(0.0_f64, f64::max);
    let limit = window / 10.0;
    let left = near.iter().filter(|(x, _)| *x < z).count();
    let right = near.iter().filter(|(x, _)| *x > z).count();
    if near.len() < 2 || spacing > limit * (1.0 + 1e-9) || left == 0 || right == 0 {
        return Err(LandscapeError::WindowTooCoarse {
            spacing: if near.len() < 2 { f64::INFINITY } else { spacing },
            limit,
            window,
        });
    }
    let s0 = interpolate(samples, z);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (x, s) in near.iter().filter(|(x, _)| *x != z) {
        let slope = (s - s0) / (x - z);
        lo = lo.min(slope);
        hi = hi.max(slope);
    }
    Ok(ClarkeHull { lo, hi })
}

/// Difference quotients of `Σ` on a sorted 1-D grid against the bound
/// `max Σ · Σ_f θ_f max|f'| / min f` over each cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzEvidence {
    /// Largest quotient/bound ratio over all cells.
    pub worst_ratio: f64,
    pub worst_cell: (f64, f64),
    pub cells: usize,
}

pub fn lipschitz_evidence(
    zs: &[f64],
    potentials: &PotentialTriple,
    canonical: &GroundStateRecord,
) -> Result<LipschitzEvidence> {
    check_dim("lipschitz_evidence", potentials.dim(), 1)?;
    let pr = &canonical.params;
    let mut worst = (0.0_f64, (f64::NAN, f64::NAN));
    for w in zs.windows(2) {
        let (a, b) = (w[0], w[1]);
        let sa = potentials.sample(&[a]).map_err(model_err("lipschitz_evidence"))?;
        let sb = potentials.sample(&[b]).map_err(model_err("lipschitz_evidence"))?;
        let siga = sigma_at(&[a], potentials, canonical)?.sigma;
        let sigb = sigma_at(&[b], potentials, canonical)?.sigma;
        let term = |fa: f64, fb: f64, ga: f64, gb: f64, theta: f64| {
            theta * ga.abs().max(gb.abs()) / fa.min(fb)
        };
        let bound = siga.max(sigb)
            * (term(sa.k, sb.k, sa.grad_k[0], sb.grad_k[0], pr.theta_k())
                + term(sa.q, sb.q, sa.grad_q[0], sb.grad_q[0], pr.theta_q())
                + term(sa.v, sb.v, sa.grad_v[0], sb.grad_v[0], pr.theta_v().abs()));
        let quotient = ((sigb - siga) / (b - a)).abs();
        let ratio = if bound > 0.0 {
            quotient / bound
        } else if quotient == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if ratio > worst.0 {
            worst = (ratio, (a, b));
        }
    }
    Ok(LipschitzEvidence {
        worst_ratio: worst.0,
        worst_cell: worst.1,
        cells: zs.len().saturating_sub(1),
    })
}
