//! Direct and dual energies of the frozen system, the Nehari fibering map and
//! the dual transform `η = (Q u^p, K v^q)`.
//!
//! All integrals use the quadrature matched to the radial operator, so on a
//! converged discrete solution the direct and dual energies agree to
//! roundoff.

use thiserror::Error;

use crate::groundstate::{spow, Coefficients, RadialProfilePair};
use crate::model::ProblemParams;
use crate::radial::{RadialError, RadialField, RadialGrid, RadialOperator};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DualError {
    #[error("dualenergy::{op}: <Tη,η> = {value:.3e} is not positive, so η has no Nehari point")]
    NotInHPlus { op: &'static str, value: f64 },
    #[error("dualenergy::{op}: {source}")]
    Radial {
        op: &'static str,
        #[source]
        source: RadialError,
    },
    #[error("dualenergy::nehari_time: root search failed for A={a:.3e}, B={b:.3e}, C={c:.3e}")]
    RootSearch { a: f64, b: f64, c: f64 },
}

type Result<T> = std::result::Result<T, DualError>;

/// Dual variable `η = (η₁, η₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPair {
    pub eta1: RadialField,
    pub eta2: RadialField,
    pub grid: RadialGrid,
}

impl DualPair {
    pub fn new(eta1: RadialField, eta2: RadialField, grid: RadialGrid) -> Self {
        assert_eq!(eta1.len(), grid.len());
        assert_eq!(eta2.len(), grid.len());
        Self { eta1, eta2, grid }
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self::new(self.eta1.map(|x| t * x), self.eta2.map(|x| t * x), self.grid)
    }
}

/// `η₁ = Q |u|^{p-1} u`, `η₂ = K |v|^{q-1} v`.
pub fn dual_transform(pair: &RadialProfilePair, c: Coefficients, params: &ProblemParams) -> DualPair {
    DualPair::new(
        pair.u.map(|u| c.q * spow(u, params.p())),
        pair.v.map(|v| c.k * spow(v, params.q())),
        pair.grid,
    )
}

/// `∫∇u·∇v + V uv - K/(q+1) ∫|v|^{q+1} - Q/(p+1) ∫|u|^{p+1}`.
pub fn direct_energy(pair: &RadialProfilePair, c: Coefficients, params: &ProblemParams) -> f64 {
    let (p, q) = (params.p(), params.q());
    let op = RadialOperator::new(&pair.grid);
    let form = op.bilinear(&pair.u, &pair.v, c.v);
    let vq: Vec<f64> = pair.v.iter().map(|v| v.abs().powf(q + 1.0)).collect();
    let up: Vec<f64> = pair.u.iter().map(|u| u.abs().powf(p + 1.0)).collect();
    form - c.k / (q + 1.0) * op.integrate(&vq) - c.q / (p + 1.0) * op.integrate(&up)
}

/// The three integrals that determine the dual functional along a ray:
/// `A = ∫|η₁|^{(p+1)/p} / Q^{1/p}`, `B = ∫|η₂|^{(q+1)/q} / K^{1/q}`,
/// `C = <Tη, η>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberData {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    p: f64,
    q: f64,
}

impl FiberData {
    pub fn new(eta: &DualPair, c: Coefficients, params: &ProblemParams) -> Result<Self> {
        let (p, q) = (params.p(), params.q());
        let op = RadialOperator::new(&eta.grid);
        let f1: Vec<f64> = eta.eta1.iter().map(|e| e.abs().powf((p + 1.0) / p)).collect();
        let f2: Vec<f64> = eta.eta2.iter().map(|e| e.abs().powf((q + 1.0) / q)).collect();
        let a = op.integrate(&f1) / c.q.powf(1.0 / p);
        let b = op.integrate(&f2) / c.k.powf(1.0 / q);
        let radial = |source| DualError::Radial { op: "dual_energy", source };
        let t1 = op.resolve(&eta.eta1, c.v).map_err(radial)?;
        let t2 = op.resolve(&eta.eta2, c.v).map_err(radial)?;
        let cross = |x: &[f64], y: &[f64]| -> f64 {
            let prod: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
            op.integrate(&prod)
        };
        let cc = cross(&eta.eta1, &t2) + cross(&eta.eta2, &t1);
        Ok(Self { a, b, c: cc, p, q })
    }

    /// `I(tη)`.
    pub fn value(&self, t: f64) -> f64 {
        let (p, q) = (self.p, self.q);
        t.powf((p + 1.0) / p) * p / (p + 1.0) * self.a + t.powf((q + 1.0) / q) * q / (q + 1.0) * self.b
            - 0.5 * t * t * self.c
    }

    /// `<I'(tη), η> / t`, which vanishes exactly on the Nehari manifold.
    pub fn fiber_equation(&self, t: f64) -> f64 {
        let (p, q) = (self.p, self.q);
        t.powf((1.0 - p) / p) * self.a + t.powf((1.0 - q) / q) * self.b - self.c
    }

    /// Unique `t > 0` with `fiber_equation(t) = 0`.
    pub fn nehari_time(&self) -> Result<f64> {
        if !(self.c > 0.0) {
            return Err(DualError::NotInHPlus {
                op: "nehari_time",
                value: self.c,
            });
        }
        let (p, q) = (self.p, self.q);
        let fail = DualError::RootSearch {
            a: self.a,
            b: self.b,
            c: self.c,
        };
        if p == q {
            let t = ((self.a + self.b) / self.c).powf(p / (p - 1.0));
            return if t.is_finite() && t > 0.0 { Ok(t) } else { Err(fail) };
        }
        // g(e^s) is strictly decreasing in s; bracket then bisect, then polish
        let g = |s: f64| self.fiber_equation(s.exp());
        let (mut lo, mut hi) = (-1.0, 1.0);
        let mut guard = 0;
        while g(lo) <= 0.0 {
            lo -= 2.0 * (1.0 + lo.abs());
            guard += 1;
            if guard > 60 {
                return Err(fail);
            }
        }
        while g(hi) >= 0.0 {
            hi += 2.0 * (1.0 + hi.abs());
            guard += 1;
            if guard > 120 {
                return Err(fail);
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut s = 0.5 * (lo + hi);
        for _ in 0..3 {
            let t = s.exp();
            let dg = (1.0 - p) / p * t.powf((1.0 - p) / p) * self.a + (1.0 - q) / q * t.powf((1.0 - q) / q) * self.b;
            let next = s - g(s) / dg;
            if !(next.is_finite() && g(next).abs() < g(s).abs()) {
                break;
            }
            s = next;
        }
        let t = s.exp();
        if t.is_finite() && t > 0.0 {
            Ok(t)
        } else {
            Err(fail)
        }
    }

    /// `max_{t>0} I(tη)`.
    pub fn nehari_energy(&self) -> Result<f64> {
        Ok(self.value(self.nehari_time()?))
    }
}

/// `I_z(η) = p/(p+1) A + q/(q+1) B - <Tη,η>/2`.
pub fn dual_energy(eta: &DualPair, c: Coefficients, params: &ProblemParams) -> Result<f64> {
    Ok(FiberData::new(eta, c, params)?.value(1.0))
}

pub fn nehari_time(eta: &DualPair, c: Coefficients, params: &ProblemParams) -> Result<f64> {
    FiberData::new(eta, c, params)?.nehari_time()
}

pub fn nehari_energy(eta: &DualPair, c: Coefficients, params: &ProblemParams) -> Result<f64> {
    FiberData::new(eta, c, params)?.nehari_energy()
}

/// `(t, I(tη))` at `count` log-spaced times in `[t_lo, t_hi]`.
pub fn sample_fiber(
    eta: &DualPair,
    c: Coefficients,
    params: &ProblemParams,
    t_lo: f64,
    t_hi: f64,
    count: usize,
) -> Result<Vec<(f64, f64)>> {
    let data = FiberData::new(eta, c, params)?;
    let count = count.max(2);
    let (a, b) = (t_lo.ln(), t_hi.ln());
    Ok((0..count)
        .map(|i| {
            let t = (a + (b - a) * i as f64 / (count - 1) as f64).exp();
            (t, data.value(t))
        })
        .collect())
}

/// Relative defect of `Tη₂ = u`, `Tη₁ = v` for a solution pair and its dual.
pub fn resolvent_defect(pair: &RadialProfilePair, c: Coefficients, params: &ProblemParams) -> Result<f64> {
    let eta = dual_transform(pair, c, params);
    let op = RadialOperator::new(&pair.grid);
    let radial = |source| DualError::Radial {
        op: "resolvent_defect",
        source,
    };
    let tu = op.resolve(&eta.eta2, c.v).map_err(radial)?;
    let tv = op.resolve(&eta.eta1, c.v).map_err(radial)?;
    let du = tu.iter().zip(pair.u.iter()).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let dv = tv.iter().zip(pair.v.iter()).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    Ok((du / pair.u.max_abs()).max(dv / pair.v.max_abs()))
}

/// Number of strict interior local maxima of a sampled curve.
pub fn count_local_maxima(values: &[f64]) -> usize {
    values
        .windows(3)
        .filter(|w| w[1] > w[0] && w[1] >= w[2])
        .count()
}

/// Fixed trial family for minimality checks: sech-type pairs over an
/// amplitude/width grid and Gaussian bumps, all positive (hence in `H₊`).
pub fn trial_corpus(grid: &RadialGrid, params: &ProblemParams) -> Vec<DualPair> {
    let (p, q) = (params.p(), params.q());
    let mut out = Vec::new();
    for amp in [0.5, 1.0, 2.0] {
        for width in [0.5, 1.0, 2.0] {
            let u = RadialField::from_fn(grid, |r| amp * (1.0 / (r / width).cosh()).powf(2.0 / (p - 1.0)));
            let v = RadialField::from_fn(grid, |r| (1.0 / (r / width).cosh()).powf(2.0 / (q - 1.0)));
            out.push(DualPair::new(u.map(|x| x.powf(p)), v.map(|x| x.powf(q)), *grid));
        }
    }
    for (a, b, s) in [(1.0, 1.0, 1.0), (1.0, 0.2, 1.5), (0.3, 2.0, 0.7), (2.0, 2.0, 3.0)] {
        out.push(DualPair::new(
            RadialField::from_fn(grid, |r| a * (-(r / s).powi(2)).exp()),
            RadialField::from_fn(grid, |r| b * (-(r / (1.3 * s)).powi(2)).exp()),
            *grid,
        ));
    }
    out
}
