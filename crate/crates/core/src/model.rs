//! Problem parameters, potentials and their sampled bounds.

use thiserror::Error;

use crate::exprfield::{self, ExprError, Expression};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("dimension n={0} is not supported (expected 1, 2 or 3)")]
    BadDimension(usize),
    #[error("exponents must satisfy p > 1 and q > 1 (got p={p}, q={q})")]
    ExponentTooSmall { p: f64, q: f64 },
    #[error(
        "(p, q) = ({p}, {q}) is not strictly below the critical hyperbola for n={n}: \
         1/(p+1) + 1/(q+1) - (n-2)/n = {margin}"
    )]
    SupercriticalPair { n: usize, p: f64, q: f64, margin: f64 },
    #[error("potential {field} is nonpositive ({value}) at {point:?}")]
    NonpositivePotential {
        field: &'static str,
        value: f64,
        point: Vec<f64>,
    },
    #[error("bound sampling needs at least 2 samples per axis (got {0})")]
    TooFewSamples(usize),
    #[error("search box dimension {got} does not match problem dimension {expected}")]
    BoxDimension { expected: usize, got: usize },
    #[error("potential {field}: {source}")]
    Expr {
        field: &'static str,
        #[source]
        source: ExprError,
    },
}

/// Dimension and exponents of a validated problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    n: usize,
    p: f64,
    q: f64,
    margin: f64,
}

/// Validates `(n, p, q)`. Pairs on or above the critical hyperbola are
/// rejected with zero tolerance.
pub fn validate_params(n: usize, p: f64, q: f64) -> Result<ProblemParams, ModelError> {
    if !(1..=3).contains(&n) {
        return Err(ModelError::BadDimension(n));
    }
    if !(p.is_finite() && q.is_finite() && p > 1.0 && q > 1.0) {
        return Err(ModelError::ExponentTooSmall { p, q });
    }
    let nf = n as f64;
    // margin * n(p+1)(q+1); exact for the small rational inputs seen in practice
    let numerator = nf * (q + 1.0) + nf * (p + 1.0) - (nf - 2.0) * (p + 1.0) * (q + 1.0);
    let margin = numerator / (nf * (p + 1.0) * (q + 1.0));
    if numerator <= 0.0 {
        return Err(ModelError::SupercriticalPair { n, p, q, margin });
    }
    Ok(ProblemParams { n, p, q, margin })
}

impl ProblemParams {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `1/(p+1) + 1/(q+1) - (n-2)/n`, strictly positive.
    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Same problem with `p` and `q` exchanged.
    pub fn swapped(&self) -> ProblemParams {
        ProblemParams {
            n: self.n,
            p: self.q,
            q: self.p,
            margin: self.margin,
        }
    }

    fn pq1(&self) -> f64 {
        self.p * self.q - 1.0
    }

    /// Exponent of `K` in the ground energy, `(p+1)/(pq-1)`.
    pub fn theta_k(&self) -> f64 {
        (self.p + 1.0) / self.pq1()
    }

    /// Exponent of `Q` in the ground energy, `(q+1)/(pq-1)`.
    pub fn theta_q(&self) -> f64 {
        (self.q + 1.0) / self.pq1()
    }

    /// Exponent of `V` in the ground energy, `(p+1)(q+1)/(pq-1) - n/2`.
    pub fn theta_v(&self) -> f64 {
        (self.p + 1.0) * (self.q + 1.0) / self.pq1() - self.n as f64 / 2.0
    }
}

/// Axis-aligned box `[lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SearchBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len(), "box corners must share a dimension");
        Self { lo, hi }
    }

    /// The cube `[-half, half]^dim`.
    pub fn cube(dim: usize, half: f64) -> Self {
        Self::new(vec![-half; dim], vec![half; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        z.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (lo, hi))| *x >= *lo && *x <= *hi)
    }

    /// Tensor grid with `per_axis` points per axis, in lexicographic order.
    pub fn lattice(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let dim = self.dim();
        let axis = |d: usize, k: usize| -> f64 {
            if per_axis == 1 {
                0.5 * (self.lo[d] + self.hi[d])
            } else {
                let t = k as f64 / (per_axis - 1) as f64;
                (self.lo[d] * (1.0 - t) + self.hi[d] * t).clamp(self.lo[d], self.hi[d])
            }
        };
        let total = per_axis.pow(dim as u32);
        (0..total)
            .map(|mut idx| {
                let mut z = vec![0.0; dim];
                for d in (0..dim).rev() {
                    z[d] = axis(d, idx % per_axis);
                    idx /= per_axis;
                }
                z
            })
            .collect()
    }
}

/// Sampled diagnostics attached by [`check_potential_bounds`].
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialBounds {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    /// Largest sampled `ln(1 + |grad|) / (1 + |x|)`; a proxy for the growth rate `M`.
    pub grad_growth: f64,
    pub grad_bound_ok: bool,
}

/// The fields `K`, `Q`, `V` of the system.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTriple {
    pub k: Expression,
    pub q: Expression,
    pub v: Expression,
    bounds: Option<PotentialBounds>,
}

/// Values and gradients of the three fields at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSample {
    pub k: f64,
    pub q: f64,
    pub v: f64,
    pub grad_k: Vec<f64>,
    pub grad_q: Vec<f64>,
    pub grad_v: Vec<f64>,
    /// Some field passed through a kink at this point.
    pub nonsmooth: bool,
}

impl PotentialTriple {
    pub fn new(k: Expression, q: Expression, v: Expression) -> Self {
        assert!(
            k.dim() == q.dim() && q.dim() == v.dim(),
            "potentials must share a dimension"
        );
        Self {
            k,
            q,
            v,
            bounds: None,
        }
    }

    /// Parses the three fields; `v` defaults to the constant 1.
    pub fn parse(k: &str, q: &str, v: Option<&str>, dim: usize) -> Result<Self, ModelError> {
        let wrap = |field: &'static str| move |source| ModelError::Expr { field, source };
        let k = exprfield::parse(k, dim).map_err(wrap("K"))?;
        let q = exprfield::parse(q, dim).map_err(wrap("Q"))?;
        let v = match v {
            Some(text) => exprfield::parse(text, dim).map_err(wrap("V"))?,
            None => Expression::constant(1.0, dim),
        };
        Ok(Self::new(k, q, v))
    }

    /// `K = Q = V = 1`.
    pub fn unit(dim: usize) -> Self {
        let one = Expression::constant(1.0, dim);
        Self::new(one.clone(), one.clone(), one)
    }

    pub fn dim(&self) -> usize {
        self.k.dim()
    }

    pub fn bounds(&self) -> Option<&PotentialBounds> {
        self.bounds.as_ref()
    }

    /// All three fields are literal constants.
    pub fn is_constant(&self) -> bool {
        self.k.as_constant().is_some()
            && self.q.as_constant().is_some()
            && self.v.as_constant().is_some()
    }

    /// Copy with sampled bounds attached.
    pub fn with_bounds(mut self, region: &SearchBox, per_axis: usize) -> Result<Self, ModelError> {
        self.bounds = Some(check_potential_bounds(&self, region, per_axis)?);
        Ok(self)
    }

    /// Values and exact gradients at `z`; fails if a field is nonpositive.
    pub fn sample(&self, z: &[f64]) -> Result<PotentialSample, ModelError> {
        let wrap = |field: &'static str| move |source| ModelError::Expr { field, source };
        let (k, gk) = self.k.eval_with_grad(z).map_err(wrap("K"))?;
        let (q, gq) = self.q.eval_with_grad(z).map_err(wrap("Q"))?;
        let (v, gv) = self.v.eval_with_grad(z).map_err(wrap("V"))?;
        for (field, value) in [("K", k), ("Q", q), ("V", v)] {
            if value <= 0.0 {
                return Err(ModelError::NonpositivePotential {
                    field,
                    value,
                    point: z.to_vec(),
                });
            }
        }
        Ok(PotentialSample {
            k,
            q,
            v,
            nonsmooth: gk.nonsmooth || gq.nonsmooth || gv.nonsmooth,
            grad_k: gk.values,
            grad_q: gq.values,
            grad_v: gv.values,
        })
    }
}

/// Dense-sampling lower/upper bounds of `K`, `Q`, `V` over `region`.
pub fn check_potential_bounds(
    potentials: &PotentialTriple,
    region: &SearchBox,
    per_axis: usize,
) -> Result<PotentialBounds, ModelError> {
    if per_axis < 2 {
        return Err(ModelError::TooFewSamples(per_axis));
    }
    if region.dim() != potentials.dim() {
        return Err(ModelError::BoxDimension {
            expected: potentials.dim(),
            got: region.dim(),
        });
    }
    let mut alpha = f64::INFINITY;
    let mut beta = f64::NEG_INFINITY;
    let mut growth = 0.0_f64;
    let mut grad_ok = true;
    for z in region.lattice(per_axis) {
        let s = potentials.sample(&z)?;
        for value in [s.k, s.q, s.v] {
            alpha = alpha.min(value);
            beta = beta.max(value);
        }
        let norm = |g: &[f64]| g.iter().map(|x| x * x).sum::<f64>().sqrt();
        let gmax = norm(&s.grad_k).max(norm(&s.grad_q)).max(norm(&s.grad_v));
        grad_ok &= gmax.is_finite() && !s.nonsmooth;
        let radius = norm(&z);
        growth = growth.max(gmax.ln_1p() / (1.0 + radius));
    }
    Ok(PotentialBounds {
        alpha_hat: alpha,
        beta_hat: beta,
        grad_growth: growth,
        grad_bound_ok: grad_ok,
    })
}
