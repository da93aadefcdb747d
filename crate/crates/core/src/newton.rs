//! Damped Newton iteration with Armijo backtracking on the residual norm.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NewtonError {
    #[error("Newton diverged after {iterations} iterations (residual {residual:.3e}): {reason}")]
    Diverged {
        iterations: usize,
        residual: f64,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Convergence threshold on the scaled max-norm residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Smallest damping factor tried before giving up.
    pub min_step: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 60,
            min_step: 2f64.powi(-20),
            armijo: 1e-4,
        }
    }
}

/// A square nonlinear system `F(x) = 0`.
pub trait NewtonSystem {
    fn residual(&self, x: &[f64]) -> Vec<f64>;

    /// Solves `J(x) d = -f` for the Newton direction.
    fn direction(&self, x: &[f64], f: &[f64]) -> Option<Vec<f64>>;

    /// Normalization for the reported residual (e.g. size of the nonlinear source).
    fn scale(&self, _x: &[f64]) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    /// `|F|_∞ / max(1, scale)` at the returned iterate.
    pub residual: f64,
    pub iterations: usize,
}

fn norm2(f: &[f64]) -> f64 {
    f.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn scaled_residual<S: NewtonSystem + ?Sized>(system: &S, x: &[f64], f: &[f64]) -> f64 {
    let inf = f.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    inf / system.scale(x).max(1.0)
}

pub fn solve<S: NewtonSystem + ?Sized>(
    system: &S,
    x0: Vec<f64>,
    opts: &NewtonOptions,
) -> Result<NewtonOutcome, NewtonError> {
    let mut x = x0;
    let mut f = system.residual(&x);
    let mut res = scaled_residual(system, &x, &f);
    for it in 0..=opts.max_iter {
        if !res.is_finite() {
            return Err(NewtonError::Diverged {
                iterations: it,
                residual: res,
                reason: "non-finite residual".into(),
            });
        }
        if res <= opts.tol {
            return Ok(NewtonOutcome {
                x,
                residual: res,
                iterations: it,
            });
        }
        if it == opts.max_iter {
            break;
        }
        let d = system.direction(&x, &f).ok_or_else(|| NewtonError::Diverged {
            iterations: it,
            residual: res,
            reason: "singular Jacobian".into(),
        })?;
        let f_norm = norm2(&f);
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + lambda * b).collect();
            let f_trial = system.residual(&trial);
            let n_trial = norm2(&f_trial);
            if n_trial.is_finite() && n_trial <= (1.0 - opts.armijo * lambda) * f_norm {
                x = trial;
                f = f_trial;
                res = scaled_residual(system, &x, &f);
                break;
            }
            lambda *= 0.5;
            if lambda < opts.min_step {
                return Err(NewtonError::Diverged {
                    iterations: it,
                    residual: res,
                    reason: "line search exhausted".into(),
                });
            }
        }
    }
    Err(NewtonError::Diverged {
        iterations: opts.max_iter,
        residual: res,
        reason: "iteration limit reached".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Cubic;

    impl NewtonSystem for Cubic {
        fn residual(&self, x: &[f64]) -> Vec<f64> {
            vec![x[0].powi(3) - 2.0 * x[0] - 5.0]
        }
        fn direction(&self, x: &[f64], f: &[f64]) -> Option<Vec<f64>> {
            let j = 3.0 * x[0] * x[0] - 2.0;
            (j != 0.0).then(|| vec![-f[0] / j])
        }
    }

    #[test]
    fn finds_wallis_root() {
        let out = solve(&Cubic, vec![2.0], &NewtonOptions::default()).unwrap();
        assert!((out.x[0] - 2.0945514815423265).abs() < 1e-12);
    }

    #[test]
    fn damping_rescues_a_far_start() {
        let out = solve(&Cubic, vec![-3.0], &NewtonOptions::default()).unwrap();
        assert!((out.x[0] - 2.0945514815423265).abs() < 1e-12);
    }

    struct NoRoot;

    impl NewtonSystem for NoRoot {
        fn residual(&self, x: &[f64]) -> Vec<f64> {
            vec![x[0] * x[0] + 1.0]
        }
        fn direction(&self, x: &[f64], f: &[f64]) -> Option<Vec<f64>> {
            let j = 2.0 * x[0];
            (j != 0.0).then(|| vec![-f[0] / j])
        }
    }

    #[test]
    fn reports_divergence() {
        assert!(solve(&NoRoot, vec![0.3], &NewtonOptions::default()).is_err());
    }
}
