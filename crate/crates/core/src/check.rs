//! Identity suite run by the `check` subcommand.

use crate::dual::{self, FiberData};
use crate::error::Result;
use crate::groundstate::{self, Coefficients, GroundStateRecord};
use crate::landscape;
use crate::model::{PotentialTriple, ProblemParams, SearchBox};
use crate::newton::NewtonOptions;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
}

impl CheckRow {
    fn new(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.measured <= self.tolerance
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Runs every identity that applies to the configured problem.
pub fn run_checks(
    canonical: &GroundStateRecord,
    potentials: &PotentialTriple,
    region: &SearchBox,
    opts: &NewtonOptions,
) -> Result<Vec<CheckRow>> {
    let params: ProblemParams = canonical.params;
    let unit = Coefficients::UNIT;
    let mut rows = Vec::new();
    rows.push(CheckRow::new("newton_residual", canonical.newton_residual, opts.tol));

    let eta = dual::dual_transform(&canonical.profile, unit, &params);
    let dual_value = dual::dual_energy(&eta, unit, &params)?;
    rows.push(CheckRow::new("energy_identity", rel(dual_value, canonical.gamma), 1e-8));
    let t = dual::nehari_time(&eta, unit, &params)?;
    rows.push(CheckRow::new("nehari_time", (t - 1.0).abs(), 1e-8));
    rows.push(CheckRow::new(
        "resolvent_shortcut",
        dual::resolvent_defect(&canonical.profile, unit, &params)?,
        1e-8,
    ));
    let base = dual::nehari_energy(&eta, unit, &params)?;
    let mut worst = 0.0_f64;
    for lambda in [0.5, 2.0, 10.0] {
        worst = worst.max(rel(dual::nehari_energy(&eta.scaled(lambda), unit, &params)?, base));
    }
    rows.push(CheckRow::new("nehari_scale_invariance", worst, 1e-10));

    let mut non_unimodal = 0;
    let mut best_trial = f64::INFINITY;
    for trial in dual::trial_corpus(&canonical.profile.grid, &params) {
        let data = FiberData::new(&trial, unit, &params)?;
        let t = data.nehari_time()?;
        best_trial = best_trial.min(data.value(t));
        let fiber = dual::sample_fiber(&trial, unit, &params, t / 10.0, t * 10.0, 200)?;
        let values: Vec<f64> = fiber.iter().map(|x| x.1).collect();
        if dual::count_local_maxima(&values) != 1 {
            non_unimodal += 1;
        }
    }
    rows.push(CheckRow::new("fiber_unimodal_failures", non_unimodal as f64, 0.0));
    rows.push(CheckRow::new(
        "branch_minimality",
        ((canonical.gamma - best_trial) / canonical.gamma).max(0.0),
        1e-6,
    ));

    let mut worst = 0.0_f64;
    for (k, q, v) in [(2.0, 0.5, 1.0), (3.0, 3.0, 4.0), (0.7, 1.9, 2.5)] {
        let pot = PotentialTriple::parse(&format!("{k:?}"), &format!("{q:?}"), Some(&format!("{v:?}")), params.n())?;
        let z = vec![0.0; params.n()];
        let a = landscape::sigma_at(&z, &pot, canonical)?;
        let d = landscape::sigma_direct(&z, &pot, canonical, opts)?;
        worst = worst.max(rel(d.sigma, a.sigma));
    }
    rows.push(CheckRow::new("scaling_vs_direct", worst, 1e-5));

    if !potentials.is_constant() {
        let mut fd_err = 0.0_f64;
        let mut log_err = 0.0_f64;
        let lattice = region.lattice(5);
        let points: Vec<&Vec<f64>> = lattice.iter().take(10).collect();
        for z in points {
            let (local, _) = landscape::local_solution(z, potentials, canonical, opts)?;
            let formula = landscape::grad_sigma_formula(z, &local, potentials, &params)?;
            let scaling = landscape::sigma_at(z, potentials, canonical)?;
            let scale = scaling.grad_sigma.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            if scale == 0.0 {
                continue;
            }
            for i in 0..z.len() {
                let h = 1e-4;
                let mut zp = z.clone();
                let mut zm = z.clone();
                zp[i] += h;
                zm[i] -= h;
                let fd = (landscape::sigma_at(&zp, potentials, canonical)?.sigma
                    - landscape::sigma_at(&zm, potentials, canonical)?.sigma)
                    / (2.0 * h);
                fd_err = fd_err.max((formula.from_left[i] - fd).abs() / scale);
                log_err = log_err.max((formula.from_left[i] - scaling.grad_sigma[i]).abs() / scale);
            }
        }
        rows.push(CheckRow::new("derivative_vs_finite_difference", fd_err, 1e-4));
        rows.push(CheckRow::new("derivative_vs_scaling", log_err, 1e-6));
    }

    let (p, q) = (params.p(), params.q());
    if params.n() == 1 && p == q {
        let grid = canonical.profile.grid;
        let err = grid
            .nodes()
            .zip(canonical.profile.u.iter())
            .fold(0.0_f64, |m, (r, u)| m.max((u - groundstate::sech_profile(p, r)).abs()));
        rows.push(CheckRow::new("closed_form_profile", err, 1e-4));
        rows.push(CheckRow::new(
            "closed_form_peak",
            (canonical.peak_u - groundstate::sech_profile(p, 0.0)).abs(),
            1e-5,
        ));
        if p == 3.0 {
            rows.push(CheckRow::new("closed_form_energy", (canonical.gamma - 8.0 / 3.0).abs(), 1e-5));
        }
    }
    Ok(rows)
}
