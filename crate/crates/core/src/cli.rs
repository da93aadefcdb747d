//! Command-line driver.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::check;
use crate::config::{Resolved, RunConfig};
use crate::error::{Error, Result, EXIT_FAIL, EXIT_OK, EXIT_VALIDATION};
use crate::groundstate::{self, GroundStateRecord};
use crate::landscape::{self, SigmaLandscape};
use crate::output::{format_number, write_atomic, Cell, CsvTable};
use crate::perturb::{self, Verdict};

#[derive(Debug, Parser)]
#[command(name = "spikeloc", version, about = "Ground states, energy landscapes and spike location")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `[output] directory`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel stages.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Multistart seed (overrides `[landscape] seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Solve the canonical ground state and write its profile.
    Groundstate,
    /// Tabulate Σ and ∇Σ over the search box.
    SigmaMap,
    /// Locate critical points of Σ.
    Locate,
    /// Continue a spike down the ε ladder and compare with the landscape.
    EpsilonSweep,
    /// Run the identity suite.
    Check,
}

struct Ctx {
    resolved: Resolved,
    out: PathBuf,
    hash: String,
    digits: usize,
    verbose: bool,
}

impl Ctx {
    fn write(&self, name: &str, table: &CsvTable) -> Result<()> {
        let path = self.out.join(name);
        write_atomic(&path, &table.render(&self.hash, self.digits)).map_err(|source| Error::Io {
            context: path.display().to_string(),
            source,
        })?;
        if self.verbose {
            eprintln!("wrote {}", path.display());
        }
        Ok(())
    }

    fn num(&self, x: f64) -> String {
        format_number(x, self.digits)
    }

    fn canonical(&self) -> Result<GroundStateRecord> {
        let cfg = &self.resolved.config;
        if self.verbose {
            eprintln!(
                "solving canonical ground state (n={}, p={}, q={}, R={}, m={})",
                cfg.problem.n,
                cfg.problem.p,
                cfg.problem.q,
                self.resolved.grid.radius(),
                self.resolved.grid.len()
            );
        }
        Ok(groundstate::solve_canonical(
            &self.resolved.params,
            &self.resolved.grid,
            &cfg.solve_options(),
        )?)
    }

    fn problem_meta(&self) -> String {
        let c = &self.resolved.config;
        let pot = &self.resolved.potentials;
        format!(
            "n={} p={} q={} K={} Q={} V={}",
            c.problem.n, c.problem.p, c.problem.q, pot.k, pot.q, pot.v
        )
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<i32> {
    let path = cli.config.as_deref().ok_or_else(|| {
        Error::Config(crate::config::ConfigError::Invalid {
            section: "--config",
            msg: "a configuration file is required".into(),
        })
    })?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.landscape.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output.directory = out.display().to_string();
    }
    let resolved = cfg.resolve()?;
    let ctx = Ctx {
        out: PathBuf::from(&cfg.output.directory),
        hash: cfg.hash(),
        digits: cfg.output.precision,
        verbose: cli.verbose,
        resolved,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Io {
            context: "thread pool".into(),
            source: std::io::Error::other(e),
        })?;
    pool.install(|| match cli.command {
        Command::Groundstate => cmd_groundstate(&ctx),
        Command::SigmaMap => cmd_sigma_map(&ctx),
        Command::Locate => cmd_locate(&ctx),
        Command::EpsilonSweep => cmd_sweep(&ctx),
        Command::Check => cmd_check(&ctx),
    })
}

fn cmd_groundstate(ctx: &Ctx) -> Result<i32> {
    let rec = ctx.canonical()?;
    let mut table = CsvTable::new(["r", "u", "v"])
        .meta(ctx.problem_meta())
        .meta(format!("gamma={}", ctx.num(rec.gamma)))
        .meta(format!("peak_u={} peak_v={}", ctx.num(rec.peak_u), ctx.num(rec.peak_v)))
        .meta(format!("theta={}", ctx.num(rec.theta)))
        .meta(format!(
            "newton_residual={} iterations={}",
            ctx.num(rec.newton_residual),
            rec.newton_iterations
        ));
    let grid = rec.profile.grid;
    for (i, r) in grid.nodes().enumerate() {
        table.push(vec![r.into(), rec.profile.u[i].into(), rec.profile.v[i].into()]);
    }
    ctx.write("groundstate.csv", &table)?;
    println!("gamma {}", ctx.num(rec.gamma));
    println!("peak_u {}", ctx.num(rec.peak_u));
    println!("peak_v {}", ctx.num(rec.peak_v));
    println!("theta {}", ctx.num(rec.theta));
    println!("newton_residual {}", ctx.num(rec.newton_residual));
    Ok(EXIT_OK)
}

fn z_columns(n: usize, prefix: &str) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn cmd_sigma_map(ctx: &Ctx) -> Result<i32> {
    use rayon::prelude::*;
    let rec = ctx.canonical()?;
    let r = &ctx.resolved;
    let n = r.params.n();
    let points = r.region.lattice(r.config.landscape.points_per_axis);
    let map = SigmaLandscape::build(&points, &r.potentials, &rec)?;
    let mut samples = map.samples.clone();
    if r.config.landscape.validate_direct {
        let newton = r.config.newton();
        let direct = points
            .par_iter()
            .map(|z| landscape::sigma_direct(z, &r.potentials, &rec, &newton))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        samples.extend(direct);
    }
    let mut cols = z_columns(n, "z");
    cols.push("sigma".into());
    cols.extend(z_columns(n, "dsigma_dz"));
    cols.push("method".into());
    let mut table = CsvTable::new(cols).meta(ctx.problem_meta()).meta(format!(
        "gamma={} theta_k={} theta_q={} theta_v={}",
        ctx.num(map.gamma),
        ctx.num(map.theta_k),
        ctx.num(map.theta_q),
        ctx.num(map.theta_v)
    ));
    for s in &samples {
        let mut row: Vec<Cell> = s.z.iter().map(|x| (*x).into()).collect();
        row.push(s.sigma.into());
        row.extend(s.grad_sigma.iter().map(|x| Cell::from(*x)));
        row.push(s.method.tag().into());
        table.push(row);
    }
    ctx.write("sigma_map.csv", &table)?;
    let worst = if r.config.landscape.validate_direct {
        let k = points.len();
        (0..k)
            .map(|i| (samples[i].sigma - samples[k + i].sigma).abs() / samples[i].sigma)
            .fold(0.0_f64, f64::max)
    } else {
        f64::NAN
    };
    println!("points {}", points.len());
    if worst.is_finite() {
        println!("max_relative_scaling_direct {}", ctx.num(worst));
    }
    Ok(EXIT_OK)
}

fn cmd_locate(ctx: &Ctx) -> Result<i32> {
    let rec = ctx.canonical()?;
    let r = &ctx.resolved;
    let report = landscape::find_spike_candidates(&r.potentials, &r.region, &r.params, &r.config.candidate_options())?;
    let n = r.params.n();
    let mut cols = z_columns(n, "z");
    cols.extend(["classification", "grad_sigma_norm", "g_value"].map(String::from));
    let mut table = CsvTable::new(cols)
        .meta(ctx.problem_meta())
        .meta(format!(
            "starts={} converged={} degenerate={}",
            report.starts, report.converged, report.degenerate
        ));
    for c in &report.candidates {
        let mut row: Vec<Cell> = c.z.iter().map(|x| (*x).into()).collect();
        row.push(c.kind.label().into());
        row.push(c.sigma_grad_norm(rec.gamma).into());
        row.push(c.g_value.into());
        table.push(row);
    }
    ctx.write("candidates.csv", &table)?;
    if report.degenerate {
        println!("degenerate: sigma constant");
    }
    for c in &report.candidates {
        let z: Vec<String> = c.z.iter().map(|x| ctx.num(*x)).collect();
        println!("{} {}", z.join(" "), c.kind.label());
    }
    Ok(EXIT_OK)
}

fn cmd_sweep(ctx: &Ctx) -> Result<i32> {
    let rec = ctx.canonical()?;
    let r = &ctx.resolved;
    let cfg = &r.config;
    let candidates = landscape::find_spike_candidates(&r.potentials, &r.region, &r.params, &cfg.candidate_options())?;
    let trace = perturb::epsilon_sweep(&cfg.sweep.epsilons, &r.potentials, &rec, cfg.sweep.start, &cfg.sweep_options())?;
    let report = perturb::concentration_report(&trace, &candidates, &r.potentials, &rec, &cfg.thresholds())?;
    let t = report.thresholds;
    let mut summary = CsvTable::new([
        "epsilon",
        "peak_u",
        "peak_v",
        "rescaled_energy",
        "ps_residual",
        "ps_relative",
        "candidate",
        "dist_to_candidate",
        "energy_gap",
        "profile_defect",
    ])
    .meta(ctx.problem_meta())
    .meta(format!(
        "start={} L={} spacing={}",
        cfg.sweep.start,
        trace.runs[0].grid.half_width(),
        ctx.num(trace.runs[0].grid.spacing())
    ))
    .meta(format!(
        "thresholds peak_distance={} energy_gap={} jitter={}",
        t.peak_distance, t.energy_gap, t.jitter
    ))
    .meta(format!("verdict={}", report.verdict.label()));
    for (k, (run, row)) in trace.runs.iter().zip(&report.rows).enumerate() {
        summary.push(vec![
            run.epsilon.into(),
            run.peak_u.into(),
            run.peak_v.into(),
            run.rescaled_energy.into(),
            run.ps_residual.into(),
            run.ps_relative().into(),
            row.candidate.unwrap_or(f64::NAN).into(),
            row.distance.into(),
            row.energy_gap.into(),
            trace.profile_defect[k].into(),
        ]);
        let mut profile = CsvTable::new(["x", "u", "v"])
            .meta(ctx.problem_meta())
            .meta(format!("epsilon={}", run.epsilon));
        for (i, x) in run.grid.nodes().enumerate() {
            profile.push(vec![x.into(), run.u[i].into(), run.v[i].into()]);
        }
        ctx.write(&format!("run_{k:02}.csv"), &profile)?;
    }
    ctx.write("sweep_summary.csv", &summary)?;
    for row in &report.rows {
        println!(
            "eps {} peak {} dist {} gap {} ps {}",
            ctx.num(row.epsilon),
            ctx.num(row.peak),
            ctx.num(row.distance),
            ctx.num(row.energy_gap),
            ctx.num(row.ps_relative)
        );
    }
    println!(
        "verdict {} (peak_distance <= {}, energy_gap <= {}, jitter {})",
        report.verdict.label(),
        t.peak_distance,
        t.energy_gap,
        t.jitter
    );
    Ok(if report.verdict == Verdict::Fail { EXIT_FAIL } else { EXIT_OK })
}

fn cmd_check(ctx: &Ctx) -> Result<i32> {
    let rec = ctx.canonical()?;
    let r = &ctx.resolved;
    let rows = check::run_checks(&rec, &r.potentials, &r.region, &r.config.newton())?;
    let mut table = CsvTable::new(["check", "measured", "tolerance", "passed"]).meta(ctx.problem_meta());
    for row in &rows {
        table.push(vec![
            row.name.clone().into(),
            row.measured.into(),
            row.tolerance.into(),
            row.passed().into(),
        ]);
        println!(
            "{:<34} {:>16} {:>16} {}",
            row.name,
            ctx.num(row.measured),
            ctx.num(row.tolerance),
            if row.passed() { "pass" } else { "FAIL" }
        );
    }
    ctx.write("check.csv", &table)?;
    Ok(if rows.iter().all(|r| r.passed()) { EXIT_OK } else { EXIT_FAIL })
}
