//! Subcommand definitions and their execution.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use nehari::factorization::{default_factor_grid, riesz_factorize};
use nehari::hankel::{default_order, hankel_norm, top_singular};
use nehari::primal::{primal_bruteforce, PrimalOptions, StepSchedule};
use nehari::solver::{default_grid_for_order, weak_duality_check, SolutionFlags};
use nehari::symbol::{laurent_spec, SymbolBody};
use nehari::{
    parse_sym, render_sym, solve, Grid64, Hankel64, NehariSolution, PowerIteration, Series64,
    SolveOptions, SymbolSpec,
};
use sha2::{Digest, Sha256};

use crate::config::{self, Overrides};
use crate::error::CliError;
use crate::report::{fmt_f64, Flags, InputInfo, Params, Report, Results};

#[derive(Debug, Parser)]
#[command(
    name = "nehari",
    version,
    about = "Best anticausal approximation on the unit circle"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hankel norm of the symbol and its truncation drift.
    Norm(NormArgs),
    /// Optimal approximant and residual.
    Approx(ApproxArgs),
    /// Dual certificate checked against a direct primal search.
    Certify(CertifyArgs),
    /// Inner-outer and Riesz factorization of a causal polynomial.
    Factor(FactorArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Symbol file in sym-v1 format.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Seed for power-iteration and subgradient starts [default: 42].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Relative power-iteration tolerance [default: 1e-12].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Truncation tolerance for rational symbols [default: 1e-12].
    #[arg(long)]
    pub tail_tol: Option<f64>,
    /// TOML file with parameter defaults [default: ./nehari.toml if present].
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Record wall-clock timings in the report.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct NormArgs {
    #[command(flatten)]
    pub common: Common,
    /// Truncation order N [default: max(32, 4 x causal width)].
    #[arg(long)]
    pub order: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Truncation order N [default: max(32, 4 x causal width)].
    #[arg(long)]
    pub order: Option<usize>,
    /// Grid size G, a power of two [default: 8 x next_pow2(2N)].
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Write the approximant here in sym-v1 format.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write `omega,abs_residual` samples here.
    #[arg(long)]
    pub residual_csv: Option<PathBuf>,
    /// Exit with status 4 when the residual is not flat.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Number of anticausal coefficients M in the primal search [default: 32].
    #[arg(long)]
    pub primal_coeffs: Option<usize>,
    /// Subgradient iterations K [default: 20000].
    #[arg(long)]
    pub iters: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FactorArgs {
    #[command(flatten)]
    pub common: Common,
    /// Grid size G [default: max(256, next_pow2(16 x width))].
    #[arg(long)]
    pub grid: Option<usize>,
    /// Write samples of the first factor as `omega,re,im`.
    #[arg(long)]
    pub p_csv: Option<PathBuf>,
    /// Write samples of the second factor as `omega,re,im`.
    #[arg(long)]
    pub q_csv: Option<PathBuf>,
}

/// Resolved parameters: built-in defaults under the config file under flags.
struct Resolved {
    order: Option<usize>,
    grid: Option<usize>,
    tol: f64,
    seed: u64,
    tail_tol: f64,
    primal_coeffs: usize,
    iters: usize,
}

fn resolve(common: &Common, flags: Overrides) -> Result<Resolved, CliError> {
    let file = config::load(common.config.as_deref())?;
    let flags = Overrides {
        seed: common.seed,
        tol: common.tol,
        tail_tol: common.tail_tol,
        ..flags
    };
    let o = flags.over(file);
    let r = Resolved {
        order: o.order,
        grid: o.grid,
        tol: o.tol.unwrap_or(config::DEFAULT_TOL),
        seed: o.seed.unwrap_or(config::DEFAULT_SEED),
        tail_tol: o.tail_tol.unwrap_or(config::DEFAULT_TAIL_TOL),
        primal_coeffs: o.primal_coeffs.unwrap_or(config::DEFAULT_PRIMAL_COEFFS),
        iters: o.iters.unwrap_or(config::DEFAULT_ITERS),
    };
    if !(r.tol > 0.0 && r.tail_tol > 0.0) {
        return Err(CliError::Input("tolerances must be positive".into()));
    }
    if r.order == Some(0) {
        return Err(CliError::Input("order must be at least 1".into()));
    }
    Ok(r)
}

impl Resolved {
    fn power(&self) -> PowerIteration<f64> {
        PowerIteration {
            tol: self.tol,
            ..PowerIteration::default()
        }
        .with_seed(self.seed)
    }

    fn params(&self, order: Option<usize>, grid: Option<usize>) -> Params {
        Params {
            order,
            grid,
            tol: self.tol,
            seed: self.seed,
            tail_tol: self.tail_tol,
            primal_coeffs: None,
            iters: None,
        }
    }

    fn solve_options(&self, g: &Series64) -> SolveOptions<f64> {
        let order = self.order.unwrap_or_else(|| default_order(g));
        SolveOptions {
            order,
            grid: self.grid.unwrap_or_else(|| default_grid_for_order(order)),
            power: self.power(),
            check_drift: true,
        }
    }
}

struct Loaded {
    spec: SymbolSpec<f64>,
    series: Series64,
    tail_bound: f64,
    info: InputInfo,
}

fn load_symbol(path: &Path, tail_tol: f64) -> Result<Loaded, CliError> {
    let bytes =
        std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| CliError::Input(format!("{}: not valid UTF-8", path.display())))?;
    let spec: SymbolSpec<f64> =
        parse_sym(text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let (series, tail_bound) = spec.to_series(tail_tol)?;
    let info = InputInfo {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
        name: spec.name.clone(),
        kind: match spec.body {
            SymbolBody::Laurent(_) => "laurent".into(),
            SymbolBody::Rational { .. } => "rational".into(),
        },
        n_lo: series.n_lo(),
        n_hi: series.n_hi(),
    };
    Ok(Loaded {
        spec,
        series,
        tail_bound,
        info,
    })
}

/// Timer that only records when enabled.
struct Clock {
    enabled: bool,
    last: Instant,
}

impl Clock {
    fn new(enabled: bool) -> Self {
        Self {
            enabled,
            last: Instant::now(),
        }
    }

    fn lap(&mut self, report: &mut Report, phase: &str) {
        if self.enabled {
            let now = Instant::now();
            report
                .timings
                .insert(format!("{phase}_ms"), (now - self.last).as_secs_f64() * 1e3);
            self.last = now;
        }
    }
}

fn flags_from(f: &SolutionFlags) -> Flags {
    Flags {
        non_simple_sigma: f.non_simple_sigma,
        rank_zero: f.rank_zero,
        non_flat: f.non_flat,
        not_converged: f.not_converged,
        drifting: f.drifting,
    }
}

fn solution_results(sol: &NehariSolution<f64>, tail_bound: f64) -> Results {
    Results {
        d: Some(sol.d),
        sigma2_estimate: Some(sol.sigma2_estimate),
        sigma_2n: sol.drift.map(|dr| sol.d + dr),
        drift: sol.drift,
        flatness_dev: Some(sol.flatness_dev),
        h2_leakage: Some(sol.h2_leakage),
        achieved_sup: Some(sol.achieved_sup),
        dual_pairing_re: Some(sol.dual_pairing.re),
        dual_pairing_im: Some(sol.dual_pairing.im),
        x_opt_l1: Some(sol.x_opt_l1),
        h1_0_leakage: Some(sol.h1_0_leakage),
        modulus_agreement: Some(sol.modulus_agreement),
        excluded_points: Some(sol.excluded_points),
        f_opt_terms: Some(sol.f_opt.iter().filter(|(_, c)| c.norm() > 0.0).count()),
        tail_bound: Some(tail_bound),
        flags: flags_from(&sol.flags),
        ..Results::default()
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: Iterator<Item = Vec<f64>>,
{
    let mut w = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
    w.write_record(header).map_err(|e| io_error(path, e))?;
    for row in rows {
        w.write_record(row.into_iter().map(fmt_f64))
            .map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

fn write_samples(path: &Path, f: &Grid64) -> Result<(), CliError> {
    write_csv(
        path,
        &["omega", "re", "im"],
        f.values()
            .iter()
            .enumerate()
            .map(|(k, c)| vec![f.angle(k), c.re, c.im]),
    )
}

/// Numeric non-convergence still prints the report, then exits with 3.
fn finish(report: Report, flags: &Flags) -> Result<Report, CliError> {
    if flags.not_converged {
        return Err(CliError::Check {
            code: 3,
            reason: "power iteration did not converge".into(),
            report: Box::new(report),
        });
    }
    Ok(report)
}

pub fn run(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Norm(a) => norm(a),
        Command::Approx(a) => approx(a),
        Command::Certify(a) => certify(a),
        Command::Factor(a) => factor(a),
    }
}

fn norm(a: &NormArgs) -> Result<Report, CliError> {
    let r = resolve(
        &a.common,
        Overrides {
            order: a.order,
            ..Overrides::default()
        },
    )?;
    let mut clock = Clock::new(a.common.timings);
    let loaded = load_symbol(&a.common.input, r.tail_tol)?;
    let g = &loaded.series;
    let order = r.order.unwrap_or_else(|| default_order(g));
    let power = r.power();
    let mut report = Report {
        command: "norm".into(),
        input: loaded.info.clone(),
        params: r.params(Some(order), None),
        ..Report::default()
    };
    clock.lap(&mut report, "load");
    let pair = top_singular(&Hankel64::build(g, order)?, &power)?;
    let big = hankel_norm(g, 2 * order, &power)?;
    clock.lap(&mut report, "compute");
    let drift = big.sigma - pair.sigma;
    report.results = Results {
        d: Some(pair.sigma),
        sigma2_estimate: Some(pair.sigma2_estimate),
        sigma_2n: Some(big.sigma),
        drift: Some(drift),
        iterations: Some(pair.iterations),
        tail_bound: Some(loaded.tail_bound),
        flags: Flags {
            non_simple_sigma: pair.non_simple,
            rank_zero: pair.rank_zero,
            not_converged: !(pair.converged && big.converged),
            drifting: drift.abs() > 1e-6 * big.sigma,
            non_flat: false,
        },
        ..Results::default()
    };
    let flags = report.results.flags;
    finish(report, &flags)
}

fn approx(a: &ApproxArgs) -> Result<Report, CliError> {
    let r = resolve(
        &a.common,
        Overrides {
            order: a.solve.order,
            grid: a.solve.grid,
            ..Overrides::default()
        },
    )?;
    let mut clock = Clock::new(a.common.timings);
    let loaded = load_symbol(&a.common.input, r.tail_tol)?;
    let g = &loaded.series;
    let opts = r.solve_options(g);
    let mut report = Report {
        command: "approx".into(),
        input: loaded.info.clone(),
        params: r.params(Some(opts.order), Some(opts.grid)),
        ..Report::default()
    };
    clock.lap(&mut report, "load");
    let sol = solve(g, &opts)?;
    clock.lap(&mut report, "compute");
    report.results = solution_results(&sol, loaded.tail_bound);

    if let Some(path) = &a.out {
        let mut spec = laurent_spec(
            &sol.f_opt,
            loaded
                .spec
                .name
                .as_ref()
                .map(|n| format!("{n} approximant")),
        );
        spec.comments = vec![format!("d = {}", fmt_f64(sol.d))];
        std::fs::write(path, render_sym(&spec)).map_err(|e| io_error(path, e))?;
    }
    if let Some(path) = &a.residual_csv {
        let res = &sol.residual;
        write_csv(
            path,
            &["omega", "abs_residual"],
            res.values()
                .iter()
                .enumerate()
                .map(|(k, c)| vec![res.angle(k), c.norm()]),
        )?;
    }
    clock.lap(&mut report, "write");
    if a.strict && sol.flags.non_flat {
        return Err(CliError::Check {
            code: 4,
            reason: format!(
                "residual is not flat (deviation {})",
                fmt_f64(sol.flatness_dev)
            ),
            report: Box::new(report),
        });
    }
    let flags = report.results.flags;
    finish(report, &flags)
}

fn certify(a: &CertifyArgs) -> Result<Report, CliError> {
    let r = resolve(
        &a.common,
        Overrides {
            order: a.solve.order,
            grid: a.solve.grid,
            primal_coeffs: a.primal_coeffs,
            iters: a.iters,
            ..Overrides::default()
        },
    )?;
    let mut clock = Clock::new(a.common.timings);
    let loaded = load_symbol(&a.common.input, r.tail_tol)?;
    let g = &loaded.series;
    let opts = r.solve_options(g);
    let mut params = r.params(Some(opts.order), Some(opts.grid));
    params.primal_coeffs = Some(r.primal_coeffs);
    params.iters = Some(r.iters);
    let mut report = Report {
        command: "certify".into(),
        input: loaded.info.clone(),
        params,
        ..Report::default()
    };
    clock.lap(&mut report, "load");
    let sol = solve(g, &opts)?;
    clock.lap(&mut report, "solve");
    let primal = primal_bruteforce(
        g,
        &PrimalOptions {
            coeffs: r.primal_coeffs,
            grid: opts.grid,
            iters: r.iters,
            step: StepSchedule::default(),
            seed: r.seed,
        },
    )?;
    clock.lap(&mut report, "primal");
    let weak = weak_duality_check(g, &primal.f, opts.order, opts.grid, &opts.power)?;
    let gap = primal.value - sol.d;
    report.results = Results {
        primal_value: Some(primal.value),
        gap: Some(gap),
        eps_grid: Some(weak.eps_grid),
        iterations: Some(primal.iterations),
        ..solution_results(&sol, loaded.tail_bound)
    };
    if gap < -weak.eps_grid {
        return Err(CliError::Check {
            code: 3,
            reason: format!("primal value below d: gap {}", fmt_f64(gap)),
            report: Box::new(report),
        });
    }
    let flags = report.results.flags;
    finish(report, &flags)
}

fn factor(a: &FactorArgs) -> Result<Report, CliError> {
    let r = resolve(
        &a.common,
        Overrides {
            grid: a.grid,
            ..Overrides::default()
        },
    )?;
    let mut clock = Clock::new(a.common.timings);
    let loaded = load_symbol(&a.common.input, r.tail_tol)?;
    let f = &loaded.series;
    let grid = r.grid.unwrap_or_else(|| default_factor_grid(f));
    let mut report = Report {
        command: "factor".into(),
        input: loaded.info.clone(),
        params: r.params(None, Some(grid)),
        ..Report::default()
    };
    clock.lap(&mut report, "load");
    let fac = riesz_factorize(f, grid)?;
    clock.lap(&mut report, "compute");
    if let Some(path) = &a.p_csv {
        write_samples(path, &fac.p)?;
    }
    if let Some(path) = &a.q_csv {
        write_samples(path, &fac.q)?;
    }
    clock.lap(&mut report, "write");
    report.results = Results {
        product_residual: Some(fac.product_residual),
        norm_residual: Some(fac.norm_residual),
        disk_zeros: Some(fac.parts.disk_zeros.len()),
        tail_bound: Some(loaded.tail_bound),
        ..Results::default()
    };
    Ok(report)
}
