use anyhow::{Context, Result};
use dirac_hardy::extension::{diagnostics_with_form, log_cutoffs, roundtrip_residual, solve_with_form, symmetry_with_form};
use dirac_hardy::hardy::{estimate_cv_with, verify_hardy_with};
use dirac_hardy::probe::ProfileSampler;
use dirac_hardy::spectrum::{find_eigenvalue_with, EigenSearch};
use dirac_hardy::{analytic_oracle, lowest_eigenpairs, Error, Form, Grid, OriginClosure, Potential, Spectrum, Verdict};
use rayon::prelude::*;

use crate::config::{Axis, Command, ExperimentConfig, PotentialKind};
use crate::output::{num, opt_num, Table};

/// How a run ended, apart from errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    /// Verdict fails, no eigenvalue, or residual above tolerance.
    Negative,
}

pub struct RunReport {
    pub table: Table,
    pub status: Status,
    pub summary: Vec<(String, String)>,
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    potential: Potential,
    grid: Grid,
    closure: OriginClosure,
}

impl<'a> Ctx<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Result<Self> {
        let potential = cfg.potential.build().context("potential")?;
        let grid = grid_with(cfg, cfg.grid.n)?;
        potential.check_on(&grid).context("potential on grid")?;
        Ok(Self {
            cfg,
            potential,
            grid,
            closure: cfg.grid.closure.into(),
        })
    }

    fn search(&self) -> EigenSearch<f64> {
        EigenSearch {
            tol_gamma: self.cfg.tolerances.gamma,
            tol_mu: self.cfg.tolerances.mu,
            window: self.cfg.window.map(|[lo, hi]| (lo, hi)),
            closure: self.closure,
        }
    }
}

fn grid_with(cfg: &ExperimentConfig, n: usize) -> Result<Grid> {
    let g = &cfg.grid;
    Grid::new(g.r_min, g.r_max, n, g.scheme.into()).context("grid")
}

fn oracle(cfg: &ExperimentConfig, nu: f64) -> Option<f64> {
    if cfg.potential.kind != PotentialKind::Coulomb {
        return None;
    }
    analytic_oracle(nu, cfg.kappa, cfg.k).ok()
}

fn rel_err(e: f64, exact: Option<f64>) -> Option<f64> {
    exact.map(|x| ((e - x) / x).abs())
}

pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<RunReport> {
    let ctx = Ctx::new(cfg)?;
    match command {
        Command::VerifyHardy => verify(&ctx),
        Command::EstimateC => estimate(&ctx),
        Command::SolveEigen => solve(&ctx),
        Command::ResolventCheck => resolvent(&ctx),
        Command::DomainDiagnostics => diagnostics(&ctx),
        Command::Sweep => sweep(&ctx),
    }
}

fn verify(ctx: &Ctx) -> Result<RunReport> {
    let c = ctx.cfg.c.expect("validated");
    let tol = ctx.cfg.tolerances.hardy;
    let r = verify_hardy_with(&ctx.potential, c, &ctx.cfg.channels, &ctx.grid, tol, ctx.closure)?;
    let mut table = Table::new(&["kappa", "c", "gamma", "mu1", "verdict"]);
    for (&kappa, &mu1) in r.channels.iter().zip(&r.mu1_per_channel) {
        table.push(vec![
            kappa.to_string(),
            num(c),
            num(1.0 + c),
            num(mu1),
            Verdict::classify(mu1, tol).to_string(),
        ]);
    }
    let status = if r.verdict == Verdict::Fails {
        Status::Negative
    } else {
        Status::Success
    };
    Ok(RunReport {
        table,
        status,
        summary: vec![
            ("verdict".into(), r.verdict.to_string()),
            ("min_mu1".into(), num(r.min_mu1())),
            ("binding_kappa".into(), r.binding_channel().to_string()),
        ],
    })
}

fn estimate(ctx: &Ctx) -> Result<RunReport> {
    let tol = ctx.cfg.tolerances.estimate;
    let est = estimate_cv_with(&ctx.potential, &ctx.cfg.channels, &ctx.grid, tol, ctx.closure)?;
    let mut table = Table::new(&["c_est", "c_fail", "capped", "c_reference"]);
    table.push(vec![
        num(est.c),
        num(est.c_fail),
        est.capped.to_string(),
        opt_num(ctx.potential.cv_hint()),
    ]);
    Ok(RunReport {
        table,
        status: Status::Success,
        summary: vec![("c_est".into(), num(est.c))],
    })
}

const EIGEN_COLUMNS: [&str; 11] = [
    "nu", "kappa", "k", "N", "E", "E_oracle", "rel_err", "gamma_lo", "gamma_hi", "mu_at_root", "flag",
];

fn eigen_row(cfg: &ExperimentConfig, nu: f64, n: usize, solved: &std::result::Result<Spectrum, Error>) -> Vec<String> {
    let exact = oracle(cfg, nu);
    let head = vec![nu.to_string(), cfg.kappa.to_string(), cfg.k.to_string(), n.to_string()];
    let tail = match solved {
        Ok(r) => vec![
            num(r.e),
            opt_num(exact),
            opt_num(rel_err(r.e, exact)),
            num(r.bracket.0),
            num(r.bracket.1),
            num(r.mu_at_root),
            r.flag.to_string(),
        ],
        Err(_) => vec![
            String::new(),
            opt_num(exact),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            "no-eigenvalue".into(),
        ],
    };
    head.into_iter().chain(tail).collect()
}

/// Solve, keeping "no eigenvalue" as a result rather than an error.
fn solve_point(potential: &Potential, grid: &Grid, ctx: &Ctx) -> Result<std::result::Result<Spectrum, Error>> {
    match find_eigenvalue_with(potential, ctx.cfg.kappa, ctx.cfg.k, grid, &ctx.search()) {
        Ok(r) => Ok(Ok(r)),
        Err(e @ Error::NoEigenvalue { .. }) => Ok(Err(e)),
        Err(e) => Err(e.into()),
    }
}

fn solve(ctx: &Ctx) -> Result<RunReport> {
    let solved = solve_point(&ctx.potential, &ctx.grid, ctx)?;
    let mut table = Table::new(&EIGEN_COLUMNS);
    table.push(eigen_row(ctx.cfg, ctx.cfg.potential.nu, ctx.grid.len(), &solved));
    let (status, summary) = match &solved {
        Ok(r) => (Status::Success, vec![("E".into(), num(r.e)), ("flag".into(), r.flag.to_string())]),
        Err(e) => (Status::Negative, vec![("outcome".into(), e.to_string())]),
    };
    Ok(RunReport { table, status, summary })
}

fn resolvent(ctx: &Ctx) -> Result<RunReport> {
    let gamma = ctx.cfg.gamma.expect("validated");
    let form = Form::assemble(&ctx.potential, gamma, ctx.cfg.kappa, &ctx.grid, ctx.closure)?;
    let mut sampler = ProfileSampler::new(ctx.cfg.seed);
    let mut solutions = Vec::with_capacity(ctx.cfg.samples);
    let mut residuals = Vec::with_capacity(ctx.cfg.samples);
    for _ in 0..ctx.cfg.samples {
        let f1 = sampler.node_profile(&ctx.grid);
        let f2 = sampler.cell_profile(&ctx.grid);
        let p = solve_with_form(&f1, &f2, &form)?;
        residuals.push(roundtrip_residual(&p, &f1, &f2, &form));
        solutions.push(p);
    }
    let mut table = Table::new(&["sample", "gamma", "residual", "symmetry_defect"]);
    let mut worst_defect: f64 = 0.0;
    for (i, p) in solutions.iter().enumerate() {
        let q = &solutions[(i + 1) % solutions.len()];
        let defect = symmetry_with_form(p, q, &form).defect;
        worst_defect = worst_defect.max(defect);
        table.push(vec![i.to_string(), num(gamma), num(residuals[i]), num(defect)]);
    }
    let zero = solve_with_form(&vec![0.0; ctx.grid.len()], &vec![0.0; ctx.grid.cells()], &form)?;
    let zero_ok = zero.phi().iter().chain(zero.chi()).all(|&x| x == 0.0);
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    let status = if worst <= ctx.cfg.tolerances.residual && zero_ok {
        Status::Success
    } else {
        Status::Negative
    };
    Ok(RunReport {
        table,
        status,
        summary: vec![
            ("max_residual".into(), num(worst)),
            ("max_symmetry_defect".into(), num(worst_defect)),
            ("zero_maps_to_zero".into(), zero_ok.to_string()),
        ],
    })
}

fn diagnostics(ctx: &Ctx) -> Result<RunReport> {
    let state = find_eigenvalue_with(&ctx.potential, ctx.cfg.kappa, ctx.cfg.k, &ctx.grid, &ctx.search())
        .context("eigenstate for diagnostics")?;
    let gamma = ctx.cfg.gamma.unwrap_or(state.gamma_star);
    let form = Form::assemble(&ctx.potential, gamma, ctx.cfg.kappa, &ctx.grid, ctx.closure)?;
    let p = state.spinor(&ctx.grid)?;
    let cutoffs = log_cutoffs(0.1, ctx.grid.r_min(), ctx.cfg.cutoffs_per_decade);
    let d = diagnostics_with_form(&p, &ctx.potential, &form, &cutoffs);

    let mut table = Table::new(&["r_cut", "truncated_integral"]);
    for &(r, v) in &d.r_inv_truncated {
        table.push(vec![num(r), num(v)]);
    }
    let mut summary = vec![
        ("E".to_string(), num(state.e)),
        ("gamma".into(), num(gamma)),
        ("b_gamma".into(), num(d.b_gamma_value)),
        ("r_inv_integral".into(), num(d.r_inv_integral)),
        ("r_inv_diverges".into(), d.r_inv_diverges.to_string()),
        ("schur_defect".into(), num(d.schur_defect)),
        ("residual_upper".into(), num(d.residual_norms[0])),
        ("residual_lower".into(), num(d.residual_norms[1])),
    ];
    if let Some(s) = d.log_slope {
        summary.push(("log_slope_last_decade".into(), num(s.last_decade)));
        summary.push(("log_slope_previous_decade".into(), num(s.previous_decade)));
        summary.push(("log_slope_drift".into(), num(s.drift())));
    }
    if let Some(c) = d.chain {
        summary.push(("chain_lhs".into(), num(c.lhs)));
        summary.push(("chain_rhs".into(), num(c.rhs)));
        summary.push(("chain_holds".into(), c.holds.to_string()));
    }
    Ok(RunReport {
        table,
        status: Status::Success,
        summary,
    })
}

fn sweep(ctx: &Ctx) -> Result<RunReport> {
    let spec = ctx.cfg.sweep.as_ref().expect("validated");
    let mut values = spec.values.clone();
    values.sort_by(f64::total_cmp);

    let (table, summary) = match spec.axis {
        Axis::N => sweep_mesh(ctx, &values)?,
        Axis::Nu => sweep_coupling(ctx, &values)?,
        Axis::Gamma => sweep_shift(ctx, &values)?,
        Axis::C => sweep_c(ctx, &values)?,
    };
    Ok(RunReport {
        table,
        status: Status::Success,
        summary,
    })
}

type Swept = (Table, Vec<(String, String)>);

fn sweep_mesh(ctx: &Ctx, values: &[f64]) -> Result<Swept> {
    let nu = ctx.cfg.potential.nu;
    let results: Vec<(usize, std::result::Result<Spectrum, Error>)> = values
        .par_iter()
        .map(|&v| {
            let n = v as usize;
            let grid = grid_with(ctx.cfg, n)?;
            Ok((n, solve_point(&ctx.potential, &grid, ctx)?))
        })
        .collect::<Result<_>>()?;

    let exact = oracle(ctx.cfg, nu);
    let mut table = Table::new(&["N", "E", "E_oracle", "rel_err", "ratio", "flag"]);
    let mut previous: Option<f64> = None;
    for (n, solved) in &results {
        let (e, err, flag) = match solved {
            Ok(r) => (Some(r.e), rel_err(r.e, exact), r.flag.to_string()),
            Err(_) => (None, None, "no-eigenvalue".to_string()),
        };
        let ratio = match (previous, err) {
            (Some(p), Some(e)) if e > 0.0 => Some(p / e),
            _ => None,
        };
        previous = err;
        table.push(vec![n.to_string(), opt_num(e), opt_num(exact), opt_num(err), opt_num(ratio), flag]);
    }
    Ok((table, vec![("axis".into(), "N".into())]))
}

fn sweep_coupling(ctx: &Ctx, values: &[f64]) -> Result<Swept> {
    let results: Vec<std::result::Result<Spectrum, Error>> = values
        .par_iter()
        .map(|&nu| {
            let potential = ctx.cfg.potential.build_with_nu(nu)?;
            solve_point(&potential, &ctx.grid, ctx)
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(&EIGEN_COLUMNS);
    for (&nu, solved) in values.iter().zip(&results) {
        table.push(eigen_row(ctx.cfg, nu, ctx.grid.len(), solved));
    }
    Ok((table, vec![("axis".into(), "nu".into())]))
}

fn sweep_shift(ctx: &Ctx, values: &[f64]) -> Result<Swept> {
    let rows: Vec<(f64, f64)> = values
        .par_iter()
        .map(|&gamma| {
            let form = Form::assemble(&ctx.potential, gamma, ctx.cfg.kappa, &ctx.grid, ctx.closure)?;
            let pair = lowest_eigenpairs(&form, 1)?.remove(0);
            Ok((pair.value, form.gamma_derivative(&pair.vector)))
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(&["gamma", "kappa", "mu1", "dmu1_dgamma"]);
    for (&gamma, &(mu, d)) in values.iter().zip(&rows) {
        table.push(vec![num(gamma), ctx.cfg.kappa.to_string(), num(mu), num(d)]);
    }
    let decreasing = rows.windows(2).all(|w| w[0].0 > w[1].0);
    Ok((
        table,
        vec![("axis".into(), "gamma".into()), ("mu1_strictly_decreasing".into(), decreasing.to_string())],
    ))
}

fn sweep_c(ctx: &Ctx, values: &[f64]) -> Result<Swept> {
    let tol = ctx.cfg.tolerances.hardy;
    let reports = values
        .par_iter()
        .map(|&c| Ok(verify_hardy_with(&ctx.potential, c, &ctx.cfg.channels, &ctx.grid, tol, ctx.closure)?))
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&["c", "min_mu1", "binding_kappa", "verdict"]);
    for (&c, r) in values.iter().zip(&reports) {
        table.push(vec![num(c), num(r.min_mu1()), r.binding_channel().to_string(), r.verdict.to_string()]);
    }
    Ok((table, vec![("axis".into(), "c".into())]))
}
