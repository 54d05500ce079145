//! Subcommand implementations.

use crate::config::ExperimentConfig;
use crate::csv::{fmt, Table};
use crate::{AppError, ConfigArgs};
use hilfer_core::adjoint::solve_adjoint as core_solve_adjoint;
use hilfer_core::controllability::{
    assemble_control_map, assemble_observation_map, controllability_report, duality_residual,
    ucp_smallest_singular_value, ControlTemplate, UCP_FLOOR,
};
use hilfer_core::forward::{memory_state, solve_forward as core_solve_forward, MemoryState};
use hilfer_core::fracops::{
    convolution_commute_residual, frac_integral_left, ibp_residual, ipf_residual, GridFunction,
};
use hilfer_core::mlf::mlf;
use hilfer_core::{AdjointProblem, Field, ForwardProblem, TimeGrid};
use std::path::{Path, PathBuf};

/// Deterministic xorshift64* probe generator in [-1, 1).
struct Rng(u64);

impl Rng {
    fn new(seed: u64) -> Self {
        Rng(seed.max(1))
    }
    fn next(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        let x = self.0.wrapping_mul(0x2545F4914F6CDD1D);
        (x >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }
    fn vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next()).collect()
    }
}

pub fn with_config(
    args: &ConfigArgs,
    f: fn(&ExperimentConfig, Option<&Path>) -> Result<(), AppError>,
) -> Result<(), AppError> {
    let text = std::fs::read_to_string(&args.config)?;
    let cfg = ExperimentConfig::parse(&text)?;
    if let Some(threads) = args.threads.or(cfg.threads) {
        // ignore the error if a global pool already exists (tests call twice)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let out_cfg: Option<PathBuf> = cfg.run.out.as_ref().map(PathBuf::from);
    let out = args.out.as_deref().or(out_cfg.as_deref());
    f(&cfg, out)
}

pub fn mlf_table(
    alpha: f64,
    beta: f64,
    zmin: f64,
    zmax: f64,
    steps: usize,
    out: Option<&Path>,
) -> Result<(), AppError> {
    if steps == 0 {
        return Err(AppError::Validation("steps: need at least 1".into()));
    }
    let mut table = Table::new(vec!["z", "value"]);
    for i in 0..=steps {
        let z = zmin + (zmax - zmin) * i as f64 / steps as f64;
        let v = mlf(alpha, beta, z)?;
        table.push(vec![fmt(z), fmt(v)]);
    }
    table.emit(out)?;
    println!("mlf-table: alpha={alpha} beta={beta} rows={}", steps + 1);
    Ok(())
}

fn modal_table(sol: &hilfer_core::ModalField, prefix: &str) -> Table {
    let n = sol.n_modes();
    let mut header = vec!["t".to_string()];
    header.extend((0..n).map(|k| format!("{prefix}{k}")));
    let mut table = Table::new(header);
    for (j, &t) in sol.grid.nodes().iter().enumerate() {
        let mut row = vec![fmt(t)];
        row.extend((0..n).map(|k| fmt(sol.value(k, j))));
        table.push(row);
    }
    table
}

pub fn solve_forward(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<(), AppError> {
    let basis = cfg.basis()?;
    let n = basis.n_modes();
    let (u0, u1) = cfg.forward_data(n);
    let grid = cfg.grid()?;
    let control = match &cfg.control {
        Some(_) => Some(cfg.control_field(grid.horizon())?),
        None => None,
    };
    let problem = ForwardProblem {
        order: cfg.order()?,
        basis,
        grid,
        u0,
        u1,
        control,
        gamma_choice: cfg.gamma_choice()?,
        p: cfg.run.p.unwrap_or(1e6),
    };
    problem.validate()?;
    let sol = core_solve_forward(&problem)?;
    let ms = memory_state(&problem, &sol)?;
    modal_table(&sol, "u").emit(out)?;
    println!(
        "solve-forward: modes={} nodes={} |mem|={:.3e} |mem_rate|={:.3e}",
        sol.n_modes(),
        sol.grid.len(),
        norm(&ms.mem),
        norm(&ms.mem_rate),
    );
    Ok(())
}

fn norm(f: &Field) -> f64 {
    f.coefficients.iter().map(|c| c * c).sum::<f64>().sqrt()
}

pub fn solve_adjoint(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<(), AppError> {
    let basis = cfg.basis()?;
    let n = basis.n_modes();
    let (v0, v1) = cfg.adjoint_data(n);
    let problem = AdjointProblem {
        order: cfg.order()?,
        basis,
        grid: cfg.grid()?,
        v0,
        v1,
    };
    problem.validate()?;
    let sol = core_solve_adjoint(&problem)?;
    modal_table(&sol, "v").emit(out)?;
    println!(
        "solve-adjoint: modes={} nodes={} singular_final={}",
        sol.n_modes(),
        sol.grid.len(),
        sol.singular_node.is_some(),
    );
    Ok(())
}

pub fn verify_duality(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<(), AppError> {
    let order = cfg.order()?;
    let basis = cfg.basis()?;
    let n = basis.n_modes();
    let horizon = cfg.grid()?.horizon();
    let mut rng = Rng::new(cfg.run.seed.unwrap_or(7));
    let mut f = cfg.control_field(horizon)?;
    if cfg.control.as_ref().and_then(|c| c.coefficients.as_ref()).is_none() {
        f.coefficients = rng.vec(f.coefficients.len());
    }
    let v0 = match &cfg.data.v0 {
        Some(_) => cfg.adjoint_data(n).0,
        None => Field::new(rng.vec(n)),
    };
    let v1 = match &cfg.data.v1 {
        Some(_) => cfg.adjoint_data(n).1,
        None => Field::new(rng.vec(n)),
    };
    let mut table = Table::new(vec!["cells", "residual"]);
    let mut last = f64::NAN;
    for cells in cfg.ladder() {
        let grid = cfg.grid_with(cells)?;
        last = duality_residual(order, &basis, &grid, &f, &v0, &v1)?;
        table.push(vec![cells.to_string(), fmt(last)]);
    }
    table.emit(out)?;
    println!("verify-duality: finest residual {last:.3e}");
    Ok(())
}

pub fn verify_identities(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<(), AppError> {
    let order = cfg.order()?;
    let horizon = cfg.grid.as_ref().map(|g| g.horizon).unwrap_or(1.0);
    let mut table = Table::new(vec!["identity", "cells", "residual"]);
    for cells in cfg.ladder() {
        let grid = TimeGrid::uniform(horizon, cells)?;
        let t1 = horizon;

        // power law: I^0.6 t^2 against the Gamma-ratio closed form
        let alpha = 0.6;
        let c = gamma_fn(3.0) / gamma_fn(3.0 + alpha);
        let g = GridFunction::sample(grid.clone(), |t| t * t);
        let iv = frac_integral_left(alpha, &g)?;
        let e = iv
            .grid
            .nodes()
            .iter()
            .zip(&iv.values)
            .map(|(&t, &v)| (v - c * t.powf(2.0 + alpha)).abs())
            .fold(0.0, f64::max);
        table.push(vec!["power-law".into(), cells.to_string(), fmt(e)]);

        // semigroup I^a I^b = I^{a+b}
        let f = GridFunction::sample(grid.clone(), |t| t * t + (2.0 * t / t1).sin());
        let lhs = frac_integral_left(0.4, &frac_integral_left(0.7, &f)?)?;
        let rhs = frac_integral_left(1.1, &f)?;
        let e = lhs
            .values
            .iter()
            .zip(&rhs.values)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        table.push(vec!["semigroup".into(), cells.to_string(), fmt(e)]);

        // convolution commutation
        let f = GridFunction::sample(grid.clone(), |t| (2.0 * t / t1).sin() + 0.3);
        let g = GridFunction::sample(grid.clone(), |t| t * t - 0.5 * t + 0.1);
        let e = convolution_commute_residual(0.7, &f, &g)?;
        table.push(vec!["con-int".into(), cells.to_string(), fmt(e)]);

        // integration by parts (IPF)
        let s = |t: f64| t / t1;
        let phi = GridFunction::sample(grid.clone(), |t| {
            (1.0 - s(t)) * (1.0 - s(t)) * (1.0 + 0.3 * s(t).cos())
        });
        let psi = GridFunction::sample(grid.clone(), |t| s(t) * s(t) * (1.0 + 0.2 * s(t).sin()));
        let e = ipf_residual(0.5, &phi, &psi)?;
        table.push(vec!["ipf".into(), cells.to_string(), fmt(e)]);

        // full Hilfer integration by parts (IP01)
        let u = GridFunction::sample(grid.clone(), |t| {
            s(t).powi(3) * (1.0 + 0.2 * (1.5 * s(t)).sin())
        });
        let v = GridFunction::sample(grid.clone(), |t| {
            (1.0 - s(t)).powi(3) * (1.0 + 0.1 * s(t).cos())
        });
        let e = ibp_residual(order, &u, &v)?;
        table.push(vec!["ip01".into(), cells.to_string(), fmt(e)]);
    }
    table.emit(out)?;
    println!("verify-identities: ladder {:?}", cfg.ladder());
    Ok(())
}

// statrs is not a cli dependency; use the core crate's reciprocal gamma
fn gamma_fn(x: f64) -> f64 {
    1.0 / hilfer_core::mlf::recip_gamma(x)
}

fn template_from(cfg: &ExperimentConfig) -> Result<ControlTemplate, AppError> {
    let c = cfg
        .control
        .as_ref()
        .ok_or_else(|| AppError::Validation("config block `control` is required".into()))?;
    Ok(ControlTemplate {
        order: cfg.order()?,
        basis: cfg.basis()?,
        grid: cfg.grid()?,
        omega: cfg.omega()?,
        space_grid: cfg.space_grid()?,
        j_cells: c.j_cells,
        m_ctrl: c.m_ctrl,
        gamma_choice: cfg.gamma_choice()?,
    })
}

pub fn ucp_svd(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<(), AppError> {
    let template = template_from(cfg)?;
    let om = assemble_observation_map(&template)?;
    let report = ucp_smallest_singular_value(&om)?;
    let mut table = Table::new(vec!["quantity", "value"]);
    table.push(vec!["sigma_min".into(), fmt(report.sigma_min)]);
    if let Some(kernel) = &report.kernel {
        for (i, k) in kernel.iter().enumerate() {
            table.push(vec![format!("kernel_{i}"), fmt(*k)]);
        }
    }
    table.emit(out)?;
    if report.sigma_min > UCP_FLOOR {
        println!("ucp-svd: sigma_min {:.3e} (injective at this truncation)", report.sigma_min);
    } else {
        println!("ucp-svd: sigma_min below floor; kernel vector reported");
    }
    Ok(())
}

pub fn control(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<(), AppError> {
    let template = template_from(cfg)?;
    let n = template.basis.n_modes();
    let targets: Vec<(String, MemoryState)> = cfg
        .run
        .targets
        .as_ref()
        .ok_or_else(|| AppError::Validation("run.targets is required for `control`".into()))?
        .iter()
        .map(|t| {
            let mut mem = t.mem.clone();
            let mut rate = t.mem_rate.clone();
            mem.resize(n, 0.0);
            rate.resize(n, 0.0);
            (
                t.id.clone(),
                MemoryState {
                    mem: Field::new(mem),
                    mem_rate: Field::new(rate),
                },
            )
        })
        .collect();
    let cm = assemble_control_map(&template)?;
    let rows = controllability_report(&cm, &targets, &cfg.eps_path())?;
    let mut table = Table::new(vec!["target_id", "eps", "residual", "control_norm", "cg_iters"]);
    for r in &rows {
        table.push(vec![
            r.target_id.clone(),
            fmt(r.eps),
            fmt(r.residual),
            fmt(r.control_norm),
            r.cg_iters.to_string(),
        ]);
    }
    table.emit(out)?;
    let best = rows.iter().map(|r| r.residual).fold(f64::INFINITY, f64::min);
    println!("control: {} rows, best residual {best:.3e}", rows.len());
    Ok(())
}
