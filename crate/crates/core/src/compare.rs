//! Side-by-side PIDE and Monte Carlo values of `Ψ(0, u)`.

use crate::config::RunConfig;
use crate::error::Result;
use crate::mc::estimate_psi;
use crate::pide::{solve_ruin, SolutionField};

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub u: f64,
    pub psi_pide: f64,
    pub psi_mc: f64,
    pub se: f64,
    pub abs_diff: f64,
    /// `abs_diff <= 3 se + tolerance`.
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    pub tolerance: f64,
    pub field: SolutionField,
}

impl CompareReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

pub fn run_compare(cfg: &RunConfig) -> Result<CompareReport> {
    cfg.validate()?;
    let grid = cfg.grid.build(cfg.model.horizon)?;
    let field = solve_ruin(&grid, &cfg.model)?;
    let scheme = cfg.simulation.scheme();
    let tol = cfg.compare.tolerance;
    let rows = cfg
        .compare
        .u
        .iter()
        .map(|&u| {
            let est = estimate_psi(0.0, u, &cfg.model, cfg.simulation.paths, &scheme, cfg.simulation.seed)?;
            let psi_pide = field.interpolate(0.0, u);
            let abs_diff = (psi_pide - est.mean).abs();
            Ok(CompareRow {
                u,
                psi_pide,
                psi_mc: est.mean,
                se: est.std_error,
                abs_diff,
                pass: abs_diff <= 3.0 * est.std_error + tol,
            })
        })
        .collect::<Result<_>>()?;
    Ok(CompareReport { rows, tolerance: tol, field })
}
