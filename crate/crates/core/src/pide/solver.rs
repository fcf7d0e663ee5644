//! Backward IMEX time stepping: implicit local operator, explicit jump
//! operator with sub-steps sized so that `Δτ·(λ_R + λ_P) <= 1`.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::levy::ModelParams;

use super::field::{BoundaryData, RuinedValue, SolutionField};
use super::stencil::OperatorStencil;
use super::Grid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Upper bound on jump sub-steps per time interval.
    pub max_substeps: usize,
    /// Values outside `[-range_tol, 1 + range_tol]` abort the solve.
    pub range_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { max_substeps: 100_000, range_tol: 1e-10 }
    }
}

/// Solve `ψ_t + Lψ = 0` backward from `t = T` on `grid`.
pub fn solve_backward(grid: &Grid, params: &ModelParams, data: &BoundaryData) -> Result<SolutionField> {
    solve_backward_with(grid, params, data, &SolverOptions::default())
}

/// Ruin functional of `params.payoff` on `grid`.
pub fn solve_ruin(grid: &Grid, params: &ModelParams) -> Result<SolutionField> {
    solve_backward(grid, params, &BoundaryData::for_payoff(grid, &params.payoff))
}

pub fn solve_backward_with(
    grid: &Grid,
    params: &ModelParams,
    data: &BoundaryData,
    opts: &SolverOptions,
) -> Result<SolutionField> {
    params.validate()?;
    data.validate(grid)?;
    if (grid.horizon() - params.horizon).abs() > 1e-12 * params.horizon.max(1.0) {
        return Err(invalid("grid", format!("time grid ends at {}, horizon is {}", grid.horizon(), params.horizon)));
    }
    let (u, t) = (grid.u_nodes(), grid.t_nodes());
    let n = u.len();
    let m = t.len();
    let stencil = OperatorStencil::build(u, params)?;
    let ruined = RuinedValue::for_payoff(&params.payoff);
    let lam = stencil.intensity;

    let mut values = vec![0.0; n * m];
    let mut psi = data.terminal.clone();
    psi[0] = data.lower[m - 1];
    psi[n - 1] = data.upper[m - 1];
    values[(m - 1) * n..].copy_from_slice(&psi);

    let lower_at = |time: f64| {
        let i = grid.t_cell(time);
        let a = (time - t[i]) / (t[i + 1] - t[i]);
        ((1.0 - a) * data.lower[i] + a * data.lower[i + 1], (1.0 - a) * data.upper[i] + a * data.upper[i + 1])
    };

    let mut rhs = vec![0.0; n];
    let mut scratch = Tridiag::new(n);
    for i in (0..m - 1).rev() {
        let dt = t[i + 1] - t[i];
        let subs = ((dt * lam).ceil() as usize).max(1);
        if subs > opts.max_substeps {
            return Err(Error::Cfl { substeps: opts.max_substeps, intensity: lam });
        }
        let ds = dt / subs as f64;
        for s in 0..subs {
            let t_old = t[i + 1] - s as f64 * ds;
            let t_new = if s + 1 == subs { t[i] } else { t_old - ds };
            let (lo_old, _) = lower_at(t_old);
            let (lo_new, up_new) = if s + 1 == subs { (data.lower[i], data.upper[i]) } else { lower_at(t_new) };
            if lam > 0.0 {
                rhs[1..n - 1].par_iter_mut().enumerate().for_each(|(k, r)| {
                    let j = k + 1;
                    let ruin = match &ruined {
                        RuinedValue::Boundary => stencil.rows[j].ruin_mass * lo_old,
                        RuinedValue::Penalty(_) => stencil.rows[j].ruin_payoff,
                    };
                    *r = psi[j] + ds * stencil.apply_nonlocal(&psi, j, ruin);
                });
            } else {
                rhs[1..n - 1].copy_from_slice(&psi[1..n - 1]);
            }
            psi[0] = lo_new;
            psi[n - 1] = up_new;
            scratch.solve(&stencil, ds, &rhs, &mut psi)?;
        }
        for (j, v) in psi.iter().enumerate() {
            if !(*v >= -opts.range_tol && *v <= 1.0 + opts.range_tol) {
                return Err(Error::Range { t: t[i], u: u[j], value: *v });
            }
        }
        values[i * n..(i + 1) * n].copy_from_slice(&psi);
    }
    SolutionField::from_parts(grid.clone(), values, data.clone(), ruined)
}

struct Tridiag {
    c: Vec<f64>,
    d: Vec<f64>,
}

impl Tridiag {
    fn new(n: usize) -> Self {
        Tridiag { c: vec![0.0; n], d: vec![0.0; n] }
    }

    /// `(I - ds·L_loc) ψ = rhs` on interior nodes; `psi[0]` and `psi[N]` hold the boundary values.
    fn solve(&mut self, st: &OperatorStencil, ds: f64, rhs: &[f64], psi: &mut [f64]) -> Result<()> {
        let n = psi.len();
        let (c, d) = (&mut self.c, &mut self.d);
        for j in 1..n - 1 {
            let a = -ds * st.lower[j];
            let b = 1.0 - ds * st.diag[j];
            let cc = -ds * st.upper[j];
            let mut r = rhs[j];
            if j == 1 {
                r -= a * psi[0];
            }
            if j == n - 2 {
                r -= cc * psi[n - 1];
            }
            let (cp, dp) = if j == 1 { (0.0, 0.0) } else { (c[j - 1], d[j - 1]) };
            let a_eff = if j == 1 { 0.0 } else { a };
            let pivot = b - a_eff * cp;
            if !(pivot.abs() > 0.0) || !pivot.is_finite() {
                return Err(Error::LinearSolve { row: j, pivot });
            }
            c[j] = if j == n - 2 { 0.0 } else { cc / pivot };
            d[j] = (r - a_eff * dp) / pivot;
        }
        psi[n - 2] = d[n - 2];
        for j in (1..n - 2).rev() {
            psi[j] = d[j] - c[j] * psi[j + 1];
        }
        Ok(())
    }
}

/// Differences between successive refinements, measured at the coarse nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementLevel {
    pub nu: usize,
    pub nt: usize,
    /// Sup over all shared nodes of `|ψ_fine - ψ_coarse|`.
    pub sup_diff: f64,
    /// Same, restricted to the `t = 0` row.
    pub sup_diff_initial: f64,
    /// Sup over shared nodes with `t <= t_cut`.
    pub sup_diff_away: f64,
}

/// Solve on `base` and `levels` successive refinements; report level-to-level differences.
/// `t_cut` bounds the time region of `sup_diff_away`.
pub fn refine_and_compare(
    params: &ModelParams,
    base: &Grid,
    levels: usize,
    t_cut: f64,
) -> Result<Vec<RefinementLevel>> {
    if levels < 2 {
        return Err(invalid("levels", "need at least three grids, i.e. two refinements"));
    }
    let mut grid = base.clone();
    let mut coarse = solve_ruin(&grid, params)?;
    let mut out = Vec::with_capacity(levels);
    for _ in 0..levels {
        grid = grid.refined();
        let fine = solve_ruin(&grid, params)?;
        let g = coarse.grid();
        let (mut all, mut init, mut away) = (0.0f64, 0.0f64, 0.0f64);
        for (i, &t) in g.t_nodes().iter().enumerate() {
            for j in 0..g.u_nodes().len() {
                let d = (fine.value(2 * i, 2 * j) - coarse.value(i, j)).abs();
                all = all.max(d);
                if i == 0 {
                    init = init.max(d);
                }
                if t <= t_cut {
                    away = away.max(d);
                }
            }
        }
        out.push(RefinementLevel {
            nu: grid.nu(),
            nt: grid.nt(),
            sup_diff: all,
            sup_diff_initial: init,
            sup_diff_away: away,
        });
        coarse = fine;
    }
    Ok(out)
}

/// Whether the full-grid differences shrink from level to level.
pub fn differences_decrease(levels: &[RefinementLevel]) -> bool {
    levels.windows(2).all(|w| w[1].sup_diff < w[0].sup_diff)
}

/// `log2(e_k / e_{k+1})` for errors under successive halvings.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}
