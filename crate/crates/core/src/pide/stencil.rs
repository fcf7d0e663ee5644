//! Spatial discretisation of the generator on a capital grid.
//!
//! Diffusion uses the nonuniform three-point second difference, the
//! compensated drift is upwinded, and each jump measure is mapped onto the
//! grid by exact hat-function weights so that mass and first moment of every
//! landing interval are preserved.

use crate::error::{Error, Result};
use crate::levy::{LevyTriplet, ModelParams, PayoffSpec};

const PENALTY_PANELS: usize = 64;

/// Nonlocal row `j`: `Σ_k w_k ψ_k + ruin` approximates `∫ ψ(y) ν_j(dy)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct JumpRow {
    pub targets: Vec<(usize, f64)>,
    /// Intensity of jumps that land at `y <= 0`.
    pub ruin_mass: f64,
    /// Intensity-weighted penalty `∫_{y <= 0} w(-y) ν_j(dy)`; zero unless a penalty payoff is used.
    pub ruin_payoff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorStencil {
    /// Tridiagonal local operator; entries of the two boundary rows are zero.
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<JumpRow>,
    /// `λ_R + λ_P`; every interior row satisfies `Σ w + ruin_mass = intensity`.
    pub intensity: f64,
}

impl OperatorStencil {
    pub fn build(u: &[f64], params: &ModelParams) -> Result<OperatorStencil> {
        let n = u.len();
        let (vr, vp) = (params.r.variance_rate(), params.p.variance_rate());
        let (mr, mp) = (params.r.compensated_drift(), params.p.compensated_drift());
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut rows = vec![JumpRow::default(); n];
        let mut scratch = vec![0.0; n];
        for j in 1..n - 1 {
            let (hm, hp) = (u[j] - u[j - 1], u[j + 1] - u[j]);
            let d = 0.5 * (vr * u[j] * u[j] + vp);
            let b = mr * u[j] + mp;
            let lo = 2.0 * d / (hm * (hm + hp)) + (-b).max(0.0) / hm;
            let up = 2.0 * d / (hp * (hm + hp)) + b.max(0.0) / hp;
            if !(lo >= 0.0 && up >= 0.0) {
                return Err(Error::NonMonotone { row: j, lower: lo, upper: up });
            }
            lower[j] = lo;
            upper[j] = up;
            diag[j] = -(lo + up);

            let mut row = JumpRow::default();
            let mut touched = Vec::new();
            for (drv, beta) in [(&params.r, u[j]), (&params.p, 1.0)] {
                add_jumps(u, drv, u[j], beta, &params.payoff, &mut scratch, &mut touched, &mut row);
            }
            touched.sort_unstable();
            touched.dedup();
            row.targets = touched.iter().map(|&k| (k, std::mem::take(&mut scratch[k]))).collect();
            rows[j] = row;
        }
        Ok(OperatorStencil { lower, diag, upper, rows, intensity: params.total_intensity() })
    }

    pub fn nodes(&self) -> usize {
        self.diag.len()
    }

    /// `(L_loc ψ)_j` for an interior row.
    pub fn apply_local(&self, psi: &[f64], j: usize) -> f64 {
        self.lower[j] * psi[j - 1] + self.diag[j] * psi[j] + self.upper[j] * psi[j + 1]
    }

    /// `(L_jump ψ)_j`; `ruin_term` is the contribution of jumps landing at `y <= 0`.
    pub fn apply_nonlocal(&self, psi: &[f64], j: usize, ruin_term: f64) -> f64 {
        let row = &self.rows[j];
        let mut acc = ruin_term - self.intensity * psi[j];
        for &(k, w) in &row.targets {
            acc += w * psi[k];
        }
        acc
    }
}

/// Spatial operator of `params` on the capital nodes of `grid`.
pub fn build_stencil(grid: &crate::pide::Grid, params: &ModelParams) -> Result<OperatorStencil> {
    params.validate()?;
    OperatorStencil::build(grid.u_nodes(), params)
}

/// Jumps of `y = α + β z` under `drv`'s jump measure, distributed onto the grid.
#[allow(clippy::too_many_arguments)]
fn add_jumps(
    u: &[f64],
    drv: &LevyTriplet,
    alpha: f64,
    beta: f64,
    payoff: &PayoffSpec,
    scratch: &mut [f64],
    touched: &mut Vec<usize>,
    row: &mut JumpRow,
) {
    let Some(spec) = &drv.jumps else { return };
    if spec.intensity == 0.0 {
        return;
    }
    let lam = spec.intensity;
    let law = &spec.law;
    let n = u.len();
    let z_of = |y: f64| (y - alpha) / beta;
    let (zlo, zhi) = law.support();
    let (ylo, yhi) = (alpha + beta * zlo, alpha + beta * zhi);

    let z_ruin = z_of(0.0);
    let m_ruin = law.mass_in(f64::NEG_INFINITY, z_ruin);
    if m_ruin > 0.0 {
        row.ruin_mass += lam * m_ruin;
        if let PayoffSpec::DeficitPenalty { penalty } = payoff {
            row.ruin_payoff +=
                lam * law.expect_in(|z| penalty.eval(-(alpha + beta * z)), f64::NEG_INFINITY, z_ruin, PENALTY_PANELS);
        }
    }

    let u_max = u[n - 1];
    let m_top = law.mass_in(z_of(u_max), f64::INFINITY);
    if m_top > 0.0 {
        bump(scratch, touched, n - 1, lam * m_top);
    }

    if yhi <= 0.0 || ylo >= u_max {
        return;
    }
    // one spare interval on each side so atoms sitting on a node are caught
    let k0 = u.partition_point(|&x| x <= ylo.max(0.0)).saturating_sub(2);
    let k1 = (u.partition_point(|&x| x < yhi.min(u_max)) + 1).min(n - 1);
    for k in k0..k1 {
        let (a, b) = (z_of(u[k]), z_of(u[k + 1]));
        let m = law.mass_in(a, b);
        if m <= 0.0 {
            continue;
        }
        let first = law.moment_in(a, b);
        let dk = u[k + 1] - u[k];
        // ∫ (y - u_k) dΠ over the interval
        let offset = (alpha - u[k]) * m + beta * first;
        let w_hi = (offset / dk).clamp(0.0, m);
        let w_lo = m - w_hi;
        bump(scratch, touched, k, lam * w_lo);
        bump(scratch, touched, k + 1, lam * w_hi);
    }
}

fn bump(scratch: &mut [f64], touched: &mut Vec<usize>, k: usize, w: f64) {
    if w > 0.0 {
        scratch[k] += w;
        touched.push(k);
    }
}

/// Largest relative hat-weight mass defect over interior rows; used in tests and diagnostics.
pub fn mass_defect(stencil: &OperatorStencil) -> f64 {
    let n = stencil.nodes();
    (1..n - 1)
        .map(|j| {
            let row = &stencil.rows[j];
            let s: f64 = row.targets.iter().map(|t| t.1).sum::<f64>() + row.ruin_mass;
            (s - stencil.intensity).abs() / stencil.intensity.max(1.0)
        })
        .fold(0.0, f64::max)
}
