//! Pointwise checks of the viscosity inequalities on a gridded field.
//!
//! At a node a candidate `(b, p, A)` is read off by a forward time difference
//! and central space differences, then accepted as a superjet (`P⁺`) or
//! subjet (`P⁻`) when the quadratic majorises (minorises) the field on the
//! cross-shaped neighbourhood `(±Δt, 0)`, `(0, ±1 node)`, `(0, ±2 nodes)` up
//! to `η(|δt| + δu²)`. The residual `b + Lf` uses a test function equal to the
//! quadratic near the base point and to the field further out.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::generator::{jump_generator, local_generator};
use crate::levy::ModelParams;
use crate::numeric::splitmix64;
use crate::pide::SolutionField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `P⁺`: the quadratic lies above the field.
    Super,
    /// `P⁻`: the quadratic lies below the field.
    Sub,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub t: f64,
    pub u: f64,
    /// Time slope.
    pub b: f64,
    /// Space slope.
    pub p: f64,
    /// Space curvature.
    pub a: f64,
    /// Grid indices of the base point.
    pub node: (usize, usize),
}

impl Jet {
    /// `Q(δt, δu) = b δt + p δu + ½ A δu²`.
    pub fn q(&self, dt: f64, du: f64) -> f64 {
        self.b * dt + self.p * du + 0.5 * self.a * du * du
    }
}

/// Candidate `(b, p, A)` at node `(i, j)` and the jet-fit tolerance `η` used for it.
pub fn candidate_jet(field: &SolutionField, i: usize, j: usize) -> Result<Jet> {
    let g = field.grid();
    if i + 1 >= g.t_nodes().len() || i == 0 || j < 2 || j + 2 >= g.u_nodes().len() {
        return Err(invalid("point", format!("node ({i}, {j}) lacks a full difference neighbourhood")));
    }
    let (t, u) = (g.t_nodes(), g.u_nodes());
    let (hm, hp) = (u[j] - u[j - 1], u[j + 1] - u[j]);
    let (vm, v0, vp) = (field.value(i, j - 1), field.value(i, j), field.value(i, j + 1));
    let b = (field.value(i + 1, j) - v0) / (t[i + 1] - t[i]);
    let p = (hm * hm * vp - hp * hp * vm + (hp * hp - hm * hm) * v0) / (hm * hp * (hm + hp));
    let a = 2.0 * (hm * vp - (hm + hp) * v0 + hp * vm) / (hm * hp * (hm + hp));
    Ok(Jet { t: t[i], u: u[j], b, p, a, node: (i, j) })
}

/// Default `η` at a jet: `10 (Δt + Δu)` from the local spacings.
pub fn default_eta(field: &SolutionField, jet: &Jet) -> f64 {
    let g = field.grid();
    let (i, j) = jet.node;
    let dt = g.t_nodes()[i + 1] - g.t_nodes()[i];
    let du = g.u_nodes()[j + 1] - g.u_nodes()[j - 1];
    10.0 * (dt + 0.5 * du)
}

/// Whether the candidate belongs to `P⁺` / `P⁻` on the discrete neighbourhood.
pub fn jet_fits(field: &SolutionField, jet: &Jet, side: Side, eta: f64) -> bool {
    let g = field.grid();
    let (i, j) = jet.node;
    let (t, u) = (g.t_nodes(), g.u_nodes());
    let v0 = field.value(i, j);
    let scale = 1e-12 * (1.0 + v0.abs());
    let mut offsets = vec![(i + 1, j), (i - 1, j)];
    offsets.extend([(i, j - 2), (i, j - 1), (i, j + 1), (i, j + 2)]);
    offsets.into_iter().all(|(k, l)| {
        let (dt, du) = (t[k] - t[i], u[l] - u[j]);
        let r = field.value(k, l) - v0 - jet.q(dt, du);
        let tol = eta * (dt.abs() + du * du) + scale;
        match side {
            Side::Super => r <= tol,
            Side::Sub => r >= -tol,
        }
    })
}

/// The jet at node `(i, j)` if it passes the `side` test; `eta = None` uses [`default_eta`].
pub fn fit_jet(field: &SolutionField, i: usize, j: usize, side: Side, eta: Option<f64>) -> Result<Option<Jet>> {
    let jet = candidate_jet(field, i, j)?;
    let eta = eta.unwrap_or_else(|| default_eta(field, &jet));
    Ok(jet_fits(field, &jet, side, eta).then_some(jet))
}

/// Radii of the smooth cut-off between the quadratic and the field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Glue {
    pub r: f64,
    pub r_outer: f64,
}

impl Glue {
    /// `r = 2 Δu` around the base node, `r' = 2 r`.
    pub fn around(field: &SolutionField, jet: &Jet) -> Glue {
        let u = field.grid().u_nodes();
        let j = jet.node.1;
        let du = (u[j + 1] - u[j]).max(u[j] - u[j - 1]);
        Glue { r: 2.0 * du, r_outer: 4.0 * du }
    }
}

fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
}

/// Test function at time `t_i`: `ψ(base) + Q` within `r`, the field beyond `r'`.
pub fn test_function(field: &SolutionField, jet: &Jet, glue: Glue, y: f64) -> f64 {
    let i = jet.node.0;
    if y <= 0.0 || y >= field.grid().u_max() {
        return field.interpolate_row(i, y);
    }
    let d = (y - jet.u).abs();
    let quad = field.value(i, jet.node.1) + jet.q(0.0, y - jet.u);
    if d <= glue.r {
        return quad;
    }
    let outer = field.interpolate_row(i, y);
    if d >= glue.r_outer {
        return outer;
    }
    let s = smoothstep((d - glue.r) / (glue.r_outer - glue.r));
    (1.0 - s) * quad + s * outer
}

/// `b + L f(base)`.
pub fn evaluate_operator_on_test(field: &SolutionField, jet: &Jet, params: &ModelParams, glue: Option<Glue>) -> f64 {
    let glue = glue.unwrap_or_else(|| Glue::around(field, jet));
    let local = local_generator(params, jet.u, jet.p, jet.a);
    let nonlocal = jump_generator(params, jet.u, |y| test_function(field, jet, glue, y), jet.p);
    jet.b + local + nonlocal
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub t_min: f64,
    pub t_max: f64,
    pub u_min: f64,
    pub u_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SampleSpec {
    /// `n` nodes drawn uniformly (with replacement) from interior nodes inside `region`.
    Random {
        n: usize,
        seed: u64,
        region: Region,
    },
    Nodes(Vec<(usize, usize)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    /// Residual tolerance constant: `tol = C (Δu_max + Δt)`.
    pub c: f64,
    /// Fixed residual tolerance; overrides `c` when set.
    pub tol: Option<f64>,
    /// Jet-fit tolerance; `None` uses [`default_eta`] per point.
    pub eta: Option<f64>,
    pub glue: Option<Glue>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { c: 1.0, tol: None, eta: None, glue: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCheck {
    pub node: (usize, usize),
    pub t: f64,
    pub u: f64,
    pub residual: f64,
    pub superjet: bool,
    pub subjet: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub points: Vec<PointCheck>,
    pub tol: f64,
    pub c: f64,
    pub passed: usize,
    pub failed: usize,
    /// Points where neither jet fits; not counted as passed.
    pub empty_jet: usize,
    /// Smallest residual among superjet checks, with its location.
    pub worst_sub: Option<(f64, f64, f64)>,
    /// Largest residual among subjet checks, with its location.
    pub worst_super: Option<(f64, f64, f64)>,
}

impl VerifyReport {
    pub fn tested(&self) -> usize {
        self.points.len()
    }

    pub fn pass_fraction(&self) -> f64 {
        if self.points.is_empty() {
            return 1.0;
        }
        self.passed as f64 / self.points.len() as f64
    }

    pub fn worst_abs_residual(&self) -> f64 {
        self.points.iter().filter(|p| p.superjet || p.subjet).map(|p| p.residual.abs()).fold(0.0, f64::max)
    }
}

/// Sample nodes and check `b + Lf >= -tol` for superjets and `<= tol` for subjets.
pub fn verify_field(
    field: &SolutionField,
    params: &ModelParams,
    spec: &SampleSpec,
    opts: &VerifyOptions,
) -> Result<VerifyReport> {
    let g = field.grid();
    let nodes = match spec {
        SampleSpec::Nodes(v) => v.clone(),
        SampleSpec::Random { n, seed, region } => sample_nodes(field, *n, *seed, region)?,
    };
    let tol = opts.tol.unwrap_or(opts.c * (g.max_du() + g.max_dt()));
    let points: Vec<PointCheck> = nodes
        .par_iter()
        .map(|&(i, j)| {
            let jet = candidate_jet(field, i, j)?;
            let eta = opts.eta.unwrap_or_else(|| default_eta(field, &jet));
            let superjet = jet_fits(field, &jet, Side::Super, eta);
            let subjet = jet_fits(field, &jet, Side::Sub, eta);
            let residual = evaluate_operator_on_test(field, &jet, params, opts.glue);
            let pass = (superjet || subjet) && (!superjet || residual >= -tol) && (!subjet || residual <= tol);
            Ok(PointCheck { node: (i, j), t: jet.t, u: jet.u, residual, superjet, subjet, pass })
        })
        .collect::<Result<_>>()?;
    let passed = points.iter().filter(|p| p.pass).count();
    let empty_jet = points.iter().filter(|p| !p.superjet && !p.subjet).count();
    let worst_sub = points
        .iter()
        .filter(|p| p.superjet)
        .min_by(|a, b| a.residual.total_cmp(&b.residual))
        .map(|p| (p.residual, p.t, p.u));
    let worst_super = points
        .iter()
        .filter(|p| p.subjet)
        .max_by(|a, b| a.residual.total_cmp(&b.residual))
        .map(|p| (p.residual, p.t, p.u));
    Ok(VerifyReport {
        failed: points.len() - passed - empty_jet,
        passed,
        empty_jet,
        tol,
        c: opts.c,
        worst_sub,
        worst_super,
        points,
    })
}

/// Interior nodes of `region` that have a full neighbourhood, drawn with replacement.
pub fn sample_nodes(field: &SolutionField, n: usize, seed: u64, region: &Region) -> Result<Vec<(usize, usize)>> {
    let g = field.grid();
    let (t, u) = (g.t_nodes(), g.u_nodes());
    let is: Vec<usize> =
        (1..t.len() - 1).filter(|&i| t[i] > 0.0 && t[i] >= region.t_min && t[i] <= region.t_max).collect();
    let js: Vec<usize> = (2..u.len() - 2).filter(|&j| u[j] >= region.u_min && u[j] <= region.u_max).collect();
    if is.is_empty() || js.is_empty() {
        return Err(invalid("region", "contains no interior node with a full neighbourhood"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ 0x5E_ED0F_7E57));
    Ok((0..n).map(|_| (is[rng.random_range(0..is.len())], js[rng.random_range(0..js.len())])).collect())
}
