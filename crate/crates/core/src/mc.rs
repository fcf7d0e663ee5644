//! Monte Carlo estimation of `Ψ(t,u) = E V(X_τ) 1{τ < T}` and the stopped-process
//! identity `Ψ(t,u) = E Ψ(τ_h, X_{τ_h})`.
//!
//! Path `i` draws from streams derived from `(seed, i)` only, and per-path
//! values are reduced in index order with compensated summation, so results
//! are bitwise identical for any worker count.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::levy::ModelParams;
use crate::numeric::{KahanSum, PathStreams};
use crate::pide::SolutionField;
use crate::reserve::{simulate_outcome, SimScheme, StopRule};

const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq)]
pub struct RuinEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    /// 95% interval clipped to `[0, 1]`; Wilson when the mean is 0 or 1.
    pub ci95: (f64, f64),
    pub scheme: SimScheme,
}

/// Mean, standard error and interval of per-path values in `[0, 1]`.
pub fn summarize(values: &[f64], scheme: SimScheme) -> RuinEstimate {
    let n = values.len();
    let nf = n as f64;
    let mean = values.iter().copied().collect::<KahanSum>().value() / nf;
    let var = if n > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).collect::<KahanSum>().value() / (nf - 1.0)
    } else {
        0.0
    };
    let std_error = (var / nf).sqrt();
    let ci95 = if mean <= 0.0 || mean >= 1.0 {
        wilson(mean.clamp(0.0, 1.0), nf)
    } else {
        ((mean - Z95 * std_error).max(0.0), (mean + Z95 * std_error).min(1.0))
    };
    RuinEstimate { mean, std_error, n_paths: n, ci95, scheme }
}

fn wilson(p: f64, n: f64) -> (f64, f64) {
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).clamp(0.0, p), (centre + half).clamp(p, 1.0))
}

/// Estimate `Ψ(t,u)` from `n_paths` independent paths.
pub fn estimate_psi(
    t: f64,
    u: f64,
    params: &ModelParams,
    n_paths: usize,
    scheme: &SimScheme,
    seed: u64,
) -> Result<RuinEstimate> {
    if n_paths == 0 {
        return Err(invalid("n_paths", "at least one path is required"));
    }
    if !(u > 0.0) {
        return Err(invalid("u", format!("initial capital must be > 0, got {u}")));
    }
    if !(t < params.horizon) {
        return Err(invalid("t", format!("start {t} must be before the horizon {}", params.horizon)));
    }
    params.validate()?;
    scheme.validate()?;
    let stop = StopRule { end: params.horizon, band: None };
    let values: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let out = simulate_outcome(t, u, params, scheme, stop, &mut PathStreams::new(seed, i))?;
            Ok(if out.ruined_before(params.horizon) { params.payoff.value_at_ruin(out.x_stop) } else { 0.0 })
        })
        .collect::<Result<_>>()?;
    Ok(summarize(&values, *scheme))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynkinReport {
    pub field_at_start: f64,
    /// Mean of `Ψ(τ_h, X_{τ_h})` over paths.
    pub stopped_mean: f64,
    pub discrepancy: f64,
    /// Standard error of the mean difference.
    pub std_error: f64,
    pub n_paths: usize,
    pub eps: f64,
    pub mean_stop_time: f64,
    /// Fraction of paths stopped by leaving `[u - eps, u + eps]` before `t + h`.
    pub exit_fraction: f64,
}

/// Compare `Ψ(t,u)` with `E Ψ(τ_h, X_{τ_h})` for
/// `τ_h = min(exit of X from [u - eps, u + eps], t + h)`; `eps` defaults to `u / 2`.
#[allow(clippy::too_many_arguments)]
pub fn dynkin_check(
    t: f64,
    u: f64,
    params: &ModelParams,
    h: f64,
    n_paths: usize,
    seed: u64,
    field: &SolutionField,
    scheme: &SimScheme,
    eps: Option<f64>,
) -> Result<DynkinReport> {
    if !(h > 0.0) {
        return Err(invalid("h", format!("must be > 0, got {h}")));
    }
    if !(t + h < params.horizon) {
        return Err(invalid("h", format!("t + h = {} must stay below the horizon {}", t + h, params.horizon)));
    }
    if n_paths == 0 {
        return Err(invalid("n_paths", "at least one path is required"));
    }
    let eps = eps.unwrap_or(0.5 * u);
    if !(eps > 0.0) {
        return Err(invalid("eps", format!("must be > 0, got {eps}")));
    }
    params.validate()?;
    let start = field.interpolate(t, u);
    let stop = StopRule { end: t + h, band: Some((u - eps, u + eps)) };
    let samples: Vec<(f64, f64, bool)> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let out = simulate_outcome(t, u, params, scheme, stop, &mut PathStreams::new(seed, i))?;
            let exited = out.tau.is_some() || out.stop_time < t + h;
            Ok((field.interpolate(out.stop_time, out.x_stop) - start, out.stop_time, exited))
        })
        .collect::<Result<_>>()?;
    let diffs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let est = summarize_unbounded(&diffs);
    let nf = n_paths as f64;
    Ok(DynkinReport {
        field_at_start: start,
        stopped_mean: start + est.0,
        discrepancy: est.0.abs(),
        std_error: est.1,
        n_paths,
        eps,
        mean_stop_time: samples.iter().map(|s| s.1).collect::<KahanSum>().value() / nf,
        exit_fraction: samples.iter().filter(|s| s.2).count() as f64 / nf,
    })
}

fn summarize_unbounded(values: &[f64]) -> (f64, f64) {
    let nf = values.len() as f64;
    let mean = values.iter().copied().collect::<KahanSum>().value() / nf;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).collect::<KahanSum>().value() / (nf - 1.0)
    } else {
        0.0
    };
    (mean, (var / nf).sqrt())
}
