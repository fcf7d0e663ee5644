//! Reference answers kept independent of the main simulator: closed forms
//! and a plain fine-step Euler Monte Carlo with its own stepping and seeding.

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::levy::ModelParams;
use crate::numeric::{ln_norm_cdf, norm_cdf, splitmix64, KahanSum};

const FINE_SALT: u64 = 0xF1E5_A17D_0C0F_FEE5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    FineMc,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    /// Zero for closed forms, one standard error for Monte Carlo.
    pub error_bound: f64,
    pub provenance: Provenance,
}

/// Probability that `u + a s + σ W_s` hits 0 before `h`.
pub fn brownian_first_passage(u: f64, a: f64, sigma: f64, h: f64) -> Result<f64> {
    if !(u > 0.0) {
        return Err(invalid("u", format!("must be > 0, got {u}")));
    }
    if !(sigma > 0.0) {
        return Err(invalid("sigma", "must be > 0; a driftless-noise-free reserve is pure transport"));
    }
    if !(h > 0.0) {
        return Err(invalid("h", format!("must be > 0, got {h}")));
    }
    let s = sigma * h.sqrt();
    let first = norm_cdf((-u - a * h) / s);
    let second = (-2.0 * a * u / (sigma * sigma) + ln_norm_cdf((-u + a * h) / s)).exp();
    Ok((first + second).clamp(0.0, 1.0))
}

/// Ultimate ruin probability of the classical risk process with exponential claims.
pub fn cramer_lundberg_ultimate(u: f64, c: f64, lambda: f64, mu: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(invalid("u", format!("must be >= 0, got {u}")));
    }
    if !(lambda >= 0.0 && mu > 0.0 && c.is_finite()) {
        return Err(invalid("claims", "need lambda >= 0, mean > 0 and finite premium"));
    }
    let load = lambda * mu;
    if c <= load {
        return Ok(1.0);
    }
    Ok(load / c * (-(c - load) * u / (c * mu)).exp())
}

/// Euler scheme at a fixed step with jumps from exponential clocks applied at
/// step ends and a Brownian-bridge crossing test on every step.
pub fn fine_mc(t: f64, u: f64, params: &ModelParams, dt_fine: f64, n_paths: usize, seed: u64) -> Result<OracleResult> {
    if !(dt_fine > 0.0) {
        return Err(invalid("dt_fine", format!("must be > 0, got {dt_fine}")));
    }
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
    let base = splitmix64(seed ^ FINE_SALT);
    let values: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = SmallRng::seed_from_u64(splitmix64(base.wrapping_add(i)));
            one_path(t, u, params, dt_fine, &mut rng)
        })
        .collect();
    let n = n_paths as f64;
    let mean = values.iter().copied().collect::<KahanSum>().value() / n;
    let var = if n_paths > 1 {
        values.iter().map(|v| (v - mean).powi(2)).collect::<KahanSum>().value() / (n - 1.0)
    } else {
        0.0
    };
    Ok(OracleResult { value: mean, error_bound: (var / n).sqrt(), provenance: Provenance::FineMc })
}

fn next_clock(rng: &mut SmallRng, now: f64, rate: f64) -> f64 {
    if rate > 0.0 {
        now + Exp::new(rate).expect("positive rate").sample(rng)
    } else {
        f64::INFINITY
    }
}

fn one_path(t0: f64, u: f64, params: &ModelParams, dt: f64, rng: &mut SmallRng) -> f64 {
    let (r, p) = (&params.r, &params.p);
    let (sr, sp) = (r.variance_rate().sqrt(), p.variance_rate().sqrt());
    let (mr, mp) = (r.compensated_drift(), p.compensated_drift());
    let (lr, lp) = (r.intensity(), p.intensity());
    let horizon = params.horizon;
    let ruin = |x: f64| params.payoff.value_at_ruin(x);

    let mut x = u;
    let mut now = t0;
    let mut clock_r = next_clock(rng, now, lr);
    let mut clock_p = next_clock(rng, now, lp);
    while now < horizon {
        let h = dt.min(horizon - now);
        let end = if h < dt { horizon } else { now + h };
        let zr: f64 = if sr > 0.0 { rng.sample(StandardNormal) } else { 0.0 };
        let zp: f64 = if sp > 0.0 { rng.sample(StandardNormal) } else { 0.0 };
        let sq = h.sqrt();
        let mut y = x + x * (mr * h + sr * sq * zr) + mp * h + sp * sq * zp;
        if y <= 0.0 {
            return ruin(y);
        }
        let v = sr * sr * x * x + sp * sp;
        if v > 0.0 {
            let cross = (-2.0 * x * y / (v * h)).exp();
            if rng.random::<f64>() < cross {
                return ruin(0.0);
            }
        }
        loop {
            let next = clock_r.min(clock_p);
            if next > end {
                break;
            }
            if clock_r <= clock_p {
                let z = r.jumps.as_ref().expect("intensity > 0").law.sample(rng);
                y *= 1.0 + z;
                clock_r = next_clock(rng, clock_r, lr);
            } else {
                let z = p.jumps.as_ref().expect("intensity > 0").law.sample(rng);
                y += z;
                clock_p = next_clock(rng, clock_p, lp);
            }
            if y <= 0.0 {
                return ruin(y);
            }
        }
        x = y;
        now = end;
    }
    0.0
}
