//! Simulation of the reserve `dX = X_- dR + dP`, `X_t = u`, and of the ruin
//! time `τ = inf{s > t : X_s <= 0}`.
//!
//! Each base step of length `<= dt_max` is sampled per driver from that
//! driver's own substream: jump times first, then the Gaussian increments
//! between them. Jump times of both drivers are merged into one event grid;
//! where one driver's leg has to be cut at the other driver's jump time the
//! Gaussian part is split with a Brownian bridge drawn from the auxiliary
//! stream. The price `S` at its own event times therefore depends on the
//! `R` stream alone.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::levy::{sample_jumps_into, Increment, LevyTriplet, ModelParams};
use crate::numeric::PathStreams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    /// `X_{k+1} = X_k + X_k ΔR_k + ΔP_k` on the merged event grid.
    Euler,
    /// Variation of constants between events, `X = S (X_0/S_0 + ∫ S^{-1} dP)`.
    #[default]
    ExactBetweenJumps,
}

impl std::str::FromStr for SchemeKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "euler" => Ok(SchemeKind::Euler),
            "exact_between_jumps" | "exact" => Ok(SchemeKind::ExactBetweenJumps),
            other => Err(format!("unknown scheme `{other}` (euler | exact_between_jumps)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimScheme {
    pub kind: SchemeKind,
    pub dt_max: f64,
    /// Sample within-step crossings of zero by the diffusive part.
    /// Off by default: removes the discrete-monitoring bias at the cost of extra draws.
    #[serde(default)]
    pub bridge_correction: bool,
}

impl Default for SimScheme {
    fn default() -> Self {
        SimScheme { kind: SchemeKind::ExactBetweenJumps, dt_max: 1e-2, bridge_correction: false }
    }
}

impl SimScheme {
    pub fn new(kind: SchemeKind, dt_max: f64) -> Self {
        SimScheme { kind, dt_max, bridge_correction: false }
    }

    pub fn with_bridge(mut self, on: bool) -> Self {
        self.bridge_correction = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_max.is_finite() && self.dt_max > 0.0) {
            return Err(invalid("dt_max", format!("must be finite and > 0, got {}", self.dt_max)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Grid,
    JumpR,
    JumpP,
    Ruin,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Grid => "grid",
            EventKind::JumpR => "jumpR",
            EventKind::JumpP => "jumpP",
            EventKind::Ruin => "ruin",
        }
    }
}

/// Recorded trajectory of `X^{t,u}` up to `min(τ, T)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SamplePath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Price `S`, normalised to 1 at the start time.
    pub prices: Vec<f64>,
    pub events: Vec<EventKind>,
    pub tau: Option<f64>,
    /// `-X_τ >= 0` when ruined.
    pub overshoot: Option<f64>,
}

impl SamplePath {
    fn record(&mut self, time: f64, x: f64, s: f64, kind: EventKind) {
        if let Some(&last) = self.times.last() {
            if time <= last {
                let i = self.times.len() - 1;
                self.values[i] = x;
                self.prices[i] = s;
                self.events[i] = kind;
                return;
            }
        }
        self.times.push(time);
        self.values.push(x);
        self.prices.push(s);
        self.events.push(kind);
    }

    /// Jump times of either driver.
    pub fn jump_times(&self) -> Vec<f64> {
        self.times
            .iter()
            .zip(&self.events)
            .filter(|(_, e)| matches!(e, EventKind::JumpR | EventKind::JumpP))
            .map(|(t, _)| *t)
            .collect()
    }
}

/// Where a simulated path stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOutcome {
    pub tau: Option<f64>,
    pub stop_time: f64,
    /// `X` at the stop time (at `τ` when ruined).
    pub x_stop: f64,
}

impl PathOutcome {
    pub fn ruined_before(&self, horizon: f64) -> bool {
        self.tau.is_some_and(|t| t < horizon)
    }
}

/// Simulation window `[t, end]`, optionally stopped on leaving `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub end: f64,
    pub band: Option<(f64, f64)>,
}

/// `exp(ΔR_c - v Δt / 2)`: the Doléans factor across a continuous step.
pub fn doleans_factor(continuous: f64, variance_rate: f64, dt: f64) -> f64 {
    (continuous - 0.5 * variance_rate * dt).exp()
}

/// `S = E(R)` at the ends of consecutive steps, starting from `S = 1`.
pub fn doleans_path(r: &LevyTriplet, steps: &[(f64, Increment)]) -> Result<Vec<f64>> {
    let v = r.variance_rate();
    let mut s = 1.0;
    let mut out = Vec::with_capacity(steps.len() + 1);
    out.push(s);
    for (dt, inc) in steps {
        s *= doleans_factor(inc.continuous, v, *dt);
        for &(_, z) in &inc.jumps {
            let factor = 1.0 + z;
            if !(factor > 0.0) {
                return Err(Error::NonPositiveFactor { jump: z, factor });
            }
            s *= factor;
        }
        out.push(s);
    }
    Ok(out)
}

/// Brownian piece of one driver between two of its own event times.
struct Leg {
    start: f64,
    end: f64,
    noise_left: f64,
    /// Unsplit length and noise, so `S` at the driver's own event times
    /// does not depend on where the other driver cut the leg.
    len: f64,
    noise: f64,
}

/// One driver's samples over a base step: legs between its jumps, then the jumps.
struct DriverStep {
    drift_rate: f64,
    var_rate: f64,
    legs: Vec<Leg>,
    jumps: Vec<(f64, f64)>,
    leg: usize,
}

impl DriverStep {
    fn new(t: &LevyTriplet) -> Self {
        DriverStep {
            drift_rate: t.compensated_drift(),
            var_rate: t.variance_rate(),
            legs: Vec::new(),
            jumps: Vec::new(),
            leg: 0,
        }
    }

    fn sample(&mut self, t: &LevyTriplet, d: f64, rng: &mut ChaCha8Rng) {
        sample_jumps_into(t, d, rng, &mut self.jumps);
        self.legs.clear();
        self.leg = 0;
        let sd = self.var_rate.sqrt();
        let mut prev = 0.0;
        for end in self.jumps.iter().map(|j| j.0).chain(std::iter::once(d)) {
            let span = end - prev;
            let noise = if sd > 0.0 && span > 0.0 {
                let z: f64 = StandardNormal.sample(rng);
                sd * span.sqrt() * z
            } else {
                0.0
            };
            self.legs.push(Leg { start: prev, end, noise_left: noise, len: span, noise });
            prev = end;
        }
    }

    /// Log-increment of `E(·)` over the whole current leg.
    fn leg_log(&self) -> f64 {
        let leg = &self.legs[self.leg];
        self.drift_rate * leg.len + leg.noise - 0.5 * self.var_rate * leg.len
    }

    /// Gaussian noise accumulated from the current leg position to `until`.
    fn take_noise(&mut self, until: f64, aux: &mut ChaCha8Rng) -> f64 {
        let leg = &mut self.legs[self.leg];
        if until >= leg.end {
            let n = leg.noise_left;
            leg.noise_left = 0.0;
            leg.start = leg.end;
            return n;
        }
        let span = leg.end - leg.start;
        let head = until - leg.start;
        if !(head > 0.0) || !(span > 0.0) {
            return 0.0;
        }
        let mean = leg.noise_left * head / span;
        let var = self.var_rate * head * (leg.end - until) / span;
        let n = if var > 0.0 {
            let z: f64 = StandardNormal.sample(aux);
            mean + var.sqrt() * z
        } else {
            mean
        };
        leg.noise_left -= n;
        leg.start = until;
        n
    }
}

#[derive(Clone, Copy)]
enum Source {
    R(f64),
    P(f64),
    GridEnd,
}

/// Run one path; `observe` sees every recorded state `(time, X, S, kind)`.
pub fn run_path<F>(
    t0: f64,
    u: f64,
    params: &ModelParams,
    scheme: &SimScheme,
    stop: StopRule,
    streams: &mut PathStreams,
    mut observe: F,
) -> Result<PathOutcome>
where
    F: FnMut(f64, f64, f64, EventKind),
{
    if !(u > 0.0) || !u.is_finite() {
        return Err(invalid("u", format!("initial capital must be > 0, got {u}")));
    }
    if !(stop.end > t0) {
        return Err(invalid("t", format!("start time {t0} must precede end {}", stop.end)));
    }
    scheme.validate()?;

    let n_steps = ((stop.end - t0) / scheme.dt_max).ceil().max(1.0) as usize;
    let dt = (stop.end - t0) / n_steps as f64;
    let exact = scheme.kind == SchemeKind::ExactBetweenJumps;
    let (r_var, p_var) = (params.r.variance_rate(), params.p.variance_rate());

    let mut x = u;
    // S at the last R event, the R log-increment accrued since, and the current S.
    let mut s_anchor = 1.0;
    let mut r_log_since = 0.0;
    let mut s = 1.0;
    observe(t0, x, s, EventKind::Grid);

    let mut rs = DriverStep::new(&params.r);
    let mut ps = DriverStep::new(&params.p);
    let mut events: Vec<(f64, Source)> = Vec::new();
    for k in 0..n_steps {
        let s0 = t0 + k as f64 * dt;
        let s1 = if k + 1 == n_steps { stop.end } else { t0 + (k + 1) as f64 * dt };
        let d = s1 - s0;
        rs.sample(&params.r, d, &mut streams.r);
        ps.sample(&params.p, d, &mut streams.p);

        events.clear();
        events.extend(rs.jumps.iter().map(|&(o, z)| (o, Source::R(z))));
        events.extend(ps.jumps.iter().map(|&(o, z)| (o, Source::P(z))));
        if events.len() > 1 {
            events.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        events.push((d, Source::GridEnd));

        let mut pos = 0.0;
        for &(offset, source) in &events {
            let delta = (offset - pos).max(0.0);
            let r_noise = rs.take_noise(offset, &mut streams.aux);
            let p_noise = ps.take_noise(offset, &mut streams.aux);
            let r_drift = rs.drift_rate * delta;
            let p_drift = ps.drift_rate * delta;
            let ell = r_drift + r_noise - 0.5 * r_var * delta;
            let x_prev = x;
            if exact && ell != 0.0 {
                let phi = -(-ell).exp_m1() / ell;
                x = ell.exp() * (x + p_drift * phi + p_noise * (-0.5 * ell).exp());
            } else if exact {
                x += p_drift + p_noise;
            } else {
                x += x * (r_drift + r_noise) + (p_drift + p_noise);
            }
            r_log_since += ell;
            if r_log_since != 0.0 {
                s = s_anchor * r_log_since.exp();
            }
            let now = s0 + offset;

            if scheme.bridge_correction && p_var > 0.0 && x_prev > 0.0 && x > 0.0 && delta > 0.0 {
                let local_var = (r_var * x_prev * x_prev + p_var) * delta;
                let p_cross = (-2.0 * x_prev * x / local_var).exp();
                if streams.aux.random::<f64>() < p_cross {
                    let at = s0 + pos + 0.5 * delta;
                    observe(at, 0.0, s, EventKind::Ruin);
                    return Ok(PathOutcome { tau: Some(at), stop_time: at, x_stop: 0.0 });
                }
            }
            if x <= 0.0 {
                observe(now, x, s, EventKind::Ruin);
                return Ok(PathOutcome { tau: Some(now), stop_time: now, x_stop: x });
            }

            let kind = match source {
                Source::R(z) => {
                    let factor = 1.0 + z;
                    if !(factor > 0.0) {
                        return Err(Error::NonPositiveFactor { jump: z, factor });
                    }
                    x *= factor;
                    // S is re-anchored on R events and grid ends only
                    s_anchor *= rs.leg_log().exp() * factor;
                    r_log_since = 0.0;
                    s = s_anchor;
                    rs.leg += 1;
                    EventKind::JumpR
                }
                Source::P(z) => {
                    x += z;
                    ps.leg += 1;
                    EventKind::JumpP
                }
                Source::GridEnd => {
                    s_anchor *= rs.leg_log().exp();
                    r_log_since = 0.0;
                    s = s_anchor;
                    EventKind::Grid
                }
            };
            if x <= 0.0 {
                observe(now, x, s, EventKind::Ruin);
                return Ok(PathOutcome { tau: Some(now), stop_time: now, x_stop: x });
            }
            observe(now, x, s, kind);
            if let Some((lo, hi)) = stop.band {
                if x < lo || x > hi {
                    return Ok(PathOutcome { tau: None, stop_time: now, x_stop: x });
                }
            }
            pos = offset;
        }
    }
    Ok(PathOutcome { tau: None, stop_time: stop.end, x_stop: x })
}

/// Simulate and record `X^{t,u}` on `[t, T]`.
pub fn simulate_path(
    t: f64,
    u: f64,
    params: &ModelParams,
    scheme: &SimScheme,
    streams: &mut PathStreams,
) -> Result<SamplePath> {
    if !(t < params.horizon) {
        return Err(invalid("t", format!("start {t} must be before the horizon {}", params.horizon)));
    }
    let mut path = SamplePath::default();
    let out = run_path(t, u, params, scheme, StopRule { end: params.horizon, band: None }, streams, |tm, x, s, k| {
        path.record(tm, x, s, k)
    })?;
    path.tau = out.tau;
    path.overshoot = out.tau.map(|_| (-out.x_stop).max(0.0));
    Ok(path)
}

/// Outcome only; no trajectory is kept.
pub fn simulate_outcome(
    t: f64,
    u: f64,
    params: &ModelParams,
    scheme: &SimScheme,
    stop: StopRule,
    streams: &mut PathStreams,
) -> Result<PathOutcome> {
    run_path(t, u, params, scheme, stop, streams, |_, _, _, _| {})
}
