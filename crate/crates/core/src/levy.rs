//! Lévy triplets of the investment return `R` and the business process `P`,
//! their validation, and sampling of increments over short steps.
//!
//! Jump measures are finite-activity: `Π(dz) = λ · law(dz)`. The `drift` of a
//! triplet is the `a` of the canonical decomposition
//! `a t + σ W + z 1{|z|<=1} * (μ - ν) + z 1{|z|>1} * μ`,
//! so small jumps are compensated and the sampled continuous part carries
//! `-λ E[z 1{|z|<=1}] dt`. Do not fold jump means into `drift` yourself.

use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result, Violation, Violations};
use crate::numeric::integrate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpSign {
    Positive,
    Negative,
}

impl JumpSign {
    fn factor(self) -> f64 {
        match self {
            JumpSign::Positive => 1.0,
            JumpSign::Negative => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub value: f64,
    pub prob: f64,
}

/// Distribution of a single jump size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JumpLaw {
    Point {
        value: f64,
    },
    /// `sign · Y` with `Y ~ Exp(rate)`.
    Exponential {
        rate: f64,
        sign: JumpSign,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    Empirical {
        atoms: Vec<Atom>,
    },
}

impl JumpLaw {
    pub fn problems(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        match self {
            JumpLaw::Point { value } => {
                if !value.is_finite() {
                    out.push(Violation::Field { name: "point.value", value: *value, constraint: "finite" });
                }
            }
            JumpLaw::Exponential { rate, .. } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    out.push(Violation::Field { name: "exponential.rate", value: *rate, constraint: "finite and > 0" });
                }
            }
            JumpLaw::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    out.push(Violation::Law(format!("uniform law needs finite lo < hi, got [{lo}, {hi}]")));
                }
            }
            JumpLaw::Empirical { atoms } => {
                if atoms.is_empty() {
                    out.push(Violation::Law("empirical law has no atoms".into()));
                }
                for a in atoms {
                    if !a.value.is_finite() {
                        out.push(Violation::Field { name: "atom.value", value: a.value, constraint: "finite" });
                    }
                    if !(a.prob.is_finite() && a.prob >= 0.0) {
                        out.push(Violation::Field { name: "atom.prob", value: a.prob, constraint: ">= 0" });
                    }
                }
                let total: f64 = atoms.iter().map(|a| a.prob).sum();
                if (total - 1.0).abs() > 1e-12 {
                    out.push(Violation::Law(format!("empirical probabilities sum to {total}, not 1")));
                }
            }
        }
        out
    }

    /// Closed hull of the support.
    pub fn support(&self) -> (f64, f64) {
        match self {
            JumpLaw::Point { value } => (*value, *value),
            JumpLaw::Exponential { sign: JumpSign::Positive, .. } => (0.0, f64::INFINITY),
            JumpLaw::Exponential { sign: JumpSign::Negative, .. } => (f64::NEG_INFINITY, 0.0),
            JumpLaw::Uniform { lo, hi } => (*lo, *hi),
            JumpLaw::Empirical { atoms } => atoms
                .iter()
                .filter(|a| a.prob > 0.0)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), a| (l.min(a.value), h.max(a.value))),
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, JumpLaw::Point { .. } | JumpLaw::Empirical { .. })
    }

    /// `P(a < Z <= b)`.
    pub fn mass_in(&self, a: f64, b: f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        match self {
            JumpLaw::Point { value } => indicator(a < *value && *value <= b),
            JumpLaw::Exponential { rate, sign } => {
                let cdf = |y: f64| if y <= 0.0 { 0.0 } else { -(-rate * y).exp_m1() };
                match sign {
                    JumpSign::Positive => cdf(b) - cdf(a),
                    JumpSign::Negative => cdf(-a) - cdf(-b),
                }
            }
            JumpLaw::Uniform { lo, hi } => {
                let (l, h) = (a.max(*lo), b.min(*hi));
                if h > l {
                    (h - l) / (hi - lo)
                } else {
                    0.0
                }
            }
            JumpLaw::Empirical { atoms } => {
                atoms.iter().filter(|at| a < at.value && at.value <= b).map(|at| at.prob).sum()
            }
        }
    }

    /// `E[Z; a < Z <= b]`.
    pub fn moment_in(&self, a: f64, b: f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        match self {
            JumpLaw::Point { value } => value * indicator(a < *value && *value <= b),
            JumpLaw::Exponential { rate, sign } => {
                // ∫_0^y s θ e^{-θ s} ds
                let partial = |y: f64| {
                    if y <= 0.0 {
                        0.0
                    } else if y.is_infinite() {
                        1.0 / rate
                    } else {
                        (1.0 - (1.0 + rate * y) * (-rate * y).exp()) / rate
                    }
                };
                match sign {
                    JumpSign::Positive => partial(b) - partial(a),
                    JumpSign::Negative => -(partial(-a) - partial(-b)),
                }
            }
            JumpLaw::Uniform { lo, hi } => {
                let (l, h) = (a.max(*lo), b.min(*hi));
                if h > l {
                    (h * h - l * l) / (2.0 * (hi - lo))
                } else {
                    0.0
                }
            }
            JumpLaw::Empirical { atoms } => {
                atoms.iter().filter(|at| a < at.value && at.value <= b).map(|at| at.prob * at.value).sum()
            }
        }
    }

    /// `E[Z 1{|Z| <= 1}]`, the per-jump compensator of the canonical decomposition.
    pub fn truncated_mean(&self) -> f64 {
        match self {
            JumpLaw::Point { value } => {
                if value.abs() <= 1.0 {
                    *value
                } else {
                    0.0
                }
            }
            JumpLaw::Empirical { atoms } => {
                atoms.iter().filter(|a| a.value.abs() <= 1.0).map(|a| a.prob * a.value).sum()
            }
            _ => self.moment_in(-1.0, 1.0),
        }
    }

    /// `E[g(Z); a < Z <= b]`. Exact for atomic laws, composite Gauss–Legendre otherwise.
    pub fn expect_in<G: FnMut(f64) -> f64>(&self, mut g: G, a: f64, b: f64, panels: usize) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        match self {
            JumpLaw::Point { value } => {
                if a < *value && *value <= b {
                    g(*value)
                } else {
                    0.0
                }
            }
            JumpLaw::Empirical { atoms } => {
                atoms.iter().filter(|at| a < at.value && at.value <= b).map(|at| at.prob * g(at.value)).sum()
            }
            JumpLaw::Uniform { lo, hi } => {
                let (l, h) = (a.max(*lo), b.min(*hi));
                integrate(&mut g, l, h, panels) / (hi - lo)
            }
            JumpLaw::Exponential { rate, sign } => {
                // density tail below e^-40 is dropped
                let cut = 40.0 / rate;
                let s = sign.factor();
                let (ylo, yhi) = match sign {
                    JumpSign::Positive => (a.max(0.0), b.min(cut)),
                    JumpSign::Negative => ((-b).max(0.0), (-a).min(cut)),
                };
                integrate(|y| rate * (-rate * y).exp() * g(s * y), ylo, yhi, panels)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            JumpLaw::Point { value } => *value,
            JumpLaw::Exponential { rate, sign } => {
                let y: f64 = Exp::new(*rate).expect("validated rate").sample(rng);
                sign.factor() * y
            }
            JumpLaw::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            JumpLaw::Empirical { atoms } => {
                let x: f64 = rng.random();
                let mut acc = 0.0;
                for a in atoms {
                    acc += a.prob;
                    if x < acc {
                        return a.value;
                    }
                }
                atoms.last().map(|a| a.value).unwrap_or(0.0)
            }
        }
    }
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Finite-activity jump part: `Π(dz) = intensity · law(dz)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpSpec {
    pub intensity: f64,
    pub law: JumpLaw,
}

impl JumpSpec {
    pub fn new(intensity: f64, law: JumpLaw) -> Self {
        JumpSpec { intensity, law }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyTriplet {
    /// Canonical drift `a` (small jumps compensated separately).
    pub drift: f64,
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jumps: Option<JumpSpec>,
    /// Variance per unit time standing in for truncated small jumps.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub small_jump_diffusion: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl LevyTriplet {
    pub fn zero() -> Self {
        Self::brownian(0.0, 0.0)
    }

    pub fn brownian(drift: f64, sigma: f64) -> Self {
        LevyTriplet { drift, sigma, jumps: None, small_jump_diffusion: 0.0 }
    }

    pub fn with_jumps(mut self, intensity: f64, law: JumpLaw) -> Self {
        self.jumps = Some(JumpSpec::new(intensity, law));
        self
    }

    pub fn intensity(&self) -> f64 {
        self.jumps.as_ref().map_or(0.0, |j| j.intensity)
    }

    /// Diffusive variance per unit time, `σ² + small_jump_diffusion`.
    pub fn variance_rate(&self) -> f64 {
        self.sigma * self.sigma + self.small_jump_diffusion
    }

    /// Drift of the continuous part after compensating jumps with `|z| <= 1`.
    pub fn compensated_drift(&self) -> f64 {
        match &self.jumps {
            Some(j) if j.intensity > 0.0 => self.drift - j.intensity * j.law.truncated_mean(),
            _ => self.drift,
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.variance_rate() == 0.0 && self.intensity() == 0.0
    }
}

/// Check a triplet; the price driver must not jump to or below `-1`.
pub fn validate_triplet(t: &LevyTriplet, is_price_driver: bool) -> std::result::Result<(), Violations> {
    let mut out = Vec::new();
    if !t.drift.is_finite() {
        out.push(Violation::Field { name: "drift", value: t.drift, constraint: "finite" });
    }
    if !(t.sigma.is_finite() && t.sigma >= 0.0) {
        out.push(Violation::Field { name: "sigma", value: t.sigma, constraint: "finite and >= 0" });
    }
    if !(t.small_jump_diffusion.is_finite() && t.small_jump_diffusion >= 0.0) {
        out.push(Violation::Field {
            name: "small_jump_diffusion",
            value: t.small_jump_diffusion,
            constraint: "finite and >= 0",
        });
    }
    if let Some(j) = &t.jumps {
        if !(j.intensity.is_finite() && j.intensity >= 0.0) {
            out.push(Violation::Field { name: "intensity", value: j.intensity, constraint: "finite and >= 0" });
        }
        let law_problems = j.law.problems();
        let law_ok = law_problems.is_empty();
        out.extend(law_problems);
        if is_price_driver && law_ok && j.intensity > 0.0 {
            match &j.law {
                JumpLaw::Empirical { atoms } => {
                    for a in atoms.iter().filter(|a| a.value <= -1.0 && a.prob > 0.0) {
                        out.push(Violation::MassBelowMinusOne {
                            mass: j.intensity * a.prob,
                            region: format!("atom at {}", a.value),
                        });
                    }
                }
                law => {
                    let mass = j.intensity * law.mass_in(f64::NEG_INFINITY, -1.0);
                    if mass > 0.0 {
                        let region = match law {
                            JumpLaw::Point { value } => format!("atom at {value}"),
                            JumpLaw::Uniform { lo, .. } => format!("uniform support [{lo}, -1]"),
                            _ => "unbounded negative support".to_string(),
                        };
                        out.push(Violation::MassBelowMinusOne { mass, region });
                    }
                }
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(Violations(out))
    }
}

/// Penalty `w` applied to the deficit `|X_τ|` at ruin; values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Penalty {
    Constant {
        value: f64,
    },
    /// `exp(-rate · deficit)`.
    Exponential {
        rate: f64,
    },
    /// Piecewise linear through `(deficit, w)` points, flat outside.
    Table {
        points: Vec<[f64; 2]>,
    },
}

impl Penalty {
    pub fn eval(&self, deficit: f64) -> f64 {
        let d = deficit.max(0.0);
        match self {
            Penalty::Constant { value } => *value,
            Penalty::Exponential { rate } => (-rate * d).exp(),
            Penalty::Table { points } => {
                let first = points[0];
                if d <= first[0] {
                    return first[1];
                }
                for w in points.windows(2) {
                    let ([x0, y0], [x1, y1]) = (w[0], w[1]);
                    if d <= x1 {
                        return y0 + (y1 - y0) * (d - x0) / (x1 - x0);
                    }
                }
                points[points.len() - 1][1]
            }
        }
    }

    fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            Penalty::Constant { value } => {
                if !(0.0..=1.0).contains(value) {
                    out.push(format!("penalty constant {value} outside [0, 1]"));
                }
            }
            Penalty::Exponential { rate } => {
                if !(rate.is_finite() && *rate >= 0.0) {
                    out.push(format!("penalty rate {rate} must be finite and >= 0"));
                }
            }
            Penalty::Table { points } => {
                if points.is_empty() {
                    out.push("penalty table is empty".into());
                }
                if points.windows(2).any(|w| !(w[1][0] > w[0][0])) {
                    out.push("penalty table abscissae must increase strictly".into());
                }
                if points.iter().any(|p| p[0] < 0.0 || !(0.0..=1.0).contains(&p[1])) {
                    out.push("penalty table needs deficits >= 0 and values in [0, 1]".into());
                }
            }
        }
        out
    }
}

/// The functional `V` evaluated at ruin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PayoffSpec {
    /// `1{τ < T}`: the finite-horizon ruin probability.
    #[default]
    RuinIndicator,
    /// `w(|X_τ|) 1{τ < T}`, a Gerber–Shiu style penalty.
    DeficitPenalty { penalty: Penalty },
    /// `V = 1{x > 0}` taken literally at `X_τ <= 0`; identically zero.
    LiteralIndicator,
}

impl PayoffSpec {
    /// `V` at a ruin state `x <= 0`.
    pub fn value_at_ruin(&self, x: f64) -> f64 {
        match self {
            PayoffSpec::RuinIndicator => 1.0,
            PayoffSpec::DeficitPenalty { penalty } => penalty.eval(-x),
            PayoffSpec::LiteralIndicator => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Investment return driving the price `S = E(R)`.
    pub r: LevyTriplet,
    /// Business activity (premiums, claims).
    pub p: LevyTriplet,
    pub horizon: f64,
    #[serde(default)]
    pub payoff: PayoffSpec,
}

impl ModelParams {
    pub fn new(r: LevyTriplet, p: LevyTriplet, horizon: f64) -> Self {
        ModelParams { r, p, horizon, payoff: PayoffSpec::RuinIndicator }
    }

    /// All problems, formatted for humans.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Err(v) = validate_triplet(&self.r, true) {
            out.extend(v.0.iter().map(|v| format!("r: {v}")));
        }
        if let Err(v) = validate_triplet(&self.p, false) {
            out.extend(v.0.iter().map(|v| format!("p: {v}")));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            out.push(format!("horizon = {} must be finite and > 0", self.horizon));
        }
        if let PayoffSpec::DeficitPenalty { penalty } = &self.payoff {
            out.extend(penalty.problems().into_iter().map(|p| format!("payoff: {p}")));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        validate_triplet(&self.r, true).map_err(|violations| Error::InvalidTriplet { driver: "r", violations })?;
        validate_triplet(&self.p, false).map_err(|violations| Error::InvalidTriplet { driver: "p", violations })?;
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    pub fn total_intensity(&self) -> f64 {
        self.r.intensity() + self.p.intensity()
    }
}

/// Continuous increment plus the jumps of one step, offsets relative to the step start.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Increment {
    pub continuous: f64,
    pub jumps: Vec<(f64, f64)>,
}

/// Sorted jump offsets and sizes on `[0, dt]`.
pub fn sample_jumps<R: Rng + ?Sized>(t: &LevyTriplet, dt: f64, rng: &mut R) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    sample_jumps_into(t, dt, rng, &mut out);
    out
}

/// As [`sample_jumps`], reusing `out`'s allocation.
pub fn sample_jumps_into<R: Rng + ?Sized>(t: &LevyTriplet, dt: f64, rng: &mut R, out: &mut Vec<(f64, f64)>) {
    out.clear();
    let Some(spec) = &t.jumps else { return };
    let mean = spec.intensity * dt;
    if !(mean > 0.0) {
        return;
    }
    let n: f64 = Poisson::new(mean).expect("positive finite mean").sample(rng);
    out.extend((0..n as usize).map(|_| (dt * rng.random::<f64>(), 0.0)));
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    for j in out.iter_mut() {
        j.1 = spec.law.sample(rng);
    }
}

/// Gaussian part of the continuous increment, split as `(drift, noise)`.
pub fn sample_continuous<R: Rng + ?Sized>(t: &LevyTriplet, dt: f64, rng: &mut R) -> (f64, f64) {
    let drift = t.compensated_drift() * dt;
    let var = t.variance_rate();
    let noise = if var > 0.0 && dt > 0.0 {
        let z: f64 = StandardNormal.sample(rng);
        (var * dt).sqrt() * z
    } else {
        0.0
    };
    (drift, noise)
}

/// Sample the increment of `t` over a step of length `dt`.
pub fn sample_increment<R: Rng + ?Sized>(t: &LevyTriplet, dt: f64, rng: &mut R) -> Result<Increment> {
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(invalid("dt", format!("step must be finite and >= 0, got {dt}")));
    }
    if dt == 0.0 {
        return Ok(Increment::default());
    }
    let (drift, noise) = sample_continuous(t, dt, rng);
    let jumps = sample_jumps(t, dt, rng);
    Ok(Increment { continuous: drift + noise, jumps })
}
