#![allow(dead_code)]

use rand::Rng;
use ruin_core::levy::{Atom, JumpLaw, JumpSign, LevyTriplet, ModelParams};

pub fn brownian(a: f64, sigma: f64, horizon: f64) -> ModelParams {
    ModelParams::new(LevyTriplet::zero(), LevyTriplet::brownian(a, sigma), horizon)
}

pub fn transport(drift: f64, horizon: f64) -> ModelParams {
    ModelParams::new(LevyTriplet::zero(), LevyTriplet::brownian(drift, 0.0), horizon)
}

/// Jump law for the price driver, supported in `(-1, ∞)`.
pub fn random_price_law<R: Rng>(rng: &mut R) -> JumpLaw {
    match rng.random_range(0..4) {
        0 => JumpLaw::Point { value: rng.random_range(-0.9..0.9) },
        1 => {
            let lo = rng.random_range(-0.9..0.0);
            JumpLaw::Uniform { lo, hi: lo + rng.random_range(0.05..1.5) }
        }
        2 => JumpLaw::Exponential { rate: rng.random_range(1.0..5.0), sign: JumpSign::Positive },
        _ => {
            let a = rng.random_range(-0.8..-0.05);
            let b = rng.random_range(0.05..1.2);
            let p = rng.random_range(0.1..0.9);
            JumpLaw::Empirical { atoms: vec![Atom { value: a, prob: p }, Atom { value: b, prob: 1.0 - p }] }
        }
    }
}

pub fn random_business_law<R: Rng>(rng: &mut R) -> JumpLaw {
    match rng.random_range(0..3) {
        0 => JumpLaw::Point { value: rng.random_range(-2.0..1.0) },
        1 => {
            let lo = rng.random_range(-2.0..0.0);
            JumpLaw::Uniform { lo, hi: lo + rng.random_range(0.1..2.5) }
        }
        _ => JumpLaw::Exponential { rate: rng.random_range(0.5..4.0), sign: JumpSign::Negative },
    }
}

pub fn random_triplet<R: Rng>(rng: &mut R, price: bool) -> LevyTriplet {
    let mut t = LevyTriplet::brownian(rng.random_range(-1.0..1.5), rng.random_range(0.0..0.8));
    if rng.random_bool(0.3) {
        t.sigma = 0.0;
    }
    if rng.random_bool(0.7) {
        let law = if price { random_price_law(rng) } else { random_business_law(rng) };
        t = t.with_jumps(rng.random_range(0.1..2.0), law);
    }
    t
}

pub fn random_params<R: Rng>(rng: &mut R, horizon: f64) -> ModelParams {
    let mut r = random_triplet(rng, true);
    r.drift *= 0.2;
    ModelParams::new(r, random_triplet(rng, false), horizon)
}
