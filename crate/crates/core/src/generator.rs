//! The generator `L` applied to a smooth test function supplied pointwise.
//!
//! `L^d` uses the raw canonical drifts; the compensator `-f_u·β z 1{|z| <= 1}`
//! appears inside the jump integrals.

use crate::levy::{LevyTriplet, ModelParams};

const PANELS: usize = 128;

/// `½(v_R u² + v_P) A + (a_R u + a_P) p` for slope `p` and curvature `A` at `u`.
pub fn local_generator(params: &ModelParams, u: f64, p: f64, a: f64) -> f64 {
    let d = 0.5 * (params.r.variance_rate() * u * u + params.p.variance_rate());
    d * a + (params.r.drift * u + params.p.drift) * p
}

/// `L^i_R f(u) + L^i_P f(u)` with `f_u(u) = p`. `f` must handle targets `y <= 0` itself.
pub fn jump_generator<F: Fn(f64) -> f64>(params: &ModelParams, u: f64, f: F, p: f64) -> f64 {
    jump_part(&params.r, u, u, &f, p) + jump_part(&params.p, u, 1.0, &f, p)
}

/// One driver with targets `y = u + β z`.
pub fn jump_part<F: Fn(f64) -> f64>(drv: &LevyTriplet, u: f64, beta: f64, f: &F, p: f64) -> f64 {
    let Some(spec) = &drv.jumps else { return 0.0 };
    if spec.intensity == 0.0 {
        return 0.0;
    }
    let f0 = f(u);
    let integrand = |z: f64| {
        let comp = if z.abs() <= 1.0 { p * beta * z } else { 0.0 };
        f(u + beta * z) - f0 - comp
    };
    // split where the integrand may jump: ruin, and the compensator cut-offs
    let mut cuts = [f64::NEG_INFINITY, -u / beta, -1.0, 1.0, f64::INFINITY];
    cuts.sort_by(f64::total_cmp);
    let total: f64 = cuts.windows(2).map(|w| spec.law.expect_in(integrand, w[0], w[1], PANELS)).sum();
    spec.intensity * total
}

/// `(L f)(u)` for a test function with `f_u(u) = p`, `f_uu(u) = a`.
pub fn generator<F: Fn(f64) -> f64>(params: &ModelParams, u: f64, f: F, p: f64, a: f64) -> f64 {
    local_generator(params, u, p, a) + jump_generator(params, u, f, p)
}
