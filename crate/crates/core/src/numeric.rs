//! Small numerical helpers shared across modules: compensated summation,
//! Gauss–Legendre panels, the standard normal CDF and stream derivation.

use libm::erfc;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `ln Φ(x)`, accurate far into the lower tail where `Φ` underflows.
pub fn ln_norm_cdf(x: f64) -> f64 {
    if x > -30.0 {
        norm_cdf(x).ln()
    } else {
        let x2 = x * x;
        let series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
        -0.5 * x2 - (-x).ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() + series.ln()
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre rule over `[a, b]` with `panels` equal panels.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    thread_local! {
        static RULE: (Vec<f64>, Vec<f64>) = gauss_legendre(8);
    }
    RULE.with(|(nodes, weights)| {
        let h = (b - a) / panels as f64;
        let mut acc = KahanSum::default();
        for k in 0..panels {
            let mid = a + (k as f64 + 0.5) * h;
            for (x, w) in nodes.iter().zip(weights) {
                acc.add(0.5 * h * w * f(mid + 0.5 * h * x));
            }
        }
        acc.value()
    })
}

/// SplitMix64 finaliser; used to decorrelate user seeds before seeding generators.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE5_E9B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Which random substream of a path a generator feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Substream {
    Investment = 0,
    Business = 1,
    Auxiliary = 2,
}

/// ChaCha stream for `(seed, path, substream)`; a pure function of its arguments,
/// so results do not depend on how paths are scheduled across workers.
pub fn path_stream(seed: u64, path: u64, which: Substream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed));
    rng.set_stream(path.wrapping_mul(4).wrapping_add(which as u64));
    rng
}

/// The three disjoint substreams used by one reserve path.
#[derive(Debug, Clone)]
pub struct PathStreams {
    /// Drives the investment return `R`.
    pub r: ChaCha8Rng,
    /// Drives the business process `P`.
    pub p: ChaCha8Rng,
    /// Bridge interpolation and crossing tests.
    pub aux: ChaCha8Rng,
}

impl PathStreams {
    pub fn new(seed: u64, path: u64) -> Self {
        Self::with_seeds(seed, seed, seed, path)
    }

    /// Independent seeds per substream; lets tests vary one driver while holding the other.
    pub fn with_seeds(r_seed: u64, p_seed: u64, aux_seed: u64, path: u64) -> Self {
        PathStreams {
            r: path_stream(r_seed, path, Substream::Investment),
            p: path_stream(p_seed, path, Substream::Business),
            aux: path_stream(aux_seed, path, Substream::Auxiliary),
        }
    }
}

/// Worker count from `RUIN_PIDE_THREADS`, if set to a positive integer.
pub fn thread_cap_from_env() -> Option<usize> {
    std::env::var("RUIN_PIDE_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()).filter(|&n| n > 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // degree 15 is the exactness limit
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((i - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn composite_rule_on_exponential() {
        let v = integrate(|x| (-x).exp(), 0.0, 5.0, 10);
        assert!((v - (1.0 - (-5.0f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn kahan_beats_naive_on_cancellation() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        let s: KahanSum = xs.iter().copied().collect();
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn ln_norm_cdf_matches_in_overlap_and_tail() {
        for x in [-29.0, -10.0, -1.0, 0.0, 2.0] {
            assert!((ln_norm_cdf(x) - norm_cdf(x).ln()).abs() < 1e-10 * norm_cdf(x).ln().abs().max(1.0));
        }
        // Mills-ratio check at x = -40: ln Φ ≈ -800 - ln 40 - ln sqrt(2π)
        let v = ln_norm_cdf(-40.0);
        assert!((v - (-800.0 - 40f64.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln())).abs() < 1e-3);
    }

    #[test]
    fn streams_are_pure_functions_of_indices() {
        use rand::Rng;
        let mut a = path_stream(7, 42, Substream::Business);
        let mut b = path_stream(7, 42, Substream::Business);
        let mut c = path_stream(7, 42, Substream::Investment);
        let xa: u64 = a.random();
        assert_eq!(xa, b.random::<u64>());
        assert_ne!(xa, c.random::<u64>());
    }
}
