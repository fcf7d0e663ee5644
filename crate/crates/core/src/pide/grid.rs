use crate::error::{invalid, Result};

/// Tensor grid: capital nodes `0 = u_0 < ... < u_N = u_max` and uniform time
/// nodes `0 = t_0 < ... < t_M = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    u: Vec<f64>,
    t: Vec<f64>,
}

impl Grid {
    /// `nu` capital intervals and `nt` time intervals, both uniform.
    pub fn uniform(nu: usize, nt: usize, u_max: f64, horizon: f64) -> Result<Grid> {
        check_counts(nu, nt)?;
        let u = (0..=nu).map(|j| u_max * j as f64 / nu as f64).collect();
        Grid::from_nodes(u, time_nodes(nt, horizon))
    }

    /// Capital nodes `u_max · sinh(c j / nu) / sinh(c)`, clustered near zero for `c > 0`.
    pub fn stretched(nu: usize, nt: usize, u_max: f64, horizon: f64, c: f64) -> Result<Grid> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(invalid("stretch", format!("must be finite and >= 0, got {c}")));
        }
        if c == 0.0 {
            return Grid::uniform(nu, nt, u_max, horizon);
        }
        check_counts(nu, nt)?;
        let mut u: Vec<f64> = (0..=nu).map(|j| u_max * (c * j as f64 / nu as f64).sinh() / c.sinh()).collect();
        u[nu] = u_max;
        Grid::from_nodes(u, time_nodes(nt, horizon))
    }

    pub fn from_nodes(u: Vec<f64>, t: Vec<f64>) -> Result<Grid> {
        if u.len() < 5 {
            return Err(invalid("u", "need at least three interior capital nodes"));
        }
        if u[0] != 0.0 {
            return Err(invalid("u", format!("first capital node must be 0, got {}", u[0])));
        }
        if u.windows(2).any(|w| !(w[1] > w[0])) || !u[u.len() - 1].is_finite() {
            return Err(invalid("u", "capital nodes must be finite and strictly increasing"));
        }
        if t.len() < 2 || t[0] != 0.0 || t.windows(2).any(|w| !(w[1] > w[0])) || !t[t.len() - 1].is_finite() {
            return Err(invalid("t", "time nodes must start at 0, increase strictly and end at a finite horizon"));
        }
        Ok(Grid { u, t })
    }

    /// Insert midpoints in both directions; every node of `self` is kept.
    pub fn refined(&self) -> Grid {
        Grid { u: midpoints(&self.u), t: midpoints(&self.t) }
    }

    pub fn u_nodes(&self) -> &[f64] {
        &self.u
    }

    pub fn t_nodes(&self) -> &[f64] {
        &self.t
    }

    /// Number of capital intervals.
    pub fn nu(&self) -> usize {
        self.u.len() - 1
    }

    /// Number of time intervals.
    pub fn nt(&self) -> usize {
        self.t.len() - 1
    }

    pub fn u_max(&self) -> f64 {
        self.u[self.u.len() - 1]
    }

    pub fn horizon(&self) -> f64 {
        self.t[self.t.len() - 1]
    }

    pub fn max_du(&self) -> f64 {
        self.u.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    pub fn max_dt(&self) -> f64 {
        self.t.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Index `j` with `u_j <= u < u_{j+1}`, clamped to `[0, N - 1]`.
    pub fn u_cell(&self, u: f64) -> usize {
        cell(&self.u, u)
    }

    pub fn t_cell(&self, t: f64) -> usize {
        cell(&self.t, t)
    }

    /// The truncation must sit well above the capital levels of interest.
    pub fn check_truncation(&self, u_of_interest: f64) -> Result<()> {
        if self.u_max() > 10.0 * u_of_interest {
            Ok(())
        } else {
            Err(invalid(
                "u_max",
                format!("{} must exceed 10 x the largest capital of interest ({u_of_interest})", self.u_max()),
            ))
        }
    }
}

fn check_counts(nu: usize, nt: usize) -> Result<()> {
    if nu < 4 {
        return Err(invalid("nu", format!("need at least 4 capital intervals, got {nu}")));
    }
    if nt < 1 {
        return Err(invalid("nt", "need at least one time interval"));
    }
    Ok(())
}

fn time_nodes(nt: usize, horizon: f64) -> Vec<f64> {
    let mut t: Vec<f64> = (0..=nt).map(|i| horizon * i as f64 / nt as f64).collect();
    t[nt] = horizon;
    t
}

fn midpoints(x: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * x.len() - 1);
    for w in x.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    out.push(x[x.len() - 1]);
    out
}

fn cell(x: &[f64], v: f64) -> usize {
    x.partition_point(|&n| n <= v).saturating_sub(1).min(x.len() - 2)
}
