use crate::error::{invalid, Result};
use crate::levy::{PayoffSpec, Penalty};

use super::Grid;

/// Terminal row at `t = T` plus boundary columns at `u = 0` and `u = u_max`.
/// Boundary columns win at the two corners.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub terminal: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoundaryData {
    /// Data of the ruin functional: nothing is paid at `T` or far from ruin,
    /// `V(0)` is paid at `u = 0`.
    pub fn for_payoff(grid: &Grid, payoff: &PayoffSpec) -> BoundaryData {
        let m = grid.t_nodes().len();
        BoundaryData {
            terminal: vec![0.0; grid.u_nodes().len()],
            lower: vec![payoff.value_at_ruin(0.0); m],
            upper: vec![0.0; m],
        }
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: &Grid, f: F) -> BoundaryData {
        let (u, t) = (grid.u_nodes(), grid.t_nodes());
        BoundaryData {
            terminal: u.iter().map(|&u| f(grid.horizon(), u)).collect(),
            lower: t.iter().map(|&t| f(t, 0.0)).collect(),
            upper: t.iter().map(|&t| f(t, grid.u_max())).collect(),
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if self.terminal.len() != grid.u_nodes().len() {
            return Err(invalid("terminal", "length must match the capital grid"));
        }
        if self.lower.len() != grid.t_nodes().len() || self.upper.len() != grid.t_nodes().len() {
            return Err(invalid("boundary", "lengths must match the time grid"));
        }
        let all = self.terminal.iter().chain(&self.lower).chain(&self.upper);
        if let Some(v) = all.into_iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(invalid("boundary", format!("data must lie in [0, 1], found {v}")));
        }
        Ok(())
    }
}

/// How the field is continued to `y <= 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum RuinedValue {
    /// The lower boundary value at the same time.
    Boundary,
    /// Immediate ruin with deficit `-y` pays `w(-y)`.
    Penalty(Penalty),
}

impl RuinedValue {
    pub fn for_payoff(payoff: &PayoffSpec) -> RuinedValue {
        match payoff {
            PayoffSpec::DeficitPenalty { penalty } => RuinedValue::Penalty(penalty.clone()),
            _ => RuinedValue::Boundary,
        }
    }
}

/// Node values `ψ(t_i, u_j)` with the data needed to evaluate off the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    grid: Grid,
    values: Vec<f64>,
    data: BoundaryData,
    ruined: RuinedValue,
}

impl SolutionField {
    /// `values` is row-major in time: entry `i * (N + 1) + j` is `ψ(t_i, u_j)`.
    pub fn from_parts(grid: Grid, values: Vec<f64>, data: BoundaryData, ruined: RuinedValue) -> Result<SolutionField> {
        if values.len() != grid.u_nodes().len() * grid.t_nodes().len() {
            return Err(invalid("values", "length must equal the number of grid nodes"));
        }
        if data.lower.len() != grid.t_nodes().len() || data.upper.len() != grid.t_nodes().len() {
            return Err(invalid("boundary", "lengths must match the time grid"));
        }
        Ok(SolutionField { grid, values, data, ruined })
    }

    /// Sample `f` at every node; boundary data is read off the samples.
    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: Grid, ruined: RuinedValue, f: F) -> SolutionField {
        let mut values = Vec::with_capacity(grid.u_nodes().len() * grid.t_nodes().len());
        for &t in grid.t_nodes() {
            values.extend(grid.u_nodes().iter().map(|&u| f(t, u)));
        }
        let data = BoundaryData::from_fn(&grid, &f);
        SolutionField { grid, values, data, ruined }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn data(&self) -> &BoundaryData {
        &self.data
    }

    pub fn ruined(&self) -> &RuinedValue {
        &self.ruined
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.u_nodes().len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.grid.u_nodes().len();
        &self.values[i * n..(i + 1) * n]
    }

    /// Value on `y <= 0` at time `t`.
    pub fn ruined_value(&self, t: f64, y: f64) -> f64 {
        match &self.ruined {
            RuinedValue::Boundary => self.time_interp(&self.data.lower, t),
            RuinedValue::Penalty(w) => w.eval(-y),
        }
    }

    pub fn upper_value(&self, t: f64) -> f64 {
        self.time_interp(&self.data.upper, t)
    }

    /// Bilinear interpolation on the grid, continued by the ruined value for
    /// `u <= 0` and the upper boundary for `u >= u_max`.
    pub fn interpolate(&self, t: f64, u: f64) -> f64 {
        if u <= 0.0 {
            return self.ruined_value(t, u);
        }
        if u >= self.grid.u_max() {
            return self.upper_value(t);
        }
        let (us, ts) = (self.grid.u_nodes(), self.grid.t_nodes());
        let t = t.clamp(0.0, self.grid.horizon());
        let (i, j) = (self.grid.t_cell(t), self.grid.u_cell(u));
        let a = (t - ts[i]) / (ts[i + 1] - ts[i]);
        let b = (u - us[j]) / (us[j + 1] - us[j]);
        let lo = (1.0 - b) * self.value(i, j) + b * self.value(i, j + 1);
        let hi = (1.0 - b) * self.value(i + 1, j) + b * self.value(i + 1, j + 1);
        (1.0 - a) * lo + a * hi
    }

    /// Linear interpolation in `u` along the time row `i`, with the same continuation.
    pub fn interpolate_row(&self, i: usize, u: f64) -> f64 {
        let t = self.grid.t_nodes()[i];
        if u <= 0.0 {
            return self.ruined_value(t, u);
        }
        if u >= self.grid.u_max() {
            return self.data.upper[i];
        }
        let us = self.grid.u_nodes();
        let j = self.grid.u_cell(u);
        let b = (u - us[j]) / (us[j + 1] - us[j]);
        (1.0 - b) * self.value(i, j) + b * self.value(i, j + 1)
    }

    /// Bilinear interpolation error estimate `⅛ (Δu² |ψ_uu| + Δt² |ψ_tt|)`, maximised
    /// over nodes of `[t0, t1] × [u0, u1]` from second differences.
    pub fn interpolation_bound(&self, t0: f64, t1: f64, u0: f64, u1: f64) -> f64 {
        let (ts, us) = (self.grid.t_nodes(), self.grid.u_nodes());
        let mut worst = 0.0f64;
        for i in 1..ts.len() - 1 {
            if ts[i + 1] < t0 || ts[i - 1] > t1 {
                continue;
            }
            let (km, kp) = (ts[i] - ts[i - 1], ts[i + 1] - ts[i]);
            for j in 1..us.len() - 1 {
                if us[j + 1] < u0 || us[j - 1] > u1 {
                    continue;
                }
                let (hm, hp) = (us[j] - us[j - 1], us[j + 1] - us[j]);
                let v = self.value(i, j);
                let uu = 2.0 * (hm * self.value(i, j + 1) - (hm + hp) * v + hp * self.value(i, j - 1))
                    / (hm * hp * (hm + hp));
                let tt = 2.0 * (km * self.value(i + 1, j) - (km + kp) * v + kp * self.value(i - 1, j))
                    / (km * kp * (km + kp));
                let h = hm.max(hp);
                let k = km.max(kp);
                worst = worst.max(0.125 * (h * h * uu.abs() + k * k * tt.abs()));
            }
        }
        worst
    }

    fn time_interp(&self, col: &[f64], t: f64) -> f64 {
        let ts = self.grid.t_nodes();
        let t = t.clamp(0.0, self.grid.horizon());
        let i = self.grid.t_cell(t);
        let a = (t - ts[i]) / (ts[i + 1] - ts[i]);
        (1.0 - a) * col[i] + a * col[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_reproduces_bilinear_functions() {
        let g = Grid::stretched(10, 5, 10.0, 1.0, 2.0).unwrap();
        let f = SolutionField::from_fn(g, RuinedValue::Boundary, |t, u| 0.1 + 0.02 * u + 0.3 * t + 0.01 * t * u);
        for (t, u) in [(0.13, 1.7), (0.5, 9.9), (0.99, 0.01)] {
            let exact = 0.1 + 0.02 * u + 0.3 * t + 0.01 * t * u;
            assert!((f.interpolate(t, u) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn continuation_outside_grid() {
        let g = Grid::uniform(8, 4, 8.0, 1.0).unwrap();
        let f = SolutionField::from_fn(g.clone(), RuinedValue::Boundary, |_, u| (1.0 - u / 8.0).max(0.0));
        assert_eq!(f.interpolate(0.3, -2.0), 1.0);
        assert_eq!(f.interpolate(0.3, 20.0), 0.0);
        let w = Penalty::Exponential { rate: 1.0 };
        let f = SolutionField::from_fn(g, RuinedValue::Penalty(w), |_, _| 0.5);
        assert!((f.interpolate(0.0, -1.0) - (-1.0f64).exp()).abs() < 1e-15);
    }
}
