use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const X_MIN: f64 = -1.0;
pub const X_MAX: f64 = 1.0;
pub const DEFAULT_CFL_MAX: f64 = 0.1;

/// Uniform space grid `x_j = -1 + j dx`, `j = 0..=nx`, paired with a uniform
/// time grid on `[0, t_final]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationGrid {
    pub nx: usize,
    pub dx: f64,
    pub dt: f64,
    pub t_final: f64,
    pub steps: usize,
    pub cfl_max: f64,
}

impl SimulationGrid {
    /// Grid with `dt = dt_ratio * dx`.
    pub fn new(nx: usize, t_final: f64, dt_ratio: f64) -> Result<Self> {
        if nx < 8 {
            return Err(Error::InvalidGrid(format!(
                "need at least 8 cells, got {nx}"
            )));
        }
        let dx = (X_MAX - X_MIN) / nx as f64;
        Self::with_dt(nx, t_final, dt_ratio * dx)
    }

    pub fn with_dt(nx: usize, t_final: f64, dt: f64) -> Result<Self> {
        if nx < 8 {
            return Err(Error::InvalidGrid(format!(
                "need at least 8 cells, got {nx}"
            )));
        }
        let dx = (X_MAX - X_MIN) / nx as f64;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "time step must be positive, got {dt}"
            )));
        }
        if !(t_final > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "horizon must be positive, got {t_final}"
            )));
        }
        let steps = (t_final / dt).round() as usize;
        if steps == 0 || (steps as f64 * dt - t_final).abs() > 1e-9 * t_final {
            return Err(Error::InvalidGrid(format!(
                "horizon {t_final} is not a multiple of dt = {dt}"
            )));
        }
        Ok(SimulationGrid {
            nx,
            dx,
            dt,
            t_final,
            steps,
            cfl_max: DEFAULT_CFL_MAX,
        })
    }

    /// Default grid: 500 cells, T = 5, dt = 0.1 dx.
    pub fn standard() -> Self {
        Self::new(500, 5.0, 0.1).expect("default grid is valid")
    }

    pub fn with_cfl_max(mut self, cfl_max: f64) -> Self {
        self.cfl_max = cfl_max;
        self
    }

    /// Same space grid and time step over a different horizon.
    pub fn with_horizon(&self, t_final: f64) -> Result<Self> {
        let mut g = Self::with_dt(self.nx, t_final, self.dt)?;
        g.cfl_max = self.cfl_max;
        Ok(g)
    }

    /// Same space grid and time step over `steps` time steps.
    pub fn with_steps(&self, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidGrid("need at least one time step".into()));
        }
        Ok(SimulationGrid {
            t_final: steps as f64 * self.dt,
            steps,
            ..*self
        })
    }

    pub fn nodes(&self) -> usize {
        self.nx + 1
    }

    /// Time samples including `t = 0`.
    pub fn samples(&self) -> usize {
        self.steps + 1
    }

    pub fn x(&self, j: usize) -> f64 {
        X_MIN + j as f64 * self.dx
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nodes()).map(|j| self.x(j)).collect()
    }

    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.nodes()).map(|j| f(self.x(j))).collect()
    }

    pub fn cfl_ratio(&self) -> f64 {
        self.dt / self.dx
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CflReport {
    pub ratio: f64,
    pub max: f64,
    pub passed: bool,
}

/// Fails iff `dt / dx > cfl_max`, with a relative slack of 1e-12 for the
/// rounding in `dt = ratio * dx`.
pub fn check_cfl(grid: &SimulationGrid) -> Result<CflReport> {
    if !(grid.dt > 0.0) || !(grid.dx > 0.0) {
        return Err(Error::InvalidGrid(format!(
            "dx = {} and dt = {} must be positive",
            grid.dx, grid.dt
        )));
    }
    let ratio = grid.cfl_ratio();
    Ok(CflReport {
        ratio,
        max: grid.cfl_max,
        passed: ratio <= grid.cfl_max * (1.0 + 1e-12),
    })
}

pub(crate) fn require_cfl(grid: &SimulationGrid) -> Result<()> {
    let report = check_cfl(grid)?;
    if report.passed {
        Ok(())
    } else {
        Err(Error::Cfl {
            ratio: report.ratio,
            max: report.max,
        })
    }
}

/// Composite trapezoid rule on uniformly spaced samples.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => h * (0.5 * (values[0] + values[n - 1]) + values[1..n - 1].iter().sum::<f64>()),
    }
}

/// `(a, b)_{L^2(-1, 1)}` by the trapezoid rule on grid nodes.
pub fn volume_inner(a: &[f64], b: &[f64], dx: f64) -> f64 {
    let prod: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    trapezoid(&prod, dx)
}

pub fn volume_norm(a: &[f64], dx: f64) -> f64 {
    volume_inner(a, a, dx).sqrt()
}

/// `||a - b|| / ||b||` in the trapezoid L^2 norm.
pub fn relative_l2(a: &[f64], b: &[f64], dx: f64) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    volume_norm(&diff, dx) / volume_norm(b, dx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_grid() {
        let g = SimulationGrid::standard();
        assert_eq!(g.nx, 500);
        assert!((g.dx - 0.004).abs() < 1e-15);
        assert!((g.dt - 0.0004).abs() < 1e-15);
        assert_eq!(g.steps, 12_500);
        assert_eq!(g.with_horizon(10.0).unwrap().steps, 25_000);
    }

    #[test]
    fn cfl_default_point_passes() {
        let g = SimulationGrid::with_dt(500, 5.0, 0.0004).unwrap();
        let r = check_cfl(&g).unwrap();
        assert!(r.passed);
        assert!((r.ratio - 0.1).abs() < 1e-12);
    }

    #[test]
    fn cfl_unit_ratio_fails() {
        let g = SimulationGrid::new(500, 5.0, 1.0).unwrap();
        assert!(!check_cfl(&g).unwrap().passed);
        assert!(matches!(require_cfl(&g), Err(Error::Cfl { .. })));
    }

    #[test]
    fn zero_dt_is_invalid() {
        assert!(matches!(
            SimulationGrid::with_dt(500, 5.0, 0.0),
            Err(Error::InvalidGrid(_))
        ));
        let mut g = SimulationGrid::standard();
        g.dt = 0.0;
        assert!(matches!(check_cfl(&g), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn trapezoid_linear_exact() {
        let h = 0.01;
        let v: Vec<f64> = (0..=100).map(|i| 3.0 * i as f64 * h).collect();
        assert!((trapezoid(&v, h) - 1.5).abs() < 1e-12);
    }
}
