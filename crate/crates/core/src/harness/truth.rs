//! Ground-truth perturbations of the three experiments.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::SimulationGrid;
use crate::recon::FourierCoefficients;

/// `sin πx + sin 2πx - cos 5πx + cos 7πx - 1`.
pub fn smooth_perturbation(x: f64) -> f64 {
    (PI * x).sin() + (2.0 * PI * x).sin() - (5.0 * PI * x).cos() + (7.0 * PI * x).cos() - 1.0
}

/// `χ[-1, -1/6] - χ[-1/6, 1/4]`, with the value at `-1/6` taken from the
/// left piece.
pub fn step_perturbation(x: f64) -> f64 {
    if x <= -1.0 / 6.0 {
        1.0
    } else if x <= 0.25 {
        -1.0
    } else {
        0.0
    }
}

/// Exact `L²(-1, 1)` coefficients of [`step_perturbation`].
pub fn step_coefficients(modes: usize) -> FourierCoefficients {
    let a = (1..=modes)
        .map(|n| {
            let w = n as f64 * PI;
            -((w / 4.0).sin() + 2.0 * (w / 6.0).sin()) / w
        })
        .collect();
    let b = (1..=modes)
        .map(|n| {
            let w = n as f64 * PI;
            (w.cos() + (w / 4.0).cos() - 2.0 * (w / 6.0).cos()) / w
        })
        .collect();
    FourierCoefficients {
        c0: 5.0 / 12.0,
        a,
        b,
    }
}

/// Second-order density term `200 sin 25πx`.
pub fn second_order_term(x: f64) -> f64 {
    200.0 * (25.0 * PI * x).sin()
}

/// `1 + eps rho_dot + eps² rho_ddot`.
pub fn nonlinear_density(x: f64, eps: f64) -> f64 {
    1.0 + eps * smooth_perturbation(x) + eps * eps * second_order_term(x)
}

/// Sampled truth of an experiment: `rho_dot` for 1, the projection
/// `rho_dot_N` for 2, and `1 + (rho - 1) / eps` for 3.
pub fn ground_truth(id: u8, grid: &SimulationGrid, modes: usize, eps: f64) -> Result<Vec<f64>> {
    match id {
        1 => Ok(grid.sample(smooth_perturbation)),
        2 => Ok(crate::recon::synthesize(&step_coefficients(modes), grid)),
        3 => Ok(grid.sample(|x| 1.0 + (nonlinear_density(x, eps) - 1.0) / eps)),
        other => Err(Error::UnknownExperiment(other)),
    }
}

/// Perturbation that generates the data of an experiment.
pub fn data_perturbation(id: u8, grid: &SimulationGrid) -> Result<Vec<f64>> {
    match id {
        1 | 3 => Ok(grid.sample(smooth_perturbation)),
        2 => Ok(grid.sample(step_perturbation)),
        other => Err(Error::UnknownExperiment(other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_values() {
        assert!((smooth_perturbation(0.0) + 1.0).abs() < 1e-15);
        assert_eq!(step_perturbation(-0.5), 1.0);
        assert_eq!(step_perturbation(0.0), -1.0);
        assert_eq!(step_perturbation(0.5), 0.0);
        assert_eq!(step_coefficients(10).c0 / 2.0, 5.0 / 24.0);
    }

    #[test]
    fn step_coefficients_match_quadrature() {
        // fine midpoint rule on the discontinuous profile
        let n = 600_000;
        let h = 2.0 / n as f64;
        let c = step_coefficients(10);
        for j in 1..=10 {
            let w = j as f64 * PI;
            let (mut a, mut b) = (0.0, 0.0);
            for k in 0..n {
                let x = -1.0 + (k as f64 + 0.5) * h;
                a += h * step_perturbation(x) * (w * x).cos();
                b += h * step_perturbation(x) * (w * x).sin();
            }
            assert!((a - c.a[j - 1]).abs() < 1e-5, "a_{j}");
            assert!((b - c.b[j - 1]).abs() < 1e-5, "b_{j}");
        }
    }

    #[test]
    fn unknown_id() {
        let g = SimulationGrid::standard();
        assert!(matches!(
            ground_truth(4, &g, 10, 1e-3),
            Err(Error::UnknownExperiment(4))
        ));
    }
}
