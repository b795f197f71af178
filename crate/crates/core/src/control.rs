//! Boundary controls for the unit-speed background, built by back-propagating
//! a Helmholtz target with the D'Alembert formula.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{relative_l2, SimulationGrid};
use crate::trace::{BoundaryTrace, Side};
use crate::wave_sim::{solve_traces, Medium, Startup};

/// Half-width of the support of the extended target.
pub const EXTENSION_RADIUS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TargetKind {
    Cos,
    Sin,
}

/// `phi(x) = amplitude * cos(j pi x / 2)` or `amplitude * sin(j pi x / 2)`,
/// solving `phi'' + lambda phi = 0` with `lambda = j^2 pi^2 / 4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HelmholtzTarget {
    pub kind: TargetKind,
    pub mode: u32,
    pub amplitude: f64,
}

impl HelmholtzTarget {
    pub fn new(kind: TargetKind, mode: u32) -> Self {
        HelmholtzTarget {
            kind,
            mode,
            amplitude: 1.0,
        }
    }

    pub fn cos(mode: u32) -> Self {
        Self::new(TargetKind::Cos, mode)
    }

    pub fn sin(mode: u32) -> Self {
        Self::new(TargetKind::Sin, mode)
    }

    pub fn zero() -> Self {
        HelmholtzTarget {
            kind: TargetKind::Cos,
            mode: 1,
            amplitude: 0.0,
        }
    }

    pub fn wavenumber(&self) -> f64 {
        f64::from(self.mode) * PI / 2.0
    }

    pub fn lambda(&self) -> f64 {
        self.wavenumber().powi(2)
    }

    /// `[phi, phi', phi'', phi''']` at `x` (valid on all of the real line).
    pub fn derivs(&self, x: f64) -> [f64; 4] {
        let k = self.wavenumber();
        let a = self.amplitude;
        let (s, c) = (k * x).sin_cos();
        match self.kind {
            TargetKind::Cos => [a * c, -a * k * s, -a * k * k * c, a * k * k * k * s],
            TargetKind::Sin => [a * s, a * k * c, -a * k * k * s, -a * k * k * k * c],
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivs(x)[0]
    }

    pub fn sample(&self, grid: &SimulationGrid) -> Vec<f64> {
        grid.sample(|x| self.value(x))
    }
}

/// `[B, B', B'', B''']` of `B(s) = exp(1 - 1/(1 - s^4))` for `|s| < 1`.
/// `B(0) = 1` with vanishing first three derivatives, and `B` is flat at
/// `|s| = 1`.
pub fn bump_derivs(s: f64) -> [f64; 4] {
    let s2 = s * s;
    let s4 = s2 * s2;
    let w = 1.0 - s4;
    // exp(1 - 1/w) < 1e-300 long before w^-4 overflows
    if w <= 1.5e-3 {
        return [0.0; 4];
    }
    let b = (1.0 - 1.0 / w).exp();
    let (w2, w3, w4) = (w * w, w * w * w, w * w * w * w);
    let s3 = s2 * s;
    let s5 = s4 * s;
    let s6 = s3 * s3;
    let s9 = s6 * s3;
    let g1 = -4.0 * s3 / w2;
    let g2 = -12.0 * s2 / w2 - 32.0 * s6 / w3;
    let g3 = -24.0 * s / w2 - 288.0 * s5 / w3 - 384.0 * s9 / w4;
    [
        b,
        b * g1,
        b * (g2 + g1 * g1),
        b * (g3 + 3.0 * g1 * g2 + g1 * g1 * g1),
    ]
}

/// The C³ extension of a target: the target on `[-1, 1]`, the target times a
/// flat bump on `(-2, -1)` and `(1, 2)`, zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedTarget {
    pub target: HelmholtzTarget,
}

pub fn c3_extension(target: HelmholtzTarget) -> ExtendedTarget {
    ExtendedTarget { target }
}

impl ExtendedTarget {
    pub fn derivs(&self, x: f64) -> [f64; 4] {
        if x.abs() <= 1.0 {
            return self.target.derivs(x);
        }
        if x.abs() >= EXTENSION_RADIUS {
            return [0.0; 4];
        }
        let s = if x < 0.0 { x + 1.0 } else { x - 1.0 };
        let p = self.target.derivs(x);
        let b = bump_derivs(s);
        [
            p[0] * b[0],
            p[1] * b[0] + p[0] * b[1],
            p[2] * b[0] + 2.0 * p[1] * b[1] + p[0] * b[2],
            p[3] * b[0] + 3.0 * p[2] * b[1] + 3.0 * p[1] * b[2] + p[0] * b[3],
        ]
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivs(x)[0]
    }
}

/// Neumann boundary control with closed-form value and second time
/// derivative on `[0, T]`.
pub trait Control: Sync {
    fn value(&self, t: f64, side: Side) -> f64;
    fn second_derivative(&self, t: f64, side: Side) -> f64;
    /// Control horizon `T`.
    fn horizon(&self) -> f64;
    /// Spectral parameter of the state the control steers to.
    fn lambda(&self) -> f64;

    /// Samples `f` on `[0, T]` with step `dt`.
    fn sample(&self, dt: f64, steps: usize) -> BoundaryTrace {
        BoundaryTrace::from_fn(dt, steps, |t, s| self.value(t, s))
    }

    /// Samples the probe `f_tt + lambda f` on `[0, T]`.
    fn sample_probe(&self, dt: f64, steps: usize) -> BoundaryTrace {
        let lambda = self.lambda();
        BoundaryTrace::from_fn(dt, steps, |t, s| {
            self.second_derivative(t, s) + lambda * self.value(t, s)
        })
    }
}

/// `f(t, ±1) = ±½ [φ̃'(x + t - T) + φ̃'(x - t + T)]` at `x = ±1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlFunction {
    pub target: HelmholtzTarget,
    pub horizon: f64,
    extension: ExtendedTarget,
}

impl ControlFunction {
    /// First time at which the control can be nonzero.
    pub fn support_start(&self) -> f64 {
        self.horizon - 1.0 - EXTENSION_RADIUS
    }

    fn dalembert(&self, t: f64, side: Side, order: usize) -> f64 {
        let x = side.x();
        let a = self.extension.derivs(x + t - self.horizon)[order];
        let b = self.extension.derivs(x - t + self.horizon)[order];
        side.normal() * 0.5 * (a + b)
    }
}

impl Control for ControlFunction {
    fn value(&self, t: f64, side: Side) -> f64 {
        self.dalembert(t, side, 1)
    }

    fn second_derivative(&self, t: f64, side: Side) -> f64 {
        self.dalembert(t, side, 3)
    }

    fn horizon(&self) -> f64 {
        self.horizon
    }

    fn lambda(&self) -> f64 {
        self.target.lambda()
    }
}

/// Control steering the unit-speed, zero-potential background to `target`
/// at time `horizon`. Needs `horizon >= 3` so that the back-propagated
/// extension has left `[-1, 1]` at `t = 0`.
pub fn dalembert_control(target: HelmholtzTarget, horizon: f64) -> Result<ControlFunction> {
    let min = 1.0 + EXTENSION_RADIUS;
    if !(horizon >= min) {
        return Err(Error::ControlSupport { horizon, min });
    }
    Ok(ControlFunction {
        target,
        horizon,
        extension: c3_extension(target),
    })
}

/// Linear combination of controls sharing one spectral parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedControl {
    pub terms: Vec<(f64, ControlFunction)>,
    pub lambda: f64,
    pub horizon: f64,
}

impl Control for CombinedControl {
    fn value(&self, t: f64, side: Side) -> f64 {
        self.terms.iter().map(|(c, f)| c * f.value(t, side)).sum()
    }

    fn second_derivative(&self, t: f64, side: Side) -> f64 {
        self.terms
            .iter()
            .map(|(c, f)| c * f.second_derivative(t, side))
            .sum()
    }

    fn horizon(&self) -> f64 {
        self.horizon
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Sum of smooth compactly supported pulses
/// `amp * exp(1 - 1/(1 - s^2))`, `s = (t - center) / width`, on chosen sides.
/// Used as a generic admissible control.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseControl {
    pub pulses: Vec<Pulse>,
    pub horizon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub side: Side,
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
}

impl Pulse {
    fn derivs(&self, t: f64) -> [f64; 3] {
        let s = (t - self.center) / self.width;
        let w = 1.0 - s * s;
        if w <= 2e-3 {
            return [0.0; 3];
        }
        let b = self.amplitude * (1.0 - 1.0 / w).exp();
        let g1 = -2.0 * s / (w * w);
        let g2 = -2.0 / (w * w) - 8.0 * s * s / (w * w * w);
        let iw = 1.0 / self.width;
        [b, b * g1 * iw, b * (g2 + g1 * g1) * iw * iw]
    }
}

impl Control for PulseControl {
    fn value(&self, t: f64, side: Side) -> f64 {
        self.pulses
            .iter()
            .filter(|p| p.side == side)
            .map(|p| p.derivs(t)[0])
            .sum()
    }

    fn second_derivative(&self, t: f64, side: Side) -> f64 {
        self.pulses
            .iter()
            .filter(|p| p.side == side)
            .map(|p| p.derivs(t)[2])
            .sum()
    }

    fn horizon(&self) -> f64 {
        self.horizon
    }

    fn lambda(&self) -> f64 {
        0.0
    }
}

/// Relative L² error of `u_0^f(T)` against the target, solving on the
/// unit-density, zero-potential background.
pub fn verify_control(grid: &SimulationGrid, control: &ControlFunction) -> Result<f64> {
    let grid = grid.with_horizon(control.horizon)?;
    let medium = Medium::constant(&grid, 1.0)?;
    let f = control.sample(grid.dt, grid.steps);
    let out = solve_traces(&grid, &medium, &f, Startup::Window, &[grid.steps])?;
    let target = control.target.sample(&grid);
    if control.target.amplitude == 0.0 {
        return Ok(crate::grid::volume_norm(&out.snapshots[0], grid.dx));
    }
    Ok(relative_l2(&out.snapshots[0], &target, grid.dx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn helmholtz_residual() {
        for kind in [TargetKind::Cos, TargetKind::Sin] {
            for j in 1..=10 {
                let t = HelmholtzTarget::new(kind, j);
                for i in 0..=200 {
                    let x = -1.0 + i as f64 * 0.01;
                    let d = t.derivs(x);
                    assert!((d[2] + t.lambda() * d[0]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let t = HelmholtzTarget::sin(3);
        let h = 1e-4;
        for x in [-0.7, 0.2, 1.5] {
            let d = t.derivs(x);
            let fd = (t.derivs(x + h)[2] - t.derivs(x - h)[2]) / (2.0 * h);
            assert!((fd - d[3]).abs() < 1e-5 * (1.0 + d[3].abs()));
        }
    }

    #[test]
    fn bump_value_at_midflank() {
        let b = bump_derivs(-0.5)[0];
        let expected = (1.0f64 - 1.0 / (1.0 - 0.0625)).exp();
        assert!((b - expected).abs() < 1e-15);
        assert!((b - (-1.0f64 / 15.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn bump_derivatives_match_differences() {
        let h = 1e-5;
        for s in [-0.9, -0.6, -0.3, 0.1, 0.45, 0.8] {
            let d = bump_derivs(s);
            for k in 0..3 {
                let fd = (bump_derivs(s + h)[k] - bump_derivs(s - h)[k]) / (2.0 * h);
                assert!(
                    (fd - d[k + 1]).abs() < 1e-5 * (1.0 + d[k + 1].abs()),
                    "s {s} order {}: {fd} vs {}",
                    k + 1,
                    d[k + 1]
                );
            }
        }
    }

    #[test]
    fn extension_identity_inside() {
        let e = c3_extension(HelmholtzTarget::cos(3));
        assert_eq!(e.value(0.0), 1.0);
        assert_eq!(e.value(0.37), HelmholtzTarget::cos(3).value(0.37));
    }

    #[test]
    fn extension_vanishes_at_support_edge() {
        let e = c3_extension(HelmholtzTarget::sin(5));
        for x in [-2.0, 2.0, -1.9999, 1.9999] {
            let d = e.derivs(x);
            assert!(d[0].abs() < 1e-8 && d[1].abs() < 1e-8, "{x}: {d:?}");
        }
    }

    #[test]
    fn extension_is_c3_at_junctions() {
        for target in [
            HelmholtzTarget::cos(1),
            HelmholtzTarget::sin(4),
            HelmholtzTarget::cos(9),
        ] {
            let e = c3_extension(target);
            for x0 in [-2.0, -1.0, 1.0, 2.0] {
                let eps = 1e-7;
                let a = e.derivs(x0 - eps);
                let b = e.derivs(x0 + eps);
                for k in 0..4 {
                    let scale = 1.0 + a[k].abs();
                    assert!(
                        (a[k] - b[k]).abs()
                            < 1e-6 * scale * 100.0 * f64::from(target.mode).powi(k as i32),
                        "x0 {x0}, order {k}: {} vs {}",
                        a[k],
                        b[k]
                    );
                }
            }
        }
    }

    #[test]
    fn control_support_and_endpoint() {
        for target in [HelmholtzTarget::cos(2), HelmholtzTarget::sin(7)] {
            let f = dalembert_control(target, 5.0).unwrap();
            assert_eq!(f.support_start(), 2.0);
            for i in 0..=2000 {
                let t = i as f64 * 1e-3;
                assert_eq!(f.value(t, Side::Left), 0.0);
                assert_eq!(f.value(t, Side::Right), 0.0);
            }
            let phi = target.derivs(1.0)[1];
            assert!((f.value(5.0, Side::Right) - phi).abs() < 1e-14);
            let phi_left = target.derivs(-1.0)[1];
            assert!((f.value(5.0, Side::Left) + phi_left).abs() < 1e-14);
        }
    }

    #[test]
    fn short_horizon_rejected() {
        assert!(matches!(
            dalembert_control(HelmholtzTarget::cos(1), 2.5),
            Err(Error::ControlSupport { .. })
        ));
    }

    fn second_difference_error(f: &ControlFunction, side: Side, dt: f64) -> f64 {
        let n = (5.0 / dt).round() as usize;
        let vals: Vec<f64> = (0..=n).map(|i| f.value(i as f64 * dt, side)).collect();
        let (mut num, mut den) = (0.0, 0.0);
        for i in 1..n {
            let fd = (vals[i + 1] - 2.0 * vals[i] + vals[i - 1]) / (dt * dt);
            let exact = f.second_derivative(i as f64 * dt, side);
            num += (fd - exact).powi(2);
            den += exact * exact;
        }
        (num / den).sqrt()
    }

    #[test]
    fn second_derivative_matches_differences() {
        // the centred difference carries dt^2 f''''/12, which for mode 1 is
        // 1.4e-4 at dt = 4e-4; the halving ratio pins it as truncation error
        for target in [HelmholtzTarget::cos(1), HelmholtzTarget::sin(6)] {
            let f = dalembert_control(target, 5.0).unwrap();
            for side in Side::BOTH {
                let coarse = second_difference_error(&f, side, 4e-4);
                let fine = second_difference_error(&f, side, 2e-4);
                assert!(coarse < 2e-4, "{target:?}: {coarse}");
                let ratio = coarse / fine;
                assert!((3.8..4.2).contains(&ratio), "{target:?}: ratio {ratio}");
            }
        }
        let f = dalembert_control(HelmholtzTarget::sin(6), 5.0).unwrap();
        assert!(second_difference_error(&f, Side::Right, 4e-4) < 1e-4);
    }

    #[test]
    fn pulse_second_derivative() {
        let p = PulseControl {
            pulses: vec![Pulse {
                side: Side::Left,
                center: 1.0,
                width: 0.4,
                amplitude: 2.0,
            }],
            horizon: 5.0,
        };
        let h = 1e-4;
        for t in [0.7, 0.9, 1.05, 1.3] {
            let fd = (p.value(t + h, Side::Left) - 2.0 * p.value(t, Side::Left)
                + p.value(t - h, Side::Left))
                / (h * h);
            let exact = p.second_derivative(t, Side::Left);
            assert!(
                (fd - exact).abs() < 1e-4 * (1.0 + exact.abs()),
                "{fd} {exact}"
            );
        }
        assert_eq!(p.value(1.0, Side::Right), 0.0);
        assert_eq!(p.value(0.5, Side::Left), 0.0);
    }

    #[test]
    fn zero_target_zero_control() {
        let f = dalembert_control(HelmholtzTarget::zero(), 5.0).unwrap();
        let tr = f.sample(0.01, 500);
        assert_eq!(tr.max_abs(), 0.0);
        let g = SimulationGrid::new(100, 5.0, 0.1).unwrap();
        assert_eq!(verify_control(&g, &f).unwrap(), 0.0);
    }
}
