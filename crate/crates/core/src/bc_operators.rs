//! Operators on boundary traces over `[0, T]` and `[0, 2T]`: time reversal
//! `R`, low-pass filter `J`, restriction `P_T`, zero extension `P*_T`, and
//! the connecting operators `K` and `K̇`.

use crate::data::{LinearizedData, ProbeForm, ProbeKey};
use crate::error::{Error, Result};
use crate::grid::{trapezoid, SimulationGrid};
use crate::trace::{check_dt, BoundaryTrace, Side};
use crate::wave_sim::{solve_traces, Medium, Startup};

/// Time discretisation of the boundary cylinder: `T = steps * dt`, and the
/// space grid used by the solves behind `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryOps {
    pub grid: SimulationGrid,
}

impl BoundaryOps {
    /// `grid.t_final` is the control horizon `T`.
    pub fn new(grid: SimulationGrid) -> Self {
        BoundaryOps { grid }
    }

    pub fn horizon(&self) -> f64 {
        self.grid.t_final
    }

    pub fn steps(&self) -> usize {
        self.grid.steps
    }

    pub fn dt(&self) -> f64 {
        self.grid.dt
    }

    /// Grid over `[0, 2T]`.
    pub fn double_grid(&self) -> SimulationGrid {
        self.grid
            .with_steps(2 * self.grid.steps)
            .expect("nonzero step count")
    }

    fn expect_steps(&self, trace: &BoundaryTrace, steps: usize) -> Result<()> {
        check_dt(self.dt(), trace.dt)?;
        if trace.steps() != steps {
            return Err(Error::Horizon {
                expected: steps as f64 * self.dt(),
                found: trace.horizon(),
            });
        }
        Ok(())
    }

    /// `(R u)(t) = u(T - t)` on `[0, T]`.
    pub fn time_reverse(&self, trace: &BoundaryTrace) -> Result<BoundaryTrace> {
        self.expect_steps(trace, self.steps())?;
        let rev = |v: &[f64]| v.iter().rev().copied().collect();
        Ok(BoundaryTrace {
            dt: trace.dt,
            left: rev(&trace.left),
            right: rev(&trace.right),
        })
    }

    /// `(J f)(t) = ½ ∫_t^{2T - t} f`, mapping `[0, 2T]` to `[0, T]`.
    pub fn lowpass_j(&self, trace: &BoundaryTrace) -> Result<BoundaryTrace> {
        let n = self.steps();
        self.expect_steps(trace, 2 * n)?;
        let dt = trace.dt;
        let filter = |v: &[f64]| -> Vec<f64> {
            let mut cum = vec![0.0; v.len()];
            for k in 1..v.len() {
                cum[k] = cum[k - 1] + 0.5 * dt * (v[k - 1] + v[k]);
            }
            (0..=n).map(|i| 0.5 * (cum[2 * n - i] - cum[i])).collect()
        };
        Ok(BoundaryTrace {
            dt,
            left: filter(&trace.left),
            right: filter(&trace.right),
        })
    }

    /// Restriction `P_T` from `[0, 2T]` to `[0, T]`.
    pub fn project(&self, trace: &BoundaryTrace) -> Result<BoundaryTrace> {
        let n = self.steps();
        self.expect_steps(trace, 2 * n)?;
        Ok(BoundaryTrace {
            dt: trace.dt,
            left: trace.left[..=n].to_vec(),
            right: trace.right[..=n].to_vec(),
        })
    }

    /// Zero extension `P*_T` from `[0, T]` to `[0, 2T]`; the sample at `T`
    /// keeps its value.
    pub fn extend_zero(&self, trace: &BoundaryTrace) -> Result<BoundaryTrace> {
        let n = self.steps();
        self.expect_steps(trace, n)?;
        let ext = |v: &[f64]| {
            let mut out = v.to_vec();
            out.resize(2 * n + 1, 0.0);
            out
        };
        Ok(BoundaryTrace {
            dt: trace.dt,
            left: ext(&trace.left),
            right: ext(&trace.right),
        })
    }

    /// `R J P*_T h`, the input of the second term of the connecting operators.
    pub fn reversed_input(&self, h: &BoundaryTrace) -> Result<BoundaryTrace> {
        self.time_reverse(&self.lowpass_j(&self.extend_zero(h)?)?)
    }

    /// `K h = J Λ P*_T h - R Λ_T R J P*_T h` for the medium `medium`.
    pub fn apply_k(&self, medium: &Medium, h: &BoundaryTrace) -> Result<BoundaryTrace> {
        let long = self.double_grid();
        let extended = solve_traces(&long, medium, &self.extend_zero(h)?, Startup::Window, &[])?;
        let reversed_in = self.reversed_input(h)?;
        let reversed = solve_traces(&self.grid, medium, &reversed_in, Startup::Initial, &[])?;
        self.lowpass_j(&extended.trace)?
            .sub(&self.time_reverse(&reversed.trace)?)
    }

    /// `K̇ h = J Λ̇ P*_T h - R Λ̇_T R J P*_T h` with `Λ̇` supplied by `data`
    /// under the probe label `label`. Also returns the `[0, 2T]` response
    /// `Λ̇ P*_T h`.
    pub fn apply_kdot_with(
        &self,
        data: &dyn LinearizedData,
        label: &str,
        h: &BoundaryTrace,
    ) -> Result<KdotOutput> {
        let extended_in = self.extend_zero(h)?;
        let reversed_in = self.reversed_input(h)?;
        let extended = data.measure(&ProbeKey::new(label, ProbeForm::Extended), &extended_in)?;
        self.expect_steps(&extended, 2 * self.steps())?;
        let reversed = data.measure(&ProbeKey::new(label, ProbeForm::Reversed), &reversed_in)?;
        self.expect_steps(&reversed, self.steps())?;
        let kdot = self
            .lowpass_j(&extended)?
            .sub(&self.time_reverse(&reversed)?)?;
        Ok(KdotOutput { kdot, extended })
    }

    /// `K̇ h` for a simulated linearized map about `background` along `rho_dot`.
    pub fn apply_kdot(
        &self,
        background: &Medium,
        rho_dot: &[f64],
        h: &BoundaryTrace,
    ) -> Result<BoundaryTrace> {
        let data =
            crate::data::SimulatedData::new(self.grid, background.clone(), rho_dot.to_vec())?;
        Ok(self.apply_kdot_with(&data, "h", h)?.kdot)
    }

    /// `(a, b)_{L²((0, T) x ∂Ω)}` with the trapezoid rule in time.
    pub fn boundary_inner_product(&self, a: &BoundaryTrace, b: &BoundaryTrace) -> Result<f64> {
        boundary_inner_product(a, b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KdotOutput {
    pub kdot: BoundaryTrace,
    /// `Λ̇ P*_T h` on `[0, 2T]`.
    pub extended: BoundaryTrace,
}

/// Sum over both boundary points of the trapezoid integral of `a b`.
pub fn boundary_inner_product(a: &BoundaryTrace, b: &BoundaryTrace) -> Result<f64> {
    a.check_same_grid(b)?;
    let side = |x: &[f64], y: &[f64]| {
        let prod: Vec<f64> = x.iter().zip(y).map(|(p, q)| p * q).collect();
        trapezoid(&prod, a.dt)
    };
    Ok(side(&a.left, &b.left) + side(&a.right, &b.right))
}

/// `a(-1) b(-1) + a(1) b(1)` for boundary values at a single time.
pub fn boundary_pairing(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.0 + a.1 * b.1
}

/// [`boundary_pairing`] of two traces at sample `n`.
pub fn boundary_pairing_at(a: &BoundaryTrace, b: &BoundaryTrace, n: usize) -> f64 {
    boundary_pairing(a.at(n), b.at(n))
}

/// Boundary values `(f(T, -1), f(T, 1))` of an analytic control.
pub fn control_at(f: &dyn crate::control::Control, t: f64) -> (f64, f64) {
    (f.value(t, Side::Left), f.value(t, Side::Right))
}
