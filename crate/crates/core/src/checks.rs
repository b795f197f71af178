//! Two-sided numerical checks of the boundary identities, the linearized
//! identity, and the derivative of the ND map.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bc_operators::{boundary_inner_product, BoundaryOps};
use crate::control::{
    dalembert_control, CombinedControl, Control, HelmholtzTarget, Pulse, PulseControl,
};
use crate::data::SimulatedData;
use crate::error::{Error, Result};
use crate::fd_kernels::{apply_spatial_operator, populate_ghosts, with_ghost_slots};
use crate::grid::{volume_inner, SimulationGrid};
use crate::recon::pairing_value;
use crate::trace::{BoundaryTrace, Side};
use crate::wave_sim::{linearized_nd_map, nd_map, solve_traces, Medium, Startup};

/// Two evaluations of one quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl IdentityCheck {
    /// `|lhs - rhs| / max(|lhs|, |rhs|)`, zero when both vanish.
    pub fn residual(&self) -> f64 {
        let scale = self.lhs.abs().max(self.rhs.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.lhs - self.rhs).abs() / scale
        }
    }
}

/// `max |lhs - rhs|` over a set of checks relative to the largest `|lhs|`.
/// Pairs whose exact value is near zero then count at the scale of the set.
pub fn set_residual(checks: &[IdentityCheck]) -> f64 {
    let scale = checks.iter().fold(0.0f64, |a, c| a.max(c.lhs.abs()));
    let err = checks
        .iter()
        .fold(0.0f64, |a, c| a.max((c.lhs - c.rhs).abs()));
    if scale == 0.0 {
        err
    } else {
        err / scale
    }
}

/// Random sum of one to three smooth pulses per side, supported in
/// `[0.2, T]` so that the startup window is clear.
pub fn random_pulse_control(seed: u64, horizon: f64) -> PulseControl {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pulses = Vec::new();
    for side in Side::BOTH {
        for _ in 0..rng.gen_range(1..=3) {
            let width = rng.gen_range(0.3..1.0);
            let center = rng.gen_range(0.2 + width..horizon - width);
            pulses.push(Pulse {
                side,
                center,
                width,
                amplitude: rng.gen_range(-1.0..1.0),
            });
        }
    }
    PulseControl { pulses, horizon }
}

/// `u^f(T)` on the grid nodes.
pub fn final_state(grid: &SimulationGrid, medium: &Medium, f: &dyn Control) -> Result<Vec<f64>> {
    let trace = f.sample(grid.dt, grid.steps);
    let mut out = solve_traces(grid, medium, &trace, Startup::Window, &[grid.steps])?;
    Ok(out.snapshots.pop().expect("one snapshot requested"))
}

/// `(Δ - q) u` for a final state whose Neumann data at `T` is `f(T)`.
pub fn spatial_operator_at_horizon(
    grid: &SimulationGrid,
    medium: &Medium,
    u: &[f64],
    f: &dyn Control,
) -> Result<Vec<f64>> {
    let t = grid.t_final;
    let mut row = with_ghost_slots(u);
    populate_ghosts(
        &mut row,
        f.value(t, Side::Left),
        f.value(t, Side::Right),
        grid.dx,
    )?;
    apply_spatial_operator(&row, &medium.q, grid.dx)
}

/// `(rho u^f(T), u^h(T))` against `(f, K h)`.
pub fn blagoveshchenskii(
    ops: &BoundaryOps,
    medium: &Medium,
    f: &dyn Control,
    h: &dyn Control,
) -> Result<IdentityCheck> {
    let g = &ops.grid;
    let uf = final_state(g, medium, f)?;
    let uh = final_state(g, medium, h)?;
    let rho_uf: Vec<f64> = uf.iter().zip(&medium.rho).map(|(u, r)| u * r).collect();
    let fs = f.sample(g.dt, g.steps);
    let kh = ops.apply_k(medium, &h.sample(g.dt, g.steps))?;
    Ok(IdentityCheck {
        lhs: volume_inner(&rho_uf, &uh, g.dx),
        rhs: boundary_inner_product(&fs, &kh)?,
    })
}

/// `(f, K h)` against `(K f, h)`.
pub fn k_symmetry(
    ops: &BoundaryOps,
    medium: &Medium,
    f: &dyn Control,
    h: &dyn Control,
) -> Result<IdentityCheck> {
    let g = &ops.grid;
    let (fs, hs) = (f.sample(g.dt, g.steps), h.sample(g.dt, g.steps));
    Ok(IdentityCheck {
        lhs: boundary_inner_product(&fs, &ops.apply_k(medium, &hs)?)?,
        rhs: boundary_inner_product(&ops.apply_k(medium, &fs)?, &hs)?,
    })
}

/// `((Δ - q) u^f(T), u^h(T))` against `(f_tt, K h)`.
pub fn corollary(
    ops: &BoundaryOps,
    medium: &Medium,
    f: &dyn Control,
    h: &dyn Control,
) -> Result<IdentityCheck> {
    let g = &ops.grid;
    let uf = final_state(g, medium, f)?;
    let uh = final_state(g, medium, h)?;
    let lap = spatial_operator_at_horizon(g, medium, &uf, f)?;
    let ftt = BoundaryTrace::from_fn(g.dt, g.steps, |t, s| f.second_derivative(t, s));
    let kh = ops.apply_k(medium, &h.sample(g.dt, g.steps))?;
    Ok(IdentityCheck {
        lhs: volume_inner(&lap, &uh, g.dx),
        rhs: boundary_inner_product(&ftt, &kh)?,
    })
}

/// `(f, K̇ h)` against `(K̇ f, h)`.
pub fn kdot_symmetry(
    ops: &BoundaryOps,
    background: &Medium,
    rho_dot: &[f64],
    f: &dyn Control,
    h: &dyn Control,
) -> Result<IdentityCheck> {
    let g = &ops.grid;
    let (fs, hs) = (f.sample(g.dt, g.steps), h.sample(g.dt, g.steps));
    Ok(IdentityCheck {
        lhs: boundary_inner_product(&fs, &ops.apply_kdot(background, rho_dot, &hs)?)?,
        rhs: boundary_inner_product(&ops.apply_kdot(background, rho_dot, &fs)?, &hs)?,
    })
}

/// `(rho_dot u^f(T), u^h(T))` by volume quadrature against the boundary
/// pairing computed from simulated linearized data.
pub fn linearized_identity(
    ops: &BoundaryOps,
    background: &Medium,
    rho_dot: &[f64],
    f: &dyn Control,
    h: &dyn Control,
) -> Result<IdentityCheck> {
    let g = &ops.grid;
    let uf = final_state(g, background, f)?;
    let uh = final_state(g, background, h)?;
    let weighted: Vec<f64> = uf.iter().zip(rho_dot).map(|(u, d)| u * d).collect();
    let data = SimulatedData::new(*g, background.clone(), rho_dot.to_vec())?;
    Ok(IdentityCheck {
        lhs: volume_inner(&weighted, &uh, g.dx),
        rhs: pairing_value(ops, &data, ("f", f), ("h", h))?,
    })
}

/// Neumann eigenpairs of `-u'' + q u = λ u` (with `rho = 1`) from a dense
/// symmetric eigensolve of the second-order discretisation. Returns the
/// `count` lowest pairs with eigenvectors normalised to unit `L²` norm.
pub fn neumann_eigenpairs(
    grid: &SimulationGrid,
    q: &[f64],
    count: usize,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = grid.nodes();
    if q.len() != n {
        return Err(Error::Length {
            what: "potential",
            expected: n,
            found: q.len(),
        });
    }
    let h2 = grid.dx * grid.dx;
    // Trapezoid weights w symmetrise A: B = W^{1/2} A W^{-1/2}.
    let w: Vec<f64> = (0..n)
        .map(|j| if j == 0 || j == n - 1 { 0.5 } else { 1.0 })
        .collect();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        a[(j, j)] = 2.0 / h2 + q[j];
        if j > 0 {
            a[(j, j - 1)] = if j == n - 1 { -2.0 / h2 } else { -1.0 / h2 };
        }
        if j + 1 < n {
            a[(j, j + 1)] = if j == 0 { -2.0 / h2 } else { -1.0 / h2 };
        }
    }
    let b = DMatrix::from_fn(n, n, |i, k| (w[i] / w[k]).sqrt() * a[(i, k)]);
    let b = (&b + b.transpose()) * 0.5;
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &k| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[k]));
    Ok(order
        .into_iter()
        .take(count)
        .map(|i| {
            let v = eig.eigenvectors.column(i);
            let mut u: Vec<f64> = (0..n).map(|j| v[j] / w[j].sqrt()).collect();
            let norm = crate::grid::volume_norm(&u, grid.dx);
            let sign = if u[n / 2 + n / 7] < 0.0 { -1.0 } else { 1.0 };
            u.iter_mut().for_each(|x| *x *= sign / norm);
            (eig.eigenvalues[i], u)
        })
        .collect())
}

/// A control steering the `(1, q)` medium approximately to a target state.
#[derive(Debug, Clone)]
pub struct FittedControl {
    pub control: CombinedControl,
    /// Relative `L²` misfit of `u^f(T)` to the target.
    pub fit_error: f64,
    /// `‖(Δ - q + λ) u^f(T)‖ / (λ ‖u^f(T)‖)`.
    pub helmholtz_residual: f64,
}

/// Fits a combination of D'Alembert controls (targets `cos`, `sin` of modes
/// `1..=basis_modes`) so that `u^f(T)` matches `target` and satisfies the
/// Helmholtz equation with parameter `lambda`, by least squares on the
/// stacked system `[U; (Δ - q + λ) U / λ] c = [target; 0]`.
pub fn fit_control(
    grid: &SimulationGrid,
    medium: &Medium,
    lambda: f64,
    target: &[f64],
    basis_modes: u32,
) -> Result<FittedControl> {
    if lambda == 0.0 {
        return Err(Error::ZeroLambda);
    }
    let n = grid.nodes();
    let basis: Vec<_> = (1..=basis_modes)
        .flat_map(|j| [HelmholtzTarget::cos(j), HelmholtzTarget::sin(j)])
        .map(|t| dalembert_control(t, grid.t_final))
        .collect::<Result<_>>()?;
    let columns: Vec<(Vec<f64>, Vec<f64>)> = basis
        .iter()
        .map(|c| {
            let u = final_state(grid, medium, c)?;
            let mut hu = spatial_operator_at_horizon(grid, medium, &u, c)?;
            hu.iter_mut()
                .zip(&u)
                .for_each(|(v, x)| *v = (*v + lambda * x) / lambda);
            Ok((u, hu))
        })
        .collect::<Result<_>>()?;
    let m = DMatrix::from_fn(2 * n, columns.len(), |i, k| {
        if i < n {
            columns[k].0[i]
        } else {
            columns[k].1[i - n]
        }
    });
    let rhs = DVector::from_fn(2 * n, |i, _| if i < n { target[i] } else { 0.0 });
    let coef = m
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|_| Error::Singular)?;
    let combo = |part: usize| -> Vec<f64> {
        (0..n)
            .map(|i| {
                columns
                    .iter()
                    .zip(coef.iter())
                    .map(|(col, c)| c * if part == 0 { col.0[i] } else { col.1[i] })
                    .sum()
            })
            .collect()
    };
    let (u, hu) = (combo(0), combo(1));
    let control = CombinedControl {
        terms: coef.iter().copied().zip(basis).collect(),
        lambda,
        horizon: grid.t_final,
    };
    Ok(FittedControl {
        fit_error: crate::grid::relative_l2(&u, target, grid.dx),
        helmholtz_residual: crate::grid::volume_norm(&hu, grid.dx)
            / crate::grid::volume_norm(&u, grid.dx),
        control,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRatio {
    pub eps: f64,
    pub coarse: f64,
    pub fine: f64,
}

impl ConvergenceRatio {
    pub fn ratio(&self) -> f64 {
        self.coarse / self.fine
    }
}

/// `r(ε) = ‖Λ_{rho0 + ε rho_dot} f - Λ_{rho0} f - ε Λ̇ f‖` at `ε` and `ε/2`.
pub fn frechet_residuals(
    grid: &SimulationGrid,
    background: &Medium,
    rho_dot: &[f64],
    f: &BoundaryTrace,
    eps: f64,
) -> Result<ConvergenceRatio> {
    let base = nd_map(grid, background, f)?;
    let lin = linearized_nd_map(grid, background, rho_dot, f)?;
    let r = |e: f64| -> Result<f64> {
        let rho = background
            .rho
            .iter()
            .zip(rho_dot)
            .map(|(r, d)| r + e * d)
            .collect();
        let m = Medium::new(rho, background.q.clone())?;
        Ok(nd_map(grid, &m, f)?.sub(&base)?.axpy(-e, &lin)?.l2_norm())
    };
    Ok(ConvergenceRatio {
        eps,
        coarse: r(eps)?,
        fine: r(0.5 * eps)?,
    })
}

/// Relative discrepancy `‖(K[rho0 + ε rho_dot] h - K[rho0] h) / ε - K̇ h‖ / ‖K̇ h‖`
/// at `ε` and `ε/2`.
pub fn kdot_surrogate(
    ops: &BoundaryOps,
    background: &Medium,
    rho_dot: &[f64],
    h: &BoundaryTrace,
    eps: f64,
) -> Result<ConvergenceRatio> {
    let k0 = ops.apply_k(background, h)?;
    let kdot = ops.apply_kdot(background, rho_dot, h)?;
    let d = |e: f64| -> Result<f64> {
        let rho = background
            .rho
            .iter()
            .zip(rho_dot)
            .map(|(r, d)| r + e * d)
            .collect();
        let m = Medium::new(rho, background.q.clone())?;
        let quotient = ops.apply_k(&m, h)?.sub(&k0)?.scaled(1.0 / e);
        Ok(quotient.sub(&kdot)?.l2_norm() / kdot.l2_norm())
    };
    Ok(ConvergenceRatio {
        eps,
        coarse: d(eps)?,
        fine: d(0.5 * eps)?,
    })
}
