//! Finite-difference stencils on the uniform grid of `[-1, 1]`.
//!
//! Field rows passed to this module carry one ghost node on each side: a row
//! for nodes `x_0..x_N` has length `N + 3`, with `row[0]` holding `x_{-1}` and
//! `row[N + 2]` holding `x_{N+1}`.

use crate::error::{Error, Result};

/// Finite-difference weights for a derivative of order `order` taken at
/// offset zero. The derivative is `sum(coeffs[i] * f(x + offsets[i] dx)) / dx^order`.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilSpec {
    pub offsets: Vec<i32>,
    pub order: usize,
    pub coeffs: Vec<f64>,
}

impl StencilSpec {
    fn twelfths(offsets: &[i32], order: usize, numerators: &[f64]) -> Self {
        StencilSpec {
            offsets: offsets.to_vec(),
            order,
            coeffs: numerators.iter().map(|c| c / 12.0).collect(),
        }
    }

    /// Largest deviation from the moment conditions
    /// `sum_i c_i h_i^m = order! * delta(m, order)` for `m < len`.
    pub fn moment_residual(&self) -> f64 {
        let fact = factorial(self.order);
        (0..self.offsets.len())
            .map(|m| {
                let moment: f64 = self
                    .offsets
                    .iter()
                    .zip(&self.coeffs)
                    .map(|(&h, &c)| c * f64::from(h).powi(m as i32))
                    .sum();
                let expected = if m == self.order { fact } else { 0.0 };
                (moment - expected).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Applies the stencil centred at `row[center]`.
    #[inline]
    pub fn apply(&self, row: &[f64], center: usize) -> f64 {
        self.offsets
            .iter()
            .zip(&self.coeffs)
            .map(|(&o, &c)| c * row[(center as isize + o as isize) as usize])
            .sum()
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Weights `c` of the `m`-point rule `f^(k)(x) ~ sum c_i f(x + h_i)` with unit
/// spacing, from the Vandermonde system `A c = k! e_k`, `A_ij = h_j^i`.
pub fn vandermonde_coeffs(offsets: &[f64], order: usize) -> Result<Vec<f64>> {
    let m = offsets.len();
    if order + 1 > m {
        return Err(Error::OrderTooHigh { order, len: m });
    }
    for (i, a) in offsets.iter().enumerate() {
        if offsets[i + 1..].contains(a) {
            return Err(Error::DuplicateOffsets(*a));
        }
    }

    let matrix: Vec<Vec<f64>> = (0..m)
        .map(|i| offsets.iter().map(|h| h.powi(i as i32)).collect())
        .collect();
    let mut rhs = vec![0.0; m];
    rhs[order] = factorial(order);

    let mut c = gauss_solve(&matrix, &rhs)?;
    // one round of iterative refinement
    let r: Vec<f64> = (0..m)
        .map(|i| rhs[i] - matrix[i].iter().zip(&c).map(|(a, x)| a * x).sum::<f64>())
        .collect();
    let dc = gauss_solve(&matrix, &r)?;
    for (ci, d) in c.iter_mut().zip(dc) {
        *ci += d;
    }

    let residual = (0..m)
        .map(|i| (rhs[i] - matrix[i].iter().zip(&c).map(|(a, x)| a * x).sum::<f64>()).abs())
        .fold(0.0, f64::max);
    if residual > 1e-10 * rhs[order] {
        return Err(Error::Singular);
    }
    Ok(c)
}

fn gauss_solve(matrix: &[Vec<f64>], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < f64::EPSILON {
            return Err(Error::Singular);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                for k in col..n {
                    a[row][k] -= factor * a[col][k];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Ok(x)
}

/// The five fourth-order rules used by the solver: boundary first
/// derivatives at `x_0`, `x_N` and second derivatives at `x_0`, interior
/// nodes, `x_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourthOrderStencils {
    pub left_first: StencilSpec,
    pub right_first: StencilSpec,
    pub left_second: StencilSpec,
    pub interior_second: StencilSpec,
    pub right_second: StencilSpec,
}

impl FourthOrderStencils {
    pub fn all(&self) -> [&StencilSpec; 5] {
        [
            &self.left_first,
            &self.right_first,
            &self.left_second,
            &self.interior_second,
            &self.right_second,
        ]
    }
}

pub fn fourth_order_stencils() -> FourthOrderStencils {
    FourthOrderStencils {
        left_first: StencilSpec::twelfths(&[-1, 0, 1, 2, 3], 1, &[-3.0, -10.0, 18.0, -6.0, 1.0]),
        right_first: StencilSpec::twelfths(&[-3, -2, -1, 0, 1], 1, &[-1.0, 6.0, -18.0, 10.0, 3.0]),
        left_second: StencilSpec::twelfths(
            &[-1, 0, 1, 2, 3, 4],
            2,
            &[10.0, -15.0, -4.0, 14.0, -6.0, 1.0],
        ),
        interior_second: StencilSpec::twelfths(
            &[-2, -1, 0, 1, 2],
            2,
            &[-1.0, 16.0, -30.0, 16.0, -1.0],
        ),
        right_second: StencilSpec::twelfths(
            &[-4, -3, -2, -1, 0, 1],
            2,
            &[1.0, -6.0, 14.0, -4.0, -15.0, 10.0],
        ),
    }
}

/// Coefficients of the fixed stencils, flattened for the hot loop.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel {
    left_first: [f64; 5],
    right_first: [f64; 5],
    left_second: [f64; 6],
    interior: [f64; 5],
    right_second: [f64; 6],
}

impl Kernel {
    pub(crate) fn new() -> Self {
        let s = fourth_order_stencils();
        let arr5 = |v: &[f64]| -> [f64; 5] { v.try_into().unwrap() };
        let arr6 = |v: &[f64]| -> [f64; 6] { v.try_into().unwrap() };
        Kernel {
            left_first: arr5(&s.left_first.coeffs),
            right_first: arr5(&s.right_first.coeffs),
            left_second: arr6(&s.left_second.coeffs),
            interior: arr5(&s.interior_second.coeffs),
            right_second: arr6(&s.right_second.coeffs),
        }
    }

    /// Ghost values from outward normal derivatives `g_left`, `g_right`.
    /// With the outward normal, `u_x(-1) = -g_left` and `u_x(1) = g_right`.
    #[inline]
    pub(crate) fn ghosts(&self, row: &mut [f64], g_left: f64, g_right: f64, dx: f64) {
        let n = row.len() - 3;
        let l = &self.left_first;
        let rest = l[1] * row[1] + l[2] * row[2] + l[3] * row[3] + l[4] * row[4];
        row[0] = (-dx * g_left - rest) / l[0];

        let r = &self.right_first;
        let e = n + 1;
        let rest = r[0] * row[e - 3] + r[1] * row[e - 2] + r[2] * row[e - 1] + r[3] * row[e];
        row[e + 1] = (dx * g_right - rest) / r[4];
    }

    /// Writes `(u_xx - q u)` at nodes `x_0..x_N` into `out`.
    #[inline]
    pub(crate) fn laplacian_minus_q(&self, row: &[f64], q: &[f64], dx: f64, out: &mut [f64]) {
        let nodes = out.len();
        let inv = 1.0 / (dx * dx);
        let ls = &self.left_second;
        out[0] = inv
            * (ls[0] * row[0]
                + ls[1] * row[1]
                + ls[2] * row[2]
                + ls[3] * row[3]
                + ls[4] * row[4]
                + ls[5] * row[5])
            - q[0] * row[1];
        let c = &self.interior;
        for j in 1..nodes - 1 {
            let k = j + 1;
            let w = &row[k - 2..k + 3];
            out[j] = inv * (c[0] * w[0] + c[1] * w[1] + c[2] * w[2] + c[3] * w[3] + c[4] * w[4])
                - q[j] * w[2];
        }
        let rs = &self.right_second;
        let k = nodes; // row index of x_N
        out[nodes - 1] = inv
            * (rs[0] * row[k - 4]
                + rs[1] * row[k - 3]
                + rs[2] * row[k - 2]
                + rs[3] * row[k - 1]
                + rs[4] * row[k]
                + rs[5] * row[k + 1])
            - q[nodes - 1] * row[k];
    }
}

/// Evaluates `(Δ - q) u` at `x_0..x_N` from a ghost-completed row.
pub fn apply_spatial_operator(row: &[f64], q: &[f64], dx: f64) -> Result<Vec<f64>> {
    if row.len() < 8 {
        return Err(Error::Length {
            what: "field row (too few nodes)",
            expected: 8,
            found: row.len(),
        });
    }
    let nodes = row.len() - 2;
    if q.len() != nodes {
        return Err(Error::Length {
            what: "potential",
            expected: nodes,
            found: q.len(),
        });
    }
    if !row[0].is_finite() || !row[row.len() - 1].is_finite() {
        return Err(Error::InvalidGrid("ghost values are not populated".into()));
    }
    let mut out = vec![0.0; nodes];
    Kernel::new().laplacian_minus_q(row, q, dx, &mut out);
    Ok(out)
}

/// Fills `row[0]` and `row[N + 2]` so that the one-sided first-derivative
/// stencils reproduce the outward normal derivatives `g_left`, `g_right`.
/// Returns the two ghost values.
pub fn populate_ghosts(row: &mut [f64], g_left: f64, g_right: f64, dx: f64) -> Result<(f64, f64)> {
    if row.len() < 8 {
        return Err(Error::Length {
            what: "field row (too few nodes)",
            expected: 8,
            found: row.len(),
        });
    }
    Kernel::new().ghosts(row, g_left, g_right, dx);
    Ok((row[0], row[row.len() - 1]))
}

/// Copies interior node values into a fresh row with NaN ghosts.
pub fn with_ghost_slots(nodes: &[f64]) -> Vec<f64> {
    let mut row = Vec::with_capacity(nodes.len() + 2);
    row.push(f64::NAN);
    row.extend_from_slice(nodes);
    row.push(f64::NAN);
    row
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nodes(n: usize) -> (Vec<f64>, f64) {
        let dx = 2.0 / n as f64;
        ((0..=n).map(|j| -1.0 + j as f64 * dx).collect(), dx)
    }

    fn row_of(f: impl Fn(f64) -> f64, n: usize) -> (Vec<f64>, f64) {
        let dx = 2.0 / n as f64;
        (
            (0..n + 3)
                .map(|k| f(-1.0 + (k as f64 - 1.0) * dx))
                .collect(),
            dx,
        )
    }

    #[test]
    fn central_first_difference() {
        let c = vandermonde_coeffs(&[-1.0, 0.0, 1.0], 1).unwrap();
        assert!((c[0] + 0.5).abs() < 1e-14);
        assert!(c[1].abs() < 1e-14);
        assert!((c[2] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn interior_second_from_vandermonde() {
        let c = vandermonde_coeffs(&[-2.0, -1.0, 0.0, 1.0, 2.0], 2).unwrap();
        let expected = [-1.0, 16.0, -30.0, 16.0, -1.0].map(|v| v / 12.0);
        for (a, b) in c.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn left_first_from_vandermonde() {
        let c = vandermonde_coeffs(&[-1.0, 0.0, 1.0, 2.0, 3.0], 1).unwrap();
        let expected = [-3.0, -10.0, 18.0, -6.0, 1.0].map(|v| v / 12.0);
        for (a, b) in c.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn vandermonde_rejects_bad_input() {
        assert!(matches!(
            vandermonde_coeffs(&[0.0, 1.0, 1.0], 1),
            Err(Error::DuplicateOffsets(_))
        ));
        assert!(matches!(
            vandermonde_coeffs(&[0.0, 1.0], 2),
            Err(Error::OrderTooHigh { .. })
        ));
    }

    #[test]
    fn fixed_stencils_match_vandermonde() {
        for s in fourth_order_stencils().all() {
            let offsets: Vec<f64> = s.offsets.iter().map(|&o| f64::from(o)).collect();
            let c = vandermonde_coeffs(&offsets, s.order).unwrap();
            for (a, b) in c.iter().zip(&s.coeffs) {
                assert!((a - b).abs() <= 1e-12, "{:?}: {a} vs {b}", s.offsets);
            }
            assert!(s.moment_residual() < 1e-10);
        }
    }

    #[test]
    fn stencils_exact_on_monomials() {
        for s in fourth_order_stencils().all() {
            for deg in 0..s.offsets.len() as i32 {
                // derivative at x = 0.3 with spacing 0.1 of (x - 0.3 + 0.7)^deg
                let dx = 0.1;
                let f = |x: f64| (x + 0.4).powi(deg);
                let approx: f64 = s
                    .offsets
                    .iter()
                    .zip(&s.coeffs)
                    .map(|(&o, &c)| c * f(0.3 + f64::from(o) * dx))
                    .sum::<f64>()
                    / dx.powi(s.order as i32);
                let d = deg as f64;
                let exact = match s.order {
                    1 => d * 0.7f64.powi(deg - 1),
                    _ => d * (d - 1.0) * 0.7f64.powi(deg - 2),
                };
                let exact = if deg < s.order as i32 { 0.0 } else { exact };
                assert!(
                    (approx - exact).abs() < 1e-9,
                    "deg {deg}: {approx} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn constant_field_has_zero_laplacian() {
        let n = 50;
        let row = vec![3.0; n + 3];
        let out = apply_spatial_operator(&row, &vec![0.0; n + 1], 2.0 / n as f64).unwrap();
        assert!(out.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn quadratic_is_exact() {
        let n = 500;
        let (row, dx) = row_of(|x| x * x, n);
        let out = apply_spatial_operator(&row, &vec![0.0; n + 1], dx).unwrap();
        let err = out.iter().map(|v| (v - 2.0).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn potential_term_subtracts() {
        let n = 40;
        let row = vec![2.0; n + 3];
        let q = vec![1.5; n + 1];
        let out = apply_spatial_operator(&row, &q, 2.0 / n as f64).unwrap();
        assert!(out.iter().all(|v| (v + 3.0).abs() < 1e-9));
    }

    #[test]
    fn sine_converges_at_fourth_order() {
        use std::f64::consts::PI;
        let errs: Vec<f64> = [125usize, 250, 500]
            .iter()
            .map(|&n| {
                let (row, dx) = row_of(|x| (PI * x).sin(), n);
                let (xs, _) = nodes(n);
                let out = apply_spatial_operator(&row, &vec![0.0; n + 1], dx).unwrap();
                out.iter()
                    .zip(&xs)
                    .map(|(v, x)| (v + PI * PI * (PI * x).sin()).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 3.8, "order {order} from {errs:?}");
        }
    }

    #[test]
    fn missing_ghosts_rejected() {
        let row = with_ghost_slots(&[0.0; 20]);
        assert!(apply_spatial_operator(&row, &[0.0; 20], 0.1).is_err());
    }

    #[test]
    fn constant_row_ghosts() {
        let mut row = with_ghost_slots(&[1.0; 30]);
        let (gl, gr) = populate_ghosts(&mut row, 0.0, 0.0, 0.1).unwrap();
        assert!((gl - 1.0).abs() < 1e-14 && (gr - 1.0).abs() < 1e-14);
    }

    #[test]
    fn linear_profile_continues() {
        let n = 100;
        let (xs, dx) = nodes(n);
        let lin: Vec<f64> = xs.iter().map(|x| 0.5 + 2.0 * x).collect();
        let mut row = with_ghost_slots(&lin);
        // u_x = 2: outward derivative is -2 on the left and +2 on the right
        let (gl, gr) = populate_ghosts(&mut row, -2.0, 2.0, dx).unwrap();
        assert!((gl - (0.5 + 2.0 * (-1.0 - dx))).abs() < 1e-12);
        assert!((gr - (0.5 + 2.0 * (1.0 + dx))).abs() < 1e-12);
    }

    #[test]
    fn ghosts_satisfy_homogeneous_neumann() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let vals: Vec<f64> = (0..60).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut row = with_ghost_slots(&vals);
        let dx = 2.0 / 59.0;
        populate_ghosts(&mut row, 0.0, 0.0, dx).unwrap();
        let s = fourth_order_stencils();
        let left = s.left_first.apply(&row, 1);
        let right = s.right_first.apply(&row, row.len() - 2);
        assert!(left.abs() < 1e-10 && right.abs() < 1e-10, "{left} {right}");
    }
}
