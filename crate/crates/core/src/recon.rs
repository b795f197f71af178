//! Fourier coefficients of the density perturbation from linearized
//! boundary data, and synthesis of the reconstruction.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bc_operators::{boundary_inner_product, boundary_pairing, BoundaryOps};
use crate::control::{dalembert_control, Control, HelmholtzTarget};
use crate::data::LinearizedData;
use crate::error::{Error, Result};
use crate::grid::SimulationGrid;
use crate::trace::BoundaryTrace;

/// `c0 = (rho_dot, 1)`, `a_j = (rho_dot, cos jπx)`, `b_j = (rho_dot, sin jπx)`
/// in `L²(-1, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierCoefficients {
    pub c0: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl FourierCoefficients {
    pub fn zeros(modes: usize) -> Self {
        FourierCoefficients {
            c0: 0.0,
            a: vec![0.0; modes],
            b: vec![0.0; modes],
        }
    }

    pub fn modes(&self) -> usize {
        self.a.len()
    }

    /// Trapezoid projections of sampled values onto the basis.
    pub fn project(values: &[f64], grid: &SimulationGrid, modes: usize) -> Self {
        let xs = grid.xs();
        let inner = |g: &dyn Fn(f64) -> f64| {
            let basis: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
            crate::grid::volume_inner(values, &basis, grid.dx)
        };
        FourierCoefficients {
            c0: inner(&|_| 1.0),
            a: (1..=modes)
                .map(|j| inner(&|x| (j as f64 * PI * x).cos()))
                .collect(),
            b: (1..=modes)
                .map(|j| inner(&|x| (j as f64 * PI * x).sin()))
                .collect(),
        }
    }
}

/// The three pairings of mode `j`, each an estimate of
/// `(rho_dot u^f(T), u^h(T))` for the cos/sin targets of that mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModePairings {
    pub mode: u32,
    pub cos_cos: f64,
    pub sin_sin: f64,
    pub cos_sin: f64,
}

impl ModePairings {
    pub fn a(&self) -> f64 {
        self.cos_cos - self.sin_sin
    }

    pub fn b(&self) -> f64 {
        2.0 * self.cos_sin
    }

    /// `(rho_dot, 1)` from this mode alone.
    pub fn c0(&self) -> f64 {
        self.cos_cos + self.sin_sin
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionMetadata {
    pub modes: usize,
    pub noise_level: f64,
    pub seed: u64,
    pub pairings: Vec<ModePairings>,
    /// Mean of the per-mode estimates of `c0`, a consistency diagnostic.
    pub c0_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionResult {
    pub coefficients: FourierCoefficients,
    pub grid: SimulationGrid,
    pub field: Vec<f64>,
    pub metadata: ReconstructionMetadata,
}

/// `K̇ h` together with `Λ̇ h(T)` read off the `[0, 2T]` response.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlResponse {
    pub kdot: BoundaryTrace,
    pub value_at_horizon: (f64, f64),
}

pub fn control_response(
    ops: &BoundaryOps,
    data: &dyn LinearizedData,
    label: &str,
    control: &dyn Control,
) -> Result<ControlResponse> {
    let h = control.sample(ops.dt(), ops.steps());
    let out = ops.apply_kdot_with(data, label, &h)?;
    Ok(ControlResponse {
        kdot: out.kdot,
        value_at_horizon: out.extended.at(ops.steps()),
    })
}

fn shared_lambda(f: &dyn Control, h: &dyn Control) -> Result<f64> {
    let (lf, lh) = (f.lambda(), h.lambda());
    if lf == 0.0 || lh == 0.0 {
        return Err(Error::ZeroLambda);
    }
    if (lf - lh).abs() > 1e-12 * lf.abs().max(lh.abs()) {
        return Err(Error::LambdaMismatch(lf, lh));
    }
    Ok(lf)
}

/// `(1/λ) [(f_tt + λ f, K̇ h) + (Λ̇ f(T), h(T))]` from precomputed
/// responses of `f` and `h`. Integrating by parts in the linearized
/// identity gives `+λ (rho_dot u^f(T), u^h(T))` on the boundary side, hence
/// the positive sign.
pub fn pairing_from_responses(
    ops: &BoundaryOps,
    f: &dyn Control,
    f_response: &ControlResponse,
    h: &dyn Control,
    h_response: &ControlResponse,
) -> Result<f64> {
    let lambda = shared_lambda(f, h)?;
    let probe = f.sample_probe(ops.dt(), ops.steps());
    let volume = boundary_inner_product(&probe, &h_response.kdot)?;
    let t = ops.horizon();
    let h_end = (
        h.value(t, crate::trace::Side::Left),
        h.value(t, crate::trace::Side::Right),
    );
    let endpoint = boundary_pairing(f_response.value_at_horizon, h_end);
    Ok((volume + endpoint) / lambda)
}

/// Estimate of `(rho_dot u^f(T), u^h(T))` from the data source; `f_label`
/// and `h_label` name the probes of `f` and `h`.
pub fn pairing_value(
    ops: &BoundaryOps,
    data: &dyn LinearizedData,
    f: (&str, &dyn Control),
    h: (&str, &dyn Control),
) -> Result<f64> {
    shared_lambda(f.1, h.1)?;
    let fr = control_response(ops, data, f.0, f.1)?;
    let hr = if f.0 == h.0 {
        fr.clone()
    } else {
        control_response(ops, data, h.0, h.1)?
    };
    pairing_from_responses(ops, f.1, &fr, h.1, &hr)
}

pub fn cos_label(j: u32) -> String {
    format!("cos{j}")
}

pub fn sin_label(j: u32) -> String {
    format!("sin{j}")
}

/// Pairings of mode `j` using the D'Alembert controls of `cos(jπx/2)` and
/// `sin(jπx/2)`. Each control is probed once.
pub fn mode_pairings(ops: &BoundaryOps, data: &dyn LinearizedData, j: u32) -> Result<ModePairings> {
    let c = dalembert_control(HelmholtzTarget::cos(j), ops.horizon())?;
    let s = dalembert_control(HelmholtzTarget::sin(j), ops.horizon())?;
    let cr = control_response(ops, data, &cos_label(j), &c)?;
    let sr = control_response(ops, data, &sin_label(j), &s)?;
    Ok(ModePairings {
        mode: j,
        cos_cos: pairing_from_responses(ops, &c, &cr, &c, &cr)?,
        sin_sin: pairing_from_responses(ops, &s, &sr, &s, &sr)?,
        cos_sin: pairing_from_responses(ops, &c, &cr, &s, &sr)?,
    })
}

/// Pairings for modes `1..=modes`, computed in parallel.
pub fn all_pairings(
    ops: &BoundaryOps,
    data: &dyn LinearizedData,
    modes: usize,
) -> Result<Vec<ModePairings>> {
    (1..=modes as u32)
        .into_par_iter()
        .map(|j| mode_pairings(ops, data, j))
        .collect()
}

/// Coefficients from mode pairings; `c0` comes from mode 1.
pub fn coefficients_from_pairings(pairings: &[ModePairings]) -> FourierCoefficients {
    FourierCoefficients {
        c0: pairings.first().map_or(0.0, ModePairings::c0),
        a: pairings.iter().map(ModePairings::a).collect(),
        b: pairings.iter().map(ModePairings::b).collect(),
    }
}

pub fn extract_coefficients(
    ops: &BoundaryOps,
    data: &dyn LinearizedData,
    modes: usize,
) -> Result<FourierCoefficients> {
    Ok(coefficients_from_pairings(&all_pairings(ops, data, modes)?))
}

/// `c0 / 2 + Σ a_j cos(jπx) + b_j sin(jπx)` at the grid nodes.
pub fn synthesize(coefficients: &FourierCoefficients, grid: &SimulationGrid) -> Vec<f64> {
    grid.xs()
        .iter()
        .map(|&x| {
            let mut v = 0.5 * coefficients.c0;
            for (k, (a, b)) in coefficients.a.iter().zip(&coefficients.b).enumerate() {
                let w = (k + 1) as f64 * PI * x;
                v += a * w.cos() + b * w.sin();
            }
            v
        })
        .collect()
}

/// Extracts `modes` coefficients and synthesizes the field. `noise_level`
/// and `seed` are recorded only.
pub fn reconstruct(
    ops: &BoundaryOps,
    data: &dyn LinearizedData,
    modes: usize,
    noise_level: f64,
    seed: u64,
) -> Result<ReconstructionResult> {
    let pairings = all_pairings(ops, data, modes)?;
    let coefficients = coefficients_from_pairings(&pairings);
    let field = synthesize(&coefficients, &ops.grid);
    let c0_mean = if pairings.is_empty() {
        0.0
    } else {
        pairings.iter().map(ModePairings::c0).sum::<f64>() / pairings.len() as f64
    };
    Ok(ReconstructionResult {
        coefficients,
        grid: ops.grid,
        field,
        metadata: ReconstructionMetadata {
            modes,
            noise_level,
            seed,
            pairings,
            c0_mean,
        },
    })
}
