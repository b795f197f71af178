//! Sources of linearized ND-map measurements.
//!
//! The reconstruction asks for `Λ̇ g` for two kinds of inputs per control
//! `h`: the zero extension `P*_T h` on `[0, 2T]` and `R J P*_T h` on
//! `[0, T]`. Each request carries a [`ProbeKey`] so that precomputed or noisy
//! measurements can be looked up and seeded per trace.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SimulationGrid;
use crate::harness::noise::{add_noise, NoiseModel};
use crate::trace::BoundaryTrace;
use crate::wave_sim::{linearized_map_with, nd_map, solve_traces, Medium, Startup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProbeForm {
    /// `P*_T h` on `[0, 2T]`.
    Extended,
    /// `R J P*_T h` on `[0, T]`.
    Reversed,
}

impl ProbeForm {
    fn name(self) -> &'static str {
        match self {
            ProbeForm::Extended => "extended",
            ProbeForm::Reversed => "reversed",
        }
    }

    fn startup(self) -> Startup {
        match self {
            ProbeForm::Extended => Startup::Window,
            ProbeForm::Reversed => Startup::Initial,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProbeKey {
    pub label: String,
    pub form: ProbeForm,
}

impl ProbeKey {
    pub fn new(label: &str, form: ProbeForm) -> Self {
        ProbeKey {
            label: label.to_string(),
            form,
        }
    }

    /// Stable 64-bit identifier (FNV-1a) used to derive per-trace seeds.
    pub fn stable_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.to_string().bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }

    fn file_name(&self) -> String {
        format!("{self}.csv")
    }

    fn parse_file_name(name: &str) -> Option<Self> {
        let stem = name.strip_suffix(".csv")?;
        let (label, form) = stem.rsplit_once('-')?;
        let form = match form {
            "extended" => ProbeForm::Extended,
            "reversed" => ProbeForm::Reversed,
            _ => return None,
        };
        Some(ProbeKey::new(label, form))
    }
}

impl fmt::Display for ProbeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.label, self.form.name())
    }
}

/// Provider of `Λ̇ g` for requested inputs `g`. Implementations must be
/// safe for concurrent reads.
pub trait LinearizedData: Sync {
    fn measure(&self, key: &ProbeKey, input: &BoundaryTrace) -> Result<BoundaryTrace>;
}

fn grid_for(base: &SimulationGrid, input: &BoundaryTrace) -> Result<SimulationGrid> {
    crate::trace::check_dt(base.dt, input.dt)?;
    base.with_steps(input.steps())
}

/// Linearized ND map computed by the solver.
#[derive(Debug, Clone)]
pub struct SimulatedData {
    grid: SimulationGrid,
    background: Medium,
    rho_dot: Vec<f64>,
}

impl SimulatedData {
    pub fn new(grid: SimulationGrid, background: Medium, rho_dot: Vec<f64>) -> Result<Self> {
        if rho_dot.len() != grid.nodes() || background.nodes() != grid.nodes() {
            return Err(Error::Length {
                what: "linearized data medium",
                expected: grid.nodes(),
                found: rho_dot.len().min(background.nodes()),
            });
        }
        Ok(SimulatedData {
            grid,
            background,
            rho_dot,
        })
    }
}

impl LinearizedData for SimulatedData {
    fn measure(&self, key: &ProbeKey, input: &BoundaryTrace) -> Result<BoundaryTrace> {
        let grid = grid_for(&self.grid, input)?;
        linearized_map_with(
            &grid,
            &self.background,
            &self.rho_dot,
            input,
            key.form.startup(),
        )
    }
}

/// `(Λ_rho g - Λ_rho0 g) / eps` from two nonlinear forward solves, with
/// optional noise added to the difference.
#[derive(Debug, Clone)]
pub struct DifferenceData {
    grid: SimulationGrid,
    reference: Medium,
    perturbed: Medium,
    eps: f64,
}

impl DifferenceData {
    pub fn new(
        grid: SimulationGrid,
        reference: Medium,
        perturbed: Medium,
        eps: f64,
    ) -> Result<Self> {
        if eps == 0.0 {
            return Err(Error::Config("difference quotient needs eps != 0".into()));
        }
        Ok(DifferenceData {
            grid,
            reference,
            perturbed,
            eps,
        })
    }
}

impl LinearizedData for DifferenceData {
    fn measure(&self, key: &ProbeKey, input: &BoundaryTrace) -> Result<BoundaryTrace> {
        let grid = grid_for(&self.grid, input)?;
        let startup = key.form.startup();
        let full = solve_traces(&grid, &self.perturbed, input, startup, &[])?.trace;
        let base = match startup {
            Startup::Window => nd_map(&grid, &self.reference, input)?,
            Startup::Initial => solve_traces(&grid, &self.reference, input, startup, &[])?.trace,
        };
        Ok(full.sub(&base)?.scaled(1.0 / self.eps))
    }
}

/// Adds fresh Gaussian noise to every trace the inner source returns. The
/// draw for a trace depends only on the model seed and the probe key.
#[derive(Debug, Clone)]
pub struct NoisyData<D> {
    pub inner: D,
    pub model: NoiseModel,
}

impl<D: LinearizedData> LinearizedData for NoisyData<D> {
    fn measure(&self, key: &ProbeKey, input: &BoundaryTrace) -> Result<BoundaryTrace> {
        let clean = self.inner.measure(key, input)?;
        Ok(add_noise(&clean, &self.model, key.stable_hash()))
    }
}

/// Precomputed traces keyed by probe.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplayData {
    pub traces: BTreeMap<ProbeKey, BoundaryTrace>,
}

impl ReplayData {
    pub fn insert(&mut self, key: ProbeKey, trace: BoundaryTrace) {
        self.traces.insert(key, trace);
    }

    /// Writes one `<label>-<form>.csv` trace file per probe.
    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (key, trace) in &self.traces {
            trace.write_csv(&dir.join(key.file_name()))?;
        }
        Ok(())
    }

    pub fn load_dir(dir: &Path) -> Result<Self> {
        let mut out = ReplayData::default();
        let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(dir, e))?;
            let name = entry.file_name();
            if let Some(key) = name.to_str().and_then(ProbeKey::parse_file_name) {
                out.insert(key, BoundaryTrace::read_csv(&entry.path())?);
            }
        }
        Ok(out)
    }
}

impl LinearizedData for ReplayData {
    fn measure(&self, key: &ProbeKey, _input: &BoundaryTrace) -> Result<BoundaryTrace> {
        self.traces
            .get(key)
            .cloned()
            .ok_or_else(|| Error::MissingTrace(key.to_string()))
    }
}

/// Records every measurement of the inner source for later replay.
#[derive(Debug)]
pub struct RecordingData<D> {
    inner: D,
    log: Mutex<ReplayData>,
}

impl<D> RecordingData<D> {
    pub fn new(inner: D) -> Self {
        RecordingData {
            inner,
            log: Mutex::new(ReplayData::default()),
        }
    }

    pub fn into_replay(self) -> ReplayData {
        self.log.into_inner().unwrap_or_else(|e| e.into_inner())
    }
}

impl<D: LinearizedData> LinearizedData for RecordingData<D> {
    fn measure(&self, key: &ProbeKey, input: &BoundaryTrace) -> Result<BoundaryTrace> {
        let trace = self.inner.measure(key, input)?;
        self.log
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(key.clone(), trace.clone());
        Ok(trace)
    }
}

impl<T: LinearizedData + ?Sized> LinearizedData for &T {
    fn measure(&self, key: &ProbeKey, input: &BoundaryTrace) -> Result<BoundaryTrace> {
        (**self).measure(key, input)
    }
}

impl<T: LinearizedData + ?Sized> LinearizedData for Box<T> {
    fn measure(&self, key: &ProbeKey, input: &BoundaryTrace) -> Result<BoundaryTrace> {
        (**self).measure(key, input)
    }
}
