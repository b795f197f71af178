use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SimulationGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub id: u8,
    pub nx: usize,
    pub t_final: f64,
    pub dt_ratio: f64,
    pub modes: usize,
    pub noise_levels: Vec<f64>,
    /// Number of noise draws per nonzero level.
    pub seeds: usize,
    /// First seed; draws use `seed..seed + seeds`.
    pub seed: u64,
    /// Perturbation size of experiment 3.
    pub eps: f64,
}

impl ExperimentConfig {
    pub fn new(id: u8) -> Self {
        ExperimentConfig {
            id,
            nx: 500,
            t_final: 5.0,
            dt_ratio: 0.1,
            modes: 10,
            noise_levels: vec![0.0, 0.01, 0.05],
            seeds: 10,
            seed: 1,
            eps: 1e-3,
        }
    }

    pub fn grid(&self) -> Result<SimulationGrid> {
        SimulationGrid::new(self.nx, self.t_final, self.dt_ratio)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.id) {
            return Err(Error::UnknownExperiment(self.id));
        }
        if self.modes == 0 {
            return Err(Error::Config("modes must be positive".into()));
        }
        if self.seeds == 0 {
            return Err(Error::Config("seeds must be positive".into()));
        }
        if let Some(l) = self
            .noise_levels
            .iter()
            .find(|l| !(**l >= 0.0 && l.is_finite()))
        {
            return Err(Error::Config(format!("invalid noise level {l}")));
        }
        if !(self.eps > 0.0) {
            return Err(Error::Config(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        self.grid().map(|_| ())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Config(format!("bad value {v:?} for {key}")))
        }
        match key {
            "id" | "experiment" => self.id = num(key, value)?,
            "nx" => self.nx = num(key, value)?,
            "t_final" => self.t_final = num(key, value)?,
            "dt_ratio" => self.dt_ratio = num(key, value)?,
            "modes" => self.modes = num(key, value)?,
            "seeds" => self.seeds = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "eps" => self.eps = num(key, value)?,
            "noise" | "noise_levels" => {
                self.noise_levels = value
                    .split(',')
                    .map(|v| num(key, v.trim()))
                    .collect::<Result<_>>()?
            }
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }
}
