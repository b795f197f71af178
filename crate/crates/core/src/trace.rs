use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::trapezoid;

/// Boundary side of `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    pub fn x(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }

    /// Outward normal in 1D.
    pub fn normal(self) -> f64 {
        self.x()
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// Time series at `x = -1` and `x = +1` on `t_n = n dt`, `n = 0..len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTrace {
    pub dt: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl BoundaryTrace {
    pub fn new(dt: f64, left: Vec<f64>, right: Vec<f64>) -> Result<Self> {
        if left.len() != right.len() {
            return Err(Error::Length {
                what: "boundary trace sides",
                expected: left.len(),
                found: right.len(),
            });
        }
        if left.is_empty() {
            return Err(Error::Length {
                what: "boundary trace",
                expected: 1,
                found: 0,
            });
        }
        Ok(BoundaryTrace { dt, left, right })
    }

    pub fn zeros(dt: f64, samples: usize) -> Self {
        BoundaryTrace {
            dt,
            left: vec![0.0; samples],
            right: vec![0.0; samples],
        }
    }

    /// Samples `f(t, side)` at `t_n = n dt` for `n = 0..=steps`.
    pub fn from_fn(dt: f64, steps: usize, f: impl Fn(f64, Side) -> f64) -> Self {
        let t = |n: usize| n as f64 * dt;
        BoundaryTrace {
            dt,
            left: (0..=steps).map(|n| f(t(n), Side::Left)).collect(),
            right: (0..=steps).map(|n| f(t(n), Side::Right)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.steps() as f64 * self.dt
    }

    pub fn side(&self, side: Side) -> &[f64] {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn side_mut(&mut self, side: Side) -> &mut Vec<f64> {
        match side {
            Side::Left => &mut self.left,
            Side::Right => &mut self.right,
        }
    }

    pub fn at(&self, n: usize) -> (f64, f64) {
        (self.left[n], self.right[n])
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        BoundaryTrace {
            dt: self.dt,
            left: self.left.iter().map(|&v| f(v)).collect(),
            right: self.right.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let zip = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + s * y).collect();
        Ok(BoundaryTrace {
            dt: self.dt,
            left: zip(&self.left, &other.left),
            right: zip(&self.right, &other.right),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::Length {
                what: "boundary trace samples",
                expected: self.len(),
                found: other.len(),
            });
        }
        check_dt(self.dt, other.dt)
    }

    /// Root mean square over both sides and all samples.
    pub fn rms(&self) -> f64 {
        let sum: f64 = self.left.iter().chain(&self.right).map(|v| v * v).sum();
        (sum / (2 * self.len()) as f64).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.left
            .iter()
            .chain(&self.right)
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Trapezoid `L^2((0, horizon) x {-1, 1})` norm.
    pub fn l2_norm(&self) -> f64 {
        let sq = |v: &[f64]| trapezoid(&v.iter().map(|x| x * x).collect::<Vec<_>>(), self.dt);
        (sq(&self.left) + sq(&self.right)).sqrt()
    }

    /// Writes `t,left,right` rows with a header.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        w.write_record(["t", "left", "right"])
            .map_err(|e| Error::csv(path, e))?;
        for n in 0..self.len() {
            w.write_record(&[
                format!("{:.17e}", n as f64 * self.dt),
                format!("{:.17e}", self.left[n]),
                format!("{:.17e}", self.right[n]),
            ])
            .map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut ts = Vec::new();
        let mut left = Vec::new();
        let mut right = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::csv(path, e))?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Format {
                        path: path.into(),
                        msg: format!("missing column {i}"),
                    })?
                    .trim()
                    .parse()
                    .map_err(|e| Error::Format {
                        path: path.into(),
                        msg: format!("{e}"),
                    })
            };
            ts.push(parse(0)?);
            left.push(parse(1)?);
            right.push(parse(2)?);
        }
        if ts.len() < 2 {
            return Err(Error::Format {
                path: path.into(),
                msg: "trace needs at least two samples".into(),
            });
        }
        let dt = (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64;
        BoundaryTrace::new(dt, left, right)
    }
}

pub(crate) fn check_dt(expected: f64, found: f64) -> Result<()> {
    if (expected - found).abs() > 1e-12 * expected.abs() {
        Err(Error::TimeStep { expected, found })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_is_exact() {
        let tr = BoundaryTrace::from_fn(0.01, 50, |t, s| (t * 3.0).sin() * s.x() + 1e-7 * t);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("trace.csv");
        tr.write_csv(&p).unwrap();
        let back = BoundaryTrace::read_csv(&p).unwrap();
        assert_eq!(back.left, tr.left);
        assert_eq!(back.right, tr.right);
        assert!((back.dt - tr.dt).abs() < 1e-15);
    }

    #[test]
    fn mismatched_sides_rejected() {
        assert!(BoundaryTrace::new(0.1, vec![0.0; 3], vec![0.0; 4]).is_err());
    }

    #[test]
    fn rms_of_constant() {
        let tr = BoundaryTrace::from_fn(0.1, 10, |_, _| -2.0);
        assert!((tr.rms() - 2.0).abs() < 1e-15);
    }
}
