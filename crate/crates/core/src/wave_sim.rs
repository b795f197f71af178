//! Leapfrog FDTD solver for `rho u_tt - u_xx + q u = s` on `[-1, 1]` with
//! Neumann data, zero initial data, and the fourth-order spatial stencils.
//!
//! Every time level `n >= 1` populates the ghosts from the Neumann data at
//! `t_n`, evaluates `u_tt^n = ((Δ - q) u^n + s^n) / rho` and advances with
//! `u^{n+1} = 2 u^n - u^{n-1} + dt^2 u_tt^n`. The first levels are zero:
//! `u^0 = u^1 = 0`, which for data vanishing on the startup window is the
//! same as starting the iteration at the sixth time level.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fd_kernels::Kernel;
use crate::grid::{require_cfl, SimulationGrid};
use crate::trace::BoundaryTrace;

/// Number of leading time levels on which Neumann data must vanish.
pub const STARTUP_STEPS: usize = 5;

/// Sampled density and potential on grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Medium {
    pub rho: Vec<f64>,
    pub q: Vec<f64>,
}

impl Medium {
    pub fn new(rho: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if rho.len() != q.len() {
            return Err(Error::Length {
                what: "medium potential",
                expected: rho.len(),
                found: q.len(),
            });
        }
        if let Some((j, r)) = rho
            .iter()
            .enumerate()
            .find(|(_, r)| !(**r > 0.0) || !r.is_finite())
        {
            return Err(Error::Medium(format!(
                "density {r} at node {j} is not positive"
            )));
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::Medium("potential is not finite".into()));
        }
        Ok(Medium { rho, q })
    }

    /// Constant density, zero potential.
    pub fn constant(grid: &SimulationGrid, rho0: f64) -> Result<Self> {
        Self::new(vec![rho0; grid.nodes()], vec![0.0; grid.nodes()])
    }

    pub fn from_fns(
        grid: &SimulationGrid,
        rho: impl Fn(f64) -> f64,
        q: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        Self::new(grid.sample(rho), grid.sample(q))
    }

    pub fn nodes(&self) -> usize {
        self.rho.len()
    }

    fn check(&self, grid: &SimulationGrid) -> Result<()> {
        if self.nodes() != grid.nodes() {
            return Err(Error::Length {
                what: "medium",
                expected: grid.nodes(),
                found: self.nodes(),
            });
        }
        Ok(())
    }
}

/// Background `(rho0, q)` plus perturbation direction, optionally with a
/// full density for nonlinear forward runs.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumSpec {
    pub rho0: f64,
    pub rho_full: Option<Vec<f64>>,
    pub q: Vec<f64>,
    pub rho_dot: Vec<f64>,
}

impl MediumSpec {
    pub fn background(&self) -> Result<Medium> {
        if !(self.rho0 > 0.0) {
            return Err(Error::Medium(format!(
                "rho0 = {} must be positive",
                self.rho0
            )));
        }
        Medium::new(vec![self.rho0; self.q.len()], self.q.clone())
    }

    /// Full density if present, else `rho0`.
    pub fn full(&self) -> Result<Medium> {
        match &self.rho_full {
            Some(rho) => Medium::new(rho.clone(), self.q.clone()),
            None => self.background(),
        }
    }

    /// Medium with density `rho0 + eps * rho_dot`.
    pub fn perturbed(&self, eps: f64) -> Result<Medium> {
        let rho = self.rho_dot.iter().map(|d| self.rho0 + eps * d).collect();
        Medium::new(rho, self.q.clone())
    }
}

/// How strictly the zero-initial-data compatibility of Neumann data is checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Startup {
    /// Data must vanish on the first [`STARTUP_STEPS`] samples.
    Window,
    /// Data must vanish at `t = 0` only. Needed for data such as `R J P*_T h`,
    /// which grows linearly from zero.
    Initial,
}

pub(crate) fn check_startup(f: &BoundaryTrace, startup: Startup) -> Result<()> {
    let upto = match startup {
        Startup::Window => STARTUP_STEPS.min(f.len()),
        Startup::Initial => 1,
    };
    let tol = 1e-13 * f.max_abs();
    for n in 0..upto {
        for (side, v) in [("left", f.left[n]), ("right", f.right[n])] {
            if v.abs() > tol {
                return Err(Error::Startup {
                    step: n,
                    side,
                    value: v,
                });
            }
        }
    }
    Ok(())
}

fn check_trace(grid: &SimulationGrid, f: &BoundaryTrace) -> Result<()> {
    crate::trace::check_dt(grid.dt, f.dt)?;
    if f.steps() != grid.steps {
        return Err(Error::Horizon {
            expected: grid.t_final,
            found: f.horizon(),
        });
    }
    Ok(())
}

/// Single-field leapfrog state.
pub(crate) struct Stepper<'a> {
    kernel: Kernel,
    dx: f64,
    dt2: f64,
    q: &'a [f64],
    inv_rho: Vec<f64>,
    prev: Vec<f64>,
    cur: Vec<f64>,
    utt: Vec<f64>,
    lap: Vec<f64>,
    n: usize,
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(medium: &'a Medium, dx: f64, dt: f64) -> Self {
        let nodes = medium.nodes();
        Stepper {
            kernel: Kernel::new(),
            dx,
            dt2: dt * dt,
            q: &medium.q,
            inv_rho: medium.rho.iter().map(|r| 1.0 / r).collect(),
            prev: vec![0.0; nodes + 2],
            cur: vec![0.0; nodes + 2],
            utt: vec![0.0; nodes],
            lap: vec![0.0; nodes],
            n: 0,
        }
    }

    /// `u^n` at nodes `x_0..x_N`.
    pub(crate) fn current(&self) -> &[f64] {
        &self.cur[1..self.cur.len() - 1]
    }

    pub(crate) fn utt(&self) -> &[f64] {
        &self.utt
    }

    /// Populates ghosts and computes `u_tt^n`.
    pub(crate) fn eval(&mut self, g_left: f64, g_right: f64, source: Option<&[f64]>) {
        self.kernel.ghosts(&mut self.cur, g_left, g_right, self.dx);
        self.kernel
            .laplacian_minus_q(&self.cur, self.q, self.dx, &mut self.lap);
        match source {
            Some(s) => {
                for j in 0..self.utt.len() {
                    self.utt[j] = (self.lap[j] + s[j]) * self.inv_rho[j];
                }
            }
            None => {
                for j in 0..self.utt.len() {
                    self.utt[j] = self.lap[j] * self.inv_rho[j];
                }
            }
        }
    }

    /// Moves to level `n + 1`. Level 1 is zero by the startup rule.
    pub(crate) fn advance(&mut self) {
        if self.n > 0 {
            let nodes = self.utt.len();
            for j in 0..nodes {
                let k = j + 1;
                self.prev[k] = 2.0 * self.cur[k] - self.prev[k] + self.dt2 * self.utt[j];
            }
            std::mem::swap(&mut self.prev, &mut self.cur);
        }
        self.n += 1;
    }
}

/// Full solution `u(t_n, x_j)` together with the `u_tt` the solver used.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    pub grid: SimulationGrid,
    values: Vec<f64>,
    utt: Vec<f64>,
}

impl SpaceTimeField {
    /// A field from explicit values (used for source terms). `u_tt` is left zero.
    pub fn from_fn(grid: &SimulationGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let nodes = grid.nodes();
        let mut values = Vec::with_capacity(grid.samples() * nodes);
        for n in 0..grid.samples() {
            let t = grid.t(n);
            values.extend((0..nodes).map(|j| f(t, grid.x(j))));
        }
        SpaceTimeField {
            grid: *grid,
            utt: vec![0.0; values.len()],
            values,
        }
    }

    pub fn zeros(grid: &SimulationGrid) -> Self {
        let len = grid.samples() * grid.nodes();
        SpaceTimeField {
            grid: *grid,
            values: vec![0.0; len],
            utt: vec![0.0; len],
        }
    }

    pub fn rows(&self) -> usize {
        self.grid.samples()
    }

    pub fn row(&self, n: usize) -> &[f64] {
        let w = self.grid.nodes();
        &self.values[n * w..(n + 1) * w]
    }

    pub fn utt_row(&self, n: usize) -> &[f64] {
        let w = self.grid.nodes();
        &self.utt[n * w..(n + 1) * w]
    }

    pub fn final_row(&self) -> &[f64] {
        self.row(self.rows() - 1)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn trace(&self) -> BoundaryTrace {
        let last = self.grid.nx;
        BoundaryTrace {
            dt: self.grid.dt,
            left: (0..self.rows()).map(|n| self.row(n)[0]).collect(),
            right: (0..self.rows()).map(|n| self.row(n)[last]).collect(),
        }
    }

    /// Writes a `dx=..,dt=..,horizon=..` header followed by one CSV row per
    /// time level.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(
            w,
            "dx={:e},dt={:e},horizon={}",
            self.grid.dx, self.grid.dt, self.grid.t_final
        )
        .map_err(io)?;
        for n in 0..self.rows() {
            let line: Vec<String> = self.row(n).iter().map(|v| format!("{v:.10e}")).collect();
            writeln!(w, "{}", line.join(",")).map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

/// The recorded `u_tt` of a solve, one row per time level. Level 0 and the
/// startup level 1 carry the values evaluated there even though `u^1` is
/// set to zero rather than advanced.
pub fn second_time_derivative(field: &SpaceTimeField) -> SpaceTimeField {
    SpaceTimeField {
        grid: field.grid,
        values: field.utt.clone(),
        utt: vec![0.0; field.utt.len()],
    }
}

/// Solves with the full field retained. Memory is `samples x nodes`; use
/// [`solve_traces`] for long horizons.
pub fn solve_neumann_wave(
    grid: &SimulationGrid,
    medium: &Medium,
    neumann: &BoundaryTrace,
    source: Option<&SpaceTimeField>,
) -> Result<SpaceTimeField> {
    solve_field(grid, medium, neumann, source, Startup::Window)
}

pub fn solve_field(
    grid: &SimulationGrid,
    medium: &Medium,
    neumann: &BoundaryTrace,
    source: Option<&SpaceTimeField>,
    startup: Startup,
) -> Result<SpaceTimeField> {
    require_cfl(grid)?;
    medium.check(grid)?;
    check_trace(grid, neumann)?;
    check_startup(neumann, startup)?;
    if let Some(s) = source {
        if s.grid.nodes() != grid.nodes() || s.rows() != grid.samples() {
            return Err(Error::Length {
                what: "source field",
                expected: grid.samples() * grid.nodes(),
                found: s.values.len(),
            });
        }
    }

    let mut field = SpaceTimeField::zeros(grid);
    let w = grid.nodes();
    let mut st = Stepper::new(medium, grid.dx, grid.dt);
    for n in 0..=grid.steps {
        let (gl, gr) = neumann.at(n);
        st.eval(gl, gr, source.map(|s| s.row(n)));
        field.values[n * w..(n + 1) * w].copy_from_slice(st.current());
        field.utt[n * w..(n + 1) * w].copy_from_slice(st.utt());
        if n < grid.steps {
            st.advance();
        }
    }
    Ok(field)
}

/// Boundary trace of a solve plus snapshots at requested time levels.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutput {
    pub trace: BoundaryTrace,
    pub snapshots: Vec<Vec<f64>>,
}

impl SolveOutput {
    fn new(grid: &SimulationGrid, snapshots: usize) -> Self {
        SolveOutput {
            trace: BoundaryTrace::zeros(grid.dt, grid.samples()),
            snapshots: Vec::with_capacity(snapshots),
        }
    }

    fn record(&mut self, n: usize, u: &[f64], at: &[usize]) {
        self.trace.left[n] = u[0];
        self.trace.right[n] = u[u.len() - 1];
        for _ in at.iter().filter(|&&k| k == n) {
            self.snapshots.push(u.to_vec());
        }
    }
}

fn check_snapshots(grid: &SimulationGrid, at: &[usize]) -> Result<()> {
    match at.iter().find(|&&k| k > grid.steps) {
        Some(&k) => Err(Error::Length {
            what: "snapshot level",
            expected: grid.steps,
            found: k,
        }),
        None if at.windows(2).any(|w| w[0] > w[1]) => {
            Err(Error::InvalidGrid("snapshot levels must be sorted".into()))
        }
        None => Ok(()),
    }
}

/// Streaming solve keeping only the boundary trace and snapshots at the
/// (sorted) levels `at`.
pub fn solve_traces(
    grid: &SimulationGrid,
    medium: &Medium,
    neumann: &BoundaryTrace,
    startup: Startup,
    at: &[usize],
) -> Result<SolveOutput> {
    require_cfl(grid)?;
    medium.check(grid)?;
    check_trace(grid, neumann)?;
    check_startup(neumann, startup)?;
    check_snapshots(grid, at)?;

    let mut out = SolveOutput::new(grid, at.len());
    let mut st = Stepper::new(medium, grid.dx, grid.dt);
    for n in 0..=grid.steps {
        out.record(n, st.current(), at);
        if n < grid.steps {
            let (gl, gr) = neumann.at(n);
            st.eval(gl, gr, None);
            st.advance();
        }
    }
    Ok(out)
}

/// `Λ_rho f`: Dirichlet trace of the Neumann problem driven by `f`.
pub fn nd_map(grid: &SimulationGrid, medium: &Medium, f: &BoundaryTrace) -> Result<BoundaryTrace> {
    Ok(solve_traces(grid, medium, f, Startup::Window, &[])?.trace)
}

/// Background and linearized solves run in lockstep.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedOutput {
    pub background: SolveOutput,
    pub perturbation: SolveOutput,
}

/// Solves the background problem with data `f` and the linearized problem
/// with source `-rho_dot u0_tt` and homogeneous Neumann data, where `u0_tt`
/// is the second time derivative the background stepper used.
pub fn linearized_solve(
    grid: &SimulationGrid,
    background: &Medium,
    rho_dot: &[f64],
    f: &BoundaryTrace,
    startup: Startup,
    at: &[usize],
) -> Result<LinearizedOutput> {
    require_cfl(grid)?;
    background.check(grid)?;
    if rho_dot.len() != grid.nodes() {
        return Err(Error::Length {
            what: "density perturbation",
            expected: grid.nodes(),
            found: rho_dot.len(),
        });
    }
    check_trace(grid, f)?;
    check_startup(f, startup)?;
    check_snapshots(grid, at)?;

    let mut bg_out = SolveOutput::new(grid, at.len());
    let mut lin_out = SolveOutput::new(grid, at.len());
    let mut bg = Stepper::new(background, grid.dx, grid.dt);
    let mut lin = Stepper::new(background, grid.dx, grid.dt);
    let mut src = vec![0.0; grid.nodes()];
    for n in 0..=grid.steps {
        bg_out.record(n, bg.current(), at);
        lin_out.record(n, lin.current(), at);
        if n < grid.steps {
            let (gl, gr) = f.at(n);
            bg.eval(gl, gr, None);
            for ((s, d), a) in src.iter_mut().zip(rho_dot).zip(bg.utt()) {
                *s = -d * a;
            }
            lin.eval(0.0, 0.0, Some(&src));
            bg.advance();
            lin.advance();
        }
    }
    Ok(LinearizedOutput {
        background: bg_out,
        perturbation: lin_out,
    })
}

/// `Λ̇ f`: Dirichlet trace of the linearized problem.
pub fn linearized_nd_map(
    grid: &SimulationGrid,
    background: &Medium,
    rho_dot: &[f64],
    f: &BoundaryTrace,
) -> Result<BoundaryTrace> {
    linearized_map_with(grid, background, rho_dot, f, Startup::Window)
}

pub fn linearized_map_with(
    grid: &SimulationGrid,
    background: &Medium,
    rho_dot: &[f64],
    f: &BoundaryTrace,
    startup: Startup,
) -> Result<BoundaryTrace> {
    Ok(
        linearized_solve(grid, background, rho_dot, f, startup, &[])?
            .perturbation
            .trace,
    )
}

/// Discrete energy `½ ∫ rho u_t² + u_x² + q u²` at level `n` of a field with
/// homogeneous Neumann data there, using centred differences in time and
/// fourth-order differences in space.
pub fn discrete_energy(field: &SpaceTimeField, medium: &Medium, n: usize) -> f64 {
    let g = &field.grid;
    let (prev, cur, next) = (field.row(n - 1), field.row(n), field.row(n + 1));
    let mut row = crate::fd_kernels::with_ghost_slots(cur);
    Kernel::new().ghosts(&mut row, 0.0, 0.0, g.dx);
    let nodes = g.nodes();
    let stencils = crate::fd_kernels::fourth_order_stencils();
    let density: Vec<f64> = (0..nodes)
        .map(|j| {
            let ut = (next[j] - prev[j]) / (2.0 * g.dt);
            let k = j + 1;
            let ux = if j == 0 {
                stencils.left_first.apply(&row, k)
            } else if j == nodes - 1 {
                stencils.right_first.apply(&row, k)
            } else {
                (row[k - 2] - 8.0 * row[k - 1] + 8.0 * row[k + 1] - row[k + 2]) / 12.0
            } / g.dx;
            0.5 * (medium.rho[j] * ut * ut + ux * ux + medium.q[j] * cur[j] * cur[j])
        })
        .collect();
    crate::grid::trapezoid(&density, g.dx)
}
