//! Conservative finite-volume method of lines for the full system on
//! `(0, L)` with zero-flux boundaries.
//!
//! One substep of size `h`:
//! 1. `w` by backward Euler, sourced by the old densities;
//! 2. face gradients of the new `w` (zero on the boundary faces);
//! 3. each density gets an explicit upwind chemotactic flux divergence and
//!    explicit kinetics, then a backward-Euler diffusion solve.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{equilibrium, kinetics, ModelParams};
use crate::tridiag::solve_neumann_in_place;

/// Densities below `-POSITIVITY_TOL` abort the run.
pub const POSITIVITY_TOL: f64 = 1e-12;

/// Cell width used when no cell count is given.
pub const DEFAULT_DX: f64 = 0.02;

/// Uniform cell-centered grid on `(0, length)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub length: f64,
    pub n: usize,
    pub dx: f64,
    pub centers: Vec<f64>,
}

impl Grid1D {
    pub fn new(length: f64, n: usize) -> Result<Self> {
        if n < 8 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 8 cells (got {n})"
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "interval length must be > 0 (got {length})"
            )));
        }
        let dx = length / n as f64;
        let centers = (0..n).map(|i| (i as f64 + 0.5) * dx).collect();
        Ok(Self {
            length,
            n,
            dx,
            centers,
        })
    }

    pub fn default_cells(length: f64) -> usize {
        ((length / DEFAULT_DX).ceil() as usize).max(8)
    }

    pub fn with_default_spacing(length: f64) -> Result<Self> {
        Self::new(length, Self::default_cells(length))
    }

    /// Index of the cell whose center is nearest to `x`.
    pub fn nearest_cell(&self, x: f64) -> usize {
        let i = (x / self.dx - 0.5).round();
        i.clamp(0.0, (self.n - 1) as f64) as usize
    }
}

/// Cell averages of `(u, v, w)` at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

impl SimState {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// `(sum u dx, sum v dx)`.
    pub fn masses(&self, dx: f64) -> (f64, f64) {
        (
            self.u.iter().sum::<f64>() * dx,
            self.v.iter().sum::<f64>() * dx,
        )
    }

    fn check_positive(&self) -> Result<()> {
        for (i, (&u, &v)) in self.u.iter().zip(&self.v).enumerate() {
            if u < -POSITIVITY_TOL || v < -POSITIVITY_TOL || !u.is_finite() || !v.is_finite() {
                return Err(Error::PositivityLoss {
                    t: self.t,
                    cell: i,
                    value: if u < v { u } else { v },
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub cfl_safety: f64,
    pub max_substeps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            t_end: 100.0,
            cfl_safety: 0.5,
            max_substeps: 64,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be > 0 (got {})", self.dt)));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t_end must be >= 0 (got {})",
                self.t_end
            )));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cfl_safety must lie in (0, 1] (got {})",
                self.cfl_safety
            )));
        }
        if self.max_substeps == 0 {
            return Err(Error::InvalidParameter("max_substeps must be >= 1".into()));
        }
        Ok(())
    }
}

/// Spatial shape of a small perturbation of the constant state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Perturbation {
    /// `cos(k pi x / L)`.
    Mode(u32),
    /// `cos(f x)` for an arbitrary angular frequency `f`.
    RawCosine(f64),
}

pub fn equilibrium_state(p: &ModelParams, grid: &Grid1D) -> Result<SimState> {
    initial_perturbation(p, grid, 0.0, Perturbation::Mode(1))
}

/// The constant state plus `amplitude * c(x)` in every component.
pub fn initial_perturbation(
    p: &ModelParams,
    grid: &Grid1D,
    amplitude: f64,
    shape: Perturbation,
) -> Result<SimState> {
    let e = equilibrium(p)?;
    let profile: Vec<f64> = grid
        .centers
        .iter()
        .map(|&x| match shape {
            Perturbation::Mode(k) => (k as f64 * std::f64::consts::PI * x / grid.length).cos(),
            Perturbation::RawCosine(f) => (f * x).cos(),
        })
        .collect();
    let field = |base: f64| -> Vec<f64> { profile.iter().map(|c| base + amplitude * c).collect() };
    let state = SimState {
        t: 0.0,
        u: field(e.ubar),
        v: field(e.vbar),
        w: field(e.wbar),
    };
    ensure_positive_initial(&state)?;
    Ok(state)
}

/// The constant state plus, independently per component, a sum of the first
/// five cosine modes with amplitudes drawn uniformly from
/// `[-amplitude, amplitude]`.
pub fn random_smooth(p: &ModelParams, grid: &Grid1D, amplitude: f64, seed: u64) -> Result<SimState> {
    let e = equilibrium(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = amplitude.abs();
    let mut field = |base: f64| -> Vec<f64> {
        let coeffs: Vec<f64> = (0..5)
            .map(|_| if a > 0.0 { rng.gen_range(-a..=a) } else { 0.0 })
            .collect();
        grid.centers
            .iter()
            .map(|&x| {
                base + coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, c)| {
                        c * ((j + 1) as f64 * std::f64::consts::PI * x / grid.length).cos()
                    })
                    .sum::<f64>()
            })
            .collect()
    };
    let u = field(e.ubar);
    let v = field(e.vbar);
    let w = field(e.wbar);
    let state = SimState { t: 0.0, u, v, w };
    ensure_positive_initial(&state)?;
    Ok(state)
}

fn ensure_positive_initial(s: &SimState) -> Result<()> {
    for (name, field) in [("u", &s.u), ("v", &s.v), ("w", &s.w)] {
        if let Some(i) = field.iter().position(|&x| !(x > 0.0)) {
            return Err(Error::NonpositiveInitialData(format!(
                "{name}[{i}] = {}",
                field[i]
            )));
        }
    }
    Ok(())
}

/// What a step did: how many substeps and the largest advective CFL number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub substeps: usize,
    pub max_cfl: f64,
}

/// Time-stepper owning its scratch buffers.
#[derive(Debug, Clone)]
pub struct Solver {
    params: ModelParams,
    grid: Grid1D,
    cfg: SolverConfig,
    grad: Vec<f64>,
    flux: Vec<f64>,
    scratch: Vec<f64>,
    scratch_rhs: Vec<f64>,
}

impl Solver {
    pub fn new(params: ModelParams, grid: Grid1D, cfg: SolverConfig) -> Result<Self> {
        params.validate()?;
        cfg.validate()?;
        if (grid.length - params.length).abs() > 1e-12 * params.length {
            return Err(Error::InvalidParameter(format!(
                "grid length {} differs from L = {}",
                grid.length, params.length
            )));
        }
        let n = grid.n;
        Ok(Self {
            params,
            grid,
            cfg,
            grad: vec![0.0; n + 1],
            flux: vec![0.0; n + 1],
            scratch: Vec::with_capacity(n),
            scratch_rhs: Vec::with_capacity(n),
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    fn max_speed(&self, w: &[f64]) -> f64 {
        let dx = self.grid.dx;
        let sens = self.params.chi.abs().max(self.params.xi.abs());
        w.windows(2)
            .map(|p| ((p[1] - p[0]) / dx).abs())
            .fold(0.0, f64::max)
            * sens
    }

    /// Advances by `cfg.dt`.
    pub fn step(&mut self, state: &SimState) -> Result<SimState> {
        let mut next = state.clone();
        self.advance(&mut next, self.cfg.dt)?;
        Ok(next)
    }

    /// Advances `state` by `dt`, split into equal substeps when the advective
    /// CFL number would exceed `cfl_safety`.
    pub fn advance(&mut self, state: &mut SimState, dt: f64) -> Result<StepReport> {
        let n = self.grid.n;
        if state.u.len() != n || state.v.len() != n || state.w.len() != n {
            return Err(Error::InvalidParameter(format!(
                "state has {} cells, grid has {n}",
                state.u.len()
            )));
        }
        let estimate = self.max_speed(&state.w) * dt / self.grid.dx;
        let mut substeps = ((estimate / self.cfg.cfl_safety).ceil() as usize).max(1);
        let mut worst = estimate;
        while substeps <= self.cfg.max_substeps {
            let mut trial = state.clone();
            let h = dt / substeps as f64;
            let mut ok = true;
            let mut max_cfl: f64 = 0.0;
            for j in 0..substeps {
                let cfl = self.substep(&mut trial, h);
                max_cfl = max_cfl.max(cfl);
                if cfl > self.cfg.cfl_safety {
                    worst = cfl;
                    ok = false;
                    break;
                }
                trial.t = state.t + dt * (j + 1) as f64 / substeps as f64;
                trial.check_positive()?;
            }
            if ok {
                trial.t = state.t + dt;
                *state = trial;
                return Ok(StepReport { substeps, max_cfl });
            }
            if substeps == self.cfg.max_substeps {
                break;
            }
            substeps = (substeps * 2).min(self.cfg.max_substeps);
        }
        Err(Error::CflViolation {
            cfl: worst,
            limit: self.cfg.cfl_safety,
            substeps: self.cfg.max_substeps,
        })
    }

    /// One IMEX substep; returns the advective CFL number it used.
    fn substep(&mut self, s: &mut SimState, h: f64) -> f64 {
        let p = self.params;
        let n = self.grid.n;
        let dx = self.grid.dx;
        let inv_dx2 = 1.0 / (dx * dx);

        let kin: Vec<(f64, f64)> = s.u.iter().zip(&s.v).map(|(&u, &v)| kinetics(u, v, &p)).collect();

        // Implicit solves are written for the increment: with A = (1 + shift) I - c Lap,
        // A (x_new - x_old) = rhs - A x_old. Constant states then produce
        // spatially uniform right-hand sides and stay exactly constant.
        let mut delta = std::mem::take(&mut self.scratch_rhs);
        delta.clear();
        let c_w = h * inv_dx2;
        for i in 0..n {
            let lap = neumann_laplacian(&s.w, i);
            delta.push(h * (s.u[i] + s.v[i] - p.lambda * s.w[i]) + c_w * lap);
        }
        solve_neumann_in_place(c_w, h * p.lambda, &mut delta, &mut self.scratch);
        for (w, d) in s.w.iter_mut().zip(&delta) {
            *w += d;
        }

        // grad[f] lives on face f between cells f-1 and f; faces 0 and n are walls
        self.grad[0] = 0.0;
        self.grad[n] = 0.0;
        for f in 1..n {
            self.grad[f] = (s.w[f] - s.w[f - 1]) / dx;
        }

        let mut max_cfl: f64 = 0.0;
        for (field, sens, diff, which) in [
            (&mut s.u, p.chi, p.d1, 0usize),
            (&mut s.v, p.xi, p.d2, 1usize),
        ] {
            self.flux[0] = 0.0;
            self.flux[n] = 0.0;
            for f in 1..n {
                let speed = sens * self.grad[f];
                let upwind = if speed > 0.0 { field[f - 1] } else { field[f] };
                self.flux[f] = speed * upwind;
                max_cfl = max_cfl.max(speed.abs() * h / dx);
            }
            let c = h * diff * inv_dx2;
            delta.clear();
            for i in 0..n {
                let react = if which == 0 { kin[i].0 } else { kin[i].1 };
                let explicit = -h / dx * (self.flux[i + 1] - self.flux[i]) + h * react;
                delta.push(explicit + c * neumann_laplacian(field, i));
            }
            solve_neumann_in_place(c, 0.0, &mut delta, &mut self.scratch);
            for (x, d) in field.iter_mut().zip(&delta) {
                *x += d;
            }
        }
        self.scratch_rhs = delta;
        max_cfl
    }

    /// Steps from `ic` to `cfg.t_end`, recording snapshots and probe series
    /// and handing every accepted state to `observer`.
    pub fn run_with<F>(&mut self, ic: SimState, recorder: &Recorder, mut observer: F) -> Result<RunOutput>
    where
        F: FnMut(&SimState),
    {
        let mut probes: Vec<ProbeSeries> = recorder
            .probe_x
            .iter()
            .map(|&x| {
                let cell = self.grid.nearest_cell(x);
                ProbeSeries {
                    x_requested: x,
                    cell,
                    x: self.grid.centers[cell],
                    samples: Vec::new(),
                }
            })
            .collect();
        let mut snapshots = Vec::new();
        let mut state = ic;
        let t0 = state.t;
        let t_end = self.cfg.t_end;

        let record_probes = |probes: &mut Vec<ProbeSeries>, s: &SimState| {
            for pr in probes.iter_mut() {
                pr.samples.push(ProbeSample {
                    t: s.t,
                    u: s.u[pr.cell],
                    v: s.v[pr.cell],
                    w: s.w[pr.cell],
                });
            }
        };

        record_probes(&mut probes, &state);
        if recorder.snapshot_every.is_some() {
            snapshots.push(state.clone());
        }
        observer(&state);

        let mut next_snapshot = 1usize;
        let mut steps = 0usize;
        let dt = self.cfg.dt;
        while state.t < t_end {
            let target = (t0 + (steps + 1) as f64 * dt).min(t_end);
            let h = target - state.t;
            if h <= 0.0 {
                break;
            }
            self.advance(&mut state, h)?;
            state.t = target;
            steps += 1;
            record_probes(&mut probes, &state);
            observer(&state);
            if let Some(every) = recorder.snapshot_every {
                while state.t + 1e-9 * dt >= t0 + next_snapshot as f64 * every {
                    let mut snap = state.clone();
                    snap.t = state.t;
                    snapshots.push(snap);
                    next_snapshot += 1;
                }
            }
        }
        Ok(RunOutput {
            final_state: state,
            snapshots,
            probes,
            steps,
        })
    }

    pub fn run(&mut self, ic: SimState, recorder: &Recorder) -> Result<RunOutput> {
        self.run_with(ic, recorder, |_| {})
    }
}

/// `x[i-1] - 2 x[i] + x[i+1]` with mirrored ghost cells.
#[inline]
fn neumann_laplacian(x: &[f64], i: usize) -> f64 {
    let n = x.len();
    let left = if i == 0 { 0.0 } else { x[i - 1] - x[i] };
    let right = if i + 1 == n { 0.0 } else { x[i + 1] - x[i] };
    left + right
}

/// Output policy for [`Solver::run`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Recorder {
    /// Snapshot spacing in time units; `None` records no snapshots.
    pub snapshot_every: Option<f64>,
    /// Probe locations, each mapped to its nearest cell center.
    pub probe_x: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSample {
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSeries {
    pub x_requested: f64,
    pub cell: usize,
    pub x: f64,
    pub samples: Vec<ProbeSample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub final_state: SimState,
    pub snapshots: Vec<SimState>,
    pub probes: Vec<ProbeSeries>,
    pub steps: usize,
}
