//! Time integration of the reduced system
//!
//! ```text
//! d_t Pi    + u . ∇Pi    = nu Δ5 Pi            (nu = 0 ideal, 1 resistive)
//! d_t Omega + u . ∇Omega = Δ5 Omega - d_z Pi^2
//! -Δ5 q = Omega,  u^r = -r d_z q,  u^z = 2 q + r d_r q
//! ```
//!
//! with Heun's method in its SSP form. The stream function and velocity are
//! recomputed from `Omega` at both stages.

use serde::{Deserialize, Serialize};

use crate::advect::{self, OmegaScheme, PiScheme};
use crate::diagnostics::{self, DiagnosticsRecord};
use crate::error::{BlowUpReport, Error, Result};
use crate::grid::{laplace5d_at, Boundary, Grid, Parity, ScalarField, VelocityField};
use crate::par;
use crate::poisson::{velocity_from_q, StreamSolver};

/// Viscosity and (when enabled) resistivity.
pub const DIFFUSIVITY: f64 = 1.0;

/// Ratio between the axis-row coefficient of Δ5 (`4 d_r^2`) and an ordinary
/// second derivative; the explicit diffusive step limit is scaled by it.
pub const AXIS_FACTOR: f64 = 4.0;

/// Guard against dividing by a vanishing speed in the advective limit.
pub const SPEED_FLOOR: f64 = 1e-12;

/// The final step may exceed the CFL step by this fraction to land on
/// `t_end`.
pub const LANDING_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Ideal,
    Resistive,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Ideal => "ideal",
            Mode::Resistive => "resistive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub t_end: f64,
    pub cfl_adv: f64,
    pub cfl_diff: f64,
    pub dt_max: f64,
    pub pi_scheme: PiScheme,
    pub omega_scheme: OmegaScheme,
    /// Emit a diagnostics record every this many steps (and at the end).
    pub output_every: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Ideal,
            t_end: 1.0,
            cfl_adv: 0.4,
            cfl_diff: 0.2,
            dt_max: 1e-2,
            pi_scheme: PiScheme::Upwind1,
            omega_scheme: OmegaScheme::Centered2,
            output_every: 10,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let in_unit = |x: f64| x > 0.0 && x < 1.0;
        if !in_unit(self.cfl_adv) || !in_unit(self.cfl_diff) {
            return Err(Error::config(format!(
                "CFL constants must lie in (0, 1), got cfl_adv = {}, cfl_diff = {}",
                self.cfl_adv, self.cfl_diff
            )));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::config(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if !(self.dt_max.is_finite() && self.dt_max > 0.0) {
            return Err(Error::config(format!("dt_max must be > 0, got {}", self.dt_max)));
        }
        if self.output_every == 0 {
            return Err(Error::config("output_every must be at least 1"));
        }
        Ok(())
    }
}

/// Dynamical state at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct AxiState {
    pub time: f64,
    pub pi: ScalarField,
    pub omega: ScalarField,
    /// `psi^theta / r`, consistent with `omega`.
    pub psi_over_r: ScalarField,
    pub velocity: VelocityField,
    pub mode: Mode,
}

fn check_state_field(f: &ScalarField, grid: &Grid, what: &str) -> Result<()> {
    if f.grid() != grid {
        return Err(Error::invalid(format!("{what} lives on a different grid")));
    }
    if f.parity() != Parity::Even || f.boundary() != Boundary::DirichletZero {
        return Err(Error::invalid(format!("{what} must be even with a Dirichlet wall")));
    }
    Ok(())
}

impl AxiState {
    /// Builds a state at time `time`, deriving the stream function and
    /// velocity from `omega`.
    pub fn new(
        pi: ScalarField,
        omega: ScalarField,
        mode: Mode,
        time: f64,
        solver: &StreamSolver,
    ) -> Result<Self> {
        let grid = *solver.grid();
        check_state_field(&pi, &grid, "Pi")?;
        check_state_field(&omega, &grid, "Omega")?;
        pi.check_finite()?;
        let psi_over_r = solver.solve_field(&omega)?;
        let velocity = velocity_from_q(&psi_over_r)?;
        Ok(Self {
            time,
            pi,
            omega,
            psi_over_r,
            velocity,
            mode,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.pi.grid()
    }

    /// `B^theta = r Pi`.
    pub fn b_theta(&self) -> ScalarField {
        self.pi.times_r()
    }

    /// `omega^theta = r Omega`.
    pub fn omega_theta(&self) -> ScalarField {
        self.omega.times_r()
    }

    pub fn is_finite(&self) -> bool {
        self.pi.is_finite() && self.omega.is_finite() && self.velocity.is_finite()
    }
}

fn build_rhs(grid: Grid, op: impl Fn(usize, usize) -> f64 + Sync + Send) -> ScalarField {
    let mut out = ScalarField::zeros(grid, Parity::Even, Boundary::DirichletZero);
    let n = grid.n_r();
    par::for_each_row(&mut out.values, grid.n_z(), |i, row| {
        if i == n {
            return;
        }
        for (j, v) in row.iter_mut().enumerate() {
            *v = op(i, j);
        }
    });
    out
}

/// Tendency of `Pi`: transport by the chosen monotone scheme, plus `Δ5 Pi`
/// in resistive mode. Zero on the wall.
pub fn rhs_pi_with(
    pi: &ScalarField,
    velocity: &VelocityField,
    mode: Mode,
    scheme: PiScheme,
) -> ScalarField {
    build_rhs(*pi.grid(), |i, j| {
        let adv = advect::pi_advection_at(scheme, pi, velocity, i, j);
        match mode {
            Mode::Ideal => adv,
            Mode::Resistive => adv + DIFFUSIVITY * laplace5d_at(pi, i, j),
        }
    })
}

pub fn rhs_pi(state: &AxiState, config: &RunConfig) -> ScalarField {
    rhs_pi_with(&state.pi, &state.velocity, state.mode, config.pi_scheme)
}

/// Tendency of `Omega`: `-(u . ∇) Omega + Δ5 Omega - d_z Pi^2`. Zero on the
/// wall.
pub fn rhs_omega_with(
    omega: &ScalarField,
    pi: &ScalarField,
    velocity: &VelocityField,
    scheme: OmegaScheme,
) -> ScalarField {
    let g = *omega.grid();
    let inv_2hz = 1.0 / (2.0 * g.h_z());
    build_rhs(g, |i, j| {
        let adv = match scheme {
            OmegaScheme::Centered2 => advect::centered_advection_at(omega, velocity, i, j),
        };
        let p_up = pi.at(i, g.jp(j));
        let p_dn = pi.at(i, g.jm(j));
        let forcing = (p_up * p_up - p_dn * p_dn) * inv_2hz;
        adv + DIFFUSIVITY * laplace5d_at(omega, i, j) - forcing
    })
}

pub fn rhs_omega(state: &AxiState, config: &RunConfig) -> ScalarField {
    rhs_omega_with(&state.omega, &state.pi, &state.velocity, config.omega_scheme)
}

/// Explicit step limit:
/// `min(dt_max, cfl_adv h / max(|u|, eps), cfl_diff h^2 / (AXIS_FACTOR nu))`
/// with `h = min(h_r, h_z)`.
pub fn cfl_dt(state: &AxiState, config: &RunConfig) -> f64 {
    let g = state.grid();
    let h = g.h_r().min(g.h_z());
    let speed = state.velocity.max_speed().max(SPEED_FLOOR);
    let advective = config.cfl_adv * h / speed;
    let diffusive = config.cfl_diff * h * h / (AXIS_FACTOR * DIFFUSIVITY);
    config.dt_max.min(advective).min(diffusive)
}

fn blow_up(state: &AxiState, step: usize) -> Error {
    Error::BlowUp(BlowUpReport {
        time: state.time,
        step,
        pi_linf: state.pi.max_abs(),
        omega_linf: state.omega.max_abs(),
        velocity_linf: state.velocity.max_speed(),
    })
}

/// Integrates the reduced system on one grid, reusing a single stream
/// solver.
#[derive(Debug)]
pub struct Simulator {
    config: RunConfig,
    solver: StreamSolver,
}

/// Result of a completed run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub final_state: AxiState,
    pub records: Vec<DiagnosticsRecord>,
    pub steps: usize,
}

impl Simulator {
    pub fn new(grid: Grid, config: RunConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            solver: StreamSolver::new(grid),
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn solver(&self) -> &StreamSolver {
        &self.solver
    }

    pub fn initial_state(&self, pi: ScalarField, omega: ScalarField) -> Result<AxiState> {
        AxiState::new(pi, omega, self.config.mode, 0.0, &self.solver)
    }

    /// `u0 + dt * (rhs_pi, rhs_omega)(u0)`, velocity refreshed.
    fn euler(&self, state: &AxiState, dt: f64, step: usize) -> Result<AxiState> {
        let dpi = rhs_pi(state, &self.config);
        let dom = rhs_omega(state, &self.config);
        let pi = state.pi.zip_map(&dpi, |a, b| a + dt * b);
        let omega = state.omega.zip_map(&dom, |a, b| a + dt * b);
        if !(pi.is_finite() && omega.is_finite()) {
            return Err(blow_up(state, step));
        }
        AxiState::new(pi, omega, state.mode, state.time + dt, &self.solver)
    }

    /// One SSP-RK2 step of size `dt`: the average of `u0` and two chained
    /// forward-Euler steps.
    pub fn step_with_dt(&self, state: &AxiState, dt: f64, step: usize) -> Result<AxiState> {
        let stage = self.euler(state, dt, step)?;
        let second = self.euler(&stage, dt, step)?;
        let pi = state.pi.zip_map(&second.pi, |a, b| 0.5 * a + 0.5 * b);
        let omega = state.omega.zip_map(&second.omega, |a, b| 0.5 * a + 0.5 * b);
        let next = AxiState::new(pi, omega, state.mode, state.time + dt, &self.solver)?;
        if !next.is_finite() {
            return Err(blow_up(&next, step + 1));
        }
        Ok(next)
    }

    pub fn step(&self, state: &AxiState) -> Result<AxiState> {
        self.step_with_dt(state, cfl_dt(state, &self.config), 0)
    }

    pub fn run(&self, initial: AxiState) -> Result<RunOutput> {
        self.run_observed(initial, |_, _, _| {})
    }

    /// Runs to `t_end`, calling `observer(step, state, record)` for every
    /// emitted record. The final step is shortened to land on `t_end`.
    pub fn run_observed<F>(&self, initial: AxiState, mut observer: F) -> Result<RunOutput>
    where
        F: FnMut(usize, &AxiState, &DiagnosticsRecord),
    {
        let cfg = &self.config;
        let mut state = initial;
        let mut records = Vec::new();
        let first = diagnostics::record(&state, cfl_dt(&state, cfg));
        observer(0, &state, &first);
        records.push(first);

        let mut steps = 0usize;
        let t_end = cfg.t_end;
        while state.time < t_end {
            let mut dt = cfl_dt(&state, cfg);
            let remaining = t_end - state.time;
            // absorb round-off remainders instead of taking a sliver step
            let last = remaining <= dt * (1.0 + LANDING_SLACK);
            if last {
                dt = remaining;
            }
            let mut next = self.step_with_dt(&state, dt, steps)?;
            steps += 1;
            if last {
                next.time = t_end;
            }
            state = next;
            if steps.is_multiple_of(cfg.output_every) || last {
                let mut rec = diagnostics::record(&state, dt);
                let prev = records.last().expect("initial record");
                rec.ineq31_residual = diagnostics::ineq31_interval(prev, &rec);
                observer(steps, &state, &rec);
                records.push(rec);
            }
        }
        Ok(RunOutput {
            final_state: state,
            records,
            steps,
        })
    }
}

/// One step with a freshly built solver and the CFL step size.
pub fn step(state: &AxiState, config: &RunConfig) -> Result<AxiState> {
    Simulator::new(*state.grid(), *config)?.step(state)
}

/// Runs `config` from `(pi0, omega0)`.
pub fn run(config: &RunConfig, pi0: ScalarField, omega0: ScalarField) -> Result<RunOutput> {
    let sim = Simulator::new(*pi0.grid(), *config)?;
    let init = sim.initial_state(pi0, omega0)?;
    sim.run(init)
}
