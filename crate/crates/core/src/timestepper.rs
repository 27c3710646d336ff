//! Time integration of the semi-discrete system.
//!
//! [`step_imex`] treats diffusion and the linear decays (`-m_p p`, `-m z`)
//! implicitly and everything else explicitly:
//!
//! ```text
//! n* = n - dt a p u            (I - dt D Δ_ND) n' = n*,  n'_{M-1} = n_H
//! p* = p + dt (a p u - z g(p)) (I - dt D Δ_NN + dt m_p) p' = p*
//! z' = z (1 + dt I(p)) / (1 + dt m)
//! ```
//!
//! Both implicit matrices are M-matrices, so nonnegative data stay
//! nonnegative as long as the explicit half does. [`step_explicit`] is a
//! classical RK4 step of the full right-hand side, used to cross-check.

use std::fmt;
use std::str::FromStr;

use crate::discretization::{apply_laplacian, build_implicit_system, BoundarySpec, Tridiagonal};
use crate::error::{Error, Field, Result};
use crate::model::{reaction_parts, reaction_rhs, Grid, Model, Rates, State};

/// States with `‖·‖∞` above this abort the run.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ImexEuler,
    ExplicitRk4,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::ImexEuler => "imex",
            Scheme::ExplicitRk4 => "rk4",
        })
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "imex" => Ok(Scheme::ImexEuler),
            "rk4" => Ok(Scheme::ExplicitRk4),
            _ => Err(format!("unknown scheme `{s}` (expected imex | rk4)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    /// Record a snapshot every this many steps (the final step is always recorded).
    pub snapshot_every: usize,
    pub positivity_tol: f64,
    /// Clamp negatives in `[-positivity_tol, 0)` to zero instead of keeping them.
    pub clamp: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 1e-3,
            t_end: 1.0,
            scheme: Scheme::ImexEuler,
            snapshot_every: 100,
            positivity_tol: 1e-10,
            clamp: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter("dt must be > 0".into()));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::InvalidParameter("t_end must be >= 0".into()));
        }
        if self.snapshot_every == 0 {
            return Err(Error::InvalidParameter(
                "snapshot_every must be >= 1".into(),
            ));
        }
        if !(self.positivity_tol.is_finite() && self.positivity_tol >= 0.0) {
            return Err(Error::InvalidParameter(
                "positivity_tol must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Per-snapshot summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub t: f64,
    pub z: f64,
    pub int_p: f64,
    pub int_gp: f64,
    pub min_n: f64,
    pub max_n: f64,
    pub min_p: f64,
    /// Mass-balance defect of the step that produced this snapshot
    /// (0 for the initial condition).
    pub flux_residual: f64,
}

impl Diagnostics {
    pub fn of(state: &State, model: &Model, grid: &Grid, flux_residual: f64) -> Result<Self> {
        let gp: Vec<f64> = state
            .p
            .iter()
            .map(|&p| model.response.eval(p.max(0.0)))
            .collect::<Result<_>>()?;
        Ok(Diagnostics {
            t: state.t,
            z: state.z,
            int_p: grid.integrate(&state.p)?,
            int_gp: grid.integrate(&gp)?,
            min_n: state.n.iter().copied().fold(f64::INFINITY, f64::min),
            max_n: state.n.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min_p: state.p.iter().copied().fold(f64::INFINITY, f64::min),
            flux_residual,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampEvent {
    pub t: f64,
    pub field: Field,
    pub node: usize,
    pub value: f64,
}

/// Time-ordered snapshots; the first is the initial condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<State>,
    pub diagnostics: Vec<Diagnostics>,
    pub clamp_events: Vec<ClampEvent>,
}

impl Trajectory {
    pub fn from_parts(snapshots: Vec<State>, diagnostics: Vec<Diagnostics>) -> Result<Self> {
        if snapshots.is_empty() || snapshots.len() != diagnostics.len() {
            return Err(Error::Precondition(format!(
                "trajectory needs matching nonempty snapshots ({}) and diagnostics ({})",
                snapshots.len(),
                diagnostics.len()
            )));
        }
        if snapshots.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(Error::Precondition(
                "snapshot times must be strictly increasing".into(),
            ));
        }
        Ok(Trajectory {
            snapshots,
            diagnostics,
            clamp_events: Vec::new(),
        })
    }

    pub fn initial(&self) -> &State {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &State {
        self.snapshots.last().expect("trajectory is never empty")
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }
}

/// Stability bound `dx^2 / (2 D)` of explicit diffusion.
pub fn cfl_max_dt(model: &Model, grid: &Grid) -> f64 {
    grid.dx() * grid.dx() / (2.0 * model.params.diffusivity)
}

/// IMEX stepper with both implicit matrices assembled once for a fixed `dt`.
#[derive(Debug, Clone)]
pub struct ImexStepper<'a> {
    model: &'a Model,
    grid: &'a Grid,
    dt: f64,
    nutrient_sys: Tridiagonal,
    phyto_sys: Tridiagonal,
}

impl<'a> ImexStepper<'a> {
    pub fn new(model: &'a Model, grid: &'a Grid, dt: f64) -> Result<Self> {
        let params = &model.params;
        // pinned at zero deviation, see `step`
        let nutrient_sys = build_implicit_system(
            BoundarySpec::NeumannDirichlet { value: 0.0 },
            grid,
            params.diffusivity,
            dt,
            0.0,
        )?;
        let phyto_sys = build_implicit_system(
            BoundarySpec::NeumannNeumann,
            grid,
            params.diffusivity,
            dt,
            params.phyto_mortality,
        )?;
        Ok(ImexStepper {
            model,
            grid,
            dt,
            nutrient_sys,
            phyto_sys,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, state: &State) -> Result<State> {
        let dt = self.dt;
        let parts = reaction_parts(state, self.model, self.grid)?;
        let n_star: Vec<f64> = state
            .n
            .iter()
            .zip(&parts.uptake)
            .map(|(n, u)| n - dt * u)
            .collect();
        let p_star: Vec<f64> = state
            .p
            .iter()
            .zip(&parts.uptake)
            .zip(&parts.grazing)
            .map(|((p, u), g)| p + dt * (u - state.z * g))
            .collect();
        // Rows of the nutrient matrix sum to one, so solving for the deviation
        // from n_H keeps the trivial equilibrium exact in floating point.
        let n_h = self.model.params.boundary_nutrient;
        let deviation: Vec<f64> = n_star.iter().map(|v| v - n_h).collect();
        let mut n = self.nutrient_sys.solve(&deviation)?;
        for v in n.iter_mut() {
            *v += n_h;
        }
        let last = n.len() - 1;
        n[last] = n_h;
        let p = self.phyto_sys.solve(&p_star)?;
        let z = state.z * (1.0 + dt * parts.intake) / (1.0 + dt * self.model.params.zoo_mortality);
        let next = State::new(n, p, z, state.t + dt);
        check_blowup(&next)?;
        Ok(next)
    }
}

/// One IMEX Euler step (implicit diffusion and decay, explicit reaction).
pub fn step_imex(state: &State, model: &Model, grid: &Grid, dt: f64) -> Result<State> {
    ImexStepper::new(model, grid, dt)?.step(state)
}

/// Full semi-discrete right-hand side, with the Dirichlet node frozen.
pub fn full_rhs(state: &State, model: &Model, grid: &Grid) -> Result<Rates> {
    let params = &model.params;
    let mut rates = reaction_rhs(state, model, grid)?;
    let lap_n = apply_laplacian(
        &state.n,
        BoundarySpec::NeumannDirichlet {
            value: params.boundary_nutrient,
        },
        grid,
    )?;
    let lap_p = apply_laplacian(&state.p, BoundarySpec::NeumannNeumann, grid)?;
    for (d, l) in rates.dn.iter_mut().zip(&lap_n) {
        *d += params.diffusivity * l;
    }
    for (d, l) in rates.dp.iter_mut().zip(&lap_p) {
        *d += params.diffusivity * l;
    }
    let last = rates.dn.len() - 1;
    rates.dn[last] = 0.0;
    Ok(rates)
}

fn offset(state: &State, rates: &Rates, h: f64, n_h: f64) -> State {
    let mut n: Vec<f64> = state
        .n
        .iter()
        .zip(&rates.dn)
        .map(|(u, d)| u + h * d)
        .collect();
    let last = n.len() - 1;
    n[last] = n_h;
    let p = state
        .p
        .iter()
        .zip(&rates.dp)
        .map(|(u, d)| u + h * d)
        .collect();
    State::new(n, p, state.z + h * rates.dz, state.t + h)
}

/// One classical RK4 step of the full system. Requires `dt <= cfl_max_dt`.
pub fn step_explicit(state: &State, model: &Model, grid: &Grid, dt: f64) -> Result<State> {
    let max_dt = cfl_max_dt(model, grid);
    if !(dt > 0.0) || dt > max_dt * (1.0 + 1e-12) {
        return Err(Error::Cfl { dt, max_dt });
    }
    let n_h = model.params.boundary_nutrient;
    let mut start = state.clone();
    let last = start.n.len().saturating_sub(1);
    if let Some(v) = start.n.get_mut(last) {
        *v = n_h;
    }
    let k1 = full_rhs(&start, model, grid)?;
    let k2 = full_rhs(&offset(&start, &k1, 0.5 * dt, n_h), model, grid)?;
    let k3 = full_rhs(&offset(&start, &k2, 0.5 * dt, n_h), model, grid)?;
    let k4 = full_rhs(&offset(&start, &k3, dt, n_h), model, grid)?;
    let combine = |u: &[f64], a: &[f64], b: &[f64], c: &[f64], d: &[f64]| -> Vec<f64> {
        (0..u.len())
            .map(|j| u[j] + dt / 6.0 * (a[j] + 2.0 * b[j] + 2.0 * c[j] + d[j]))
            .collect()
    };
    let mut n = combine(&start.n, &k1.dn, &k2.dn, &k3.dn, &k4.dn);
    n[last] = n_h;
    let p = combine(&start.p, &k1.dp, &k2.dp, &k3.dp, &k4.dp);
    let z = start.z + dt / 6.0 * (k1.dz + 2.0 * k2.dz + 2.0 * k3.dz + k4.dz);
    let next = State::new(n, p, z, state.t + dt);
    check_blowup(&next)?;
    Ok(next)
}

fn check_blowup(state: &State) -> Result<()> {
    if !state.is_finite() {
        return Err(Error::Blowup {
            t: state.t,
            reason: "nonfinite value in state".into(),
        });
    }
    let norm = state.max_norm();
    if norm > BLOWUP_THRESHOLD {
        return Err(Error::Blowup {
            t: state.t,
            reason: format!("state norm {norm:e} exceeds {BLOWUP_THRESHOLD:e}"),
        });
    }
    Ok(())
}

/// Conserved quantity `∫n + ∫p + (H/k) z` and its exact rate of change
/// `D n_h(H) - m_p ∫p - (m/k) H z`. The `z` terms are dropped when `k = 0`.
pub fn mass_balance(state: &State, model: &Model, grid: &Grid) -> Result<(f64, f64)> {
    let params = &model.params;
    let int_n = grid.integrate(&state.n)?;
    let int_p = grid.integrate(&state.p)?;
    let m = state.n.len();
    let n = &state.n;
    // second-order one-sided difference at h = H
    let grad = (3.0 * n[m - 1] - 4.0 * n[m - 2] + n[m - 3]) / (2.0 * grid.dx());
    let mut quantity = int_n + int_p;
    let mut rate = params.diffusivity * grad - params.phyto_mortality * int_p;
    if params.food_utilization > 0.0 {
        let zh = grid.depth() / params.food_utilization * state.z;
        quantity += zh;
        rate -= params.zoo_mortality * zh;
    }
    Ok((quantity, rate))
}

fn flux_residual(before: &State, after: &State, model: &Model, grid: &Grid) -> Result<f64> {
    let (q0, g0) = mass_balance(before, model, grid)?;
    let (q1, g1) = mass_balance(after, model, grid)?;
    Ok((q1 - q0) / (after.t - before.t) - 0.5 * (g0 + g1))
}

fn enforce_positivity(
    state: &mut State,
    tol: f64,
    clamp: bool,
    events: &mut Vec<ClampEvent>,
) -> Result<()> {
    let t = state.t;
    let mut visit = |field: Field, node: usize, v: &mut f64| -> Result<()> {
        if *v >= 0.0 {
            return Ok(());
        }
        if *v < -tol {
            return Err(Error::Positivity {
                t,
                field,
                node,
                value: *v,
            });
        }
        if clamp {
            events.push(ClampEvent {
                t,
                field,
                node,
                value: *v,
            });
            *v = 0.0;
        }
        Ok(())
    };
    for (j, v) in state.n.iter_mut().enumerate() {
        visit(Field::Nutrient, j, v)?;
    }
    for (j, v) in state.p.iter_mut().enumerate() {
        visit(Field::Phyto, j, v)?;
    }
    visit(Field::Zoo, 0, &mut state.z)
}

/// Advances `state0` to `config.t_end`, recording snapshots and diagnostics.
pub fn integrate(
    state0: &State,
    model: &Model,
    grid: &Grid,
    config: &SolverConfig,
) -> Result<Trajectory> {
    config.validate()?;
    model.params.validate()?;
    state0.check_shape(grid)?;
    if !state0.is_finite() {
        return Err(Error::Blowup {
            t: state0.t,
            reason: "nonfinite initial condition".into(),
        });
    }
    if config.scheme == Scheme::ExplicitRk4 {
        let max_dt = cfl_max_dt(model, grid);
        if config.dt > max_dt * (1.0 + 1e-12) {
            return Err(Error::Cfl {
                dt: config.dt,
                max_dt,
            });
        }
    }

    let mut events = Vec::new();
    let mut current = state0.clone();
    enforce_positivity(
        &mut current,
        config.positivity_tol,
        config.clamp,
        &mut events,
    )?;

    let mut snapshots = vec![current.clone()];
    let mut diagnostics = vec![Diagnostics::of(&current, model, grid, 0.0)?];

    let t0 = state0.t;
    let span = config.t_end - t0;
    if span <= 0.0 {
        return Ok(Trajectory {
            snapshots,
            diagnostics,
            clamp_events: events,
        });
    }
    let steps = ((span / config.dt) - 1e-9).ceil().max(1.0) as usize;
    let imex = match config.scheme {
        Scheme::ImexEuler => Some(ImexStepper::new(model, grid, config.dt)?),
        Scheme::ExplicitRk4 => None,
    };

    for k in 1..=steps {
        let t_next = if k == steps {
            config.t_end
        } else {
            t0 + k as f64 * config.dt
        };
        let dt = t_next - current.t;
        let full_step = (dt - config.dt).abs() <= 1e-12 * config.dt;
        let mut next = match (&imex, full_step) {
            (Some(stepper), true) => stepper.step(&current)?,
            (Some(_), false) => step_imex(&current, model, grid, dt)?,
            (None, _) => step_explicit(&current, model, grid, dt)?,
        };
        next.t = t_next;
        enforce_positivity(&mut next, config.positivity_tol, config.clamp, &mut events)?;
        if k % config.snapshot_every == 0 || k == steps {
            let residual = flux_residual(&current, &next, model, grid)?;
            diagnostics.push(Diagnostics::of(&next, model, grid, residual)?);
            snapshots.push(next.clone());
        }
        current = next;
    }

    Ok(Trajectory {
        snapshots,
        diagnostics,
        clamp_events: events,
    })
}
