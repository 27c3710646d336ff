//! Pass/fail checks on trajectories and steady states of the discrete system.

use std::fmt;

use thiserror::Error;

use crate::error::{Error, Result};
use crate::model::{zoo_intake, Grid, Model, Parameters, State, NEGATIVITY_TOLERANCE};
use crate::oracles::dense_solve;
use crate::timestepper::{full_rhs, Trajectory};

/// Relative slack allowed on fitted extinction rates.
pub const DECAY_RATE_SLACK: f64 = 0.05;

/// Outcome of one invariant check.
///
/// `worst` is the signed distance outside the invariant set at the worst
/// point (positive means outside), so the check fails exactly when
/// `worst > tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantReport {
    pub name: String,
    pub passed: bool,
    pub worst: f64,
    /// Offending node, `None` for scalar quantities.
    pub node: Option<usize>,
    pub t: f64,
    pub tolerance: f64,
}

impl InvariantReport {
    fn new(name: &str, worst: f64, node: Option<usize>, t: f64, tolerance: f64) -> Self {
        InvariantReport {
            name: name.to_string(),
            passed: worst <= tolerance,
            worst,
            node,
            t,
            tolerance,
        }
    }
}

impl fmt::Display for InvariantReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} worst={:e} t={}",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.worst,
            self.t
        )
    }
}

/// All of `n`, `p`, `z` stay `>= -tol` at every snapshot.
pub fn check_positivity(traj: &Trajectory, tol: f64) -> InvariantReport {
    let mut min = f64::INFINITY;
    let mut node = None;
    let mut t = traj.initial().t;
    for s in &traj.snapshots {
        for (j, &v) in s.n.iter().chain(&s.p).enumerate() {
            if v < min {
                min = v;
                node = Some(j % s.n.len());
                t = s.t;
            }
        }
        if s.z < min {
            min = s.z;
            node = None;
            t = s.t;
        }
    }
    InvariantReport::new("POSITIVITY", 0.0 - min, node, t, tol)
}

/// `n <= max(n_H, max n_0) + tol` at every snapshot.
pub fn check_n_bound(traj: &Trajectory, params: &Parameters, tol: f64) -> InvariantReport {
    let n0_max = traj
        .initial()
        .n
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let bound = params.boundary_nutrient.max(n0_max);
    let mut max = f64::NEG_INFINITY;
    let mut node = None;
    let mut t = traj.initial().t;
    for s in &traj.snapshots {
        for (j, &v) in s.n.iter().enumerate() {
            if v > max {
                max = v;
                node = Some(j);
                t = s.t;
            }
        }
    }
    InvariantReport::new("N_BOUND", max - bound, node, t, tol)
}

/// Exponential fit of `∫p` over a time window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    /// `r/chi - m_p`.
    pub bound: f64,
    pub passed: bool,
}

/// Least-squares slope of `log ∫p` over snapshots in `window`, compared to
/// the growth bound `r/chi - m_p` with [`DECAY_RATE_SLACK`] relative slack.
///
/// Refuses to run unless `m_p > r/chi`.
pub fn fit_extinction(
    traj: &Trajectory,
    params: &Parameters,
    window: (f64, f64),
) -> Result<DecayFit> {
    if !params.extinction_guaranteed() {
        return Err(Error::Precondition(format!(
            "extinction fit requires m_p > r/chi (m_p = {}, r/chi = {})",
            params.phyto_mortality,
            params.max_growth_rate()
        )));
    }
    let (start, end) = window;
    let first = traj.initial().t;
    let last = traj.last().t;
    let eps = 1e-12 * (1.0 + last.abs());
    if !(start < end && start >= first - eps && end <= last + eps) {
        return Err(Error::Precondition(format!(
            "window [{start}, {end}] must lie within the trajectory span [{first}, {last}]"
        )));
    }
    let mut pts = Vec::new();
    for d in &traj.diagnostics {
        if d.t >= start - eps && d.t <= end + eps {
            if !(d.int_p > 0.0) {
                return Err(Error::Precondition(format!(
                    "∫p = {} at t = {} is not positive; p is already extinct",
                    d.int_p, d.t
                )));
            }
            pts.push((d.t, d.int_p.ln()));
        }
    }
    if pts.len() < 2 {
        return Err(Error::Precondition(
            "extinction window must contain at least two snapshots".into(),
        ));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let rate = sty / stt;
    let r_squared = if syy > 0.0 {
        (sty * sty / (stt * syy)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let bound = params.max_growth_rate() - params.phyto_mortality;
    Ok(DecayFit {
        rate,
        window,
        r_squared,
        bound,
        passed: rate <= bound + DECAY_RATE_SLACK * bound.abs(),
    })
}

/// Forward differences of `z` against `z (I(p) - m)`, `I(p) = (k/H) ∫ g(p)`.
///
/// The slack is `C Δt`, with `C` the larger of the observed curvature of `z`
/// and `z (I - m)^2 + m z |I - m|`, a bound on the truncation of a forward
/// difference plus the bias of the implicit decay.
pub fn check_z_inequality(
    traj: &Trajectory,
    model: &Model,
    grid: &Grid,
) -> Result<InvariantReport> {
    let params = &model.params;
    let snaps = &traj.snapshots;
    if snaps.len() < 2 {
        return Ok(InvariantReport::new(
            "Z_INEQUALITY",
            0.0,
            None,
            traj.initial().t,
            0.0,
        ));
    }
    let mut growth = Vec::with_capacity(snaps.len());
    for s in snaps {
        growth.push(zoo_intake(&s.p, model.response, params, grid)? - params.zoo_mortality);
    }
    let slopes: Vec<f64> = snaps
        .windows(2)
        .map(|w| (w[1].z - w[0].z) / (w[1].t - w[0].t))
        .collect();

    let mut curvature = 0.0f64;
    for i in 1..slopes.len() {
        let span = 0.5 * (snaps[i + 1].t - snaps[i - 1].t);
        curvature = curvature.max((slopes[i] - slopes[i - 1]).abs() / span);
    }
    // Per interval, z' - zG integrates to about z (dG + G^2 dt) / 2; the
    // implicit mortality adds m |G| per step.
    let mut model_bound = 0.0f64;
    for (i, w) in snaps.windows(2).enumerate() {
        let dt = w[1].t - w[0].t;
        let g_max = growth[i].abs().max(growth[i + 1].abs());
        let z_max = w[0].z.abs().max(w[1].z.abs());
        let drift = (growth[i + 1] - growth[i]).abs() / dt;
        model_bound =
            model_bound.max(z_max * (drift + g_max * g_max + params.zoo_mortality * g_max));
    }
    let c = curvature.max(model_bound);
    let z_scale = snaps.iter().map(|s| s.z.abs()).fold(0.0, f64::max);

    let mut worst: Option<(f64, f64, f64, f64)> = None; // (margin, excess, slack, t)
    for (i, slope) in slopes.iter().enumerate() {
        let dt = snaps[i + 1].t - snaps[i].t;
        let excess = slope - snaps[i].z * growth[i];
        let slack = c * dt + 16.0 * f64::EPSILON * z_scale / dt;
        let margin = excess - slack;
        if worst.is_none_or(|w| margin > w.0) {
            worst = Some((margin, excess, slack, snaps[i].t));
        }
    }
    let (_, excess, slack, t) = worst.expect("at least one difference");
    Ok(InvariantReport::new("Z_INEQUALITY", excess, None, t, slack))
}

/// `‖D Δ U + R(U)‖∞` over all components, Dirichlet row excluded.
pub fn steady_residual(state: &State, model: &Model, grid: &Grid) -> Result<f64> {
    let rates = full_rhs(state, model, grid)?;
    Ok(rates
        .dn
        .iter()
        .chain(&rates.dp)
        .fold(rates.dz.abs(), |acc, v| acc.max(v.abs())))
}

/// Unknowns of the steady problem: `n_0..n_{M-2}`, `p_0..p_{M-1}`, `z`.
pub fn steady_unknowns(state: &State) -> Vec<f64> {
    let m = state.n.len();
    let mut x = Vec::with_capacity(2 * m);
    x.extend_from_slice(&state.n[..m - 1]);
    x.extend_from_slice(&state.p);
    x.push(state.z);
    x
}

fn state_from_unknowns(x: &[f64], template: &State) -> State {
    let m = template.n.len();
    let mut n = x[..m - 1].to_vec();
    n.push(template.n[m - 1]);
    State::new(n, x[m - 1..2 * m - 1].to_vec(), x[2 * m - 1], template.t)
}

/// Steady-state residual vector, ordered like [`steady_unknowns`].
pub fn steady_rhs_vector(state: &State, model: &Model, grid: &Grid) -> Result<Vec<f64>> {
    let rates = full_rhs(state, model, grid)?;
    let m = rates.dn.len();
    let mut f = Vec::with_capacity(2 * m);
    f.extend_from_slice(&rates.dn[..m - 1]);
    f.extend_from_slice(&rates.dp);
    f.push(rates.dz);
    Ok(f)
}

/// Dense finite-difference Jacobian of [`steady_rhs_vector`].
///
/// Central differences, switching to a second-order forward stencil where a
/// central step would push a phytoplankton density or `z` negative.
pub fn steady_jacobian(state: &State, model: &Model, grid: &Grid) -> Result<Vec<Vec<f64>>> {
    let x = steady_unknowns(state);
    let dim = x.len();
    let m = state.n.len();
    let eval = |x: &[f64]| steady_rhs_vector(&state_from_unknowns(x, state), model, grid);
    let mut jac = vec![vec![0.0; dim]; dim];
    let mut probe = x.clone();
    for col in 0..dim {
        let h = 1e-6 * x[col].abs().max(1.0);
        let nonneg = col >= m - 1;
        let column: Vec<f64> = if nonneg && x[col] - h < 0.0 {
            probe[col] = x[col] + h;
            let f1 = eval(&probe)?;
            probe[col] = x[col] + 2.0 * h;
            let f2 = eval(&probe)?;
            probe[col] = x[col];
            let f0 = eval(&probe)?;
            (0..dim)
                .map(|i| (-3.0 * f0[i] + 4.0 * f1[i] - f2[i]) / (2.0 * h))
                .collect()
        } else {
            probe[col] = x[col] + h;
            let fp = eval(&probe)?;
            probe[col] = x[col] - h;
            let fm = eval(&probe)?;
            (0..dim).map(|i| (fp[i] - fm[i]) / (2.0 * h)).collect()
        };
        probe[col] = x[col];
        for (row, v) in column.into_iter().enumerate() {
            jac[row][col] = v;
        }
    }
    Ok(jac)
}

/// A converged steady state.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub state: State,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Error)]
pub enum SteadyFailure {
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },
    #[error("singular Jacobian at iteration {iteration}")]
    SingularJacobian { iteration: usize },
    #[error("every damped step left the admissible set at iteration {iteration}")]
    LeftAdmissibleSet { iteration: usize },
    #[error("line search stalled at iteration {iteration} (residual {residual:e})")]
    LineSearchStalled { iteration: usize, residual: f64 },
    #[error(transparent)]
    Model(#[from] Error),
}

const MAX_HALVINGS: usize = 30;

fn admissible(state: &State, chi: f64) -> bool {
    state.is_finite()
        && state.z >= -NEGATIVITY_TOLERANCE
        && state.p.iter().all(|&v| v >= -NEGATIVITY_TOLERANCE)
        && state.n.iter().all(|&v| 1.0 + chi * v >= 0.5)
}

/// Damped Newton iteration on `D Δ U + R(U) = 0` with a finite-difference
/// Jacobian. Each step is halved (at most 30 times) until the residual drops.
pub fn find_steady(
    guess: &State,
    model: &Model,
    grid: &Grid,
    tol: f64,
    max_iter: usize,
) -> std::result::Result<SteadyState, SteadyFailure> {
    guess.check_shape(grid)?;
    let mut state = guess.clone();
    let last = state.n.len() - 1;
    state.n[last] = model.params.boundary_nutrient;
    if !admissible(&state, model.params.chi) {
        return Err(SteadyFailure::LeftAdmissibleSet { iteration: 0 });
    }
    let mut residual = steady_residual(&state, model, grid)?;

    for iteration in 0..max_iter {
        if residual <= tol {
            return Ok(SteadyState {
                state,
                iterations: iteration,
                residual,
            });
        }
        let f = steady_rhs_vector(&state, model, grid)?;
        let jac = steady_jacobian(&state, model, grid)?;
        let neg_f: Vec<f64> = f.iter().map(|v| -v).collect();
        let delta = match dense_solve(&jac, &neg_f) {
            Ok(d) => d,
            Err(Error::SingularMatrix) => {
                return Err(SteadyFailure::SingularJacobian { iteration })
            }
            Err(e) => return Err(e.into()),
        };
        let x = steady_unknowns(&state);
        let mut alpha = 1.0;
        let mut accepted = None;
        let mut any_admissible = false;
        for _ in 0..=MAX_HALVINGS {
            let trial_x: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a + alpha * d).collect();
            let trial = state_from_unknowns(&trial_x, &state);
            if admissible(&trial, model.params.chi) {
                any_admissible = true;
                let r = steady_residual(&trial, model, grid)?;
                if r < residual {
                    accepted = Some((trial, r));
                    break;
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((s, r)) => {
                state = s;
                residual = r;
            }
            None if !any_admissible => return Err(SteadyFailure::LeftAdmissibleSet { iteration }),
            None => {
                return Err(SteadyFailure::LineSearchStalled {
                    iteration,
                    residual,
                })
            }
        }
    }
    if residual <= tol {
        return Ok(SteadyState {
            state,
            iterations: max_iter,
            residual,
        });
    }
    Err(SteadyFailure::MaxIterations {
        iterations: max_iter,
        residual,
    })
}
