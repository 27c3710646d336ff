//! Target-independent state behind the browser bindings.

use plankton_core::timestepper::ImexStepper;
use plankton_core::{FunctionalResponse, Grid, LightModel, Model, Parameters, State};

pub const PARAM_NAMES: [&str; 10] = ["D", "H", "chi", "m", "m_p", "k", "r", "gamma", "nu", "n_H"];

fn param_slot<'a>(params: &'a mut Parameters, name: &str) -> Option<&'a mut f64> {
    Some(match name {
        "D" => &mut params.diffusivity,
        "H" => &mut params.depth,
        "chi" => &mut params.chi,
        "m" => &mut params.zoo_mortality,
        "m_p" => &mut params.phyto_mortality,
        "k" => &mut params.food_utilization,
        "r" => &mut params.uptake_rate,
        "gamma" => &mut params.light_attenuation,
        "nu" => &mut params.self_shading,
        "n_H" => &mut params.boundary_nutrient,
        _ => return None,
    })
}

/// A running column with its `(t, ∫p, z)` history.
#[derive(Debug, Clone)]
pub struct Session {
    model: Model,
    grid: Grid,
    state: State,
    dt: f64,
    history: Vec<[f64; 3]>,
}

impl Session {
    pub fn new(light: &str, response: &str, nodes: usize) -> Result<Self, String> {
        let light: LightModel = light.parse()?;
        let response: FunctionalResponse = response.parse()?;
        let params = Parameters::default();
        let model = Model::new(params, light, response).map_err(|e| e.to_string())?;
        let grid = Grid::new(params.depth, nodes).map_err(|e| e.to_string())?;
        let state = State::trivial(&params, &grid);
        let mut session = Session {
            model,
            grid,
            state,
            dt: 1e-3,
            history: Vec::new(),
        };
        session.reset();
        Ok(session)
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        let mut params = self.model.params;
        param_slot(&mut params, name).map(|v| *v)
    }

    /// Changes one parameter and restarts from the initial profile.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<(), String> {
        let mut params = self.model.params;
        let slot =
            param_slot(&mut params, name).ok_or_else(|| format!("unknown parameter `{name}`"))?;
        *slot = value;
        let model =
            Model::new(params, self.model.light, self.model.response).map_err(|e| e.to_string())?;
        let grid = Grid::new(params.depth, self.grid.len()).map_err(|e| e.to_string())?;
        self.model = model;
        self.grid = grid;
        self.reset();
        Ok(())
    }

    pub fn set_dt(&mut self, dt: f64) -> Result<(), String> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err("dt must be > 0".into());
        }
        self.dt = dt;
        Ok(())
    }

    /// Uniform nutrient at `n_H`, a phytoplankton bump at a third of the
    /// depth and `z = 0.1`.
    pub fn reset(&mut self) {
        let params = &self.model.params;
        let h0 = params.depth / 3.0;
        let w = params.depth / 10.0;
        let p = self
            .grid
            .nodes()
            .map(|h| (-((h - h0) / w).powi(2) / 2.0).exp())
            .collect();
        self.state = State::new(vec![params.boundary_nutrient; self.grid.len()], p, 0.1, 0.0);
        self.history.clear();
        self.record();
    }

    fn record(&mut self) {
        let int_p = self.grid.integrate(&self.state.p).unwrap_or(f64::NAN);
        self.history.push([self.state.t, int_p, self.state.z]);
    }

    /// Takes `steps` IMEX steps, recording history after each one. On a
    /// solver error the state stays at the last good step.
    pub fn advance(&mut self, steps: usize) -> Result<(), String> {
        let stepper =
            ImexStepper::new(&self.model, &self.grid, self.dt).map_err(|e| e.to_string())?;
        let mut state = self.state.clone();
        let mut fresh = Vec::with_capacity(steps);
        let mut outcome = Ok(());
        for _ in 0..steps {
            match stepper.step(&state) {
                Ok(next) => {
                    let int_p = self.grid.integrate(&next.p).unwrap_or(f64::NAN);
                    fresh.push([next.t, int_p, next.z]);
                    state = next;
                }
                Err(e) => {
                    outcome = Err(e.to_string());
                    break;
                }
            }
        }
        self.state = state;
        self.history.extend(fresh);
        outcome
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn nodes(&self) -> Vec<f64> {
        self.grid.nodes().collect()
    }

    pub fn history(&self) -> &[[f64; 3]] {
        &self.history
    }

    pub fn extinction_guaranteed(&self) -> bool {
        self.model.params.extinction_guaranteed()
    }
}

/// `g(p)` at `samples` evenly spaced points of `[0, upper]`.
pub fn response_curve(response: &str, upper: f64, samples: usize) -> Result<Vec<f64>, String> {
    let response: FunctionalResponse = response.parse()?;
    if samples < 2 || !(upper > 0.0 && upper.is_finite()) {
        return Err("need at least 2 samples on a positive interval".into());
    }
    (0..samples)
        .map(|i| {
            response
                .eval(upper * i as f64 / (samples - 1) as f64)
                .map_err(|e| e.to_string())
        })
        .collect()
}

pub fn translation_lambda(response: &str, upper: f64) -> Result<f64, String> {
    let response: FunctionalResponse = response.parse()?;
    response
        .translation_lambda(upper)
        .map_err(|e| e.to_string())
}
