//! Domain types and the reaction (non-diffusive) part of the NPZ system.
//!
//! The nutrient `n` and phytoplankton `p` live on the nodes of a uniform
//! grid over the water column `[0, H]`; zooplankton `z` is a depth-averaged
//! scalar. Reaction terms:
//!
//! ```text
//! dn/dt = -a(h) p u(n)
//! dp/dt =  a(h) p u(n) - z g(p) - m_p p
//! dz/dt =  z ((k/H) ∫ g(p) dh - m)
//! ```
//!
//! with `u(n) = n / (1 + chi n)` and `a(h)` the light attenuation coefficient.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Negative densities above `-NEGATIVITY_TOLERANCE` are treated as zero when
/// evaluating the functional response.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-10;

/// Model constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameters {
    /// Vertical turbulent diffusion `D`.
    pub diffusivity: f64,
    /// Depth of the water column `H`.
    pub depth: f64,
    /// Inverse half-saturation density of nutrient intake.
    pub chi: f64,
    /// Zooplankton mortality `m`.
    pub zoo_mortality: f64,
    /// Phytoplankton mortality `m_p`.
    pub phyto_mortality: f64,
    /// Food utilization coefficient `k`.
    pub food_utilization: f64,
    /// Light-limited uptake scale `r`.
    pub uptake_rate: f64,
    /// Light attenuation coefficient `gamma`.
    pub light_attenuation: f64,
    /// Self-shading coefficient `nu`.
    pub self_shading: f64,
    /// Dirichlet nutrient value at the bottom, `n_H`.
    pub boundary_nutrient: f64,
}

impl Default for Parameters {
    fn default() -> Self {
        Parameters {
            diffusivity: 1.0,
            depth: 1.0,
            chi: 1.0,
            zoo_mortality: 0.1,
            phyto_mortality: 1.0,
            food_utilization: 1.0,
            uptake_rate: 0.5,
            light_attenuation: 1.0,
            self_shading: 1.0,
            boundary_nutrient: 1.0,
        }
    }
}

impl Parameters {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("D", self.diffusivity),
            ("H", self.depth),
            ("chi", self.chi),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0")));
            }
        }
        let nonneg = [
            ("m", self.zoo_mortality),
            ("m_p", self.phyto_mortality),
            ("k", self.food_utilization),
            ("r", self.uptake_rate),
            ("gamma", self.light_attenuation),
            ("nu", self.self_shading),
            ("n_H", self.boundary_nutrient),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0")));
            }
        }
        Ok(())
    }

    /// Maximum phytoplankton growth rate `r / chi`.
    pub fn max_growth_rate(&self) -> f64 {
        self.uptake_rate / self.chi
    }

    /// Whether mortality exceeds the maximum growth rate (`m_p > r/chi`),
    /// the sufficient condition for extinction of `p` and `z`.
    pub fn extinction_guaranteed(&self) -> bool {
        self.phyto_mortality > self.max_growth_rate()
    }
}

/// Uniform grid `h_j = j * dx`, `j = 0..M`, over `[0, H]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    depth: f64,
    nodes: usize,
    dx: f64,
}

impl Grid {
    pub fn new(depth: f64, nodes: usize) -> Result<Self> {
        if !(depth.is_finite() && depth > 0.0) {
            return Err(Error::InvalidParameter("H must be > 0".into()));
        }
        if nodes < 3 {
            return Err(Error::InvalidParameter("M must be >= 3".into()));
        }
        Ok(Grid {
            depth,
            nodes,
            dx: depth / (nodes - 1) as f64,
        })
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.nodes
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Depth of node `j`. The last node is exactly `H`.
    pub fn node(&self, j: usize) -> f64 {
        if j + 1 == self.nodes {
            self.depth
        } else {
            j as f64 * self.dx
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nodes).map(|j| self.node(j))
    }

    pub fn check_len(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.nodes {
            return Err(Error::ShapeMismatch {
                expected: self.nodes,
                found: values.len(),
            });
        }
        Ok(())
    }

    /// Composite trapezoid approximation of `∫_0^H v dh`.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        self.check_len(values)?;
        let m = values.len();
        let inner: f64 = values[1..m - 1].iter().sum();
        Ok(self.dx * (0.5 * (values[0] + values[m - 1]) + inner))
    }
}

/// Discrete state at one time instant, in the original (unshifted) variables.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub n: Vec<f64>,
    pub p: Vec<f64>,
    pub z: f64,
    pub t: f64,
}

impl State {
    pub fn new(n: Vec<f64>, p: Vec<f64>, z: f64, t: f64) -> Self {
        State { n, p, z, t }
    }

    /// The trivial equilibrium `(n_H, 0, 0)`.
    pub fn trivial(params: &Parameters, grid: &Grid) -> Self {
        State {
            n: vec![params.boundary_nutrient; grid.len()],
            p: vec![0.0; grid.len()],
            z: 0.0,
            t: 0.0,
        }
    }

    pub fn check_shape(&self, grid: &Grid) -> Result<()> {
        grid.check_len(&self.n)?;
        grid.check_len(&self.p)
    }

    pub fn is_finite(&self) -> bool {
        self.z.is_finite() && self.n.iter().chain(&self.p).all(|v| v.is_finite())
    }

    /// `max(|n|, |p|, |z|)`.
    pub fn max_norm(&self) -> f64 {
        self.n
            .iter()
            .chain(&self.p)
            .fold(self.z.abs(), |acc, v| acc.max(v.abs()))
    }
}

/// Light operator `L_h(p) = a(h) p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LightModel {
    /// `a(h) = r exp(-gamma h)`.
    ExponentialDecay,
    /// `a(h) = r exp(-nu ∫_0^h p dx)`.
    SelfShading,
}

impl LightModel {
    pub const ALL: [LightModel; 2] = [LightModel::ExponentialDecay, LightModel::SelfShading];

    /// Per-node coefficient `a_j` with `L_h(p)_j = a_j p_j`.
    pub fn attenuation(&self, params: &Parameters, grid: &Grid, p: &[f64]) -> Result<Vec<f64>> {
        grid.check_len(p)?;
        let r = params.uptake_rate;
        Ok(match self {
            LightModel::ExponentialDecay => grid
                .nodes()
                .map(|h| r * (-params.light_attenuation * h).exp())
                .collect(),
            LightModel::SelfShading => cumulative_integral(p, grid)?
                .into_iter()
                .map(|c| r * (-params.self_shading * c).exp())
                .collect(),
        })
    }
}

impl fmt::Display for LightModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LightModel::ExponentialDecay => "exponential",
            LightModel::SelfShading => "self-shading",
        })
    }
}

impl FromStr for LightModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "exponential" => Ok(LightModel::ExponentialDecay),
            "self-shading" => Ok(LightModel::SelfShading),
            _ => Err(format!(
                "unknown light model `{s}` (expected exponential | self-shading)"
            )),
        }
    }
}

/// Zooplankton ingestion rate `g(p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FunctionalResponse {
    /// `p`
    HollingI,
    /// `p / (1 + p)`
    HollingII,
    /// `p^2 / (1 + p^2)`
    HollingIII,
    /// `1 - exp(-p)`
    Ivlev,
    /// `p^2 / (1 + p)`
    RatioQuad,
}

impl FunctionalResponse {
    pub const ALL: [FunctionalResponse; 5] = [
        FunctionalResponse::HollingI,
        FunctionalResponse::HollingII,
        FunctionalResponse::HollingIII,
        FunctionalResponse::Ivlev,
        FunctionalResponse::RatioQuad,
    ];

    pub fn eval(&self, p: f64) -> Result<f64> {
        if !(p.is_finite() && p >= 0.0) {
            return Err(Error::Domain(format!("g({p}) requires finite p >= 0")));
        }
        Ok(self.eval_unchecked(p))
    }

    fn eval_unchecked(&self, p: f64) -> f64 {
        match self {
            FunctionalResponse::HollingI => p,
            FunctionalResponse::HollingII => p / (1.0 + p),
            FunctionalResponse::HollingIII => p * p / (1.0 + p * p),
            FunctionalResponse::Ivlev => -(-p).exp_m1(),
            FunctionalResponse::RatioQuad => p * p / (1.0 + p),
        }
    }

    /// Like [`eval`](Self::eval) but maps `p ∈ [-NEGATIVITY_TOLERANCE, 0)` to 0.
    pub(crate) fn eval_tolerant(&self, p: f64) -> Result<f64> {
        if (-NEGATIVITY_TOLERANCE..0.0).contains(&p) {
            return Ok(0.0);
        }
        self.eval(p)
    }

    /// Smallest `lambda` with `lambda p - g(p) >= 0` on `[0, bound]`,
    /// i.e. `sup g(p)/p` over that interval.
    pub fn translation_lambda(&self, bound: f64) -> Result<f64> {
        if !(bound.is_finite() && bound > 0.0) {
            return Err(Error::Domain(format!(
                "translation bound must be finite and > 0, got {bound}"
            )));
        }
        Ok(match self {
            FunctionalResponse::HollingI
            | FunctionalResponse::HollingII
            | FunctionalResponse::Ivlev => 1.0,
            // p / (1 + p^2) peaks at p = 1
            FunctionalResponse::HollingIII => {
                let p = bound.min(1.0);
                p / (1.0 + p * p)
            }
            // p / (1 + p) is increasing
            FunctionalResponse::RatioQuad => bound / (1.0 + bound),
        })
    }
}

impl fmt::Display for FunctionalResponse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FunctionalResponse::HollingI => "holling1",
            FunctionalResponse::HollingII => "holling2",
            FunctionalResponse::HollingIII => "holling3",
            FunctionalResponse::Ivlev => "ivlev",
            FunctionalResponse::RatioQuad => "ratio-quad",
        })
    }
}

impl FromStr for FunctionalResponse {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        FunctionalResponse::ALL
            .into_iter()
            .find(|g| g.to_string() == s)
            .ok_or_else(|| {
                format!(
                    "unknown functional response `{s}` \
                     (expected holling1 | holling2 | holling3 | ivlev | ratio-quad)"
                )
            })
    }
}

/// Cumulative trapezoid integral `C_j ≈ ∫_0^{h_j} p dx`, `C_0 = 0`.
pub fn cumulative_integral(p: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    grid.check_len(p)?;
    let half_dx = 0.5 * grid.dx();
    let mut out = Vec::with_capacity(p.len());
    let mut acc = 0.0;
    out.push(acc);
    for w in p.windows(2) {
        acc += half_dx * (w[0] + w[1]);
        out.push(acc);
    }
    Ok(out)
}

/// Zooplankton intake rate `(k/H) ∫_0^H g(p) dh`.
pub fn zoo_intake(
    p: &[f64],
    response: FunctionalResponse,
    params: &Parameters,
    grid: &Grid,
) -> Result<f64> {
    let gp = grazing_profile(p, response, grid)?;
    Ok(params.food_utilization / grid.depth() * grid.integrate(&gp)?)
}

pub(crate) fn grazing_profile(
    p: &[f64],
    response: FunctionalResponse,
    grid: &Grid,
) -> Result<Vec<f64>> {
    grid.check_len(p)?;
    p.iter().map(|&v| response.eval_tolerant(v)).collect()
}

/// A fully specified reaction model: parameters plus the two tagged choices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    pub params: Parameters,
    pub light: LightModel,
    pub response: FunctionalResponse,
}

impl Model {
    pub fn new(
        params: Parameters,
        light: LightModel,
        response: FunctionalResponse,
    ) -> Result<Self> {
        params.validate()?;
        Ok(Model {
            params,
            light,
            response,
        })
    }
}

/// Time derivatives of the reaction terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Rates {
    pub dn: Vec<f64>,
    pub dp: Vec<f64>,
    pub dz: f64,
}

/// Reaction terms before linear decay is applied.
#[derive(Debug, Clone)]
pub(crate) struct ReactionParts {
    /// `a_j p_j u_j`
    pub uptake: Vec<f64>,
    /// `g(p_j)`
    pub grazing: Vec<f64>,
    /// `(k/H) ∫ g(p)`
    pub intake: f64,
}

pub(crate) fn reaction_parts(state: &State, model: &Model, grid: &Grid) -> Result<ReactionParts> {
    state.check_shape(grid)?;
    let params = &model.params;
    let light = model.light.attenuation(params, grid, &state.p)?;
    let mut uptake = Vec::with_capacity(grid.len());
    for (j, ((&n, &p), &a)) in state.n.iter().zip(&state.p).zip(&light).enumerate() {
        let denominator = 1.0 + params.chi * n;
        if !(denominator >= 0.5) {
            return Err(Error::Singularity {
                node: j,
                denominator,
            });
        }
        uptake.push(a * p * n / denominator);
    }
    let grazing = grazing_profile(&state.p, model.response, grid)?;
    let intake = params.food_utilization / grid.depth() * grid.integrate(&grazing)?;
    Ok(ReactionParts {
        uptake,
        grazing,
        intake,
    })
}

/// Reaction part of the system, including linear decay of `p` and `z`.
/// Diffusion is not included.
pub fn reaction_rhs(state: &State, model: &Model, grid: &Grid) -> Result<Rates> {
    let parts = reaction_parts(state, model, grid)?;
    let params = &model.params;
    let dn = parts.uptake.iter().map(|u| -u).collect();
    let dp = parts
        .uptake
        .iter()
        .zip(&parts.grazing)
        .zip(&state.p)
        .map(|((u, g), p)| u - state.z * g - params.phyto_mortality * p)
        .collect();
    let dz = state.z * (parts.intake - params.zoo_mortality);
    Ok(Rates { dn, dp, dz })
}
