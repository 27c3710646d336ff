//! Browser bindings: step a column interactively and inspect the
//! functional responses.

pub mod session;

use wasm_bindgen::prelude::*;

use session::Session;

fn js_err(message: String) -> JsError {
    JsError::new(&message)
}

#[wasm_bindgen]
pub struct Simulation {
    inner: Session,
}

#[wasm_bindgen]
impl Simulation {
    #[wasm_bindgen(constructor)]
    pub fn new(light: &str, response: &str, nodes: usize) -> Result<Simulation, JsError> {
        Session::new(light, response, nodes)
            .map(|inner| Simulation { inner })
            .map_err(js_err)
    }

    pub fn advance(&mut self, steps: usize) -> Result<(), JsError> {
        self.inner.advance(steps).map_err(js_err)
    }

    pub fn reset(&mut self) {
        self.inner.reset();
    }

    #[wasm_bindgen(js_name = setParam)]
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<(), JsError> {
        self.inner.set_param(name, value).map_err(js_err)
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.inner.param(name)
    }

    #[wasm_bindgen(js_name = setDt)]
    pub fn set_dt(&mut self, dt: f64) -> Result<(), JsError> {
        self.inner.set_dt(dt).map_err(js_err)
    }

    #[wasm_bindgen(getter)]
    pub fn t(&self) -> f64 {
        self.inner.state().t
    }

    #[wasm_bindgen(getter)]
    pub fn z(&self) -> f64 {
        self.inner.state().z
    }

    #[wasm_bindgen(getter)]
    pub fn nodes(&self) -> Vec<f64> {
        self.inner.nodes()
    }

    #[wasm_bindgen(getter)]
    pub fn n(&self) -> Vec<f64> {
        self.inner.state().n.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn p(&self) -> Vec<f64> {
        self.inner.state().p.clone()
    }

    /// Flattened `[t, ∫p, z]` triples.
    #[wasm_bindgen(getter)]
    pub fn history(&self) -> Vec<f64> {
        self.inner.history().iter().flatten().copied().collect()
    }

    #[wasm_bindgen(getter, js_name = extinctionGuaranteed)]
    pub fn extinction_guaranteed(&self) -> bool {
        self.inner.extinction_guaranteed()
    }
}

#[wasm_bindgen(js_name = responseCurve)]
pub fn response_curve(response: &str, upper: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    session::response_curve(response, upper, samples).map_err(js_err)
}

#[wasm_bindgen(js_name = translationLambda)]
pub fn translation_lambda(response: &str, upper: f64) -> Result<f64, JsError> {
    session::translation_lambda(response, upper).map_err(js_err)
}
