//! Browser bindings for the filtered-flow demo page in `www/`.

mod demo;

use wasm_bindgen::prelude::*;

pub use demo::{diverging_rgba, energy_envelope, filter_response, filtered_plane, Flow};

fn js(e: String) -> JsError {
    JsError::new(&e)
}

/// Forced Taylor–Green flow rendered one `x₃ = 0` slice at a time.
#[wasm_bindgen]
pub struct FlowDemo {
    flow: Flow,
}

#[wasm_bindgen]
impl FlowDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, nu: f64, alpha: f64, forcing: f64, dt: f64) -> Result<FlowDemo, JsError> {
        Ok(FlowDemo {
            flow: Flow::new(n, nu, alpha, forcing, dt).map_err(js)?,
        })
    }

    pub fn advance(&mut self, steps: usize) -> Result<(), JsError> {
        self.flow.advance(steps).map_err(js)
    }

    pub fn time(&self) -> f64 {
        self.flow.time()
    }

    pub fn energy(&self) -> f64 {
        self.flow.energy()
    }

    pub fn size(&self) -> usize {
        self.flow.n()
    }

    /// RGBA pixels (`size × size`) of the vertical vorticity.
    #[wasm_bindgen(js_name = vorticityRgba)]
    pub fn vorticity_rgba(&self) -> Vec<u8> {
        diverging_rgba(&self.flow.vorticity_plane())
    }
}

/// Flattened rows `[t, energy, envelope, uniform bound]`.
#[wasm_bindgen(js_name = energyEnvelope)]
pub fn energy_envelope_js(n: usize, nu: f64, alpha: f64, forcing: f64, final_time: f64) -> Result<Vec<f64>, JsError> {
    Ok(energy_envelope(n, nu, alpha, forcing, final_time)
        .map_err(js)?
        .into_iter()
        .flatten()
        .collect())
}

/// RGBA pixels (`n × n`) of a random field after horizontal filtering.
#[wasm_bindgen(js_name = filteredRgba)]
pub fn filtered_rgba(n: usize, alpha: f64, seed: u32) -> Result<Vec<u8>, JsError> {
    Ok(diverging_rgba(&filtered_plane(n, alpha, seed as u64).map_err(js)?))
}

#[wasm_bindgen(js_name = filterResponse)]
pub fn filter_response_js(alpha: f64, kmax: usize) -> Vec<f64> {
    filter_response(alpha, kmax)
}
