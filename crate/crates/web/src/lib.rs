//! WebAssembly bindings for the static demo page in `www/`.
//!
//! The computations live in [`demo`] and return flat `f64` buffers so the
//! page can read them as `Float64Array`s without a serialisation layer.

use wasm_bindgen::prelude::*;

pub mod demo;

fn js(e: String) -> JsError {
    JsError::new(&e)
}

/// Reflectance and phase around ω_c. Rows of
/// `[detuning_mhz, |r_g|², arg r_g, |r_e|², arg r_e]`.
#[wasm_bindgen]
pub fn spectrum(chi_mhz: f64, kappa_ex_mhz: f64, kappa_in_mhz: f64, span_mhz: f64, points: usize) -> Result<Vec<f64>, JsError> {
    demo::spectrum(chi_mhz, kappa_ex_mhz, kappa_in_mhz, span_mhz, points).map_err(js)
}

/// `[η, dark count, n_0, P_0, n_1, P_1, …]` for the table device.
#[wasm_bindgen]
pub fn efficiency_curve(gate_interval_ns: f64, kappa_in_mhz: f64, t2_star_us: f64, points: usize) -> Result<Vec<f64>, JsError> {
    demo::efficiency_curve(gate_interval_ns, kappa_in_mhz, t2_star_us, points).map_err(js)
}

/// Wigner function of the reflected mode conditioned on the reported qubit
/// outcome (`0` = g, `1` = e, anything else unconditional), on a square
/// grid of `points × points` over [−half, half]². Row-major in Im α.
#[wasm_bindgen]
pub fn conditional_wigner(mean_photons: f64, outcome: u32, half: f64, points: usize) -> Result<Vec<f64>, JsError> {
    demo::conditional_wigner(mean_photons, outcome, half, points).map_err(js)
}
