//! Browser bindings for the demo page in `www/`.
//!
//! Results come back as flat `Float64Array`s. The plain functions are
//! usable (and tested) natively; the exported wrappers only map errors.

use reciprocal::phase_space::{gamma_factor, line_element, null_cone_sample, Displacement, KinematicState, MetricSpec};
use reciprocal::transforms::{contraction_b_fit, explicit_transform};
use reciprocal::Result;
use wasm_bindgen::prelude::*;

/// `[v0, f0, v1, f1, ...]` on the null surface at power `r`.
pub fn null_cone_points(r: f64, c: f64, b: f64, count: usize) -> Result<Vec<f64>> {
    Ok(null_cone_sample(r, c, b, count)?
        .iter()
        .flat_map(|p| [p.v, p.f])
        .collect())
}

/// `[dt', dq', de', dp', ds² before, ds² after, γ]`.
pub fn transform_displacement(v: f64, f: f64, r: f64, c: f64, b: f64, d: [f64; 4]) -> Result<Vec<f64>> {
    let s = KinematicState::scalar(v, f, r);
    let d = Displacement::scalar(d[0], d[1], d[2], d[3]);
    let m = MetricSpec::born(1, c, b)?;
    let img = explicit_transform(&s, &d, c, b)?;
    let mut out = img.to_vec();
    out.push(line_element(&m, &d)?);
    out.push(line_element(&m, &img)?);
    out.push(gamma_factor(&s, c, b)?);
    Ok(out)
}

/// Deviation from the b → ∞ limit at `count` log-spaced values of b in
/// `[10^lo, 10^hi]`: `[b..., deviation..., slope]`.
pub fn contraction_sweep(v: f64, f: f64, r: f64, c: f64, lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    let count = count.max(2);
    let bs: Vec<f64> = (0..count)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (count - 1) as f64))
        .collect();
    let fit = contraction_b_fit(&KinematicState::scalar(v, f, r), c, &bs)?;
    let mut out = fit.scales;
    out.extend(fit.deviations);
    out.push(fit.slope);
    Ok(out)
}

fn js(e: reciprocal::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = nullCone)]
pub fn null_cone(r: f64, c: f64, b: f64, count: usize) -> std::result::Result<Vec<f64>, JsError> {
    null_cone_points(r, c, b, count).map_err(js)
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn transform(
    v: f64,
    f: f64,
    r: f64,
    c: f64,
    b: f64,
    dt: f64,
    dq: f64,
    de: f64,
    dp: f64,
) -> std::result::Result<Vec<f64>, JsError> {
    transform_displacement(v, f, r, c, b, [dt, dq, de, dp]).map_err(js)
}

#[wasm_bindgen]
pub fn contraction(
    v: f64,
    f: f64,
    r: f64,
    c: f64,
    lo: f64,
    hi: f64,
    count: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    contraction_sweep(v, f, r, c, lo, hi, count).map_err(js)
}
