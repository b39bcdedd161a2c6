//! wasm-bindgen entry points for the browser demo. Every export takes and
//! returns JSON text; the plain `*_json` functions do the work and are what
//! the native tests call.

use serde::Deserialize;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use disco_core::compose::compose_variant;
use disco_core::config::PieceConfig;
use disco_core::generators::Envelope;
use disco_core::matrix::{AffinityMatrix, MassMatrix};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixInput {
    section_weights: Vec<f64>,
    mark_weights: Vec<f64>,
    affinities: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvelopeInput {
    breakpoints: Vec<(f64, f64)>,
    samples: usize,
}

fn parse<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T, String> {
    serde_json::from_str(text).map_err(|e| e.to_string())
}

/// Cell masses and the cumulative table for a section/mark matrix.
pub fn matrix_json(input: &str) -> Result<String, String> {
    let input: MatrixInput = parse(input)?;
    let affinities = AffinityMatrix::new(input.affinities).map_err(|e| e.to_string())?;
    let cells = MassMatrix::build(&input.section_weights, &input.mark_weights, &affinities)
        .map_err(|e| e.to_string())?;
    let masses: Vec<&[f64]> = (0..cells.rows()).map(|i| cells.row(i)).collect();
    Ok(json!({
        "masses": masses,
        "cumulative": cells.cumulative_table(),
    })
    .to_string())
}

/// Samples an envelope at `samples` evenly spaced positions across its
/// breakpoints.
pub fn envelope_json(input: &str) -> Result<String, String> {
    let input: EnvelopeInput = parse(input)?;
    let env = Envelope::new(input.breakpoints).map_err(|e| e.to_string())?;
    let (lo, hi) = match env.breakpoints() {
        [first, .., last] => (first.0, last.0),
        [only] => (only.0 - 0.5, only.0 + 0.5),
        [] => unreachable!("envelopes are never empty"),
    };
    let n = input.samples.max(2);
    let points: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let t = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            (t, env.value_at(t))
        })
        .collect();
    Ok(json!({ "points": points }).to_string())
}

/// Composes variant `variant` of a piece configuration.
pub fn compose_json(config: &str, seed: u64, variant: usize) -> Result<String, String> {
    let config = PieceConfig::from_json(config).map_err(|e| e.to_string())?;
    let v = compose_variant(&config, variant, seed).map_err(|e| e.to_string())?;
    let assignments: Vec<Value> = v
        .assignments
        .iter()
        .map(|a| {
            json!({
                "section": a.section,
                "mark": a.mark,
                "span": a.span,
                "start": a.start,
                "end": a.end(),
            })
        })
        .collect();
    Ok(json!({
        "seed": v.seed,
        "end": config.end(),
        "assignments": assignments,
        "score": v.score,
        "notation": v.notation,
    })
    .to_string())
}

fn js_err(e: String) -> JsValue {
    JsValue::from_str(&e)
}

#[wasm_bindgen]
pub fn matrix(input: &str) -> Result<String, JsValue> {
    matrix_json(input).map_err(js_err)
}

#[wasm_bindgen]
pub fn envelope(input: &str) -> Result<String, JsValue> {
    envelope_json(input).map_err(js_err)
}

#[wasm_bindgen]
pub fn compose(config: &str, seed: u32, variant: u32) -> Result<String, JsValue> {
    compose_json(config, seed as u64, variant as usize).map_err(js_err)
}
