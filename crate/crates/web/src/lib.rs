//! JSON bindings for the browser demo in `www/`. Every exported function
//! takes and returns JSON text; failures come back as `{"error": message}`.
//! The plain Rust functions behind them are public so they can be tested
//! natively.

use numeracy_core::rectangles::{default_base, house, Planner};
use numeracy_core::transcoder::{render_verbal, to_analog, Rendering};
use numeracy_core::{Code, Move, PlanOptions, RectDiagram, StrawBoard, Transcription};
use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

fn reply(result: Result<Value, String>) -> String {
    match result {
        Ok(v) => v.to_string(),
        Err(message) => json!({ "error": message }).to_string(),
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Reads `input` in the `from` code and renders it in all three.
pub fn transcode_all(input: &str, from: &str) -> Result<Value, String> {
    let code: Code = from.parse().map_err(err)?;
    let value = Transcription::parse(code, Rendering::Text(input.trim().to_string()))
        .map_err(err)?
        .value();
    Ok(json!({
        "value": value,
        "verbal": render_verbal(value).map_err(err)?,
        "symbolic": value.to_string(),
        "analog": to_analog(value).map_err(err)?,
    }))
}

fn board_view(board: StrawBoard) -> Result<Value, String> {
    let value = board.total_value();
    Ok(json!({
        "board": board,
        "value": value,
        "canonical": board.is_canonical(),
        "verbal": render_verbal(value).map_err(err)?,
    }))
}

/// Applies one move, e.g. `{"kind": "add_loose", "count": 3}`.
pub fn apply_move(board: &str, action: &str) -> Result<Value, String> {
    let board: StrawBoard = serde_json::from_str(board).map_err(err)?;
    let action: Move = serde_json::from_str(action).map_err(err)?;
    board_view(board.apply(action).map_err(err)?)
}

/// Ties every possible bundle and lists the ties made.
pub fn regroup(board: &str) -> Result<Value, String> {
    let board: StrawBoard = serde_json::from_str(board).map_err(err)?;
    let done = board.canonicalize();
    let mut view = board_view(done.board)?;
    view["moves"] = json!(done.moves);
    Ok(view)
}

fn options(ghost: bool) -> PlanOptions {
    PlanOptions {
        allow_ghost: ghost,
        ..PlanOptions::default()
    }
}

/// Cheapest derivation of `rows`×`cols` from the 2, 5 and 10 facts.
pub fn derive_rect(rows: u32, cols: u32, ghost: bool) -> Result<Value, String> {
    let rect = RectDiagram::new(rows, cols).map_err(err)?;
    let base = default_base(false);
    let d = Planner::new(&base, options(ghost)).derive(rect).map_err(err)?;
    Ok(json!({
        "headline": d.headline(),
        "explain": d.explain(),
        "cost": d.cost(),
        "value": d.evaluate().map_err(err)?,
        "derivation": d,
    }))
}

/// The 100 house cells, top row first, each with its cheapest derivation.
pub fn house_view(ghost: bool) -> Result<Value, String> {
    let base = default_base(false);
    let mut planner = Planner::new(&base, options(ghost));
    let cells = house(&base)
        .into_iter()
        .map(|cell| {
            let d = planner.derive(cell.rect).ok();
            json!({
                "rect": cell.rect,
                "product": cell.product,
                "known": cell.known,
                "cost": d.as_ref().map(|d| d.cost()),
                "headline": d.as_ref().map(|d| d.headline()),
            })
        })
        .collect::<Vec<_>>();
    Ok(Value::Array(cells))
}

#[wasm_bindgen]
pub fn transcode(input: &str, from: &str) -> String {
    reply(transcode_all(input, from))
}

#[wasm_bindgen]
pub fn board_apply(board: &str, action: &str) -> String {
    reply(apply_move(board, action))
}

#[wasm_bindgen]
pub fn board_regroup(board: &str) -> String {
    reply(regroup(board))
}

#[wasm_bindgen]
pub fn derive(rows: u32, cols: u32, ghost: bool) -> String {
    reply(derive_rect(rows, cols, ghost))
}

#[wasm_bindgen]
pub fn house_cells(ghost: bool) -> String {
    reply(house_view(ghost))
}
