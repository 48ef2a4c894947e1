//! Browser bindings for the model-enumeration library.
//!
//! Three interactive operations back the static page in `www/`:
//! enumeration of model points, the verified component graph (full report
//! and a stratum-level summary suited to drawing), and the lemma sweep.
//! Each wrapper returns a JSON string; errors surface as rejected JS
//! values with the library's error message.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use kisinlab::algebra::FieldParams;
use kisinlab::connect::{build_component_graph, MoveKind};
use kisinlab::kisin::Params;
use kisinlab::lemmas::{sweep_grid, verify_bounds_lemma, verify_decrement_lemma, LemmaReport};
use kisinlab::meta::{ParamsMeta, ToolMeta};
use kisinlab::moduli::{enumerate_models, DEFAULT_BUDGET};

fn params_for(p: u64, r: usize, e: i64) -> Result<Params, String> {
    let field = FieldParams::new(p, r).map_err(|e| e.to_string())?;
    Params::new(field, e).map_err(|e| e.to_string())
}

fn enumerate_impl(p: u64, r: usize, e: i64, window: i64) -> Result<String, String> {
    let params = params_for(p, r, e)?;
    let ms = enumerate_models(&params, window, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    let json = ms.to_json().map_err(|e| e.to_string())?;
    serde_json::to_string(&json).map_err(|e| e.to_string())
}

fn components_impl(p: u64, r: usize, e: i64) -> Result<String, String> {
    let params = params_for(p, r, e)?;
    let ms = enumerate_models(&params, e, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    let graph = build_component_graph(&ms).map_err(|e| e.to_string())?;
    let report = graph.to_report().map_err(|e| e.to_string())?;
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct StratumSummary {
    a: Vec<i64>,
    count: usize,
    ordinary: bool,
    /// Component label of the stratum's diagonal point.
    component: usize,
    /// Id of the diagonal point.
    diagonal_id: usize,
}

#[derive(Serialize)]
struct ShiftEdgeSummary {
    from: Vec<i64>,
    to: Vec<i64>,
    j: usize,
}

#[derive(Serialize)]
struct GraphSummary {
    tool: ToolMeta,
    params: ParamsMeta,
    verified: bool,
    hub: Option<Vec<i64>>,
    strata: Vec<StratumSummary>,
    shifts: Vec<ShiftEdgeSummary>,
    total_points: usize,
    kill_edges: usize,
}

/// Stratum-level view of the component graph: one node per a-vector
/// (kill moves collapse every stratum into its diagonal point), shift
/// edges between diagonal points. Small enough to draw directly.
fn summary_impl(p: u64, r: usize, e: i64) -> Result<String, String> {
    let params = params_for(p, r, e)?;
    let ms = enumerate_models(&params, e, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    let graph = build_component_graph(&ms).map_err(|e| e.to_string())?;
    let flags = ms.ordinary_flags().map_err(|e| e.to_string())?;
    let mut strata: Vec<StratumSummary> = Vec::new();
    for (id, point) in ms.points().iter().enumerate() {
        if point.is_diagonal() {
            strata.push(StratumSummary {
                a: point.a().coords().to_vec(),
                count: 0,
                ordinary: flags[id],
                component: graph.component_label(id),
                diagonal_id: id,
            });
        }
    }
    for point in ms.points() {
        let entry = strata
            .iter_mut()
            .find(|s| s.a == point.a().coords())
            .expect("every stratum has a diagonal point");
        entry.count += 1;
    }
    let mut shifts = Vec::new();
    let mut kill_edges = 0;
    for edge in graph.edges() {
        match edge.kind {
            MoveKind::Shift { j } => shifts.push(ShiftEdgeSummary {
                from: ms.point(edge.from).a().coords().to_vec(),
                to: ms.point(edge.to).a().coords().to_vec(),
                j,
            }),
            MoveKind::KillOffdiagonal => kill_edges += 1,
            MoveKind::Identification => {}
        }
    }
    let report = graph.to_report().map_err(|e| e.to_string())?;
    let summary = GraphSummary {
        tool: ToolMeta::current(),
        params: ParamsMeta::of(&params),
        verified: report.verified,
        hub: graph
            .hub_id()
            .map(|id| ms.point(id).a().coords().to_vec()),
        strata,
        shifts,
        total_points: ms.len(),
        kill_edges,
    };
    serde_json::to_string(&summary).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SweepSummary {
    tool: ToolMeta,
    passed: bool,
    reports: Vec<LemmaReport>,
}

fn sweep_impl(r_max: usize, m_max: i64) -> Result<String, String> {
    let mut reports = Vec::new();
    for (p, r, e) in sweep_grid(r_max, m_max) {
        let params = params_for(p, r, e)?;
        reports.push(verify_bounds_lemma(&params));
        reports.push(verify_decrement_lemma(&params));
    }
    let passed = reports.iter().all(LemmaReport::passed);
    let summary = SweepSummary {
        tool: ToolMeta::current(),
        passed,
        reports,
    };
    serde_json::to_string(&summary).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn enumerate_json(p: u64, r: usize, e: i64, window: i64) -> Result<String, JsValue> {
    enumerate_impl(p, r, e, window).map_err(|m| JsValue::from_str(&m))
}

#[wasm_bindgen]
pub fn components_json(p: u64, r: usize, e: i64) -> Result<String, JsValue> {
    components_impl(p, r, e).map_err(|m| JsValue::from_str(&m))
}

#[wasm_bindgen]
pub fn components_summary_json(p: u64, r: usize, e: i64) -> Result<String, JsValue> {
    summary_impl(p, r, e).map_err(|m| JsValue::from_str(&m))
}

#[wasm_bindgen]
pub fn lemma_sweep_json(r_max: usize, m_max: i64) -> Result<String, JsValue> {
    sweep_impl(r_max, m_max).map_err(|m| JsValue::from_str(&m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerate_payload_parses() {
        let text = enumerate_impl(3, 2, 4, 4).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["models"].as_array().unwrap().len(), 11);
    }

    #[test]
    fn summary_counts_match() {
        let text = summary_impl(3, 2, 8).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["verified"], serde_json::Value::Bool(true));
        assert_eq!(v["total_points"], serde_json::json!(8291));
        let strata = v["strata"].as_array().unwrap();
        assert_eq!(strata.len(), 11);
        let s22 = strata
            .iter()
            .find(|s| s["a"] == serde_json::json!([2, 2]))
            .unwrap();
        assert_eq!(s22["count"], serde_json::json!(81));
    }

    #[test]
    fn bad_params_are_reported() {
        let err = enumerate_impl(3, 2, 3, 3).unwrap_err();
        assert!(err.contains("must divide"));
    }

    #[test]
    fn sweep_passes_small_grid() {
        let text = sweep_impl(2, 1).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["passed"], serde_json::Value::Bool(true));
    }
}
