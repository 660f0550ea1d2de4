//! JSON forms of reports. `serde_json::Value` objects keep their keys
//! sorted, and non-finite numbers become `null`.

use peflow_core::diagnostics::{CheckRecord, DiagnosticsReport};
use peflow_core::euler_poisson::EpsilonReport;
use serde_json::{json, Value};

pub fn check_json(c: &CheckRecord) -> Value {
    json!({
        "name": c.name,
        "examined": c.examined,
        "worst_slack": c.worst_slack,
        "worst_time": c.worst_time,
        "tol": c.tol,
        "pass": c.pass,
    })
}

pub fn diagnostics_json(r: &DiagnosticsReport) -> Value {
    json!({
        "checks": r.checks.iter().map(check_json).collect::<Vec<_>>(),
        "config_hash": r.config_hash,
        "pass": r.pass(),
    })
}

pub fn epsilon_json(r: &EpsilonReport, exponents: &[u32]) -> Value {
    json!({
        "mode": "eps",
        "exponents": exponents,
        "epsilons": r.epsilons,
        "times": r.times,
        "distances": r.distances,
        "final_distances": r.final_distances,
        "worst_increase": r.worst_increase,
        "final_tol": r.tolerances.final_tol,
        "monotone_tol": r.tolerances.monotone_tol,
        "pass": r.pass,
    })
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value serialises");
    s.push('\n');
    s
}
