//! Orbit export: one CSV row per iterate, and a JSON mirror carrying metadata.

use osb_core::billiard::{boundedness_stats, BoundednessStats, Orientation, OrbitTrace};
use osb_core::ToleranceConfig;
use serde::{Deserialize, Serialize};

use crate::json::fmt_f64;
use crate::spec::SPEC_VERSION;

/// Header `step, z_1..z_d, x_1..x_d, t, residual`. The last iterate has no
/// tangency, so its `x`, `t` and `residual` fields are empty.
pub fn orbit_csv(trace: &OrbitTrace) -> String {
    let dim = trace.start.len();
    let mut header = vec!["step".to_string()];
    header.extend((1..=dim).map(|i| format!("z_{i}")));
    header.extend((1..=dim).map(|i| format!("x_{i}")));
    header.extend(["t".into(), "residual".into()]);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory CSV");
    for (k, z) in trace.points.iter().enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(z.iter().map(|c| fmt_f64(*c)));
        match trace.tangencies.get(k) {
            Some(sol) => {
                row.extend(sol.x.x.iter().map(|c| fmt_f64(*c)));
                row.push(fmt_f64(sol.t));
                row.push(fmt_f64(sol.residual));
            }
            None => row.extend(std::iter::repeat(String::new()).take(dim + 2)),
        }
        w.write_record(&row).expect("in-memory CSV");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("CSV of ASCII fields")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRow {
    pub step: usize,
    pub z: Vec<f64>,
    pub x: Option<Vec<f64>>,
    pub t: Option<f64>,
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitExport {
    pub v: u64,
    pub body_hash: String,
    pub body_label: String,
    pub tolerances: ToleranceConfig,
    pub seed: u64,
    pub orientation: Orientation,
    pub steps: usize,
    pub failure: Option<String>,
    pub boundedness: BoundednessStats,
    pub rows: Vec<OrbitRow>,
}

pub fn orbit_export(trace: &OrbitTrace, body_hash: &str, tolerances: ToleranceConfig, seed: u64) -> OrbitExport {
    let rows = trace
        .points
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let sol = trace.tangencies.get(k);
            OrbitRow {
                step: k,
                z: z.as_slice().to_vec(),
                x: sol.map(|s| s.x.x.as_slice().to_vec()),
                t: sol.map(|s| s.t),
                residual: sol.map(|s| s.residual),
            }
        })
        .collect();
    OrbitExport {
        v: SPEC_VERSION,
        body_hash: body_hash.into(),
        body_label: trace.body_label.clone(),
        tolerances,
        seed,
        orientation: trace.orientation,
        steps: trace.steps(),
        failure: trace.failure.clone(),
        boundedness: boundedness_stats(trace),
        rows,
    }
}
