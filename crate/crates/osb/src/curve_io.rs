//! Planar curves as two-column CSV vertex lists with a header row. Closure is
//! implicit: the first vertex is not repeated.

use std::fs;

use osb_core::hypersurface::PlanarCurve;

use crate::error::OsbError;
use crate::json::fmt_f64;

pub fn parse_curve(text: &str, source: &str) -> Result<PlanarCurve, OsbError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut vertices = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| OsbError::Csv {
            path: source.into(),
            source: e,
        })?;
        let row = k + 2;
        if record.len() != 2 {
            return Err(OsbError::Input(format!("{source}: row {row}: expected 2 columns, found {}", record.len())));
        }
        let mut p = [0.0f64; 2];
        for (i, field) in record.iter().enumerate() {
            p[i] = field
                .parse()
                .map_err(|_| OsbError::Input(format!("{source}: row {row}: `{field}` is not a number")))?;
            if !p[i].is_finite() {
                return Err(OsbError::Input(format!("{source}: row {row}: non-finite coordinate")));
            }
        }
        vertices.push(p);
    }
    Ok(PlanarCurve::new(vertices))
}

pub fn read_curve(path: &str) -> Result<PlanarCurve, OsbError> {
    let text = fs::read_to_string(path).map_err(|e| OsbError::io(path, e))?;
    parse_curve(&text, path)
}

pub fn curve_csv(curve: &PlanarCurve) -> String {
    let mut out = String::from("x,y\n");
    for p in &curve.vertices {
        out.push_str(&format!("{},{}\n", fmt_f64(p[0]), fmt_f64(p[1])));
    }
    out
}
