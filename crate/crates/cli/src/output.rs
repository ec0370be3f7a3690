//! Output document, number formatting and writers.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64;
use qcat::{ComplexMatrix, RealMatrix, Tolerances};
use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: &str = "qcat/1";

/// Rounds to 12 significant digits (ties to even). Non-finite values are
/// passed through and become `null` in JSON.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Text form used in CSV cells, identical to the JSON number.
pub fn fmt12(x: f64) -> String {
    num(x).to_string()
}

pub fn num(x: f64) -> Value {
    let r = round12(x);
    if r == 0.0 {
        // Keep "-0" out of the output.
        return json!(0.0);
    }
    json!(r)
}

pub fn complex(z: Complex64) -> Value {
    json!([num(z.re), num(z.im)])
}

pub fn real_matrix(m: &RealMatrix) -> Value {
    json!({
        "rows": m.nrows(),
        "cols": m.ncols(),
        "complex": false,
        "data": (0..m.nrows()).map(|i| m.row(i).iter().map(|&x| num(x)).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

/// Real entries when every imaginary part is exactly zero, `[re, im]` pairs otherwise.
pub fn complex_matrix(m: &ComplexMatrix) -> Value {
    if let Some(r) = m.to_real(0.0) {
        return real_matrix(&r);
    }
    json!({
        "rows": m.nrows(),
        "cols": m.ncols(),
        "complex": true,
        "data": (0..m.nrows()).map(|i| m.row(i).iter().map(|&z| complex(z)).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

pub fn tolerances(t: &Tolerances) -> Value {
    json!({
        "residue": num(t.residue),
        "consistency": num(t.consistency),
        "reality": num(t.reality),
        "nullspace": num(t.nullspace),
        "boundary": num(t.boundary),
    })
}

#[derive(Serialize)]
pub struct OutputDocument {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub params: Value,
    pub payload: Value,
    pub tolerances: Value,
}

#[derive(Serialize)]
pub struct ErrorDocument {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub error: ErrorBody,
}

#[derive(Serialize)]
pub struct ErrorBody {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

pub fn open(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_json<T: Serialize>(w: &mut dyn Write, doc: &T) -> io::Result<()> {
    serde_json::to_writer(&mut *w, doc)?;
    writeln!(w)?;
    w.flush()
}
