//! Surface and family JSON input; JSON and CSV output at 17 significant digits.

use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Number, Value};

use crate::error::{Error, Result};
use crate::jets::{FamilyJet, MongeJet};
use crate::sweep::SweepReport;
use crate::tracing::TracedCurve;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SurfaceFile {
    degree: usize,
    terms: Vec<(usize, usize, f64)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyFile {
    degree: usize,
    terms: Vec<(usize, usize, Vec<f64>)>,
}

/// Parses `{"degree": n, "terms": [[i, j, c], ...]}`.
pub fn parse_surface(text: &str) -> Result<MongeJet> {
    let f: SurfaceFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("surface: {e}")))?;
    if f.terms.iter().any(|t| !t.2.is_finite()) {
        return Err(Error::Parse("surface: non-finite coefficient".into()));
    }
    MongeJet::from_terms(f.degree, &f.terms)
}

/// Parses `{"degree": n, "terms": [[i, j, [c0, c1, ...]], ...]}`, coefficients lowest order first.
pub fn parse_family(text: &str) -> Result<FamilyJet> {
    let f: FamilyFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("family: {e}")))?;
    if f.terms.iter().any(|t| t.2.iter().any(|c| !c.is_finite())) {
        return Err(Error::Parse("family: non-finite coefficient".into()));
    }
    FamilyJet::from_terms(f.degree, &f.terms)
}

pub fn surface_json(jet: &MongeJet) -> Value {
    let terms: Vec<Value> = jet.terms().into_iter().map(|(i, j, c)| json!([i, j, c])).collect();
    normalize(json!({ "degree": jet.max_degree(), "terms": terms }))
}

pub fn family_json(family: &FamilyJet) -> Value {
    let terms: Vec<Value> = family.terms().map(|(i, j, cs)| json!([i, j, cs])).collect();
    normalize(json!({ "degree": family.max_degree(), "terms": terms }))
}

/// A float with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    if v == 0.0 {
        "0.0000000000000000e+0".to_string()
    } else if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

fn number(v: f64) -> Value {
    if v.is_finite() {
        Value::Number(Number::from_str(&format_f64(v)).expect("exponent notation is a JSON number"))
    } else {
        Value::Null
    }
}

/// Rewrites every non-integer number with 17 significant digits.
fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => number(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(a) => Value::Array(a.into_iter().map(normalize).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, x)| (k, normalize(x))).collect()),
        other => other,
    }
}

/// Serializes to a JSON value with floats at 17 significant digits.
pub fn to_value<T: Serialize + ?Sized>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map(normalize).map_err(|e| Error::Parse(e.to_string()))
}

pub fn to_string_pretty<T: Serialize + ?Sized>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&to_value(v)?).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn curve_json(curve: &TracedCurve) -> Value {
    let segments: Vec<Value> = curve
        .segments
        .iter()
        .map(|p| json!({ "closed": p.closed, "points": p.points }))
        .collect();
    normalize(json!({
        "kind": curve.kind,
        "segments": segments,
        "residual": curve.residual,
        "gaps": curve.gaps,
        "degenerate": curve.degenerate,
        "label_failures": curve.label_failures,
        "label_mismatches": curve.label_mismatches,
    }))
}

fn flag_names<T: Serialize>(flags: &[T]) -> String {
    flags
        .iter()
        .filter_map(|f| serde_json::to_value(f).ok().and_then(|v| v.as_str().map(str::to_string)))
        .collect::<Vec<_>>()
        .join(";")
}

/// One row per sample and component: `t, component_id, n_hyperbonodes, index_sum, n_ellipnodes, sign_sum, flags`.
pub fn write_sweep_csv<W: Write>(report: &SweepReport, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let io = |e: csv::Error| Error::Parse(format!("csv: {e}"));
    w.write_record(["t", "component_id", "n_hyperbonodes", "index_sum", "n_ellipnodes", "sign_sum", "flags"])
        .map_err(io)?;
    for s in &report.samples {
        for c in &s.tallies {
            w.write_record([
                format_f64(s.t),
                c.component_id.to_string(),
                c.n_hyperbonodes.to_string(),
                c.index_sum.to_string(),
                c.n_ellipnodes.to_string(),
                c.sign_sum.to_string(),
                flag_names(&c.flags),
            ])
            .map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::Parse(format!("csv: {e}")))
}

pub fn transitions_json(report: &SweepReport) -> Result<Value> {
    to_value(&report.transitions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::ExtendedReal;

    #[test]
    fn surface_round_trip() {
        let jet = parse_surface(r#"{"degree": 5, "terms": [[1, 1, 1.0], [3, 1, 0.16666666666666666]]}"#).unwrap();
        assert_eq!(jet.coeff(3, 1), 1.0 / 6.0);
        let back = parse_surface(&surface_json(&jet).to_string()).unwrap();
        assert_eq!(back, jet);
    }

    #[test]
    fn family_round_trip() {
        let fam = parse_family(r#"{"degree": 5, "terms": [[1, 1, [1]], [4, 0, [0, 0.5]]]}"#).unwrap();
        assert_eq!(fam.eval(2.0).coeff(4, 0), 1.0);
        assert_eq!(parse_family(&family_json(&fam).to_string()).unwrap(), fam);
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(parse_surface("{"), Err(Error::Parse(_))));
        assert!(matches!(parse_surface(r#"{"degree": 5}"#), Err(Error::Parse(_))));
        assert!(parse_surface(r#"{"degree": 3, "terms": [[4, 0, 1.0]]}"#).is_err());
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_f64(0.75), "7.5000000000000000e-1");
        assert_eq!(format_f64(-0.0), format_f64(0.0));
        assert_eq!(number(0.1).to_string(), "1.0000000000000001e-1");
        let v = to_value(&[ExtendedReal::Finite(1.0 / 3.0), ExtendedReal::Infinite]).unwrap();
        assert_eq!(v.to_string(), r#"[3.3333333333333331e-1,"infinity"]"#);
        assert_eq!(to_value(&json!({"n": 3})).unwrap().to_string(), r#"{"n":3}"#);
    }
}
