//! Curve file formats.
//!
//! Plain text:
//!
//! ```text
//! CURVE closed 4
//! 0 0 0
//! 1 0 0
//! 1 1 0
//! 0 1 0
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. The JSON form is
//! `{"closed": true, "vertices": [[x, y, z], ...]}`. Both writers print
//! coordinates with the shortest decimal that round-trips, so
//! parse(write(c)) reproduces every coordinate bit for bit.

use super::{PolyCurve, Vec3};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// Serialized form shared by both formats.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveFile {
    pub closed: bool,
    pub vertices: Vec<[f64; 3]>,
}

impl From<&PolyCurve> for CurveFile {
    fn from(c: &PolyCurve) -> Self {
        Self {
            closed: c.is_closed(),
            vertices: c.vertices().iter().map(|v| [v.x, v.y, v.z]).collect(),
        }
    }
}

impl From<PolyCurve> for CurveFile {
    fn from(c: PolyCurve) -> Self {
        Self::from(&c)
    }
}

impl TryFrom<CurveFile> for PolyCurve {
    type Error = Error;

    fn try_from(f: CurveFile) -> Result<Self> {
        PolyCurve::new(
            f.vertices.iter().map(|v| Vec3::new(v[0], v[1], v[2])).collect(),
            f.closed,
        )
    }
}

pub fn to_text(curve: &PolyCurve) -> String {
    let mut out = String::new();
    let kind = if curve.is_closed() { "closed" } else { "open" };
    writeln!(out, "CURVE {kind} {}", curve.len()).unwrap();
    for v in curve.vertices() {
        writeln!(out, "{} {} {}", v.x, v.y, v.z).unwrap();
    }
    out
}

pub fn to_json(curve: &PolyCurve) -> String {
    serde_json::to_string(&CurveFile::from(curve)).expect("curve serializes")
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

pub fn parse_text(input: &str) -> Result<PolyCurve> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 || fields[0] != "CURVE" {
        return Err(parse_err(hline, "expected header `CURVE <open|closed> <n>`"));
    }
    let closed = match fields[1] {
        "closed" => true,
        "open" => false,
        other => return Err(parse_err(hline, format!("unknown curve kind `{other}`"))),
    };
    let n: usize = fields[2]
        .parse()
        .map_err(|_| parse_err(hline, format!("bad vertex count `{}`", fields[2])))?;

    let mut vertices = Vec::with_capacity(n);
    for (lno, line) in lines {
        if vertices.len() == n {
            return Err(parse_err(lno, "more vertices than declared"));
        }
        let coords = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| parse_err(lno, format!("bad coordinate `{tok}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if coords.len() != 3 {
            return Err(parse_err(lno, format!("expected 3 coordinates, got {}", coords.len())));
        }
        vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
    }
    if vertices.len() != n {
        return Err(parse_err(
            hline,
            format!("declared {n} vertices, found {}", vertices.len()),
        ));
    }
    PolyCurve::new(vertices, closed)
}

pub fn parse_json(input: &str) -> Result<PolyCurve> {
    let file: CurveFile = serde_json::from_str(input).map_err(|e| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    })?;
    file.try_into()
}

/// Parses either format, deciding by the first non-blank character.
pub fn parse_curve(input: &str) -> Result<PolyCurve> {
    if input.trim_start().starts_with('{') {
        parse_json(input)
    } else {
        parse_text(input)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn text_example() {
        let c = parse_text("# square\nCURVE closed 4\n0 0 0\n1 0 0\n\n1 1 0\n0 1 0\n").unwrap();
        assert!(c.is_closed());
        assert_eq!(c.total_length(), 4.0);
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(parse_text(""), Err(Error::Parse { .. })));
        assert!(matches!(parse_text("CURVY open 2\n0 0 0\n1 0 0"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_text("CURVE loop 2\n0 0 0\n1 0 0"), Err(Error::Parse { .. })));
        assert!(matches!(parse_text("CURVE open 3\n0 0 0\n1 0 0"), Err(Error::Parse { .. })));
        assert!(matches!(parse_text("CURVE open 2\n0 0 0\n1 0"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_text("CURVE open 2\n0 0 0\n1 x 0"), Err(Error::Parse { .. })));
        assert!(matches!(parse_json("{\"closed\": 1}"), Err(Error::Parse { .. })));
        // Parses, but the geometry is invalid.
        assert!(matches!(parse_text("CURVE open 2\n0 0 0\n0 0 0"), Err(Error::InvalidCurve(_))));
    }

    #[test]
    fn json_matches_text() {
        let c = parse_text("CURVE open 3\n0 0 0\n0.1 0.2 0.3\n1e-300 -5 7").unwrap();
        let j = to_json(&c);
        assert_eq!(parse_curve(&j).unwrap(), c);
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![
            -1e6..1e6f64,
            any::<f64>().prop_filter("finite", |x| x.is_finite()),
        ]
    }

    proptest! {
        #[test]
        fn round_trip_bit_exact(
            pts in prop::collection::vec((finite(), finite(), finite()), 3..20),
            closed in any::<bool>(),
        ) {
            let verts: Vec<Vec3> = pts.iter().map(|&(x, y, z)| Vec3::new(x, y, z)).collect();
            if let Ok(c) = PolyCurve::new(verts, closed) {
                let back = parse_text(&to_text(&c)).unwrap();
                let back_json = parse_json(&to_json(&c)).unwrap();
                for ((a, b), d) in c.vertices().iter().zip(back.vertices()).zip(back_json.vertices()) {
                    for k in 0..3 {
                        prop_assert_eq!(a[k].to_bits(), b[k].to_bits());
                        prop_assert_eq!(a[k].to_bits(), d[k].to_bits());
                    }
                }
                prop_assert_eq!(back.is_closed(), closed);
            }
        }
    }
}
