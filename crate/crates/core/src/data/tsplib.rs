use std::fmt::Write as _;

use crate::data::Dataset;
use crate::encoding::Point;
use crate::error::{Error, Result};

/// Parses a TSPLIB node-coordinate file. Only `EUC_2D` instances are accepted.
pub fn parse_tsplib(text: &str) -> Result<Dataset> {
    let mut name = None;
    let mut dimension: Option<usize> = None;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut in_section = false;

    for (line_no, line) in lines.by_ref() {
        if line.is_empty() {
            continue;
        }
        if line == "NODE_COORD_SECTION" {
            in_section = true;
            break;
        }
        if line == "EOF" {
            break;
        }
        let Some((key, value)) = line.split_once(':') else {
            return Err(Error::parse(line_no, format!("expected 'KEY: value' header, got '{line}'")));
        };
        let value = value.trim();
        match key.trim() {
            "NAME" => name = Some(value.to_string()),
            "DIMENSION" => {
                dimension = Some(
                    value
                        .parse()
                        .map_err(|_| Error::parse(line_no, format!("DIMENSION '{value}' is not a count")))?,
                )
            }
            "EDGE_WEIGHT_TYPE" if value != "EUC_2D" => {
                return Err(Error::parse(
                    line_no,
                    format!("edge weight type {value} is not supported; only EUC_2D is"),
                ))
            }
            _ => {}
        }
    }
    let last_line = text.lines().count();
    if !in_section {
        return Err(Error::parse(last_line.max(1), "missing NODE_COORD_SECTION"));
    }

    let mut points = Vec::new();
    let mut end_line = last_line + 1;
    for (line_no, line) in lines {
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            end_line = line_no;
            break;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::parse(line_no, format!("expected 'index x y', got '{line}'")));
        }
        let coord = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(line_no, format!("non-numeric coordinate '{s}'")))
        };
        points.push(Point::xy(coord(fields[1])?, coord(fields[2])?));
    }
    if let Some(d) = dimension {
        if d != points.len() {
            return Err(Error::parse(
                end_line,
                format!("DIMENSION is {d} but the coordinate section has {} rows", points.len()),
            ));
        }
    }
    let name = name.unwrap_or_else(|| "tsplib".to_string());
    Ok(Dataset::new(name.clone(), points, None)?.with_provenance("source", "tsplib").with_provenance("name", name))
}

/// Serializes a 2-D dataset as a TSPLIB `EUC_2D` instance.
pub fn write_tsplib(dataset: &Dataset) -> Result<String> {
    if dataset.dim() != 2 && !dataset.is_empty() {
        return Err(Error::NotTwoDimensional(dataset.dim()));
    }
    let mut out = String::new();
    let _ = writeln!(out, "NAME: {}", dataset.name);
    let _ = writeln!(out, "TYPE: TSP");
    let _ = writeln!(out, "DIMENSION: {}", dataset.len());
    let _ = writeln!(out, "EDGE_WEIGHT_TYPE: EUC_2D");
    let _ = writeln!(out, "NODE_COORD_SECTION");
    for (i, p) in dataset.points.iter().enumerate() {
        let _ = writeln!(out, "{} {:?} {:?}", i + 1, p.coords()[0], p.coords()[1]);
    }
    out.push_str("EOF\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TWO: &str = "NAME: pair\nTYPE: TSP\nDIMENSION: 2\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 334.5 161.7\n2 397.6 262.8\nEOF\n";

    #[test]
    fn parses_minimal_file_verbatim() {
        let d = parse_tsplib(TWO).unwrap();
        assert_eq!(d.name, "pair");
        assert_eq!(d.points, vec![Point::xy(334.5, 161.7), Point::xy(397.6, 262.8)]);
    }

    #[test]
    fn eof_is_optional() {
        let d = parse_tsplib(TWO.trim_end_matches("EOF\n")).unwrap();
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn dimension_mismatch_reports_the_section_end() {
        let text = TWO.replace("DIMENSION: 2", "DIMENSION: 3");
        match parse_tsplib(&text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 8);
                assert!(message.contains("DIMENSION"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(parse_tsplib("NAME: x\nDIMENSION: 1\n"), Err(Error::Parse { .. })));
        let bad = TWO.replace("397.6", "abc");
        assert!(matches!(parse_tsplib(&bad), Err(Error::Parse { line: 7, .. })));
        let geo = TWO.replace("EUC_2D", "GEO");
        assert!(matches!(parse_tsplib(&geo), Err(Error::Parse { line: 4, .. })));
        assert!(parse_tsplib("").is_err());
    }

    proptest! {
        #[test]
        fn round_trip(coords in prop::collection::vec((-1e4f64..1e4, -1e4f64..1e4), 1..50)) {
            let pts = coords.iter().map(|&(x, y)| Point::xy(x, y)).collect();
            let d = Dataset::new("rt", pts, None).unwrap();
            let back = parse_tsplib(&write_tsplib(&d).unwrap()).unwrap();
            prop_assert_eq!(back.points, d.points);
        }
    }
}
