use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::BinaryClass;
use crate::data::{Dataset, Labels};
use crate::encoding::Point;
use crate::error::{Error, Result};

const FEATURES: usize = 9;

/// What to do with rows that contain a `?` attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingPolicy {
    #[default]
    Drop,
    /// Replace with the most frequent value of that attribute (smallest on ties).
    ImputeMode,
}

impl MissingPolicy {
    pub fn as_str(&self) -> &'static str {
        match self {
            MissingPolicy::Drop => "drop",
            MissingPolicy::ImputeMode => "impute-mode",
        }
    }
}

impl fmt::Display for MissingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MissingPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "drop" => Ok(MissingPolicy::Drop),
            "impute-mode" | "impute" => Ok(MissingPolicy::ImputeMode),
            other => Err(Error::invalid(format!("unknown missing policy '{other}' (expected drop or impute-mode)"))),
        }
    }
}

/// Loads the Wisconsin breast cancer CSV: id, nine attributes, class (2 benign, 4 malignant).
/// Benign rows are labeled positive.
pub fn load_wbc_csv(text: &str, policy: MissingPolicy) -> Result<Dataset> {
    let mut rows: Vec<[Option<f64>; FEATURES]> = Vec::new();
    let mut classes = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != FEATURES + 2 {
            return Err(Error::parse(
                line_no,
                format!("expected {} comma-separated fields, got {}", FEATURES + 2, fields.len()),
            ));
        }
        let mut row = [None; FEATURES];
        for (slot, field) in row.iter_mut().zip(&fields[1..=FEATURES]) {
            if *field == "?" {
                continue;
            }
            let v: u32 = field
                .parse()
                .map_err(|_| Error::parse(line_no, format!("attribute '{field}' is not an integer")))?;
            if !(1..=10).contains(&v) {
                return Err(Error::parse(line_no, format!("attribute {v} outside 1..=10")));
            }
            *slot = Some(v as f64);
        }
        let class = match fields[FEATURES + 1] {
            "2" => BinaryClass::Positive,
            "4" => BinaryClass::Negative,
            other => return Err(Error::parse(line_no, format!("unknown class code '{other}'"))),
        };
        rows.push(row);
        classes.push(class);
    }
    if rows.is_empty() {
        return Err(Error::parse(1, "no data rows"));
    }

    let total = rows.len();
    let (points, labels): (Vec<Point>, Vec<BinaryClass>) = match policy {
        MissingPolicy::Drop => rows
            .iter()
            .zip(&classes)
            .filter_map(|(r, &c)| r.iter().copied().collect::<Option<Vec<f64>>>().map(|v| (v, c)))
            .map(|(v, c)| Ok((Point::new(v)?, c)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip(),
        MissingPolicy::ImputeMode => {
            let modes: Vec<f64> = (0..FEATURES)
                .map(|f| {
                    let mut tally: BTreeMap<u32, usize> = BTreeMap::new();
                    for r in &rows {
                        if let Some(v) = r[f] {
                            *tally.entry(v as u32).or_default() += 1;
                        }
                    }
                    // max_by_key keeps the last maximum, so scan from the top to favor small values
                    tally.iter().rev().max_by_key(|(_, &c)| c).map_or(1.0, |(&v, _)| v as f64)
                })
                .collect();
            let points = rows
                .iter()
                .map(|r| Point::new((0..FEATURES).map(|f| r[f].unwrap_or(modes[f])).collect()))
                .collect::<Result<Vec<_>>>()?;
            (points, classes)
        }
    };
    let kept = points.len();
    Ok(Dataset::new("wbc", points, Some(Labels::Class(labels)))?
        .with_provenance("source", "wbc")
        .with_provenance("missing", policy.as_str())
        .with_provenance("rows_read", total)
        .with_provenance("rows_kept", kept))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "1000025,5,1,1,1,2,1,3,1,1,2\n1002945,5,4,4,5,7,10,3,2,1,2\n1057013,8,4,5,1,2,?,7,3,1,4\n1017122,8,10,10,8,7,10,9,7,1,4\n";

    #[test]
    fn first_row_parses() {
        let d = load_wbc_csv(SAMPLE, MissingPolicy::Drop).unwrap();
        assert_eq!(d.points[0].coords(), &[5.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0, 1.0, 1.0]);
        assert_eq!(d.labels, Some(Labels::Class(vec![BinaryClass::Positive, BinaryClass::Positive, BinaryClass::Negative])));
        assert_eq!(d.dim(), 9);
    }

    #[test]
    fn impute_fills_with_the_column_mode() {
        let d = load_wbc_csv(SAMPLE, MissingPolicy::ImputeMode).unwrap();
        assert_eq!(d.len(), 4);
        // column six holds 1, 10, 10: mode is 10
        assert_eq!(d.points[2].coords()[5], 10.0);
    }

    #[test]
    fn errors_carry_row_numbers() {
        assert!(load_wbc_csv("", MissingPolicy::Drop).is_err());
        let bad_class = SAMPLE.replace("1,1,2\n1002945", "1,1,3\n1002945");
        assert!(matches!(load_wbc_csv(&bad_class, MissingPolicy::Drop), Err(Error::Parse { line: 1, .. })));
        let short = "1,2,3\n";
        assert!(matches!(load_wbc_csv(short, MissingPolicy::Drop), Err(Error::Parse { line: 1, .. })));
        let junk = SAMPLE.replace("8,10,10", "8,x,10");
        assert!(matches!(load_wbc_csv(&junk, MissingPolicy::Drop), Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn policy_strings() {
        assert_eq!("impute-mode".parse::<MissingPolicy>().unwrap(), MissingPolicy::ImputeMode);
        assert!("mean".parse::<MissingPolicy>().is_err());
    }
}
