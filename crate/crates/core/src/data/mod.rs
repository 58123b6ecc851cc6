//! Dataset ingestion, synthetic generation and result persistence.

mod circles;
mod output;
mod svg;
mod tsplib;
mod wbc;

use serde::{Deserialize, Serialize};

use crate::analysis::BinaryClass;
use crate::encoding::{check_dataset, Point};
use crate::error::{Error, Result};

pub use circles::{gen_circles, CirclesSpec};
pub use output::{clustering_csv, read_assignments, sidecar, sidecar_path, write_clustering, Sidecar};
pub use svg::{emit_svg_scatter, render_svg_scatter};
pub use tsplib::{parse_tsplib, write_tsplib};
pub use wbc::{load_wbc_csv, MissingPolicy};

/// Ground truth attached to a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "values")]
pub enum Labels {
    Class(Vec<BinaryClass>),
    Ring(Vec<usize>),
}

impl Labels {
    pub fn len(&self) -> usize {
        match self {
            Labels::Class(v) => v.len(),
            Labels::Ring(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Text written to the `true_label` column for point `i`.
    pub fn describe(&self, i: usize) -> String {
        match self {
            Labels::Class(v) => v[i].as_str().to_string(),
            Labels::Ring(v) => v[i].to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub points: Vec<Point>,
    pub labels: Option<Labels>,
    /// Flat key/value description of where the data came from.
    pub provenance: serde_json::Map<String, serde_json::Value>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, points: Vec<Point>, labels: Option<Labels>) -> Result<Self> {
        if !points.is_empty() {
            check_dataset(&points)?;
        }
        if let Some(l) = &labels {
            if l.len() != points.len() {
                return Err(Error::invalid(format!(
                    "{} labels for {} points",
                    l.len(),
                    points.len()
                )));
            }
        }
        Ok(Dataset {
            name: name.into(),
            points,
            labels,
            provenance: serde_json::Map::new(),
        })
    }

    pub fn with_provenance(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.provenance.insert(key.to_string(), value.into());
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Point::dim)
    }
}
