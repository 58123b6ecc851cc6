use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::clustering::Clustering;
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Flat JSON record of everything needed to re-run a clustering.
pub type Sidecar = Map<String, Value>;

fn check_sizes(clustering: &Clustering, dataset: &Dataset) -> Result<()> {
    if clustering.n_points() != dataset.len() {
        return Err(Error::invalid(format!(
            "clustering covers {} points but the dataset has {}",
            clustering.n_points(),
            dataset.len()
        )));
    }
    Ok(())
}

/// CSV with one row per point: `point_id`, coordinates `x0..`, `cluster` and, when known, `true_label`.
pub fn clustering_csv(clustering: &Clustering, dataset: &Dataset) -> Result<String> {
    check_sizes(clustering, dataset)?;
    let mut out = String::from("point_id");
    for d in 0..dataset.dim() {
        let _ = write!(out, ",x{d}");
    }
    out.push_str(",cluster");
    if dataset.labels.is_some() {
        out.push_str(",true_label");
    }
    out.push('\n');
    for (i, p) in dataset.points.iter().enumerate() {
        let _ = write!(out, "{i}");
        for c in p.coords() {
            let _ = write!(out, ",{c:?}");
        }
        let _ = write!(out, ",{}", clustering.label_of(i));
        if let Some(labels) = &dataset.labels {
            let _ = write!(out, ",{}", labels.describe(i));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Dataset provenance merged with the clustering parameters.
pub fn sidecar(clustering: &Clustering, dataset: &Dataset) -> Result<Sidecar> {
    let mut map = dataset.provenance.clone();
    map.insert("dataset".into(), Value::from(dataset.name.clone()));
    map.insert("points".into(), Value::from(dataset.len()));
    map.insert("clusters".into(), Value::from(clustering.len()));
    match serde_json::to_value(&clustering.params)? {
        Value::Object(params) => map.extend(params),
        _ => unreachable!("parameters serialize to an object"),
    }
    Ok(map)
}

/// Path of the JSON sidecar written next to `csv_path`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes the CSV to `path` and the sidecar next to it; returns the sidecar path.
pub fn write_clustering(clustering: &Clustering, dataset: &Dataset, path: &Path) -> Result<PathBuf> {
    let csv = clustering_csv(clustering, dataset)?;
    let side = sidecar(clustering, dataset)?;
    write_file(path, &csv)?;
    let side_path = sidecar_path(path);
    write_file(&side_path, &(serde_json::to_string_pretty(&side)? + "\n"))?;
    Ok(side_path)
}

/// Reads the `cluster` column back from a CSV written by [`write_clustering`].
pub fn read_assignments(text: &str) -> Result<Vec<usize>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header row"))?;
    let columns: Vec<&str> = header.split(',').collect();
    let col = columns
        .iter()
        .position(|&c| c == "cluster")
        .ok_or_else(|| Error::parse(1, "no 'cluster' column"))?;
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != columns.len() {
                return Err(Error::parse(i + 1, format!("expected {} fields, got {}", columns.len(), fields.len())));
            }
            fields[col]
                .parse()
                .map_err(|_| Error::parse(i + 1, format!("cluster '{}' is not an integer", fields[col])))
        })
        .collect()
}
