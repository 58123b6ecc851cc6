//! Wiring between datasets, clustering algorithms, scoring and output files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use qcluster::analysis::{
    agglomerative_baseline, divisive_baseline, pca_2d, ring_purity, score_binary, ConfusionCounts, Linkage,
};
use qcluster::data::{
    emit_svg_scatter, gen_circles, load_wbc_csv, parse_tsplib, write_clustering, CirclesSpec, Dataset, Labels,
    MissingPolicy,
};
use qcluster::qhca::Shots;
use qcluster::{
    AncillaSpec, CenterPolicy, Clustering, DeltaSpec, EncodingConfig, OriginPolicy, QhcaConfig, ScalePolicy, TargetK,
    UnsharpConfig, Weighting,
};
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{json, Map, Value};

pub const DEFAULT_MAX_QUBITS: u32 = 24;
pub const MAX_QUBITS_ENV: &str = "CLUSTER_MAX_QUBITS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Run(#[from] qcluster::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Qhca,
    Unsharp,
    Agglomerative,
    Divisive,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Qhca => "qhca",
            Algorithm::Unsharp => "unsharp",
            Algorithm::Agglomerative => "agglomerative",
            Algorithm::Divisive => "divisive",
        }
    }
}

/// One run, as flags or as a flat JSON config file. Every field is optional so
/// a file and the command line can be layered; unknown keys are ignored, which
/// lets a result sidecar be fed back in unchanged.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<Algorithm>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub circles: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tsplib: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wbc: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub missing: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pca: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standardize: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(alias = "ancillae", skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(deserialize_with = "number_or_text", skip_serializing_if = "Option::is_none")]
    pub scale: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_qubits: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weighting: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linkage: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<PathBuf>,
}

fn number_or_text<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    Ok(match Option::<Value>::deserialize(d)? {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s),
        Some(Value::Number(n)) => Some(n.to_string()),
        Some(other) => return Err(serde::de::Error::custom(format!("expected a number or string, got {other}"))),
    })
}

macro_rules! layer {
    ($top:expr, $base:expr, $($field:ident),+ $(,)?) => {
        RunConfig { $($field: $top.$field.or($base.$field)),+ }
    };
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| usage(format!("bad config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        Self::from_json(&read_file(path)?)
    }

    /// Fields set in `self` win over those in `base`.
    pub fn over(self, base: RunConfig) -> RunConfig {
        // a dataset source given on the command line replaces the file's source entirely
        let base = if self.circles.is_some() || self.tsplib.is_some() || self.wbc.is_some() {
            RunConfig {
                circles: None,
                tsplib: None,
                wbc: None,
                ..base
            }
        } else {
            base
        };
        layer!(
            self, base, algorithm, circles, tsplib, wbc, missing, pca, standardize, k, m, d_min, delta, kappa,
            scale, max_qubits, origin, weighting, center, linkage, shots, seed, csv, svg, metrics,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Circles(CirclesSpec),
    Tsplib(PathBuf),
    Wbc(PathBuf, MissingPolicy),
}

#[derive(Debug, Clone)]
enum Plan {
    Qhca(QhcaConfig),
    Unsharp(UnsharpConfig),
    Agglomerative { k: usize, linkage: Linkage },
    Divisive { k: usize },
}

#[derive(Debug, Clone)]
struct Resolved {
    source: Source,
    pca: bool,
    standardize: bool,
    plan: Plan,
}

fn parse_opt<T: std::str::FromStr<Err = qcluster::Error>>(value: &Option<String>, what: &str) -> Result<Option<T>, CliError> {
    value
        .as_deref()
        .map(|v| v.parse::<T>().map_err(|e| usage(format!("--{what}: {e}"))))
        .transpose()
}

fn reject(algorithm: Algorithm, given: &[(&str, bool)]) -> Result<(), CliError> {
    match given.iter().find(|(_, present)| *present) {
        Some((flag, _)) => Err(usage(format!("--{flag} does not apply to {}", algorithm.as_str()))),
        None => Ok(()),
    }
}

fn parse_scale(text: &str) -> Result<ScalePolicy, CliError> {
    let policy: ScalePolicy = text.parse().map_err(|e| usage(format!("--scale: {e}")))?;
    if let ScalePolicy::Explicit(s) = policy {
        if !(s > 0.0 && s.is_finite()) {
            return Err(usage(format!("--scale must be positive, got {s}")));
        }
    }
    Ok(policy)
}

fn resolve(config: &RunConfig) -> Result<Resolved, CliError> {
    let algorithm = config.algorithm.ok_or_else(|| usage("no algorithm given"))?;
    let sources = [config.circles.is_some(), config.tsplib.is_some(), config.wbc.is_some()];
    let source = match sources.iter().filter(|&&s| s).count() {
        0 => return Err(usage("one dataset source is required: --circles, --tsplib or --wbc")),
        1 => {
            if let Some(spec) = &config.circles {
                Source::Circles(spec.parse().map_err(|e| usage(format!("--circles: {e}")))?)
            } else if let Some(p) = &config.tsplib {
                Source::Tsplib(p.clone())
            } else {
                let missing = parse_opt::<MissingPolicy>(&config.missing, "missing")?.unwrap_or_default();
                Source::Wbc(config.wbc.clone().expect("counted above"), missing)
            }
        }
        _ => return Err(usage("only one dataset source may be given")),
    };
    if config.missing.is_some() && !matches!(source, Source::Wbc(..)) {
        return Err(usage("--missing only applies to --wbc"));
    }
    let pca = config.pca.unwrap_or(false);
    if config.standardize.is_some() && !pca {
        return Err(usage("--no-standardize only applies with --pca"));
    }

    let quantum = algorithm == Algorithm::Qhca || algorithm == Algorithm::Unsharp;
    if !quantum {
        reject(
            algorithm,
            &[
                ("ancillae", config.m.is_some()),
                ("d-min", config.d_min.is_some()),
                ("delta", config.delta.is_some()),
                ("kappa", config.kappa.is_some()),
                ("scale", config.scale.is_some()),
                ("max-qubits", config.max_qubits.is_some()),
                ("origin", config.origin.is_some()),
                ("weighting", config.weighting.is_some()),
                ("center", config.center.is_some()),
                ("shots", config.shots.is_some()),
                ("seed", config.seed.is_some()),
            ],
        )?;
    }
    if algorithm != Algorithm::Agglomerative {
        reject(algorithm, &[("linkage", config.linkage.is_some())])?;
    }

    let encoding = || -> Result<EncodingConfig, CliError> {
        let origin = match parse_opt::<OriginPolicy>(&config.origin, "origin")? {
            Some(o) => o,
            None if matches!(source, Source::Circles(_)) => OriginPolicy::Fixed(vec![0.0, 0.0]),
            None => OriginPolicy::FarthestEndpoint,
        };
        let scale = match &config.scale {
            Some(s) => parse_scale(s)?,
            None => ScalePolicy::default(),
        };
        let max_qubits = config.max_qubits.unwrap_or(DEFAULT_MAX_QUBITS);
        if max_qubits == 0 {
            return Err(usage("the qubit cap must be at least 1"));
        }
        Ok(EncodingConfig {
            origin,
            scale,
            max_qubits,
            ..Default::default()
        })
    };
    let weighting = parse_opt::<Weighting>(&config.weighting, "weighting")?.unwrap_or_default();
    let need_k = || config.k.ok_or_else(|| usage(format!("--k is required for {}", algorithm.as_str())));

    let plan = match algorithm {
        Algorithm::Qhca => {
            reject(
                algorithm,
                &[
                    ("delta", config.delta.is_some()),
                    ("kappa", config.kappa.is_some()),
                    ("center", config.center.is_some()),
                ],
            )?;
            if config.seed.is_some() && config.shots.is_none() {
                return Err(usage("--seed needs --shots"));
            }
            let ancillae = match (config.m, config.d_min, config.k) {
                (Some(_), Some(_), _) => return Err(usage("give either --ancillae or --d-min, not both")),
                (Some(m), None, _) => AncillaSpec::Explicit(m),
                (None, Some(w), _) if w > 0.0 && w.is_finite() => AncillaSpec::MinClusterWidth(w),
                (None, Some(w), _) => return Err(usage(format!("--d-min must be positive, got {w}"))),
                (None, None, Some(k)) if k >= 1 => AncillaSpec::Explicit((k as u64).next_power_of_two().trailing_zeros().max(1)),
                (None, None, _) => return Err(usage("qhca needs --ancillae, --d-min or --k")),
            };
            let shots = match config.shots {
                Some(0) => return Err(usage("--shots must be positive")),
                Some(shots) => Some(Shots {
                    shots,
                    seed: config.seed.unwrap_or(0),
                }),
                None => None,
            };
            Plan::Qhca(QhcaConfig {
                target_k: config.k.map_or(TargetK::AllNonempty, TargetK::Exact),
                ancillae,
                encoding: encoding()?,
                weighting,
                shots,
            })
        }
        Algorithm::Unsharp => {
            reject(
                algorithm,
                &[
                    ("ancillae", config.m.is_some()),
                    ("d-min", config.d_min.is_some()),
                    ("shots", config.shots.is_some()),
                    ("seed", config.seed.is_some()),
                ],
            )?;
            let delta = match config.delta {
                Some(d) if d > 0.0 && d.is_finite() => DeltaSpec::Value(d),
                Some(d) => return Err(usage(format!("--delta must be positive, got {d}"))),
                None => DeltaSpec::Auto,
            };
            let kappa = config.kappa.unwrap_or(1.0);
            if !(kappa > 0.0 && kappa.is_finite()) {
                return Err(usage(format!("--kappa must be positive, got {kappa}")));
            }
            Plan::Unsharp(UnsharpConfig {
                delta,
                kappa,
                target_k: need_k()?,
                center: parse_opt::<CenterPolicy>(&config.center, "center")?.unwrap_or_default(),
                encoding: encoding()?,
                weighting,
            })
        }
        Algorithm::Agglomerative => Plan::Agglomerative {
            k: need_k()?,
            linkage: parse_opt::<Linkage>(&config.linkage, "linkage")?.unwrap_or_default(),
        },
        Algorithm::Divisive => Plan::Divisive { k: need_k()? },
    };
    Ok(Resolved {
        source,
        pca,
        standardize: config.standardize.unwrap_or(true),
        plan,
    })
}

fn load(resolved: &Resolved) -> Result<Dataset, CliError> {
    let mut dataset = match &resolved.source {
        Source::Circles(spec) => gen_circles(spec)?,
        Source::Tsplib(path) => {
            parse_tsplib(&read_file(path)?)?.with_provenance("tsplib", path.to_string_lossy().into_owned())
        }
        Source::Wbc(path, missing) => {
            load_wbc_csv(&read_file(path)?, *missing)?.with_provenance("wbc", path.to_string_lossy().into_owned())
        }
    };
    if resolved.pca {
        let (_, projected) = pca_2d(&dataset.points, resolved.standardize)?;
        dataset.points = projected;
        dataset = dataset
            .with_provenance("pca", true)
            .with_provenance("standardize", resolved.standardize);
    }
    Ok(dataset)
}

fn cluster(plan: &Plan, dataset: &Dataset) -> Result<Clustering, CliError> {
    let points = &dataset.points;
    Ok(match plan {
        Plan::Qhca(cfg) => qcluster::qhca_run(points, cfg)?,
        Plan::Unsharp(cfg) => qcluster::unsharp_run(points, cfg)?,
        Plan::Agglomerative { k, linkage } => agglomerative_baseline(points, *k, *linkage)?,
        Plan::Divisive { k } => divisive_baseline(points, *k)?,
    })
}

/// Scores of a clustering against whatever ground truth the dataset carries.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Scores {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confusion: Option<ConfusionCounts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub purity: Option<f64>,
}

pub fn score(clustering: &Clustering, dataset: &Dataset) -> Result<Scores, CliError> {
    Ok(match &dataset.labels {
        Some(Labels::Class(classes)) => {
            let (confusion, accuracy) = score_binary(clustering, classes)?;
            Scores {
                accuracy: Some(accuracy),
                confusion: Some(confusion),
                purity: None,
            }
        }
        Some(Labels::Ring(rings)) => Scores {
            purity: Some(ring_purity(clustering, rings)?),
            ..Default::default()
        },
        None => Scores::default(),
    })
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub dataset: Dataset,
    pub clustering: Clustering,
    pub scores: Scores,
    /// Deterministic record of the run; excludes timing.
    pub metrics: Map<String, Value>,
    pub elapsed: Duration,
}

impl RunReport {
    pub fn summary(&self) -> String {
        let p = &self.clustering.params;
        let mut line = format!(
            "{} {}: N={} k={}",
            p.algorithm,
            self.dataset.name,
            self.dataset.len(),
            self.clustering.len()
        );
        if let Some(n) = p.n {
            line += &format!(" n={n}");
        }
        if let Some(m) = p.m {
            line += &format!(" m={m}");
        }
        if let Some(d) = p.delta {
            line += &format!(" delta={d:.4}");
        }
        if let Some(a) = self.scores.accuracy {
            line += &format!(" accuracy={a:.4}");
        }
        if let Some(pu) = self.scores.purity {
            line += &format!(" purity={pu:.4}");
        }
        line + &format!(" time={:.3}ms", self.elapsed.as_secs_f64() * 1e3)
    }
}

/// Runs ingestion, optional PCA, clustering and scoring, then writes any requested outputs.
pub fn execute(config: &RunConfig) -> Result<RunReport, CliError> {
    let resolved = resolve(config)?;
    let dataset = load(&resolved)?;
    let start = Instant::now();
    let clustering = cluster(&resolved.plan, &dataset)?;
    let elapsed = start.elapsed();
    let scores = score(&clustering, &dataset)?;

    let mut metrics = Map::new();
    metrics.insert("algorithm".into(), json!(clustering.params.algorithm));
    metrics.insert("dataset".into(), json!(dataset.name));
    metrics.insert("points".into(), json!(dataset.len()));
    metrics.insert("dimensions".into(), json!(dataset.dim()));
    metrics.insert("clusters".into(), json!(clustering.len()));
    metrics.insert(
        "cluster_sizes".into(),
        json!(clustering.clusters().iter().map(|c| c.members.len()).collect::<Vec<_>>()),
    );
    if let Value::Object(s) = serde_json::to_value(scores).expect("scores serialize") {
        metrics.extend(s);
    }
    metrics.insert("params".into(), serde_json::to_value(&clustering.params).expect("params serialize"));
    metrics.insert("provenance".into(), Value::Object(dataset.provenance.clone()));

    if let Some(path) = &config.csv {
        write_clustering(&clustering, &dataset, path)?;
    }
    if let Some(path) = &config.svg {
        emit_svg_scatter(&dataset, &clustering, path)?;
    }
    if let Some(path) = &config.metrics {
        write_file(path, &(serde_json::to_string_pretty(&metrics).expect("metrics serialize") + "\n"))?;
    }
    Ok(RunReport {
        dataset,
        clustering,
        scores,
        metrics,
        elapsed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchRow {
    pub algorithm: &'static str,
    pub n: usize,
    pub seconds: f64,
}

/// Times every algorithm on concentric circles of each size.
///
/// QHCA uses two ancillae at scale 10 from the ring center; unsharp and the
/// baselines target two clusters.
pub fn bench(base: &CirclesSpec, sizes: &[usize]) -> Result<Vec<BenchRow>, CliError> {
    if sizes.is_empty() {
        return Err(usage("--sizes needs at least one size"));
    }
    let encoding = EncodingConfig {
        origin: OriginPolicy::Fixed(vec![0.0, 0.0]),
        scale: ScalePolicy::Explicit(10.0),
        ..Default::default()
    };
    let plans: [(&'static str, Plan); 5] = [
        (
            "qhca",
            Plan::Qhca(QhcaConfig {
                ancillae: AncillaSpec::Explicit(2),
                encoding: encoding.clone(),
                ..Default::default()
            }),
        ),
        (
            "unsharp",
            Plan::Unsharp(UnsharpConfig {
                target_k: 2,
                encoding,
                ..Default::default()
            }),
        ),
        (
            "agglomerative-single",
            Plan::Agglomerative {
                k: 2,
                linkage: Linkage::Single,
            },
        ),
        (
            "agglomerative-complete",
            Plan::Agglomerative {
                k: 2,
                linkage: Linkage::Complete,
            },
        ),
        ("divisive", Plan::Divisive { k: 2 }),
    ];
    let mut rows = Vec::new();
    for &n in sizes {
        let dataset = gen_circles(&CirclesSpec { n_samples: n, ..*base })?;
        for (name, plan) in &plans {
            let start = Instant::now();
            cluster(plan, &dataset)?;
            rows.push(BenchRow {
                algorithm: name,
                n,
                seconds: start.elapsed().as_secs_f64(),
            });
        }
    }
    Ok(rows)
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("algorithm,n,seconds\n");
    for r in rows {
        out += &format!("{},{},{:.6}\n", r.algorithm, r.n, r.seconds);
    }
    out
}

pub fn write_bench(rows: &[BenchRow], path: &Path) -> Result<(), CliError> {
    write_file(path, &bench_csv(rows))
}

/// Qubit cap from the environment, if set.
pub fn max_qubits_from_env() -> Result<Option<u32>, CliError> {
    match std::env::var(MAX_QUBITS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| usage(format!("{MAX_QUBITS_ENV}='{v}' is not a qubit count"))),
        Err(_) => Ok(None),
    }
}
