//! Distance metrics, origin selection, and integer distance codes.
//!
//! Every point is reduced to one nonnegative integer: its distance from a
//! chosen origin, multiplied by a scale factor and rounded to the closest
//! integer. Codes are written on an `n`-qubit register, and the top `m` bits of
//! a code name the cluster it falls in.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the total simulated register width.
pub const DEFAULT_MAX_QUBITS: u32 = 24;

// Guards `ceil(log2(ratio))` against a ratio that lands a hair above a power of two.
const RATIO_SLACK: f64 = 1e-12;

/// A data point with `k >= 1` finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("a point needs at least one coordinate"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index: 0 });
        }
        Ok(Point(coords))
    }

    pub fn xy(x: f64, y: f64) -> Self {
        Point(vec![x, y])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }
}

/// Checks that a dataset is nonempty, finite and of one dimensionality.
/// Returns that dimensionality.
pub fn check_dataset(points: &[Point]) -> Result<usize> {
    let first = points.first().ok_or(Error::TooFewPoints {
        needed: 1,
        found: 0,
    })?;
    let dim = first.dim();
    for (index, p) in points.iter().enumerate() {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        if p.coords().iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index });
        }
    }
    Ok(dim)
}

/// Minkowski `L_p` metric, or its `p -> inf` limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Minkowski(f64),
    Chebyshev,
}

impl Metric {
    pub const EUCLIDEAN: Metric = Metric::Minkowski(2.0);
    pub const MANHATTAN: Metric = Metric::Minkowski(1.0);

    pub fn minkowski(p: f64) -> Result<Self> {
        let m = Metric::Minkowski(p);
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Metric::Minkowski(p) if !(p >= 1.0) => Err(Error::InvalidMetric(p)),
            _ => Ok(()),
        }
    }
}

impl Default for Metric {
    fn default() -> Self {
        Metric::EUCLIDEAN
    }
}

/// `(sum |x_i - y_i|^p)^(1/p)`, or `max |x_i - y_i|` for Chebyshev.
pub fn minkowski_distance(x: &Point, y: &Point, metric: Metric) -> Result<f64> {
    metric.validate()?;
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    Ok(distance_unchecked(x.coords(), y.coords(), metric))
}

pub(crate) fn distance_unchecked(x: &[f64], y: &[f64], metric: Metric) -> f64 {
    let diffs = x.iter().zip(y).map(|(a, b)| (a - b).abs());
    match metric {
        Metric::Chebyshev => diffs.fold(0.0, f64::max),
        Metric::Minkowski(p) if p == 1.0 => diffs.sum(),
        Metric::Minkowski(p) if p == 2.0 => diffs.map(|d| d * d).sum::<f64>().sqrt(),
        Metric::Minkowski(p) => diffs.map(|d| d.powf(p)).sum::<f64>().powf(1.0 / p),
    }
}

/// Exhaustive all-pairs scan for the two points farthest apart.
///
/// Ties resolve to the lexicographically smallest `(i, j)` with `i < j`.
pub fn farthest_pair(points: &[Point], metric: Metric) -> Result<(usize, usize, f64)> {
    metric.validate()?;
    if points.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            found: points.len(),
        });
    }
    check_dataset(points)?;
    let mut best = (0, 1, f64::NEG_INFINITY);
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d = distance_unchecked(points[i].coords(), points[j].coords(), metric);
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    Ok(best)
}

/// Integer distance codes of a dataset relative to one origin.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceEncoding {
    /// Index of the origin when it is a member of the dataset.
    pub origin_index: Option<usize>,
    pub origin: Vec<f64>,
    pub scale: f64,
    /// Unscaled distance of every point from the origin.
    pub distances: Vec<f64>,
    pub codes: Vec<u64>,
    /// Register width: `ceil(log2(max code + 1))`, at least 1.
    pub n: u32,
    /// Largest unscaled distance from the origin.
    pub d_max_raw: f64,
}

impl DistanceEncoding {
    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn max_code(&self) -> u64 {
        self.codes.iter().copied().max().unwrap_or(0)
    }

    /// Sorted distinct codes.
    pub fn distinct_codes(&self) -> Vec<u64> {
        let mut c = self.codes.clone();
        c.sort_unstable();
        c.dedup();
        c
    }
}

/// Bits needed to hold `code`, minimum 1.
pub fn register_width(code: u64) -> u32 {
    (u64::BITS - code.leading_zeros()).max(1)
}

/// Scales, rounds and bounds distances into register codes.
#[derive(Debug, Clone, Copy)]
pub struct Encoder {
    pub metric: Metric,
    pub scale: f64,
    pub max_qubits: u32,
}

impl Encoder {
    pub fn new(metric: Metric, scale: f64) -> Result<Self> {
        metric.validate()?;
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid(format!("scale must be positive, got {scale}")));
        }
        Ok(Encoder {
            metric,
            scale,
            max_qubits: DEFAULT_MAX_QUBITS,
        })
    }

    pub fn with_max_qubits(mut self, cap: u32) -> Self {
        self.max_qubits = cap;
        self
    }

    pub fn encode_from_index(&self, points: &[Point], origin_index: usize) -> Result<DistanceEncoding> {
        let origin = points.get(origin_index).ok_or_else(|| {
            Error::invalid(format!(
                "origin index {origin_index} out of range for {} points",
                points.len()
            ))
        })?;
        self.encode(points, origin.coords(), Some(origin_index))
    }

    pub fn encode_from_point(&self, points: &[Point], origin: &Point) -> Result<DistanceEncoding> {
        self.encode(points, origin.coords(), None)
    }

    fn encode(&self, points: &[Point], origin: &[f64], origin_index: Option<usize>) -> Result<DistanceEncoding> {
        let dim = check_dataset(points)?;
        if origin.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: origin.len(),
            });
        }
        let distances: Vec<f64> = points
            .iter()
            .map(|p| distance_unchecked(origin, p.coords(), self.metric))
            .collect();
        let limit = 2f64.powi(self.max_qubits.min(63) as i32);
        let mut codes = Vec::with_capacity(points.len());
        for (point, &d) in distances.iter().enumerate() {
            // f64::round is half away from zero
            let scaled = (self.scale * d).round();
            if !(scaled < limit) {
                return Err(Error::RegisterOverflow {
                    point,
                    code: if scaled.is_finite() { scaled as u64 } else { u64::MAX },
                    width: if scaled < 2f64.powi(64) {
                        register_width(scaled as u64)
                    } else {
                        u64::BITS
                    },
                    cap: self.max_qubits,
                });
            }
            codes.push(scaled as u64);
        }
        let max_code = codes.iter().copied().max().unwrap_or(0);
        let d_max_raw = distances.iter().copied().fold(0.0, f64::max);
        Ok(DistanceEncoding {
            origin_index,
            origin: origin.to_vec(),
            scale: self.scale,
            distances,
            codes,
            n: register_width(max_code),
            d_max_raw,
        })
    }
}

/// Shorthand for [`Encoder::encode_from_index`] with the default qubit cap.
pub fn encode_distances(
    points: &[Point],
    origin_index: usize,
    metric: Metric,
    scale: f64,
) -> Result<DistanceEncoding> {
    Encoder::new(metric, scale)?.encode_from_index(points, origin_index)
}

/// Where distances are measured from.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum OriginPolicy {
    /// First point of the farthest pair.
    #[default]
    FarthestEndpoint,
    /// Second point of the farthest pair.
    FarthestOther,
    Index(usize),
    Fixed(Vec<f64>),
}

impl std::fmt::Display for OriginPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OriginPolicy::FarthestEndpoint => write!(f, "farthest-endpoint"),
            OriginPolicy::FarthestOther => write!(f, "farthest-other"),
            OriginPolicy::Index(i) => write!(f, "index:{i}"),
            OriginPolicy::Fixed(c) => {
                let parts: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                write!(f, "fixed:{}", parts.join(","))
            }
        }
    }
}

impl std::str::FromStr for OriginPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("unknown origin '{s}' (farthest-endpoint | farthest-other | index:I | fixed:X,Y,...)"));
        if s == "farthest-endpoint" || s == "farthest" {
            return Ok(OriginPolicy::FarthestEndpoint);
        }
        if s == "farthest-other" {
            return Ok(OriginPolicy::FarthestOther);
        }
        if let Some(i) = s.strip_prefix("index:") {
            return i.trim().parse().map(OriginPolicy::Index).map_err(|_| bad());
        }
        if let Some(c) = s.strip_prefix("fixed:") {
            let coords = c
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            return Ok(OriginPolicy::Fixed(coords));
        }
        Err(bad())
    }
}

/// How raw distances are mapped onto the code range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalePolicy {
    Explicit(f64),
    /// Pick the scale that sends the largest distance to `2^width - 1`.
    AutoFit { width: u32 },
}

impl Default for ScalePolicy {
    fn default() -> Self {
        ScalePolicy::AutoFit { width: 10 }
    }
}

impl std::fmt::Display for ScalePolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScalePolicy::Explicit(s) => write!(f, "{s}"),
            ScalePolicy::AutoFit { width } => write!(f, "auto:{width}"),
        }
    }
}

impl std::str::FromStr for ScalePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("unknown scale '{s}' (a positive number or auto:WIDTH)"));
        if let Some(w) = s.strip_prefix("auto:") {
            return w.trim().parse().map(|width| ScalePolicy::AutoFit { width }).map_err(|_| bad());
        }
        s.trim().parse().map(ScalePolicy::Explicit).map_err(|_| bad())
    }
}

/// Everything needed to turn points into a [`DistanceEncoding`].
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingConfig {
    pub metric: Metric,
    pub origin: OriginPolicy,
    pub scale: ScalePolicy,
    pub max_qubits: u32,
}

impl Default for EncodingConfig {
    fn default() -> Self {
        EncodingConfig {
            metric: Metric::EUCLIDEAN,
            origin: OriginPolicy::default(),
            scale: ScalePolicy::default(),
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }
}

impl EncodingConfig {
    /// Resolves the origin and scale policies and encodes the dataset.
    pub fn encode(&self, points: &[Point]) -> Result<DistanceEncoding> {
        let dim = check_dataset(points)?;
        match &self.origin {
            OriginPolicy::FarthestEndpoint | OriginPolicy::FarthestOther => {
                let i = if points.len() == 1 {
                    0
                } else {
                    let (a, b, _) = farthest_pair(points, self.metric)?;
                    if self.origin == OriginPolicy::FarthestEndpoint {
                        a
                    } else {
                        b
                    }
                };
                self.encode_with(points, points[i].coords(), Some(i))
            }
            OriginPolicy::Index(i) => {
                let p = points.get(*i).ok_or_else(|| {
                    Error::invalid(format!("origin index {i} out of range for {} points", points.len()))
                })?;
                self.encode_with(points, p.coords(), Some(*i))
            }
            OriginPolicy::Fixed(c) => {
                if c.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: c.len(),
                    });
                }
                self.encode_with(points, c, None)
            }
        }
    }

    fn encode_with(&self, points: &[Point], origin: &[f64], index: Option<usize>) -> Result<DistanceEncoding> {
        let scale = match self.scale {
            ScalePolicy::Explicit(s) => s,
            ScalePolicy::AutoFit { width } => {
                if width == 0 || width > self.max_qubits {
                    return Err(Error::invalid(format!(
                        "auto-fit width {width} must lie in 1..={}",
                        self.max_qubits
                    )));
                }
                let far = points
                    .iter()
                    .map(|p| distance_unchecked(origin, p.coords(), self.metric))
                    .fold(0.0, f64::max);
                if far > 0.0 {
                    ((1u64 << width) - 1) as f64 / far
                } else {
                    1.0
                }
            }
        };
        let encoder = Encoder::new(self.metric, scale)?.with_max_qubits(self.max_qubits);
        encoder.encode(points, origin, index)
    }
}

/// Number of ancillae needed so clusters of width `d_min_cluster` tile `[0, d_max]`:
/// `ceil(log2(d_max / d_min_cluster))`, at least 1.
pub fn ancilla_width(d_max: f64, d_min_cluster: f64) -> Result<u32> {
    if !(d_max > 0.0 && d_min_cluster > 0.0) || !d_max.is_finite() || !d_min_cluster.is_finite() {
        return Err(Error::invalid(format!(
            "ancilla width needs positive distances, got d_max = {d_max}, d_min = {d_min_cluster}"
        )));
    }
    if d_min_cluster > d_max {
        return Err(Error::invalid(format!(
            "cluster width {d_min_cluster} exceeds d_max = {d_max}"
        )));
    }
    let bits = ((d_max / d_min_cluster).log2() - RATIO_SLACK).ceil();
    Ok((bits as u32).max(1))
}

/// Inclusive code interval carried by ancilla label `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterBounds {
    pub t: u64,
    pub d_min: u64,
    pub d_max: u64,
}

impl ClusterBounds {
    pub fn contains(&self, code: u64) -> bool {
        self.d_min <= code && code <= self.d_max
    }
}

/// Bounds of label `t` on an `n`-qubit distance register with `m` ancillae:
/// codes whose top `m` bits spell `t`, i.e. `[t * 2^(n-m), (t+1) * 2^(n-m) - 1]`.
pub fn cluster_bounds(t: u64, n: u32, m: u32) -> Result<ClusterBounds> {
    if m > n {
        return Err(Error::invalid(format!("m = {m} ancillae exceeds n = {n} distance qubits")));
    }
    if n >= 64 {
        return Err(Error::invalid(format!("n = {n} is too wide")));
    }
    if t >= 1u64 << m {
        return Err(Error::invalid(format!("label {t} does not fit in {m} ancillae")));
    }
    let width = 1u64 << (n - m);
    Ok(ClusterBounds {
        t,
        d_min: t * width,
        d_max: (t + 1) * width - 1,
    })
}

/// The ancilla label a code receives: its top `m` bits out of `n`.
pub fn bucket_of(code: u64, n: u32, m: u32) -> u64 {
    debug_assert!(m <= n);
    code >> (n - m)
}
