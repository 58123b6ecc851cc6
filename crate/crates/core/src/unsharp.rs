//! Clustering by unsharp measurement.
//!
//! Each effect is a diagonal Gaussian window over the distance codes. Measuring
//! the superposed register with the effect centered on a code concentrates
//! amplitude on nearby codes; the points whose codes sit inside the window
//! become one cluster, and the process repeats on whatever is left.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::clustering::{ClusterParams, Clustering};
use crate::encoding::{DistanceEncoding, EncodingConfig, Point};
use crate::error::{Error, Result};
use crate::qhca::refine_to_k;
use crate::quantum::{apply_effect, prepare_superposition, RegisterLayout, StateVector, Weighting};

/// Diagonal effect `E = sum_j w_j |j><j|` on an `n`-qubit distance register.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectOperator {
    center: u64,
    delta: f64,
    weights: Vec<f64>,
    normalized: bool,
}

impl EffectOperator {
    /// Wraps an arbitrary diagonal; the length must be a power of two.
    pub fn from_weights(center: u64, delta: f64, weights: Vec<f64>) -> Result<Self> {
        if !weights.len().is_power_of_two() {
            return Err(Error::invalid(format!(
                "effect needs 2^n weights, got {}",
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("effect weights must be finite and nonnegative"));
        }
        Ok(EffectOperator {
            center,
            delta,
            weights,
            normalized: false,
        })
    }

    pub fn center(&self) -> u64 {
        self.center
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, code: u64) -> f64 {
        self.weights[code as usize]
    }

    /// Whether this effect belongs to a family rescaled to sum to the identity.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn n(&self) -> u32 {
        self.weights.len().trailing_zeros()
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("delta must be positive and finite, got {delta}")))
    }
}

fn check_width(n: u32) -> Result<()> {
    if n == 0 || n > 40 {
        return Err(Error::invalid(format!("unsupported register width n = {n}")));
    }
    Ok(())
}

/// Gaussian effect `w_j = exp(-(i - j)^2 / (2 delta^2)) / sqrt(2 pi delta^2)` centered on code `i`.
pub fn build_effect(center: u64, delta: f64, n: u32) -> Result<EffectOperator> {
    check_width(n)?;
    check_delta(delta)?;
    let size = 1u64 << n;
    if center >= size {
        return Err(Error::CodeOutOfRange { code: center, n });
    }
    let peak = 1.0 / ((2.0 * PI).sqrt() * delta);
    let weights = (0..size)
        .map(|j| {
            let d = center as f64 - j as f64;
            peak * (-(d * d) / (2.0 * delta * delta)).exp()
        })
        .collect();
    Ok(EffectOperator {
        center,
        delta,
        weights,
        normalized: false,
    })
}

/// All `2^n` Gaussian effects, rescaled code by code so they sum to the identity.
pub fn normalize_effect_family(n: u32, delta: f64) -> Result<Vec<EffectOperator>> {
    check_width(n)?;
    check_delta(delta)?;
    let size = 1usize << n;
    // log-weights: the sqrt(2 pi) delta prefactor cancels, and every column peaks at 0 on its diagonal
    let log_w = |i: usize, j: usize| {
        let d = i as f64 - j as f64;
        -(d * d) / (2.0 * delta * delta)
    };
    let column_sums: Vec<f64> = (0..size)
        .map(|j| (0..size).map(|i| log_w(i, j).exp()).sum())
        .collect();
    Ok((0..size)
        .map(|i| EffectOperator {
            center: i as u64,
            delta,
            weights: (0..size).map(|j| log_w(i, j).exp() / column_sums[j]).collect(),
            normalized: true,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DeltaSpec {
    Value(f64),
    /// Largest code divided by `2k`.
    #[default]
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CenterPolicy {
    #[default]
    LowestUnassigned,
    HighestAmplitude,
}

impl CenterPolicy {
    pub fn as_str(&self) -> &'static str {
        match self {
            CenterPolicy::LowestUnassigned => "lowest-unassigned",
            CenterPolicy::HighestAmplitude => "highest-amplitude",
        }
    }
}

impl std::str::FromStr for CenterPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lowest-unassigned" | "lowest" => Ok(CenterPolicy::LowestUnassigned),
            "highest-amplitude" | "highest" => Ok(CenterPolicy::HighestAmplitude),
            other => Err(Error::invalid(format!("unknown center policy '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnsharpConfig {
    pub delta: DeltaSpec,
    /// Membership radius in units of delta.
    pub kappa: f64,
    pub target_k: usize,
    pub center: CenterPolicy,
    pub encoding: EncodingConfig,
    pub weighting: Weighting,
}

impl Default for UnsharpConfig {
    fn default() -> Self {
        UnsharpConfig {
            delta: DeltaSpec::Auto,
            kappa: 1.0,
            target_k: 2,
            center: CenterPolicy::LowestUnassigned,
            encoding: EncodingConfig::default(),
            weighting: Weighting::UniformDistinct,
        }
    }
}

impl UnsharpConfig {
    pub fn resolve_delta(&self, encoding: &DistanceEncoding) -> Result<f64> {
        let delta = match self.delta {
            DeltaSpec::Value(d) => d,
            DeltaSpec::Auto if encoding.max_code() == 0 => 1.0,
            DeltaSpec::Auto => encoding.max_code() as f64 / (2 * self.target_k.max(1)) as f64,
        };
        check_delta(delta)?;
        Ok(delta)
    }
}

/// Measurement window: effect width `delta` and membership radius `kappa * delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub delta: f64,
    pub kappa: f64,
}

impl Window {
    pub fn new(delta: f64, kappa: f64) -> Result<Self> {
        check_delta(delta)?;
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::invalid(format!("kappa must be positive, got {kappa}")));
        }
        Ok(Window { delta, kappa })
    }

    /// `|center - j| <= kappa * delta`, i.e. the post-measurement weight ratio
    /// `w_j / w_center` is at least `exp(-kappa^2 / 2)`.
    pub fn admits(&self, center: u64, code: u64) -> bool {
        center.abs_diff(code) as f64 <= self.kappa * self.delta
    }
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub center: u64,
    /// Point ids captured by the window, sorted.
    pub members: Vec<usize>,
    /// Probability of the effect outcome on the prepared state.
    pub probability: f64,
    pub post_state: StateVector,
}

/// One unsharp measurement around `center` over the still-unassigned points.
pub fn unsharp_step(
    encoding: &DistanceEncoding,
    unassigned: &[usize],
    center: u64,
    window: Window,
    weighting: Weighting,
) -> Result<StepOutcome> {
    if unassigned.is_empty() {
        return Err(Error::invalid("no unassigned points left"));
    }
    let codes: Vec<u64> = unassigned
        .iter()
        .map(|&i| {
            encoding
                .codes
                .get(i)
                .copied()
                .ok_or_else(|| Error::invalid(format!("point id {i} out of range")))
        })
        .collect::<Result<_>>()?;
    if !codes.contains(&center) {
        return Err(Error::invalid(format!(
            "center {center} is not the code of an unassigned point"
        )));
    }
    let layout = RegisterLayout::new(encoding.n, 0)?;
    let state = prepare_superposition(&codes, layout, weighting)?;
    let effect = build_effect(center, window.delta, encoding.n)?;
    let (post_state, probability) = apply_effect(&state, &effect)?;
    let mut members: Vec<usize> = unassigned
        .iter()
        .zip(&codes)
        .filter(|&(_, &code)| window.admits(center, code))
        .map(|(&i, _)| i)
        .collect();
    members.sort_unstable();
    Ok(StepOutcome {
        center,
        members,
        probability,
        post_state,
    })
}

fn pick_center(encoding: &DistanceEncoding, unassigned: &[usize], policy: CenterPolicy, weighting: Weighting) -> Result<u64> {
    let codes = unassigned.iter().map(|&i| encoding.codes[i]);
    match policy {
        CenterPolicy::LowestUnassigned => codes.min().ok_or(Error::EmptyCodeSet),
        CenterPolicy::HighestAmplitude => {
            let codes: Vec<u64> = codes.collect();
            let state = prepare_superposition(&codes, RegisterLayout::new(encoding.n, 0)?, weighting)?;
            let probs = state.code_probabilities();
            let mut distinct = codes;
            distinct.sort_unstable();
            distinct.dedup();
            // first strict maximum in code order
            let mut best = distinct[0];
            for &c in &distinct[1..] {
                if probs[c as usize] > probs[best as usize] {
                    best = c;
                }
            }
            Ok(best)
        }
    }
}

/// Detailed products of an unsharp run.
#[derive(Debug, Clone)]
pub struct UnsharpRun {
    pub encoding: DistanceEncoding,
    pub delta: f64,
    pub steps: Vec<StepOutcome>,
    pub clustering: Clustering,
}

pub fn unsharp_run(points: &[Point], config: &UnsharpConfig) -> Result<Clustering> {
    unsharp_run_detailed(points, config).map(|r| r.clustering)
}

pub fn unsharp_run_detailed(points: &[Point], config: &UnsharpConfig) -> Result<UnsharpRun> {
    if config.target_k == 0 {
        return Err(Error::invalid("target k must be at least 1"));
    }
    let encoding = config.encoding.encode(points)?;
    let distinct = encoding.distinct_codes().len();
    if config.target_k > distinct {
        return Err(Error::UnreachableTarget {
            target: config.target_k,
            available: distinct,
        });
    }
    let delta = config.resolve_delta(&encoding)?;
    let window = Window::new(delta, config.kappa)?;
    let clusters = run_windows(&encoding, window, config.center, config.weighting)?;
    let groups: Vec<Vec<usize>> = clusters.iter().map(|s| s.members.clone()).collect();
    let raw = Clustering::from_groups(groups, encoding.len(), ClusterParams::new("unsharp"))?;
    let clustering = refine_to_k(&raw, &encoding, config.target_k)?;
    let params = ClusterParams {
        algorithm: "unsharp".into(),
        origin: Some(config.encoding.origin.to_string()),
        origin_index: encoding.origin_index,
        scale: Some(encoding.scale),
        n: Some(encoding.n),
        k: Some(config.target_k),
        weighting: Some(config.weighting.as_str().into()),
        delta: Some(delta),
        kappa: Some(config.kappa),
        center: Some(config.center.as_str().into()),
        ..Default::default()
    };
    Ok(UnsharpRun {
        encoding,
        delta,
        steps: clusters,
        clustering: clustering.with_params(params),
    })
}

/// Measures around successive centers until every point belongs to a window.
pub fn run_windows(
    encoding: &DistanceEncoding,
    window: Window,
    policy: CenterPolicy,
    weighting: Weighting,
) -> Result<Vec<StepOutcome>> {
    let mut unassigned: Vec<usize> = (0..encoding.len()).collect();
    let mut steps = Vec::new();
    while !unassigned.is_empty() {
        let center = pick_center(encoding, &unassigned, policy, weighting)?;
        let step = unsharp_step(encoding, &unassigned, center, window, weighting)?;
        // the center's own points are always members, so every pass shrinks the set
        unassigned.retain(|i| step.members.binary_search(i).is_err());
        steps.push(step);
    }
    Ok(steps)
}
