//! Dense statevector simulation of a distance register plus an ancilla register.
//!
//! Basis index layout: `index = (code << m) | label`. The distance register
//! occupies the high `n` bits, so distance qubit `n - 1` is the most
//! significant qubit of the whole register; the ancilla register occupies the
//! low `m` bits with ancilla `m - 1` as its most significant qubit.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::DEFAULT_MAX_QUBITS;
use crate::error::{Error, Result};
use crate::unsharp::EffectOperator;

/// Outcome probabilities below this are dropped from enumerations.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// Widths of the distance (`n`) and ancilla (`m`) registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegisterLayout {
    n: u32,
    m: u32,
}

impl RegisterLayout {
    pub fn new(n: u32, m: u32) -> Result<Self> {
        Self::with_cap(n, m, DEFAULT_MAX_QUBITS)
    }

    pub fn with_cap(n: u32, m: u32, cap: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("the distance register needs at least one qubit"));
        }
        let total = n + m;
        if total > cap || total > 40 {
            return Err(Error::RegisterTooWide { total, cap });
        }
        Ok(RegisterLayout { n, m })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn dim(&self) -> usize {
        1usize << (self.n + self.m)
    }

    pub fn index(&self, code: u64, label: u64) -> usize {
        ((code << self.m) | label) as usize
    }

    pub fn split(&self, index: usize) -> (u64, u64) {
        let index = index as u64;
        (index >> self.m, index & ((1u64 << self.m) - 1))
    }
}

/// How occupied codes share amplitude in the initial superposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    /// One equal amplitude per distinct code.
    #[default]
    UniformDistinct,
    /// Amplitude proportional to the square root of the number of points on a code.
    Multiplicity,
}

impl Weighting {
    pub fn as_str(&self) -> &'static str {
        match self {
            Weighting::UniformDistinct => "uniform-distinct",
            Weighting::Multiplicity => "multiplicity",
        }
    }
}

impl std::str::FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-distinct" | "uniform" => Ok(Weighting::UniformDistinct),
            "multiplicity" => Ok(Weighting::Multiplicity),
            other => Err(Error::invalid(format!("unknown weighting '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: RegisterLayout,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Wraps raw amplitudes, checking length and normalization.
    pub fn from_amplitudes(layout: RegisterLayout, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(Error::invalid(format!(
                "expected {} amplitudes, got {}",
                layout.dim(),
                amplitudes.len()
            )));
        }
        let state = StateVector { layout, amplitudes };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("state is not normalized (|psi|^2 = {norm})")));
        }
        Ok(state)
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, code: u64, label: u64) -> Complex64 {
        self.amplitudes[self.layout.index(code, label)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Marginal probability of each distance code, summed over ancilla labels.
    pub fn code_probabilities(&self) -> Vec<f64> {
        let labels = 1usize << self.layout.m;
        self.amplitudes
            .chunks(labels)
            .map(|c| c.iter().map(|a| a.norm_sqr()).sum())
            .collect()
    }
}

/// Superposition over the occupied codes with every ancilla in `|0>`.
pub fn prepare_superposition(codes: &[u64], layout: RegisterLayout, weighting: Weighting) -> Result<StateVector> {
    if codes.is_empty() {
        return Err(Error::EmptyCodeSet);
    }
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    for &code in codes {
        if code >> layout.n != 0 {
            return Err(Error::CodeOutOfRange { code, n: layout.n });
        }
        *counts.entry(code).or_default() += 1;
    }
    let weight = |count: usize| match weighting {
        Weighting::UniformDistinct => 1.0,
        Weighting::Multiplicity => count as f64,
    };
    let total: f64 = counts.values().map(|&c| weight(c)).sum();
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); layout.dim()];
    for (&code, &count) in &counts {
        amplitudes[layout.index(code, 0)] = Complex64::new((weight(count) / total).sqrt(), 0.0);
    }
    Ok(StateVector { layout, amplitudes })
}

/// The labeling unitary: a CNOT cascade copying the top `m` distance bits
/// onto the ancillae, `label ^= code >> (n - m)`.
///
/// This is a permutation of basis states and its own inverse.
pub fn apply_label_unitary(state: &StateVector) -> Result<StateVector> {
    let layout = state.layout;
    if layout.m == 0 {
        return Err(Error::invalid("the labeling unitary needs at least one ancilla"));
    }
    if layout.m > layout.n {
        return Err(Error::invalid(format!(
            "cannot copy {} label bits from a {}-qubit distance register",
            layout.m, layout.n
        )));
    }
    let shift = layout.n - layout.m;
    let mut out = vec![Complex64::new(0.0, 0.0); layout.dim()];
    for (index, &amp) in state.amplitudes.iter().enumerate() {
        let (code, label) = layout.split(index);
        out[layout.index(code, label ^ (code >> shift))] = amp;
    }
    Ok(StateVector {
        layout,
        amplitudes: out,
    })
}

/// Born-rule probabilities keyed by `(code, label)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    probabilities: BTreeMap<(u64, u64), f64>,
}

impl OutcomeDistribution {
    pub fn get(&self, code: u64, label: u64) -> f64 {
        self.probabilities.get(&(code, label)).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = ((u64, u64), f64)> + '_ {
        self.probabilities.iter().map(|(&k, &p)| (k, p))
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probabilities.values().sum()
    }

    /// Marginal distribution of the ancilla register.
    pub fn label_marginals(&self) -> BTreeMap<u64, f64> {
        let mut out = BTreeMap::new();
        for (&(_, label), &p) in &self.probabilities {
            *out.entry(label).or_insert(0.0) += p;
        }
        out
    }

    /// Ancilla labels observed together with `code`.
    pub fn labels_for(&self, code: u64) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.probabilities
            .range((code, 0)..=(code, u64::MAX))
            .map(|(&(_, label), &p)| (label, p))
    }

    /// Relative frequencies of a set of sampled outcomes.
    pub fn from_samples(samples: &[(u64, u64)]) -> Self {
        let mut probabilities = BTreeMap::new();
        let weight = 1.0 / samples.len().max(1) as f64;
        for &s in samples {
            *probabilities.entry(s).or_insert(0.0) += weight;
        }
        OutcomeDistribution { probabilities }
    }
}

impl FromIterator<((u64, u64), f64)> for OutcomeDistribution {
    fn from_iter<I: IntoIterator<Item = ((u64, u64), f64)>>(iter: I) -> Self {
        OutcomeDistribution {
            probabilities: iter.into_iter().collect(),
        }
    }
}

/// Exact readout of both registers.
pub fn enumerate_outcomes(state: &StateVector) -> OutcomeDistribution {
    state
        .amplitudes
        .iter()
        .enumerate()
        .filter_map(|(index, a)| {
            let p = a.norm_sqr();
            (p >= PROBABILITY_FLOOR).then(|| (state.layout.split(index), p))
        })
        .collect()
}

/// `shots` independent readouts, reproducible for a given seed.
pub fn sample_outcomes(state: &StateVector, shots: usize, seed: u64) -> Result<Vec<(u64, u64)>> {
    if shots == 0 {
        return Err(Error::invalid("shots must be at least 1"));
    }
    let outcomes: Vec<((u64, u64), f64)> = enumerate_outcomes(state).iter().collect();
    let dist = WeightedIndex::new(outcomes.iter().map(|(_, p)| *p))
        .map_err(|e| Error::invalid(format!("cannot sample from state: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..shots).map(|_| outcomes[dist.sample(&mut rng)].0).collect())
}

/// Applies `E ⊗ I` with Kraus operator `sqrt(E)` on the distance register.
///
/// Returns the renormalized post-measurement state and the outcome
/// probability `sum_j w_j |a_j|^2`.
pub fn apply_effect(state: &StateVector, effect: &EffectOperator) -> Result<(StateVector, f64)> {
    let layout = state.layout;
    let weights = effect.weights();
    if weights.len() != 1usize << layout.n {
        return Err(Error::invalid(format!(
            "effect acts on {} codes, register holds {}",
            weights.len(),
            1usize << layout.n
        )));
    }
    let labels = 1usize << layout.m;
    let mut out = state.amplitudes.clone();
    for (chunk, &w) in out.chunks_mut(labels).zip(weights) {
        let k = w.sqrt();
        for a in chunk {
            *a *= k;
        }
    }
    let probability: f64 = out.iter().map(|a| a.norm_sqr()).sum();
    if !(probability > 0.0) || !probability.is_finite() {
        return Err(Error::EffectAnnihilates);
    }
    let norm = probability.sqrt();
    for a in &mut out {
        *a /= norm;
    }
    Ok((
        StateVector {
            layout,
            amplitudes: out,
        },
        probability,
    ))
}
