use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Labels};
use crate::encoding::Point;
use crate::error::{Error, Result};

/// Two noisy concentric rings centered at the origin.
///
/// Text form: `n=400,factor=0.5,noise=0.1,seed=7`; omitted keys take the defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirclesSpec {
    pub n_samples: usize,
    /// Inner radius relative to the unit outer ring.
    pub factor: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for CirclesSpec {
    fn default() -> Self {
        CirclesSpec {
            n_samples: 400,
            factor: 0.5,
            noise_sigma: 0.1,
            seed: 0,
        }
    }
}

impl CirclesSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 2 {
            return Err(Error::invalid("circles need at least 2 samples"));
        }
        if !(self.factor > 0.0 && self.factor < 1.0) {
            return Err(Error::invalid(format!("factor {} must lie strictly between 0 and 1", self.factor)));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::invalid(format!("noise {} must be finite and non-negative", self.noise_sigma)));
        }
        Ok(())
    }
}

impl fmt::Display for CirclesSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={},factor={},noise={},seed={}",
            self.n_samples, self.factor, self.noise_sigma, self.seed
        )
    }
}

impl FromStr for CirclesSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut spec = CirclesSpec::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("circles option '{part}' is not key=value")))?;
            let bad = || Error::invalid(format!("bad value '{value}' for circles option '{key}'"));
            match key.trim() {
                "n" | "n_samples" => spec.n_samples = value.parse().map_err(|_| bad())?,
                "factor" => spec.factor = value.parse().map_err(|_| bad())?,
                "noise" | "noise_sigma" => spec.noise_sigma = value.parse().map_err(|_| bad())?,
                "seed" => spec.seed = value.parse().map_err(|_| bad())?,
                other => return Err(Error::invalid(format!("unknown circles option '{other}'"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Outer ring (label 0) holds `n/2` points, the inner ring (label 1) the rest.
/// Angles are evenly spaced around each ring before noise is added.
pub fn gen_circles(spec: &CirclesSpec) -> Result<Dataset> {
    spec.validate()?;
    let n_outer = spec.n_samples / 2;
    let n_inner = spec.n_samples - n_outer;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::invalid(e.to_string()))?;

    let mut points = Vec::with_capacity(spec.n_samples);
    let mut rings = Vec::with_capacity(spec.n_samples);
    for (ring, count, radius) in [(0, n_outer, 1.0), (1, n_inner, spec.factor)] {
        for i in 0..count {
            let angle = TAU * i as f64 / count as f64;
            let (s, c) = angle.sin_cos();
            let mut x = radius * c;
            let mut y = radius * s;
            if spec.noise_sigma > 0.0 {
                x += noise.sample(&mut rng);
                y += noise.sample(&mut rng);
            }
            points.push(Point::xy(x, y));
            rings.push(ring);
        }
    }
    Ok(Dataset::new("circles", points, Some(Labels::Ring(rings)))?.with_provenance("circles", spec.to_string()))
}
