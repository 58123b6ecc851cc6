use serde::{Deserialize, Serialize};

use crate::encoding::{check_dataset, Point};
use crate::error::{Error, Result};

const JACOBI_TOLERANCE: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// A fitted two-component projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Per-feature standard deviations when the input was standardized.
    pub scale: Option<Vec<f64>>,
    /// Unit-norm principal axes, largest variance first.
    pub components: [Vec<f64>; 2],
    pub explained_variance: [f64; 2],
}

impl PcaModel {
    pub fn transform(&self, point: &Point) -> Result<Point> {
        if point.dim() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                found: point.dim(),
            });
        }
        let x = self.prepare(point.coords());
        let project = |c: &[f64]| c.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
        Ok(Point::xy(project(&self.components[0]), project(&self.components[1])))
    }

    fn prepare(&self, coords: &[f64]) -> Vec<f64> {
        coords
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let centered = v - self.mean[i];
                match &self.scale {
                    Some(s) => centered / s[i],
                    None => centered,
                }
            })
            .collect()
    }
}

/// Projects onto the two leading eigenvectors of the (optionally standardized) covariance.
///
/// Standardization uses the population standard deviation. Each component is
/// signed so that its largest-magnitude entry is positive.
pub fn pca_2d(data: &[Point], standardize: bool) -> Result<(PcaModel, Vec<Point>)> {
    if data.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            found: data.len(),
        });
    }
    let k = check_dataset(data)?;
    if k < 2 {
        return Err(Error::invalid("PCA to two dimensions needs at least two features"));
    }
    let n = data.len() as f64;
    let mut mean = vec![0.0; k];
    for p in data {
        for (m, v) in mean.iter_mut().zip(p.coords()) {
            *m += v / n;
        }
    }
    let scale = if standardize {
        let mut sd = vec![0.0; k];
        for p in data {
            for (i, v) in p.coords().iter().enumerate() {
                sd[i] += (v - mean[i]).powi(2) / n;
            }
        }
        let sd: Vec<f64> = sd.into_iter().map(f64::sqrt).collect();
        if let Some(feature) = sd.iter().position(|&s| s <= 1e-12 * (1.0 + mean_abs(&mean))) {
            return Err(Error::ZeroVariance(feature));
        }
        Some(sd)
    } else {
        None
    };
    let mut model = PcaModel {
        mean,
        scale,
        components: [vec![], vec![]],
        explained_variance: [0.0; 2],
    };
    let rows: Vec<Vec<f64>> = data.iter().map(|p| model.prepare(p.coords())).collect();

    let mut cov = vec![vec![0.0; k]; k];
    for r in &rows {
        for i in 0..k {
            for j in i..k {
                cov[i][j] += r[i] * r[j];
            }
        }
    }
    for i in 0..k {
        for j in i..k {
            cov[i][j] /= n - 1.0;
            cov[j][i] = cov[i][j];
        }
    }

    let (values, vectors) = jacobi_eigen(cov);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    for (slot, &idx) in order.iter().take(2).enumerate() {
        let mut v: Vec<f64> = (0..k).map(|r| vectors[r][idx]).collect();
        let lead = v
            .iter()
            .enumerate()
            .fold(0, |best, (i, x)| if x.abs() > v[best].abs() { i } else { best });
        if v[lead] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        model.components[slot] = v;
        model.explained_variance[slot] = values[idx].max(0.0);
    }

    let projected = data.iter().map(|p| model.transform(p)).collect::<Result<Vec<_>>>()?;
    Ok((model, projected))
}

fn mean_abs(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Returns eigenvalues and a matrix whose columns are the eigenvectors.
pub(crate) fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let k = a.len();
    let mut v = vec![vec![0.0; k]; k];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let total: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..k)
            .flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_TOLERANCE * total.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..k {
            for q in (p + 1)..k {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..k {
                    let (arp, arq) = (a[r][p], a[r][q]);
                    a[r][p] = c * arp - s * arq;
                    a[r][q] = s * arp + c * arq;
                }
                for r in 0..k {
                    let (apr, aqr) = (a[p][r], a[q][r]);
                    a[p][r] = c * apr - s * aqr;
                    a[q][r] = s * apr + c * aqr;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    ((0..k).map(|i| a[i][i]).collect(), v)
}
