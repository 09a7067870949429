//! Closed-form references for a real interval `[a, b]`: capacity,
//! arcsine equilibrium moments, the Joukowski extremal function and a
//! discrete weighted log energy. Used to cross-check estimators, never by them.

use serde::{Deserialize, Serialize};

use crate::error::{PptError, Result};
use crate::measure::GridMeasure;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalOracle {
    pub a: f64,
    pub b: f64,
}

impl IntervalOracle {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(PptError::InvalidArgument(format!("need finite a < b, got [{a}, {b}]")));
        }
        Ok(IntervalOracle { a, b })
    }

    pub fn unit() -> Self {
        IntervalOracle { a: -1.0, b: 1.0 }
    }

    /// Transfinite diameter `(b − a)/4`.
    pub fn delta(&self) -> f64 {
        (self.b - self.a) / 4.0
    }

    /// `log|T + √(T² − 1)|` with `T` the affine map onto `[−1, 1]`; zero on the interval.
    pub fn extremal(&self, z: f64) -> f64 {
        let t = (2.0 * z - self.a - self.b) / (self.b - self.a);
        let t = t.abs();
        if t <= 1.0 {
            0.0
        } else {
            (t + (t * t - 1.0).sqrt()).ln()
        }
    }
}

pub fn interval_delta(a: f64, b: f64) -> Result<f64> {
    Ok(IntervalOracle::new(a, b)?.delta())
}

/// `∫ x^k (1/π)(1 − x²)^{−1/2} dx = C(k, k/2)/2^k` for even `k`, zero for odd.
pub fn arcsine_moment(k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    // C(k, k/2)/2^k as a running product to stay in range
    let h = k / 2;
    (1..=h).fold(1.0, |acc, i| acc * (h + i) as f64 / (4.0 * i as f64))
}

pub fn interval_extremal(z: f64, a: f64, b: f64) -> Result<f64> {
    Ok(IntervalOracle::new(a, b)?.extremal(z))
}

/// Discrete weighted log energy `Σ_{i≠j} m_i m_j log(1/|x_i − x_j|) + 2 Σ m_i Q_i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogEnergy {
    pub value: f64,
    /// The measure is a single atom, whose continuum energy is `+∞`.
    pub infinite: bool,
}

pub fn log_energy(mu: &GridMeasure, q: &[f64]) -> Result<LogEnergy> {
    if mu.points.iter().any(|p| p.len() != 1) {
        return Err(PptError::UnsupportedDimension {
            dim: mu.points.first().map_or(0, Vec::len),
            reason: "log energy oracle is one-dimensional",
        });
    }
    if q.len() != mu.masses.len() {
        return Err(PptError::DimensionMismatch {
            expected: mu.masses.len(),
            got: q.len(),
        });
    }
    let atoms: Vec<(f64, f64, f64)> = mu
        .points
        .iter()
        .zip(&mu.masses)
        .zip(q)
        .filter(|((_, m), _)| **m > 0.0)
        .map(|((p, m), q)| (p[0], *m, *q))
        .collect();
    let mut pair = 0.0;
    for (i, (x, m, _)) in atoms.iter().enumerate() {
        for (y, w, _) in &atoms[i + 1..] {
            pair += 2.0 * m * w * -(x - y).abs().ln();
        }
    }
    let weight: f64 = atoms.iter().map(|(_, m, q)| 2.0 * m * q).sum();
    Ok(LogEnergy {
        value: pair + weight,
        infinite: atoms.len() <= 1,
    })
}
