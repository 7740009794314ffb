//! Piecewise linear paths in `R^d`, addressed at unit speed.
//!
//! A path is stored as its vertex list. All queries use the arc-length
//! clock: `theta` in `[0, 1]` names the point a fraction `theta` of the
//! total length along the path, regardless of how the vertices were
//! originally sampled in time.

use crate::error::{Error, Result};

/// Euclidean length of a coordinate slice.
pub(crate) fn euclidean_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// A direction in `R^d` with Euclidean norm 1 (within `1e-9`).
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    const NORM_TOL: f64 = 1e-9;

    /// Wraps coordinates that are already unit length.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let n = euclidean_norm(&coords);
        if (n - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::ZeroVector);
        }
        Ok(Self(coords))
    }

    /// Normalises arbitrary coordinates; rejects the zero vector.
    pub fn from_unnormalised(coords: &[f64]) -> Result<Self> {
        let n = euclidean_norm(coords);
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(Self(coords.iter().map(|x| x / n).collect()))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Euclidean distance to another direction.
    pub fn distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// A polyline through at least two distinct points.
///
/// Consecutive duplicate vertices are dropped at construction, so every
/// stored segment has positive length.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinearPath {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    /// Cumulative arc length at each vertex; last entry is the total length.
    cum_length: Vec<f64>,
}

impl PiecewiseLinearPath {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let first = vertices.first().ok_or(Error::DegeneratePath)?;
        let dim = first.len();
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        let mut kept: Vec<Vec<f64>> = Vec::with_capacity(vertices.len());
        for v in vertices {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
            }
            match kept.last() {
                Some(prev) if prev == &v => continue,
                _ => kept.push(v),
            }
        }
        if kept.len() < 2 {
            return Err(Error::DegeneratePath);
        }
        let mut cum_length = Vec::with_capacity(kept.len());
        cum_length.push(0.0);
        for w in kept.windows(2) {
            let seg: Vec<f64> = w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect();
            let len = euclidean_norm(&seg);
            if len == 0.0 {
                // Distinct coordinate vectors at distance zero cannot occur
                // over the reals; guard anyway.
                return Err(Error::DegeneratePath);
            }
            cum_length.push(cum_length.last().unwrap() + len);
        }
        Ok(Self { dim, vertices: kept, cum_length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn segment_count(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Total arc length.
    pub fn length(&self) -> f64 {
        *self.cum_length.last().unwrap()
    }

    /// Increment of segment `i`, i.e. `vertices[i + 1] - vertices[i]`.
    pub fn segment_increment(&self, i: usize) -> Vec<f64> {
        self.vertices[i + 1]
            .iter()
            .zip(&self.vertices[i])
            .map(|(a, b)| a - b)
            .collect()
    }

    pub fn segment_length(&self, i: usize) -> f64 {
        self.cum_length[i + 1] - self.cum_length[i]
    }

    /// Index of the segment owning arc fraction `theta`, with vertices
    /// resolved to the segment on their right and `theta = 1` to the last.
    fn segment_index(&self, theta: f64) -> usize {
        let s = theta * self.length();
        let idx = self.cum_length.partition_point(|&c| c <= s);
        idx.clamp(1, self.segment_count()) - 1
    }

    /// Unit derivative at arc fraction `theta` in `[0, 1]`.
    pub fn unit_derivative(&self, theta: f64) -> Result<UnitVector> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::ThetaOutOfRange(theta));
        }
        let i = self.segment_index(theta);
        UnitVector::from_unnormalised(&self.segment_increment(i))
    }

    /// Point at arc fraction `theta` in `[0, 1]`.
    pub fn point_at(&self, theta: f64) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::ThetaOutOfRange(theta));
        }
        let i = self.segment_index(theta);
        let s = theta * self.length();
        let frac = (s - self.cum_length[i]) / self.segment_length(i);
        Ok(self.vertices[i]
            .iter()
            .zip(&self.vertices[i + 1])
            .map(|(a, b)| a + frac * (b - a))
            .collect())
    }
}
