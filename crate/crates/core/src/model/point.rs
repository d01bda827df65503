use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A point of the unit cube `[0, 1]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::UnsupportedDimension {
                dimension: 0,
                minimum: 1,
            });
        }
        if let Some(index) = coords.iter().position(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::CoordinateOutOfRange {
                index,
                value: coords[index],
            });
        }
        Ok(Self(coords))
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// Euclidean norm, i.e. the length of the edge joining the point to the origin.
    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    /// Volume of the box `[0, x]`.
    pub fn volume(&self) -> f64 {
        self.0.iter().product()
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// A finite, simple point configuration in `[0, 1]^d \ {0}`.
///
/// Coordinates are stored row-major in one flat buffer. Distinctness and the
/// exclusion of the origin are checked on construction, so every
/// `PointSample` in existence satisfies them.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSample {
    dimension: usize,
    coords: Vec<f64>,
    intensity: f64,
    seed: u64,
    lex_sorted: bool,
}

impl PointSample {
    /// Validates and wraps externally supplied points.
    pub fn from_points(
        dimension: usize,
        points: &[Point],
        intensity: f64,
        seed: u64,
    ) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dimension);
        for p in points {
            if p.dimension() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: p.dimension(),
                });
            }
            coords.extend_from_slice(p.coords());
        }
        Self::from_flat(dimension, coords, intensity, seed)
    }

    /// Validates a row-major coordinate buffer.
    pub fn from_flat(dimension: usize, coords: Vec<f64>, intensity: f64, seed: u64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::UnsupportedDimension {
                dimension,
                minimum: 1,
            });
        }
        if !coords.len().is_multiple_of(dimension) {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                found: coords.len() % dimension,
            });
        }
        if !(intensity > 0.0) || !intensity.is_finite() {
            return Err(invalid("intensity", format!("must be positive, got {intensity}")));
        }
        for (i, row) in coords.chunks_exact(dimension).enumerate() {
            if let Some(&value) = row.iter().find(|c| !(0.0..=1.0).contains(*c)) {
                return Err(Error::CoordinateOutOfRange { index: i, value });
            }
            if row.iter().all(|&c| c == 0.0) {
                return Err(Error::OriginPoint { index: i });
            }
        }
        let sample = Self {
            dimension,
            coords,
            intensity,
            seed,
            lex_sorted: false,
        };
        let order = sample.lex_order();
        for w in order.windows(2) {
            if sample.point(w[0]) == sample.point(w[1]) {
                let (first, second) = (w[0].min(w[1]), w[0].max(w[1]));
                return Err(Error::DuplicatePoint { first, second });
            }
        }
        let lex_sorted = order.iter().enumerate().all(|(i, &j)| i == j);
        Ok(Self { lex_sorted, ..sample })
    }

    /// Builds a sample whose points are already known to be distinct, non-zero,
    /// in range and in lexicographic order (the samplers' output).
    pub(crate) fn from_sorted_unchecked(
        dimension: usize,
        coords: Vec<f64>,
        intensity: f64,
        seed: u64,
    ) -> Self {
        debug_assert!(coords.len().is_multiple_of(dimension));
        Self {
            dimension,
            coords,
            intensity,
            seed,
            lex_sorted: true,
        }
    }

    pub fn empty(dimension: usize, intensity: f64, seed: u64) -> Result<Self> {
        Self::from_flat(dimension, Vec::new(), intensity, seed)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Always true: the origin is the root vertex, never a sample point.
    pub fn origin_excluded(&self) -> bool {
        true
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dimension)
    }

    pub fn to_points(&self) -> Vec<Point> {
        self.points().map(|p| Point(p.to_vec())).collect()
    }

    pub fn flat_coords(&self) -> &[f64] {
        &self.coords
    }

    /// Whether the points are stored in lexicographic order.
    pub fn is_lex_sorted(&self) -> bool {
        self.lex_sorted
    }

    /// Indices of the points in lexicographic order.
    pub fn lex_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        if !self.lex_sorted {
            order.sort_unstable_by(|&a, &b| lex_cmp(self.point(a), self.point(b)).then(a.cmp(&b)));
        }
        order
    }
}
