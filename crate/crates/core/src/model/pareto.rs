//! Dominance order and Pareto-minimal points.

use super::point::PointSample;
use crate::error::{Error, Result};

/// `x` dominates `y` when `x - y` lies in the closed positive orthant minus
/// the origin: every coordinate of `x` is at least that of `y`, and `x != y`.
pub fn dominates(x: &[f64], y: &[f64]) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(dominates_unchecked(x, y))
}

#[inline]
pub(crate) fn dominates_unchecked(x: &[f64], y: &[f64]) -> bool {
    x.iter().zip(y).all(|(a, b)| a >= b) && x != y
}

/// `a <= b` coordinatewise.
#[inline]
fn weakly_below(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Quadratic reference scan: the points dominating no other sample point.
pub fn minimal_points_naive(sample: &PointSample) -> Vec<usize> {
    let n = sample.len();
    (0..n)
        .filter(|&i| {
            let p = sample.point(i);
            (0..n).all(|j| j == i || !dominates_unchecked(p, sample.point(j)))
        })
        .collect()
}

/// Pareto-minimal points, sorted by index.
///
/// Points are visited in lexicographic order, so any point a candidate
/// dominates has already been seen. `d = 2` keeps the running minimum of the
/// second coordinate, `d = 3` keeps a staircase of the projections onto the
/// last two coordinates, and `d >= 4` splits on the first coordinate and
/// filters the upper half's minima against the lower half's in the remaining
/// coordinates.
pub fn minimal_points_fast(sample: &PointSample) -> Vec<usize> {
    if sample.is_empty() {
        return Vec::new();
    }
    let order = sample.lex_order();
    let mut minima = match sample.dimension() {
        1 => vec![order[0]],
        2 => sweep_2d(sample, &order),
        3 => sweep_3d(sample, &order),
        _ => divide_and_conquer(sample, &order),
    };
    minima.sort_unstable();
    minima
}

/// Number of Pareto-minimal points (the `alpha = 0` statistic).
pub fn minimal_count(sample: &PointSample) -> usize {
    minimal_points_fast(sample).len()
}

fn sweep_2d(sample: &PointSample, order: &[usize]) -> Vec<usize> {
    let mut lowest = f64::INFINITY;
    let mut out = Vec::new();
    for &i in order {
        let y = sample.point(i)[1];
        if y < lowest {
            lowest = y;
            out.push(i);
        }
    }
    out
}

/// Staircase of mutually incomparable `(y, z)` pairs: `y` strictly
/// increasing, `z` strictly decreasing.
pub(crate) struct Staircase {
    steps: Vec<(f64, f64)>,
}

impl Staircase {
    pub(crate) fn new() -> Self {
        Self { steps: Vec::new() }
    }

    /// Inserts `(y, z)` unless some step lies weakly below it. Returns whether
    /// it was inserted.
    pub(crate) fn insert(&mut self, y: f64, z: f64) -> bool {
        let above = self.steps.partition_point(|s| s.0 <= y);
        if above > 0 && self.steps[above - 1].1 <= z {
            return false;
        }
        let start = self.steps.partition_point(|s| s.0 < y);
        let mut end = start;
        while end < self.steps.len() && self.steps[end].1 >= z {
            end += 1;
        }
        self.steps.splice(start..end, std::iter::once((y, z)));
        true
    }
}

fn sweep_3d(sample: &PointSample, order: &[usize]) -> Vec<usize> {
    let mut stairs = Staircase::new();
    let mut out = Vec::new();
    for &i in order {
        let p = sample.point(i);
        if stairs.insert(p[1], p[2]) {
            out.push(i);
        }
    }
    out
}

const BASE_CASE: usize = 48;

fn divide_and_conquer(sample: &PointSample, order: &[usize]) -> Vec<usize> {
    if order.len() <= BASE_CASE {
        let mut minima: Vec<usize> = Vec::new();
        for &i in order {
            let p = sample.point(i);
            if !minima.iter().any(|&m| weakly_below(&sample.point(m)[1..], &p[1..])) {
                minima.push(i);
            }
        }
        return minima;
    }
    let (lower, upper) = order.split_at(order.len() / 2);
    let mut minima = divide_and_conquer(sample, lower);
    let upper_minima = divide_and_conquer(sample, upper);
    let kept = minima.len();
    for u in upper_minima {
        let p = &sample.point(u)[1..];
        if !minima[..kept]
            .iter()
            .any(|&m| weakly_below(&sample.point(m)[1..], p))
        {
            minima.push(u);
        }
    }
    minima
}
