//! Minimal directed spanning tree and the rooted length statistic.

use serde::{Deserialize, Serialize};

use super::pareto::{dominates_unchecked, minimal_points_fast};
use super::point::{norm, PointSample};
use crate::error::{invalid, Result};

/// Parent of a vertex in the tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parent {
    /// The origin.
    Root,
    /// Index of another sample point.
    Vertex(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdstResult {
    pub parent: Vec<Parent>,
    pub edge_length: Vec<f64>,
    /// Points joined directly to the origin, sorted by index.
    pub minimal_indices: Vec<usize>,
}

impl MdstResult {
    pub fn total_length(&self) -> f64 {
        self.edge_length.iter().sum()
    }

    /// Sum of `alpha`-powered lengths over all edges.
    pub fn total_alpha_length(&self, alpha: f64) -> f64 {
        self.edge_length.iter().map(|l| l.powf(alpha)).sum()
    }

    /// Follows parent links from `i` to the origin, returning the path length
    /// in edges, or `None` if the walk fails to terminate within `n` steps.
    pub fn depth(&self, i: usize) -> Option<usize> {
        let mut current = Parent::Vertex(i);
        for steps in 0..=self.parent.len() {
            match current {
                Parent::Root => return Some(steps),
                Parent::Vertex(j) => current = self.parent[j],
            }
        }
        None
    }
}

/// Builds the minimal directed spanning tree rooted at the origin.
///
/// Every admissible graph needs at least one incoming edge at each vertex,
/// from the origin or from a point the vertex dominates, and parent chains
/// strictly descend the partial order. Choosing each vertex's nearest
/// admissible parent independently therefore yields the global minimum.
/// Equal distances go to the origin first, then to the lowest point index.
pub fn build_mdst(sample: &PointSample) -> MdstResult {
    let n = sample.len();
    let order = sample.lex_order();
    let mut parent = vec![Parent::Root; n];
    let mut edge_length = vec![0.0; n];

    for (pos, &i) in order.iter().enumerate() {
        let p = sample.point(i);
        let mut best_sq: f64 = p.iter().map(|c| c * c).sum();
        let mut best = Parent::Root;
        // Candidates precede `p` in lexicographic order; walk backwards so the
        // first-coordinate gap grows and can cut the scan short.
        for &j in order[..pos].iter().rev() {
            let q = sample.point(j);
            let gap = p[0] - q[0];
            if gap * gap > best_sq {
                break;
            }
            if !dominates_unchecked(p, q) {
                continue;
            }
            let dist_sq: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            let better = match best {
                _ if dist_sq < best_sq => true,
                Parent::Vertex(k) if dist_sq == best_sq => j < k,
                _ => false,
            };
            if better {
                best_sq = dist_sq;
                best = Parent::Vertex(j);
            }
        }
        parent[i] = best;
        edge_length[i] = match best {
            Parent::Root => norm(p),
            Parent::Vertex(_) => best_sq.sqrt(),
        };
    }

    let minimal_indices = (0..n).filter(|&i| parent[i] == Parent::Root).collect();
    MdstResult {
        parent,
        edge_length,
        minimal_indices,
    }
}

/// Sum of `||x||^alpha` over the Pareto-minimal points `x`.
pub fn rooted_alpha_length(sample: &PointSample, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(rooted_alpha_length_of(sample, &minimal_points_fast(sample), alpha))
}

/// Same as [`rooted_alpha_length`] for a precomputed minimal set.
pub fn rooted_alpha_length_of(sample: &PointSample, minimal: &[usize], alpha: f64) -> f64 {
    minimal
        .iter()
        .map(|&i| alpha_norm(sample.point(i), alpha))
        .sum()
}

/// `||x||^alpha`.
#[inline]
pub(crate) fn alpha_norm(x: &[f64], alpha: f64) -> f64 {
    let sq: f64 = x.iter().map(|c| c * c).sum();
    sq.powf(0.5 * alpha)
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(invalid("alpha", format!("must be positive, got {alpha}")))
    }
}

/// The two sides of the norm decomposition inequality
/// `| ||x||^a - sum x_i^a | <= C sum_{i != j} (x_i x_j)^{min(1, a) / 2}`,
/// returned as `(lhs, rhs)` with `C` left to the caller.
pub fn norm_decomposition_gap(x: &[f64], alpha: f64) -> (f64, f64) {
    let norm_pow = alpha_norm(x, alpha);
    let coordinate_sum: f64 = x.iter().map(|c| c.powf(alpha)).sum();
    let lhs = (norm_pow - coordinate_sum).abs();
    let exponent = alpha.min(1.0) / 2.0;
    let mut rhs = 0.0;
    for (i, a) in x.iter().enumerate() {
        for (j, b) in x.iter().enumerate() {
            if i != j {
                rhs += (a * b).powf(exponent);
            }
        }
    }
    (lhs, rhs)
}
