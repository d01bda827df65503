//! Points, the dominance order, Pareto minima and the MDST.

mod mdst;
mod pareto;
mod point;

pub use mdst::{
    build_mdst, norm_decomposition_gap, rooted_alpha_length, rooted_alpha_length_of, MdstResult,
    Parent,
};
pub use pareto::{dominates, minimal_count, minimal_points_fast, minimal_points_naive};
pub use point::{Point, PointSample};

pub(crate) use mdst::{alpha_norm, check_alpha};
pub(crate) use pareto::Staircase;
