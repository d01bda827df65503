//! Simulation, quadrature and asymptotic theory for the rooted minimal
//! directed spanning tree on a Poisson process in the unit cube.

pub mod empirics;
pub mod error;
pub mod exec;
pub mod model;
pub mod quadrature;
pub mod sampling;
pub mod simulate;
pub mod special;
pub mod theory;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{
    build_mdst, dominates, minimal_count, minimal_points_fast, minimal_points_naive, rooted_alpha_length, MdstResult,
    Parent, Point, PointSample,
};
pub use quadrature::{Method, QuadratureConfig, QuadratureEstimate};
pub use sampling::{DickmanSamplerConfig, ProcessKind, SamplerConfig};
pub use simulate::{simulate_replicate, simulate_replicates, ReplicateOutcome};
