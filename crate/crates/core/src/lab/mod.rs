//! Matrix-group numerics: orthonormal bases, the summation identities,
//! finite-difference Laplacians and Brownian-motion Monte Carlo.

pub mod basis;
pub mod brownian;
pub mod kernel;
pub mod magic;

pub use basis::{inner, onb, Group, OrthonormalBasis};
pub use brownian::{
    experiment_csv, map_endpoints, mc_estimate, mc_l2_distance, mc_multi, random_matrix, random_unitary, sample_bm,
    BrownianConfig, ExperimentRow, SampleStats, EXPERIMENT_HEADER,
};
pub use kernel::{eval_trace_poly, CMat, ExpWorkspace};
pub use magic::{laplacian_fd, verify_magic};
