//! Homogeneous polynomial optimization on the unit sphere through a
//! symmetrized moment / sum-of-squares hierarchy, with an explicit
//! approximate representing measure extracted from every solved level.

pub mod definetti;
pub mod error;
pub mod special;
pub mod harmonics;
pub mod oracle;
pub mod parse;
pub mod poly;
pub mod reduction;
pub mod sdp;
pub mod symbasis;

pub use error::{Error, Result};
pub use symbasis::{enumerate_multiindices, sym_dimension, BasisCatalog, MultiIndex};
pub use poly::{
    matrix_to_poly, partial_trace_sym, poly_to_maxsym_matrix, poly_to_vector, HomoPoly,
    MaxSymMatrix, Polynomial,
};
pub use parse::parse_poly;
pub use poly::{Parity, vector_to_poly};
pub use harmonics::{
    definetti_eps, gegenbauer_eval, harmonic_count, harmonic_decompose, lambda_coeff,
    lambda_ratio, sphere_monomial_moment, surface_area, EpsBound, HarmonicDecomposition,
};
pub use sdp::{
    build_relaxation, extract_sos_certificate, solve_sdp, SdpProblem, SdpSolution, SolveStatus,
    SosCertificate,
};
pub use definetti::{
    build_approx_moment_matrix, definetti_trace_check, lower_bound, measure_density,
    sandwich_from_solution, sandwich_report, trace_distance, BoundsReport, SphereMeasureDensity,
};
pub use reduction::{
    gamma_factor, homogenize_even, lift_odd, pullback_bounds, reduce, ReductionKind,
    ReductionRecord,
};
pub use oracle::{sphere_maximize, OracleConfig, OracleResult};
