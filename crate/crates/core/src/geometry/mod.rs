//! The Riemannian structure on strictly positive densities for which the
//! fermionic Fokker-Planck equation is the gradient flow of the entropy.

mod distance;
mod entropy;
mod geodesic;
mod hessian;
mod metric;
mod tangent;

pub use distance::{
    crude_bound, diameter_bound, distance, heat_flow_length, max_entropy, richardson, talagrand_bound,
    talagrand_diameter, DistanceOptions,
    DistanceResult,
};
pub use entropy::{
    entropy, entropy_dissipation, fokker_planck_flow, gradient_flow_generic, heat_flow_continuity_residual,
    LogSobolevReport,
};
pub use geodesic::{
    geodesic_connect, geodesic_rhs, geodesic_shoot, GeodesicOptions, GeodesicPath, GeodesicSystem, INTERIOR_FLOOR,
};
pub use hessian::{
    convexity_search, hessian_entropy, hessian_form, hessian_min_rel_eig, sweep_density, ConvexityReport,
    EntropyHessian,
};
pub use metric::{helmholtz, onsager_apply, onsager_matrix, MetricPoint, MAX_CONDITION};
pub use tangent::TangentBasis;
