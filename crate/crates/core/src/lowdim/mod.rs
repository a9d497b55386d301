//! Closed forms for one and two modes, used as independent checks of the
//! general machinery, and the scalar inequalities behind two-mode convexity.

mod dim1;
mod dim2;
mod essential;

pub use dim1::{artanh_ratio, dim1_distance, dim1_geodesic, dim1_integrand, Dim1State};
pub use dim2::{potential as dim2_potential, rho_vec, Dim2State, Scalars2};
pub use essential::{essential_inequalities, essential_sweep, sweep_grid, EssentialReport};
