use super::entropy::{entropy, entropy_dissipation};
use super::geodesic::{geodesic_connect, GeodesicOptions};
use crate::clifford::Element;
use crate::density::Density;
use crate::error::Result;
use crate::quad::integrate_adaptive;
use crate::rho::RhoCalculus;

#[derive(Clone, Debug)]
pub struct DistanceOptions {
    pub geodesic: GeodesicOptions,
    /// Endpoints with smallest eigenvalue below this are regularised.
    pub interior_min: f64,
    /// Regularisation levels `eps`, decreasing by a constant ratio.
    pub eps_list: Vec<f64>,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions {
            geodesic: GeodesicOptions::default(),
            interior_min: 1e-6,
            eps_list: vec![1e-2, 5e-3, 2.5e-3],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistanceResult {
    pub distance: f64,
    /// Action of the connecting geodesic (of the last regularised pair at the boundary).
    pub action: f64,
    pub endpoint_residual: f64,
    /// Regularisation levels used, empty for interior endpoints.
    pub regularization: Vec<f64>,
    /// Distances of the regularised pairs, one per level.
    pub regularized: Vec<f64>,
    /// First-order extrapolations to `eps = 0` from consecutive levels.
    pub extrapolated: Vec<f64>,
    /// Set when the geodesic solve failed and the heat-flow bound was returned.
    pub is_upper_bound: bool,
}

/// `d(rho0, rho1)`. Interior pairs are joined by a geodesic; pairs touching
/// the boundary are replaced by `(1 - eps) rho + eps I` for each level and
/// the distances extrapolated to `eps = 0`. If a geodesic cannot be found
/// the result is the heat-flow upper bound, flagged as such.
pub fn distance(rho0: &Density, rho1: &Density, opts: &DistanceOptions) -> Result<DistanceResult> {
    rho0.element().same_algebra(rho1.element())?;
    if rho0.element().max_abs_diff(rho1.element()) == 0.0 {
        return Ok(DistanceResult {
            distance: 0.0,
            action: 0.0,
            endpoint_residual: 0.0,
            regularization: vec![],
            regularized: vec![],
            extrapolated: vec![],
            is_upper_bound: false,
        });
    }
    let interior = rho0.min_eig() >= opts.interior_min && rho1.min_eig() >= opts.interior_min;
    let attempt = if interior {
        geodesic_connect(rho0, rho1, &opts.geodesic).map(|p| DistanceResult {
            distance: p.action.sqrt(),
            action: p.action,
            endpoint_residual: p.endpoint_residual,
            regularization: vec![],
            regularized: vec![],
            extrapolated: vec![],
            is_upper_bound: false,
        })
    } else {
        regularized_distance(rho0, rho1, opts)
    };
    match attempt {
        Ok(r) => Ok(r),
        Err(_) => {
            let bound = heat_flow_length(rho0)? + heat_flow_length(rho1)?;
            Ok(DistanceResult {
                distance: bound,
                action: bound * bound,
                endpoint_residual: f64::NAN,
                regularization: vec![],
                regularized: vec![],
                extrapolated: vec![],
                is_upper_bound: true,
            })
        }
    }
}

fn regularized_distance(rho0: &Density, rho1: &Density, opts: &DistanceOptions) -> Result<DistanceResult> {
    let mut regularized = Vec::with_capacity(opts.eps_list.len());
    let mut last = None;
    for &eps in &opts.eps_list {
        let p = geodesic_connect(&rho0.mix_with_identity(eps), &rho1.mix_with_identity(eps), &opts.geodesic)?;
        regularized.push(p.action.sqrt());
        last = Some(p);
    }
    let last = last.expect("at least one regularisation level");
    let extrapolated = richardson(&opts.eps_list, &regularized);
    let distance = extrapolated.last().copied().unwrap_or(regularized[regularized.len() - 1]);
    Ok(DistanceResult {
        distance,
        action: last.action,
        endpoint_residual: last.endpoint_residual,
        regularization: opts.eps_list.clone(),
        regularized,
        extrapolated,
        is_upper_bound: false,
    })
}

/// Linear extrapolation to `eps = 0` through each consecutive pair of samples.
pub fn richardson(eps: &[f64], values: &[f64]) -> Vec<f64> {
    eps.windows(2)
        .zip(values.windows(2))
        .map(|(e, v)| (e[0] * v[1] - e[1] * v[0]) / (e[0] - e[1]))
        .collect()
}

/// Arclength of the heat flow from `rho` to `I`, `int_0^inf ||grad log P_t rho||_{P_t rho} dt`;
/// an upper bound for `d(rho, I)`.
pub fn heat_flow_length(rho: &Density) -> Result<f64> {
    let mut err = None;
    let res = integrate_adaptive(
        |t| {
            let step = rho
                .semigroup(t)
                .and_then(|r| RhoCalculus::new(&r))
                .map(|c| entropy_dissipation(&c).max(0.0).sqrt());
            match step {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        40.0,
        1e-9,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(res.value),
    }
}

/// `sqrt(2 S(rho))`, the entropy bound on `d(rho, I)`.
pub fn talagrand_bound(rho: &Density) -> f64 {
    (2.0 * entropy(rho)).max(0.0).sqrt()
}

/// `2 ||I - rho||_{L^2(tau)}`
pub fn crude_bound(rho: &Density) -> f64 {
    2.0 * (&Element::identity(rho.ctx()) - rho.element()).norm()
}

/// `2 sqrt(n log 2)`. Equals [`talagrand_diameter`] for even `n`; for odd `n`
/// it is smaller and fails at antipodal pure states when `n = 1`.
pub fn diameter_bound(n: usize) -> f64 {
    2.0 * (n as f64 * std::f64::consts::LN_2).sqrt()
}

/// `ceil(n/2) log 2`, the entropy of a minimal projection and the largest entropy of a density.
pub fn max_entropy(n: usize) -> f64 {
    n.div_ceil(2) as f64 * std::f64::consts::LN_2
}

/// `2 sqrt(2 max_entropy(n))`, the diameter bound obtained from the Talagrand inequality through `I`.
pub fn talagrand_diameter(n: usize) -> f64 {
    2.0 * (2.0 * max_entropy(n)).sqrt()
}
