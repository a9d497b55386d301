use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::metric::onsager_matrix;
use super::tangent::TangentBasis;
use crate::clifford::{CliffordContext, Element, VectorField};
use crate::density::Density;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, ExecMode};
use crate::rho::RhoCalculus;
use crate::sampling::{random_density, sample_rng};

/// `<rho^ grad U, grad N V> - 1/2 <N rho, rho flat (grad U, grad V)>`, whose
/// diagonal is the entropy Hessian along `grad U`.
pub fn hessian_form(calc: &RhoCalculus, u: &Element, v: &Element) -> Complex64 {
    let gu = u.grad();
    let gv = v.grad();
    let first = calc.hat_field(&gu).inner(&v.number_op().grad());
    let n_rho = calc.density().element().number_op();
    first - n_rho.inner(&calc.flat(&gu, &gv)) * 0.5
}

/// The entropy Hessian `H` and the metric `K` in potential coordinates.
#[derive(Clone, Debug)]
pub struct EntropyHessian {
    pub hessian: DMatrix<f64>,
    pub metric: DMatrix<f64>,
}

impl EntropyHessian {
    pub fn new(calc: &RhoCalculus, basis: &TangentBasis) -> Self {
        let dim = basis.dim();
        let hats: Vec<VectorField> = (0..dim).map(|m| calc.hat_field(basis.gradient(m))).collect();
        let grad_n: Vec<VectorField> = basis.elements().iter().map(|u| u.number_op().grad()).collect();
        let n_rho = calc.density().element().number_op();
        let mut h = DMatrix::zeros(dim, dim);
        for l in 0..dim {
            for m in l..dim {
                let b_lm = hats[l].inner(&grad_n[m]) - n_rho.inner(&calc.flat(basis.gradient(l), basis.gradient(m))) * 0.5;
                let b_ml = hats[m].inner(&grad_n[l]) - n_rho.inner(&calc.flat(basis.gradient(m), basis.gradient(l))) * 0.5;
                let v = 0.5 * (b_lm.re + b_ml.re);
                h[(l, m)] = v;
                h[(m, l)] = v;
            }
        }
        EntropyHessian {
            hessian: h,
            metric: onsager_matrix(calc, basis),
        }
    }

    /// Smallest `k` with `det(H - k K) = 0`.
    pub fn min_rel_eig(&self) -> Result<f64> {
        let chol = self.metric.clone().cholesky().ok_or(Error::IllConditioned(f64::INFINITY))?;
        let l = chol.l();
        let linv = l.clone().try_inverse().ok_or(Error::IllConditioned(f64::INFINITY))?;
        let c = &linv * &self.hessian * linv.transpose();
        let c = (&c + c.transpose()) * 0.5;
        Ok(SymmetricEigen::new(c).eigenvalues.min())
    }
}

pub fn hessian_entropy(rho: &Density) -> Result<EntropyHessian> {
    let calc = RhoCalculus::new(rho)?;
    Ok(EntropyHessian::new(&calc, &TangentBasis::new(rho.ctx())))
}

pub fn hessian_min_rel_eig(rho: &Density) -> Result<f64> {
    hessian_entropy(rho)?.min_rel_eig()
}

/// Result of a randomised search for the least convex direction of the entropy.
#[derive(Clone, Debug)]
pub struct ConvexityReport {
    pub n: usize,
    pub seed: u64,
    pub floor: f64,
    /// `min_rel_eig` per sample, `NaN` where it could not be evaluated.
    pub values: Vec<f64>,
    pub min: f64,
    pub argmin: usize,
    /// Samples whose Hessian could not be evaluated (stored as NaN in `values`).
    pub failed: usize,
    pub witness: Density,
}

/// The density used for sample `id` of a sweep.
pub fn sweep_density(ctx: &Arc<CliffordContext>, seed: u64, id: u64, floor: f64) -> Density {
    random_density(ctx, &mut sample_rng(seed, id), floor)
}

/// Minimum of `min_rel_eig` over `samples` random densities with spectrum
/// at least `floor`. Sample `k` depends only on `(seed, k)`.
pub fn convexity_search(n: usize, samples: usize, seed: u64, floor: f64, mode: ExecMode) -> Result<ConvexityReport> {
    if samples == 0 {
        return Err(Error::OutOfRange { what: "samples", value: 0.0 });
    }
    let ctx = CliffordContext::new(n)?;
    let basis = TangentBasis::new(&ctx);
    let values = map_indexed(mode, samples, |k| {
        let rho = sweep_density(&ctx, seed, k as u64, floor);
        RhoCalculus::new(&rho)
            .and_then(|c| EntropyHessian::new(&c, &basis).min_rel_eig())
            .unwrap_or(f64::NAN)
    });
    let (argmin, min) = values
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, v)| !v.is_nan())
        .fold((0, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
    Ok(ConvexityReport {
        n,
        seed,
        floor,
        witness: sweep_density(&ctx, seed, argmin as u64, floor),
        failed: values.iter().filter(|v| v.is_nan()).count(),
        values,
        min,
        argmin,
    })
}
