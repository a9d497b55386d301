//! Hermitian eigendecomposition with eigenvalue clustering.

use std::ops::Range;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::clifford::{CliffordContext, Element};
use crate::error::{Error, Result};

/// Self-adjointness residual accepted by [`SpectralDecomp::new`].
pub const SELF_ADJOINT_TOL: f64 = 1e-10;

/// Relative gap below which neighbouring eigenvalues are merged.
pub const CLUSTER_TOL: f64 = 1e-9;

/// Spectral decomposition `A = V diag(lambda) V^*` of a self-adjoint element.
///
/// Eigenvalues are sorted ascending. Eigenvalues closer than [`CLUSTER_TOL`]
/// (relative to the spectral radius) are replaced by their cluster mean, so
/// every kernel evaluated on them is constant on each spectral subspace and
/// the spectral projectors are exactly the cluster projectors.
#[derive(Clone, Debug)]
pub struct SpectralDecomp {
    ctx: Arc<CliffordContext>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
    clusters: Vec<Range<usize>>,
}

impl SpectralDecomp {
    pub fn new(a: &Element) -> Result<Self> {
        let res = a.self_adjoint_residual();
        if res > SELF_ADJOINT_TOL * a.norm().max(1.0) {
            return Err(Error::NotSelfAdjoint(res));
        }
        let herm = a.hermitian_part();
        let eig = SymmetricEigen::new(herm.matrix().clone());
        let d = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let mut eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let eigenvectors = DMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);

        let scale = eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        let mut clusters = Vec::new();
        let mut start = 0;
        for k in 1..=d {
            if k == d || eigenvalues[k] - eigenvalues[k - 1] > CLUSTER_TOL * scale {
                clusters.push(start..k);
                start = k;
            }
        }
        for c in &clusters {
            let mean = eigenvalues[c.clone()].iter().sum::<f64>() / c.len() as f64;
            eigenvalues[c.clone()].iter_mut().for_each(|x| *x = mean);
        }
        Ok(SpectralDecomp {
            ctx: a.ctx().clone(),
            eigenvalues,
            eigenvectors,
            clusters,
        })
    }

    pub fn ctx(&self) -> &Arc<CliffordContext> {
        &self.ctx
    }

    /// All eigenvalues with multiplicity, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors as columns, in the order of [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    /// Distinct eigenvalues with their multiplicities.
    pub fn distinct(&self) -> Vec<(f64, usize)> {
        self.clusters
            .iter()
            .map(|c| (self.eigenvalues[c.start], c.len()))
            .collect()
    }

    /// Spectral projectors, one per distinct eigenvalue.
    pub fn projectors(&self) -> Vec<Element> {
        self.clusters
            .iter()
            .map(|c| {
                let v = self.eigenvectors.columns(c.start, c.len());
                Element::from_matrix_unchecked(&self.ctx, v * v.adjoint())
            })
            .collect()
    }

    /// `sum_j f(lambda_j) P_j`
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> Element {
        let vals: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        self.apply_values(&vals)
    }

    pub(crate) fn apply_values(&self, vals: &[f64]) -> Element {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (c, &f) in vals.iter().enumerate() {
            scaled.column_mut(c).scale_mut(f);
        }
        Element::from_matrix_unchecked(&self.ctx, scaled * v.adjoint())
    }

    /// Decomposition of `Gamma(A)`: same eigenvalues, eigenvectors multiplied by the parity unitary.
    pub fn graded(&self) -> SpectralDecomp {
        let p = self.ctx.parity();
        let ev = DMatrix::from_fn(self.eigenvectors.nrows(), self.eigenvectors.ncols(), |r, c| {
            self.eigenvectors[(r, c)] * p[r]
        });
        SpectralDecomp {
            ctx: self.ctx.clone(),
            eigenvalues: self.eigenvalues.clone(),
            eigenvectors: ev,
            clusters: self.clusters.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::random_self_adjoint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn n1_two_level_spectrum() {
        let ctx = CliffordContext::new(1).unwrap();
        let rho = Element::from_real_coeffs(&ctx, &[1.0, 0.3]).unwrap();
        let s = SpectralDecomp::new(&rho).unwrap();
        assert!((s.eigenvalues()[0] - 0.7).abs() < 1e-14);
        assert!((s.eigenvalues()[1] - 1.3).abs() < 1e-14);
    }

    #[test]
    fn n2_ball_density_has_double_eigenvalues() {
        let ctx = CliffordContext::new(2).unwrap();
        let (x, y, z) = (0.2, -0.3, 0.4);
        let rho = Element::from_coeffs(
            &ctx,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(x, 0.0),
                Complex64::new(y, 0.0),
                Complex64::new(0.0, z),
            ],
        )
        .unwrap();
        let r = (x * x + y * y + z * z).sqrt();
        let s = SpectralDecomp::new(&rho).unwrap();
        let d = s.distinct();
        assert_eq!(d.len(), 2);
        assert!((d[0].0 - (1.0 - r)).abs() < 1e-12 && d[0].1 == 2);
        assert!((d[1].0 - (1.0 + r)).abs() < 1e-12 && d[1].1 == 2);
    }

    #[test]
    fn identity_is_one_cluster() {
        let ctx = CliffordContext::new(3).unwrap();
        let s = SpectralDecomp::new(&Element::identity(&ctx)).unwrap();
        assert_eq!(s.distinct(), vec![(1.0, 8)]);
        let p = s.projectors();
        assert!(p[0].dist(&Element::identity(&ctx)) < 1e-14);
    }

    #[test]
    fn projectors_resolve_identity_and_reconstruct() {
        let ctx = CliffordContext::new(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let a = random_self_adjoint(&ctx, &mut rng);
            let s = SpectralDecomp::new(&a).unwrap();
            let ps = s.projectors();
            let mut sum = Element::zero(&ctx);
            let mut recon = Element::zero(&ctx);
            for (p, (lam, _)) in ps.iter().zip(s.distinct()) {
                sum += p;
                recon += &p.scale_re(lam);
                assert!((p * p).dist(p) < 1e-10);
                // projectors of an algebra element stay in the algebra
                assert!(Element::from_matrix(&ctx, p.matrix().clone()).is_ok());
            }
            for (i, p) in ps.iter().enumerate() {
                for q in &ps[i + 1..] {
                    assert!((p * q).norm() < 1e-10);
                }
            }
            assert!(sum.dist(&Element::identity(&ctx)) < 1e-10);
            assert!(recon.dist(&a) < 1e-10);
            let g = s.graded();
            assert!(g.apply_fn(|x| x).dist(&a.grading()) < 1e-10);
        }
    }

    #[test]
    fn rejects_non_self_adjoint() {
        let ctx = CliffordContext::new(2).unwrap();
        let q12 = Element::basis(&ctx, 3).unwrap();
        assert!(matches!(SpectralDecomp::new(&q12), Err(Error::NotSelfAdjoint(_))));
    }
}
