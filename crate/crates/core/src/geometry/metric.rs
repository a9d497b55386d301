use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use super::tangent::{check_tangent, TangentBasis};
use crate::clifford::{Element, VectorField};
use crate::density::Density;
use crate::error::{Error, Result};
use crate::rho::RhoCalculus;

/// Condition number above which the Onsager matrix is rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// `D(rho) U = -div[(Gamma(rho), rho) # grad U]`
pub fn onsager_apply(calc: &RhoCalculus, u: &Element) -> Element {
    calc.hat_field(&u.grad()).divergence().scale_re(-1.0)
}

/// The metric tensor at a strictly positive density, in the coordinates of
/// a [`TangentBasis`]: `G_lm = <U_l, D(rho) U_m> = <grad U_l, grad U_m>_rho`.
#[derive(Clone, Debug)]
pub struct MetricPoint {
    calc: Arc<RhoCalculus>,
    basis: Arc<TangentBasis>,
    onsager: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    condition: f64,
}

impl MetricPoint {
    pub fn new(rho: &Density) -> Result<Self> {
        let basis = TangentBasis::new(rho.ctx());
        Self::with_basis(Arc::new(RhoCalculus::new(rho)?), basis)
    }

    pub fn with_basis(calc: Arc<RhoCalculus>, basis: Arc<TangentBasis>) -> Result<Self> {
        let onsager = onsager_matrix(&calc, &basis);
        let eig = SymmetricEigen::new(onsager.clone());
        let lo = eig.eigenvalues.min();
        let hi = eig.eigenvalues.max();
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if !(condition <= MAX_CONDITION) {
            return Err(Error::IllConditioned(condition));
        }
        let chol = Cholesky::new(onsager.clone()).ok_or(Error::IllConditioned(condition))?;
        Ok(MetricPoint {
            calc,
            basis,
            onsager,
            chol,
            condition,
        })
    }

    pub fn calculus(&self) -> &Arc<RhoCalculus> {
        &self.calc
    }

    pub fn basis(&self) -> &Arc<TangentBasis> {
        &self.basis
    }

    pub fn density(&self) -> &Density {
        self.calc.density()
    }

    pub fn onsager_matrix(&self) -> &DMatrix<f64> {
        &self.onsager
    }

    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    pub fn onsager_apply(&self, u: &Element) -> Element {
        onsager_apply(&self.calc, u)
    }

    /// Solve `G u = s` for the potential coordinates.
    pub fn solve_coords(&self, s: &[f64]) -> Vec<f64> {
        self.chol.solve(&DVector::from_column_slice(s)).as_slice().to_vec()
    }

    /// The potential `U` (self-adjoint, `tau(U) = 0`) with `D(rho) U = sigma`,
    /// so that `sigma + div[(Gamma(rho), rho) # grad U] = 0`.
    pub fn solve_potential(&self, sigma: &Element) -> Result<Element> {
        check_tangent(sigma)?;
        let u = self.solve_coords(&self.basis.coords(sigma));
        Ok(self.basis.combine(&u))
    }

    /// `g_rho(sigma1, sigma2) = s1^T G^{-1} s2`
    pub fn metric(&self, sigma1: &Element, sigma2: &Element) -> Result<f64> {
        check_tangent(sigma1)?;
        check_tangent(sigma2)?;
        let s1 = self.basis.coords(sigma1);
        let u2 = self.solve_coords(&self.basis.coords(sigma2));
        Ok(s1.iter().zip(&u2).map(|(a, b)| a * b).sum())
    }

    /// `u^T G u = ||grad U||_rho^2` for potential coordinates `u`.
    pub fn quadratic(&self, u: &[f64]) -> f64 {
        let v = DVector::from_column_slice(u);
        (v.transpose() * &self.onsager * &v)[(0, 0)]
    }
}

/// `G_lm = Re <grad U_l, rho^ grad U_m>`, symmetrised.
pub fn onsager_matrix(calc: &RhoCalculus, basis: &TangentBasis) -> DMatrix<f64> {
    let dim = basis.dim();
    let hats: Vec<VectorField> = (0..dim).map(|m| calc.hat_field(basis.gradient(m))).collect();
    let mut g = DMatrix::zeros(dim, dim);
    for l in 0..dim {
        for m in l..dim {
            let v = basis.gradient(l).inner(&hats[m]).re;
            g[(l, m)] = v;
            g[(m, l)] = v;
        }
    }
    g
}

/// Splits `V = grad U + Z` with `div Z = 0` and `tau(U) = 0`.
pub fn helmholtz(v: &VectorField) -> Result<(Element, VectorField)> {
    // div grad U = -N U
    let u = v.divergence().number_op_inverse()?.scale_re(-1.0);
    let z = v.sub(&u.grad());
    Ok((u, z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::CliffordContext;
    use crate::sampling::{random_density, random_element, random_traceless_self_adjoint, sample_rng};

    #[test]
    fn onsager_at_identity_is_number_operator() {
        let ctx = CliffordContext::new(3).unwrap();
        let mp = MetricPoint::new(&Density::identity(&ctx)).unwrap();
        let u = random_traceless_self_adjoint(&ctx, &mut sample_rng(0, 0));
        assert!(mp.onsager_apply(&u).dist(&u.number_op()) < 1e-12);
        // sigma = Q_1 at I gives U = Q_1 under rho_dot + div(rho^ grad U) = 0
        let q1 = Element::generator(&ctx, 0).unwrap();
        assert!(mp.solve_potential(&q1).unwrap().dist(&q1) < 1e-12);
    }

    #[test]
    fn onsager_preserves_adjoints_and_matrix_is_symmetric() {
        for n in 1..=3 {
            let ctx = CliffordContext::new(n).unwrap();
            let mut rng = sample_rng(11, n as u64);
            let rho = random_density(&ctx, &mut rng, 0.02);
            let mp = MetricPoint::new(&rho).unwrap();
            let c = random_element(&ctx, &mut rng);
            let lhs = mp.onsager_apply(&c).adjoint();
            let rhs = mp.onsager_apply(&c.adjoint());
            assert!(lhs.dist(&rhs) < 1e-11);
            let g = mp.onsager_matrix();
            assert!((g - g.transpose()).norm() < 1e-14);
            // raw entries are real
            let b = mp.basis();
            for l in 0..b.dim() {
                for m in 0..b.dim() {
                    let z = b.gradient(l).inner(&mp.calculus().hat_field(b.gradient(m)));
                    assert!(z.im.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn solve_potential_inverts_onsager() {
        let ctx = CliffordContext::new(3).unwrap();
        let mut rng = sample_rng(12, 0);
        let rho = random_density(&ctx, &mut rng, 0.02);
        let mp = MetricPoint::new(&rho).unwrap();
        let u0 = random_traceless_self_adjoint(&ctx, &mut rng);
        let sigma = mp.onsager_apply(&u0);
        let u = mp.solve_potential(&sigma).unwrap();
        assert!(u.dist(&u0) < 1e-9);
        let resid = &sigma + &mp.calculus().hat_field(&u.grad()).divergence();
        assert!(resid.norm() < 1e-9);
        assert!(mp.solve_potential(&Element::identity(&ctx)).is_err());
    }

    #[test]
    fn gradient_potential_minimises_kinetic_energy() {
        let ctx = CliffordContext::new(2).unwrap();
        let mut rng = sample_rng(13, 0);
        let rho = random_density(&ctx, &mut rng, 0.02);
        let mp = MetricPoint::new(&rho).unwrap();
        let calc = mp.calculus();
        let u = mp.solve_potential(&random_traceless_self_adjoint(&ctx, &mut rng)).unwrap();
        let gu = u.grad();
        let base = calc.inner_field(&gu, &gu).re;
        for _ in 0..20 {
            // divergence-free W, then V = grad U + rho^{-hat} W carries the same flux
            let w0 = VectorField::new((0..2).map(|_| random_element(&ctx, &mut rng)).collect()).unwrap();
            let (_, w) = helmholtz(&w0).unwrap();
            let v = gu.add(&calc.hat_inverse_field(&w));
            assert!(calc.hat_field(&v).divergence().dist(&calc.hat_field(&gu).divergence()) < 1e-10);
            assert!(calc.inner_field(&v, &v).re > base);
        }
    }

    #[test]
    fn metric_at_identity_is_inverse_number_operator() {
        let ctx = CliffordContext::new(3).unwrap();
        let mp = MetricPoint::new(&Density::identity(&ctx)).unwrap();
        let s = random_traceless_self_adjoint(&ctx, &mut sample_rng(14, 0));
        let want = s.inner(&s.number_op_inverse().unwrap()).re;
        assert!((mp.metric(&s, &s).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn helmholtz_reconstructs() {
        let ctx = CliffordContext::new(3).unwrap();
        let mut rng = sample_rng(15, 0);
        let v = VectorField::new((0..3).map(|_| random_element(&ctx, &mut rng)).collect()).unwrap();
        let (u, z) = helmholtz(&v).unwrap();
        assert!(z.divergence().norm() < 1e-12);
        assert!(u.grad().add(&z).dist(&v) < 1e-12);
        assert!(u.trace().norm() < 1e-14);
        // the two parts are orthogonal
        assert!(u.grad().inner(&z).norm() < 1e-12);
    }
}
