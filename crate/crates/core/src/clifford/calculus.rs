//! Grading, fermionic derivatives, divergence and the number operator.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::element::Element;
use super::field::VectorField;
use crate::error::{Error, Result};

/// Tolerance on `|tau(A)|` for inverting the number operator.
pub const TRACE_ZERO_TOL: f64 = 1e-12;

impl Element {
    /// `Gamma(Q^alpha) = (-1)^|alpha| Q^alpha`, realised as conjugation by the parity unitary.
    pub fn grading(&self) -> Element {
        let p = self.ctx().parity();
        self.map_matrix(|m| DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)] * (p[r] * p[c])))
    }

    /// `Gamma_*(C) = Gamma(C^*)`
    pub fn gamma_star(&self) -> Element {
        self.adjoint().grading()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n() {
            return Err(Error::IndexOutOfRange { index: i, n: self.n() });
        }
        Ok(())
    }

    /// `(Q_i A + sign * Gamma(A) Q_i) / 2`, shared by the derivative and its adjoint.
    fn half_commutator(&self, i: usize, sign: f64) -> Element {
        let q = self.ctx().generator_monomial(i);
        let left = q.left_mul(self.matrix());
        let right = q.right_mul(self.grading().matrix());
        let m = (left + right * Complex64::new(sign, 0.0)) * Complex64::new(0.5, 0.0);
        self.map_matrix(|_| m)
    }

    /// `nabla_i A = (Q_i A - Gamma(A) Q_i) / 2` for the 0-based generator index `i`.
    pub fn grad_i(&self, i: usize) -> Result<Element> {
        self.check_index(i)?;
        Ok(self.half_commutator(i, -1.0))
    }

    /// `nabla_i^* A = (Q_i A + Gamma(A) Q_i) / 2`
    pub fn grad_adj_i(&self, i: usize) -> Result<Element> {
        self.check_index(i)?;
        Ok(self.half_commutator(i, 1.0))
    }

    pub fn grad(&self) -> VectorField {
        VectorField::from_components_unchecked((0..self.n()).map(|i| self.half_commutator(i, -1.0)).collect())
    }

    /// `N A`, acting as `|alpha|` on each `Q^alpha`.
    pub fn number_op(&self) -> Element {
        self.map_coeffs(|mask, c| c * mask.count_ones() as f64)
    }

    /// `N^{-1} A` on trace-zero input.
    pub fn number_op_inverse(&self) -> Result<Element> {
        let t = self.trace().norm();
        if t > TRACE_ZERO_TOL {
            return Err(Error::NonZeroTrace(t));
        }
        Ok(self.map_coeffs(|mask, c| {
            if mask == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                c / mask.count_ones() as f64
            }
        }))
    }

    /// `P_t A = e^{-tN} A`
    pub fn semigroup(&self, t: f64) -> Element {
        let decay: Vec<f64> = (0..=self.n()).map(|k| (-t * k as f64).exp()).collect();
        self.map_coeffs(|mask, c| c * decay[mask.count_ones() as usize])
    }

    /// `F(A, B) = sum_i tau((nabla_i A)^* nabla_i B)`
    pub fn dirichlet_form(&self, other: &Element) -> Complex64 {
        self.grad().inner(&other.grad())
    }

    fn map_coeffs(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Element {
        let c: Vec<Complex64> = self.coeffs().iter().enumerate().map(|(m, &c)| f(m, c)).collect();
        Element::from_coeffs(self.ctx(), &c).expect("coefficient length matches context")
    }
}

impl VectorField {
    /// `div V = -sum_i nabla_i^*(V_i)`
    pub fn divergence(&self) -> Element {
        let mut acc = Element::zero(self.ctx());
        for (i, v) in self.components().iter().enumerate() {
            acc += &v.half_commutator(i, 1.0);
        }
        -acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::CliffordContext;
    use crate::sampling::random_element;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = 1e-12;

    #[test]
    fn grad_of_generator_is_identity() {
        let ctx = CliffordContext::new(2).unwrap();
        let q1 = Element::generator(&ctx, 0).unwrap();
        assert!(q1.grad_i(0).unwrap().dist(&Element::identity(&ctx)) < TOL);
        assert!(q1.grad_i(1).unwrap().norm() < TOL);
        assert!(Element::identity(&ctx).grad_i(0).unwrap().norm() < TOL);
        assert!(q1.grad_i(2).is_err());
    }

    #[test]
    fn grad_on_basis_follows_table() {
        let ctx = CliffordContext::new(3).unwrap();
        for mask in 0..8 {
            let qa = Element::basis(&ctx, mask).unwrap();
            for i in 0..3 {
                let g = qa.grad_i(i).unwrap();
                if mask & (1 << i) == 0 {
                    assert!(g.norm() < TOL);
                } else {
                    let qi = Element::generator(&ctx, i).unwrap();
                    assert!(g.dist(&(&qi * &qa)) < TOL);
                }
            }
        }
    }

    #[test]
    fn grading_signs() {
        let ctx = CliffordContext::new(2).unwrap();
        let q12 = Element::basis(&ctx, 3).unwrap();
        assert!(q12.grading().dist(&q12) < TOL);
        let q2 = Element::basis(&ctx, 2).unwrap();
        assert!(q2.grading().dist(&-&q2) < TOL);
    }

    #[test]
    fn number_operator_and_semigroup() {
        let ctx = CliffordContext::new(2).unwrap();
        let q12 = Element::basis(&ctx, 3).unwrap();
        assert!(q12.number_op().dist(&q12.scale_re(2.0)) < TOL);
        // eigenvalue from the Dirichlet form
        assert!((q12.dirichlet_form(&q12).re - 2.0).abs() < TOL);
        assert!(Element::identity(&ctx).number_op().norm() < TOL);
        assert!(Element::identity(&ctx).number_op_inverse().is_err());
        let inv = q12.number_op_inverse().unwrap();
        assert!(inv.dist(&q12.scale_re(0.5)) < TOL);
    }

    #[test]
    fn divergence_is_minus_adjoint_of_gradient() {
        let ctx = CliffordContext::new(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = random_element(&ctx, &mut rng);
            let b = random_element(&ctx, &mut rng);
            // -div grad = N
            assert!(a.grad().divergence().dist(&-a.number_op()) < 1e-11);
            for i in 0..3 {
                let lhs = a.grad_i(i).unwrap().inner(&b);
                let rhs = a.inner(&b.grad_adj_i(i).unwrap());
                assert!((lhs - rhs).norm() < TOL);
            }
        }
    }
}
