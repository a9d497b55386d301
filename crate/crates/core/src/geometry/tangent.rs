use std::sync::Arc;

use num_complex::Complex64;

use crate::clifford::{CliffordContext, Element, VectorField};
use crate::error::{Error, Result};
use crate::rho::RhoCalculus;

/// Orthonormal basis of the self-adjoint trace-zero elements: `Q^alpha` when
/// it is self-adjoint, `i Q^alpha` otherwise, for every `alpha != 0`.
///
/// Densities are parametrised as `I + sum_m r_m U_m` and potentials as
/// `sum_m u_m U_m`.
#[derive(Debug)]
pub struct TangentBasis {
    ctx: Arc<CliffordContext>,
    phases: Vec<Complex64>,
    elements: Vec<Element>,
    gradients: Vec<VectorField>,
}

impl TangentBasis {
    pub fn new(ctx: &Arc<CliffordContext>) -> Arc<Self> {
        let mut phases = Vec::with_capacity(ctx.dim() - 1);
        let mut elements = Vec::with_capacity(ctx.dim() - 1);
        for mask in 1..ctx.dim() {
            let ph = if CliffordContext::adjoint_sign(mask) > 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 1.0)
            };
            phases.push(ph);
            elements.push(Element::basis(ctx, mask).expect("mask in range").scale(ph));
        }
        let gradients = elements.iter().map(Element::grad).collect();
        Arc::new(TangentBasis {
            ctx: ctx.clone(),
            phases,
            elements,
            gradients,
        })
    }

    pub fn ctx(&self) -> &Arc<CliffordContext> {
        &self.ctx
    }

    /// Real dimension `2^n - 1`.
    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, m: usize) -> &Element {
        &self.elements[m]
    }

    /// The mask `alpha` behind `U_m`.
    pub fn mask(&self, m: usize) -> usize {
        m + 1
    }

    pub fn gradient(&self, m: usize) -> &VectorField {
        &self.gradients[m]
    }

    /// `<U_m, A>` for every `m`, real part. The identity component and any
    /// anti-self-adjoint part of `A` are dropped.
    pub fn coords(&self, a: &Element) -> Vec<f64> {
        let c = a.coeffs();
        self.phases
            .iter()
            .enumerate()
            .map(|(m, ph)| (ph.conj() * c[m + 1]).re)
            .collect()
    }

    /// `sum_m r_m U_m`
    pub fn combine(&self, r: &[f64]) -> Element {
        assert_eq!(r.len(), self.dim(), "coordinate vector length");
        let mut c = vec![Complex64::new(0.0, 0.0); self.ctx.dim()];
        for (m, (&x, ph)) in r.iter().zip(&self.phases).enumerate() {
            c[m + 1] = ph * x;
        }
        Element::from_coeffs(&self.ctx, &c).expect("length matches")
    }

    /// `I + sum_m r_m U_m`
    pub fn density_element(&self, r: &[f64]) -> Element {
        let mut e = self.combine(r);
        e += &Element::identity(&self.ctx);
        e
    }

    /// Calculus at `I + sum_m r_m U_m`; fails unless the spectrum stays above `floor`.
    pub fn calculus_at(&self, r: &[f64], floor: f64) -> Result<RhoCalculus> {
        let calc = RhoCalculus::from_trusted(self.density_element(r))?;
        let min = calc.density().min_eig();
        if min < floor {
            return Err(Error::NotStrictlyPositive(min));
        }
        Ok(calc)
    }

    /// `sum_m u_m grad U_m`
    pub fn combine_gradients(&self, u: &[f64]) -> VectorField {
        let mut comps: Vec<Element> = (0..self.ctx.n()).map(|_| Element::zero(&self.ctx)).collect();
        for (x, g) in u.iter().zip(&self.gradients) {
            if *x != 0.0 {
                for (c, gi) in comps.iter_mut().zip(g.components()) {
                    *c = c.axpy(*x, gi);
                }
            }
        }
        VectorField::from_components_unchecked(comps)
    }
}

/// Rejects elements that are not self-adjoint with zero trace.
pub(crate) fn check_tangent(sigma: &Element) -> Result<()> {
    let scale = sigma.norm().max(1.0);
    let res = sigma.self_adjoint_residual();
    if res > 1e-10 * scale {
        return Err(Error::NotSelfAdjoint(res));
    }
    let t = sigma.trace().norm();
    if t > crate::clifford::TRACE_ZERO_TOL * scale {
        return Err(Error::NonZeroTrace(t));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_traceless_self_adjoint, sample_rng};

    #[test]
    fn basis_is_orthonormal_self_adjoint_traceless() {
        for n in 1..=4 {
            let ctx = CliffordContext::new(n).unwrap();
            let b = TangentBasis::new(&ctx);
            assert_eq!(b.dim(), (1 << n) - 1);
            for (l, ul) in b.elements().iter().enumerate() {
                assert!(ul.self_adjoint_residual() < 1e-15);
                assert!(ul.trace().norm() < 1e-15);
                for (m, um) in b.elements().iter().enumerate() {
                    let want = if l == m { 1.0 } else { 0.0 };
                    assert!((ul.inner(um) - want).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn coords_round_trip() {
        let ctx = CliffordContext::new(3).unwrap();
        let b = TangentBasis::new(&ctx);
        let a = random_traceless_self_adjoint(&ctx, &mut sample_rng(3, 0));
        let back = b.combine(&b.coords(&a));
        assert!(back.dist(&a) < 1e-13);
    }
}
