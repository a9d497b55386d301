//! Density elements: self-adjoint, non-negative, unit normalised trace.

use std::ops::Deref;
use std::sync::Arc;

use crate::clifford::{CliffordContext, Element};
use crate::error::{Error, Result};
use crate::spectral::SpectralDecomp;

const SELF_ADJOINT_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const NEGATIVITY_TOL: f64 = 1e-12;
/// Positivity slack allowed after applying the heat semigroup.
const SEMIGROUP_NEGATIVITY_TOL: f64 = 1e-10;

/// A density `rho >= 0` with `tau(rho) = 1`.
#[derive(Clone, Debug)]
pub struct Density {
    element: Element,
    min_eig: f64,
}

impl Density {
    pub fn new(element: Element) -> Result<Self> {
        let scale = element.norm().max(1.0);
        let res = element.self_adjoint_residual();
        if res > SELF_ADJOINT_TOL * scale {
            return Err(Error::NotDensity(format!("self-adjoint residual {res:e}")));
        }
        let t = element.trace();
        if (t.re - 1.0).abs() > TRACE_TOL || t.im.abs() > TRACE_TOL {
            return Err(Error::NotDensity(format!("trace {t} differs from 1")));
        }
        Self::with_checked_trace(element.hermitian_part(), NEGATIVITY_TOL)
    }

    fn with_checked_trace(element: Element, neg_tol: f64) -> Result<Self> {
        let min_eig = SpectralDecomp::new(&element)?.min();
        if min_eig < -neg_tol {
            return Err(Error::NotDensity(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Density { element, min_eig })
    }

    /// Hermitian part of `a`, rescaled to unit trace.
    pub fn normalized(a: &Element) -> Result<Self> {
        let h = a.hermitian_part();
        let t = h.trace().re;
        if t <= 0.0 {
            return Err(Error::NotDensity(format!("non-positive trace {t:e}")));
        }
        Self::new(h.scale_re(1.0 / t))
    }

    pub fn identity(ctx: &Arc<CliffordContext>) -> Self {
        Density {
            element: Element::identity(ctx),
            min_eig: 1.0,
        }
    }

    /// From raw `Q^alpha` coefficients, identity slot included.
    pub fn from_coeffs(ctx: &Arc<CliffordContext>, coeffs: &[num_complex::Complex64]) -> Result<Self> {
        Self::new(Element::from_coeffs(ctx, coeffs)?)
    }

    pub fn ctx(&self) -> &Arc<CliffordContext> {
        self.element.ctx()
    }

    pub fn n(&self) -> usize {
        self.element.n()
    }

    pub fn element(&self) -> &Element {
        &self.element
    }

    pub fn min_eig(&self) -> f64 {
        self.min_eig
    }

    pub fn spectral(&self) -> SpectralDecomp {
        SpectralDecomp::new(&self.element).expect("densities are self-adjoint")
    }

    pub fn is_strict(&self, eps: f64) -> bool {
        self.min_eig >= eps
    }

    /// Checks `min_eig >= eps`.
    pub fn require_strict(&self, eps: f64) -> Result<()> {
        if self.min_eig >= eps && self.min_eig > 0.0 {
            Ok(())
        } else {
            Err(Error::NotStrictlyPositive(self.min_eig))
        }
    }

    pub fn strict(&self, eps: f64) -> Result<StrictDensity> {
        StrictDensity::new(self.clone(), eps)
    }

    /// `(1 - eps) rho + eps I`
    pub fn mix_with_identity(&self, eps: f64) -> Density {
        let id = Element::identity(self.ctx());
        let e = &self.element.scale_re(1.0 - eps) + &id.scale_re(eps);
        Density {
            element: e,
            min_eig: (1.0 - eps) * self.min_eig + eps,
        }
    }

    /// `P_t rho`, re-checking positivity of the result.
    pub fn semigroup(&self, t: f64) -> Result<Density> {
        Self::with_checked_trace(self.element.semigroup(t).hermitian_part(), SEMIGROUP_NEGATIVITY_TOL)
    }

    /// Rebuild from an element already known to be self-adjoint with unit trace
    /// (for instance an integrator state); only positivity is checked.
    pub(crate) fn from_trusted(element: Element) -> Result<Self> {
        let min_eig = SpectralDecomp::new(&element)?.min();
        Ok(Density { element, min_eig })
    }

    /// As [`Self::from_trusted`] with the smallest eigenvalue already known.
    pub(crate) fn from_parts(element: Element, min_eig: f64) -> Self {
        Density { element, min_eig }
    }
}

/// A density whose spectrum is bounded below by a caller-supplied `eps > 0`.
#[derive(Clone, Debug)]
pub struct StrictDensity {
    density: Density,
    eps: f64,
}

impl StrictDensity {
    pub fn new(density: Density, eps: f64) -> Result<Self> {
        if eps <= 0.0 {
            return Err(Error::OutOfRange { what: "strictness floor", value: eps });
        }
        density.require_strict(eps)?;
        Ok(StrictDensity { density, eps })
    }

    pub fn floor(&self) -> f64 {
        self.eps
    }

    pub fn into_density(self) -> Density {
        self.density
    }
}

impl Deref for StrictDensity {
    type Target = Density;
    fn deref(&self) -> &Density {
        &self.density
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::random_density;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn validation() {
        let ctx = CliffordContext::new(1).unwrap();
        assert!(Density::new(Element::from_real_coeffs(&ctx, &[1.0, 0.5]).unwrap()).is_ok());
        assert!(Density::new(Element::from_real_coeffs(&ctx, &[1.0, 1.0]).unwrap()).is_ok());
        assert!(Density::new(Element::from_real_coeffs(&ctx, &[1.0, 1.2]).unwrap()).is_err());
        assert!(Density::new(Element::from_real_coeffs(&ctx, &[2.0, 0.0]).unwrap()).is_err());
        let q = Element::generator(&ctx, 0).unwrap();
        let not_sa = &Element::identity(&ctx) + &q.scale(num_complex::Complex64::new(0.0, 0.3));
        assert!(Density::new(not_sa).is_err());
        let boundary = Density::new(Element::from_real_coeffs(&ctx, &[1.0, -1.0]).unwrap()).unwrap();
        assert!(boundary.strict(1e-3).is_err());
        assert!(boundary.mix_with_identity(0.1).strict(0.05).is_ok());
    }

    #[test]
    fn semigroup_keeps_densities() {
        let ctx = CliffordContext::new(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let rho = random_density(&ctx, &mut rng, 0.0);
            for t in [0.0, 0.3, 1.0, 5.0] {
                let p = rho.semigroup(t).unwrap();
                assert!((p.element().trace().re - 1.0).abs() < 1e-13);
                assert!(p.min_eig() >= -1e-10);
            }
            let a = rho.semigroup(0.4).unwrap().semigroup(0.7).unwrap();
            let b = rho.semigroup(1.1).unwrap();
            assert!(a.element().dist(b.element()) < 1e-13);
        }
    }
}
