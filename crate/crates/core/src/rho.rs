//! Superoperators attached to a strictly positive density: the weighted
//! multiplication `rho^ = (Gamma(rho), rho) #`, its inverse, its derivative
//! along a direction, and the trilinear flat form.

use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::clifford::{CliffordContext, Element, VectorField};
use crate::density::Density;
use crate::error::{Error, Result};
use crate::means::{log_mean3_unchecked, log_mean_unchecked, MeanKernel};
use crate::operator_integral::SuperOperator;
use crate::spectral::SpectralDecomp;

/// Spectral data of `rho` and `Gamma(rho)` with the kernels built on them.
///
/// Eigenvectors of `Gamma(rho)` are those of `rho` multiplied by the parity
/// unitary; both share the eigenvalues `lambda`.
#[derive(Clone, Debug)]
pub struct RhoCalculus {
    ctx: Arc<CliffordContext>,
    rho: Density,
    spec: SpectralDecomp,
    graded: SpectralDecomp,
    hat: SuperOperator,
    hat_inv: SuperOperator,
    triple: OnceLock<Arc<TripleTable>>,
}

/// `mu3[a][b][c] / mu[b][c]` for all eigenvalue triples, flattened.
#[derive(Debug)]
struct TripleTable {
    d: usize,
    w: Vec<f64>,
}

impl TripleTable {
    fn new(lambda: &[f64]) -> Self {
        let d = lambda.len();
        let mut w = vec![0.0; d * d * d];
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    w[(a * d + b) * d + c] = log_mean3_unchecked(lambda[a], lambda[b], lambda[c])
                        / log_mean_unchecked(lambda[b], lambda[c]);
                }
            }
        }
        TripleTable { d, w }
    }

    #[inline]
    fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.w[(a * self.d + b) * self.d + c]
    }
}

impl RhoCalculus {
    pub fn new(rho: &Density) -> Result<Self> {
        if rho.min_eig() <= 0.0 {
            return Err(Error::NotStrictlyPositive(rho.min_eig()));
        }
        Self::build(rho.clone(), rho.spectral())
    }

    /// From a self-adjoint unit-trace element, decomposing it only once.
    pub(crate) fn from_trusted(element: Element) -> Result<Self> {
        let spec = SpectralDecomp::new(&element)?;
        let min = spec.min();
        Self::build(Density::from_parts(element, min), spec)
    }

    fn build(rho: Density, spec: SpectralDecomp) -> Result<Self> {
        if spec.min() <= 0.0 {
            return Err(Error::NotStrictlyPositive(spec.min()));
        }
        let graded = spec.graded();
        let hat = SuperOperator::from_mean(&graded, &spec, MeanKernel::LogMean);
        let hat_inv = SuperOperator::from_mean(&graded, &spec, MeanKernel::InverseLogMean);
        Ok(RhoCalculus {
            ctx: rho.ctx().clone(),
            rho,
            spec,
            graded,
            hat,
            hat_inv,
            triple: OnceLock::new(),
        })
    }

    pub fn ctx(&self) -> &Arc<CliffordContext> {
        &self.ctx
    }

    pub fn density(&self) -> &Density {
        &self.rho
    }

    pub fn spectral(&self) -> &SpectralDecomp {
        &self.spec
    }

    /// `rho^ = (Gamma(rho), rho) #` as a superoperator.
    pub fn rho_hat(&self) -> &SuperOperator {
        &self.hat
    }

    /// `(Gamma(rho), rho) #^`, the inverse of [`Self::rho_hat`].
    pub fn rho_hat_inverse(&self) -> &SuperOperator {
        &self.hat_inv
    }

    pub fn hat(&self, c: &Element) -> Element {
        self.hat.apply(c)
    }

    pub fn hat_field(&self, v: &VectorField) -> VectorField {
        self.hat.apply_field(v)
    }

    pub fn hat_inverse_field(&self, v: &VectorField) -> VectorField {
        self.hat_inv.apply_field(v)
    }

    /// `<A, B>_rho = tau[A^* (Gamma(rho), rho) # B]`
    pub fn inner(&self, a: &Element, b: &Element) -> Complex64 {
        a.inner(&self.hat(b))
    }

    pub fn inner_field(&self, a: &VectorField, b: &VectorField) -> Complex64 {
        a.inner(&self.hat_field(b))
    }

    pub fn norm_field(&self, v: &VectorField) -> f64 {
        self.inner_field(v, v).re.max(0.0).sqrt()
    }

    fn table(&self) -> &TripleTable {
        self.triple
            .get_or_init(|| Arc::new(TripleTable::new(self.spec.eigenvalues())))
    }

    /// `rho flat (V1, V2) = sum_i sum_{j,k,l} mu(g_k, l_j, l_l) / mu(l_j, l_l) P_j V1_i^* R_k V2_i P_l`
    /// with `P` the spectral projectors of `rho` and `R` those of `Gamma(rho)`.
    pub fn flat(&self, v1: &VectorField, v2: &VectorField) -> Element {
        let t = self.table();
        let v = self.spec.eigenvectors();
        let w = self.graded.eigenvectors();
        let d = v.nrows();
        let mut m = DMatrix::<Complex64>::zeros(d, d);
        for (a, b) in v1.components().iter().zip(v2.components()) {
            // X = V^* A^* W, Y = W^* B V
            let x = v.adjoint() * a.matrix().adjoint() * w;
            let y = w.adjoint() * b.matrix() * v;
            for j in 0..d {
                for l in 0..d {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..d {
                        acc += x[(j, k)] * y[(k, l)] * t.get(k, j, l);
                    }
                    m[(j, l)] += acc;
                }
            }
        }
        Element::from_matrix_unchecked(&self.ctx, v * m * v.adjoint())
    }

    /// The derivative `d/dt rho^(rho + t sigma)` at `t = 0`, as a map on elements.
    pub fn rho_hat_derivative(&self, sigma: &Element) -> RhoHatDerivative<'_> {
        let v = self.spec.eigenvectors();
        // W^* Gamma(sigma) W = V^* sigma V since Gamma is conjugation by the parity unitary
        let s = v.adjoint() * sigma.matrix() * v;
        RhoHatDerivative { calc: self, s }
    }

    /// `N^(rho)`, the derivative of `rho^` in the direction `N rho`; along the heat
    /// flow `d/dt rho^(P_t rho) = -N^(P_t rho)`.
    pub fn n_hat(&self) -> RhoHatDerivative<'_> {
        self.rho_hat_derivative(&self.rho.element().number_op())
    }
}

/// Directional derivative of `rho^`; see [`RhoCalculus::rho_hat_derivative`].
pub struct RhoHatDerivative<'a> {
    calc: &'a RhoCalculus,
    s: DMatrix<Complex64>,
}

impl RhoHatDerivative<'_> {
    /// `sum t(g_k; l_j, l_l) R_k C P_j s P_l + sum t(l_l; g_k, g_k') R_k Gamma(s) R_k' C P_l`
    /// with `t(x; y, z) = mu(x, y, z) / (2 mu(y, z))`.
    pub fn apply(&self, c: &Element) -> Element {
        let calc = self.calc;
        let t = calc.table();
        let v = calc.spec.eigenvectors();
        let w = calc.graded.eigenvectors();
        let d = v.nrows();
        let x = w.adjoint() * c.matrix() * v;
        let s = &self.s;
        let mut m = DMatrix::<Complex64>::zeros(d, d);
        for k in 0..d {
            for l in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..d {
                    acc += x[(k, j)] * s[(j, l)] * t.get(k, j, l);
                    acc += s[(k, j)] * x[(j, l)] * t.get(l, k, j);
                }
                m[(k, l)] = acc * 0.5;
            }
        }
        Element::from_matrix_unchecked(&calc.ctx, w * m * v.adjoint())
    }

    pub fn apply_field(&self, v: &VectorField) -> VectorField {
        v.map(|c| self.apply(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_integral::{dense_fn, sharp};
    use crate::quad::gauss_legendre;
    use crate::sampling::{random_density, random_element, random_self_adjoint, random_traceless_self_adjoint};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_field(ctx: &Arc<CliffordContext>, rng: &mut ChaCha8Rng) -> VectorField {
        VectorField::new((0..ctx.n()).map(|_| random_element(ctx, rng)).collect()).unwrap()
    }

    /// Triple integral defining the flat form, by tensor Gauss-Legendre.
    fn flat_quadrature(rho: &Element, v1: &VectorField, v2: &VectorField) -> DMatrix<Complex64> {
        let (x, w) = gauss_legendre(24);
        let g = rho.grading();
        let d = rho.matrix().nrows();
        let mut acc = DMatrix::zeros(d, d);
        for (s, ws) in x.iter().zip(&w) {
            let res = dense_fn(rho.matrix(), |t| 1.0 / ((1.0 - s) + s * t));
            for (al, wa) in x.iter().zip(&w) {
                let mid = dense_fn(g.matrix(), |t| t.powf(1.0 - al));
                for (u, wb) in x.iter().zip(&w) {
                    let be = al * u;
                    let left = dense_fn(rho.matrix(), |t| t.powf(al - be)) * &res;
                    let right = dense_fn(rho.matrix(), |t| t.powf(be)) * &res;
                    let weight = 2.0 * ws * wa * wb * al;
                    for (a, b) in v1.components().iter().zip(v2.components()) {
                        acc += (&left * a.matrix().adjoint() * &mid * b.matrix() * &right) * Complex64::new(weight, 0.0);
                    }
                }
            }
        }
        acc
    }

    #[test]
    fn rho_hat_is_graded_sharp() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let ctx = CliffordContext::new(3).unwrap();
        for _ in 0..5 {
            let rho = random_density(&ctx, &mut rng, 0.05);
            let calc = RhoCalculus::new(&rho).unwrap();
            let c = random_element(&ctx, &mut rng);
            let direct = sharp(&rho.element().grading(), rho.element(), &c).unwrap();
            assert!(calc.hat(&c).dist(&direct) < 1e-12);
            let inv = calc.rho_hat_inverse().apply(&calc.hat(&c));
            assert!(inv.dist(&c) < 1e-10);
        }
    }

    #[test]
    fn identity_density_gives_trivial_kernels() {
        let ctx = CliffordContext::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let calc = RhoCalculus::new(&Density::identity(&ctx)).unwrap();
        let v = random_field(&ctx, &mut rng);
        let c = random_element(&ctx, &mut rng);
        assert!(calc.hat(&c).dist(&c) < 1e-14);
        let mut expected = Element::zero(&ctx);
        for a in v.components() {
            expected += &(&a.adjoint() * a);
        }
        assert!(calc.flat(&v, &v).dist(&expected) < 1e-13);
    }

    #[test]
    fn flat_matches_triple_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for n in 1..=2 {
            let ctx = CliffordContext::new(n).unwrap();
            for _ in 0..2 {
                let rho = random_density(&ctx, &mut rng, 0.2);
                let calc = RhoCalculus::new(&rho).unwrap();
                let v1 = random_field(&ctx, &mut rng);
                let v2 = random_field(&ctx, &mut rng);
                let q = flat_quadrature(rho.element(), &v1, &v2);
                let got = calc.flat(&v1, &v2);
                let err = (got.matrix() - q).norm() / (ctx.dim() as f64).sqrt();
                assert!(err < 1e-8, "n={n}: {err:e}");
            }
        }
    }

    #[test]
    fn flat_reduces_to_product_for_even_commuting_data() {
        // rho = I + z i Q1 Q2 is grading-even; V = functions of rho commute with it
        let ctx = CliffordContext::new(2).unwrap();
        let c = [1.0.into(), 0.0.into(), 0.0.into(), Complex64::new(0.0, 0.6)];
        let rho = Density::from_coeffs(&ctx, &c).unwrap();
        let calc = RhoCalculus::new(&rho).unwrap();
        let s = rho.spectral();
        let v1 = VectorField::new(vec![s.apply_fn(|x| x * x), s.apply_fn(|x| 1.0 - x)]).unwrap();
        let v2 = VectorField::new(vec![s.apply_fn(|x| x.ln()), s.apply_fn(f64::sqrt)]).unwrap();
        let mut expected = Element::zero(&ctx);
        for (a, b) in v1.components().iter().zip(v2.components()) {
            expected += &(&a.adjoint() * b);
        }
        assert!(calc.flat(&v1, &v2).dist(&expected) < 1e-12);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let ctx = CliffordContext::new(3).unwrap();
        for _ in 0..5 {
            let rho = random_density(&ctx, &mut rng, 0.1);
            let sigma = random_traceless_self_adjoint(&ctx, &mut rng).scale_re(0.05);
            let c = random_element(&ctx, &mut rng);
            let calc = RhoCalculus::new(&rho).unwrap();
            let h = 1e-5;
            let plus = RhoCalculus::new(&Density::new(rho.element().axpy(h, &sigma)).unwrap()).unwrap();
            let minus = RhoCalculus::new(&Density::new(rho.element().axpy(-h, &sigma)).unwrap()).unwrap();
            let fd = (&plus.hat(&c) - &minus.hat(&c)).scale_re(0.5 / h);
            let exact = calc.rho_hat_derivative(&sigma).apply(&c);
            assert!(fd.dist(&exact) < 1e-7, "{:e}", fd.dist(&exact));
        }
    }

    #[test]
    fn n_hat_is_minus_heat_flow_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let ctx = CliffordContext::new(2).unwrap();
        let rho = random_density(&ctx, &mut rng, 0.1);
        let c = random_element(&ctx, &mut rng);
        let calc = RhoCalculus::new(&rho).unwrap();
        let h = 1e-6;
        let later = RhoCalculus::new(&rho.semigroup(h).unwrap()).unwrap();
        let fd = (&later.hat(&c) - &calc.hat(&c)).scale_re(1.0 / h);
        let exact = calc.n_hat().apply(&c);
        assert!((&fd + &exact).norm() < 1e-5);
    }

    #[test]
    fn n_hat_pairs_with_flat() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        for n in 1..=3 {
            let ctx = CliffordContext::new(n).unwrap();
            let rho = random_density(&ctx, &mut rng, 0.05);
            let calc = RhoCalculus::new(&rho).unwrap();
            let u = random_self_adjoint(&ctx, &mut rng);
            let g = u.grad();
            let lhs = calc.n_hat().apply_field(&g).inner(&g);
            let rhs = rho.element().number_op().inner(&calc.flat(&g, &g));
            assert!((lhs - rhs).norm() < 1e-10, "n={n}");
        }
    }
}
