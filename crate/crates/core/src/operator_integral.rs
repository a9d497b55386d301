//! Double operator integrals `sum_{j,k} K(a_j, b_k) P_j C Q_k` over the
//! spectral projectors of two self-adjoint elements.

use std::sync::Arc;

use nalgebra::DMatrix;
#[cfg(test)]
use num_complex::Complex64;

use crate::clifford::{CliffordContext, Element, VectorField};
use crate::error::{Error, Result};
use crate::means::{MeanKernel, ScalarFn};
use crate::spectral::SpectralDecomp;

/// A linear map `C -> sum_{j,k} K(a_j, b_k) P_j C Q_k`.
///
/// Stored in eigenvector coordinates: with `A = V_A diag(a) V_A^*` and
/// `B = V_B diag(b) V_B^*` the map is `V_A (K o (V_A^* C V_B)) V_B^*` where `o`
/// is the entrywise product. Clustered eigenvalues make `K` constant on each
/// block, so this equals the projector-pair sum exactly.
#[derive(Clone, Debug)]
pub struct SuperOperator {
    ctx: Arc<CliffordContext>,
    left: SpectralDecomp,
    right: SpectralDecomp,
    kernel: DMatrix<f64>,
}

impl SuperOperator {
    pub fn from_kernel(left: &SpectralDecomp, right: &SpectralDecomp, kernel: impl Fn(f64, f64) -> f64) -> Self {
        let (a, b) = (left.eigenvalues(), right.eigenvalues());
        SuperOperator {
            ctx: left.ctx().clone(),
            left: left.clone(),
            right: right.clone(),
            kernel: DMatrix::from_fn(a.len(), b.len(), |j, k| kernel(a[j], b[k])),
        }
    }

    pub fn from_mean(left: &SpectralDecomp, right: &SpectralDecomp, kernel: MeanKernel) -> Self {
        Self::from_kernel(left, right, |x, y| kernel.eval(x, y))
    }

    pub fn apply(&self, c: &Element) -> Element {
        let vl = self.left.eigenvectors();
        let vr = self.right.eigenvectors();
        let mut inner = vl.adjoint() * c.matrix() * vr;
        inner.zip_apply(&self.kernel, |z, k| *z *= k);
        Element::from_matrix_unchecked(&self.ctx, vl * inner * vr.adjoint())
    }

    pub fn apply_field(&self, v: &VectorField) -> VectorField {
        v.map(|c| self.apply(c))
    }

    /// Kernel value for the eigenvector pair `(j, k)`.
    pub fn kernel(&self) -> &DMatrix<f64> {
        &self.kernel
    }

    /// The projector-pair form: `(P_j, Q_k, K(a_j, b_k))` over distinct eigenvalues.
    pub fn terms(&self) -> Vec<(Element, Element, f64)> {
        let pl = self.left.projectors();
        let pr = self.right.projectors();
        let sl = cluster_starts(&self.left);
        let sr = cluster_starts(&self.right);
        let mut out = Vec::with_capacity(pl.len() * pr.len());
        for (p, &j) in pl.iter().zip(&sl) {
            for (q, &k) in pr.iter().zip(&sr) {
                out.push((p.clone(), q.clone(), self.kernel[(j, k)]));
            }
        }
        out
    }

    /// Apply via the explicit projector sum; slower, used to cross-check [`Self::apply`].
    pub fn apply_by_terms(&self, c: &Element) -> Element {
        let mut acc = Element::zero(&self.ctx);
        for (p, q, w) in self.terms() {
            acc += &(&(&p * c) * &q).scale_re(w);
        }
        acc
    }

    /// Same operator with the kernel negated.
    pub fn negated(&self) -> Self {
        SuperOperator {
            kernel: -&self.kernel,
            ..self.clone()
        }
    }
}

fn cluster_starts(s: &SpectralDecomp) -> Vec<usize> {
    let mut starts = Vec::new();
    let mut k = 0;
    for (_, mult) in s.distinct() {
        starts.push(k);
        k += mult;
    }
    starts
}

fn positive_decomp(a: &Element) -> Result<SpectralDecomp> {
    let s = SpectralDecomp::new(a)?;
    if s.min() <= 0.0 {
        return Err(Error::NotStrictlyPositive(s.min()));
    }
    Ok(s)
}

/// `(A, B) # C = int_0^1 A^{1-s} C B^s ds`
pub fn sharp(a: &Element, b: &Element, c: &Element) -> Result<Element> {
    Ok(sharp_operator(a, b)?.apply(c))
}

/// `(A, B) #^ C = int_0^inf (A + x)^{-1} C (B + x)^{-1} dx`, the inverse of `(A, B) #`.
pub fn sharp_hat(a: &Element, b: &Element, c: &Element) -> Result<Element> {
    Ok(sharp_hat_operator(a, b)?.apply(c))
}

pub fn sharp_operator(a: &Element, b: &Element) -> Result<SuperOperator> {
    Ok(SuperOperator::from_mean(&positive_decomp(a)?, &positive_decomp(b)?, MeanKernel::LogMean))
}

pub fn sharp_hat_operator(a: &Element, b: &Element) -> Result<SuperOperator> {
    Ok(SuperOperator::from_mean(
        &positive_decomp(a)?,
        &positive_decomp(b)?,
        MeanKernel::InverseLogMean,
    ))
}

fn check_domain(f: ScalarFn, s: &SpectralDecomp) -> Result<()> {
    for &x in s.eigenvalues() {
        f.derivative(x)?;
    }
    Ok(())
}

/// Non-commutative derivative `D f(X, Y) = sum f[x_j, y_k] P_j (x) Q_k`.
pub fn ncd(f: ScalarFn, x: &Element, y: &Element) -> Result<SuperOperator> {
    let sx = SpectralDecomp::new(x)?;
    let sy = SpectralDecomp::new(y)?;
    check_domain(f, &sx)?;
    check_domain(f, &sy)?;
    Ok(SuperOperator::from_mean(&sx, &sy, MeanKernel::DividedDifference(f)))
}

/// `f(A) = sum_j f(a_j) P_j`
pub fn matrix_fn(f: ScalarFn, a: &Element) -> Result<Element> {
    let s = SpectralDecomp::new(a)?;
    let vals = s.eigenvalues().iter().map(|&x| f.eval(x)).collect::<Result<Vec<f64>>>()?;
    Ok(s.apply_values(&vals))
}

/// `f'(A)`
pub fn matrix_fn_derivative(f: ScalarFn, a: &Element) -> Result<Element> {
    let s = SpectralDecomp::new(a)?;
    let vals = s
        .eigenvalues()
        .iter()
        .map(|&x| f.derivative(x))
        .collect::<Result<Vec<f64>>>()?;
    Ok(s.apply_values(&vals))
}

#[cfg(test)]
pub(crate) fn dense_fn(a: &DMatrix<Complex64>, f: impl Fn(f64) -> f64) -> DMatrix<Complex64> {
    let eig = nalgebra::SymmetricEigen::new(a.clone());
    let mut v = eig.eigenvectors.clone();
    for (c, &x) in eig.eigenvalues.iter().enumerate() {
        v.column_mut(c).scale_mut(f(x));
    }
    v * eig.eigenvectors.adjoint()
}
