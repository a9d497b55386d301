use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::context::CliffordContext;
use crate::error::{Error, Result};

/// Relative residual above which a matrix is rejected as lying outside the algebra.
const MEMBERSHIP_TOL: f64 = 1e-10;

/// An element of the Clifford algebra, held as a dense matrix with the
/// `Q^alpha` coefficient vector computed on first use.
#[derive(Clone)]
pub struct Element {
    ctx: Arc<CliffordContext>,
    matrix: DMatrix<Complex64>,
    coeffs: OnceLock<Vec<Complex64>>,
}

impl Element {
    pub(crate) fn from_matrix_unchecked(ctx: &Arc<CliffordContext>, matrix: DMatrix<Complex64>) -> Self {
        debug_assert_eq!(matrix.nrows(), ctx.dim());
        Element {
            ctx: Arc::clone(ctx),
            matrix,
            coeffs: OnceLock::new(),
        }
    }

    pub fn zero(ctx: &Arc<CliffordContext>) -> Self {
        let d = ctx.dim();
        Self::from_matrix_unchecked(ctx, DMatrix::zeros(d, d))
    }

    pub fn identity(ctx: &Arc<CliffordContext>) -> Self {
        let d = ctx.dim();
        Self::from_matrix_unchecked(ctx, DMatrix::identity(d, d))
    }

    /// The basis element `Q^alpha` for the bitmask `mask`.
    pub fn basis(ctx: &Arc<CliffordContext>, mask: usize) -> Result<Self> {
        if mask >= ctx.dim() {
            return Err(Error::IndexOutOfRange {
                index: mask,
                n: ctx.n(),
            });
        }
        Ok(Self::from_matrix_unchecked(ctx, ctx.basis_matrix(mask)))
    }

    /// The generator `Q_{i+1}`.
    pub fn generator(ctx: &Arc<CliffordContext>, i: usize) -> Result<Self> {
        Ok(Self::from_matrix_unchecked(ctx, ctx.generator(i)?.clone()))
    }

    /// `sum_alpha c[alpha] Q^alpha`.
    pub fn from_coeffs(ctx: &Arc<CliffordContext>, coeffs: &[Complex64]) -> Result<Self> {
        let d = ctx.dim();
        if coeffs.len() != d {
            return Err(Error::Dimension {
                expected: d,
                got: coeffs.len(),
            });
        }
        let mut m = DMatrix::zeros(d, d);
        for (mask, &c) in coeffs.iter().enumerate() {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mono = ctx.basis_monomial(mask);
            for (r, (&col, &p)) in mono.cols.iter().zip(&mono.phases).enumerate() {
                m[(r, col)] += c * p;
            }
        }
        let e = Self::from_matrix_unchecked(ctx, m);
        let _ = e.coeffs.set(coeffs.to_vec());
        Ok(e)
    }

    /// Real-coefficient convenience wrapper around [`Element::from_coeffs`].
    pub fn from_real_coeffs(ctx: &Arc<CliffordContext>, coeffs: &[f64]) -> Result<Self> {
        let c: Vec<Complex64> = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_coeffs(ctx, &c)
    }

    /// Wrap a dense matrix, rejecting matrices that are not in the span of the `Q^alpha`.
    pub fn from_matrix(ctx: &Arc<CliffordContext>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let d = ctx.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Dimension {
                expected: d * d,
                got: matrix.nrows() * matrix.ncols(),
            });
        }
        let e = Self::from_matrix_unchecked(ctx, matrix);
        let rebuilt = Self::from_coeffs(ctx, e.coeffs())?;
        let scale = e.matrix.norm().max(1.0);
        let residual = (&rebuilt.matrix - &e.matrix).norm() / scale;
        if residual > MEMBERSHIP_TOL {
            return Err(Error::NotInAlgebra(residual));
        }
        Ok(e)
    }

    pub fn ctx(&self) -> &Arc<CliffordContext> {
        &self.ctx
    }

    pub fn n(&self) -> usize {
        self.ctx.n()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    /// Coefficients `c_alpha = <Q^alpha, A>` indexed by mask.
    pub fn coeffs(&self) -> &[Complex64] {
        self.coeffs.get_or_init(|| {
            let inv = 1.0 / self.ctx.dim() as f64;
            (0..self.ctx.dim())
                .map(|mask| self.ctx.basis_monomial(mask).trace_inner(&self.matrix) * inv)
                .collect()
        })
    }

    pub fn coeff(&self, mask: usize) -> Complex64 {
        self.coeffs()[mask]
    }

    pub fn same_algebra(&self, other: &Element) -> Result<()> {
        if self.ctx.n() != other.ctx.n() {
            return Err(Error::ContextMismatch(self.n(), other.n()));
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Element {
        Self::from_matrix_unchecked(&self.ctx, self.matrix.adjoint())
    }

    /// Normalised trace `2^-n tr(A)`.
    pub fn trace(&self) -> Complex64 {
        self.matrix.trace() / self.ctx.dim() as f64
    }

    /// `tau(A^* B)`
    pub fn inner(&self, other: &Element) -> Complex64 {
        self.matrix.dotc(&other.matrix) / self.ctx.dim() as f64
    }

    /// `tau(A^* A)^{1/2}`
    pub fn norm(&self) -> f64 {
        self.matrix.norm() / (self.ctx.dim() as f64).sqrt()
    }

    /// `|| A - A^* ||` in the trace norm.
    pub fn self_adjoint_residual(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).norm() / (self.ctx.dim() as f64).sqrt()
    }

    pub fn hermitian_part(&self) -> Element {
        let m = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        Self::from_matrix_unchecked(&self.ctx, m)
    }

    pub fn scale(&self, s: Complex64) -> Element {
        Self::from_matrix_unchecked(&self.ctx, &self.matrix * s)
    }

    pub fn scale_re(&self, s: f64) -> Element {
        self.scale(Complex64::new(s, 0.0))
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Element) -> Element {
        Self::from_matrix_unchecked(&self.ctx, &self.matrix + &other.matrix * Complex64::new(s, 0.0))
    }

    /// `|| self - other ||` in the trace norm.
    pub fn dist(&self, other: &Element) -> f64 {
        (self - other).norm()
    }

    /// Largest coefficient deviation, useful for identity checks.
    pub fn max_abs_diff(&self, other: &Element) -> f64 {
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub(crate) fn map_matrix(&self, f: impl FnOnce(&DMatrix<Complex64>) -> DMatrix<Complex64>) -> Element {
        Self::from_matrix_unchecked(&self.ctx, f(&self.matrix))
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 1e-14)
            .map(|(mask, c)| format!("({:.6}{:+.6}i)Q^{mask:b}", c.re, c.im))
            .collect();
        write!(f, "Element(n={}; {})", self.n(), terms.join(" + "))
    }
}

fn check_pair(a: &Element, b: &Element) {
    assert_eq!(
        a.n(),
        b.n(),
        "arithmetic between elements of different algebras"
    );
}

impl Add for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        check_pair(self, rhs);
        Element::from_matrix_unchecked(&self.ctx, &self.matrix + &rhs.matrix)
    }
}

impl Add for Element {
    type Output = Element;
    fn add(self, rhs: Element) -> Element {
        &self + &rhs
    }
}

impl AddAssign<&Element> for Element {
    fn add_assign(&mut self, rhs: &Element) {
        check_pair(self, rhs);
        self.matrix += &rhs.matrix;
        self.coeffs = OnceLock::new();
    }
}

impl Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        check_pair(self, rhs);
        Element::from_matrix_unchecked(&self.ctx, &self.matrix - &rhs.matrix)
    }
}

impl Sub for Element {
    type Output = Element;
    fn sub(self, rhs: Element) -> Element {
        &self - &rhs
    }
}

impl Mul for &Element {
    type Output = Element;
    fn mul(self, rhs: &Element) -> Element {
        check_pair(self, rhs);
        Element::from_matrix_unchecked(&self.ctx, &self.matrix * &rhs.matrix)
    }
}

impl Mul for Element {
    type Output = Element;
    fn mul(self, rhs: Element) -> Element {
        &self * &rhs
    }
}

impl Mul<f64> for &Element {
    type Output = Element;
    fn mul(self, rhs: f64) -> Element {
        self.scale_re(rhs)
    }
}

impl Mul<Complex64> for &Element {
    type Output = Element;
    fn mul(self, rhs: Complex64) -> Element {
        self.scale(rhs)
    }
}

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.scale_re(-1.0)
    }
}

impl Neg for Element {
    type Output = Element;
    fn neg(self) -> Element {
        -&self
    }
}
