use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::clifford::{CliffordContext, Element, VectorField};
use crate::density::Density;
use crate::error::{Error, Result};
use crate::means::{log_mean3_unchecked, log_mean_unchecked};

/// `I + x Q_1 + y Q_2 + i z Q_1 Q_2` for real `v = (x, y, z)`.
pub fn rho_vec(ctx: &Arc<CliffordContext>, v: [f64; 3]) -> Result<Element> {
    if ctx.n() != 2 {
        return Err(Error::ContextMismatch(ctx.n(), 2));
    }
    Element::from_coeffs(
        ctx,
        &[
            Complex64::new(1.0, 0.0),
            Complex64::new(v[0], 0.0),
            Complex64::new(v[1], 0.0),
            Complex64::new(0.0, v[2]),
        ],
    )
}

/// `u Q_1 + v Q_2 + i w Q_1 Q_2`, matching the two-mode tangent coordinates.
pub fn potential(ctx: &Arc<CliffordContext>, u: [f64; 3]) -> Result<Element> {
    let mut e = rho_vec(ctx, u)?;
    e = &e - &Element::identity(ctx);
    Ok(e)
}

/// A two-mode density `I + x Q_1 + y Q_2 + i z Q_1 Q_2`, `|(x, y, z)| <= 1`,
/// together with the scalars that enter the closed forms of the metric and
/// the entropy Hessian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dim2State {
    v: [f64; 3],
    r: f64,
}

impl Dim2State {
    pub fn new(v: [f64; 3]) -> Result<Self> {
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(r <= 1.0) {
            return Err(Error::OutOfRange { what: "|r|", value: r });
        }
        Ok(Dim2State { v, r })
    }

    /// Strict interior with `r > 0`, where the direction `(a, b, c)` is defined.
    fn require_generic(&self) -> Result<()> {
        if self.r == 0.0 || self.r >= 1.0 {
            return Err(Error::OutOfRange { what: "|r|", value: self.r });
        }
        Ok(())
    }

    pub fn vector(&self) -> [f64; 3] {
        self.v
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `(a, b, c) = (x, y, z) / r`
    pub fn direction(&self) -> Result<[f64; 3]> {
        self.require_generic()?;
        Ok(self.v.map(|x| x / self.r))
    }

    pub fn density(&self, ctx: &Arc<CliffordContext>) -> Result<Density> {
        Density::new(rho_vec(ctx, self.v)?)
    }

    pub fn scalars(&self) -> Result<Scalars2> {
        self.require_generic()?;
        Ok(Scalars2::new(self.r))
    }

    /// `M`, with `<grad U, grad U>_rho = u^T M u` for `U = u Q_1 + v Q_2 + i w Q_1 Q_2`.
    pub fn metric_matrix(&self) -> Result<Matrix3<f64>> {
        let [a, b, c] = self.direction()?;
        let th = self.scalars()?.theta;
        let d = th * (a * a + b * b) + c * c;
        Ok(Matrix3::new(
            d,
            0.0,
            (th - 1.0) * a * c,
            0.0,
            d,
            (th - 1.0) * b * c,
            (th - 1.0) * a * c,
            (th - 1.0) * b * c,
            a * a + b * b + th * (1.0 + c * c),
        ))
    }

    /// `(N1, N2)`: `<rho^ grad U, grad N U> = u^T N1 u` and
    /// `-1/2 <N rho, rho flat (grad U, grad U)> = u^T N2 u`.
    pub fn hess_matrices(&self) -> Result<(Matrix3<f64>, Matrix3<f64>)> {
        let [a, b, c] = self.direction()?;
        let s = self.scalars()?;
        let th = s.theta;
        let d = th * (a * a + b * b) + c * c;
        let n1 = Matrix3::new(
            d,
            0.0,
            1.5 * (th - 1.0) * a * c,
            0.0,
            d,
            1.5 * (th - 1.0) * b * c,
            1.5 * (th - 1.0) * a * c,
            1.5 * (th - 1.0) * b * c,
            2.0 * (a * a + b * b + th * (1.0 + c * c)),
        );
        let (g, dl) = (s.gamma, s.delta);
        let c2 = c * c;
        let aa = (1.0 - c2) * ((1.0 + c2) * dl - 2.0 * c2 * g);
        let bb = (1.0 + c2).powi(2) * dl + 2.0 * c2 * (1.0 - c2) * g;
        let cc = c * ((1.0 + c2) * dl + (1.0 - 2.0 * c2) * g);
        let n2 = Matrix3::new(aa, 0.0, a * cc, 0.0, aa, b * cc, a * cc, b * cc, bb);
        Ok((n1, n2))
    }

    /// `u^T (N1 + N2 - M) u`, the excess of the entropy Hessian over the metric.
    pub fn convexity_gap(&self, u: [f64; 3]) -> Result<f64> {
        let m = self.metric_matrix()?;
        let (n1, n2) = self.hess_matrices()?;
        let u = Vector3::from(u);
        Ok((u.transpose() * (n1 + n2 - m) * u)[(0, 0)])
    }

    /// `f(rho) = f(1 - r)/2 rho_{-n} + f(1 + r)/2 rho_{n}`, `n` the unit direction.
    pub fn matrix_fn(&self, ctx: &Arc<CliffordContext>, f: impl Fn(f64) -> f64) -> Result<Element> {
        let n = self.direction()?;
        let lo = rho_vec(ctx, n.map(|x| -x))?.scale_re(0.5 * f(1.0 - self.r));
        let hi = rho_vec(ctx, n)?.scale_re(0.5 * f(1.0 + self.r));
        Ok(&lo + &hi)
    }

    /// `rho_{e m}` and `rho_{e n}` for `e = -1, +1`, with `m = (-a, -b, c)`.
    fn sign_projections(&self, ctx: &Arc<CliffordContext>) -> Result<([Element; 2], [Element; 2])> {
        let [a, b, c] = self.direction()?;
        let m = [-a, -b, c];
        let n = [a, b, c];
        let neg = |v: [f64; 3]| v.map(|x| -x);
        Ok((
            [rho_vec(ctx, neg(m))?, rho_vec(ctx, m)?],
            [rho_vec(ctx, neg(n))?, rho_vec(ctx, n)?],
        ))
    }

    /// `(Gamma(rho), rho) # U` as a four-term sum over the spectral projections.
    pub fn sharp_explicit(&self, ctx: &Arc<CliffordContext>, u: &Element) -> Result<Element> {
        let (pm, pn) = self.sign_projections(ctx)?;
        let lam = [1.0 - self.r, 1.0 + self.r];
        let mut acc = Element::zero(ctx);
        for e1 in 0..2 {
            for e2 in 0..2 {
                let w = 0.25 * log_mean_unchecked(lam[e1], lam[e2]);
                acc = acc.axpy(w, &(&(&pm[e1] * u) * &pn[e2]));
            }
        }
        Ok(acc)
    }

    /// `rho flat (V1, V2)` as an eight-term sum over the spectral projections.
    pub fn flat_explicit(&self, ctx: &Arc<CliffordContext>, v1: &VectorField, v2: &VectorField) -> Result<Element> {
        let (pm, pn) = self.sign_projections(ctx)?;
        let lam = [1.0 - self.r, 1.0 + self.r];
        let mut acc = Element::zero(ctx);
        for (a, b) in v1.components().iter().zip(v2.components()) {
            let a_adj = a.adjoint();
            for e1 in 0..2 {
                for e2 in 0..2 {
                    for e3 in 0..2 {
                        let w = 0.125 * log_mean3_unchecked(lam[e1], lam[e2], lam[e3])
                            / log_mean_unchecked(lam[e1], lam[e3]);
                        let term = &(&(&(&pn[e1] * &a_adj) * &pm[e2]) * b) * &pn[e3];
                        acc = acc.axpy(w, &term);
                    }
                }
            }
        }
        Ok(acc)
    }

    /// Closed forms of `(Gamma(rho), rho) # X` for `X = I, i Q_1, i Q_2`.
    pub fn sharp_of_units(&self, ctx: &Arc<CliffordContext>) -> Result<[Element; 3]> {
        let [a, b, c] = self.direction()?;
        let th = self.scalars()?.theta;
        let r = self.r;
        let i = |x: f64| Complex64::new(0.0, x);
        let re = |x: f64| Complex64::new(x, 0.0);
        let of_id = [re(th * (a * a + b * b) + c * c), i(b * c * (1.0 - th)), i(-a * c * (1.0 - th)), i(c * r)];
        let of_q1 = [re(b * c * (1.0 - th)), i(th * (a * a + c * c) + b * b), i(-a * b * (1.0 - th)), i(b * r)];
        let of_q2 = [re(-a * c * (1.0 - th)), i(-a * b * (1.0 - th)), i(th * (b * b + c * c) + a * a), i(-a * r)];
        Ok([
            Element::from_coeffs(ctx, &of_id)?,
            Element::from_coeffs(ctx, &of_q1)?,
            Element::from_coeffs(ctx, &of_q2)?,
        ])
    }
}

/// The one-variable scalars of a two-mode density with Bloch radius `r`:
/// `theta = mu(1-r, 1+r)`, `xi = mu(1-r, 1-r, 1+r)`, `eta = mu(1-r, 1+r, 1+r)`,
/// `gamma = (r/4)(eta - xi)/theta`, `delta = (r/4)(xi/(1-r) - eta/(1+r))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scalars2 {
    pub r: f64,
    pub theta: f64,
    pub xi: f64,
    pub eta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl Scalars2 {
    /// Requires `|r| < 1`.
    pub fn new(r: f64) -> Self {
        debug_assert!(r.abs() < 1.0);
        let (lo, hi) = (1.0 - r, 1.0 + r);
        let theta = log_mean_unchecked(lo, hi);
        let xi = log_mean3_unchecked(lo, lo, hi);
        let eta = log_mean3_unchecked(lo, hi, hi);
        Scalars2 {
            r,
            theta,
            xi,
            eta,
            gamma: 0.25 * r * (eta - xi) / theta,
            delta: 0.25 * r * (xi / lo - eta / hi),
        }
    }
}
