use std::sync::Arc;

use crate::clifford::{CliffordContext, Element};
use crate::density::Density;
use crate::error::{Error, Result};
use crate::ode::{integrate as ode_integrate, OdeOptions};
use crate::quad::integrate;

/// Cut-off for the substituted variable `s = artanh y`; the neglected tail is below 1e-16.
const S_CAP: f64 = 20.0;

/// The one-mode density `I + y Q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dim1State {
    y: f64,
}

impl Dim1State {
    pub fn new(y: f64) -> Result<Self> {
        if !(y.abs() <= 1.0) {
            return Err(Error::OutOfRange { what: "y", value: y });
        }
        Ok(Dim1State { y })
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn is_strict(&self) -> bool {
        self.y.abs() < 1.0
    }

    pub fn density(&self, ctx: &Arc<CliffordContext>) -> Result<Density> {
        if ctx.n() != 1 {
            return Err(Error::ContextMismatch(ctx.n(), 1));
        }
        Density::new(Element::from_real_coeffs(ctx, &[1.0, self.y])?)
    }

    /// `((1 - y) log(1 - y) + (1 + y) log(1 + y)) / 2`
    pub fn entropy(&self) -> f64 {
        let xlogx = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
        0.5 * (xlogx(1.0 - self.y) + xlogx(1.0 + self.y))
    }
}

/// `artanh(y) / y`, with the limit 1 at the origin.
pub fn artanh_ratio(y: f64) -> f64 {
    if y.abs() < 1e-4 {
        let y2 = y * y;
        1.0 + y2 / 3.0 + y2 * y2 / 5.0
    } else {
        y.atanh() / y
    }
}

/// `sqrt(artanh(y) / y)`, the metric density of the one-mode distance.
pub fn dim1_integrand(y: f64) -> f64 {
    artanh_ratio(y).sqrt()
}

/// `s / tanh(s)`, even, equal to 1 at the origin.
fn s_coth_s(s: f64) -> f64 {
    if s.abs() < 1e-4 {
        let s2 = s * s;
        1.0 + s2 / 3.0 - s2 * s2 / 45.0
    } else {
        s / s.tanh()
    }
}

/// `int_{y0}^{y1} sqrt(artanh(y) / y) dy` for `y0, y1` in `[-1, 1]`, signed.
///
/// Integrated in `s = artanh y`, where the integrand becomes
/// `sqrt(s / tanh s) sech^2 s` and is smooth up to `|y| = 1`.
pub fn dim1_distance(y0: f64, y1: f64) -> Result<f64> {
    for y in [y0, y1] {
        if !(y.abs() <= 1.0) {
            return Err(Error::OutOfRange { what: "y", value: y });
        }
    }
    if y0 == y1 {
        return Ok(0.0);
    }
    let to_s = |y: f64| y.atanh().clamp(-S_CAP, S_CAP);
    let f = |s: f64| {
        let sech = 1.0 / s.cosh();
        s_coth_s(s).sqrt() * sech * sech
    };
    Ok(integrate(f, to_s(y0), to_s(y1), 1e-14))
}

/// Solves `y' = d sqrt(y / artanh(y))` with `y(0) = y0` at the times in `grid`
/// (starting at 0), `d` the one-mode distance from `y0` to `y1`; the solution
/// is the constant-speed geodesic and reaches `y1` at `t = 1`.
pub fn dim1_geodesic(y0: f64, y1: f64, grid: &[f64]) -> Result<Vec<f64>> {
    for y in [y0, y1] {
        if !(y.abs() < 1.0) {
            return Err(Error::OutOfRange { what: "y", value: y });
        }
    }
    if y0 == y1 {
        return Ok(vec![y0; grid.len()]);
    }
    let d = dim1_distance(y0, y1)?;
    let opts = OdeOptions {
        rtol: 1e-13,
        atol: 1e-15,
        ..Default::default()
    };
    let sol = ode_integrate(
        |_, y, dy| {
            if !(y[0].abs() < 1.0) {
                return Err(Error::LeftInterior { t: f64::NAN, min_eig: 1.0 - y[0].abs() });
            }
            dy[0] = d / dim1_integrand(y[0]);
            Ok(())
        },
        &[y0],
        grid,
        &opts,
    )?;
    Ok(sol.y.into_iter().map(|v| v[0]).collect())
}
