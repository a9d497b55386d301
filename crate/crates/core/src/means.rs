//! Logarithmic means and divided differences of the scalar functions used
//! by the operator calculus.
//!
//! Everything is routed through divided differences of `exp` in log
//! coordinates, which have cancellation-free evaluations:
//! `exp[a, b] = e^m sinh(h)/h` with `m` the midpoint and `h` the half-gap,
//! and a power series of complete homogeneous polynomials for `exp[a, b, c]`
//! when the three points are close.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// `sinh(h) / h`, accurate for all `h`.
fn sinhc(h: f64) -> f64 {
    if h.abs() < 1e-2 {
        let h2 = h * h;
        1.0 + h2 / 6.0 * (1.0 + h2 / 20.0 * (1.0 + h2 / 42.0 * (1.0 + h2 / 72.0)))
    } else {
        h.sinh() / h
    }
}

/// First divided difference of `exp`: `(e^a - e^b) / (a - b)`, `e^a` at `a = b`.
pub fn exp_divided_difference(a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    let h = 0.5 * (a - b);
    m.exp() * sinhc(h)
}

/// Second divided difference of `exp` at three points, symmetric in its arguments.
pub fn exp_divided_difference2(a: f64, b: f64, c: f64) -> f64 {
    let mut p = [a, b, c];
    p.sort_by(f64::total_cmp);
    let [lo, mid, hi] = p;
    if hi - lo >= 1.0 {
        return (exp_divided_difference(mid, hi) - exp_divided_difference(lo, mid)) / (hi - lo);
    }
    // exp[u1,u2,u3] = sum_k h_k(u) / (k+2)!, h_k the complete homogeneous polynomial
    let m = 0.5 * (lo + hi);
    let u = [lo - m, mid - m, hi - m];
    const TERMS: usize = 22;
    // h1[k] = u0^k, h2[k] = h_k(u0,u1), h3[k] = h_k(u0,u1,u2)
    let mut h1 = 1.0;
    let mut h2 = 1.0;
    let mut h3 = 1.0;
    let mut fact = 2.0;
    let mut sum = 0.5;
    for k in 1..TERMS {
        h1 *= u[0];
        h2 = h1 + u[1] * h2;
        h3 = h2 + u[2] * h3;
        fact *= (k + 2) as f64;
        sum += h3 / fact;
    }
    m.exp() * sum
}

fn check_positive(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveArgument(x))
    }
}

pub(crate) fn log_mean_unchecked(x: f64, y: f64) -> f64 {
    let h = 0.5 * (x.ln() - y.ln());
    x.sqrt() * y.sqrt() * sinhc(h)
}

pub(crate) fn log_mean3_unchecked(x: f64, y: f64, z: f64) -> f64 {
    2.0 * exp_divided_difference2(x.ln(), y.ln(), z.ln())
}

/// Logarithmic mean `(x - y) / (log x - log y)`, equal to `x` on the diagonal.
pub fn log_mean(x: f64, y: f64) -> Result<f64> {
    check_positive(x)?;
    check_positive(y)?;
    Ok(log_mean_unchecked(x, y))
}

/// Three-point mean `2 int_0^1 int_0^a x^{1-a} y^{a-b} z^b db da`.
///
/// Equals twice the second divided difference of `exp` at the logarithms of
/// the arguments, hence it is symmetric under every permutation.
pub fn log_mean3(x: f64, y: f64, z: f64) -> Result<f64> {
    check_positive(x)?;
    check_positive(y)?;
    check_positive(z)?;
    Ok(log_mean3_unchecked(x, y, z))
}

/// Scalar functions with stable divided differences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScalarFn {
    /// `t^k`
    PowerInt(u32),
    /// `t^p` on `(0, inf)`
    PowerFrac(f64),
    Exp,
    Log,
    /// `t log t`, extended by 0 at the origin
    XLogX,
}

impl ScalarFn {
    fn domain(&self, x: f64, strict: bool) -> Result<()> {
        let ok = match self {
            ScalarFn::PowerInt(_) | ScalarFn::Exp => x.is_finite(),
            ScalarFn::PowerFrac(_) | ScalarFn::Log => x > 0.0,
            ScalarFn::XLogX => x > 0.0 || (!strict && x == 0.0),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain {
                func: self.name(),
                value: x,
            })
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScalarFn::PowerInt(_) => "power_int",
            ScalarFn::PowerFrac(_) => "power_frac",
            ScalarFn::Exp => "exp",
            ScalarFn::Log => "log",
            ScalarFn::XLogX => "xlogx",
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.domain(x, false)?;
        Ok(match *self {
            ScalarFn::PowerInt(k) => x.powi(k as i32),
            ScalarFn::PowerFrac(p) => x.powf(p),
            ScalarFn::Exp => x.exp(),
            ScalarFn::Log => x.ln(),
            ScalarFn::XLogX if x == 0.0 => 0.0,
            ScalarFn::XLogX => x * x.ln(),
        })
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        self.domain(x, true)?;
        Ok(match *self {
            ScalarFn::PowerInt(0) => 0.0,
            ScalarFn::PowerInt(k) => k as f64 * x.powi(k as i32 - 1),
            ScalarFn::PowerFrac(p) => p * x.powf(p - 1.0),
            ScalarFn::Exp => x.exp(),
            ScalarFn::Log => 1.0 / x,
            ScalarFn::XLogX => 1.0 + x.ln(),
        })
    }

    /// `(f(x) - f(y)) / (x - y)`, `f'(x)` on the diagonal.
    pub fn divided_difference(&self, x: f64, y: f64) -> Result<f64> {
        self.domain(x, true)?;
        self.domain(y, true)?;
        Ok(self.divided_difference_unchecked(x, y))
    }

    pub(crate) fn divided_difference_unchecked(&self, x: f64, y: f64) -> f64 {
        match *self {
            ScalarFn::PowerInt(0) => 0.0,
            ScalarFn::PowerInt(k) => {
                // sum_l x^{k-1-l} y^l by Horner in y/x-free form
                let mut acc = 0.0;
                let mut ypow = 1.0;
                for l in 0..k {
                    acc += x.powi((k - 1 - l) as i32) * ypow;
                    ypow *= y;
                }
                acc
            }
            ScalarFn::PowerFrac(p) => p * log_mean_unchecked(x.powf(p), y.powf(p)) / log_mean_unchecked(x, y),
            ScalarFn::Exp => exp_divided_difference(x, y),
            ScalarFn::Log => 1.0 / log_mean_unchecked(x, y),
            ScalarFn::XLogX => x / log_mean_unchecked(x, y) + y.ln(),
        }
    }
}

impl fmt::Display for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarFn::PowerInt(k) => write!(f, "pow:{k}"),
            ScalarFn::PowerFrac(p) => write!(f, "pow:{p}"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for ScalarFn {
    type Err = Error;

    /// Accepts `exp`, `log`, `xlogx` and `pow:<exponent>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp" => Ok(ScalarFn::Exp),
            "log" => Ok(ScalarFn::Log),
            "xlogx" => Ok(ScalarFn::XLogX),
            _ => {
                let bad = || Error::Format(format!("unknown scalar function '{s}'"));
                let e = s.strip_prefix("pow:").ok_or_else(bad)?;
                if let Ok(k) = e.parse::<u32>() {
                    return Ok(ScalarFn::PowerInt(k));
                }
                let p: f64 = e.parse().map_err(|_| bad())?;
                Ok(ScalarFn::PowerFrac(p))
            }
        }
    }
}

/// The scalar kernels that appear in the double and triple operator integrals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeanKernel {
    LogMean,
    InverseLogMean,
    DividedDifference(ScalarFn),
}

impl MeanKernel {
    pub(crate) fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            MeanKernel::LogMean => log_mean_unchecked(x, y),
            MeanKernel::InverseLogMean => 1.0 / log_mean_unchecked(x, y),
            MeanKernel::DividedDifference(f) => f.divided_difference_unchecked(x, y),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, integrate_2d_simplex};
    use proptest::prelude::*;

    #[test]
    fn log_mean_examples() {
        assert_eq!(log_mean(1.0, 1.0).unwrap(), 1.0);
        let r: f64 = 0.5;
        let expected = r / r.atanh();
        assert!((log_mean(1.0 - r, 1.0 + r).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.910_239_226_626_837).abs() < 1e-14);
        assert!(log_mean(0.0, 1.0).is_err());
        assert!(log_mean(1.0, -2.0).is_err());
        assert!((log_mean3(1.0, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(log_mean3(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn log_mean_matches_quadrature_on_log_grid() {
        let grid: Vec<f64> = (0..13).map(|k| 10f64.powf(-3.0 + 0.5 * k as f64)).collect();
        for &x in &grid {
            for &y in &grid {
                let q = integrate(|a| x.powf(1.0 - a) * y.powf(a), 0.0, 1.0, 1e-14);
                let m = log_mean(x, y).unwrap();
                assert!(((m - q) / q).abs() < 1e-12, "x={x} y={y} m={m} q={q}");
            }
        }
    }

    #[test]
    fn log_mean3_matches_quadrature_on_log_grid() {
        let grid: Vec<f64> = (0..7).map(|k| 10f64.powf(-3.0 + k as f64)).chain([0.7, 1.3, 1.0 + 1e-9]).collect();
        for &x in &grid {
            for &y in &grid {
                for &z in &grid {
                    let q = 2.0
                        * integrate_2d_simplex(|a, b| x.powf(1.0 - a) * y.powf(a - b) * z.powf(b), 1e-14);
                    let m = log_mean3(x, y, z).unwrap();
                    assert!(((m - q) / q).abs() < 1e-12, "x={x} y={y} z={z} m={m} q={q}");
                }
            }
        }
    }

    #[test]
    fn divided_differences_on_the_diagonal() {
        for f in [
            ScalarFn::PowerInt(3),
            ScalarFn::PowerFrac(0.5),
            ScalarFn::Exp,
            ScalarFn::Log,
            ScalarFn::XLogX,
        ] {
            for x in [0.1, 1.0, 2.5] {
                let dd = f.divided_difference(x, x).unwrap();
                assert!((dd - f.derivative(x).unwrap()).abs() < 1e-13 * dd.abs().max(1.0));
            }
        }
    }

    #[test]
    fn parse_scalar_fn() {
        assert_eq!("pow:2".parse::<ScalarFn>().unwrap(), ScalarFn::PowerInt(2));
        assert_eq!("pow:0.5".parse::<ScalarFn>().unwrap(), ScalarFn::PowerFrac(0.5));
        assert_eq!("xlogx".parse::<ScalarFn>().unwrap(), ScalarFn::XLogX);
        assert!("sin".parse::<ScalarFn>().is_err());
    }

    fn positive() -> impl Strategy<Value = f64> {
        (-6.0f64..6.0).prop_map(f64::exp)
    }

    proptest! {
        #[test]
        fn log_mean_is_symmetric_and_between(x in positive(), y in positive()) {
            let m = log_mean(x, y).unwrap();
            prop_assert!((m - log_mean(y, x).unwrap()).abs() <= 1e-14 * m);
            prop_assert!(m >= x.min(y) * (1.0 - 1e-14) && m <= x.max(y) * (1.0 + 1e-14));
            // 1-homogeneity
            prop_assert!((log_mean(3.0 * x, 3.0 * y).unwrap() - 3.0 * m).abs() <= 1e-13 * m);
        }

        #[test]
        fn log_mean3_is_fully_symmetric(x in positive(), y in positive(), z in positive()) {
            let m = log_mean3(x, y, z).unwrap();
            for p in [(x, z, y), (y, x, z), (y, z, x), (z, x, y), (z, y, x)] {
                let q = log_mean3(p.0, p.1, p.2).unwrap();
                prop_assert!((m - q).abs() <= 1e-13 * m);
            }
            prop_assert!(m >= x.min(y).min(z) * (1.0 - 1e-13) && m <= x.max(y).max(z) * (1.0 + 1e-13));
        }

        #[test]
        fn divided_difference_matches_secant(x in positive(), y in positive()) {
            prop_assume!((x - y).abs() > 1e-3 * x.max(y));
            for f in [ScalarFn::PowerInt(2), ScalarFn::PowerInt(3), ScalarFn::PowerFrac(0.3), ScalarFn::Log, ScalarFn::XLogX] {
                let secant = (f.eval(x).unwrap() - f.eval(y).unwrap()) / (x - y);
                let dd = f.divided_difference(x, y).unwrap();
                prop_assert!((secant - dd).abs() <= 1e-9 * dd.abs().max(1.0), "{f}: {secant} vs {dd}");
            }
        }
    }
}
