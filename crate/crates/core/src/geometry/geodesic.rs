use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::metric::MetricPoint;
use super::tangent::TangentBasis;
use crate::clifford::Element;
use crate::density::Density;
use crate::error::{Error, Result};
use crate::ode::{integrate, OdeOptions};
use crate::rho::RhoCalculus;

/// Integration floor on the smallest eigenvalue along a trajectory.
pub const INTERIOR_FLOOR: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct GeodesicOptions {
    pub ode: OdeOptions,
    pub floor: f64,
    /// Target for the endpoint residual in the shooting iteration.
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Number of grid intervals in the returned path.
    pub grid: usize,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        GeodesicOptions {
            ode: OdeOptions {
                rtol: 1e-11,
                atol: 1e-13,
                ..Default::default()
            },
            floor: INTERIOR_FLOOR,
            newton_tol: 1e-10,
            max_newton: 40,
            grid: 20,
        }
    }
}

/// A solution `(rho(t), U(t))` of the geodesic equations
/// `rho_dot + div[(Gamma(rho), rho) # grad U] = 0`,
/// `U_dot + 1/2 rho flat (grad U, grad U) = 0`, sampled on a time grid.
#[derive(Clone, Debug)]
pub struct GeodesicPath {
    pub times: Vec<f64>,
    pub densities: Vec<Density>,
    pub potentials: Vec<Element>,
    /// `||grad U(t)||_rho(t)^2` at each grid time; constant along a geodesic.
    pub speeds_sq: Vec<f64>,
    /// `int ||grad U||_rho^2 dt` by the trapezoidal rule.
    pub action: f64,
    /// `||rho(T) - target||` for connecting paths, zero for shooting.
    pub endpoint_residual: f64,
    pub newton_iterations: usize,
}

impl GeodesicPath {
    /// Arclength `int ||grad U||_rho dt`.
    pub fn length(&self) -> f64 {
        let mut acc = 0.0;
        for k in 1..self.times.len() {
            acc += 0.5 * (self.times[k] - self.times[k - 1]) * (self.speeds_sq[k].sqrt() + self.speeds_sq[k - 1].sqrt());
        }
        acc
    }

    /// Largest relative deviation of the speed from its initial value.
    pub fn speed_variation(&self) -> f64 {
        let s0 = self.speeds_sq[0];
        self.speeds_sq
            .iter()
            .map(|s| (s - s0).abs() / s0.max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }
}

/// The right-hand side of the geodesic system in tangent coordinates.
pub struct GeodesicSystem {
    basis: Arc<TangentBasis>,
    floor: f64,
}

impl GeodesicSystem {
    pub fn new(basis: Arc<TangentBasis>, floor: f64) -> Self {
        GeodesicSystem { basis, floor }
    }

    pub fn basis(&self) -> &Arc<TangentBasis> {
        &self.basis
    }

    /// `(rho_dot, U_dot)` at the state `(rho, U)`.
    pub fn rhs_elements(calc: &RhoCalculus, u: &Element) -> (Element, Element) {
        let g = u.grad();
        let rho_dot = calc.hat_field(&g).divergence().scale_re(-1.0);
        let u_dot = calc.flat(&g, &g).scale_re(-0.5);
        (rho_dot, u_dot)
    }

    /// State layout: `[r; u]`, density `I + sum r_m U_m`, potential `sum u_m U_m`.
    pub fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let dim = self.basis.dim();
        let (r, u) = y.split_at(dim);
        let calc = self.basis.calculus_at(r, self.floor).map_err(|e| match e {
            Error::NotStrictlyPositive(m) => Error::LeftInterior { t, min_eig: m },
            other => other,
        })?;
        let g = self.basis.combine_gradients(u);
        let rho_dot = calc.hat_field(&g).divergence();
        let flat = calc.flat(&g, &g);
        for (m, v) in self.basis.coords(&rho_dot).into_iter().enumerate() {
            dy[m] = -v;
        }
        for (m, v) in self.basis.coords(&flat).into_iter().enumerate() {
            dy[dim + m] = -0.5 * v;
        }
        Ok(())
    }

    fn integrate(&self, r0: &[f64], u0: &[f64], times: &[f64], opts: &GeodesicOptions) -> Result<Vec<Vec<f64>>> {
        let mut y0 = r0.to_vec();
        y0.extend_from_slice(u0);
        let sol = integrate(|t, y, dy| self.rhs(t, y, dy), &y0, times, &opts.ode)?;
        Ok(sol.y)
    }

    fn end_state(&self, r0: &[f64], u0: &[f64], opts: &GeodesicOptions) -> Result<Vec<f64>> {
        let mut ys = self.integrate(r0, u0, &[0.0, 1.0], opts)?;
        let mut y = ys.pop().expect("two output times");
        y.truncate(self.basis.dim());
        Ok(y)
    }

    fn path(&self, r0: &[f64], u0: &[f64], t_end: f64, opts: &GeodesicOptions) -> Result<GeodesicPath> {
        let dim = self.basis.dim();
        let grid = opts.grid.max(1);
        let times: Vec<f64> = (0..=grid).map(|k| t_end * k as f64 / grid as f64).collect();
        let ys = self.integrate(r0, u0, &times, opts)?;
        let mut densities = Vec::with_capacity(ys.len());
        let mut potentials = Vec::with_capacity(ys.len());
        let mut speeds_sq = Vec::with_capacity(ys.len());
        for y in &ys {
            let (r, u) = y.split_at(dim);
            let calc = RhoCalculus::from_trusted(self.basis.density_element(r))?;
            let g = self.basis.combine_gradients(u);
            speeds_sq.push(calc.inner_field(&g, &g).re);
            densities.push(calc.density().clone());
            potentials.push(self.basis.combine(u));
        }
        let mut action = 0.0;
        for k in 1..times.len() {
            action += 0.5 * (times[k] - times[k - 1]) * (speeds_sq[k] + speeds_sq[k - 1]);
        }
        Ok(GeodesicPath {
            times,
            densities,
            potentials,
            speeds_sq,
            action,
            endpoint_residual: 0.0,
            newton_iterations: 0,
        })
    }
}

/// `(rho_dot, U_dot)` for the geodesic equations at `(rho, U)`.
pub fn geodesic_rhs(rho: &Density, u: &Element) -> Result<(Element, Element)> {
    let calc = RhoCalculus::new(rho)?;
    Ok(GeodesicSystem::rhs_elements(&calc, u))
}

/// Integrates the geodesic equations from `(rho0, U0)` over `[0, t_end]`.
pub fn geodesic_shoot(rho0: &Density, u0: &Element, t_end: f64, opts: &GeodesicOptions) -> Result<GeodesicPath> {
    rho0.require_strict(opts.floor)?;
    let basis = TangentBasis::new(rho0.ctx());
    rho0.element().same_algebra(u0)?;
    super::tangent::check_tangent(u0)?;
    let sys = GeodesicSystem::new(basis.clone(), opts.floor);
    sys.path(&basis.coords(rho0.element()), &basis.coords(u0), t_end, opts)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

struct Newton<'a> {
    sys: &'a GeodesicSystem,
    r0: &'a [f64],
    opts: &'a GeodesicOptions,
    iterations: usize,
}

impl Newton<'_> {
    fn residual(&mut self, u: &[f64], target: &[f64]) -> Result<Vec<f64>> {
        let end = self.sys.end_state(self.r0, u, self.opts)?;
        Ok(end.iter().zip(target).map(|(a, b)| a - b).collect())
    }

    fn jacobian(&mut self, u: &[f64], f0: &[f64], target: &[f64]) -> Result<DMatrix<f64>> {
        let dim = u.len();
        let mut j = DMatrix::zeros(dim, dim);
        let mut up = u.to_vec();
        for c in 0..dim {
            let h = 1e-6 * u[c].abs().max(1e-2);
            up[c] = u[c] + h;
            let fp = self.residual(&up, target)?;
            up[c] = u[c];
            for r in 0..dim {
                j[(r, c)] = (fp[r] - f0[r]) / h;
            }
        }
        Ok(j)
    }

    /// Damped Newton on the initial potential, with Broyden updates between
    /// finite-difference Jacobians.
    fn solve(&mut self, mut u: Vec<f64>, target: &[f64]) -> Result<Vec<f64>> {
        let tol = self.opts.newton_tol;
        let mut f = self.residual(&u, target)?;
        let mut fnorm = norm(&f);
        let mut jac: Option<DMatrix<f64>> = None;
        for _ in 0..self.opts.max_newton {
            if fnorm < tol {
                return Ok(u);
            }
            self.iterations += 1;
            let j = match jac.take() {
                Some(j) => j,
                None => self.jacobian(&u, &f, target)?,
            };
            let Some(step) = j.clone().lu().solve(&DVector::from_column_slice(&f)) else {
                jac = None;
                continue;
            };
            let mut lambda = 1.0;
            let mut accepted = None;
            while lambda > 1e-4 {
                let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(a, s)| a - lambda * s).collect();
                if let Ok(ft) = self.residual(&trial, target) {
                    let n = norm(&ft);
                    if n < (1.0 - 0.25 * lambda) * fnorm {
                        accepted = Some((trial, ft, n));
                        break;
                    }
                }
                lambda *= 0.5;
            }
            let Some((un, fn_, nn)) = accepted else {
                return Err(Error::NewtonFailed {
                    iterations: self.iterations,
                    residual: fnorm,
                });
            };
            // keep a Broyden-updated Jacobian only while full steps make fast progress
            if lambda == 1.0 && nn < 0.5 * fnorm {
                let s = DVector::from_iterator(u.len(), un.iter().zip(&u).map(|(a, b)| a - b));
                let df = DVector::from_iterator(f.len(), fn_.iter().zip(&f).map(|(a, b)| a - b));
                let corr = (&df - &j * &s) / s.dot(&s);
                jac = Some(j + corr * s.transpose());
            }
            u = un;
            f = fn_;
            fnorm = nn;
        }
        if fnorm < tol {
            Ok(u)
        } else {
            Err(Error::NewtonFailed {
                iterations: self.iterations,
                residual: fnorm,
            })
        }
    }
}

/// Solves the two-point problem `rho(0) = rho0`, `rho(1) = rho1` by shooting
/// on the initial potential. The first guess is the potential of the chord
/// `rho1 - rho0` at the midpoint; if Newton fails from there the target is
/// moved gradually from `rho0` to `rho1`.
pub fn geodesic_connect(rho0: &Density, rho1: &Density, opts: &GeodesicOptions) -> Result<GeodesicPath> {
    rho0.element().same_algebra(rho1.element())?;
    rho0.require_strict(opts.floor)?;
    rho1.require_strict(opts.floor)?;
    let basis = TangentBasis::new(rho0.ctx());
    let sys = GeodesicSystem::new(basis.clone(), opts.floor);
    let r0 = basis.coords(rho0.element());
    let r1 = basis.coords(rho1.element());
    let mut newton = Newton {
        sys: &sys,
        r0: &r0,
        opts,
        iterations: 0,
    };

    let guess = |target: &[f64], from: &[f64]| -> Result<Vec<f64>> {
        let mid: Vec<f64> = from.iter().zip(target).map(|(a, b)| 0.5 * (a + b)).collect();
        let calc = Arc::new(basis.calculus_at(&mid, opts.floor)?);
        let mp = MetricPoint::with_basis(calc, basis.clone())?;
        let chord: Vec<f64> = target.iter().zip(from).map(|(a, b)| a - b).collect();
        Ok(mp.solve_coords(&chord))
    };

    let u0 = match newton.solve(guess(&r1, &r0)?, &r1) {
        Ok(u) => u,
        Err(first) => {
            let mut s: f64 = 0.0;
            let mut ds: f64 = 0.25;
            let mut u = vec![0.0; basis.dim()];
            let mut last_err = first;
            while s < 1.0 {
                if ds < 1.0 / 1024.0 {
                    return Err(last_err);
                }
                let s_next = (s + ds).min(1.0);
                let target: Vec<f64> = r0.iter().zip(&r1).map(|(a, b)| a + s_next * (b - a)).collect();
                // extrapolate the previous potential linearly in s
                let start: Vec<f64> = if s > 0.0 { u.iter().map(|x| x * s_next / s).collect() } else { guess(&target, &r0)? };
                match newton.solve(start, &target) {
                    Ok(un) => {
                        u = un;
                        s = s_next;
                        ds *= 1.5;
                    }
                    Err(e) => {
                        last_err = e;
                        ds *= 0.5;
                    }
                }
            }
            u
        }
    };

    let mut path = sys.path(&r0, &u0, 1.0, opts)?;
    let end = basis.coords(path.densities.last().expect("non-empty grid").element());
    path.endpoint_residual = norm(&end.iter().zip(&r1).map(|(a, b)| a - b).collect::<Vec<_>>());
    path.newton_iterations = newton.iterations;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::CliffordContext;
    use crate::sampling::{random_density, random_traceless_self_adjoint, sample_rng};

    #[test]
    fn zero_velocity_is_constant() {
        let ctx = CliffordContext::new(2).unwrap();
        let rho = random_density(&ctx, &mut sample_rng(31, 0), 0.05);
        let path = geodesic_shoot(&rho, &Element::zero(&ctx), 1.0, &GeodesicOptions::default()).unwrap();
        for r in &path.densities {
            assert!(r.element().dist(rho.element()) < 1e-14);
        }
        assert_eq!(path.action, 0.0);
    }

    #[test]
    fn shooting_keeps_speed_and_trace() {
        let ctx = CliffordContext::new(2).unwrap();
        let mut rng = sample_rng(32, 0);
        let rho = random_density(&ctx, &mut rng, 0.1);
        let u = random_traceless_self_adjoint(&ctx, &mut rng).scale_re(0.1);
        let path = geodesic_shoot(&rho, &u, 1.0, &GeodesicOptions::default()).unwrap();
        assert!(path.speed_variation() < 1e-7, "{}", path.speed_variation());
        for r in &path.densities {
            assert!((r.element().trace().re - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn connect_recovers_shot_endpoint() {
        let ctx = CliffordContext::new(2).unwrap();
        let mut rng = sample_rng(33, 0);
        let rho = random_density(&ctx, &mut rng, 0.1);
        let u = random_traceless_self_adjoint(&ctx, &mut rng).scale_re(0.2);
        let opts = GeodesicOptions::default();
        let shot = geodesic_shoot(&rho, &u, 1.0, &opts).unwrap();
        let target = shot.densities.last().unwrap();
        let conn = geodesic_connect(&rho, target, &opts).unwrap();
        assert!(conn.endpoint_residual < 1e-9);
        assert!(conn.potentials[0].dist(&u) < 1e-6);
        assert!((conn.action - shot.action).abs() < 1e-8);
    }

    #[test]
    fn leaving_the_interior_is_reported() {
        let ctx = CliffordContext::new(1).unwrap();
        let rho = Density::new(Element::from_real_coeffs(&ctx, &[1.0, 0.5]).unwrap()).unwrap();
        let u = Element::generator(&ctx, 0).unwrap().scale_re(5.0);
        let res = geodesic_shoot(&rho, &u, 1.0, &GeodesicOptions::default());
        assert!(matches!(res, Err(Error::LeftInterior { .. })), "{res:?}");
    }
}
