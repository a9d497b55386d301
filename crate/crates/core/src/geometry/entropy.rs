use super::tangent::TangentBasis;
use crate::clifford::Element;
use crate::density::Density;
use crate::error::{Error, Result};
use crate::means::ScalarFn;
use crate::ode::{integrate, OdeOptions};
use crate::rho::RhoCalculus;

/// `S(rho) = tau[rho log rho]`, with `0 log 0 = 0`.
pub fn entropy(rho: &Density) -> f64 {
    let spec = rho.spectral();
    let d = spec.eigenvalues().len() as f64;
    spec.eigenvalues()
        .iter()
        .map(|&x| if x > 0.0 { x * x.ln() } else { 0.0 })
        .sum::<f64>()
        / d
}

/// `||grad log rho||_rho^2`, the entropy production along the heat flow.
pub fn entropy_dissipation(calc: &RhoCalculus) -> f64 {
    let g = log_density(calc).grad();
    calc.inner_field(&g, &g).re
}

pub(crate) fn log_density(calc: &RhoCalculus) -> Element {
    calc.spectral().apply_fn(f64::ln)
}

/// `P_t rho`; the fermionic Fokker-Planck equation `rho_dot = -N rho` solved exactly.
pub fn fokker_planck_flow(rho: &Density, t: f64) -> Result<Density> {
    if !(t >= 0.0) {
        return Err(Error::OutOfRange { what: "time", value: t });
    }
    rho.semigroup(t)
}

/// `rho_dot + div[(Gamma(rho), rho) # V]` for the velocity `V = -grad log rho`
/// of the heat flow; zero up to rounding.
pub fn heat_flow_continuity_residual(calc: &RhoCalculus) -> f64 {
    let rho_dot = calc.density().element().number_op().scale_re(-1.0);
    let v = log_density(calc).grad().scale_re(-1.0);
    (&rho_dot + &calc.hat_field(&v).divergence()).norm()
}

/// Integrates `rho_dot = div[(Gamma(rho), rho) # grad f'(rho)]`, the gradient
/// flow of `tau[f(rho)]`, reporting the density at each time of `times`
/// (which must start at 0). The spectrum must stay inside the domain of `f'`
/// and above `floor`.
pub fn gradient_flow_generic(
    rho0: &Density,
    f: ScalarFn,
    times: &[f64],
    opts: &OdeOptions,
    floor: f64,
) -> Result<Vec<Density>> {
    rho0.require_strict(floor.max(f64::MIN_POSITIVE))?;
    let basis = TangentBasis::new(rho0.ctx());
    let r0 = basis.coords(rho0.element());
    let sol = integrate(
        |t, r, dr| {
            let calc = basis.calculus_at(r, floor).map_err(|e| match e {
                Error::NotStrictlyPositive(m) => Error::LeftInterior { t, min_eig: m },
                other => other,
            })?;
            let vals = calc
                .spectral()
                .eigenvalues()
                .iter()
                .map(|&x| f.derivative(x))
                .collect::<Result<Vec<f64>>>()?;
            let fp = calc.spectral().apply_values(&vals);
            let rate = calc.hat_field(&fp.grad()).divergence();
            dr.copy_from_slice(&basis.coords(&rate));
            Ok(())
        },
        &r0,
        times,
        opts,
    )?;
    sol.y
        .iter()
        .map(|r| Density::from_trusted(basis.density_element(r)))
        .collect()
}

/// Both sides of three logarithmic Sobolev type inequalities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogSobolevReport {
    pub entropy: f64,
    /// `1/2 tau[(grad rho)^* grad log rho]`
    pub fisher_half: f64,
    /// `2 F(rho^1/2, rho^1/2)` with `F(B, A) = sum_i tau[(grad_i B)^* grad_i A]`
    pub sqrt_dirichlet_twice: f64,
    /// `F(rho^1/2, rho^1/2)`
    pub sqrt_dirichlet: f64,
    /// `1/4 tau[(grad log rho)^* grad rho]`
    pub fisher_quarter: f64,
}

impl LogSobolevReport {
    pub fn new(rho: &Density) -> Result<Self> {
        rho.require_strict(f64::MIN_POSITIVE)?;
        let spec = rho.spectral();
        let log = spec.apply_fn(f64::ln);
        let sqrt = spec.apply_fn(f64::sqrt);
        let fisher = rho.element().grad().inner(&log.grad()).re;
        let f_sqrt = sqrt.dirichlet_form(&sqrt).re;
        Ok(LogSobolevReport {
            entropy: entropy(rho),
            fisher_half: 0.5 * fisher,
            sqrt_dirichlet_twice: 2.0 * f_sqrt,
            sqrt_dirichlet: f_sqrt,
            fisher_quarter: 0.25 * fisher,
        })
    }

    /// Smallest of the three margins `rhs - lhs`.
    pub fn min_slack(&self) -> f64 {
        self.slacks().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn slacks(&self) -> [f64; 3] {
        [
            self.fisher_half - self.entropy,
            self.sqrt_dirichlet_twice - self.entropy,
            self.fisher_quarter - self.sqrt_dirichlet,
        ]
    }
}
