//! Adaptive Dormand-Prince 5(4) integrator for small dense systems.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen from the interval length when `None`.
    pub h_init: Option<f64>,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: None,
            h_min: 1e-14,
            max_steps: 200_000,
        }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions {
            rtol: tol,
            atol: tol * 1e-2,
            ..Default::default()
        }
    }
}

/// States at the requested output times.
#[derive(Clone, Debug)]
pub struct OdeSolution {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    /// Accepted steps over the whole run.
    pub steps: usize,
}

impl OdeSolution {
    pub fn last(&self) -> &[f64] {
        self.y.last().expect("solution has at least the initial state")
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate `y' = f(t, y)` from `t_eval[0]` through the increasing times in
/// `t_eval`, landing exactly on each of them. `f` may fail (for example when a
/// trial state leaves the domain); the step is then halved and retried, and
/// the error is returned once the step falls below `h_min`.
pub fn integrate<F>(mut f: F, y0: &[f64], t_eval: &[f64], opts: &OdeOptions) -> Result<OdeSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    assert!(!t_eval.is_empty(), "need at least the initial time");
    let dim = y0.len();
    let mut t = t_eval[0];
    let mut y = y0.to_vec();
    let mut out = OdeSolution {
        t: vec![t],
        y: vec![y.clone()],
        steps: 0,
    };
    let span = t_eval[t_eval.len() - 1] - t;
    if span <= 0.0 {
        return Ok(out);
    }
    let mut h = opts.h_init.unwrap_or(span * 1e-2);
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; dim]; 7];
    let mut ytmp = vec![0.0; dim];
    let mut ynew = vec![0.0; dim];
    f(t, &y, &mut k[0])?;
    let mut fsal_valid = true;

    for &target in &t_eval[1..] {
        while t < target {
            if out.steps >= opts.max_steps {
                return Err(Error::StepSizeUnderflow(t));
            }
            let last = target - t <= h * (1.0 + 1e-12);
            let hs = if last { target - t } else { h };
            if !fsal_valid {
                f(t, &y, &mut k[0])?;
                fsal_valid = true;
            }
            let mut stage_err = None;
            for s in 1..7 {
                for i in 0..dim {
                    let mut acc = y[i];
                    for (j, a) in A[s][..s].iter().enumerate() {
                        acc += hs * a * k[j][i];
                    }
                    ytmp[i] = acc;
                }
                if let Err(e) = f(t + C[s] * hs, &ytmp, &mut k[s]) {
                    stage_err = Some(e);
                    break;
                }
                if s == 6 {
                    ynew.copy_from_slice(&ytmp);
                }
            }
            if let Some(e) = stage_err {
                h = 0.5 * hs;
                if h < opts.h_min {
                    return Err(e);
                }
                continue;
            }
            let mut err = 0.0;
            for i in 0..dim {
                let mut e = 0.0;
                for (s, es) in E.iter().enumerate() {
                    e += es * k[s][i];
                }
                let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
                err += (hs * e / sc).powi(2);
            }
            let err = (err / dim.max(1) as f64).sqrt();
            if err <= 1.0 {
                t = if last { target } else { t + hs };
                y.copy_from_slice(&ynew);
                k.swap(0, 6);
                out.steps += 1;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // keep the step that was planned before clipping to an output time
                h = if last { h.max(hs * fac) } else { hs * fac };
            } else {
                h = hs * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                if h < opts.h_min {
                    return Err(Error::StepSizeUnderflow(t));
                }
            }
        }
        out.t.push(t);
        out.y.push(y.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let sol = integrate(
            |_, y, dy| {
                dy[0] = -y[0];
                Ok(())
            },
            &[1.0],
            &[0.0, 0.5, 1.0, 2.0],
            &OdeOptions::with_tol(1e-11),
        )
        .unwrap();
        for (t, y) in sol.t.iter().zip(&sol.y) {
            assert!((y[0] - (-t).exp()).abs() < 1e-10);
        }
        assert_eq!(sol.t, vec![0.0, 0.5, 1.0, 2.0]);
    }

    #[test]
    fn harmonic_oscillator_long_run() {
        let tf = 20.0;
        let sol = integrate(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
                Ok(())
            },
            &[1.0, 0.0],
            &[0.0, tf],
            &OdeOptions::with_tol(1e-12),
        )
        .unwrap();
        let y = sol.last();
        assert!((y[0] - tf.cos()).abs() < 1e-9);
        assert!((y[1] + tf.sin()).abs() < 1e-9);
    }

    #[test]
    fn failing_rhs_is_reported() {
        // y' = y^2 blows up at t = 1
        let res = integrate(
            |_, y, dy| {
                if y[0] > 1e6 {
                    return Err(Error::LeftInterior { t: 0.0, min_eig: -1.0 });
                }
                dy[0] = y[0] * y[0];
                Ok(())
            },
            &[1.0],
            &[0.0, 2.0],
            &OdeOptions::default(),
        );
        assert!(res.is_err());
    }
}
