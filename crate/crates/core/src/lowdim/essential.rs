use super::dim2::Scalars2;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, ExecMode};

/// The scalar inequalities behind two-mode convexity, as margins
/// `rhs - lhs` (a check holds when its margin is non-negative).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EssentialReport {
    pub scalars: Scalars2,
    /// `gamma >= 0`
    pub gamma_nonneg: f64,
    /// `2 gamma <= delta`
    pub two_gamma_le_delta: f64,
    /// `(1 - theta)^2 <= 4 delta`
    pub gap_le_four_delta: f64,
    /// `(1 - theta)^2 <= 2 delta`
    pub gap_le_two_delta: f64,
    /// `sqrt(1 - r^2) <= theta`
    pub geometric_le_log: f64,
    /// `theta <= 1`
    pub theta_le_one: f64,
    /// `sqrt(1 - r^2) <= theta / sqrt(2 - theta)`
    pub geometric_le_scaled_log: f64,
}

impl EssentialReport {
    pub fn margins(&self) -> [(&'static str, f64); 7] {
        [
            ("gamma_nonneg", self.gamma_nonneg),
            ("two_gamma_le_delta", self.two_gamma_le_delta),
            ("gap_le_four_delta", self.gap_le_four_delta),
            ("gap_le_two_delta", self.gap_le_two_delta),
            ("geometric_le_log", self.geometric_le_log),
            ("theta_le_one", self.theta_le_one),
            ("geometric_le_scaled_log", self.geometric_le_scaled_log),
        ]
    }

    /// True when every margin except `gap_le_two_delta` is at least `-tol`.
    pub fn required_hold(&self, tol: f64) -> bool {
        self.margins()
            .iter()
            .filter(|(name, _)| *name != "gap_le_two_delta")
            .all(|(_, m)| *m >= -tol)
    }
}

pub fn essential_inequalities(r: f64) -> Result<EssentialReport> {
    if !(r.abs() < 1.0) {
        return Err(Error::OutOfRange { what: "r", value: r });
    }
    let s = Scalars2::new(r);
    let geo = (1.0 - r * r).sqrt();
    let gap = (1.0 - s.theta).powi(2);
    Ok(EssentialReport {
        scalars: s,
        gamma_nonneg: s.gamma,
        two_gamma_le_delta: s.delta - 2.0 * s.gamma,
        gap_le_four_delta: 4.0 * s.delta - gap,
        gap_le_two_delta: 2.0 * s.delta - gap,
        geometric_le_log: s.theta - geo,
        theta_le_one: 1.0 - s.theta,
        geometric_le_scaled_log: scaled_log_margin(r, s.theta, geo),
    })
}

/// `theta / sqrt(2 - theta) - sqrt(1 - r^2)`, written as
/// `N / ((2 - theta)(theta / sqrt(2 - theta) + sqrt(1 - r^2)))` with
/// `N = theta^2 - (2 - theta)(1 - r^2)`. `N` is `O(r^4)` and cancels in
/// floating point near the origin, so it is taken from its Taylor series there.
fn scaled_log_margin(r: f64, theta: f64, geo: f64) -> f64 {
    let r2 = r * r;
    let num = if r.abs() < 0.05 {
        const COEFFS: [f64; 6] = [
            8.0 / 45.0,
            8.0 / 945.0,
            -8.0 / 1575.0,
            -3176.0 / 467775.0,
            -75448.0 / 11609325.0,
            -339128.0 / 58046625.0,
        ];
        r2 * r2 * COEFFS.iter().rev().fold(0.0, |acc, c| acc * r2 + c)
    } else {
        theta * theta - (2.0 - theta) * (1.0 - r2)
    };
    let w = 2.0 - theta;
    num / (w * (theta / w.sqrt() + geo))
}

/// `points` equally spaced values strictly inside `(-1 + margin, 1 - margin)`.
pub fn sweep_grid(points: usize, margin: f64) -> Vec<f64> {
    let lo = -1.0 + margin;
    let hi = 1.0 - margin;
    (0..points)
        .map(|k| lo + (hi - lo) * (k as f64 + 0.5) / points as f64)
        .collect()
}

pub fn essential_sweep(grid: &[f64], mode: ExecMode) -> Result<Vec<EssentialReport>> {
    map_indexed(mode, grid.len(), |k| essential_inequalities(grid[k]))
        .into_iter()
        .collect()
}
