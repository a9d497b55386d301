//! The property suites behind `fermi-ot verify`.
//!
//! Every check produces margins, `>= 0` meaning the check holds. Failing
//! samples are written as witness files beside the output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use fermi_ot::clifford::{CliffordContext, Element};
use fermi_ot::exec::ExecMode;
use fermi_ot::geometry::{convexity_search, distance, talagrand_bound, DistanceOptions, LogSobolevReport};
use fermi_ot::json::ElementFile;
use fermi_ot::lowdim::{essential_sweep, sweep_grid};
use fermi_ot::means::ScalarFn;
use fermi_ot::operator_integral::{matrix_fn, ncd, sharp, sharp_hat_operator, sharp_operator};
use fermi_ot::report::{fmt_f64, write_csv, SCHEMA_VERSION};
use fermi_ot::sampling::{random_density, random_element, sample_rng, ChaCha8Rng};
use fermi_ot::Density;
use serde::Serialize;

use crate::commands::open_out;
use crate::config::{InjectedBug, RunConfig};
use crate::error::CliError;

/// Slack allowed in the distance inequalities.
const DISTANCE_TOL: f64 = 1e-6;
/// Slack allowed in the log-Sobolev inequalities.
const LOG_SOBOLEV_TOL: f64 = 1e-9;
/// Slack allowed below 1 for the relative Hessian eigenvalue.
const CONVEXITY_TOL: f64 = 1e-6;
/// Tolerance on the anticommutation relations.
const CAR_TOL: f64 = 1e-12;
/// Convexity is proven for `n <= 2`; larger `n` is reported, not enforced.
const CONVEXITY_PROVEN_MAX_N: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Reported for information; does not affect the exit code.
    Info,
}

/// One sample of one check, before witness files are assigned.
struct Sample {
    sample_id: usize,
    margin: f64,
    witness: Vec<(&'static str, Element)>,
}

impl Sample {
    fn new(sample_id: usize, margin: f64) -> Self {
        Sample {
            sample_id,
            margin,
            witness: Vec::new(),
        }
    }

    fn with(mut self, name: &'static str, e: &Element) -> Self {
        self.witness.push((name, e.clone()));
        self
    }
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub schema_version: u32,
    pub check: String,
    pub n: usize,
    pub sample_id: usize,
    pub margin: String,
    pub status: Status,
    pub witness_file: String,
}

#[derive(Serialize)]
struct WitnessFile<'a> {
    schema_version: u32,
    check: &'a str,
    n: usize,
    sample_id: usize,
    elements: BTreeMap<&'static str, ElementFile>,
}

struct Suite<'a> {
    cfg: &'a RunConfig,
    witness_dir: PathBuf,
    rows: Vec<CheckRow>,
}

impl Suite<'_> {
    fn record(&mut self, check: &str, n: usize, samples: Vec<Sample>, binding: bool) -> Result<(), CliError> {
        for s in samples {
            let ok = s.margin >= 0.0;
            let status = match (binding, ok) {
                (false, _) => Status::Info,
                (true, true) => Status::Pass,
                (true, false) => Status::Fail,
            };
            let witness_file = if status == Status::Fail && !s.witness.is_empty() {
                self.write_witness(check, n, s.sample_id, &s.witness)?
            } else {
                String::new()
            };
            self.rows.push(CheckRow {
                schema_version: SCHEMA_VERSION,
                check: check.to_string(),
                n,
                sample_id: s.sample_id,
                margin: fmt_f64(s.margin),
                status,
                witness_file,
            });
        }
        Ok(())
    }

    fn write_witness(
        &self,
        check: &str,
        n: usize,
        sample_id: usize,
        elements: &[(&'static str, Element)],
    ) -> Result<String, CliError> {
        let name = format!("verify-witness-{check}-n{n}-{sample_id}.json");
        let file = WitnessFile {
            schema_version: SCHEMA_VERSION,
            check,
            n,
            sample_id,
            elements: elements.iter().map(|(k, e)| (*k, ElementFile::from_element(e))).collect(),
        };
        let text = serde_json::to_string_pretty(&file).map_err(std::io::Error::other)?;
        std::fs::write(self.witness_dir.join(&name), text)?;
        Ok(name)
    }

    /// Independent stream for sample `k` of check `check` at `n` modes.
    fn rng(&self, check: u64, n: usize, k: usize) -> ChaCha8Rng {
        sample_rng(self.cfg.seed, (check << 40) | ((n as u64) << 32) | k as u64)
    }
}

fn car(ctx: &Arc<CliffordContext>) -> Vec<Sample> {
    vec![Sample::new(0, CAR_TOL - ctx.car_residual())]
}

fn inversion(suite: &Suite, ctx: &Arc<CliffordContext>) -> Result<Vec<Sample>, CliError> {
    let mut out = Vec::new();
    for k in 0..suite.cfg.samples {
        let mut rng = suite.rng(1, ctx.n(), k);
        let a = random_density(ctx, &mut rng, 0.05);
        let b = random_density(ctx, &mut rng, 0.05);
        let c = random_element(ctx, &mut rng);
        let (a, b) = (a.element(), b.element());
        let mut inverse = sharp_hat_operator(a, b)?;
        if suite.cfg.inject_bug == Some(InjectedBug::NegatedKernel) {
            inverse = inverse.negated();
        }
        let forward = sharp_operator(a, b)?;
        let err = inverse
            .apply(&forward.apply(&c))
            .dist(&c)
            .max(forward.apply(&inverse.apply(&c)).dist(&c))
            / c.norm();
        out.push(Sample::new(k, suite.cfg.tol - err).with("a", a).with("b", b).with("c", &c));
    }
    Ok(out)
}

fn chain_rules(suite: &Suite, ctx: &Arc<CliffordContext>) -> Result<Vec<Sample>, CliError> {
    let fns = [
        ScalarFn::PowerInt(2),
        ScalarFn::PowerInt(3),
        ScalarFn::PowerFrac(0.5),
        ScalarFn::Exp,
        ScalarFn::Log,
    ];
    let mut out = Vec::new();
    for k in 0..suite.cfg.samples {
        let mut rng = suite.rng(2, ctx.n(), k);
        let x = random_density(ctx, &mut rng, 0.05);
        let y = random_density(ctx, &mut rng, 0.05);
        let (x, y) = (x.element(), y.element());
        // grad rho = (Gamma(rho), rho) # grad log rho
        let log = matrix_fn(ScalarFn::Log, x)?;
        let mut err: f64 = 0.0;
        for i in 0..ctx.n() {
            let rhs = sharp(&x.grading(), x, &log.grad_i(i)?)?;
            err = err.max(x.grad_i(i)?.dist(&rhs));
        }
        // f(X) - f(Y) = Df(X, Y) * (X - Y)
        for f in fns {
            let lhs = &matrix_fn(f, x)? - &matrix_fn(f, y)?;
            err = err.max(lhs.dist(&ncd(f, x, y)?.apply(&(x - y))));
        }
        out.push(Sample::new(k, suite.cfg.tol - err).with("x", x).with("y", y));
    }
    Ok(out)
}

fn talagrand(suite: &Suite, ctx: &Arc<CliffordContext>) -> Result<Vec<Sample>, CliError> {
    let id = Density::identity(ctx);
    let opts = DistanceOptions::default();
    let mut out = Vec::new();
    for k in 0..suite.cfg.samples {
        let rho = random_density(ctx, &mut suite.rng(3, ctx.n(), k), 0.0);
        let d = distance(&rho, &id, &opts)?.distance;
        out.push(Sample::new(k, talagrand_bound(&rho) + DISTANCE_TOL - d).with("rho", rho.element()));
    }
    Ok(out)
}

fn log_sobolev(suite: &Suite, ctx: &Arc<CliffordContext>) -> Result<Vec<Sample>, CliError> {
    let mut out = Vec::new();
    for k in 0..suite.cfg.samples {
        let rho = random_density(ctx, &mut suite.rng(4, ctx.n(), k), suite.cfg.floor.max(1e-6));
        let rep = LogSobolevReport::new(&rho)?;
        out.push(Sample::new(k, rep.min_slack() + LOG_SOBOLEV_TOL).with("rho", rho.element()));
    }
    Ok(out)
}

fn convexity(suite: &Suite, n: usize) -> Result<Vec<Sample>, CliError> {
    let seed = suite.cfg.seed.wrapping_add(5);
    let rep = convexity_search(n, suite.cfg.samples, seed, suite.cfg.floor, ExecMode::available())?;
    let ctx = CliffordContext::new(n)?;
    Ok(rep
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            // a NaN margin (Hessian not evaluable) counts as a failure
            let margin = if v.is_nan() { f64::NEG_INFINITY } else { v - (1.0 - CONVEXITY_TOL) };
            let rho = fermi_ot::geometry::sweep_density(&ctx, seed, k as u64, suite.cfg.floor);
            Sample::new(k, margin).with("rho", rho.element())
        })
        .collect())
}

/// Minimum margin of each scalar inequality over a grid of `10^4` radii.
fn essential() -> Result<Vec<(&'static str, Sample)>, CliError> {
    let grid = sweep_grid(10_000, 0.0);
    let reports = essential_sweep(&grid, ExecMode::Sequential)?;
    let names = reports[0].margins().map(|(name, _)| name);
    Ok(names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let (k, m) = reports
                .iter()
                .map(|r| r.margins()[j].1)
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (k, m)| if m < acc.1 { (k, m) } else { acc });
            (*name, Sample::new(k, m))
        })
        .collect())
}

/// Runs every suite for `n = 1..=max_n`, writes the CSV and returns whether all binding checks passed.
pub fn run(cfg: &RunConfig) -> Result<bool, CliError> {
    let max_n = cfg.n_or(2);
    let witness_dir = cfg
        .out
        .as_deref()
        .and_then(Path::parent)
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let mut suite = Suite {
        cfg,
        witness_dir,
        rows: Vec::new(),
    };
    for n in 1..=max_n {
        let ctx = CliffordContext::new(n)?;
        suite.record("car", n, car(&ctx), true)?;
        let s = inversion(&suite, &ctx)?;
        suite.record("inversion", n, s, true)?;
        let s = chain_rules(&suite, &ctx)?;
        suite.record("chain_rule", n, s, true)?;
        let s = talagrand(&suite, &ctx)?;
        suite.record("talagrand", n, s, true)?;
        let s = log_sobolev(&suite, &ctx)?;
        suite.record("log_sobolev", n, s, true)?;
        let s = convexity(&suite, n)?;
        suite.record("convexity", n, s, n <= CONVEXITY_PROVEN_MAX_N)?;
    }
    for (name, s) in essential()? {
        // the stronger constant is reported, not enforced
        let binding = name != "gap_le_two_delta";
        suite.record(&format!("essential_{name}"), 2, vec![s], binding)?;
    }
    write_csv(&suite.rows, open_out(cfg.out.as_deref())?)?;
    Ok(summarize(&suite.rows))
}

/// Prints one line per (check, n) and every failure to stderr.
fn summarize(rows: &[CheckRow]) -> bool {
    let mut groups: Vec<(&str, usize, Vec<&CheckRow>)> = Vec::new();
    for r in rows {
        match groups.last_mut() {
            Some((c, n, v)) if *c == r.check && *n == r.n => v.push(r),
            _ => groups.push((&r.check, r.n, vec![r])),
        }
    }
    let mut all = true;
    for (check, n, v) in groups {
        let min = v
            .iter()
            .map(|r| r.margin.parse::<f64>().unwrap_or(f64::NAN))
            .fold(f64::INFINITY, |a, b| if b.is_nan() || b < a { b } else { a });
        let failed: Vec<_> = v.iter().filter(|r| r.status == Status::Fail).collect();
        let label = match (v[0].status, failed.is_empty()) {
            (Status::Info, _) => "info",
            (_, true) => "pass",
            _ => "FAIL",
        };
        eprintln!("{label:>4} {check} n={n}: min margin {}", fmt_f64(min));
        for r in &failed {
            all = false;
            eprintln!(
                "     failed sample {} (margin {}) witness {}",
                r.sample_id,
                r.margin,
                if r.witness_file.is_empty() { "-" } else { &r.witness_file }
            );
        }
    }
    all
}
