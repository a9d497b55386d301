//! The subcommands other than `verify`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use fermi_ot::clifford::Element;
use fermi_ot::exec::ExecMode;
use fermi_ot::geometry::{
    convexity_search, distance, entropy, entropy_dissipation, fokker_planck_flow, geodesic_connect, DistanceOptions,
    GeodesicOptions, TangentBasis,
};
use fermi_ot::json::{density_from_json, element_to_json};
use fermi_ot::lowdim::{essential_sweep, sweep_grid};
use fermi_ot::report::{fmt_f64, write_csv, write_numeric_csv, SCHEMA_VERSION};
use fermi_ot::{Density, RhoCalculus};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

/// Smallest eigenvalue for which the geodesic command accepts an endpoint.
const GEODESIC_INTERIOR: f64 = 1e-6;

pub fn open_out(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::io(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

/// `path` with `suffix` appended to its file name.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_stem().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

pub fn read_density(path: &Path, cfg: &RunConfig) -> Result<Density, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let rho = density_from_json(&text).map_err(|e| CliError::input(path, e))?;
    if let Some(n) = cfg.n {
        if n != rho.n() {
            return Err(CliError::Usage(format!(
                "--n {n} does not match {} (n = {})",
                path.display(),
                rho.n()
            )));
        }
    }
    Ok(rho)
}

fn read_pair(cfg: &RunConfig) -> Result<(Density, Density), CliError> {
    let a = read_density(cfg.input()?, cfg)?;
    let b = read_density(cfg.input2()?, cfg)?;
    if a.n() != b.n() {
        return Err(CliError::Usage(format!(
            "inputs have different mode counts ({} and {})",
            a.n(),
            b.n()
        )));
    }
    Ok((a, b))
}

fn geodesic_options(cfg: &RunConfig) -> GeodesicOptions {
    GeodesicOptions {
        newton_tol: cfg.tol,
        grid: cfg.steps,
        ..Default::default()
    }
}

/// Rows `(t, S, dissipation, ||rho_t - I||, min_eig, e^{-2t} S(rho_0))`; the
/// dissipation is infinite while the density is singular.
pub fn flow(cfg: &RunConfig) -> Result<(), CliError> {
    let rho = read_density(cfg.input()?, cfg)?;
    let id = Element::identity(rho.ctx());
    let s0 = entropy(&rho);
    let mut rows = Vec::with_capacity(cfg.steps + 1);
    for k in 0..=cfg.steps {
        let t = cfg.t_max * k as f64 / cfg.steps as f64;
        let rt = fokker_planck_flow(&rho, t)?;
        let diss = RhoCalculus::new(&rt)
            .map(|c| entropy_dissipation(&c))
            .unwrap_or(f64::INFINITY);
        rows.push(vec![
            t,
            entropy(&rt),
            diss,
            rt.element().dist(&id),
            rt.min_eig(),
            (-2.0 * t).exp() * s0,
        ]);
    }
    let header = ["t", "entropy", "dissipation", "dist_to_identity", "min_eig", "entropy_decay_bound"];
    write_numeric_csv(&header, &rows, open_out(cfg.out.as_deref())?)?;
    Ok(())
}

#[derive(Serialize)]
pub struct DistanceReport {
    pub schema_version: u32,
    pub n: usize,
    pub distance: f64,
    pub action: f64,
    pub endpoint_residual: f64,
    pub regularization_used: Vec<f64>,
    pub regularized_distances: Vec<f64>,
    pub extrapolated: Vec<f64>,
    pub is_upper_bound: bool,
}

pub fn distance_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    let (a, b) = read_pair(cfg)?;
    let opts = DistanceOptions {
        // the library grid; --steps only shapes geodesic output
        geodesic: GeodesicOptions {
            newton_tol: cfg.tol,
            ..Default::default()
        },
        eps_list: cfg.eps_list.clone(),
        ..Default::default()
    };
    let r = distance(&a, &b, &opts)?;
    let report = DistanceReport {
        schema_version: SCHEMA_VERSION,
        n: a.n(),
        distance: r.distance,
        action: r.action,
        endpoint_residual: r.endpoint_residual,
        regularization_used: r.regularization,
        regularized_distances: r.regularized,
        extrapolated: r.extrapolated,
        is_upper_bound: r.is_upper_bound,
    };
    let mut out = open_out(cfg.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &report).map_err(io::Error::other)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// Rows `(t, S, speed^2, min_eig, rho_m..., u_m...)` with `rho_m`, `u_m` the
/// tangent coordinates of the density and the potential.
pub fn geodesic(cfg: &RunConfig) -> Result<(), CliError> {
    let (a, b) = read_pair(cfg)?;
    for (p, rho) in [(cfg.input()?, &a), (cfg.input2()?, &b)] {
        if rho.min_eig() < GEODESIC_INTERIOR {
            return Err(CliError::input(
                p,
                format!(
                    "smallest eigenvalue {:e} is below {GEODESIC_INTERIOR:e}; geodesics need interior endpoints \
                     (the distance command regularises boundary densities)",
                    rho.min_eig()
                ),
            ));
        }
    }
    let path = geodesic_connect(&a, &b, &geodesic_options(cfg))?;
    let basis = TangentBasis::new(a.ctx());
    let mut header: Vec<String> = ["t", "entropy", "speed_sq", "min_eig"].map(String::from).to_vec();
    header.extend((0..basis.dim()).map(|m| format!("rho_{}", basis.mask(m))));
    header.extend((0..basis.dim()).map(|m| format!("u_{}", basis.mask(m))));
    let rows: Vec<Vec<f64>> = (0..path.times.len())
        .map(|k| {
            let rho = &path.densities[k];
            let mut row = vec![path.times[k], entropy(rho), path.speeds_sq[k], rho.min_eig()];
            row.extend(basis.coords(rho.element()));
            row.extend(basis.coords(&path.potentials[k]));
            row
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_numeric_csv(&header, &rows, open_out(cfg.out.as_deref())?)?;
    eprintln!(
        "action {} endpoint residual {} newton iterations {}",
        fmt_f64(path.action),
        fmt_f64(path.endpoint_residual),
        path.newton_iterations
    );
    Ok(())
}

#[derive(Serialize)]
struct HessianRow {
    schema_version: u32,
    sample_id: usize,
    seed: u64,
    n: usize,
    floor: String,
    min_rel_eig: String,
    witness_file: String,
}

/// One row per sample; the row of the minimum names the witness density
/// file, written beside `--out` when an output file is given.
pub fn hessian(cfg: &RunConfig) -> Result<(), CliError> {
    let n = cfg.n_or(2);
    let rep = convexity_search(n, cfg.samples, cfg.seed, cfg.floor, ExecMode::available())?;
    let witness = match &cfg.out {
        Some(out) if rep.min.is_finite() => {
            let p = sibling(out, ".witness.json");
            std::fs::write(&p, element_to_json(rep.witness.element()))?;
            // relative to the CSV, so the output does not depend on where it is written
            p.file_name().unwrap_or_default().to_string_lossy().into_owned()
        }
        _ => String::new(),
    };
    let rows: Vec<HessianRow> = rep
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| HessianRow {
            schema_version: SCHEMA_VERSION,
            sample_id: k,
            seed: cfg.seed,
            n,
            floor: fmt_f64(cfg.floor),
            min_rel_eig: fmt_f64(*v),
            witness_file: if k == rep.argmin { witness.clone() } else { String::new() },
        })
        .collect();
    write_csv(&rows, open_out(cfg.out.as_deref())?)?;
    eprintln!(
        "n = {n}: min relative eigenvalue {} at sample {} ({} of {} samples failed)",
        fmt_f64(rep.min),
        rep.argmin,
        rep.failed,
        cfg.samples
    );
    Ok(())
}

pub fn sweep_essential(cfg: &RunConfig) -> Result<(), CliError> {
    let grid = sweep_grid(cfg.samples, 0.0);
    let reports = essential_sweep(&grid, ExecMode::Sequential)?;
    let mut header = vec!["r", "theta", "xi", "eta", "gamma", "delta"];
    header.extend(reports[0].margins().map(|(name, _)| name));
    let rows: Vec<Vec<f64>> = reports
        .iter()
        .map(|rep| {
            let s = rep.scalars;
            let mut row = vec![s.r, s.theta, s.xi, s.eta, s.gamma, s.delta];
            row.extend(rep.margins().map(|(_, m)| m));
            row
        })
        .collect();
    write_numeric_csv(&header, &rows, open_out(cfg.out.as_deref())?)?;
    for (k, (name, _)) in reports[0].margins().iter().enumerate() {
        let min = reports.iter().map(|r| r.margins()[k].1).fold(f64::INFINITY, f64::min);
        eprintln!("{name}: {} (min margin {})", if min >= 0.0 { "holds" } else { "fails" }, fmt_f64(min));
    }
    Ok(())
}
