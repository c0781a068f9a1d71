use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use planar_spin::config::RunConfig;
use planar_spin::equation::{curvature_drift, Manifest, Trajectory};
use planar_spin::hamiltonian::{
    canonical_flow, compare_flows, energy_along, momentum_along, relative_drift, CanonicalState,
    CanonicalTrajectory, FlowComparison,
};
use planar_spin::suites::{run_suite, worldline, Suite, SuiteReport};
use planar_spin::variationality::Mutation;
use planar_spin::Error;
use serde::Serialize;

use crate::{Common, Format};

pub const EXIT_OK: u8 = 0;
pub const EXIT_BREACH: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;
pub const EXIT_IO: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

fn config_error(e: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_CONFIG, message: e.to_string() }
}

fn numeric_error(e: Error) -> Failure {
    Failure { code: EXIT_NUMERIC, message: e.to_string() }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_IO, message: format!("{}: {e}", path.display()) }
}

type Outcome = Result<u8, Failure>;

fn load(common: &Common) -> Result<RunConfig, Failure> {
    match &common.config {
        None => Ok(RunConfig::demo()),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
            RunConfig::from_json(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))
        }
    }
}

fn out_dir(common: &Common, config: &RunConfig) -> Option<PathBuf> {
    common.out.clone().or_else(|| config.out_dir.clone())
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), Failure> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| io_error(&path, e))?;
    Ok((path, BufWriter::new(file)))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, Failure> {
    let (path, mut w) = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_error(&path, e))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| io_error(&path, e))?;
    Ok(path)
}

fn write_with(dir: &Path, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> planar_spin::Result<()>) -> Result<PathBuf, Failure> {
    let (path, mut w) = create(dir, name)?;
    f(&mut w).map_err(|e| io_error(&path, e))?;
    w.flush().map_err(|e| io_error(&path, e))?;
    Ok(path)
}

#[derive(Debug, Serialize)]
struct Summary {
    samples: usize,
    final_t: f64,
    final_x: [f64; 2],
    final_hamiltonian: f64,
    final_momentum: [f64; 2],
    energy_drift: f64,
    momentum_drift: f64,
    curvature_drift: f64,
}

fn summarize(traj: &Trajectory, config: &RunConfig) -> Result<Summary, Failure> {
    let conv = &config.convention;
    let energy = energy_along(traj, conv).map_err(numeric_error)?;
    let momenta = momentum_along(traj, conv).map_err(numeric_error)?;
    let proper = traj.to_proper_time(conv).map_err(numeric_error)?;
    let p0 = momenta[0];
    let scale = p0.amax().max(1e-300);
    let last = traj.last();
    let p = momenta[momenta.len() - 1];
    Ok(Summary {
        samples: traj.len(),
        final_t: last.t,
        final_x: [last.x.x, last.x.y],
        final_hamiltonian: energy[energy.len() - 1],
        final_momentum: [p.x, p.y],
        energy_drift: relative_drift(energy.iter().copied()),
        momentum_drift: momenta.iter().map(|q| (q - p0).amax() / scale).fold(0.0, f64::max),
        curvature_drift: curvature_drift(&proper, conv).map_err(numeric_error)?,
    })
}

fn print_summary(s: &Summary) {
    println!("samples          {}", s.samples);
    println!("final t          {}", s.final_t);
    println!("final x          {} {}", s.final_x[0], s.final_x[1]);
    println!("final H          {}", s.final_hamiltonian);
    println!("final p          {} {}", s.final_momentum[0], s.final_momentum[1]);
    println!("energy drift     {:e}", s.energy_drift);
    println!("momentum drift   {:e}", s.momentum_drift);
    println!("curvature drift  {:e}", s.curvature_drift);
}

#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    config: &'a RunConfig,
    trajectory: Manifest,
    files: Vec<String>,
    summary: &'a Summary,
}

fn file_names(paths: &[PathBuf]) -> Vec<String> {
    paths.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect()
}

pub fn simulate(common: &Common, format: Format) -> Outcome {
    let config = load(common)?;
    let traj = worldline(&config).map_err(numeric_error)?;
    let summary = summarize(&traj, &config)?;
    let dir = out_dir(common, &config).unwrap_or_else(|| PathBuf::from("."));
    let data = match format {
        Format::Csv => write_with(&dir, "trajectory.csv", |w| traj.write_csv(w))?,
        Format::Json => write_json(&dir, "trajectory.json", &traj.records().collect::<Vec<_>>())?,
    };
    write_json(
        &dir,
        "manifest.json",
        &RunManifest {
            command: "simulate",
            config: &config,
            trajectory: traj.manifest(&config.convention),
            files: file_names(&[data]),
            summary: &summary,
        },
    )?;
    print_summary(&summary);
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mutation: Option<Mutation>,
    passed: bool,
    suites: Vec<SuiteReport>,
}

pub fn verify(common: &Common, suite: &str, seed: Option<u64>, mutation: Option<&str>) -> Outcome {
    let mut config = load(common)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let suites: Vec<Suite> = match suite {
        "all" => Suite::ALL.to_vec(),
        name => vec![Suite::parse(name).ok_or_else(|| {
            config_error(format!(
                "unknown suite `{name}` (expected all, {})",
                Suite::ALL.map(|s| s.name()).join(", ")
            ))
        })?],
    };
    let mutation = mutation
        .map(|m| {
            Mutation::parse(m).ok_or_else(|| {
                config_error(format!(
                    "unknown mutation `{m}` (expected {})",
                    Mutation::ALL.map(|m| m.name()).join(", ")
                ))
            })
        })
        .transpose()?;
    let reports = suites
        .iter()
        .map(|&s| run_suite(s, &config, mutation))
        .collect::<planar_spin::Result<Vec<_>>>()
        .map_err(numeric_error)?;
    let report = VerifyReport {
        seed: config.seed,
        mutation,
        passed: reports.iter().all(|r| r.passed),
        suites: reports,
    };
    for r in &report.suites {
        for c in &r.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            eprintln!("{tag} {}/{} max {:e} tol {:e} over {}", r.suite.name(), c.name, c.max_residual, c.tolerance, c.samples);
        }
    }
    match out_dir(common, &config) {
        Some(dir) => {
            write_json(&dir, "report.json", &report)?;
        }
        None => {
            let text = serde_json::to_string_pretty(&report).map_err(config_error)?;
            println!("{text}");
        }
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_BREACH })
}

#[derive(Debug, Serialize)]
struct CompareJson<'a> {
    max_deviation: f64,
    rows: &'a [planar_spin::hamiltonian::ComparisonRecord],
}

pub fn compare(common: &Common, format: Format, canonical_mu: Option<f64>, tolerance: Option<f64>) -> Outcome {
    let config = load(common)?;
    let conv = &config.convention;
    let mu = config.mu();
    let canonical_mu = canonical_mu.unwrap_or(mu);
    if !canonical_mu.is_finite() {
        return Err(config_error("canonical mu must be finite"));
    }
    let direct = worldline(&config).map_err(numeric_error)?;
    let state0 = CanonicalState::from_velocities(config.t_span[0], config.x0(), &config.v0(), &config.vp0(), mu, conv)
        .map_err(numeric_error)?;
    let canonical: CanonicalTrajectory =
        canonical_flow(&state0, canonical_mu, config.t_span[1], &config.integration, conv).map_err(numeric_error)?;
    let cmp: FlowComparison = compare_flows(&direct, &canonical).map_err(numeric_error)?;
    let dir = out_dir(common, &config).unwrap_or_else(|| PathBuf::from("."));
    let files = match format {
        Format::Csv => vec![
            write_with(&dir, "trajectory.csv", |w| direct.write_csv(w))?,
            write_with(&dir, "canonical.csv", |w| canonical.write_csv(w))?,
            write_with(&dir, "comparison.csv", |w| cmp.write_csv(w))?,
        ],
        Format::Json => vec![write_json(
            &dir,
            "comparison.json",
            &CompareJson { max_deviation: cmp.max_deviation, rows: &cmp.rows },
        )?],
    };
    #[derive(Serialize)]
    struct CompareManifest<'a> {
        command: &'a str,
        config: &'a RunConfig,
        canonical_mu: f64,
        max_deviation: f64,
        files: Vec<String>,
    }
    write_json(
        &dir,
        "manifest.json",
        &CompareManifest {
            command: "compare",
            config: &config,
            canonical_mu,
            max_deviation: cmp.max_deviation,
            files: file_names(&files),
        },
    )?;
    println!("max deviation    {:e}", cmp.max_deviation);
    match tolerance {
        Some(tol) if cmp.max_deviation.is_nan() || cmp.max_deviation >= tol => {
            eprintln!("deviation {:e} is not below {tol:e}", cmp.max_deviation);
            Ok(EXIT_BREACH)
        }
        _ => Ok(EXIT_OK),
    }
}
