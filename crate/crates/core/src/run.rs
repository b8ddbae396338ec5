//! Run configuration files and the file-producing commands behind the
//! command-line tool.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::benchmarks::{
    accuracy, contour, lattice, run_benchmark, write_contour_csv, Accuracy, BenchmarkCase, BenchmarkReport, CaseId,
    Grid, LATTICE_SIDE,
};
use crate::error::{Error, Result};
use crate::loss::LossBreakdown;
use crate::network::{Architecture, Parameters, ParamsFile};
use crate::physics::{Material, PlateState};
use crate::problem::{Domain, PlateProblem};
use crate::sampling::{sample_domain, CollocationSet, DEFAULT_INTERIOR_POINTS, DEFAULT_POINTS_ON_CIRCLE, DEFAULT_POINTS_PER_EDGE};
use crate::train::{train, write_history_csv, TrainConfig, TrainOutcome, TrainStatus};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const DIVERGED: i32 = 3;
    pub const IO: i32 = 4;
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::UnknownCase(_)
        | Error::Architecture(_)
        | Error::Material(_)
        | Error::ParamsFile(_)
        | Error::ShapeMismatch { .. }
        | Error::ZeroRigidity
        | Error::NonUnitNormal { .. } => exit::CONFIG,
        Error::Diverged { .. } | Error::NonFiniteLoss | Error::NonFiniteResidual { .. } => exit::DIVERGED,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => exit::IO,
        Error::ZeroNormOracle | Error::LengthMismatch(..) => exit::FAILURE,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub interior: usize,
    /// Per edge on rectangles, in total on disks. Defaults to 100 per edge or
    /// 400 on a circle.
    pub boundary: Option<usize>,
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            interior: DEFAULT_INTERIOR_POINTS,
            boundary: None,
            seed: 0,
        }
    }
}

impl SamplingConfig {
    pub fn boundary_for(&self, domain: &Domain) -> usize {
        self.boundary.unwrap_or(match domain {
            Domain::Rectangle { .. } => DEFAULT_POINTS_PER_EDGE,
            Domain::Disk { .. } => DEFAULT_POINTS_ON_CIRCLE,
        })
    }

    pub fn sample(&self, domain: &Domain) -> Result<CollocationSet> {
        sample_domain(domain, self.interior, self.boundary_for(domain), self.seed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExportConfig {
    pub history: bool,
    /// Lattice CSV with prediction and oracle, when the case has one.
    pub contour: bool,
    pub points: bool,
}

impl Default for ExportConfig {
    fn default() -> Self {
        ExportConfig {
            history: true,
            contour: true,
            points: false,
        }
    }
}

/// Everything a training run depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Benchmark id; supplies the problem and the oracle.
    #[serde(default)]
    pub case: Option<CaseId>,
    /// Custom problem, or numeric overrides for the benchmark problem.
    #[serde(default)]
    pub problem: Option<PlateProblem>,
    pub architecture: Architecture,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub export: ExportConfig,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        RunConfig::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.architecture
            .validate()
            .map_err(|e| Error::Config(format!("architecture: {e}")))?;
        self.train.validate()?;
        if self.sampling.interior == 0 || self.sampling.boundary == Some(0) {
            return Err(Error::Config("sampling: point counts must be positive".into()));
        }
        if self.case.is_none() && self.problem.is_none() {
            return Err(Error::Config("missing field `case` or `problem`".into()));
        }
        self.resolve()?;
        Ok(())
    }

    /// The problem to solve and, for benchmarks, its oracle.
    pub fn resolve(&self) -> Result<(PlateProblem, Option<BenchmarkCase>)> {
        match (self.case, &self.problem) {
            (Some(id), None) => {
                let case = BenchmarkCase::new(id);
                Ok((case.problem.clone(), Some(case)))
            }
            (Some(id), Some(p)) => {
                let case = BenchmarkCase::with_problem(id, p.clone())?;
                Ok((case.problem.clone(), Some(case)))
            }
            (None, Some(p)) => {
                p.validate()?;
                Ok((p.clone(), None))
            }
            (None, None) => Err(Error::Config("missing field `case` or `problem`".into())),
        }
    }

    /// A benchmark run with default settings.
    pub fn for_case(id: CaseId, architecture: Architecture) -> Self {
        RunConfig {
            case: Some(id),
            problem: None,
            architecture,
            sampling: SamplingConfig::default(),
            train: TrainConfig::default(),
            export: ExportConfig::default(),
            out_dir: None,
        }
    }

    /// Use one seed for both sampling and initialization.
    pub fn set_seed(&mut self, seed: u64) {
        self.sampling.seed = seed;
        self.train.seed = seed;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config: RunConfig,
    pub problem: PlateProblem,
    pub num_params: usize,
    pub interior_points: usize,
    pub boundary_points: usize,
    pub status: TrainStatus,
    pub final_loss: LossBreakdown,
    pub lbfgs_iterations: usize,
    pub adam_iterations: usize,
    pub evaluations: usize,
    pub center: [f64; 2],
    pub center_deflection: f64,
    #[serde(default)]
    pub accuracy: Option<Accuracy>,
    #[serde(default)]
    pub relative_l2: Option<f64>,
    pub wall_time_s: f64,
}

pub const PARAMS_FILE: &str = "params.json";
pub const HISTORY_FILE: &str = "loss_history.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CONTOUR_FILE: &str = "contour.csv";
pub const POINTS_FILE: &str = "points.csv";

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Result of [`cmd_train`].
pub struct TrainRun {
    pub outcome: TrainOutcome,
    pub summary: Summary,
}

/// Train from a config and write parameters, history, summary and optional
/// exports into `out_dir`. Outputs are written before a divergence is
/// reported as an error.
pub fn cmd_train(cfg: &RunConfig, out_dir: &Path) -> Result<TrainRun> {
    cfg.validate()?;
    let (problem, case) = cfg.resolve()?;
    let points = cfg.sampling.sample(&problem.domain)?;
    create_dir(out_dir)?;

    let start = Instant::now();
    let outcome = train(&problem, &points, &cfg.architecture, &cfg.train)?;
    let wall = start.elapsed().as_secs_f64();

    let params = &outcome.params;
    fs::write(out_dir.join(PARAMS_FILE), ParamsFile::new(params, Some(cfg.train.seed)).to_json()? + "\n")?;
    if cfg.export.history {
        write_history_csv(&outcome.history, fs::File::create(out_dir.join(HISTORY_FILE))?)?;
    }
    if cfg.export.points {
        points.write_csv(fs::File::create(out_dir.join(POINTS_FILE))?)?;
    }
    let acc = match &case {
        Some(c) => Some(accuracy(c, params)?),
        None => None,
    };
    if let (Some(c), true) = (&case, cfg.export.contour) {
        write_contour_csv(&contour(c, params), fs::File::create(out_dir.join(CONTOUR_FILE))?)?;
    }
    let center = problem.domain.center();
    let summary = Summary {
        config: cfg.clone(),
        problem,
        num_params: params.len(),
        interior_points: points.interior.len(),
        boundary_points: points.boundary.len(),
        status: outcome.status,
        final_loss: outcome.breakdown,
        lbfgs_iterations: outcome.lbfgs_iterations,
        adam_iterations: outcome.adam_iterations,
        evaluations: outcome.evaluations,
        center,
        center_deflection: params.forward_scalar(center[0], center[1]),
        relative_l2: acc.map(|a| a.relative_l2),
        accuracy: acc,
        wall_time_s: wall,
    };
    write_json(&out_dir.join(SUMMARY_FILE), &summary)?;
    if let TrainStatus::Diverged { iteration } = outcome.status {
        return Err(Error::Diverged { iteration });
    }
    Ok(TrainRun { outcome, summary })
}

/// Grid study for one case. Writes `report.json`, `report.csv` and one
/// contour CSV per trained cell.
pub fn cmd_benchmark(cfg: &RunConfig, grid: &Grid, out_dir: &Path) -> Result<BenchmarkReport> {
    let (_, case) = cfg.resolve()?;
    let case = case.ok_or_else(|| Error::Config("benchmark needs a `case`".into()))?;
    cfg.train.validate()?;
    let points = cfg.sampling.sample(&case.problem.domain)?;
    create_dir(out_dir)?;
    let run = run_benchmark(&case, grid, &points, &cfg.train)?;
    write_json(&out_dir.join("report.json"), &run.report)?;
    run.report.write_csv(fs::File::create(out_dir.join("report.csv"))?)?;
    if cfg.export.contour {
        for (cell, params) in run.report.cells.iter().zip(&run.params) {
            if let Some(p) = params {
                let name = format!("contour_{}x{}.csv", cell.layers, cell.neurons);
                write_contour_csv(&contour(&case, p), fs::File::create(out_dir.join(name))?)?;
            }
        }
    }
    Ok(run.report)
}

/// Columns of an evaluation CSV.
pub fn evaluation_header(with_exact: bool, with_moments: bool) -> Vec<&'static str> {
    let mut h = vec!["x", "y", "w"];
    if with_exact {
        h.extend(["w_exact", "abs_err"]);
    }
    if with_moments {
        h.extend(["Mx", "My", "Mxy", "Qx", "Qy"]);
    }
    h
}

/// Evaluate trained parameters on a `side × side` lattice over the domain
/// and write a CSV. With `case` set the oracle columns are added; with
/// `moments` the stress resultants are.
pub fn cmd_evaluate<W: std::io::Write>(
    params: &Parameters,
    domain: &Domain,
    material: &Material,
    case: Option<&BenchmarkCase>,
    side: usize,
    moments: bool,
    writer: W,
) -> Result<usize> {
    if side == 0 {
        return Err(Error::Config("lattice side must be positive".into()));
    }
    let pts = lattice(domain, side);
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(evaluation_header(case.is_some(), moments))?;
    let jets = if moments { params.forward_jets(&pts) } else { Vec::new() };
    for (i, &[x, y]) in pts.iter().enumerate() {
        let wp = params.forward_scalar(x, y);
        let mut row = vec![x.to_string(), y.to_string(), wp.to_string()];
        if let Some(c) = case {
            let we = c.exact(x, y);
            row.push(we.to_string());
            row.push((wp - we).abs().to_string());
        }
        if moments {
            let s = PlateState::from_jet(&jets[i], material);
            row.extend([s.mx, s.my, s.mxy, s.qx, s.qy].iter().map(f64::to_string));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(pts.len())
}

pub fn load_params(path: &Path) -> Result<Parameters> {
    let text = fs::read_to_string(path)?;
    ParamsFile::from_json(&text)?.parameters()
}

/// Write the collocation set described by `cfg`.
pub fn cmd_export_points(cfg: &RunConfig, out_dir: &Path) -> Result<CollocationSet> {
    let (problem, _) = cfg.resolve()?;
    let points = cfg.sampling.sample(&problem.domain)?;
    create_dir(out_dir)?;
    points.write_csv(fs::File::create(out_dir.join(POINTS_FILE))?)?;
    Ok(points)
}

/// Side of the default evaluation lattice.
pub const DEFAULT_LATTICE_SIDE: usize = LATTICE_SIDE;
