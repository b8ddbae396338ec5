//! The four reference plates, their analytical deflections, and the error
//! metrics and grid studies built on them.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Field, Jet};
use crate::loss::LossBreakdown;
use crate::network::{Architecture, Parameters};
use crate::physics::{boundary_residuals, interior_residual, BoundaryCondition, Material};
use crate::problem::{Domain, Load, PlateProblem};
use crate::sampling::{sample_domain, CollocationSet, DEFAULT_INTERIOR_POINTS, DEFAULT_POINTS_ON_CIRCLE, DEFAULT_POINTS_PER_EDGE};
use crate::train::{train, TrainConfig, TrainStatus};

/// Galerkin coefficients of the clamped square, in units of `b⁴p/D`, ordered
/// `a11, a12, a21, a22`.
pub const GALERKIN_COEFFS: [f64; 4] = [0.318682766, 0.038459815, 0.038459815, 0.008281438];
/// Centre deflection of the clamped square in units of `pa⁴/D`.
pub const CLAMPED_SQUARE_CENTER: f64 = 0.00126;
/// Ritz estimate of the same quantity.
pub const CLAMPED_SQUARE_CENTER_RITZ: f64 = 0.00133;
/// Odd terms per direction kept in the Winkler series.
pub const DEFAULT_WINKLER_TERMS: usize = 25;
pub const DEFAULT_FOUNDATION: f64 = 100.0;
/// Bound on the truncated Winkler series' deflection error relative to the
/// centre deflection, measured against a partial sum with twice the terms.
pub const WINKLER_TRUNCATION_TOLERANCE: f64 = 1e-6;
/// Points per side of the evaluation lattice.
pub const LATTICE_SIDE: usize = 101;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseId {
    #[serde(rename = "ss-square")]
    SsSquare,
    #[serde(rename = "clamped-square")]
    ClampedSquare,
    #[serde(rename = "clamped-circular")]
    ClampedCircular,
    #[serde(rename = "ss-winkler")]
    SsWinkler,
}

impl CaseId {
    pub const ALL: [CaseId; 4] = [CaseId::SsSquare, CaseId::ClampedSquare, CaseId::ClampedCircular, CaseId::SsWinkler];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseId::SsSquare => "ss-square",
            CaseId::ClampedSquare => "clamped-square",
            CaseId::ClampedCircular => "clamped-circular",
            CaseId::SsWinkler => "ss-winkler",
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownCase(s.to_string()))
    }
}

/// A plate problem with a known deflection field.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkCase {
    pub id: CaseId,
    pub problem: PlateProblem,
    /// Odd terms per direction for the Winkler series; unused otherwise.
    pub series_terms: usize,
}

impl BenchmarkCase {
    /// The case with unit geometry, rigidity and load, `ν = 0.3`, and
    /// `k = 100` for the foundation.
    pub fn new(id: CaseId) -> Self {
        let material = Material::from_rigidity(1.0, 0.3).expect("valid defaults");
        let square = Domain::Rectangle { a: 1.0, b: 1.0 };
        let problem = match id {
            CaseId::SsSquare => PlateProblem {
                material,
                domain: square,
                load: Load::Sinusoidal { p0: 1.0 },
                foundation: 0.0,
                boundary: vec![BoundaryCondition::simply_supported(); 4],
            },
            CaseId::ClampedSquare => PlateProblem {
                material,
                domain: square,
                load: Load::Uniform { p: 1.0 },
                foundation: 0.0,
                boundary: vec![BoundaryCondition::clamped(); 4],
            },
            CaseId::ClampedCircular => PlateProblem {
                material,
                domain: Domain::Disk { radius: 1.0 },
                load: Load::Uniform { p: 1.0 },
                foundation: 0.0,
                boundary: vec![BoundaryCondition::clamped()],
            },
            CaseId::SsWinkler => PlateProblem {
                material,
                domain: square,
                load: Load::Uniform { p: 1.0 },
                foundation: DEFAULT_FOUNDATION,
                boundary: vec![BoundaryCondition::simply_supported(); 4],
            },
        };
        BenchmarkCase {
            id,
            problem,
            series_terms: DEFAULT_WINKLER_TERMS,
        }
    }

    /// Rebuild the case around a modified problem. Only the numeric values
    /// may change; the oracle is tied to the geometry, load type and supports.
    pub fn with_problem(id: CaseId, problem: PlateProblem) -> Result<Self> {
        problem.validate()?;
        let reference = BenchmarkCase::new(id).problem;
        let same_shape = std::mem::discriminant(&problem.domain) == std::mem::discriminant(&reference.domain)
            && std::mem::discriminant(&problem.load) == std::mem::discriminant(&reference.load)
            && problem.boundary.iter().map(|b| b.kind()).eq(reference.boundary.iter().map(|b| b.kind()))
            && problem.boundary.iter().all(|b| *b == b.homogeneous())
            && (problem.foundation > 0.0) == (reference.foundation > 0.0);
        if !same_shape {
            return Err(Error::Config(format!(
                "problem does not match the '{id}' benchmark: domain, load type and supports are fixed"
            )));
        }
        Ok(BenchmarkCase {
            id,
            problem,
            series_terms: DEFAULT_WINKLER_TERMS,
        })
    }

    fn rect(&self) -> (f64, f64) {
        match self.problem.domain {
            Domain::Rectangle { a, b } => (a, b),
            Domain::Disk { radius } => (radius, radius),
        }
    }

    fn load_magnitude(&self) -> f64 {
        match self.problem.load {
            Load::Uniform { p } => p,
            Load::Sinusoidal { p0 } => p0,
        }
    }

    fn rigidity(&self) -> f64 {
        self.problem.material.rigidity
    }

    /// Analytical deflection over any [`Field`], so the same expression
    /// yields values and exact derivative jets.
    pub fn oracle<F: Field>(&self, x: F, y: F) -> F {
        let d = self.rigidity();
        let p = self.load_magnitude();
        match self.id {
            CaseId::SsSquare => {
                let (a, b) = self.rect();
                let s = 1.0 / (a * a) + 1.0 / (b * b);
                let amp = p / (PI.powi(4) * d * s * s);
                (x * (PI / a)).sin() * (y * (PI / b)).sin() * amp
            }
            CaseId::ClampedSquare => {
                let (a, b) = self.rect();
                let xi = x * (1.0 / a);
                let eta = y * (1.0 / b);
                let one = F::constant(1.0);
                let sq = |u: F| u * u;
                // ξ²(1−ξ)² and ξ⁴(1−ξ)²
                let base_x = sq(xi) * sq(one - xi);
                let base_y = sq(eta) * sq(one - eta);
                let hi_x = base_x * sq(xi);
                let hi_y = base_y * sq(eta);
                let [a11, a12, a21, a22] = GALERKIN_COEFFS;
                let scale = b.powi(4) * p / d;
                (base_x * base_y * a11 + base_x * hi_y * a12 + hi_x * base_y * a21 + hi_x * hi_y * a22) * scale
            }
            CaseId::ClampedCircular => {
                let Domain::Disk { radius } = self.problem.domain else {
                    unreachable!("circular case has a disk domain")
                };
                let s = F::constant(radius * radius) - (x * x + y * y);
                s * s * (p / (64.0 * d))
            }
            CaseId::SsWinkler => self.winkler_series(x, y, self.series_terms),
        }
    }

    /// Partial sum over `m, n ∈ {1, 3, …, 2N−1}`.
    pub fn winkler_series<F: Field>(&self, x: F, y: F, terms: usize) -> F {
        let (a, b) = self.rect();
        let d = self.rigidity();
        let p = self.load_magnitude();
        let k = self.problem.foundation;
        let sx: Vec<F> = (0..terms).map(|i| (x * ((2 * i + 1) as f64 * PI / a)).sin()).collect();
        let sy: Vec<F> = (0..terms).map(|j| (y * ((2 * j + 1) as f64 * PI / b)).sin()).collect();
        let mut w = F::constant(0.0);
        for (i, sxm) in sx.iter().enumerate() {
            let m = (2 * i + 1) as f64;
            for (j, syn) in sy.iter().enumerate() {
                let n = (2 * j + 1) as f64;
                let s = m * m / (a * a) + n * n / (b * b);
                let c = 16.0 * p / (PI * PI * m * n * (PI.powi(4) * d * s * s + k));
                w = w + *sxm * *syn * c;
            }
        }
        w
    }

    /// Load the oracle balances exactly. For the truncated Winkler series this
    /// is the uniform load's double sine series truncated at the same order.
    pub fn oracle_load(&self, x: f64, y: f64) -> f64 {
        match self.id {
            CaseId::SsWinkler => {
                let (a, b) = self.rect();
                let p = self.load_magnitude();
                let mut q = 0.0;
                for i in 0..self.series_terms {
                    let m = (2 * i + 1) as f64;
                    for j in 0..self.series_terms {
                        let n = (2 * j + 1) as f64;
                        q += 16.0 * p / (PI * PI * m * n) * (m * PI * x / a).sin() * (n * PI * y / b).sin();
                    }
                }
                q
            }
            _ => self.problem.load_at(x, y),
        }
    }

    pub fn exact(&self, x: f64, y: f64) -> f64 {
        self.oracle(x, y)
    }

    pub fn exact_jet(&self, x: f64, y: f64) -> Jet {
        self.oracle(Jet::variable_x(x, y), Jet::variable_y(x, y))
    }

    pub fn center(&self) -> [f64; 2] {
        self.problem.domain.center()
    }

    /// Reference centre deflection. For the clamped square this is the
    /// classical `0.00126 pa⁴/D`, not the Galerkin oracle.
    pub fn reference_center(&self) -> f64 {
        match self.id {
            CaseId::ClampedSquare => {
                let (a, _) = self.rect();
                CLAMPED_SQUARE_CENTER * self.load_magnitude() * a.powi(4) / self.rigidity()
            }
            _ => {
                let [cx, cy] = self.center();
                self.exact(cx, cy)
            }
        }
    }

    /// Collocation points with the default counts.
    pub fn default_points(&self, seed: u64) -> Result<CollocationSet> {
        let n_bnd = match self.problem.domain {
            Domain::Rectangle { .. } => DEFAULT_POINTS_PER_EDGE,
            Domain::Disk { .. } => DEFAULT_POINTS_ON_CIRCLE,
        };
        sample_domain(&self.problem.domain, DEFAULT_INTERIOR_POINTS, n_bnd, seed)
    }

    /// Largest relative residual of the oracle at `n` random interior points
    /// and `n` boundary points spread over every segment.
    pub fn oracle_residuals(&self, n: usize, seed: u64) -> Result<OracleResiduals> {
        let mat = &self.problem.material;
        let set = sample_domain(&self.problem.domain, n, n.div_ceil(self.problem.domain.num_segments()), seed)?;
        let len = self.problem.domain.length_scale();
        let w_ref = self.reference_center().abs();
        let load_ref = self.load_magnitude().abs();
        let mut interior: f64 = 0.0;
        for &[x, y] in &set.interior {
            let r = interior_residual(&self.exact_jet(x, y), self.oracle_load(x, y), self.problem.foundation, mat)?;
            interior = interior.max(r.abs() / load_ref);
        }
        let mut boundary: f64 = 0.0;
        for p in &set.boundary {
            let bc = &self.problem.boundary[p.segment];
            let (r1, r2) = boundary_residuals(&self.exact_jet(p.x, p.y), bc, p.normal, mat)?;
            // w, slope and moment scales
            let (s1, s2) = match bc {
                BoundaryCondition::Clamped { .. } => (w_ref, w_ref / len),
                BoundaryCondition::SimplySupported { .. } => (w_ref, mat.rigidity * w_ref / (len * len)),
                BoundaryCondition::Free { .. } => {
                    (mat.rigidity * w_ref / (len * len), mat.rigidity * w_ref / len.powi(3))
                }
            };
            boundary = boundary.max(r1.abs() / s1).max(r2.abs() / s2);
        }
        Ok(OracleResiduals { interior, boundary })
    }

    /// Largest `|w_N − w_2N| / |w_centre|` over `n` random interior points,
    /// where `w_N` is the series with this case's term count. Zero for the
    /// closed-form oracles.
    pub fn truncation_error(&self, n: usize, seed: u64) -> Result<f64> {
        if self.id != CaseId::SsWinkler {
            return Ok(0.0);
        }
        let set = sample_domain(&self.problem.domain, n, 1, seed)?;
        let scale = self.reference_center().abs();
        Ok(set
            .interior
            .iter()
            .map(|&[x, y]| {
                let coarse = self.winkler_series(x, y, self.series_terms);
                let fine = self.winkler_series(x, y, 2 * self.series_terms);
                (coarse - fine).abs() / scale
            })
            .fold(0.0, f64::max))
    }

    /// Uniform `101 × 101` lattice over the bounding box; for the disk only
    /// the nodes inside or on the rim are kept.
    pub fn lattice(&self) -> Vec<[f64; 2]> {
        lattice(&self.problem.domain, LATTICE_SIDE)
    }
}

/// Uniform `side × side` lattice over the domain's bounding box, restricted
/// to the closed domain.
pub fn lattice(domain: &Domain, side: usize) -> Vec<[f64; 2]> {
    let [x0, x1, y0, y1] = domain.bounds();
    let at = |lo: f64, hi: f64, i: usize| {
        if side == 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * i as f64 / (side - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(side * side);
    for j in 0..side {
        for i in 0..side {
            let (x, y) = (at(x0, x1, i), at(y0, y1, j));
            let inside = match *domain {
                Domain::Rectangle { .. } => true,
                Domain::Disk { radius } => x * x + y * y <= radius * radius * (1.0 + 1e-12),
            };
            if inside {
                out.push([x, y]);
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleResiduals {
    /// Max `|D∇⁴w + kw − p| / |p|`.
    pub interior: f64,
    /// Max boundary residual scaled by the natural unit of each condition.
    pub boundary: f64,
}

/// `‖pred − exact‖₂ / ‖exact‖₂`.
pub fn relative_l2(predicted: &[f64], exact: &[f64]) -> Result<f64> {
    if predicted.len() != exact.len() {
        return Err(Error::LengthMismatch(predicted.len(), exact.len()));
    }
    let den: f64 = exact.iter().map(|e| e * e).sum();
    if den == 0.0 {
        return Err(Error::ZeroNormOracle);
    }
    let num: f64 = predicted.iter().zip(exact).map(|(p, e)| (p - e) * (p - e)).sum();
    Ok((num / den).sqrt())
}

/// One lattice node of a contour export.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourRow {
    pub x: f64,
    pub y: f64,
    pub w_pred: f64,
    pub w_exact: f64,
    pub abs_err: f64,
}

pub fn contour(case: &BenchmarkCase, params: &Parameters) -> Vec<ContourRow> {
    case.lattice()
        .into_iter()
        .map(|[x, y]| {
            let w_pred = params.forward_scalar(x, y);
            let w_exact = case.exact(x, y);
            ContourRow {
                x,
                y,
                w_pred,
                w_exact,
                abs_err: (w_pred - w_exact).abs(),
            }
        })
        .collect()
}

pub fn write_contour_csv<W: Write>(rows: &[ContourRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_contour_csv<R: std::io::Read>(reader: R) -> Result<Vec<ContourRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let rows = r.deserialize().collect::<std::result::Result<Vec<ContourRow>, _>>()?;
    Ok(rows)
}

/// Accuracy of a trained network against the case oracle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub center_pred: f64,
    pub center_ref: f64,
    pub center_rel_err: f64,
    pub max_pred: f64,
    pub max_exact: f64,
    pub relative_l2: f64,
}

pub fn accuracy(case: &BenchmarkCase, params: &Parameters) -> Result<Accuracy> {
    let pts = case.lattice();
    let pred: Vec<f64> = pts.iter().map(|&[x, y]| params.forward_scalar(x, y)).collect();
    let exact: Vec<f64> = pts.iter().map(|&[x, y]| case.exact(x, y)).collect();
    let [cx, cy] = case.center();
    let center_pred = params.forward_scalar(cx, cy);
    let center_ref = case.reference_center();
    let abs_max = |v: &[f64]| v.iter().copied().fold(0.0, |m: f64, w| if w.abs() > m.abs() { w } else { m });
    Ok(Accuracy {
        center_pred,
        center_ref,
        center_rel_err: ((center_pred - center_ref) / center_ref).abs(),
        max_pred: abs_max(&pred),
        max_exact: abs_max(&exact),
        relative_l2: relative_l2(&pred, &exact)?,
    })
}

/// Layers × neurons study.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub layers: Vec<usize>,
    pub neurons: Vec<usize>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            layers: vec![1, 2, 3, 4],
            neurons: vec![20, 30, 40, 50, 60],
        }
    }
}

impl FromStr for Grid {
    type Err = Error;
    /// `"1,2,3x20,40,60"`: layer counts, then neuron counts.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("grid must look like '1,2,3x20,40,60', got '{s}'"));
        let (l, n) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let list = |t: &str| -> Result<Vec<usize>> {
            t.split(',')
                .map(|v| v.trim().parse::<usize>().map_err(|_| bad()))
                .collect()
        };
        let grid = Grid {
            layers: list(l)?,
            neurons: list(n)?,
        };
        if grid.layers.is_empty() || grid.neurons.is_empty() {
            return Err(bad());
        }
        Ok(grid)
    }
}

impl Grid {
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.layers
            .iter()
            .flat_map(move |&l| self.neurons.iter().map(move |&n| (l, n)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub layers: usize,
    pub neurons: usize,
    pub num_params: usize,
    pub status: String,
    pub final_loss: Option<f64>,
    pub center_pred: Option<f64>,
    pub center_ref: f64,
    pub center_rel_err: Option<f64>,
    pub max_pred: Option<f64>,
    pub max_exact: Option<f64>,
    pub relative_l2: Option<f64>,
    pub wall_time_s: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub case: CaseId,
    pub seed: u64,
    pub cells: Vec<CellReport>,
}

/// Report plus the trained parameters of every cell that produced any.
#[derive(Clone, Debug)]
pub struct BenchmarkRun {
    pub report: BenchmarkReport,
    pub params: Vec<Option<Parameters>>,
    pub breakdowns: Vec<Option<LossBreakdown>>,
}

pub const REPORT_HEADER: [&str; 14] = [
    "case",
    "layers",
    "neurons",
    "num_params",
    "status",
    "final_loss",
    "center_pred",
    "center_ref",
    "center_rel_err",
    "max_pred",
    "max_exact",
    "relative_l2",
    "wall_time_s",
    "error",
];

impl BenchmarkReport {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(REPORT_HEADER)?;
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        for c in &self.cells {
            w.write_record([
                self.case.to_string(),
                c.layers.to_string(),
                c.neurons.to_string(),
                c.num_params.to_string(),
                c.status.clone(),
                opt(c.final_loss),
                opt(c.center_pred),
                c.center_ref.to_string(),
                opt(c.center_rel_err),
                opt(c.max_pred),
                opt(c.max_exact),
                opt(c.relative_l2),
                c.wall_time_s.to_string(),
                c.error.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn best(&self, layers: usize) -> Option<&CellReport> {
        self.cells
            .iter()
            .filter(|c| c.layers == layers && c.relative_l2.is_some())
            .min_by(|a, b| a.relative_l2.partial_cmp(&b.relative_l2).expect("finite errors"))
    }
}

fn status_name(s: TrainStatus) -> String {
    match s {
        TrainStatus::Converged => "converged".into(),
        TrainStatus::MaxIters => "max_iters".into(),
        TrainStatus::LineSearchFailed => "line_search_failed".into(),
        TrainStatus::Diverged { iteration } => format!("diverged@{iteration}"),
    }
}

/// Train every grid cell on one shared collocation set. A cell that fails is
/// reported with its error and the grid continues.
pub fn run_benchmark(case: &BenchmarkCase, grid: &Grid, points: &CollocationSet, cfg: &TrainConfig) -> Result<BenchmarkRun> {
    cfg.validate()?;
    let mut cells = Vec::new();
    let mut params = Vec::new();
    let mut breakdowns = Vec::new();
    for (layers, neurons) in grid.cells() {
        let arch = Architecture::new(layers, neurons)?;
        let start = Instant::now();
        let result = train(&case.problem, points, &arch, cfg);
        let wall = start.elapsed().as_secs_f64();
        let center_ref = case.reference_center();
        match result.and_then(|o| accuracy(case, &o.params).map(|acc| (o, acc))) {
            Ok((out, acc)) => {
                log::info!(
                    "{} {}x{}: rel L2 {:.3e}, centre {:.6e} ({:.2}s)",
                    case.id,
                    layers,
                    neurons,
                    acc.relative_l2,
                    acc.center_pred,
                    wall
                );
                cells.push(CellReport {
                    layers,
                    neurons,
                    num_params: arch.num_params(),
                    status: status_name(out.status),
                    final_loss: Some(out.breakdown.total),
                    center_pred: Some(acc.center_pred),
                    center_ref,
                    center_rel_err: Some(acc.center_rel_err),
                    max_pred: Some(acc.max_pred),
                    max_exact: Some(acc.max_exact),
                    relative_l2: Some(acc.relative_l2),
                    wall_time_s: wall,
                    error: None,
                });
                breakdowns.push(Some(out.breakdown));
                params.push(Some(out.params));
            }
            Err(e) => {
                log::warn!("{} {}x{} failed: {e}", case.id, layers, neurons);
                cells.push(CellReport {
                    layers,
                    neurons,
                    num_params: arch.num_params(),
                    status: "error".into(),
                    final_loss: None,
                    center_pred: None,
                    center_ref,
                    center_rel_err: None,
                    max_pred: None,
                    max_exact: None,
                    relative_l2: None,
                    wall_time_s: wall,
                    error: Some(e.to_string()),
                });
                breakdowns.push(None);
                params.push(None);
            }
        }
    }
    Ok(BenchmarkRun {
        report: BenchmarkReport {
            case: case.id,
            seed: cfg.seed,
            cells,
        },
        params,
        breakdowns,
    })
}

/// Random interior points of the case domain, for self-checks.
pub fn random_interior(domain: &Domain, n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [x0, x1, y0, y1] = domain.bounds();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = rng.random_range(x0..x1);
        let y = rng.random_range(y0..y1);
        if domain.contains(x, y) {
            out.push([x, y]);
        }
    }
    out
}
