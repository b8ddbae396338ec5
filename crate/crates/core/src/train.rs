//! Training driver: L-BFGS first, Adam with a small learning rate when the
//! line search stalls, then optionally L-BFGS once more.

use std::io::{Read, Write};
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::{CollocationLoss, LossBreakdown, LossWeights};
use crate::network::{Architecture, InitScheme, Parameters};
use crate::optim::{minimize, Adam, AdamConfig, LbfgsConfig, LbfgsStatus, LbfgsStep, Objective};
use crate::problem::PlateProblem;
use crate::sampling::CollocationSet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Accepted L-BFGS iterations, summed over both L-BFGS phases.
    pub max_lbfgs_iters: usize,
    pub lbfgs_history_size: usize,
    /// Gradient-norm stopping tolerance.
    pub lbfgs_tolerance: f64,
    pub lbfgs_c1: f64,
    pub lbfgs_c2: f64,
    pub max_line_search_evals: usize,
    pub adam_learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub max_adam_iters: usize,
    /// Stop as soon as the total loss reaches this value.
    pub loss_threshold: f64,
    /// Run L-BFGS again after the Adam phase.
    pub lbfgs_retry: bool,
    /// Map the domain's bounding box onto `[-1, 1]²` inside the network
    /// unless the architecture already fixes an input box.
    pub normalize_inputs: bool,
    /// Multiply the network output by the problem's characteristic
    /// deflection unless the architecture already fixes a scale.
    pub scale_output: bool,
    pub seed: u64,
    pub init: InitScheme,
    pub weights: LossWeights,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let lbfgs = LbfgsConfig::default();
        let adam = AdamConfig::default();
        TrainConfig {
            max_lbfgs_iters: lbfgs.max_iters,
            lbfgs_history_size: lbfgs.history,
            lbfgs_tolerance: lbfgs.grad_tolerance,
            lbfgs_c1: lbfgs.c1,
            lbfgs_c2: lbfgs.c2,
            max_line_search_evals: lbfgs.max_line_search_evals,
            adam_learning_rate: adam.learning_rate,
            adam_beta1: adam.beta1,
            adam_beta2: adam.beta2,
            adam_epsilon: adam.epsilon,
            max_adam_iters: 1000,
            loss_threshold: 0.0,
            lbfgs_retry: true,
            normalize_inputs: true,
            scale_output: true,
            seed: 0,
            init: InitScheme::default(),
            weights: LossWeights::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lbfgs_history_size", self.lbfgs_history_size as f64),
            ("lbfgs_tolerance", self.lbfgs_tolerance),
            ("max_line_search_evals", self.max_line_search_evals as f64),
            ("adam_learning_rate", self.adam_learning_rate),
            ("adam_epsilon", self.adam_epsilon),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("train.{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("train.{name} must lie in (0, 1), got {v}")));
            }
        }
        if !(0.0 < self.lbfgs_c1 && self.lbfgs_c1 < self.lbfgs_c2 && self.lbfgs_c2 < 1.0) {
            return Err(Error::Config(format!(
                "train.lbfgs_c1 and train.lbfgs_c2 need 0 < c1 < c2 < 1, got {} and {}",
                self.lbfgs_c1, self.lbfgs_c2
            )));
        }
        if !(self.loss_threshold >= 0.0) {
            return Err(Error::Config(format!(
                "train.loss_threshold must be nonnegative, got {}",
                self.loss_threshold
            )));
        }
        let w = self.weights;
        for (name, v) in [
            ("interior", w.interior),
            ("clamped", w.clamped),
            ("simply_supported", w.simply_supported),
            ("free", w.free),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("train.weights.{name} must be nonnegative, got {v}")));
            }
        }
        Ok(())
    }

    fn lbfgs(&self, max_iters: usize) -> LbfgsConfig {
        LbfgsConfig {
            max_iters,
            history: self.lbfgs_history_size,
            grad_tolerance: self.lbfgs_tolerance,
            loss_threshold: self.loss_threshold,
            c1: self.lbfgs_c1,
            c2: self.lbfgs_c2,
            max_line_search_evals: self.max_line_search_evals,
        }
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.adam_learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            epsilon: self.adam_epsilon,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Init,
    Lbfgs,
    Adam,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Init => "init",
            Phase::Lbfgs => "lbfgs",
            Phase::Adam => "adam",
        }
    }
}

impl std::str::FromStr for Phase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "init" => Ok(Phase::Init),
            "lbfgs" => Ok(Phase::Lbfgs),
            "adam" => Ok(Phase::Adam),
            other => Err(Error::Config(format!("unknown optimizer phase '{other}'"))),
        }
    }
}

/// Loss after iteration `iter` of the given phase. Iterations are counted
/// across phases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistoryRecord {
    pub iter: usize,
    pub phase: Phase,
    pub breakdown: LossBreakdown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TrainStatus {
    /// Gradient tolerance or loss threshold reached.
    Converged,
    /// Iteration budgets exhausted.
    MaxIters,
    /// The line search failed and no Adam budget or retry remained.
    LineSearchFailed,
    /// The loss became non-finite at this iteration; the returned parameters
    /// are the last finite state.
    Diverged { iteration: usize },
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: Parameters,
    pub breakdown: LossBreakdown,
    pub history: Vec<HistoryRecord>,
    pub status: TrainStatus,
    pub lbfgs_iterations: usize,
    pub adam_iterations: usize,
    pub evaluations: usize,
}

struct LossObjective<'a> {
    loss: &'a CollocationLoss,
    params: Parameters,
    last: Option<LossBreakdown>,
    history: &'a mut Vec<HistoryRecord>,
    iter: &'a mut usize,
    evaluations: usize,
}

impl Objective for LossObjective<'_> {
    fn evaluate(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.evaluations += 1;
        self.params.as_mut_slice().copy_from_slice(x);
        match self.loss.evaluate(&self.params) {
            Ok(e) if e.breakdown.total.is_finite() => {
                grad.copy_from_slice(&e.gradient);
                self.last = Some(e.breakdown);
                e.breakdown.total
            }
            _ => {
                self.last = None;
                f64::NAN
            }
        }
    }

    fn on_accept(&mut self, step: &LbfgsStep, _x: &[f64]) -> ControlFlow<()> {
        *self.iter += 1;
        let breakdown = self.last.expect("accepted point was evaluated and finite");
        log::debug!(
            "lbfgs iter {} loss {:.6e} step {:.3e} |g| {:.3e}",
            self.iter,
            breakdown.total,
            step.step,
            step.grad_norm
        );
        self.history.push(HistoryRecord {
            iter: *self.iter,
            phase: Phase::Lbfgs,
            breakdown,
        });
        ControlFlow::Continue(())
    }
}

enum PhaseEnd {
    Converged,
    Budget,
    Stalled,
    Diverged,
}

/// Minimize the collocation loss from a seeded initialization.
pub fn train(
    problem: &PlateProblem,
    points: &CollocationSet,
    arch: &Architecture,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    arch.validate()?;
    let mut arch = arch.clone();
    if cfg.normalize_inputs && arch.input_box.is_none() {
        arch = arch.with_input_box(problem.domain.bounds())?;
    }
    if cfg.scale_output && arch.output_scale.is_none() {
        if let Some(scale) = problem.deflection_scale() {
            arch = arch.with_output_scale(scale)?;
        }
    }
    let init = Parameters::initialize(&arch, cfg.init, cfg.seed);
    train_from(problem, points, init, cfg)
}

/// Minimize the collocation loss starting from `init`.
pub fn train_from(
    problem: &PlateProblem,
    points: &CollocationSet,
    init: Parameters,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let loss = CollocationLoss::new(problem, points, cfg.weights)?;
    let start = loss.breakdown(&init)?;

    let mut history = vec![HistoryRecord {
        iter: 0,
        phase: Phase::Init,
        breakdown: start,
    }];
    let mut iter = 0usize;
    let mut evaluations = 1usize;
    let mut lbfgs_iterations = 0usize;
    let mut adam_iterations = 0usize;
    let mut best = (start.total, init.clone());
    let mut current = init;
    let mut diverged_at = None;

    let lbfgs_rounds = if cfg.lbfgs_retry { 2 } else { 1 };
    let mut end = PhaseEnd::Budget;
    for round in 0..lbfgs_rounds {
        // L-BFGS
        let budget = cfg.max_lbfgs_iters - lbfgs_iterations;
        if budget > 0 {
            let mut obj = LossObjective {
                loss: &loss,
                params: current.clone(),
                last: None,
                history: &mut history,
                iter: &mut iter,
                evaluations: 0,
            };
            let report = match minimize(&mut obj, current.as_slice().to_vec(), &cfg.lbfgs(budget)) {
                Ok(r) => r,
                Err(Error::NonFiniteLoss) => {
                    diverged_at = Some(iter);
                    end = PhaseEnd::Diverged;
                    break;
                }
                Err(e) => return Err(e),
            };
            evaluations += obj.evaluations;
            lbfgs_iterations += report.iterations;
            current.as_mut_slice().copy_from_slice(&report.x);
            if report.f < best.0 {
                best = (report.f, current.clone());
            }
            log::info!(
                "lbfgs round {} ended {:?} after {} iterations, loss {:.6e}",
                round + 1,
                report.status,
                report.iterations,
                report.f
            );
            end = match report.status {
                LbfgsStatus::Converged => PhaseEnd::Converged,
                LbfgsStatus::MaxIters | LbfgsStatus::Stopped => PhaseEnd::Budget,
                LbfgsStatus::LineSearchFailed => PhaseEnd::Stalled,
            };
        } else {
            end = PhaseEnd::Budget;
        }
        if !matches!(end, PhaseEnd::Stalled) || cfg.max_adam_iters == adam_iterations {
            break;
        }

        // Adam on the line-search stall
        let mut adam = Adam::new(current.len(), cfg.adam());
        let mut params = current.clone();
        let adam_budget = cfg.max_adam_iters - adam_iterations;
        let mut reached = false;
        for _ in 0..adam_budget {
            let e = loss.evaluate(&params);
            evaluations += 1;
            let e = match e {
                Ok(e) if e.breakdown.total.is_finite() => e,
                _ => {
                    diverged_at = Some(iter + 1);
                    break;
                }
            };
            if e.breakdown.total < best.0 {
                best = (e.breakdown.total, params.clone());
            }
            if e.breakdown.total <= cfg.loss_threshold {
                reached = true;
                break;
            }
            adam.step(params.as_mut_slice(), &e.gradient);
            adam_iterations += 1;
            iter += 1;
            history.push(HistoryRecord {
                iter,
                phase: Phase::Adam,
                breakdown: e.breakdown,
            });
        }
        if diverged_at.is_some() {
            end = PhaseEnd::Diverged;
            break;
        }
        log::info!("adam ran {} iterations, best loss {:.6e}", adam_iterations, best.0);
        // continue from the best point seen so far
        current = best.1.clone();
        if reached {
            end = PhaseEnd::Converged;
            break;
        }
        end = PhaseEnd::Stalled;
    }

    let params = best.1;
    let breakdown = loss.breakdown(&params)?;
    evaluations += 1;
    let status = match (diverged_at, end) {
        (Some(iteration), _) => TrainStatus::Diverged { iteration },
        (None, PhaseEnd::Converged) => TrainStatus::Converged,
        (None, PhaseEnd::Stalled) => TrainStatus::LineSearchFailed,
        (None, _) => TrainStatus::MaxIters,
    };
    Ok(TrainOutcome {
        params,
        breakdown,
        history,
        status,
        lbfgs_iterations,
        adam_iterations,
        evaluations,
    })
}

pub const HISTORY_HEADER: [&str; 7] = ["iter", "mse_G", "mse_Gamma1", "mse_Gamma2", "mse_Gamma3", "total", "phase"];

pub fn write_history_csv<W: Write>(history: &[HistoryRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HISTORY_HEADER)?;
    for r in history {
        let b = &r.breakdown;
        w.write_record([
            r.iter.to_string(),
            b.interior.to_string(),
            b.clamped.to_string(),
            b.simply_supported.to_string(),
            b.free.to_string(),
            b.total.to_string(),
            r.phase.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_history_csv<R: Read>(reader: R) -> Result<Vec<HistoryRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    if r.headers()?.iter().ne(HISTORY_HEADER) {
        return Err(Error::Config(format!(
            "loss history header must be {}",
            HISTORY_HEADER.join(",")
        )));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let num = |k: usize| -> Result<f64> {
            rec[k]
                .parse()
                .map_err(|_| Error::Config(format!("bad number '{}' in loss history", &rec[k])))
        };
        out.push(HistoryRecord {
            iter: rec[0]
                .parse()
                .map_err(|_| Error::Config(format!("bad iteration '{}' in loss history", &rec[0])))?,
            phase: rec[6].parse()?,
            breakdown: LossBreakdown {
                interior: num(1)?,
                clamped: num(2)?,
                simply_supported: num(3)?,
                free: num(4)?,
                total: num(5)?,
            },
        });
    }
    Ok(out)
}
