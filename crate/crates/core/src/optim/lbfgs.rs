//! Limited-memory BFGS with a strong-Wolfe line search.
//!
//! The search direction comes from the usual two-loop recursion over the most
//! recent `(s, y)` pairs, scaled by `sᵀy / yᵀy`. The line search brackets and
//! then zooms with safeguarded cubic interpolation. A trial point with a
//! non-finite loss counts as a rejected step.

use std::collections::VecDeque;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use super::{dot, norm};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LbfgsConfig {
    pub max_iters: usize,
    pub history: usize,
    /// Stop when `‖∇f‖₂` falls to this value.
    pub grad_tolerance: f64,
    /// Stop when `f` falls to this value.
    pub loss_threshold: f64,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    /// Function evaluations allowed per line search.
    pub max_line_search_evals: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        LbfgsConfig {
            max_iters: 5000,
            history: 20,
            grad_tolerance: 1e-10,
            loss_threshold: f64::NEG_INFINITY,
            c1: 1e-4,
            c2: 0.9,
            max_line_search_evals: 25,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LbfgsStatus {
    Converged,
    LineSearchFailed,
    MaxIters,
    Stopped,
}

/// Data of one accepted iterate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LbfgsStep {
    pub iteration: usize,
    pub f_before: f64,
    pub f_after: f64,
    pub step: f64,
    /// `∇f(x)ᵀd` at the start of the line search.
    pub slope: f64,
    pub grad_norm: f64,
    pub evaluations: usize,
}

impl LbfgsStep {
    /// `f(x + αd) ≤ f(x) + c1 α ∇f(x)ᵀd`.
    pub fn satisfies_armijo(&self, c1: f64) -> bool {
        self.f_after <= self.f_before + c1 * self.step * self.slope
    }
}

#[derive(Clone, Debug)]
pub struct LbfgsReport {
    pub status: LbfgsStatus,
    pub x: Vec<f64>,
    pub f: f64,
    pub grad: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub steps: Vec<LbfgsStep>,
}

pub trait Objective {
    /// Loss at `x`; writes the gradient into `grad`. Non-finite return values
    /// are allowed and mark `x` as unacceptable.
    fn evaluate(&mut self, x: &[f64], grad: &mut [f64]) -> f64;

    /// Called after each accepted iterate. The last call to `evaluate` was at
    /// `x`.
    fn on_accept(&mut self, _step: &LbfgsStep, _x: &[f64]) -> ControlFlow<()> {
        ControlFlow::Continue(())
    }
}

impl<F> Objective for F
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    fn evaluate(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        self(x, grad)
    }
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// `−H∇f` by two-loop recursion.
fn direction(history: &VecDeque<Pair>, grad: &[f64]) -> Vec<f64> {
    let mut q: Vec<f64> = grad.to_vec();
    let mut alpha = vec![0.0; history.len()];
    for (i, p) in history.iter().enumerate().rev() {
        alpha[i] = p.rho * dot(&p.s, &q);
        q.iter_mut().zip(&p.y).for_each(|(q, y)| *q -= alpha[i] * y);
    }
    if let Some(last) = history.back() {
        let gamma = dot(&last.s, &last.y) / dot(&last.y, &last.y);
        q.iter_mut().for_each(|q| *q *= gamma);
    }
    for (i, p) in history.iter().enumerate() {
        let beta = p.rho * dot(&p.y, &q);
        q.iter_mut().zip(&p.s).for_each(|(r, s)| *r += (alpha[i] - beta) * s);
    }
    q.iter_mut().for_each(|r| *r = -*r);
    q
}

#[derive(Clone, Copy)]
struct Sample {
    alpha: f64,
    f: f64,
    slope: f64,
}

struct Accepted {
    alpha: f64,
    f: f64,
    grad: Vec<f64>,
    evaluations: usize,
}

/// Minimizer of the cubic through two samples, or `None` when it does not
/// exist.
fn cubic_min(a: Sample, b: Sample) -> Option<f64> {
    let d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    let disc = d1 * d1 - a.slope * b.slope;
    if !(disc >= 0.0) {
        return None;
    }
    let d2 = (b.alpha - a.alpha).signum() * disc.sqrt();
    let denom = b.slope - a.slope + 2.0 * d2;
    if denom == 0.0 {
        return None;
    }
    let t = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / denom;
    t.is_finite().then_some(t)
}

struct LineSearch<'a, O: Objective> {
    obj: &'a mut O,
    x: &'a [f64],
    dir: &'a [f64],
    f0: f64,
    slope0: f64,
    c1: f64,
    c2: f64,
    budget: usize,
    used: usize,
    trial: Vec<f64>,
    grad: Vec<f64>,
}

impl<O: Objective> LineSearch<'_, O> {
    fn eval(&mut self, alpha: f64) -> Sample {
        self.used += 1;
        for ((t, x), d) in self.trial.iter_mut().zip(self.x).zip(self.dir) {
            *t = x + alpha * d;
        }
        let f = self.obj.evaluate(&self.trial, &mut self.grad);
        let slope = dot(&self.grad, self.dir);
        if f.is_finite() && slope.is_finite() {
            Sample { alpha, f, slope }
        } else {
            Sample {
                alpha,
                f: f64::INFINITY,
                slope: f64::NAN,
            }
        }
    }

    fn armijo(&self, s: &Sample) -> bool {
        s.f <= self.f0 + self.c1 * s.alpha * self.slope0
    }

    fn curvature(&self, s: &Sample) -> bool {
        s.slope.abs() <= -self.c2 * self.slope0
    }

    fn accept(&self, s: Sample) -> Accepted {
        Accepted {
            alpha: s.alpha,
            f: s.f,
            grad: self.grad.clone(),
            evaluations: self.used,
        }
    }

    fn run(mut self, alpha0: f64) -> std::result::Result<Accepted, usize> {
        let mut prev = Sample {
            alpha: 0.0,
            f: self.f0,
            slope: self.slope0,
        };
        let mut alpha = alpha0;
        let mut first = true;
        while self.used < self.budget {
            let cur = self.eval(alpha);
            if !self.armijo(&cur) || (!first && cur.f >= prev.f) {
                return self.zoom(prev, cur);
            }
            if self.curvature(&cur) {
                return Ok(self.accept(cur));
            }
            if cur.slope >= 0.0 {
                return self.zoom(cur, prev);
            }
            // still descending: extrapolate
            let next = cubic_min(prev, cur)
                .filter(|t| *t > cur.alpha)
                .unwrap_or(2.0 * cur.alpha)
                .clamp(1.1 * cur.alpha, 10.0 * cur.alpha);
            prev = cur;
            alpha = next;
            first = false;
        }
        Err(self.used)
    }

    /// `lo` satisfies Armijo and has the lower value; the minimizer lies
    /// between `lo` and `hi`.
    fn zoom(mut self, mut lo: Sample, mut hi: Sample) -> std::result::Result<Accepted, usize> {
        while self.used < self.budget {
            let (a, b) = (lo.alpha.min(hi.alpha), lo.alpha.max(hi.alpha));
            let width = b - a;
            if width <= 1e-14 * b.max(1e-300) {
                break;
            }
            let guess = if hi.f.is_finite() { cubic_min(lo, hi) } else { None };
            let alpha = match guess {
                Some(t) if t > a + 0.1 * width && t < b - 0.1 * width => t,
                _ => 0.5 * (a + b),
            };
            let cur = self.eval(alpha);
            if !self.armijo(&cur) || cur.f >= lo.f {
                hi = cur;
            } else {
                if self.curvature(&cur) {
                    return Ok(self.accept(cur));
                }
                if cur.slope * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = lo;
                }
                lo = cur;
            }
        }
        Err(self.used)
    }
}

/// Minimize `obj` from `x0`.
pub fn minimize<O: Objective>(obj: &mut O, x0: Vec<f64>, cfg: &LbfgsConfig) -> Result<LbfgsReport> {
    let n = x0.len();
    let mut x = x0;
    let mut grad = vec![0.0; n];
    let mut f = obj.evaluate(&x, &mut grad);
    let mut evaluations = 1;
    if !f.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFiniteLoss);
    }
    let mut history: VecDeque<Pair> = VecDeque::with_capacity(cfg.history);
    let mut steps = Vec::new();

    let report = |status, x, f, grad, iterations, evaluations, steps| LbfgsReport {
        status,
        x,
        f,
        grad,
        iterations,
        evaluations,
        steps,
    };

    let mut iteration = 0;
    loop {
        let gnorm = norm(&grad);
        if gnorm <= cfg.grad_tolerance || f <= cfg.loss_threshold {
            return Ok(report(LbfgsStatus::Converged, x, f, grad, iteration, evaluations, steps));
        }
        if iteration >= cfg.max_iters {
            return Ok(report(LbfgsStatus::MaxIters, x, f, grad, iteration, evaluations, steps));
        }

        let mut attempt = 0;
        let (dir, slope, accepted) = loop {
            let mut dir = direction(&history, &grad);
            let mut slope = dot(&grad, &dir);
            if !(slope < 0.0) {
                history.clear();
                dir = grad.iter().map(|g| -g).collect();
                slope = -gnorm * gnorm;
            }
            let alpha0 = if history.is_empty() {
                (1.0 / gnorm).min(1.0)
            } else {
                1.0
            };
            let ls = LineSearch {
                obj: &mut *obj,
                x: &x,
                dir: &dir,
                f0: f,
                slope0: slope,
                c1: cfg.c1,
                c2: cfg.c2,
                budget: cfg.max_line_search_evals,
                used: 0,
                trial: vec![0.0; n],
                grad: vec![0.0; n],
            };
            match ls.run(alpha0) {
                Ok(acc) => break (dir, slope, acc),
                Err(used) => {
                    evaluations += used;
                    // retry once along steepest descent with fresh memory
                    if attempt == 0 && !history.is_empty() {
                        history.clear();
                        attempt += 1;
                        continue;
                    }
                    return Ok(report(
                        LbfgsStatus::LineSearchFailed,
                        x,
                        f,
                        grad,
                        iteration,
                        evaluations,
                        steps,
                    ));
                }
            }
        };

        evaluations += accepted.evaluations;
        let s: Vec<f64> = dir.iter().map(|d| accepted.alpha * d).collect();
        let y: Vec<f64> = accepted.grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        x.iter_mut().zip(&s).for_each(|(x, s)| *x += s);
        let sy = dot(&s, &y);
        if sy > f64::EPSILON * norm(&s) * norm(&y) {
            if history.len() == cfg.history {
                history.pop_front();
            }
            history.push_back(Pair { s, y, rho: 1.0 / sy });
        }

        iteration += 1;
        let step = LbfgsStep {
            iteration,
            f_before: f,
            f_after: accepted.f,
            step: accepted.alpha,
            slope,
            grad_norm: norm(&accepted.grad),
            evaluations: accepted.evaluations,
        };
        f = accepted.f;
        grad = accepted.grad;
        steps.push(step);
        if obj.on_accept(&step, &x).is_break() {
            return Ok(report(LbfgsStatus::Stopped, x, f, grad, iteration, evaluations, steps));
        }
    }
}
