//! Mean-squared collocation loss `MSE_G + MSE_Γ1 + MSE_Γ2 + MSE_Γ3`.
//!
//! Every residual used here is affine in the deflection jet, so each
//! collocation point is compiled once into coefficient jets `c` and offsets
//! `r0` with `r = c · jet + r0`. Evaluating the loss and its jet adjoint is then
//! a dot product per residual, and the network turns the jet adjoints into
//! parameter gradients.
//!
//! Residuals are either used as they are ([`ResidualScaling::Physical`]) or
//! first converted to deflection units ([`ResidualScaling::Deflection`]): each
//! is divided by what a sine mode of half-wavelength `λ = L/π` and unit
//! amplitude produces, so `∇⁴w + (kw − p)/D` is divided by `λ⁻⁴`, slopes by
//! `1/λ`, moments by `D/λ²` and shears by `D/λ³`. In physical units the
//! interior term outweighs a deflection error on the edge by about `(L/λ)⁸`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, LEN};
use crate::network::{GradientVector, Parameters};
use crate::physics::{boundary_residuals, interior_residual, BoundaryKind};
use crate::problem::PlateProblem;
use crate::sampling::CollocationSet;

/// The four loss groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Interior,
    Clamped,
    SimplySupported,
    Free,
}

impl Term {
    pub const ALL: [Term; 4] = [Term::Interior, Term::Clamped, Term::SimplySupported, Term::Free];

    fn slot(self) -> usize {
        match self {
            Term::Interior => 0,
            Term::Clamped => 1,
            Term::SimplySupported => 2,
            Term::Free => 3,
        }
    }

    fn from_kind(kind: BoundaryKind) -> Self {
        match kind {
            BoundaryKind::Clamped => Term::Clamped,
            BoundaryKind::SimplySupported => Term::SimplySupported,
            BoundaryKind::Free => Term::Free,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    #[serde(rename = "mse_G")]
    pub interior: f64,
    #[serde(rename = "mse_Gamma1")]
    pub clamped: f64,
    #[serde(rename = "mse_Gamma2")]
    pub simply_supported: f64,
    #[serde(rename = "mse_Gamma3")]
    pub free: f64,
    pub total: f64,
}

impl LossBreakdown {
    fn from_terms(terms: [f64; 4]) -> Self {
        LossBreakdown {
            interior: terms[0],
            clamped: terms[1],
            simply_supported: terms[2],
            free: terms[3],
            total: terms[0] + terms[1] + terms[2] + terms[3],
        }
    }

    pub fn term(&self, t: Term) -> f64 {
        match t {
            Term::Interior => self.interior,
            Term::Clamped => self.clamped,
            Term::SimplySupported => self.simply_supported,
            Term::Free => self.free,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualScaling {
    Physical,
    #[default]
    Deflection,
}

/// Multipliers on the four groups, all one by default, and the units the
/// residuals are measured in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossWeights {
    #[serde(default = "one")]
    pub interior: f64,
    #[serde(default = "one")]
    pub clamped: f64,
    #[serde(default = "one")]
    pub simply_supported: f64,
    #[serde(default = "one")]
    pub free: f64,
    #[serde(default)]
    pub scaling: ResidualScaling,
}

fn one() -> f64 {
    1.0
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            interior: 1.0,
            clamped: 1.0,
            simply_supported: 1.0,
            free: 1.0,
            scaling: ResidualScaling::Deflection,
        }
    }
}

impl LossWeights {
    /// Unweighted sum of the mean-squared physical residuals.
    pub fn plain() -> Self {
        LossWeights {
            scaling: ResidualScaling::Physical,
            ..LossWeights::default()
        }
    }

    fn get(&self, t: Term) -> f64 {
        match t {
            Term::Interior => self.interior,
            Term::Clamped => self.clamped,
            Term::SimplySupported => self.simply_supported,
            Term::Free => self.free,
        }
    }
}

/// `r = coeffs · jet + offset`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct AffineResidual {
    coeffs: Jet,
    offset: f64,
}

impl AffineResidual {
    /// Recover an affine functional from a homogeneous version (zero data,
    /// linear in the jet) and the full residual evaluated on the zero jet.
    fn probe(homogeneous: impl Fn(&Jet) -> f64, offset: f64) -> Self {
        let coeffs = Jet::from_coeffs(std::array::from_fn(|k| homogeneous(&Jet::basis(k))));
        AffineResidual { coeffs, offset }
    }

    fn scaled(self, unit: f64) -> Self {
        AffineResidual {
            coeffs: self.coeffs.scale(1.0 / unit),
            offset: self.offset / unit,
        }
    }

    #[inline]
    fn eval(&self, jet: &Jet) -> f64 {
        self.coeffs.dot(jet) + self.offset
    }
}

/// Divisors turning residuals into the chosen units.
struct Units {
    /// Interior residual, which is already divided by `D`.
    load: f64,
    slope: f64,
    moment: f64,
    shear: f64,
}

impl Units {
    fn new(problem: &PlateProblem, scaling: ResidualScaling) -> Self {
        match scaling {
            ResidualScaling::Physical => Units {
                load: 1.0,
                slope: 1.0,
                moment: 1.0,
                shear: 1.0,
            },
            ResidualScaling::Deflection => {
                let d = problem.material.rigidity;
                let lambda = problem.domain.length_scale() / std::f64::consts::PI;
                Units {
                    load: lambda.powi(-4),
                    slope: 1.0 / lambda,
                    moment: d / (lambda * lambda),
                    shear: d / lambda.powi(3),
                }
            }
        }
    }

    /// Divisors of the two residuals of a boundary condition, in the order
    /// the physics module returns them.
    fn boundary(&self, kind: BoundaryKind) -> (f64, f64) {
        match kind {
            BoundaryKind::Clamped => (1.0, self.slope),
            BoundaryKind::SimplySupported => (1.0, self.moment),
            BoundaryKind::Free => (self.moment, self.shear),
        }
    }
}

#[derive(Clone, Debug)]
struct CompiledPoint {
    term: Term,
    /// `weight / N_term`.
    scale: f64,
    residuals: Vec<AffineResidual>,
}

/// A plate problem bound to a collocation set, ready for repeated loss and
/// gradient evaluation.
#[derive(Clone, Debug)]
pub struct CollocationLoss {
    points: Vec<[f64; 2]>,
    compiled: Vec<CompiledPoint>,
}

#[derive(Clone, Debug)]
pub struct LossEval {
    pub breakdown: LossBreakdown,
    pub gradient: GradientVector,
}

impl CollocationLoss {
    pub fn new(problem: &PlateProblem, set: &CollocationSet, weights: LossWeights) -> Result<Self> {
        problem.validate()?;
        let mat = problem.material;
        let mut counts = [0usize; 4];
        counts[0] = set.interior.len();
        for p in &set.boundary {
            let bc = problem.boundary.get(p.segment).ok_or_else(|| {
                Error::Config(format!("boundary point on unknown segment {}", p.segment))
            })?;
            counts[Term::from_kind(bc.kind()).slot()] += 1;
        }
        let scale = |t: Term| weights.get(t) / counts[t.slot()].max(1) as f64;
        let units = Units::new(problem, weights.scaling);

        let mut points = Vec::with_capacity(set.len());
        let mut compiled = Vec::with_capacity(set.len());
        for &[x, y] in &set.interior {
            let load = problem.load_at(x, y);
            let k = problem.foundation;
            let r = AffineResidual::probe(
                |j| interior_residual(j, 0.0, k, &mat).expect("rigidity checked"),
                interior_residual(&Jet::ZERO, load, k, &mat)?,
            )
            .scaled(units.load);
            points.push([x, y]);
            compiled.push(CompiledPoint {
                term: Term::Interior,
                scale: scale(Term::Interior),
                residuals: vec![r],
            });
        }
        for p in &set.boundary {
            let bc = problem.boundary[p.segment];
            let hom = bc.homogeneous();
            let (o1, o2) = boundary_residuals(&Jet::ZERO, &bc, p.normal, &mat)?;
            let r1 = AffineResidual::probe(
                |j| boundary_residuals(j, &hom, p.normal, &mat).expect("normal checked").0,
                o1,
            );
            let r2 = AffineResidual::probe(
                |j| boundary_residuals(j, &hom, p.normal, &mat).expect("normal checked").1,
                o2,
            );
            let (u1, u2) = units.boundary(bc.kind());
            let term = Term::from_kind(bc.kind());
            points.push([p.x, p.y]);
            compiled.push(CompiledPoint {
                term,
                scale: scale(term),
                residuals: vec![r1.scaled(u1), r2.scaled(u2)],
            });
        }
        Ok(CollocationLoss { points, compiled })
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn point_loss(&self, i: usize, jet: &Jet) -> (f64, Jet) {
        let cp = &self.compiled[i];
        let mut value = 0.0;
        let mut adj = [0.0; LEN];
        for r in &cp.residuals {
            let res = r.eval(jet);
            value += cp.scale * res * res;
            let g = 2.0 * cp.scale * res;
            for (a, c) in adj.iter_mut().zip(r.coeffs.coeffs()) {
                *a += g * c;
            }
        }
        (value, Jet::from_coeffs(adj))
    }

    fn breakdown_of(&self, contributions: &[f64]) -> LossBreakdown {
        let mut terms = [0.0; 4];
        for (cp, c) in self.compiled.iter().zip(contributions) {
            terms[cp.term.slot()] += c;
        }
        LossBreakdown::from_terms(terms)
    }

    /// Loss breakdown and parameter gradient.
    pub fn evaluate(&self, params: &Parameters) -> Result<LossEval> {
        let eval = params.pointwise_loss_gradient(&self.points, |i, jet| self.point_loss(i, jet));
        if let Some(index) = eval.contributions.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteResidual { index });
        }
        Ok(LossEval {
            breakdown: self.breakdown_of(&eval.contributions),
            gradient: eval.gradient,
        })
    }

    /// Loss breakdown only.
    pub fn breakdown(&self, params: &Parameters) -> Result<LossBreakdown> {
        let jets = params.forward_jets(&self.points);
        let contributions: Vec<f64> = jets
            .iter()
            .enumerate()
            .map(|(i, j)| self.point_loss(i, j).0)
            .collect();
        if let Some(index) = contributions.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteResidual { index });
        }
        Ok(self.breakdown_of(&contributions))
    }
}

/// Loss breakdown evaluated directly from the plate residual formulas, one
/// point at a time, with all groups weighted by one.
pub fn compute_loss(params: &Parameters, problem: &PlateProblem, set: &CollocationSet) -> Result<LossBreakdown> {
    problem.validate()?;
    let mat = problem.material;
    let mut sums = [0.0; 4];
    let mut counts = [0usize; 4];
    for (index, &[x, y]) in set.interior.iter().enumerate() {
        let jet = params.forward_jet(x, y);
        let r = interior_residual(&jet, problem.load_at(x, y), problem.foundation, &mat)?;
        if !r.is_finite() {
            return Err(Error::NonFiniteResidual { index });
        }
        sums[0] += r * r;
        counts[0] += 1;
    }
    for (k, p) in set.boundary.iter().enumerate() {
        let index = set.interior.len() + k;
        let bc = problem
            .boundary
            .get(p.segment)
            .ok_or_else(|| Error::Config(format!("boundary point on unknown segment {}", p.segment)))?;
        let jet = params.forward_jet(p.x, p.y);
        let (r1, r2) = boundary_residuals(&jet, bc, p.normal, &mat)?;
        if !(r1.is_finite() && r2.is_finite()) {
            return Err(Error::NonFiniteResidual { index });
        }
        let slot = Term::from_kind(bc.kind()).slot();
        sums[slot] += r1 * r1 + r2 * r2;
        counts[slot] += 1;
    }
    let mut terms = [0.0; 4];
    for t in 0..4 {
        if counts[t] > 0 {
            terms[t] = sums[t] / counts[t] as f64;
        }
    }
    Ok(LossBreakdown::from_terms(terms))
}
