//! Plate geometry, loading and support description.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::{BoundaryCondition, Material};

/// Plate mid-surface. Rectangles occupy `[0, a] × [0, b]`; disks are centred
/// at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    Rectangle { a: f64, b: f64 },
    Disk { radius: f64 },
}

/// Edge segments of a rectangle, in segment-id order.
pub const RECTANGLE_EDGES: [&str; 4] = ["x=0", "x=a", "y=0", "y=b"];

impl Domain {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Domain::Rectangle { a, b } => a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite(),
            Domain::Disk { radius } => radius > 0.0 && radius.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("domain dimensions must be positive: {self:?}")))
        }
    }

    pub fn num_segments(&self) -> usize {
        match self {
            Domain::Rectangle { .. } => 4,
            Domain::Disk { .. } => 1,
        }
    }

    /// Strict interior test.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Domain::Rectangle { a, b } => x > 0.0 && x < a && y > 0.0 && y < b,
            Domain::Disk { radius } => x * x + y * y < radius * radius,
        }
    }

    pub fn center(&self) -> [f64; 2] {
        match *self {
            Domain::Rectangle { a, b } => [0.5 * a, 0.5 * b],
            Domain::Disk { .. } => [0.0, 0.0],
        }
    }

    /// Characteristic length used to nondimensionalize residual checks.
    pub fn length_scale(&self) -> f64 {
        match *self {
            Domain::Rectangle { a, b } => a.min(b),
            Domain::Disk { radius } => radius,
        }
    }

    /// Bounding box `[xmin, xmax, ymin, ymax]`.
    pub fn bounds(&self) -> [f64; 4] {
        match *self {
            Domain::Rectangle { a, b } => [0.0, a, 0.0, b],
            Domain::Disk { radius } => [-radius, radius, -radius, radius],
        }
    }

    /// Outward unit normal of a rectangle edge.
    pub fn edge_normal(segment: usize) -> [f64; 2] {
        match segment {
            0 => [-1.0, 0.0],
            1 => [1.0, 0.0],
            2 => [0.0, -1.0],
            3 => [0.0, 1.0],
            _ => panic!("rectangle has four edges, got segment {segment}"),
        }
    }
}

/// Transverse load `p(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Load {
    Uniform { p: f64 },
    /// `p0 sin(πx/a) sin(πy/b)` over a rectangle.
    Sinusoidal { p0: f64 },
}

impl Load {
    /// Largest load magnitude over the plate.
    pub fn peak(&self) -> f64 {
        match *self {
            Load::Uniform { p } => p.abs(),
            Load::Sinusoidal { p0 } => p0.abs(),
        }
    }

    pub fn at(&self, x: f64, y: f64, domain: &Domain) -> f64 {
        match (*self, *domain) {
            (Load::Uniform { p }, _) => p,
            (Load::Sinusoidal { p0 }, Domain::Rectangle { a, b }) => {
                p0 * (PI * x / a).sin() * (PI * y / b).sin()
            }
            (Load::Sinusoidal { .. }, Domain::Disk { .. }) => {
                unreachable!("validated: sinusoidal load needs a rectangle")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlateProblem {
    pub material: Material,
    pub domain: Domain,
    pub load: Load,
    /// Winkler foundation modulus `k`; zero means no foundation.
    #[serde(default)]
    pub foundation: f64,
    /// One condition per boundary segment.
    pub boundary: Vec<BoundaryCondition>,
}

impl PlateProblem {
    pub fn validate(&self) -> Result<()> {
        self.material
            .validate()
            .map_err(|e| Error::Config(format!("material: {e}")))?;
        self.domain.validate()?;
        if !(self.foundation >= 0.0 && self.foundation.is_finite()) {
            return Err(Error::Config(format!(
                "foundation modulus must be nonnegative, got {}",
                self.foundation
            )));
        }
        if self.boundary.len() != self.domain.num_segments() {
            return Err(Error::Config(format!(
                "boundary: expected {} conditions for {:?}, got {}",
                self.domain.num_segments(),
                self.domain,
                self.boundary.len()
            )));
        }
        if matches!(self.load, Load::Sinusoidal { .. }) && matches!(self.domain, Domain::Disk { .. }) {
            return Err(Error::Config("load: sinusoidal load requires a rectangular domain".into()));
        }
        Ok(())
    }

    /// `|p|max L⁴ / (64 D)` with `L` the domain's length scale; the centre
    /// deflection of a uniformly loaded clamped disk of radius `L`. `None`
    /// for an unloaded plate.
    pub fn deflection_scale(&self) -> Option<f64> {
        let l = self.domain.length_scale();
        let s = self.load.peak() * l.powi(4) / (64.0 * self.material.rigidity);
        (s > 0.0 && s.is_finite()).then_some(s)
    }

    pub fn load_at(&self, x: f64, y: f64) -> f64 {
        self.load.at(x, y, &self.domain)
    }
}
