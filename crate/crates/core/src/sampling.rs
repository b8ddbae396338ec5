//! Reproducible random collocation points.
//!
//! Interior points are uniform by area. Boundary points are uniform along
//! each segment and carry the outward unit normal; rectangle corners are never
//! produced since the normal is undefined there.

use std::f64::consts::TAU;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::Domain;

/// Default boundary points per rectangle edge.
pub const DEFAULT_POINTS_PER_EDGE: usize = 100;
/// Default boundary points on a circle.
pub const DEFAULT_POINTS_ON_CIRCLE: usize = 400;
/// Default interior points.
pub const DEFAULT_INTERIOR_POINTS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryPoint {
    pub x: f64,
    pub y: f64,
    pub normal: [f64; 2],
    pub segment: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollocationSet {
    pub interior: Vec<[f64; 2]>,
    pub boundary: Vec<BoundaryPoint>,
    pub seed: u64,
}

/// Uniform draw from the open interval `(0, len)`.
fn open_interval(rng: &mut ChaCha8Rng, len: f64) -> f64 {
    loop {
        let t = rng.random::<f64>() * len;
        if t > 0.0 && t < len {
            return t;
        }
    }
}

fn check_counts(counts: &[usize]) -> Result<()> {
    if counts.contains(&0) {
        return Err(Error::Config("collocation point counts must be positive".into()));
    }
    Ok(())
}

/// Points in the open rectangle `(0, a) × (0, b)` and on its four edges.
pub fn sample_square(a: f64, b: f64, n_interior: usize, n_per_edge: usize, seed: u64) -> Result<CollocationSet> {
    check_counts(&[n_interior, n_per_edge])?;
    Domain::Rectangle { a, b }.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let interior = (0..n_interior)
        .map(|_| {
            let x = open_interval(&mut rng, a);
            let y = open_interval(&mut rng, b);
            [x, y]
        })
        .collect();
    let mut boundary = Vec::with_capacity(4 * n_per_edge);
    for segment in 0..4 {
        let normal = Domain::edge_normal(segment);
        for _ in 0..n_per_edge {
            let (x, y) = match segment {
                0 => (0.0, open_interval(&mut rng, b)),
                1 => (a, open_interval(&mut rng, b)),
                2 => (open_interval(&mut rng, a), 0.0),
                _ => (open_interval(&mut rng, a), b),
            };
            boundary.push(BoundaryPoint { x, y, normal, segment });
        }
    }
    Ok(CollocationSet { interior, boundary, seed })
}

/// Boundary point of a disk at polar angle `theta`.
pub fn disk_boundary_point(radius: f64, theta: f64) -> BoundaryPoint {
    let (s, c) = theta.sin_cos();
    BoundaryPoint {
        x: radius * c,
        y: radius * s,
        normal: [c, s],
        segment: 0,
    }
}

/// Points in the open disk of the given radius and on its rim.
pub fn sample_disk(radius: f64, n_interior: usize, n_boundary: usize, seed: u64) -> Result<CollocationSet> {
    check_counts(&[n_interior, n_boundary])?;
    Domain::Disk { radius }.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut interior = Vec::with_capacity(n_interior);
    while interior.len() < n_interior {
        let r = radius * rng.random::<f64>().sqrt();
        let theta = TAU * rng.random::<f64>();
        let (x, y) = (r * theta.cos(), r * theta.sin());
        if x * x + y * y < radius * radius {
            interior.push([x, y]);
        }
    }
    let boundary = (0..n_boundary)
        .map(|_| disk_boundary_point(radius, TAU * rng.random::<f64>()))
        .collect();
    Ok(CollocationSet { interior, boundary, seed })
}

/// Dispatch on the domain shape. `n_boundary` is per edge for rectangles and
/// in total for disks.
pub fn sample_domain(domain: &Domain, n_interior: usize, n_boundary: usize, seed: u64) -> Result<CollocationSet> {
    match *domain {
        Domain::Rectangle { a, b } => sample_square(a, b, n_interior, n_boundary, seed),
        Domain::Disk { radius } => sample_disk(radius, n_interior, n_boundary, seed),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct PointRow {
    x: f64,
    y: f64,
    nx: Option<f64>,
    ny: Option<f64>,
    segment: Option<usize>,
}

impl CollocationSet {
    pub fn len(&self) -> usize {
        self.interior.len() + self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// CSV with header `x,y,nx,ny,segment`; interior rows leave the last
    /// three fields empty.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for &[x, y] in &self.interior {
            w.serialize(PointRow {
                x,
                y,
                nx: None,
                ny: None,
                segment: None,
            })?;
        }
        for p in &self.boundary {
            w.serialize(PointRow {
                x: p.x,
                y: p.y,
                nx: Some(p.normal[0]),
                ny: Some(p.normal[1]),
                segment: Some(p.segment),
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R, seed: u64) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut set = CollocationSet {
            interior: Vec::new(),
            boundary: Vec::new(),
            seed,
        };
        for (line, row) in r.deserialize::<PointRow>().enumerate() {
            let row = row?;
            match (row.nx, row.ny, row.segment) {
                (None, None, None) => set.interior.push([row.x, row.y]),
                (Some(nx), Some(ny), Some(segment)) => set.boundary.push(BoundaryPoint {
                    x: row.x,
                    y: row.y,
                    normal: [nx, ny],
                    segment,
                }),
                _ => {
                    return Err(Error::Config(format!(
                        "point row {}: boundary rows need nx, ny and segment",
                        line + 1
                    )))
                }
            }
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn square_counts_and_bounds() {
        let set = sample_square(1.0, 1.0, 1000, 100, 7).unwrap();
        assert_eq!(set.interior.len(), 1000);
        assert_eq!(set.boundary.len(), 400);
        assert!(set
            .interior
            .iter()
            .all(|&[x, y]| x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0));
    }

    #[test]
    fn one_point_per_edge() {
        let set = sample_square(2.0, 1.0, 3, 1, 1).unwrap();
        assert_eq!(set.boundary.len(), 4);
        let mut normals: Vec<[f64; 2]> = set.boundary.iter().map(|p| p.normal).collect();
        normals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(normals, vec![[-1.0, 0.0], [0.0, -1.0], [0.0, 1.0], [1.0, 0.0]]);
    }

    #[test]
    fn boundary_points_lie_on_edges() {
        let (a, b) = (1.5, 0.7);
        let set = sample_square(a, b, 10, 50, 3).unwrap();
        for p in &set.boundary {
            let on_edge = match p.segment {
                0 => p.x == 0.0 && p.y > 0.0 && p.y < b,
                1 => p.x == a && p.y > 0.0 && p.y < b,
                2 => p.y == 0.0 && p.x > 0.0 && p.x < a,
                3 => p.y == b && p.x > 0.0 && p.x < a,
                _ => false,
            };
            assert!(on_edge, "{p:?}");
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(
            sample_square(1.0, 1.0, 200, 20, 42).unwrap(),
            sample_square(1.0, 1.0, 200, 20, 42).unwrap()
        );
        assert_eq!(
            sample_disk(1.0, 200, 20, 42).unwrap(),
            sample_disk(1.0, 200, 20, 42).unwrap()
        );
        assert_ne!(
            sample_square(1.0, 1.0, 200, 20, 42).unwrap().interior,
            sample_square(1.0, 1.0, 200, 20, 43).unwrap().interior
        );
    }

    #[test]
    fn disk_points() {
        let r = 2.0;
        let set = sample_disk(r, 2000, 400, 11).unwrap();
        assert!(set.interior.iter().all(|&[x, y]| x * x + y * y < r * r));
        for p in &set.boundary {
            assert!(((p.x * p.x + p.y * p.y).sqrt() - r).abs() <= 1e-12);
            let [nx, ny] = p.normal;
            assert!(((nx * nx + ny * ny).sqrt() - 1.0).abs() <= 1e-12);
            assert_relative_eq!(nx, p.x / r, epsilon = 1e-15);
            assert_relative_eq!(ny, p.y / r, epsilon = 1e-15);
        }
    }

    #[test]
    fn disk_boundary_at_angle_zero() {
        let p = disk_boundary_point(3.0, 0.0);
        assert_eq!(p.normal, [1.0, 0.0]);
        assert_eq!((p.x, p.y), (3.0, 0.0));
    }

    #[test]
    fn disk_mean_radius() {
        // E[r] = 2R/3 for area-uniform points.
        let r = 1.5;
        let set = sample_disk(r, 100_000, 1, 5).unwrap();
        let mean = set
            .interior
            .iter()
            .map(|&[x, y]| (x * x + y * y).sqrt())
            .sum::<f64>()
            / set.interior.len() as f64;
        assert!((mean - 2.0 * r / 3.0).abs() <= 0.01 * 2.0 * r / 3.0, "{mean}");
    }

    #[test]
    fn square_area_uniformity_chi_square() {
        // 4×4 equal cells, 15 degrees of freedom, critical value at 1e-3.
        const CRITICAL: f64 = 37.697;
        let set = sample_square(1.0, 2.0, 10_000, 1, 2024).unwrap();
        let mut counts = [0usize; 16];
        for &[x, y] in &set.interior {
            let i = ((x * 4.0) as usize).min(3);
            let j = ((y / 2.0 * 4.0) as usize).min(3);
            counts[4 * j + i] += 1;
        }
        let expected = 10_000.0 / 16.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < CRITICAL, "chi2 = {chi2}");
    }

    #[test]
    fn normals_point_outward() {
        let sq = sample_square(1.0, 1.0, 1, 25, 9).unwrap();
        for p in &sq.boundary {
            let d = (p.x - 0.5) * p.normal[0] + (p.y - 0.5) * p.normal[1];
            assert!(d > 0.0);
        }
        let disk = sample_disk(1.0, 1, 100, 9).unwrap();
        for p in &disk.boundary {
            assert!(p.x * p.normal[0] + p.y * p.normal[1] > 0.0);
        }
    }

    #[test]
    fn zero_counts_rejected() {
        assert!(sample_square(1.0, 1.0, 0, 10, 1).is_err());
        assert!(sample_disk(1.0, 10, 0, 1).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let set = sample_square(1.0, 1.0, 20, 5, 17).unwrap();
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,y,nx,ny,segment\n"));
        let back = CollocationSet::read_csv(buf.as_slice(), 17).unwrap();
        assert_eq!(back, set);
        let mut again = Vec::new();
        back.write_csv(&mut again).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn csv_rejects_partial_boundary_rows() {
        let text = "x,y,nx,ny,segment\n0.5,0.0,0.0,,2\n";
        assert!(CollocationSet::read_csv(text.as_bytes(), 0).is_err());
    }
}
