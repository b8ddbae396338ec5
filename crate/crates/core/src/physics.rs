//! Kirchhoff plate quantities derived from a deflection jet.
//!
//! Sign conventions: curvatures `κx = −w_xx`, `κy = −w_yy`, `κxy = −2 w_xy`;
//! moments `Mx = −D(w_xx + ν w_yy)`, `My = −D(w_yy + ν w_xx)`,
//! `Mxy = −D(1 − ν) w_xy`; shears `Qx = ∂Mx/∂x + ∂Mxy/∂y`,
//! `Qy = ∂Mxy/∂x + ∂My/∂y`.
//!
//! Boundary quantities are rotated into the frame `(n, s)` with the tangent
//! `s = (−ny, nx)`, i.e. the outward normal turned by +90°.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;

/// Tolerance on `|‖n‖ − 1|` for boundary normals.
pub const NORMAL_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    pub thickness: f64,
    /// `E h³ / (12 (1 − ν²))`.
    pub rigidity: f64,
}

impl Material {
    pub fn new(youngs_modulus: f64, poisson_ratio: f64, thickness: f64) -> Result<Self> {
        if !(youngs_modulus > 0.0 && youngs_modulus.is_finite()) {
            return Err(Error::Material(format!(
                "Young's modulus must be positive, got {youngs_modulus}"
            )));
        }
        if !(0.0..0.5).contains(&poisson_ratio) {
            return Err(Error::Material(format!(
                "Poisson ratio must lie in [0, 0.5), got {poisson_ratio}"
            )));
        }
        if !(thickness > 0.0 && thickness.is_finite()) {
            return Err(Error::Material(format!(
                "thickness must be positive, got {thickness}"
            )));
        }
        let rigidity = youngs_modulus * thickness.powi(3) / (12.0 * (1.0 - poisson_ratio * poisson_ratio));
        Ok(Material {
            youngs_modulus,
            poisson_ratio,
            thickness,
            rigidity,
        })
    }

    /// Unit-thickness material with the given bending rigidity.
    pub fn from_rigidity(rigidity: f64, poisson_ratio: f64) -> Result<Self> {
        if !(rigidity > 0.0 && rigidity.is_finite()) {
            return Err(Error::Material(format!(
                "bending rigidity must be positive, got {rigidity}"
            )));
        }
        let e = 12.0 * (1.0 - poisson_ratio * poisson_ratio) * rigidity;
        let mut m = Material::new(e, poisson_ratio, 1.0)?;
        m.rigidity = rigidity;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let check = Material::new(self.youngs_modulus, self.poisson_ratio, self.thickness)?;
        let tol = 1e-12 * check.rigidity.abs().max(f64::MIN_POSITIVE);
        if (check.rigidity - self.rigidity).abs() > tol {
            return Err(Error::Material(format!(
                "rigidity {} inconsistent with E, ν, h (expected {})",
                self.rigidity, check.rigidity
            )));
        }
        Ok(())
    }
}

/// Plate response at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateState {
    pub w: f64,
    pub w_x: f64,
    pub w_y: f64,
    pub kx: f64,
    pub ky: f64,
    pub kxy: f64,
    pub mx: f64,
    pub my: f64,
    pub mxy: f64,
    pub qx: f64,
    pub qy: f64,
}

impl PlateState {
    pub fn from_jet(jet: &Jet, mat: &Material) -> Self {
        let (mx, my, mxy) = moments(jet, mat);
        let (qx, qy) = shears(jet, mat);
        PlateState {
            w: jet.value(),
            w_x: jet.d(1, 0),
            w_y: jet.d(0, 1),
            kx: -jet.d(2, 0),
            ky: -jet.d(0, 2),
            kxy: -2.0 * jet.d(1, 1),
            mx,
            my,
            mxy,
            qx,
            qy,
        }
    }
}

/// Edge support class with its prescribed values. Prescribed values are
/// constant along a boundary segment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryCondition {
    /// Γ1: `w = w̃`, `∂w/∂n = θ̃n`.
    Clamped {
        #[serde(default)]
        w: f64,
        #[serde(default)]
        theta_n: f64,
    },
    /// Γ2: `w = w̃`, `Mn = M̃n`.
    SimplySupported {
        #[serde(default)]
        w: f64,
        #[serde(default)]
        m_n: f64,
    },
    /// Γ3: `Mn = M̃n`, `∂Mns/∂s + Qn = q̃`.
    Free {
        #[serde(default)]
        m_n: f64,
        #[serde(default)]
        q: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryKind {
    Clamped,
    SimplySupported,
    Free,
}

impl BoundaryCondition {
    pub fn clamped() -> Self {
        BoundaryCondition::Clamped { w: 0.0, theta_n: 0.0 }
    }

    pub fn simply_supported() -> Self {
        BoundaryCondition::SimplySupported { w: 0.0, m_n: 0.0 }
    }

    pub fn free() -> Self {
        BoundaryCondition::Free { m_n: 0.0, q: 0.0 }
    }

    pub fn kind(&self) -> BoundaryKind {
        match self {
            BoundaryCondition::Clamped { .. } => BoundaryKind::Clamped,
            BoundaryCondition::SimplySupported { .. } => BoundaryKind::SimplySupported,
            BoundaryCondition::Free { .. } => BoundaryKind::Free,
        }
    }

    /// Same kind with all prescribed values set to zero.
    pub fn homogeneous(&self) -> Self {
        match self.kind() {
            BoundaryKind::Clamped => Self::clamped(),
            BoundaryKind::SimplySupported => Self::simply_supported(),
            BoundaryKind::Free => Self::free(),
        }
    }
}

/// `(Mx, My, Mxy)`.
pub fn moments(jet: &Jet, mat: &Material) -> (f64, f64, f64) {
    let d = mat.rigidity;
    let nu = mat.poisson_ratio;
    let (wxx, wyy, wxy) = (jet.d(2, 0), jet.d(0, 2), jet.d(1, 1));
    (
        -d * (wxx + nu * wyy),
        -d * (wyy + nu * wxx),
        -d * (1.0 - nu) * wxy,
    )
}

/// `(Qx, Qy)`.
pub fn shears(jet: &Jet, mat: &Material) -> (f64, f64) {
    let d = mat.rigidity;
    (
        -d * (jet.d(3, 0) + jet.d(1, 2)),
        -d * (jet.d(2, 1) + jet.d(0, 3)),
    )
}

/// `∇⁴w − (p − k w) / D`. A zero foundation modulus disables the foundation.
pub fn interior_residual(jet: &Jet, load: f64, foundation: f64, mat: &Material) -> Result<f64> {
    if mat.rigidity == 0.0 {
        return Err(Error::ZeroRigidity);
    }
    Ok(jet.biharmonic() - (load - foundation * jet.value()) / mat.rigidity)
}

/// Normal moment `Mn`.
pub fn normal_moment(jet: &Jet, normal: [f64; 2], mat: &Material) -> f64 {
    let (mx, my, mxy) = moments(jet, mat);
    let [nx, ny] = normal;
    mx * nx * nx + 2.0 * mxy * nx * ny + my * ny * ny
}

/// Twisting moment `Mns`.
pub fn twisting_moment(jet: &Jet, normal: [f64; 2], mat: &Material) -> f64 {
    let (mx, my, mxy) = moments(jet, mat);
    let [nx, ny] = normal;
    (my - mx) * nx * ny + mxy * (nx * nx - ny * ny)
}

/// `∂Mns/∂s + Qn`, with the frame `(n, s)` held fixed at the point.
pub fn effective_shear(jet: &Jet, normal: [f64; 2], mat: &Material) -> f64 {
    let d = mat.rigidity;
    let nu = mat.poisson_ratio;
    let [nx, ny] = normal;
    let [sx, sy] = tangent(normal);
    // Gradients of the moment fields from third derivatives of w.
    let dmx = |i: usize, j: usize| -d * (jet.d(2 + i, j) + nu * jet.d(i, 2 + j));
    let dmy = |i: usize, j: usize| -d * (jet.d(i, 2 + j) + nu * jet.d(2 + i, j));
    let dmxy = |i: usize, j: usize| -d * (1.0 - nu) * jet.d(1 + i, 1 + j);
    let ds = |f: &dyn Fn(usize, usize) -> f64| sx * f(1, 0) + sy * f(0, 1);
    let dmns_ds = (ds(&dmy) - ds(&dmx)) * nx * ny + ds(&dmxy) * (nx * nx - ny * ny);
    let (qx, qy) = shears(jet, mat);
    dmns_ds + qx * nx + qy * ny
}

/// Tangent `s = (−ny, nx)`.
pub fn tangent(normal: [f64; 2]) -> [f64; 2] {
    [-normal[1], normal[0]]
}

pub fn check_normal(normal: [f64; 2]) -> Result<()> {
    let [nx, ny] = normal;
    let norm = (nx * nx + ny * ny).sqrt();
    if !((norm - 1.0).abs() <= NORMAL_TOLERANCE) {
        return Err(Error::NonUnitNormal { nx, ny });
    }
    Ok(())
}

/// The two residual equations of a boundary condition at one point.
pub fn boundary_residuals(
    jet: &Jet,
    bc: &BoundaryCondition,
    normal: [f64; 2],
    mat: &Material,
) -> Result<(f64, f64)> {
    check_normal(normal)?;
    let [nx, ny] = normal;
    Ok(match *bc {
        BoundaryCondition::Clamped { w, theta_n } => {
            let dw_dn = jet.d(1, 0) * nx + jet.d(0, 1) * ny;
            (jet.value() - w, dw_dn - theta_n)
        }
        BoundaryCondition::SimplySupported { w, m_n } => {
            (jet.value() - w, normal_moment(jet, normal, mat) - m_n)
        }
        BoundaryCondition::Free { m_n, q } => (
            normal_moment(jet, normal, mat) - m_n,
            effective_shear(jet, normal, mat) - q,
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn xy(x0: f64, y0: f64) -> (Jet, Jet) {
        (Jet::variable_x(x0, y0), Jet::variable_y(x0, y0))
    }

    fn unit(d: f64, nu: f64) -> Material {
        Material::from_rigidity(d, nu).unwrap()
    }

    #[test]
    fn rigidity_from_engineering_constants() {
        let m = Material::new(210e9, 0.3, 0.01).unwrap();
        assert_relative_eq!(m.rigidity, 210e9 * 1e-6 / (12.0 * 0.91), max_relative = 1e-15);
        m.validate().unwrap();
        let u = unit(2.5, 0.3);
        assert_eq!(u.rigidity, 2.5);
        u.validate().unwrap();
        assert!(Material::new(1.0, 0.5, 1.0).is_err());
        assert!(Material::new(1.0, 0.3, 0.0).is_err());
        assert!(Material::new(-1.0, 0.3, 1.0).is_err());
    }

    #[test]
    fn moments_of_simple_fields() {
        let (x, y) = xy(0.4, 0.9);
        let (mx, my, mxy) = moments(&(x * x).scale(0.5), &unit(1.0, 0.0));
        assert_eq!((mx, my, mxy), (-1.0, 0.0, 0.0));

        let (_, _, mxy) = moments(&(x * y), &unit(2.0, 0.3));
        assert_relative_eq!(mxy, -1.4, max_relative = 1e-15);

        for nu in [0.0, 0.2, 0.45] {
            let (mx, my, _) = moments(&(x * y), &unit(1.0, nu));
            assert_eq!((mx, my), (0.0, 0.0));
        }
    }

    #[test]
    fn shears_of_simple_fields() {
        let (x, y) = xy(0.3, -0.2);
        let (qx, qy) = shears(&x.powi(3).scale(1.0 / 6.0), &unit(1.0, 0.3));
        assert_relative_eq!(qx, -1.0, max_relative = 1e-15);
        assert_eq!(qy, 0.0);

        let quad = x * x + (x * y).scale(3.0) - y * y;
        assert_eq!(shears(&quad, &unit(1.0, 0.3)), (0.0, 0.0));

        let (qx, qy) = shears(&(x * x * y), &unit(1.0, 0.3));
        assert_eq!(qx, 0.0);
        assert_eq!(qy, -2.0);
    }

    #[test]
    fn plate_state_curvatures() {
        let (x, y) = xy(0.5, 0.25);
        let w = x * x * y + y * y;
        let s = PlateState::from_jet(&w, &unit(1.0, 0.3));
        assert_eq!(s.kx, -2.0 * 0.25);
        assert_eq!(s.ky, -2.0);
        assert_eq!(s.kxy, -2.0 * 2.0 * 0.5);
    }

    fn navier_jet(x0: f64, y0: f64) -> Jet {
        let (x, y) = xy(x0, y0);
        let amp = 1.0 / (4.0 * PI.powi(4));
        (x.scale(PI).sin() * y.scale(PI).sin()).scale(amp)
    }

    #[test]
    fn navier_solution_has_zero_interior_residual() {
        let mat = unit(1.0, 0.3);
        for &(x0, y0) in &[(0.1, 0.2), (0.5, 0.5), (0.77, 0.31)] {
            let p = (PI * x0).sin() * (PI * y0).sin();
            let r = interior_residual(&navier_jet(x0, y0), p, 0.0, &mat).unwrap();
            assert!(r.abs() <= 1e-9 * p.abs(), "residual {r}");
        }
    }

    #[test]
    fn zero_field_zero_load() {
        let mat = unit(1.0, 0.3);
        assert_eq!(interior_residual(&Jet::ZERO, 0.0, 0.0, &mat).unwrap(), 0.0);
        for bc in [
            BoundaryCondition::clamped(),
            BoundaryCondition::simply_supported(),
            BoundaryCondition::free(),
        ] {
            assert_eq!(boundary_residuals(&Jet::ZERO, &bc, [0.6, 0.8], &mat).unwrap(), (0.0, 0.0));
        }
    }

    #[test]
    fn zero_rigidity_is_rejected() {
        let mut mat = unit(1.0, 0.3);
        mat.rigidity = 0.0;
        assert!(matches!(
            interior_residual(&Jet::ZERO, 1.0, 0.0, &mat),
            Err(Error::ZeroRigidity)
        ));
    }

    fn circular_jet(x0: f64, y0: f64, r: f64, p: f64, d: f64) -> Jet {
        let (x, y) = xy(x0, y0);
        let s = Jet::constant(r * r) - (x * x + y * y);
        (s * s).scale(p / (64.0 * d))
    }

    #[test]
    fn clamped_circular_solution_residuals() {
        let mat = unit(1.3, 0.3);
        let (r, p) = (1.5, 2.0);
        let r0 = circular_jet(0.3, -0.4, r, p, mat.rigidity);
        let res = interior_residual(&r0, p, 0.0, &mat).unwrap();
        assert!(res.abs() <= 1e-9 * p / mat.rigidity);

        for theta in [0.0, 0.7, 2.0, 4.4] {
            let (s, c) = f64::sin_cos(theta);
            let jet = circular_jet(r * c, r * s, r, p, mat.rigidity);
            let (r1, r2) = boundary_residuals(&jet, &BoundaryCondition::clamped(), [c, s], &mat).unwrap();
            let scale = p * r.powi(4) / (64.0 * mat.rigidity);
            assert!(r1.abs() <= 1e-9 * scale, "{r1}");
            assert!(r2.abs() <= 1e-9 * scale / r, "{r2}");
        }
    }

    #[test]
    fn navier_simply_supported_edge() {
        let mat = unit(1.0, 0.3);
        let jet = navier_jet(0.0, 0.37);
        let (r1, r2) =
            boundary_residuals(&jet, &BoundaryCondition::simply_supported(), [-1.0, 0.0], &mat).unwrap();
        assert!(r1.abs() <= 1e-9 && r2.abs() <= 1e-9, "{r1} {r2}");
    }

    #[test]
    fn non_unit_normal_is_rejected() {
        let mat = unit(1.0, 0.3);
        let err = boundary_residuals(&Jet::ZERO, &BoundaryCondition::clamped(), [1.0, 0.1], &mat);
        assert!(matches!(err, Err(Error::NonUnitNormal { .. })));
    }

    #[test]
    fn prescribed_values_shift_residuals() {
        let mat = unit(1.0, 0.3);
        let bc = BoundaryCondition::Clamped { w: 0.5, theta_n: -0.25 };
        assert_eq!(boundary_residuals(&Jet::ZERO, &bc, [0.0, 1.0], &mat).unwrap(), (-0.5, 0.25));
        let bc = BoundaryCondition::Free { m_n: 1.0, q: 2.0 };
        assert_eq!(boundary_residuals(&Jet::ZERO, &bc, [0.0, 1.0], &mat).unwrap(), (-1.0, -2.0));
    }

    #[test]
    fn manufactured_quartic_has_zero_interior_residual() {
        let mat = unit(1.7, 0.25);
        let (x, y) = xy(0.35, -0.8);
        let w = x.powi(4) + y.powi(4) + x * x * y * y;
        let p = mat.rigidity * (24.0 + 24.0 + 8.0);
        assert_eq!(interior_residual(&w, p, 0.0, &mat).unwrap(), 0.0);
    }

    #[test]
    fn free_edge_effective_shear_matches_kirchhoff_formula_on_axis_edges() {
        // On an edge with n = (1, 0): ∂Mns/∂s + Qn = −D(w_xxx + (2 − ν) w_xyy).
        let mat = unit(1.4, 0.3);
        let jet = Jet::from_coeffs(std::array::from_fn(|k| 0.2 + 0.1 * (k as f64).cos()));
        let expected = -mat.rigidity * (jet.d(3, 0) + (2.0 - 0.3) * jet.d(1, 2));
        assert_relative_eq!(effective_shear(&jet, [1.0, 0.0], &mat), expected, max_relative = 1e-13);
        // n = (0, 1): −D(w_yyy + (2 − ν) w_xxy).
        let expected = -mat.rigidity * (jet.d(0, 3) + (2.0 - 0.3) * jet.d(2, 1));
        assert_relative_eq!(effective_shear(&jet, [0.0, 1.0], &mat), expected, max_relative = 1e-13);
    }

    fn arb_jet() -> impl Strategy<Value = Jet> {
        prop::array::uniform15(-2.0f64..2.0).prop_map(Jet::from_coeffs)
    }

    proptest! {
        #[test]
        fn normal_moment_collapses_on_axis_edges(jet in arb_jet(), nu in 0.0f64..0.49) {
            let mat = unit(1.0, nu);
            let (mx, my, _) = moments(&jet, &mat);
            prop_assert!((normal_moment(&jet, [1.0, 0.0], &mat) - mx).abs() <= 1e-14);
            prop_assert!((normal_moment(&jet, [0.0, 1.0], &mat) - my).abs() <= 1e-14);
        }

        #[test]
        fn interior_residual_is_affine(a in arb_jet(), b in arb_jet(), p1 in -5.0f64..5.0, p2 in -5.0f64..5.0) {
            let mat = unit(1.3, 0.3);
            let r = |j: &Jet, p: f64| interior_residual(j, p, 0.0, &mat).unwrap();
            let lhs = r(&(a + b), p1 + p2);
            let rhs = r(&a, p1) + r(&b, p2);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }

        #[test]
        fn normal_moment_is_rotation_invariant_trace(jet in arb_jet(), theta in 0.0f64..std::f64::consts::TAU) {
            // Mn(n) + Mn(s) = Mx + My for any orthonormal frame.
            let mat = unit(1.0, 0.3);
            let n = [theta.cos(), theta.sin()];
            let (mx, my, _) = moments(&jet, &mat);
            let sum = normal_moment(&jet, n, &mat) + normal_moment(&jet, tangent(n), &mat);
            prop_assert!((sum - (mx + my)).abs() <= 1e-12 * (1.0 + (mx + my).abs()));
        }
    }
}
