//! Truncated bivariate jets.
//!
//! A [`Jet`] carries the value of a scalar field `f(x, y)` together with every
//! partial derivative `∂^{i+j} f / ∂x^i ∂y^j` with `i + j ≤ 4`. Components are
//! raw derivative values, not factorial-scaled Taylor coefficients, so the
//! product follows the generalized Leibniz rule with binomial weights.
//!
//! Storage is ordered by total degree, then by the power of `y`:
//!
//! ```text
//! 0:(0,0)  1:(1,0) 2:(0,1)  3:(2,0) 4:(1,1) 5:(0,2)
//! 6:(3,0) 7:(2,1) 8:(1,2) 9:(0,3)  10:(4,0) 11:(3,1) 12:(2,2) 13:(1,3) 14:(0,4)
//! ```

use std::fmt;
use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub, SubAssign};

/// Highest total derivative order carried by a jet.
pub const ORDER: usize = 4;

/// Number of stored components.
pub const LEN: usize = 15;

/// Storage slot of the multi-index `(i, j)`. Requires `i + j <= ORDER`.
#[inline]
pub const fn index(i: usize, j: usize) -> usize {
    let n = i + j;
    n * (n + 1) / 2 + j
}

/// Multi-index `(i, j)` of every storage slot.
pub const MULTI_INDEX: [(usize, usize); LEN] = {
    let mut out = [(0, 0); LEN];
    let mut n = 0;
    while n <= ORDER {
        let mut j = 0;
        while j <= n {
            out[index(n - j, j)] = (n - j, j);
            j += 1;
        }
        n += 1;
    }
    out
};

const fn binomial(n: usize, k: usize) -> usize {
    let mut r = 1;
    let mut i = 0;
    while i < k {
        r = r * (n - i) / (i + 1);
        i += 1;
    }
    r
}

/// One Leibniz term: `out[o] += coef * a[a] * b[b]`.
#[derive(Clone, Copy)]
struct Term {
    out: u8,
    lhs: u8,
    rhs: u8,
    coef: f64,
}

const PRODUCT_TERMS: usize = 70;

const PRODUCT: [Term; PRODUCT_TERMS] = {
    let mut table = [Term {
        out: 0,
        lhs: 0,
        rhs: 0,
        coef: 0.0,
    }; PRODUCT_TERMS];
    let mut t = 0;
    let mut o = 0;
    while o < LEN {
        let (i, j) = MULTI_INDEX[o];
        let mut p = 0;
        while p <= i {
            let mut q = 0;
            while q <= j {
                table[t] = Term {
                    out: o as u8,
                    lhs: index(p, q) as u8,
                    rhs: index(i - p, j - q) as u8,
                    coef: (binomial(i, p) * binomial(j, q)) as f64,
                };
                t += 1;
                q += 1;
            }
            p += 1;
        }
        o += 1;
    }
    assert!(t == PRODUCT_TERMS);
    table
};

const fn order_of(slot: u8) -> usize {
    let (i, j) = MULTI_INDEX[slot as usize];
    i + j
}

const fn keeps(t: &Term, min_lhs: usize, min_rhs: usize) -> bool {
    order_of(t.lhs) >= min_lhs && order_of(t.rhs) >= min_rhs
}

const fn count_terms(min_lhs: usize, min_rhs: usize) -> usize {
    let mut n = 0;
    let mut k = 0;
    while k < PRODUCT_TERMS {
        if keeps(&PRODUCT[k], min_lhs, min_rhs) {
            n += 1;
        }
        k += 1;
    }
    n
}

/// Product terms that can be nonzero when the left factor has no components
/// below order `min_lhs` and the right none below `min_rhs`.
const fn filter_terms<const N: usize>(min_lhs: usize, min_rhs: usize) -> [Term; N] {
    let mut out = [PRODUCT[0]; N];
    let mut n = 0;
    let mut k = 0;
    while k < PRODUCT_TERMS {
        if keeps(&PRODUCT[k], min_lhs, min_rhs) {
            out[n] = PRODUCT[k];
            n += 1;
        }
        k += 1;
    }
    out
}

const PRODUCT_11: [Term; count_terms(1, 1)] = filter_terms::<{ count_terms(1, 1) }>(1, 1);
const PRODUCT_21: [Term; count_terms(2, 1)] = filter_terms::<{ count_terms(2, 1) }>(2, 1);
const PRODUCT_22: [Term; count_terms(2, 2)] = filter_terms::<{ count_terms(2, 2) }>(2, 2);

#[inline(always)]
fn mul_with<const N: usize>(table: &[Term; N], a: &[f64; LEN], b: &[f64; LEN]) -> [f64; LEN] {
    let mut out = [0.0; LEN];
    for t in table {
        out[t.out as usize] += t.coef * a[t.lhs as usize] * b[t.rhs as usize];
    }
    out
}

/// Value and partial derivatives up to total order 4 of a field in `(x, y)`.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct Jet {
    coeffs: [f64; LEN],
}

impl Jet {
    pub const ZERO: Jet = Jet { coeffs: [0.0; LEN] };

    pub const fn from_coeffs(coeffs: [f64; LEN]) -> Self {
        Jet { coeffs }
    }

    /// A field that is constant in `(x, y)`.
    pub const fn constant(value: f64) -> Self {
        let mut coeffs = [0.0; LEN];
        coeffs[0] = value;
        Jet { coeffs }
    }

    /// The coordinate `x`, seeded at `(x0, y0)`.
    pub fn variable_x(x0: f64, _y0: f64) -> Self {
        let mut coeffs = [0.0; LEN];
        coeffs[0] = x0;
        coeffs[index(1, 0)] = 1.0;
        Jet { coeffs }
    }

    /// The coordinate `y`, seeded at `(x0, y0)`.
    pub fn variable_y(_x0: f64, y0: f64) -> Self {
        let mut coeffs = [0.0; LEN];
        coeffs[0] = y0;
        coeffs[index(0, 1)] = 1.0;
        Jet { coeffs }
    }

    /// Unit jet with a single 1 in slot `k`.
    pub fn basis(k: usize) -> Self {
        let mut coeffs = [0.0; LEN];
        coeffs[k] = 1.0;
        Jet { coeffs }
    }

    pub fn coeffs(&self) -> &[f64; LEN] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64; LEN] {
        &mut self.coeffs
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// `∂^{i+j} f / ∂x^i ∂y^j`.
    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.coeffs[index(i, j)]
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut out = *self;
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out
    }

    pub fn dot(&self, other: &Jet) -> f64 {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// `∇⁴f = f_xxxx + 2 f_xxyy + f_yyyy`.
    pub fn biharmonic(&self) -> f64 {
        self.d(4, 0) + 2.0 * self.d(2, 2) + self.d(0, 4)
    }

    /// `∇²f = f_xx + f_yy`.
    pub fn laplacian(&self) -> f64 {
        self.d(2, 0) + self.d(0, 2)
    }

    /// Adjoint of `h ↦ self * h`: returns `Mᵀ g` where `M` is the
    /// multiplication-by-`self` operator on the 15 components.
    pub fn mul_transpose(&self, g: &Jet) -> Jet {
        let mut out = [0.0; LEN];
        for t in PRODUCT.iter() {
            out[t.rhs as usize] += t.coef * self.coeffs[t.lhs as usize] * g.coeffs[t.out as usize];
        }
        Jet { coeffs: out }
    }

    /// Compose a univariate function with this jet, given its derivatives
    /// `f(a0), f'(a0), …, f''''(a0)` at the jet's value `a0`.
    ///
    /// Uses `f(a0 + δ) = Σ f⁽ᵏ⁾(a0) δᵏ / k!`, exact in the truncated algebra
    /// because `δ` has no constant part.
    pub fn compose(&self, derivs: &[f64; ORDER + 1]) -> Jet {
        let powers = self.nilpotent_powers();
        compose_with_powers(&powers, derivs)
    }

    /// `δ, δ², δ³, δ⁴` for `δ = self − value`.
    fn nilpotent_powers(&self) -> [Jet; ORDER] {
        let mut delta = *self;
        delta.coeffs[0] = 0.0;
        let d = &delta.coeffs;
        let d2 = mul_with(&PRODUCT_11, d, d);
        let d3 = mul_with(&PRODUCT_21, &d2, d);
        let d4 = mul_with(&PRODUCT_22, &d2, &d2);
        [delta, Jet { coeffs: d2 }, Jet { coeffs: d3 }, Jet { coeffs: d4 }]
    }

    pub fn tanh(&self) -> Jet {
        let d = tanh_derivatives(self.value());
        self.compose(&[d[0], d[1], d[2], d[3], d[4]])
    }

    /// `tanh(self)` together with `tanh'(self)`, both as jets. The second jet
    /// is the Jacobian of the map `a ↦ tanh(a)` in the truncated algebra.
    pub fn tanh_with_derivative(&self) -> (Jet, Jet) {
        let d = tanh_derivatives(self.value());
        let powers = self.nilpotent_powers();
        (
            compose_with_powers(&powers, &[d[0], d[1], d[2], d[3], d[4]]),
            compose_with_powers(&powers, &[d[1], d[2], d[3], d[4], d[5]]),
        )
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose(&[s, c, -s, -c, s])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose(&[c, -s, -c, s, c])
    }

    pub fn powi(&self, n: u32) -> Jet {
        let mut out = Jet::constant(1.0);
        for _ in 0..n {
            out = out * *self;
        }
        out
    }
}

fn compose_with_powers(powers: &[Jet; ORDER], derivs: &[f64; ORDER + 1]) -> Jet {
    const INV_FACT: [f64; ORDER + 1] = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0];
    let mut out = [0.0; LEN];
    out[0] = derivs[0];
    for (k, p) in powers.iter().enumerate() {
        let s = derivs[k + 1] * INV_FACT[k + 1];
        // δᵏ has no components below total order k.
        let start = index(k + 1, 0);
        for (o, c) in out.iter_mut().zip(p.coeffs.iter()).skip(start) {
            *o += s * c;
        }
    }
    Jet { coeffs: out }
}

/// `tanh` and its first five derivatives at `a`.
pub fn tanh_derivatives(a: f64) -> [f64; 6] {
    let t = a.tanh();
    let t1 = 1.0 - t * t;
    let t2 = -2.0 * t * t1;
    let t3 = -2.0 * (t1 * t1 + t * t2);
    let t4 = -2.0 * (3.0 * t1 * t2 + t * t3);
    let t5 = -2.0 * (3.0 * t2 * t2 + 4.0 * t1 * t3 + t * t4);
    [t, t1, t2, t3, t4, t5]
}

impl Index<usize> for Jet {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.coeffs[k]
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (k, (i, j)) in MULTI_INDEX.iter().enumerate() {
            if self.coeffs[k] != 0.0 {
                m.entry(&format_args!("d{i}{j}"), &self.coeffs[k]);
            }
        }
        m.finish()
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        self += rhs;
        self
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        self.coeffs
            .iter_mut()
            .zip(rhs.coeffs.iter())
            .for_each(|(a, b)| *a += b);
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        self -= rhs;
        self
    }
}

impl SubAssign for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        self.coeffs
            .iter_mut()
            .zip(rhs.coeffs.iter())
            .for_each(|(a, b)| *a -= b);
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let mut out = [0.0; LEN];
        for t in PRODUCT.iter() {
            out[t.out as usize] += t.coef * self.coeffs[t.lhs as usize] * rhs.coeffs[t.rhs as usize];
        }
        Jet { coeffs: out }
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.coeffs[0] += rhs;
        self
    }
}

/// Scalar fields that can be evaluated either on plain numbers or on jets.
///
/// Analytical deflections are written once against this trait so the same
/// expression yields both point values and exact derivatives.
pub trait Field:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Mul<f64, Output = Self>
{
    fn constant(v: f64) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
}

impl Field for f64 {
    fn constant(v: f64) -> Self {
        v
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
}

impl Field for Jet {
    fn constant(v: f64) -> Self {
        Jet::constant(v)
    }
    fn sin(self) -> Self {
        Jet::sin(&self)
    }
    fn cos(self) -> Self {
        Jet::cos(&self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn index_layout_matches_degree_ordering() {
        let expected = [
            (0, 0),
            (1, 0),
            (0, 1),
            (2, 0),
            (1, 1),
            (0, 2),
            (3, 0),
            (2, 1),
            (1, 2),
            (0, 3),
            (4, 0),
            (3, 1),
            (2, 2),
            (1, 3),
            (0, 4),
        ];
        assert_eq!(MULTI_INDEX, expected);
        for (k, &(i, j)) in expected.iter().enumerate() {
            assert_eq!(index(i, j), k);
        }
    }

    #[test]
    fn variable_seeds() {
        let x = Jet::variable_x(2.0, 5.0);
        assert_eq!(x.value(), 2.0);
        assert_eq!(x.d(1, 0), 1.0);
        assert_eq!(x.d(0, 1), 0.0);
        assert!(x.coeffs()[3..].iter().all(|&c| c == 0.0));

        let x0 = Jet::variable_x(0.0, 0.0);
        assert_eq!(x0.value(), 0.0);
        assert_eq!(x0.d(1, 0), 1.0);

        let s = Jet::variable_x(1.5, -0.5) + Jet::variable_y(1.5, -0.5);
        assert_eq!(s.value(), 1.0);
        assert_eq!(s.d(1, 0), 1.0);
        assert_eq!(s.d(0, 1), 1.0);
    }

    #[test]
    fn linear_ops() {
        let x = Jet::variable_x(1.0, 1.0);
        let s = x + x;
        assert_eq!(s.value(), 2.0);
        assert_eq!(s.d(1, 0), 2.0);

        let y3 = Jet::variable_y(0.0, 0.0).scale(3.0);
        assert_eq!(y3.d(0, 1), 3.0);
        assert_eq!(y3.d(1, 0), 0.0);

        let j = Jet::from_coeffs(std::array::from_fn(|k| (k as f64).sin() * 3.7));
        assert_eq!((j - j), Jet::ZERO);
    }

    #[test]
    fn products_of_coordinates() {
        let x = Jet::variable_x(2.0, 0.0);
        let xx = x * x;
        assert_eq!(xx.value(), 4.0);
        assert_eq!(xx.d(1, 0), 4.0);
        assert_eq!(xx.d(2, 0), 2.0);
        assert_eq!(xx.d(3, 0), 0.0);
        assert_eq!(xx.d(4, 0), 0.0);

        let xy = Jet::variable_x(3.0, 5.0) * Jet::variable_y(3.0, 5.0);
        assert_eq!(xy.value(), 15.0);
        assert_eq!(xy.d(1, 0), 5.0);
        assert_eq!(xy.d(0, 1), 3.0);
        assert_eq!(xy.d(1, 1), 1.0);

        let x = Jet::variable_x(1.0, 0.0);
        let x4 = x * x * x * x;
        assert_eq!(x4.d(4, 0), 24.0);
        assert_eq!(x4.d(3, 0), 24.0);
        assert_eq!(x4.d(2, 0), 12.0);
        assert_eq!(x4.d(1, 0), 4.0);
    }

    #[test]
    fn tanh_at_origin() {
        let t = Jet::variable_x(0.0, 0.0).tanh();
        assert_eq!(t.value(), 0.0);
        assert_eq!(t.d(1, 0), 1.0);
        assert_eq!(t.d(2, 0), 0.0);
        assert_eq!(t.d(3, 0), -2.0);
        assert_eq!(t.d(4, 0), 0.0);
        assert_eq!(t.d(0, 1), 0.0);
    }

    #[test]
    fn tanh_of_constant() {
        let t = Jet::constant(0.7).tanh();
        assert_eq!(t.value(), 0.7f64.tanh());
        assert!(t.coeffs()[1..].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn tanh_of_affine_mixed_third_derivative() {
        let a = Jet::variable_x(0.0, 0.0).scale(2.0) + Jet::variable_y(0.0, 0.0).scale(3.0);
        let t = a.tanh();
        assert_relative_eq!(t.d(2, 1), -24.0, max_relative = 1e-15);
    }

    #[test]
    fn tanh_derivative_jet_is_jacobian() {
        let a = Jet::from_coeffs(std::array::from_fn(|k| 0.3 - 0.05 * k as f64));
        let (t, dt) = a.tanh_with_derivative();
        assert_eq!(t, a.tanh());
        // tanh' = 1 - tanh² holds in the algebra as well
        let expected = Jet::constant(1.0) - t * t;
        for k in 0..LEN {
            assert_relative_eq!(dt[k], expected[k], epsilon = 1e-13, max_relative = 1e-12);
        }
    }

    #[test]
    fn biharmonic_of_monomials() {
        let (x0, y0) = (0.3, -1.2);
        let x = Jet::variable_x(x0, y0);
        let y = Jet::variable_y(x0, y0);
        assert_eq!(x.powi(4).biharmonic(), 24.0);
        assert_eq!((x * x * y * y).biharmonic(), 8.0);
    }

    #[test]
    fn biharmonic_of_sine_product() {
        for &(x0, y0) in &[(0.2, 0.7), (0.5, 0.5), (0.91, 0.13)] {
            let x = Jet::variable_x(x0, y0);
            let y = Jet::variable_y(x0, y0);
            let w = x.scale(PI).sin() * y.scale(PI).sin();
            let expected = 4.0 * PI.powi(4) * (PI * x0).sin() * (PI * y0).sin();
            assert_relative_eq!(w.biharmonic(), expected, max_relative = 1e-13);
        }
    }

    #[test]
    fn sin_cos_derivatives() {
        let x = Jet::variable_x(0.4, 0.0);
        let s = x.sin();
        let c = x.cos();
        assert_relative_eq!(s.d(1, 0), 0.4f64.cos());
        assert_relative_eq!(s.d(3, 0), -(0.4f64.cos()));
        assert_relative_eq!(c.d(4, 0), 0.4f64.cos());
        // sin² + cos² = 1 to all orders
        let one = s * s + c * c;
        assert_relative_eq!(one.value(), 1.0, epsilon = 1e-15);
        assert!(one.coeffs()[1..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn mul_transpose_is_adjoint() {
        let m = Jet::from_coeffs(std::array::from_fn(|k| (k as f64 * 0.37).cos()));
        let h = Jet::from_coeffs(std::array::from_fn(|k| (k as f64 * 1.3).sin()));
        let g = Jet::from_coeffs(std::array::from_fn(|k| 0.1 * k as f64 - 0.6));
        // <g, m*h> == <Mᵀ g, h>
        assert_relative_eq!(g.dot(&(m * h)), m.mul_transpose(&g).dot(&h), max_relative = 1e-13);
    }

    fn arb_jet() -> impl Strategy<Value = Jet> {
        prop::array::uniform15(-2.0f64..2.0).prop_map(Jet::from_coeffs)
    }

    proptest! {
        #[test]
        fn product_rule_first_order(a in arb_jet(), b in arb_jet()) {
            let c = a * b;
            let expected = a[1] * b[0] + a[0] * b[1];
            prop_assert!((c[1] - expected).abs() <= 1e-14 * (1.0 + expected.abs()));
        }

        #[test]
        fn product_commutes(a in arb_jet(), b in arb_jet()) {
            let (ab, ba) = (a * b, b * a);
            for k in 0..LEN {
                prop_assert!((ab[k] - ba[k]).abs() <= 1e-13 * (1.0 + ab[k].abs()));
            }
        }

        #[test]
        fn tanh_order_k_depends_only_on_order_le_k(a in arb_jet(), bump in -1.0f64..1.0) {
            // Perturb the order-4 inputs; only order-4 outputs may move.
            let mut b = a;
            for k in index(4, 0)..LEN {
                b.coeffs_mut()[k] += bump;
            }
            let (ta, tb) = (a.tanh(), b.tanh());
            for k in 0..index(4, 0) {
                prop_assert_eq!(ta[k], tb[k]);
            }
        }

        #[test]
        fn biharmonic_is_linear(a in arb_jet(), b in arb_jet(), s in -3.0f64..3.0) {
            let lhs = (a + b.scale(s)).biharmonic();
            let rhs = a.biharmonic() + s * b.biharmonic();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }
    }
}
