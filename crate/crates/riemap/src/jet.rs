//! Second-order forward jets: a scalar value carried together with its exact
//! gradient and Hessian with respect to the chart coordinates.
//!
//! Every differential quantity in the crate (Christoffel symbols, curvature,
//! map Hessians) is assembled from these jets, so derivatives are propagated
//! through the chain rule rather than approximated.

use nalgebra::{DMatrix, DVector};

/// Value, gradient and Hessian of a scalar at a point of an n-coordinate chart.
///
/// The Hessian is symmetric by construction: every operation fills the upper
/// triangle and mirrors it, so `hessian[(i, j)]` and `hessian[(j, i)]` are
/// bit-identical.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarJet2 {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

/// Builds a symmetric matrix from an upper-triangle generator.
pub fn sym_from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = f(i, j);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

impl ScalarJet2 {
    pub fn constant(n: usize, value: f64) -> Self {
        Self {
            value,
            gradient: DVector::zeros(n),
            hessian: DMatrix::zeros(n, n),
        }
    }

    /// Jet of the i-th coordinate function at a point where it takes `value`.
    pub fn variable(n: usize, index: usize, value: f64) -> Self {
        let mut gradient = DVector::zeros(n);
        gradient[index] = 1.0;
        Self {
            value,
            gradient,
            hessian: DMatrix::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    pub fn neg(&self) -> Self {
        Self {
            value: -self.value,
            gradient: -&self.gradient,
            hessian: -&self.hessian,
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self {
            value: self.value + rhs.value,
            gradient: &self.gradient + &rhs.gradient,
            hessian: &self.hessian + &rhs.hessian,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self {
            value: self.value - rhs.value,
            gradient: &self.gradient - &rhs.gradient,
            hessian: &self.hessian - &rhs.hessian,
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let n = self.dim();
        // (fg)'' = f''g + f'⊗g' + g'⊗f' + fg''
        let hessian = sym_from_fn(n, |i, j| {
            self.hessian[(i, j)] * rhs.value
                + self.gradient[i] * rhs.gradient[j]
                + rhs.gradient[i] * self.gradient[j]
                + self.value * rhs.hessian[(i, j)]
        });
        Self {
            value: self.value * rhs.value,
            gradient: &self.gradient * rhs.value + &rhs.gradient * self.value,
            hessian,
        }
    }

    pub fn div(&self, rhs: &Self) -> Self {
        let n = self.dim();
        let q = self.value / rhs.value;
        // from f = q g: q' = (f' - q g')/g, q'' = (f'' - q'⊗g' - g'⊗q' - q g'')/g
        let gradient = (&self.gradient - &rhs.gradient * q) / rhs.value;
        let hessian = sym_from_fn(n, |i, j| {
            (self.hessian[(i, j)]
                - gradient[i] * rhs.gradient[j]
                - rhs.gradient[i] * gradient[j]
                - q * rhs.hessian[(i, j)])
                / rhs.value
        });
        Self {
            value: q,
            gradient,
            hessian,
        }
    }

    /// Chain rule for a scalar function applied to this jet, given the value
    /// and first two derivatives of the function at `self.value`.
    pub fn compose(&self, value: f64, d1: f64, d2: f64) -> Self {
        let n = self.dim();
        let hessian = sym_from_fn(n, |i, j| {
            d1 * self.hessian[(i, j)] + d2 * self.gradient[i] * self.gradient[j]
        });
        Self {
            value,
            gradient: &self.gradient * d1,
            hessian,
        }
    }

    /// Integer power by repeated multiplication (stable for jets; no logs).
    pub fn powi(&self, exp: i32) -> Self {
        let n = self.dim();
        if exp == 0 {
            return Self::constant(n, 1.0);
        }
        let mag = exp.unsigned_abs();
        let mut acc = self.clone();
        for _ in 1..mag {
            acc = acc.mul(self);
        }
        if exp < 0 {
            Self::constant(n, 1.0).div(&acc)
        } else {
            acc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seed(n: usize, value: f64, grad: &[f64]) -> ScalarJet2 {
        ScalarJet2 {
            value,
            gradient: DVector::from_row_slice(grad),
            hessian: DMatrix::zeros(n, n),
        }
    }

    #[test]
    fn product_rule_quadratic() {
        // f = x, g = x at x=3 -> fg = x^2: value 9, d=6, dd=2
        let x = ScalarJet2::variable(1, 0, 3.0);
        let sq = x.mul(&x);
        assert_eq!(sq.value, 9.0);
        assert_eq!(sq.gradient[0], 6.0);
        assert_eq!(sq.hessian[(0, 0)], 2.0);
    }

    #[test]
    fn mixed_partials_symmetric_exactly() {
        // f = x*y*(x+y) at (2, 5)
        let x = ScalarJet2::variable(2, 0, 2.0);
        let y = ScalarJet2::variable(2, 1, 5.0);
        let f = x.mul(&y).mul(&x.add(&y));
        assert_eq!(f.hessian[(0, 1)].to_bits(), f.hessian[(1, 0)].to_bits());
        // f = x^2 y + x y^2: f_xy = 2x + 2y = 14
        assert_eq!(f.hessian[(0, 1)], 14.0);
    }

    #[test]
    fn quotient_rule() {
        // f = 1/x at x=2: value 0.5, d = -0.25, dd = 0.25
        let one = ScalarJet2::constant(1, 1.0);
        let x = ScalarJet2::variable(1, 0, 2.0);
        let r = one.div(&x);
        assert!((r.value - 0.5).abs() < 1e-15);
        assert!((r.gradient[0] + 0.25).abs() < 1e-15);
        assert!((r.hessian[(0, 0)] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn powi_matches_repeated_mul() {
        let x = seed(2, 1.5, &[1.0, 2.0]);
        let cubed = x.powi(3);
        let manual = x.mul(&x).mul(&x);
        assert_eq!(cubed.value, manual.value);
        assert_eq!(cubed.gradient, manual.gradient);
        assert_eq!(cubed.hessian, manual.hessian);
    }

    #[test]
    fn powi_negative() {
        // x^-2 at x=2: value 0.25, d = -2 x^-3 = -0.25, dd = 6 x^-4 = 0.375
        let x = ScalarJet2::variable(1, 0, 2.0);
        let r = x.powi(-2);
        assert!((r.value - 0.25).abs() < 1e-15);
        assert!((r.gradient[0] + 0.25).abs() < 1e-15);
        assert!((r.hessian[(0, 0)] - 0.375).abs() < 1e-15);
    }

    #[test]
    fn compose_chain_rule() {
        // sin(x^2) at x=1: d = 2x cos(x^2), dd = 2cos(x^2) - 4x^2 sin(x^2)
        let x = ScalarJet2::variable(1, 0, 1.0);
        let sq = x.mul(&x);
        let s = sq.compose(sq.value.sin(), sq.value.cos(), -sq.value.sin());
        assert!((s.value - 1f64.sin()).abs() < 1e-15);
        assert!((s.gradient[0] - 2.0 * 1f64.cos()).abs() < 1e-15);
        assert!((s.hessian[(0, 0)] - (2.0 * 1f64.cos() - 4.0 * 1f64.sin())).abs() < 1e-14);
    }

    #[test]
    fn constants_have_zero_derivatives() {
        let c = ScalarJet2::constant(3, 7.25);
        assert!(c.gradient.iter().all(|&g| g == 0.0));
        assert!(c.hessian.iter().all(|&h| h == 0.0));
    }
}
