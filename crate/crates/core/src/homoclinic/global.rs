//! Global maps `T1`, `T2` from a neighbourhood of a homoclinic point near
//! `W^u_loc` to a neighbourhood of its image near `W^s_loc`.

use nalgebra::{Matrix2, Vector2};

use super::local::Point;
use crate::error::{invalid, Result};

/// Quadratic Taylor truncation
/// `x' = x⁺ + a x + b (y - y⁻)`, `y' = μ + c·x + d (y - y⁻)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalMapTaylor {
    pub x_plus: Vector2<f64>,
    pub y_minus: f64,
    pub a: Matrix2<f64>,
    pub b: Vector2<f64>,
    pub c: Vector2<f64>,
    pub d: f64,
    pub mu: f64,
}

impl GlobalMapTaylor {
    pub fn new(
        x_plus: Vector2<f64>,
        y_minus: f64,
        a: Matrix2<f64>,
        b: Vector2<f64>,
        c: Vector2<f64>,
        d: f64,
        mu: f64,
    ) -> Result<Self> {
        let g = Self {
            x_plus,
            y_minus,
            a,
            b,
            c,
            d,
            mu,
        };
        g.validate()?;
        Ok(g)
    }

    /// Scalar-coordinate form used with a saddle.
    pub fn scalar(x_plus: f64, y_minus: f64, a: f64, b: f64, c: f64, d: f64, mu: f64) -> Result<Self> {
        Self::new(
            Vector2::new(x_plus, 0.0),
            y_minus,
            Matrix2::new(a, 0.0, 0.0, 0.0),
            Vector2::new(b, 0.0),
            Vector2::new(c, 0.0),
            d,
            mu,
        )
    }

    /// `x⁺ = y⁻ = b = c = d = 1`, `a = 0`, `μ = 0`.
    pub fn unit_saddle() -> Self {
        Self::scalar(1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0).expect("unit coefficients are valid")
    }

    /// Focus analogue of [`unit_saddle`](Self::unit_saddle) with `b`, `c`, `x⁺`
    /// along the first axis.
    pub fn unit_focus() -> Self {
        Self::new(
            Vector2::new(1.0, 0.0),
            1.0,
            Matrix2::zeros(),
            Vector2::new(1.0, 0.0),
            Vector2::new(1.0, 0.0),
            1.0,
            0.0,
        )
        .expect("unit coefficients are valid")
    }

    pub fn validate(&self) -> Result<()> {
        let scalars = [self.y_minus, self.d, self.mu];
        let mut all = self
            .x_plus
            .iter()
            .chain(self.a.iter())
            .chain(self.b.iter())
            .chain(self.c.iter())
            .chain(scalars.iter());
        if all.any(|v| !v.is_finite()) {
            return invalid("global map coefficients must be finite");
        }
        if self.d == 0.0 {
            return invalid("global map has d = 0 (tangency is not quadratic)");
        }
        if self.b.norm() == 0.0 || self.c.norm() == 0.0 {
            return invalid("global map has b = 0 or c = 0 (tangency is not simple)");
        }
        Ok(())
    }

    /// True when only first coordinates are used, as required for a saddle.
    pub fn is_scalar(&self) -> bool {
        self.x_plus[1] == 0.0
            && self.b[1] == 0.0
            && self.c[1] == 0.0
            && self.a[(0, 1)] == 0.0
            && self.a[(1, 0)] == 0.0
            && self.a[(1, 1)] == 0.0
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn apply(&self, p: &Point) -> Point {
        let dy = p.y - self.y_minus;
        Point {
            x: self.x_plus + self.a * p.x + self.b * dy,
            y: self.mu + self.c.dot(&p.x) + self.d * dy * dy,
        }
    }
}
