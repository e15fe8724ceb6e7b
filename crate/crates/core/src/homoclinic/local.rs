//! Local map `T0` near the saddle in main normal form.

use nalgebra::{Matrix2, Vector2};

use crate::error::{invalid, Error, Result};

/// Coordinate bound past which an iterate is treated as escaped.
pub const STATE_BOUND: f64 = 1e12;

const CROSS_MAX_SWEEPS: usize = 200;
const CROSS_TOLERANCE: f64 = 1e-12;

/// A point `(x, y)` of the chart around the saddle.
///
/// `x` holds the leading stable coordinates; for a saddle only `x[0]` is used
/// and `x[1]` stays zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: Vector2<f64>,
    pub y: f64,
}

impl Point {
    pub fn new(x: Vector2<f64>, y: f64) -> Self {
        Self { x, y }
    }

    pub fn scalar(x: f64, y: f64) -> Self {
        Self {
            x: Vector2::new(x, 0.0),
            y,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.x.iter().chain(std::iter::once(&self.y)).all(|v| v.is_finite() && v.abs() <= STATE_BOUND)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalKind {
    /// Real leading multiplier `sign * lambda`.
    Saddle { sign: f64 },
    /// Complex pair `lambda * exp(±i phi)`.
    SaddleFocus { phi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nonlinearity {
    Linear,
    /// Adds `g = x^2 y` to the stable and `h = x y^2` to the unstable
    /// component; both respect the normal-form identities.
    TestCubic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalNormalForm {
    kind: LocalKind,
    lambda: f64,
    gamma: f64,
    nonlinearity: Nonlinearity,
}

impl LocalNormalForm {
    pub fn saddle(lambda: f64, gamma: f64, sign: f64) -> Result<Self> {
        if sign != 1.0 && sign != -1.0 {
            return invalid(format!("saddle multiplier sign must be ±1, got {sign}"));
        }
        Self::build(LocalKind::Saddle { sign }, lambda, gamma)
    }

    pub fn saddle_focus(lambda: f64, phi: f64, gamma: f64) -> Result<Self> {
        if !(phi > 0.0 && phi < std::f64::consts::PI) {
            return invalid(format!("focus argument phi = {phi} outside (0, pi)"));
        }
        Self::build(LocalKind::SaddleFocus { phi }, lambda, gamma)
    }

    fn build(kind: LocalKind, lambda: f64, gamma: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return invalid(format!("stable modulus lambda = {lambda} outside (0, 1)"));
        }
        if !(gamma.is_finite() && gamma.abs() > 1.0) {
            return invalid(format!("unstable multiplier gamma = {gamma} must satisfy |gamma| > 1"));
        }
        if lambda * gamma.abs() >= 1.0 {
            return invalid(format!(
                "not strongly dissipative: lambda*|gamma| = {} >= 1",
                lambda * gamma.abs()
            ));
        }
        Ok(Self {
            kind,
            lambda,
            gamma,
            nonlinearity: Nonlinearity::Linear,
        })
    }

    pub fn with_nonlinearity(mut self, nonlinearity: Nonlinearity) -> Result<Self> {
        self.nonlinearity = nonlinearity;
        self.check_identities()?;
        Ok(self)
    }

    pub fn kind(&self) -> LocalKind {
        self.kind
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn nonlinearity(&self) -> Nonlinearity {
        self.nonlinearity
    }
    pub fn is_focus(&self) -> bool {
        matches!(self.kind, LocalKind::SaddleFocus { .. })
    }

    pub fn phi(&self) -> Option<f64> {
        match self.kind {
            LocalKind::SaddleFocus { phi } => Some(phi),
            LocalKind::Saddle { .. } => None,
        }
    }

    /// `A1^n`. For a saddle the unused second row/column is the identity only
    /// at `n = 0`.
    pub fn linear_power(&self, n: usize) -> Matrix2<f64> {
        match self.kind {
            LocalKind::Saddle { sign } => {
                let tail = if n == 0 { 1.0 } else { 0.0 };
                Matrix2::new((sign * self.lambda).powi(n as i32), 0.0, 0.0, tail)
            }
            LocalKind::SaddleFocus { phi } => {
                let r = self.lambda.powi(n as i32);
                let (s, c) = (n as f64 * phi).sin_cos();
                Matrix2::new(r * c, -r * s, r * s, r * c)
            }
        }
    }

    fn stable_nonlinear(&self, x: &Vector2<f64>, y: f64) -> Vector2<f64> {
        match self.nonlinearity {
            Nonlinearity::Linear => Vector2::zeros(),
            Nonlinearity::TestCubic => Vector2::new(x[0] * x[0] * y, x[1] * x[1] * y),
        }
    }

    fn unstable_nonlinear(&self, x: &Vector2<f64>, y: f64) -> f64 {
        match self.nonlinearity {
            Nonlinearity::Linear => 0.0,
            Nonlinearity::TestCubic => (x[0] + x[1]) * y * y,
        }
    }

    /// One application of `T0`.
    pub fn step(&self, p: &Point) -> Point {
        let a = self.linear_power(1);
        Point {
            x: a * p.x + self.stable_nonlinear(&p.x, p.y),
            y: self.gamma * p.y + self.unstable_nonlinear(&p.x, p.y),
        }
    }

    // Samples the normal-form identities g(x,0)=0, g(0,y)=0, dg/dx(0,y)=0,
    // h(x,0)=0, h(0,y)=0, dh/dy(x,0)=0.
    fn check_identities(&self) -> Result<()> {
        let h = 1e-6;
        for i in 0..7 {
            let s = -0.9 + 0.3 * i as f64;
            let x = Vector2::new(s, if self.is_focus() { 0.5 * s } else { 0.0 });
            let zero = Vector2::zeros();
            let mut bad = self.stable_nonlinear(&x, 0.0).norm() > 0.0
                || self.stable_nonlinear(&zero, s).norm() > 0.0
                || self.unstable_nonlinear(&x, 0.0) != 0.0
                || self.unstable_nonlinear(&zero, s) != 0.0;
            for e in [Vector2::new(h, 0.0), Vector2::new(0.0, h)] {
                let dg = (self.stable_nonlinear(&e, s) - self.stable_nonlinear(&(-e), s)) / (2.0 * h);
                bad |= dg.norm() > 1e-8;
            }
            let dh = (self.unstable_nonlinear(&x, h) - self.unstable_nonlinear(&x, -h)) / (2.0 * h);
            bad |= dh.abs() > 1e-8;
            if bad {
                return invalid("local nonlinearity violates the normal-form identities");
            }
        }
        Ok(())
    }
}

/// `theta = -ln(lambda) / ln|gamma|`; strictly above 1 for a valid form.
pub fn theta_of(local: &LocalNormalForm) -> f64 {
    -local.lambda.ln() / local.gamma.abs().ln()
}

/// `S_km = lambda^m |gamma|^k`.
pub fn s_km(local: &LocalNormalForm, k: u32, m: u32) -> f64 {
    local.lambda.powi(m as i32) * local.gamma.abs().powi(k as i32)
}

/// Whether `(k, m)` lies in the two-sided window `1/(theta - delta) < m/k < theta - delta`.
pub fn in_theorem1_window(k: u32, m: u32, theta: f64, delta: f64) -> bool {
    if k == 0 || delta <= 0.0 || theta - delta <= 0.0 {
        return false;
    }
    let ratio = m as f64 / k as f64;
    1.0 / (theta - delta) < ratio && ratio < theta - delta
}

/// `n` forward applications of `T0`.
pub fn local_iterate(local: &LocalNormalForm, p: Point, n: usize) -> Result<Point> {
    if local.nonlinearity == Nonlinearity::Linear {
        let q = Point {
            x: local.linear_power(n) * p.x,
            y: local.gamma.powi(n as i32) * p.y,
        };
        return if q.is_bounded() {
            Ok(q)
        } else {
            Err(Error::Escape {
                steps: n,
                radius: STATE_BOUND,
            })
        };
    }
    let mut q = p;
    for step in 0..n {
        q = local.step(&q);
        if !q.is_bounded() {
            return Err(Error::Escape {
                steps: step + 1,
                radius: STATE_BOUND,
            });
        }
    }
    Ok(q)
}

/// Solves the boundary-value problem `T0^k(x0, y0) = (xk, yk)` for the
/// unknowns `(xk, y0)`.
pub fn cross_form_solve(
    local: &LocalNormalForm,
    x0: Vector2<f64>,
    yk: f64,
    k: usize,
) -> Result<(Vector2<f64>, f64)> {
    if k == 0 {
        return Ok((x0, yk));
    }
    if local.nonlinearity == Nonlinearity::Linear {
        return Ok((local.linear_power(k) * x0, yk / local.gamma.powi(k as i32)));
    }

    let a = local.linear_power(1);
    let gamma = local.gamma;
    let mut xs: Vec<Vector2<f64>> = (0..=k).map(|j| local.linear_power(j) * x0).collect();
    let mut ys: Vec<f64> = (0..=k).map(|j| yk * gamma.powi(j as i32 - k as i32)).collect();

    let mut residual = f64::INFINITY;
    for _ in 0..CROSS_MAX_SWEEPS {
        for j in 0..k {
            xs[j + 1] = a * xs[j] + local.stable_nonlinear(&xs[j], ys[j]);
        }
        for j in (0..k).rev() {
            ys[j] = (ys[j + 1] - local.unstable_nonlinear(&xs[j], ys[j])) / gamma;
        }
        residual = 0.0;
        for j in 0..k {
            let rx = (xs[j + 1] - a * xs[j] - local.stable_nonlinear(&xs[j], ys[j])).amax();
            let ry = (ys[j + 1] - gamma * ys[j] - local.unstable_nonlinear(&xs[j], ys[j])).abs();
            residual = residual.max(rx).max(ry);
        }
        if !residual.is_finite() || residual > STATE_BOUND {
            break;
        }
        if residual <= CROSS_TOLERANCE {
            return Ok((xs[k], ys[0]));
        }
    }
    Err(Error::NoConvergence {
        solver: "cross-form solve",
        iterations: CROSS_MAX_SWEEPS,
        residual,
    })
}
