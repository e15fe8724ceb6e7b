//! Scalar polynomial limit families and their derivative jets.
//!
//! Every family is evaluated in nested form (inner parabola first) so that
//! the value, the jets and the iterate helpers all agree bit-for-bit.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Default escape radius for orbit iteration.
pub const ESCAPE_RADIUS: f64 = 1e6;

/// Highest derivative order carried by a [`Jet`].
pub const MAX_JET_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `M1 - Y^2`
    Parabola,
    /// `M1 + M2 Y + Y^3`
    CubicPlus,
    /// `M1 + M2 Y - Y^3`
    CubicMinus,
    /// `M2 - (M1 - Y^2)^2`
    DoubleParabola,
    /// `M2 - (M1 - Y^2)^2 + M3 Y`
    Shrimp3,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Parabola,
        Family::CubicPlus,
        Family::CubicMinus,
        Family::DoubleParabola,
        Family::Shrimp3,
    ];

    pub fn arity(self) -> usize {
        match self {
            Family::Parabola => 1,
            Family::CubicPlus | Family::CubicMinus | Family::DoubleParabola => 2,
            Family::Shrimp3 => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Parabola => "Parabola",
            Family::CubicPlus => "CubicPlus",
            Family::CubicMinus => "CubicMinus",
            Family::DoubleParabola => "DoubleParabola",
            Family::Shrimp3 => "Shrimp3",
        }
    }

    /// Evaluates the family polynomial. `params` must have the family arity.
    #[inline]
    pub fn value(self, params: &[f64], y: f64) -> f64 {
        match self {
            Family::Parabola => params[0] - y * y,
            Family::CubicPlus => params[0] + y * (params[1] + y * y),
            Family::CubicMinus => params[0] + y * (params[1] - y * y),
            Family::DoubleParabola => {
                let t = params[0] - y * y;
                params[1] - t * t
            }
            Family::Shrimp3 => {
                let t = params[0] - y * y;
                params[1] - t * t + params[2] * y
            }
        }
    }

    /// First derivative with respect to the state.
    #[inline]
    pub fn slope(self, params: &[f64], y: f64) -> f64 {
        match self {
            Family::Parabola => -2.0 * y,
            Family::CubicPlus => params[1] + 3.0 * y * y,
            Family::CubicMinus => params[1] - 3.0 * y * y,
            Family::DoubleParabola => 4.0 * y * (params[0] - y * y),
            Family::Shrimp3 => 4.0 * y * (params[0] - y * y) + params[2],
        }
    }

    /// Full order-4 jet at `y`.
    pub fn jet(self, params: &[f64], y: f64) -> Jet {
        let value = self.value(params, y);
        let derivs = match self {
            Family::Parabola => [-2.0 * y, -2.0, 0.0, 0.0],
            Family::CubicPlus => [params[1] + 3.0 * y * y, 6.0 * y, 6.0, 0.0],
            Family::CubicMinus => [params[1] - 3.0 * y * y, -6.0 * y, -6.0, 0.0],
            Family::DoubleParabola | Family::Shrimp3 => {
                let t = params[0] - y * y;
                let m3 = if self == Family::Shrimp3 { params[2] } else { 0.0 };
                [
                    4.0 * y * t + m3,
                    4.0 * params[0] - 12.0 * y * y,
                    -24.0 * y,
                    -24.0,
                ]
            }
        };
        Jet {
            value,
            derivs,
            order: MAX_JET_ORDER,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidInput(format!("unknown map family `{s}`")))
    }
}

/// A limit family together with a concrete parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMap {
    family: Family,
    params: Vec<f64>,
}

impl ModelMap {
    pub fn new(family: Family, params: impl Into<Vec<f64>>) -> Result<Self> {
        let params = params.into();
        check_params(family, &params)?;
        Ok(Self { family, params })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }
}

pub(crate) fn check_params(family: Family, params: &[f64]) -> Result<()> {
    if params.len() != family.arity() {
        return invalid(format!(
            "{family} takes {} parameter(s), got {}",
            family.arity(),
            params.len()
        ));
    }
    if let Some(p) = params.iter().find(|p| !p.is_finite()) {
        return invalid(format!("non-finite parameter {p}"));
    }
    Ok(())
}

/// Value plus derivatives of order 1..=4 with respect to the state.
///
/// Entries above `order` are zero and carry no meaning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub derivs: [f64; MAX_JET_ORDER],
    pub order: usize,
}

impl Jet {
    /// Jet of the identity map at `y`.
    pub fn identity(y: f64) -> Self {
        Jet {
            value: y,
            derivs: [1.0, 0.0, 0.0, 0.0],
            order: MAX_JET_ORDER,
        }
    }

    pub fn d(&self, i: usize) -> f64 {
        self.derivs[i - 1]
    }

    /// Chain rule up to fourth order: `outer` must be the jet of `f` taken at
    /// `inner.value`; the result is the jet of `f ∘ g`.
    pub fn compose(outer: &Jet, inner: &Jet) -> Jet {
        let [f1, f2, f3, f4] = outer.derivs;
        let [g1, g2, g3, g4] = inner.derivs;
        let g1s = g1 * g1;
        Jet {
            value: outer.value,
            derivs: [
                f1 * g1,
                f2 * g1s + f1 * g2,
                f3 * g1s * g1 + 3.0 * f2 * g1 * g2 + f1 * g3,
                f4 * g1s * g1s
                    + 6.0 * f3 * g1s * g2
                    + f2 * (3.0 * g2 * g2 + 4.0 * g1 * g3)
                    + f1 * g4,
            ],
            order: outer.order.min(inner.order),
        }
    }

    fn truncated(mut self, order: usize) -> Jet {
        for d in self.derivs.iter_mut().skip(order) {
            *d = 0.0;
        }
        self.order = order;
        self
    }
}

/// A scalar map whose parameters are supplied per call.
///
/// Implemented by [`Family`]; the bifurcation and sweep machinery is written
/// against this trait so that any one-dimensional map with analytic jets can
/// be analysed.
pub trait ScalarMap: Sync {
    fn param_count(&self) -> usize;
    fn value(&self, params: &[f64], y: f64) -> f64;
    fn slope(&self, params: &[f64], y: f64) -> f64 {
        self.jet(params, y).derivs[0]
    }
    fn jet(&self, params: &[f64], y: f64) -> Jet;
}

impl ScalarMap for Family {
    fn param_count(&self) -> usize {
        self.arity()
    }
    fn value(&self, params: &[f64], y: f64) -> f64 {
        Family::value(*self, params, y)
    }
    fn slope(&self, params: &[f64], y: f64) -> f64 {
        Family::slope(*self, params, y)
    }
    fn jet(&self, params: &[f64], y: f64) -> Jet {
        Family::jet(*self, params, y)
    }
}

pub fn eval_map(map: &ModelMap, y: f64) -> Result<f64> {
    if !y.is_finite() {
        return invalid("non-finite state");
    }
    Ok(map.family.value(&map.params, y))
}

pub fn eval_jet(map: &ModelMap, y: f64, order: usize) -> Result<Jet> {
    if !(1..=MAX_JET_ORDER).contains(&order) {
        return invalid(format!("jet order {order} outside 1..={MAX_JET_ORDER}"));
    }
    if !y.is_finite() {
        return invalid("non-finite state");
    }
    Ok(map.family.jet(&map.params, y).truncated(order))
}

/// Iterates `n` times, returning the final state and the product of first
/// derivatives along the orbit.
pub fn iterate_n(map: &ModelMap, y0: f64, n: usize) -> Result<(f64, f64)> {
    iterate_with_multiplier(&map.family, &map.params, y0, n, ESCAPE_RADIUS)
}

pub fn iterate_with_multiplier<M: ScalarMap + ?Sized>(
    map: &M,
    params: &[f64],
    y0: f64,
    n: usize,
    radius: f64,
) -> Result<(f64, f64)> {
    if n == 0 {
        return invalid("iteration count must be at least 1");
    }
    if !y0.is_finite() {
        return invalid("non-finite state");
    }
    let mut y = y0;
    let mut product = 1.0;
    for step in 0..n {
        product *= map.slope(params, y);
        y = map.value(params, y);
        if !y.is_finite() || y.abs() > radius {
            return Err(Error::Escape {
                steps: step + 1,
                radius,
            });
        }
    }
    Ok((y, product))
}

/// Order-4 jet of the `n`-fold iterate at `y0`.
pub fn iterate_jet<M: ScalarMap + ?Sized>(map: &M, params: &[f64], y0: f64, n: usize) -> Jet {
    let mut acc = Jet::identity(y0);
    for _ in 0..n {
        let outer = map.jet(params, acc.value);
        acc = Jet::compose(&outer, &acc);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mm(f: Family, p: &[f64]) -> ModelMap {
        ModelMap::new(f, p.to_vec()).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(eval_map(&mm(Family::DoubleParabola, &[0.0, 0.0]), -1.0).unwrap(), -1.0);
        assert_eq!(eval_map(&mm(Family::Parabola, &[0.0]), 0.0).unwrap(), 0.0);
        let m = mm(Family::Shrimp3, &[0.0, 0.0, 1.0]);
        for y in [-1.3, -0.2, 0.0, 0.7, 2.5] {
            assert!((eval_map(&m, y).unwrap() - (y - y.powi(4))).abs() <= 1e-14 * (1.0 + y.powi(4)));
        }
    }

    #[test]
    fn jet_examples() {
        let j = eval_jet(&mm(Family::DoubleParabola, &[0.0, 0.0]), -1.0, 1).unwrap();
        assert_eq!(j.d(1), 4.0);
        let j = eval_jet(&mm(Family::Shrimp3, &[0.0, 0.0, -1.0]), 0.0, 3).unwrap();
        assert_eq!((j.d(1), j.d(2), j.d(3)), (-1.0, 0.0, 0.0));
        for m1 in [-2.0, 0.0, 1.5] {
            assert_eq!(eval_jet(&mm(Family::Parabola, &[m1]), 0.0, 1).unwrap().d(1), 0.0);
        }
    }

    #[test]
    fn jet_order_out_of_range() {
        let m = mm(Family::Parabola, &[0.0]);
        assert!(eval_jet(&m, 0.0, 0).is_err());
        assert!(eval_jet(&m, 0.0, 5).is_err());
        let j = eval_jet(&m, 0.3, 1).unwrap();
        assert_eq!(j.derivs[1], 0.0);
    }

    #[test]
    fn iterate_examples() {
        let (y, d) = iterate_n(&mm(Family::DoubleParabola, &[0.0, 0.0]), 0.0, 5).unwrap();
        assert_eq!((y, d), (0.0, 0.0));
        let (y, d) = iterate_n(&mm(Family::Parabola, &[-0.25]), -0.5, 1).unwrap();
        assert_eq!((y, d), (-0.5, 1.0));
        let (y, d) = iterate_n(&mm(Family::CubicMinus, &[0.0, 0.5]), 0.0, 3).unwrap();
        assert_eq!((y, d), (0.0, 0.125));
    }

    #[test]
    fn iterate_reports_escape() {
        let err = iterate_n(&mm(Family::Parabola, &[3.0]), 0.0, 100).unwrap_err();
        assert!(matches!(err, Error::Escape { .. }));
        assert!(iterate_n(&mm(Family::Parabola, &[0.0]), 0.0, 0).is_err());
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ModelMap::new(Family::Shrimp3, vec![0.0, 1.0]).is_err());
        assert!(ModelMap::new(Family::Parabola, vec![f64::NAN]).is_err());
        assert!(eval_map(&mm(Family::Parabola, &[0.0]), f64::INFINITY).is_err());
    }

    #[test]
    fn family_parse_roundtrip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("Henon".parse::<Family>().is_err());
    }

    #[test]
    fn composed_jet_matches_polynomial() {
        // T(Y) = -Y - Y^4, so T∘T(Y) = Y + Y^4 - (Y + Y^4)^4: all of orders 1..4
        // are exactly 1, 0, 0, 0 at the origin.
        let j = iterate_jet(&Family::Shrimp3, &[0.0, 0.0, -1.0], 0.0, 2);
        assert_eq!(j.derivs, [1.0, 0.0, 0.0, 0.0]);
    }
}
