//! Periodic orbits of scalar maps and the SN/PD defining systems.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::maps::{iterate_jet, Jet, ScalarMap};

pub const NEWTON_TOLERANCE: f64 = 1e-12;
pub const NEWTON_MAX_ITERATIONS: usize = 50;
/// A period-`n` solution closer than this to a period-`d` solution, `d | n`,
/// is reported as the lower period.
pub const DISTINCTNESS_TOLERANCE: f64 = 1e-6;

const PARAM_FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    pub period: usize,
    pub y: f64,
    pub multiplier: f64,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BifKind {
    SaddleNode,
    PeriodDoubling,
    Cusp,
    DegenerateFlip,
}

impl BifKind {
    pub fn name(self) -> &'static str {
        match self {
            BifKind::SaddleNode => "SN",
            BifKind::PeriodDoubling => "PD",
            BifKind::Cusp => "cusp",
            BifKind::DegenerateFlip => "degenerate-flip",
        }
    }

    /// Multiplier on the corresponding codim-1 curve.
    pub fn multiplier(self) -> f64 {
        match self {
            BifKind::SaddleNode | BifKind::Cusp => 1.0,
            BifKind::PeriodDoubling | BifKind::DegenerateFlip => -1.0,
        }
    }

    /// The codim-1 curve a point of this kind lies on.
    pub fn curve_kind(self) -> BifKind {
        match self {
            BifKind::SaddleNode | BifKind::Cusp => BifKind::SaddleNode,
            BifKind::PeriodDoubling | BifKind::DegenerateFlip => BifKind::PeriodDoubling,
        }
    }
}

impl fmt::Display for BifKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifPoint {
    pub kind: BifKind,
    pub orbit: PeriodicOrbit,
    pub test_values: BTreeMap<&'static str, f64>,
}

pub(crate) fn check_period_params<M: ScalarMap + ?Sized>(map: &M, params: &[f64], period: usize) -> Result<()> {
    if period == 0 {
        return invalid("period must be at least 1");
    }
    if params.len() != map.param_count() {
        return invalid(format!("expected {} parameter(s), got {}", map.param_count(), params.len()));
    }
    if params.iter().any(|p| !p.is_finite()) {
        return invalid("parameters must be finite");
    }
    Ok(())
}

/// Jet of `T^n` at `y`, failing on overflow.
pub(crate) fn orbit_jet<M: ScalarMap + ?Sized>(map: &M, params: &[f64], y: f64, n: usize) -> Result<Jet> {
    let j = iterate_jet(map, params, y, n);
    if j.value.is_finite() && j.derivs.iter().all(|d| d.is_finite()) {
        Ok(j)
    } else {
        Err(Error::Escape {
            steps: n,
            radius: f64::INFINITY,
        })
    }
}

/// `ℓ1 = g''²/4 + g'''/6` for `g = T^n`; positive means a supercritical flip.
pub fn lyapunov_from_jet(j: &Jet) -> f64 {
    0.25 * j.d(2) * j.d(2) + j.d(3) / 6.0
}

/// Test function of the codim-2 degeneracy carried by a codim-1 curve:
/// `(T^n)''` along SN curves and `ℓ1` along PD curves.
pub fn codim2_test(kind: BifKind, j: &Jet) -> f64 {
    match kind.curve_kind() {
        BifKind::PeriodDoubling => lyapunov_from_jet(j),
        _ => j.d(2),
    }
}

/// Lowest divisor period `d < n` the point already satisfies.
pub(crate) fn lower_period<M: ScalarMap + ?Sized>(map: &M, params: &[f64], y: f64, n: usize) -> Option<usize> {
    (1..n)
        .filter(|d| n.is_multiple_of(*d))
        .find(|&d| orbit_jet(map, params, y, d).is_ok_and(|j| (j.value - y).abs() <= DISTINCTNESS_TOLERANCE))
}

pub(crate) fn make_orbit<M: ScalarMap + ?Sized>(map: &M, params: &[f64], y: f64, n: usize) -> Result<(PeriodicOrbit, Jet)> {
    let j = orbit_jet(map, params, y, n)?;
    Ok((
        PeriodicOrbit {
            period: n,
            y,
            multiplier: j.d(1),
            params: params.to_vec(),
        },
        j,
    ))
}

/// Newton on `T^n(Y) - Y`.
pub fn find_periodic_orbit<M: ScalarMap + ?Sized>(
    map: &M,
    params: &[f64],
    period: usize,
    y_guess: f64,
) -> Result<PeriodicOrbit> {
    check_period_params(map, params, period)?;
    if !y_guess.is_finite() {
        return invalid("non-finite initial guess");
    }
    let mut y = y_guess;
    let mut residual = f64::INFINITY;
    for _ in 0..NEWTON_MAX_ITERATIONS {
        let j = orbit_jet(map, params, y, period)?;
        residual = j.value - y;
        if residual.abs() <= NEWTON_TOLERANCE {
            if let Some(d) = lower_period(map, params, y, period) {
                return invalid(format!("solution Y = {y} has lower period {d}"));
            }
            return Ok(make_orbit(map, params, y, period)?.0);
        }
        let slope = j.d(1) - 1.0;
        if slope == 0.0 {
            return Err(Error::Singular("periodic-orbit Newton"));
        }
        y -= residual / slope;
        if !y.is_finite() {
            break;
        }
    }
    Err(Error::NoConvergence {
        solver: "periodic-orbit Newton",
        iterations: NEWTON_MAX_ITERATIONS,
        residual: residual.abs(),
    })
}

/// Values of the codim-1 defining system
/// `F = (T^n(Y) - Y, (T^n)'(Y) - s)` with `s = ±1`.
pub(crate) fn defining<M: ScalarMap + ?Sized>(
    map: &M,
    params: &[f64],
    period: usize,
    kind: BifKind,
    y: f64,
) -> Result<([f64; 2], Jet)> {
    let j = orbit_jet(map, params, y, period)?;
    Ok(([j.value - y, j.d(1) - kind.multiplier()], j))
}

/// `∂F/∂(Y, p_free...)`: the Y column from the jet, parameter columns by
/// central differences.
pub(crate) fn defining_jacobian<M: ScalarMap + ?Sized>(
    map: &M,
    params: &[f64],
    period: usize,
    kind: BifKind,
    y: f64,
    free: &[usize],
) -> Result<([f64; 2], Vec<[f64; 2]>)> {
    let (f, j) = defining(map, params, period, kind, y)?;
    let mut cols = vec![[j.d(1) - 1.0, j.d(2)]];
    let mut p = params.to_vec();
    for &i in free {
        let h = PARAM_FD_STEP * (1.0 + params[i].abs());
        p[i] = params[i] + h;
        let (fp, _) = defining(map, &p, period, kind, y)?;
        p[i] = params[i] - h;
        let (fm, _) = defining(map, &p, period, kind, y)?;
        p[i] = params[i];
        cols.push([(fp[0] - fm[0]) / (2.0 * h), (fp[1] - fm[1]) / (2.0 * h)]);
    }
    Ok((f, cols))
}

pub(crate) fn bif_point<M: ScalarMap + ?Sized>(
    map: &M,
    params: &[f64],
    period: usize,
    kind: BifKind,
    y: f64,
) -> Result<BifPoint> {
    let (orbit, j) = make_orbit(map, params, y, period)?;
    let mut test_values = BTreeMap::new();
    test_values.insert("fixed_residual", j.value - y);
    test_values.insert("multiplier_residual", j.d(1) - kind.multiplier());
    test_values.insert("second_derivative", j.d(2));
    test_values.insert("lyapunov_1", lyapunov_from_jet(&j));
    Ok(BifPoint {
        kind,
        orbit,
        test_values,
    })
}

/// Newton on the SN (`kind = SaddleNode`) or PD defining system in
/// `(Y, p_free)`, starting from `guess = (Y, p_free)`.
pub fn solve_codim1<M: ScalarMap + ?Sized>(
    map: &M,
    params: &[f64],
    period: usize,
    kind: BifKind,
    free_param: usize,
    guess: (f64, f64),
) -> Result<BifPoint> {
    check_period_params(map, params, period)?;
    if free_param >= params.len() {
        return invalid(format!("free parameter index {free_param} out of range"));
    }
    if !matches!(kind, BifKind::SaddleNode | BifKind::PeriodDoubling) {
        return invalid("solve_codim1 handles SN and PD only");
    }
    let mut p = params.to_vec();
    let (mut y, mut q) = guess;
    let mut residual = f64::INFINITY;
    for _ in 0..NEWTON_MAX_ITERATIONS {
        p[free_param] = q;
        let (f, cols) = defining_jacobian(map, &p, period, kind, y, &[free_param])?;
        residual = f[0].abs().max(f[1].abs());
        if residual <= NEWTON_TOLERANCE {
            if let Some(d) = lower_period(map, &p, y, period) {
                return invalid(format!("bifurcating orbit at Y = {y} has lower period {d}"));
            }
            return bif_point(map, &p, period, kind, y);
        }
        let [a, c] = cols[0];
        let [b, d] = cols[1];
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Singular("codim-1 Newton"));
        }
        y -= (d * f[0] - b * f[1]) / det;
        q -= (a * f[1] - c * f[0]) / det;
        if !(y.is_finite() && q.is_finite()) {
            break;
        }
    }
    Err(Error::NoConvergence {
        solver: "codim-1 Newton",
        iterations: NEWTON_MAX_ITERATIONS,
        residual,
    })
}

/// First Lyapunov value of the flip at a PD point.
pub fn lyapunov_value_1<M: ScalarMap + ?Sized>(map: &M, pd: &BifPoint) -> Result<f64> {
    let o = &pd.orbit;
    let (_, j) = make_orbit(map, &o.params, o.y, o.period)?;
    if (j.d(1) + 1.0).abs() > 1e-8 {
        return invalid(format!("multiplier {} is not -1", j.d(1)));
    }
    Ok(lyapunov_from_jet(&j))
}
