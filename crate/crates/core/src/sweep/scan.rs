//! Classification of the attractor reached from a seed at one parameter point.

use nalgebra::DMatrix;

use crate::bifurcation::{find_fixed_point_nd, jacobian, VectorMap};
use crate::error::{invalid, Result};
use crate::homoclinic::{RescaledReturn, ReturnMapConfig};
use crate::maps::{Family, ScalarMap};

/// Recurrence tolerance of period detection.
pub const PERIOD_TOLERANCE: f64 = 1e-6;
const NUDGE: f64 = 1e-7;
/// Largest distance between an orbit point and the Newton-refined cycle for
/// the cycle to count as the one being approached.
const CONFIRM_RADIUS: f64 = 1e-3;
/// Distance below which two refined cycle points coincide.
const CYCLE_TOLERANCE: f64 = 1e-8;
const TANGENT_FD_STEP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeedRule {
    /// `Y = 0` for the families; `(X, Y) = (first, 0)` for return maps.
    CriticalPoint,
    FixedSeed(f64),
}

/// What is swept.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepTarget {
    /// A limit family; parameters not on an axis keep their `base` value.
    Family { family: Family, base: Vec<f64> },
    /// The rescaled return map; parameters are the limit-order pair.
    ReturnMap { config: ReturnMapConfig },
}

impl SweepTarget {
    pub fn param_count(&self) -> usize {
        match self {
            SweepTarget::Family { family, .. } => family.arity(),
            SweepTarget::ReturnMap { .. } => 2,
        }
    }

    pub fn base_params(&self) -> Vec<f64> {
        match self {
            SweepTarget::Family { base, .. } => base.clone(),
            SweepTarget::ReturnMap { .. } => vec![0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub param: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub target: SweepTarget,
    /// Horizontal (`i`) and vertical (`j`) axes.
    pub axes: [Axis; 2],
    pub nx: usize,
    pub ny: usize,
    pub transient: usize,
    pub max_period: usize,
    /// Iterations averaged for the Lyapunov exponent.
    pub samples: usize,
    pub escape_radius: f64,
    pub seed: SeedRule,
}

impl SweepSpec {
    /// Defaults: transient 1024, 4096 samples, periods up to 32, radius 1e6,
    /// critical-point seed.
    pub fn new(target: SweepTarget, axes: [Axis; 2], nx: usize, ny: usize) -> Self {
        Self {
            target,
            axes,
            nx,
            ny,
            transient: 1024,
            max_period: 32,
            samples: 4096,
            escape_radius: 1e6,
            seed: SeedRule::CriticalPoint,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return invalid(format!("resolution must be at least 2x2, got {}x{}", self.nx, self.ny));
        }
        if self.transient < 1 || self.max_period < 1 || self.samples < 1 {
            return invalid("transient, max_period and samples must be at least 1");
        }
        if !(self.escape_radius > 0.0) {
            return invalid("escape radius must be positive");
        }
        let n = self.target.param_count();
        if let SweepTarget::Family { family, base } = &self.target {
            crate::maps::check_params(*family, base)?;
        }
        let [a, b] = self.axes;
        if a.param >= n || b.param >= n || a.param == b.param {
            return invalid(format!("axes must be two distinct parameters below {n}"));
        }
        if ![a.lo, a.hi, b.lo, b.hi].iter().all(|v| v.is_finite()) {
            return invalid("axis ranges must be finite");
        }
        Ok(())
    }

    pub fn coordinate(&self, i: usize, j: usize) -> (f64, f64) {
        let [a, b] = self.axes;
        let t = |k: usize, n: usize, lo: f64, hi: f64| lo + (hi - lo) * k as f64 / (n - 1) as f64;
        (t(i, self.nx, a.lo, a.hi), t(j, self.ny, b.lo, b.hi))
    }

    pub fn params_at(&self, i: usize, j: usize) -> Vec<f64> {
        let (pi, pj) = self.coordinate(i, j);
        let mut p = self.target.base_params();
        p[self.axes[0].param] = pi;
        p[self.axes[1].param] = pj;
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellOutcome {
    Period(usize),
    /// Positive Lyapunov exponent.
    Chaotic(f64),
    /// No period up to `max_period` and a non-positive exponent.
    HighPeriod(f64),
    Escaped,
}

impl CellOutcome {
    pub fn name(&self) -> &'static str {
        match self {
            CellOutcome::Period(_) => "period",
            CellOutcome::Chaotic(_) => "chaotic",
            CellOutcome::HighPeriod(_) => "high-period",
            CellOutcome::Escaped => "escaped",
        }
    }
}

/// Dynamics seen by the scanner: a map on `R^dim` with a tangent action.
pub(crate) trait Dynamics: Sync {
    fn dim(&self) -> usize;
    fn step(&self, params: &[f64], state: &[f64]) -> Option<Vec<f64>>;
    /// Image of `tangent` under the derivative at `state`.
    fn push_tangent(&self, params: &[f64], state: &[f64], tangent: &[f64]) -> Option<Vec<f64>>;
    /// Spectral radius of the derivative of the `p`-fold map along `orbit`.
    fn cycle_radius(&self, params: &[f64], orbit: &[Vec<f64>]) -> f64;
    fn seed(&self, params: &[f64], rule: SeedRule) -> Vec<f64>;
    /// Newton solution of `F^p(s) = s` started at `state`.
    fn refine_cycle(&self, params: &[f64], state: &[f64], p: usize) -> Option<Vec<f64>>;
}

/// `F^p` of a vector map.
struct Power<'a, M: VectorMap> {
    map: &'a M,
    p: usize,
}

impl<M: VectorMap> VectorMap for Power<'_, M> {
    fn dim(&self) -> usize {
        self.map.dim()
    }
    fn param_count(&self) -> usize {
        self.map.param_count()
    }
    fn apply(&self, params: &[f64], state: &[f64]) -> Result<Vec<f64>> {
        let mut s = state.to_vec();
        for _ in 0..self.p {
            s = self.map.apply(params, &s)?;
        }
        Ok(s)
    }
}

impl Dynamics for Family {
    fn dim(&self) -> usize {
        1
    }
    fn step(&self, params: &[f64], s: &[f64]) -> Option<Vec<f64>> {
        Some(vec![self.value(params, s[0])])
    }
    fn push_tangent(&self, params: &[f64], s: &[f64], t: &[f64]) -> Option<Vec<f64>> {
        Some(vec![self.slope(params, s[0]) * t[0]])
    }
    fn cycle_radius(&self, params: &[f64], orbit: &[Vec<f64>]) -> f64 {
        orbit.iter().map(|s| self.slope(params, s[0])).product::<f64>().abs()
    }
    fn seed(&self, _: &[f64], rule: SeedRule) -> Vec<f64> {
        match rule {
            SeedRule::CriticalPoint => vec![0.0],
            SeedRule::FixedSeed(y) => vec![y],
        }
    }
    fn refine_cycle(&self, params: &[f64], state: &[f64], p: usize) -> Option<Vec<f64>> {
        let mut y = state[0];
        for _ in 0..50 {
            let (mut v, mut d) = (y, 1.0);
            for _ in 0..p {
                d *= self.slope(params, v);
                v = self.value(params, v);
            }
            let r = v - y;
            if !r.is_finite() {
                return None;
            }
            if r.abs() <= 1e-12 * (1.0 + y.abs()) {
                return Some(vec![y]);
            }
            if d == 1.0 {
                return None;
            }
            y -= r / (d - 1.0);
        }
        None
    }
}

impl Dynamics for RescaledReturn {
    fn dim(&self) -> usize {
        VectorMap::dim(self)
    }
    fn step(&self, params: &[f64], s: &[f64]) -> Option<Vec<f64>> {
        VectorMap::apply(self, params, s).ok()
    }
    fn push_tangent(&self, params: &[f64], s: &[f64], t: &[f64]) -> Option<Vec<f64>> {
        let shifted = |sign: f64| -> Vec<f64> { s.iter().zip(t).map(|(a, b)| a + sign * TANGENT_FD_STEP * b).collect() };
        let up = VectorMap::apply(self, params, &shifted(1.0)).ok()?;
        let down = VectorMap::apply(self, params, &shifted(-1.0)).ok()?;
        Some(up.iter().zip(&down).map(|(a, b)| (a - b) / (2.0 * TANGENT_FD_STEP)).collect())
    }
    fn cycle_radius(&self, params: &[f64], orbit: &[Vec<f64>]) -> f64 {
        let n = VectorMap::dim(self);
        let mut acc = DMatrix::<f64>::identity(n, n);
        for s in orbit {
            match jacobian(self, params, s) {
                Ok(j) => acc = j * acc,
                Err(_) => return f64::INFINITY,
            }
        }
        acc.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
    fn seed(&self, params: &[f64], rule: SeedRule) -> Vec<f64> {
        let y = match rule {
            SeedRule::CriticalPoint => 0.0,
            SeedRule::FixedSeed(y) => y,
        };
        let mut s = vec![params[0] - y * y];
        if VectorMap::dim(self) == 3 {
            s.push(0.0);
        }
        s.push(y);
        s
    }
    fn refine_cycle(&self, params: &[f64], state: &[f64], p: usize) -> Option<Vec<f64>> {
        find_fixed_point_nd(&Power { map: self, p }, params, state).ok()
    }
}

fn escaped(s: &[f64], radius: f64) -> bool {
    s.iter().any(|v| !v.is_finite() || v.abs() > radius)
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

enum Confirm {
    Period(usize),
    Unstable,
    NoCycle,
}

/// Refines a candidate `p`-cycle through `state` by Newton and reports the
/// minimal period of the refined cycle. Slowly converging orbits near a flip
/// recur at twice their period before they recur at it; the refined cycle
/// settles that.
fn confirm<D: Dynamics + ?Sized>(map: &D, params: &[f64], state: &[f64], p: usize) -> Confirm {
    let Some(y) = map.refine_cycle(params, state, p) else {
        return Confirm::NoCycle;
    };
    let scale = 1.0 + y.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if distance(&y, state) > CONFIRM_RADIUS * scale {
        return Confirm::NoCycle;
    }
    let mut orbit = vec![y];
    for _ in 1..p {
        match map.step(params, orbit.last().unwrap()) {
            Some(next) => orbit.push(next),
            None => return Confirm::NoCycle,
        }
    }
    let q = (1..p)
        .filter(|q| p.is_multiple_of(*q))
        .find(|&q| distance(&orbit[q], &orbit[0]) <= CYCLE_TOLERANCE * scale)
        .unwrap_or(p);
    if map.cycle_radius(params, &orbit[..q]) < 1.0 {
        Confirm::Period(q)
    } else {
        Confirm::Unstable
    }
}

enum Run {
    Escaped,
    Period(usize),
    /// A recurrence onto an unstable cycle, reached exactly in floating point.
    Unstable,
    None,
}

/// Iterates `transient` steps, then looks for the smallest `p` with two
/// consecutive recurrences within tolerance.
fn settle<D: Dynamics + ?Sized>(map: &D, params: &[f64], state: &mut Vec<f64>, spec: &SweepSpec) -> Run {
    for _ in 0..spec.transient {
        match map.step(params, state) {
            Some(next) if !escaped(&next, spec.escape_radius) => *state = next,
            _ => return Run::Escaped,
        }
    }
    let mut orbit = vec![state.clone()];
    for _ in 0..2 * spec.max_period {
        match map.step(params, orbit.last().unwrap()) {
            Some(next) if !escaped(&next, spec.escape_radius) => orbit.push(next),
            _ => return Run::Escaped,
        }
    }
    *state = orbit.last().unwrap().clone();
    for p in 1..=spec.max_period {
        if distance(&orbit[p], &orbit[0]) <= PERIOD_TOLERANCE && distance(&orbit[2 * p], &orbit[p]) <= PERIOD_TOLERANCE {
            return match confirm(map, params, &orbit[2 * p], p) {
                Confirm::Period(q) => Run::Period(q),
                Confirm::Unstable => Run::Unstable,
                // a ghost of a cycle that no longer exists
                Confirm::NoCycle => Run::None,
            };
        }
    }
    Run::None
}

pub(crate) fn scan_dynamics<D: Dynamics + ?Sized>(map: &D, params: &[f64], spec: &SweepSpec) -> CellOutcome {
    let seed = map.seed(params, spec.seed);
    let mut state = seed.clone();
    match settle(map, params, &mut state, spec) {
        Run::Escaped => return CellOutcome::Escaped,
        Run::Period(p) => return CellOutcome::Period(p),
        Run::Unstable => {
            // step off the repeller towards the seed and try once more
            for (s, s0) in state.iter_mut().zip(&seed) {
                *s += NUDGE * (s0 - *s) + if *s0 == *s { NUDGE } else { 0.0 };
            }
            match settle(map, params, &mut state, spec) {
                Run::Escaped => return CellOutcome::Escaped,
                Run::Period(p) => return CellOutcome::Period(p),
                Run::Unstable | Run::None => {}
            }
        }
        Run::None => {}
    }

    let n = map.dim();
    let mut tangent = vec![1.0 / (n as f64).sqrt(); n];
    let mut sum = 0.0;
    for _ in 0..spec.samples {
        let Some(pushed) = map.push_tangent(params, &state, &tangent) else {
            return CellOutcome::Escaped;
        };
        let norm = pushed.iter().map(|v| v * v).sum::<f64>().sqrt();
        sum += norm.max(f64::MIN_POSITIVE).ln();
        tangent = if norm > 0.0 { pushed.iter().map(|v| v / norm).collect() } else { tangent };
        match map.step(params, &state) {
            Some(next) if !escaped(&next, spec.escape_radius) => state = next,
            _ => return CellOutcome::Escaped,
        }
    }
    let lyap = sum / spec.samples as f64;
    if lyap > 0.0 {
        return CellOutcome::Chaotic(lyap);
    }
    // contracting but never recurring within tolerance: look for the cycle
    for p in 1..=spec.max_period {
        if let Confirm::Period(q) = confirm(map, params, &state, p) {
            return CellOutcome::Period(q);
        }
    }
    CellOutcome::HighPeriod(lyap)
}

/// Outcome at one parameter vector.
pub fn attractor_scan(target: &SweepTarget, params: &[f64], spec: &SweepSpec) -> Result<CellOutcome> {
    if params.len() != target.param_count() {
        return invalid(format!("expected {} parameter(s), got {}", target.param_count(), params.len()));
    }
    match target {
        SweepTarget::Family { family, .. } => Ok(scan_dynamics(family, params, spec)),
        SweepTarget::ReturnMap { config } => Ok(scan_dynamics(&RescaledReturn::new(config)?, params, spec)),
    }
}
