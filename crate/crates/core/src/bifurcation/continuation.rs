//! Pseudo-arclength continuation of SN/PD curves in a parameter plane and
//! detection of cusps and degenerate flips along them.

use std::fmt::Write as _;

use nalgebra::{Matrix3, Vector3};

use super::orbit::{
    bif_point, check_period_params, codim2_test, defining, defining_jacobian, BifKind, BifPoint,
    NEWTON_MAX_ITERATIONS, NEWTON_TOLERANCE,
};
use crate::error::{invalid, Error, Result};
use crate::maps::ScalarMap;

pub const MIN_STEP: f64 = 1e-6;
pub const MAX_STEP: f64 = 0.1;
/// Parameter tolerance of the codim-2 bisection.
pub const CODIM2_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub params: Vec<f64>,
    pub y: f64,
    pub multiplier: f64,
    /// `(T^n)''` on SN curves, `ℓ1` on PD curves.
    pub test: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    MaxPoints,
    /// Left the box given in [`ContinuationOptions::bounds`].
    Boundary,
    /// The step fell below [`MIN_STEP`].
    StepUnderflow,
    /// The orbit collapsed onto a lower period.
    LowerPeriod,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifCurve {
    pub kind: BifKind,
    pub period: usize,
    pub plane: (usize, usize),
    pub points: Vec<CurvePoint>,
    pub codim2_hits: Vec<BifPoint>,
    pub termination: Termination,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationOptions {
    /// Initial and largest step, clamped to `[MIN_STEP, MAX_STEP]`.
    pub step: f64,
    pub max_points: usize,
    /// `+1` or `-1`: orientation of the initial tangent relative to
    /// increasing `param_j`.
    pub direction: f64,
    /// Box `[lo, hi]` for `(Y, param_i, param_j)`.
    pub bounds: [(f64, f64); 3],
}

impl ContinuationOptions {
    pub fn new(step: f64, max_points: usize) -> Self {
        Self {
            step,
            max_points,
            direction: 1.0,
            bounds: [(-10.0, 10.0); 3],
        }
    }

    pub fn reversed(mut self) -> Self {
        self.direction = -self.direction;
        self
    }
}

struct System<'a, M: ScalarMap + ?Sized> {
    map: &'a M,
    base: Vec<f64>,
    period: usize,
    kind: BifKind,
    plane: (usize, usize),
}

impl<M: ScalarMap + ?Sized> System<'_, M> {
    fn params(&self, u: &Vector3<f64>) -> Vec<f64> {
        let mut p = self.base.clone();
        p[self.plane.0] = u[1];
        p[self.plane.1] = u[2];
        p
    }

    /// `F(u)` and its 2×3 Jacobian rows.
    fn eval(&self, u: &Vector3<f64>) -> Result<([f64; 2], Vector3<f64>, Vector3<f64>)> {
        let p = self.params(u);
        let (f, cols) = defining_jacobian(self.map, &p, self.period, self.kind, u[0], &[self.plane.0, self.plane.1])?;
        let r0 = Vector3::new(cols[0][0], cols[1][0], cols[2][0]);
        let r1 = Vector3::new(cols[0][1], cols[1][1], cols[2][1]);
        Ok((f, r0, r1))
    }

    fn tangent(&self, u: &Vector3<f64>) -> Result<Vector3<f64>> {
        let (_, r0, r1) = self.eval(u)?;
        let t = r0.cross(&r1);
        let n = t.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Singular("continuation tangent"));
        }
        Ok(t / n)
    }

    /// Newton on `F(u) = 0`, `a·(u - anchor) = 0`.
    fn correct(&self, guess: Vector3<f64>, anchor: &Vector3<f64>, a: &Vector3<f64>) -> Result<Vector3<f64>> {
        let mut u = guess;
        for _ in 0..NEWTON_MAX_ITERATIONS {
            let (f, r0, r1) = self.eval(&u)?;
            let g = a.dot(&(u - anchor));
            if f[0].abs().max(f[1].abs()) <= NEWTON_TOLERANCE && g.abs() <= 1e-12 {
                return Ok(u);
            }
            let jac = Matrix3::from_rows(&[r0.transpose(), r1.transpose(), a.transpose()]);
            let rhs = Vector3::new(f[0], f[1], g);
            let du = jac.lu().solve(&rhs).ok_or(Error::Singular("continuation corrector"))?;
            u -= du;
            if !u.iter().all(|v| v.is_finite()) {
                break;
            }
        }
        Err(Error::NoConvergence {
            solver: "continuation corrector",
            iterations: NEWTON_MAX_ITERATIONS,
            residual: f64::NAN,
        })
    }

    fn point(&self, u: &Vector3<f64>) -> Result<CurvePoint> {
        let p = self.params(u);
        let (_, j) = defining(self.map, &p, self.period, self.kind, u[0])?;
        Ok(CurvePoint {
            params: p,
            y: u[0],
            multiplier: j.d(1),
            test: codim2_test(self.kind, &j),
        })
    }
}

fn inside(u: &Vector3<f64>, bounds: &[(f64, f64); 3]) -> bool {
    u.iter().zip(bounds).all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
}

/// Continues `start` in the `(param_i, param_j)` plane with default bounds.
pub fn continue_codim1<M: ScalarMap + ?Sized>(
    map: &M,
    start: &BifPoint,
    plane: (usize, usize),
    step: f64,
    max_points: usize,
) -> Result<BifCurve> {
    continue_codim1_with(map, start, plane, &ContinuationOptions::new(step, max_points))
}

pub fn continue_codim1_with<M: ScalarMap + ?Sized>(
    map: &M,
    start: &BifPoint,
    plane: (usize, usize),
    opts: &ContinuationOptions,
) -> Result<BifCurve> {
    let o = &start.orbit;
    check_period_params(map, &o.params, o.period)?;
    let kind = start.kind.curve_kind();
    if plane.0 == plane.1 || plane.0 >= o.params.len() || plane.1 >= o.params.len() {
        return invalid(format!("invalid parameter plane {plane:?}"));
    }
    if opts.max_points < 1 || !(opts.step > 0.0) {
        return invalid("continuation needs max_points >= 1 and step > 0");
    }
    let sys = System {
        map,
        base: o.params.clone(),
        period: o.period,
        kind,
        plane,
    };
    let max_step = opts.step.clamp(MIN_STEP, MAX_STEP);
    let mut u = Vector3::new(o.y, o.params[plane.0], o.params[plane.1]);
    let mut points = vec![sys.point(&u)?];
    let mut t = sys.tangent(&u)?;
    if t[2] * opts.direction < 0.0 || (t[2] == 0.0 && t[1] * opts.direction < 0.0) {
        t = -t;
    }
    let mut h = max_step;
    let mut termination = Termination::MaxPoints;

    while points.len() < opts.max_points {
        let predicted = u + t * h;
        match sys.correct(predicted, &predicted, &t) {
            Ok(next) if (next - u).norm() <= 2.0 * h => {
                if !inside(&next, &opts.bounds) {
                    termination = Termination::Boundary;
                    break;
                }
                let p = sys.params(&next);
                if super::orbit::lower_period(map, &p, next[0], o.period).is_some() {
                    termination = Termination::LowerPeriod;
                    break;
                }
                let mut tn = sys.tangent(&next)?;
                if tn.dot(&t) < 0.0 {
                    tn = -tn;
                }
                points.push(sys.point(&next)?);
                u = next;
                t = tn;
                h = (h * 1.5).min(max_step);
            }
            _ => {
                h *= 0.5;
                if h < MIN_STEP {
                    termination = Termination::StepUnderflow;
                    break;
                }
            }
        }
    }
    if points.len() == 1 && opts.max_points > 1 && termination == Termination::StepUnderflow {
        return Err(Error::StepUnderflow { min_step: MIN_STEP });
    }
    let mut curve = BifCurve {
        kind,
        period: o.period,
        plane,
        points,
        codim2_hits: Vec::new(),
        termination,
    };
    curve.codim2_hits = detect_codim2(map, &curve);
    Ok(curve)
}

/// Cusps (sign changes of `(T^n)''` on SN curves) and degenerate flips
/// (sign changes of `ℓ1` on PD curves), refined by bisection along the chord
/// between the bracketing points with projection back onto the curve.
pub fn detect_codim2<M: ScalarMap + ?Sized>(map: &M, curve: &BifCurve) -> Vec<BifPoint> {
    let mut hits = Vec::new();
    let Some(first) = curve.points.first() else {
        return hits;
    };
    let sys = System {
        map,
        base: first.params.clone(),
        period: curve.period,
        kind: curve.kind,
        plane: curve.plane,
    };
    let hit_kind = match curve.kind {
        BifKind::PeriodDoubling => BifKind::DegenerateFlip,
        _ => BifKind::Cusp,
    };
    let as_u = |p: &CurvePoint| Vector3::new(p.y, p.params[curve.plane.0], p.params[curve.plane.1]);
    for w in curve.points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.test == 0.0 || a.test.signum() == b.test.signum() {
            continue;
        }
        if let Some(u) = refine(&sys, as_u(a), as_u(b), a.test) {
            let p = sys.params(&u);
            if let Ok(bp) = bif_point(map, &p, curve.period, hit_kind, u[0]) {
                hits.push(bp);
            }
        }
    }
    hits
}

fn refine<M: ScalarMap + ?Sized>(sys: &System<'_, M>, ua: Vector3<f64>, ub: Vector3<f64>, test_a: f64) -> Option<Vector3<f64>> {
    let d = ub - ua;
    let len = d.norm();
    if len == 0.0 {
        return Some(ua);
    }
    let dir = d / len;
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut best = None;
    while (hi - lo) * len > CODIM2_TOLERANCE {
        let s = 0.5 * (lo + hi);
        let anchor = ua + d * s;
        let u = sys.correct(anchor, &anchor, &dir).ok()?;
        let test = sys.point(&u).ok()?.test;
        best = Some(u);
        if test == 0.0 {
            break;
        }
        if test.signum() == test_a.signum() {
            lo = s;
        } else {
            hi = s;
        }
    }
    best.or(Some(ua))
}

/// `kind,period,param_i,param_j,Y,multiplier,test` with a header row.
pub fn curve_to_csv(curve: &BifCurve) -> String {
    let mut s = String::from("kind,period,param_i,param_j,Y,multiplier,test\n");
    for p in &curve.points {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            curve.kind,
            curve.period,
            p.params[curve.plane.0],
            p.params[curve.plane.1],
            p.y,
            p.multiplier,
            p.test
        );
    }
    for h in &curve.codim2_hits {
        let test = h.test_values.get(if h.kind == BifKind::Cusp { "second_derivative" } else { "lyapunov_1" });
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            h.kind,
            curve.period,
            h.orbit.params[curve.plane.0],
            h.orbit.params[curve.plane.1],
            h.orbit.y,
            h.orbit.multiplier,
            test.copied().unwrap_or(f64::NAN)
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bifurcation::orbit::solve_codim1;
    use crate::maps::{Family, Jet};

    /// Parabola with an inert second parameter.
    struct ParabolaDummy;
    impl ScalarMap for ParabolaDummy {
        fn param_count(&self) -> usize {
            2
        }
        fn value(&self, p: &[f64], y: f64) -> f64 {
            p[0] - y * y
        }
        fn jet(&self, p: &[f64], y: f64) -> Jet {
            Family::Parabola.jet(&p[..1], y)
        }
    }

    #[test]
    fn parabola_sn_line_is_flat() {
        let sn = solve_codim1(&ParabolaDummy, &[0.0, 0.0], 1, BifKind::SaddleNode, 0, (-0.4, -0.2)).unwrap();
        let c = continue_codim1(&ParabolaDummy, &sn, (0, 1), 0.1, 40).unwrap();
        assert_eq!(c.points.len(), 40);
        for p in &c.points {
            assert!((p.params[0] + 0.25).abs() < 1e-10 && (p.y + 0.5).abs() < 1e-10);
        }
        assert!(c.points.last().unwrap().params[1] > 3.0);
        assert!(c.codim2_hits.is_empty());
    }

    #[test]
    fn cubic_minus_cusp_at_pitchfork() {
        let f = Family::CubicMinus;
        let sn = solve_codim1(&f, &[-0.1, 1.5], 1, BifKind::SaddleNode, 0, (0.5, -0.2)).unwrap();
        let mut opts = ContinuationOptions::new(0.05, 200);
        opts.bounds = [(-3.0, 3.0), (-3.0, 3.0), (-3.0, 3.0)];
        let a = continue_codim1_with(&f, &sn, (0, 1), &opts).unwrap();
        let b = continue_codim1_with(&f, &sn, (0, 1), &opts.reversed()).unwrap();
        let hits: Vec<_> = a.codim2_hits.iter().chain(&b.codim2_hits).collect();
        assert_eq!(hits.len(), 1, "{:?}", hits);
        let h = hits[0];
        assert!(h.orbit.params[0].abs() < 1e-7 && (h.orbit.params[1] - 1.0).abs() < 1e-7);
        assert!(h.test_values["second_derivative"].abs() < 1e-6);
    }

    #[test]
    fn shrimp3_at_zero_matches_double_parabola() {
        let sn = solve_codim1(&Family::DoubleParabola, &[1.0, 1.0], 1, BifKind::SaddleNode, 1, (0.9, 0.95)).unwrap();
        let c2 = continue_codim1(&Family::DoubleParabola, &sn, (0, 1), 0.05, 30).unwrap();
        let mut p3 = sn.orbit.params.clone();
        p3.push(0.0);
        let sn3 = solve_codim1(&Family::Shrimp3, &p3, 1, BifKind::SaddleNode, 1, (sn.orbit.y, p3[1])).unwrap();
        let c3 = continue_codim1(&Family::Shrimp3, &sn3, (0, 1), 0.05, 30).unwrap();
        for (a, b) in c2.points.iter().zip(&c3.points) {
            assert!((a.y - b.y).abs() < 1e-9 && (a.params[0] - b.params[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn retraceable() {
        let f = Family::DoubleParabola;
        let sn = solve_codim1(&f, &[1.0, 1.0], 1, BifKind::SaddleNode, 1, (0.9, 0.95)).unwrap();
        let fwd = continue_codim1(&f, &sn, (0, 1), 0.05, 15).unwrap();
        let end = fwd.points.last().unwrap();
        let end_pt = solve_codim1(&f, &end.params, 1, BifKind::SaddleNode, 1, (end.y, end.params[1])).unwrap();
        let back = continue_codim1_with(&f, &end_pt, (0, 1), &ContinuationOptions::new(0.05, 40).reversed()).unwrap();
        let (m1, m2) = (sn.orbit.params[0], sn.orbit.params[1]);
        let near = back
            .points
            .iter()
            .min_by(|a, b| {
                let da = (a.params[0] - m1).hypot(a.params[1] - m2);
                let db = (b.params[0] - m1).hypot(b.params[1] - m2);
                da.total_cmp(&db)
            })
            .unwrap();
        assert!((near.params[0] - m1).hypot(near.params[1] - m2) < 0.05);
        // land on the start's M2 from the retraced curve
        let re = solve_codim1(&f, &[near.params[0], m2], 1, BifKind::SaddleNode, 0, (near.y, near.params[0])).unwrap();
        assert!((re.orbit.params[0] - m1).abs() < 1e-11 && (re.orbit.y - sn.orbit.y).abs() < 1e-11);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let sn = solve_codim1(&ParabolaDummy, &[0.0, 0.0], 1, BifKind::SaddleNode, 0, (-0.4, -0.2)).unwrap();
        let c = continue_codim1(&ParabolaDummy, &sn, (0, 1), 0.1, 3).unwrap();
        let csv = curve_to_csv(&c);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "kind,period,param_i,param_j,Y,multiplier,test");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("SN,1,-0.25"));
    }
}
