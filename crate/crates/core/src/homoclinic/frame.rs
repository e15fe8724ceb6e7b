//! Affine rescaling that brings `T_km` close to the limit maps.
//!
//! Internally everything is computed for the composition read in application
//! order `T_b ∘ T0^n2 ∘ T_a ∘ T0^n1`; for `k >= m` this is `(a, b) = (1, 2)`,
//! otherwise the roles of the two global maps swap.

use nalgebra::{Matrix2, Vector2};

use super::global::GlobalMapTaylor;
use super::local::{cross_form_solve, local_iterate, LocalKind, LocalNormalForm, Point};
use super::ret::{first_return, Ordering, ReturnMapConfig};
use crate::bifurcation::{solve_codim1, solve_fold_nd, BifKind, VectorMap};
use crate::error::{Error, Result};
use crate::maps::Family;

const SHIFT_MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescaleFrame {
    pub ordering: Ordering,
    /// Scale of the unstable input coordinate: `y = y⁻ + shift2 + beta1 * Y`.
    pub beta1: f64,
    /// Scale of the stable input coordinates.
    pub beta2: f64,
    /// Shift of the stable input coordinates away from `x⁺`.
    pub shift1: Vector2<f64>,
    /// Shift of the unstable input coordinate away from `y⁻`.
    pub shift2: f64,
    /// Rescaled parameters of the configuration's current `(μ1, μ2)`.
    pub m1: f64,
    pub m2: f64,
    /// Coefficient of `Y` in the second component of the rescaled map.
    pub m3_coeff: f64,
    /// `m3_coeff / (λ^n2 γ^n1)`, i.e. `C2` for `k >= m` and `C1` otherwise.
    pub c_coeff: f64,
    /// Phase of `c_b` relative to `b_a`; focus only.
    pub nu: Option<f64>,
    /// Scale of the transverse stable direction relative to `beta2`.
    pub delta_km: f64,
    /// `μ_i = mu_offset_i + M_i / gain_i`, indexed by global map.
    pub gain1: f64,
    pub gain2: f64,
    pub mu1_offset: f64,
    pub mu2_offset: f64,
    basis: Matrix2<f64>,
    basis_inv: Matrix2<f64>,
    x_base: Vector2<f64>,
    y_base: f64,
}

/// `γ^(-e/3)` with the real cube root, so odd powers keep the sign of `γ`.
fn gamma_third_power(gamma: f64, e: i32) -> f64 {
    gamma.cbrt().powi(-e)
}

fn stable_basis(local: &LocalNormalForm, b: &Vector2<f64>, beta2: f64, delta: f64) -> Matrix2<f64> {
    if local.is_focus() {
        let e = if b[0].abs() >= b[1].abs() {
            Vector2::new(0.0, 1.0)
        } else {
            Vector2::new(1.0, 0.0)
        };
        Matrix2::from_columns(&[b * beta2, e * (delta * beta2)])
    } else {
        Matrix2::new(beta2 * b[0], 0.0, 0.0, 1.0)
    }
}

/// `c · A^n b` in closed form, returned with the phase `ν` for a focus.
fn coupling(local: &LocalNormalForm, b: &Vector2<f64>, c: &Vector2<f64>, n: usize) -> (f64, Option<f64>) {
    match local.kind() {
        LocalKind::Saddle { sign } => (b[0] * c[0] * (sign * local.lambda()).powi(n as i32), None),
        LocalKind::SaddleFocus { phi } => {
            let nu = (b[0] * c[1] - b[1] * c[0]).atan2(b[0] * c[0] + b[1] * c[1]);
            let amp = (b.norm_squared() * c.norm_squared()).sqrt();
            (amp * (n as f64 * phi - nu).cos() * local.lambda().powi(n as i32), Some(nu))
        }
    }
}

struct Offsets {
    shift: Vector2<f64>,
    mu_a: f64,
    mu_b: f64,
}

// Cancels the constant terms of the composition: the input stable shift is the
// fixed point of the x-part at Y = 0, and each μ offset places the image on
// the next section's tangency level.
fn offsets(
    local: &LocalNormalForm,
    n1: usize,
    n2: usize,
    ga: &GlobalMapTaylor,
    gb: &GlobalMapTaylor,
) -> Result<Offsets> {
    let ga0 = ga.with_mu(0.0);
    let gb0 = gb.with_mu(0.0);
    let mut shift = Vector2::zeros();
    let mut last = (0.0, 0.0);
    for _ in 0..SHIFT_MAX_ITERATIONS {
        let (x11, _) = cross_form_solve(local, gb.x_plus + shift, ga.y_minus, n1)?;
        let p01 = ga0.apply(&Point::new(x11, ga.y_minus));
        let (x12, y01) = cross_form_solve(local, p01.x, gb.y_minus, n2)?;
        let p02 = gb0.apply(&Point::new(x12, gb.y_minus));
        let (_, y02) = cross_form_solve(local, p02.x, ga.y_minus, n1)?;
        last = (y01 - p01.y, y02 - p02.y);
        let next = p02.x - gb.x_plus;
        let change = (next - shift).amax();
        shift = next;
        if change <= 1e-15 * (1.0 + shift.amax()) {
            return Ok(Offsets {
                shift,
                mu_a: last.0,
                mu_b: last.1,
            });
        }
    }
    Err(Error::NoConvergence {
        solver: "frame shift",
        iterations: SHIFT_MAX_ITERATIONS,
        residual: (last.0 + last.1).abs(),
    })
}

/// Builds the rescaling frame of a configuration.
pub fn rescale_frame(cfg: &ReturnMapConfig) -> Result<RescaleFrame> {
    let local = &cfg.local;
    let (n1, n2, ga, gb) = cfg.oriented();
    let gamma = local.gamma();
    let (e1, e2) = (n1 as i32, n2 as i32);

    let beta1 = -gamma_third_power(gamma, e1 + 2 * e2) / (gb.d * ga.d * ga.d).cbrt();
    let beta2 = -gamma_third_power(gamma, e2 + 2 * e1) / (ga.d * gb.d * gb.d).cbrt();
    let gain_a = gamma.powi(e2) / beta2;
    let gain_b = gamma.powi(e1) / beta1;
    let delta_km = gamma.abs().powf(-(2.0 * n1 as f64 + n2 as f64) / 9.0);

    let off = offsets(local, n1, n2, ga, gb)?;
    let (c_coeff, nu) = coupling(local, &ga.b, &gb.c, n2);
    let m3_coeff = c_coeff * gamma.powi(e1);
    let c_coeff = c_coeff / local.lambda().powi(e2);

    let basis = stable_basis(local, &gb.b, beta2, delta_km);
    let basis_inv = basis
        .try_inverse()
        .ok_or(Error::Singular("rescale frame basis"))?;

    let ma = gain_a * (ga.mu - off.mu_a);
    let mb = gain_b * (gb.mu - off.mu_b);
    let (m1, m2, gain1, gain2, mu1_offset, mu2_offset) = match cfg.ordering {
        Ordering::KGeqM => (ma, mb, gain_a, gain_b, off.mu_a, off.mu_b),
        Ordering::KLtM => (mb, ma, gain_b, gain_a, off.mu_b, off.mu_a),
    };

    Ok(RescaleFrame {
        ordering: cfg.ordering,
        beta1,
        beta2,
        shift1: off.shift,
        shift2: 0.0,
        m1,
        m2,
        m3_coeff,
        c_coeff,
        nu,
        delta_km,
        gain1,
        gain2,
        mu1_offset,
        mu2_offset,
        basis,
        basis_inv,
        x_base: gb.x_plus + off.shift,
        y_base: ga.y_minus,
    })
}

impl RescaleFrame {
    /// Rescaled input `(X, Y)` to `(x, y)` with `y` taken after the first
    /// local passage.
    pub fn to_original(&self, x: &Vector2<f64>, y: f64) -> (Vector2<f64>, f64) {
        (self.x_base + self.basis * x, self.y_base + self.shift2 + self.beta1 * y)
    }

    pub fn to_rescaled(&self, x: &Vector2<f64>, y: f64) -> (Vector2<f64>, f64) {
        (self.basis_inv * (x - self.x_base), (y - self.y_base - self.shift2) / self.beta1)
    }

    /// `(μ1, μ2)` realising the rescaled parameters `(M1, M2)`.
    pub fn mu_for(&self, m1: f64, m2: f64) -> (f64, f64) {
        (self.mu1_offset + m1 / self.gain1, self.mu2_offset + m2 / self.gain2)
    }

    pub fn params_for(&self, mu1: f64, mu2: f64) -> (f64, f64) {
        (self.gain1 * (mu1 - self.mu1_offset), self.gain2 * (mu2 - self.mu2_offset))
    }

    /// Labelled `(M1, M2)` reordered as `(first, second)` for the limit map
    /// `X̄ = first - Y²`, `Ȳ = second - X̄²`.
    pub fn limit_order(&self, m1: f64, m2: f64) -> (f64, f64) {
        match self.ordering {
            Ordering::KGeqM => (m1, m2),
            Ordering::KLtM => (m2, m1),
        }
    }

    /// Inverse of [`limit_order`](Self::limit_order).
    pub fn labelled(&self, first: f64, second: f64) -> (f64, f64) {
        self.limit_order(first, second)
    }
}

/// `T_km` conjugated by its rescaling frame, parametrised by the limit-map
/// parameters.
#[derive(Debug, Clone, Copy)]
pub struct RescaledReturn {
    cfg: ReturnMapConfig,
    frame: RescaleFrame,
}

impl RescaledReturn {
    pub fn new(cfg: &ReturnMapConfig) -> Result<Self> {
        Ok(Self {
            cfg: *cfg,
            frame: rescale_frame(cfg)?,
        })
    }

    pub fn frame(&self) -> &RescaleFrame {
        &self.frame
    }

    pub fn config(&self) -> &ReturnMapConfig {
        &self.cfg
    }

    /// Configuration whose `μ` realises the limit-order parameters.
    pub fn config_for(&self, first: f64, second: f64) -> ReturnMapConfig {
        let (m1, m2) = self.frame.labelled(first, second);
        let (mu1, mu2) = self.frame.mu_for(m1, m2);
        self.cfg.with_mu(mu1, mu2)
    }

    /// One application of the rescaled map at limit-order parameters.
    pub fn apply(&self, x: &Vector2<f64>, y: f64, first: f64, second: f64) -> Result<(Vector2<f64>, f64)> {
        let cfg = self.config_for(first, second);
        let (n1, _, _, _) = cfg.oriented();
        let (x_in, y_cross) = self.frame.to_original(x, y);
        let (_, y_start) = cross_form_solve(&cfg.local, x_in, y_cross, n1)?;
        let out = first_return(&cfg, Point::new(x_in, y_start))?;
        let next = local_iterate(&cfg.local, out, n1)?;
        Ok(self.frame.to_rescaled(&out.x, next.y))
    }
}

/// State `[X.., Y]` with one stable component for a saddle and two for a
/// focus; parameters are the limit-order pair.
impl VectorMap for RescaledReturn {
    fn dim(&self) -> usize {
        if self.cfg.local.is_focus() {
            3
        } else {
            2
        }
    }

    fn param_count(&self) -> usize {
        2
    }

    fn apply(&self, params: &[f64], state: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim() - 1;
        let x = Vector2::new(state[0], if n == 2 { state[1] } else { 0.0 });
        let (xb, yb) = RescaledReturn::apply(self, &x, state[n], params[0], params[1])?;
        let mut out: Vec<f64> = xb.iter().take(n).copied().collect();
        out.push(yb);
        Ok(out)
    }
}

/// Fold of the full composition at the limit-order parameter `first`, found
/// from the fold of the limit map with the same `M3`. Returns the labelled
/// `(μ1, μ2)` and the limit-order `second` at the fold.
pub fn measured_fold(cfg: &ReturnMapConfig, first: f64, guess: (f64, f64)) -> Result<((f64, f64), f64)> {
    let r = RescaledReturn::new(cfg)?;
    let m3 = r.frame.m3_coeff;
    let limit = solve_codim1(&Family::Shrimp3, &[first, guess.1, m3], 1, BifKind::SaddleNode, 1, guess)?;
    let (y, second) = (limit.orbit.y, limit.orbit.params[1]);
    let mut state = vec![first - y * y];
    if cfg.local.is_focus() {
        state.push(0.0);
    }
    state.push(y);
    let (_, second) = solve_fold_nd(&r, &[first, second], 1, 1.0, &state, second)?;
    let (m1, m2) = r.frame.labelled(first, second);
    Ok((r.frame.mu_for(m1, m2), second))
}

/// Rescaled return map at labelled parameters `(M1, M2)`.
pub fn rescaled_return(
    cfg: &ReturnMapConfig,
    x: &Vector2<f64>,
    y: f64,
    m1: f64,
    m2: f64,
) -> Result<(Vector2<f64>, f64)> {
    let r = RescaledReturn::new(cfg)?;
    let (first, second) = r.frame.limit_order(m1, m2);
    r.apply(x, y, first, second)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitMapError {
    /// Against `second - (first - Y²)²`.
    pub err_thm1: f64,
    /// Against `second - (first - Y²)² + M3 Y`.
    pub err_thm2: f64,
    pub evaluated: usize,
    /// Lattice points dropped because the composition escaped.
    pub excluded: usize,
}

/// Sup-distance of the rescaled return map to the limit maps over a
/// `grid³` lattice of `(Y, first, second)` in the closed ball of `radius`,
/// with the stable coordinate `X = 0`.
pub fn limit_map_error(cfg: &ReturnMapConfig, radius: f64, grid: usize) -> Result<LimitMapError> {
    if !(radius > 0.0 && radius.is_finite()) || grid < 2 {
        return crate::error::invalid(format!("need radius > 0 and grid >= 2, got {radius}, {grid}"));
    }
    let r = RescaledReturn::new(cfg)?;
    let m3 = r.frame.m3_coeff;
    let node = |i: usize| -radius + 2.0 * radius * i as f64 / (grid - 1) as f64;
    let mut out = LimitMapError {
        err_thm1: 0.0,
        err_thm2: 0.0,
        evaluated: 0,
        excluded: 0,
    };
    for i in 0..grid {
        for j in 0..grid {
            for l in 0..grid {
                let (y, p1, p2) = (node(i), node(j), node(l));
                if (y * y + p1 * p1 + p2 * p2).sqrt() > radius * (1.0 + 1e-12) {
                    continue;
                }
                match r.apply(&Vector2::zeros(), y, p1, p2) {
                    Ok((_, ybar)) if ybar.is_finite() => {
                        let base = p2 - (p1 - y * y).powi(2);
                        out.err_thm1 = out.err_thm1.max((ybar - base).abs());
                        out.err_thm2 = out.err_thm2.max((ybar - base - m3 * y).abs());
                        out.evaluated += 1;
                    }
                    _ => out.excluded += 1,
                }
            }
        }
    }
    Ok(out)
}

/// Central difference of `Ȳ` in `Y` at the origin with zero parameters; the
/// even limit part cancels.
pub fn measured_linear_coefficient(cfg: &ReturnMapConfig, h: f64) -> Result<f64> {
    let r = RescaledReturn::new(cfg)?;
    let (_, up) = r.apply(&Vector2::zeros(), h, 0.0, 0.0)?;
    let (_, down) = r.apply(&Vector2::zeros(), -h, 0.0, 0.0)?;
    Ok((up - down) / (2.0 * h))
}

/// `∂X̄/∂X` along the leading stable direction at the origin. It is the
/// coefficient the limit maps drop and decays like `S_km`.
pub fn state_coupling(cfg: &ReturnMapConfig, h: f64) -> Result<f64> {
    let r = RescaledReturn::new(cfg)?;
    let e = Vector2::new(h, 0.0);
    let (up, _) = r.apply(&e, 0.0, 0.0, 0.0)?;
    let (down, _) = r.apply(&(-e), 0.0, 0.0, 0.0)?;
    Ok((up[0] - down[0]) / (2.0 * h))
}

/// Leading-order `(μ1, μ2)` of the point whose rescaled parameters are the
/// labelled `(M1, M2)`.
pub fn predict_shrimp_location(cfg: &ReturnMapConfig, m1: f64, m2: f64) -> Result<(f64, f64)> {
    let frame = rescale_frame(cfg)?;
    let local = &cfg.local;
    let (n1, n2, ga, gb) = cfg.oriented();
    let gamma = local.gamma();
    let alpha_a = ga.c.dot(&(local.linear_power(n1) * gb.x_plus));
    let alpha_b = gb.c.dot(&(local.linear_power(n2) * ga.x_plus));
    let (first, second) = frame.limit_order(m1, m2);
    let (gain_a, gain_b) = frame.limit_order(frame.gain1, frame.gain2);
    let mu_a = first / gain_a + gb.y_minus / gamma.powi(n2 as i32) - alpha_a;
    let mu_b = second / gain_b + ga.y_minus / gamma.powi(n1 as i32) - alpha_b;
    Ok(frame.labelled(mu_a, mu_b))
}
