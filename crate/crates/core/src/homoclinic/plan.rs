//! Parameter sequences along which the coefficient of `Y` sweeps `[s⁻¹, s]`
//! (saddle) or `[-s, s]` (saddle-focus).

use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// How `(k_j, m_j)` are chosen for the saddle plan.
#[derive(Debug, Clone, PartialEq)]
pub enum RatioRule {
    /// `m_j = j²`, `k_j = round(θ0 m_j)`.
    SquareDenominators,
    /// Given `m_j`, `k_j = round(θ0 m_j)`.
    Denominators(Vec<usize>),
    /// Explicit `(k_j, m_j)`.
    Pairs(Vec<(usize, usize)>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanEntry {
    pub j: usize,
    pub k: usize,
    pub m: usize,
    /// Winding number, saddle-focus only.
    pub n: Option<i64>,
    /// Value of the tuned modulus at which the coefficient equals
    /// `s` (saddle) or `+s` (focus).
    pub end1: f64,
    /// Value at which the coefficient equals `s⁻¹` (saddle) or `-s` (focus).
    pub end2: f64,
    pub lo: f64,
    pub hi: f64,
    pub s: f64,
    /// `s / (C λ^m γ^k)`, saddle-focus only.
    pub argument: Option<f64>,
}

impl PlanEntry {
    pub fn diam(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SequencePlan {
    pub entries: Vec<PlanEntry>,
    /// `(j, reason)` for indices that could not be planned.
    pub skipped: Vec<(usize, String)>,
}

/// `S = |γ|^(k - m θ)`, the saddle coefficient with `λ = |γ|^-θ`.
pub fn saddle_coefficient(gamma: f64, k: usize, m: usize, theta: f64) -> f64 {
    gamma.abs().powf(k as f64 - m as f64 * theta)
}

/// Saddle plan; `s[j-1]` is the target amplitude for index `j`.
pub fn plan_sequence_saddle(theta0: f64, gamma: f64, s: &[f64], rule: &RatioRule) -> Result<SequencePlan> {
    if !(theta0 > 1.0) || !(gamma.abs() > 1.0) {
        return invalid(format!("need theta0 > 1 and |gamma| > 1, got {theta0}, {gamma}"));
    }
    let lg = gamma.abs().ln();
    let mut plan = SequencePlan::default();
    for (idx, &sj) in s.iter().enumerate() {
        let j = idx + 1;
        let pair = match rule {
            RatioRule::SquareDenominators => Some(((theta0 * (j * j) as f64).round() as usize, j * j)),
            RatioRule::Denominators(ms) => ms.get(idx).map(|&m| ((theta0 * m as f64).round() as usize, m)),
            RatioRule::Pairs(ps) => ps.get(idx).copied(),
        };
        let Some((k, m)) = pair else {
            plan.skipped.push((j, "ratio rule has no entry".into()));
            continue;
        };
        if m == 0 || k < m {
            plan.skipped.push((j, format!("infeasible pair k={k}, m={m}")));
            continue;
        }
        if !(sj > 0.0 && sj.is_finite()) {
            plan.skipped.push((j, format!("non-positive amplitude {sj}")));
            continue;
        }
        let centre = k as f64 / m as f64;
        let half = sj.ln() / (m as f64 * lg);
        let (end1, end2) = (centre - half, centre + half);
        plan.entries.push(PlanEntry {
            j,
            k,
            m,
            n: None,
            end1,
            end2,
            lo: end1.min(theta0),
            hi: end2.max(theta0),
            s: sj,
            argument: None,
        });
    }
    Ok(plan)
}

/// Options of the saddle-focus plan beyond the spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocusPlanOptions {
    /// Amplitude `C` of the coupling `C cos(mφ - ν)`.
    pub c: f64,
    pub nu: f64,
    /// `m_j = m_step * j`.
    pub m_step: usize,
    /// Largest `k_j / m_j` tried before giving up on an index.
    pub max_k_ratio: usize,
}

impl Default for FocusPlanOptions {
    fn default() -> Self {
        Self {
            c: 1.0,
            nu: 0.0,
            m_step: 10,
            max_k_ratio: 20,
        }
    }
}

/// Saddle-focus entry for a fixed `(k, m)`.
#[allow(clippy::too_many_arguments)]
pub fn plan_focus_entry(
    j: usize,
    k: usize,
    m: usize,
    s: f64,
    phi0: f64,
    lambda: f64,
    gamma: f64,
    opts: &FocusPlanOptions,
) -> Result<PlanEntry> {
    if m == 0 || k < m {
        return invalid(format!("infeasible pair k={k}, m={m}"));
    }
    let scale = opts.c * lambda.powi(m as i32) * gamma.abs().powi(k as i32);
    let argument = s / scale;
    if !(0.0..=1.0).contains(&argument) {
        return invalid(format!("arccos argument {argument} outside [0, 1] for k={k}, m={m}"));
    }
    let n = (m as f64 * phi0 / (2.0 * PI)).round() as i64;
    let base = opts.nu + 2.0 * PI * n as f64;
    let acos = argument.acos();
    let end1 = (acos + base) / m as f64;
    let end2 = (PI - acos + base) / m as f64;
    Ok(PlanEntry {
        j,
        k,
        m,
        n: Some(n),
        end1,
        end2,
        lo: end1.min(end2).min(phi0),
        hi: end1.max(end2).max(phi0),
        s,
        argument: Some(argument),
    })
}

/// Saddle-focus plan with `m_j = m_step * j` and the smallest `k_j >= m_j`
/// whose arccos argument is at most `1/(j+1)`.
pub fn plan_sequence_saddle_focus(
    phi0: f64,
    lambda: f64,
    gamma: f64,
    s: &[f64],
    opts: &FocusPlanOptions,
) -> Result<SequencePlan> {
    if !(phi0 > 0.0 && phi0 < PI) || !(lambda > 0.0 && lambda < 1.0) || !(gamma.abs() > 1.0) {
        return invalid("need phi0 in (0, pi), lambda in (0, 1), |gamma| > 1");
    }
    if opts.c <= 0.0 || opts.m_step == 0 {
        return invalid("focus plan needs c > 0 and m_step > 0");
    }
    let mut plan = SequencePlan::default();
    for (idx, &sj) in s.iter().enumerate() {
        let j = idx + 1;
        let m = opts.m_step * j;
        let target = 1.0 / (j as f64 + 1.0);
        let log_needed = (sj / (opts.c * target)).ln() - m as f64 * lambda.ln();
        let k_min = (log_needed / gamma.abs().ln()).ceil().max(m as f64) as usize;
        if k_min > opts.max_k_ratio * m {
            plan.skipped.push((j, format!("argument stays above {target} up to k = {}", opts.max_k_ratio * m)));
            continue;
        }
        // guard the ceiling against rounding in the logarithms
        let entry = (k_min..=k_min + 2)
            .filter_map(|k| plan_focus_entry(j, k, m, sj, phi0, lambda, gamma, opts).ok())
            .find(|e| e.argument.is_some_and(|a| a <= target));
        match entry {
            Some(e) => plan.entries.push(e),
            None => plan.skipped.push((j, "no k with admissible arccos argument".into())),
        }
    }
    Ok(plan)
}
