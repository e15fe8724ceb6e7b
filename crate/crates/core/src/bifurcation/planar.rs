//! Fixed points and folds of finite-dimensional maps with finite-difference
//! Jacobians, used for composed return maps.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};

const STATE_FD_STEP: f64 = 1e-5;
const OUTER_FD_STEP: f64 = 1e-5;
const MAX_ITERATIONS: usize = 50;

/// A parametrised map `R^dim -> R^dim`.
pub trait VectorMap: Sync {
    fn dim(&self) -> usize;
    fn param_count(&self) -> usize;
    fn apply(&self, params: &[f64], state: &[f64]) -> Result<Vec<f64>>;
}

pub fn jacobian<M: VectorMap + ?Sized>(map: &M, params: &[f64], state: &[f64]) -> Result<DMatrix<f64>> {
    let n = map.dim();
    let mut jac = DMatrix::zeros(n, n);
    let mut s = state.to_vec();
    for c in 0..n {
        let h = STATE_FD_STEP * (1.0 + state[c].abs());
        s[c] = state[c] + h;
        let up = map.apply(params, &s)?;
        s[c] = state[c] - h;
        let down = map.apply(params, &s)?;
        s[c] = state[c];
        for r in 0..n {
            jac[(r, c)] = (up[r] - down[r]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// `(F(state) - state, det(DF - s I))`.
fn fold_residual<M: VectorMap + ?Sized>(map: &M, params: &[f64], state: &[f64], s: f64) -> Result<DVector<f64>> {
    let n = map.dim();
    let image = map.apply(params, state)?;
    let jac = jacobian(map, params, state)? - DMatrix::identity(n, n) * s;
    let mut r = DVector::zeros(n + 1);
    for i in 0..n {
        r[i] = image[i] - state[i];
    }
    r[n] = jac.determinant();
    Ok(r)
}

fn newton<F>(mut x: DVector<f64>, tol: f64, solver: &'static str, f: F) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    let n = x.len();
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        let r = f(&x)?;
        residual = r.amax();
        if residual <= tol {
            return Ok(x);
        }
        let mut jac = DMatrix::zeros(n, n);
        for c in 0..n {
            let h = OUTER_FD_STEP * (1.0 + x[c].abs());
            let mut xp = x.clone();
            xp[c] += h;
            let mut xm = x.clone();
            xm[c] -= h;
            let col = (f(&xp)? - f(&xm)?) / (2.0 * h);
            jac.set_column(c, &col);
        }
        let dx = jac.lu().solve(&r).ok_or(Error::Singular(solver))?;
        x -= &dx;
        // stagnation at the finite-difference noise floor
        if dx.amax() <= 1e-13 * (1.0 + x.amax()) && residual <= 1e3 * tol {
            return Ok(x);
        }
        if !x.iter().all(|v| v.is_finite()) {
            break;
        }
    }
    Err(Error::NoConvergence {
        solver,
        iterations: MAX_ITERATIONS,
        residual,
    })
}

pub fn find_fixed_point_nd<M: VectorMap + ?Sized>(map: &M, params: &[f64], guess: &[f64]) -> Result<Vec<f64>> {
    if guess.len() != map.dim() || params.len() != map.param_count() {
        return invalid("fixed-point guess or parameters have the wrong length");
    }
    let x = newton(DVector::from_column_slice(guess), 1e-10, "fixed-point Newton", |x| {
        let image = map.apply(params, x.as_slice())?;
        Ok(DVector::from_iterator(x.len(), image.iter().zip(x.iter()).map(|(a, b)| a - b)))
    })?;
    Ok(x.as_slice().to_vec())
}

/// Fold (`multiplier = 1`) or flip (`multiplier = -1`) point in
/// `(state, params[free])`. Returns the state and the free parameter.
pub fn solve_fold_nd<M: VectorMap + ?Sized>(
    map: &M,
    params: &[f64],
    free: usize,
    multiplier: f64,
    guess_state: &[f64],
    guess_param: f64,
) -> Result<(Vec<f64>, f64)> {
    let n = map.dim();
    if guess_state.len() != n || params.len() != map.param_count() || free >= params.len() {
        return invalid("fold guess, parameters or free index have the wrong shape");
    }
    let mut x0 = DVector::zeros(n + 1);
    x0.rows_mut(0, n).copy_from_slice(guess_state);
    x0[n] = guess_param;
    let x = newton(x0, 1e-7, "fold Newton", |x| {
        let mut p = params.to_vec();
        p[free] = x[n];
        fold_residual(map, &p, &x.as_slice()[..n], multiplier)
    })?;
    Ok((x.as_slice()[..n].to_vec(), x[n]))
}
