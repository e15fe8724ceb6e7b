//! Periodic orbits, codimension-one bifurcation curves and their
//! codimension-two degeneracies.

pub mod continuation;
pub mod orbit;
pub mod planar;
pub mod poly;

pub use continuation::{
    continue_codim1, continue_codim1_with, curve_to_csv, detect_codim2, BifCurve, ContinuationOptions,
    CurvePoint, Termination,
};
pub use orbit::{
    codim2_test, find_periodic_orbit, lyapunov_from_jet, lyapunov_value_1, solve_codim1, BifKind, BifPoint,
    PeriodicOrbit,
};
pub use planar::{find_fixed_point_nd, jacobian, solve_fold_nd, VectorMap};
pub use poly::Poly;
