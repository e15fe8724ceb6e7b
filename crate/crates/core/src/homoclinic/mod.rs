//! First-return maps near a quadratic homoclinic tangency and their rescaling.

pub mod frame;
pub mod global;
pub mod local;
pub mod plan;
pub mod ret;

pub use frame::{
    limit_map_error, measured_fold, measured_linear_coefficient, predict_shrimp_location, rescale_frame,
    rescaled_return, state_coupling, LimitMapError, RescaleFrame, RescaledReturn,
};
pub use global::GlobalMapTaylor;
pub use local::{
    cross_form_solve, in_theorem1_window, local_iterate, s_km, theta_of, LocalKind,
    LocalNormalForm, Nonlinearity, Point,
};
pub use plan::{
    plan_focus_entry, plan_sequence_saddle, plan_sequence_saddle_focus, saddle_coefficient,
    FocusPlanOptions, PlanEntry, RatioRule, SequencePlan,
};
pub use ret::{first_return, first_return_stages, Ordering, ReturnMapConfig, Stages};
