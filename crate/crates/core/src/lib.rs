//! Homoclinic-orbit limit maps, their bifurcations and parameter-plane sweeps.

pub mod bifurcation;
pub mod config;
pub mod error;
pub mod homoclinic;
pub mod maps;
pub mod sweep;

pub use error::{Error, Result};
pub use maps::{eval_jet, eval_map, iterate_n, Family, Jet, ModelMap, ScalarMap};
