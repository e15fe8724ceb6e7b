//! Two-parameter sweeps classifying the attractor at every grid cell.

mod export;
mod grid;
mod scan;

pub use export::{csv_to_cells, export_grid, gray_level, grid_to_csv, grid_to_pgm, write_outputs, CSV_COLUMNS};
pub use grid::{plane_sweep, plane_sweep_with_workers, shrimp_locate, Component, SweepGrid};
pub use scan::{attractor_scan, Axis, CellOutcome, SeedRule, SweepSpec, SweepTarget, PERIOD_TOLERANCE};
