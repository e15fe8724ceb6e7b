use std::collections::VecDeque;

use rayon::prelude::*;

use super::scan::{scan_dynamics, CellOutcome, SweepSpec, SweepTarget};
use crate::error::{invalid, Result};
use crate::homoclinic::RescaledReturn;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub spec: SweepSpec,
    /// Row-major: cell `(i, j)` at `j * nx + i`.
    pub cells: Vec<CellOutcome>,
}

impl SweepGrid {
    pub fn nx(&self) -> usize {
        self.spec.nx
    }

    pub fn ny(&self) -> usize {
        self.spec.ny
    }

    pub fn get(&self, i: usize, j: usize) -> CellOutcome {
        self.cells[j * self.spec.nx + i]
    }
}

/// Sweeps the plane on the current rayon pool. Output is independent of the
/// worker count: every cell is computed from its own seed.
pub fn plane_sweep(spec: &SweepSpec) -> Result<SweepGrid> {
    spec.validate()?;
    let n = spec.nx * spec.ny;
    let cell = |idx: usize| spec.params_at(idx % spec.nx, idx / spec.nx);
    let cells = match &spec.target {
        SweepTarget::Family { family, .. } => {
            (0..n).into_par_iter().map(|idx| scan_dynamics(family, &cell(idx), spec)).collect()
        }
        SweepTarget::ReturnMap { config } => {
            let map = RescaledReturn::new(config)?;
            (0..n).into_par_iter().map(|idx| scan_dynamics(&map, &cell(idx), spec)).collect()
        }
    };
    Ok(SweepGrid { spec: spec.clone(), cells })
}

/// [`plane_sweep`] on a dedicated pool of `workers` threads.
pub fn plane_sweep_with_workers(spec: &SweepSpec, workers: usize) -> Result<SweepGrid> {
    if workers == 0 {
        return invalid("worker count must be at least 1");
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| crate::Error::InvalidInput(format!("thread pool: {e}")))?;
    pool.install(|| plane_sweep(spec))
}

/// A 4-connected set of cells sharing one period.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub period: usize,
    pub cells: usize,
    /// Inclusive `(i_min, i_max, j_min, j_max)`.
    pub bbox: (usize, usize, usize, usize),
    /// Parameter-space centroid.
    pub centroid: (f64, f64),
}

/// Connected components of `Period(period)` cells, in scan order of their
/// first cell, largest-first ordering left to the caller.
pub fn shrimp_locate(grid: &SweepGrid, period: usize) -> Vec<Component> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let hit = |i: usize, j: usize| grid.get(i, j) == CellOutcome::Period(period);
    let mut seen = vec![false; nx * ny];
    let mut out = Vec::new();
    for j0 in 0..ny {
        for i0 in 0..nx {
            if seen[j0 * nx + i0] || !hit(i0, j0) {
                continue;
            }
            seen[j0 * nx + i0] = true;
            let mut queue = VecDeque::from([(i0, j0)]);
            let (mut count, mut bbox, mut sum) = (0, (i0, i0, j0, j0), (0.0, 0.0));
            while let Some((i, j)) = queue.pop_front() {
                count += 1;
                bbox = (bbox.0.min(i), bbox.1.max(i), bbox.2.min(j), bbox.3.max(j));
                let (pi, pj) = grid.spec.coordinate(i, j);
                sum = (sum.0 + pi, sum.1 + pj);
                let neighbours = [
                    (i.wrapping_sub(1), j),
                    (i + 1, j),
                    (i, j.wrapping_sub(1)),
                    (i, j + 1),
                ];
                for (a, b) in neighbours {
                    if a < nx && b < ny && !seen[b * nx + a] && hit(a, b) {
                        seen[b * nx + a] = true;
                        queue.push_back((a, b));
                    }
                }
            }
            out.push(Component {
                period,
                cells: count,
                bbox,
                centroid: (sum.0 / count as f64, sum.1 / count as f64),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::Family;
    use crate::sweep::Axis;

    fn small() -> SweepSpec {
        let target = SweepTarget::Family { family: Family::DoubleParabola, base: vec![0.0, 0.0] };
        let axes = [Axis { param: 0, lo: -0.5, hi: 2.0 }, Axis { param: 1, lo: -0.5, hi: 2.0 }];
        let mut s = SweepSpec::new(target, axes, 24, 20);
        s.transient = 300;
        s.samples = 300;
        s.max_period = 8;
        s
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let s = small();
        let a = plane_sweep_with_workers(&s, 1).unwrap();
        let b = plane_sweep_with_workers(&s, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn components_cover_period_cells() {
        let g = plane_sweep(&small()).unwrap();
        let comps = shrimp_locate(&g, 1);
        let total: usize = comps.iter().map(|c| c.cells).sum();
        assert_eq!(total, g.cells.iter().filter(|c| **c == CellOutcome::Period(1)).count());
        assert!(!comps.is_empty());
        for c in &comps {
            assert!(c.bbox.0 <= c.bbox.1 && c.bbox.2 <= c.bbox.3);
        }
    }

    #[test]
    fn rejects_zero_workers_and_degenerate_axes() {
        assert!(plane_sweep_with_workers(&small(), 0).is_err());
        let mut s = small();
        s.axes[1].param = 0;
        assert!(plane_sweep(&s).is_err());
    }
}
