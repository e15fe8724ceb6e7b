use rand::seq::SliceRandom;
use rand::SeedableRng;
use shrimplab::bifurcation::find_periodic_orbit;
use shrimplab::sweep::*;
use shrimplab::Family;

fn family_spec(family: Family, base: Vec<f64>, lo: f64, hi: f64, n: usize) -> SweepSpec {
    let axes = [Axis { param: 0, lo, hi }, Axis { param: 1, lo, hi }];
    SweepSpec::new(SweepTarget::Family { family, base }, axes, n, n)
}

fn window(n: usize) -> SweepSpec {
    family_spec(Family::DoubleParabola, vec![0.0, 0.0], -0.5, 2.0, n)
}

#[test]
fn constant_corner_is_one_gray_value() {
    let spec = family_spec(Family::DoubleParabola, vec![0.0, 0.0], 0.0, 0.05, 2);
    let grid = plane_sweep(&spec).unwrap();
    assert!(grid.cells.iter().all(|c| *c == CellOutcome::Period(1)), "{:?}", grid.cells);
    let pgm = grid_to_pgm(&grid, "");
    let body: Vec<&str> = pgm.lines().filter(|l| !l.starts_with('#')).skip(3).collect();
    let values: Vec<&str> = body.iter().flat_map(|l| l.split_whitespace()).collect();
    assert_eq!(values.len(), 4);
    assert!(values.iter().all(|v| *v == values[0]));
    let csv = grid_to_csv(&grid, "");
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 2 * 2 + 1);
}

#[test]
fn shrimp3_without_m3_sweeps_like_double_parabola() {
    let a = plane_sweep(&window(24)).unwrap();
    let b = plane_sweep(&family_spec(Family::Shrimp3, vec![0.0, 0.0, 0.0], -0.5, 2.0, 24)).unwrap();
    assert_eq!(a.cells, b.cells);
}

fn synthetic(nx: usize, ny: usize, cell: impl Fn(usize, usize) -> CellOutcome) -> SweepGrid {
    let mut spec = window(2);
    spec.nx = nx;
    spec.ny = ny;
    let cells = (0..ny).flat_map(|j| (0..nx).map(move |i| (i, j))).map(|(i, j)| cell(i, j)).collect();
    SweepGrid { spec, cells }
}

#[test]
fn component_counts() {
    let board = synthetic(6, 5, |i, j| {
        if (i + j) % 2 == 0 {
            CellOutcome::Period(2)
        } else {
            CellOutcome::Escaped
        }
    });
    let comps = shrimp_locate(&board, 2);
    assert_eq!(comps.len(), 15);
    assert!(comps.iter().all(|c| c.cells == 1 && c.bbox.0 == c.bbox.1 && c.bbox.2 == c.bbox.3));
    assert!(shrimp_locate(&board, 1).is_empty());

    let full = synthetic(7, 4, |_, _| CellOutcome::Period(1));
    let comps = shrimp_locate(&full, 1);
    assert_eq!(comps.len(), 1);
    assert_eq!(comps[0].cells, 28);
    assert_eq!(comps[0].bbox, (0, 6, 0, 3));
    let (cx, cy) = comps[0].centroid;
    assert!((cx - 0.75).abs() < 1e-12 && (cy - 0.75).abs() < 1e-12);
}

// Every labelled period is rediscovered by Newton at that parameter, from a
// point on the attractor, as a stable orbit of exactly that period.
#[test]
fn labelled_periods_reverify() {
    let spec = window(40);
    let grid = plane_sweep(&spec).unwrap();
    let mut labelled: Vec<(usize, usize, usize)> = (0..spec.ny)
        .flat_map(|j| (0..spec.nx).map(move |i| (i, j)))
        .filter_map(|(i, j)| match grid.get(i, j) {
            CellOutcome::Period(p) => Some((i, j, p)),
            _ => None,
        })
        .collect();
    assert!(labelled.len() > 50);
    let mut rng = rand::rngs::StdRng::seed_from_u64(3);
    labelled.shuffle(&mut rng);
    for &(i, j, p) in labelled.iter().take(50) {
        let params = spec.params_at(i, j);
        let f = Family::DoubleParabola;
        let mut y = 0.0;
        for _ in 0..20_000 {
            y = f.value(&params, y);
        }
        let orbit = find_periodic_orbit(&f, &params, p, y).unwrap_or_else(|e| panic!("({i},{j}) p={p}: {e}"));
        assert!(orbit.multiplier.abs() < 1.0, "({i},{j}) p={p}: {orbit:?}");
    }
}

#[test]
fn refinement_keeps_uniform_neighbourhoods() {
    let coarse = plane_sweep(&window(17)).unwrap();
    let fine = plane_sweep(&window(33)).unwrap();
    let mut checked = 0;
    for j in 1..16 {
        for i in 1..16 {
            let c = coarse.get(i, j);
            if !matches!(c, CellOutcome::Period(_) | CellOutcome::Escaped) {
                continue;
            }
            let uniform = [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)]
                .iter()
                .all(|&(a, b)| coarse.get(a, b) == c);
            if !uniform {
                continue;
            }
            assert_eq!(fine.get(2 * i, 2 * j), c);
            for (a, b) in [(2 * i - 1, 2 * j), (2 * i + 1, 2 * j), (2 * i, 2 * j - 1), (2 * i, 2 * j + 1)] {
                assert_eq!(fine.get(a, b), c, "coarse ({i},{j}) fine ({a},{b})");
                checked += 1;
            }
        }
    }
    assert!(checked > 100, "{checked}");
}

#[test]
fn deterministic_across_workers() {
    let spec = window(20);
    let one = plane_sweep_with_workers(&spec, 1).unwrap();
    let four = plane_sweep_with_workers(&spec, 4).unwrap();
    assert_eq!(one.cells.len(), four.cells.len());
    for (a, b) in one.cells.iter().zip(&four.cells) {
        match (a, b) {
            (CellOutcome::Chaotic(x), CellOutcome::Chaotic(y)) | (CellOutcome::HighPeriod(x), CellOutcome::HighPeriod(y)) => {
                assert_eq!(x.to_bits(), y.to_bits())
            }
            _ => assert_eq!(a, b),
        }
    }
}

#[test]
fn csv_round_trip_of_a_real_sweep() {
    let grid = plane_sweep(&window(12)).unwrap();
    let csv = grid_to_csv(&grid, "# run\n");
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 12 * 12 + 1);
    let (nx, ny, cells) = csv_to_cells(&csv).unwrap();
    assert_eq!((nx, ny), (12, 12));
    assert_eq!(cells, grid.cells);
}

#[test]
fn outputs_land_in_fresh_directory() {
    let dir = tempfile::tempdir().unwrap();
    let grid = plane_sweep(&window(4)).unwrap();
    let out = dir.path().join("a/b");
    let (csv, pgm) = export_grid(&grid, &out, "toy", "# toy\n", false).unwrap();
    assert!(csv.exists() && pgm.exists());
    assert!(export_grid(&grid, &out, "toy", "# toy\n", false).is_err());
    assert!(export_grid(&grid, &out, "toy", "# toy\n", true).is_ok());
}
