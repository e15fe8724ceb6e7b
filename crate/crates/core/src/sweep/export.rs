//! CSV and PGM output for sweep grids, and CSV re-import.

use std::fs;
use std::path::{Path, PathBuf};

use super::grid::SweepGrid;
use super::scan::CellOutcome;
use crate::error::{Error, Result};

pub const CSV_COLUMNS: &str = "i,j,param_i,param_j,outcome,period_or_lyap";

fn comment_block(header: &str) -> String {
    header.lines().map(|l| format!("# {l}\n")).collect()
}

/// One row per cell, preceded by `#` comment lines built from `header`.
pub fn grid_to_csv(grid: &SweepGrid, header: &str) -> String {
    let mut out = comment_block(header);
    out.push_str(CSV_COLUMNS);
    out.push('\n');
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let (pi, pj) = grid.spec.coordinate(i, j);
            let cell = grid.get(i, j);
            let value = match cell {
                CellOutcome::Period(p) => p.to_string(),
                CellOutcome::Chaotic(l) | CellOutcome::HighPeriod(l) => l.to_string(),
                CellOutcome::Escaped => String::new(),
            };
            out.push_str(&format!("{i},{j},{pi},{pj},{},{value}\n", cell.name()));
        }
    }
    out
}

/// Gray level of a cell: escaped white, chaotic black, high-period dark gray,
/// periods spread over 64..=224.
pub fn gray_level(cell: CellOutcome, max_period: usize) -> u8 {
    match cell {
        CellOutcome::Escaped => 255,
        CellOutcome::Chaotic(_) => 0,
        CellOutcome::HighPeriod(_) => 32,
        CellOutcome::Period(p) => {
            let span = max_period.saturating_sub(1).max(1);
            (64 + (p.saturating_sub(1).min(span)) * 160 / span) as u8
        }
    }
}

/// Plain PGM; the top row is the largest vertical parameter.
pub fn grid_to_pgm(grid: &SweepGrid, header: &str) -> String {
    let mut out = String::from("P2\n");
    out.push_str(&comment_block(header));
    out.push_str(&format!("{} {}\n255\n", grid.nx(), grid.ny()));
    for j in (0..grid.ny()).rev() {
        let row: Vec<String> = (0..grid.nx())
            .map(|i| gray_level(grid.get(i, j), grid.spec.max_period).to_string())
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Cells read back from [`grid_to_csv`] output: `(nx, ny, cells)`.
pub fn csv_to_cells(text: &str) -> Result<(usize, usize, Vec<CellOutcome>)> {
    let bad = |n: usize, what: &str| Error::InvalidInput(format!("csv line {n}: {what}"));
    let mut rows = Vec::new();
    let mut seen_columns = false;
    for (idx, line) in text.lines().enumerate() {
        let n = idx + 1;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !seen_columns {
            if line != CSV_COLUMNS {
                return Err(bad(n, "unexpected column header"));
            }
            seen_columns = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(bad(n, "expected 6 fields"));
        }
        let i: usize = f[0].parse().map_err(|_| bad(n, "bad i"))?;
        let j: usize = f[1].parse().map_err(|_| bad(n, "bad j"))?;
        let lyap = || f[5].parse::<f64>().map_err(|_| bad(n, "bad exponent"));
        let cell = match f[4] {
            "period" => CellOutcome::Period(f[5].parse().map_err(|_| bad(n, "bad period"))?),
            "chaotic" => CellOutcome::Chaotic(lyap()?),
            "high-period" => CellOutcome::HighPeriod(lyap()?),
            "escaped" => CellOutcome::Escaped,
            other => return Err(bad(n, &format!("unknown outcome '{other}'"))),
        };
        rows.push((i, j, cell));
    }
    let nx = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
    let ny = rows.iter().map(|r| r.1 + 1).max().unwrap_or(0);
    if rows.len() != nx * ny {
        return Err(Error::InvalidInput(format!("csv has {} cells for a {nx}x{ny} grid", rows.len())));
    }
    let mut cells = vec![None; nx * ny];
    for (i, j, c) in rows {
        if cells[j * nx + i].replace(c).is_some() {
            return Err(Error::InvalidInput(format!("csv repeats cell ({i}, {j})")));
        }
    }
    Ok((nx, ny, cells.into_iter().map(|c| c.unwrap()).collect()))
}

pub(crate) fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Writes `<stem>.csv` and `<stem>.pgm` into `dir`, creating it if needed.
/// Existing files are refused unless `force`.
pub fn export_grid(grid: &SweepGrid, dir: &Path, stem: &str, header: &str, force: bool) -> Result<(PathBuf, PathBuf)> {
    let csv = dir.join(format!("{stem}.csv"));
    let pgm = dir.join(format!("{stem}.pgm"));
    write_outputs(&[(&csv, grid_to_csv(grid, header)), (&pgm, grid_to_pgm(grid, header))], force)?;
    Ok((csv, pgm))
}

/// Writes every file or none: existing targets are checked before any write.
pub fn write_outputs(files: &[(&Path, String)], force: bool) -> Result<()> {
    if !force {
        if let Some((p, _)) = files.iter().find(|(p, _)| p.exists()) {
            return Err(Error::Io {
                path: p.display().to_string(),
                message: "file exists (use --force to overwrite)".into(),
            });
        }
    }
    for (path, text) in files {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
        }
        fs::write(path, text).map_err(|e| io_error(path, e))?;
    }
    Ok(())
}
