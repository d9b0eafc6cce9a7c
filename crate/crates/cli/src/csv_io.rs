//! Field CSV files: header `x1,...,xN,value`, one row per node in
//! lexicographic order, 17 significant digits.

use std::path::Path;

use anisoflow::{Grid, GridField};

use crate::error::{CliError, CliResult};

pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn header(dim: usize) -> Vec<String> {
    let mut h: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    h.push("value".into());
    h
}

pub fn write_field(path: &Path, f: &GridField) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header(f.grid.dim()))?;
    let mut row = Vec::with_capacity(f.grid.dim() + 1);
    let mut err = None;
    f.grid.for_each_node(|k, x| {
        if err.is_some() {
            return;
        }
        row.clear();
        row.extend(x.iter().map(|v| fmt_num(*v)));
        row.push(fmt_num(f.values[k]));
        if let Err(e) = w.write_record(&row) {
            err = Some(e);
        }
    });
    if let Some(e) = err {
        return Err(e.into());
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Rows of `(coordinate, value)` pairs, e.g. a residual sweep.
pub fn write_pairs(path: &Path, rows: &[(f64, f64)]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header(1))?;
    for (x, v) in rows {
        w.write_record([fmt_num(*x), fmt_num(*v)])?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Reads a field written by [`write_field`] and rebuilds its grid. The
/// nodes must form the symmetric uniform grid `[-L_i, L_i]`.
pub fn read_field(path: &Path, time: f64) -> CliResult<GridField> {
    let mut r = csv::Reader::from_path(path)?;
    let dim = r
        .headers()?
        .len()
        .checked_sub(1)
        .filter(|d| *d > 0)
        .ok_or_else(|| {
            CliError::Validation(format!(
                "{}: expected columns x1,...,xN,value",
                path.display()
            ))
        })?;
    if r.headers()? != &csv::StringRecord::from(header(dim)) {
        return Err(CliError::Validation(format!(
            "{}: header must be {}",
            path.display(),
            header(dim).join(",")
        )));
    }
    let mut coords: Vec<Vec<f64>> = Vec::new();
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let nums = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        values.push(nums[dim]);
        coords.push(nums[..dim].to_vec());
    }
    let mut extents = Vec::with_capacity(dim);
    let mut nodes = Vec::with_capacity(dim);
    for axis in 0..dim {
        let mut c: Vec<f64> = coords.iter().map(|x| x[axis]).collect();
        c.sort_by(f64::total_cmp);
        c.dedup();
        extents.push(c.last().copied().unwrap_or(0.0));
        nodes.push(c.len());
    }
    let grid = Grid::new(&extents, &nodes)?;
    if grid.len() != values.len() {
        return Err(CliError::Validation(format!(
            "{}: {} rows do not fill a {:?} grid",
            path.display(),
            values.len(),
            nodes
        )));
    }
    let mut x = vec![0.0; dim];
    for (k, row) in coords.iter().enumerate() {
        grid.node_coords(k, &mut x);
        let tol = 1e-9 * grid.max_spacing();
        if row.iter().zip(&x).any(|(a, b)| (a - b).abs() > tol) {
            return Err(CliError::Validation(format!(
                "{}: row {} is not node {k} of a symmetric uniform grid in lexicographic order",
                path.display(),
                k + 1
            )));
        }
    }
    Ok(GridField::new(grid, values, time)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(&[1.5, 2.0], &[16, 17]).unwrap();
        let f = GridField::from_fn(g, 0.0, |x| (x[0] * 3.1).sin() * x[1].exp() / 7.0);
        let path = dir.path().join("f.csv");
        write_field(&path, &f).unwrap();
        let back = read_field(&path, 0.0).unwrap();
        assert_eq!(back.grid, f.grid);
        assert_eq!(back.values, f.values);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("x1,x2,value\n"));
        assert_eq!(text.lines().count(), 16 * 17 + 1);
    }

    #[test]
    fn rejects_shuffled_rows() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::uniform(1, 1.0, 16).unwrap();
        let f = GridField::from_fn(g, 0.0, |x| x[0]);
        let path = dir.path().join("f.csv");
        write_field(&path, &f).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        lines.swap(1, 2);
        std::fs::write(&path, lines.join("\n")).unwrap();
        assert!(matches!(
            read_field(&path, 0.0),
            Err(CliError::Validation(_))
        ));
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_num(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_num(-2.0), "-2.0000000000000000e0");
    }
}
