//! CSV serialization of fields, trajectory logs, and conditional density
//! matrices. One row per cell: axis coordinates (continuous as reals,
//! discrete as labels) followed by the value; header row naming axes.

use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::axis::AxisKind;
use crate::dynamics::TrajectoryLog;
use crate::error::{CoreError, Result};
use crate::field::ScalarField;
use crate::grid::Grid;
use crate::observables::ConditionalDensityOperator;

fn io_err(e: std::io::Error) -> CoreError {
    CoreError::Integration(format!("io: {e}"))
}

fn cell_label(grid: &Grid, axis: usize, idx: usize) -> String {
    match &grid.axis(axis).kind {
        AxisKind::Continuous { .. } => format!("{}", grid.axis(axis).coord(idx)),
        AxisKind::Discrete { labels } => labels[idx].clone(),
    }
}

pub fn write_field_csv(field: &ScalarField, mut out: impl Write) -> Result<()> {
    let grid = field.grid();
    let mut header: Vec<String> = grid.axes().iter().map(|a| a.name.clone()).collect();
    header.push("value".into());
    writeln!(out, "{}", header.join(",")).map_err(io_err)?;
    for cell in 0..grid.cell_count() {
        let idx = grid.unravel(cell);
        let mut row: Vec<String> = idx
            .iter()
            .enumerate()
            .map(|(a, &i)| cell_label(grid, a, i))
            .collect();
        row.push(format!("{}", field.values()[cell]));
        writeln!(out, "{}", row.join(",")).map_err(io_err)?;
    }
    Ok(())
}

/// Read a field written by [`write_field_csv`] back onto the given grid.
/// Rows must appear in cell order with matching coordinates.
pub fn read_field_csv(grid: &Arc<Grid>, input: impl BufRead) -> Result<ScalarField> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| CoreError::Integration("empty field file".into()))?
        .map_err(io_err)?;
    let names: Vec<&str> = header.split(',').collect();
    if names.len() != grid.axes().len() + 1 {
        return Err(CoreError::Integration(format!(
            "header has {} columns, expected {}",
            names.len(),
            grid.axes().len() + 1
        )));
    }
    for (a, axis) in grid.axes().iter().enumerate() {
        if names[a] != axis.name {
            return Err(CoreError::Integration(format!(
                "column {a} is `{}`, expected `{}`",
                names[a], axis.name
            )));
        }
    }
    let mut values = Vec::with_capacity(grid.cell_count());
    for (cell, line) in lines.enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        if cell >= grid.cell_count() {
            return Err(CoreError::Integration("more rows than grid cells".into()));
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() {
            return Err(CoreError::Integration(format!(
                "row {cell} has {} columns",
                fields.len()
            )));
        }
        let idx = grid.unravel(cell);
        for (a, &i) in idx.iter().enumerate() {
            match &grid.axis(a).kind {
                AxisKind::Continuous { .. } => {
                    let got: f64 = fields[a].parse().map_err(|_| {
                        CoreError::Integration(format!("row {cell}: bad coordinate"))
                    })?;
                    let want = grid.axis(a).coord(i);
                    let h = grid.axis(a).spacing().unwrap();
                    if (got - want).abs() > 1e-9 * h.max(1.0) {
                        return Err(CoreError::Integration(format!(
                            "row {cell}: coordinate {got} does not match the grid node {want}"
                        )));
                    }
                }
                AxisKind::Discrete { labels } => {
                    if fields[a] != labels[i] {
                        return Err(CoreError::Integration(format!(
                            "row {cell}: label `{}` does not match `{}`",
                            fields[a], labels[i]
                        )));
                    }
                }
            }
        }
        let v: f64 = fields[names.len() - 1]
            .parse()
            .map_err(|_| CoreError::Integration(format!("row {cell}: bad value")))?;
        values.push(v);
    }
    ScalarField::new(grid.clone(), values)
}

/// Columns: t, energy, norm, minP, then the configured observables.
pub fn write_trajectory_csv(log: &TrajectoryLog, mut out: impl Write) -> Result<()> {
    let mut header = vec![
        "t".to_string(),
        "energy".to_string(),
        "norm".to_string(),
        "minP".to_string(),
    ];
    header.extend(log.columns.iter().cloned());
    writeln!(out, "{}", header.join(",")).map_err(io_err)?;
    for row in &log.rows {
        let mut fields = vec![
            format!("{}", row.time),
            format!("{}", row.energy),
            format!("{}", row.norm),
            format!("{}", row.min_density),
        ];
        fields.extend(row.observables.iter().map(|v| format!("{v}")));
        writeln!(out, "{}", fields.join(",")).map_err(io_err)?;
    }
    Ok(())
}

/// Columns: one coordinate per quantum axis for the row index, the same for
/// the column index, then the real and imaginary parts.
pub fn write_density_matrix_csv(
    rho: &ConditionalDensityOperator,
    mut out: impl Write,
) -> Result<()> {
    let grid = &rho.basis_grid;
    let mut header = Vec::new();
    for a in grid.axes() {
        header.push(a.name.clone());
    }
    for a in grid.axes() {
        header.push(format!("{}_prime", a.name));
    }
    header.push("re".into());
    header.push("im".into());
    writeln!(out, "{}", header.join(",")).map_err(io_err)?;
    let d = rho.dim();
    for i in 0..d {
        let ii = grid.unravel(i);
        for j in 0..d {
            let jj = grid.unravel(j);
            let mut row = Vec::with_capacity(header.len());
            for (a, &idx) in ii.iter().enumerate() {
                row.push(cell_label(grid, a, idx));
            }
            for (a, &idx) in jj.iter().enumerate() {
                row.push(cell_label(grid, a, idx));
            }
            let z = rho.matrix[i * d + j];
            row.push(format!("{}", z.re));
            row.push(format!("{}", z.im));
            writeln!(out, "{}", row.join(",")).map_err(io_err)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axis::{AxisSpec, Boundary};

    #[test]
    fn field_csv_roundtrip() {
        let g = Grid::new(vec![
            AxisSpec::continuous("x", -1.0, 1.0, 9, Boundary::Clamped).unwrap(),
            AxisSpec::discrete("spin", &["+", "-"]).unwrap(),
        ])
        .unwrap();
        let f = ScalarField::from_fn(g.clone(), |c| c[0] * 2.0 + c[1]).unwrap();
        let mut buf = Vec::new();
        write_field_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,spin,value\n"));
        assert!(text.contains(",+,"));
        let back = read_field_csv(&g, std::io::BufReader::new(&buf[..])).unwrap();
        assert_eq!(back.values(), f.values());
    }

    #[test]
    fn read_rejects_mismatched_grid() {
        let g = Grid::new(vec![
            AxisSpec::continuous("x", -1.0, 1.0, 9, Boundary::Clamped).unwrap()
        ])
        .unwrap();
        let f = ScalarField::constant(g.clone(), 1.0);
        let mut buf = Vec::new();
        write_field_csv(&f, &mut buf).unwrap();
        let other = Grid::new(vec![
            AxisSpec::continuous("x", -2.0, 1.0, 9, Boundary::Clamped).unwrap()
        ])
        .unwrap();
        assert!(read_field_csv(&other, std::io::BufReader::new(&buf[..])).is_err());
    }
}
