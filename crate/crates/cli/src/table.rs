//! Reading back the CSV written by `construct`.

use std::path::Path;

use twolevel_core::construct::Grid;

#[derive(Debug)]
pub struct Table {
    pub grid: Grid,
    pub u: Vec<f64>,
    pub psi1: Vec<f64>,
    pub psi2: Vec<f64>,
}

pub fn read(path: &Path) -> Result<Table, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Table, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or("empty table")?
        .split(',')
        .map(str::trim)
        .collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| format!("missing column '{name}'"))
    };
    let (ix, iu, i1, i2) = (col("x")?, col("U")?, col("psi1")?, col("psi2")?);
    let mut cols: [Vec<f64>; 4] = Default::default();
    for (row, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(format!("row {}: {} fields, expected {}", row + 1, fields.len(), header.len()));
        }
        for (dst, &i) in cols.iter_mut().zip(&[ix, iu, i1, i2]) {
            let v: f64 = fields[i]
                .trim()
                .parse()
                .map_err(|_| format!("row {}: '{}' is not a number", row + 1, fields[i]))?;
            dst.push(v);
        }
    }
    let [x, u, psi1, psi2] = cols;
    let n = x.len();
    if n < 3 {
        return Err(format!("{n} rows is too few"));
    }
    let grid = Grid {
        a: x[0],
        b: x[n - 1],
        n,
    };
    let h = grid.h();
    if !(h > 0.0) {
        return Err("x column must increase".into());
    }
    if let Some(i) = (0..n).find(|&i| (x[i] - grid.x(i)).abs() > 1e-9 * h) {
        return Err(format!("x column is not uniformly spaced at row {}", i + 1));
    }
    Ok(Table { grid, u, psi1, psi2 })
}
