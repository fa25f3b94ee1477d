use std::io::{Read, Write};
use std::path::Path;

use num_traits::Zero;

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::C64;

/// Complex values tabulated on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    grid: Grid,
    values: Vec<C64>,
}

/// A function of time tabulated on a uniform grid.
pub type SampledFunction = Tabulated;

/// A spectrum tabulated on a uniform frequency grid.
pub type SampledSpectrum = Tabulated;

impl Tabulated {
    pub fn new(grid: Grid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}-node grid",
                values.len(),
                grid.count()
            )));
        }
        if let Some(k) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "non-finite sample at node {k}"
            )));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every grid node.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> C64) -> Result<Self> {
        Self::new(grid, grid.nodes().map(f).collect())
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![C64::zero(); grid.count()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, C64)> + '_ {
        self.grid.nodes().zip(self.values.iter().copied())
    }

    /// Piecewise-linear interpolant, zero outside the grid.
    pub fn linear(&self, t: f64) -> C64 {
        if !self.grid.contains(t) {
            return C64::zero();
        }
        let u = (t - self.grid.start()) / self.grid.step();
        let k = (u.floor() as usize).min(self.grid.count() - 2);
        let frac = u - k as f64;
        self.values[k] * (1.0 - frac) + self.values[k + 1] * frac
    }

    /// Four-point Lagrange interpolant, exact at the nodes and zero outside
    /// the grid. Grids with fewer than four nodes fall back to linear.
    pub fn cubic(&self, t: f64) -> C64 {
        let n = self.grid.count();
        if n < 4 {
            return self.linear(t);
        }
        if !self.grid.contains(t) {
            return C64::zero();
        }
        let u = (t - self.grid.start()) / self.grid.step();
        let nearest = u.round();
        if (u - nearest).abs() < 1e-12 {
            return self.values[(nearest as usize).min(n - 1)];
        }
        let k = (u.floor() as usize).min(n - 2);
        let base = k.saturating_sub(1).min(n - 4);
        let x = u - base as f64;
        let v = &self.values[base..base + 4];
        let l0 = -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0;
        let l1 = x * (x - 2.0) * (x - 3.0) / 2.0;
        let l2 = -x * (x - 1.0) * (x - 3.0) / 2.0;
        let l3 = x * (x - 1.0) * (x - 2.0) / 6.0;
        v[0] * l0 + v[1] * l1 + v[2] * l2 + v[3] * l3
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

/// Abscissa named in a table header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// `x`: time samples.
    Time,
    /// `y`: spectrum samples.
    Frequency,
}

/// Reads a `x,re,im` (or `y,re,im`) table. Rows must be increasing and
/// uniformly spaced within a relative tolerance of 1e-9.
pub fn read_csv(path: &Path) -> Result<Tabulated> {
    read_table(path).map(|(_, t)| t)
}

/// [`read_csv`] together with the abscissa named in the header.
pub fn read_table(path: &Path) -> Result<(Axis, Tabulated)> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(file).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub(crate) fn parse_csv<R: Read>(reader: R) -> Result<(Axis, Tabulated)> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .clone();
    let names: Vec<&str> = headers.iter().collect();
    if names.len() != 3 || !matches!(names[0], "x" | "y") || names[1] != "re" || names[2] != "im" {
        return Err(Error::Parse(format!(
            "expected header `x,re,im` or `y,re,im`, found `{}`",
            names.join(",")
        )));
    }
    let axis = if names[0] == "x" { Axis::Time } else { Axis::Frequency };
    let mut abscissa = Vec::new();
    let mut values = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let field = |i: usize| -> Result<f64> {
            let raw = record.get(i).unwrap_or("");
            raw.parse::<f64>().map_err(|_| {
                Error::Parse(format!("row {}: cannot parse `{raw}` as a number", line + 2))
            })
        };
        abscissa.push(field(0)?);
        values.push(C64::new(field(1)?, field(2)?));
    }
    if abscissa.len() < 2 {
        return Err(Error::Parse("a table needs at least two rows".into()));
    }
    let n = abscissa.len();
    let (start, stop) = (abscissa[0], abscissa[n - 1]);
    let grid = Grid::new(start, stop, n)?;
    for (k, x) in abscissa.iter().enumerate() {
        if (x - grid.node(k)).abs() > 1e-9 * grid.step() {
            return Err(Error::NonUniformGrid(format!(
                "row {} has abscissa {x}, expected {}",
                k + 2,
                grid.node(k)
            )));
        }
    }
    Ok((axis, Tabulated::new(grid, values)?))
}

/// Writes `name,re,im` rows using the shortest round-trip float format.
pub fn write_csv<W: Write>(out: &mut W, name: &str, table: &Tabulated) -> std::io::Result<()> {
    writeln!(out, "{name},re,im")?;
    for (x, v) in table.nodes() {
        writeln!(out, "{x:?},{:?},{:?}", v.re, v.im)?;
    }
    Ok(())
}
