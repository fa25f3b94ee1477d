use crate::error::{Error, Result};

/// Uniform grid with `count` nodes from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    start: f64,
    stop: f64,
    count: usize,
    step: f64,
}

impl Grid {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite()) || start >= stop {
            return Err(Error::InvalidRange(format!(
                "grid requires finite start < stop, got [{start}, {stop}]"
            )));
        }
        if count < 2 {
            return Err(Error::InvalidRange(format!(
                "grid requires at least 2 nodes, got {count}"
            )));
        }
        Ok(Self {
            start,
            stop,
            count,
            step: (stop - start) / (count - 1) as f64,
        })
    }

    /// Grid of the midpoints of `cells` equal cells partitioning `[a, b]`.
    pub fn cell_centered(a: f64, b: f64, cells: usize) -> Result<Self> {
        if cells < 2 {
            return Err(Error::InvalidRange(format!(
                "cell-centered grid requires at least 2 cells, got {cells}"
            )));
        }
        let h = (b - a) / cells as f64;
        Self::new(a + 0.5 * h, b - 0.5 * h, cells)
    }

    /// Lattice-aligned grid: same step as `self`, extended by whole multiples
    /// of `period` on both sides.
    pub(crate) fn extended(&self, period: f64, windows: usize) -> Result<Self> {
        let per_window = (period / self.step).round() as usize;
        let count = (self.count - 1) + 2 * windows * per_window + 1;
        let pad = windows as f64 * period;
        Self::new(self.start - pad, self.stop + pad, count)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn stop(&self) -> f64 {
        self.stop
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> f64 {
        self.stop - self.start
    }

    pub fn node(&self, k: usize) -> f64 {
        if k + 1 == self.count {
            self.stop
        } else {
            self.start + k as f64 * self.step
        }
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.count).map(move |k| self.node(k))
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.stop
    }

    /// Same node set within `rel_tol` of the step.
    pub fn matches(&self, other: &Grid, rel_tol: f64) -> bool {
        let tol = rel_tol * self.step.abs().max(other.step.abs());
        self.count == other.count
            && (self.start - other.start).abs() <= tol
            && (self.stop - other.stop).abs() <= tol
    }
}

/// Uniform grid with exact endpoints.
pub fn make_uniform_grid(start: f64, stop: f64, count: usize) -> Result<Grid> {
    Grid::new(start, stop, count)
}
