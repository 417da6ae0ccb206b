//! Uniform cell-centered radial grids and centered difference stencils.
//!
//! All fields in this crate live on cell centers r_i = (i + 1/2) h,
//! h = r_max / cells, so the coordinate origin r = 0 is a cell face and never
//! a sample point. Radial profiles of smooth rotationally symmetric functions
//! extend evenly across r = 0, which makes the mirror ghost value
//! g(-h/2) = g(h/2) second-order exact at the innermost cell. At the outer
//! face we extrapolate the ghost quadratically, which keeps polynomial test
//! fields exact; derived quantities are only trusted a couple of cells inside
//! the boundary (see `interior_range`).

use crate::error::{PmeError, Result};

/// Uniform cell-centered grid on [0, r_max].
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    r_max: f64,
    cells: usize,
    h: f64,
}

impl RadialGrid {
    /// A grid with `cells` uniform cells on [0, r_max]. Needs at least 3
    /// cells so a centered stencil exists somewhere.
    pub fn new(r_max: f64, cells: usize) -> Result<Self> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(PmeError::InvalidConfig(format!(
                "r_max must be positive and finite, got {r_max}"
            )));
        }
        if cells < 3 {
            return Err(PmeError::GridTooCoarse { cells, min: 3 });
        }
        Ok(Self { r_max, cells, h: r_max / cells as f64 })
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Grid spacing h = r_max / cells.
    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Cell center r_i = (i + 1/2) h.
    pub fn node(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h
    }

    /// Radius of the face between cells i-1 and i (face 0 is the origin).
    pub fn face(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    /// All cell centers, innermost first.
    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.cells).map(move |i| self.node(i))
    }

    /// Evaluate `f(r)` at every cell center.
    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes().map(f).collect()
    }

    /// Index range `offset` cells away from both ends; the window where
    /// stencil-derived fields are trusted.
    pub fn interior_range(&self, offset: usize) -> std::ops::Range<usize> {
        let lo = offset.min(self.cells);
        let hi = self.cells.saturating_sub(offset).max(lo);
        lo..hi
    }

    /// A grid with the same extent and `factor` times as many cells.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            r_max: self.r_max,
            cells: self.cells * factor,
            h: self.r_max / (self.cells * factor) as f64,
        }
    }

    fn check_len(&self, g: &[f64]) -> Result<()> {
        if g.len() != self.cells {
            return Err(PmeError::InvalidConfig(format!(
                "field length {} does not match grid with {} cells",
                g.len(),
                self.cells
            )));
        }
        Ok(())
    }

    /// Ghost value mirrored across the origin face: the mirror image of cell 0.
    fn ghost_inner(g: &[f64]) -> f64 {
        g[0]
    }

    /// Ghost value beyond the outer face by quadratic extrapolation.
    fn ghost_outer(g: &[f64]) -> f64 {
        let n = g.len();
        3.0 * g[n - 1] - 3.0 * g[n - 2] + g[n - 3]
    }

    /// Centered first derivative of a cell-centered field.
    pub fn deriv1(&self, g: &[f64]) -> Result<Vec<f64>> {
        self.check_len(g)?;
        let n = self.cells;
        let two_h = 2.0 * self.h;
        let mut out = vec![0.0; n];
        out[0] = (g[1] - Self::ghost_inner(g)) / two_h;
        for i in 1..n - 1 {
            out[i] = (g[i + 1] - g[i - 1]) / two_h;
        }
        out[n - 1] = (Self::ghost_outer(g) - g[n - 2]) / two_h;
        Ok(out)
    }

    /// Centered second derivative of a cell-centered field.
    pub fn deriv2(&self, g: &[f64]) -> Result<Vec<f64>> {
        self.check_len(g)?;
        let n = self.cells;
        let h2 = self.h * self.h;
        let mut out = vec![0.0; n];
        out[0] = (g[1] - 2.0 * g[0] + Self::ghost_inner(g)) / h2;
        for i in 1..n - 1 {
            out[i] = (g[i + 1] - 2.0 * g[i] + g[i - 1]) / h2;
        }
        out[n - 1] = (Self::ghost_outer(g) - 2.0 * g[n - 1] + g[n - 2]) / h2;
        Ok(out)
    }
}
