//! Periodic Cartesian mesh shared by the primal and the dual grid.
//!
//! Every staggered field is a dense array of `nx * ny` values. The entry at
//! storage index `(i, j)` belongs to the element "owned" by primal cell
//! `(i, j)`:
//!
//! | element                 | position                          |
//! |-------------------------|-----------------------------------|
//! | primal cell / dual vertex | `(x0 + i hx, y0 + j hy)`        |
//! | primal vertex / dual cell | `(x0 + (i+½) hx, y0 + (j+½) hy)` |
//! | primal x-edge / dual y-edge | `(x0 + i hx, y0 + (j+½) hy)`  |
//! | primal y-edge / dual x-edge | `(x0 + (i+½) hx, y0 + j hy)`  |
//!
//! so the primal x-edge stored at `(i, j)` is the top edge of cell `(i, j)`,
//! the primal y-edge is its right edge and the primal vertex is its upper
//! right corner. Arrays are laid out with `i` running fastest.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub hx: f64,
    pub hy: f64,
    pub x0: f64,
    pub y0: f64,
}

/// Periodic fold of `i` into `[0, n)`.
#[inline]
pub fn wrap(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

impl Grid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64, x0: f64, y0: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 cells per direction, got {nx}x{ny}"
            )));
        }
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "domain lengths must be positive, got lx={lx}, ly={ly}"
            )));
        }
        if !(x0.is_finite() && y0.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(Grid {
            nx,
            ny,
            lx,
            ly,
            hx: lx / nx as f64,
            hy: ly / ny as f64,
            x0,
            y0,
        })
    }

    /// Number of entries of every staggered array.
    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Storage index of the (already wrapped) pair `(i, j)`.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Storage index of `(i + di, j + dj)` with periodic wrap.
    #[inline]
    pub fn at(&self, i: usize, j: usize, di: isize, dj: isize) -> usize {
        let ii = wrap(i as isize + di, self.nx);
        let jj = wrap(j as isize + dj, self.ny);
        jj * self.nx + ii
    }

    #[inline]
    pub fn wrap_x(&self, i: isize) -> usize {
        wrap(i, self.nx)
    }

    #[inline]
    pub fn wrap_y(&self, j: isize) -> usize {
        wrap(j, self.ny)
    }

    /// Inverse of [`Grid::idx`].
    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    /// `x_i`, the x-coordinate of cell centres (integer labels).
    #[inline]
    pub fn x(&self, i: isize) -> f64 {
        self.x0 + i as f64 * self.hx
    }

    #[inline]
    pub fn y(&self, j: isize) -> f64 {
        self.y0 + j as f64 * self.hy
    }

    /// `x_{i+1/2}`, the x-coordinate of vertices (half-integer labels).
    #[inline]
    pub fn x_half(&self, i: isize) -> f64 {
        self.x0 + (i as f64 + 0.5) * self.hx
    }

    #[inline]
    pub fn y_half(&self, j: isize) -> f64 {
        self.y0 + (j as f64 + 0.5) * self.hy
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    /// Cell volume `hx * hy`, the weight of every pairing summand.
    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.hx * self.hy
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self.nx == other.nx
            && self.ny == other.ny
            && self.lx == other.lx
            && self.ly == other.ly
            && self.x0 == other.x0
            && self.y0 == other.y0
        {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len == self.len() {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected: self.len(),
                found: len,
            })
        }
    }

    /// Samples `f` at every storage index using the given coordinate maps.
    pub(crate) fn sample(
        &self,
        xs: impl Fn(isize) -> f64,
        ys: impl Fn(isize) -> f64,
        f: impl Fn(f64, f64) -> f64,
    ) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.ny as isize {
            for i in 0..self.nx as isize {
                out.push(f(xs(i), ys(j)));
            }
        }
        out
    }

    /// Samples at primal vertices (dual cells).
    pub fn sample_vertices(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.sample(|i| self.x_half(i), |j| self.y_half(j), f)
    }

    /// Samples at primal cell centres (dual vertices).
    pub fn sample_cells(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.sample(|i| self.x(i), |j| self.y(j), f)
    }

    /// Samples at the midpoints of primal x-edges.
    pub fn sample_x_edges(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.sample(|i| self.x(i), |j| self.y_half(j), f)
    }

    /// Samples at the midpoints of primal y-edges.
    pub fn sample_y_edges(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.sample(|i| self.x_half(i), |j| self.y(j), f)
    }
}
