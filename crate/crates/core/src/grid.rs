//! Uniform periodic one-dimensional meshes.

use crate::error::{Error, Result};

/// Smallest mesh that fits the five-cell reconstruction stencil.
pub const MIN_CELLS: usize = 5;

/// Uniform periodic mesh of `n_cells` cells on `[x_left, x_right)`.
///
/// Interface `k` is the point `x_{k+1/2}` between cell `k` and cell `k + 1`
/// (modulo `n_cells`). Every per-interface array in this crate uses that
/// numbering.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    n_cells: usize,
    x_left: f64,
    x_right: f64,
    dx: f64,
    cell_centers: Vec<f64>,
}

impl Grid1D {
    pub fn new(n_cells: usize, domain: (f64, f64)) -> Result<Self> {
        let (x_left, x_right) = domain;
        if n_cells < MIN_CELLS {
            return Err(Error::Config(format!(
                "mesh needs at least {MIN_CELLS} cells for the reconstruction stencil, got {n_cells}"
            )));
        }
        if !(x_left.is_finite() && x_right.is_finite() && x_left < x_right) {
            return Err(Error::Config(format!(
                "degenerate domain ({x_left}, {x_right})"
            )));
        }
        let dx = (x_right - x_left) / n_cells as f64;
        let cell_centers = (0..n_cells)
            .map(|i| x_left + (i as f64 + 0.5) * dx)
            .collect();
        Ok(Self {
            n_cells,
            x_left,
            x_right,
            dx,
            cell_centers,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x_left, self.x_right)
    }

    pub fn length(&self) -> f64 {
        self.x_right - self.x_left
    }

    pub fn cell_centers(&self) -> &[f64] {
        &self.cell_centers
    }

    /// Left and right endpoints of cell `i`.
    pub fn cell_edges(&self, i: usize) -> (f64, f64) {
        let a = self.x_left + i as f64 * self.dx;
        (a, a + self.dx)
    }

    /// Position of interface `k` (`x_{k+1/2}`).
    pub fn interface(&self, k: usize) -> f64 {
        self.x_left + (k as f64 + 1.0) * self.dx
    }

    /// Periodic index `i + offset`.
    #[inline]
    pub fn wrap(&self, i: usize, offset: isize) -> usize {
        wrap(self.n_cells, i, offset)
    }
}

#[inline]
pub(crate) fn wrap(n: usize, i: usize, offset: isize) -> usize {
    (i as isize + offset).rem_euclid(n as isize) as usize
}

/// Periodic flux difference `H_{i+1/2} - H_{i-1/2}` for every cell.
pub(crate) fn flux_difference(flux: &[f64]) -> impl Iterator<Item = f64> + '_ {
    let n = flux.len();
    (0..n).map(move |i| flux[i] - flux[(i + n - 1) % n])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_meshes() {
        assert!(matches!(Grid1D::new(4, (0.0, 1.0)), Err(Error::Config(_))));
        assert!(Grid1D::new(5, (0.0, 1.0)).is_ok());
    }

    #[test]
    fn rejects_degenerate_domain() {
        assert!(Grid1D::new(10, (1.0, 1.0)).is_err());
        assert!(Grid1D::new(10, (1.0, 0.0)).is_err());
    }

    #[test]
    fn spacing_and_centers() {
        let g = Grid1D::new(100, (0.0, 1.0)).unwrap();
        assert!((g.dx() - 0.01).abs() < 1e-15);
        assert!((g.cell_centers()[0] - 0.005).abs() < 1e-15);
        assert!((g.interface(99) - 1.0).abs() < 1e-14);

        let two_pi = 2.0 * std::f64::consts::PI;
        let g = Grid1D::new(25, (0.0, two_pi)).unwrap();
        assert!((g.dx() - two_pi / 25.0).abs() < 1e-15);
    }

    #[test]
    fn periodic_neighbors() {
        let g = Grid1D::new(8, (0.0, 1.0)).unwrap();
        assert_eq!(g.wrap(0, -1), 7);
        assert_eq!(g.wrap(7, 1), 0);
        assert_eq!(g.wrap(1, -3), 6);
    }
}
