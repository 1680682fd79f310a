//! Uniform one-dimensional grids and piecewise-constant cell fields.
//!
//! Cell `i` of a grid covers `[x_left + i·dx, x_left + (i+1)·dx)`. A
//! [`CellField`] holds one cell average per cell and never contains NaN or
//! infinite values.

use crate::error::{Error, Result};

/// Default number of midpoint sub-samples per cell used by [`project`].
pub const DEFAULT_QUADRATURE_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_left: f64,
    x_right: f64,
    n_cells: usize,
    dx: f64,
}

impl Grid {
    pub fn new(x_left: f64, x_right: f64, n_cells: usize) -> Result<Self> {
        if !(x_left.is_finite() && x_right.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "non-finite domain [{x_left}, {x_right}]"
            )));
        }
        if x_left >= x_right {
            return Err(Error::InvalidGrid(format!(
                "empty domain: x_left = {x_left} is not below x_right = {x_right}"
            )));
        }
        if n_cells == 0 {
            return Err(Error::InvalidGrid("grid needs at least one cell".into()));
        }
        Ok(Self {
            x_left,
            x_right,
            n_cells,
            dx: (x_right - x_left) / n_cells as f64,
        })
    }

    /// The grid `[0, 1]` split into `2^k` cells.
    pub fn unit_dyadic(k: u32) -> Result<Self> {
        if k > 40 {
            return Err(Error::InvalidGrid(format!("exponent {k} too large")));
        }
        Self::new(0.0, 1.0, 1usize << k)
    }

    pub fn x_left(&self) -> f64 {
        self.x_left
    }

    pub fn x_right(&self) -> f64 {
        self.x_right
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn length(&self) -> f64 {
        self.x_right - self.x_left
    }

    /// Left and right edge of cell `i`.
    pub fn cell_bounds(&self, i: usize) -> (f64, f64) {
        (
            self.x_left + i as f64 * self.dx,
            self.x_left + (i + 1) as f64 * self.dx,
        )
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        self.x_left + (i as f64 + 0.5) * self.dx
    }

    pub fn midpoints(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_cells).map(|i| self.midpoint(i))
    }

    /// Grid over the same domain with `n_cells / factor` cells.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.n_cells.is_multiple_of(factor) {
            return Err(Error::IncompatibleGrids(format!(
                "{} cells cannot be coarsened by a factor of {factor}",
                self.n_cells
            )));
        }
        Self::new(self.x_left, self.x_right, self.n_cells / factor)
    }

    /// Same domain as `other` (bitwise equal endpoints).
    pub fn same_domain(&self, other: &Grid) -> bool {
        self.x_left == other.x_left && self.x_right == other.x_right
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    grid: Grid,
    values: Vec<f64>,
}

impl CellField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values but the grid has {} cells",
                values.len(),
                grid.n_cells()
            )));
        }
        if let Some(cell) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "cell field construction",
                cell,
            });
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Grid, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.n_cells()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Smallest and largest cell value.
    pub fn range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// `dx · Σ v_i`, the integral of the piecewise-constant function.
    pub fn mass(&self) -> f64 {
        self.grid.dx() * self.values.iter().sum::<f64>()
    }
}

/// Cell averages of `f` by composite midpoint quadrature with
/// `points_per_cell` equally spaced sub-points per cell.
pub fn project<F>(f: F, grid: &Grid, points_per_cell: usize) -> Result<CellField>
where
    F: Fn(f64) -> f64,
{
    if points_per_cell == 0 {
        return Err(Error::InvalidArgument(
            "quadrature needs at least one point per cell".into(),
        ));
    }
    let q = points_per_cell as f64;
    let mut values = Vec::with_capacity(grid.n_cells());
    for i in 0..grid.n_cells() {
        let (left, _) = grid.cell_bounds(i);
        let mut sum = 0.0;
        for p in 0..points_per_cell {
            let x = left + (p as f64 + 0.5) / q * grid.dx();
            let y = f(x);
            if !y.is_finite() {
                return Err(Error::NonFinite {
                    context: "projection of initial function",
                    cell: i,
                });
            }
            sum += y;
        }
        values.push(sum / q);
    }
    CellField::new(*grid, values)
}

/// Fine-to-coarse restriction: each coarse value is the mean of its
/// `factor` fine children.
pub fn restrict(fine: &CellField, factor: usize) -> Result<CellField> {
    let coarse_grid = fine.grid().coarsen(factor)?;
    if factor == 1 {
        return Ok(fine.clone());
    }
    let inv = 1.0 / factor as f64;
    let values = fine
        .values()
        .chunks_exact(factor)
        .map(|chunk| chunk.iter().sum::<f64>() * inv)
        .collect();
    CellField::new(coarse_grid, values)
}

/// Fine-to-coarse sampling that keeps the left-most child of every coarse
/// cell instead of averaging.
pub fn subsample(fine: &CellField, factor: usize) -> Result<CellField> {
    let coarse_grid = fine.grid().coarsen(factor)?;
    let values = fine.values().iter().step_by(factor).copied().collect();
    CellField::new(coarse_grid, values)
}
