//! Box grids and the complex fields that live on them.
//!
//! A grid covers the box `(0, L_0) x ... x (0, L_{d-1})` with `n + 2` nodes per
//! axis (indices `0..=n+1`). Dirichlet ends are eliminated, Neumann ends carry
//! an unknown, so an axis holds `n`, `n + 1` or `n + 2` unknowns.
//! Storage is row-major with the last axis fastest.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Boundary {
    Dirichlet,
    Neumann,
}

/// Boundary tags at the low and high end of one axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AxisBc {
    pub lo: Boundary,
    pub hi: Boundary,
}

impl AxisBc {
    pub const DIRICHLET: AxisBc = AxisBc {
        lo: Boundary::Dirichlet,
        hi: Boundary::Dirichlet,
    };
    pub const NEUMANN: AxisBc = AxisBc {
        lo: Boundary::Neumann,
        hi: Boundary::Neumann,
    };

    pub fn new(lo: Boundary, hi: Boundary) -> Self {
        Self { lo, hi }
    }

    pub fn neumann_ends(&self) -> usize {
        usize::from(self.lo == Boundary::Neumann) + usize::from(self.hi == Boundary::Neumann)
    }

    /// Short tag such as `DN` (Dirichlet low, Neumann high).
    pub fn tag(&self) -> &'static str {
        match (self.lo, self.hi) {
            (Boundary::Dirichlet, Boundary::Dirichlet) => "DD",
            (Boundary::Dirichlet, Boundary::Neumann) => "DN",
            (Boundary::Neumann, Boundary::Dirichlet) => "ND",
            (Boundary::Neumann, Boundary::Neumann) => "NN",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: Vec<usize>,
    h: Vec<f64>,
    bc: Vec<AxisBc>,
}

impl Grid {
    /// Unit box with `h = 1/(n+1)` on every axis.
    pub fn new(n_per_axis: &[usize], bc: &[AxisBc]) -> Result<Self> {
        let h: Vec<f64> = n_per_axis.iter().map(|&n| 1.0 / (n as f64 + 1.0)).collect();
        Self::with_spacing(n_per_axis, &h, bc)
    }

    pub fn with_spacing(n_per_axis: &[usize], h_per_axis: &[f64], bc: &[AxisBc]) -> Result<Self> {
        let dim = n_per_axis.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..={MAX_DIM}")));
        }
        if h_per_axis.len() != dim || bc.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "{dim} axes but {} spacings and {} boundary pairs",
                h_per_axis.len(),
                bc.len()
            )));
        }
        if let Some(axis) = n_per_axis.iter().position(|&n| n == 0) {
            return Err(Error::InvalidGrid(format!("axis {axis} has no interior points")));
        }
        if let Some(axis) = h_per_axis.iter().position(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidGrid(format!("axis {axis} has non-positive spacing")));
        }
        Ok(Self {
            n: n_per_axis.to_vec(),
            h: h_per_axis.to_vec(),
            bc: bc.to_vec(),
        })
    }

    pub fn dirichlet(n_per_axis: &[usize]) -> Result<Self> {
        Self::new(n_per_axis, &vec![AxisBc::DIRICHLET; n_per_axis.len()])
    }

    /// All faces Neumann: every node, boundary included, is an unknown.
    pub fn neumann(n_per_axis: &[usize]) -> Result<Self> {
        Self::new(n_per_axis, &vec![AxisBc::NEUMANN; n_per_axis.len()])
    }

    /// Square/cubic unit box with the same `n` and BC pair on every axis.
    pub fn cube(dim: usize, n: usize, bc: AxisBc) -> Result<Self> {
        Self::new(&vec![n; dim], &vec![bc; dim])
    }

    pub fn dim(&self) -> usize {
        self.n.len()
    }

    pub fn n_per_axis(&self) -> &[usize] {
        &self.n
    }

    pub fn h_per_axis(&self) -> &[f64] {
        &self.h
    }

    pub fn bc_per_axis(&self) -> &[AxisBc] {
        &self.bc
    }

    pub fn bc(&self, axis: usize) -> AxisBc {
        self.bc[axis]
    }

    /// Spacing the linear system is scaled with (`h^2` multiplies the load).
    pub fn h_ref(&self) -> f64 {
        self.h[0]
    }

    /// Unknowns along one axis.
    pub fn axis_len(&self, axis: usize) -> usize {
        self.n[axis] + self.bc[axis].neumann_ends()
    }

    pub fn shape(&self) -> Vec<usize> {
        (0..self.dim()).map(|a| self.axis_len(a)).collect()
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node index (in `0..=n+1`) of the first unknown on an axis.
    pub fn first_node(&self, axis: usize) -> usize {
        usize::from(self.bc[axis].lo == Boundary::Dirichlet)
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        (i + self.first_node(axis)) as f64 * self.h[axis]
    }

    pub fn is_all(&self, bc: AxisBc) -> bool {
        self.bc.iter().all(|&b| b == bc)
    }

    /// Same sizes and spacings with a different BC set.
    pub fn with_bc(&self, bc: &[AxisBc]) -> Result<Self> {
        Self::with_spacing(&self.n, &self.h, bc)
    }

    /// Coefficient of the second difference along `axis` once the system is
    /// scaled by `h_ref^2`.
    pub fn axis_weight(&self, axis: usize) -> f64 {
        let r = self.h_ref() / self.h[axis];
        r * r
    }
}

/// Row-major strides for a shape.
pub fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for a in (0..shape.len().saturating_sub(1)).rev() {
        s[a] = s[a + 1] * shape[a + 1];
    }
    s
}

/// Decompose a flat index into a multi-index.
pub fn unravel(mut flat: usize, shape: &[usize], out: &mut [usize]) {
    for a in (0..shape.len()).rev() {
        out[a] = flat % shape[a];
        flat /= shape[a];
    }
}

/// Advance a row-major multi-index by one; the last axis moves fastest.
pub fn step_index(idx: &mut [usize], shape: &[usize]) {
    for a in (0..shape.len()).rev() {
        idx[a] += 1;
        if idx[a] < shape[a] {
            return;
        }
        idx[a] = 0;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(grid: Grid) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); grid.len()];
        Self { grid, values }
    }

    /// Sample a function of the node coordinates.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        let shape = grid.shape();
        let mut idx = vec![0; shape.len()];
        let mut x = vec![0.0; shape.len()];
        let values = (0..grid.len())
            .map(|flat| {
                unravel(flat, &shape, &mut idx);
                for (a, xa) in x.iter_mut().enumerate() {
                    *xa = grid.coordinate(a, idx[a]);
                }
                f(&x)
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.values)
    }
}

pub fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// `||a - b|| / ||b||`, or the absolute difference when `b` vanishes.
pub fn relative_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let scale = norm(b);
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}
