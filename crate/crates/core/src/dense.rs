//! Dense finite-difference matrices for small-instance verification.
//!
//! Matrices are assembled node by node from the stencil, so they are an
//! independent route to the FFT solvers and the tensor-product helpers.
//! Every system is scaled by `h_ref^2`:
//!
//! ```text
//! A = sum_j c_j (W .. T_j .. W) - k^2 h_ref^2 W,   c_j = (h_ref / h_j)^2
//! ```
//!
//! where `T_j` is the 1D second difference (diagonal 1 at a Neumann node) and
//! `W` carries a factor 1/2 per Neumann face a node lies on. With all axes
//! Dirichlet this is the classical `A^D`; a 1D Dirichlet/Neumann axis gives the
//! `(1 - k^2 h^2 / 2)` corner entry of the one-sided Neumann system.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{unravel, AxisBc, Boundary, Field, Grid};

pub const DEFAULT_DENSE_CAP: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DenseVariant {
    /// `A^D` on an all-Dirichlet grid.
    Dirichlet,
    /// `A^P` on the odd-extended periodic grid, `N_j = 2 n_j + 2`.
    Periodic,
    /// Ghost-point system on the even-extended grid (Neumann ends reflected,
    /// before the odd step).
    NeumannExtended,
    /// The symmetric system on the grid's own unknowns for any BC mix; with
    /// every face Neumann this is the full boundary-unknown matrix whose
    /// interior/boundary blocks define the DtN map.
    Mixed,
}

#[derive(Clone, Copy, Debug)]
pub enum WaveNumber<'a> {
    Constant(f64),
    Variable(&'a Field),
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Axis1d {
    Bounded {
        len: usize,
        lo_neumann: bool,
        hi_neumann: bool,
    },
    Periodic {
        len: usize,
    },
}

impl Axis1d {
    fn len(&self) -> usize {
        match *self {
            Axis1d::Bounded { len, .. } | Axis1d::Periodic { len } => len,
        }
    }

    fn bounded(len: usize, bc: AxisBc) -> Self {
        Axis1d::Bounded {
            len,
            lo_neumann: bc.lo == Boundary::Neumann,
            hi_neumann: bc.hi == Boundary::Neumann,
        }
    }

    fn is_neumann_node(&self, i: usize) -> bool {
        match *self {
            Axis1d::Bounded {
                len,
                lo_neumann,
                hi_neumann,
            } => (i == 0 && lo_neumann) || (i + 1 == len && hi_neumann),
            Axis1d::Periodic { .. } => false,
        }
    }

    fn weight(&self, i: usize) -> f64 {
        if self.is_neumann_node(i) {
            0.5
        } else {
            1.0
        }
    }

    /// `(column, value)` entries of the 1D second-difference row `i`.
    fn row(&self, i: usize) -> Vec<(usize, f64)> {
        match *self {
            Axis1d::Periodic { len } => {
                if len == 1 {
                    return vec![(0, 0.0)];
                }
                if len == 2 {
                    return vec![(i, 2.0), (1 - i, -2.0)];
                }
                vec![(i, 2.0), ((i + 1) % len, -1.0), ((i + len - 1) % len, -1.0)]
            }
            Axis1d::Bounded { len, .. } => {
                let mut row = vec![(i, if self.is_neumann_node(i) { 1.0 } else { 2.0 })];
                if i > 0 {
                    row.push((i - 1, -1.0));
                }
                if i + 1 < len {
                    row.push((i + 1, -1.0));
                }
                row
            }
        }
    }
}

pub fn assemble_dense(grid: &Grid, k: WaveNumber<'_>, variant: DenseVariant) -> Result<DMatrix<Complex64>> {
    assemble_dense_with_cap(grid, k, variant, DEFAULT_DENSE_CAP)
}

pub fn assemble_dense_with_cap(
    grid: &Grid,
    k: WaveNumber<'_>,
    variant: DenseVariant,
    cap: usize,
) -> Result<DMatrix<Complex64>> {
    let dim = grid.dim();
    let axes: Vec<Axis1d> = (0..dim)
        .map(|a| {
            let n = grid.n_per_axis()[a];
            let bc = grid.bc(a);
            match variant {
                DenseVariant::Dirichlet | DenseVariant::Mixed => Axis1d::bounded(grid.axis_len(a), bc),
                DenseVariant::Periodic => Axis1d::Periodic { len: 2 * n + 2 },
                DenseVariant::NeumannExtended => match (bc.lo, bc.hi) {
                    (Boundary::Dirichlet, Boundary::Dirichlet) => Axis1d::bounded(n, bc),
                    (Boundary::Neumann, Boundary::Neumann) => Axis1d::Periodic { len: 2 * n + 2 },
                    _ => Axis1d::bounded(2 * n + 1, AxisBc::DIRICHLET),
                },
            }
        })
        .collect();
    if variant == DenseVariant::Dirichlet && !grid.is_all(AxisBc::DIRICHLET) {
        return Err(Error::BoundaryMismatch(
            "Dirichlet assembly on a grid with Neumann faces".into(),
        ));
    }
    let shape: Vec<usize> = axes.iter().map(Axis1d::len).collect();
    let size: usize = shape.iter().product();
    if size > cap {
        return Err(Error::DenseCapExceeded { size, cap });
    }
    let shift: Vec<Complex64> = match k {
        WaveNumber::Constant(k) => vec![Complex64::new(k * k, 0.0); size],
        WaveNumber::Variable(field) => {
            if field.grid().shape() != shape {
                return Err(Error::ShapeMismatch {
                    expected: size,
                    got: field.len(),
                });
            }
            field.values().iter().map(|v| v * v).collect()
        }
    };
    let h2 = grid.h_ref() * grid.h_ref();
    let weights: Vec<f64> = (0..dim).map(|a| grid.axis_weight(a)).collect();
    let strides = crate::grid::strides(&shape);

    let mut m = DMatrix::<Complex64>::zeros(size, size);
    let mut idx = vec![0; dim];
    for row in 0..size {
        unravel(row, &shape, &mut idx);
        let node_w: Vec<f64> = (0..dim).map(|a| axes[a].weight(idx[a])).collect();
        let total_w: f64 = node_w.iter().product();
        for a in 0..dim {
            let others: f64 = (0..dim).filter(|&b| b != a).map(|b| node_w[b]).product();
            for (col_a, v) in axes[a].row(idx[a]) {
                let col = row + col_a * strides[a] - idx[a] * strides[a];
                m[(row, col)] += Complex64::new(weights[a] * others * v, 0.0);
            }
        }
        m[(row, row)] -= shift[row] * (h2 * total_w);
    }
    Ok(m)
}

/// Kronecker product of dense matrices.
pub fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

pub fn dense_solve(m: &DMatrix<Complex64>, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    if m.nrows() != rhs.len() || m.ncols() != rhs.len() {
        return Err(Error::ShapeMismatch {
            expected: m.nrows(),
            got: rhs.len(),
        });
    }
    let b = nalgebra::DVector::from_column_slice(rhs);
    m.clone()
        .lu()
        .solve(&b)
        .map(|x| x.as_slice().to_vec())
        .ok_or(Error::SingularDense)
}

pub fn dense_apply(m: &DMatrix<Complex64>, x: &[Complex64]) -> Vec<Complex64> {
    let v = nalgebra::DVector::from_column_slice(x);
    (m * v).as_slice().to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(m: &DMatrix<Complex64>) -> DMatrix<f64> {
        m.map(|v| v.re)
    }

    #[test]
    fn dirichlet_1d_is_tridiagonal() {
        let g = Grid::dirichlet(&[3]).unwrap();
        let m = re(&assemble_dense(&g, WaveNumber::Constant(0.0), DenseVariant::Dirichlet).unwrap());
        let want = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        assert_eq!(m, want);
    }

    #[test]
    fn periodic_1d_is_circulant() {
        let g = Grid::dirichlet(&[2]).unwrap();
        let m = re(&assemble_dense(&g, WaveNumber::Constant(0.0), DenseVariant::Periodic).unwrap());
        assert_eq!(m.nrows(), 6);
        let first: Vec<f64> = m.row(0).iter().copied().collect();
        assert_eq!(first, vec![2.0, -1.0, 0.0, 0.0, 0.0, -1.0]);
        for i in 1..6 {
            for j in 0..6 {
                assert_eq!(m[(i, j)], m[(0, (j + 6 - i) % 6)]);
            }
        }
    }

    #[test]
    fn one_sided_neumann_row() {
        let n = 3;
        let k = 1.7;
        let g = Grid::new(&[n], &[AxisBc::new(Boundary::Dirichlet, Boundary::Neumann)]).unwrap();
        let h = g.h_ref();
        let m = re(&assemble_dense(&g, WaveNumber::Constant(k), DenseVariant::Mixed).unwrap());
        assert_eq!(m.nrows(), n + 1);
        let kh2 = k * k * h * h;
        assert!((m[(n, n)] - (1.0 - 0.5 * kh2)).abs() < 1e-15);
        assert_eq!(m[(n, n - 1)], -1.0);
        assert!((m[(0, 0)] - (2.0 - kh2)).abs() < 1e-15);
    }

    #[test]
    fn mixed_matrix_is_symmetric() {
        let g = Grid::new(
            &[3, 4],
            &[AxisBc::NEUMANN, AxisBc::new(Boundary::Neumann, Boundary::Dirichlet)],
        )
        .unwrap();
        let m = assemble_dense(&g, WaveNumber::Constant(0.9), DenseVariant::Mixed).unwrap();
        assert!((&m - m.transpose()).norm() < 1e-14);
    }

    #[test]
    fn cap_is_enforced() {
        let g = Grid::dirichlet(&[30, 30]).unwrap();
        assert_eq!(
            assemble_dense_with_cap(&g, WaveNumber::Constant(0.0), DenseVariant::Dirichlet, 100),
            Err(Error::DenseCapExceeded { size: 900, cap: 100 })
        );
    }
}
