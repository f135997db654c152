//! Matrix-free operators: the discrete Dirichlet-to-Neumann map `S_h`, its
//! inverse the Neumann-to-Dirichlet map `T_h`, variable wave number
//! Helmholtz application and the FFT-preconditioned composite.
//!
//! Both boundary maps are built on the all-Neumann grid where every node,
//! boundary included, is an unknown of the symmetric system `A` (see
//! [`crate::dense`]). With `I` the interior and `B` the boundary nodes,
//!
//! ```text
//! S_h = A_BB - A_BI A_II^{-1} A_IB,     T_h mu = [0 I] A^{-1} [0; mu]
//! ```
//!
//! `A_II` is the Dirichlet operator, so `S_h` costs one Dirichlet FFT solve
//! and `T_h` one all-Neumann FFT solve.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dense::{assemble_dense, dense_solve, DenseVariant, WaveNumber};
use crate::error::{Error, Result};
use crate::grid::{strides, unravel, AxisBc, Boundary, Field, Grid};
use crate::helmholtz::HelmholtzSolver;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub trait LinearOperator: Send + Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn tag(&self) -> &str;

    /// `y = Op x` without the shape check.
    fn apply_unchecked(&self, x: &[Complex64]) -> Result<Vec<Complex64>>;

    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.ncols() {
            return Err(Error::ShapeMismatch {
                expected: self.ncols(),
                got: x.len(),
            });
        }
        let y = self.apply_unchecked(x)?;
        if y.len() != self.nrows() {
            return Err(Error::ShapeMismatch {
                expected: self.nrows(),
                got: y.len(),
            });
        }
        Ok(y)
    }

    fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }
}

type ApplyFn = dyn Fn(&[Complex64]) -> Result<Vec<Complex64>> + Send + Sync;

/// Operator from a closure.
pub struct OperatorHandle {
    rows: usize,
    cols: usize,
    tag: String,
    apply: Box<ApplyFn>,
}

impl OperatorHandle {
    pub fn new(
        rows: usize,
        cols: usize,
        tag: impl Into<String>,
        apply: impl Fn(&[Complex64]) -> Result<Vec<Complex64>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            rows,
            cols,
            tag: tag.into(),
            apply: Box::new(apply),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(n, n, "identity", |x| Ok(x.to_vec()))
    }

    pub fn diagonal(diag: Vec<Complex64>) -> Self {
        let n = diag.len();
        Self::new(n, n, "diagonal", move |x| {
            Ok(x.iter().zip(&diag).map(|(a, d)| a * d).collect())
        })
    }

    pub fn from_dense(m: DMatrix<Complex64>) -> Self {
        let (r, c) = m.shape();
        Self::new(r, c, "dense", move |x| Ok(crate::dense::dense_apply(&m, x)))
    }
}

impl std::fmt::Debug for OperatorHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "OperatorHandle({} {}x{})", self.tag, self.rows, self.cols)
    }
}

impl LinearOperator for OperatorHandle {
    fn nrows(&self) -> usize {
        self.rows
    }
    fn ncols(&self) -> usize {
        self.cols
    }
    fn tag(&self) -> &str {
        &self.tag
    }
    fn apply_unchecked(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        (self.apply)(x)
    }
}

/// Matrix-free product with the symmetric system matrix of `grid` (same
/// matrix as `assemble_dense(.., DenseVariant::Mixed)`); `k2[p]` is `k^2`
/// at unknown `p`.
pub fn apply_stencil(grid: &Grid, k2: &dyn Fn(usize) -> Complex64, u: &[Complex64]) -> Result<Vec<Complex64>> {
    if u.len() != grid.len() {
        return Err(Error::ShapeMismatch {
            expected: grid.len(),
            got: u.len(),
        });
    }
    let dim = grid.dim();
    let shape = grid.shape();
    let st = strides(&shape);
    let weights: Vec<f64> = (0..dim).map(|a| grid.axis_weight(a)).collect();
    let h2 = grid.h_ref() * grid.h_ref();
    let lo_n: Vec<bool> = (0..dim).map(|a| grid.bc(a).lo == Boundary::Neumann).collect();
    let hi_n: Vec<bool> = (0..dim).map(|a| grid.bc(a).hi == Boundary::Neumann).collect();

    let mut out = vec![ZERO; u.len()];
    let mut idx = vec![0; dim];
    let mut node_w = [1.0; crate::grid::MAX_DIM];
    for (p, o) in out.iter_mut().enumerate() {
        unravel(p, &shape, &mut idx);
        for a in 0..dim {
            let at_lo = idx[a] == 0 && lo_n[a];
            let at_hi = idx[a] + 1 == shape[a] && hi_n[a];
            node_w[a] = if at_lo || at_hi { 0.5 } else { 1.0 };
        }
        let total_w: f64 = node_w[..dim].iter().product();
        let up = u[p];
        let mut acc = ZERO;
        for a in 0..dim {
            let mut line = ZERO;
            let has_lo = idx[a] > 0;
            let has_hi = idx[a] + 1 < shape[a];
            let neumann_node = node_w[a] < 1.0;
            line += up * if neumann_node { 1.0 } else { 2.0 };
            if has_lo {
                line -= u[p - st[a]];
            }
            if has_hi {
                line -= u[p + st[a]];
            }
            acc += line * (weights[a] * total_w / node_w[a]);
        }
        *o = acc - up * k2(p) * (h2 * total_w);
    }
    Ok(out)
}

/// Constant-k application of the grid's system matrix.
pub fn apply_helmholtz(grid: &Grid, k: f64, u: &[Complex64]) -> Result<Vec<Complex64>> {
    let k2 = Complex64::new(k * k, 0.0);
    apply_stencil(grid, &|_| k2, u)
}

/// `(sum_j c_j T_j - h^2 diag(k(x)^2)) u` on an all-Dirichlet grid.
pub fn apply_variable_helmholtz(u: &Field, k_field: &Field) -> Result<Field> {
    let grid = u.grid();
    if !grid.is_all(AxisBc::DIRICHLET) {
        return Err(Error::BoundaryMismatch(
            "variable-k application expects Dirichlet faces".into(),
        ));
    }
    if k_field.grid().shape() != grid.shape() {
        return Err(Error::ShapeMismatch {
            expected: grid.len(),
            got: k_field.len(),
        });
    }
    let kv = k_field.values();
    let out = apply_stencil(grid, &|p| kv[p] * kv[p], u.values())?;
    Field::new(grid.clone(), out)
}

/// Interior/boundary split of an all-Neumann grid.
///
/// Boundary ordering: faces in the order (axis 0 low, axis 0 high, axis 1
/// low, ...), row-major within a face; a node on several faces belongs to the
/// first of them.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockPartition {
    grid: Grid,
    interior: Vec<usize>,
    boundary: Vec<usize>,
}

/// Values over [`BlockPartition::boundary`], in that order.
pub type BoundaryVector = Vec<Complex64>;

impl BlockPartition {
    pub fn new(grid: &Grid) -> Result<Self> {
        if !grid.is_all(AxisBc::NEUMANN) {
            return Err(Error::BoundaryMismatch(
                "block partition needs an all-Neumann grid".into(),
            ));
        }
        let dim = grid.dim();
        let shape = grid.shape();
        let mut owned = vec![false; grid.len()];
        let mut boundary = Vec::new();
        let mut idx = vec![0; dim];
        for axis in 0..dim {
            for fixed in [0, shape[axis] - 1] {
                for (p, taken) in owned.iter_mut().enumerate() {
                    unravel(p, &shape, &mut idx);
                    if idx[axis] == fixed && !*taken {
                        *taken = true;
                        boundary.push(p);
                    }
                }
            }
        }
        let interior = (0..grid.len()).filter(|&p| !owned[p]).collect();
        Ok(Self {
            grid: grid.clone(),
            interior,
            boundary,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Interior node indices, row-major; they coincide with the unknowns of
    /// the Dirichlet grid with the same `n`.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn gather_boundary(&self, full: &[Complex64]) -> BoundaryVector {
        self.boundary.iter().map(|&p| full[p]).collect()
    }

    pub fn gather_interior(&self, full: &[Complex64]) -> Vec<Complex64> {
        self.interior.iter().map(|&p| full[p]).collect()
    }

    pub fn interior_grid(&self) -> Result<Grid> {
        Grid::with_spacing(
            self.grid.n_per_axis(),
            self.grid.h_per_axis(),
            &vec![AxisBc::DIRICHLET; self.grid.dim()],
        )
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::InvalidArgument(format!("eta {eta} must be finite and >= 0")));
    }
    Ok(())
}

/// Discrete Neumann-to-Dirichlet map `T_h` (one all-Neumann FFT solve per
/// application).
#[derive(Clone, Debug)]
pub struct NtdOperator {
    partition: BlockPartition,
    solver: HelmholtzSolver,
}

impl NtdOperator {
    pub fn new(partition: &BlockPartition, eta: f64) -> Result<Self> {
        check_eta(eta)?;
        Ok(Self {
            partition: partition.clone(),
            solver: HelmholtzSolver::new(partition.grid(), eta)?,
        })
    }
}

impl LinearOperator for NtdOperator {
    fn nrows(&self) -> usize {
        self.partition.boundary.len()
    }
    fn ncols(&self) -> usize {
        self.partition.boundary.len()
    }
    fn tag(&self) -> &str {
        "ntd"
    }
    fn apply_unchecked(&self, mu: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut rhs = vec![ZERO; self.partition.grid.len()];
        for (&p, &m) in self.partition.boundary.iter().zip(mu) {
            rhs[p] = m;
        }
        let w = self.solver.solve_values(&rhs)?;
        Ok(self.partition.gather_boundary(&w))
    }
}

/// Discrete Dirichlet-to-Neumann map `S_h` (one Dirichlet FFT solve per
/// application).
#[derive(Clone, Debug)]
pub struct DtnOperator {
    partition: BlockPartition,
    eta: f64,
    interior_solver: HelmholtzSolver,
}

impl DtnOperator {
    pub fn new(partition: &BlockPartition, eta: f64) -> Result<Self> {
        check_eta(eta)?;
        Ok(Self {
            partition: partition.clone(),
            eta,
            interior_solver: HelmholtzSolver::new(&partition.interior_grid()?, eta)?,
        })
    }
}

impl LinearOperator for DtnOperator {
    fn nrows(&self) -> usize {
        self.partition.boundary.len()
    }
    fn ncols(&self) -> usize {
        self.partition.boundary.len()
    }
    fn tag(&self) -> &str {
        "dtn"
    }
    fn apply_unchecked(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        let grid = &self.partition.grid;
        let mut w = vec![ZERO; grid.len()];
        for (&p, &v) in self.partition.boundary.iter().zip(f) {
            w[p] = v;
        }
        // A_IB f, then w_I = -A_II^{-1} A_IB f
        let coupling = self.partition.gather_interior(&apply_helmholtz(grid, self.eta, &w)?);
        let y = self.interior_solver.solve_values(&coupling)?;
        for (&p, v) in self.partition.interior.iter().zip(y) {
            w[p] = -v;
        }
        Ok(self.partition.gather_boundary(&apply_helmholtz(grid, self.eta, &w)?))
    }
}

/// `(A_II, A_IB, A_BI, A_BB)`.
pub type DenseBlocks = (
    DMatrix<Complex64>,
    DMatrix<Complex64>,
    DMatrix<Complex64>,
    DMatrix<Complex64>,
);

/// Dense blocks of the all-Neumann system.
pub fn dense_blocks(partition: &BlockPartition, eta: f64) -> Result<DenseBlocks> {
    let a = assemble_dense(partition.grid(), WaveNumber::Constant(eta), DenseVariant::Mixed)?;
    let pick = |rows: &[usize], cols: &[usize]| DMatrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])]);
    let (i, b) = (partition.interior(), partition.boundary());
    Ok((pick(i, i), pick(i, b), pick(b, i), pick(b, b)))
}

/// Dense Schur complement `A_BB - A_BI A_II^{-1} A_IB`.
pub fn dense_dtn(partition: &BlockPartition, eta: f64) -> Result<DMatrix<Complex64>> {
    let (aii, aib, abi, abb) = dense_blocks(partition, eta)?;
    let x = aii.lu().solve(&aib).ok_or(Error::SingularDense)?;
    Ok(abb - abi * x)
}

/// Dense `T_h`, from a full solve with `[0; e_j]` for each boundary node.
pub fn dense_ntd(partition: &BlockPartition, eta: f64) -> Result<DMatrix<Complex64>> {
    let a = assemble_dense(partition.grid(), WaveNumber::Constant(eta), DenseVariant::Mixed)?;
    let nb = partition.boundary().len();
    let mut t = DMatrix::zeros(nb, nb);
    for (j, &pj) in partition.boundary().iter().enumerate() {
        let mut rhs = vec![ZERO; a.nrows()];
        rhs[pj] = Complex64::new(1.0, 0.0);
        let w = dense_solve(&a, &rhs)?;
        for (i, &pi) in partition.boundary().iter().enumerate() {
            t[(i, j)] = w[pi];
        }
    }
    Ok(t)
}

/// Variable wave number Helmholtz operator on a Dirichlet grid.
#[derive(Clone, Debug)]
pub struct VariableHelmholtz {
    grid: Grid,
    k2: Vec<Complex64>,
}

impl VariableHelmholtz {
    pub fn new(k_field: &Field) -> Result<Self> {
        if !k_field.grid().is_all(AxisBc::DIRICHLET) {
            return Err(Error::BoundaryMismatch(
                "variable-k operator expects Dirichlet faces".into(),
            ));
        }
        Ok(Self {
            grid: k_field.grid().clone(),
            k2: k_field.values().iter().map(|k| k * k).collect(),
        })
    }
}

impl LinearOperator for VariableHelmholtz {
    fn nrows(&self) -> usize {
        self.grid.len()
    }
    fn ncols(&self) -> usize {
        self.grid.len()
    }
    fn tag(&self) -> &str {
        "variable-helmholtz"
    }
    fn apply_unchecked(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        apply_stencil(&self.grid, &|p| self.k2[p], x)
    }
}

/// Exact constant-k Dirichlet inverse as an operator.
#[derive(Clone, Debug)]
pub struct DirichletInverse {
    solver: HelmholtzSolver,
}

impl DirichletInverse {
    pub fn new(grid: &Grid, k: f64) -> Result<Self> {
        if !grid.is_all(AxisBc::DIRICHLET) {
            return Err(Error::BoundaryMismatch(
                "Dirichlet inverse on a grid with Neumann faces".into(),
            ));
        }
        Ok(Self {
            solver: HelmholtzSolver::new(grid, k)?,
        })
    }
}

impl LinearOperator for DirichletInverse {
    fn nrows(&self) -> usize {
        self.solver.grid().len()
    }
    fn ncols(&self) -> usize {
        self.solver.grid().len()
    }
    fn tag(&self) -> &str {
        "dirichlet-inverse"
    }
    fn apply_unchecked(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.solver.solve_values(x)
    }
}

/// Right-preconditioned map `v -> A(k(x)) B(k_ref) v`.
#[derive(Clone, Debug)]
pub struct PreconditionedOperator {
    operator: VariableHelmholtz,
    preconditioner: DirichletInverse,
}

impl PreconditionedOperator {
    pub fn operator(&self) -> &VariableHelmholtz {
        &self.operator
    }

    pub fn preconditioner(&self) -> &DirichletInverse {
        &self.preconditioner
    }
}

pub fn make_preconditioned_operator(k_field: &Field, k_ref: f64) -> Result<PreconditionedOperator> {
    Ok(PreconditionedOperator {
        operator: VariableHelmholtz::new(k_field)?,
        preconditioner: DirichletInverse::new(k_field.grid(), k_ref)?,
    })
}

impl LinearOperator for PreconditionedOperator {
    fn nrows(&self) -> usize {
        self.operator.nrows()
    }
    fn ncols(&self) -> usize {
        self.operator.ncols()
    }
    fn tag(&self) -> &str {
        "preconditioned-helmholtz"
    }
    fn apply_unchecked(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        self.operator.apply_unchecked(&self.preconditioner.apply_unchecked(v)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::dense_apply;
    use crate::grid::relative_error;

    fn probe(n: usize, seed: u64) -> Vec<Complex64> {
        // small LCG keeps unit tests free of RNG plumbing
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let a = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let b = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                Complex64::new(a, b)
            })
            .collect()
    }

    #[test]
    fn stencil_matches_dense_for_every_bc_mix() {
        let tags = [
            AxisBc::DIRICHLET,
            AxisBc::NEUMANN,
            AxisBc::new(Boundary::Dirichlet, Boundary::Neumann),
            AxisBc::new(Boundary::Neumann, Boundary::Dirichlet),
        ];
        for &bx in &tags {
            for &by in &tags {
                let grid = Grid::new(&[3, 4], &[bx, by]).unwrap();
                let u = probe(grid.len(), 3);
                let a = assemble_dense(&grid, WaveNumber::Constant(1.3), DenseVariant::Mixed).unwrap();
                let want = dense_apply(&a, &u);
                let got = apply_helmholtz(&grid, 1.3, &u).unwrap();
                assert!(relative_error(&got, &want) < 1e-14, "{bx:?} {by:?}");
            }
        }
    }

    #[test]
    fn partition_counts() {
        let grid = Grid::neumann(&[3, 4]).unwrap();
        let p = BlockPartition::new(&grid).unwrap();
        assert_eq!(p.boundary().len(), 5 * 6 - 3 * 4);
        assert_eq!(p.interior().len(), 12);
        // first face is x = 0 in row-major order
        assert_eq!(&p.boundary()[..6], &[0, 1, 2, 3, 4, 5]);
        let grid = Grid::neumann(&[2, 2, 2]).unwrap();
        let p = BlockPartition::new(&grid).unwrap();
        assert_eq!(p.boundary().len(), 64 - 8);
        let mut all: Vec<usize> = p.boundary().iter().chain(p.interior()).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..64).collect::<Vec<_>>());
    }

    #[test]
    fn zero_maps_to_zero() {
        let grid = Grid::neumann(&[4, 4]).unwrap();
        let p = BlockPartition::new(&grid).unwrap();
        let z = vec![ZERO; p.boundary().len()];
        assert!(NtdOperator::new(&p, 0.5)
            .unwrap()
            .apply(&z)
            .unwrap()
            .iter()
            .all(|v| v.norm() == 0.0));
        assert!(DtnOperator::new(&p, 0.5)
            .unwrap()
            .apply(&z)
            .unwrap()
            .iter()
            .all(|v| v.norm() == 0.0));
    }

    #[test]
    fn shape_is_checked() {
        let grid = Grid::neumann(&[4, 4]).unwrap();
        let p = BlockPartition::new(&grid).unwrap();
        let t = NtdOperator::new(&p, 0.5).unwrap();
        assert!(matches!(t.apply(&[ZERO; 3]), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn variable_operator_with_constant_k_is_the_dirichlet_matrix() {
        let grid = Grid::dirichlet(&[5, 5]).unwrap();
        let u = Field::new(grid.clone(), probe(grid.len(), 9)).unwrap();
        let k = Field::from_real(grid.clone(), &vec![2.5; grid.len()]).unwrap();
        let a = assemble_dense(&grid, WaveNumber::Constant(2.5), DenseVariant::Dirichlet).unwrap();
        let got = apply_variable_helmholtz(&u, &k).unwrap();
        assert!(relative_error(got.values(), &dense_apply(&a, u.values())) < 1e-14);
    }

    #[test]
    fn exact_preconditioner_gives_identity() {
        let grid = Grid::dirichlet(&[7, 6]).unwrap();
        let k = Field::from_real(grid.clone(), &vec![3.0; grid.len()]).unwrap();
        let op = make_preconditioned_operator(&k, 3.0).unwrap();
        let v = probe(grid.len(), 1);
        assert!(relative_error(&op.apply(&v).unwrap(), &v) < 1e-10);
    }
}
