//! Exact constant-coefficient Helmholtz solvers on boxes.
//!
//! Every boundary-value problem is turned into a periodic one: Neumann ends
//! are reflected evenly (doubling the load on the reflection node), the
//! remaining Dirichlet ends are reflected oddly, and the periodic operator is
//! inverted by dividing by its DFT symbol. Restriction to the original
//! unknowns recovers the discrete solution exactly, up to roundoff.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::dft::{dft_all_axes, dft_axis, Direction};
use crate::error::{Error, Result};
use crate::extension::{ExtensionKind, ExtensionPlan, NdArray};
use crate::grid::{step_index, strides, unravel, AxisBc, Boundary, Field, Grid};

/// Relative threshold below which a symbol entry counts as resonant.
pub const RESONANCE_RTOL: f64 = 1e-12;

/// DFT eigenvalues of the periodic operator:
/// `d_l = sum_j c_j 4 sin^2(pi l_j / N_j) - k^2 h^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicSymbol {
    periods: Vec<usize>,
    per_axis: Vec<Vec<f64>>,
    shift: f64,
    /// Filled on first use; solvers only need the per-axis terms.
    values: OnceLock<Vec<f64>>,
    max_abs: f64,
    threshold: f64,
}

impl PeriodicSymbol {
    pub fn new(periods: &[usize], axis_weights: &[f64], shift: f64) -> Result<Self> {
        if periods.is_empty() || periods.len() != axis_weights.len() {
            return Err(Error::InvalidArgument("one weight per periodic axis required".into()));
        }
        if let Some(&p) = periods.iter().find(|&&p| p < 2) {
            return Err(Error::TooShort { min: 2, got: p });
        }
        let per_axis: Vec<Vec<f64>> = periods
            .iter()
            .zip(axis_weights)
            .map(|(&p, &w)| {
                (0..p)
                    .map(|l| {
                        let s = (std::f64::consts::PI * l as f64 / p as f64).sin();
                        4.0 * w * s * s
                    })
                    .collect()
            })
            .collect();
        // d is a sum of per-axis terms, so its extremes are the sums of the
        // per-axis extremes
        let extreme = |pick: fn(f64, f64) -> f64| {
            per_axis.iter().map(|t| t.iter().copied().fold(t[0], pick)).sum::<f64>() - shift
        };
        let max_abs = extreme(f64::max).abs().max(extreme(f64::min).abs());
        Ok(Self {
            periods: periods.to_vec(),
            per_axis,
            shift,
            values: OnceLock::new(),
            max_abs,
            threshold: RESONANCE_RTOL * max_abs,
        })
    }

    pub fn periods(&self) -> &[usize] {
        &self.periods
    }

    /// Sine terms of one axis (already weighted).
    pub fn axis_terms(&self, axis: usize) -> &[f64] {
        &self.per_axis[axis]
    }

    /// The `k^2 h^2` shift.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Combined diagonal, row-major over the periodic grid.
    pub fn values(&self) -> &[f64] {
        self.values.get_or_init(|| {
            let mut idx = vec![0; self.periods.len()];
            (0..self.periods.iter().product::<usize>())
                .map(|_| {
                    let v = self.value_at(&idx);
                    step_index(&mut idx, &self.periods);
                    v
                })
                .collect()
        })
    }

    /// Entry at one multi-index.
    pub fn value_at(&self, idx: &[usize]) -> f64 {
        idx.iter().zip(&self.per_axis).map(|(&l, t)| t[l]).sum::<f64>() - self.shift
    }

    /// Largest `|d|` over all modes.
    pub fn max_abs(&self) -> f64 {
        self.max_abs
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Multi-indices of entries with `|d| < threshold`.
    pub fn resonant_modes(&self) -> Vec<Vec<usize>> {
        let mut idx = vec![0; self.periods.len()];
        self.values()
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() < self.threshold)
            .map(|(flat, _)| {
                unravel(flat, &self.periods, &mut idx);
                idx.clone()
            })
            .collect()
    }

    fn resonance_at(&self, idx: &[usize]) -> Error {
        Error::Resonance {
            modes: idx.to_vec(),
            value: self.value_at(idx),
            threshold: self.threshold,
        }
    }
}

/// Symbol of the periodic operator with equal spacing `h` on every axis.
pub fn periodic_symbol(periods: &[usize], k: f64, h: f64) -> Result<PeriodicSymbol> {
    PeriodicSymbol::new(periods, &vec![1.0; periods.len()], k * k * h * h)
}

/// Solve `A^P v = g` on the periodic grid.
pub fn solve_periodic(g: &NdArray, symbol: &PeriodicSymbol) -> Result<NdArray> {
    if g.shape != symbol.periods {
        return Err(Error::PlanMismatch(format!(
            "data shape {:?}, symbol periods {:?}",
            g.shape, symbol.periods
        )));
    }
    if let Some(flat) = symbol.values().iter().position(|v| v.abs() < symbol.threshold) {
        let mut idx = vec![0; symbol.periods.len()];
        unravel(flat, &symbol.periods, &mut idx);
        return Err(symbol.resonance_at(&idx));
    }
    let mut v = g.clone();
    dft_all_axes(&mut v, Direction::Forward)?;
    for (x, d) in v.data.iter_mut().zip(symbol.values()) {
        *x /= d;
    }
    dft_all_axes(&mut v, Direction::Inverse)?;
    Ok(v)
}

/// Flux data on one Neumann face; `values` covers the face's nodes in
/// row-major order of the remaining axes.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceFlux {
    pub axis: usize,
    pub end: FaceEnd,
    pub values: Vec<Complex64>,
}

/// Constant-coefficient problem `A u = rhs + flux terms`.
#[derive(Clone, Debug)]
pub struct HelmholtzProblem {
    pub grid: Grid,
    pub k: f64,
    /// Assembled load vector (already scaled by `h^2` and the Neumann weights).
    pub rhs: Field,
    pub flux: Vec<FaceFlux>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceEnd {
    Lo,
    Hi,
}

impl HelmholtzProblem {
    pub fn new(grid: Grid, k: f64, rhs: Field) -> Result<Self> {
        if rhs.grid().shape() != grid.shape() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                got: rhs.len(),
            });
        }
        if !(k >= 0.0 && k.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "wave number {k} must be finite and >= 0"
            )));
        }
        Ok(Self {
            grid,
            k,
            rhs,
            flux: Vec::new(),
        })
    }

    /// Problem with point samples `f` of the source: load `h^2 W f`.
    pub fn from_source(grid: Grid, k: f64, source: &Field) -> Result<Self> {
        let rhs = load_vector(&grid, source)?;
        Self::new(grid, k, rhs)
    }

    pub fn with_flux(mut self, flux: Vec<FaceFlux>) -> Result<Self> {
        for face in &flux {
            check_face(&self.grid, face)?;
        }
        self.flux = flux;
        Ok(self)
    }

    /// Load vector including the flux contributions.
    pub fn full_rhs(&self) -> Result<Field> {
        let mut rhs = self.rhs.clone();
        for face in &self.flux {
            add_flux(&self.grid, face, rhs.values_mut())?;
        }
        Ok(rhs)
    }
}

fn face_end_index(grid: &Grid, axis: usize, end: FaceEnd) -> usize {
    match end {
        FaceEnd::Lo => 0,
        FaceEnd::Hi => grid.axis_len(axis) - 1,
    }
}

fn check_face(grid: &Grid, face: &FaceFlux) -> Result<()> {
    if face.axis >= grid.dim() {
        return Err(Error::AxisOutOfRange {
            axis: face.axis,
            dim: grid.dim(),
        });
    }
    let bc = grid.bc(face.axis);
    let tag = match face.end {
        FaceEnd::Lo => bc.lo,
        FaceEnd::Hi => bc.hi,
    };
    if tag != Boundary::Neumann {
        return Err(Error::BoundaryMismatch(format!(
            "flux on axis {} {} end, which is Dirichlet",
            face.axis,
            if face.end == FaceEnd::Lo { "low" } else { "high" }
        )));
    }
    let expected = grid.len() / grid.axis_len(face.axis);
    if face.values.len() != expected {
        return Err(Error::ShapeMismatch {
            expected,
            got: face.values.len(),
        });
    }
    Ok(())
}

impl FaceFlux {
    /// Flux on the low (`FaceEnd::Lo`) or high end of `axis`.
    pub fn new(axis: usize, end: FaceEnd, values: Vec<Complex64>) -> Self {
        Self { axis, end, values }
    }
}

fn neumann_weight(grid: &Grid, idx: &[usize], skip: Option<usize>) -> f64 {
    (0..grid.dim())
        .filter(|&a| Some(a) != skip)
        .map(|a| {
            let bc = grid.bc(a);
            let last = grid.axis_len(a) - 1;
            if (idx[a] == 0 && bc.lo == Boundary::Neumann) || (idx[a] == last && bc.hi == Boundary::Neumann) {
                0.5
            } else {
                1.0
            }
        })
        .product()
}

/// `h_ref^2 W f`: the load for point samples `f` of the source.
pub fn load_vector(grid: &Grid, source: &Field) -> Result<Field> {
    if source.grid().shape() != grid.shape() {
        return Err(Error::ShapeMismatch {
            expected: grid.len(),
            got: source.len(),
        });
    }
    let shape = grid.shape();
    let h2 = grid.h_ref() * grid.h_ref();
    let mut idx = vec![0; shape.len()];
    let values = source
        .values()
        .iter()
        .enumerate()
        .map(|(flat, v)| {
            unravel(flat, &shape, &mut idx);
            v * (h2 * neumann_weight(grid, &idx, None))
        })
        .collect();
    Field::new(grid.clone(), values)
}

fn add_flux(grid: &Grid, face: &FaceFlux, rhs: &mut [Complex64]) -> Result<()> {
    check_face(grid, face)?;
    let shape = grid.shape();
    let st = strides(&shape);
    let fixed = face_end_index(grid, face.axis, face.end);
    let scale = grid.h_ref() * grid.h_ref() / grid.h_per_axis()[face.axis];
    let face_shape: Vec<usize> = shape
        .iter()
        .enumerate()
        .filter(|&(a, _)| a != face.axis)
        .map(|(_, &s)| s)
        .collect();
    let mut fidx = vec![0; face_shape.len()];
    let mut idx = vec![0; shape.len()];
    for (j, g) in face.values.iter().enumerate() {
        unravel(j, &face_shape, &mut fidx);
        let mut it = fidx.iter();
        for (a, slot) in idx.iter_mut().enumerate() {
            *slot = if a == face.axis { fixed } else { *it.next().unwrap() };
        }
        let flat: usize = idx.iter().zip(&st).map(|(i, s)| i * s).sum();
        rhs[flat] += g * (scale * neumann_weight(grid, &idx, Some(face.axis)));
    }
    Ok(())
}

/// Reusable solver for one grid and wave number: extension plans, symbol and
/// FFT plans are built once.
#[derive(Clone, Debug)]
pub struct HelmholtzSolver {
    grid: Grid,
    k: f64,
    reflect: ExtensionPlan,
    periodize: ExtensionPlan,
    symbol: PeriodicSymbol,
    inverse: Vec<f64>,
}

impl HelmholtzSolver {
    pub fn new(grid: &Grid, k: f64) -> Result<Self> {
        Self::build(grid, k, 0)
    }

    #[doc(hidden)]
    pub fn with_restriction_shift(grid: &Grid, k: f64, shift: usize) -> Result<Self> {
        Self::build(grid, k, shift)
    }

    fn build(grid: &Grid, k: f64, shift: usize) -> Result<Self> {
        if !(k >= 0.0 && k.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "wave number {k} must be finite and >= 0"
            )));
        }
        let dim = grid.dim();
        let first: Vec<ExtensionKind> = grid
            .bc_per_axis()
            .iter()
            .map(|&bc| ExtensionKind::for_neumann_ends(bc))
            .collect();
        let reflect = ExtensionPlan::new(&first, &grid.shape())?;
        let second: Vec<ExtensionKind> = first
            .iter()
            .map(|&kind| match kind {
                ExtensionKind::EvenBoth => ExtensionKind::None,
                _ => ExtensionKind::Odd,
            })
            .collect();
        let periodize = ExtensionPlan::new(&second, &reflect.target_shape())?.with_restriction_shift(shift);
        let periods = periodize.target_shape();
        let weights: Vec<f64> = (0..dim).map(|a| grid.axis_weight(a)).collect();
        let h = grid.h_ref();
        let symbol = PeriodicSymbol::new(&periods, &weights, k * k * h * h)?;

        // Only modes present in symmetric (extended) data are ever excited;
        // the rest are projected out and may vanish without harm.
        let active: Vec<Vec<bool>> = (0..dim)
            .map(|a| {
                let n = grid.n_per_axis()[a];
                let p = periods[a];
                (0..p)
                    .map(|l| match grid.bc(a).tag() {
                        "DD" => l % (n + 1) != 0,
                        "NN" => true,
                        _ => l % 2 == 1,
                    })
                    .collect()
            })
            .collect();
        let mut idx = vec![0; dim];
        let mut inverse = vec![0.0; periods.iter().product()];
        for inv in inverse.iter_mut() {
            if idx.iter().enumerate().all(|(a, &l)| active[a][l]) {
                let d = symbol.value_at(&idx);
                if d.abs() < symbol.threshold {
                    return Err(symbol.resonance_at(&idx));
                }
                *inv = 1.0 / d;
            }
            step_index(&mut idx, &periods);
        }
        Ok(Self {
            grid: grid.clone(),
            k,
            reflect,
            periodize,
            symbol,
            inverse,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn symbol(&self) -> &PeriodicSymbol {
        &self.symbol
    }

    /// `max|d| / min|d|` over the modes the solve actually inverts.
    pub fn condition_estimate(&self) -> f64 {
        let dmax = self.symbol.max_abs;
        let inv_max = self.inverse.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        dmax * inv_max
    }

    /// Solve with an assembled load vector given as raw values.
    pub fn solve_values(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        if rhs.len() != self.grid.len() {
            return Err(Error::ShapeMismatch {
                expected: self.grid.len(),
                got: rhs.len(),
            });
        }
        // Extension and transforms on different axes commute, so each axis is
        // transformed right after it is extended (last axis first) and
        // restricted right after its inverse. Lines that are still short on
        // the other axes are never transformed.
        let mut g = NdArray::new(self.grid.shape(), rhs.to_vec())?;
        for axis in (0..g.dim()).rev() {
            g = self.periodize.extend_axis(self.reflect.extend_axis(g, axis)?, axis)?;
            dft_axis(&mut g, axis, Direction::Forward)?;
        }
        for (v, d) in g.data.iter_mut().zip(&self.inverse) {
            *v *= d;
        }
        for axis in 0..g.dim() {
            dft_axis(&mut g, axis, Direction::Inverse)?;
            g = self
                .reflect
                .restrict_axis(self.periodize.restrict_axis(g, axis)?, axis)?;
        }
        Ok(g.data)
    }

    pub fn solve(&self, rhs: &Field) -> Result<Field> {
        if rhs.grid().shape() != self.grid.shape() {
            return Err(Error::ShapeMismatch {
                expected: self.grid.len(),
                got: rhs.len(),
            });
        }
        Field::new(self.grid.clone(), self.solve_values(rhs.values())?)
    }
}

/// Exact solve of the all-Dirichlet problem via odd extension.
pub fn solve_dirichlet(problem: &HelmholtzProblem) -> Result<Field> {
    if !problem.grid.is_all(AxisBc::DIRICHLET) {
        return Err(Error::BoundaryMismatch(
            "solve_dirichlet needs Dirichlet ends on every axis".into(),
        ));
    }
    solve_mixed(problem)
}

/// Exact solve with at least one Neumann face (even extension first).
pub fn solve_neumann(problem: &HelmholtzProblem) -> Result<Field> {
    if problem.grid.is_all(AxisBc::DIRICHLET) {
        return Err(Error::BoundaryMismatch(
            "solve_neumann needs at least one Neumann face".into(),
        ));
    }
    solve_mixed(problem)
}

/// Exact solve for any per-axis combination of Dirichlet/Neumann ends.
pub fn solve_mixed(problem: &HelmholtzProblem) -> Result<Field> {
    let solver = HelmholtzSolver::new(&problem.grid, problem.k)?;
    solver.solve(&problem.full_rhs()?)
}
