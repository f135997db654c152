mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use stekloff::krylov::{gmres, GmresOptions};
use stekloff::operators::{
    make_preconditioned_operator, BlockPartition, DtnOperator, LinearOperator, NtdOperator, VariableHelmholtz,
};
use stekloff::{Field, Grid};

fn neumann_system(n: usize, eta: f64) -> (BlockPartition, DMatrix<C>) {
    let grid = Grid::neumann(&[n, n]).unwrap();
    let h = grid.h_ref();
    let a = kron_system(n, &[(true, true); 2], eta * eta * h * h);
    (BlockPartition::new(&grid).unwrap(), a)
}

fn pick(a: &DMatrix<C>, rows: &[usize], cols: &[usize]) -> DMatrix<C> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}

fn columns(op: &dyn LinearOperator) -> DMatrix<C> {
    let n = op.ncols();
    let mut m = DMatrix::zeros(op.nrows(), n);
    for j in 0..n {
        let mut e = vec![c(0.0); n];
        e[j] = c(1.0);
        m.set_column(j, &nalgebra::DVector::from_vec(op.apply(&e).unwrap()));
    }
    m
}

fn schur(n: usize, eta: f64) -> (BlockPartition, DMatrix<C>) {
    let (part, a) = neumann_system(n, eta);
    let (i, b) = (part.interior(), part.boundary());
    let aii = pick(&a, i, i);
    let x = aii.lu().solve(&pick(&a, i, b)).unwrap();
    let s = pick(&a, b, b) - pick(&a, b, i) * x;
    (part, s)
}

#[test]
fn boundary_ordering_is_face_major() {
    let part = BlockPartition::new(&Grid::neumann(&[2, 2]).unwrap()).unwrap();
    // 4x4 nodes: row 0, row 3, then the remaining ends of columns 0 and 3
    assert_eq!(part.boundary(), &[0, 1, 2, 3, 12, 13, 14, 15, 4, 8, 7, 11]);
    assert_eq!(part.interior(), &[5, 6, 9, 10]);
}

#[test]
fn ntd_matches_dense_block_solve() {
    let (n, eta) = (6, 0.5);
    let (part, a) = neumann_system(n, eta);
    let ntd = NtdOperator::new(&part, eta).unwrap();
    let mut r = rng(21);
    let mu = random_vec(part.boundary().len(), &mut r);
    let mut rhs = vec![c(0.0); a.nrows()];
    for (&p, &m) in part.boundary().iter().zip(&mu) {
        rhs[p] = m;
    }
    let w = lu_solve(&a, &rhs);
    let want: Vec<C> = part.boundary().iter().map(|&p| w[p]).collect();
    assert!(rel_err(&ntd.apply(&mu).unwrap(), &want) < 1e-12);
}

#[test]
fn dtn_matches_schur_complement() {
    let (n, eta) = (6, 1.0);
    let (part, s) = schur(n, eta);
    let dtn = DtnOperator::new(&part, eta).unwrap();
    let mut r = rng(22);
    let f = random_vec(part.boundary().len(), &mut r);
    assert!(rel_err(&dtn.apply(&f).unwrap(), &matvec(&s, &f)) < 1e-12);
}

#[test]
fn both_maps_are_symmetric() {
    let part = BlockPartition::new(&Grid::neumann(&[5, 5]).unwrap()).unwrap();
    for eta in [0.5, 2.0] {
        for m in [
            columns(&DtnOperator::new(&part, eta).unwrap()),
            columns(&NtdOperator::new(&part, eta).unwrap()),
        ] {
            assert!(max_abs(&(&m - m.transpose())) < 1e-12 * max_abs(&m));
        }
    }
}

#[test]
fn dtn_and_ntd_are_inverse() {
    let part = BlockPartition::new(&Grid::neumann(&[8, 8]).unwrap()).unwrap();
    for eta in [0.5, 1.0, 2.0, 4.0] {
        let s = columns(&DtnOperator::new(&part, eta).unwrap());
        let t = columns(&NtdOperator::new(&part, eta).unwrap());
        let nb = part.boundary().len();
        assert!(max_abs(&(s * t - identity(nb))) < 1e-9, "eta={eta}");
    }
}

#[test]
fn small_grids_match_dense_dtn() {
    for n in 1..=10 {
        let eta = 0.5 + 0.3 * n as f64;
        let (part, s) = schur(n, eta);
        let got = columns(&DtnOperator::new(&part, eta).unwrap());
        assert!(max_abs(&(got - &s)) < 1e-10 * max_abs(&s), "n={n}");
    }
}

#[test]
fn variable_operator_matches_assembled_matrix() {
    let n = 5;
    let grid = Grid::dirichlet(&[n, n]).unwrap();
    let h = grid.h_ref();
    let k = Field::from_fn(grid.clone(), |x| c(3.0 + x[0] - 2.0 * x[1] * x[1])).unwrap();
    let op = VariableHelmholtz::new(&k).unwrap();
    let t = tridiag(n);
    let mut a = kron(&t, &identity(n)) + kron(&identity(n), &t);
    for (p, kv) in k.values().iter().enumerate() {
        a[(p, p)] -= kv * kv * (h * h);
    }
    let mut r = rng(23);
    let x = random_vec(n * n, &mut r);
    assert!(rel_err(&op.apply(&x).unwrap(), &matvec(&a, &x)) < 1e-14);
    assert!(op.apply(&vec![c(0.0); n * n]).unwrap().iter().all(|v| v.norm() == 0.0));
}

#[test]
fn constant_field_composite_is_identity() {
    let grid = Grid::dirichlet(&[12, 12]).unwrap();
    let k = 3.7;
    let field = Field::from_fn(grid, |_| c(k)).unwrap();
    let op = make_preconditioned_operator(&field, k).unwrap();
    let mut r = rng(24);
    let x = random_vec(144, &mut r);
    assert!(rel_err(&op.apply(&x).unwrap(), &x) < 1e-10);
    let (_, report) = gmres(&op, &x, &GmresOptions::default()).unwrap();
    assert!(report.converged);
    assert_eq!(report.iterations, 1);
}

#[test]
fn partition_needs_all_neumann() {
    assert!(BlockPartition::new(&Grid::dirichlet(&[3, 3]).unwrap()).is_err());
    let part = BlockPartition::new(&Grid::neumann(&[3, 3]).unwrap()).unwrap();
    assert!(DtnOperator::new(&part, -1.0).is_err());
    let dtn = DtnOperator::new(&part, 1.0).unwrap();
    assert!(dtn.apply(&[c(1.0); 3]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn maps_are_linear(n in 2usize..8, eta in 0.3f64..4.0, a in -2.0f64..2.0, seed in 0u64..1000) {
        let part = BlockPartition::new(&Grid::neumann(&[n, n]).unwrap()).unwrap();
        let nb = part.boundary().len();
        let mut r = rng(seed);
        let (x, y) = (random_vec(nb, &mut r), random_vec(nb, &mut r));
        let combo: Vec<C> = x.iter().zip(&y).map(|(u, v)| u * a + v).collect();
        let ops: [Box<dyn LinearOperator>; 2] = [
            Box::new(DtnOperator::new(&part, eta).unwrap()),
            Box::new(NtdOperator::new(&part, eta).unwrap()),
        ];
        for op in &ops {
            let (ox, oy) = (op.apply(&x).unwrap(), op.apply(&y).unwrap());
            let want: Vec<C> = ox.iter().zip(&oy).map(|(u, v)| u * a + v).collect();
            prop_assert!(rel_err(&op.apply(&combo).unwrap(), &want) < 1e-12);
        }
    }
}
