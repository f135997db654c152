mod common;

use std::f64::consts::PI;

use common::*;
use proptest::prelude::*;
use stekloff::extension::NdArray;
use stekloff::helmholtz::{
    periodic_symbol, solve_dirichlet, solve_mixed, solve_neumann, solve_periodic, FaceEnd, FaceFlux, HelmholtzProblem,
    HelmholtzSolver,
};
use stekloff::{AxisBc, Boundary, Error, Field, Grid};

fn bc(lo: bool, hi: bool) -> AxisBc {
    let t = |b| if b { Boundary::Neumann } else { Boundary::Dirichlet };
    AxisBc::new(t(lo), t(hi))
}

fn grid_for(n: usize, ends: &[(bool, bool)]) -> Grid {
    let bcs: Vec<AxisBc> = ends.iter().map(|&(l, h)| bc(l, h)).collect();
    Grid::new(&vec![n; ends.len()], &bcs).unwrap()
}

#[test]
fn periodic_solve_has_tiny_circulant_residual() {
    let (n, k) = (6, 0.5);
    let h = 1.0 / n as f64;
    let mut r = rng(11);
    let g = random_vec(n, &mut r);
    let sym = periodic_symbol(&[n], k, h).unwrap();
    let u = solve_periodic(&NdArray::new(vec![n], g.clone()).unwrap(), &sym).unwrap();
    let a = circulant(n) - identity(n) * c(k * k * h * h);
    assert!(rel_err(&matvec(&a, &u.data), &g) < 1e-12);
}

#[test]
fn periodic_solution_of_odd_data_is_odd() {
    let n = 5;
    let big = 2 * n + 2;
    let mut r = rng(12);
    let f = random_vec(n, &mut r);
    let g = stekloff::extension::extend_odd_1d(&f).unwrap();
    let sym = periodic_symbol(&[big], 1.1, 1.0 / (n as f64 + 1.0)).unwrap();
    let u = solve_periodic(&NdArray::new(vec![big], g).unwrap(), &sym).unwrap().data;
    assert!(u[n].norm() < 1e-13 && u[big - 1].norm() < 1e-13);
    for j in 1..=n {
        assert!((u[big - 1 - j] + u[j - 1]).norm() < 1e-13);
    }
}

#[test]
fn dirichlet_2d_matches_dense_lu() {
    let (n, k) = (5, 2.0);
    let grid = Grid::dirichlet(&[n, n]).unwrap();
    let h = grid.h_ref();
    let mut r = rng(13);
    let f = Field::new(grid.clone(), random_vec(n * n, &mut r)).unwrap();
    let got = solve_dirichlet(&HelmholtzProblem::new(grid, k, f.clone()).unwrap()).unwrap();
    let want = lu_solve(&kron_system(n, &[(false, false); 2], k * k * h * h), f.values());
    assert!(rel_err(got.values(), &want) < 1e-12);
}

#[test]
fn neumann_1d_with_source_and_flux() {
    // u(0) = 0, u'(1) = g; unknowns u_1..u_5, the last on the boundary
    let (n, k, g) = (4, 0.7, 0.3);
    let grid = grid_for(n, &[(false, true)]);
    let h = grid.h_ref();
    let src: Vec<f64> = (1..=n + 1).map(|i| (i as f64 * h).powi(2)).collect();
    let problem = HelmholtzProblem::from_source(grid.clone(), k, &Field::from_real(grid, &src).unwrap())
        .unwrap()
        .with_flux(vec![FaceFlux::new(0, FaceEnd::Hi, vec![c(g)])])
        .unwrap();
    let got = solve_neumann(&problem).unwrap();

    let m = n + 1;
    let mut a = tridiag(m) - identity(m) * c(k * k * h * h);
    a[(m - 1, m - 1)] = c(1.0 - 0.5 * k * k * h * h);
    let mut rhs: Vec<C> = src.iter().map(|f| c(h * h * f)).collect();
    rhs[m - 1] = c(0.5 * h * h * src[m - 1] + h * g);
    assert!(rel_err(got.values(), &lu_solve(&a, &rhs)) < 1e-12);
}

#[test]
fn neumann_face_in_2d_with_flux() {
    let (n, k) = (4, 1.0);
    let ends = [(false, true), (false, false)];
    let grid = grid_for(n, &ends);
    let h = grid.h_ref();
    let mut r = rng(14);
    let f = Field::new(grid.clone(), random_vec(grid.len(), &mut r)).unwrap();
    let flux = random_vec(n, &mut r);
    let problem = HelmholtzProblem::from_source(grid.clone(), k, &f)
        .unwrap()
        .with_flux(vec![FaceFlux::new(0, FaceEnd::Hi, flux.clone())])
        .unwrap();
    let got = solve_neumann(&problem).unwrap();

    // load h^2 W f + h g on the face row (half weight there)
    let mut rhs: Vec<C> = Vec::with_capacity(grid.len());
    for i in 0..=n {
        for (j, g) in flux.iter().enumerate() {
            let w = if i == n { 0.5 } else { 1.0 };
            let mut v = f.values()[i * n + j] * (h * h * w);
            if i == n {
                v += g * h;
            }
            rhs.push(v);
        }
    }
    let want = lu_solve(&kron_system(n, &ends, k * k * h * h), &rhs);
    assert!(rel_err(got.values(), &want) < 1e-12);
}

#[test]
fn mixed_on_all_dirichlet_equals_dirichlet_solver() {
    let grid = Grid::dirichlet(&[4, 3]).unwrap();
    let mut r = rng(15);
    let f = Field::new(grid.clone(), random_vec(12, &mut r)).unwrap();
    let p = HelmholtzProblem::new(grid, 1.2, f).unwrap();
    assert_eq!(solve_mixed(&p).unwrap(), solve_dirichlet(&p).unwrap());
}

#[test]
fn neumann_at_both_ends_1d() {
    let (n, k) = (5, 1.3);
    let ends = [(true, true)];
    let grid = grid_for(n, &ends);
    let h = grid.h_ref();
    let mut r = rng(16);
    let rhs = random_vec(grid.len(), &mut r);
    let got = HelmholtzSolver::new(&grid, k).unwrap().solve_values(&rhs).unwrap();
    assert!(rel_err(&got, &lu_solve(&kron_system(n, &ends, k * k * h * h), &rhs)) < 1e-12);
}

#[test]
fn dirichlet_by_neumann_2d() {
    let (n, k) = (4, 0.9);
    let ends = [(false, false), (true, true)];
    let grid = grid_for(n, &ends);
    let h = grid.h_ref();
    let mut r = rng(17);
    let rhs = random_vec(grid.len(), &mut r);
    let got = HelmholtzSolver::new(&grid, k).unwrap().solve_values(&rhs).unwrap();
    assert!(rel_err(&got, &lu_solve(&kron_system(n, &ends, k * k * h * h), &rhs)) < 1e-12);
}

#[test]
fn resonance_is_refused_and_a_nudge_solves() {
    let n = 7;
    let grid = Grid::dirichlet(&[n]).unwrap();
    let h = grid.h_ref();
    let big = 2 * n + 2;
    let k = 2.0 * (PI / big as f64).sin() / h;
    assert!(matches!(HelmholtzSolver::new(&grid, k), Err(Error::Resonance { .. })));
    let solver = HelmholtzSolver::new(&grid, k + 1e-3).unwrap();
    let mut r = rng(18);
    let rhs = random_vec(n, &mut r);
    let u = solver.solve_values(&rhs).unwrap();
    let want = lu_solve(&kron_system(n, &[(false, false)], (k + 1e-3).powi(2) * h * h), &rhs);
    assert!(rel_err(&u, &want) < 1e-9);
}

#[test]
fn rejects_mismatched_inputs() {
    let grid = Grid::dirichlet(&[3, 3]).unwrap();
    let solver = HelmholtzSolver::new(&grid, 1.0).unwrap();
    assert!(solver.solve_values(&[c(1.0); 8]).is_err());
    assert!(HelmholtzSolver::new(&grid, f64::NAN).is_err());
    let neumann = grid_for(3, &[(false, true), (false, false)]);
    let p = HelmholtzProblem::new(neumann.clone(), 1.0, Field::zeros(neumann)).unwrap();
    assert!(solve_dirichlet(&p).is_err());
    assert!(p
        .with_flux(vec![FaceFlux::new(0, FaceEnd::Lo, vec![c(1.0); 3])])
        .is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mixed_solution_satisfies_the_assembled_system(
        dim in 1usize..=3,
        n in 2usize..=5,
        mask in 0u8..64,
        kfrac in 0.05f64..1.4,
        seed in 0u64..10_000,
    ) {
        let ends: Vec<(bool, bool)> = (0..dim).map(|a| (mask >> (2 * a) & 1 == 1, mask >> (2 * a + 1) & 1 == 1)).collect();
        let grid = grid_for(n, &ends);
        let h = grid.h_ref();
        let k = kfrac / h;
        let solver = match HelmholtzSolver::new(&grid, k) {
            Ok(s) if s.condition_estimate() < 1e6 => s,
            _ => return Ok(()),
        };
        let mut r = rng(seed);
        let rhs = random_vec(grid.len(), &mut r);
        let u = solver.solve_values(&rhs).unwrap();
        let a = kron_system(n, &ends, k * k * h * h);
        prop_assert!(rel_err(&matvec(&a, &u), &rhs) < 1e-10);
    }
}
