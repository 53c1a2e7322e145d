mod common;

use common::C;
use superint::catalog::{instantiate, Family, Params};
use superint::integral::{IntegralSpec, Mechanics};
use superint::quantum_grid::{GridFunction, GridOperator, GridSpec};
use superint::sampling::BBox;

const HALF_WIDTH: f64 = 5.0;

/// Dirichlet tridiagonal of `-(hbar^2/2) d^2/dx^2 + omega^2 x^2` on the
/// interior nodes of an axis.
fn axis_matrix(grid: &GridSpec, hbar: f64, omega: f64) -> (Vec<f64>, Vec<f64>) {
    let h2 = grid.h * grid.h;
    let d = (1..grid.nx - 1).map(|i| hbar * hbar / h2 + (omega * grid.x(i)).powi(2)).collect();
    let e = vec![-0.5 * hbar * hbar / h2; grid.nx - 3];
    (d, e)
}

/// Ground energy of the grid oscillator as the sum of the two axis
/// eigenvalues, after checking that the grid `H` maps the product of the
/// axis eigenvectors onto that energy times itself.
fn grid_ground_energy(h: f64) -> f64 {
    let (hbar, omega) = (1.0, 1.0);
    let e = instantiate(Family::Oscillator, &Params::new().with("hbar", hbar).with("omega", omega)).unwrap();
    let grid = GridSpec::new(BBox::square(HALF_WIDTH), h, 1).unwrap();
    assert_eq!(grid.nx, grid.ny);
    let (d, off) = axis_matrix(&grid, hbar, omega);
    let lambda = common::lowest_eigenvalue(&d, &off);
    let v = common::eigenvector(&d, &off, lambda);
    let phi = |i: usize| if i == 0 || i == grid.nx - 1 { 0.0 } else { v[i - 1] };

    let n = grid.nx;
    let psi = GridFunction::from_fn(&grid, |x, y| {
        let i = ((x - grid.x0) / h).round() as usize;
        let j = ((y - grid.y0) / h).round() as usize;
        C::new(phi(i) * phi(j), 0.0)
    });
    let h_psi = GridOperator::hamiltonian(&e, hbar, &grid).unwrap().apply(&psi);
    let energy = 2.0 * lambda;
    let mut worst = 0.0f64;
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let idx = j * n + i;
            worst = worst.max((h_psi.values[idx] - psi.values[idx] * energy).norm());
        }
    }
    assert!(worst <= 1e-9 * energy, "h = {h}: (H - E) psi = {worst:.3e}");
    energy
}

#[test]
fn oscillator_ground_state_matches_tridiagonal_eigensolve() {
    // V = omega^2 r^2 has frequency sqrt(2) omega on each axis
    let exact = 2f64.sqrt();
    let errors: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|&h| (grid_ground_energy(h) - exact).abs()).collect();
    assert!(errors[2] < 1e-3, "{errors:?}");
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() <= 0.3, "order {order} from {errors:?}");
    }
}

#[test]
fn sturm_count_brackets_known_spectrum() {
    // 2 on the diagonal, -1 off it: eigenvalues 2 - 2 cos(k pi / (n + 1))
    let n = 12;
    let d = vec![2.0; n];
    let e = vec![-1.0; n - 1];
    let exact = |k: usize| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
    assert!((common::lowest_eigenvalue(&d, &e) - exact(1)).abs() < 1e-13);
    assert_eq!(common::sturm_count(&d, &e, 0.5 * (exact(3) + exact(4))), 3);
}

fn l_squared_p2_error(h: f64) -> f64 {
    let hbar = 1.0;
    let spec = IntegralSpec::new("L^2 p2", 3, Mechanics::Both).lead(2, 0, 1, 1.0);
    let grid = GridSpec::new(BBox::square(2.0), h, 4).unwrap();
    let (cx, cy, sx, sy, kx, ky) = (0.2, -0.1, 0.5, 0.6, 0.7, -0.4);
    let wave = common::gaussian(cx, cy, sx, sy, kx, ky);
    let psi = GridFunction::from_fn(&grid, |x, y| wave(x, y));
    let out = GridOperator::integral(&spec, hbar, &grid).unwrap().apply(&psi);

    let l = |f| common::angular(f, hbar);
    let p2 = |f| common::momentum_y(f, hbar);
    let g = || common::gaussian(cx, cy, sx, sy, kx, ky);
    let lp = l(l(p2(g())));
    let pl = p2(l(l(g())));

    let mut worst = 0.0f64;
    let probes = [-1.0, -0.5, 0.0, 0.5, 1.0];
    for &x in &probes {
        for &y in &probes {
            let i = ((x - grid.x0) / h).round() as usize;
            let j = ((y - grid.y0) / h).round() as usize;
            let reference = lp(grid.x(i), grid.y(j)) + pl(grid.x(i), grid.y(j));
            worst = worst.max((out.values[j * grid.nx + i] - reference).norm());
        }
    }
    worst
}

#[test]
fn composed_l_squared_p2_converges_to_nested_derivatives() {
    let errors: Vec<f64> = [0.04, 0.02, 0.01].iter().map(|&h| l_squared_p2_error(h)).collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() <= 0.3, "order {order} from {errors:?}");
    }
}

