//! Independent oracles shared by the integration tests. Nothing here calls
//! the closed-form bracket, the determining equations or the grid stencils.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use superint::catalog::PotentialEntry;
use superint::classical::{energy, eval_observable, PhasePoint};
use superint::integral::IntegralSpec;
use superint::sampling::{sample_domain, DEFAULT_MARGIN};

pub type C = Complex64;

/// Phase states with positions drawn from the entry's domain and momenta
/// uniform in `[-1, 1)`.
pub fn random_states(entry: &PotentialEntry, count: usize, seed: u64) -> Vec<PhasePoint> {
    let pts = sample_domain(&entry.domain, count, seed, 2.0 * DEFAULT_MARGIN).expect("domain samples");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    pts.iter()
        .map(|p| PhasePoint::new(p.x, p.y, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

fn shifted(s: &PhasePoint, axis: usize, d: f64) -> PhasePoint {
    let mut t = *s;
    match axis {
        0 => t.x += d,
        1 => t.y += d,
        2 => t.p1 += d,
        _ => t.p2 += d,
    }
    t
}

/// Fourth-order central derivative of `f` along one phase-space axis.
fn d_axis(f: &dyn Fn(&PhasePoint) -> f64, s: &PhasePoint, axis: usize, h: f64) -> f64 {
    let at = |k: f64| f(&shifted(s, axis, k * h));
    (8.0 * (at(1.0) - at(-1.0)) - (at(2.0) - at(-2.0))) / (12.0 * h)
}

/// `{H, X} = sum (dX/dq dH/dp - dX/dp dH/dq)` by finite differences of the
/// plain phase-space functions, with its largest term as a scale.
pub fn fd_bracket(entry: &PotentialEntry, spec: &IntegralSpec, s: &PhasePoint, h: f64) -> (f64, f64) {
    let x = |t: &PhasePoint| eval_observable(spec, t).expect("observable");
    let hm = |t: &PhasePoint| energy(entry, t).expect("energy");
    let step = |v: f64| h * (1.0 + v.abs());
    let terms = [
        d_axis(&x, s, 0, step(s.x)) * d_axis(&hm, s, 2, step(s.p1)),
        d_axis(&x, s, 1, step(s.y)) * d_axis(&hm, s, 3, step(s.p2)),
        -d_axis(&x, s, 2, step(s.p1)) * d_axis(&hm, s, 0, step(s.x)),
        -d_axis(&x, s, 3, step(s.p2)) * d_axis(&hm, s, 1, step(s.y)),
    ];
    let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    (terms.iter().sum(), scale)
}

/// Number of eigenvalues below `mu` of the symmetric tridiagonal matrix with
/// diagonal `d` and off-diagonal `e`, by the Sturm sequence of `LDL^T`.
pub fn sturm_count(d: &[f64], e: &[f64], mu: f64) -> usize {
    let mut count = 0;
    let mut q = d[0] - mu;
    for i in 0..d.len() {
        if i > 0 {
            let prev = if q == 0.0 { f64::EPSILON * (1.0 + mu.abs()) } else { q };
            q = d[i] - mu - e[i - 1] * e[i - 1] / prev;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest eigenvalue by bisection on the Sturm count, inside the
/// Gershgorin interval.
pub fn lowest_eigenvalue(d: &[f64], e: &[f64]) -> f64 {
    let off = |i: usize| {
        let l = if i > 0 { e[i - 1].abs() } else { 0.0 };
        let r = if i < e.len() { e[i].abs() } else { 0.0 };
        l + r
    };
    let mut lo = (0..d.len()).map(|i| d[i] - off(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..d.len()).map(|i| d[i] + off(i)).fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(d, e, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Eigenvector for an eigenvalue `lambda` by two steps of inverse iteration
/// with a tridiagonal (Thomas) solve, normalized to unit maximum.
pub fn eigenvector(d: &[f64], e: &[f64], lambda: f64) -> Vec<f64> {
    let n = d.len();
    let shift = lambda - 1e-10 * (1.0 + lambda.abs());
    let mut v = vec![1.0; n];
    for _ in 0..3 {
        let mut c = vec![0.0; n];
        let mut r = vec![0.0; n];
        let mut denom = d[0] - shift;
        c[0] = if n > 1 { e[0] / denom } else { 0.0 };
        r[0] = v[0] / denom;
        for i in 1..n {
            denom = d[i] - shift - e[i - 1] * c[i - 1];
            if i < n - 1 {
                c[i] = e[i] / denom;
            }
            r[i] = (v[i] - e[i - 1] * r[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            r[i] -= c[i] * r[i + 1];
        }
        let m = r.iter().fold(0.0f64, |m, x| if x.abs() > m.abs() { *x } else { m });
        v = r.iter().map(|x| x / m).collect();
    }
    v
}

pub type Wave = Box<dyn Fn(f64, f64) -> C + Send + Sync>;

const FD_STEP: f64 = 1e-2;

fn d_dx(f: &dyn Fn(f64, f64) -> C, x: f64, y: f64) -> C {
    let h = FD_STEP;
    ((f(x + h, y) - f(x - h, y)) * 8.0 - (f(x + 2.0 * h, y) - f(x - 2.0 * h, y))) / (12.0 * h)
}

fn d_dy(f: &dyn Fn(f64, f64) -> C, x: f64, y: f64) -> C {
    let h = FD_STEP;
    ((f(x, y + h) - f(x, y - h)) * 8.0 - (f(x, y + 2.0 * h) - f(x, y - 2.0 * h))) / (12.0 * h)
}

/// `L f = -i hbar (x f_y - y f_x)` as a closure over `f`.
pub fn angular(f: Wave, hbar: f64) -> Wave {
    Box::new(move |x, y| (d_dy(&*f, x, y) * x - d_dx(&*f, x, y) * y) * C::new(0.0, -hbar))
}

/// `p2 f = -i hbar f_y` as a closure over `f`.
pub fn momentum_y(f: Wave, hbar: f64) -> Wave {
    Box::new(move |x, y| d_dy(&*f, x, y) * C::new(0.0, -hbar))
}

/// `exp(-((x-cx)^2 / 2 sx^2 + (y-cy)^2 / 2 sy^2) + i (kx x + ky y))`.
pub fn gaussian(cx: f64, cy: f64, sx: f64, sy: f64, kx: f64, ky: f64) -> Wave {
    Box::new(move |x, y| {
        let a = -(x - cx).powi(2) / (2.0 * sx * sx) - (y - cy).powi(2) / (2.0 * sy * sy);
        C::from_polar(a.exp(), kx * x + ky * y)
    })
}
