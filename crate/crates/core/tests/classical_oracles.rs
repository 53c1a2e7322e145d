mod common;

use superint::catalog::{instantiate, Family, Params, PotentialEntry};
use superint::classical::{integrate, poisson_bracket_terms, BracketJets, PhasePoint};
use superint::integral::{CoeffRef, IntegralSpec};
use superint::quantum_grid::corrupted_control;

fn entries() -> Vec<PotentialEntry> {
    [Family::Coulomb, Family::Oscillator, Family::LinearAx, Family::InverseSq, Family::Free]
        .iter()
        .map(|&f| instantiate(f, &Params::new()).unwrap())
        .collect()
}

fn closed_bracket(e: &PotentialEntry, spec: &IntegralSpec, s: &PhasePoint) -> (f64, f64) {
    let jets = BracketJets::at(&e.potential, spec, s.position()).unwrap();
    let terms = poisson_bracket_terms(spec, &jets, s);
    (terms.iter().sum(), terms.iter().fold(0.0f64, |m, t| m.max(t.abs())))
}

#[test]
fn brackets_of_broken_specs_match_finite_differences() {
    // nonzero brackets, so the comparison is not between two zeros
    for e in entries() {
        let states = common::random_states(&e, 50, 11);
        for spec in e.integrals.iter().filter(|s| s.kind.classical()) {
            let mut broken: Vec<IntegralSpec> = corrupted_control(spec).into_iter().collect();
            broken.extend(spec.coefficients().into_iter().map(|(c, _)| spec.perturbed(c, 1.3)));
            for b in &broken {
                for s in &states {
                    let (closed, scale) = closed_bracket(&e, b, s);
                    let (fd, fd_scale) = common::fd_bracket(&e, b, s, 1e-5);
                    let tol = 1e-6 * (1.0 + scale.max(fd_scale));
                    assert!(
                        (closed - fd).abs() <= tol,
                        "{} {}: {closed} vs {fd} at {s:?}",
                        e.family,
                        b.name
                    );
                }
            }
        }
    }
}

#[test]
fn corrupted_inverse_square_correction_is_visible() {
    let e = instantiate(Family::InverseSq, &Params::new()).unwrap();
    let x1 = e.integral("X1").unwrap();
    // stored coefficient 2a becomes 3a
    let bad = x1.perturbed(CoeffRef::G2(0), 1.5);
    let s = PhasePoint::new(1.0, 1.0, 0.3, 0.7);
    let (b, _) = closed_bracket(&e, &bad, &s);
    assert!(b.abs() >= 1e-2, "{b}");
    let (good, _) = closed_bracket(&e, x1, &s);
    assert!(good.abs() < 1e-12, "{good}");
}

fn end_state(e: &PotentialEntry, s0: PhasePoint, t: f64, dt: f64) -> PhasePoint {
    let n = (t / dt).round() as usize;
    *integrate(e, s0, dt, n, &[]).unwrap().last()
}

fn distance(a: &PhasePoint, b: &PhasePoint) -> f64 {
    [a.x - b.x, a.y - b.y, a.p1 - b.p1, a.p2 - b.p2].iter().map(|d| d * d).sum::<f64>().sqrt()
}

#[test]
fn leapfrog_converges_at_second_order() {
    let cases = [
        (Family::Oscillator, PhasePoint::new(1.0, 0.2, 0.0, 0.9)),
        (Family::Coulomb, PhasePoint::new(1.0, 0.0, 0.0, 0.9)),
        (Family::InverseSq, PhasePoint::new(1.0, 0.2, -0.3, 0.5)),
    ];
    for (f, s0) in cases {
        let e = instantiate(f, &Params::new()).unwrap();
        let dt = 0.01;
        let reference = end_state(&e, s0, 2.0, dt / 64.0);
        let coarse = distance(&end_state(&e, s0, 2.0, dt), &reference);
        let fine = distance(&end_state(&e, s0, 2.0, dt / 2.0), &reference);
        let ratio = coarse / fine;
        assert!((ratio - 4.0).abs() <= 0.8, "{f}: error ratio {ratio}");
    }
}

#[test]
fn energy_error_does_not_grow() {
    let e = instantiate(Family::Oscillator, &Params::new()).unwrap();
    let rec = integrate(&e, PhasePoint::new(1.0, 0.0, 0.0, 0.9), 1e-3, 100_000, &[]).unwrap();
    let (_, first, second) = rec.drift_halves().remove(0);
    assert!(second <= 1.2 * first, "{first} -> {second}");
}
