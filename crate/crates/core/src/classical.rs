//! Classical evaluation of momentum-polynomial observables, their Poisson
//! bracket with `H = (p1^2 + p2^2)/2 + V`, and position-Verlet trajectories.

use std::io::Write;

use serde::Serialize;

use crate::catalog::{Family, PotentialEntry};
use crate::error::{Error, Result};
use crate::field::{Jet, Point, ScalarField};
use crate::integral::IntegralSpec;
use crate::sampling::DEFAULT_MARGIN;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
    pub p1: f64,
    pub p2: f64,
}

impl PhasePoint {
    pub const fn new(x: f64, y: f64, p1: f64, p2: f64) -> Self {
        PhasePoint { x, y, p1, p2 }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }

    pub fn angular_momentum(&self) -> f64 {
        self.x * self.p2 - self.y * self.p1
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.p1.is_finite() && self.p2.is_finite()
    }

    fn norm_inf(&self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.p1.abs()).max(self.p2.abs())
    }
}

fn powi(v: f64, n: u8) -> f64 {
    v.powi(n as i32)
}

/// `sum A L^i p1^j p2^k + g1 p1 + g2 p2 + g0` with plain products.
pub fn eval_observable(spec: &IntegralSpec, s: &PhasePoint) -> Result<f64> {
    let q = s.position();
    let l = s.angular_momentum();
    let lead: f64 = spec
        .leading
        .iter()
        .map(|(m, c)| c * powi(l, m.l) * powi(s.p1, m.p1) * powi(s.p2, m.p2))
        .sum();
    Ok(lead + spec.g1.value(q)? * s.p1 + spec.g2.value(q)? * s.p2 + spec.g0.value(q)?)
}

/// `H = (p1^2 + p2^2)/2 + V`.
pub fn energy(entry: &PotentialEntry, s: &PhasePoint) -> Result<f64> {
    Ok(0.5 * (s.p1 * s.p1 + s.p2 * s.p2) + entry.potential.value(s.position())?)
}

/// Jets (order 1) of the correction functions needed by the bracket.
#[derive(Clone, Copy, Debug)]
pub struct BracketJets {
    pub v: Jet,
    pub g1: Jet,
    pub g2: Jet,
    pub g0: Jet,
}

impl BracketJets {
    pub fn at(v: &dyn ScalarField, spec: &IntegralSpec, p: Point) -> Result<Self> {
        Ok(BracketJets {
            v: v.jet(p, 1)?,
            g1: spec.g1.jet(p, 1)?,
            g2: spec.g2.jet(p, 1)?,
            g0: spec.g0.jet(p, 1)?,
        })
    }
}

/// Terms of `sum_i (dX/dq_i p_i - dX/dp_i V_{q_i})`; their sum is the
/// bracket and the largest magnitude its scale.
pub fn poisson_bracket_terms(spec: &IntegralSpec, j: &BracketJets, s: &PhasePoint) -> Vec<f64> {
    let (x, y, p1, p2) = (s.x, s.y, s.p1, s.p2);
    let l = s.angular_momentum();
    let (vx, vy) = (j.v.vx(), j.v.vy());
    let mut terms = Vec::with_capacity(6 * spec.leading.len() + 6);
    for (m, c) in &spec.leading {
        let mono = powi(p1, m.p1) * powi(p2, m.p2);
        // d/dL of L^i and d/dp of p^j, p^k
        let dl = if m.l > 0 { m.l as f64 * powi(l, m.l - 1) } else { 0.0 };
        let lp = powi(l, m.l);
        let dp1 = if m.p1 > 0 { m.p1 as f64 * powi(p1, m.p1 - 1) * powi(p2, m.p2) } else { 0.0 };
        let dp2 = if m.p2 > 0 { m.p2 as f64 * powi(p1, m.p1) * powi(p2, m.p2 - 1) } else { 0.0 };
        // dX/dx p1 + dX/dy p2, with dL/dx = p2 and dL/dy = -p1, cancels
        // exactly for the leading part; only the momentum derivatives remain.
        terms.push(-c * (dl * (-y) * mono + lp * dp1) * vx);
        terms.push(-c * (dl * x * mono + lp * dp2) * vy);
    }
    terms.extend([
        j.g1.vx() * p1 * p1,
        j.g1.vy() * p1 * p2,
        j.g2.vx() * p2 * p1,
        j.g2.vy() * p2 * p2,
        j.g0.vx() * p1,
        j.g0.vy() * p2,
        -j.g1.v() * vx,
        -j.g2.v() * vy,
    ]);
    terms
}

/// `{H, X}` in the convention `sum (dX/dq_i p_i - dX/dp_i V_{q_i})`.
pub fn poisson_bracket_h(spec: &IntegralSpec, j: &BracketJets, s: &PhasePoint) -> f64 {
    poisson_bracket_terms(spec, j, s).iter().sum()
}

/// Smallest distance to the singular locus the orbit can reach, for the
/// families where energy and angular momentum bound it.
pub fn pericenter(entry: &PotentialEntry, s: &PhasePoint) -> Option<f64> {
    match entry.family {
        Family::Coulomb => {
            let alpha = entry.param("alpha")?;
            let e = energy(entry, s).ok()?;
            let l = s.angular_momentum();
            // turning points: E r^2 - alpha r - L^2/2 = 0
            let c = -0.5 * l * l;
            let roots: Vec<f64> = if e == 0.0 {
                vec![c / alpha]
            } else {
                let disc = alpha * alpha - 4.0 * e * c;
                if disc < 0.0 {
                    vec![]
                } else {
                    let sq = disc.sqrt();
                    vec![(alpha + sq) / (2.0 * e), (alpha - sq) / (2.0 * e)]
                }
            };
            let r = roots.into_iter().filter(|r| *r >= 0.0).fold(f64::INFINITY, f64::min);
            Some(if r.is_finite() { r } else { s.x.hypot(s.y) })
        }
        Family::InverseSq | Family::QuantumInverseSq | Family::QuantumX2V4 => {
            let a = match entry.family {
                Family::QuantumX2V4 => entry.hbar().powi(2),
                _ => entry.param("a")?,
            };
            if a > 0.0 {
                let ex = 0.5 * s.p1 * s.p1 + a / (s.x * s.x);
                Some((a / ex).sqrt())
            } else if s.x * s.p1 < 0.0 {
                Some(0.0)
            } else {
                Some(s.x.abs())
            }
        }
        _ => None,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryRecord {
    pub dt: f64,
    pub times: Vec<f64>,
    pub states: Vec<PhasePoint>,
    pub h_values: Vec<f64>,
    /// Monitored integrals by name.
    pub x_values: Vec<(String, Vec<f64>)>,
    /// Step at which the trajectory left the admissible domain.
    pub exited_at: Option<usize>,
}

impl TrajectoryRecord {
    fn series(&self) -> impl Iterator<Item = (&str, &[f64])> {
        std::iter::once(("H", self.h_values.as_slice()))
            .chain(self.x_values.iter().map(|(n, v)| (n.as_str(), v.as_slice())))
    }

    /// `max |Q(t) - Q(0)| / (1 + |Q(0)|)` for `H` and every monitored integral.
    pub fn drift(&self) -> Vec<(String, f64)> {
        self.series().map(|(n, v)| (n.to_string(), relative_drift(v))).collect()
    }

    /// Largest deviation from `Q(0)` in each half of the record, to spot
    /// secular growth.
    pub fn drift_halves(&self) -> Vec<(String, f64, f64)> {
        self.series()
            .map(|(n, v)| {
                let mid = v.len() / 2;
                let dev = |w: &[f64]| w.iter().fold(0.0f64, |m, q| m.max((q - v[0]).abs())) / (1.0 + v[0].abs());
                (n.to_string(), dev(&v[..mid]), dev(&v[mid..]))
            })
            .collect()
    }

    pub fn last(&self) -> &PhasePoint {
        self.states.last().expect("records hold the initial state")
    }

    /// CSV with header `t,x,y,p1,p2,H[,X_<name>...]`, 17 significant digits.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        let mut header = String::from("t,x,y,p1,p2,H");
        for (name, _) in &self.x_values {
            header.push_str(",X_");
            header.push_str(name);
        }
        writeln!(out, "{header}")?;
        for (i, s) in self.states.iter().enumerate() {
            let mut row = format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.times[i], s.x, s.y, s.p1, s.p2, self.h_values[i]
            );
            for (_, v) in &self.x_values {
                row.push_str(&format!(",{:.16e}", v[i]));
            }
            writeln!(out, "{row}")?;
        }
        Ok(())
    }
}

pub fn relative_drift(v: &[f64]) -> f64 {
    match v.first() {
        Some(q0) => v.iter().fold(0.0f64, |m, q| m.max((q - q0).abs())) / (1.0 + q0.abs()),
        None => 0.0,
    }
}

/// Integrals of `entry` that are conserved classically.
pub fn classical_monitors(entry: &PotentialEntry) -> Vec<IntegralSpec> {
    entry.integrals.iter().filter(|s| s.kind.classical()).cloned().collect()
}

const INSTABILITY: f64 = 1e12;

/// Position-Verlet evolution of `H = (p1^2 + p2^2)/2 + V`, recording `H` and
/// every monitored observable at each step. A negative `dt` runs backwards.
pub fn integrate(
    entry: &PotentialEntry,
    state0: PhasePoint,
    dt: f64,
    n_steps: usize,
    monitors: &[IntegralSpec],
) -> Result<TrajectoryRecord> {
    if !(dt.is_finite() && dt != 0.0) {
        return Err(Error::Precondition("time step must be finite and nonzero".into()));
    }
    if !state0.is_finite() || !entry.admissible(state0.position(), DEFAULT_MARGIN) {
        return Err(Error::Domain(format!(
            "initial position ({}, {}) is outside the domain",
            state0.x, state0.y
        )));
    }
    if let Some(r) = pericenter(entry, &state0) {
        if r < DEFAULT_MARGIN {
            return Err(Error::Pericenter {
                pericenter: r,
                margin: DEFAULT_MARGIN,
            });
        }
    }
    let mut rec = TrajectoryRecord {
        dt,
        times: Vec::with_capacity(n_steps + 1),
        states: Vec::with_capacity(n_steps + 1),
        h_values: Vec::with_capacity(n_steps + 1),
        x_values: monitors
            .iter()
            .map(|m| (m.name.clone(), Vec::with_capacity(n_steps + 1)))
            .collect(),
        exited_at: None,
    };
    let record = |rec: &mut TrajectoryRecord, step: usize, s: PhasePoint| -> Result<()> {
        rec.times.push(step as f64 * dt);
        rec.states.push(s);
        rec.h_values.push(energy(entry, &s)?);
        for (m, (_, v)) in monitors.iter().zip(rec.x_values.iter_mut()) {
            v.push(eval_observable(m, &s)?);
        }
        Ok(())
    };
    record(&mut rec, 0, state0)?;
    let mut s = state0;
    let half = 0.5 * dt;
    for step in 1..=n_steps {
        let mid = Point::new(s.x + half * s.p1, s.y + half * s.p2);
        if !entry.admissible(mid, 0.0) {
            rec.exited_at = Some(step);
            break;
        }
        let g = entry.potential.jet(mid, 1)?;
        let p1 = s.p1 - dt * g.vx();
        let p2 = s.p2 - dt * g.vy();
        let next = PhasePoint::new(mid.x + half * p1, mid.y + half * p2, p1, p2);
        if !next.is_finite() || next.norm_inf() > INSTABILITY {
            return Err(Error::Instability { step });
        }
        if !entry.admissible(next.position(), 0.0) {
            rec.exited_at = Some(step);
            break;
        }
        s = next;
        record(&mut rec, step, s)?;
    }
    Ok(rec)
}
