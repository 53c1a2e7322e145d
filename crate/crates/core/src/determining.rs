//! Pointwise residuals of the determining equations for integrals of motion
//! and of the compatibility conditions derived from them.
//!
//! For a third-order integral with leading coefficients `A` the equations
//! are written with the polynomials `f1..f4`:
//!
//! ```text
//! 0       = g1 Vx + g2 Vy - hbar^2/4 B
//! g1_x    = 3 f1 Vx + f2 Vy                    (h1)
//! g2_y    = f3 Vx + 3 f4 Vy                    (h2)
//! g1_y + g2_x = 2 (f2 Vx + f3 Vy)              (h3)
//! B = f1 Vxxx + f2 Vxxy + f3 Vxyy + f4 Vyyy + 8 A300 (x Vy - y Vx)
//!     + 2 (A210 Vx + A201 Vy)
//! ```
//!
//! With `hbar = 0` the first equation is the classical one. Each residual
//! carries the magnitude of its largest constituent term as a scale.

use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{EllipticConstants, PotentialEntry};
use crate::error::{Error, Result};
use crate::field::{Jet, Point, ScalarField};
use crate::integral::{ACoeffs, IntegralSpec, Mechanics, Monomial};
use crate::sampling::SampleSet;
use crate::taylor::Series;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Residual {
    pub value: f64,
    /// Largest absolute term entering the residual.
    pub scale: f64,
}

impl Residual {
    pub fn from_terms(terms: &[f64]) -> Self {
        Residual {
            value: terms.iter().sum(),
            scale: max_abs(terms),
        }
    }

    pub fn relative(&self) -> f64 {
        self.value.abs() / (1.0 + self.scale)
    }
}

fn max_abs(terms: &[f64]) -> f64 {
    terms.iter().fold(0.0f64, |m, t| m.max(t.abs()))
}

/// Values and partials of `f1..f4` at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct FPolyValues {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub f4: f64,
    pub f1y: f64,
    pub f1yy: f64,
    pub f2x: f64,
    pub f2y: f64,
    pub f2xy: f64,
    pub f2yy: f64,
    pub f3x: f64,
    pub f3y: f64,
    pub f3xx: f64,
    pub f3xy: f64,
    pub f4x: f64,
    pub f4xx: f64,
}

struct Coeffs {
    a300: f64,
    a210: f64,
    a201: f64,
    a120: f64,
    a111: f64,
    a102: f64,
    a030: f64,
    a021: f64,
    a012: f64,
    a003: f64,
}

impl From<&ACoeffs> for Coeffs {
    fn from(a: &ACoeffs) -> Self {
        let [a300, a210, a201, a120, a111, a102, a030, a021, a012, a003] = a.0;
        Coeffs {
            a300,
            a210,
            a201,
            a120,
            a111,
            a102,
            a030,
            a021,
            a012,
            a003,
        }
    }
}

pub fn f_polys(a: &ACoeffs, p: Point) -> FPolyValues {
    let c = Coeffs::from(a);
    let (x, y) = (p.x, p.y);
    FPolyValues {
        f1: -c.a300 * y * y * y + c.a210 * y * y - c.a120 * y + c.a030,
        f2: 3.0 * c.a300 * x * y * y - 2.0 * c.a210 * x * y + c.a201 * y * y + c.a120 * x - c.a111 * y
            + c.a021,
        f3: -3.0 * c.a300 * x * x * y + c.a210 * x * x - 2.0 * c.a201 * x * y + c.a111 * x - c.a102 * y
            + c.a012,
        f4: c.a300 * x * x * x + c.a201 * x * x + c.a102 * x + c.a003,
        f1y: -3.0 * c.a300 * y * y + 2.0 * c.a210 * y - c.a120,
        f1yy: -6.0 * c.a300 * y + 2.0 * c.a210,
        f2x: 3.0 * c.a300 * y * y - 2.0 * c.a210 * y + c.a120,
        f2y: 6.0 * c.a300 * x * y - 2.0 * c.a210 * x + 2.0 * c.a201 * y - c.a111,
        f2xy: 6.0 * c.a300 * y - 2.0 * c.a210,
        f2yy: 6.0 * c.a300 * x + 2.0 * c.a201,
        f3x: -6.0 * c.a300 * x * y + 2.0 * c.a210 * x - 2.0 * c.a201 * y + c.a111,
        f3y: -3.0 * c.a300 * x * x - 2.0 * c.a201 * x - c.a102,
        f3xx: -6.0 * c.a300 * y + 2.0 * c.a210,
        f3xy: -6.0 * c.a300 * x - 2.0 * c.a201,
        f4x: 3.0 * c.a300 * x * x + 2.0 * c.a201 * x + c.a102,
        f4xx: 6.0 * c.a300 * x + 2.0 * c.a201,
    }
}

/// `f1..f4` as truncated series in the coordinates.
pub fn f_series(a: &ACoeffs, x: &Series, y: &Series) -> [Series; 4] {
    let c = Coeffs::from(a);
    let (x, y) = (*x, *y);
    [
        y * y * y * (-c.a300) + y * y * c.a210 - y * c.a120 + c.a030,
        x * y * y * (3.0 * c.a300) - x * y * (2.0 * c.a210) + y * y * c.a201 + x * c.a120 - y * c.a111
            + c.a021,
        x * x * y * (-3.0 * c.a300) + x * x * c.a210 - x * y * (2.0 * c.a201) + x * c.a111 - y * c.a102
            + c.a012,
        x * x * x * c.a300 + x * x * c.a201 + x * c.a102 + c.a003,
    ]
}

/// Terms of `B`, the bracket multiplying `-hbar^2/4` in the first quantum
/// equation.
fn b_terms(a: &ACoeffs, f: &FPolyValues, v: &Jet, p: Point) -> [f64; 7] {
    let c = Coeffs::from(a);
    [
        f.f1 * v.vxxx(),
        f.f2 * v.vxxy(),
        f.f3 * v.vxyy(),
        f.f4 * v.vyyy(),
        8.0 * c.a300 * (p.x * v.vy() - p.y * v.vx()),
        2.0 * c.a210 * v.vx(),
        2.0 * c.a201 * v.vy(),
    ]
}

fn third_order_residuals(
    a: &ACoeffs,
    v: &Jet,
    g1: &Jet,
    g2: &Jet,
    hbar: f64,
    p: Point,
) -> [Residual; 4] {
    let f = f_polys(a, p);
    let q = -0.25 * hbar * hbar;
    let (vx, vy) = (v.vx(), v.vy());
    let mut e1 = vec![g1.v() * vx, g2.v() * vy];
    if hbar != 0.0 {
        e1.extend(b_terms(a, &f, v, p).iter().map(|t| q * t));
    }
    [
        Residual::from_terms(&e1),
        Residual::from_terms(&[g1.vx(), -3.0 * f.f1 * vx, -f.f2 * vy]),
        Residual::from_terms(&[g2.vy(), -f.f3 * vx, -3.0 * f.f4 * vy]),
        Residual::from_terms(&[g1.vy(), g2.vx(), -2.0 * f.f2 * vx, -2.0 * f.f3 * vy]),
    ]
}

/// The four classical determining equations (LHS - RHS).
pub fn residual_classical(a: &ACoeffs, v: &Jet, g1: &Jet, g2: &Jet, p: Point) -> [Residual; 4] {
    third_order_residuals(a, v, g1, g2, 0.0, p)
}

/// The four quantum determining equations; `v` must be of order 3.
pub fn residual_quantum(
    a: &ACoeffs,
    v: &Jet,
    g1: &Jet,
    g2: &Jet,
    hbar: f64,
    p: Point,
) -> [Residual; 4] {
    third_order_residuals(a, v, g1, g2, hbar, p)
}

/// The linear third-order compatibility condition of the last three
/// equations, with all ten terms.
pub fn residual_compatlin(a: &ACoeffs, v: &Jet, p: Point) -> Residual {
    let f = f_polys(a, p);
    Residual::from_terms(&[
        -f.f3 * v.vxxx(),
        (2.0 * f.f2 - 3.0 * f.f4) * v.vxxy(),
        (-3.0 * f.f1 + 2.0 * f.f3) * v.vxyy(),
        -f.f2 * v.vyyy(),
        2.0 * (f.f2y - f.f3x) * v.vxx(),
        2.0 * (-3.0 * f.f1y + f.f2x + f.f3y - 3.0 * f.f4x) * v.vxy(),
        2.0 * (-f.f2y + f.f3x) * v.vyy(),
        (-3.0 * f.f1yy + 2.0 * f.f2xy - f.f3xx) * v.vx(),
        (-f.f2yy + 2.0 * f.f3xy - 3.0 * f.f4xx) * v.vy(),
    ])
}

/// `B`: zero exactly when a classical integral with these `A` survives
/// quantization unchanged.
pub fn residual_condnouv(a: &ACoeffs, v: &Jet, p: Point) -> Residual {
    let f = f_polys(a, p);
    Residual::from_terms(&b_terms(a, &f, v, p))
}

/// The coefficients of `y^0` and `y^1` of the linear compatibility condition
/// for `V = V(x)`.
pub fn residual_compatx(a: &ACoeffs, v: &Jet, x: f64) -> [Residual; 2] {
    let c = Coeffs::from(a);
    let (v1, v2, v3) = (v.vx(), v.vxx(), v.vxxx());
    [
        Residual::from_terms(&[
            (c.a210 * x * x + c.a111 * x + c.a012) * v3,
            4.0 * (2.0 * c.a210 * x + c.a111) * v2,
            12.0 * c.a210 * v1,
        ]),
        Residual::from_terms(&[
            (3.0 * c.a300 * x * x + 2.0 * c.a201 * x + c.a102) * v3,
            4.0 * (6.0 * c.a300 * x + 2.0 * c.a201) * v2,
            36.0 * c.a300 * v1,
        ]),
    ]
}

/// `hbar^2 V'^2 - (4 V^3 + alpha V^2 + beta V + gamma)` for `V = V(x)`.
pub fn residual_elliptique(v: &Jet, c: &EllipticConstants, hbar: f64) -> Residual {
    let (v0, v1) = (v.v(), v.vx());
    Residual::from_terms(&[
        hbar * hbar * v1 * v1,
        -4.0 * v0 * v0 * v0,
        -c.alpha * v0 * v0,
        -c.beta * v0,
        -c.gamma,
    ])
}

/// Coefficients `F20, F11, F02` of `p1^2, p1 p2, p2^2` in a second-order
/// leading part.
fn second_order_f(spec: &IntegralSpec, p: Point) -> (f64, f64, f64) {
    let b = |l, p1, p2| spec.leading_coeff(Monomial::new(l, p1, p2));
    let (x, y) = (p.x, p.y);
    let (b200, b110, b101) = (b(2, 0, 0), b(1, 1, 0), b(1, 0, 1));
    (
        b200 * y * y - b110 * y + b(0, 2, 0),
        -2.0 * b200 * x * y + b110 * x - b101 * y + b(0, 1, 1),
        b200 * x * x + b101 * x + b(0, 0, 2),
    )
}

/// The two equations for a second-order integral (identical in both
/// mechanics).
pub fn residual_second_order(spec: &IntegralSpec, v: &Jet, g0: &Jet, p: Point) -> [Residual; 2] {
    let (f20, f11, f02) = second_order_f(spec, p);
    let (vx, vy) = (v.vx(), v.vy());
    [
        Residual::from_terms(&[g0.vx(), -2.0 * f20 * vx, -f11 * vy]),
        Residual::from_terms(&[g0.vy(), -f11 * vx, -2.0 * f02 * vy]),
    ]
}

/// `{H, b L + c p1 + d p2}`.
pub fn residual_first_order(spec: &IntegralSpec, v: &Jet, p: Point) -> Residual {
    let b = spec.leading_coeff(Monomial::new(1, 0, 0));
    let c = spec.leading_coeff(Monomial::new(0, 1, 0));
    let d = spec.leading_coeff(Monomial::new(0, 0, 1));
    Residual::from_terms(&[b * p.y * v.vx(), -b * p.x * v.vy(), -c * v.vx(), -d * v.vy()])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Mode {
    Classical,
    Quantum { hbar: f64 },
}

impl Mode {
    pub fn hbar(self) -> f64 {
        match self {
            Mode::Classical => 0.0,
            Mode::Quantum { hbar } => hbar,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Classical => "classical",
            Mode::Quantum { .. } => "quantum",
        }
    }
}

/// Whether `spec` is checked in `mode`, and with which `hbar`.
pub fn applicable(spec: &IntegralSpec, mode: Mode) -> Option<Mode> {
    match (spec.kind, mode) {
        (Mechanics::Classical, _) => Some(Mode::Classical),
        (Mechanics::Quantum, Mode::Classical) => None,
        (_, m) => Some(m),
    }
}

/// All determining-equation residuals of `spec` at `p`, labelled.
pub fn spec_residuals(
    v: &dyn ScalarField,
    spec: &IntegralSpec,
    p: Point,
    mode: Mode,
) -> Result<Vec<(&'static str, Residual)>> {
    match spec.order {
        1 => {
            let vj = v.jet(p, 1)?;
            Ok(vec![("e1", residual_first_order(spec, &vj, p))])
        }
        2 => {
            let vj = v.jet(p, 1)?;
            let g0 = spec.g0.jet(p, 1)?;
            let [e1, e2] = residual_second_order(spec, &vj, &g0, p);
            Ok(vec![("e1", e1), ("e2", e2)])
        }
        3 => {
            let vj = v.jet(p, 3)?;
            let g1 = spec.g1.jet(p, 1)?;
            let g2 = spec.g2.jet(p, 1)?;
            let a = spec.a_coeffs();
            let r = residual_quantum(&a, &vj, &g1, &g2, mode.hbar(), p);
            Ok(vec![("e1", r[0]), ("e2", r[1]), ("e3", r[2]), ("e4", r[3])])
        }
        n => Err(Error::Precondition(format!("unsupported integral order {n}"))),
    }
}

/// Which φ-derivative each of the undefined `h4, h5, h6` stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HMapping {
    pub h4: usize,
    pub h5: usize,
    pub h6: usize,
}

impl Default for HMapping {
    /// `h4 <- h1`, `h5 <- h2`, `h6 <- h3`.
    fn default() -> Self {
        HMapping { h4: 0, h5: 1, h6: 2 }
    }
}

impl HMapping {
    pub fn parse(s: &str) -> Result<Self> {
        let idx: Vec<usize> = s
            .split(',')
            .map(|t| match t.trim() {
                "h1" => Ok(0),
                "h2" => Ok(1),
                "h3" => Ok(2),
                other => Err(Error::InvalidParams(format!("unknown h mapping target `{other}`"))),
            })
            .collect::<Result<_>>()?;
        match idx[..] {
            [h4, h5, h6] => Ok(HMapping { h4, h5, h6 }),
            _ => Err(Error::InvalidParams("h mapping needs three entries, e.g. h1,h2,h3".into())),
        }
    }
}

/// Partials `[v, x, y, xx, xy, yy]` of a derived field.
pub type Partials2 = [f64; 6];

fn partials2(s: &Series) -> Partials2 {
    [
        s.value(),
        s.coeff(1, 0),
        s.coeff(0, 1),
        2.0 * s.coeff(2, 0),
        s.coeff(1, 1),
        2.0 * s.coeff(0, 2),
    ]
}

/// Auxiliary fields of the nonlinear compatibility conditions at a point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NonlinearAux {
    pub phi1: Partials2,
    pub phi2: Partials2,
    /// `h1, h2, h3` with their first partials `[v, x, y]`.
    pub h: [[f64; 3]; 3],
    pub d1: bool,
    pub d2: bool,
}

pub const DEGENERACY_TOL: f64 = 1e-8;

/// Builds `phi1 = Vy/Vx`, `phi2 = -hbar^2 B / (4 Vx)` and `h1..h3` with the
/// partials the conditions need, by series arithmetic on the order-5 jet.
pub fn nonlinear_aux(v: &dyn ScalarField, a: &ACoeffs, hbar: f64, p: Point, tol: f64) -> Result<NonlinearAux> {
    let jet = v.jet(p, 5)?;
    if jet.vx() == 0.0 {
        return Err(Error::Domain(format!(
            "V_x vanishes at ({}, {}); phi1 is undefined",
            p.x, p.y
        )));
    }
    let s = jet.to_series();
    let (vx, vy) = (s.dx(), s.dy());
    let (vxx, vxy, vyy) = (vx.dx(), vx.dy(), vy.dy());
    let (vxxx, vxxy, vxyy, vyyy) = (vxx.dx(), vxx.dy(), vxy.dy(), vyy.dy());
    let x = Series::var_x(p.x, 2);
    let y = Series::var_y(p.y, 2);
    let [f1, f2, f3, f4] = f_series(a, &x, &y);
    let c = Coeffs::from(a);
    let vx2 = vx.truncate(2);
    let vy2 = vy.truncate(2);
    let b = f1 * vxxx + f2 * vxxy + f3 * vxyy + f4 * vyyy + (x * vy2 - y * vx2) * (8.0 * c.a300)
        + vx2 * (2.0 * c.a210)
        + vy2 * (2.0 * c.a201);
    let phi1 = (vy2 / vx2).truncate(2);
    let phi2 = if hbar == 0.0 {
        Series::constant(0.0, 2)
    } else {
        b * (-hbar * hbar) / (vx2 * 4.0)
    };
    let h1 = f1 * vx2 * 3.0 + f2 * vy2;
    let h2 = f3 * vx2 + f4 * vy2 * 3.0;
    let h3 = (f2 * vx2 + f3 * vy2) * 2.0;
    let h = [h1, h2, h3].map(|hs| [hs.value(), hs.coeff(1, 0), hs.coeff(0, 1)]);
    let phi1 = partials2(&phi1);
    let phi2 = partials2(&phi2);
    let [f, fx, fy, _, fxy, _] = phi1;
    let d1_terms = [fx, f * fy];
    let d2_terms = [fxy * f, -fx * fy];
    let d1 = d1_terms.iter().sum::<f64>().abs() <= tol * (1.0 + max_abs(&d1_terms));
    let d2 = d2_terms.iter().sum::<f64>().abs() <= tol * (1.0 + max_abs(&d2_terms));
    if !(phi1.iter().chain(phi2.iter()).all(|v| v.is_finite())) {
        return Err(Error::Evaluation("non-finite phi partials".into()));
    }
    Ok(NonlinearAux { phi1, phi2, h, d1, d2 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Compatnl {
    /// One of the nondegeneracy assumptions fails; the condition does not apply.
    Degenerate,
    Value(f64),
}

/// One of the three nonlinear compatibility conditions (LHS - RHS).
/// Experimental: `h4..h6` follow the configured mapping.
pub fn residual_compatnl(aux: &NonlinearAux, variant: u8, map: HMapping) -> Result<Compatnl> {
    if !(1..=3).contains(&variant) {
        return Err(Error::InvalidParams(format!("compatnl variant {variant}")));
    }
    if aux.d1 || aux.d2 {
        return Ok(Compatnl::Degenerate);
    }
    let [f, fx, fy, fxx, fxy, fyy] = aux.phi1;
    let [_, gx, gy, gxx, gxy, gyy] = aux.phi2;
    let [_, h2, h3] = aux.h;
    let (h4, h5, h6) = (aux.h[map.h4], aux.h[map.h5], aux.h[map.h6]);
    let d = fx + f * fy;
    let dx = fxx + fx * fy + f * fxy;
    let dy = fxy + fy * fy + f * fyy;
    let value = match variant {
        1 => {
            let m = h3[0] * f + h2[0] * f * f + f * gy + gx + h4[0];
            let mx = h3[1] * f + h3[0] * fx + h2[1] * f * f + 2.0 * h2[0] * f * fx + fx * gy + f * gxy + gxx
                + h4[1];
            let n = f * m;
            let nx = fx * m + f * mx;
            -gx + (nx * d - n * dx) / (d * d) - h4[0]
        }
        2 => {
            let n = f * f * h5[0] + f * gy + f * h6[0] + gx + h4[0];
            let ny = 2.0 * f * fy * h5[0] + f * f * h5[2] + fy * gy + f * gyy + fy * h6[0] + f * h6[2] + gxy
                + h4[2];
            (ny * d - n * dy) / (d * d) + h5[0]
        }
        _ => {
            let lhs = h4[0] * (fxy + fy * fy)
                + h5[0] * (f * f * fxy - fx * fx - 2.0 * f * fx * fy)
                + h6[0] * (f * fxy - fx * fy)
                - (h4[2] + f * h5[1]) * d;
            let rhs = -gx * (fxy + fy * fy) + gy * (fx * fy - fxy * f) + gxy * d;
            lhs - rhs
        }
    };
    Ok(Compatnl::Value(value))
}

/// Statistics of one residual over a sample set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub equation: String,
    pub max_abs: f64,
    pub rms: f64,
    /// Largest term magnitude over the sample.
    pub scale: f64,
    /// Largest pointwise `|r| / (1 + local scale)`; decides `pass`.
    pub max_rel: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ResidualReport {
    pub fn from_residuals(equation: &str, rs: &[Residual], seed: u64, tolerance: f64) -> Self {
        let n = rs.len().max(1) as f64;
        let max_abs = rs.iter().fold(0.0f64, |m, r| m.max(r.value.abs()));
        let rms = (rs.iter().map(|r| r.value * r.value).sum::<f64>() / n).sqrt();
        let scale = rs.iter().fold(0.0f64, |m, r| m.max(r.scale));
        let max_rel = rs.iter().fold(0.0f64, |m, r| m.max(r.relative()));
        ResidualReport {
            equation: equation.to_string(),
            max_abs,
            rms,
            scale,
            max_rel,
            n_samples: rs.len(),
            seed,
            tolerance,
            pass: max_rel <= tolerance && rs.iter().all(|r| r.value.is_finite()),
        }
    }
}

/// What to evaluate in a campaign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CampaignOptions {
    pub mode: Mode,
    pub tolerance: f64,
    /// Also check the linear compatibility condition of third-order specs.
    pub compat: bool,
    /// Also check that classical-and-quantum third-order specs survive
    /// quantization unchanged (`B = 0`).
    pub hbar_compat: bool,
}

impl CampaignOptions {
    pub fn new(mode: Mode, tolerance: f64) -> Self {
        CampaignOptions {
            mode,
            tolerance,
            compat: true,
            hbar_compat: true,
        }
    }
}

/// Evaluates every applicable residual of every spec over the sample.
/// Points are processed in parallel and reduced in sample order.
pub fn run_campaign(
    entry: &PotentialEntry,
    specs: &[IntegralSpec],
    samples: &SampleSet,
    opts: CampaignOptions,
) -> Result<Vec<ResidualReport>> {
    let mut reports = vec![];
    for spec in specs {
        let Some(mode) = applicable(spec, opts.mode) else {
            continue;
        };
        let third = spec.order == 3;
        let with_compat = third && opts.compat;
        let with_hbar = third && opts.hbar_compat && spec.kind == Mechanics::Both;
        let a = if third { spec.a_coeffs() } else { ACoeffs::zero() };
        let rows: Vec<Vec<(String, Residual)>> = samples
            .points
            .par_iter()
            .map(|&p| {
                let mut row: Vec<(String, Residual)> = spec_residuals(&entry.potential, spec, p, mode)?
                    .into_iter()
                    .map(|(name, r)| (format!("{}:{}:{}", spec.name, mode.name(), name), r))
                    .collect();
                if with_compat || with_hbar {
                    let vj = entry.potential.jet(p, 3)?;
                    if with_compat {
                        row.push((format!("{}:compat_linear", spec.name), residual_compatlin(&a, &vj, p)));
                    }
                    if with_hbar {
                        row.push((format!("{}:hbar_compat", spec.name), residual_condnouv(&a, &vj, p)));
                    }
                }
                Ok(row)
            })
            .collect::<Result<_>>()?;
        let Some(first) = rows.first() else {
            continue;
        };
        for (i, (name, _)) in first.iter().enumerate() {
            let column: Vec<Residual> = rows.iter().map(|row| row[i].1).collect();
            reports.push(ResidualReport::from_residuals(name, &column, samples.seed, opts.tolerance));
        }
    }
    Ok(reports)
}

/// Gap between the quantum residuals at a small `hbar` and the classical
/// residuals of every spec, reported per equation as
/// `{spec}:classical_limit:{e}`.
pub fn classical_limit_campaign(
    entry: &PotentialEntry,
    specs: &[IntegralSpec],
    samples: &SampleSet,
    hbar: f64,
    tolerance: f64,
) -> Result<Vec<ResidualReport>> {
    let mut reports = vec![];
    for spec in specs {
        let rows: Vec<Vec<(&'static str, Residual)>> = samples
            .points
            .par_iter()
            .map(|&p| {
                let q = spec_residuals(&entry.potential, spec, p, Mode::Quantum { hbar })?;
                let c = spec_residuals(&entry.potential, spec, p, Mode::Classical)?;
                Ok(q.iter()
                    .zip(&c)
                    .map(|((name, rq), (_, rc))| {
                        let gap = Residual {
                            value: rq.value - rc.value,
                            scale: rq.scale.max(rc.scale),
                        };
                        (*name, gap)
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        let Some(first) = rows.first() else {
            continue;
        };
        for (i, (name, _)) in first.iter().enumerate() {
            let column: Vec<Residual> = rows.iter().map(|row| row[i].1).collect();
            let label = format!("{}:classical_limit:{name}", spec.name);
            reports.push(ResidualReport::from_residuals(&label, &column, samples.seed, tolerance));
        }
    }
    Ok(reports)
}

/// `hbar^2 V'^2 - (4V^3 + alpha V^2 + beta V + gamma)` over the sample, for
/// entries that carry elliptic constants.
pub fn elliptic_closure_report(
    entry: &PotentialEntry,
    samples: &SampleSet,
    tolerance: f64,
) -> Result<Option<ResidualReport>> {
    let Some(c) = entry.elliptic_constants else {
        return Ok(None);
    };
    let hbar = entry.hbar();
    let column: Vec<Residual> = samples
        .points
        .par_iter()
        .map(|&p| Ok(residual_elliptique(&entry.potential.jet(p, 1)?, &c, hbar)))
        .collect::<Result<_>>()?;
    Ok(Some(ResidualReport::from_residuals("elliptic_closure", &column, samples.seed, tolerance)))
}

/// Largest determining residual of `spec` over `points`, in absolute terms.
pub fn max_abs_residual(entry: &PotentialEntry, spec: &IntegralSpec, points: &[Point], mode: Mode) -> Result<f64> {
    let per_point: Vec<f64> = points
        .par_iter()
        .map(|&p| {
            Ok(spec_residuals(&entry.potential, spec, p, mode)?
                .iter()
                .fold(0.0f64, |m, (_, r)| m.max(r.value.abs())))
        })
        .collect::<Result<_>>()?;
    Ok(per_point.into_iter().fold(0.0, f64::max))
}
