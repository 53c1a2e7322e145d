//! Scalar fields on the plane and their derivative jets.
//!
//! Every residual in this crate is assembled from [`Jet`]s: the value and all
//! partial derivatives up to some order at one point. Analytic fields build
//! jets by propagating a truncated Taylor series through a closed-form
//! expression; numeric fields fall back to central differences ([`fd_jet`]),
//! which also serves as the independent oracle for the analytic path.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::taylor::{index, terms, Series, MAX_ORDER, MAX_TERMS};

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point { x, y }
    }
}

/// Value and partial derivatives `d^(a+b) f / dx^a dy^b` for `a + b <= order`.
#[derive(Clone, Copy, PartialEq)]
pub struct Jet {
    order: usize,
    partials: [f64; MAX_TERMS],
}

impl Jet {
    pub fn zero(order: usize) -> Self {
        assert!(order <= MAX_ORDER);
        Jet {
            order,
            partials: [0.0; MAX_TERMS],
        }
    }

    /// Converts normalized Taylor coefficients into partial derivatives.
    pub fn from_series(s: &Series) -> Self {
        let mut jet = Jet::zero(s.order());
        for t in 0..=s.order() {
            for b in 0..=t {
                let a = t - b;
                jet.partials[index(a, b)] = s.coeff(a, b) * factorial(a) * factorial(b);
            }
        }
        jet
    }

    /// Normalized Taylor coefficients of the jet.
    pub fn to_series(&self) -> Series {
        let mut s = Series::constant(0.0, self.order);
        for t in 0..=self.order {
            for b in 0..=t {
                let a = t - b;
                s.set_coeff(a, b, self.partials[index(a, b)] / (factorial(a) * factorial(b)));
            }
        }
        s
    }

    /// Builds a jet from a callback giving each partial.
    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut jet = Jet::zero(order);
        for t in 0..=order {
            for b in 0..=t {
                jet.partials[index(t - b, b)] = f(t - b, b);
            }
        }
        jet
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Partial `d^(a+b)/dx^a dy^b`. Panics if `a + b` exceeds the jet order.
    pub fn get(&self, a: usize, b: usize) -> f64 {
        assert!(
            a + b <= self.order,
            "partial ({a},{b}) requested from a jet of order {}",
            self.order
        );
        self.partials[index(a, b)]
    }

    pub fn set(&mut self, a: usize, b: usize, v: f64) {
        assert!(a + b <= self.order);
        self.partials[index(a, b)] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.partials[..terms(self.order)]
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }

    pub fn scaled(mut self, s: f64) -> Self {
        for v in self.partials.iter_mut() {
            *v *= s;
        }
        self
    }

    /// Sum of two jets, truncated to the lower order.
    pub fn add(&self, other: &Jet) -> Jet {
        let order = self.order.min(other.order);
        let mut out = Jet::zero(order);
        for i in 0..terms(order) {
            out.partials[i] = self.partials[i] + other.partials[i];
        }
        out
    }

    pub fn v(&self) -> f64 {
        self.get(0, 0)
    }
    pub fn vx(&self) -> f64 {
        self.get(1, 0)
    }
    pub fn vy(&self) -> f64 {
        self.get(0, 1)
    }
    pub fn vxx(&self) -> f64 {
        self.get(2, 0)
    }
    pub fn vxy(&self) -> f64 {
        self.get(1, 1)
    }
    pub fn vyy(&self) -> f64 {
        self.get(0, 2)
    }
    pub fn vxxx(&self) -> f64 {
        self.get(3, 0)
    }
    pub fn vxxy(&self) -> f64 {
        self.get(2, 1)
    }
    pub fn vxyy(&self) -> f64 {
        self.get(1, 2)
    }
    pub fn vyyy(&self) -> f64 {
        self.get(0, 3)
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for t in 0..=self.order {
            for b in 0..=t {
                m.entry(&(t - b, b), &self.partials[index(t - b, b)]);
            }
        }
        m.finish()
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Capability {
    /// Jets come from closed-form expressions.
    Analytic,
    /// Jets come from finite differences of values.
    Numeric,
}

/// An evaluable scalar field on (part of) the plane.
pub trait ScalarField: Send + Sync {
    fn value(&self, p: Point) -> Result<f64>;

    fn jet(&self, p: Point, order: usize) -> Result<Jet>;

    fn admissible(&self, p: Point) -> bool;

    fn capability(&self) -> Capability;

    /// True when the field depends on `x` only.
    fn is_one_dimensional(&self) -> bool {
        false
    }
}

pub type SeriesFn = dyn Fn(&Series, &Series) -> Result<Series> + Send + Sync;
pub type Predicate = dyn Fn(Point) -> bool + Send + Sync;

/// A closed-form field: a function of the two coordinate series.
#[derive(Clone)]
pub struct ExprField {
    expr: Arc<SeriesFn>,
    admissible: Arc<Predicate>,
    one_dimensional: bool,
}

impl ExprField {
    pub fn new(
        expr: impl Fn(&Series, &Series) -> Result<Series> + Send + Sync + 'static,
    ) -> Self {
        ExprField {
            expr: Arc::new(expr),
            admissible: Arc::new(|p: Point| p.is_finite()),
            one_dimensional: false,
        }
    }

    /// A field depending on `x` alone; its jets have vanishing `y` partials.
    pub fn one_dimensional(
        expr: impl Fn(&Series) -> Result<Series> + Send + Sync + 'static,
    ) -> Self {
        ExprField {
            expr: Arc::new(move |x: &Series, _y: &Series| expr(x)),
            admissible: Arc::new(|p: Point| p.is_finite()),
            one_dimensional: true,
        }
    }

    pub fn with_domain(mut self, pred: impl Fn(Point) -> bool + Send + Sync + 'static) -> Self {
        self.admissible = Arc::new(pred);
        self
    }

    pub fn with_shared_domain(mut self, pred: Arc<Predicate>) -> Self {
        self.admissible = pred;
        self
    }

    pub fn zero() -> Self {
        ExprField::one_dimensional(|x| Ok(Series::constant(0.0, x.order())))
    }

    /// The underlying expression evaluated on coordinate series.
    pub fn series(&self, p: Point, order: usize) -> Result<Series> {
        if order > MAX_ORDER {
            return Err(Error::Precondition(format!(
                "jet order {order} exceeds {MAX_ORDER}"
            )));
        }
        let x = Series::var_x(p.x, order);
        let y = Series::var_y(p.y, order);
        let s = (self.expr)(&x, &y)?;
        if !s.is_finite() {
            return Err(Error::Evaluation(format!(
                "non-finite series at ({}, {})",
                p.x, p.y
            )));
        }
        Ok(s)
    }

    pub fn expr(&self) -> Arc<SeriesFn> {
        self.expr.clone()
    }
}

impl ScalarField for ExprField {
    fn value(&self, p: Point) -> Result<f64> {
        Ok(self.series(p, 0)?.value())
    }

    fn jet(&self, p: Point, order: usize) -> Result<Jet> {
        let s = self.series(p, order)?;
        let mut jet = Jet::from_series(&s);
        if self.one_dimensional {
            for t in 1..=order {
                for b in 1..=t {
                    jet.set(t - b, b, 0.0);
                }
            }
        }
        Ok(jet)
    }

    fn admissible(&self, p: Point) -> bool {
        (self.admissible)(p)
    }

    fn capability(&self) -> Capability {
        Capability::Analytic
    }

    fn is_one_dimensional(&self) -> bool {
        self.one_dimensional
    }
}

/// A value-only field; jets are finite-difference estimates.
#[derive(Clone)]
pub struct SampledField {
    f: Arc<dyn Fn(Point) -> f64 + Send + Sync>,
    admissible: Arc<Predicate>,
    step: Option<f64>,
}

impl SampledField {
    pub fn new(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        SampledField {
            f: Arc::new(f),
            admissible: Arc::new(|p: Point| p.is_finite()),
            step: None,
        }
    }

    pub fn with_domain(mut self, pred: impl Fn(Point) -> bool + Send + Sync + 'static) -> Self {
        self.admissible = Arc::new(pred);
        self
    }

    pub fn with_step(mut self, h: f64) -> Self {
        self.step = Some(h);
        self
    }
}

impl ScalarField for SampledField {
    fn value(&self, p: Point) -> Result<f64> {
        let v = (self.f)(p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation(format!("non-finite value at ({}, {})", p.x, p.y)))
        }
    }

    fn jet(&self, p: Point, order: usize) -> Result<Jet> {
        match self.step {
            Some(h) => fd_jet(self, p, order, h),
            None => fd_jet_default(self, p, order),
        }
    }

    fn admissible(&self, p: Point) -> bool {
        (self.admissible)(p)
    }

    fn capability(&self) -> Capability {
        Capability::Numeric
    }
}

/// Second-order-accurate central difference weights for the `m`-th derivative
/// on offsets `-r..=r`.
pub fn central_weights(m: usize) -> &'static [f64] {
    match m {
        0 => &[1.0],
        1 => &[-0.5, 0.0, 0.5],
        2 => &[1.0, -2.0, 1.0],
        3 => &[-0.5, 1.0, 0.0, -1.0, 0.5],
        4 => &[1.0, -4.0, 6.0, -4.0, 1.0],
        5 => &[-0.5, 2.0, -2.5, 0.0, 2.5, -2.0, 0.5],
        _ => panic!("no central stencil for derivative order {m}"),
    }
}

/// Default step: `eps^(1/4)`, scaled per coordinate by `1 + |coordinate|`.
pub fn default_step() -> f64 {
    f64::EPSILON.powf(0.25)
}

/// Central-difference jet with one step `h` in both directions.
pub fn fd_jet(field: &dyn ScalarField, p: Point, order: usize, h: f64) -> Result<Jet> {
    fd_jet_steps(field, p, order, h, h)
}

/// Central-difference jet with the default coordinate-scaled steps.
pub fn fd_jet_default(field: &dyn ScalarField, p: Point, order: usize) -> Result<Jet> {
    let h = default_step();
    fd_jet_steps(field, p, order, h * (1.0 + p.x.abs()), h * (1.0 + p.y.abs()))
}

fn fd_jet_steps(field: &dyn ScalarField, p: Point, order: usize, hx: f64, hy: f64) -> Result<Jet> {
    if order > MAX_ORDER {
        return Err(Error::Precondition(format!(
            "jet order {order} exceeds {MAX_ORDER}"
        )));
    }
    if !(hx > 0.0 && hy > 0.0) {
        return Err(Error::Precondition("finite-difference step must be positive".into()));
    }
    let radius = order.div_ceil(2) as i64;
    // Sample the full square stencil once; every partial reuses it.
    let width = (2 * radius + 1) as usize;
    let mut grid = vec![0.0; width * width];
    for j in -radius..=radius {
        for i in -radius..=radius {
            let q = Point::new(p.x + i as f64 * hx, p.y + j as f64 * hy);
            if !field.admissible(q) {
                return Err(Error::Domain(format!(
                    "stencil point ({}, {}) leaves the domain",
                    q.x, q.y
                )));
            }
            let v = field.value(q)?;
            if !v.is_finite() {
                return Err(Error::Evaluation(format!(
                    "non-finite sample at ({}, {})",
                    q.x, q.y
                )));
            }
            grid[((j + radius) as usize) * width + (i + radius) as usize] = v;
        }
    }
    let mut jet = Jet::zero(order);
    for t in 0..=order {
        for b in 0..=t {
            let a = t - b;
            let wa = central_weights(a);
            let wb = central_weights(b);
            let ra = (wa.len() / 2) as i64;
            let rb = (wb.len() / 2) as i64;
            let mut acc = 0.0;
            for (jb, w2) in wb.iter().enumerate() {
                if *w2 == 0.0 {
                    continue;
                }
                let j = jb as i64 - rb;
                for (ia, w1) in wa.iter().enumerate() {
                    if *w1 == 0.0 {
                        continue;
                    }
                    let i = ia as i64 - ra;
                    acc += w1 * w2 * grid[((j + radius) as usize) * width + (i + radius) as usize];
                }
            }
            jet.set(a, b, acc / (hx.powi(a as i32) * hy.powi(b as i32)));
        }
    }
    Ok(jet)
}
