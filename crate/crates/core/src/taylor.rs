//! Truncated bivariate Taylor series.
//!
//! A [`Series`] holds the normalized Taylor coefficients `c[a,b]` of a scalar
//! function of `(x, y)` around a base point, for all `a + b <= order`:
//!
//! ```text
//! f(x0 + dx, y0 + dy) = sum c[a,b] dx^a dy^b + O(|d|^(order+1))
//! ```
//!
//! Arithmetic on series propagates derivatives exactly (up to round-off), so
//! any closed-form expression written against `Series` yields analytic jets.
//! Transcendental functions are applied through their univariate Taylor
//! coefficients at the base value followed by composition.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

pub const MAX_ORDER: usize = 5;
pub const MAX_TERMS: usize = (MAX_ORDER + 1) * (MAX_ORDER + 2) / 2;

/// Number of coefficients for series truncated at `order`.
pub const fn terms(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

/// Position of `dx^a dy^b` in the coefficient array. Coefficients are stored
/// by total degree, then by increasing power of `dy`.
pub const fn index(a: usize, b: usize) -> usize {
    let t = a + b;
    t * (t + 1) / 2 + b
}

const fn build_exponents() -> [(usize, usize); MAX_TERMS] {
    let mut out = [(0, 0); MAX_TERMS];
    let mut t = 0;
    while t <= MAX_ORDER {
        let mut b = 0;
        while b <= t {
            out[index(t - b, b)] = (t - b, b);
            b += 1;
        }
        t += 1;
    }
    out
}

/// `(a, b)` exponents for each coefficient slot.
pub const EXPONENTS: [(usize, usize); MAX_TERMS] = build_exponents();

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Series {
    order: usize,
    c: [f64; MAX_TERMS],
}

impl Series {
    pub fn constant(value: f64, order: usize) -> Self {
        assert!(order <= MAX_ORDER, "series order {order} exceeds {MAX_ORDER}");
        let mut c = [0.0; MAX_TERMS];
        c[0] = value;
        Series { order, c }
    }

    /// The coordinate `x` expanded around `x0`.
    pub fn var_x(x0: f64, order: usize) -> Self {
        let mut s = Series::constant(x0, order);
        if order >= 1 {
            s.c[index(1, 0)] = 1.0;
        }
        s
    }

    /// The coordinate `y` expanded around `y0`.
    pub fn var_y(y0: f64, order: usize) -> Self {
        let mut s = Series::constant(y0, order);
        if order >= 1 {
            s.c[index(0, 1)] = 1.0;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Normalized coefficient of `dx^a dy^b`; zero above the truncation order.
    pub fn coeff(&self, a: usize, b: usize) -> f64 {
        if a + b > self.order {
            0.0
        } else {
            self.c[index(a, b)]
        }
    }

    pub fn set_coeff(&mut self, a: usize, b: usize, v: f64) {
        assert!(a + b <= self.order);
        self.c[index(a, b)] = v;
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c[..terms(self.order)]
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs().iter().all(|v| v.is_finite())
    }

    /// Same series with the constant term replaced.
    pub fn with_value(mut self, v: f64) -> Self {
        self.c[0] = v;
        self
    }

    pub fn truncate(mut self, order: usize) -> Self {
        let order = order.min(self.order);
        for slot in terms(order)..MAX_TERMS {
            self.c[slot] = 0.0;
        }
        self.order = order;
        self
    }

    /// `sum_n f[n] (self - self.value())^n`, where `f` lists the univariate
    /// Taylor coefficients of some function at `self.value()`.
    pub fn compose(&self, f: &[f64]) -> Series {
        let n = self.order.min(f.len().saturating_sub(1));
        let delta = self.with_value(0.0);
        let mut out = Series::constant(f[n], self.order);
        for k in (0..n).rev() {
            out *= delta;
            out.c[0] += f[k];
        }
        out
    }

    /// Partial derivative in `x`; the result has one order less.
    pub fn dx(&self) -> Series {
        assert!(self.order >= 1, "cannot differentiate an order-0 series");
        let mut out = Series::constant(0.0, self.order - 1);
        for t in 0..self.order {
            for b in 0..=t {
                let a = t - b;
                out.c[index(a, b)] = (a + 1) as f64 * self.c[index(a + 1, b)];
            }
        }
        out
    }

    /// Partial derivative in `y`; the result has one order less.
    pub fn dy(&self) -> Series {
        assert!(self.order >= 1, "cannot differentiate an order-0 series");
        let mut out = Series::constant(0.0, self.order - 1);
        for t in 0..self.order {
            for b in 0..=t {
                let a = t - b;
                out.c[index(a, b)] = (b + 1) as f64 * self.c[index(a, b + 1)];
            }
        }
        out
    }

    /// Antiderivative in `x` of a series that does not depend on `y`, with the
    /// given value at the base point.
    pub fn integrate_x(&self, value: f64) -> Series {
        let mut out = Series::constant(value, self.order);
        for a in 0..self.order {
            out.c[index(a + 1, 0)] = self.c[index(a, 0)] / (a as f64 + 1.0);
        }
        out
    }

    pub fn recip(&self) -> Series {
        let x0 = self.value();
        let mut f = [0.0; MAX_ORDER + 1];
        let inv = 1.0 / x0;
        let mut term = inv;
        for slot in f.iter_mut().take(self.order + 1) {
            *slot = term;
            term *= -inv;
        }
        self.compose(&f)
    }

    pub fn powf(&self, p: f64) -> Series {
        let x0 = self.value();
        let mut f = [0.0; MAX_ORDER + 1];
        let base = x0.powf(p);
        let mut binom = 1.0;
        let mut scale = 1.0;
        for (n, slot) in f.iter_mut().enumerate().take(self.order + 1) {
            *slot = base * binom * scale;
            binom *= (p - n as f64) / (n as f64 + 1.0);
            scale /= x0;
        }
        self.compose(&f)
    }

    pub fn powi(&self, n: i32) -> Series {
        if n < 0 {
            return self.recip().powi(-n);
        }
        let mut out = Series::constant(1.0, self.order);
        for _ in 0..n {
            out *= *self;
        }
        out
    }

    pub fn sqrt(&self) -> Series {
        self.powf(0.5)
    }

    pub fn exp(&self) -> Series {
        let e = self.value().exp();
        let mut f = [0.0; MAX_ORDER + 1];
        let mut fact = 1.0;
        for (n, slot) in f.iter_mut().enumerate().take(self.order + 1) {
            if n > 0 {
                fact *= n as f64;
            }
            *slot = e / fact;
        }
        self.compose(&f)
    }

    pub fn ln(&self) -> Series {
        let x0 = self.value();
        let mut f = [0.0; MAX_ORDER + 1];
        f[0] = x0.ln();
        for (n, slot) in f.iter_mut().enumerate().take(self.order + 1).skip(1) {
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            *slot = sign / (n as f64 * x0.powi(n as i32));
        }
        self.compose(&f)
    }

    fn trig_like(&self, d0: f64, d1: f64, flip: f64) -> Series {
        // Derivatives alternate between (d0, d1, flip*d0, flip*d1, ...).
        let mut f = [0.0; MAX_ORDER + 1];
        let derivs = [d0, d1, flip * d0, flip * d1];
        let mut fact = 1.0;
        for (n, slot) in f.iter_mut().enumerate().take(self.order + 1) {
            if n > 0 {
                fact *= n as f64;
            }
            *slot = derivs[n % 4] / fact;
        }
        self.compose(&f)
    }

    pub fn sin(&self) -> Series {
        let (s, c) = self.value().sin_cos();
        self.trig_like(s, c, -1.0)
    }

    pub fn cos(&self) -> Series {
        let (s, c) = self.value().sin_cos();
        self.trig_like(c, -s, -1.0)
    }

    pub fn sinh(&self) -> Series {
        let v = self.value();
        self.trig_like(v.sinh(), v.cosh(), 1.0)
    }

    pub fn cosh(&self) -> Series {
        let v = self.value();
        self.trig_like(v.cosh(), v.sinh(), 1.0)
    }

    pub fn tanh(&self) -> Series {
        self.sinh() / self.cosh()
    }
}

impl Add for Series {
    type Output = Series;
    fn add(self, rhs: Series) -> Series {
        let order = self.order.min(rhs.order);
        let mut out = self.truncate(order);
        for i in 0..terms(order) {
            out.c[i] += rhs.c[i];
        }
        out
    }
}

impl Sub for Series {
    type Output = Series;
    fn sub(self, rhs: Series) -> Series {
        let order = self.order.min(rhs.order);
        let mut out = self.truncate(order);
        for i in 0..terms(order) {
            out.c[i] -= rhs.c[i];
        }
        out
    }
}

impl Mul for Series {
    type Output = Series;
    fn mul(self, rhs: Series) -> Series {
        let order = self.order.min(rhs.order);
        let n = terms(order);
        let mut c = [0.0; MAX_TERMS];
        for i in 0..n {
            let li = self.c[i];
            if li == 0.0 {
                continue;
            }
            let (a1, b1) = EXPONENTS[i];
            let rest = order - (a1 + b1);
            for j in 0..terms(rest) {
                let (a2, b2) = EXPONENTS[j];
                c[index(a1 + a2, b1 + b2)] += li * rhs.c[j];
            }
        }
        Series { order, c }
    }
}

impl Div for Series {
    type Output = Series;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Series) -> Series {
        self * rhs.recip()
    }
}

impl Neg for Series {
    type Output = Series;
    fn neg(mut self) -> Series {
        for v in self.c.iter_mut() {
            *v = -*v;
        }
        self
    }
}

impl Add<f64> for Series {
    type Output = Series;
    fn add(mut self, rhs: f64) -> Series {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Series {
    type Output = Series;
    fn sub(mut self, rhs: f64) -> Series {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Series {
    type Output = Series;
    fn mul(mut self, rhs: f64) -> Series {
        for v in self.c.iter_mut() {
            *v *= rhs;
        }
        self
    }
}

impl Div<f64> for Series {
    type Output = Series;
    fn div(self, rhs: f64) -> Series {
        self * (1.0 / rhs)
    }
}

impl Add<Series> for f64 {
    type Output = Series;
    fn add(self, rhs: Series) -> Series {
        rhs + self
    }
}

impl Sub<Series> for f64 {
    type Output = Series;
    fn sub(self, rhs: Series) -> Series {
        -rhs + self
    }
}

impl Mul<Series> for f64 {
    type Output = Series;
    fn mul(self, rhs: Series) -> Series {
        rhs * self
    }
}

impl Div<Series> for f64 {
    type Output = Series;
    fn div(self, rhs: Series) -> Series {
        rhs.recip() * self
    }
}

impl AddAssign for Series {
    fn add_assign(&mut self, rhs: Series) {
        *self = *self + rhs;
    }
}

impl SubAssign for Series {
    fn sub_assign(&mut self, rhs: Series) {
        *self = *self - rhs;
    }
}

impl MulAssign for Series {
    fn mul_assign(&mut self, rhs: Series) {
        *self = *self * rhs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn index_layout_is_dense() {
        let mut seen = [false; MAX_TERMS];
        for t in 0..=MAX_ORDER {
            for b in 0..=t {
                let i = index(t - b, b);
                assert!(!seen[i]);
                seen[i] = true;
                assert_eq!(EXPONENTS[i], (t - b, b));
            }
        }
        assert!(seen.iter().all(|s| *s));
        assert_eq!(terms(3), 10);
        assert_eq!(terms(5), 21);
    }

    #[test]
    fn polynomial_product() {
        // (x y^2) at (2, 3): coefficients of dx^a dy^b.
        let x = Series::var_x(2.0, 3);
        let y = Series::var_y(3.0, 3);
        let p = x * y * y;
        assert_eq!(p.coeff(0, 0), 18.0);
        assert_eq!(p.coeff(1, 0), 9.0);
        assert_eq!(p.coeff(0, 1), 12.0);
        assert_eq!(p.coeff(1, 1), 6.0);
        assert_eq!(p.coeff(0, 2), 2.0);
        assert_eq!(p.coeff(1, 2), 1.0);
        assert_eq!(p.coeff(2, 0), 0.0);
    }

    #[test]
    fn elementary_functions_match_derivatives() {
        let x0 = 0.37;
        let x = Series::var_x(x0, 5);
        let s = x.sin();
        // 4th derivative of sin is sin; coefficient = sin/4!
        assert!(close(s.coeff(4, 0), x0.sin() / 24.0, 1e-15));
        assert!(close(x.cosh().coeff(3, 0), x0.sinh() / 6.0, 1e-15));
        let r = x.recip();
        assert!(close(r.coeff(2, 0), 1.0 / x0.powi(3), 1e-14));
        let e = (x * 2.0).exp();
        assert!(close(e.coeff(5, 0), (2.0 * x0).exp() * 32.0 / 120.0, 1e-14));
        let q = x.sqrt() * x.sqrt();
        assert!(close(q.coeff(1, 0), 1.0, 1e-14));
        assert!(q.coeff(2, 0).abs() < 1e-14);
        let l = x.exp().ln();
        assert!(close(l.coeff(1, 0), 1.0, 1e-14));
        assert!(l.coeff(3, 0).abs() < 1e-13);
        let t = x.tanh();
        let sech2 = 1.0 / x0.cosh().powi(2);
        assert!(close(t.coeff(1, 0), sech2, 1e-14));
    }

    #[test]
    fn division_inverts_multiplication() {
        let x = Series::var_x(1.3, 5);
        let y = Series::var_y(-0.4, 5);
        let f = x * x + y * 3.0 + 2.0;
        let g = (x * y).cos() + 2.5;
        let back = (f / g) * g;
        for i in 0..terms(5) {
            assert!((back.coeffs()[i] - f.coeffs()[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn integrate_x_inverts_derivative() {
        let x = Series::var_x(0.8, 5);
        let v = x.cosh().recip().powi(2);
        let f = v.integrate_x(0.8f64.tanh());
        let t = x.tanh();
        for a in 0..=5 {
            assert!(close(f.coeff(a, 0), t.coeff(a, 0), 1e-13), "a={a}");
        }
    }

    #[test]
    fn partial_derivatives() {
        // f = x^3 y^2 at (2, -1): f_x = 3x^2 y^2 = 12, f_xy = 6x^2 y = -24
        let x = Series::var_x(2.0, 5);
        let y = Series::var_y(-1.0, 5);
        let f = x * x * x * y * y;
        let fx = f.dx();
        assert_eq!(fx.order(), 4);
        assert!((fx.value() - 12.0).abs() < 1e-13);
        assert!((fx.dy().value() + 24.0).abs() < 1e-13);
        assert!((f.dy().dx().value() + 24.0).abs() < 1e-13);
        // dx^2 coefficient of f_x is f_xxx / 2 = 3 y^2
        assert!((fx.coeff(2, 0) - 3.0).abs() < 1e-13);
    }

    #[test]
    fn mixed_orders_truncate_to_min() {
        let a = Series::var_x(1.0, 2);
        let b = Series::var_y(1.0, 4);
        assert_eq!((a * b).order(), 2);
        assert_eq!((a + b).order(), 2);
    }
}
