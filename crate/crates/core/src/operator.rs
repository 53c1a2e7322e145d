//! Symbolic differential operators with polynomial coefficients.
//!
//! A [`NormalOp`] is a sum `c x^m y^n dx^a dy^b` with every coefficient to the
//! left of every derivative. [`NormalOp::symmetrize`] rewrites such a sum in
//! the anticommutator basis `{f, dx^a dy^b}` used by the grid operators.

use std::collections::BTreeMap;

use num_complex::Complex64;

/// Polynomial in `x, y` with complex coefficients, keyed by `(m, n)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly(pub BTreeMap<(u8, u8), Complex64>);

impl Poly {
    pub fn monomial(m: u8, n: u8, c: Complex64) -> Self {
        let mut p = Poly::default();
        p.add_term(m, n, c);
        p
    }

    pub fn add_term(&mut self, m: u8, n: u8, c: Complex64) {
        let e = self.0.entry((m, n)).or_default();
        *e += c;
        if *e == Complex64::new(0.0, 0.0) {
            self.0.remove(&(m, n));
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        self.0
            .iter()
            .map(|(&(m, n), c)| c * x.powi(m as i32) * y.powi(n as i32))
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
}

fn falling(m: u8, r: u8) -> f64 {
    (0..r).map(|i| (m - i) as f64).product()
}

fn binom(n: u8, k: u8) -> f64 {
    falling(n, k) / falling(k, k)
}

/// Normal-ordered operator keyed by `(m, n, a, b)` for `x^m y^n dx^a dy^b`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NormalOp(pub BTreeMap<(u8, u8, u8, u8), Complex64>);

impl NormalOp {
    pub fn identity() -> Self {
        NormalOp::term(0, 0, 0, 0, Complex64::new(1.0, 0.0))
    }

    pub fn term(m: u8, n: u8, a: u8, b: u8, c: Complex64) -> Self {
        let mut op = NormalOp::default();
        op.add(m, n, a, b, c);
        op
    }

    fn add(&mut self, m: u8, n: u8, a: u8, b: u8, c: Complex64) {
        let e = self.0.entry((m, n, a, b)).or_default();
        *e += c;
        if e.norm() == 0.0 {
            self.0.remove(&(m, n, a, b));
        }
    }

    /// `p1^j p2^k` with `p = -i hbar d`.
    pub fn momentum(j: u8, k: u8, hbar: f64) -> Self {
        NormalOp::term(0, 0, j, k, Complex64::new(0.0, -hbar).powi((j + k) as i32))
    }

    /// `L = x p2 - y p1`.
    pub fn angular(hbar: f64) -> Self {
        let mut op = NormalOp::term(1, 0, 0, 1, Complex64::new(0.0, -hbar));
        op.add(0, 1, 1, 0, Complex64::new(0.0, hbar));
        op
    }

    pub fn plus(mut self, other: &NormalOp) -> Self {
        for (&(m, n, a, b), &c) in &other.0 {
            self.add(m, n, a, b, c);
        }
        self
    }

    pub fn scaled(mut self, s: Complex64) -> Self {
        for c in self.0.values_mut() {
            *c *= s;
        }
        self
    }

    /// Composition `self * other`, normal ordered by the Leibniz rule.
    pub fn compose(&self, other: &NormalOp) -> NormalOp {
        let mut out = NormalOp::default();
        for (&(m, n, a, b), &c1) in &self.0 {
            for (&(m2, n2, a2, b2), &c2) in &other.0 {
                for r in 0..=a.min(m2) {
                    for s in 0..=b.min(n2) {
                        let w = binom(a, r) * binom(b, s) * falling(m2, r) * falling(n2, s);
                        out.add(m + m2 - r, n + n2 - s, a - r + a2, b - s + b2, c1 * c2 * w);
                    }
                }
            }
        }
        out
    }

    pub fn pow(&self, e: u8) -> NormalOp {
        (0..e).fold(NormalOp::identity(), |acc, _| acc.compose(self))
    }

    /// `{A, B} = AB + BA`.
    pub fn anticommutator(&self, other: &NormalOp) -> NormalOp {
        self.compose(other).plus(&other.compose(self))
    }

    pub fn max_order(&self) -> u8 {
        self.0.keys().map(|&(_, _, a, b)| a + b).max().unwrap_or(0)
    }

    /// Coefficient polynomials `f_ab` such that `self = sum {f_ab, dx^a dy^b}`.
    pub fn symmetrize(&self) -> BTreeMap<(u8, u8), Poly> {
        let mut rest = self.clone();
        let mut out: BTreeMap<(u8, u8), Poly> = BTreeMap::new();
        while let Some((&key, &c)) = rest
            .0
            .iter()
            .max_by_key(|(&(_, _, a, b), _)| a + b)
        {
            let (m, n, a, b) = key;
            rest.0.remove(&key);
            out.entry((a, b)).or_default().add_term(m, n, c * 0.5);
            // f d^a = {f, d^a}/2 - sum_{beta != 0} C(a, beta) (d^beta f) d^(a - beta) / 2
            for r in 0..=a.min(m) {
                for s in 0..=b.min(n) {
                    if r == 0 && s == 0 {
                        continue;
                    }
                    let w = binom(a, r) * binom(b, s) * falling(m, r) * falling(n, s);
                    rest.add(m - r, n - s, a - r, b - s, -c * 0.5 * w);
                }
            }
        }
        out.retain(|_, p| !p.is_zero());
        out
    }
}

/// Normal-ordered form of `sum {f_ab, d^ab}`, inverse of [`NormalOp::symmetrize`].
pub fn desymmetrize(sym: &BTreeMap<(u8, u8), Poly>) -> NormalOp {
    let mut out = NormalOp::default();
    for (&(a, b), f) in sym {
        for (&(m, n), &c) in &f.0 {
            let fop = NormalOp::term(m, n, 0, 0, c);
            let d = NormalOp::term(0, 0, a, b, Complex64::new(1.0, 0.0));
            out = out.plus(&fop.anticommutator(&d));
        }
    }
    out
}
