//! Integrals of motion polynomial in the momenta.
//!
//! An [`IntegralSpec`] of order `n` has a leading part spanned by the
//! monomials `L^i p1^j p2^k` with `i + j + k = n` (`L = x p2 - y p1`) and
//! lower-order corrections: `g1 p1 + g2 p2` for odd `n`, a potential-like
//! term `g0` for even `n`.
//!
//! Classical evaluation uses plain products,
//! `X = sum A L^i p1^j p2^k + g1 p1 + g2 p2 + g0`.
//! The quantum operator is the symmetrized form
//! `X = sum A {L^i, p1^j p2^k} + {g1, p1} + {g2, p2} + 2 g0`,
//! whose leading symbol is twice the classical one; the shared factor does
//! not change whether `X` is conserved.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Capability, Jet, Point, ScalarField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Monomial {
    /// Power of `L = x p2 - y p1`.
    pub l: u8,
    pub p1: u8,
    pub p2: u8,
}

impl Monomial {
    pub const fn new(l: u8, p1: u8, p2: u8) -> Self {
        Monomial { l, p1, p2 }
    }

    pub fn degree(&self) -> u8 {
        self.l + self.p1 + self.p2
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A{}{}{}", self.l, self.p1, self.p2)
    }
}

/// The ten leading coefficients `A_ijk` (`i + j + k = 3`) of a third-order
/// integral. The first index is the power of `L`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ACoeffs(pub [f64; 10]);

impl ACoeffs {
    pub const ORDERING: [(u8, u8, u8); 10] = [
        (3, 0, 0),
        (2, 1, 0),
        (2, 0, 1),
        (1, 2, 0),
        (1, 1, 1),
        (1, 0, 2),
        (0, 3, 0),
        (0, 2, 1),
        (0, 1, 2),
        (0, 0, 3),
    ];

    pub fn zero() -> Self {
        ACoeffs([0.0; 10])
    }

    fn slot(i: u8, j: u8, k: u8) -> usize {
        Self::ORDERING
            .iter()
            .position(|t| *t == (i, j, k))
            .unwrap_or_else(|| panic!("A{i}{j}{k} is not a third-order index"))
    }

    pub fn get(&self, i: u8, j: u8, k: u8) -> f64 {
        self.0[Self::slot(i, j, k)]
    }

    pub fn set(&mut self, i: u8, j: u8, k: u8, v: f64) {
        self.0[Self::slot(i, j, k)] = v;
    }

    pub fn with(mut self, i: u8, j: u8, k: u8, v: f64) -> Self {
        self.set(i, j, k, v);
        self
    }

    pub fn add(&self, other: &ACoeffs) -> ACoeffs {
        let mut out = *self;
        for (o, v) in out.0.iter_mut().zip(other.0.iter()) {
            *o += v;
        }
        out
    }
}

/// Which mechanics an integral is conserved under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mechanics {
    Classical,
    Quantum,
    Both,
}

impl Mechanics {
    pub fn classical(self) -> bool {
        matches!(self, Mechanics::Classical | Mechanics::Both)
    }

    pub fn quantum(self) -> bool {
        matches!(self, Mechanics::Quantum | Mechanics::Both)
    }
}

/// One term `coeff * field` of a correction function.
#[derive(Clone)]
pub struct Term {
    pub coeff: f64,
    pub label: String,
    pub field: Arc<dyn ScalarField>,
}

/// A correction function `g = sum coeff_i * field_i`. The coefficients are
/// the stored numbers of the integral and can be perturbed one at a time.
#[derive(Clone, Default)]
pub struct Correction {
    pub terms: Vec<Term>,
}

impl Correction {
    pub fn none() -> Self {
        Correction { terms: vec![] }
    }

    pub fn term(coeff: f64, label: &str, field: impl ScalarField + 'static) -> Self {
        Correction::none().plus(coeff, label, field)
    }

    pub fn plus(mut self, coeff: f64, label: &str, field: impl ScalarField + 'static) -> Self {
        self.terms.push(Term {
            coeff,
            label: label.to_string(),
            field: Arc::new(field),
        });
        self
    }

    pub fn plus_shared(mut self, coeff: f64, label: &str, field: Arc<dyn ScalarField>) -> Self {
        self.terms.push(Term {
            coeff,
            label: label.to_string(),
            field,
        });
        self
    }

    pub fn is_empty(&self) -> bool {
        self.terms.iter().all(|t| t.coeff == 0.0)
    }

    pub fn value(&self, p: Point) -> Result<f64> {
        let mut acc = 0.0;
        for t in &self.terms {
            if t.coeff != 0.0 {
                acc += t.coeff * t.field.value(p)?;
            }
        }
        Ok(acc)
    }

    pub fn jet(&self, p: Point, order: usize) -> Result<Jet> {
        let mut acc = Jet::zero(order);
        for t in &self.terms {
            if t.coeff != 0.0 {
                acc = acc.add(&t.field.jet(p, order)?.scaled(t.coeff));
            }
        }
        Ok(acc)
    }

    /// Human-readable form, e.g. `2*(y^2/x^2) - 1*(y)`.
    pub fn describe(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|t| format!("{}*({})", t.coeff, t.label))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl ScalarField for Correction {
    fn value(&self, p: Point) -> Result<f64> {
        Correction::value(self, p)
    }

    fn jet(&self, p: Point, order: usize) -> Result<Jet> {
        Correction::jet(self, p, order)
    }

    fn admissible(&self, p: Point) -> bool {
        self.terms.iter().all(|t| t.field.admissible(p))
    }

    fn capability(&self) -> Capability {
        if self
            .terms
            .iter()
            .all(|t| t.field.capability() == Capability::Analytic)
        {
            Capability::Analytic
        } else {
            Capability::Numeric
        }
    }

    fn is_one_dimensional(&self) -> bool {
        self.terms.iter().all(|t| t.field.is_one_dimensional())
    }
}

/// Address of one stored coefficient of an [`IntegralSpec`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoeffRef {
    Leading(Monomial),
    G1(usize),
    G2(usize),
    G0(usize),
}

impl fmt::Display for CoeffRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffRef::Leading(m) => write!(f, "{m}"),
            CoeffRef::G1(i) => write!(f, "g1[{i}]"),
            CoeffRef::G2(i) => write!(f, "g2[{i}]"),
            CoeffRef::G0(i) => write!(f, "g0[{i}]"),
        }
    }
}

#[derive(Clone)]
pub struct IntegralSpec {
    pub name: String,
    pub order: u8,
    pub kind: Mechanics,
    /// Nonzero leading coefficients.
    pub leading: Vec<(Monomial, f64)>,
    pub g1: Correction,
    pub g2: Correction,
    pub g0: Correction,
    /// Planck constant the corrections were built with (quantum specs).
    pub hbar: Option<f64>,
    /// The form printed in the source classification, when it differs from
    /// the stored (verified) coefficients.
    pub printed: Option<String>,
}

impl IntegralSpec {
    pub fn new(name: &str, order: u8, kind: Mechanics) -> Self {
        IntegralSpec {
            name: name.to_string(),
            order,
            kind,
            leading: vec![],
            g1: Correction::none(),
            g2: Correction::none(),
            g0: Correction::none(),
            hbar: None,
            printed: None,
        }
    }

    pub fn lead(mut self, l: u8, p1: u8, p2: u8, coeff: f64) -> Self {
        let m = Monomial::new(l, p1, p2);
        assert_eq!(m.degree(), self.order, "{m} does not match order {}", self.order);
        self.leading.push((m, coeff));
        self
    }

    pub fn with_g1(mut self, g: Correction) -> Self {
        self.g1 = g;
        self
    }

    pub fn with_g2(mut self, g: Correction) -> Self {
        self.g2 = g;
        self
    }

    pub fn with_g0(mut self, g: Correction) -> Self {
        self.g0 = g;
        self
    }

    pub fn with_hbar(mut self, hbar: f64) -> Self {
        self.hbar = Some(hbar);
        self
    }

    pub fn with_printed(mut self, printed: &str) -> Self {
        self.printed = Some(printed.to_string());
        self
    }

    pub fn renamed(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.order) {
            return Err(Error::InvalidParams(format!("integral order {}", self.order)));
        }
        if self.leading.iter().all(|(_, c)| *c == 0.0)
            && self.g1.is_empty()
            && self.g2.is_empty()
            && self.g0.is_empty()
        {
            return Err(Error::InvalidParams(format!("integral {} is identically zero", self.name)));
        }
        if self.kind == Mechanics::Classical && self.hbar.is_some() {
            return Err(Error::InvalidParams(format!(
                "classical integral {} references hbar",
                self.name
            )));
        }
        Ok(())
    }

    pub fn leading_coeff(&self, m: Monomial) -> f64 {
        self.leading
            .iter()
            .filter(|(k, _)| *k == m)
            .map(|(_, c)| *c)
            .sum()
    }

    /// Leading coefficients of a third-order integral.
    pub fn a_coeffs(&self) -> ACoeffs {
        assert_eq!(self.order, 3, "{} is not third order", self.name);
        let mut a = ACoeffs::zero();
        for (m, c) in &self.leading {
            a.set(m.l, m.p1, m.p2, a.get(m.l, m.p1, m.p2) + c);
        }
        a
    }

    /// Every nonzero stored coefficient.
    pub fn coefficients(&self) -> Vec<(CoeffRef, f64)> {
        let mut out: Vec<(CoeffRef, f64)> = self
            .leading
            .iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(m, c)| (CoeffRef::Leading(*m), *c))
            .collect();
        for (which, g) in [(0, &self.g1), (1, &self.g2), (2, &self.g0)] {
            for (i, t) in g.terms.iter().enumerate() {
                if t.coeff != 0.0 {
                    let r = match which {
                        0 => CoeffRef::G1(i),
                        1 => CoeffRef::G2(i),
                        _ => CoeffRef::G0(i),
                    };
                    out.push((r, t.coeff));
                }
            }
        }
        out
    }

    /// Copy with one stored coefficient multiplied by `factor`.
    pub fn perturbed(&self, which: CoeffRef, factor: f64) -> IntegralSpec {
        let mut out = self.clone();
        match which {
            CoeffRef::Leading(m) => {
                for (k, c) in out.leading.iter_mut() {
                    if *k == m {
                        *c *= factor;
                    }
                }
            }
            CoeffRef::G1(i) => out.g1.terms[i].coeff *= factor,
            CoeffRef::G2(i) => out.g2.terms[i].coeff *= factor,
            CoeffRef::G0(i) => out.g0.terms[i].coeff *= factor,
        }
        out.name = format!("{}[{}x{}]", self.name, which, factor);
        out
    }

    /// Pointwise sum of two specs of the same order.
    pub fn sum(&self, other: &IntegralSpec) -> IntegralSpec {
        assert_eq!(self.order, other.order);
        let mut out = self.clone();
        out.name = format!("{}+{}", self.name, other.name);
        out.leading.extend(other.leading.iter().cloned());
        out.g1.terms.extend(other.g1.terms.iter().cloned());
        out.g2.terms.extend(other.g2.terms.iter().cloned());
        out.g0.terms.extend(other.g0.terms.iter().cloned());
        out
    }

    /// Jets of `(g1, g2, g0)` at `p`.
    pub fn correction_jets(&self, p: Point, order: usize) -> Result<CorrectionJets> {
        Ok(CorrectionJets {
            g1: self.g1.jet(p, order)?,
            g2: self.g2.jet(p, order)?,
            g0: self.g0.jet(p, order)?,
        })
    }

    pub fn describe(&self) -> String {
        let lead = self
            .leading
            .iter()
            .map(|(m, c)| format!("{c}*L^{} p1^{} p2^{}", m.l, m.p1, m.p2))
            .collect::<Vec<_>>()
            .join(" + ");
        format!(
            "{}: {} | g1 = {} | g2 = {} | g0 = {}",
            self.name,
            lead,
            self.g1.describe(),
            self.g2.describe(),
            self.g0.describe()
        )
    }
}

impl fmt::Debug for IntegralSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CorrectionJets {
    pub g1: Jet,
    pub g2: Jet,
    pub g0: Jet,
}
