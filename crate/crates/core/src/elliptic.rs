//! Jacobi elliptic functions and the complete elliptic integral of the first
//! kind, for real argument and modulus `0 <= k <= 1`.
//!
//! `sn` and `cn` are computed with the descending Landen transformation
//! seeded by the arithmetic-geometric mean, and `dn = sqrt(1 - k^2 sn^2)`.
//! The argument is first reduced modulo the real period `4K`. The limits `k = 0` (trigonometric)
//! and `k = 1` (hyperbolic) use closed forms.

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::taylor::{Series, MAX_ORDER};

/// Below this modulus the trigonometric limit is exact to round-off.
pub const TRIG_SWITCH: f64 = 1e-8;

const MAX_AGM_STEPS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct EllipticModulus(f64);

impl EllipticModulus {
    pub fn new(k: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&k) {
            Ok(EllipticModulus(k))
        } else {
            Err(Error::InvalidParams(format!("elliptic modulus k = {k} outside [0, 1]")))
        }
    }

    pub fn k(self) -> f64 {
        self.0
    }

    /// Complementary modulus `sqrt(1 - k^2)`, without cancellation near 1.
    pub fn complement(self) -> f64 {
        ((1.0 - self.0) * (1.0 + self.0)).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JacobiTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// Arithmetic-geometric mean of two positive numbers.
pub fn agm(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("agm needs positive finite inputs, got ({a}, {b})")));
    }
    let (mut a, mut b) = (a, b);
    for _ in 0..MAX_AGM_STEPS {
        if (a - b).abs() <= f64::EPSILON * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    Ok(0.5 * (a + b))
}

/// Quarter period `K(k)`.
pub fn ellip_k(k: EllipticModulus) -> Result<f64> {
    if k.k() >= 1.0 {
        return Err(Error::Divergence("K(k) diverges at k = 1".into()));
    }
    Ok(PI / (2.0 * agm(1.0, k.complement())?))
}

/// `(sn, cn, dn)(u, k)`.
pub fn jacobi(u: f64, k: EllipticModulus) -> Result<JacobiTriple> {
    if !u.is_finite() {
        return Err(Error::Domain(format!("jacobi needs a finite argument, got {u}")));
    }
    let m = k.k();
    if m < TRIG_SWITCH {
        let (s, c) = u.sin_cos();
        return Ok(JacobiTriple { sn: s, cn: c, dn: 1.0 });
    }
    if m == 1.0 {
        let sech = 1.0 / u.cosh();
        return Ok(JacobiTriple {
            sn: u.tanh(),
            cn: sech,
            dn: sech,
        });
    }
    let quarter = ellip_k(k)?;
    let period = 4.0 * quarter;
    let u = u - period * (u / period).round();
    Ok(landen(u, m, k.complement()))
}

fn landen(u: f64, k: f64, kp: f64) -> JacobiTriple {
    let mut a = [0.0; MAX_AGM_STEPS + 1];
    let mut c = [0.0; MAX_AGM_STEPS + 1];
    a[0] = 1.0;
    c[0] = k;
    let mut b = kp;
    let mut n = 0;
    while n < MAX_AGM_STEPS && c[n].abs() > f64::EPSILON * a[n] {
        let an = a[n];
        a[n + 1] = 0.5 * (an + b);
        c[n + 1] = 0.5 * (an - b);
        b = (an * b).sqrt();
        n += 1;
    }
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    // cn / cos(phi_1 - phi_0) loses digits where cn vanishes; dn > 0 for k < 1
    let dn = ((1.0 - k * sn) * (1.0 + k * sn)).sqrt();
    JacobiTriple { sn, cn, dn }
}

/// Univariate Taylor coefficients of `(sn, cn, dn)` at `u0`, from the
/// system `sn' = cn dn`, `cn' = -sn dn`, `dn' = -k^2 sn cn`.
pub fn jacobi_taylor(u0: f64, k: EllipticModulus, order: usize) -> Result<[Vec<f64>; 3]> {
    let t = jacobi(u0, k)?;
    let k2 = k.k() * k.k();
    let n = order + 1;
    let mut s = vec![0.0; n];
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    s[0] = t.sn;
    c[0] = t.cn;
    d[0] = t.dn;
    let conv = |f: &[f64], g: &[f64], m: usize| (0..=m).map(|i| f[i] * g[m - i]).sum::<f64>();
    for m in 0..order {
        let inv = 1.0 / (m as f64 + 1.0);
        s[m + 1] = conv(&c, &d, m) * inv;
        c[m + 1] = -conv(&s, &d, m) * inv;
        d[m + 1] = -k2 * conv(&s, &c, m) * inv;
    }
    Ok([s, c, d])
}

/// `(sn, cn, dn)` of a series argument.
pub fn jacobi_series(u: &Series, k: EllipticModulus) -> Result<[Series; 3]> {
    debug_assert!(u.order() <= MAX_ORDER);
    let [s, c, d] = jacobi_taylor(u.value(), k, u.order())?;
    Ok([u.compose(&s), u.compose(&c), u.compose(&d)])
}

/// Distance from `u` to the nearest zero of `sn` (the poles of `1/sn^2`),
/// located at `u = 2 n K(k)`. At `k = 1` the only zero is `u = 0`.
pub fn sn_zero_distance(u: f64, k: EllipticModulus) -> f64 {
    match ellip_k(k) {
        Ok(quarter) => {
            let spacing = 2.0 * quarter;
            (u - spacing * (u / spacing).round()).abs()
        }
        Err(_) => u.abs(),
    }
}

/// Locations `2 n K(k)` of the zeros of `sn` inside `[lo, hi]`.
pub fn sn_zeros(k: EllipticModulus, lo: f64, hi: f64) -> Vec<f64> {
    match ellip_k(k) {
        Ok(quarter) => {
            let spacing = 2.0 * quarter;
            let first = (lo / spacing).ceil() as i64;
            let last = (hi / spacing).floor() as i64;
            (first..=last).map(|n| n as f64 * spacing).collect()
        }
        Err(_) => {
            if lo <= 0.0 && hi >= 0.0 {
                vec![0.0]
            } else {
                vec![]
            }
        }
    }
}

/// Distance from `u` to the nearest point where `cn = -1`, i.e.
/// `u = 2K(2n + 1)`. `cn > 0` everywhere at `k = 1`.
pub fn cn_minus_one_distance(u: f64, k: EllipticModulus) -> f64 {
    match ellip_k(k) {
        Ok(quarter) => {
            let period = 4.0 * quarter;
            let shifted = u - 2.0 * quarter;
            (shifted - period * (shifted / period).round()).abs()
        }
        Err(_) => f64::INFINITY,
    }
}

/// Moduli covered by [`self_test`].
pub const SELF_TEST_MODULI: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub k: f64,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityCheck {
    fn new(name: &str, k: f64, max_error: f64, tolerance: f64) -> Self {
        IdentityCheck {
            name: name.to_string(),
            k,
            max_error,
            tolerance,
            pass: max_error <= tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelfTestReport {
    pub moduli: Vec<f64>,
    pub samples_per_modulus: usize,
    pub checks: Vec<IdentityCheck>,
    pub pass: bool,
}

/// Residuals of `sn^2 + cn^2 = 1` and `dn^2 + k^2 sn^2 = 1`.
pub fn pythagorean_errors(t: &JacobiTriple, k: f64) -> (f64, f64) {
    (
        (t.sn * t.sn + t.cn * t.cn - 1.0).abs(),
        (t.dn * t.dn + k * k * t.sn * t.sn - 1.0).abs(),
    )
}

/// Largest mismatch of `sn' = cn dn`, `cn' = -sn dn`, `dn' = -k^2 sn cn`
/// against central differences with step `h`.
pub fn derivative_error(eval: &dyn Fn(f64) -> Result<JacobiTriple>, u: f64, k: f64, h: f64) -> Result<f64> {
    let (p, m, t) = (eval(u + h)?, eval(u - h)?, eval(u)?);
    let d = |a: f64, b: f64| (a - b) / (2.0 * h);
    Ok([
        (d(p.sn, m.sn) - t.cn * t.dn).abs(),
        (d(p.cn, m.cn) + t.sn * t.dn).abs(),
        (d(p.dn, m.dn) + k * k * t.sn * t.cn).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max))
}

/// Identity, bound, periodicity and derivative suites over
/// [`SELF_TEST_MODULI`], plus the exact limits at `k = 0, 1`. `dn_fault`
/// shifts every `dn` value, to confirm that the suites detect errors.
pub fn self_test(samples: usize, seed: u64, dn_fault: f64) -> Result<SelfTestReport> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut checks = vec![];
    for &k in &SELF_TEST_MODULI {
        let km = EllipticModulus::new(k)?;
        let eval = move |u: f64| {
            jacobi(u, km).map(|mut t| {
                t.dn += dn_fault;
                t
            })
        };
        let us: Vec<f64> = (0..samples).map(|_| rng.gen_range(-20.0..20.0)).collect();
        let (mut pyth, mut bound, mut period, mut deriv) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        let quarter = ellip_k(km)?;
        for &u in &us {
            let t = eval(u)?;
            let (e1, e2) = pythagorean_errors(&t, k);
            pyth = pyth.max(e1).max(e2);
            let excess = (t.sn.abs() - 1.0).max(t.dn - 1.0).max(km.complement() - t.dn);
            bound = bound.max(excess.max(0.0));
            period = period.max((eval(u + 4.0 * quarter)?.sn - t.sn).abs());
            deriv = deriv.max(derivative_error(&eval, u, k, 1e-4)?);
        }
        checks.push(IdentityCheck::new("pythagorean", k, pyth, 1e-12));
        checks.push(IdentityCheck::new("bounds", k, bound, 1e-15));
        if k <= 0.95 {
            checks.push(IdentityCheck::new("periodicity", k, period, 1e-10));
        }
        checks.push(IdentityCheck::new("derivatives", k, deriv, 1e-8));
    }
    let (mut trig, mut hyp) = (0.0f64, 0.0f64);
    for i in 0..samples {
        let u = -10.0 + 20.0 * i as f64 / samples as f64;
        let t = jacobi(u, EllipticModulus::new(0.0)?)?;
        trig = trig.max((t.sn - u.sin()).abs()).max((t.cn - u.cos()).abs()).max((t.dn + dn_fault - 1.0).abs());
        let h = jacobi(u, EllipticModulus::new(1.0)?)?;
        let sech = 1.0 / u.cosh();
        hyp = hyp.max((h.sn - u.tanh()).abs()).max((h.cn - sech).abs()).max((h.dn + dn_fault - sech).abs());
    }
    checks.push(IdentityCheck::new("trigonometric_limit", 0.0, trig, 1e-14));
    checks.push(IdentityCheck::new("hyperbolic_limit", 1.0, hyp, 1e-14));
    Ok(SelfTestReport {
        moduli: SELF_TEST_MODULI.to_vec(),
        samples_per_modulus: samples,
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(k: f64) -> EllipticModulus {
        EllipticModulus::new(k).unwrap()
    }

    #[test]
    fn agm_basics() {
        assert_eq!(agm(1.0, 1.0).unwrap(), 1.0);
        let a = agm(1.0, 0.3).unwrap();
        let b = agm(0.3, 1.0).unwrap();
        assert!((a - b).abs() <= 4.0 * f64::EPSILON * a);
        assert!(agm(0.0, 1.0).is_err());
        assert!(agm(-1.0, 1.0).is_err());
    }

    #[test]
    fn quarter_period_limits() {
        assert!((ellip_k(m(0.0)).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!(matches!(ellip_k(m(1.0)), Err(Error::Divergence(_))));
        let mut last = 0.0;
        for i in 0..100 {
            let kk = ellip_k(m(i as f64 / 100.0)).unwrap();
            assert!(kk > last);
            last = kk;
        }
    }

    #[test]
    fn modulus_is_validated() {
        assert!(EllipticModulus::new(-0.1).is_err());
        assert!(EllipticModulus::new(1.01).is_err());
        assert!(EllipticModulus::new(f64::NAN).is_err());
    }

    #[test]
    fn origin_values() {
        for k in [0.0, 0.3, 0.9, 1.0] {
            let t = jacobi(0.0, m(k)).unwrap();
            assert_eq!((t.sn, t.cn, t.dn), (0.0, 1.0, 1.0));
        }
    }

    #[test]
    fn degenerate_moduli_are_exact() {
        for u in [-3.0, -0.4, 0.0, 0.9, 7.5] {
            let t = jacobi(u, m(0.0)).unwrap();
            assert_eq!((t.sn, t.cn, t.dn), (u.sin(), u.cos(), 1.0));
            let h = jacobi(u, m(1.0)).unwrap();
            assert_eq!(h.sn, u.tanh());
            assert_eq!(h.cn, 1.0 / u.cosh());
            assert_eq!(h.dn, 1.0 / u.cosh());
        }
    }

    #[test]
    fn reference_values() {
        // mpmath.ellipfun(.., u, m=k^2) at 40 digits, k taken as the exact double
        let cases = [
            (0.7, 0.6, 0.6299171153234868, 0.7766623641084568, 0.9258258983286832),
            (2.3, 0.99, 0.9842705454457934, 0.17666774852202177, 0.22470065565062405),
            (-1.1, 0.2, -0.8880309165857445, 0.459783743936084, 0.9841016429452373),
            (5.0, 0.5, -0.9987707846716766, -0.049567324784816805, 0.866379957017463),
            (30.0, 0.999999999, -0.9999988796670983, -0.0014968849482560727, 0.0014975528517473741),
            (1.3, 0.999999999999, 0.8617231593135699, 0.5073787507401545, 0.507378750741618),
        ];
        for (u, k, sn, cn, dn) in cases {
            let t = jacobi(u, m(k)).unwrap();
            assert!((t.sn - sn).abs() < 1e-13, "sn({u},{k}) = {}", t.sn);
            assert!((t.cn - cn).abs() < 1e-13, "cn({u},{k}) = {}", t.cn);
            assert!((t.dn - dn).abs() < 1e-13, "dn({u},{k}) = {}", t.dn);
        }
    }

    #[test]
    fn sn_derivative_by_central_differences() {
        let (u, k) = (0.7, m(0.6));
        let h = 1e-5;
        let t = jacobi(u, k).unwrap();
        let d = (jacobi(u + h, k).unwrap().sn - jacobi(u - h, k).unwrap().sn) / (2.0 * h);
        assert!((d - t.cn * t.dn).abs() < 1e-8);
    }

    #[test]
    fn taylor_coefficients_match_closed_form_at_k1() {
        let x = Series::var_x(0.4, 5);
        let [s, c, _] = jacobi_series(&x, m(1.0)).unwrap();
        let t = x.tanh();
        let sech = x.cosh().recip();
        for a in 0..=5 {
            assert!((s.coeff(a, 0) - t.coeff(a, 0)).abs() < 1e-13);
            assert!((c.coeff(a, 0) - sech.coeff(a, 0)).abs() < 1e-13);
        }
    }

    #[test]
    fn self_test_passes_and_detects_faults() {
        let ok = self_test(200, 7, 0.0).unwrap();
        assert!(ok.pass, "{:?}", ok.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
        assert_eq!(ok.moduli.len(), 11);
        let bad = self_test(200, 7, 1e-6).unwrap();
        assert!(!bad.pass);
    }

    #[test]
    fn zero_and_pole_maps() {
        let k = m(0.5);
        let quarter = ellip_k(k).unwrap();
        assert!(sn_zero_distance(2.0 * quarter, k) < 1e-14);
        assert!((sn_zero_distance(quarter, k) - quarter).abs() < 1e-14);
        let zs = sn_zeros(k, -0.1, 4.0 * quarter + 0.1);
        assert_eq!(zs.len(), 3);
        assert!(cn_minus_one_distance(2.0 * quarter, k) < 1e-14);
        let t = jacobi(2.0 * quarter, k).unwrap();
        assert!((t.cn + 1.0).abs() < 1e-12);
        assert_eq!(cn_minus_one_distance(3.0, m(1.0)), f64::INFINITY);
        assert_eq!(sn_zeros(m(1.0), -1.0, 1.0), vec![0.0]);
    }
}
