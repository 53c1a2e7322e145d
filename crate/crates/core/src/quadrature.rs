//! Adaptive Gauss-Kronrod (7/15) quadrature on finite intervals.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: usize = 48;

fn gk15(f: &mut dyn FnMut(f64) -> Result<f64>, a: f64, b: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx)? + f(center + dx)?;
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Ok((kronrod * half, ((kronrod - gauss) * half).abs()))
}

/// Integral of `f` over `[a, b]` to relative tolerance `rel` (with a tiny
/// absolute floor). Errors from `f` are propagated.
pub fn integrate(
    mut f: impl FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    rel: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain("quadrature interval must be finite".into()));
    }
    let (whole, _) = gk15(&mut f, a, b)?;
    let abs_floor = 1e-15 * whole.abs().max(1e-300);
    let mut stack = vec![(a, b, 0usize)];
    let mut total = 0.0;
    // Per-interval tolerance is split by width.
    let width = (b - a).abs();
    while let Some((lo, hi, depth)) = stack.pop() {
        let (val, err) = gk15(&mut f, lo, hi)?;
        let budget = (rel * whole.abs()).max(abs_floor) * (hi - lo).abs() / width;
        if err <= budget || depth >= MAX_DEPTH {
            if depth >= MAX_DEPTH && err > budget {
                return Err(Error::Evaluation(format!(
                    "quadrature failed to converge on [{lo}, {hi}]"
                )));
            }
            total += val;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    if !total.is_finite() {
        return Err(Error::Evaluation("non-finite quadrature result".into()));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_and_trig() {
        let v = integrate(|x| Ok(x * x * x - 2.0 * x), 0.0, 2.0, 1e-13).unwrap();
        assert!((v - 0.0).abs() < 1e-13);
        let s = integrate(|x| Ok(x.sin()), 0.0, PI, 1e-13).unwrap();
        assert!((s - 2.0).abs() < 1e-13);
        let back = integrate(|x| Ok(x.exp()), 1.0, 0.0, 1e-13).unwrap();
        assert!((back - (1.0 - 1f64.exp())).abs() < 1e-13);
    }

    #[test]
    fn peaked_integrand() {
        let v = integrate(|x| Ok(1.0 / (1e-4 + x * x)), -1.0, 1.0, 1e-12).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn errors_propagate() {
        let r = integrate(
            |x| {
                if x > 0.5 {
                    Err(Error::Domain("pole".into()))
                } else {
                    Ok(x)
                }
            },
            0.0,
            1.0,
            1e-10,
        );
        assert!(r.is_err());
    }
}
