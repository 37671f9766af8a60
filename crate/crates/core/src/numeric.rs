//! Small numerical helpers shared across modules.

/// `ln(2 cosh u)` without overflow: `|u| + ln(1 + e^{-2|u|})`.
#[inline]
pub fn ln_2cosh(u: f64) -> f64 {
    let a = u.abs();
    a + (-2.0 * a).exp().ln_1p()
}

/// `1 / cosh^2(u)`, evaluated through `e^{-2|u|}` so it underflows to zero
/// instead of producing `inf / inf`.
#[inline]
pub fn sech2(u: f64) -> f64 {
    let e = (-2.0 * u.abs()).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

/// Inverse hyperbolic tangent that is exactly odd in floating point.
///
/// `f64::atanh` evaluates `2y / (1 - y)` for both signs, so `atanh(-y)` and
/// `-atanh(y)` can differ in the last bit. Reflection symmetry of the
/// Legendre curve is checked bit-for-bit, so the magnitude is always computed
/// from `|y|`.
#[inline]
pub fn atanh_odd(y: f64) -> f64 {
    let a = y.abs();
    let v = 0.5 * (2.0 * a / (1.0 - a)).ln_1p();
    v.copysign(y)
}

/// `n` evenly spaced points on `[lo, hi]`.
///
/// Points are generated around the midpoint so that a range symmetric about
/// zero yields a grid with `g[n-1-i] == -g[i]` exactly.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => {
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            let m = (n - 1) as f64;
            (0..n)
                .map(|i| {
                    let t = (2 * i) as f64 - m;
                    mid + half * (t / m)
                })
                .collect()
        }
    }
}

/// Ordinary least-squares slope and intercept of `ys` against `xs`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Observed convergence order from errors at successive step halvings.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Numerically stable `ln(sum(exp(v)))`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}
