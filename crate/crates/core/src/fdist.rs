//! Central F distribution: CDF and quantile.
//!
//! The CDF goes through the regularized incomplete beta function, evaluated
//! by its continued fraction (modified Lentz). Quantiles are found by
//! bisection on a log scale, which is slow but cannot fail for the small
//! degrees of freedom that show up in design criteria.

use crate::error::{Error, Result};

// Lanczos approximation, g = 7, n = 9 (Godfrey's coefficients).
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const QUANTILE_LO: f64 = 1e-8;
const QUANTILE_HI: f64 = 1e8;

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!("ln_gamma of {x}")));
    }
    Ok(ln_gamma_pos(x))
}

fn ln_gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1-x) = π / sin(πx)
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma_pos(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta function `I_x(a, b)`.
///
/// Panics if `x` is outside `[0, 1]` or a shape parameter is not positive.
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> f64 {
    assert!((0.0..=1.0).contains(&x), "reg_inc_beta: x = {x} outside [0, 1]");
    assert!(a > 0.0 && b > 0.0, "reg_inc_beta: shapes must be positive");
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma_pos(a + b) - ln_gamma_pos(a) - ln_gamma_pos(b)
        + a * x.ln()
        + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cont_frac(x, a, b) / a
    } else {
        1.0 - front * beta_cont_frac(1.0 - x, b, a) / b
    }
}

fn beta_cont_frac(x: f64, a: f64, b: f64) -> f64 {
    const MAX_ITER: usize = 1000;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        // even step
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        // odd step
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

fn check_dfs(df1: u32, df2: u32) -> Result<()> {
    if df1 == 0 || df2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "F distribution needs positive degrees of freedom, got ({df1}, {df2})"
        )));
    }
    Ok(())
}

/// `P(F <= x)` for `F ~ F(df1, df2)`.
pub fn f_cdf(x: f64, df1: u32, df2: u32) -> Result<f64> {
    check_dfs(df1, df2)?;
    if x.is_nan() || x < 0.0 {
        return Err(Error::InvalidArgument(format!("f_cdf at {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let (a, b) = (df1 as f64, df2 as f64);
    let z = a * x / (a * x + b);
    Ok(reg_inc_beta(z, a / 2.0, b / 2.0))
}

/// The `prob` quantile of `F(df1, df2)`.
pub fn f_quantile(prob: f64, df1: u32, df2: u32) -> Result<f64> {
    check_dfs(df1, df2)?;
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "quantile probability {prob} outside (0, 1)"
        )));
    }
    let cdf = |x: f64| f_cdf(x, df1, df2).expect("validated dfs");
    let (mut lo, mut hi) = (QUANTILE_LO, QUANTILE_HI);
    if cdf(lo) >= prob {
        return Ok(lo);
    }
    if cdf(hi) <= prob {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if cdf(mid) < prob {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
