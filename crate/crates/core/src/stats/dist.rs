//! Distribution functions: standard normal, Student t, Fisher F and the
//! Kolmogorov limiting distribution. Everything is built on `libm` so results
//! are identical with and without `std`.

use crate::error::{IcpError, Result};

const SQRT_2: f64 = core::f64::consts::SQRT_2;
const LN_PI: f64 = 1.144_729_885_849_400_2;

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Upper tail `P(Z > x)`.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Standard normal quantile (Wichura's AS 241, about 1e-16 relative error).
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(IcpError::DomainError("probability must lie in (0, 1)"));
    }
    let q = p - 0.5;
    if libm::fabs(q) <= 0.425 {
        let r = 0.180625 - q * q;
        let num = (((((((2509.080_928_730_122_7 * r + 33430.575_583_588_128) * r + 67265.770_927_008_700) * r
            + 45921.953_931_549_871)
            * r
            + 13731.693_765_509_461)
            * r
            + 1971.590_950_306_551_3)
            * r
            + 133.141_667_891_784_38)
            * r
            + 3.387_132_872_796_366_5)
            * q;
        let den = ((((((5226.495_278_852_545_4 * r + 28729.085_735_721_943) * r + 39307.895_800_092_710) * r
            + 21213.794_301_586_595)
            * r
            + 5394.196_021_424_751_1)
            * r
            + 687.187_007_492_057_91)
            * r
            + 42.313_330_701_600_911)
            * r
            + 1.0;
        return Ok(num / den);
    }
    let r0 = if q < 0.0 { p } else { 1.0 - p };
    let mut r = libm::sqrt(-libm::log(r0));
    let val = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.745_450_142_783_414_1e-4 * r + 0.022_723_844_989_269_184) * r + 0.241_780_725_177_450_61)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691_4)
            * r
            + 4.630_337_846_156_545_3)
            * r
            + 1.423_437_110_749_683_5;
        let den =
            ((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_344_9e-4) * r + 0.015_198_666_563_616_457) * r
                + 0.148_103_976_427_480_07)
                * r
                + 0.689_767_334_985_100_05)
                * r
                + 1.676_384_830_183_803_8)
                * r
                + 2.053_191_626_637_758_8)
                * r
                + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 0.001_242_660_947_388_078_4)
            * r
            + 0.026_532_189_526_576_123)
            * r
            + 0.296_560_571_828_504_89)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114_4)
            * r
            + 6.657_904_643_501_103_8;
        let den = ((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_445_9e-7) * r
            + 1.846_318_317_510_054_8e-5)
            * r
            + 7.868_691_311_456_132_6e-4)
            * r
            + 0.014_875_361_290_850_615)
            * r
            + 0.136_929_880_922_735_81)
            * r
            + 0.599_832_206_555_887_94)
            * r
            + 1.0;
        num / den
    };
    Ok(if q < 0.0 { -val } else { val })
}

/// Remainder of Stirling's series, `ln Γ(x) − ((x − ½) ln x − x + ½ ln 2π)`,
/// for `x ≥ 10`.
fn stirling_rem(x: f64) -> f64 {
    let r = 1.0 / (x * x);
    (1.0 / 12.0
        - r * (1.0 / 360.0 - r * (1.0 / 1260.0 - r * (1.0 / 1680.0 - r * (1.0 / 1188.0 - r * 691.0 / 360_360.0)))))
        / x
}

/// `ln B(a, b)`, arranged to avoid cancelling large log-gamma values.
fn ln_beta(a: f64, b: f64) -> f64 {
    const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
    let (p, q) = if a < b { (a, b) } else { (b, a) };
    let s = p + q;
    if p >= 10.0 {
        let corr = stirling_rem(p) + stirling_rem(q) - stirling_rem(s);
        -0.5 * libm::log(q) + LN_SQRT_2PI + corr + (p - 0.5) * libm::log(p / s) + q * libm::log1p(-p / s)
    } else if q >= 10.0 {
        let corr = stirling_rem(q) - stirling_rem(s);
        libm::lgamma(p) + corr + p - p * libm::log(s) + (q - 0.5) * libm::log1p(-p / s)
    } else {
        libm::lgamma(p) + libm::lgamma(q) - libm::lgamma(s)
    }
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if libm::fabs(d) < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..100_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if libm::fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if libm::fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if libm::fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if libm::fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if libm::fabs(del - 1.0) < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn beta_reg(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = a * libm::log(x) + b * libm::log1p(-x) - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        libm::exp(ln_front) * beta_cf(a, b, x) / a
    } else {
        1.0 - libm::exp(ln_front) * beta_cf(b, a, 1.0 - x) / b
    }
}

/// `1 − I_x(a, b)` without cancellation for small tails.
fn beta_reg_complement(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x >= 1.0 {
        return 0.0;
    }
    let ln_front = a * libm::log(x) + b * libm::log1p(-x) - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        1.0 - libm::exp(ln_front) * beta_cf(a, b, x) / a
    } else {
        libm::exp(ln_front) * beta_cf(b, a, 1.0 - x) / b
    }
}

fn check_df(df: f64) -> Result<()> {
    if df > 0.0 && df.is_finite() {
        Ok(())
    } else {
        Err(IcpError::DomainError("degrees of freedom must be positive"))
    }
}

/// Upper tail `P(T > t)` of Student's t with real-valued degrees of freedom.
pub fn t_sf(t: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    if t.is_nan() {
        return Err(IcpError::DomainError("t statistic is NaN"));
    }
    if t.is_infinite() {
        return Ok(if t > 0.0 { 0.0 } else { 1.0 });
    }
    // P(|T| > |t|) = I_{df/(df+t²)}(df/2, 1/2); for small t use the
    // complementary form to keep precision near 1.
    let t2 = t * t;
    let two_tail = if t2 < df {
        beta_reg_complement(0.5, 0.5 * df, t2 / (df + t2))
    } else {
        beta_reg(0.5 * df, 0.5, df / (df + t2))
    };
    Ok(if t >= 0.0 { 0.5 * two_tail } else { 1.0 - 0.5 * two_tail })
}

pub fn t_cdf(t: f64, df: f64) -> Result<f64> {
    t_sf(-t, df)
}

pub fn t_pdf(t: f64, df: f64) -> f64 {
    let ln = libm::lgamma(0.5 * (df + 1.0))
        - libm::lgamma(0.5 * df)
        - 0.5 * (libm::log(df) + LN_PI)
        - 0.5 * (df + 1.0) * libm::log1p(t * t / df);
    libm::exp(ln)
}

/// Two-sided p-value `P(|T| ≥ |t|)`.
pub fn t_two_sided(t: f64, df: f64) -> Result<f64> {
    Ok((2.0 * t_sf(libm::fabs(t), df)?).min(1.0))
}

/// Quantile of Student's t distribution.
pub fn t_quantile(p: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(IcpError::DomainError("probability must lie in (0, 1)"));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    if p < 0.5 {
        return Ok(-upper_t_quantile(p, df)?);
    }
    upper_t_quantile(1.0 - p, df)
}

/// Solves `P(T > t) = tail` for `t > 0` with a safeguarded Newton iteration.
fn upper_t_quantile(tail: f64, df: f64) -> Result<f64> {
    let mut lo = 0.0;
    let mut hi = normal_quantile(1.0 - tail)?.max(1.0);
    while t_sf(hi, df)? > tail {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(IcpError::DomainError("t quantile overflow"));
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = t_sf(t, df)? - tail;
        if f > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let deriv = t_pdf(t, df);
        let mut next = t + f / deriv;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if libm::fabs(next - t) <= 1e-15 * t.max(1.0) || hi - lo <= 1e-15 * hi {
            return Ok(next);
        }
        t = next;
    }
    Ok(t)
}

/// CDF of the F distribution with real-valued degrees of freedom.
pub fn f_cdf_real(x: f64, d1: f64, d2: f64) -> Result<f64> {
    check_df(d1)?;
    check_df(d2)?;
    if !(x >= 0.0) {
        return Err(IcpError::DomainError("F statistic must be nonnegative"));
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let u = d1 * x;
    // Pick the argument closer to 0 for accuracy.
    if u <= d2 {
        Ok(beta_reg(0.5 * d1, 0.5 * d2, u / (u + d2)))
    } else {
        Ok(beta_reg_complement(0.5 * d2, 0.5 * d1, d2 / (u + d2)))
    }
}

/// Upper tail of the F distribution with real-valued degrees of freedom.
pub fn f_sf_real(x: f64, d1: f64, d2: f64) -> Result<f64> {
    check_df(d1)?;
    check_df(d2)?;
    if !(x >= 0.0) {
        return Err(IcpError::DomainError("F statistic must be nonnegative"));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let u = d1 * x;
    if u <= d2 {
        Ok(beta_reg_complement(0.5 * d1, 0.5 * d2, u / (u + d2)))
    } else {
        Ok(beta_reg(0.5 * d2, 0.5 * d1, d2 / (u + d2)))
    }
}

pub fn f_cdf(x: f64, d1: u64, d2: u64) -> Result<f64> {
    f_cdf_real(x, d1 as f64, d2 as f64)
}

pub fn f_sf(x: f64, d1: u64, d2: u64) -> Result<f64> {
    f_sf_real(x, d1 as f64, d2 as f64)
}

/// Survival function of the Kolmogorov distribution,
/// `Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} exp(−2k²λ²)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi theta form of the CDF converges fast for small λ.
        let s = core::f64::consts::PI * core::f64::consts::PI / (8.0 * lambda * lambda);
        let mut cdf = 0.0;
        for k in 1..=20 {
            let j = (2 * k - 1) as f64;
            cdf += libm::exp(-j * j * s);
        }
        let cdf = cdf * libm::sqrt(2.0 * core::f64::consts::PI) / lambda;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = libm::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        if term < 1e-300 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_basics() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-14);
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
    }

    #[test]
    fn f_is_symmetric_at_one() {
        for d in [1u64, 2, 5, 17, 200, 5000] {
            let v = f_cdf(1.0, d, d).unwrap();
            assert!((v - 0.5).abs() < 1e-12, "d = {d} v = {v:e}");
        }
    }

    #[test]
    fn t_quantile_domain() {
        assert!(t_quantile(0.0, 3.0).is_err());
        assert!(t_quantile(0.5, 0.0).is_err());
        assert_eq!(t_quantile(0.5, 4.0).unwrap(), 0.0);
    }

    #[test]
    fn t_quantile_inverts_cdf() {
        for df in [1.0, 2.5, 7.0, 30.0, 1000.0] {
            for p in [0.001, 0.2, 0.6, 0.975, 0.999_999] {
                let q = t_quantile(p, df).unwrap();
                assert!((t_cdf(q, df).unwrap() - p).abs() < 1e-12, "p={p} df={df}");
            }
        }
    }

    #[test]
    fn kolmogorov_branches_agree() {
        // Both series are valid around the switch point.
        let lam: f64 = 1.18;
        let mut series = 0.0;
        for k in 1..=50 {
            let k = k as f64;
            let sign = if (k as i64) % 2 == 1 { 1.0 } else { -1.0 };
            series += sign * libm::exp(-2.0 * k * k * lam * lam);
        }
        assert!((kolmogorov_sf(lam - 1e-12) - 2.0 * series).abs() < 1e-12);
    }
}
