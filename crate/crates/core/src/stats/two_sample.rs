use alloc::vec::Vec;

use super::dist::{f_cdf_real, f_sf_real, kolmogorov_sf, t_two_sided};
use super::{mean, variance};
use crate::error::{IcpError, Result};

fn need(len: usize, needed: usize) -> Result<()> {
    if len < needed {
        Err(IcpError::TooFewSamples { needed, got: len })
    } else {
        Ok(())
    }
}

/// Two-sided Welch t-test for equal means.
pub fn two_sample_t_test(a: &[f64], b: &[f64]) -> Result<f64> {
    need(a.len(), 2)?;
    need(b.len(), 2)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (variance(a) / na, variance(b) / nb);
    let se2 = va + vb;
    if se2 == 0.0 {
        return Ok(if ma == mb { 1.0 } else { 0.0 });
    }
    let t = (ma - mb) / libm::sqrt(se2);
    // Welch–Satterthwaite degrees of freedom.
    let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    t_two_sided(t, df)
}

/// Two-sided F-test for equal variances.
pub fn variance_f_test(a: &[f64], b: &[f64]) -> Result<f64> {
    need(a.len(), 2)?;
    need(b.len(), 2)?;
    let (va, vb) = (variance(a), variance(b));
    if va == 0.0 && vb == 0.0 {
        return Ok(1.0);
    }
    if va == 0.0 || vb == 0.0 {
        return Ok(0.0);
    }
    let r = va / vb;
    let (d1, d2) = ((a.len() - 1) as f64, (b.len() - 1) as f64);
    let lower = f_cdf_real(r, d1, d2)?;
    let upper = f_sf_real(r, d1, d2)?;
    Ok((2.0 * lower.min(upper)).min(1.0))
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut xa: Vec<f64> = a.to_vec();
    let mut xb: Vec<f64> = b.to_vec();
    xa.sort_unstable_by(f64::total_cmp);
    xb.sort_unstable_by(f64::total_cmp);
    ks_statistic_sorted(&xa, &xb)
}

pub(crate) fn ks_statistic_sorted(xa: &[f64], xb: &[f64]) -> f64 {
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let v = if xa[i] <= xb[j] { xa[i] } else { xb[j] };
        while i < xa.len() && xa[i] <= v {
            i += 1;
        }
        while j < xb.len() && xb[j] <= v {
            j += 1;
        }
        d = d.max(libm::fabs(i as f64 / na - j as f64 / nb));
    }
    d
}

/// Asymptotic p-value for a KS statistic with sample sizes `na`, `nb`
/// (with the Stephens small-sample correction).
pub(crate) fn ks_p_value(d: f64, na: usize, nb: usize) -> f64 {
    let en = libm::sqrt((na * nb) as f64 / (na + nb) as f64);
    kolmogorov_sf((en + 0.12 + 0.11 / en) * d)
}

/// Two-sample Kolmogorov–Smirnov test, asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    need(a.len(), 8)?;
    need(b.len(), 8)?;
    let d = ks_statistic(a, b);
    Ok(ks_p_value(d, a.len(), b.len()))
}
