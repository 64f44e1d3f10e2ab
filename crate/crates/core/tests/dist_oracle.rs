//! Distribution functions against values computed with mpmath at 40 digits.

#![allow(clippy::excessive_precision)]

use icp_core::stats::dist::{f_cdf, f_sf, kolmogorov_sf, normal_cdf, normal_quantile, t_cdf, t_quantile};

fn close(got: f64, want: f64) {
    let tol = 1e-10 * want.abs().max(if want.abs() < 1e-3 { 0.0 } else { 1.0 });
    let tol = tol.max(1e-300);
    assert!((got - want).abs() <= tol, "got {got:e}, want {want:e}");
}

#[test]
fn normal_cdf_reference() {
    for (x, want) in [
        (-8.0, 6.2209605742717841235e-16),
        (-3.5, 0.00023262907903552503635),
        (-1.0, 0.15865525393145705141),
        (0.3, 0.61791142218895263307),
        (2.5, 0.99379033467422386483),
    ] {
        close(normal_cdf(x), want);
    }
}

#[test]
fn normal_quantile_reference() {
    for (p, want) in [
        (1e-10, -6.3613409024040561991),
        (0.001, -3.0902323061678135354),
        (0.2, -0.84162123357291416552),
        (0.5, 0.0),
        (0.975, 1.9599639845400538556),
        (0.999999, 4.7534243088170877657),
    ] {
        let got = normal_quantile(p).unwrap();
        assert!((got - want).abs() < 1e-10, "p = {p}: {got} vs {want}");
    }
}

#[test]
fn t_cdf_reference() {
    for (t, df, want) in [
        (-2.5, 3.0, 0.043853323504032773625),
        (0.7, 1.0, 0.69440011221421478),
        (1.96, 10.0, 0.96078187987615014353),
        (3.2, 47.5, 0.99877493599488339564),
        (-0.1, 200.0, 0.46022224625216051938),
        (6.0, 5.0, 0.99907693085520299279),
    ] {
        close(t_cdf(t, df).unwrap(), want);
    }
}

#[test]
fn t_quantile_reference() {
    for (p, df, want) in [
        (0.975, 1.0, 12.706204736174693314),
        (0.975, 5.0, 2.5705818356363147828),
        (0.99, 30.0, 2.4572615424005909873),
        (0.9999, 12.0, 5.2632730078260339573),
        (0.6, 2.5, 0.28145951274854759175),
        (0.025, 100.0, -1.9839715185235522621),
    ] {
        close(t_quantile(p, df).unwrap(), want);
    }
}

#[test]
fn f_reference() {
    for (x, d1, d2, want) in [
        (0.5, 1, 1, 0.39182655203060727017),
        (2.0, 3, 10, 0.82199259262482458762),
        (1.3, 10, 500, 0.77273467078141492707),
        (4.5, 2, 7, 0.9446110412783719133),
        (0.05, 20, 3, 3.1016497407938091124e-6),
    ] {
        close(f_cdf(x, d1, d2).unwrap(), want);
    }
    for (x, d1, d2, want) in [
        (30.0, 3, 40, 2.5002827378619154651e-10),
        (8.0, 100, 100, 3.4632066773729429636e-22),
        (12.0, 1, 2000, 0.00054321211597240336404),
    ] {
        close(f_sf(x, d1, d2).unwrap(), want);
    }
}

#[test]
fn kolmogorov_reference() {
    for (l, want) in [
        (0.3, 0.99999069419866543338),
        (0.8, 0.54414241157419807674),
        (1.0, 0.2699996716773545212),
        (1.18, 0.12345380942976571391),
        (1.36, 0.04948587675537788364),
        (2.0, 0.00067092525577969534654),
        (3.0, 3.0459959489425256872e-8),
    ] {
        close(kolmogorov_sf(l), want);
    }
}
