use mieprop::specfun::{
    hankel1_explicit, hankel_abs_sq_oracle, large_order_envelope, riccati_from_seq, spherical_bessel_j,
    spherical_h1_seq, spherical_hankel1, spherical_j_seq, spherical_y_seq, EnvelopeKind,
};
use proptest::prelude::*;

fn deriv_from_seq(f: &[f64], l: usize, z: f64) -> f64 {
    // f' = f_{l-1} - (l+1)/z f_l, and -f_1 for l = 0
    if l == 0 {
        -f[1]
    } else {
        f[l - 1] - (l + 1) as f64 / z * f[l]
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn wronskian(l in 0usize..=60, z in 0.5f64..200.0) {
        let j = spherical_j_seq(l + 1, z).unwrap();
        let y = spherical_y_seq(l + 1, z).unwrap();
        let w = j[l] * deriv_from_seq(&y, l, z) - deriv_from_seq(&j, l, z) * y[l];
        prop_assert!((w * z * z - 1.0).abs() <= 1e-10, "l={l} z={z} w z^2={}", w * z * z);
    }

    #[test]
    fn hankel_is_j_plus_i_y(l in 0usize..=60, z in 0.5f64..200.0) {
        let h = spherical_h1_seq(l, z).unwrap();
        let j = spherical_j_seq(l, z).unwrap();
        let y = spherical_y_seq(l, z).unwrap();
        prop_assert_eq!(h[l].re, j[l]);
        prop_assert_eq!(h[l].im, y[l]);
    }

    #[test]
    fn magnitude_identity(l in 0u32..=60, z in 0.5f64..200.0) {
        let h = spherical_hankel1(l, z).unwrap();
        let want = hankel_abs_sq_oracle(l, z).unwrap();
        prop_assert!((h.norm_sqr() - want).abs() <= 1e-10 * want);
    }

    #[test]
    fn explicit_sum_matches_recurrence(l in 0u32..=40, z in 0.5f64..100.0) {
        let h = spherical_hankel1(l, z).unwrap();
        let e = hankel1_explicit(l, z).unwrap();
        prop_assert!((h - e).norm() <= 1e-12 * e.norm(), "l={l} z={z}");
    }

    #[test]
    fn hankel_modulus_grows_with_order(k in 0usize..60, extra in 0usize..20, z in 0.3f64..150.0) {
        let n = k + extra;
        let h = spherical_h1_seq(n, z).unwrap();
        prop_assert!(h[k].norm() <= h[n].norm() * (1.0 + 1e-13));
    }

    #[test]
    fn hankel_modulus_decreases_in_argument(l in 0u32..60, z in 0.3f64..150.0, dz in 1e-3f64..5.0) {
        let a = spherical_hankel1(l, z).unwrap().norm();
        let b = spherical_hankel1(l, z + dz).unwrap().norm();
        prop_assert!(b <= a * (1.0 + 1e-13));
    }

    #[test]
    fn derivative_recurrence_matches_central_difference(l in 1usize..=40, z in 1.0f64..100.0) {
        let s = 1e-4 * (z / (l + 1) as f64).min(1.0);
        let jp = spherical_j_seq(l, z + s).unwrap()[l];
        let jm = spherical_j_seq(l, z - s).unwrap()[l];
        let j = spherical_j_seq(l + 1, z).unwrap();
        let fd = (jp - jm) / (2.0 * s);
        let exact = deriv_from_seq(&j, l, z);
        let scale = j[l - 1].abs() + (l + 1) as f64 / z * j[l].abs();
        prop_assert!((fd - exact).abs() <= 1e-7 * scale);
    }

    #[test]
    fn radial_ode_residual(l in 0usize..=30, z in 1.0f64..60.0) {
        let s = 1e-3 * (z / (l + 1) as f64).min(1.0);
        let w = |x: f64| spherical_h1_seq(l, x).unwrap()[l];
        let (wm, w0, wp) = (w(z - s), w(z), w(z + s));
        let d1 = (wp - wm) / (2.0 * s);
        let d2 = (wp - w0 * 2.0 + wm) / (s * s);
        let res = d2 * z * z + d1 * 2.0 * z + w0 * (z * z - (l * (l + 1)) as f64);
        let scale = w0.norm() * (z * z + (l * (l + 1)) as f64) + 2.0 * z * d1.norm();
        prop_assert!(res.norm() <= 1e-5 * scale, "l={l} z={z} rel={}", res.norm() / scale);
    }

    #[test]
    fn riccati_derivative_is_product_rule(l in 0usize..=40, z in 0.5f64..100.0) {
        let j = spherical_j_seq(l + 1, z).unwrap();
        let r = riccati_from_seq(&j, l, z);
        let pr = j[l] + z * deriv_from_seq(&j, l, z);
        prop_assert!((r - pr).abs() <= 1e-12 * (j[l].abs() + z * j[l + 1].abs() + z * j[l.saturating_sub(1)].abs()));
    }

    #[test]
    fn j_below_large_order_envelope(l in 2u32..=80, frac in 0.05f64..0.7) {
        // ℓ > ez/2
        let z = frac * 2.0 * l as f64 / std::f64::consts::E;
        let j = spherical_bessel_j(l, z).unwrap().abs();
        let env = large_order_envelope(EnvelopeKind::J, l, z);
        prop_assert!(j <= env * (1.0 + 1e-12));
    }
}

#[test]
fn envelope_product_is_argument_free() {
    for &l in &[3u32, 10, 40] {
        let p: Vec<f64> = [0.5, 2.0, 7.0]
            .iter()
            .map(|&z| large_order_envelope(EnvelopeKind::J, l, z) * large_order_envelope(EnvelopeKind::H1, l, z))
            .collect();
        assert!((p[0] - p[1]).abs() <= 1e-12 * p[0] && (p[0] - p[2]).abs() <= 1e-12 * p[0]);
    }
}

#[test]
fn domain_errors() {
    assert!(spherical_bessel_j(3, 0.0).is_err());
    assert!(spherical_bessel_j(3, -1.0).is_err());
    assert!(spherical_hankel1(3, f64::NAN).is_err());
}
