use std::f64::consts::PI;

use mieprop::vsh::{
    eval_vsh, gram_matrix, identity_defect, surface_gradient_y, HarmonicTable, ModeIndex, SphereGrid,
    SphericalPoint,
};
use proptest::prelude::*;

fn sph(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Tangential part of a smooth ambient field, restricted to the unit sphere.
fn test_field(theta: f64, phi: f64) -> [f64; 3] {
    let x = sph(theta, phi);
    let g = [(x[0] / 2.0).exp(), (x[1] + x[2]).cos(), x[0] * x[1]];
    let n = dot(g, x);
    [g[0] - n * x[0], g[1] - n * x[1], g[2] - n * x[2]]
}

#[test]
fn gram_identity_small_degree() {
    for lmax in [1u32, 4, 9] {
        let modes = ModeIndex::enumerate(lmax);
        let g = gram_matrix(&modes, &SphereGrid::for_degree(lmax as usize)).unwrap();
        assert!(identity_defect(&g, modes.len()) < 1e-12, "lmax {lmax}");
    }
}

#[test]
fn tangential_completeness() {
    let lmax = 30usize;
    let grid = SphereGrid::for_degree(2 * lmax);
    let tangential: Vec<ModeIndex> = ModeIndex::enumerate(lmax as u32).into_iter().filter(|m| m.j != 3).collect();
    let mut coeff = vec![0.0; tangential.len()];
    for (t, p, w) in grid.nodes() {
        let tab = HarmonicTable::new(lmax, t, p);
        let f = test_field(t, p);
        for (c, m) in coeff.iter_mut().zip(&tangential) {
            *c += w * dot(f, tab.psi(m.j, m.ell as usize, m.m));
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..400u32 {
        let t = PI * (i as f64 + 0.5) / 400.0;
        let p = 2.0 * PI * ((i as f64 * 0.618_033_988_749_895) % 1.0);
        let tab = HarmonicTable::new(lmax, t, p);
        let mut rec = [0.0; 3];
        for (c, m) in coeff.iter().zip(&tangential) {
            let v = tab.psi(m.j, m.ell as usize, m.m);
            for k in 0..3 {
                rec[k] += c * v[k];
            }
        }
        let f = test_field(t, p);
        worst = worst.max((0..3).map(|k| (rec[k] - f[k]).abs()).fold(0.0, f64::max));
    }
    assert!(worst < 1e-6, "reconstruction error {worst}");
}

#[test]
fn sup_norm_grows_like_sqrt_ell() {
    let lmax = 60usize;
    let grid = SphereGrid::for_degree(lmax);
    // sup over the grid, both poles and all m, per (j, ℓ); m = ±1 peaks at the poles
    let mut sup = vec![[0.0f64; 3]; lmax + 1];
    let poles = [(0.0, 0.0), (PI, 0.0)];
    for (t, p) in grid.nodes().map(|(t, p, _)| (t, p)).chain(poles) {
        let tab = HarmonicTable::new(lmax, t, p);
        for l in 1..=lmax {
            for m in -(l as i32)..=(l as i32) {
                for j in 1..=3u8 {
                    let v = tab.psi(j, l, m);
                    let s = &mut sup[l][j as usize - 1];
                    *s = s.max(dot(v, v).sqrt());
                }
            }
        }
    }
    for j in 0..3 {
        let c: Vec<f64> = (4..=lmax).map(|l| sup[l][j] / (l as f64).sqrt()).collect();
        let hi = c.iter().cloned().fold(0.0, f64::max);
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(hi / lo < 2.0, "family {} constant ratio {}", j + 1, hi / lo);
        let (ls, ss): (Vec<f64>, Vec<f64>) = (10..=lmax).map(|l| ((l as f64).ln(), sup[l][j].ln())).unzip();
        let slope = least_squares_slope(&ls, &ss);
        assert!((slope - 0.5).abs() < 0.1, "family {} growth exponent {slope}", j + 1);
    }
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[test]
fn surface_gradient_examples() {
    let g = surface_gradient_y(0, 0, 0.7, 1.1).unwrap();
    assert!(g.max_abs() == 0.0);
    let g = surface_gradient_y(1, 0, PI / 2.0, 0.0).unwrap().to_array();
    assert!(g[0].norm() < 1e-15 && g[1].norm() < 1e-15);
    assert!((g[2].re - (3.0 / (4.0 * PI)).sqrt()).abs() < 1e-15);
    let grid = SphereGrid::for_degree(12);
    for (l, m) in [(1u32, 1i32), (5, -3), (12, 7)] {
        let n = grid.integrate(|t, p| surface_gradient_y(l, m, t, p).unwrap().norm_sqr());
        assert!((n - (l * (l + 1)) as f64).abs() < 1e-10 * (l * (l + 1)) as f64);
    }
}

#[test]
fn pole_values_are_finite_and_continuous() {
    for m in ModeIndex::enumerate(8) {
        for (pole, near) in [(0.0, 1e-7), (PI, PI - 1e-7)] {
            let a = eval_vsh(m, pole, 0.4).unwrap();
            let b = eval_vsh(m, near, 0.4).unwrap();
            assert!(a.is_finite());
            assert!((a - b).max_abs() < 1e-5 * (m.ell as f64 + 1.0).powi(2), "{m:?}");
        }
    }
}

fn mode_strategy(lmax: u32) -> impl Strategy<Value = ModeIndex> {
    (1u8..=3, 1u32..=lmax).prop_flat_map(|(j, l)| {
        (-(l as i32)..=(l as i32)).prop_map(move |m| ModeIndex::new(j, l, m).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn tangency_and_radiality(mode in mode_strategy(40), t in 0.0f64..PI, p in 0.0f64..(2.0 * PI)) {
        let v = eval_vsh(mode, t, p).unwrap();
        let rhat = sph(t, p);
        let radial = v.dot_real(rhat).norm();
        if mode.j == 3 {
            prop_assert!((radial - v.norm()).abs() <= 1e-13 * v.norm().max(1.0));
        } else {
            prop_assert!(radial <= 1e-13 * v.norm().max(1.0));
        }
    }

    #[test]
    fn antipodal_parity(mode in mode_strategy(40), t in 0.0f64..PI, p in 0.0f64..(2.0 * PI)) {
        // Ψ_1 has parity (-1)^ℓ, Ψ_2 and Ψ_3 have (-1)^{ℓ+1}
        let s = if (mode.ell + u32::from(mode.j != 1)) % 2 == 0 { 1.0 } else { -1.0 };
        let a = eval_vsh(mode, t, p).unwrap();
        let b = eval_vsh(mode, PI - t, p + PI).unwrap();
        prop_assert!((b - a * s).max_abs() <= 1e-11 * (mode.ell as f64).sqrt());
    }

    #[test]
    fn cartesian_round_trip(r in 1e-3f64..1e3, t in 0.0f64..PI, p in 0.0f64..(2.0 * PI)) {
        let q = SphericalPoint::new(r, t, p).unwrap();
        let back = SphericalPoint::from_cartesian(q.to_cartesian()).unwrap();
        let (a, b) = (q.to_cartesian(), back.to_cartesian());
        for k in 0..3 {
            prop_assert!((a[k] - b[k]).abs() <= 1e-12 * r);
        }
        prop_assert!((back.r - r).abs() <= 1e-12 * r);
    }

    #[test]
    fn orthonormal_frame(t in 0.01f64..3.13, p in 0.0f64..(2.0 * PI)) {
        let q = SphericalPoint::new(2.0, t, p).unwrap();
        let (e1, e2, e3) = (q.r_hat(), q.theta_hat(), q.phi_hat());
        for (a, b, want) in [(e1, e1, 1.0), (e2, e2, 1.0), (e3, e3, 1.0), (e1, e2, 0.0), (e1, e3, 0.0), (e2, e3, 0.0)] {
            prop_assert!((dot(a, b) - want).abs() < 1e-14);
        }
    }
}

#[test]
fn invalid_modes_rejected() {
    assert!(ModeIndex::new(1, 0, 0).is_err());
    assert!(ModeIndex::new(4, 2, 0).is_err());
    assert!(ModeIndex::new(2, 2, 3).is_err());
    assert!(ModeIndex::enumerate(5).iter().all(|m| (m.j == 3 || m.ell >= 1) && m.m.unsigned_abs() <= m.ell));
    assert!(SphericalPoint::new(-1.0, 0.5, 0.5).is_err());
}
