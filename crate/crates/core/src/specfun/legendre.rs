//! Associated Legendre functions and real spherical harmonics.
//!
//! Convention: unsigned Ferrers functions, i.e. **no Condon–Shortley phase**.
//! `P_1^1(x) = +√(1-x²)`. The real harmonics pair `P_ℓ^{|m|}(cos θ)` with
//! `cos(mφ)` for `m ≥ 0` and `sin(|m|φ)` for `m < 0`, normalised with the
//! Neumann factor `ε_0 = 1`, `ε_m = 2`:
//!
//! ```text
//! Y_ℓm(θ, φ) = √(ε_m / 2π) · P̄_ℓ^{|m|}(cos θ) · {cos mφ | sin |m|φ}
//! P̄_ℓ^m = √((2ℓ+1)/2 · (ℓ-m)!/(ℓ+m)!) · P_ℓ^m
//! ```
//!
//! Internally everything runs on the normalised `P̄_ℓ^m`, whose recurrence
//! does not overflow; the unnormalised value is recovered with log-gamma.

use std::f64::consts::PI;

use crate::error::{domain, Result};

/// Fully normalised `P̄_ℓ^m(x)` for all `0 ≤ m ≤ ℓ ≤ lmax` at a single `x`.
#[derive(Debug, Clone)]
pub struct NormalizedLegendre {
    lmax: usize,
    values: Vec<f64>,
}

#[inline]
fn tri(ell: usize, m: usize) -> usize {
    ell * (ell + 1) / 2 + m
}

impl NormalizedLegendre {
    pub fn new(lmax: usize, x: f64) -> Self {
        Self::build(lmax, x, false)
    }

    /// Table of `P̄_ℓ^m(x) / √(1-x²)` for `m ≥ 1` (the `m = 0` column holds
    /// plain `P̄_ℓ^0`). Finite at `x = ±1`, where only `m = 1` survives.
    pub fn over_sin(lmax: usize, x: f64) -> Self {
        Self::build(lmax, x, true)
    }

    fn build(lmax: usize, x: f64, drop_sin: bool) -> Self {
        let s = (1.0 - x * x).max(0.0).sqrt();
        let mut values = vec![0.0; tri(lmax, lmax) + 1];
        let mut pmm = std::f64::consts::FRAC_1_SQRT_2;
        for m in 0..=lmax {
            if m > 0 {
                let mf = m as f64;
                let factor = if drop_sin && m == 1 { 1.0 } else { s };
                pmm *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * factor;
            }
            values[tri(m, m)] = pmm;
            if m == lmax {
                break;
            }
            let mf = m as f64;
            let mut p_prev = pmm;
            let mut p = (2.0 * mf + 3.0).sqrt() * x * pmm;
            values[tri(m + 1, m)] = p;
            for ell in (m + 2)..=lmax {
                let lf = ell as f64;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                    .sqrt();
                let next = a * (x * p - b * p_prev);
                p_prev = p;
                p = next;
                values[tri(ell, m)] = p;
            }
        }
        Self { lmax, values }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    /// `P̄_ℓ^m(x)`; zero when `m > ℓ`.
    #[inline]
    pub fn get(&self, ell: usize, m: usize) -> f64 {
        if m > ell {
            0.0
        } else {
            self.values[tri(ell, m)]
        }
    }
}

/// `ln √((ℓ+m)!/(ℓ-m)! · 2/(2ℓ+1))`, the factor taking `P̄` back to `P`.
fn log_unnormalize(ell: usize, m: usize) -> f64 {
    let (l, mf) = (ell as f64, m as f64);
    0.5 * (libm::lgamma(l + mf + 1.0) - libm::lgamma(l - mf + 1.0) + (2.0 / (2.0 * l + 1.0)).ln())
}

/// Unsigned Ferrers associated Legendre function `P_ℓ^m(x)`, `0 ≤ m ≤ ℓ`, `|x| ≤ 1`.
pub fn legendre_p(ell: u32, m: u32, x: f64) -> Result<f64> {
    if m > ell {
        return domain(format!("order m={m} exceeds degree ell={ell}"));
    }
    if !(x.abs() <= 1.0) {
        return domain(format!("|x| must be at most 1, got {x}"));
    }
    let (l, m) = (ell as usize, m as usize);
    let table = NormalizedLegendre::new(l, x);
    Ok(table.get(l, m) * log_unnormalize(l, m).exp())
}

/// Real spherical harmonic `Y_ℓm(θ, φ)` with signed `m`, `|m| ≤ ℓ`.
pub fn scalar_sph_harm(ell: u32, m: i32, theta: f64, phi: f64) -> Result<f64> {
    if m.unsigned_abs() > ell {
        return domain(format!("|m|={} exceeds ell={ell}", m.unsigned_abs()));
    }
    if !(0.0..=PI).contains(&theta) {
        return domain(format!("theta must lie in [0, π], got {theta}"));
    }
    let am = m.unsigned_abs() as usize;
    let table = NormalizedLegendre::new(ell as usize, theta.cos());
    let pbar = table.get(ell as usize, am);
    Ok(neumann_prefactor(am) * pbar * azimuthal(m, phi))
}

/// `√(ε_m / 2π)`.
#[inline]
pub fn neumann_prefactor(abs_m: usize) -> f64 {
    let eps = if abs_m == 0 { 1.0 } else { 2.0 };
    (eps / (2.0 * PI)).sqrt()
}

/// `cos(mφ)` for `m ≥ 0`, `sin(|m|φ)` for `m < 0`.
#[inline]
pub fn azimuthal(m: i32, phi: f64) -> f64 {
    if m >= 0 {
        (m as f64 * phi).cos()
    } else {
        (m.unsigned_abs() as f64 * phi).sin()
    }
}

/// `P_ℓ(c)`, `P_ℓ'(c)`, `P_ℓ''(c)` for `ℓ = 0..=lmax` (ordinary Legendre
/// polynomials), written into the three output slices.
pub fn legendre_poly_derivs(c: f64, p: &mut [f64], dp: &mut [f64], d2p: &mut [f64]) {
    let n = p.len();
    assert!(dp.len() == n && d2p.len() == n);
    if n == 0 {
        return;
    }
    p[0] = 1.0;
    dp[0] = 0.0;
    d2p[0] = 0.0;
    if n == 1 {
        return;
    }
    p[1] = c;
    dp[1] = 1.0;
    d2p[1] = 0.0;
    for l in 1..n - 1 {
        let lf = l as f64;
        p[l + 1] = ((2.0 * lf + 1.0) * c * p[l] - lf * p[l - 1]) / (lf + 1.0);
        dp[l + 1] = dp[l - 1] + (2.0 * lf + 1.0) * p[l];
        d2p[l + 1] = d2p[l - 1] + (2.0 * lf + 1.0) * dp[l];
    }
}
