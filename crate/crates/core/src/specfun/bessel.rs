//! Spherical Bessel and Hankel functions of real positive argument.
//!
//! `j_ℓ` is computed by upward recurrence from the closed forms while
//! `ℓ ≤ z`, and otherwise by Miller's downward recurrence normalised with
//! `Σ (2ℓ+1) j_ℓ(z)² = 1`. `y_ℓ` is always computed upward from the closed
//! forms of `y_0`, `y_1`, which is the stable direction for the second kind.
//! `h^{(1)}_ℓ = j_ℓ + i y_ℓ` and `h^{(2)}_ℓ` is its conjugate.

use std::f64::consts::{E, PI};

use num_complex::Complex64;
use twofloat::TwoFloat;

use crate::error::{domain, Result};
use crate::summation::NeumaierSum;

/// Radial function family used by the Riccati derivative and the modal series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RadialKind {
    /// Spherical Bessel function of the first kind `j_ℓ`.
    J,
    /// Outgoing spherical Hankel function `h^{(1)}_ℓ`.
    H1,
    /// Incoming spherical Hankel function `h^{(2)}_ℓ = conj(h^{(1)}_ℓ)`.
    H2,
}

/// Growth threshold for rescaling the Miller recurrence; its square must stay
/// finite because the normalisation sum accumulates `f²`.
const RESCALE_AT: f64 = 1e130;

fn check_arg(z: f64) -> Result<()> {
    if !(z.is_finite() && z > 0.0) {
        return domain(format!("argument must be finite and positive, got {z}"));
    }
    Ok(())
}

/// Fills `out[ℓ] = j_ℓ(z)` for `ℓ = 0..out.len()`. Requires `z > 0`.
pub fn fill_spherical_j(out: &mut [f64], z: f64) {
    let n = out.len();
    if n == 0 {
        return;
    }
    debug_assert!(z > 0.0);
    let (s, c) = z.sin_cos();
    let inv_z = 1.0 / z;
    let j0 = s / z;
    if (n - 1) as f64 <= z {
        out[0] = j0;
        if n > 1 {
            out[1] = (s / z - c) / z;
        }
        for l in 1..n.saturating_sub(1) {
            out[l + 1] = (2 * l + 1) as f64 * inv_z * out[l] - out[l - 1];
        }
        return;
    }

    let top = ((n - 1) as f64).max(z);
    let start = (top + 10.0 * top.cbrt()).ceil() as usize + 20;
    let mut f_next = 0.0; // f_{ℓ+1}
    let mut f = 1e-20; // f_ℓ at ℓ = start
    let mut norm = (2 * start + 1) as f64 * f * f;
    if start < n {
        out[start] = f;
    }
    for l in (1..=start).rev() {
        let f_prev = (2 * l + 1) as f64 * inv_z * f - f_next;
        f_next = f;
        f = f_prev;
        let lm1 = l - 1;
        norm += (2 * lm1 + 1) as f64 * f * f;
        if lm1 < n {
            out[lm1] = f;
        }
        if f.abs() > RESCALE_AT {
            let k = 1.0 / RESCALE_AT;
            f *= k;
            f_next *= k;
            norm *= k * k;
            for v in out.iter_mut().skip(lm1).take(n.saturating_sub(lm1)) {
                *v *= k;
            }
        }
    }
    // `f` holds the unnormalised j_0, `f_next` the unnormalised j_1.
    let mut scale = 1.0 / norm.sqrt();
    let reference_sign = if s.abs() > 0.1 {
        j0 * f
    } else {
        let j1 = (s / z - c) / z;
        j1 * f_next
    };
    if reference_sign < 0.0 {
        scale = -scale;
    }
    for v in out.iter_mut() {
        *v *= scale;
    }
}

/// Fills `out[ℓ] = y_ℓ(z)` for `ℓ = 0..out.len()` by upward recurrence.
/// Values that overflow become `-inf`.
pub fn fill_spherical_y(out: &mut [f64], z: f64) {
    let n = out.len();
    if n == 0 {
        return;
    }
    debug_assert!(z > 0.0);
    let (s, c) = z.sin_cos();
    let inv_z = 1.0 / z;
    out[0] = -c / z;
    if n > 1 {
        out[1] = -(c / z + s) / z;
    }
    for l in 1..n.saturating_sub(1) {
        out[l + 1] = (2 * l + 1) as f64 * inv_z * out[l] - out[l - 1];
    }
}

/// `j_ℓ(z)` for `ℓ = 0..=lmax`.
pub fn spherical_j_seq(lmax: usize, z: f64) -> Result<Vec<f64>> {
    check_arg(z)?;
    let mut v = vec![0.0; lmax + 1];
    fill_spherical_j(&mut v, z);
    Ok(v)
}

/// `y_ℓ(z)` for `ℓ = 0..=lmax`.
pub fn spherical_y_seq(lmax: usize, z: f64) -> Result<Vec<f64>> {
    check_arg(z)?;
    let mut v = vec![0.0; lmax + 1];
    fill_spherical_y(&mut v, z);
    Ok(v)
}

/// `h^{(1)}_ℓ(z)` for `ℓ = 0..=lmax`.
pub fn spherical_h1_seq(lmax: usize, z: f64) -> Result<Vec<Complex64>> {
    let j = spherical_j_seq(lmax, z)?;
    let y = spherical_y_seq(lmax, z)?;
    Ok(j.into_iter()
        .zip(y)
        .map(|(a, b)| Complex64::new(a, b))
        .collect())
}

/// `h^{(1)}_ℓ(z)` for `ℓ = 0..=lmax` stored as `values[ℓ] · exp(log_scale[ℓ])`,
/// so orders far beyond `z` do not overflow. Consecutive entries share a
/// scale except across a rescaling step, which `riccati` accounts for.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledHankel {
    pub z: f64,
    pub values: Vec<Complex64>,
    pub log_scale: Vec<f64>,
}

impl ScaledHankel {
    pub fn new(lmax: usize, z: f64) -> Result<Self> {
        let j = spherical_j_seq(lmax + 1, z)?;
        let n = lmax + 2;
        let (s, c) = z.sin_cos();
        let inv_z = 1.0 / z;
        let mut y = vec![0.0; n];
        let mut scale = vec![0.0; n];
        y[0] = -c / z;
        y[1] = -(c / z + s) / z;
        let mut cur = 0.0;
        let (mut prev, mut now) = (y[0], y[1]);
        for l in 1..n - 1 {
            let next = (2 * l + 1) as f64 * inv_z * now - prev;
            prev = now;
            now = next;
            if now.abs() > RESCALE_AT {
                prev /= RESCALE_AT;
                now /= RESCALE_AT;
                cur += RESCALE_AT.ln();
            }
            y[l + 1] = now;
            scale[l + 1] = cur;
        }
        let values = j
            .iter()
            .zip(&y)
            .zip(&scale)
            .map(|((&a, &b), &e)| Complex64::new(a * (-e).exp(), b))
            .collect();
        Ok(Self {
            z,
            values,
            log_scale: scale,
        })
    }

    /// `(z h_ℓ)'` in the scale of entry `ℓ`; needs `ℓ + 1 ≤ lmax + 1`.
    pub fn riccati(&self, ell: usize) -> Complex64 {
        let z = self.z;
        if ell == 0 {
            let f1 = self.values[1] * (self.log_scale[1] - self.log_scale[0]).exp();
            self.values[0] - f1 * z
        } else {
            let f0 = self.values[ell - 1] * (self.log_scale[ell - 1] - self.log_scale[ell]).exp();
            f0 * z - self.values[ell] * ell as f64
        }
    }
}

pub fn spherical_bessel_j(ell: u32, z: f64) -> Result<f64> {
    Ok(spherical_j_seq(ell as usize, z)?[ell as usize])
}

pub fn spherical_bessel_y(ell: u32, z: f64) -> Result<f64> {
    Ok(spherical_y_seq(ell as usize, z)?[ell as usize])
}

pub fn spherical_hankel1(ell: u32, z: f64) -> Result<Complex64> {
    Ok(Complex64::new(
        spherical_bessel_j(ell, z)?,
        spherical_bessel_y(ell, z)?,
    ))
}

/// Values of `f_ℓ(z)` for the requested family, `ℓ = 0..=lmax`.
pub fn radial_seq(kind: RadialKind, lmax: usize, z: f64) -> Result<Vec<Complex64>> {
    match kind {
        RadialKind::J => Ok(spherical_j_seq(lmax, z)?
            .into_iter()
            .map(Complex64::from)
            .collect()),
        RadialKind::H1 => spherical_h1_seq(lmax, z),
        RadialKind::H2 => Ok(spherical_h1_seq(lmax, z)?
            .into_iter()
            .map(|h| h.conj())
            .collect()),
    }
}

/// Riccati derivative `(z f_ℓ(z))' = z f_{ℓ-1}(z) - ℓ f_ℓ(z)` from a
/// sequence holding at least `f_0..=f_ℓ` (and `f_1` when `ℓ = 0`).
pub fn riccati_from_seq<T>(f: &[T], ell: usize, z: f64) -> T
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Sub<Output = T>,
{
    if ell == 0 {
        // (z f_0)' = f_0 - z f_1
        f[0] - f[1] * z
    } else {
        f[ell - 1] * z - f[ell] * ell as f64
    }
}

/// `(z f_ℓ(z))'` for `f ∈ {j, h^{(1)}, h^{(2)}}`.
pub fn riccati_derivative(kind: RadialKind, ell: u32, z: f64) -> Result<Complex64> {
    let l = ell as usize;
    let f = radial_seq(kind, l + 1, z)?;
    Ok(riccati_from_seq(&f, l, z))
}

/// Closed-form `|h^{(1)}_ℓ(z)|² = Σ_{k=0}^{ℓ} s_k(ℓ+½) / z^{2k+2}` with
/// `s_k(ℓ+½) = (2k)!(ℓ+k)! / (2^{2k}(k!)²(ℓ-k)!)`.
///
/// Independent of the recurrences: used as the oracle for the magnitude of
/// the Hankel function. Orders above 150 accumulate the terms in log space.
pub fn hankel_abs_sq_oracle(ell: u32, z: f64) -> Result<f64> {
    check_arg(z)?;
    let l = ell as f64;
    let z2 = z * z;
    if ell <= 150 {
        let mut term = 1.0 / z2;
        let mut acc = NeumaierSum::new();
        acc.add(term);
        for k in 1..=ell {
            let kf = k as f64;
            term *= (2.0 * kf - 1.0) * (l + kf) * (l - kf + 1.0) / (2.0 * kf * z2);
            acc.add(term);
        }
        return Ok(acc.value());
    }
    let mut logs = Vec::with_capacity(ell as usize + 1);
    let mut lt = -z2.ln();
    logs.push(lt);
    for k in 1..=ell {
        let kf = k as f64;
        lt += ((2.0 * kf - 1.0) * (l + kf) * (l - kf + 1.0) / (2.0 * kf)).ln() - z2.ln();
        logs.push(lt);
    }
    let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let acc: NeumaierSum = logs.iter().map(|&x| (x - peak).exp()).collect();
    Ok(peak.exp() * acc.value())
}

/// Finite-sum form `h^{(1)}_n(z) = (-i)^{n+1} e^{iz}/z Σ_{m=0}^{n}
/// i^m (n+m)! / (m! (2z)^m (n-m)!)`.
///
/// For `n ≳ z` the terms grow far beyond the result and cancel, so the sum
/// is accumulated in double-double arithmetic.
pub fn hankel1_explicit(ell: u32, z: f64) -> Result<Complex64> {
    check_arg(z)?;
    let n = ell as f64;
    let i = Complex64::i();
    let inv_2z = TwoFloat::from(1.0) / (2.0 * z);
    let mut term = TwoFloat::from(1.0);
    let (mut re, mut im) = (TwoFloat::from(1.0), TwoFloat::from(0.0));
    for m in 1..=ell {
        let mf = m as f64;
        term = term * ((n + mf) * (n - mf + 1.0)) / mf * inv_2z;
        match m % 4 {
            0 => re += term,
            1 => im += term,
            2 => re -= term,
            _ => im -= term,
        }
    }
    let phase = (-i).powu(ell + 1) * Complex64::from_polar(1.0 / z, z);
    Ok(phase * Complex64::new(f64::from(re), f64::from(im)))
}

/// Which large-order envelope to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeKind {
    /// `(1/√(2πν)) (ez/2ν)^ν`, a bound on `|J_ν(z)|`.
    J,
    /// `2√(2/(πν)) (ez/2ν)^{-ν}`, the large-order size of `|H^{(1)}_ν(z)|`.
    H1,
}

/// Large-order envelope in the cylindrical-order convention, real order `nu > 0`.
pub fn large_order_envelope_nu(kind: EnvelopeKind, nu: f64, z: f64) -> f64 {
    let log_ratio = (E * z / (2.0 * nu)).ln();
    match kind {
        EnvelopeKind::J => (nu * log_ratio - 0.5 * (2.0 * PI * nu).ln()).exp(),
        EnvelopeKind::H1 => 2.0 * (2.0 / (PI * nu)).sqrt() * (-nu * log_ratio).exp(),
    }
}

/// Large-order envelope for integer order `ell ≥ 1`.
pub fn large_order_envelope(kind: EnvelopeKind, ell: u32, z: f64) -> f64 {
    large_order_envelope_nu(kind, ell as f64, z)
}

/// Rigorous bound `|j_ℓ(z)| ≤ √(π/2z) (z/2)^{ℓ+½} / Γ(ℓ+3/2)` for real `z > 0`.
pub fn spherical_j_upper_bound(ell: usize, z: f64) -> f64 {
    let nu = ell as f64 + 0.5;
    let log_b = 0.5 * (PI / (2.0 * z)).ln() + nu * (0.5 * z).ln() - libm::lgamma(nu + 1.0);
    log_b.exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn closed_form_values() {
        assert!(spherical_bessel_j(0, PI).unwrap().abs() < 1e-16);
        // sin z/z² - cos z/z at z = 1
        assert!(close(
            spherical_bessel_j(1, 1.0).unwrap(),
            0.301_168_678_939_756_8,
            1e-14
        ));
        assert!(spherical_bessel_y(0, PI / 2.0).unwrap().abs() < 1e-16);
        assert!(close(
            spherical_bessel_y(0, 1.0).unwrap(),
            -0.540_302_305_868_139_8,
            1e-14
        ));
        assert!(close(
            spherical_bessel_y(1, 1.0).unwrap(),
            -1.381_773_290_676_036_2,
            1e-14
        ));
    }

    #[test]
    fn domain_errors() {
        assert!(spherical_bessel_j(1, 0.0).is_err());
        assert!(spherical_bessel_y(1, -1.0).is_err());
        assert!(spherical_hankel1(1, f64::NAN).is_err());
        assert!(hankel_abs_sq_oracle(3, 0.0).is_err());
    }

    #[test]
    fn miller_and_upward_agree_across_the_switch() {
        // z just above and below ℓ_max switches between the two branches.
        for &z in &[9.5, 10.0, 10.5, 30.0] {
            let a = spherical_j_seq(10, z).unwrap();
            let b = spherical_j_seq(40, z).unwrap();
            for l in 0..=10 {
                assert!((a[l] - b[l]).abs() < 1e-14, "z={z} l={l} {} {}", a[l], b[l]);
            }
        }
    }

    #[test]
    fn tiny_values_deep_in_the_evanescent_region() {
        let j = spherical_bessel_j(40, 1.0).unwrap();
        assert!(j > 0.0);
        assert!(j <= large_order_envelope(EnvelopeKind::J, 40, 1.0));
        // Far past the turning point the value underflows cleanly to zero.
        let v = spherical_j_seq(1500, 60.0).unwrap();
        assert!(v.iter().all(|x| x.is_finite()));
        assert_eq!(v[1500], 0.0);
    }

    #[test]
    fn riccati_ell_zero_uses_the_upper_form() {
        let z = 1.3;
        let d = riccati_derivative(RadialKind::J, 0, z).unwrap();
        // (z sin z / z)' = cos z
        assert!((d.re - z.cos()).abs() < 1e-14);
    }

    #[test]
    fn oracle_log_branch_is_continuous() {
        // ℓ = 150 uses the product branch, ℓ = 151 the log branch; both agree
        // with the recurrence.
        for ell in [150u32, 151] {
            let z = 200.0;
            let h = spherical_hankel1(ell, z).unwrap();
            let o = hankel_abs_sq_oracle(ell, z).unwrap();
            assert!(close(h.norm_sqr(), o, 1e-12), "ell={ell}");
        }
    }

    #[test]
    fn j_upper_bound_holds() {
        for ell in [0usize, 1, 5, 20, 80] {
            for &z in &[0.5, 2.0, 10.0, 50.0] {
                let j = spherical_bessel_j(ell as u32, z).unwrap().abs();
                assert!(j <= spherical_j_upper_bound(ell, z) * (1.0 + 1e-12));
            }
        }
    }
}
