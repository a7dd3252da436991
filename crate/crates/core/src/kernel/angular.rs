//! Closed-form `m`-sums of vector harmonic outer products.
//!
//! With `u = ŷ`, `v = ŷ'`, `c = u·v` and `F_ℓ(c) = (2ℓ+1)/(4π) P_ℓ(c)`,
//! the addition theorem gives
//!
//! ```text
//! Σ_m Ψ_3(u) Ψ_3(v)ᵀ = F  u vᵀ
//! Σ_m Ψ_2(u) Ψ_3(v)ᵀ = F'/√L (v - cu) vᵀ
//! Σ_m Ψ_3(u) Ψ_2(v)ᵀ = F'/√L u (u - cv)ᵀ
//! Σ_m Ψ_2(u) Ψ_2(v)ᵀ = (F'/L) A_1 + (F''/L) A_2
//! Σ_m Ψ_1(u) Ψ_1(v)ᵀ = (F'/L) X_u A_1 X_vᵀ + (F''/L) X_u A_2 X_vᵀ
//! A_1 = I - uuᵀ - vvᵀ + c uvᵀ,  A_2 = (v - cu)(u - cv)ᵀ
//! ```
//!
//! where `X_u w = u × w`.

use std::f64::consts::PI;

use crate::specfun::legendre_poly_derivs;

pub type RealMat3 = [[f64; 3]; 3];

/// Slot order of the structural matrices and their scalar weights.
pub const B1: usize = 0;
pub const B2: usize = 1;
pub const A1: usize = 2;
pub const A2: usize = 3;
pub const C23: usize = 4;
pub const C32: usize = 5;
pub const C33: usize = 6;
pub const N_STRUCT: usize = 7;

/// `F_ℓ`, `F_ℓ'`, `F_ℓ''` at `c` for `ℓ = 0..=lmax`.
#[derive(Debug, Clone)]
pub struct AngularFactors {
    pub f: Vec<f64>,
    pub fp: Vec<f64>,
    pub fpp: Vec<f64>,
}

impl AngularFactors {
    pub fn new(lmax: usize, c: f64) -> Self {
        let n = lmax + 1;
        let (mut f, mut fp, mut fpp) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        legendre_poly_derivs(c.clamp(-1.0, 1.0), &mut f, &mut fp, &mut fpp);
        for l in 0..n {
            let s = (2 * l + 1) as f64 / (4.0 * PI);
            f[l] *= s;
            fp[l] *= s;
            fpp[l] *= s;
        }
        Self { f, fp, fpp }
    }
}

fn outer(a: [f64; 3], b: [f64; 3]) -> RealMat3 {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for k in 0..3 {
            m[i][k] = a[i] * b[k];
        }
    }
    m
}

fn cross_matrix(u: [f64; 3]) -> RealMat3 {
    [[0.0, -u[2], u[1]], [u[2], 0.0, -u[0]], [-u[1], u[0], 0.0]]
}

fn mul(a: &RealMat3, b: &RealMat3) -> RealMat3 {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for k in 0..3 {
            m[i][k] = (0..3).map(|q| a[i][q] * b[q][k]).sum();
        }
    }
    m
}

fn transpose(a: &RealMat3) -> RealMat3 {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for k in 0..3 {
            m[i][k] = a[k][i];
        }
    }
    m
}

/// The seven structural matrices for unit directions `u`, `v`, in slot order.
pub fn structural_matrices(u: [f64; 3], v: [f64; 3]) -> [RealMat3; N_STRUCT] {
    let c: f64 = (0..3).map(|i| u[i] * v[i]).sum::<f64>().clamp(-1.0, 1.0);
    let v_cu = [0, 1, 2].map(|i| v[i] - c * u[i]);
    let u_cv = [0, 1, 2].map(|i| u[i] - c * v[i]);
    let mut a1 = outer(u, v);
    let uu = outer(u, u);
    let vv = outer(v, v);
    for i in 0..3 {
        for k in 0..3 {
            a1[i][k] = if i == k { 1.0 } else { 0.0 } - uu[i][k] - vv[i][k] + c * a1[i][k];
        }
    }
    let a2 = outer(v_cu, u_cv);
    let xu = cross_matrix(u);
    let xvt = transpose(&cross_matrix(v));
    let b1 = mul(&mul(&xu, &a1), &xvt);
    let b2 = mul(&mul(&xu, &a2), &xvt);
    [b1, b2, a1, a2, outer(v_cu, v), outer(u, u_cv), outer(u, v)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vsh::HarmonicTable;

    fn dir(theta: f64, phi: f64) -> [f64; 3] {
        [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
    }

    #[test]
    fn addition_theorem_matches_explicit_m_sums() {
        let (t1, p1, t2, p2) = (0.7, 1.9, 2.2, 4.1);
        let (u, v) = (dir(t1, p1), dir(t2, p2));
        let c: f64 = (0..3).map(|i| u[i] * v[i]).sum();
        let lmax = 12;
        let ta = HarmonicTable::new(lmax, t1, p1);
        let tb = HarmonicTable::new(lmax, t2, p2);
        let ang = AngularFactors::new(lmax, c);
        let s = structural_matrices(u, v);
        for ell in 1..=lmax {
            let l = (ell * (ell + 1)) as f64;
            let mut direct = [[[0.0; 3]; 3]; 4]; // 11, 22, 23, 33
            for m in -(ell as i32)..=(ell as i32) {
                let pa = [1, 2, 3].map(|j| ta.psi(j, ell, m));
                let pb = [1, 2, 3].map(|j| tb.psi(j, ell, m));
                for i in 0..3 {
                    for k in 0..3 {
                        direct[0][i][k] += pa[0][i] * pb[0][k];
                        direct[1][i][k] += pa[1][i] * pb[1][k];
                        direct[2][i][k] += pa[1][i] * pb[2][k];
                        direct[3][i][k] += pa[2][i] * pb[2][k];
                    }
                }
            }
            for i in 0..3 {
                for k in 0..3 {
                    let m11 = (ang.fp[ell] * s[B1][i][k] + ang.fpp[ell] * s[B2][i][k]) / l;
                    let m22 = (ang.fp[ell] * s[A1][i][k] + ang.fpp[ell] * s[A2][i][k]) / l;
                    let m23 = ang.fp[ell] * s[C23][i][k] / l.sqrt();
                    let m33 = ang.f[ell] * s[C33][i][k];
                    let tol = 1e-12 * (ell * ell) as f64;
                    assert!((m11 - direct[0][i][k]).abs() < tol, "11 ell={ell}");
                    assert!((m22 - direct[1][i][k]).abs() < tol, "22 ell={ell}");
                    assert!((m23 - direct[2][i][k]).abs() < tol, "23 ell={ell}");
                    assert!((m33 - direct[3][i][k]).abs() < tol, "33 ell={ell}");
                }
            }
        }
    }
}
