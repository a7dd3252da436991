//! Vector spherical harmonics in Cartesian components and quadrature on the
//! unit sphere.
//!
//! With `L = ℓ(ℓ+1)` and the real harmonics `Y_ℓm` of [`crate::specfun`]:
//!
//! ```text
//! Ψ_1 = Grad Y_ℓm × r̂ / √L      (tangential, divergence free)
//! Ψ_2 = Grad Y_ℓm / √L          (tangential, curl free)
//! Ψ_3 = r̂ Y_ℓm                  (radial)
//! ```
//!
//! `Grad` is the surface gradient `∂_θY θ̂ + (1/sin θ) ∂_φY φ̂`. Both
//! tangential pieces are computed from `P̄_ℓ^m` and `P̄_ℓ^m / sin θ`, so the
//! pole limits come out of the same formulas without special casing.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::quadrature::GaussLegendre;
use crate::specfun::{neumann_prefactor, NormalizedLegendre};

/// Complex 3-vector in the ambient Cartesian frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexVec3 {
    pub x: Complex64,
    pub y: Complex64,
    pub z: Complex64,
}

impl ComplexVec3 {
    pub const ZERO: Self = Self {
        x: Complex64::new(0.0, 0.0),
        y: Complex64::new(0.0, 0.0),
        z: Complex64::new(0.0, 0.0),
    };

    pub fn new(x: Complex64, y: Complex64, z: Complex64) -> Self {
        Self { x, y, z }
    }

    pub fn from_real(v: [f64; 3]) -> Self {
        Self::new(v[0].into(), v[1].into(), v[2].into())
    }

    pub fn to_array(self) -> [Complex64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [Complex64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn conj(self) -> Self {
        Self::new(self.x.conj(), self.y.conj(), self.z.conj())
    }

    /// Bilinear product `Σ a_i b_i`.
    pub fn dot(self, o: Self) -> Complex64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    /// Hermitian pairing `Σ a_i conj(b_i)`.
    pub fn dot_conj(self, o: Self) -> Complex64 {
        self.dot(o.conj())
    }

    /// Bilinear product with a real vector.
    pub fn dot_real(self, v: [f64; 3]) -> Complex64 {
        self.x * v[0] + self.y * v[1] + self.z * v[2]
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_sqr(self) -> f64 {
        self.x.norm_sqr() + self.y.norm_sqr() + self.z.norm_sqr()
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Largest component modulus.
    pub fn max_abs(self) -> f64 {
        self.x.norm().max(self.y.norm()).max(self.z.norm())
    }

    pub fn is_finite(self) -> bool {
        self.to_array().iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl Add for ComplexVec3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for ComplexVec3 {
    fn add_assign(&mut self, o: Self) {
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
    }
}

impl Sub for ComplexVec3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for ComplexVec3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for ComplexVec3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Complex64> for ComplexVec3 {
    type Output = Self;
    fn mul(self, s: Complex64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

/// A point in spherical coordinates, `r > 0`, `θ ∈ [0, π]`, `φ ∈ [0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalPoint {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl SphericalPoint {
    pub fn new(r: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return domain(format!("radius must be positive, got {r}"));
        }
        if !(0.0..=PI).contains(&theta) {
            return domain(format!("theta must lie in [0, π], got {theta}"));
        }
        if !phi.is_finite() {
            return domain("phi must be finite");
        }
        Ok(Self {
            r,
            theta,
            phi: phi.rem_euclid(2.0 * PI),
        })
    }

    pub fn from_cartesian(v: [f64; 3]) -> Result<Self> {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(r.is_finite() && r > 0.0) {
            return domain("cannot convert the origin to spherical coordinates");
        }
        let theta = (v[2] / r).clamp(-1.0, 1.0).acos();
        let phi = v[1].atan2(v[0]).rem_euclid(2.0 * PI);
        Self::new(r, theta, phi)
    }

    pub fn to_cartesian(&self) -> [f64; 3] {
        let rh = self.r_hat();
        [self.r * rh[0], self.r * rh[1], self.r * rh[2]]
    }

    pub fn r_hat(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    pub fn theta_hat(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [ct * cp, ct * sp, -st]
    }

    pub fn phi_hat(&self) -> [f64; 3] {
        let (sp, cp) = self.phi.sin_cos();
        [-sp, cp, 0.0]
    }

    /// Same direction at another radius.
    pub fn with_radius(&self, r: f64) -> Result<Self> {
        Self::new(r, self.theta, self.phi)
    }
}

/// Vector harmonic family: 1 and 2 are tangential, 3 is radial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex {
    pub j: u8,
    pub ell: u32,
    pub m: i32,
}

impl ModeIndex {
    /// Validates `j ∈ {1,2,3}`, `|m| ≤ ℓ` and `ℓ ≥ 1` for the tangential families.
    pub fn new(j: u8, ell: u32, m: i32) -> Result<Self> {
        if !(1..=3).contains(&j) {
            return domain(format!("family j must be 1, 2 or 3, got {j}"));
        }
        if m.unsigned_abs() > ell {
            return domain(format!("|m|={} exceeds ell={ell}", m.unsigned_abs()));
        }
        if j < 3 && ell == 0 {
            return domain(format!("family j={j} needs ell >= 1"));
        }
        Ok(Self { j, ell, m })
    }

    /// All modes with `ℓ ≤ lmax` in the order `j`, then `ℓ`, then `m = -ℓ..=ℓ`.
    /// The radial family starts at `ℓ = 0`, the tangential ones at `ℓ = 1`.
    pub fn enumerate(lmax: u32) -> Vec<Self> {
        let mut out = Vec::new();
        for j in 1..=3u8 {
            let lmin = if j == 3 { 0 } else { 1 };
            for ell in lmin..=lmax {
                for m in -(ell as i32)..=(ell as i32) {
                    out.push(Self { j, ell, m });
                }
            }
        }
        out
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.j, self.ell, self.m)
    }
}

/// Offset of `(ℓ, m)` in a table holding all `|m| ≤ ℓ ≤ lmax`.
#[inline]
pub fn lm_index(ell: usize, m: i32) -> usize {
    ell * ell + (ell as i64 + m as i64) as usize
}

/// `Y_ℓm`, `∂_θ Y_ℓm` and `(1/sin θ) ∂_φ Y_ℓm` for every `|m| ≤ ℓ ≤ lmax`
/// at one direction, plus the local frame.
#[derive(Debug, Clone)]
pub struct HarmonicTable {
    lmax: usize,
    y: Vec<f64>,
    d_theta: Vec<f64>,
    d_phi_over_sin: Vec<f64>,
    r_hat: [f64; 3],
    theta_hat: [f64; 3],
    phi_hat: [f64; 3],
}

impl HarmonicTable {
    pub fn new(lmax: usize, theta: f64, phi: f64) -> Self {
        let x = theta.cos();
        let s = theta.sin().abs();
        // One extra degree so that the m-ladder derivative can reach m+1.
        let pbar = NormalizedLegendre::new(lmax + 1, x);
        let qbar = NormalizedLegendre::over_sin(lmax + 1, x);
        let n = (lmax + 1) * (lmax + 1);
        let mut y = vec![0.0; n];
        let mut d_theta = vec![0.0; n];
        let mut d_phi_over_sin = vec![0.0; n];
        let (cos_m, sin_m): (Vec<f64>, Vec<f64>) = (0..=lmax)
            .map(|m| {
                let (sm, cm) = (m as f64 * phi).sin_cos();
                (cm, sm)
            })
            .unzip();
        for ell in 0..=lmax {
            let lf = ell as f64;
            for am in 0..=ell {
                let mf = am as f64;
                let p = if am == 0 { pbar.get(ell, 0) } else { s * qbar.get(ell, am) };
                // dP̄_ℓ^m/dθ = ½[√((ℓ+m)(ℓ-m+1)) P̄^{m-1} - √((ℓ-m)(ℓ+m+1)) P̄^{m+1}]
                let up = ((lf - mf) * (lf + mf + 1.0)).sqrt() * pm(&pbar, &qbar, s, ell, am + 1);
                let dp = if am == 0 {
                    -up
                } else {
                    let down = ((lf + mf) * (lf - mf + 1.0)).sqrt() * pm(&pbar, &qbar, s, ell, am - 1);
                    0.5 * (down - up)
                };
                let q = if am == 0 { 0.0 } else { qbar.get(ell, am) };
                let norm = neumann_prefactor(am);
                let ip = lm_index(ell, am as i32);
                y[ip] = norm * p * cos_m[am];
                d_theta[ip] = norm * dp * cos_m[am];
                d_phi_over_sin[ip] = -norm * mf * q * sin_m[am];
                if am > 0 {
                    let im = lm_index(ell, -(am as i32));
                    y[im] = norm * p * sin_m[am];
                    d_theta[im] = norm * dp * sin_m[am];
                    d_phi_over_sin[im] = norm * mf * q * cos_m[am];
                }
            }
        }
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self {
            lmax,
            y,
            d_theta,
            d_phi_over_sin,
            r_hat: [st * cp, st * sp, ct],
            theta_hat: [ct * cp, ct * sp, -st],
            phi_hat: [-sp, cp, 0.0],
        }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn r_hat(&self) -> [f64; 3] {
        self.r_hat
    }

    #[inline]
    pub fn y(&self, ell: usize, m: i32) -> f64 {
        self.y[lm_index(ell, m)]
    }

    /// Surface gradient of `Y_ℓm` in Cartesian components.
    #[inline]
    pub fn grad_y(&self, ell: usize, m: i32) -> [f64; 3] {
        let i = lm_index(ell, m);
        let (a, b) = (self.d_theta[i], self.d_phi_over_sin[i]);
        let (t, p) = (self.theta_hat, self.phi_hat);
        [a * t[0] + b * p[0], a * t[1] + b * p[1], a * t[2] + b * p[2]]
    }

    /// `Grad Y_ℓm × r̂ = (1/sin θ)∂_φY θ̂ - ∂_θY φ̂`.
    #[inline]
    pub fn grad_y_cross_r(&self, ell: usize, m: i32) -> [f64; 3] {
        let i = lm_index(ell, m);
        let (a, b) = (self.d_theta[i], self.d_phi_over_sin[i]);
        let (t, p) = (self.theta_hat, self.phi_hat);
        [b * t[0] - a * p[0], b * t[1] - a * p[1], b * t[2] - a * p[2]]
    }

    /// Real Cartesian value of `Ψ_{j,ℓ,m}`; the caller guarantees a valid mode.
    #[inline]
    pub fn psi(&self, j: u8, ell: usize, m: i32) -> [f64; 3] {
        let inv = if ell == 0 { 0.0 } else { 1.0 / ((ell * (ell + 1)) as f64).sqrt() };
        match j {
            1 => self.grad_y_cross_r(ell, m).map(|c| c * inv),
            2 => self.grad_y(ell, m).map(|c| c * inv),
            _ => self.r_hat.map(|c| c * self.y(ell, m)),
        }
    }
}

#[inline]
fn pm(pbar: &NormalizedLegendre, qbar: &NormalizedLegendre, s: f64, ell: usize, m: usize) -> f64 {
    if m == 0 {
        pbar.get(ell, 0)
    } else {
        s * qbar.get(ell, m)
    }
}

/// `Grad_{S²} Y_ℓm(θ, φ)` in Cartesian components, unit sphere.
pub fn surface_gradient_y(ell: u32, m: i32, theta: f64, phi: f64) -> Result<ComplexVec3> {
    if m.unsigned_abs() > ell {
        return domain(format!("|m|={} exceeds ell={ell}", m.unsigned_abs()));
    }
    if !(0.0..=PI).contains(&theta) {
        return domain(format!("theta must lie in [0, π], got {theta}"));
    }
    let t = HarmonicTable::new(ell as usize, theta, phi);
    Ok(ComplexVec3::from_real(t.grad_y(ell as usize, m)))
}

/// `Ψ_{j,ℓ,m}(θ, φ)` on the unit sphere.
pub fn eval_vsh(mode: ModeIndex, theta: f64, phi: f64) -> Result<ComplexVec3> {
    let mode = ModeIndex::new(mode.j, mode.ell, mode.m)?;
    if !(0.0..=PI).contains(&theta) {
        return domain(format!("theta must lie in [0, π], got {theta}"));
    }
    let t = HarmonicTable::new(mode.ell as usize, theta, phi);
    Ok(ComplexVec3::from_real(t.psi(mode.j, mode.ell as usize, mode.m)))
}

/// Product grid: Gauss–Legendre in `cos θ` times the trapezoid rule in `φ`.
/// `θ` nodes increase with the ring index; exact poles are never nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    /// Per-ring weights (Gauss weight in `cos θ` times `2π/n_φ`).
    pub ring_weights: Vec<f64>,
}

impl SphereGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 {
            return domain("sphere grid needs at least one node in each direction");
        }
        let gl = GaussLegendre::new(n_theta);
        let dphi = 2.0 * PI / n_phi as f64;
        // GL nodes increase in x = cos θ, so reverse to make θ increase.
        let thetas: Vec<f64> = gl.nodes.iter().rev().map(|x| x.acos()).collect();
        let ring_weights = gl.weights.iter().rev().map(|w| w * dphi).collect();
        let phis = (0..n_phi).map(|k| k as f64 * dphi).collect();
        Ok(Self {
            thetas,
            phis,
            ring_weights,
        })
    }

    /// `(2ℓ_max + 4) × (4ℓ_max + 4)` nodes.
    pub fn for_degree(lmax: usize) -> Self {
        Self::new(2 * lmax + 4, 4 * lmax + 4).expect("nonzero node counts")
    }

    pub fn n_theta(&self) -> usize {
        self.thetas.len()
    }

    pub fn n_phi(&self) -> usize {
        self.phis.len()
    }

    pub fn len(&self) -> usize {
        self.n_theta() * self.n_phi()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of node `(ring, k)`.
    #[inline]
    pub fn index(&self, ring: usize, k: usize) -> usize {
        ring * self.n_phi() + k
    }

    /// `(θ, φ, weight)` of each node in flat order.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.thetas.iter().zip(&self.ring_weights).flat_map(move |(&t, &w)| {
            self.phis.iter().map(move |&p| (t, p, w))
        })
    }

    /// Samples a field at every node.
    pub fn sample(&self, mut f: impl FnMut(f64, f64) -> ComplexVec3) -> GridField {
        let values = self.nodes().map(|(t, p, _)| f(t, p)).collect();
        GridField {
            grid: self.clone(),
            values,
        }
    }

    /// Quadrature of a scalar function.
    pub fn integrate(&self, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        let partial: Vec<f64> = self.nodes().map(|(t, p, w)| w * f(t, p)).collect();
        crate::summation::pairwise_sum(&partial)
    }
}

/// A vector field sampled on a [`SphereGrid`], values in flat node order.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub grid: SphereGrid,
    pub values: Vec<ComplexVec3>,
}

impl GridField {
    pub fn zeros(grid: &SphereGrid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![ComplexVec3::ZERO; grid.len()],
        }
    }

    pub fn from_mode(grid: &SphereGrid, mode: ModeIndex) -> Result<Self> {
        let mode = ModeIndex::new(mode.j, mode.ell, mode.m)?;
        Ok(grid.sample(|t, p| {
            let tab = HarmonicTable::new(mode.ell as usize, t, p);
            ComplexVec3::from_real(tab.psi(mode.j, mode.ell as usize, mode.m))
        }))
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// `∫_{S²} f · conj(g) dσ` by the product rule of the shared grid.
pub fn sphere_inner_product(f: &GridField, g: &GridField) -> Result<Complex64> {
    if f.grid != g.grid || f.values.len() != g.values.len() {
        return Err(Error::GridMismatch(format!(
            "fields sampled on {}x{} and {}x{} grids",
            f.grid.n_theta(),
            f.grid.n_phi(),
            g.grid.n_theta(),
            g.grid.n_phi()
        )));
    }
    let np = f.grid.n_phi();
    let partial: Vec<Complex64> = f
        .values
        .iter()
        .zip(&g.values)
        .enumerate()
        .map(|(i, (a, b))| a.dot_conj(*b) * f.grid.ring_weights[i / np])
        .collect();
    Ok(crate::summation::pairwise_sum(&partial))
}

/// Pull-back by the antipodal map `x ↦ -x`: node `(θ, φ)` receives the
/// value at `(π - θ, φ + π)`. Vector values are not reflected.
pub fn antipodal_pullback(f: &GridField) -> Result<GridField> {
    let grid = &f.grid;
    let (nt, np) = (grid.n_theta(), grid.n_phi());
    if np % 2 != 0 {
        return Err(Error::GridMismatch(format!(
            "antipodal map needs an even number of φ nodes, got {np}"
        )));
    }
    for i in 0..nt {
        if (grid.thetas[i] + grid.thetas[nt - 1 - i] - PI).abs() > 1e-12 {
            return Err(Error::GridMismatch("θ nodes are not symmetric about π/2".into()));
        }
    }
    let mut values = Vec::with_capacity(f.values.len());
    for i in 0..nt {
        for k in 0..np {
            values.push(f.values[grid.index(nt - 1 - i, (k + np / 2) % np)]);
        }
    }
    Ok(GridField {
        grid: grid.clone(),
        values,
    })
}

/// Gram matrix `G_{μν} = ⟨Ψ_μ, Ψ_ν⟩` over `modes` on `grid`, row-major.
///
/// The harmonics are real, so `G = Φᵀ W Φ` with `Φ` the (3·nodes × modes)
/// sample matrix. `Φ` is built a few rings at a time and accumulated with
/// a blocked GEMM to keep memory bounded.
pub fn gram_matrix(modes: &[ModeIndex], grid: &SphereGrid) -> Result<Vec<f64>> {
    for mode in modes {
        ModeIndex::new(mode.j, mode.ell, mode.m)?;
    }
    let n = modes.len();
    let lmax = modes.iter().map(|m| m.ell as usize).max().unwrap_or(0);
    let np = grid.n_phi();
    let mut gram = vec![0.0; n * n];
    if n == 0 {
        return Ok(gram);
    }
    const RINGS_PER_CHUNK: usize = 4;
    for chunk_start in (0..grid.n_theta()).step_by(RINGS_PER_CHUNK) {
        let rings = chunk_start..(chunk_start + RINGS_PER_CHUNK).min(grid.n_theta());
        let rows = rings.len() * np * 3;
        let mut phi_mat = vec![0.0; rows * n];
        let mut weighted = vec![0.0; rows * n];
        let mut row = 0;
        for ring in rings {
            let w = grid.ring_weights[ring];
            for &p in &grid.phis {
                let tab = HarmonicTable::new(lmax, grid.thetas[ring], p);
                for (c, mode) in modes.iter().enumerate() {
                    let v = tab.psi(mode.j, mode.ell as usize, mode.m);
                    for (d, &vd) in v.iter().enumerate() {
                        phi_mat[(row + d) * n + c] = vd;
                        weighted[(row + d) * n + c] = w * vd;
                    }
                }
                row += 3;
            }
        }
        // gram (n×n) += phi_matᵀ (n×rows) · weighted (rows×n)
        unsafe {
            matrixmultiply::dgemm(
                n,
                rows,
                n,
                1.0,
                phi_mat.as_ptr(),
                1,
                n as isize,
                weighted.as_ptr(),
                n as isize,
                1,
                1.0,
                gram.as_mut_ptr(),
                n as isize,
                1,
            );
        }
    }
    Ok(gram)
}

/// Max-entry distance of a row-major `n × n` matrix from the identity.
pub fn identity_defect(gram: &[f64], n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for k in 0..n {
            let target = if i == k { 1.0 } else { 0.0 };
            worst = worst.max((gram[i * n + k] - target).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn spot_values() {
        let g = surface_gradient_y(1, 0, PI / 2.0, 0.0).unwrap();
        assert!((g.z.re - 0.488_602_511_902_919_9).abs() < 1e-15);
        assert!(g.x.norm() < 1e-16 && g.y.norm() < 1e-16);
        let g0 = surface_gradient_y(0, 0, 0.7, 1.1).unwrap();
        assert_eq!(g0.norm(), 0.0);
        let p3 = eval_vsh(ModeIndex::new(3, 1, 0).unwrap(), 0.0, 0.3).unwrap();
        assert!((p3.z.re - 0.488_602_511_902_919_9).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_modes() {
        assert!(ModeIndex::new(1, 0, 0).is_err());
        assert!(ModeIndex::new(3, 0, 0).is_ok());
        assert!(ModeIndex::new(2, 2, 3).is_err());
        assert!(ModeIndex::new(4, 2, 0).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (theta, phi) = (1.1, 2.3);
        let p = SphericalPoint::new(1.0, theta, phi).unwrap();
        let d = 1e-6;
        for ell in 0..8u32 {
            for m in -(ell as i32)..=(ell as i32) {
                let y = |t: f64, f: f64| crate::specfun::scalar_sph_harm(ell, m, t, f).unwrap();
                let dt = (y(theta + d, phi) - y(theta - d, phi)) / (2.0 * d);
                let dp = (y(theta, phi + d) - y(theta, phi - d)) / (2.0 * d) / theta.sin();
                let th = p.theta_hat();
                let ph = p.phi_hat();
                let fd = [0, 1, 2].map(|i| dt * th[i] + dp * ph[i]);
                let g = surface_gradient_y(ell, m, theta, phi).unwrap();
                let g = [g.x.re, g.y.re, g.z.re];
                assert!(close(g, fd, 1e-8), "ell={ell} m={m} {g:?} {fd:?}");
            }
        }
    }

    #[test]
    fn pole_values_are_limits() {
        for ell in 1..6u32 {
            for m in -(ell as i32)..=(ell as i32) {
                for (pole, near) in [(0.0, 1e-7), (PI, PI - 1e-7)] {
                    let a = surface_gradient_y(ell, m, pole, 0.4).unwrap();
                    let b = surface_gradient_y(ell, m, near, 0.4).unwrap();
                    assert!((a - b).norm() < 1e-5, "ell={ell} m={m}");
                    if m.abs() != 1 {
                        assert!(a.norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn tangential_families_are_tangent() {
        for &(t, p) in &[(0.3, 0.1), (1.5, 4.0), (2.9, 6.0)] {
            let tab = HarmonicTable::new(20, t, p);
            let rh = tab.r_hat();
            for ell in 1..=20usize {
                for m in -(ell as i32)..=(ell as i32) {
                    for j in 1..=2 {
                        let v = tab.psi(j, ell, m);
                        let d: f64 = (0..3).map(|i| v[i] * rh[i]).sum();
                        assert!(d.abs() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn small_gram_is_identity() {
        let modes = ModeIndex::enumerate(6);
        let grid = SphereGrid::for_degree(6);
        let g = gram_matrix(&modes, &grid).unwrap();
        assert!(identity_defect(&g, modes.len()) < 1e-12);
    }

    #[test]
    fn inner_product_rejects_grid_mismatch() {
        let a = GridField::zeros(&SphereGrid::new(4, 8).unwrap());
        let b = GridField::zeros(&SphereGrid::new(5, 8).unwrap());
        assert!(matches!(sphere_inner_product(&a, &b), Err(Error::GridMismatch(_))));
        let c = GridField::zeros(&SphereGrid::new(4, 7).unwrap());
        assert!(antipodal_pullback(&c).is_err());
    }

    #[test]
    fn cartesian_round_trip() {
        let p = SphericalPoint::new(2.5, 0.8, 5.9).unwrap();
        let q = SphericalPoint::from_cartesian(p.to_cartesian()).unwrap();
        assert!((p.r - q.r).abs() < 1e-12);
        assert!((p.theta - q.theta).abs() < 1e-12);
        assert!((p.phi - q.phi).abs() < 1e-12);
    }
}
