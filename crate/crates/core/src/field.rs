//! Modal synthesis of the incoming/outgoing series and the generalized
//! eigenfunction of the exterior Maxwell problem.
//!
//! For tangential data `Y = Σ a_{j,ℓ,m} Ψ_{j,ℓ,m}` (families 1 and 2 only):
//!
//! ```text
//! J  : 2 a_1 λ j_ℓ(λr) Ψ_1 (-i)^ℓ
//!    + 2 a_2 [ (z j_ℓ)'(λr)/r Ψ_2 + √L j_ℓ(λr)/r Ψ_3 ] (-i)^{ℓ-1}
//! H1 : the same with h^{(1)}_ℓ and without the factor 2
//! H2 : the same with h^{(2)}_ℓ and without the factor 2
//! E  = J(Y) + H1(A Y)
//! ```
//!
//! `A` is diagonal with the entries of [`crate::mie`] at `x = λρ`. The
//! magnetic field is `H = curl E / (iλ)` in closed form per mode:
//!
//! ```text
//! E = c g Ψ_1                          ->  H = c/(iλ) [ (zg)'/r Ψ_2 + √L g/r Ψ_3 ]
//! E = c [ (zg)'/r Ψ_2 + √L g/r Ψ_3 ]   ->  H = -iλ c g Ψ_1
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};
use crate::mie::mie_coefficients_upto;
use crate::specfun::{riccati_from_seq, spherical_h1_seq, spherical_j_seq, RadialKind, ScaledHankel};
use crate::vsh::{ComplexVec3, GridField, HarmonicTable, SphereGrid, SphericalPoint};

/// Largest modal degree accepted by the synthesis routines.
pub const MAX_LMAX: u32 = 4000;

/// Dense tangential coefficients `a_{j,ℓ,m}`, `j ∈ {1,2}`, `1 ≤ ℓ ≤ lmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalCoefficients {
    lmax: u32,
    entries: Vec<Complex64>,
}

impl ModalCoefficients {
    pub fn zeros(lmax: u32) -> Self {
        Self {
            lmax,
            entries: vec![Complex64::new(0.0, 0.0); 2 * Self::per_family(lmax)],
        }
    }

    fn per_family(lmax: u32) -> usize {
        let n = lmax as usize + 1;
        n * n - 1
    }

    #[inline]
    fn offset(&self, j: u8, ell: u32, m: i32) -> usize {
        let fam = (j as usize - 1) * Self::per_family(self.lmax);
        fam + (ell as usize * ell as usize - 1) + (ell as i64 + m as i64) as usize
    }

    fn check(&self, j: u8, ell: u32, m: i32) -> Result<()> {
        if !(j == 1 || j == 2) {
            return domain(format!("only tangential families 1 and 2 carry coefficients, got {j}"));
        }
        if ell == 0 || ell > self.lmax {
            return domain(format!("ell={ell} outside 1..={}", self.lmax));
        }
        if m.unsigned_abs() > ell {
            return domain(format!("|m|={} exceeds ell={ell}", m.unsigned_abs()));
        }
        Ok(())
    }

    pub fn lmax(&self) -> u32 {
        self.lmax
    }

    pub fn get(&self, j: u8, ell: u32, m: i32) -> Complex64 {
        if self.check(j, ell, m).is_err() {
            return Complex64::new(0.0, 0.0);
        }
        self.entries[self.offset(j, ell, m)]
    }

    pub fn set(&mut self, j: u8, ell: u32, m: i32, value: Complex64) -> Result<()> {
        self.check(j, ell, m)?;
        let k = self.offset(j, ell, m);
        self.entries[k] = value;
        Ok(())
    }

    /// A single unit coefficient.
    pub fn single(j: u8, ell: u32, m: i32) -> Result<Self> {
        let mut c = Self::zeros(ell);
        c.set(j, ell, m, Complex64::new(1.0, 0.0))?;
        Ok(c)
    }

    /// Random coefficients with unit `ℓ²` norm (uniform real and imaginary
    /// parts before normalisation), reproducible from `seed`.
    pub fn random_unit(lmax: u32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = Self::zeros(lmax);
        for e in c.entries.iter_mut() {
            *e = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        let n = c.norm();
        if n > 0.0 {
            for e in c.entries.iter_mut() {
                *e /= n;
            }
        }
        c
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `(j, ℓ, m, a)` for every slot, in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (u8, u32, i32, Complex64)> + '_ {
        (1..=2u8).flat_map(move |j| {
            (1..=self.lmax).flat_map(move |ell| {
                (-(ell as i32)..=(ell as i32)).map(move |m| (j, ell, m, self.get(j, ell, m)))
            })
        })
    }

    /// Entrywise map over `(j, ℓ, m, a)`.
    pub fn map(&self, mut f: impl FnMut(u8, u32, i32, Complex64) -> Complex64) -> Self {
        let mut out = Self::zeros(self.lmax);
        for (j, ell, m, a) in self.iter() {
            let k = out.offset(j, ell, m);
            out.entries[k] = f(j, ell, m, a);
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|_, _, _, a| a * s)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.lmax != other.lmax {
            return domain("coefficient sets have different truncation degrees");
        }
        Ok(self.map(|j, ell, m, a| a + other.get(j, ell, m)))
    }
}

/// Frequency, obstacle radius and tangential data of a generalized eigenfunction.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenfunctionSpec {
    pub lambda: f64,
    pub rho: f64,
    pub coeffs: ModalCoefficients,
    /// When false the amplitude matrix is replaced by zero (no obstacle).
    pub obstacle: bool,
}

impl EigenfunctionSpec {
    pub fn new(lambda: f64, rho: f64, coeffs: ModalCoefficients) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return domain(format!("frequency must be positive, got {lambda}"));
        }
        if !(rho.is_finite() && rho > 0.0) {
            return domain(format!("ball radius must be positive, got {rho}"));
        }
        if coeffs.lmax() > MAX_LMAX {
            return Err(Error::Truncation {
                requested: coeffs.lmax() as usize,
                max: MAX_LMAX as usize,
            });
        }
        Ok(Self {
            lambda,
            rho,
            coeffs,
            obstacle: true,
        })
    }

    pub fn without_obstacle(mut self) -> Self {
        self.obstacle = false;
        self
    }

    /// Diagonal amplitudes `(A_TE, A_TM)` indexed by `ℓ` (zero without obstacle).
    pub fn amplitudes(&self) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let n = self.coeffs.lmax() as usize;
        if self.obstacle && n > 0 {
            mie_coefficients_upto(n, self.lambda * self.rho)
        } else {
            let z = vec![Complex64::new(0.0, 0.0); n + 1];
            Ok((z.clone(), z))
        }
    }

    fn check_point(&self, p: &SphericalPoint) -> Result<()> {
        if p.r < self.rho * (1.0 - 1e-14) {
            return domain(format!("point radius {} lies inside the ball rho={}", p.r, self.rho));
        }
        Ok(())
    }
}

/// Radial profile per degree: `g_ℓ(λr)` and `(z g_ℓ)'(λr)` for each polarization.
struct Radial {
    te: Vec<(Complex64, Complex64)>,
    tm: Vec<(Complex64, Complex64)>,
}

/// `g = w_j j_ℓ + w_h f_ℓ` with per-degree weights, `f ∈ {h^{(1)}, h^{(2)}}`.
fn radial_profile(
    lmax: usize,
    z: f64,
    second: RadialKind,
    te_weights: impl Fn(usize) -> (Complex64, Complex64),
    tm_weights: impl Fn(usize) -> (Complex64, Complex64),
) -> Result<Radial> {
    let j = spherical_j_seq(lmax + 1, z)?;
    let h: Vec<Complex64> = match second {
        RadialKind::J => vec![Complex64::new(0.0, 0.0); lmax + 2],
        RadialKind::H1 => spherical_h1_seq(lmax + 1, z)?,
        RadialKind::H2 => spherical_h1_seq(lmax + 1, z)?.iter().map(|c| c.conj()).collect(),
    };
    if let Some(l) = h.iter().position(|v| !v.is_finite()) {
        return Err(Error::Conditioning(format!("h_{l}({z}) overflows; lower ell_max or raise the argument")));
    }
    let mut te = Vec::with_capacity(lmax + 1);
    let mut tm = Vec::with_capacity(lmax + 1);
    for ell in 0..=lmax {
        let dj = riccati_from_seq(&j, ell, z);
        let dh = riccati_from_seq(&h, ell, z);
        let (a, b) = te_weights(ell);
        te.push((a * j[ell] + b * h[ell], a * dj + b * dh));
        let (a, b) = tm_weights(ell);
        tm.push((a * j[ell] + b * h[ell], a * dj + b * dh));
    }
    Ok(Radial { te, tm })
}

/// `(-i)^n` for `n ≥ -1`.
#[inline]
fn minus_i_pow(n: i64) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

/// Sums E and H over modes for a given radial profile.
fn synthesize(
    coeffs: &ModalCoefficients,
    lambda: f64,
    point: &SphericalPoint,
    radial: &Radial,
) -> (ComplexVec3, ComplexVec3) {
    let lmax = coeffs.lmax() as usize;
    let tab = HarmonicTable::new(lmax, point.theta, point.phi);
    let r = point.r;
    let i = Complex64::i();
    let mut e = ComplexVec3::ZERO;
    let mut hfield = ComplexVec3::ZERO;
    for ell in 1..=lmax {
        let lf = ell as f64;
        let sl = (lf * (lf + 1.0)).sqrt();
        let (g1, dg1) = radial.te[ell];
        let (g2, dg2) = radial.tm[ell];
        let ph1 = minus_i_pow(ell as i64);
        let ph2 = minus_i_pow(ell as i64 - 1);
        for m in -(ell as i32)..=(ell as i32) {
            let a1 = coeffs.get(1, ell as u32, m);
            let a2 = coeffs.get(2, ell as u32, m);
            if a1 == Complex64::new(0.0, 0.0) && a2 == Complex64::new(0.0, 0.0) {
                continue;
            }
            let p1 = ComplexVec3::from_real(tab.psi(1, ell, m));
            let p2 = ComplexVec3::from_real(tab.psi(2, ell, m));
            let p3 = ComplexVec3::from_real(tab.psi(3, ell, m));
            // TE: E = c g Ψ1, c = a (-i)^ℓ λ.
            let c1 = a1 * ph1 * lambda;
            e += p1 * (c1 * g1);
            hfield += (p2 * (dg1 / r) + p3 * (g1 * sl / r)) * (c1 / (i * lambda));
            // TM: E = c [(zg)'/r Ψ2 + √L g/r Ψ3], c = a (-i)^{ℓ-1}.
            let c2 = a2 * ph2;
            e += (p2 * (dg2 / r) + p3 * (g2 * sl / r)) * c2;
            hfield += p1 * (-i * lambda * c2 * g2);
        }
    }
    (e, hfield)
}

/// One of the three modal series at a point (`r > 0`).
pub fn tilde_series(
    kind: RadialKind,
    coeffs: &ModalCoefficients,
    lambda: f64,
    point: &SphericalPoint,
) -> Result<ComplexVec3> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return domain(format!("frequency must be positive, got {lambda}"));
    }
    if coeffs.lmax() > MAX_LMAX {
        return Err(Error::Truncation {
            requested: coeffs.lmax() as usize,
            max: MAX_LMAX as usize,
        });
    }
    let n = coeffs.lmax() as usize;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let radial = match kind {
        RadialKind::J => radial_profile(n, lambda * point.r, RadialKind::J, |_| (one * 2.0, zero), |_| (one * 2.0, zero))?,
        k => radial_profile(n, lambda * point.r, k, |_| (zero, one), |_| (zero, one))?,
    };
    Ok(synthesize(coeffs, lambda, point, &radial).0)
}

/// `2 j_ℓ + A_ℓ h_ℓ` at `λr`. The scattered part is formed as
/// `-2 j_ℓ(λρ) h_ℓ(λr)/h_ℓ(λρ)` from scaled Hankel values, which stays finite
/// at orders where `h_ℓ` alone overflows.
fn eigen_radial(spec: &EigenfunctionSpec, r: f64) -> Result<Radial> {
    let n = spec.coeffs.lmax() as usize;
    let z = spec.lambda * r;
    let j = spherical_j_seq(n + 1, z)?;
    let mut te: Vec<(Complex64, Complex64)> = (0..=n)
        .map(|l| (Complex64::from(2.0 * j[l]), Complex64::from(2.0 * riccati_from_seq(&j, l, z))))
        .collect();
    let mut tm = te.clone();
    if spec.obstacle && n > 0 {
        let zp = spec.lambda * spec.rho;
        let jp = spherical_j_seq(n + 1, zp)?;
        let hr = ScaledHankel::new(n, z)?;
        let hp = ScaledHankel::new(n, zp)?;
        for l in 1..=n {
            let f = (hr.log_scale[l] - hp.log_scale[l]).exp();
            let (h, dh) = (hr.values[l] * f, hr.riccati(l) * f);
            let dhp = hp.riccati(l);
            if dhp.norm() < 1e-300 {
                return Err(Error::Conditioning(format!("Riccati derivative of h_{l} vanishes numerically")));
            }
            let c_te = -2.0 * jp[l] / hp.values[l];
            let c_tm = -2.0 * riccati_from_seq(&jp, l, zp) / dhp;
            te[l].0 += c_te * h;
            te[l].1 += c_te * dh;
            tm[l].0 += c_tm * h;
            tm[l].1 += c_tm * dh;
        }
    }
    Ok(Radial { te, tm })
}

/// `E = J(Y) + H1(A Y)` at a point with `r ≥ ρ`.
pub fn eigenfunction_e(spec: &EigenfunctionSpec, point: &SphericalPoint) -> Result<ComplexVec3> {
    spec.check_point(point)?;
    let radial = eigen_radial(spec, point.r)?;
    Ok(synthesize(&spec.coeffs, spec.lambda, point, &radial).0)
}

/// `H = curl E / (iλ)` at a point with `r ≥ ρ`.
pub fn magnetic_h(spec: &EigenfunctionSpec, point: &SphericalPoint) -> Result<ComplexVec3> {
    spec.check_point(point)?;
    let radial = eigen_radial(spec, point.r)?;
    Ok(synthesize(&spec.coeffs, spec.lambda, point, &radial).1)
}

/// `(E, H)` from one radial evaluation.
pub fn eigenfunction_eh(
    spec: &EigenfunctionSpec,
    point: &SphericalPoint,
) -> Result<(ComplexVec3, ComplexVec3)> {
    spec.check_point(point)?;
    let radial = eigen_radial(spec, point.r)?;
    Ok(synthesize(&spec.coeffs, spec.lambda, point, &radial))
}

/// `E` at a Cartesian position.
pub fn eigenfunction_e_at(spec: &EigenfunctionSpec, x: [f64; 3]) -> Result<ComplexVec3> {
    eigenfunction_e(spec, &SphericalPoint::from_cartesian(x)?)
}

/// `sup |r̂ × E| / sup |E|` over the `r = ρ` sphere sampled on `grid`.
pub fn boundary_residual(spec: &EigenfunctionSpec, grid: &SphereGrid) -> Result<f64> {
    let radial = eigen_radial(spec, spec.rho)?;
    let (mut tang, mut full) = (0.0f64, 0.0f64);
    for (theta, phi, _) in grid.nodes() {
        let p = SphericalPoint::new(spec.rho, theta, phi)?;
        let e = synthesize(&spec.coeffs, spec.lambda, &p, &radial).0;
        let nu = ComplexVec3::from_real(p.r_hat());
        tang = tang.max(nu.cross(e).norm());
        full = full.max(e.norm());
    }
    Ok(if full > 0.0 { tang / full } else { 0.0 })
}

/// Default FD step `min(1e-3, 0.02/λ)`.
pub fn default_fd_step(lambda: f64) -> f64 {
    1e-3f64.min(0.02 / lambda)
}

fn check_step(spec: &EigenfunctionSpec, point: &SphericalPoint, step: f64) -> Result<()> {
    if !(step > 0.0 && step <= 0.05 / spec.lambda) {
        return domain(format!(
            "FD step {step} must lie in (0, 0.05/λ] = (0, {}]",
            0.05 / spec.lambda
        ));
    }
    if point.r < spec.rho + 2.0 * step {
        return domain(format!(
            "FD stencil at r={} reaches the ball (need r >= rho + 2 step)",
            point.r
        ));
    }
    Ok(())
}

fn offset(x: [f64; 3], axis: usize, d: f64) -> [f64; 3] {
    let mut y = x;
    y[axis] += d;
    y
}

/// Central-difference divergence of `f` at `x`.
pub fn fd_divergence(
    f: impl Fn([f64; 3]) -> Result<ComplexVec3>,
    x: [f64; 3],
    step: f64,
) -> Result<Complex64> {
    let mut div = Complex64::new(0.0, 0.0);
    for axis in 0..3 {
        let p = f(offset(x, axis, step))?.to_array()[axis];
        let m = f(offset(x, axis, -step))?.to_array()[axis];
        div += (p - m) / (2.0 * step);
    }
    Ok(div)
}

/// Seven-point Laplacian of each Cartesian component of `f` at `x`.
pub fn fd_laplacian(
    f: impl Fn([f64; 3]) -> Result<ComplexVec3>,
    x: [f64; 3],
    step: f64,
) -> Result<ComplexVec3> {
    let centre = f(x)?;
    let mut acc = centre * -6.0;
    for axis in 0..3 {
        acc += f(offset(x, axis, step))?;
        acc += f(offset(x, axis, -step))?;
    }
    Ok(acc * (1.0 / (step * step)))
}

/// Central-difference curl of `f` at `x`.
pub fn fd_curl(
    f: impl Fn([f64; 3]) -> Result<ComplexVec3>,
    x: [f64; 3],
    step: f64,
) -> Result<ComplexVec3> {
    let mut d = [[Complex64::new(0.0, 0.0); 3]; 3]; // d[axis][component]
    for axis in 0..3 {
        let p = f(offset(x, axis, step))?.to_array();
        let m = f(offset(x, axis, -step))?.to_array();
        for c in 0..3 {
            d[axis][c] = (p[c] - m[c]) / (2.0 * step);
        }
    }
    Ok(ComplexVec3::new(
        d[1][2] - d[2][1],
        d[2][0] - d[0][2],
        d[0][1] - d[1][0],
    ))
}

/// `|div E|` by central differences; the exact value is zero.
pub fn divergence_residual(spec: &EigenfunctionSpec, point: &SphericalPoint, step: f64) -> Result<f64> {
    check_step(spec, point, step)?;
    Ok(fd_divergence(|x| eigenfunction_e_at(spec, x), point.to_cartesian(), step)?.norm())
}

/// `max_i |ΔE_i + λ² E_i|` with the seven-point Laplacian.
pub fn helmholtz_residual(spec: &EigenfunctionSpec, point: &SphericalPoint, step: f64) -> Result<f64> {
    check_step(spec, point, step)?;
    let lap = fd_laplacian(|x| eigenfunction_e_at(spec, x), point.to_cartesian(), step)?;
    let e = eigenfunction_e(spec, point)?;
    Ok((lap + e * (spec.lambda * spec.lambda)).max_abs())
}

/// Coefficients of `e^{-iλr}/r` and `e^{+iλr}/r` on a direction grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldData {
    pub incoming: GridField,
    pub outgoing: GridField,
}

/// Smallest `|sin λδ|` accepted for the two-probe system.
const MIN_PROBE_SINE: f64 = 1e-3;

/// Extracts the far-field amplitudes from `u = rE` at `r_1 = r_probe` and
/// `r_2 = r_1 + π/(2λ)`, solving `u = g_+ e^{iλr} + g_- e^{-iλr}` per node.
pub fn far_field_extract(spec: &EigenfunctionSpec, r_probe: f64, grid: &SphereGrid) -> Result<FarFieldData> {
    far_field_extract_with_offset(spec, r_probe, PI / (2.0 * spec.lambda), grid)
}

pub fn far_field_extract_with_offset(
    spec: &EigenfunctionSpec,
    r_probe: f64,
    delta: f64,
    grid: &SphereGrid,
) -> Result<FarFieldData> {
    let l = spec.coeffs.lmax() as f64;
    if spec.lambda * r_probe < l * l {
        return domain(format!(
            "far-field probe too close: λ r = {} is below lmax² = {}",
            spec.lambda * r_probe,
            l * l
        ));
    }
    let s = (spec.lambda * delta).sin();
    if s.abs() < MIN_PROBE_SINE {
        return Err(Error::Conditioning(format!(
            "probe offset {delta} gives |sin λδ| = {:.3e}",
            s.abs()
        )));
    }
    let (r1, r2) = (r_probe, r_probe + delta);
    let rad1 = eigen_radial(spec, r1)?;
    let rad2 = eigen_radial(spec, r2)?;
    let i = Complex64::i();
    let e_minus = Complex64::from_polar(1.0, -spec.lambda * delta);
    let det = 2.0 * i * s;
    let mut incoming = GridField::zeros(grid);
    let mut outgoing = GridField::zeros(grid);
    for (k, (theta, phi, _)) in grid.nodes().enumerate() {
        let p1 = SphericalPoint::new(r1, theta, phi)?;
        let p2 = SphericalPoint::new(r2, theta, phi)?;
        let u1 = synthesize(&spec.coeffs, spec.lambda, &p1, &rad1).0 * r1;
        let u2 = synthesize(&spec.coeffs, spec.lambda, &p2, &rad2).0 * r2;
        // P = g_+ e^{iλr1}, Q = g_- e^{-iλr1}
        let pvec = (u2 - u1 * e_minus) * (1.0 / det);
        let qvec = u1 - pvec;
        outgoing.values[k] = pvec * Complex64::from_polar(1.0, -spec.lambda * r1);
        incoming.values[k] = qvec * Complex64::from_polar(1.0, spec.lambda * r1);
    }
    Ok(FarFieldData { incoming, outgoing })
}

/// Asymptotic prediction: incoming `iY`, outgoing `-i τ(Y + AY)`.
pub fn far_field_prediction(spec: &EigenfunctionSpec, grid: &SphereGrid) -> Result<FarFieldData> {
    let lmax = spec.coeffs.lmax() as usize;
    let (ate, atm) = spec.amplitudes()?;
    let i = Complex64::i();
    let tangential = |theta: f64, phi: f64, scattered: bool| {
        let tab = HarmonicTable::new(lmax, theta, phi);
        let mut v = ComplexVec3::ZERO;
        for (j, ell, m, a) in spec.coeffs.iter() {
            let s = if scattered {
                1.0 + if j == 1 { ate[ell as usize] } else { atm[ell as usize] }
            } else {
                Complex64::new(1.0, 0.0)
            };
            v += ComplexVec3::from_real(tab.psi(j, ell as usize, m)) * (a * s);
        }
        v
    };
    let incoming = grid.sample(|t, p| tangential(t, p, false) * i);
    let outgoing = grid.sample(|t, p| tangential(PI - t, p + PI, true) * -i);
    Ok(FarFieldData { incoming, outgoing })
}

/// Max-norm distance between two grid fields relative to the second.
pub fn relative_grid_error(a: &GridField, b: &GridField) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch("far-field grids differ".into()));
    }
    let diff = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (*x - *y).norm())
        .fold(0.0, f64::max);
    let scale = b.max_norm();
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::spherical_bessel_j;

    #[test]
    fn coefficient_indexing_round_trips() {
        let mut c = ModalCoefficients::zeros(4);
        let mut k = 0.0;
        for j in 1..=2u8 {
            for ell in 1..=4u32 {
                for m in -(ell as i32)..=(ell as i32) {
                    k += 1.0;
                    c.set(j, ell, m, Complex64::new(k, 0.0)).unwrap();
                }
            }
        }
        let seen: Vec<f64> = c.iter().map(|t| t.3.re).collect();
        assert_eq!(seen, (1..=48).map(f64::from).collect::<Vec<_>>());
        assert!(c.set(3, 1, 0, Complex64::new(1.0, 0.0)).is_err());
        assert!(c.set(1, 0, 0, Complex64::new(1.0, 0.0)).is_err());
        assert!((ModalCoefficients::random_unit(5, 3).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_te_mode_matches_direct_formula() {
        let c = ModalCoefficients::single(1, 1, 0).unwrap();
        let p = SphericalPoint::new(1.0, PI / 2.0, 0.7).unwrap();
        let e = tilde_series(RadialKind::J, &c, 1.0, &p).unwrap();
        let psi = crate::vsh::eval_vsh(crate::vsh::ModeIndex::new(1, 1, 0).unwrap(), PI / 2.0, 0.7).unwrap();
        let want = psi * (Complex64::new(0.0, -1.0) * 2.0 * spherical_bessel_j(1, 1.0).unwrap());
        assert!((e - want).norm() < 1e-15);
    }

    #[test]
    fn boundary_condition_holds() {
        let spec = EigenfunctionSpec::new(3.0, 1.0, ModalCoefficients::random_unit(8, 1)).unwrap();
        let grid = SphereGrid::for_degree(8);
        assert!(boundary_residual(&spec, &grid).unwrap() < 1e-12);
        let free = spec.without_obstacle();
        assert!(boundary_residual(&free, &grid).unwrap() > 1e-2);
    }

    #[test]
    fn magnetic_field_is_scaled_curl() {
        let spec = EigenfunctionSpec::new(2.0, 1.0, ModalCoefficients::random_unit(3, 7)).unwrap();
        let p = SphericalPoint::new(1.7, 1.0, 2.0).unwrap();
        let curl = fd_curl(|x| eigenfunction_e_at(&spec, x), p.to_cartesian(), 1e-4).unwrap();
        let h = magnetic_h(&spec, &p).unwrap();
        let ih = h * Complex64::new(0.0, spec.lambda);
        assert!((curl - ih).norm() < 1e-6 * ih.norm());
        // curl H + iλE = 0
        let curl_h = fd_curl(|x| magnetic_h(&spec, &SphericalPoint::from_cartesian(x)?), p.to_cartesian(), 1e-4).unwrap();
        let e = eigenfunction_e(&spec, &p).unwrap();
        assert!((curl_h + e * Complex64::new(0.0, spec.lambda)).norm() < 1e-6 * e.norm());
    }

    #[test]
    fn rejects_bad_steps_and_points() {
        let spec = EigenfunctionSpec::new(10.0, 1.0, ModalCoefficients::random_unit(2, 0)).unwrap();
        let p = SphericalPoint::new(1.5, 1.0, 1.0).unwrap();
        assert!(divergence_residual(&spec, &p, 0.01).is_err());
        let near = SphericalPoint::new(1.0005, 1.0, 1.0).unwrap();
        assert!(divergence_residual(&spec, &near, 1e-3).is_err());
        let inside = SphericalPoint::new(0.5, 1.0, 1.0).unwrap();
        assert!(eigenfunction_e(&spec, &inside).is_err());
        let grid = SphereGrid::new(4, 8).unwrap();
        assert!(matches!(
            far_field_extract_with_offset(&spec, 100.0, PI / spec.lambda, &grid),
            Err(Error::Conditioning(_))
        ));
    }
}
