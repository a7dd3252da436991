//! Frequency-localized propagator kernel outside the conducting ball.
//!
//! ```text
//! K(y, y', t) = 1/(2πh) Σ_μ ∫ φ(λ) e^{iλt/h} E_{λ/h}(Ψ_μ)(y) E_{λ/h}(Ψ_μ)(y')^† dλ
//! ```
//!
//! The sum runs over tangential modes `μ = (j, ℓ, m)`, `j ∈ {1,2}`,
//! `ℓ ≥ 1`. The `(-i)^ℓ` phases cancel in the outer product, so with
//! `k = λ/h` each degree contributes radial products of
//!
//! ```text
//! u_1 = k [2 j_ℓ(kr) + A_TE h_ℓ(kr)]
//! u_2 = [2 (z j_ℓ)'(kr) + A_TM (z h_ℓ)'(kr)] / r
//! u_3 = √L [2 j_ℓ(kr) + A_TM h_ℓ(kr)] / r
//! ```
//!
//! and the `m`-sum is done in closed form by the addition theorem (see
//! [`angular`]). For one pair `(y, y')` the matrix-valued integrand therefore
//! reduces to seven complex scalars per quadrature node, computed once and
//! reused for every `t`.
//!
//! The free part is truncated at `⌈x + 4x^{1/3} + 10⌉` with
//! `x = k_max max(r, r')` and the scattered part at the same formula with
//! `x = k_max ρ`, beyond which `|A| h` is negligible and `h_ℓ(kρ)` would
//! eventually overflow.

pub mod angular;
pub mod cutoff;
pub mod sweep;

use std::f64::consts::PI;

use num_complex::Complex64;

pub use cutoff::CutoffSpec;
pub use sweep::{decay_sweep, fit_slope, point_plan, PointPair, SweepConfig, SweepRow, SweepTable};

use crate::error::{domain, Error, Result};
use crate::field::{eigenfunction_e, EigenfunctionSpec, ModalCoefficients};
use crate::quadrature::{GaussLegendre, PanelRule};
use crate::specfun::{riccati_from_seq, spherical_h1_seq, spherical_j_seq, spherical_y_seq};
use crate::vsh::{ModeIndex, SphericalPoint};
use angular::{structural_matrices, AngularFactors, RealMat3, N_STRUCT};

/// 3×3 complex matrix, row-major.
pub type Mat3 = [[Complex64; 3]; 3];

pub fn mat_zero() -> Mat3 {
    [[Complex64::new(0.0, 0.0); 3]; 3]
}

/// Largest entry modulus.
pub fn mat_max_norm(m: &Mat3) -> f64 {
    m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn mat_trace(m: &Mat3) -> Complex64 {
    m[0][0] + m[1][1] + m[2][2]
}

pub fn mat_conj_transpose(m: &Mat3) -> Mat3 {
    let mut o = mat_zero();
    for i in 0..3 {
        for k in 0..3 {
            o[i][k] = m[k][i].conj();
        }
    }
    o
}

pub fn mat_sub(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut o = mat_zero();
    for i in 0..3 {
        for k in 0..3 {
            o[i][k] = a[i][k] - b[i][k];
        }
    }
    o
}

pub fn mat_add(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut o = mat_zero();
    for i in 0..3 {
        for k in 0..3 {
            o[i][k] = a[i][k] + b[i][k];
        }
    }
    o
}

/// `⌈x + 4x^{1/3} + 10⌉`.
pub fn auto_truncation(x: f64) -> usize {
    (x + 4.0 * x.cbrt() + 10.0).ceil() as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelConfig {
    pub rho: f64,
    pub h: f64,
    pub cutoff: CutoffSpec,
    /// Observation radius bound `R`; points must satisfy `ρ ≤ |y| ≤ 3R`.
    pub r_bound: f64,
    /// Overrides the automatic free-part truncation.
    pub lmax: Option<usize>,
    /// Extra degrees added to both truncations.
    pub ell_extra: usize,
    pub nodes_per_panel: usize,
    /// Panels per oscillation period `2π/Ω`, `Ω = (|t| + r + r')/h`.
    pub panels_per_period: f64,
    pub min_panels: usize,
    /// Budget cap on the panel count of one λ-integral.
    pub max_panels: usize,
    /// When false the amplitudes are zero (free propagator).
    pub obstacle: bool,
}

impl KernelConfig {
    /// Default numerics around the given physical parameters; validates the
    /// hypotheses of the dispersive estimate.
    pub fn new(rho: f64, a: f64, h: f64, r_bound: f64) -> Result<Self> {
        let cfg = Self::new_unchecked(rho, a, h, r_bound)?;
        cfg.check_hypotheses()?;
        Ok(cfg)
    }

    /// As [`KernelConfig::new`] without the hypothesis gate (only the
    /// cutoff and positivity are validated).
    pub fn new_unchecked(rho: f64, a: f64, h: f64, r_bound: f64) -> Result<Self> {
        if !(rho > 0.0 && h > 0.0 && r_bound > 0.0) {
            return domain("rho, h and R must be positive");
        }
        Ok(Self {
            rho,
            h,
            cutoff: CutoffSpec::default_for(a)?,
            r_bound,
            lmax: None,
            ell_extra: 0,
            nodes_per_panel: 32,
            panels_per_period: 0.25,
            min_panels: 4,
            max_panels: 200_000,
            obstacle: true,
        })
    }

    /// `ρ ≥ 1`, `ρ ≥ 2/a`, `a > h`, `h < 1/4`, `R > ρ`; every violated
    /// constraint is named in the error.
    pub fn check_hypotheses(&self) -> Result<()> {
        check_hypotheses(self.rho, self.cutoff.a, self.h, self.r_bound)
    }

    pub fn k_max(&self) -> f64 {
        self.cutoff.support().1 / self.h
    }

    pub fn lmax_free(&self, r1: f64, r2: f64) -> usize {
        self.lmax
            .unwrap_or_else(|| auto_truncation(self.k_max() * r1.max(r2)))
            + self.ell_extra
    }

    pub fn lmax_scat(&self) -> usize {
        if self.obstacle {
            auto_truncation(self.k_max() * self.rho) + self.ell_extra
        } else {
            0
        }
    }

    /// Even panel count resolving frequency `omega` in λ.
    pub fn panels_for(&self, omega: f64) -> Result<usize> {
        let (lo, hi) = self.cutoff.support();
        let per = (hi - lo) * omega * self.panels_per_period / (2.0 * PI);
        let mut n = (per.ceil() as usize).max(self.min_panels).max(2);
        n += n % 2;
        if n > self.max_panels {
            return Err(Error::Budget {
                required: n,
                cap: self.max_panels,
            });
        }
        Ok(n)
    }

    fn check_point(&self, y: [f64; 3]) -> Result<f64> {
        let r = norm3(y);
        if r < self.rho * (1.0 - 1e-12) || r > 3.0 * self.r_bound * (1.0 + 1e-12) {
            return domain(format!(
                "|y| = {r} must lie in [rho, 3R] = [{}, {}]",
                self.rho,
                3.0 * self.r_bound
            ));
        }
        Ok(r)
    }
}

/// Hypothesis gate shared by the kernel and the CLI.
pub fn check_hypotheses(rho: f64, a: f64, h: f64, r_bound: f64) -> Result<()> {
    let mut bad = Vec::new();
    if !(h < 0.25) {
        bad.push(format!("h < 1/4 violated (h = {h})"));
    }
    if !(rho >= 1.0) {
        bad.push(format!("rho ≥ 1 violated (rho = {rho})"));
    }
    if !(rho >= 2.0 / a) {
        bad.push(format!("rho ≥ 2/a violated (rho = {rho}, 2/a = {})", 2.0 / a));
    }
    if !(a > h) {
        bad.push(format!("a > h violated (a = {a}, h = {h})"));
    }
    if !(r_bound > rho) {
        bad.push(format!("R > rho violated (R = {r_bound}, rho = {rho})"));
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::Hypothesis(bad.join("; ")))
    }
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = norm3(v);
    [v[0] / n, v[1] / n, v[2] / n]
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelResult {
    pub value: Mat3,
    /// Truncation tail estimate plus a roundoff floor.
    pub trunc_err: f64,
    /// Max-entry difference between the panel rule and the rule with half
    /// as many panels, plus the same roundoff floor.
    pub quad_est: f64,
    pub lmax_free: usize,
    pub lmax_scat: usize,
    pub panels: usize,
}

/// Radial products at one frequency, summed over degrees against the
/// angular factors: the seven scalar weights of the structural matrices.
fn node_scalars(
    cfg: &KernelConfig,
    r1: f64,
    r2: f64,
    ang: &AngularFactors,
    lf: usize,
    ls: usize,
    k: f64,
) -> Result<([Complex64; N_STRUCT], f64)> {
    let amps = if ls > 0 { Some(amplitudes(ls, k * cfg.rho)?) } else { None };
    let radial = |r: f64| -> Result<Vec<(Complex64, Complex64, Complex64)>> {
        let z = k * r;
        let j = spherical_j_seq(lf + 1, z)?;
        let mut out: Vec<(Complex64, Complex64, Complex64)> = (0..=lf)
            .map(|l| {
                let dj = riccati_from_seq(&j, l, z);
                (
                    Complex64::from(2.0 * k * j[l]),
                    Complex64::from(2.0 * dj / r),
                    Complex64::from(2.0 * j[l] / r),
                )
            })
            .collect();
        if let Some((ate, atm)) = &amps {
            let y = spherical_y_seq(ls.min(lf) + 1, z)?;
            let hs: Vec<Complex64> = y.iter().zip(&j).map(|(&b, &a)| Complex64::new(a, b)).collect();
            for l in 1..=ls.min(lf) {
                let dh = riccati_from_seq(&hs, l, z);
                out[l].0 += ate[l] * hs[l] * k;
                out[l].1 += atm[l] * dh / r;
                out[l].2 += atm[l] * hs[l] / r;
            }
        }
        Ok(out)
    };
    let a = radial(r1)?;
    let b = if r1 == r2 { a.clone() } else { radial(r2)? };
    let mut s = [Complex64::new(0.0, 0.0); N_STRUCT];
    let mut abs = 0.0;
    for l in 1..=lf {
        let big_l = (l * (l + 1)) as f64;
        let (u1a, u2a, v3a) = a[l];
        let (u1b, u2b, v3b) = b[l];
        let c11 = u1a * u1b.conj();
        let c22 = u2a * u2b.conj();
        let c23 = u2a * v3b.conj();
        let c32 = v3a * u2b.conj();
        let c33 = v3a * v3b.conj();
        let (f, fp, fpp) = (ang.f[l], ang.fp[l], ang.fpp[l]);
        s[angular::B1] += c11 * (fp / big_l);
        s[angular::B2] += c11 * (fpp / big_l);
        s[angular::A1] += c22 * (fp / big_l);
        s[angular::A2] += c22 * (fpp / big_l);
        s[angular::C23] += c23 * fp;
        s[angular::C32] += c32 * fp;
        s[angular::C33] += c33 * (big_l * f);
        abs += (l1(c11) + l1(c22)) * (fp.abs() + fpp.abs()) / big_l
            + (l1(c23) + l1(c32)) * fp.abs()
            + l1(c33) * big_l * f.abs();
    }
    Ok((s, abs))
}

fn l1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

fn amplitudes(ls: usize, x: f64) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    crate::mie::mie_coefficients_upto(ls, x)
}

fn combine(s: &[Complex64; N_STRUCT], mats: &[RealMat3; N_STRUCT]) -> Mat3 {
    let mut m = mat_zero();
    for (q, mat) in mats.iter().enumerate() {
        for i in 0..3 {
            for k in 0..3 {
                m[i][k] += s[q] * mat[i][k];
            }
        }
    }
    m
}

/// Per-degree magnitude bounds of the omitted terms at frequency `k`.
fn truncation_tail(cfg: &KernelConfig, r1: f64, r2: f64, lf: usize, ls: usize, k: f64) -> Result<f64> {
    const EXTRA: usize = 400;
    let start = if ls > 0 { ls.min(lf) + 1 } else { lf + 1 };
    let top = lf.max(ls) + EXTRA;
    let free = |r: f64| -> Result<Vec<[f64; 3]>> {
        let z = k * r;
        let j = spherical_j_seq(top + 1, z)?;
        Ok((0..=top)
            .map(|l| {
                let sl = ((l * (l + 1)) as f64).sqrt();
                let dj = riccati_from_seq(&j, l, z);
                [2.0 * k * j[l].abs(), 2.0 * dj.abs() / r, 2.0 * sl * j[l].abs() / r]
            })
            .collect())
    };
    // Scattered magnitudes beyond the scattered truncation, computed while
    // h_ℓ(kρ) stays comfortably finite.
    let scat_top = if ls > 0 { ls + 60 } else { 0 };
    let scat = |r: f64| -> Result<Vec<[f64; 3]>> {
        if ls == 0 {
            return Ok(Vec::new());
        }
        let z = k * r;
        let (ate, atm) = amplitudes(scat_top, k * cfg.rho)?;
        let hs = spherical_h1_seq(scat_top + 1, z)?;
        Ok((0..=scat_top)
            .map(|l| {
                let sl = ((l * (l + 1)) as f64).sqrt();
                let dh = riccati_from_seq(&hs, l, z);
                [
                    k * (ate[l] * hs[l]).norm(),
                    (atm[l] * dh).norm() / r,
                    sl * (atm[l] * hs[l]).norm() / r,
                ]
            })
            .collect())
    };
    let (fa, fb) = (free(r1)?, free(r2)?);
    let (sa, sb) = (scat(r1)?, scat(r2)?);
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    for l in start..=top {
        let pick = |fr: &Vec<[f64; 3]>, sc: &Vec<[f64; 3]>| -> ([f64; 3], [f64; 3]) {
            let f = if l > lf { fr[l] } else { [0.0; 3] };
            let s = if ls > 0 && l > ls {
                if l <= scat_top {
                    sc[l]
                } else {
                    [0.0; 3]
                }
            } else {
                [0.0; 3]
            };
            (f, s)
        };
        let (fa_l, sa_l) = pick(&fa, &sa);
        let (fb_l, sb_l) = pick(&fb, &sb);
        // Kept part (free, ℓ ≤ lf) times omitted part, plus omitted × omitted.
        let kept_a = if l <= lf { fa[l] } else { [0.0; 3] };
        let kept_b = if l <= lf { fb[l] } else { [0.0; 3] };
        let te = (kept_a[0] + fa_l[0] + sa_l[0]) * (kept_b[0] + fb_l[0] + sb_l[0]) - kept_a[0] * kept_b[0];
        let ta = kept_a[1] + kept_a[2];
        let tb = kept_b[1] + kept_b[2];
        let tm = (ta + fa_l[1] + fa_l[2] + sa_l[1] + sa_l[2]) * (tb + fb_l[1] + fb_l[2] + sb_l[1] + sb_l[2]) - ta * tb;
        let term = (2 * l + 1) as f64 / (4.0 * PI) * (te + tm);
        total += term;
        if l > lf.max(ls) {
            if let Some(p) = prev {
                let q = if p > 0.0 { term / p } else { 0.0 };
                if q < 0.5 {
                    total += term * q / (1.0 - q);
                    return Ok(total);
                }
            }
            prev = Some(term);
        }
    }
    Ok(total)
}

/// Node values for one `(y, y')` pair, reusable across `t`.
#[derive(Debug, Clone)]
struct NodeSet {
    lambdas: Vec<f64>,
    weights: Vec<f64>,
    scalars: Vec<[Complex64; N_STRUCT]>,
    abs_sum: f64,
    panels: usize,
}

impl NodeSet {
    fn build(cfg: &KernelConfig, r1: f64, r2: f64, ang: &AngularFactors, lf: usize, ls: usize, panels: usize) -> Result<Self> {
        let gl = GaussLegendre::new(cfg.nodes_per_panel);
        let (lo, hi) = cfg.cutoff.support();
        let rule = PanelRule::new(lo, hi, panels, &gl);
        let mut lambdas = Vec::with_capacity(rule.nodes.len());
        let mut weights = Vec::with_capacity(rule.nodes.len());
        let mut scalars = Vec::with_capacity(rule.nodes.len());
        let mut abs_sum = 0.0;
        for (&lam, &w) in rule.nodes.iter().zip(&rule.weights) {
            let phi = cfg.cutoff.eval(lam);
            if phi == 0.0 {
                continue;
            }
            let (s, abs) = node_scalars(cfg, r1, r2, ang, lf, ls, lam / cfg.h)?;
            lambdas.push(lam);
            weights.push(w * phi);
            scalars.push(s);
            abs_sum += w * phi * abs;
        }
        Ok(Self {
            lambdas,
            weights,
            scalars,
            abs_sum,
            panels,
        })
    }

    fn integrate(&self, t: f64, h: f64) -> [Complex64; N_STRUCT] {
        let mut acc = [Complex64::new(0.0, 0.0); N_STRUCT];
        for ((&lam, &w), s) in self.lambdas.iter().zip(&self.weights).zip(&self.scalars) {
            let e = Complex64::from_polar(w, lam * t / h);
            for q in 0..N_STRUCT {
                acc[q] += e * s[q];
            }
        }
        acc
    }
}

/// A `(y, y')` pair with its λ-integrand tabulated on two panel rules.
#[derive(Debug, Clone)]
pub struct PreparedPair {
    h: f64,
    mats: [RealMat3; N_STRUCT],
    fine: NodeSet,
    coarse: NodeSet,
    tail: f64,
    lmax_free: usize,
    lmax_scat: usize,
    t_max: f64,
}

impl PreparedPair {
    /// Tabulates the integrand with panels resolving all `|t| ≤ t_max`.
    pub fn new(cfg: &KernelConfig, y: [f64; 3], y2: [f64; 3], t_max: f64) -> Result<Self> {
        let r1 = cfg.check_point(y)?;
        let r2 = cfg.check_point(y2)?;
        let omega = (t_max.abs() + r1 + r2) / cfg.h;
        Self::with_panels(cfg, y, y2, t_max, cfg.panels_for(omega)?)
    }

    /// As [`PreparedPair::new`] with an explicit (even) panel count.
    pub fn with_panels(cfg: &KernelConfig, y: [f64; 3], y2: [f64; 3], t_max: f64, panels: usize) -> Result<Self> {
        let r1 = cfg.check_point(y)?;
        let r2 = cfg.check_point(y2)?;
        if panels < 2 || !panels.is_multiple_of(2) {
            return domain(format!("panel count must be even and at least 2, got {panels}"));
        }
        if panels > cfg.max_panels {
            return Err(Error::Budget {
                required: panels,
                cap: cfg.max_panels,
            });
        }
        let (u, v) = (unit(y), unit(y2));
        let c: f64 = (0..3).map(|i| u[i] * v[i]).sum();
        let lf = cfg.lmax_free(r1, r2);
        let ls = cfg.lmax_scat();
        let ang = AngularFactors::new(lf, c);
        let mats = structural_matrices(u, v);
        let fine = NodeSet::build(cfg, r1, r2, &ang, lf, ls, panels)?;
        let coarse = NodeSet::build(cfg, r1, r2, &ang, lf, ls, panels / 2)?;
        let tail = truncation_tail(cfg, r1, r2, lf, ls, cfg.k_max())? * cfg.cutoff.integral()
            / (2.0 * PI * cfg.h);
        Ok(Self {
            h: cfg.h,
            mats,
            fine,
            coarse,
            tail,
            lmax_free: lf,
            lmax_scat: ls,
            t_max: t_max.abs(),
        })
    }

    pub fn evaluate(&self, t: f64) -> Result<KernelResult> {
        if t.abs() > self.t_max * (1.0 + 1e-12) {
            return domain(format!("t = {t} exceeds the tabulated range {}", self.t_max));
        }
        let norm = 1.0 / (2.0 * PI * self.h);
        let scale = |s: [Complex64; N_STRUCT]| s.map(|z| z * norm);
        let value = combine(&scale(self.fine.integrate(t, self.h)), &self.mats);
        let coarse = combine(&scale(self.coarse.integrate(t, self.h)), &self.mats);
        // Roundoff in the oscillatory sum scales with its L1 mass, not with |K|.
        let floor = 1e-14 * norm * self.fine.abs_sum;
        let quad_est = mat_max_norm(&mat_sub(&value, &coarse)) + floor;
        Ok(KernelResult {
            value,
            trunc_err: self.tail + floor,
            quad_est,
            lmax_free: self.lmax_free,
            lmax_scat: self.lmax_scat,
            panels: self.fine.panels,
        })
    }
}

/// `K(y, y', t)` for the exterior problem (or the free one if
/// `cfg.obstacle` is false).
pub fn kernel_k(y: [f64; 3], y2: [f64; 3], t: f64, cfg: &KernelConfig) -> Result<KernelResult> {
    PreparedPair::new(cfg, y, y2, t)?.evaluate(t)
}

/// The same modal integral with the amplitudes set to zero.
pub fn kernel_free(y: [f64; 3], y2: [f64; 3], t: f64, cfg: &KernelConfig) -> Result<KernelResult> {
    let mut free = cfg.clone();
    free.obstacle = false;
    kernel_k(y, y2, t, &free)
}

/// `E(Ψ_μ)(y) E(Ψ_μ)(y')^†` at frequency `λ/h` for one tangential mode.
pub fn kernel_mode_term(
    mode: ModeIndex,
    lambda: f64,
    y: [f64; 3],
    y2: [f64; 3],
    cfg: &KernelConfig,
) -> Result<Mat3> {
    let mode = ModeIndex::new(mode.j, mode.ell, mode.m)?;
    if mode.j == 3 {
        return domain("the kernel sums tangential modes only (j = 1, 2)");
    }
    let coeffs = ModalCoefficients::single(mode.j, mode.ell, mode.m)?;
    let mut spec = EigenfunctionSpec::new(lambda / cfg.h, cfg.rho, coeffs)?;
    spec.obstacle = cfg.obstacle;
    let e1 = eigenfunction_e(&spec, &SphericalPoint::from_cartesian(y)?)?.to_array();
    let e2 = eigenfunction_e(&spec, &SphericalPoint::from_cartesian(y2)?)?.to_array();
    let mut m = mat_zero();
    for i in 0..3 {
        for k in 0..3 {
            m[i][k] = e1[i] * e2[k].conj();
        }
    }
    Ok(m)
}

/// `Σ_μ E(Ψ_μ)(y) E(Ψ_μ)(y')^†` at one λ over `ℓ ≤ lmax` by the
/// addition theorem (scattered part kept up to the same `lmax`).
pub fn modal_matrix(lambda: f64, y: [f64; 3], y2: [f64; 3], lmax: usize, cfg: &KernelConfig) -> Result<Mat3> {
    let r1 = norm3(y);
    let r2 = norm3(y2);
    if r1 < cfg.rho * (1.0 - 1e-12) || r2 < cfg.rho * (1.0 - 1e-12) {
        return domain("points must lie outside the ball");
    }
    let (u, v) = (unit(y), unit(y2));
    let c: f64 = (0..3).map(|i| u[i] * v[i]).sum();
    let ang = AngularFactors::new(lmax, c);
    let ls = if cfg.obstacle { lmax } else { 0 };
    let (s, _) = node_scalars(cfg, r1, r2, &ang, lmax, ls, lambda / cfg.h)?;
    Ok(combine(&s, &structural_matrices(u, v)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> KernelConfig {
        KernelConfig::new(1.0, 4.0, 0.125, 2.0).unwrap()
    }

    #[test]
    fn hypothesis_messages() {
        let e = KernelConfig::new(1.0, 1.0, 0.5, 2.0).unwrap_err().to_string();
        assert!(e.contains("h < 1/4 violated"), "{e}");
        let e = KernelConfig::new(0.4, 4.0, 0.125, 2.0).unwrap_err().to_string();
        assert!(e.contains("rho ≥ 1 violated"), "{e}");
        assert!(KernelConfig::new(1.0, 4.0, 0.125, 1.0).is_err());
    }

    #[test]
    fn fast_modal_matrix_matches_mode_sum() {
        let mut c = cfg();
        for obstacle in [true, false] {
            c.obstacle = obstacle;
            let y = [1.2, -0.4, 0.9];
            let y2 = [-0.3, 1.8, 0.5];
            let lam = 3.7;
            let lmax = 14;
            let fast = modal_matrix(lam, y, y2, lmax, &c).unwrap();
            let mut slow = mat_zero();
            for j in 1..=2u8 {
                for ell in 1..=lmax as u32 {
                    for m in -(ell as i32)..=(ell as i32) {
                        let t = kernel_mode_term(ModeIndex::new(j, ell, m).unwrap(), lam, y, y2, &c).unwrap();
                        slow = mat_add(&slow, &t);
                    }
                }
            }
            let scale = mat_max_norm(&slow);
            assert!(mat_max_norm(&mat_sub(&fast, &slow)) < 1e-11 * scale);
        }
    }

    #[test]
    fn coincident_trace_is_real_positive() {
        let c = cfg();
        let y = [0.0, 0.0, 1.0];
        let k = kernel_k(y, y, 0.0, &c).unwrap();
        let tr = mat_trace(&k.value);
        assert!(tr.re > 0.0);
        assert!(tr.im.abs() < 1e-10 * tr.re);
        assert!(k.quad_est < 1e-6 * tr.re);
    }

    #[test]
    fn rejects_mode_zero_and_radial_family() {
        let c = cfg();
        assert!(kernel_mode_term(ModeIndex { j: 1, ell: 0, m: 0 }, 3.0, [1.5, 0.0, 0.0], [1.5, 0.0, 0.0], &c).is_err());
        assert!(kernel_mode_term(ModeIndex { j: 3, ell: 1, m: 0 }, 3.0, [1.5, 0.0, 0.0], [1.5, 0.0, 0.0], &c).is_err());
    }

    #[test]
    fn budget_error_reports_required_panels() {
        let mut c = cfg();
        c.max_panels = 10;
        match kernel_k([1.5, 0.0, 0.0], [0.0, 1.5, 0.0], 40.0, &c) {
            Err(Error::Budget { required, cap }) => assert!(required > cap),
            other => panic!("expected budget error, got {other:?}"),
        }
    }
}
