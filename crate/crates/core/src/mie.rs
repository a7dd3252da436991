//! Scattering coefficients of the perfectly conducting ball and the radial
//! B-ratios that control the scattered part of the propagator kernel.
//!
//! ```text
//! A_TE = -2 j_ℓ(x) / h_ℓ(x)
//! A_TM = -2 (z j_ℓ)'(x) / (z h_ℓ)'(x)
//! S    = 1 + A
//! ```
//!
//! with `h_ℓ = h^{(1)}_ℓ` and `x = λρ`. Since `1 + A_TE = -h^{(2)}_ℓ/h^{(1)}_ℓ`
//! (and likewise for TM with Riccati derivatives), `|S| = 1` for real `x`.

use std::f64::consts::E;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::sampling::Halton;
use crate::specfun::{riccati_from_seq, spherical_j_seq, ScaledHankel};

/// Polarization of a tangential mode: TE is family 1, TM is family 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarization {
    Te,
    Tm,
}

impl Polarization {
    /// The VSH family index (1 or 2).
    pub fn family(self) -> u8 {
        match self {
            Polarization::Te => 1,
            Polarization::Tm => 2,
        }
    }

    pub fn from_family(j: u8) -> Result<Self> {
        match j {
            1 => Ok(Polarization::Te),
            2 => Ok(Polarization::Tm),
            _ => domain(format!("only families 1 and 2 scatter, got {j}")),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Polarization::Te => "TE",
            Polarization::Tm => "TM",
        }
    }
}

/// One diagonal entry of the amplitude and scattering matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MieCoefficient {
    pub ell: u32,
    pub pol: Polarization,
    pub x: f64,
    pub a: Complex64,
    pub s: Complex64,
}

fn check_mode(ell: u32, x: f64) -> Result<()> {
    if ell == 0 {
        return domain("Maxwell modes start at ell = 1");
    }
    if !(x.is_finite() && x > 0.0) {
        return domain(format!("size parameter must be positive, got {x}"));
    }
    Ok(())
}

/// `A_TE(ℓ, x) = -2 j_ℓ(x)/h^{(1)}_ℓ(x)`.
pub fn mie_te(ell: u32, x: f64) -> Result<Complex64> {
    check_mode(ell, x)?;
    let h = ScaledHankel::new(ell as usize, x)?;
    Ok(te_from(h.values[ell as usize]))
}

/// `A_TM(ℓ, x) = -2 (z j_ℓ)'(x)/(z h^{(1)}_ℓ)'(x)`.
pub fn mie_tm(ell: u32, x: f64) -> Result<Complex64> {
    check_mode(ell, x)?;
    let h = ScaledHankel::new(ell as usize, x)?;
    tm_from(h.riccati(ell as usize), ell)
}

pub fn mie_coefficient(ell: u32, pol: Polarization, x: f64) -> Result<MieCoefficient> {
    let a = match pol {
        Polarization::Te => mie_te(ell, x)?,
        Polarization::Tm => mie_tm(ell, x)?,
    };
    Ok(MieCoefficient {
        ell,
        pol,
        x,
        a,
        s: a + 1.0,
    })
}

#[inline]
fn te_from(h: Complex64) -> Complex64 {
    // j = Re h for real argument.
    -2.0 * h.re / h
}

#[inline]
fn tm_from(dh: Complex64, ell: u32) -> Result<Complex64> {
    if dh.norm() < 1e-300 {
        return Err(Error::Conditioning(format!(
            "Riccati derivative of h_{ell} vanishes numerically"
        )));
    }
    Ok(-2.0 * dh.re / dh)
}

/// `(A_TE, A_TM)` for `ℓ = 0..=lmax` from one pair of Bessel sequences.
/// Entry `ℓ = 0` is filled with zeros (no Maxwell mode).
pub fn mie_coefficients_upto(lmax: usize, x: f64) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if !(x.is_finite() && x > 0.0) {
        return domain(format!("size parameter must be positive, got {x}"));
    }
    let h = ScaledHankel::new(lmax, x)?;
    let mut te = vec![Complex64::new(0.0, 0.0); lmax + 1];
    let mut tm = te.clone();
    for ell in 1..=lmax {
        te[ell] = te_from(h.values[ell]);
        tm[ell] = tm_from(h.riccati(ell), ell as u32)?;
    }
    Ok((te, tm))
}

/// The three B-ratios at one `(ℓ, k = λ/h, ρ, r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BRatios {
    pub ell: u32,
    pub lambda_over_h: f64,
    pub rho: f64,
    pub r: f64,
    pub b1: Complex64,
    pub b2: Complex64,
    pub b3: Complex64,
}

/// ```text
/// B_1 = -h_ℓ(kr)/h_ℓ(kρ)
/// B_2 = -(1/r)(z h_ℓ)'(kr)/(z h_ℓ)'(kρ)
/// B_3 = -(√(ℓ(ℓ+1))/r) h_ℓ(kr)/(z h_ℓ)'(kρ)
/// ```
pub fn b_ratios(ell: u32, lambda_over_h: f64, rho: f64, r: f64) -> Result<BRatios> {
    if !(rho > 0.0 && r >= rho && r.is_finite()) {
        return domain(format!("need r >= rho > 0, got rho={rho}, r={r}"));
    }
    if !(lambda_over_h.is_finite() && lambda_over_h > 0.0) {
        return domain(format!("lambda/h must be positive, got {lambda_over_h}"));
    }
    let l = ell as usize;
    let (zr, zp) = (lambda_over_h * r, lambda_over_h * rho);
    let hr = ScaledHankel::new(l, zr)?;
    let hp = if r == rho { hr.clone() } else { ScaledHankel::new(l, zp)? };
    let (dr, dp) = (hr.riccati(l), hp.riccati(l));
    // |h_ℓ| decreases in the argument, so this factor is at most about one.
    let f = (hr.log_scale[l] - hp.log_scale[l]).exp();
    let lf = ell as f64;
    Ok(BRatios {
        ell,
        lambda_over_h,
        rho,
        r,
        b1: -hr.values[l] / hp.values[l] * f,
        b2: -(dr / r) / dp * f,
        b3: -((lf * (lf + 1.0)).sqrt() / r) * hr.values[l] / dp * f,
    })
}

/// Single B-ratio by index 1, 2 or 3.
pub fn b_ratio(index: u8, ell: u32, lambda_over_h: f64, rho: f64, r: f64) -> Result<Complex64> {
    let b = b_ratios(ell, lambda_over_h, rho, r)?;
    match index {
        1 => Ok(b.b1),
        2 => Ok(b.b2),
        3 => Ok(b.b3),
        _ => domain(format!("B-ratio index must be 1, 2 or 3, got {index}")),
    }
}

/// `d/dλ B_1` at `k = λ/h` from `h_ℓ' = h_{ℓ-1} - (ℓ+1)/z h_ℓ`.
pub fn b1_lambda_derivative(ell: u32, lambda: f64, h: f64, rho: f64, r: f64) -> Result<Complex64> {
    if !(rho > 0.0 && r >= rho) {
        return domain(format!("need r >= rho > 0, got rho={rho}, r={r}"));
    }
    let k = lambda / h;
    let l = ell as usize;
    // z h_ℓ'/h_ℓ = (z h_ℓ)'/h_ℓ - 1, so nothing large is ever multiplied.
    let log_deriv = |s: &ScaledHankel| (s.riccati(l) / s.values[l] - 1.0) / s.z;
    let hr = ScaledHankel::new(l, k * r)?;
    let hp = ScaledHankel::new(l, k * rho)?;
    let b1 = -hr.values[l] / hp.values[l] * (hr.log_scale[l] - hp.log_scale[l]).exp();
    Ok(b1 * (r * log_deriv(&hr) - rho * log_deriv(&hp)) / h)
}

/// Central difference of all three B-ratios in `λ` with step `h·1e-4`.
pub fn b_ratios_lambda_fd(ell: u32, lambda: f64, h: f64, rho: f64, r: f64) -> Result<[Complex64; 3]> {
    let d = h * 1e-4;
    let p = b_ratios(ell, (lambda + d) / h, rho, r)?;
    let m = b_ratios(ell, (lambda - d) / h, rho, r)?;
    Ok([
        (p.b1 - m.b1) / (2.0 * d),
        (p.b2 - m.b2) / (2.0 * d),
        (p.b3 - m.b3) / (2.0 * d),
    ])
}

/// Sample plan for the B-ratio bound sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSamplePlan {
    pub rho: f64,
    /// Cutoff center; `λ` is sampled in `(a/2, 3a/2)`.
    pub a: f64,
    pub hs: Vec<f64>,
    /// Largest radius sampled; `r ∈ [ρ, r_max]`.
    pub r_max: f64,
    /// Largest order. `None` picks `⌈2e·(3a/2)ρ/h⌉` per `h`, which covers
    /// both sides of the regime boundary `ℓ = e·w`.
    pub ell_max: Option<u32>,
    pub samples_per_h: usize,
    pub seed: u64,
    /// Samples with `|ℓ - e·w| ≤ band` count in both regimes.
    pub boundary_band: f64,
    /// Number of samples (from the start of each `h` block) that also run
    /// the analytic `dB_1/dλ` cross-check.
    pub analytic_checks: usize,
}

impl Default for BoundSamplePlan {
    fn default() -> Self {
        Self {
            rho: 1.0,
            a: 4.0,
            hs: vec![1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0],
            r_max: 6.0,
            ell_max: None,
            samples_per_h: 33_334,
            seed: 0,
            boundary_band: 2.0,
            analytic_checks: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    /// `ℓ < e·w`
    Low,
    /// `ℓ > e·w`
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundQuantity {
    Value,
    LambdaDerivative,
}

/// Where a fitted constant was attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint {
    pub ell: u32,
    pub lambda: f64,
    pub h: f64,
    pub r: f64,
}

/// Smallest admissible constant for one (ratio, quantity, regime, h) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedConstant {
    pub index: u8,
    pub quantity: BoundQuantity,
    pub regime: Regime,
    pub h: f64,
    pub c: f64,
    pub count: usize,
    pub worst: Option<SamplePoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub samples: usize,
    pub b1_max: f64,
    pub b1_violations: usize,
    /// Largest `|dB_1/dλ| / ((2/h) max{r, (ℓ+1)h})`.
    pub db1_max_ratio: f64,
    pub db1_violations: usize,
    pub constants: Vec<FittedConstant>,
    /// Largest relative gap between the analytic and FD `dB_1/dλ`.
    pub analytic_crosscheck_rel: f64,
}

impl BoundReport {
    /// `max C / min C` across `h` for one (ratio, quantity, regime), or
    /// `None` if some `h` has no samples in that regime.
    pub fn stability(&self, index: u8, quantity: BoundQuantity, regime: Regime) -> Option<f64> {
        let cells: Vec<&FittedConstant> = self
            .constants
            .iter()
            .filter(|c| c.index == index && c.quantity == quantity && c.regime == regime)
            .collect();
        if cells.is_empty() || cells.iter().any(|c| c.count == 0 || c.c <= 0.0) {
            return None;
        }
        let hi = cells.iter().map(|c| c.c).fold(f64::MIN, f64::max);
        let lo = cells.iter().map(|c| c.c).fold(f64::MAX, f64::min);
        Some(hi / lo)
    }
}

/// Roundoff slack on the constant-one bounds `|B_1| ≤ 1` and the `dB_1/dλ`
/// bound. At `r = ρ` the first is attained exactly.
pub const B1_SLACK: f64 = 1e-12;

struct SampleOutcome {
    point: SamplePoint,
    b1: f64,
    db1_ratio: f64,
    /// `[index-2][quantity]` normalised magnitudes, per regime membership.
    low: Option<[[f64; 2]; 2]>,
    high: Option<[[f64; 2]; 2]>,
    analytic_rel: Option<f64>,
}

/// Sweeps the plan and fits the regime constants of the B-ratio bounds.
pub fn verify_bound_lemma(plan: &BoundSamplePlan) -> Result<BoundReport> {
    if plan.hs.is_empty() || plan.samples_per_h == 0 {
        return domain("bound plan needs at least one h and one sample");
    }
    if !(plan.rho > 0.0 && plan.r_max >= plan.rho && plan.a > 0.0) {
        return domain("bound plan needs a > 0 and r_max >= rho > 0");
    }
    let halton = Halton::new(3, plan.seed);
    let mut constants = Vec::new();
    let (mut b1_max, mut db1_max_ratio, mut crosscheck) = (0.0f64, 0.0f64, 0.0f64);
    let (mut b1_violations, mut db1_violations) = (0, 0);
    for &h in &plan.hs {
        let ell_cap = plan
            .ell_max
            .unwrap_or_else(|| (2.0 * E * 1.5 * plan.a * plan.rho / h).ceil() as u32)
            .max(1);
        let outcomes: Vec<Result<SampleOutcome>> = (0..plan.samples_per_h)
            .into_par_iter()
            .map(|i| {
                let u = halton.point(i as u64);
                let ell = 1 + ((u[0] * ell_cap as f64) as u32).min(ell_cap - 1);
                let lambda = plan.a * (0.5 + u[1]);
                let r = plan.rho + (plan.r_max - plan.rho) * u[2];
                let analytic = i < plan.analytic_checks;
                evaluate_sample(plan, ell, lambda, h, r, analytic)
            })
            .collect();
        let mut cells = [[[(0.0f64, 0usize, None); 2]; 2]; 2]; // [regime][index-2][quantity]
        for o in outcomes {
            let o = o?;
            b1_max = b1_max.max(o.b1);
            if o.b1 > 1.0 + B1_SLACK {
                b1_violations += 1;
            }
            db1_max_ratio = db1_max_ratio.max(o.db1_ratio);
            if o.db1_ratio > 1.0 + B1_SLACK {
                db1_violations += 1;
            }
            if let Some(rel) = o.analytic_rel {
                crosscheck = crosscheck.max(rel);
            }
            for (reg, vals) in [(0, o.low), (1, o.high)] {
                if let Some(v) = vals {
                    for idx in 0..2 {
                        for q in 0..2 {
                            let cell = &mut cells[reg][idx][q];
                            cell.1 += 1;
                            if v[idx][q] > cell.0 {
                                cell.0 = v[idx][q];
                                cell.2 = Some(o.point);
                            }
                        }
                    }
                }
            }
        }
        for (reg, regime) in [(0, Regime::Low), (1, Regime::High)] {
            for idx in 0..2 {
                for (q, quantity) in [(0, BoundQuantity::Value), (1, BoundQuantity::LambdaDerivative)] {
                    let (c, count, worst) = cells[reg][idx][q];
                    constants.push(FittedConstant {
                        index: idx as u8 + 2,
                        quantity,
                        regime,
                        h,
                        c,
                        count,
                        worst,
                    });
                }
            }
        }
    }
    Ok(BoundReport {
        samples: plan.samples_per_h * plan.hs.len(),
        b1_max,
        b1_violations,
        db1_max_ratio,
        db1_violations,
        constants,
        analytic_crosscheck_rel: crosscheck,
    })
}

fn evaluate_sample(
    plan: &BoundSamplePlan,
    ell: u32,
    lambda: f64,
    h: f64,
    r: f64,
    analytic: bool,
) -> Result<SampleOutcome> {
    let b = b_ratios(ell, lambda / h, plan.rho, r)?;
    let d = b_ratios_lambda_fd(ell, lambda, h, plan.rho, r)?;
    let lf = ell as f64;
    let db1_ratio = d[0].norm() / ((2.0 / h) * r.max((lf + 1.0) * h));
    let analytic_rel = if analytic {
        let exact = b1_lambda_derivative(ell, lambda, h, plan.rho, r)?;
        Some((exact - d[0]).norm() / exact.norm().max(1e-300))
    } else {
        None
    };
    let w = lambda * plan.rho / h;
    let boundary = E * w;
    let in_low = lf < boundary + plan.boundary_band;
    let in_high = lf > boundary - plan.boundary_band;
    // Normalised by the right-hand sides of the regime bounds.
    let low = in_low.then(|| {
        [
            [b.b2.norm() * h, d[1].norm() * h * h / r],
            [b.b3.norm() * h, d[2].norm() * h * h / r],
        ]
    });
    let high = in_high.then(|| {
        let deriv_rhs = lf * (lf + 1.0) * h / lambda + 1.0;
        [
            [b.b2.norm() / (lf * h / lambda + 1.0), d[1].norm() / deriv_rhs],
            [b.b3.norm() / (lf * h / lambda), d[2].norm() / deriv_rhs],
        ]
    });
    Ok(SampleOutcome {
        point: SamplePoint { ell, lambda, h, r },
        b1: b.b1.norm(),
        db1_ratio,
        low,
        high,
        analytic_rel,
    })
}

/// `|1 + A| - 1` for both polarizations; exposed for the CLI table.
pub fn unitarity_defect(ell: u32, x: f64) -> Result<(f64, f64)> {
    let te = mie_te(ell, x)?;
    let tm = mie_tm(ell, x)?;
    Ok(((te + 1.0).norm() - 1.0, (tm + 1.0).norm() - 1.0))
}

/// `j_ℓ(x)` and `(z j_ℓ)'(x)` for `ℓ = 0..=lmax`.
pub fn regular_radial(lmax: usize, x: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let j = spherical_j_seq(lmax + 1, x)?;
    let dj = (0..=lmax).map(|l| riccati_from_seq(&j, l, x)).collect();
    Ok((j[..=lmax].to_vec(), dj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{large_order_envelope_nu, EnvelopeKind};

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn frozen_values() {
        let te = mie_te(1, 1.0).unwrap();
        assert!(close(te, Complex64::new(-0.090_702_573_174_318_3, -0.416_146_836_547_142_4), 1e-13));
        let tm = mie_tm(1, 1.0).unwrap();
        assert!(close(tm, Complex64::new(-0.583_853_163_452_857_6, 0.909_297_426_825_681_7), 1e-13));
    }

    #[test]
    fn unitarity_and_batch_agreement() {
        for &x in &[0.5, 1.0, 7.3, 42.0, 100.0] {
            let (te, tm) = mie_coefficients_upto(40, x).unwrap();
            for ell in 1..=40u32 {
                let a = mie_te(ell, x).unwrap();
                let b = mie_tm(ell, x).unwrap();
                assert!(close(a, te[ell as usize], 1e-14));
                assert!(close(b, tm[ell as usize], 1e-14));
                assert!(((a + 1.0).norm() - 1.0).abs() < 1e-12);
                assert!(((b + 1.0).norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn te_decays_like_envelope_ratio_at_large_order() {
        let x = 2.0;
        let mut prev = f64::INFINITY;
        for ell in 6..60u32 {
            let a = mie_te(ell, x).unwrap().norm();
            let nu = ell as f64 + 0.5;
            let env = 4.0 * large_order_envelope_nu(EnvelopeKind::J, nu, x)
                / large_order_envelope_nu(EnvelopeKind::H1, nu, x);
            assert!(a <= env, "ell={ell} |a|={a} env={env}");
            assert!(a < prev);
            prev = a;
        }
    }

    #[test]
    fn b_ratios_at_the_boundary() {
        for ell in 1..20 {
            let b = b_ratios(ell, 13.7, 1.3, 1.3).unwrap();
            assert_eq!(b.b1, Complex64::new(-1.0, 0.0));
            assert!(close(b.b2, Complex64::new(-1.0 / 1.3, 0.0), 1e-15));
        }
        let b = b_ratios(1, 8.0, 1.0, 2.0).unwrap();
        assert!((b.b1.norm() - 0.497_107_015_254_647_8).abs() < 1e-14);
        assert!(b_ratios(1, 8.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn analytic_derivative_matches_fd() {
        for &(ell, lambda, h, r) in &[(1, 3.0, 0.125, 2.0), (30, 4.5, 0.0625, 1.7), (90, 2.2, 0.03125, 5.0)] {
            let a = b1_lambda_derivative(ell, lambda, h, 1.0, r).unwrap();
            let fd = b_ratios_lambda_fd(ell, lambda, h, 1.0, r).unwrap()[0];
            assert!((a - fd).norm() <= 1e-6 * a.norm(), "{a} {fd}");
        }
    }

    #[test]
    fn small_plan_has_no_b1_violations() {
        let plan = BoundSamplePlan {
            hs: vec![0.125],
            ell_max: Some(80),
            samples_per_h: 2000,
            ..Default::default()
        };
        let rep = verify_bound_lemma(&plan).unwrap();
        assert_eq!(rep.b1_violations, 0);
        assert_eq!(rep.db1_violations, 0);
        assert!(rep.b1_max <= 1.0 + B1_SLACK);
        assert!(rep.analytic_crosscheck_rel < 1e-6);
    }
}
