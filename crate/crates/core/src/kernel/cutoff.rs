//! Smooth high-frequency cutoff `φ` centred at `λ = a`.
//!
//! `φ = 1` on `[a - p, a + p]` and falls to 0 across a transition of width
//! `w` on either side through the smooth step
//!
//! ```text
//! S(s) = ψ(1 - s) / (ψ(s) + ψ(1 - s)),   ψ(x) = exp(-1/x) for x > 0, else 0
//! ```
//!
//! which is `C^∞`, equals 1 at `s = 0` and 0 at `s = 1` with every
//! derivative vanishing at both ends.

use crate::error::{domain, Result};
use crate::quadrature::{GaussLegendre, PanelRule};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSpec {
    pub a: f64,
    /// Plateau half-width `p`.
    pub plateau: f64,
    /// Transition width `w`.
    pub transition: f64,
}

impl CutoffSpec {
    /// Requires `a > 0`, `p ≥ 0`, `w > 0` and `p + w < a/2`, so that the
    /// support stays inside `(a/2, 3a/2)`.
    pub fn new(a: f64, plateau: f64, transition: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return domain(format!("cutoff center must be positive, got {a}"));
        }
        if !(plateau >= 0.0 && transition > 0.0) {
            return domain("cutoff needs plateau >= 0 and transition > 0");
        }
        if plateau + transition >= 0.5 * a {
            return domain(format!(
                "cutoff support (a - {0}, a + {0}) must lie inside (a/2, 3a/2)",
                plateau + transition
            ));
        }
        Ok(Self {
            a,
            plateau,
            transition,
        })
    }

    /// Plateau `a/8`, transition `a/4`: support `(5a/8, 11a/8)`.
    pub fn default_for(a: f64) -> Result<Self> {
        Self::new(a, a / 8.0, a / 4.0)
    }

    /// Closed support interval `[a - p - w, a + p + w]`.
    pub fn support(&self) -> (f64, f64) {
        let half = self.plateau + self.transition;
        (self.a - half, self.a + half)
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        let d = (lambda - self.a).abs();
        if d <= self.plateau {
            return 1.0;
        }
        let s = (d - self.plateau) / self.transition;
        if s >= 1.0 {
            return 0.0;
        }
        smooth_step(s)
    }

    /// `∫ φ dλ` (the plateau exactly plus the two ramps by quadrature).
    pub fn integral(&self) -> f64 {
        let gl = GaussLegendre::new(16);
        let ramp = PanelRule::new(0.0, 1.0, 32, &gl).integrate(smooth_step);
        2.0 * self.plateau + 2.0 * self.transition * ramp
    }
}

fn psi(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// `S(s)` on `[0, 1]`.
pub fn smooth_step(s: f64) -> f64 {
    let (a, b) = (psi(1.0 - s), psi(s));
    a / (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_support_and_range() {
        let c = CutoffSpec::default_for(4.0).unwrap();
        assert_eq!(c.eval(4.0), 1.0);
        assert_eq!(c.eval(2.0), 0.0);
        assert_eq!(c.eval(6.0), 0.0);
        assert_eq!(c.eval(4.5), 1.0);
        assert_eq!(c.support(), (2.5, 5.5));
        for i in 0..=1000 {
            let v = c.eval(2.0 + 4.0 * i as f64 / 1000.0);
            assert!((0.0..=1.0).contains(&v));
        }
        // The ramp is antisymmetric about its midpoint, so it contributes w.
        assert!((c.integral() - (2.0 * 0.5 + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn integral_is_bracketed() {
        let a = 4.0;
        let c = CutoffSpec::new(a, a / 8.0, a / 8.0).unwrap();
        let i = c.integral();
        assert!(i > 2.0 * c.plateau && i < a);
    }

    #[test]
    fn rejects_wide_support() {
        assert!(CutoffSpec::new(4.0, 1.0, 1.0).is_err());
        assert!(CutoffSpec::new(-1.0, 0.1, 0.1).is_err());
    }
}
