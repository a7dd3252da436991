//! Sampled sup-norm of the kernel over time and semiclassical parameter.

use rayon::prelude::*;

use super::{mat_max_norm, KernelConfig, PreparedPair};
use crate::error::{domain, Error, Result};
use crate::sampling::Halton;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointPair {
    pub y: [f64; 3],
    pub y2: [f64; 3],
}

/// Quasi-random pairs with radii uniform in `[r_min, r_max]` and directions
/// uniform on the sphere; the first `coincident` pairs have `y = y'`.
pub fn point_plan(count: usize, coincident: usize, r_min: f64, r_max: f64, seed: u64) -> Vec<PointPair> {
    let halton = Halton::new(6, seed);
    let place = |r: f64, u: f64, v: f64| {
        let c = 1.0 - 2.0 * u;
        let s = (1.0 - c * c).max(0.0).sqrt();
        let phi = 2.0 * std::f64::consts::PI * v;
        let r = r_min + (r_max - r_min) * r;
        [r * s * phi.cos(), r * s * phi.sin(), r * c]
    };
    (0..count)
        .map(|i| {
            let p = halton.point(i as u64);
            let y = place(p[0], p[1], p[2]);
            let y2 = if i < coincident { y } else { place(p[3], p[4], p[5]) };
            PointPair { y, y2 }
        })
        .collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub rho: f64,
    pub a: f64,
    pub r_bound: f64,
    pub hs: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub pairs: usize,
    pub coincident: usize,
    pub seed: u64,
    /// Abort when the largest `quad_est` at some `t` exceeds this fraction
    /// of the sampled sup at that `t`.
    pub quad_rel_tol: f64,
    /// Sups below this fraction of the `t = 0` sup are judged against it
    /// instead of their own size.
    pub quad_floor_rel: f64,
    pub nodes_per_panel: usize,
    pub panels_per_period: f64,
    pub enforce_hypotheses: bool,
    pub obstacle: bool,
}

impl SweepConfig {
    pub fn default_for(rho: f64, a: f64, r_bound: f64) -> Self {
        Self {
            rho,
            a,
            r_bound,
            hs: vec![1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0],
            t_grid: default_t_grid(r_bound),
            pairs: 256,
            coincident: 32,
            seed: 0,
            quad_rel_tol: 0.01,
            quad_floor_rel: 1e-6,
            nodes_per_panel: 32,
            panels_per_period: 0.25,
            enforce_hypotheses: true,
            obstacle: true,
        }
    }

    fn kernel_config(&self, h: f64) -> Result<KernelConfig> {
        let mut cfg = if self.enforce_hypotheses {
            KernelConfig::new(self.rho, self.a, h, self.r_bound)?
        } else {
            KernelConfig::new_unchecked(self.rho, self.a, h, self.r_bound)?
        };
        cfg.nodes_per_panel = self.nodes_per_panel;
        cfg.panels_per_period = self.panels_per_period;
        cfg.obstacle = self.obstacle;
        Ok(cfg)
    }
}

/// `0, R/4, .., R`, sixteen log-spaced points on `[2R, 20R]`, then
/// `25R, 30R, 35R, 40R`.
pub fn default_t_grid(r: f64) -> Vec<f64> {
    let mut t: Vec<f64> = (0..=4).map(|i| r * i as f64 / 4.0).collect();
    let (lo, hi) = ((2.0 * r).ln(), (20.0 * r).ln());
    t.extend((0..16).map(|i| (lo + (hi - lo) * i as f64 / 15.0).exp()));
    t.extend([25.0, 30.0, 35.0, 40.0].map(|m| m * r));
    t
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub h: f64,
    pub t: f64,
    pub sup_norm: f64,
    pub fitted_slope: f64,
    /// `h⁵ sup / min(1, R/t)` at this row.
    pub envelope_c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HSummary {
    pub h: f64,
    pub sup_t0: f64,
    /// `max_{t ≤ R} sup(t) / sup(0)`.
    pub plateau_ratio: f64,
    /// Log–log slope on `[2R, 20R]`.
    pub slope: f64,
    pub envelope_c: f64,
    pub sup_over_t: f64,
    pub max_quad_rel: f64,
    pub max_trunc_rel: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub per_h: Vec<HSummary>,
    /// Fitted `p` in `sup_t sup ∝ h^{-p}`.
    pub h_exponent: f64,
}

/// Runs the sweep; each pair is tabulated once per `h` and evaluated on the
/// whole time grid.
pub fn decay_sweep(cfg: &SweepConfig) -> Result<SweepTable> {
    if cfg.t_grid.is_empty() || cfg.t_grid.iter().any(|&t| !(0.0..=40.0 * cfg.r_bound).contains(&t)) {
        return domain("time grid must be non-empty and inside [0, 40R]");
    }
    if cfg.hs.is_empty() {
        return domain("no h values");
    }
    let pairs = point_plan(cfg.pairs, cfg.coincident, cfg.rho, 3.0 * cfg.r_bound, cfg.seed);
    let t_max = cfg.t_grid.iter().cloned().fold(0.0, f64::max);
    let mut rows = Vec::new();
    let mut per_h = Vec::new();
    for &h in &cfg.hs {
        let kc = cfg.kernel_config(h)?;
        // (norm, quad_est, trunc_err) per pair and time.
        let cells: Vec<Vec<(f64, f64, f64)>> = pairs
            .par_iter()
            .map(|p| {
                let prep = PreparedPair::new(&kc, p.y, p.y2, t_max)?;
                cfg.t_grid
                    .iter()
                    .map(|&t| {
                        let k = prep.evaluate(t)?;
                        Ok((mat_max_norm(&k.value), k.quad_est, k.trunc_err))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        let nt = cfg.t_grid.len();
        let sup: Vec<f64> = (0..nt)
            .map(|i| cells.iter().map(|c| c[i].0).fold(0.0, f64::max))
            .collect();
        let i0 = cfg
            .t_grid
            .iter()
            .position(|&t| t == 0.0)
            .ok_or_else(|| Error::Domain("time grid must contain t = 0".into()))?;
        let floor = cfg.quad_floor_rel * sup[i0];
        // The sup over pairs moves by at most the largest per-pair error, so
        // accuracy is judged against sup(t) rather than each entry.
        let mut max_quad_rel: f64 = 0.0;
        let mut max_trunc_rel: f64 = 0.0;
        for ti in 0..nt {
            let scale = sup[ti].max(floor);
            let (pi, q) = cells
                .iter()
                .enumerate()
                .map(|(pi, c)| (pi, c[ti].1))
                .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
            let tr = cells.iter().map(|c| c[ti].2).fold(0.0, f64::max);
            let rel = q / scale;
            max_quad_rel = max_quad_rel.max(rel);
            max_trunc_rel = max_trunc_rel.max(tr / scale);
            if rel > cfg.quad_rel_tol {
                return Err(Error::CheckFailed(format!(
                    "sweep aborted: quad_est {q:.3e} exceeds {} of sup |K| = {:.3e} (h = {h}, t = {}, pair {pi})",
                    cfg.quad_rel_tol, sup[ti], cfg.t_grid[ti]
                )));
            }
        }
        let (fx, fy): (Vec<f64>, Vec<f64>) = cfg
            .t_grid
            .iter()
            .zip(&sup)
            .filter(|(&t, _)| t >= 2.0 * cfg.r_bound * (1.0 - 1e-12) && t <= 20.0 * cfg.r_bound * (1.0 + 1e-12))
            .map(|(&t, &s)| (t, s))
            .unzip();
        let slope = if fx.len() >= 2 { fit_slope(&fx, &fy) } else { f64::NAN };
        let plateau_ratio = cfg
            .t_grid
            .iter()
            .zip(&sup)
            .filter(|(&t, _)| t <= cfg.r_bound)
            .map(|(_, &s)| s / sup[i0])
            .fold(0.0, f64::max);
        let mut env_c: f64 = 0.0;
        for (&t, &s) in cfg.t_grid.iter().zip(&sup) {
            let shape = if t > cfg.r_bound { cfg.r_bound / t } else { 1.0 };
            let c = h.powi(5) * s / shape;
            env_c = env_c.max(c);
            rows.push(SweepRow {
                h,
                t,
                sup_norm: s,
                fitted_slope: slope,
                envelope_c: c,
            });
        }
        per_h.push(HSummary {
            h,
            sup_t0: sup[i0],
            plateau_ratio,
            slope,
            envelope_c: env_c,
            sup_over_t: sup.iter().cloned().fold(0.0, f64::max),
            max_quad_rel,
            max_trunc_rel,
        });
    }
    let h_exponent = if per_h.len() >= 2 {
        let inv: Vec<f64> = per_h.iter().map(|s| 1.0 / s.h).collect();
        let sups: Vec<f64> = per_h.iter().map(|s| s.sup_over_t).collect();
        fit_slope(&inv, &sups)
    } else {
        f64::NAN
    };
    Ok(SweepTable {
        rows,
        per_h,
        h_exponent,
    })
}
