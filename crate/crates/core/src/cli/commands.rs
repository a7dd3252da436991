//! Table-producing subcommands.

use super::{fmt_f, CsvTable, RunConfig};
use crate::error::{domain, Result};
use crate::field::{eigenfunction_eh, EigenfunctionSpec, ModalCoefficients};
use crate::kernel::{
    decay_sweep, mat_max_norm, point_plan, KernelConfig, PointPair, PreparedPair, SweepConfig,
};
use crate::mie::{mie_coefficients_upto, Polarization};
use crate::sampling::Halton;
use crate::specfun::{riccati_from_seq, spherical_j_seq, spherical_y_seq};
use crate::vsh::{gram_matrix, ModeIndex, SphereGrid, SphericalPoint};

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

pub(super) fn kernel_config(cfg: &RunConfig, h: f64) -> Result<KernelConfig> {
    let mut k = if cfg.unsafe_params {
        KernelConfig::new_unchecked(cfg.rho, cfg.a, h, cfg.r_bound)?
    } else {
        KernelConfig::new(cfg.rho, cfg.a, h, cfg.r_bound)?
    };
    k.lmax = cfg.ell_max;
    k.obstacle = !cfg.zero_amplitude;
    Ok(k)
}

pub(super) fn specfun(cfg: &RunConfig) -> Result<CsvTable> {
    let lmax = cfg.ell_max.unwrap_or(10);
    let zs = linspace(cfg.x_min.unwrap_or(0.5), cfg.x_max.unwrap_or(20.0), cfg.samples.unwrap_or(16));
    let mut t = CsvTable::new(cfg.header(), &["ell", "z", "j", "y", "wronskian_defect"]);
    for &z in &zs {
        if !(z > 0.0) {
            return domain(format!("z must be positive, got {z}"));
        }
        let j = spherical_j_seq(lmax + 1, z)?;
        let y = spherical_y_seq(lmax + 1, z)?;
        for l in 0..=lmax {
            // j y' - j' y = (j (zy)' - (zj)' y) / z
            let dj = riccati_from_seq(&j, l, z);
            let dy = riccati_from_seq(&y, l, z);
            let w = (j[l] * dy - dj * y[l]) / z;
            let defect = (w * z * z - 1.0).abs();
            t.push(vec![l.to_string(), fmt_f(z), fmt_f(j[l]), fmt_f(y[l]), fmt_f(defect)]);
        }
    }
    Ok(t)
}

pub(super) fn vsh_gram(cfg: &RunConfig) -> Result<CsvTable> {
    let lmax = cfg.ell_max.unwrap_or(8);
    let modes = ModeIndex::enumerate(lmax as u32);
    let grid = SphereGrid::for_degree(lmax);
    let g = gram_matrix(&modes, &grid)?;
    let n = modes.len();
    let mut t = CsvTable::new(cfg.header(), &["index", "j", "ell", "m", "diag_defect", "max_offdiag"]);
    for (i, mode) in modes.iter().enumerate() {
        let diag = (g[i * n + i] - 1.0).abs();
        let off = (0..n).filter(|&k| k != i).map(|k| g[i * n + k].abs()).fold(0.0, f64::max);
        t.push(vec![
            i.to_string(),
            mode.j.to_string(),
            mode.ell.to_string(),
            mode.m.to_string(),
            fmt_f(diag),
            fmt_f(off),
        ]);
    }
    Ok(t)
}

pub(super) fn mie(cfg: &RunConfig) -> Result<CsvTable> {
    let lmax = cfg.ell_max.unwrap_or(10);
    let xs = linspace(cfg.x_min.unwrap_or(0.5), cfg.x_max.unwrap_or(20.0), cfg.samples.unwrap_or(8));
    let mut t = CsvTable::new(cfg.header(), &["ell", "pol", "x", "re_a", "im_a", "abs_s_minus_1"]);
    for &x in &xs {
        let (te, tm) = mie_coefficients_upto(lmax, x)?;
        for l in 1..=lmax {
            for (pol, a) in [(Polarization::Te, te[l]), (Polarization::Tm, tm[l])] {
                let s = a + 1.0;
                t.push(vec![
                    l.to_string(),
                    pol.label().to_string(),
                    fmt_f(x),
                    fmt_f(a.re),
                    fmt_f(a.im),
                    fmt_f(s.norm() - 1.0),
                ]);
            }
        }
    }
    Ok(t)
}

pub(super) fn field(cfg: &RunConfig) -> Result<CsvTable> {
    let lmax = cfg.ell_max.unwrap_or(4) as u32;
    let lambda = cfg.lambda.unwrap_or(cfg.a / cfg.h);
    let coeffs = ModalCoefficients::random_unit(lmax, cfg.seed);
    let mut spec = EigenfunctionSpec::new(lambda, cfg.rho, coeffs)?;
    spec.obstacle = !cfg.zero_amplitude;
    let halton = Halton::new(3, cfg.seed);
    let mut t = CsvTable::new(
        cfg.header(),
        &[
            "r", "theta", "phi", "re_ex", "im_ex", "re_ey", "im_ey", "re_ez", "im_ez", "re_hx", "im_hx", "re_hy",
            "im_hy", "re_hz", "im_hz",
        ],
    );
    for i in 0..cfg.samples.unwrap_or(16) {
        let q = halton.point(i as u64);
        let r = cfg.rho + (3.0 * cfg.r_bound - cfg.rho) * q[0];
        let theta = (1.0 - 2.0 * q[1]).acos();
        let phi = 2.0 * std::f64::consts::PI * q[2];
        let p = SphericalPoint::new(r, theta, phi)?;
        let (e, hm) = eigenfunction_eh(&spec, &p)?;
        let mut row = vec![fmt_f(p.r), fmt_f(p.theta), fmt_f(p.phi)];
        for z in e.to_array().into_iter().chain(hm.to_array()) {
            row.push(fmt_f(z.re));
            row.push(fmt_f(z.im));
        }
        t.push(row);
    }
    Ok(t)
}

fn spherical(v: [f64; 3]) -> Result<SphericalPoint> {
    SphericalPoint::from_cartesian(v)
}

pub(super) fn kernel(cfg: &RunConfig) -> Result<CsvTable> {
    let kc = kernel_config(cfg, cfg.h)?;
    let pairs: Vec<PointPair> = match (cfg.y, cfg.y2) {
        (Some(y), Some(y2)) => vec![PointPair { y, y2 }],
        (Some(y), None) => vec![PointPair { y, y2: y }],
        (None, None) => {
            let n = cfg.pairs.unwrap_or(4);
            point_plan(n, n.min(1), cfg.rho, 3.0 * cfg.r_bound, cfg.seed)
        }
        (None, Some(_)) => return domain("y2 given without y"),
    };
    let mut t = CsvTable::new(
        cfg.header(),
        &["t", "h", "r", "theta", "phi", "r2", "theta2", "phi2", "norm", "trunc_err", "quad_est"],
    );
    for p in &pairs {
        let k = PreparedPair::new(&kc, p.y, p.y2, cfg.t)?.evaluate(cfg.t)?;
        let (a, b) = (spherical(p.y)?, spherical(p.y2)?);
        t.push(vec![
            fmt_f(cfg.t),
            fmt_f(cfg.h),
            fmt_f(a.r),
            fmt_f(a.theta),
            fmt_f(a.phi),
            fmt_f(b.r),
            fmt_f(b.theta),
            fmt_f(b.phi),
            fmt_f(mat_max_norm(&k.value)),
            fmt_f(k.trunc_err),
            fmt_f(k.quad_est),
        ]);
    }
    Ok(t)
}

pub(super) fn sweep(cfg: &RunConfig) -> Result<CsvTable> {
    let mut sc = SweepConfig::default_for(cfg.rho, cfg.a, cfg.r_bound);
    sc.hs = cfg.hs.clone();
    sc.seed = cfg.seed;
    if let Some(p) = cfg.pairs {
        sc.pairs = p;
        sc.coincident = sc.coincident.min(p);
    }
    sc.enforce_hypotheses = !cfg.unsafe_params;
    sc.obstacle = !cfg.zero_amplitude;
    let table = decay_sweep(&sc)?;
    let mut comments = cfg.header();
    comments.push(format!("h_exponent = {}", fmt_f(table.h_exponent)));
    let mut t = CsvTable::new(comments, &["h", "t", "sup_norm", "fitted_slope", "envelope_C"]);
    for r in &table.rows {
        t.push(vec![fmt_f(r.h), fmt_f(r.t), fmt_f(r.sup_norm), fmt_f(r.fitted_slope), fmt_f(r.envelope_c)]);
    }
    Ok(t)
}
