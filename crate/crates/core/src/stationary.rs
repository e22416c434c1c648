//! Tail index of the stationary GARCH(1,1) law.
//!
//! With Gaussian innovations the stationary distribution has Pareto tails
//! Pr(x > u) ≈ c·u^{−2κ}, where κ > 0 solves E((αε² + β)^κ) = 1.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{integrate_to_infinity, QuadOptions};
use crate::specfun::gaussian_pdf;

pub const DEFAULT_KAPPA_MAX: f64 = 50.0;
pub const DEFAULT_TAIL_TOL: f64 = 1e-8;

fn check_coeffs(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::domain(format!("need alpha, beta > 0, got ({alpha}, {beta})")));
    }
    Ok(())
}

/// ln E((αε² + β)^κ) by quadrature over ε ≥ 0, shifted by the peak of the
/// log-integrand so large κ cannot overflow.
pub fn log_kesten_expectation(alpha: f64, beta: f64, kappa: f64) -> Result<f64> {
    check_coeffs(alpha, beta)?;
    if !(kappa > 0.0) {
        return Err(Error::domain(format!("kappa must be positive, got {kappa}")));
    }
    let log_f = |e: f64| kappa * (alpha * e * e + beta).ln() - 0.5 * e * e;
    // stationary point of log_f in e²: 2κ − β/α
    let e_star = (2.0 * kappa - beta / alpha).max(0.0).sqrt();
    let shift = log_f(e_star);
    let scale = e_star.max(1.0);
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-13,
        max_intervals: 4000,
    };
    let r = integrate_to_infinity(|e| (log_f(e) - shift).exp(), 0.0, scale, opts).map_err(|f| {
        Error::convergence(
            "kesten_expectation",
            "tail of the integrand did not stabilize",
            f.estimate.value,
        )
    })?;
    // 2 φ(e) = 2 (2π)^{−1/2} e^{−e²/2}
    Ok(shift + (r.value * 2.0 * gaussian_pdf(0.0)).ln())
}

/// E((αε² + β)^κ) for ε ~ N(0, 1).
pub fn kesten_expectation(alpha: f64, beta: f64, kappa: f64) -> Result<f64> {
    Ok(log_kesten_expectation(alpha, beta, kappa)?.exp())
}

/// Σ_n C(κ, n) αⁿ β^{κ−n} (2n−1)!!, exact for integer κ.
pub fn kesten_expectation_integer(alpha: f64, beta: f64, kappa: u32) -> f64 {
    let mut sum = 0.0;
    let mut binom = 1.0;
    let mut dfact = 1.0;
    for n in 0..=kappa {
        if n > 0 {
            binom *= (kappa - n + 1) as f64 / n as f64;
            dfact *= (2 * n - 1) as f64;
        }
        sum += binom * alpha.powi(n as i32) * beta.powi((kappa - n) as i32) * dfact;
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailIndexResult {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    /// |E((αε²+β)^κ) − 1| at the returned κ.
    pub residual: f64,
    pub iterations: usize,
    pub method: &'static str,
}

/// Root of κ ↦ E((αε²+β)^κ) − 1 on (0, κ_max].
pub fn tail_index(alpha: f64, beta: f64, tol: f64) -> Result<TailIndexResult> {
    tail_index_with_max(alpha, beta, tol, DEFAULT_KAPPA_MAX)
}

pub fn tail_index_with_max(alpha: f64, beta: f64, tol: f64, kappa_max: f64) -> Result<TailIndexResult> {
    check_coeffs(alpha, beta)?;
    let g = |k: f64| log_kesten_expectation(alpha, beta, k);

    // g(0) = 0 and g is convex, so scan for the first sign change after
    // the dip below zero
    let mut lo = 0.0;
    let mut k = 0.02;
    let mut g_prev = f64::NAN;
    let mut bracket = None;
    while k <= kappa_max * 1.000_001 {
        let gk = g(k)?;
        if gk >= 0.0 {
            if lo == 0.0 && !(g_prev < 0.0) {
                return Err(Error::domain(format!(
                    "no positive tail index: E ln(alpha eps^2 + beta) >= 0 for ({alpha}, {beta})"
                )));
            }
            bracket = Some((lo, k));
            break;
        }
        lo = k;
        g_prev = gk;
        k = if k >= kappa_max { f64::INFINITY } else { (k * 1.25).min(kappa_max) };
    }
    let (mut a, mut b) = bracket.ok_or_else(|| {
        Error::convergence(
            "tail_index",
            format!("no root below kappa_max = {kappa_max}"),
            kappa_max,
        )
    })?;

    // Illinois regula falsi on ln E, falling back to bisection
    let mut ga = g(a)?;
    let mut gb = g(b)?;
    let mut iterations = 0;
    let mut side = 0i8;
    let mut x = b;
    while (b - a) > tol * b.max(1.0) && iterations < 200 {
        iterations += 1;
        x = (a * gb - b * ga) / (gb - ga);
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        let gx = g(x)?;
        if gx == 0.0 {
            break;
        }
        if gx < 0.0 {
            a = x;
            ga = gx;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            gb = gx;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        }
        if gx.abs() < 1e-15 {
            break;
        }
    }
    let kappa = x;
    let residual = (kesten_expectation(alpha, beta, kappa)? - 1.0).abs();
    Ok(TailIndexResult {
        alpha,
        beta,
        kappa,
        residual,
        iterations,
        method: "quadrature-root",
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelPoint {
    pub ratio: f64,
    pub kappa: u32,
    /// None when the cell has no solution.
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
}

/// For each β/α ratio and integer κ, the (α, β) on the level curve of κ.
///
/// With α = β/ρ the defining equation factors as
/// β^κ Σ_n C(κ, n) ρ^{−n} (2n−1)!! = 1.
pub fn level_grid(ratios: &[f64], kappas: &[u32]) -> Vec<LevelPoint> {
    let mut out = Vec::with_capacity(ratios.len() * kappas.len());
    for &rho in ratios {
        for &kappa in kappas {
            let point = if rho > 0.0 && rho.is_finite() && kappa >= 1 {
                let s = kesten_expectation_integer(1.0 / rho, 1.0, kappa);
                let beta = s.powf(-1.0 / kappa as f64);
                LevelPoint {
                    ratio: rho,
                    kappa,
                    alpha: Some(beta / rho),
                    beta: Some(beta),
                }
            } else {
                LevelPoint {
                    ratio: rho,
                    kappa,
                    alpha: None,
                    beta: None,
                }
            };
            out.push(point);
        }
    }
    out
}
