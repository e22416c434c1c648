//! Value-at-Risk and Expected Shortfall from an exact prediction CDF.
//!
//! VaR solves F(u) = p by Newton's method from the Gaussian quantile, kept
//! inside a bisection bracket. ES integrates the CDF over the tail,
//! ES = Q + (1/p) ∫_{cut}^{−Q} F(u) du, with the lower limit standing in
//! for −∞.

use serde::Serialize;

use crate::density::CoefficientTable;
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::specfun::{gaussian_pdf, gaussian_quantile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskOptions {
    pub newton_tol: f64,
    /// Below this density value a Newton step is replaced by bisection.
    pub pdf_floor: f64,
    pub max_iter: usize,
    /// Lower integration limit in standard deviations.
    pub lower_cut: f64,
    pub quad_tol: f64,
}

impl Default for RiskOptions {
    fn default() -> Self {
        Self {
            newton_tol: 1e-7,
            pdf_floor: 1e-14,
            max_iter: 50,
            lower_cut: -6.0,
            quad_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarResult {
    pub var: f64,
    /// Newton updates taken (bisection fallbacks included).
    pub iterations: usize,
    pub bisections: usize,
    /// F(−var) − p at the returned point.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EsResult {
    pub es: f64,
    pub quad_error: f64,
    /// −(1/p) ∫_{cut}^{−Q} u f(u) du, the tail-mean form.
    pub tail_mean: f64,
    /// cut · F(cut) / p. With a finite lower limit the forms differ by
    /// exactly this: tail_mean = es + boundary.
    pub boundary: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskResult {
    pub p: f64,
    pub h: usize,
    pub var: f64,
    pub es: f64,
    pub iterations: usize,
    pub gaussian_var: f64,
    pub gaussian_es: f64,
    /// Gaussian / exact.
    pub ratio_var: f64,
    pub ratio_es: f64,
    pub newton_residual: f64,
    pub quad_error: f64,
    pub es_tail_mean: f64,
    pub warnings: Vec<String>,
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 0.5) {
        return Err(Error::domain(format!("tail probability must lie in (0, 0.5], got {p}")));
    }
    Ok(())
}

/// Gaussian VaR and ES at level p.
pub fn gaussian_reference(p: f64) -> Result<(f64, f64)> {
    check_p(p)?;
    let z = gaussian_quantile(p)?;
    Ok((-z, gaussian_pdf(z) / p))
}

/// Solve F(u) = p for the table's law and return Q = −u.
pub fn var_newton(table: &CoefficientTable, p: f64, opts: &RiskOptions) -> Result<VarResult> {
    check_p(p)?;
    let sd = table.std_dev();
    let h_of = |u: f64| table.cdf_x(u) - p;

    let mut u = gaussian_quantile(p)? * sd;
    let mut hu = h_of(u);
    // bracket [lo, hi] with H(lo) < 0 < H(hi); 0 is the median
    let mut hi = 0.0;
    let mut lo = opts.lower_cut * sd;
    let mut steps = 0;
    while h_of(lo) >= 0.0 {
        lo *= 2.0;
        steps += 1;
        if steps > 20 {
            return Err(Error::convergence("var_newton", "cannot bracket the quantile", u));
        }
    }

    let mut iterations = 0;
    let mut bisections = 0;
    while hu.abs() > opts.newton_tol {
        if iterations >= opts.max_iter {
            return Err(Error::convergence(
                "var_newton",
                format!("no convergence in {} iterations, |F - p| = {:.3e}", opts.max_iter, hu.abs()),
                -u,
            ));
        }
        if hu < 0.0 {
            lo = lo.max(u);
        } else {
            hi = f64::min(hi, u);
        }
        let g = table.pdf_x(u);
        let newton = u - hu / g;
        u = if g >= opts.pdf_floor && newton > lo && newton < hi {
            newton
        } else {
            bisections += 1;
            0.5 * (lo + hi)
        };
        hu = h_of(u);
        iterations += 1;
    }
    Ok(VarResult {
        var: -u,
        iterations,
        bisections,
        residual: hu,
    })
}

/// Expected Shortfall given the VaR at the same p.
pub fn es_exact(table: &CoefficientTable, p: f64, var: f64, opts: &RiskOptions) -> Result<EsResult> {
    check_p(p)?;
    let cut = opts.lower_cut * table.std_dev();
    let upper = -var;
    if upper <= cut {
        return Err(Error::domain(format!("-VaR = {upper} lies below the lower cut {cut}")));
    }
    let q = QuadOptions::absolute(opts.quad_tol);
    let ibp = integrate(|u| table.cdf_x(u), cut, upper, q)
        .map_err(|f| Error::convergence("es_exact", "CDF quadrature did not converge", f.estimate.value))?;
    // diagnostic only, so keep the best estimate if the tolerance is out of
    // reach
    let mean = match integrate(|u| u * table.pdf_x(u), cut, upper, q) {
        Ok(r) => r,
        Err(f) => f.estimate,
    };
    Ok(EsResult {
        es: var + ibp.value / p,
        quad_error: ibp.abs_err / p,
        tail_mean: -mean.value / p,
        boundary: cut * table.cdf_x(cut) / p,
    })
}

/// VaR, ES and the Gaussian comparison columns at level p.
pub fn risk_at(table: &CoefficientTable, p: f64, opts: &RiskOptions) -> Result<RiskResult> {
    let v = var_newton(table, p, opts)?;
    let e = es_exact(table, p, v.var, opts)?;
    let (gv, ge) = gaussian_reference(p)?;
    let sd = table.std_dev();
    let mut warnings = Vec::new();
    if (sd - 1.0).abs() > 1e-9 {
        warnings.push(format!(
            "table is not standardized (sd = {sd:.6e}); Gaussian columns refer to N(0, 1)"
        ));
    }
    let ratio = |g: f64, x: f64| if x == 0.0 && g == 0.0 { 1.0 } else { g / x };
    Ok(RiskResult {
        p,
        h: table.h,
        var: v.var,
        es: e.es,
        iterations: v.iterations,
        gaussian_var: gv,
        gaussian_es: ge,
        ratio_var: ratio(gv, v.var),
        ratio_es: ratio(ge, e.es),
        newton_residual: v.residual,
        quad_error: e.quad_error,
        es_tail_mean: e.tail_mean,
        warnings,
    })
}
