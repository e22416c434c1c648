//! Series evaluation of the density and CDF from a coefficient table.

use std::f64::consts::PI;

use serde::Serialize;

use super::CoefficientTable;
use crate::error::{Error, Result};
use crate::specfun::{gaussian_cdf, gaussian_pdf};
use crate::sum::CompensatedSum;

/// One density or CDF value with its series diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub value: f64,
    /// Value before clamping.
    pub raw: f64,
    pub terms: usize,
    /// Largest |term|, a proxy for the cancellation in the partial sums.
    pub max_term: f64,
    /// |last term| of the truncated series.
    pub tail_term: f64,
    /// Estimated absolute error: coefficient error bounds carried through
    /// the series, rounding at the largest term, and the last term.
    pub error_estimate: f64,
    pub clamped: bool,
    pub out_of_range: bool,
    /// Evaluated as a direct mixture integral because the series had lost
    /// precision.
    pub direct: bool,
}

impl Evaluation {
    fn exact(value: f64, out_of_range: bool) -> Self {
        Self {
            value,
            raw: value,
            terms: 0,
            max_term: value.abs(),
            tail_term: 0.0,
            error_estimate: 4.0 * f64::EPSILON * value.abs(),
            clamped: false,
            out_of_range,
            direct: false,
        }
    }

    /// Error estimate above 0.1% of the value.
    pub fn is_imprecise(&self) -> bool {
        self.error_estimate > 1e-3 * self.value.abs()
    }

    /// Human-readable warnings, if any.
    pub fn warnings(&self, what: &str, at: f64) -> Vec<String> {
        let mut w = Vec::new();
        if self.out_of_range && !self.direct {
            w.push(format!("{what}({at}) lies outside the trusted range; accuracy not guaranteed"));
        }
        if self.clamped {
            w.push(format!("{what}({at}) series gave {:.3e}, clamped to {}", self.raw, self.value));
        }
        if self.is_imprecise() {
            w.push(format!(
                "{what}({at}) has estimated error {:.2e} against value {:.3e}",
                self.error_estimate, self.value
            ));
        }
        w
    }
}

/// Series results with a larger relative error estimate are recomputed
/// directly when possible.
const SWITCH_REL: f64 = 1e-9;

#[derive(Clone, Copy)]
enum Weight {
    One,
    OddPower,
    HalfPower,
}

struct SeriesSum {
    value: f64,
    max_term: f64,
    last: f64,
    /// Σ_j ρ^j/j! · weight_j · err_j
    coeff_err: f64,
}

impl SeriesSum {
    fn error(&self) -> f64 {
        self.coeff_err + 8.0 * f64::EPSILON * self.max_term + self.last
    }
}

/// Σ_j (−ρ)^j/j! · weight_j · ĉ_j in ascending j with compensation.
fn series(coeffs: &[f64], errs: &[f64], rho: f64, weight: Weight) -> SeriesSum {
    let mut acc = CompensatedSum::new();
    let mut power = 1.0;
    let mut max_term: f64 = 0.0;
    let mut last = 0.0;
    let mut coeff_err = 0.0;
    for (j, (&c, &e)) in coeffs.iter().zip(errs).enumerate() {
        if j > 0 {
            power *= -rho / j as f64;
        }
        let w = match weight {
            Weight::One => 1.0,
            Weight::OddPower => 1.0 / (2 * j + 1) as f64,
            Weight::HalfPower => 1.0 / (j as f64 + 0.5),
        };
        let term = power * w * c;
        acc.add(term);
        max_term = max_term.max(term.abs());
        last = term.abs();
        coeff_err += (power * w).abs() * e;
    }
    SeriesSum {
        value: acc.value(),
        max_term,
        last,
        coeff_err,
    }
}

/// True when the last series term at ρ is not negligible next to rounding
/// in the largest term.
pub(crate) fn tail_is_significant(coeffs: &[f64], rho: f64) -> bool {
    let zeros = vec![0.0; coeffs.len()];
    let s = series(coeffs, &zeros, rho, Weight::One);
    s.last > f64::EPSILON * s.max_term
}

impl CoefficientTable {
    fn norm(&self) -> f64 {
        (2.0 * PI).powf(-(self.h as f64) / 2.0)
    }

    /// Whether |v| (in unscaled x units) is outside the trusted range.
    fn beyond_trust(&self, v: f64) -> bool {
        !self.config.force_range && v.abs() > self.config.trust_range * self.second_moment.sqrt() * (1.0 + 1e-12)
    }

    fn sigma1(&self) -> f64 {
        self.params.sigma1_sq().sqrt()
    }

    fn sum(&self, rho: f64, weight: Weight) -> SeriesSum {
        series(&self.averaged, &self.averaged_errors, rho, weight)
    }

    /// offset + k·sum, clamped to [lo, hi].
    fn finish(&self, s: SeriesSum, k: f64, offset: f64, lo: f64, hi: f64, oor: bool) -> Evaluation {
        let raw = offset + k * s.value;
        let (value, clamped) = if !raw.is_finite() || raw < lo {
            (lo, true)
        } else if raw > hi {
            (hi, true)
        } else {
            (raw, false)
        };
        let k = k.abs();
        Evaluation {
            value,
            raw,
            terms: self.averaged.len(),
            max_term: k * s.max_term,
            tail_term: k * s.last,
            error_estimate: k * s.error(),
            clamped,
            out_of_range: oor,
            direct: false,
        }
    }

    /// Replace a series result that lost precision by the direct mixture
    /// value, where one is available (h = 2, 3).
    fn refine(&self, e: Evaluation, direct: impl FnOnce(&super::mixture::Mixture) -> f64) -> Evaluation {
        if e.error_estimate <= SWITCH_REL * e.raw.abs() {
            return e;
        }
        let Some(m) = self.mixture.get(&self.params, self.h) else {
            return e;
        };
        let value = direct(m);
        Evaluation {
            value,
            raw: value,
            error_estimate: super::mixture::MIXTURE_REL_ERROR * value.abs(),
            clamped: false,
            direct: true,
            ..e
        }
    }

    /// Density of x_h / x_scale at u, with diagnostics.
    pub fn pdf_x_eval(&self, u: f64) -> Evaluation {
        let s = self.x_scale;
        let v = s * u;
        let oor = self.beyond_trust(v);
        if self.h == 1 {
            let sd = self.sigma1();
            return Evaluation::exact(s * gaussian_pdf(v / sd) / sd, oor);
        }
        let rho = v * v / (2.0 * self.tau);
        let e = self.finish(self.sum(rho, Weight::One), s * self.norm(), 0.0, 0.0, f64::INFINITY, oor);
        self.refine(e, |m| s * m.pdf(v))
    }

    /// Density of x_h / x_scale at u. Negative partial sums are clamped to 0.
    pub fn pdf_x(&self, u: f64) -> f64 {
        self.pdf_x_eval(u).value
    }

    /// CDF of x_h / x_scale at u, clamped to [0, 1].
    pub fn cdf_x_eval(&self, u: f64) -> Evaluation {
        let v = self.x_scale * u;
        let oor = self.beyond_trust(v);
        if self.h == 1 {
            return Evaluation::exact(gaussian_cdf(v / self.sigma1()), oor);
        }
        let rho = v * v / (2.0 * self.tau);
        let e = self.finish(self.sum(rho, Weight::OddPower), v * self.norm(), 0.5, 0.0, 1.0, oor);
        self.refine(e, |m| m.cdf(v))
    }

    pub fn cdf_x(&self, u: f64) -> f64 {
        self.cdf_x_eval(u).value
    }

    /// Density of z_h = (x_h / x_scale)² at w > 0. Infinite at w = 0.
    pub fn pdf_z_eval(&self, w: f64) -> Result<Evaluation> {
        if !(w >= 0.0) {
            return Err(Error::domain(format!("pdf_z needs w >= 0, got {w}")));
        }
        if w == 0.0 {
            return Ok(Evaluation::exact(f64::INFINITY, false));
        }
        let s2 = self.x_scale * self.x_scale;
        let wr = s2 * w;
        let oor = self.beyond_trust(wr.sqrt());
        if self.h == 1 {
            let s1 = self.params.sigma1_sq();
            let val = s2 * (-wr / (2.0 * s1)).exp() / (2.0 * PI * s1 * wr).sqrt();
            return Ok(Evaluation::exact(val, oor));
        }
        let rho = wr / (2.0 * self.tau);
        let k = s2 * self.norm() / wr.sqrt();
        let e = self.finish(self.sum(rho, Weight::One), k, 0.0, 0.0, f64::INFINITY, oor);
        // f_z(w) = f_x(√w)/√w by symmetry
        Ok(self.refine(e, |m| s2 * m.pdf(wr.sqrt()) / wr.sqrt()))
    }

    pub fn pdf_z(&self, w: f64) -> Result<f64> {
        Ok(self.pdf_z_eval(w)?.value)
    }

    /// CDF of z_h = (x_h / x_scale)² at w ≥ 0.
    pub fn cdf_z_eval(&self, w: f64) -> Result<Evaluation> {
        if !(w >= 0.0) {
            return Err(Error::domain(format!("cdf_z needs w >= 0, got {w}")));
        }
        let wr = self.x_scale * self.x_scale * w;
        let oor = self.beyond_trust(wr.sqrt());
        if self.h == 1 {
            let val = libm::erf((wr / (2.0 * self.params.sigma1_sq())).sqrt());
            return Ok(Evaluation::exact(val, oor));
        }
        let rho = wr / (2.0 * self.tau);
        let k = self.norm() * wr.sqrt();
        let e = self.finish(self.sum(rho, Weight::HalfPower), k, 0.0, 0.0, 1.0, oor);
        Ok(self.refine(e, |m| 1.0 - 2.0 * m.cdf(-wr.sqrt())))
    }

    pub fn cdf_z(&self, w: f64) -> Result<f64> {
        Ok(self.cdf_z_eval(w)?.value)
    }
}
