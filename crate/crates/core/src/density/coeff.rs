//! Coefficient engine for the series representation of the prediction
//! density.
//!
//! For a sign vector s the coefficient c_{j,s} is the integral
//! γ_h^{1/2} ∫ exp(−½ Σ β v_t/α_t) (σ_h²)^{−½−j} ∏ v_t^{−½} dv, which nested
//! negative-binomial expansions of σ_h² turn into products of Tricomi
//! functions. Coefficients are kept in the scaled form ĉ = c·τ^j with
//! τ = (ω + βσ₁²)·β^{h−2}, the natural size of c_j^{−1/j}, so that nothing
//! overflows when σ₁² is small.

use std::f64::consts::PI;

use crate::density::SeriesConfig;
use crate::error::{Error, Result};
use crate::model::{GarchParams, SignVector};
use crate::specfun::{gen_binom, tricomi_psi_finite, PsiCache};
use crate::sum::CompensatedSum;

/// Which member of the coefficient family to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Order {
    /// c_j for the density series, j = 0, 1, …
    Density(u32),
    /// c_{−m−½}, which enters E(x_h^{2m}); every sum terminates.
    Moment(u32),
}

impl Order {
    /// The index j as a real number.
    fn j(self) -> f64 {
        match self {
            Order::Density(j) => j as f64,
            Order::Moment(m) => -(m as f64) - 0.5,
        }
    }
}

/// Geometry shared by every coefficient of one (params, h, sign vector).
pub(crate) struct CoeffGeometry {
    pub h: usize,
    /// τ = (ω + βσ₁²) β^{h−2} for h ≥ 2, σ₁² for h = 1.
    pub tau: f64,
    /// π^{(h−1)/2} σ₁^{−1} ∏_{t=1}^{h−1} α_t^{−½}
    prefactor: f64,
    /// ω / τ, the ratio raised to K in the nested sums.
    omega_ratio: f64,
    beta: f64,
    /// Ψ argument paired with level t = 1..h−2: β / (2α_{h−t}).
    level_z: Vec<f64>,
    /// Ψ argument of the innermost factor: (ω + βσ₁²)/(2α₁σ₁²).
    inner_z: f64,
}

impl CoeffGeometry {
    pub fn new(params: &GarchParams, h: usize, signs: &SignVector) -> Self {
        let s1 = params.sigma1_sq();
        if h == 1 {
            return Self {
                h,
                tau: s1,
                prefactor: 1.0 / s1.sqrt(),
                omega_ratio: 0.0,
                beta: params.beta,
                level_z: Vec::new(),
                inner_z: f64::NAN,
            };
        }
        let b = params.beta;
        let t2 = params.omega + b * s1;
        let tau = t2 * b.powi(h as i32 - 2);
        let alpha_prod: f64 = (1..h).map(|t| signs.alpha_at(params, t)).product();
        let prefactor = PI.powf((h as f64 - 1.0) / 2.0) / s1.sqrt() / alpha_prod.sqrt();
        let level_z = (1..h - 1).map(|t| b / (2.0 * signs.alpha_at(params, h - t))).collect();
        let inner_z = t2 / (2.0 * signs.alpha_at(params, 1) * s1);
        Self {
            h,
            tau,
            prefactor,
            omega_ratio: params.omega / tau,
            beta: b,
            level_z,
            inner_z,
        }
    }
}

pub(crate) struct CoeffEngine<'a> {
    geo: &'a CoeffGeometry,
    cache: &'a PsiCache,
    config: &'a SeriesConfig,
    order: Order,
}

impl<'a> CoeffEngine<'a> {
    pub fn new(geo: &'a CoeffGeometry, cache: &'a PsiCache, config: &'a SeriesConfig, order: Order) -> Self {
        Self {
            geo,
            cache,
            config,
            order,
        }
    }

    /// Ψ(½, 1 − j − K; z).
    fn psi(&self, big_k: u32, z: f64) -> Result<f64> {
        match self.order {
            Order::Density(j) => self.cache.half(1.0 - j as f64 - big_k as f64, z),
            Order::Moment(m) => tricomi_psi_finite(m, big_k, z),
        }
    }

    /// Scaled coefficient ĉ = c · τ^j together with Σ|terms| of the nested
    /// sums (same scaling), which bounds the effect of errors in the Ψ
    /// factors on the result.
    pub fn scaled(&self) -> Result<Scaled> {
        let geo = self.geo;
        if geo.h == 1 {
            return Ok(Scaled {
                value: geo.prefactor,
                abs_sum: geo.prefactor,
            });
        }
        let (value, abs_sum) = if geo.h == 2 {
            let v = self.psi(0, geo.inner_z)?;
            (v, v.abs())
        } else {
            self.level(1, 0, 1.0)?
        };
        Ok(Scaled {
            value: geo.prefactor * value,
            abs_sum: geo.prefactor * abs_sum,
        })
    }

    /// Sum over k_t at level t (1-based), given K_{t−1} and the product of
    /// all factors from shallower levels.
    fn level(&self, t: usize, k_prev: u32, weight: f64) -> Result<(f64, f64)> {
        let geo = self.geo;
        let depth = geo.h - 2;
        let upper = -0.5 - self.order.j() - k_prev as f64;
        // x^{k} β^{(t−1)k}: ω^K (Tβ^{h−2})^{−K} together with β^{S}
        let step = geo.omega_ratio * geo.beta.powi(t as i32 - 1);
        let z = geo.level_z[t - 1];

        let bound = match self.order {
            Order::Moment(m) => (m - k_prev) as usize,
            Order::Density(_) => self.config.inner_k_max,
        };

        let mut acc = CompensatedSum::new();
        let mut abs_acc = 0.0;
        let mut binom = 1.0;
        let mut power = 1.0;
        let mut prev_mag = f64::INFINITY;
        let mut converged = false;
        for k in 0..=bound {
            if k > 0 {
                binom *= (upper - (k - 1) as f64) / k as f64;
                power *= step;
            }
            if binom == 0.0 {
                converged = true;
                break;
            }
            let big_k = k_prev + k as u32;
            let factor = binom * power * self.psi(big_k, z)?;
            let (contrib, contrib_abs) = if t == depth {
                let v = weight * factor * self.psi(big_k, geo.inner_z)?;
                (v, v.abs())
            } else {
                self.level(t + 1, big_k, weight * factor)?
            };
            acc.add(contrib);
            abs_acc += contrib_abs;
            let mag = contrib.abs();
            if matches!(self.order, Order::Density(_))
                && k > 0
                && mag < prev_mag
                && mag <= self.config.term_tol * acc.value().abs()
            {
                converged = true;
                break;
            }
            prev_mag = mag;
        }
        if !converged && matches!(self.order, Order::Density(_)) {
            return Err(Error::convergence(
                "coefficient inner sum",
                format!(
                    "level {t} hit inner_k_max = {} with last term {:.3e} (sum {:.3e})",
                    self.config.inner_k_max,
                    prev_mag,
                    acc.value()
                ),
                acc.value(),
            ));
        }
        Ok((acc.value(), abs_acc))
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Scaled {
    pub value: f64,
    pub abs_sum: f64,
}

impl Scaled {
    /// Error bound given the relative accuracy of each Ψ factor.
    pub fn error_bound(&self, psi_tol: f64, h: usize) -> f64 {
        let per_term = (h.saturating_sub(1)) as f64 * psi_tol + 4.0 * h as f64 * f64::EPSILON;
        self.abs_sum * per_term
    }
}

/// Scaled density coefficient ĉ_{j,s} = c_{j,s} τ^j.
pub(crate) fn scaled_density_coeff(
    geo: &CoeffGeometry,
    cache: &PsiCache,
    config: &SeriesConfig,
    j: u32,
) -> Result<Scaled> {
    CoeffEngine::new(geo, cache, config, Order::Density(j)).scaled()
}

/// Unscaled c_{−m−½, s}.
pub(crate) fn moment_coeff(geo: &CoeffGeometry, cache: &PsiCache, config: &SeriesConfig, m: u32) -> Result<f64> {
    let scaled = CoeffEngine::new(geo, cache, config, Order::Moment(m)).scaled()?.value;
    // c = ĉ τ^{−j} with j = −m − ½
    Ok(scaled * geo.tau.powf(m as f64 + 0.5))
}

/// Unscaled c_{j,s} for one sign vector, straight from the definition.
pub fn coeff_single(
    j: u32,
    signs: &SignVector,
    params: &GarchParams,
    h: usize,
    config: &SeriesConfig,
) -> Result<f64> {
    if h < 2 {
        return Err(Error::domain("coefficients are defined for h >= 2"));
    }
    if signs.len() != h - 1 {
        return Err(Error::domain(format!(
            "sign vector has length {}, horizon {h} needs {}",
            signs.len(),
            h - 1
        )));
    }
    if j as usize > config.j_cap.max(config.j_max) {
        return Err(Error::domain(format!("j = {j} exceeds the configured truncation")));
    }
    let geo = CoeffGeometry::new(params, h, signs);
    let cache = PsiCache::new(config.psi_tol);
    let scaled = scaled_density_coeff(&geo, &cache, config, j)?.value;
    Ok(scaled * geo.tau.powi(-(j as i32)))
}

/// Ordinary binomial helper re-exported for callers that mirror the
/// nested sums in tests.
pub fn nested_binomial(j: f64, k_prev: u32, k: u32) -> f64 {
    gen_binom(-0.5 - j - k_prev as f64, k)
}
