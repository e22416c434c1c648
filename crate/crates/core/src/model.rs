//! GJR-GARCH(1,1) parameters, the process recursion, the horizon validity
//! region of the series representation, and sign-vector enumeration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the forecast horizon; coefficient cost grows like
/// 2^{h−1} times a power of the inner truncation.
pub const DEFAULT_MAX_HORIZON: usize = 12;

/// Parameters of x_t = σ_t ε_t, σ_t² = ω + α_{t−1} x_{t−1}² + β σ_{t−1}²,
/// with α_t = α + λ·1{x_t < 0}, plus the time-0 state (σ₀², x₀², sign of x₀).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GarchParams {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub sigma0_sq: f64,
    pub x0_sq: f64,
    pub sign0: i8,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    omega: f64,
    alpha: f64,
    beta: f64,
    #[serde(default)]
    lambda: f64,
    sigma0_sq: Option<f64>,
    x0_sq: Option<f64>,
    sign0: Option<i8>,
    sigma1_sq: Option<f64>,
}

impl<'de> Deserialize<'de> for GarchParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawParams::deserialize(d)?;
        let built = match (raw.sigma1_sq, raw.sigma0_sq, raw.x0_sq) {
            (Some(s1), None, None) => {
                let mut p = GarchParams::from_sigma1_sq(raw.omega, raw.alpha, raw.beta, raw.lambda, s1);
                if let Ok(ref mut p) = p {
                    p.sign0 = raw.sign0.unwrap_or(1);
                }
                p
            }
            (None, Some(s0), Some(x0)) => GarchParams::new(
                raw.omega,
                raw.alpha,
                raw.beta,
                raw.lambda,
                s0,
                x0,
                raw.sign0.unwrap_or(1),
            ),
            _ => Err(Error::InvalidParams(
                "give either sigma1_sq, or both sigma0_sq and x0_sq".into(),
            )),
        };
        built.map_err(D::Error::custom)
    }
}

impl GarchParams {
    pub fn new(
        omega: f64,
        alpha: f64,
        beta: f64,
        lambda: f64,
        sigma0_sq: f64,
        x0_sq: f64,
        sign0: i8,
    ) -> Result<Self> {
        let p = Self {
            omega,
            alpha,
            beta,
            lambda,
            sigma0_sq,
            x0_sq,
            sign0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Symmetric GARCH(1,1) (λ = 0) with a positive x₀.
    pub fn symmetric(omega: f64, alpha: f64, beta: f64, sigma0_sq: f64, x0_sq: f64) -> Result<Self> {
        Self::new(omega, alpha, beta, 0.0, sigma0_sq, x0_sq, 1)
    }

    /// Build from a known one-step variance σ₁² instead of (σ₀², x₀²).
    /// The time-0 state is represented as x₀ = 0, σ₀² = (σ₁² − ω)/β.
    pub fn from_sigma1_sq(omega: f64, alpha: f64, beta: f64, lambda: f64, sigma1_sq: f64) -> Result<Self> {
        if !(sigma1_sq > omega) {
            return Err(Error::InvalidParams(format!(
                "sigma1_sq = {sigma1_sq} must exceed omega = {omega}"
            )));
        }
        if !(beta > 0.0) {
            return Err(Error::InvalidParams(format!("beta must be > 0, got {beta}")));
        }
        Self::new(omega, alpha, beta, lambda, (sigma1_sq - omega) / beta, 0.0, 1)
    }

    /// The empirical weekly S&P 500 estimates used throughout the examples,
    /// started at the stationary variance ω/(1−α−β).
    pub fn linton() -> Self {
        let (omega, alpha, beta) = (1.14e-5, 0.131_007, 0.845_708);
        let s = omega / (1.0 - alpha - beta);
        Self {
            omega,
            alpha,
            beta,
            lambda: 0.0,
            sigma0_sq: s,
            x0_sq: s,
            sign0: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.omega, self.alpha, self.beta, self.lambda, self.sigma0_sq, self.x0_sq]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams("all parameters must be finite".into()));
        }
        if !(self.omega > 0.0 && self.alpha > 0.0 && self.beta > 0.0) {
            return Err(Error::InvalidParams(format!(
                "need omega, alpha, beta > 0 (got {}, {}, {})",
                self.omega, self.alpha, self.beta
            )));
        }
        if self.lambda < 0.0 {
            return Err(Error::InvalidParams(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if self.sigma0_sq < 0.0 || self.x0_sq < 0.0 {
            return Err(Error::InvalidParams("sigma0_sq and x0_sq must be >= 0".into()));
        }
        if self.sign0 != 1 && self.sign0 != -1 {
            return Err(Error::InvalidParams(format!("sign0 must be +1 or -1, got {}", self.sign0)));
        }
        if !(self.sigma1_sq() > self.omega) && self.sigma0_sq == 0.0 && self.x0_sq == 0.0 {
            return Err(Error::InvalidParams("sigma1_sq must exceed omega".into()));
        }
        Ok(())
    }

    /// ARCH coefficient in force after a shock of the given sign.
    #[inline]
    pub fn alpha_for_sign(&self, sign: i8) -> f64 {
        if sign < 0 {
            self.alpha + self.lambda
        } else {
            self.alpha
        }
    }

    /// σ₁² = ω + β σ₀² + α₀ x₀².
    pub fn sigma1_sq(&self) -> f64 {
        self.omega + self.beta * self.sigma0_sq + self.alpha_for_sign(self.sign0) * self.x0_sq
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }
}

/// One realization (ς₁, …, ς_{h−1}) of the signs of x₁, …, x_{h−1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignVector(pub Vec<i8>);

impl SignVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// ARCH coefficient α_t for t = 1..h−1 (1-based, as in the recursion).
    pub fn alpha_at(&self, params: &GarchParams, t: usize) -> f64 {
        params.alpha_for_sign(self.0[t - 1])
    }
}

/// All 2^{h−1} sign vectors in lexicographic order with +1 ahead of −1.
pub fn enumerate_sign_vectors(h: usize, max_h: usize) -> Result<Vec<SignVector>> {
    if h == 0 {
        return Err(Error::domain("horizon must be >= 1"));
    }
    if h > max_h {
        return Err(Error::Resource(format!("horizon {h} exceeds the configured cap {max_h}")));
    }
    let len = h - 1;
    let count = 1usize << len;
    Ok((0..count)
        .map(|idx| {
            SignVector(
                (0..len)
                    .map(|pos| if (idx >> (len - 1 - pos)) & 1 == 0 { 1 } else { -1 })
                    .collect(),
            )
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Validity {
    Valid,
    Invalid,
    UnconditionallyValid,
}

/// Outcome of the sufficient β condition for the horizon-h series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    /// θ = ω / (2σ₁²), in (0, 1/2].
    pub theta: f64,
    /// β̲(θ) = −θ + √(θ² + 2θ).
    pub beta_lower: f64,
    pub h: usize,
    pub status: Validity,
}

impl ValidityReport {
    pub fn is_ok(&self) -> bool {
        self.status != Validity::Invalid
    }
}

pub fn beta_lower(theta: f64) -> f64 {
    -theta + (theta * theta + 2.0 * theta).sqrt()
}

/// h ≤ 2: always valid; h = 3: β ≥ β̲; h > 3: β ≥ max(1/2, β̲).
pub fn check_assumption1(params: &GarchParams, h: usize) -> ValidityReport {
    let theta = params.omega / (2.0 * params.sigma1_sq());
    let bl = beta_lower(theta);
    let status = match h {
        0..=2 => Validity::UnconditionallyValid,
        3 if params.beta >= bl => Validity::Valid,
        3 => Validity::Invalid,
        _ if params.beta >= bl.max(0.5) => Validity::Valid,
        _ => Validity::Invalid,
    };
    ValidityReport {
        theta,
        beta_lower: bl,
        h,
        status,
    }
}

/// ω(1 − Σ_{i=1}^{j−1} β^i) ≤ β^j σ₁², the condition that lets every nested
/// binomial expansion of σ_h² run in increasing powers of ω.
pub fn beta_inequality_holds(params: &GarchParams, j: usize) -> bool {
    let b = params.beta;
    let geometric: f64 = (1..j).map(|i| b.powi(i as i32)).sum();
    let lhs = params.omega * (1.0 - geometric);
    let rhs = b.powi(j as i32) * params.sigma1_sq();
    lhs <= rhs * (1.0 + 1e-12)
}

/// One step of the recursion: x = σ ε and the next conditional variance.
pub fn simulate_step(sigma_sq: f64, eps: f64, params: &GarchParams) -> (f64, f64) {
    let x = sigma_sq.sqrt() * eps;
    let sign = if x < 0.0 { -1 } else { 1 };
    let next = params.omega + params.alpha_for_sign(sign) * x * x + params.beta * sigma_sq;
    (x, next)
}

/// σ_h² from shocks ε₁, …, ε_{h−1} through the nested form
/// ω + (1+y_{h−1}){ωβ + (1+y_{h−2})(⋯(ωβ^{h−2} + (1+y₁)β^{h−1}σ₁²))},
/// y_t = α_t ε_t² / β.
pub fn nested_sigma_sq(params: &GarchParams, eps: &[f64]) -> f64 {
    let h = eps.len() + 1;
    let b = params.beta;
    let ys: Vec<f64> = eps
        .iter()
        .map(|&e| params.alpha_for_sign(if e < 0.0 { -1 } else { 1 }) * e * e / b)
        .collect();
    // innermost bracket is ωβ^{h−2} + (1+y₁)β^{h−1}σ₁²
    let mut acc = b.powi(h as i32 - 1) * params.sigma1_sq();
    for t in 1..h {
        acc = params.omega * b.powi((h - 1 - t) as i32) + (1.0 + ys[t - 1]) * acc;
    }
    acc
}
