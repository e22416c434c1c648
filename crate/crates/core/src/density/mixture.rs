//! Direct evaluation of the h = 2 and h = 3 laws as Gaussian scale
//! mixtures, f(v) = E φ(v/σ_h)/σ_h, by a product Kronrod rule over the
//! shocks. Every term is positive, so this keeps relative accuracy in the
//! far tails where the alternating series cancels.

use std::sync::{Arc, OnceLock};

use crate::model::{enumerate_sign_vectors, GarchParams, SignVector};
use crate::quad::composite_kronrod;
use crate::specfun::{gaussian_cdf, gaussian_pdf};
use crate::sum::CompensatedSum;

/// Relative error assumed for a mixture evaluation.
pub(crate) const MIXTURE_REL_ERROR: f64 = 1e-12;

#[derive(Debug)]
pub(crate) struct Mixture {
    /// (weight, σ_h) with weights summing to 1.
    nodes: Vec<(f64, f64)>,
}

/// Half-normal rule on [0, 10]: (e, 2φ(e)·w).
fn half_normal_rule(panel: f64) -> Vec<(f64, f64)> {
    let n = (10.0 / panel).round() as usize;
    let breaks: Vec<f64> = (0..=n).map(|i| i as f64 * panel).collect();
    composite_kronrod(&breaks)
        .into_iter()
        .map(|(x, w)| (x, 2.0 * w * gaussian_pdf(x)))
        .collect()
}

impl Mixture {
    pub fn new(params: &GarchParams, h: usize) -> Option<Self> {
        Self::with_panel(params, h, 1.0)
    }

    fn with_panel(params: &GarchParams, h: usize, panel: f64) -> Option<Self> {
        if !(2..=3).contains(&h) {
            return None;
        }
        // with λ = 0 every sign vector gives the same law
        let signs = if params.lambda == 0.0 {
            vec![SignVector(vec![1; h - 1])]
        } else {
            enumerate_sign_vectors(h, h).ok()?
        };
        let rule = half_normal_rule(panel);
        let share = 1.0 / signs.len() as f64;
        let s1 = params.sigma1_sq();
        let next = |s: f64, a: f64, e: f64| params.omega + (params.beta + a * e * e) * s;
        let mut nodes = Vec::with_capacity(signs.len() * rule.len().pow(h as u32 - 1));
        for sv in &signs {
            let a1 = sv.alpha_at(params, 1);
            for &(e1, w1) in &rule {
                let s2 = next(s1, a1, e1);
                if h == 2 {
                    nodes.push((share * w1, s2.sqrt()));
                    continue;
                }
                let a2 = sv.alpha_at(params, 2);
                for &(e2, w2) in &rule {
                    nodes.push((share * w1 * w2, next(s2, a2, e2).sqrt()));
                }
            }
        }
        Some(Self { nodes })
    }

    pub fn pdf(&self, v: f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for &(w, s) in &self.nodes {
            acc.add(w * gaussian_pdf(v / s) / s);
        }
        acc.value()
    }

    /// Pr(x ≤ v), summed on the side that avoids 1 − (nearly 1).
    pub fn cdf(&self, v: f64) -> f64 {
        let mut acc = CompensatedSum::new();
        let t = -v.abs();
        for &(w, s) in &self.nodes {
            acc.add(w * gaussian_cdf(t / s));
        }
        if v <= 0.0 {
            acc.value()
        } else {
            1.0 - acc.value()
        }
    }
}

/// Lazily built mixture attached to a table. Not serialized; clones share
/// the built nodes.
#[derive(Debug, Default, Clone)]
pub(crate) struct MixtureCache(OnceLock<Option<Arc<Mixture>>>);

impl MixtureCache {
    pub fn get(&self, params: &GarchParams, h: usize) -> Option<&Mixture> {
        self.0
            .get_or_init(|| Mixture::new(params, h).map(Arc::new))
            .as_deref()
    }
}

impl PartialEq for MixtureCache {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}
