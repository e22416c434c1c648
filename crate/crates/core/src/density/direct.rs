//! Direct quadrature for the h = 3 coefficients.
//!
//! ĉ_{j,s} = 2π E(σ₃^{−1} (τ/σ₃²)^j | s) over two half-normal shocks. The
//! integrand is positive, so this keeps full relative accuracy where the
//! alternating nested sums cancel. One product rule serves every j.

use std::f64::consts::PI;
use std::ops::Range;

use rayon::prelude::*;

use crate::model::{GarchParams, SignVector};
use crate::quad::composite_kronrod;
use crate::specfun::gaussian_pdf;

/// Relative error assumed for a directly integrated coefficient.
pub(crate) const DIRECT_REL_ERROR: f64 = 1e-12;

/// Panels on [0, 10], finest near 0 where (τ/σ₃²)^j peaks for large j.
fn breaks(refine: u32) -> Vec<f64> {
    let mut b = Vec::new();
    let mut x: f64 = 0.0;
    for (end, step) in [(0.5, 1.0 / 64.0), (1.0, 1.0 / 32.0), (4.0, 0.125), (10.0, 0.5)] {
        let step = step / refine as f64;
        while x < end - 1e-12 {
            b.push(x);
            x += step;
        }
    }
    b.push(10.0);
    b
}

/// Scaled coefficients for j in `range`, sign vector `signs` of length 2.
pub(crate) fn h3_scaled_row(params: &GarchParams, signs: &SignVector, tau: f64, range: Range<usize>) -> Vec<f64> {
    h3_scaled_row_with(params, signs, tau, range, 1)
}

fn h3_scaled_row_with(
    params: &GarchParams,
    signs: &SignVector,
    tau: f64,
    range: Range<usize>,
    refine: u32,
) -> Vec<f64> {
    debug_assert_eq!(signs.len(), 2);
    // half-normal weights 2φ(e) folded into the rule
    let rule: Vec<(f64, f64)> = composite_kronrod(&breaks(refine))
        .into_iter()
        .map(|(x, w)| (x, 2.0 * w * gaussian_pdf(x)))
        .collect();
    let s1 = params.sigma1_sq();
    let b = params.beta;
    let a1 = signs.alpha_at(params, 1);
    let a2 = signs.alpha_at(params, 2);
    let n = range.len();
    let start = range.start as i32;

    let parts: Vec<Vec<f64>> = rule
        .par_iter()
        .map(|&(e1, w1)| {
            let s2 = params.omega + (b + a1 * e1 * e1) * s1;
            let mut acc = vec![0.0; n];
            for &(e2, w2) in &rule {
                let s3 = params.omega + (b + a2 * e2 * e2) * s2;
                let r = tau / s3;
                let mut v = w2 / s3.sqrt() * r.powi(start);
                for slot in acc.iter_mut() {
                    *slot += v;
                    v *= r;
                }
            }
            for x in acc.iter_mut() {
                *x *= w1;
            }
            acc
        })
        .collect();
    // fixed-order reduction so the result does not depend on scheduling
    let mut out = vec![0.0; n];
    for p in &parts {
        for (o, x) in out.iter_mut().zip(p) {
            *o += x;
        }
    }
    for x in out.iter_mut() {
        *x *= 2.0 * PI;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::coeff::{scaled_density_coeff, CoeffGeometry};
    use crate::density::SeriesConfig;
    use crate::specfun::PsiCache;

    #[test]
    fn agrees_with_nested_sums_where_they_are_exact() {
        let p = GarchParams::symmetric(0.1, 0.1, 0.85, 1.0, 1.0).unwrap();
        let config = SeriesConfig::default();
        let cache = PsiCache::new(config.psi_tol);
        for signs in [SignVector(vec![1, 1]), SignVector(vec![1, -1])] {
            let geo = CoeffGeometry::new(&p, 3, &signs);
            let direct = h3_scaled_row(&p, &signs, geo.tau, 0..21);
            for (j, d) in direct.iter().enumerate() {
                let s = scaled_density_coeff(&geo, &cache, &config, j as u32).unwrap();
                assert!((d - s.value).abs() <= 1e-12 * s.value, "j={j}: {d} vs {}", s.value);
            }
        }
    }

    #[test]
    fn stable_under_panel_refinement() {
        let p = GarchParams::new(0.25, 0.1, 0.7, 0.2, 1.0, 1.0, 1).unwrap();
        let signs = SignVector(vec![-1, -1]);
        let tau = (p.omega + p.beta * p.sigma1_sq()) * p.beta;
        let base = h3_scaled_row(&p, &signs, tau, 0..801);
        let fine = h3_scaled_row_with(&p, &signs, tau, 0..801, 2);
        for (j, (a, b)) in base.iter().zip(&fine).enumerate() {
            assert!((a - b).abs() <= DIRECT_REL_ERROR * b, "j={j}: {a} vs {b}");
        }
        let window = h3_scaled_row(&p, &signs, tau, 700..801);
        for (a, b) in base[700..].iter().zip(&window) {
            assert!((a - b).abs() <= 1e-13 * a);
        }
        assert!(base.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
    }
}
