//! Scalar special-function kernels: Tricomi's confluent hypergeometric
//! function of the second kind, generalized binomial coefficients and the
//! standard normal distribution.

use std::collections::HashMap;
use std::f64::consts::{PI, SQRT_2};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::RwLock;

use crate::error::{Error, Result};
use crate::quad::{integrate_to_infinity, QuadOptions};
use crate::sum::CompensatedSum;

/// Default relative tolerance for Ψ evaluations.
pub const DEFAULT_PSI_TOL: f64 = 1e-13;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_677_939_946_059_934;

/// Arguments of Ψ(a, c; z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiArgs {
    pub a: f64,
    pub c: f64,
    pub z: f64,
}

impl PsiArgs {
    pub fn new(a: f64, c: f64, z: f64) -> Result<Self> {
        let args = Self { a, c, z };
        args.validate()?;
        Ok(args)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::domain(format!("Psi requires a > 0, got a = {}", self.a)));
        }
        if !(self.z > 0.0 && self.z.is_finite()) {
            return Err(Error::domain(format!("Psi requires z > 0, got z = {}", self.z)));
        }
        if !self.c.is_finite() {
            return Err(Error::domain("Psi requires a finite c"));
        }
        Ok(())
    }
}

/// Tricomi Ψ(a, c; z) from its integral representation
///
/// Ψ(a,c;z) = Γ(a)⁻¹ ∫₀^∞ e^{−zt} t^{a−1} (1+t)^{c−a−1} dt.
///
/// The substitution t = s^{1/a} turns t^{a−1}dt into ds/a, which removes the
/// endpoint singularity for every a > 0; the remaining smooth integral over
/// [0, ∞) is handled by adaptive Gauss–Kronrod with a rational tail map whose
/// scale follows the decay rate z + (a + 1 − c).
///
/// `tol` is a relative tolerance in (0, 1e-6]. Values much below 1e-14 are
/// not attainable in double precision and surface as convergence errors.
pub fn tricomi_psi(args: PsiArgs, tol: f64) -> Result<f64> {
    args.validate()?;
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(Error::domain(format!("Psi tolerance must lie in (0, 1e-6], got {tol}")));
    }
    let PsiArgs { a, c, z } = args;
    let inv_a = 1.0 / a;
    let expo = c - a - 1.0;
    // decay rate of the log-integrand near t = 0
    let rate = z + (-expo).max(0.0);
    let t_scale = 1.0 / rate;
    let s_scale = t_scale.powf(a);

    let integrand = |s: f64| {
        let t = if a == 0.5 { s * s } else { s.powf(inv_a) };
        (-z * t + expo * t.ln_1p()).exp()
    };
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: tol,
        max_intervals: 1000,
    };
    let r = integrate_to_infinity(integrand, 0.0, s_scale, opts).map_err(|f| {
        Error::convergence(
            "tricomi_psi",
            format!(
                "quadrature for Psi({a}, {c}; {z}) stalled at error {:.3e}",
                f.estimate.abs_err
            ),
            f.estimate.value / gamma(a + 1.0),
        )
    })?;
    let value = r.value / gamma(a + 1.0);
    if !value.is_finite() {
        return Err(Error::convergence(
            "tricomi_psi",
            format!("non-finite result for Psi({a}, {c}; {z})"),
            value,
        ));
    }
    Ok(value.max(0.0))
}

/// Ψ(1/2, 3/2 + m − k; ξ) as the terminating sum that arises when the
/// second argument exceeds the first by a positive integer:
///
/// Ψ = Γ(m+½)/(√π k! C(m−½,k)) · ξ^{−½−m+k} · Σ_{i=0}^{m−k} C(m−k,i)/C(m−k−½,i) · ξ^i/i!.
pub fn tricomi_psi_finite(m: u32, k: u32, xi: f64) -> Result<f64> {
    if k > m {
        return Err(Error::domain(format!("finite Psi needs k <= m, got k = {k}, m = {m}")));
    }
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::domain(format!("finite Psi needs xi > 0, got {xi}")));
    }
    let n = m - k;
    // Γ(m+½)/(k!·C(m−½,k)) collapses to Γ(n+½); divide by √π as a product.
    let mut pre = 1.0;
    for i in 1..=n {
        pre *= i as f64 - 0.5;
    }
    let nf = n as f64;
    let mut acc = CompensatedSum::new();
    let mut power = 1.0;
    for i in 0..=n {
        if i > 0 {
            power *= xi / i as f64;
        }
        acc.add(gen_binom(nf, i) / gen_binom(nf - 0.5, i) * power);
    }
    Ok(pre * xi.powf(-0.5 - nf) * acc.value())
}

/// Generalized binomial coefficient r(r−1)⋯(r−k+1)/k!.
pub fn gen_binom(r: f64, k: u32) -> f64 {
    let mut out = 1.0;
    for i in 0..k {
        out *= (r - i as f64) / (i as f64 + 1.0);
    }
    out
}

/// Γ(x) for real x (thin wrapper so callers do not depend on `libm` directly).
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub fn gaussian_pdf(u: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * u * u).exp()
}

pub fn gaussian_cdf(u: f64) -> f64 {
    0.5 * libm::erfc(-u / SQRT_2)
}

/// Standard normal quantile: Acklam's rational approximation polished by
/// two Halley steps against the erfc-based CDF.
pub fn gaussian_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("Gaussian quantile needs p in (0, 1), got {p}")));
    }
    if p > 0.5 {
        return Ok(-lower_quantile(1.0 - p));
    }
    Ok(lower_quantile(p))
}

fn lower_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    if p == 0.5 {
        return 0.0;
    }
    let mut x = if p < 0.024_25 {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    for _ in 0..2 {
        let e = gaussian_cdf(x) - p;
        let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

/// Memo table for Ψ(1/2, c; z), keyed by the bit patterns of (c, z).
///
/// Safe to share between threads; every entry is a pure function of its key
/// and the cache tolerance, so concurrent fills cannot change results.
#[derive(Debug)]
pub struct PsiCache {
    tol: f64,
    map: RwLock<HashMap<(u64, u64), f64>>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl PsiCache {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            map: RwLock::new(HashMap::new()),
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        }
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Ψ(1/2, c; z), computed once per distinct (c, z).
    pub fn half(&self, c: f64, z: f64) -> Result<f64> {
        let key = (c.to_bits(), z.to_bits());
        if let Some(v) = self.map.read().expect("psi cache poisoned").get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(*v);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let v = tricomi_psi(PsiArgs::new(0.5, c, z)?, self.tol)?;
        self.map.write().expect("psi cache poisoned").insert(key, v);
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("psi cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// (hits, misses) since construction.
    pub fn stats(&self) -> (usize, usize) {
        (self.hits.load(Ordering::Relaxed), self.misses.load(Ordering::Relaxed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn psi(a: f64, c: f64, z: f64) -> f64 {
        tricomi_psi(PsiArgs::new(a, c, z).unwrap(), 1e-13).unwrap()
    }

    #[test]
    fn psi_reduces_to_power_when_c_is_a_plus_one() {
        assert!((psi(0.5, 1.5, 4.0) - 0.5).abs() < 1e-14);
        for &(a, z) in &[(0.5f64, 0.01f64), (1.0, 3.0), (2.5, 0.7), (0.2, 40.0)] {
            let want = z.powf(-a);
            assert!((psi(a, a + 1.0, z) - want).abs() / want < 1e-11, "a={a} z={z}");
        }
    }

    #[test]
    fn psi_decreases_in_negative_c() {
        let v: Vec<f64> = [0u32, 50, 200].iter().map(|&j| psi(0.5, 1.0 - j as f64, 2.0)).collect();
        assert!(v[0] > v[1] && v[1] > v[2] && v[2] > 0.0, "{v:?}");
    }

    #[test]
    fn psi_rejects_bad_domain() {
        assert!(matches!(PsiArgs::new(0.0, 1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(PsiArgs::new(0.5, 1.0, -1.0), Err(Error::Domain(_))));
        let ok = PsiArgs::new(0.5, 1.0, 1.0).unwrap();
        assert!(tricomi_psi(ok, 1e-3).is_err());
    }

    #[test]
    fn finite_sum_matches_quadrature() {
        assert!((tricomi_psi_finite(0, 0, 4.0).unwrap() - 0.5).abs() < 1e-15);
        for &(m, k, xi) in &[(2u32, 1u32, 1.3), (3, 0, 0.7), (5, 2, 9.0), (4, 4, 0.2)] {
            let a = tricomi_psi_finite(m, k, xi).unwrap();
            let b = psi(0.5, 1.5 + m as f64 - k as f64, xi);
            assert!((a - b).abs() / b < 1e-10, "m={m} k={k} xi={xi}: {a} vs {b}");
        }
        assert!(tricomi_psi_finite(1, 2, 1.0).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(gen_binom(-0.5, 1), -0.5);
        assert_eq!(gen_binom(5.0, 2), 10.0);
        assert_eq!(gen_binom(-1.5, 3), -35.0 / 16.0);
        assert_eq!(gen_binom(3.7, 0), 1.0);
        assert_eq!(gen_binom(3.0, 4), 0.0);
    }

    #[test]
    fn gaussian_basics() {
        assert_eq!(gaussian_cdf(0.0), 0.5);
        assert!((gaussian_quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-13);
        assert!((gaussian_quantile(0.95).unwrap() - 1.6449).abs() < 5e-5);
        assert!(gaussian_quantile(0.0).is_err());
        assert!(gaussian_quantile(1.0).is_err());
        for &p in &[1e-300, 1e-12, 0.001, 0.3, 0.5, 0.77, 0.999] {
            let x = gaussian_quantile(p).unwrap();
            let back = gaussian_cdf(x);
            assert!((back - p).abs() / p.min(1.0 - p) < 1e-12, "p={p}");
        }
    }

    #[test]
    fn cache_reuses_entries() {
        let cache = PsiCache::new(1e-13);
        let a = cache.half(-3.0, 1.7).unwrap();
        let b = cache.half(-3.0, 1.7).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(cache.stats(), (1, 1));
        assert_eq!(cache.len(), 1);
    }
}
