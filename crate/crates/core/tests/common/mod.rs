//! Independent reference computations shared by the integration tests.
//! Nothing here goes through the series code.

#![allow(dead_code)]

use std::f64::consts::PI;

use garchpd::model::GarchParams;

pub fn bundled(name: &str) -> GarchParams {
    let text = match name {
        "linton" => include_str!("../../params/linton.json"),
        "fig1" => include_str!("../../params/fig1.json"),
        "fig2" => include_str!("../../params/fig2.json"),
        "fig3" => include_str!("../../params/fig3.json"),
        other => panic!("no bundled set {other}"),
    };
    GarchParams::from_json_str(text).unwrap()
}

pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// ∫_0^∞ f by the exp-sinh rule s = exp(π/2 sinh t).
pub fn exp_sinh<F: Fn(f64) -> f64>(f: F) -> f64 {
    let h = 1.0 / 64.0;
    let mut sum = 0.0;
    let n = (4.5 / h) as i32;
    for k in -n..=n {
        let t = k as f64 * h;
        let s = (0.5 * PI * t.sinh()).exp();
        let w = s * 0.5 * PI * t.cosh();
        let v = f(s) * w;
        if v.is_finite() {
            sum += v;
        }
    }
    sum * h
}

/// Composite Simpson on [a, b] with n (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Ψ(½, c; z) from (2/√π) ∫_0^∞ e^{−z s²} (1 + s²)^{c − 3/2} ds.
pub fn psi_half(c: f64, z: f64) -> f64 {
    2.0 / PI.sqrt() * exp_sinh(|s| (-z * s * s).exp() * (1.0 + s * s).powf(c - 1.5))
}

/// E σ₂^{−2j−1} · √(2π) given the sign of x₁, by quadrature over ε₁ ≥ 0.
pub fn h2_coeff(p: &GarchParams, sign: i8, j: u32) -> f64 {
    let s1 = p.sigma1_sq();
    let a1 = p.alpha_for_sign(sign);
    let base = p.omega + p.beta * s1;
    let f = |e: f64| 2.0 * phi(e) * (base + a1 * s1 * e * e).powf(-(j as f64) - 0.5);
    (2.0 * PI).sqrt() * simpson(f, 0.0, 40.0, 40_000)
}

fn next_var(p: &GarchParams, s: f64, e: f64) -> f64 {
    let a = if e < 0.0 { p.alpha + p.lambda } else { p.alpha };
    p.omega + a * s * e * e + p.beta * s
}

/// Density of x₃ at u (raw units) as E φ(u/σ₃)/σ₃ over (ε₁, ε₂), by nested
/// Simpson rules on [−12, 12]².
pub fn h3_pdf(p: &GarchParams, u: f64) -> f64 {
    let s1 = p.sigma1_sq();
    let n = 1200;
    let inner = |s2: f64| {
        let g = |e2: f64| {
            let s3 = next_var(p, s2, e2);
            phi(e2) * phi(u / s3.sqrt()) / s3.sqrt()
        };
        // the kink at 0 under asymmetry is handled by splitting there
        simpson(g, -12.0, 0.0, n) + simpson(g, 0.0, 12.0, n)
    };
    let outer = |e1: f64| phi(e1) * inner(next_var(p, s1, e1));
    simpson(outer, -12.0, 0.0, n) + simpson(outer, 0.0, 12.0, n)
}

/// σ_h² by plain recursion from σ₁².
pub fn recursive_sigma_sq(p: &GarchParams, eps: &[f64]) -> f64 {
    eps.iter().fold(p.sigma1_sq(), |s, &e| next_var(p, s, e))
}
