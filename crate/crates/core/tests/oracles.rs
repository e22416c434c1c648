//! Series results against direct integrals.

mod common;

use common::*;
use garchpd::density::{build_table, coeff_single, standardize, SeriesConfig};
use garchpd::model::SignVector;
use garchpd::specfun::{tricomi_psi, tricomi_psi_finite, PsiArgs, DEFAULT_PSI_TOL};

#[test]
fn psi_against_exp_sinh() {
    for &z in &[0.05, 0.3, 1.0, 4.0, 25.0, 300.0] {
        for &c in &[1.0, 0.5, 0.0, -3.0, -20.0, -99.0] {
            let got = tricomi_psi(PsiArgs::new(0.5, c, z).unwrap(), DEFAULT_PSI_TOL).unwrap();
            let want = psi_half(c, z);
            assert!((got - want).abs() <= 1e-11 * want, "c={c} z={z}: {got} vs {want}");
        }
    }
}

#[test]
fn psi_finite_overlaps_quadrature() {
    for m in 0..6u32 {
        for k in 0..=m {
            for &z in &[0.2, 1.5, 9.0] {
                let fin = tricomi_psi_finite(m, k, z).unwrap();
                let want = psi_half(1.5 + m as f64 - k as f64, z);
                assert!((fin - want).abs() <= 1e-10 * want, "m={m} k={k} z={z}: {fin} vs {want}");
            }
        }
    }
}

#[test]
fn h2_coefficients_match_one_dimensional_quadrature() {
    let config = SeriesConfig::default();
    for name in ["linton", "fig1", "fig3"] {
        let p = bundled(name);
        for sign in [1i8, -1] {
            for j in 0..=10u32 {
                let got = coeff_single(j, &SignVector(vec![sign]), &p, 2, &config).unwrap();
                let want = h2_coeff(&p, sign, j);
                let rel = ((got - want) / want).abs();
                assert!(rel < 1e-8, "{name} s={sign} j={j}: {got} vs {want} ({rel:e})");
            }
        }
    }
}

#[test]
fn h3_density_matches_two_dimensional_quadrature() {
    let config = SeriesConfig::default();
    for name in ["fig1", "fig2", "fig3", "linton"] {
        let p = bundled(name);
        let (scale, t) = standardize(&build_table(&p, 3, &config).unwrap()).unwrap();
        for u in [0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 3.0, -3.0] {
            let got = t.pdf_x(u);
            let want = scale * h3_pdf(&p, scale * u);
            assert!((got - want).abs() < 1e-6, "{name} u={u}: {got} vs {want}");
        }
    }
}

#[test]
fn moments_match_density_quadrature() {
    let config = SeriesConfig::default();
    for name in ["fig1", "fig2", "fig3", "linton"] {
        for h in [2, 3] {
            let t = build_table(&bundled(name), h, &config).unwrap();
            let sd = t.std_dev();
            for m in 1..=2u32 {
                let direct = 2.0 * simpson(|u| u.powi(2 * m as i32) * t.pdf_x(u), 0.0, 30.0 * sd, 6000);
                let exact = t.moment(m).unwrap();
                let rel = (exact - direct) / exact;
                assert!(rel.abs() < 1e-6, "{name} h={h} m={m}: {rel:e}");
            }
        }
    }
}

#[test]
fn terms_are_dominated_by_the_exponential_series() {
    // |ĉ_j| ρ^j/j! ≤ M ρ^j/j! with M the largest scaled coefficient
    let t = build_table(&bundled("fig2"), 3, &SeriesConfig::default()).unwrap();
    let m_hat = t.averaged.iter().cloned().fold(0.0, f64::max);
    assert!(t.averaged.iter().all(|&c| c.abs() <= m_hat));
    // and the coefficients themselves decay, as Ψ(½, 1−j; ·) does
    assert!(t.averaged[50] < t.averaged[0]);
}
