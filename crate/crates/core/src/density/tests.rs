use super::*;
use crate::specfun::{tricomi_psi, PsiArgs};

fn fig2() -> GarchParams {
    GarchParams::symmetric(0.1, 0.1, 0.85, 1.0, 1.0).unwrap()
}

fn small() -> SeriesConfig {
    SeriesConfig {
        j_max: 40,
        auto_extend: false,
        ..SeriesConfig::default()
    }
}

#[test]
fn h2_coefficient_matches_closed_form() {
    let p = fig2();
    let s1 = p.sigma1_sq();
    let t = p.omega + p.beta * s1;
    for j in [0u32, 1, 5, 20] {
        let got = coeff_single(j, &SignVector(vec![1]), &p, 2, &SeriesConfig::default()).unwrap();
        let psi = tricomi_psi(PsiArgs::new(0.5, 1.0 - j as f64, t / (2.0 * p.alpha * s1)).unwrap(), 1e-13).unwrap();
        let want = std::f64::consts::PI.sqrt() / (s1 * p.alpha).sqrt() * t.powi(-(j as i32)) * psi;
        assert!((got - want).abs() <= 1e-12 * want, "j={j}: {got} vs {want}");
    }
}

#[test]
fn asymmetric_rows_use_their_own_alpha() {
    let p = GarchParams::new(0.1, 0.1, 0.85, 0.2, 1.0, 1.0, 1).unwrap();
    let cfg = small();
    let plus = coeff_single(3, &SignVector(vec![1]), &p, 2, &cfg).unwrap();
    let minus = coeff_single(3, &SignVector(vec![-1]), &p, 2, &cfg).unwrap();
    assert!(plus != minus);
    let table = build_table(&p, 2, &cfg).unwrap();
    let avg = 0.5 * (table.sign_coefficient(0, 3) + table.sign_coefficient(1, 3));
    assert!((table.coefficient(3) - avg).abs() <= 1e-14 * avg);
    assert!((table.sign_coefficient(0, 3) - plus).abs() <= 1e-13 * plus);
}

#[test]
fn symmetric_rows_are_identical() {
    let table = build_table(&fig2(), 3, &small()).unwrap();
    assert_eq!(table.per_sign.len(), 4);
    for row in &table.per_sign[1..] {
        assert_eq!(row.coefficients, table.per_sign[0].coefficients);
    }
    assert!(table.averaged.iter().all(|c| c.is_finite() && *c >= 0.0));
}

#[test]
fn second_moment_closed_forms() {
    let p = fig2();
    let cfg = SeriesConfig::default();
    let s1 = p.sigma1_sq();
    assert!((moment(&p, 1, 1, &cfg).unwrap() - s1).abs() < 1e-15);
    assert!((moment(&p, 1, 2, &cfg).unwrap() - 3.0 * s1 * s1).abs() < 1e-14);
    let want = p.omega + (p.alpha + p.beta) * s1;
    let got = moment(&p, 2, 1, &cfg).unwrap();
    assert!((got - want).abs() <= 1e-10 * want, "{got} vs {want}");
    // one step further by iterated expectation: E σ₃² = ω + (α+β) E σ₂²
    let want3 = p.omega + (p.alpha + p.beta) * want;
    let got3 = moment(&p, 3, 1, &cfg).unwrap();
    assert!((got3 - want3).abs() <= 1e-10 * want3, "{got3} vs {want3}");
}

#[test]
fn fourth_moment_h2() {
    // E x₂⁴ = 3 E σ₂⁴ with σ₂² = ω + βσ₁² + ασ₁²ε²
    let p = fig2();
    let s1 = p.sigma1_sq();
    let a = p.omega + p.beta * s1;
    let b = p.alpha * s1;
    let want = 3.0 * (a * a + 2.0 * a * b + 3.0 * b * b);
    let got = moment(&p, 2, 2, &SeriesConfig::default()).unwrap();
    assert!((got - want).abs() <= 1e-10 * want, "{got} vs {want}");
}

#[test]
fn density_symmetry_and_median() {
    let table = build_table(&fig2(), 2, &SeriesConfig::default()).unwrap();
    assert_eq!(table.cdf_x(0.0), 0.5);
    for u in [0.3, 1.0, 2.5] {
        assert_eq!(table.pdf_x(u), table.pdf_x(-u));
        assert!((table.cdf_x(u) + table.cdf_x(-u) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn z_density_relation() {
    let table = build_table(&fig2(), 2, &SeriesConfig::default()).unwrap();
    for w in [0.1, 1.0, 4.0] {
        let lhs = table.pdf_z(w).unwrap() * w.sqrt();
        assert!((lhs - table.pdf_x(w.sqrt())).abs() < 1e-13);
        let rhs = 2.0 * table.cdf_x(w.sqrt()) - 1.0;
        assert!((table.cdf_z(w).unwrap() - rhs).abs() < 1e-12);
    }
    assert_eq!(table.pdf_z(0.0).unwrap(), f64::INFINITY);
    assert!(table.pdf_z(-1.0).is_err());
}

#[test]
fn standardized_table_has_unit_variance() {
    let table = build_table(&GarchParams::linton(), 2, &SeriesConfig::default()).unwrap();
    let (scale, std) = standardize(&table).unwrap();
    assert!((scale * scale - table.second_moment).abs() < 1e-15 * table.second_moment);
    assert!((std.moment(1).unwrap() - 1.0).abs() < 1e-8);
    assert!((std.std_dev() - 1.0).abs() < 1e-12);
    assert!(std.cdf_x(6.0) - std.cdf_x(-6.0) > 1.0 - 1e-4);
}

#[test]
fn h1_is_gaussian() {
    let p = fig2();
    let table = build_table(&p, 1, &SeriesConfig::default()).unwrap();
    let (_, std) = standardize(&table).unwrap();
    for u in [-2.0, 0.0, 1.5] {
        assert!((std.pdf_x(u) - crate::specfun::gaussian_pdf(u)).abs() < 1e-15);
        assert!((std.cdf_x(u) - crate::specfun::gaussian_cdf(u)).abs() < 1e-15);
    }
}

#[test]
fn json_round_trip_is_bit_identical() {
    let table = build_table(&fig2(), 3, &small()).unwrap();
    let s = table.to_json().unwrap();
    let back = CoefficientTable::from_json(&s).unwrap();
    assert_eq!(back, table);
    assert_eq!(back.to_json().unwrap(), s);
}

#[test]
fn json_rejects_other_versions() {
    let table = build_table(&fig2(), 2, &small()).unwrap();
    let s = table.to_json().unwrap().replace("\"version\": 1", "\"version\": 99");
    assert!(matches!(CoefficientTable::from_json(&s), Err(Error::Format(_))));
}

#[test]
fn inner_cap_reports_convergence_failure() {
    let cfg = SeriesConfig {
        inner_k_max: 2,
        ..small()
    };
    let err = coeff_single(30, &SignVector(vec![1, 1]), &fig2(), 3, &cfg).unwrap_err();
    assert!(matches!(err, Error::Convergence { .. }));
}

#[test]
fn trust_range_flag() {
    let table = build_table(&fig2(), 2, &small()).unwrap();
    let sd = table.std_dev();
    assert!(!table.pdf_x_eval(5.0 * sd).out_of_range);
    assert!(table.pdf_x_eval(7.0 * sd).out_of_range);
    let mut forced = table.clone();
    forced.config.force_range = true;
    assert!(!forced.pdf_x_eval(7.0 * sd).out_of_range);
}
