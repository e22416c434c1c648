mod common;

use common::bundled;
use garchpd::density::{build_table, standardize, CoefficientTable, SeriesConfig};
use garchpd::model::GarchParams;
use garchpd::montecarlo::{
    compare_cdf, es_variance, mc_es, mc_quantile, simulate_summary, simulate_terminal, StreamingSummary,
};
use garchpd::risk::{es_exact, risk_at, var_newton, RiskOptions};

const LEVELS: [f64; 4] = [0.05, 0.025, 0.01, 0.005];

fn standardized(p: &GarchParams, h: usize) -> CoefficientTable {
    standardize(&build_table(p, h, &SeriesConfig::default()).unwrap()).unwrap().1
}

#[test]
fn risk_measures_are_consistent() {
    let opts = RiskOptions::default();
    for name in ["linton", "fig1", "fig3"] {
        for h in [2, 3] {
            let t = standardized(&bundled(name), h);
            let rows: Vec<_> = LEVELS.iter().map(|&p| risk_at(&t, p, &opts).unwrap()).collect();
            for r in &rows {
                assert!((t.cdf_x(-r.var) - r.p).abs() <= opts.newton_tol, "{name} h={h} p={}", r.p);
                assert!(r.es > r.var);
            }
            for w in rows.windows(2) {
                assert!(w[1].var > w[0].var && w[1].es > w[0].es, "{name} h={h}");
            }
        }
    }
}

#[test]
fn es_forms_agree() {
    let opts = RiskOptions::default();
    for name in ["linton", "fig2", "fig3"] {
        let t = standardized(&bundled(name), 2);
        for p in LEVELS {
            let v = var_newton(&t, p, &opts).unwrap();
            let e = es_exact(&t, p, v.var, &opts).unwrap();
            // integration by parts leaves var·(F(−var) − p)/p from the Newton residual
            let gap = (e.tail_mean - e.boundary - e.es - v.var * v.residual / p).abs();
            assert!(gap <= 10.0 * opts.quad_tol, "{name} p={p}: {gap:e}");
        }
    }
}

#[test]
fn empirical_cdf_stays_in_band() {
    let r = 1_000_000u64;
    let fig2 = bundled("fig2");
    let asym = GarchParams { lambda: 0.2, ..fig2 };
    for p in [fig2, asym] {
        for h in [2, 3] {
            let t = build_table(&p, h, &SeriesConfig::default()).unwrap();
            let sd = t.std_dev();
            let grid: Vec<f64> = (0..25).map(|i| sd * (-4.0 + i as f64 / 3.0)).collect();
            let s = simulate_summary(&p, h, r, 42, 2, &grid).unwrap();
            let cmp = compare_cdf(&t, &grid, &s.ecdf(), r);
            assert!(cmp.within_band(), "λ={} h={h}: {} > {}", p.lambda, cmp.sup_gap, cmp.band);
            for m in 1..=2 {
                let (mean, se) = s.moment(m);
                let exact = t.moment(m as u32).unwrap();
                assert!((mean - exact).abs() <= 4.0 * se, "λ={} h={h} m={m}", p.lambda);
            }
        }
    }
}

#[test]
fn estimators_converge() {
    let p = GarchParams::linton();
    let t = build_table(&p, 2, &SeriesConfig::default()).unwrap();
    let opts = RiskOptions::default();
    let level = 0.05;
    let exact = risk_at(&t, level, &opts).unwrap();
    let sample = simulate_terminal(&p, 2, 10_000_000, 7).unwrap();
    let f = t.pdf_x(-exact.var);
    let mut prev: Option<(f64, f64)> = None;
    for r in [10_000usize, 100_000, 1_000_000, 10_000_000] {
        let xs = &sample[..r];
        let q = mc_quantile(xs, level).unwrap();
        let es = mc_es(xs, level, -q.value).unwrap();
        let (eq, ee) = ((q.value + exact.var).abs(), (es - exact.es).abs());
        // standard error of the order statistic
        let se = (level * (1.0 - level) / r as f64).sqrt() / f;
        assert!(eq <= 4.0 * se, "R={r}: quantile off by {eq:e}, se {se:e}");
        if let Some((pq, pe)) = prev {
            assert!(eq <= 2.0 * pq.max(se), "R={r}: {eq:e} after {pq:e}");
            assert!(ee <= 2.0 * pe.max(4.0 * se), "R={r}: {ee:e} after {pe:e}");
        }
        prev = Some((eq, ee));
    }
    // variance of v = −x·1(x ≤ −Q), the quantity behind the ES plan
    let n = sample.len() as f64;
    let v: Vec<f64> = sample.iter().map(|&x| if x <= -exact.var { -x } else { 0.0 }).collect();
    let m1 = v.iter().sum::<f64>() / n;
    let m2 = v.iter().map(|x| x * x).sum::<f64>() / n;
    let v_sq = es_variance(&t, level, exact.var, exact.es, &opts).unwrap();
    let m4 = v.iter().map(|x| x.powi(4)).sum::<f64>() / n;
    let se = ((m4 - m2 * m2) / n).sqrt();
    assert!(((m2 - m1 * m1) - v_sq).abs() <= 4.0 * se, "{} vs {v_sq}", m2 - m1 * m1);
}

#[test]
fn simulation_is_reproducible() {
    let p = bundled("fig3");
    let a = simulate_terminal(&p, 3, 200_000, 11).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| simulate_terminal(&p, 3, 200_000, 11).unwrap());
    assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert_ne!(a, simulate_terminal(&p, 3, 200_000, 12).unwrap());
    // a prefix of a longer run is the shorter run
    let long = simulate_terminal(&p, 3, 300_000, 11).unwrap();
    assert_eq!(&long[..200_000], &a[..]);

    let grid = [-1.0, 0.0, 1.0];
    let streamed = simulate_summary(&p, 3, 200_000, 11, 2, &grid).unwrap();
    assert_eq!(streamed, StreamingSummary::from_sample(&a, 2, &grid));
}
