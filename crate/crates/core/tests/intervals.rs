mod common;

use common::*;
use weibrec::records::simulate_records_direct;
use weibrec::scale::{draw_pivotal_t, generalized_ci_scale, gpv_scale};
use weibrec::shape::{exact_ci_shape, exact_test_shape, ln_w_statistic, wu_ci_shape};
use weibrec::{Hypotheses, RecordSample, RngStream, WStarTable};

#[test]
fn exact_interval_coverage_and_expected_length() {
    let (alpha, level, reps) = (1.0, 0.95, 4_000u64);
    for &(beta, n) in &[(1.0, 3usize), (0.5, 7), (5.0, 14)] {
        let base = RngStream::new(33, n as u64);
        let mut covered = 0usize;
        let mut lengths = Vec::new();
        for r in 0..reps {
            let s = simulate_records_direct(alpha, beta, n, &mut base.substream(r)).unwrap();
            let ci = exact_ci_shape(&s, level).unwrap();
            covered += ci.contains(beta) as usize;
            lengths.push(ci.length());
        }
        let cov = covered as f64 / reps as f64;
        assert!((cov - level).abs() < 4.0 * (level * (1.0 - level) / reps as f64).sqrt(), "coverage {cov}");

        // E[1/S] = beta / (n - 1) since 2 beta S ~ chi2(2n).
        let df = 2 * n as u32;
        let oracle = beta * (chi2_even_quantile(df, 0.975) - chi2_even_quantile(df, 0.025)) / (2.0 * n as f64 - 2.0);
        let m = mean(&lengths);
        let sd = (lengths.iter().map(|l| (l - m) * (l - m)).sum::<f64>() / (reps as f64 - 1.0)).sqrt();
        assert!((m - oracle).abs() < 4.0 * sd / (reps as f64).sqrt(), "length {m} vs {oracle}");
        if n == 3 && beta == 1.0 {
            assert!((oracle - 3.3030).abs() < 1e-3);
        }
    }
}

#[test]
fn exact_test_is_dual_to_exact_interval() {
    let s = example_sample();
    let ci = exact_ci_shape(&s, 0.95).unwrap();
    for k in 1..400 {
        let beta0 = 0.05 * k as f64;
        if (beta0 - ci.lower).abs() < 1e-9 || (beta0 - ci.upper).abs() < 1e-9 {
            continue;
        }
        let t = exact_test_shape(&s, beta0, 0.05, Hypotheses::TwoSided).unwrap();
        assert_eq!(t.reject, !ci.contains(beta0), "beta0 = {beta0}");
        assert_eq!(t.p_value.unwrap() < 0.05, t.reject, "beta0 = {beta0}");
    }
}

#[test]
fn scale_equivariance_is_exact() {
    let s = example_sample();
    for c in [0.25, 4.0, 1024.0] {
        let sc = s.scaled(c).unwrap();
        // Shape inference depends on ratios only.
        let a = exact_ci_shape(&s, 0.9).unwrap();
        let b = exact_ci_shape(&sc, 0.9).unwrap();
        assert_eq!((a.lower, a.upper), (b.lower, b.upper));
        for beta in [0.3, 1.0, 7.0] {
            let lw = ln_w_statistic(&s, beta).unwrap();
            assert!((lw - ln_w_statistic(&sc, beta).unwrap()).abs() <= 1e-12 * lw.abs().max(1.0));
        }
        // The generalized interval scales by c for power-of-two factors.
        let rng = RngStream::new(9, 0);
        let da = draw_pivotal_t(&s, 10_000, &rng).unwrap();
        let db = draw_pivotal_t(&sc, 10_000, &rng).unwrap();
        let ia = generalized_ci_scale(&da, 0.95).unwrap();
        let ib = generalized_ci_scale(&db, 0.95).unwrap();
        assert_eq!(ia.lower * c, ib.lower);
        assert_eq!(ia.upper * c, ib.upper);
        let pa = gpv_scale(&da, 5.0, Hypotheses::OneSidedUpper).unwrap();
        let pb = gpv_scale(&db, 5.0 * c, Hypotheses::OneSidedUpper).unwrap();
        assert_eq!(pa.p_value, pb.p_value);
    }
}

#[test]
fn wu_interval_solves_its_defining_equation_and_nests() {
    let s = RecordSample::new(vec![0.4, 0.9, 1.3, 2.2, 2.5, 4.1]).unwrap();
    let table = WStarTable::for_levels(s.n(), &[0.9, 0.95], 20_000, 4).unwrap();
    let narrow = wu_ci_shape(&s, 0.9, &table).unwrap();
    let wide = wu_ci_shape(&s, 0.95, &table).unwrap();
    assert!(wide.lower < narrow.lower && narrow.upper < wide.upper);
    let lo = table.percentile(0.025).unwrap();
    let hi = table.percentile(0.975).unwrap();
    assert!((ln_w_statistic(&s, wide.lower).unwrap() - lo.ln()).abs() < 1e-6);
    assert!((ln_w_statistic(&s, wide.upper).unwrap() - hi.ln()).abs() < 1e-6);
}
