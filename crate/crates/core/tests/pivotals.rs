mod common;

use common::*;
use weibrec::records::{pivotal_u, pivotal_v, simulate_records_direct, simulate_records_naive};
use weibrec::{DistSpec, RngStream};

fn simulate_pivotals(alpha: f64, beta: f64, n: usize, reps: u64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let base = RngStream::new(seed, 0);
    let mut us = Vec::new();
    let mut vs = Vec::new();
    for r in 0..reps {
        let mut rng = base.substream(r);
        let s = simulate_records_direct(alpha, beta, n, &mut rng).unwrap();
        us.push(pivotal_u(&s, beta));
        vs.push(pivotal_v(&s, alpha, beta));
    }
    (us, vs)
}

#[test]
fn u_and_v_follow_their_chi_square_laws() {
    for &(alpha, beta, n) in &[(1.0, 1.0, 3usize), (2.0, 0.5, 7), (0.3, 5.0, 14)] {
        let (us, vs) = simulate_pivotals(alpha, beta, n, 10_000, 11);
        let df_u = 2 * n as u32;
        let du = ks_one_sample(&us, |x| chi2_even_cdf(df_u, x));
        let dv = ks_one_sample(&vs, |x| chi2_even_cdf(df_u + 2, x));
        assert!(du < ks_crit_1pct(us.len()), "U KS {du} at n={n}");
        assert!(dv < ks_crit_1pct(vs.len()), "V KS {dv} at n={n}");
        let rho = pearson(&us, &vs);
        assert!(rho.abs() < 0.03, "corr(U, V) = {rho} at n={n}");
    }
}

#[test]
fn naive_and_direct_simulators_agree_in_distribution() {
    let (alpha, beta, n) = (1.5, 2.0, 3);
    let reps = 2_000u64;
    let direct_base = RngStream::new(21, 0);
    let naive_base = RngStream::new(21, 1);
    let mut d_last = Vec::new();
    let mut d_s = Vec::new();
    let mut n_last = Vec::new();
    let mut n_s = Vec::new();
    for r in 0..reps {
        let d = simulate_records_direct(alpha, beta, n, &mut direct_base.substream(r)).unwrap();
        let s = simulate_records_naive(alpha, beta, n, &mut naive_base.substream(r), 10_000_000).unwrap();
        assert_eq!(s.n(), n);
        d_last.push(d.last());
        d_s.push(d.log_ratio_sum());
        n_last.push(s.last());
        n_s.push(s.log_ratio_sum());
    }
    let crit = ks2_crit_1pct(reps as usize, reps as usize);
    let d1 = ks_two_sample(&d_last, &n_last);
    let d2 = ks_two_sample(&d_s, &n_s);
    assert!(d1 < crit, "last record KS {d1} >= {crit}");
    assert!(d2 < crit, "log-ratio sum KS {d2} >= {crit}");
}

#[test]
fn chi_square_cdf_matches_integrated_density() {
    let pdf6 = |x: f64| x * x * (-x / 2.0).exp() / 16.0;
    let chi6 = DistSpec::chi_square(6).unwrap();
    let oracle = simpson(pdf6, 0.0, 14.4494, 20_000);
    assert!((oracle - 0.975).abs() < 1e-4);
    assert!((chi6.cdf(14.4494).unwrap() - oracle).abs() < 1e-9);
    for df in [2u32, 6, 8, 14, 28, 30] {
        let chi = DistSpec::chi_square(df).unwrap();
        for &p in &[0.0127, 0.025, 0.5, 0.975, 0.9873] {
            let q = chi.quantile(p).unwrap();
            assert!((q - chi2_even_quantile(df, p)).abs() < 1e-7 * q.max(1.0), "df={df} p={p}");
        }
    }
}

#[test]
fn sampler_means_match_analytic_moments() {
    let cases = [
        (DistSpec::chi_square(6).unwrap(), 6.0, 12.0f64),
        (DistSpec::exponential(2.0).unwrap(), 0.5, 0.25),
        (DistSpec::weibull(3.0, 1.0).unwrap(), 3.0, 9.0),
        (DistSpec::weibull(2.0, 2.0).unwrap(), std::f64::consts::PI.sqrt(), 4.0 - std::f64::consts::PI),
        (DistSpec::gamma(2.5, 2.0).unwrap(), 5.0, 10.0),
        (DistSpec::f(4, 10).unwrap(), 10.0 / 8.0, 2.0 * 100.0 * 12.0 / (4.0 * 64.0 * 6.0)),
    ];
    let n = 40_000;
    for (k, (dist, mu, var)) in cases.iter().enumerate() {
        let mut rng = RngStream::new(5, k as u64);
        let sampler = dist.sampler().unwrap();
        let xs: Vec<f64> = (0..n).map(|_| sampler.sample(&mut rng)).collect();
        let se = (var / n as f64).sqrt();
        assert!((mean(&xs) - mu).abs() < 4.0 * se, "{dist:?}: mean {} vs {mu}", mean(&xs));
    }
}

#[test]
fn last_record_mean_matches_gamma_representation() {
    // With beta = 1, R_n / alpha is Gamma(n + 1, 1).
    let (alpha, n) = (2.0, 5usize);
    let base = RngStream::new(8, 0);
    let xs: Vec<f64> = (0..20_000)
        .map(|r| simulate_records_direct(alpha, 1.0, n, &mut base.substream(r)).unwrap().last())
        .collect();
    let mu = alpha * (n + 1) as f64;
    let se = (alpha * alpha * (n + 1) as f64 / xs.len() as f64).sqrt();
    assert!((mean(&xs) - mu).abs() < 4.0 * se);
}
