//! Statistical cross-checks between the estimators and the closed forms.

use bdlrpc::montecarlo::{estimate_pt, estimate_qt, simulate_decoding, RankParams, SimOptions, SimParams};
use bdlrpc::probability::{conjecture_k, full_rank_prob, p_upper_bound, q_opt};

const TRIALS: u64 = 20_000;

#[test]
fn pt_factors_through_qt() {
    for (d, t, r) in [(2, 2, 2), (3, 2, 2), (3, 4, 2), (2, 3, 3)] {
        let p = RankParams { q: 2, n: 14, k: 6, d, t, r };
        let pt = estimate_pt(&p, TRIALS, 11, 0).unwrap();
        let qt = estimate_qt(&p, TRIALS, 12, 0).unwrap();
        let f = full_rank_prob(2, 8, r).value();
        // combined 3 sigma on the difference of two independent estimates
        let var = pt.rate * (1.0 - pt.rate) / TRIALS as f64 + f * f * qt.rate * (1.0 - qt.rate) / TRIALS as f64;
        assert!((pt.rate - qt.rate * f).abs() <= 3.0 * var.sqrt() + 1e-3 / TRIALS as f64, "{d} {t} {r}");
    }
}

#[test]
fn qt_at_optimal_t_and_k_below() {
    for (nk, d, r) in [(6usize, 2usize, 2usize), (6, 3, 2), (8, 3, 3)] {
        let p = RankParams { q: 2, n: nk + 5, k: 5, d, t: r * (d - 1), r };
        let s = estimate_qt(&p, TRIALS, 21, 0).unwrap();
        assert!(s.consistent_with(q_opt(2, p.n, p.k, r).value(), 3.0), "{nk} {d} {r}");
        let k = conjecture_k(2, d, r, (nk - r) as i64).unwrap().value();
        assert!(k <= s.wilson(3.0).1);
    }
}

#[test]
fn pt_monotone_in_t_and_upper_bounded() {
    let (nk, d, r) = (8usize, 3usize, 3usize);
    let mut prev: Option<(f64, f64)> = None;
    for t in 2..=r * (d - 1) + 1 {
        let p = RankParams { q: 2, n: nk + 4, k: 4, d, t, r };
        let s = estimate_pt(&p, TRIALS, 30 + t as u64, 0).unwrap();
        let (_, hi) = s.wilson(3.0);
        assert!(p_upper_bound(2, p.n, p.k, r).value() >= s.wilson(3.0).0, "t = {t}");
        if let Some((prev_rate, _)) = prev {
            assert!(prev_rate <= hi, "t = {t}");
        }
        prev = Some((s.rate, hi));
    }
}

#[test]
fn decoder_first_phase_dominates_pt() {
    let sp = SimParams { q: 2, m: 37, n: 32, k: 16, d: 2, t: 2, r: 9 };
    let opts = SimOptions { diagnose: true, ..Default::default() };
    let s = simulate_decoding(&sp, 400, 3, &opts).unwrap();
    let diag = s.diagnosis.unwrap();
    let pt = estimate_pt(&RankParams { q: 2, n: 32, k: 16, d: 2, t: 2, r: 9 }, 4000, 4, 0).unwrap();
    let first = bdlrpc::montecarlo::wilson(diag.expansion_complete, s.trials, 3.0).1;
    assert!(first >= pt.wilson(3.0).0, "{} vs {}", diag.expansion_complete, pt.rate);
    assert_eq!(diag.both, diag.successes_given_both);
}
