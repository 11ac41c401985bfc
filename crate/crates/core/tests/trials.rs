mod common;

use common::double_d2_scenario;
use mfqec::builders::{build_bf_circuit, build_scheme, CodeKind};
use mfqec::circuit::Variant;
use mfqec::montecarlo::{estimate_logical_error_rate, run_trial, Classification, Experiment, TrialConfig};
use mfqec::stats::{derive_seed, ks_two_sample_p_value};
use proptest::prelude::*;
use rand::SeedableRng;

#[test]
fn simplified_double_d2_oscillates() {
    let trace = double_d2_scenario(Variant::Simplified, 20);
    assert!(trace.iter().all(|&(c, _)| c == Classification::Residual), "{trace:?}");
    let weights: Vec<usize> = trace[1..].iter().map(|&(_, w)| w).collect();
    assert!(weights.windows(2).all(|w| w[0] + w[1] == 3 && w[0] != w[1]), "{weights:?}");
}

#[test]
fn perfect_double_d2_recovers() {
    let trace = double_d2_scenario(Variant::Perfect, 20);
    assert_eq!(trace[1], (Classification::CleanZero, 0), "{trace:?}");
    assert!(trace[1..].iter().all(|&(c, w)| c == Classification::CleanZero && w == 0));
}

#[test]
fn parity_rule_d1_lags_d2_by_one_cycle() {
    for v in [Variant::Perfect, Variant::Simplified] {
        let exp = Experiment::new(build_bf_circuit(v), 0.01).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut cycles = Vec::new();
        for q in [1, 0] {
            let mut tab = exp.initial_state();
            tab.apply_pauli_factor(q, mfqec::pauli::Pauli::X);
            let mut which = mfqec::circuit::CycleSelector::A;
            let mut n = 0;
            while common::bf_error_weight(&tab) > 0 || n == 0 {
                exp.run_cycle(&mut tab, which, &[], &mut rng).unwrap();
                which = which.other();
                n += 1;
            }
            cycles.push(n);
        }
        assert_eq!(cycles[1], cycles[0] + 1, "{v:?}");
    }
}


#[test]
fn zero_rate_is_censored() {
    let cfg = TrialConfig { code: CodeKind::BitFlip, variant: Some(Variant::Simplified), p: 0.0, seed: 3, max_cycles: 50 };
    let r = run_trial(&cfg).unwrap();
    assert!(r.censored);
    assert_eq!(r.cycles_to_failure, 50);
}

#[test]
fn results_do_not_depend_on_pool_size() {
    let exp = Experiment::new(build_bf_circuit(Variant::Perfect), 0.02).unwrap();
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| exp.run_trials(200, 11, 1_000_000).unwrap())
    };
    assert_eq!(run(1), run(3));
    let serial: Vec<_> = (0..200).map(|i| exp.run_trial(derive_seed(11, i), 1_000_000).unwrap()).collect();
    assert_eq!(run(2), serial);
}

#[test]
fn skip_sampling_agrees_with_full_simulation() {
    let exp = Experiment::new(build_bf_circuit(Variant::Simplified), 0.05).unwrap();
    let n = 2000u64;
    let skip: Vec<f64> = (0..n).map(|i| exp.run_trial(derive_seed(1, i), 1 << 30).unwrap().cycles_to_failure as f64).collect();
    let full: Vec<f64> =
        (0..n).map(|i| exp.run_trial_full(derive_seed(2, i), 1 << 30).unwrap().cycles_to_failure as f64).collect();
    let p = ks_two_sample_p_value(&skip, &full);
    assert!(p > 0.01, "KS p = {p}");
}

#[test]
fn unencoded_baseline_fails_at_two_thirds_p() {
    for p in [1e-3, 1e-2] {
        let exp = Experiment::new(build_scheme(CodeKind::BitFlip, None), p).unwrap();
        let est = estimate_logical_error_rate(&exp, 4000, 5, 1 << 40).unwrap();
        let expected = 2.0 * p / 3.0;
        assert!((est.p_log - expected).abs() < 0.06 * expected, "p={p}: {} vs {expected}", est.p_log);
        assert!(est.ci_low <= est.p_log && est.p_log <= est.ci_high);
    }
}

#[test]
fn logical_rate_increases_with_p() {
    let rates: Vec<f64> = [0.005, 0.01, 0.02, 0.04]
        .iter()
        .map(|&p| {
            let exp = Experiment::new(build_bf_circuit(Variant::Simplified), p).unwrap();
            estimate_logical_error_rate(&exp, 400, 9, 1 << 40).unwrap().p_log
        })
        .collect();
    assert!(rates.windows(2).all(|w| w[0] < w[1]), "{rates:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trials_are_reproducible(seed in any::<u64>(), p in 0.01f64..0.1) {
        let cfg = TrialConfig { code: CodeKind::BitFlip, variant: Some(Variant::Perfect), p, seed, max_cycles: 1 << 30 };
        let a = run_trial(&cfg).unwrap();
        prop_assert_eq!(a, run_trial(&cfg).unwrap());
        prop_assert!(!a.censored);
        prop_assert!(a.cycles_to_failure >= 1);
    }
}
