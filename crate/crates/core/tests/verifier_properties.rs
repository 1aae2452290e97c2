use ltlx_core::acceptor::{load_acceptor, Acceptor, Dfa};
use ltlx_core::alphabet::{Alphabet, Symbol};
use ltlx_core::ltl::{parse_ltl, CompiledFormula, Formula};
use ltlx_core::sampling::{stream_rng, DistributionSpec, WordSampler, EVAL_STREAM, VERIFIER_STREAM};
use ltlx_core::verifier::{
    early_stop_bounds, is_counterexample, suite_size, total_tested_bound, verify, verify_suite, BatchMode, Target,
};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

proptest! {
    #[test]
    fn suite_sizes_increase(i in 1usize..200, eps in 0.001f64..0.5, delta in 0.001f64..0.5) {
        prop_assert!(suite_size(i + 1, eps, delta) > suite_size(i, eps, delta));
        let sum: usize = (1..=i).map(|j| suite_size(j, eps, delta)).sum();
        prop_assert!(sum as f64 <= total_tested_bound(i, eps, delta) + 1e-9);
    }

    #[test]
    fn early_stop_bounds_are_ordered(r in 2usize..500, k in 1usize..50, eps in 0.01f64..0.3) {
        let k = k.min(r);
        let b = early_stop_bounds(r, k, eps, 0.05).unwrap();
        prop_assert!(b.epsilon_prime > 0.0);
        prop_assert!(b.ln_delta_prime <= (b.r_i as f64) * std::f64::consts::LN_2);
        prop_assert_eq!(b.vacuous, b.delta_prime >= 1.0 || b.epsilon_prime >= 1.0);
    }

    #[test]
    fn reported_counterexamples_are_real(seed in any::<u64>()) {
        let acc = load_acceptor("ltl:F(a & X(b))", None).unwrap();
        let ab = acc.alphabet().clone();
        let target = Target::new(&acc, &Formula::True);
        let conj = CompiledFormula::new(&parse_ltl("F(a)", &ab).unwrap());
        let sampler = WordSampler::new(DistributionSpec::uniform(8), &ab).unwrap();
        let out = verify(&conj, &target, 1, 0.05, 0.05, &sampler, &mut stream_rng(seed, VERIFIER_STREAM), BatchMode::CollectAll).unwrap();
        prop_assert_eq!(out.mismatches, out.counterexamples.len());
        for ce in &out.counterexamples {
            prop_assert_eq!(is_counterexample(&ce.word, &conj, &target).unwrap(), Some(ce.expected));
        }
    }
}

#[test]
fn worked_suite_sizes() {
    assert_eq!(suite_size(1, 0.05, 0.05), 74);
    assert_eq!(suite_size(2, 0.05, 0.05), 88);
}

#[test]
fn query_restricts_the_target() {
    let acc = load_acceptor("ltl:F(a)", None).unwrap();
    let ab = acc.alphabet().clone();
    let target = Target::new(&acc, &parse_ltl("G(b)", &ab).unwrap());
    assert!(!target.label(&ab.parse_word("a").unwrap()).unwrap());
    assert!(!target.label(&ab.parse_word("bb").unwrap()).unwrap());
    let target = Target::new(&acc, &Formula::True);
    assert!(target.label(&ab.parse_word("ba").unwrap()).unwrap());
}

#[test]
fn first_failure_keeps_exact_mismatch_count() {
    let acc = load_acceptor("ltl:F(a)", None).unwrap();
    let ab = acc.alphabet().clone();
    let target = Target::new(&acc, &Formula::True);
    let suite: Vec<_> = ["a", "b", "ba", "cc", "c"].iter().map(|w| ab.parse_word(w).unwrap()).collect();
    let conj = CompiledFormula::new(&Formula::False);
    let all = verify_suite(&conj, &target, &suite, BatchMode::CollectAll).unwrap();
    let first = verify_suite(&conj, &target, &suite, BatchMode::FirstFailure).unwrap();
    assert_eq!(all.mismatches, 2);
    assert_eq!(first.mismatches, 2);
    assert_eq!(first.counterexamples.len(), 1);
    assert_eq!(first.counterexamples[0], all.counterexamples[0]);
    assert_eq!(first.tested, suite.len());
}

#[test]
fn dfa_conjecture_can_be_verified() {
    let ab = Alphabet::new(["a", "b"]).unwrap();
    let dfa = Dfa::new(ab.clone(), 2, 0, [1], [(0, Symbol(0), 1), (0, Symbol(1), 0), (1, Symbol(0), 1), (1, Symbol(1), 1)]).unwrap();
    let acc = Acceptor::from_formula(parse_ltl("F(a)", &ab).unwrap(), ab.clone());
    let target = Target::new(&acc, &Formula::True);
    let suite: Vec<_> = ab.words_up_to(6).collect();
    assert!(verify_suite(&dfa, &target, &suite, BatchMode::CollectAll).unwrap().passed());
}

#[test]
fn symbol_frequencies_follow_weights() {
    let ab = Alphabet::new(["a", "b", "c"]).unwrap();
    let spec: DistributionSpec = "uniform:maxlen=20,weights=5;3;2".parse().unwrap();
    let sampler = WordSampler::new(spec, &ab).unwrap();
    let suite = sampler.sample_suite(4000, &mut stream_rng(9, EVAL_STREAM));
    let mut counts = [0f64; 3];
    for w in &suite {
        for s in w.iter() {
            counts[s.index()] += 1.0;
        }
    }
    let total: f64 = counts.iter().sum();
    let stat: f64 = counts.iter().zip([0.5, 0.3, 0.2]).map(|(o, p)| (o - total * p).powi(2) / (total * p)).sum();
    let p_value = 1.0 - ChiSquared::new(2.0).unwrap().cdf(stat);
    assert!(p_value > 0.001, "chi-square {stat}, p = {p_value}");
    assert!(suite.iter().all(|w| w.len() <= 20));
}

#[test]
fn streams_are_independent_and_reproducible() {
    let ab = Alphabet::new(["a", "b"]).unwrap();
    let sampler = WordSampler::new(DistributionSpec::uniform(12), &ab).unwrap();
    let a = sampler.sample_suite(50, &mut stream_rng(4, VERIFIER_STREAM));
    let b = sampler.sample_suite(50, &mut stream_rng(4, VERIFIER_STREAM));
    let c = sampler.sample_suite(50, &mut stream_rng(4, EVAL_STREAM));
    assert_eq!(a, b);
    assert_ne!(a, c);
}
