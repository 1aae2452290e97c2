use ltlx_core::acceptor::{Acceptor, Dfa};
use ltlx_core::alphabet::Alphabet;
use ltlx_core::ltl::Formula;
use ltlx_core::lstar::{lstar_learn, LstarBudget, ObservationTable};
use ltlx_core::sampling::{stream_rng, DistributionSpec, WordSampler};
use ltlx_core::verifier::Target;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_dfa(seed: u64, states: usize) -> Dfa {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table = (0..states).map(|_| (0..2).map(|_| rng.gen_range(0..states)).collect()).collect();
    let accepting: Vec<usize> = (0..states).filter(|_| rng.gen_bool(0.5)).collect();
    Dfa::from_table(Alphabet::new(["a", "b"]).unwrap(), 0, accepting, table).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn recovers_small_dfas(seed in any::<u64>(), states in 1usize..=5) {
        let truth = random_dfa(seed, states);
        let acc = Acceptor::from_dfa(truth.clone());
        let target = Target::new(&acc, &Formula::True);
        let sampler = WordSampler::new(DistributionSpec::uniform(8), acc.alphabet()).unwrap();
        let res = lstar_learn(&target, 1e-4, 0.05, &sampler, &mut stream_rng(seed, 0), LstarBudget::default()).unwrap();
        let minimal = truth.minimize().state_count();
        prop_assert!(res.dfa.state_count() <= minimal);
        for w in acc.alphabet().words_up_to(8) {
            prop_assert_eq!(res.dfa.accepts(&w), truth.accepts(&w));
        }
    }

    #[test]
    fn counterexamples_make_progress(seed in any::<u64>(), states in 2usize..=5) {
        let truth = random_dfa(seed, states);
        let acc = Acceptor::from_dfa(truth.clone());
        let target = Target::new(&acc, &Formula::True);
        let mut table = ObservationTable::new(&target).unwrap();
        table.stabilize().unwrap();
        for _ in 0..10 {
            let hyp = table.hypothesis();
            let Some(ce) = acc.alphabet().words_up_to(8).find(|w| hyp.accepts(w) != truth.accepts(w)) else { break };
            let before = table.distinct_rows();
            table.add_counterexample(&ce).unwrap();
            table.stabilize().unwrap();
            prop_assert!(table.distinct_rows() > before);
            prop_assert!(table.hypothesis().accepts(&ce) == truth.accepts(&ce));
        }
    }
}
