mod common;

use common::{holds_at, holds_empty, oracle, random_formula, random_word};
use ltlx_core::alphabet::Alphabet;
use ltlx_core::ltl::{evaluate, parse_ltl, satisfies, satisfies_empty, CompiledFormula, Formula};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn abc() -> Alphabet {
    Alphabet::new(["a", "b", "c"]).unwrap()
}

fn formula_and_word(seed: u64) -> (Formula, ltlx_core::alphabet::Word) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (random_formula(&mut rng, 3, 4), random_word(&mut rng, 3, 9))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>()) {
        let ab = abc();
        let (phi, _) = formula_and_word(seed);
        prop_assert_eq!(parse_ltl(&phi.to_text(&ab), &ab).unwrap(), phi);
    }

    #[test]
    fn table_matches_recursive_oracle(seed in any::<u64>()) {
        let (phi, u) = formula_and_word(seed);
        let table = evaluate(&phi, &u);
        for (chi, sub) in table.subformulas().iter().enumerate() {
            for t in 1..=u.len() {
                prop_assert_eq!(table.get(t, chi), holds_at(sub, &u, t));
            }
        }
        prop_assert_eq!(satisfies(&phi, &u), oracle(&phi, &u));
        prop_assert_eq!(CompiledFormula::new(&phi).satisfies(&u), oracle(&phi, &u));
    }

    #[test]
    fn empty_word_values_compose(seed in any::<u64>()) {
        let (phi, _) = formula_and_word(seed);
        prop_assert_eq!(satisfies_empty(&phi), holds_empty(&phi));
    }

    #[test]
    fn derived_operators_agree_with_definitions(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_formula(&mut rng, 3, 2);
        let q = random_formula(&mut rng, 3, 2);
        let u = random_word(&mut rng, 3, 8);
        let same = |x: &Formula, y: &Formula| satisfies(x, &u) == satisfies(y, &u);
        prop_assert!(same(&Formula::finally(p.clone()), &Formula::until(Formula::True, p.clone())));
        prop_assert!(same(&Formula::globally(p.clone()), &Formula::not(Formula::finally(Formula::not(p.clone())))));
        prop_assert!(same(&Formula::implies(p.clone(), q.clone()), &Formula::or(Formula::not(p.clone()), q.clone())));
        prop_assert!(same(&Formula::and(p.clone(), q.clone()), &Formula::not(Formula::or(Formula::not(p.clone()), Formula::not(q.clone())))));
        // X is strong: X(true) fails at the last position.
        prop_assert_eq!(satisfies(&Formula::next(Formula::True), &u), u.len() >= 2);
    }

    #[test]
    fn size_counts_distinct_subformulas(seed in any::<u64>()) {
        let (phi, _) = formula_and_word(seed);
        let mut seen = std::collections::HashSet::new();
        fn walk(f: &Formula, seen: &mut std::collections::HashSet<Formula>) {
            if seen.insert(f.clone()) {
                let (l, r) = f.children();
                l.into_iter().chain(r).for_each(|c| walk(c, seen));
            }
        }
        walk(&phi, &mut seen);
        prop_assert_eq!(phi.size(), seen.len());
        prop_assert_eq!(CompiledFormula::new(&phi).len(), seen.len());
    }
}

#[test]
fn empty_word_table() {
    let ab = abc();
    let empty = ab.parse_word("").unwrap();
    for (text, expected) in [
        ("a", false),
        ("false", false),
        ("X(a)", false),
        ("F(a)", false),
        ("a U b", false),
        ("true", true),
        ("G(a)", true),
        ("!F(a)", true),
        ("G(a) & true", true),
        ("a -> b", true),
    ] {
        assert_eq!(satisfies(&parse_ltl(text, &ab).unwrap(), &empty), expected, "{text}");
    }
}

#[test]
fn worked_example() {
    let ab = abc();
    let phi = parse_ltl("F(a & X(b))", &ab).unwrap();
    assert!(satisfies(&phi, &ab.parse_word("c a b").unwrap()));
    assert!(!satisfies(&phi, &ab.parse_word("b a").unwrap()));
    assert!(!satisfies(&phi, &ab.parse_word("a c b").unwrap()));
}
