mod common;

use common::{random_ab_regex, random_cefa, words, AB, ABS};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seqstr::alphabet::{decode_seq, encode_seq, Word, SEP};
use seqstr::automata::{compile_regex, nfa_accepts};
use seqstr::cefa::{cefa_register_image, Cefa};
use seqstr::interp::{match_all, regex_matches, split};
use seqstr::lia::{check_sat_with, LiaFormula, LiaResult, Limits, LinExpr};
use std::collections::{BTreeMap, BTreeSet};

fn element() -> impl Strategy<Value = Word> {
    proptest::collection::vec(prop_oneof![Just('a' as u32), Just('b' as u32)], 0..4)
}

fn renamed(a: &Cefa, suffix: &str) -> Cefa {
    let map: BTreeMap<String, String> = a.registers.iter().map(|r| (r.clone(), format!("{r}{suffix}"))).collect();
    a.rename_registers(&map).unwrap()
}

proptest! {
    #[test]
    fn encoding_round_trips(s in proptest::collection::vec(element(), 0..5)) {
        let w = encode_seq(&s);
        prop_assert_eq!(w.iter().filter(|&&c| c == SEP).count(), s.len() + 1);
        prop_assert_eq!(decode_seq(&w), Some(s));
    }

    #[test]
    fn only_encodings_decode(w in proptest::collection::vec(prop_oneof![Just('a' as u32), Just(SEP)], 0..6)) {
        match decode_seq(&w) {
            Some(s) => prop_assert_eq!(encode_seq(&s), w),
            None => prop_assert!(w.first() != Some(&SEP) || w.last() != Some(&SEP)),
        }
    }

    #[test]
    fn product_concatenates_costs(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_cefa(&mut rng, 3, 1, &ABS, (-1, 2));
        let b = renamed(&random_cefa(&mut rng, 3, 1, &ABS, (-1, 2)), "_b");
        let p = a.product(&b).unwrap();
        for w in words(&ABS, 4) {
            let ca = a.accepts_with_cost(&w).unwrap();
            let cb = b.accepts_with_cost(&w).unwrap();
            let expected: BTreeSet<Vec<i64>> = ca
                .iter()
                .flat_map(|x| cb.iter().map(move |y| [x.clone(), y.clone()].concat()))
                .collect();
            prop_assert_eq!(p.accepts_with_cost(&w).unwrap(), expected);
        }
    }

    #[test]
    fn trim_and_reduce_keep_costs(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_cefa(&mut rng, 4, 2, &ABS, (-1, 1));
        let (t, r) = (a.trim(), a.reduce());
        for w in words(&ABS, 4) {
            let c = a.accepts_with_cost(&w).unwrap();
            prop_assert_eq!(&t.accepts_with_cost(&w).unwrap(), &c);
            prop_assert_eq!(&r.accepts_with_cost(&w).unwrap(), &c);
        }
    }

    #[test]
    fn fixing_a_register_selects_runs(seed in any::<u64>(), value in -1i64..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_cefa(&mut rng, 4, 2, &ABS, (0, 2));
        let f = a.fix_register("r0", value).expect("updates are nonnegative");
        prop_assert_eq!(&f.registers, &vec!["r1".to_string()]);
        for w in words(&ABS, 4) {
            let expected: BTreeSet<Vec<i64>> = a
                .accepts_with_cost(&w)
                .unwrap()
                .into_iter()
                .filter(|c| c[0] == value)
                .map(|c| vec![c[1]])
                .collect();
            prop_assert_eq!(f.accepts_with_cost(&w).unwrap(), expected);
        }
    }

    #[test]
    fn fixing_refuses_negative_updates(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = random_cefa(&mut rng, 3, 1, &AB, (0, 1));
        a.add_trans(0, 'a' as u32, 'a' as u32, 0, vec![-1]);
        prop_assert!(a.fix_register("r0", 0).is_none());
    }

    #[test]
    fn run_costs_lie_in_the_image(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_cefa(&mut rng, 3, 1, &ABS, (-1, 2));
        let img = cefa_register_image(&a);
        let costs: BTreeSet<Vec<i64>> = words(&ABS, 4).iter().flat_map(|w| a.accepts_with_cost(w).unwrap()).collect();
        for c in costs {
            let f = LiaFormula::and(vec![
                img.formula.clone(),
                LiaFormula::eq(LinExpr::var(img.registers[0].clone()), LinExpr::constant(c[0])),
            ]);
            prop_assert!(matches!(check_sat_with(&f, &Limits::default()), Ok(LiaResult::Sat(_))), "{:?} missing", c);
        }
    }

    #[test]
    fn compiled_regexes_agree_with_derivatives(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_ab_regex(&mut rng, 4);
        let n = compile_regex(&e);
        for w in words(&AB, 5) {
            prop_assert_eq!(nfa_accepts(&n, &w), regex_matches(&e, &w), "{} on {:?}", e.to_smtlib(), w);
        }
    }

    #[test]
    fn splitting_and_matching_partition_the_input(seed in any::<u64>(), u in proptest::collection::vec(prop_oneof![Just('a' as u32), Just('b' as u32)], 0..6)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_ab_regex(&mut rng, 3);
        let parts = split(&e, &u);
        let matches = match_all(&e, &u);
        // pieces and matches alternate, so together they rebuild the input
        prop_assert_eq!(parts.len(), matches.len() + 1);
        let mut rebuilt = Vec::new();
        for (i, p) in parts.iter().enumerate() {
            rebuilt.extend_from_slice(p);
            if let Some(m) = matches.get(i) {
                prop_assert!(regex_matches(&e, m));
                rebuilt.extend_from_slice(m);
            }
        }
        prop_assert_eq!(rebuilt, u);
    }
}
