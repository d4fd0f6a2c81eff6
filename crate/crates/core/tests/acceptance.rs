//! Acceptance checks. Every criterion prints one PASS/FAIL line; the process
//! fails if any criterion fails.

mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seqstr::alphabet::{decode_seq, sep_word, word, Sym, Word, SEP};
use seqstr::bench::template_suite;
use seqstr::cefa::{cefa_register_image, cefa_witness, Cefa};
use seqstr::engine::{solve, solve_source, SolveOptions, Verdict};
use seqstr::frontend::parse_script;
use seqstr::interp::{brute_force_sat, check_model, elem_str, subseq_str, write_str, BruteResult};
use seqstr::lia::{check_sat_with, LiaFormula, LiaResult, LinExpr, Limits, Model};
use seqstr::preimage::{pre_concat, pre_elem, pre_nft, pre_seqconcat, pre_subseq, pre_write, write_pairs, PreimageAlternative};
use seqstr::transducers::Transducer;
use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

const VERSION_NUMBER: &str = include_str!("corpus/version_number.smt2");

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

/// `q0 -†-> q1 -a-> q2 -a-> q2 -†-> q1`, every step adding 1 to the length
/// register, initial q0, final q1.
fn worked_example() -> Cefa {
    let mut c = Cefa::new(vec!["r1".into()]);
    let q0 = c.add_state(false);
    let q1 = c.add_state(true);
    let q2 = c.add_state(false);
    c.initial.push(q0);
    let a = 'a' as Sym;
    c.add_trans(q0, SEP, SEP, q1, vec![1]);
    c.add_trans(q1, a, a, q2, vec![1]);
    c.add_trans(q2, a, a, q2, vec![1]);
    c.add_trans(q2, SEP, SEP, q1, vec![1]);
    c
}

fn one(v: &[i64]) -> BTreeSet<Vec<i64>> {
    [v.to_vec()].into_iter().collect()
}

fn c1_write_example() -> Outcome {
    let start = Instant::now();
    let a = worked_example();
    let it = LinExpr::var("it");
    let pairs = write_pairs(&a, &it);
    let alts = pre_write(&a, &it);
    // in-range alternatives come first; the last one covers out-of-range writes
    let in_range = &alts[..alts.len().saturating_sub(1)];
    let mut ok = pairs == vec![(1, 2)] && in_range.len() == 1;
    let mut detail = format!("pairs {pairs:?}, {} in-range alternative(s)", in_range.len());
    if let Some(alt) = in_range.first() {
        let bx = alt.args[0].accepts_with_cost(&sep_word("†ab†a†")).unwrap();
        let by = alt.args[1].accepts_with_cost(&word("aa")).unwrap();
        ok &= bx == one(&[4, 1]) && by == one(&[2]);
        detail += &format!("; B(†ab†a†) = {bx:?}, A[q1,q2](aa) = {by:?}");
    }
    let t = start.elapsed();
    ok &= t < Duration::from_secs(1);
    outcome(ok, format!("{detail}; {t:?}"))
}

fn c2_subseq_example() -> Outcome {
    let start = Instant::now();
    let alts = pre_subseq(&worked_example(), &LinExpr::var("it1"), &LinExpr::var("it2"));
    let costs = alts[0].args[0].accepts_with_cost(&sep_word("†a†aa†")).unwrap();
    let t = start.elapsed();
    let ok = costs.contains(&vec![4, 2, 1]) && t < Duration::from_secs(1);
    outcome(ok, format!("B(†a†aa†) = {costs:?}; {t:?}"))
}

fn c3_unsat_example() -> Outcome {
    let src = "(declare-fun s0 () (Seq String))(declare-fun s1 () (Seq String))
        (declare-fun u () String)(declare-fun v () String)
        (assert (= s1 (seq.++ s0 (seq.++ (seq.unit u) (seq.unit v)))))
        (assert (< (seq.len s1) 2))";
    let start = Instant::now();
    let v = solve_source(src, &SolveOptions::default());
    let t = start.elapsed();
    let ok = matches!(v, Ok(Verdict::Unsat)) && t < Duration::from_secs(5);
    outcome(ok, format!("verdict {:?}; {t:?}", v.map(|v| v.name())))
}

fn c4_version_number() -> Outcome {
    let script = parse_script(VERSION_NUMBER).expect("corpus script parses");
    let start = Instant::now();
    let opts = SolveOptions {
        timeout: Some(Duration::from_secs(60)),
        ..SolveOptions::default()
    };
    let v = solve(&script, &opts);
    let t = start.elapsed();
    match v {
        Ok(Verdict::Sat(m)) => {
            let ok = check_model(&script, &m) && t <= Duration::from_secs(60);
            outcome(ok, format!("sat in {t:?}, model verified: {}", check_model(&script, &m)))
        }
        Ok(Verdict::Unsat) => {
            // a subclass of the printable characters covering digits, a
            // letter, the dot and another splitting character
            let alpha: Vec<Sym> = "01a.-".chars().map(|c| c as Sym).collect();
            let b0 = Instant::now();
            let brute = brute_force_sat(&script, 8, 4, &alpha);
            let bt = b0.elapsed();
            let agrees = matches!(brute, BruteResult::NoModelWithinBounds);
            let ok = agrees && t <= Duration::from_secs(60) && bt <= Duration::from_secs(600);
            outcome(
                ok,
                format!("unsat in {t:?}; bounded search over \"01a.-\" (8, 4) finds no model: {agrees} ({bt:?})"),
            )
        }
        other => outcome(false, format!("{:?} after {t:?}", other.map(|v| v.to_string()))),
    }
}

fn c5_transducers() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let str_inputs = words(&AB, 6);
    let seq_inputs: Vec<Word> = words(&ABS, 6).into_iter().filter(|w| decode_seq(w).is_some()).collect();
    let (mut checked, mut bad) = (0usize, Vec::new());
    for kind in 0..5 {
        for _ in 0..20 {
            let e = random_ab_regex(&mut rng, 2);
            let t = match kind {
                0 => Transducer::Filter(e),
                1 => Transducer::MatchAllStr(e),
                2 => {
                    let u = words(&AB, 2)[rng.gen_range(0..7)].clone();
                    Transducer::ReplaceAll(e, u)
                }
                3 => Transducer::SplitStr(e),
                _ => Transducer::Join(words(&AB, 2)[rng.gen_range(0..7)].clone()),
            };
            let nft = t.nft();
            let inputs = if t.seq_input() { &seq_inputs } else { &str_inputs };
            for w in inputs {
                let expected: BTreeSet<Word> = t.apply(w).into_iter().collect();
                let got = nft.outputs(w, 64).expect("bounded outputs");
                checked += 1;
                if got != expected && bad.len() < 3 {
                    bad.push(format!("{t} on {w:?}: {got:?} vs {expected:?}"));
                }
            }
        }
    }
    let t = start.elapsed();
    let ok = bad.is_empty() && t <= Duration::from_secs(300);
    outcome(ok, format!("{checked} runs over 100 transducers, mismatches {bad:?}; {t:?}"))
}

/// One pre-image case: the alternatives, how they are queried, and the
/// concrete operation they invert.
struct PreCase {
    name: &'static str,
    /// Alternatives for each index valuation `(i, j)`.
    alts: Vec<((i64, i64), Vec<PreimageAlternative>, Model)>,
    domains: Vec<Vec<Word>>,
    apply: Box<dyn Fn(&[&[Sym]], i64, i64) -> Option<Word>>,
}

/// Alternatives for every index valuation, built either once with symbolic
/// index variables or once per constant valuation.
fn indexed(
    grid: &[(i64, i64)],
    symbolic: bool,
    build: &dyn Fn(&LinExpr, &LinExpr) -> Vec<PreimageAlternative>,
) -> Vec<((i64, i64), Vec<PreimageAlternative>, Model)> {
    let shared = symbolic.then(|| build(&LinExpr::var("i"), &LinExpr::var("j")));
    grid.iter()
        .map(|&(i, j)| match &shared {
            Some(alts) => {
                let env: Model = [("i".to_string(), i), ("j".to_string(), j)].into_iter().collect();
                ((i, j), alts.clone(), env)
            }
            None => ((i, j), build(&LinExpr::constant(i), &LinExpr::constant(j)), Model::new()),
        })
        .collect()
}

fn pre_case(rng: &mut ChaCha8Rng, op: usize, a: &Cefa) -> PreCase {
    let symbolic = rng.gen_bool(0.5);
    let none = [(0, 0)];
    let single: Vec<(i64, i64)> = (-1..=4).map(|i| (i, 0)).collect();
    let double: Vec<(i64, i64)> = (-1..=3).flat_map(|i| (-1..=3).map(move |j| (i, j))).collect();
    let ab_abs = words(&ABS, 3);
    match op {
        0 => PreCase {
            name: "concat",
            alts: vec![((0, 0), pre_concat(a), Model::new())],
            domains: vec![ab_abs.clone(), ab_abs],
            apply: Box::new(|x, _, _| Some([x[0], x[1]].concat())),
        },
        1 => PreCase {
            name: "seqconcat",
            alts: vec![((0, 0), pre_seqconcat(a), Model::new())],
            domains: vec![words(&ABS, 4), ab_abs],
            apply: Box::new(|x, _, _| {
                decode_seq(x[0])?;
                decode_seq(x[1])?;
                Some([&x[0][..x[0].len() - 1], x[1]].concat())
            }),
        },
        2 => {
            let e = random_ab_regex(rng, 2);
            let t = match rng.gen_range(0..5) {
                0 => Transducer::Filter(e),
                1 => Transducer::MatchAllStr(e),
                2 => Transducer::SplitStr(e),
                3 => Transducer::ReplaceAll(e, word("b")),
                _ => Transducer::Join(word("a")),
            };
            let alts = pre_nft(&t.nft().remove_epsilon(), a).expect("no register clash");
            PreCase {
                name: "nft",
                alts: indexed(&none, true, &|_, _| alts.clone()),
                domains: vec![words(&ABS, 5)],
                apply: Box::new(move |x, _, _| t.apply(x[0])),
            }
        }
        3 => PreCase {
            name: "write",
            alts: indexed(&single, symbolic, &|i, _| pre_write(a, i)),
            domains: vec![words(&ABS, 4), words(&ABS, 2)],
            apply: Box::new(|x, i, _| {
                if x[1].contains(&SEP) {
                    return None;
                }
                write_str(x[0], i, x[1])
            }),
        },
        4 => PreCase {
            name: "subseq",
            alts: indexed(&double, symbolic, &|i, j| pre_subseq(a, i, j)),
            domains: vec![words(&ABS, 5)],
            apply: Box::new(|x, i, j| subseq_str(x[0], i, j)),
        },
        _ => PreCase {
            name: "elem",
            alts: indexed(&single, symbolic, &|i, _| pre_elem(a, i)),
            domains: vec![words(&ABS, 5)],
            apply: Box::new(|x, i, _| elem_str(x[0], i)),
        },
    }
}

/// Compares, for every argument tuple and index valuation, the register
/// values admitted by the alternatives with the costs of `a` on the
/// concrete result. Returns the number of comparisons and the first
/// mismatch.
fn check_pre_case(a: &Cefa, case: &PreCase) -> (usize, Option<String>) {
    let mut n = 0;
    let tuples: Vec<Vec<&Word>> = match case.domains.as_slice() {
        [d] => d.iter().map(|x| vec![x]).collect(),
        [d1, d2] => d1.iter().flat_map(|x| d2.iter().map(move |y| vec![x, y])).collect(),
        _ => unreachable!(),
    };
    for ((i, j), alts, env) in &case.alts {
        for t in &tuples {
            let args: Vec<&[Sym]> = t.iter().map(|w| w.as_slice()).collect();
            let expected = match (case.apply)(&args, *i, *j) {
                Some(out) => costs_1(a, &out),
                None => BTreeSet::new(),
            };
            let got = admitted_values(alts, &args, env, "r0", -30..=30);
            n += 1;
            if got != expected {
                return (n, Some(format!("{} i={i} j={j} args={args:?}: {got:?} vs {expected:?}", case.name)));
            }
        }
    }
    (n, None)
}

fn c6_preimages() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cases = 600;
    let mut comparisons = 0;
    for k in 0..cases {
        let a = random_cefa(&mut rng, 4, 1, &ABS, (-1, 2));
        let case = pre_case(&mut rng, k % 6, &a);
        let (n, bad) = check_pre_case(&a, &case);
        comparisons += n;
        if let Some(msg) = bad {
            return outcome(false, format!("case {k}: {msg}\n{a}"));
        }
    }
    let t = start.elapsed();
    outcome(
        t <= Duration::from_secs(600),
        format!("{cases} random automata, {comparisons} membership comparisons agree; {t:?}"),
    )
}

fn image_has(formula: &LiaFormula, regs: &[String], c: &[i64]) -> bool {
    let mut parts = vec![formula.clone()];
    for (r, v) in regs.iter().zip(c) {
        parts.push(LiaFormula::eq(LinExpr::var(r.clone()), LinExpr::constant(*v)));
    }
    matches!(
        check_sat_with(&LiaFormula::and(parts), &Limits::default()),
        Ok(LiaResult::Sat(_))
    )
}

fn c7_image_round_trip() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let inputs = words(&ABS, 6);
    let (mut costs_checked, mut points_checked) = (0, 0);
    let automata = 200;
    for n in 0..automata {
        let k = 1 + n % 2;
        let a = random_cefa(&mut rng, 4, k, &ABS, (-1, 2));
        let img = cefa_register_image(&a);
        let mut seen = BTreeSet::new();
        for w in &inputs {
            seen.extend(a.accepts_with_cost(w).unwrap());
        }
        for c in &seen {
            costs_checked += 1;
            if !image_has(&img.formula, &img.registers, c) {
                return outcome(false, format!("cost {c:?} missing from the image of\n{a}"));
            }
        }
        let points: Vec<Vec<i64>> = if k == 1 {
            (-6..=6).map(|x| vec![x]).collect()
        } else {
            (-6..=6).flat_map(|x| (-6..=6).map(move |y| vec![x, y])).collect()
        };
        for c in points {
            if !image_has(&img.formula, &img.registers, &c) {
                continue;
            }
            points_checked += 1;
            let w = cefa_witness(&a, &c).unwrap();
            let realised = w.as_ref().is_some_and(|w| a.accepts_with_cost(w).unwrap().contains(&c));
            if !realised {
                return outcome(false, format!("image point {c:?} has witness {w:?}\n{a}"));
            }
        }
    }
    let t = start.elapsed();
    outcome(
        t <= Duration::from_secs(300),
        format!("{automata} automata: {costs_checked} run costs in the image, {points_checked} image points witnessed; {t:?}"),
    )
}

fn c8_end_to_end() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let opts = SolveOptions {
        timeout: Some(Duration::from_secs(20)),
        ..SolveOptions::default()
    };
    let scripts = 220;
    let (mut oracle_sat, mut sat, mut unsat, mut unknown) = (0, 0, 0, 0);
    for k in 0..scripts {
        let src = random_script(&mut rng);
        let script = parse_script(&src).expect("generated scripts parse");
        let brute = brute_force_sat(&script, 3, 3, &AB);
        let verdict = match solve(&script, &opts) {
            Ok(v) => v,
            Err(e) => return outcome(false, format!("script {k}: {e}\n{src}")),
        };
        let brute_sat = matches!(brute, BruteResult::Sat(_));
        oracle_sat += brute_sat as usize;
        match &verdict {
            Verdict::Sat(m) => {
                sat += 1;
                if !check_model(&script, m) {
                    return outcome(false, format!("script {k}: model fails\n{src}"));
                }
            }
            Verdict::Unsat => unsat += 1,
            Verdict::Unknown(_) => unknown += 1,
        }
        if brute_sat && !matches!(verdict, Verdict::Sat(_)) {
            return outcome(false, format!("script {k}: bounded model exists but solver says {verdict}\n{src}"));
        }
    }
    let t = start.elapsed();
    outcome(
        t <= Duration::from_secs(900),
        format!(
            "{scripts} scripts, {oracle_sat} with a bounded model; solver sat {sat}, unsat {unsat}, unknown {unknown}; {t:?}"
        ),
    )
}

fn c9_benchmark() -> Outcome {
    let start = Instant::now();
    let opts = SolveOptions {
        timeout: Some(Duration::from_secs(60)),
        ..SolveOptions::default()
    };
    let suite = template_suite(0);
    let (mut decided, mut sat) = (0, 0);
    let mut failures = Vec::new();
    for inst in &suite {
        let script = parse_script(&inst.script).expect("generated scripts parse");
        match solve(&script, &opts) {
            Ok(Verdict::Sat(m)) => {
                if check_model(&script, &m) {
                    decided += 1;
                    sat += 1;
                } else {
                    failures.push(format!("{}: model fails", inst.name));
                }
            }
            Ok(Verdict::Unsat) => decided += 1,
            Ok(Verdict::Unknown(why)) => failures.push(format!("{}: {why}", inst.name)),
            Err(e) => failures.push(format!("{}: {e}", inst.name)),
        }
    }
    let rate = decided as f64 / suite.len() as f64;
    let bad_models = failures.iter().any(|f| f.ends_with("model fails"));
    let t = start.elapsed();
    outcome(
        rate >= 0.95 && !bad_models,
        format!(
            "{decided}/{} decided ({:.1}%), {sat} sat with verified models; undecided {failures:?}; {t:?}",
            suite.len(),
            rate * 100.0
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("write pre-image worked example", c1_write_example),
        ("subseq pre-image worked example", c2_subseq_example),
        ("unsat sequence-concatenation example", c3_unsat_example),
        ("version-number pipeline", c4_version_number),
        ("transducers against reference semantics", c5_transducers),
        ("pre-image soundness and completeness", c6_preimages),
        ("register image round trip", c7_image_round_trip),
        ("end-to-end agreement with bounded search", c8_end_to_end),
        ("generated 140-instance suite", c9_benchmark),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let id = n + 1;
        if !filter.is_empty() && !filter.iter().any(|f| f == &id.to_string() || name.contains(f.as_str())) {
            continue;
        }
        let o = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        failed += !o.ok as usize;
        println!("criterion {id} {}: {name}: {}", if o.ok { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
